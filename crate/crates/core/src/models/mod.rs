//! The two generative models used by the neural optimizers, plus a
//! versioned text checkpoint format shared by both.

pub mod da;
pub mod nade;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

pub use da::{corrupt, CorruptionKind, DaModel};
pub use nade::NadeModel;

use crate::error::{Error, Result};
use crate::genotype::Genotype;

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `log(sigmoid(z))` without overflow for large `|z|`.
pub(crate) fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

const LOSS_EPS: f64 = 1e-7;

/// Binary cross-entropy of target `t` under Bernoulli parameter `p`, with `p`
/// clamped away from 0 and 1.
pub(crate) fn bce(p: f64, t: bool) -> f64 {
    let p = p.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
    if t {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// `len` weights uniform in `+-sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot<R: Rng + ?Sized>(
    len: usize,
    fan_in: usize,
    fan_out: usize,
    rng: &mut R,
) -> Vec<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
}

const MAGIC: &str = "nneda-model";
const VERSION: u32 = 1;

/// A trained model snapshot.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Da(DaModel),
    Nade(NadeModel),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Da(m) => m.dim,
            Model::Nade(m) => m.dim,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Da(_) => "da",
            Model::Nade(_) => "nade",
        }
    }

    /// Draws one genotype. The dA needs an input; without one a uniform
    /// random input is used.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        input: Option<&[bool]>,
        clamp: Option<&[Option<bool>]>,
        rng: &mut R,
    ) -> Result<Genotype> {
        match self {
            Model::Nade(m) => m.sample(rng, clamp),
            Model::Da(m) => match input {
                Some(x) => m.sample_clamped(x, clamp, rng),
                None => {
                    let x = Genotype::random(m.dim, rng);
                    m.sample_clamped(x.bits(), clamp, rng)
                }
            },
        }
    }

    /// Text checkpoint. Floats use the shortest round-trip representation,
    /// so `from_text(to_text(m)) == m` exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION}\nkind {}\n", self.kind());
        let mut line = |key: &str, xs: &[f64]| {
            out.push_str(key);
            for x in xs {
                write!(out, " {x}").unwrap();
            }
            out.push('\n');
        };
        match self {
            Model::Da(m) => {
                line("dim", &[m.dim as f64]);
                line("hidden", &[m.hidden as f64]);
                line("learning_rate", &[m.learning_rate]);
                line("corruption", &[m.corruption]);
                line("enc_w", &m.enc_w);
                line("enc_b", &m.enc_b);
                line("dec_w", &m.dec_w);
                line("dec_b", &m.dec_b);
                writeln!(out, "corruption_kind {}", m.corruption_kind.as_str()).unwrap();
            }
            Model::Nade(m) => {
                line("dim", &[m.dim as f64]);
                line("hidden", &[m.hidden as f64]);
                line("learning_rate", &[m.learning_rate]);
                line("w", &m.w);
                line("c", &m.c);
                line("v", &m.v);
                line("b", &m.b);
                let order: Vec<String> = m.ordering().iter().map(usize::to_string).collect();
                writeln!(out, "ordering {}", order.join(" ")).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let header = lines.next().map(|(_, l)| l).unwrap_or_default();
        let mut head = header.split_whitespace();
        if head.next() != Some(MAGIC) {
            return Err(perr(1, "not a model checkpoint".into()));
        }
        match head.next().and_then(|v| v.parse::<u32>().ok()) {
            Some(VERSION) => {}
            other => return Err(perr(1, format!("unsupported checkpoint version {other:?}"))),
        }
        let mut fields: HashMap<String, (usize, Vec<String>)> = HashMap::new();
        for (i, line) in lines {
            let mut toks = line.split_whitespace();
            let Some(key) = toks.next() else { continue };
            fields.insert(key.to_string(), (i + 1, toks.map(String::from).collect()));
        }
        let get = |key: &str| -> Result<&(usize, Vec<String>)> {
            fields
                .get(key)
                .ok_or_else(|| perr(0, format!("missing field {key:?}")))
        };
        let floats = |key: &str, len: usize| -> Result<Vec<f64>> {
            let (line, toks) = get(key)?;
            if toks.len() != len {
                return Err(perr(
                    *line,
                    format!("{key}: expected {len} values, found {}", toks.len()),
                ));
            }
            toks.iter()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| perr(*line, format!("{key}: bad number {t:?}")))
                })
                .collect()
        };
        let scalar = |key: &str| -> Result<f64> { Ok(floats(key, 1)?[0]) };
        let count = |key: &str| -> Result<usize> {
            let v = scalar(key)?;
            if v < 1.0 || v.fract() != 0.0 {
                return Err(perr(
                    get(key)?.0,
                    format!("{key} must be a positive integer"),
                ));
            }
            Ok(v as usize)
        };
        let kind = get("kind")?.1.first().cloned().unwrap_or_default();
        let (dim, hidden) = (count("dim")?, count("hidden")?);
        let dh = dim * hidden;
        match kind.as_str() {
            "da" => {
                let mut m = DaModel::zeros(dim, hidden);
                m.learning_rate = scalar("learning_rate")?;
                m.corruption = scalar("corruption")?;
                m.enc_w = floats("enc_w", dh)?;
                m.enc_b = floats("enc_b", hidden)?;
                m.dec_w = floats("dec_w", dh)?;
                m.dec_b = floats("dec_b", dim)?;
                let ck = get("corruption_kind")?
                    .1
                    .first()
                    .cloned()
                    .unwrap_or_default();
                m.corruption_kind = CorruptionKind::parse(&ck)?;
                Ok(Model::Da(m))
            }
            "nade" => {
                let mut m = NadeModel::zeros(dim, hidden);
                m.learning_rate = scalar("learning_rate")?;
                m.w = floats("w", dh)?;
                m.c = floats("c", hidden)?;
                m.v = floats("v", dh)?;
                m.b = floats("b", dim)?;
                let (line, toks) = get("ordering")?;
                let ordering = toks
                    .iter()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| perr(*line, format!("bad ordering entry {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Model::Nade(m.with_ordering(ordering)?))
            }
            other => Err(perr(2, format!("unknown model kind {other:?}"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(-800.0).is_finite());
        assert!(log_sigmoid(800.0) <= 0.0);
        for z in [-30.0, -2.0, 0.3, 4.0, 30.0] {
            assert!((log_sigmoid(z) - sigmoid(z).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn checkpoints_round_trip_exactly() {
        let mut rng = RngStream::new(1);
        let mut da = DaModel::new(7, 3, 0.25, 0.05, &mut rng);
        da.corruption_kind = CorruptionKind::ZeroMask;
        da.dec_b[2] = -1.0 / 3.0;
        let da = Model::Da(da);
        assert_eq!(Model::from_text(&da.to_text()).unwrap(), da);

        let nade = NadeModel::new(5, 4, 0.1, &mut rng)
            .with_ordering(vec![4, 2, 0, 1, 3])
            .unwrap();
        let nade = Model::Nade(nade);
        assert_eq!(Model::from_text(&nade.to_text()).unwrap(), nade);
    }

    #[test]
    fn checkpoint_errors() {
        assert!(Model::from_text("hello").is_err());
        assert!(Model::from_text("nneda-model 2\nkind da\n").is_err());
        let good = Model::Nade(NadeModel::zeros(3, 2)).to_text();
        let truncated = good.replace("b 0 0 0", "b 0 0");
        assert!(matches!(
            Model::from_text(&truncated),
            Err(Error::Parse { .. })
        ));
    }
}
