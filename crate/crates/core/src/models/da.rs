//! Denoising autoencoder with Bernoulli outputs.
//!
//! Encoder `h = sigmoid(W x + b)`, decoder `y = sigmoid(W' h + b')`; the
//! decoder output is read as per-bit Bernoulli parameters. Weights are untied.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::Genotype;
use crate::models::{bce, glorot, sigmoid};

/// How a corrupted input bit is produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    /// Replace the bit with a fresh uniform bit.
    #[default]
    SaltPepper,
    /// Force the bit to zero.
    ZeroMask,
}

impl CorruptionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CorruptionKind::SaltPepper => "salt_pepper",
            CorruptionKind::ZeroMask => "zero_mask",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "salt_pepper" => Ok(CorruptionKind::SaltPepper),
            "zero_mask" => Ok(CorruptionKind::ZeroMask),
            other => Err(Error::Config(format!("unknown corruption kind {other:?}"))),
        }
    }
}

/// Each bit is independently corrupted with probability `p`.
pub fn corrupt<R: Rng + ?Sized>(
    x: &[bool],
    p: f64,
    kind: CorruptionKind,
    rng: &mut R,
) -> Vec<bool> {
    x.iter()
        .map(|&bit| {
            if p > 0.0 && rng.random::<f64>() < p {
                match kind {
                    CorruptionKind::SaltPepper => rng.random::<bool>(),
                    CorruptionKind::ZeroMask => false,
                }
            } else {
                bit
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DaModel {
    pub dim: usize,
    pub hidden: usize,
    /// Encoder weights, `hidden` rows of `dim`.
    pub enc_w: Vec<f64>,
    pub enc_b: Vec<f64>,
    /// Decoder weights, `dim` rows of `hidden`.
    pub dec_w: Vec<f64>,
    pub dec_b: Vec<f64>,
    pub corruption: f64,
    pub corruption_kind: CorruptionKind,
    pub learning_rate: f64,
}

impl DaModel {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(
        dim: usize,
        hidden: usize,
        corruption: f64,
        learning_rate: f64,
        rng: &mut R,
    ) -> Self {
        let mut m = Self::zeros(dim, hidden);
        m.enc_w = glorot(hidden * dim, dim, hidden, rng);
        m.dec_w = glorot(dim * hidden, hidden, dim, rng);
        m.corruption = corruption;
        m.learning_rate = learning_rate;
        m
    }

    pub fn zeros(dim: usize, hidden: usize) -> Self {
        Self {
            dim,
            hidden,
            enc_w: vec![0.0; hidden * dim],
            enc_b: vec![0.0; hidden],
            dec_w: vec![0.0; dim * hidden],
            dec_b: vec![0.0; dim],
            corruption: 0.0,
            corruption_kind: CorruptionKind::SaltPepper,
            learning_rate: 0.1,
        }
    }

    pub fn num_parameters(&self) -> usize {
        2 * self.dim * self.hidden + self.dim + self.hidden
    }

    /// All parameters flattened as `enc_w, enc_b, dec_w, dec_b`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.enc_w[..], &self.enc_b, &self.dec_w, &self.dec_b].concat()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        Error::check_dim(self.num_parameters(), params.len())?;
        let (hd, h, d) = (self.hidden * self.dim, self.hidden, self.dim);
        self.enc_w.copy_from_slice(&params[..hd]);
        self.enc_b.copy_from_slice(&params[hd..hd + h]);
        self.dec_w.copy_from_slice(&params[hd + h..2 * hd + h]);
        self.dec_b
            .copy_from_slice(&params[2 * hd + h..2 * hd + h + d]);
        Ok(())
    }

    fn check_finite(&self) -> Result<()> {
        if self.parameters().iter().all(|p| p.is_finite()) {
            Ok(())
        } else {
            Err(Error::Numeric(
                "dA parameters contain non-finite values".into(),
            ))
        }
    }

    fn encode(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|j| {
                let row = &self.enc_w[j * self.dim..(j + 1) * self.dim];
                sigmoid(self.enc_b[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            })
            .collect()
    }

    fn decode(&self, h: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let row = &self.dec_w[i * self.hidden..(i + 1) * self.hidden];
                sigmoid(self.dec_b[i] + row.iter().zip(h).map(|(w, v)| w * v).sum::<f64>())
            })
            .collect()
    }

    /// Deterministic reconstruction `sigmoid(W' sigmoid(W x + b) + b')`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim, x.len())?;
        self.check_finite()?;
        Ok(self.decode(&self.encode(x)))
    }

    pub fn forward_bits(&self, x: &[bool]) -> Result<Vec<f64>> {
        self.forward(&to_f64(x))
    }

    /// Mean over the batch of the summed per-bit cross-entropy between the
    /// reconstruction of `inputs[n]` and `targets[n]`.
    pub fn objective<T: AsRef<[bool]>>(&self, inputs: &[Vec<f64>], targets: &[T]) -> f64 {
        let total: f64 = inputs
            .iter()
            .zip(targets)
            .map(|(x, t)| {
                let y = self.decode(&self.encode(x));
                y.iter()
                    .zip(t.as_ref())
                    .map(|(&p, &b)| bce(p, b))
                    .sum::<f64>()
            })
            .sum();
        total / inputs.len() as f64
    }

    /// Gradient of [`objective`](Self::objective), flattened like
    /// [`parameters`](Self::parameters), together with the objective value.
    pub fn gradient<T: AsRef<[bool]>>(
        &self,
        inputs: &[Vec<f64>],
        targets: &[T],
    ) -> (Vec<f64>, f64) {
        let (d, h) = (self.dim, self.hidden);
        let mut g_enc_w = vec![0.0; h * d];
        let mut g_enc_b = vec![0.0; h];
        let mut g_dec_w = vec![0.0; d * h];
        let mut g_dec_b = vec![0.0; d];
        let mut loss = 0.0;
        let mut delta_h = vec![0.0; h];
        for (x, t) in inputs.iter().zip(targets) {
            let t = t.as_ref();
            let hid = self.encode(x);
            let y = self.decode(&hid);
            delta_h.fill(0.0);
            for i in 0..d {
                loss += bce(y[i], t[i]);
                let delta_o = y[i] - if t[i] { 1.0 } else { 0.0 };
                g_dec_b[i] += delta_o;
                let row = &self.dec_w[i * h..(i + 1) * h];
                let g_row = &mut g_dec_w[i * h..(i + 1) * h];
                for j in 0..h {
                    g_row[j] += delta_o * hid[j];
                    delta_h[j] += delta_o * row[j];
                }
            }
            for j in 0..h {
                let dj = delta_h[j] * hid[j] * (1.0 - hid[j]);
                g_enc_b[j] += dj;
                let g_row = &mut g_enc_w[j * d..(j + 1) * d];
                for (g, &xk) in g_row.iter_mut().zip(x) {
                    *g += dj * xk;
                }
            }
        }
        let scale = 1.0 / inputs.len() as f64;
        let mut grad = [g_enc_w, g_enc_b, g_dec_w, g_dec_b].concat();
        grad.iter_mut().for_each(|g| *g *= scale);
        (grad, loss * scale)
    }

    /// One SGD step on a minibatch: every input is corrupted, the model is
    /// trained to reconstruct the clean input. Returns the pre-update mean
    /// cross-entropy per bit.
    pub fn train_minibatch<B: AsRef<[bool]>, R: Rng + ?Sized>(
        &mut self,
        batch: &[B],
        rng: &mut R,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Config("empty training batch".into()));
        }
        for b in batch {
            Error::check_dim(self.dim, b.as_ref().len())?;
        }
        let inputs: Vec<Vec<f64>> = batch
            .iter()
            .map(|b| {
                to_f64(&corrupt(
                    b.as_ref(),
                    self.corruption,
                    self.corruption_kind,
                    rng,
                ))
            })
            .collect();
        let (grad, loss) = self.gradient(&inputs, batch);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("dA training loss is {loss}")));
        }
        self.apply_step(&grad);
        self.check_finite()?;
        Ok(loss / self.dim as f64)
    }

    fn apply_step(&mut self, grad: &[f64]) {
        let lr = self.learning_rate;
        let params = self
            .enc_w
            .iter_mut()
            .chain(self.enc_b.iter_mut())
            .chain(self.dec_w.iter_mut())
            .chain(self.dec_b.iter_mut());
        for (p, g) in params.zip(grad) {
            *p -= lr * g;
        }
    }

    /// Corrupts `x`, propagates it and draws each output bit from its
    /// Bernoulli parameter.
    pub fn sample<R: Rng + ?Sized>(&self, x: &[bool], rng: &mut R) -> Result<Genotype> {
        self.sample_clamped(x, None, rng)
    }

    /// [`sample`](Self::sample) with optional clamping: clamped loci are fixed
    /// on the (corrupted) input and on the output.
    pub fn sample_clamped<R: Rng + ?Sized>(
        &self,
        x: &[bool],
        clamp: Option<&[Option<bool>]>,
        rng: &mut R,
    ) -> Result<Genotype> {
        Error::check_dim(self.dim, x.len())?;
        if let Some(c) = clamp {
            Error::check_dim(self.dim, c.len())?;
        }
        let mut input = corrupt(x, self.corruption, self.corruption_kind, rng);
        if let Some(c) = clamp {
            for (bit, fixed) in input.iter_mut().zip(c) {
                if let Some(v) = fixed {
                    *bit = *v;
                }
            }
        }
        let y = self.forward_bits(&input)?;
        let bits = y
            .iter()
            .enumerate()
            .map(|(i, &p)| match clamp.and_then(|c| c[i]) {
                Some(v) => v,
                None => rng.random::<f64>() < p,
            })
            .collect();
        Ok(Genotype::new(bits))
    }
}

pub(crate) fn to_f64(bits: &[bool]) -> Vec<f64> {
    bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}
