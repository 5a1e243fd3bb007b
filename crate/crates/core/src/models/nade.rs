//! Neural autoregressive distribution estimator.
//!
//! For variables visited in `ordering`, the conditional of the `i`-th visited
//! variable is `sigmoid(b_i + V_i . h_i)` with `h_i = sigmoid(c + sum_{k<i}
//! W_k x_k)`. All conditionals share `W` and `c`, so the hidden
//! pre-activation is accumulated incrementally and a full pass costs
//! `O(D H)`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::genotype::Genotype;
use crate::models::{glorot, log_sigmoid, sigmoid};

/// Largest dimension accepted by the exhaustive distribution helpers.
pub const MAX_EXACT_DIM: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct NadeModel {
    pub dim: usize,
    pub hidden: usize,
    /// Input weights; column `k` (the `hidden` weights fed by variable `k`)
    /// is stored contiguously at `w[k * hidden..]`.
    pub w: Vec<f64>,
    /// Hidden bias.
    pub c: Vec<f64>,
    /// Output weights, `dim` rows of `hidden`.
    pub v: Vec<f64>,
    /// Visible bias.
    pub b: Vec<f64>,
    ordering: Vec<usize>,
    pub learning_rate: f64,
}

impl NadeModel {
    /// Glorot-uniform weights, zero biases, natural ordering.
    pub fn new<R: Rng + ?Sized>(
        dim: usize,
        hidden: usize,
        learning_rate: f64,
        rng: &mut R,
    ) -> Self {
        let mut m = Self::zeros(dim, hidden);
        m.w = glorot(dim * hidden, dim, hidden, rng);
        m.v = glorot(dim * hidden, dim, hidden, rng);
        m.learning_rate = learning_rate;
        m
    }

    pub fn zeros(dim: usize, hidden: usize) -> Self {
        Self {
            dim,
            hidden,
            w: vec![0.0; dim * hidden],
            c: vec![0.0; hidden],
            v: vec![0.0; dim * hidden],
            b: vec![0.0; dim],
            ordering: (0..dim).collect(),
            learning_rate: 0.1,
        }
    }

    /// Replaces the variable ordering; must be a permutation of `0..dim`.
    pub fn with_ordering(mut self, ordering: Vec<usize>) -> Result<Self> {
        Error::check_dim(self.dim, ordering.len())?;
        let mut seen = vec![false; self.dim];
        for &i in &ordering {
            if i >= self.dim || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Config(format!(
                    "ordering is not a permutation of 0..{}",
                    self.dim
                )));
            }
        }
        self.ordering = ordering;
        Ok(self)
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn num_parameters(&self) -> usize {
        2 * self.dim * self.hidden + self.dim + self.hidden
    }

    /// All parameters flattened as `w, c, v, b`.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w[..], &self.c, &self.v, &self.b].concat()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        Error::check_dim(self.num_parameters(), params.len())?;
        let (dh, h, d) = (self.dim * self.hidden, self.hidden, self.dim);
        self.w.copy_from_slice(&params[..dh]);
        self.c.copy_from_slice(&params[dh..dh + h]);
        self.v.copy_from_slice(&params[dh + h..2 * dh + h]);
        self.b.copy_from_slice(&params[2 * dh + h..2 * dh + h + d]);
        Ok(())
    }

    fn column(&self, k: usize) -> &[f64] {
        &self.w[k * self.hidden..(k + 1) * self.hidden]
    }

    fn logit(&self, i: usize, h: &[f64]) -> f64 {
        let row = &self.v[i * self.hidden..(i + 1) * self.hidden];
        self.b[i] + row.iter().zip(h).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `log P(x)` under the model's ordering.
    pub fn log_likelihood(&self, x: &[bool]) -> Result<f64> {
        Error::check_dim(self.dim, x.len())?;
        Ok(self.partial_log_prob(x, None))
    }

    /// Sum of log conditionals over the positions not fixed by `clamp`.
    fn partial_log_prob(&self, x: &[bool], clamp: Option<&[Option<bool>]>) -> f64 {
        let mut acc = self.c.clone();
        let mut h = vec![0.0; self.hidden];
        let mut total = 0.0;
        for &i in &self.ordering {
            if clamp.is_none_or(|c| c[i].is_none()) {
                for (hj, aj) in h.iter_mut().zip(&acc) {
                    *hj = sigmoid(*aj);
                }
                let z = self.logit(i, &h);
                total += if x[i] {
                    log_sigmoid(z)
                } else {
                    log_sigmoid(-z)
                };
            }
            if x[i] {
                for (aj, wj) in acc.iter_mut().zip(self.column(i)) {
                    *aj += wj;
                }
            }
        }
        total
    }

    /// Gradient of the mean negative log-likelihood over `batch`, flattened
    /// like [`parameters`](Self::parameters), with the mean NLL itself.
    pub fn gradient<B: AsRef<[bool]>>(&self, batch: &[B]) -> (Vec<f64>, f64) {
        let (d, hn) = (self.dim, self.hidden);
        let mut g_w = vec![0.0; d * hn];
        let mut g_c = vec![0.0; hn];
        let mut g_v = vec![0.0; d * hn];
        let mut g_b = vec![0.0; d];
        let mut nll = 0.0;
        let mut hs = vec![0.0; d * hn];
        let mut dlogit = vec![0.0; d];
        let mut back = vec![0.0; hn];
        for x in batch {
            let x = x.as_ref();
            let mut acc = self.c.clone();
            for (pos, &i) in self.ordering.iter().enumerate() {
                let h = &mut hs[pos * hn..(pos + 1) * hn];
                for (hj, aj) in h.iter_mut().zip(&acc) {
                    *hj = sigmoid(*aj);
                }
                let z = self.logit(i, h);
                nll -= if x[i] {
                    log_sigmoid(z)
                } else {
                    log_sigmoid(-z)
                };
                dlogit[pos] = sigmoid(z) - if x[i] { 1.0 } else { 0.0 };
                if x[i] {
                    for (aj, wj) in acc.iter_mut().zip(self.column(i)) {
                        *aj += wj;
                    }
                }
            }
            // back[j] holds dNLL/d(pre-activation) summed over later positions
            back.fill(0.0);
            for pos in (0..d).rev() {
                let i = self.ordering[pos];
                if x[i] {
                    for (g, bj) in g_w[i * hn..(i + 1) * hn].iter_mut().zip(&back) {
                        *g += bj;
                    }
                }
                let h = &hs[pos * hn..(pos + 1) * hn];
                let dl = dlogit[pos];
                g_b[i] += dl;
                let row = &self.v[i * hn..(i + 1) * hn];
                let g_row = &mut g_v[i * hn..(i + 1) * hn];
                for j in 0..hn {
                    g_row[j] += dl * h[j];
                    let da = dl * row[j] * h[j] * (1.0 - h[j]);
                    back[j] += da;
                    g_c[j] += da;
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grad = [g_w, g_c, g_v, g_b].concat();
        grad.iter_mut().for_each(|g| *g *= scale);
        (grad, nll * scale)
    }

    /// One SGD step on the exact mean NLL gradient; returns the pre-update
    /// mean NLL.
    pub fn train_minibatch<B: AsRef<[bool]>>(&mut self, batch: &[B]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::Config("empty training batch".into()));
        }
        for x in batch {
            Error::check_dim(self.dim, x.as_ref().len())?;
        }
        let (grad, nll) = self.gradient(batch);
        if !nll.is_finite() {
            return Err(Error::Numeric(format!("NADE training loss is {nll}")));
        }
        let lr = self.learning_rate;
        let params = self
            .w
            .iter_mut()
            .chain(self.c.iter_mut())
            .chain(self.v.iter_mut())
            .chain(self.b.iter_mut());
        for (p, g) in params.zip(&grad) {
            *p -= lr * g;
        }
        if self.parameters().iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric("NADE parameters became non-finite".into()));
        }
        Ok(nll)
    }

    /// Ancestral sample. Clamped loci keep their value and still feed the
    /// hidden state of later variables.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        clamp: Option<&[Option<bool>]>,
    ) -> Result<Genotype> {
        if let Some(c) = clamp {
            Error::check_dim(self.dim, c.len())?;
        }
        let mut acc = self.c.clone();
        let mut h = vec![0.0; self.hidden];
        let mut x = vec![false; self.dim];
        for &i in &self.ordering {
            x[i] = match clamp.and_then(|c| c[i]) {
                Some(v) => v,
                None => {
                    for (hj, aj) in h.iter_mut().zip(&acc) {
                        *hj = sigmoid(*aj);
                    }
                    rng.random::<f64>() < sigmoid(self.logit(i, &h))
                }
            };
            if x[i] {
                for (aj, wj) in acc.iter_mut().zip(self.column(i)) {
                    *aj += wj;
                }
            }
        }
        Ok(Genotype::new(x))
    }

    /// `P(x)` for every `x` in `{0,1}^D`; entry `n` is the string whose bit
    /// `i` is bit `i` of `n`.
    pub fn exact_distribution(&self) -> Result<Vec<f64>> {
        self.clamped_distribution(None)
    }

    /// Exact law of [`sample`](Self::sample) under `clamp`, indexed like
    /// [`exact_distribution`](Self::exact_distribution).
    pub fn clamped_distribution(&self, clamp: Option<&[Option<bool>]>) -> Result<Vec<f64>> {
        if self.dim > MAX_EXACT_DIM {
            return Err(Error::Resource(format!(
                "exact distribution needs 2^{} entries (limit D = {MAX_EXACT_DIM})",
                self.dim
            )));
        }
        if let Some(c) = clamp {
            Error::check_dim(self.dim, c.len())?;
        }
        Ok((0..1usize << self.dim)
            .map(|code| {
                let x = index_bits(code, self.dim);
                let consistent =
                    clamp.is_none_or(|c| c.iter().zip(&x).all(|(f, b)| f.is_none_or(|v| v == *b)));
                if consistent {
                    self.partial_log_prob(&x, clamp).exp()
                } else {
                    0.0
                }
            })
            .collect())
    }
}

/// Bits of `code`, least significant first.
pub fn index_bits(code: usize, dim: usize) -> Vec<bool> {
    (0..dim).map(|i| code >> i & 1 == 1).collect()
}

/// Per-locus probability of a one under a table indexed like
/// [`NadeModel::exact_distribution`].
pub fn marginals(table: &[f64], dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    for (code, p) in table.iter().enumerate() {
        for (i, mi) in m.iter_mut().enumerate() {
            if code >> i & 1 == 1 {
                *mi += p;
            }
        }
    }
    m
}
