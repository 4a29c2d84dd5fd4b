//! ε-insensitive support vector regression.
//!
//! Features and target are z-scored before training. The dual
//!
//! ```text
//! min  ½ (α − α*)ᵀ K (α − α*) + ε Σ (α + α*) − zᵀ (α − α*)
//! s.t. Σ (α − α*) = 0,   0 ≤ α, α* ≤ C
//! ```
//!
//! is solved over the stacked vector `[α; α*]` by sequential minimal
//! optimization: each step picks the most violating pair using second-order
//! information and solves the two-variable subproblem analytically. The
//! stored dual coefficients are `α − α*`.

use serde::{Deserialize, Serialize};

use super::kernel::{KernelFamily, KernelSpec};
use super::linear::shared_schema;
use crate::error::{Error, Result};
use crate::plan::{check_schema, FeatureSchema, FeatureVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub kernel: KernelFamily,
    /// Box constraint on each dual coefficient.
    pub c: f64,
    /// Tube half-width, in standardized target units.
    pub epsilon: f64,
    /// Defaults to `1 / feature_count` when unset.
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    /// Stop once the maximal KKT violation falls below this.
    pub tol: f64,
    /// Iteration budget in sweeps; one sweep is as many pair updates as
    /// there are training points.
    pub max_iter: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            kernel: KernelFamily::Rbf,
            c: 100.0,
            epsilon: 0.1,
            gamma: None,
            degree: 3,
            coef0: 1.0,
            tol: 1e-3,
            max_iter: 10_000,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub schema: FeatureSchema,
    pub kernel: KernelSpec,
    /// Standardized feature rows of the training points with nonzero duals.
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefficients: Vec<f64>,
    /// Offset in standardized target units.
    pub bias: f64,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
    pub c: f64,
    pub epsilon: f64,
    /// False when the iteration budget ran out first. The model is still
    /// usable, only less accurate.
    pub converged: bool,
    pub iterations: u64,
}

impl SvrModel {
    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        check_schema(&self.schema, x)?;
        Ok(self.predict_values(x.values()))
    }

    pub(crate) fn predict_values(&self, x: &[f64]) -> f64 {
        let z: Vec<f64> = x
            .iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        self.decision(&z) * self.target_std + self.target_mean
    }

    /// Regression function in standardized units.
    pub fn decision(&self, standardized_x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, beta)| beta * self.kernel.eval_slices(sv, standardized_x))
            .sum::<f64>()
            + self.bias
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

pub fn fit_svr(vectors: &[FeatureVector], targets: &[f64], params: &SvrParams) -> Result<SvrModel> {
    params.validate()?;
    let schema = shared_schema(vectors)?;
    let n = vectors.len();
    let d = schema.len();
    if n != targets.len() {
        return Err(Error::DegenerateFit(format!(
            "{n} feature rows but {} targets",
            targets.len()
        )));
    }
    if n < 2 {
        return Err(Error::DegenerateFit(format!("SVR needs at least 2 samples, got {n}")));
    }
    if d == 0 {
        return Err(Error::DegenerateFit("SVR needs at least one feature".into()));
    }
    if vectors.iter().any(|v| v.values().iter().any(|x| !x.is_finite())) || targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::DegenerateFit("non-finite feature or target value".into()));
    }
    let kernel = KernelSpec::resolve(params.kernel, params.gamma, params.degree, params.coef0, d)?;

    let mut feature_means = vec![0.0; d];
    let mut feature_stds = vec![0.0; d];
    for j in 0..d {
        let (m, s) = mean_std(vectors.iter().map(|v| v.values()[j]));
        feature_means[j] = m;
        feature_stds[j] = s;
    }
    let (target_mean, target_std) = mean_std(targets.iter().copied());

    let mut x = Vec::with_capacity(n * d);
    for v in vectors {
        for j in 0..d {
            x.push((v.values()[j] - feature_means[j]) / feature_stds[j]);
        }
    }
    let z: Vec<f64> = targets.iter().map(|t| (t - target_mean) / target_std).collect();

    let budget = params.max_iter.saturating_mul(n as u64);
    let sol = Smo::new(&x, d, &z, kernel, params.c, params.epsilon).solve(params.tol, budget);

    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for (i, &beta) in sol.beta.iter().enumerate() {
        if beta != 0.0 {
            support_vectors.push(x[i * d..(i + 1) * d].to_vec());
            dual_coefficients.push(beta);
        }
    }

    Ok(SvrModel {
        schema: (*schema).clone(),
        kernel,
        support_vectors,
        dual_coefficients,
        bias: -sol.rho,
        feature_means,
        feature_stds,
        target_mean,
        target_std,
        c: params.c,
        epsilon: params.epsilon,
        converged: sol.converged,
        iterations: sol.iterations,
    })
}

/// Mean and population standard deviation; a zero spread is reported as 1
/// so that standardizing leaves the (centered) values at zero.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    (mean, if std > 0.0 { std } else { 1.0 })
}

const TAU: f64 = 1e-12;
/// Full Gram matrices are kept up to this many training points; beyond it
/// rows are recomputed on demand.
const DENSE_GRAM_LIMIT: usize = 2048;

struct Solution {
    beta: Vec<f64>,
    rho: f64,
    converged: bool,
    iterations: u64,
}

struct Smo<'a> {
    x: &'a [f64],
    d: usize,
    n: usize,
    kernel: KernelSpec,
    c: f64,
    /// Stacked variables `[α; α*]`, signs `y = [+1; −1]`.
    alpha: Vec<f64>,
    grad: Vec<f64>,
    diag: Vec<f64>,
    gram: Option<Vec<f64>>,
}

impl<'a> Smo<'a> {
    fn new(x: &'a [f64], d: usize, z: &[f64], kernel: KernelSpec, c: f64, epsilon: f64) -> Self {
        let n = z.len();
        let mut grad = Vec::with_capacity(2 * n);
        grad.extend(z.iter().map(|zi| epsilon - zi));
        grad.extend(z.iter().map(|zi| epsilon + zi));
        let row = |i: usize| &x[i * d..(i + 1) * d];
        let diag = (0..n).map(|i| kernel.eval_slices(row(i), row(i))).collect();
        let gram = (n <= DENSE_GRAM_LIMIT).then(|| {
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let k = kernel.eval_slices(row(i), row(j));
                    g[i * n + j] = k;
                    g[j * n + i] = k;
                }
            }
            g
        });
        Smo {
            x,
            d,
            n,
            kernel,
            c,
            alpha: vec![0.0; 2 * n],
            grad,
            diag,
            gram,
        }
    }

    fn sign(&self, t: usize) -> f64 {
        if t < self.n {
            1.0
        } else {
            -1.0
        }
    }

    fn at_upper(&self, t: usize) -> bool {
        self.alpha[t] >= self.c
    }

    fn at_lower(&self, t: usize) -> bool {
        self.alpha[t] <= 0.0
    }

    fn kernel_row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        match &self.gram {
            Some(g) => std::borrow::Cow::Borrowed(&g[i * self.n..(i + 1) * self.n]),
            None => {
                let xi = &self.x[i * self.d..(i + 1) * self.d];
                std::borrow::Cow::Owned(
                    (0..self.n)
                        .map(|j| self.kernel.eval_slices(xi, &self.x[j * self.d..(j + 1) * self.d]))
                        .collect(),
                )
            }
        }
    }

    /// Second-order working-set selection. `None` once optimal within `tol`.
    fn select(&self, tol: f64) -> Option<(usize, usize)> {
        let l = 2 * self.n;
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..l {
            let v = if t < self.n {
                (!self.at_upper(t)).then(|| -self.grad[t])
            } else {
                (!self.at_lower(t)).then(|| self.grad[t])
            };
            if let Some(v) = v {
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let i = i_sel?;
        let ki = self.kernel_row(i % self.n);
        let kii = self.diag[i % self.n];

        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        for t in 0..l {
            let (eligible, v) = if t < self.n {
                (!self.at_lower(t), self.grad[t])
            } else {
                (!self.at_upper(t), -self.grad[t])
            };
            if !eligible {
                continue;
            }
            gmax2 = gmax2.max(v);
            let diff = gmax + v;
            if diff > 0.0 {
                let tn = t % self.n;
                let quad = kii + self.diag[tn] - 2.0 * ki[tn];
                let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                if obj < best_obj {
                    best_obj = obj;
                    j_sel = Some(t);
                }
            }
        }
        if gmax + gmax2 < tol {
            return None;
        }
        j_sel.map(|j| (i, j))
    }

    fn update(&mut self, i: usize, j: usize) {
        let n = self.n;
        let c = self.c;
        let (yi, yj) = (self.sign(i), self.sign(j));
        let ki = self.kernel_row(i % n).into_owned();
        let kj = self.kernel_row(j % n).into_owned();
        let q_ij = yi * yj * ki[j % n];
        let (qd_i, qd_j) = (self.diag[i % n], self.diag[j % n]);
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let quad = positive(qd_i + qd_j + 2.0 * q_ij);
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = positive(qd_i + qd_j - 2.0 * q_ij);
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;

        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..2 * n {
            let yt = self.sign(t);
            self.grad[t] += yi * yt * ki[t % n] * di + yj * yt * kj[t % n] * dj;
        }
    }

    fn rho(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free_sum = 0.0;
        let mut free = 0usize;
        for t in 0..2 * self.n {
            let y = self.sign(t);
            let yg = y * self.grad[t];
            if self.at_upper(t) {
                if y < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if self.at_lower(t) {
                if y > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        if free > 0 {
            free_sum / free as f64
        } else {
            (ub + lb) / 2.0
        }
    }

    fn solve(mut self, tol: f64, budget: u64) -> Solution {
        let mut iterations = 0u64;
        let mut converged = false;
        while iterations < budget {
            match self.select(tol) {
                None => {
                    converged = true;
                    break;
                }
                Some((i, j)) => self.update(i, j),
            }
            iterations += 1;
        }
        if !converged {
            converged = self.select(tol).is_none();
        }
        let rho = self.rho();
        let beta = (0..self.n).map(|i| self.alpha[i] - self.alpha[i + self.n]).collect();
        Solution {
            beta,
            rho,
            converged,
            iterations,
        }
    }
}

fn positive(q: f64) -> f64 {
    if q > 0.0 {
        q
    } else {
        TAU
    }
}
