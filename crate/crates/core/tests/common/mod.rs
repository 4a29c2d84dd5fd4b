//! Independent reference implementations used to check the library.
//!
//! Nothing here calls into the library's numerical code; each oracle works
//! from the textbook definition with a different algorithm.

#![allow(dead_code)]

use qpp_core::plan::{PlanNode, PlanSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Least squares with an intercept via the explicit inverse of `XᵀX`
/// (Gauss-Jordan with partial pivoting) on the augmented design matrix.
/// Returns `[intercept, coefficients...]`.
pub fn ols_normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len() + 1;
    let aug = |r: &[f64]| std::iter::once(1.0).chain(r.iter().copied()).collect::<Vec<f64>>();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (r, &t) in rows.iter().zip(y) {
        let a = aug(r);
        for i in 0..p {
            xty[i] += a[i] * t;
            for j in 0..p {
                xtx[i][j] += a[i] * a[j];
            }
        }
    }
    let inv = invert(xtx);
    (0..p).map(|i| (0..p).map(|j| inv[i][j] * xty[j]).sum()).collect()
}

pub fn invert(mut m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        assert!(d != 0.0, "singular matrix in oracle");
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[r][j] -= f * m[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

/// kNN by computing every distance and stable-sorting.
pub fn knn_exhaustive(pool: &[(Vec<f64>, f64)], k: usize, x: &[f64]) -> f64 {
    let mut d: Vec<(f64, usize)> = pool
        .iter()
        .enumerate()
        .map(|(i, (p, _))| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), i))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    d[..k].iter().map(|&(_, i)| pool[i].1).sum::<f64>() / k as f64
}

/// Coefficient of variation with a two-pass mean then variance.
pub fn cov_two_pass(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    var.sqrt() / mean
}

#[derive(Clone, Copy, Debug)]
pub enum OracleKernel {
    Linear,
    Polynomial { gamma: f64, degree: i32, coef0: f64 },
    Rbf { gamma: f64 },
}

impl OracleKernel {
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
        match *self {
            OracleKernel::Linear => dot,
            OracleKernel::Polynomial { gamma, degree, coef0 } => (gamma * dot + coef0).powi(degree),
            OracleKernel::Rbf { gamma } => {
                let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

/// ε-SVR fitted by accelerated proximal gradient on the dual in
/// `β = α − α*` form:
///
/// ```text
/// min ½ βᵀKβ − zᵀβ + ε‖β‖₁   s.t.  Σβ = 0,  −C ≤ β ≤ C
/// ```
///
/// on z-scored data. The proximal step is solved exactly: for a multiplier
/// `λ` of the sum constraint each coordinate is a clipped soft threshold,
/// and `λ` is found by bisection. The bias minimizes the primal loss for
/// the fitted weights, a one-dimensional piecewise-linear problem solved by
/// scanning its breakpoints.
pub struct SvrOracle {
    kernel: OracleKernel,
    x: Vec<Vec<f64>>,
    beta: Vec<f64>,
    bias: f64,
    means: Vec<f64>,
    stds: Vec<f64>,
    y_mean: f64,
    y_std: f64,
    pub iterations: usize,
}

fn mean_pop_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let s = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
    (m, if s > 0.0 { s } else { 1.0 })
}

impl SvrOracle {
    pub fn fit(rows: &[Vec<f64>], y: &[f64], kernel: OracleKernel, c: f64, eps: f64) -> Self {
        let n = rows.len();
        let d = rows[0].len();
        let (mut means, mut stds) = (vec![0.0; d], vec![0.0; d]);
        for j in 0..d {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            (means[j], stds[j]) = mean_pop_std(&col);
        }
        let x: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| (0..d).map(|j| (r[j] - means[j]) / stds[j]).collect())
            .collect();
        let (y_mean, y_std) = mean_pop_std(y);
        let z: Vec<f64> = y.iter().map(|t| (t - y_mean) / y_std).collect();
        let k: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| kernel.eval(&x[i], &x[j])).collect())
            .collect();

        let lip = 1.01 * largest_eigenvalue(&k).max(1e-12);
        let step = 1.0 / lip;
        let matvec = |b: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|j| k[i][j] * b[j]).sum()).collect() };
        let objective = |b: &[f64], kb: &[f64]| -> f64 {
            (0..n)
                .map(|i| 0.5 * b[i] * kb[i] - z[i] * b[i] + eps * b[i].abs())
                .sum()
        };

        let mut beta = vec![0.0; n];
        let mut yk = beta.clone();
        let mut t = 1.0f64;
        let mut f_prev = 0.0;
        let mut iterations = 0;
        while iterations < 200_000 {
            iterations += 1;
            let ky = matvec(&yk);
            let v: Vec<f64> = (0..n).map(|i| yk[i] - step * (ky[i] - z[i])).collect();
            let next = prox(&v, step * eps, c);
            let f_next = objective(&next, &matvec(&next));
            // Restart the momentum whenever the objective goes up.
            if f_next > f_prev && t > 1.0 {
                t = 1.0;
                yk = beta.clone();
                continue;
            }
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let mom = (t - 1.0) / t_next;
            let change: f64 = next.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            yk = (0..n).map(|i| next[i] + mom * (next[i] - beta[i])).collect();
            beta = next;
            t = t_next;
            f_prev = f_next;
            if change < 1e-14 {
                break;
            }
        }

        let f0: Vec<f64> = (0..n).map(|i| (0..n).map(|j| beta[j] * k[i][j]).sum()).collect();
        let r: Vec<f64> = (0..n).map(|i| z[i] - f0[i]).collect();
        let loss = |b: f64| r.iter().map(|ri| ((ri - b).abs() - eps).max(0.0)).sum::<f64>();
        let mut points: Vec<f64> = r.iter().flat_map(|ri| [ri - eps, ri + eps]).collect();
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let best = points.iter().map(|&p| loss(p)).fold(f64::INFINITY, f64::min);
        let argmin: Vec<f64> = points.iter().copied().filter(|&p| loss(p) <= best + 1e-12).collect();
        let bias = (argmin[0] + argmin[argmin.len() - 1]) / 2.0;

        SvrOracle {
            kernel,
            x,
            beta,
            bias,
            means,
            stds,
            y_mean,
            y_std,
            iterations,
        }
    }

    pub fn predict(&self, q: &[f64]) -> f64 {
        let zq: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(j, v)| (v - self.means[j]) / self.stds[j])
            .collect();
        let f: f64 = self
            .x
            .iter()
            .zip(&self.beta)
            .map(|(xi, b)| b * self.kernel.eval(xi, &zq))
            .sum::<f64>()
            + self.bias;
        f * self.y_std + self.y_mean
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Whether some coefficient is strictly inside `(0, C)` in magnitude.
    /// Without one the optimal bias is an interval rather than a point and
    /// predictions are not unique.
    pub fn has_free_coefficient(&self, c: f64) -> bool {
        self.beta
            .iter()
            .any(|b| b.abs() > 1e-6 * c && b.abs() < c * (1.0 - 1e-6))
    }
}

fn prox(v: &[f64], thresh: f64, c: f64) -> Vec<f64> {
    let coord = |vi: f64, lam: f64| {
        let s = vi - lam;
        let soft = s.signum() * (s.abs() - thresh).max(0.0);
        soft.clamp(-c, c)
    };
    let sum = |lam: f64| v.iter().map(|&vi| coord(vi, lam)).sum::<f64>();
    let span = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + thresh + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..120 {
        let mid = (lo + hi) / 2.0;
        if sum(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = (lo + hi) / 2.0;
    v.iter().map(|&vi| coord(vi, lam)).collect()
}

/// Power iteration on a symmetric positive semi-definite matrix.
pub fn largest_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lam = 0.0;
    for _ in 0..2000 {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lam = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lam
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Two-level plans `sort(seq_scan)` or `hash_join(seq_scan, seq_scan)`
/// where every seq_scan's exclusive time is `scan_rate · exclusive cost`
/// and every sort's and hash_join's is `other_rate · exclusive cost`.
pub fn per_kind_linear_corpus(n: usize, scan_rate: f64, other_rate: f64, seed: u64) -> Vec<PlanSample> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let leaf = |r: &mut ChaCha8Rng| {
                let c: f64 = r.random_range(5.0..500.0);
                PlanNode::new("Seq Scan".parse().unwrap(), 0.0, c, 10.0).with_timing(scan_rate * c, 1)
            };
            let own: f64 = r.random_range(1.0..200.0);
            let (kind, kids) = if i % 3 == 0 {
                ("Hash Join", vec![leaf(&mut r), leaf(&mut r)])
            } else {
                ("Sort", vec![leaf(&mut r)])
            };
            let child_cost: f64 = kids.iter().map(|k| k.total_cost).sum();
            let child_time: f64 = kids.iter().map(|k| k.inclusive_time_ms().unwrap()).sum();
            let time = child_time + other_rate * own;
            let root = PlanNode::new(kind.parse().unwrap(), 0.0, child_cost + own, 10.0)
                .with_timing(time, 1)
                .with_children(kids);
            PlanSample::new(format!("p{i}"), root).with_execution_time(time)
        })
        .collect()
}
