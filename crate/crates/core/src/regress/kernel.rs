use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::FeatureVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Linear,
    Polynomial,
    Rbf,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Linear, KernelFamily::Polynomial, KernelFamily::Rbf];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Linear => "linear",
            KernelFamily::Polynomial => "polynomial",
            KernelFamily::Rbf => "rbf",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelFamily::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown kernel `{s}`; valid kernels are linear, polynomial, rbf"
            ))
        })
    }
}

/// A fully parameterized kernel. Each family carries exactly the
/// parameters it uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `⟨u, v⟩`
    Linear,
    /// `(gamma · ⟨u, v⟩ + coef0)^degree`
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
    /// `exp(-gamma · ‖u − v‖²)`
    Rbf { gamma: f64 },
}

impl KernelSpec {
    /// Builds a kernel of `family`; `gamma` defaults to `1 / n_features`.
    pub fn resolve(
        family: KernelFamily,
        gamma: Option<f64>,
        degree: u32,
        coef0: f64,
        n_features: usize,
    ) -> Result<Self> {
        let gamma = gamma.unwrap_or(1.0 / n_features.max(1) as f64);
        let spec = match family {
            KernelFamily::Linear => KernelSpec::Linear,
            KernelFamily::Polynomial => KernelSpec::Polynomial { gamma, degree, coef0 },
            KernelFamily::Rbf => KernelSpec::Rbf { gamma },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Linear => KernelFamily::Linear,
            KernelSpec::Polynomial { .. } => KernelFamily::Polynomial,
            KernelSpec::Rbf { .. } => KernelFamily::Rbf,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { gamma, degree, coef0 } => {
                if !(gamma > 0.0 && gamma.is_finite()) || degree < 1 || !coef0.is_finite() {
                    return Err(Error::Config(format!(
                        "polynomial kernel needs gamma > 0, degree >= 1 and finite coef0 (got {gamma}, {degree}, {coef0})"
                    )));
                }
                Ok(())
            }
            KernelSpec::Rbf { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Config(format!("rbf kernel needs gamma > 0, got {gamma}")));
                }
                Ok(())
            }
        }
    }

    pub(crate) fn eval_slices(&self, u: &[f64], v: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(u, v),
            KernelSpec::Polynomial { gamma, degree, coef0 } => (gamma * dot(u, v) + coef0).powi(degree as i32),
            KernelSpec::Rbf { gamma } => {
                let sq: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn kernel_eval(kernel: &KernelSpec, u: &FeatureVector, v: &FeatureVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Schema(format!(
            "kernel arguments have lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(kernel.eval_slices(u.values(), v.values()))
}
