use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::{check_schema, FeatureSchema, FeatureVector};

/// `intercept + Σ coefficient_j · x_j`, in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub schema: FeatureSchema,
}

impl LinearModel {
    /// Raw prediction. May be negative; clamping is left to the caller.
    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        check_schema(&self.schema, x)?;
        Ok(self.predict_values(x.values()))
    }

    pub(crate) fn predict_values(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

/// Pivots below this fraction of the largest diagonal entry are treated as a
/// rank deficiency.
const PIVOT_TOLERANCE: f64 = 1e-10;

/// Least-squares fit with an intercept.
///
/// The intercept column is eliminated up front by centering, and each
/// centered column is scaled to unit max-norm before the normal equations
/// are formed and solved by Cholesky factorization. Both steps are exact
/// reparametrizations of the augmented system; they only improve its
/// conditioning.
pub fn fit_ols(vectors: &[FeatureVector], targets: &[f64]) -> Result<LinearModel> {
    let schema = shared_schema(vectors)?;
    let rows: Vec<&[f64]> = vectors.iter().map(FeatureVector::values).collect();
    fit_ols_rows(&rows, targets, (*schema).clone())
}

pub(crate) fn fit_ols_rows(rows: &[&[f64]], targets: &[f64], schema: FeatureSchema) -> Result<LinearModel> {
    let n = rows.len();
    let d = schema.len();
    if n != targets.len() {
        return Err(Error::DegenerateFit(format!(
            "{n} feature rows but {} targets",
            targets.len()
        )));
    }
    if n < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 samples, got {n}")));
    }
    if rows.iter().any(|r| r.iter().any(|v| !v.is_finite())) || targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::DegenerateFit("non-finite feature or target value".into()));
    }

    let nf = n as f64;
    let y_mean = targets.iter().sum::<f64>() / nf;
    let mut x_mean = vec![0.0; d];
    for r in rows {
        for (m, v) in x_mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    x_mean.iter_mut().for_each(|m| *m /= nf);

    let mut scale = vec![0.0f64; d];
    for r in rows {
        for j in 0..d {
            scale[j] = scale[j].max((r[j] - x_mean[j]).abs());
        }
    }
    if let Some(j) = scale.iter().position(|&s| s == 0.0) {
        return Err(Error::DegenerateFit(format!(
            "feature `{}` is constant over the training data",
            schema.names()[j]
        )));
    }

    // Normal equations on the centered, scaled design.
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    let mut u = vec![0.0; d];
    for (r, &y) in rows.iter().zip(targets) {
        for j in 0..d {
            u[j] = (r[j] - x_mean[j]) / scale[j];
        }
        let yc = y - y_mean;
        for a in 0..d {
            rhs[a] += u[a] * yc;
            for b in 0..=a {
                gram[a * d + b] += u[a] * u[b];
            }
        }
    }
    let gamma = cholesky_solve(&mut gram, &mut rhs, d)
        .ok_or_else(|| Error::DegenerateFit("design matrix is singular or ill-conditioned".into()))?;

    let coefficients: Vec<f64> = gamma.iter().zip(&scale).map(|(g, s)| g / s).collect();
    let intercept = y_mean - coefficients.iter().zip(&x_mean).map(|(c, m)| c * m).sum::<f64>();
    if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::DegenerateFit("fit produced non-finite parameters".into()));
    }
    Ok(LinearModel {
        intercept,
        coefficients,
        schema,
    })
}

/// Solves `A x = b` in place for symmetric positive definite `A`, of which
/// only the lower triangle (row-major) is read.
fn cholesky_solve(a: &mut [f64], b: &mut [f64], d: usize) -> Option<Vec<f64>> {
    let max_diag = (0..d).map(|i| a[i * d + i]).fold(0.0f64, f64::max);
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if !(diag > PIVOT_TOLERANCE * max_diag) {
            return None;
        }
        let l_jj = diag.sqrt();
        a[j * d + j] = l_jj;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / l_jj;
        }
    }
    // L y = b, then Lᵀ x = y.
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * d + k] * b[k];
        }
        b[i] = s / a[i * d + i];
    }
    for i in (0..d).rev() {
        let mut s = b[i];
        for k in i + 1..d {
            s -= a[k * d + i] * b[k];
        }
        b[i] = s / a[i * d + i];
    }
    Some(b.to_vec())
}

/// The schema shared by every vector; a mix of schemas is an error.
pub(crate) fn shared_schema(vectors: &[FeatureVector]) -> Result<Arc<FeatureSchema>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::DegenerateFit("no training samples".into()))?;
    for v in &vectors[1..] {
        check_schema(first.schema(), v)?;
    }
    Ok(Arc::clone(first.shared_schema()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecs(xs: &[f64]) -> Vec<FeatureVector> {
        let schema = Arc::new(FeatureSchema::cost_only());
        xs.iter().map(|&x| FeatureVector::scalar(&schema, x).unwrap()).collect()
    }

    #[test]
    fn exact_line() {
        let m = fit_ols(&vecs(&[1.0, 2.0, 3.0]), &[2.0, 4.0, 6.0]).unwrap();
        assert!(m.intercept.abs() < 1e-12);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_target() {
        let m = fit_ols(&vecs(&[1.0, 2.0, 3.0]), &[5.0, 5.0, 5.0]).unwrap();
        assert_eq!(m.intercept, 5.0);
        assert_eq!(m.coefficients[0], 0.0);
    }

    #[test]
    fn predictions() {
        let schema = FeatureSchema::cost_only();
        let arc = Arc::new(schema.clone());
        let x = |v| FeatureVector::scalar(&arc, v).unwrap();
        let m = |i, c| LinearModel {
            intercept: i,
            coefficients: vec![c],
            schema: schema.clone(),
        };
        assert_eq!(m(0.0, 2.0).predict(&x(3.0)).unwrap(), 6.0);
        assert_eq!(m(1.0, 0.0).predict(&x(999.0)).unwrap(), 1.0);
        assert_eq!(m(-5.0, 1.0).predict(&x(2.0)).unwrap(), -3.0);
    }

    #[test]
    fn schema_mismatch() {
        let m = fit_ols(&vecs(&[1.0, 2.0, 3.0]), &[2.0, 4.0, 6.0]).unwrap();
        let other = Arc::new(FeatureSchema::exclusive_cost());
        let x = FeatureVector::scalar(&other, 1.0).unwrap();
        assert!(matches!(m.predict(&x), Err(Error::Schema(_))));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_ols(&vecs(&[1.0]), &[1.0]), Err(Error::DegenerateFit(_))));
        assert!(matches!(
            fit_ols(&vecs(&[2.0, 2.0, 2.0]), &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            fit_ols(&vecs(&[1.0, f64::NAN]), &[1.0, 2.0]),
            Err(Error::DegenerateFit(_))
        ));

        // Two collinear columns.
        let schema = Arc::new(FeatureSchema::new(vec!["a".into(), "b".into()]));
        let rows: Vec<FeatureVector> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&x| FeatureVector::new(schema.clone(), vec![x, 2.0 * x]).unwrap())
            .collect();
        assert!(matches!(
            fit_ols(&rows, &[1.0, 2.0, 3.0, 5.0]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn two_features() {
        let schema = Arc::new(FeatureSchema::new(vec!["a".into(), "b".into()]));
        let pts = [(0.0, 1.0), (1.0, 0.0), (2.0, 3.0), (5.0, 1.0), (3.0, 7.0)];
        let rows: Vec<FeatureVector> = pts
            .iter()
            .map(|&(a, b)| FeatureVector::new(schema.clone(), vec![a, b]).unwrap())
            .collect();
        let y: Vec<f64> = pts.iter().map(|&(a, b)| 4.0 - 1.5 * a + 0.25 * b).collect();
        let m = fit_ols(&rows, &y).unwrap();
        assert!((m.intercept - 4.0).abs() < 1e-12);
        assert!((m.coefficients[0] + 1.5).abs() < 1e-12);
        assert!((m.coefficients[1] - 0.25).abs() < 1e-12);
    }
}
