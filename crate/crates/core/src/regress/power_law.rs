use serde::{Deserialize, Serialize};

use super::linear::fit_ols_rows;
use crate::error::{Error, Result};
use crate::plan::FeatureSchema;

/// `time = a · cost^b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawModel {
    pub a: f64,
    pub b: f64,
    /// Training pairs dropped because cost or time was not positive.
    #[serde(default)]
    pub discarded: usize,
}

impl PowerLawModel {
    pub fn predict(&self, cost: f64) -> Result<f64> {
        if !(cost > 0.0) {
            return Err(Error::Domain(format!(
                "power-law prediction needs a positive cost, got {cost}"
            )));
        }
        Ok(self.a * cost.powf(self.b))
    }
}

/// Ordinary least squares on `(ln cost, ln time)`.
///
/// Pairs with a non-positive cost or time have no logarithm and are dropped;
/// the count is kept in [`PowerLawModel::discarded`].
pub fn fit_power_law(costs: &[f64], times: &[f64]) -> Result<PowerLawModel> {
    if costs.len() != times.len() {
        return Err(Error::DegenerateFit(format!(
            "{} costs but {} times",
            costs.len(),
            times.len()
        )));
    }
    let (log_costs, log_times): (Vec<[f64; 1]>, Vec<f64>) = costs
        .iter()
        .zip(times)
        .filter(|(&c, &t)| c > 0.0 && t > 0.0)
        .map(|(c, t)| ([c.ln()], t.ln()))
        .unzip();
    let discarded = costs.len() - log_costs.len();
    if log_costs.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "power law needs at least 2 positive (cost, time) pairs, got {}",
            log_costs.len()
        )));
    }
    let rows: Vec<&[f64]> = log_costs.iter().map(|r| r.as_slice()).collect();
    let line = fit_ols_rows(&rows, &log_times, FeatureSchema::new(vec!["ln_cost".into()]))?;
    Ok(PowerLawModel {
        a: line.intercept.exp(),
        b: line.coefficients[0],
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_law() {
        let m = fit_power_law(&[1.0, 2.0, 4.0], &[3.0, 12.0, 48.0]).unwrap();
        assert!((m.a - 3.0).abs() < 1e-9, "{m:?}");
        assert!((m.b - 2.0).abs() < 1e-9, "{m:?}");
        assert_eq!(m.discarded, 0);
    }

    #[test]
    fn constant_time() {
        let m = fit_power_law(&[1.0, 2.0, 4.0], &[7.0, 7.0, 7.0]).unwrap();
        assert!((m.a - 7.0).abs() < 1e-12);
        assert_eq!(m.b, 0.0);
    }

    #[test]
    fn filters_non_positive_pairs() {
        let m = fit_power_law(&[0.0, 1.0, 2.0, 4.0, 3.0], &[1.0, 3.0, 12.0, 48.0, -1.0]).unwrap();
        assert_eq!(m.discarded, 2);
        assert!((m.b - 2.0).abs() < 1e-9);
        assert!(matches!(
            fit_power_law(&[0.0, 1.0], &[1.0, 1.0]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn predict() {
        let m = |a, b| PowerLawModel { a, b, discarded: 0 };
        assert_eq!(m(3.0, 2.0).predict(4.0).unwrap(), 48.0);
        assert_eq!(m(5.0, 0.0).predict(123.4).unwrap(), 5.0);
        assert_eq!(m(1.0, 1.0).predict(7.5).unwrap(), 7.5);
        assert!(matches!(m(1.0, 1.0).predict(0.0), Err(Error::Domain(_))));
        assert!(matches!(m(1.0, 1.0).predict(-2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn recovers_generated_parameters() {
        let costs: Vec<f64> = (1..=50).map(|i| 10.0 * 1.2f64.powi(i)).collect();
        let times: Vec<f64> = costs.iter().map(|c| 0.7 * c.powf(1.3)).collect();
        let m = fit_power_law(&costs, &times).unwrap();
        assert!((m.a - 0.7).abs() < 1e-6, "{m:?}");
        assert!((m.b - 1.3).abs() < 1e-6, "{m:?}");
    }
}
