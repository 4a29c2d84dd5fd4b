use std::collections::BTreeMap;

use crate::plan::PlanSample;

/// Coefficient of variation of execution times per template: population
/// standard deviation over mean.
///
/// Samples without a template or without a measured time are skipped.
pub fn template_cov(corpus: &[PlanSample]) -> BTreeMap<String, f64> {
    // Welford's running mean and sum of squared deviations.
    let mut acc: BTreeMap<&str, (u64, f64, f64)> = BTreeMap::new();
    for s in corpus {
        let (Some(t), Some(x)) = (s.template_id.as_deref(), s.execution_time_ms) else {
            continue;
        };
        let (n, mean, m2) = acc.entry(t).or_insert((0, 0.0, 0.0));
        *n += 1;
        let delta = x - *mean;
        *mean += delta / *n as f64;
        *m2 += delta * (x - *mean);
    }
    acc.into_iter()
        .map(|(t, (n, mean, m2))| {
            let std = (m2 / n as f64).max(0.0).sqrt();
            (t.to_string(), if mean != 0.0 { std / mean } else { 0.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::PlanNode;

    fn corpus(times: &[(&str, f64)]) -> Vec<PlanSample> {
        times
            .iter()
            .enumerate()
            .map(|(i, &(t, ms))| {
                PlanSample::new(
                    format!("q{i}"),
                    PlanNode::new("Seq Scan".parse().unwrap(), 0.0, 1.0, 1.0),
                )
                .with_template(t)
                .with_execution_time(ms)
            })
            .collect()
    }

    #[test]
    fn examples() {
        let cov = template_cov(&corpus(&[("a", 2.0), ("a", 4.0), ("b", 7.0), ("b", 7.0), ("c", 3.0)]));
        assert!((cov["a"] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(cov["b"], 0.0);
        assert_eq!(cov["c"], 0.0);
    }

    #[test]
    fn skips_untemplated() {
        let mut c = corpus(&[("a", 1.0)]);
        c.push(
            PlanSample::new("x", PlanNode::new("Seq Scan".parse().unwrap(), 0.0, 1.0, 1.0)).with_execution_time(5.0),
        );
        assert_eq!(template_cov(&c).len(), 1);
    }
}
