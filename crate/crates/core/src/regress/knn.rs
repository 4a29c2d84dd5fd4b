use serde::{Deserialize, Serialize};

use super::linear::shared_schema;
use crate::error::{Error, Result};
use crate::plan::{check_schema, FeatureSchema, FeatureVector};

pub const DEFAULT_K: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeighting {
    /// Plain mean of the neighbours' times.
    #[default]
    Uniform,
    /// Mean weighted by inverse distance; exact matches take precedence.
    InverseDistance,
}

/// Nearest-neighbour regressor over a pool of past observations.
///
/// Fitting only stores the pool. Prediction scans it and averages the times
/// of the `k` entries closest in Euclidean distance, with equal distances
/// resolved in favour of the earlier entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "KnnRepr", try_from = "KnnRepr")]
pub struct KnnModel {
    schema: FeatureSchema,
    k: usize,
    weighting: KnnWeighting,
    /// Row-major `len × schema.len()` feature values.
    points: Vec<f64>,
    times: Vec<f64>,
}

impl KnnModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weighting(&self) -> KnnWeighting {
        self.weighting
    }

    pub fn with_weighting(mut self, weighting: KnnWeighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The `i`-th pool entry in insertion order.
    pub fn entry(&self, i: usize) -> (&[f64], f64) {
        let d = self.schema.len();
        (&self.points[i * d..(i + 1) * d], self.times[i])
    }

    pub fn predict(&self, x: &FeatureVector) -> Result<f64> {
        check_schema(&self.schema, x)?;
        Ok(self.predict_values(x.values()))
    }

    pub(crate) fn predict_values(&self, x: &[f64]) -> f64 {
        let nearest = self.nearest_values(x);
        match self.weighting {
            KnnWeighting::Uniform => nearest.iter().map(|&(_, i)| self.times[i]).sum::<f64>() / nearest.len() as f64,
            KnnWeighting::InverseDistance => {
                let exact: Vec<f64> = nearest
                    .iter()
                    .filter(|(d, _)| *d == 0.0)
                    .map(|&(_, i)| self.times[i])
                    .collect();
                if !exact.is_empty() {
                    return exact.iter().sum::<f64>() / exact.len() as f64;
                }
                let (num, den) = nearest.iter().fold((0.0, 0.0), |(num, den), &(d, i)| {
                    (num + self.times[i] / d, den + 1.0 / d)
                });
                num / den
            }
        }
    }

    /// Indices and distances of the `k` nearest pool entries, nearest first.
    pub fn nearest(&self, x: &FeatureVector) -> Result<Vec<(f64, usize)>> {
        check_schema(&self.schema, x)?;
        Ok(self.nearest_values(x.values()))
    }

    fn nearest_values(&self, x: &[f64]) -> Vec<(f64, usize)> {
        let d = self.schema.len();
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, p) in self.points.chunks_exact(d).enumerate() {
            let dist = euclidean(p, x);
            if best.len() == self.k {
                // Later entries only displace strictly closer ones.
                if dist >= best[self.k - 1].0 {
                    continue;
                }
                best.pop();
            }
            let at = best.partition_point(|&(bd, _)| bd <= dist);
            best.insert(at, (dist, i));
        }
        best
    }

    /// A new model whose pool is this one's plus `(x, time_ms)` at the end.
    pub fn append_observation(&self, x: &FeatureVector, time_ms: f64) -> Result<KnnModel> {
        check_schema(&self.schema, x)?;
        if !(time_ms > 0.0 && time_ms.is_finite()) {
            return Err(Error::Domain(format!("observed time must be positive, got {time_ms}")));
        }
        let mut next = self.clone();
        next.points.extend_from_slice(x.values());
        next.times.push(time_ms);
        Ok(next)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// Stores the pool verbatim. Requires at least `k` entries.
pub fn fit_knn(pool: &[(FeatureVector, f64)], k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if pool.len() < k {
        return Err(Error::DegenerateFit(format!(
            "pool of {} observations is smaller than k = {k}",
            pool.len()
        )));
    }
    let vectors: Vec<FeatureVector> = pool.iter().map(|(v, _)| v.clone()).collect();
    let schema = shared_schema(&vectors)?;
    if schema.is_empty() {
        return Err(Error::Schema("kNN needs at least one feature".into()));
    }
    let mut points = Vec::with_capacity(pool.len() * schema.len());
    let mut times = Vec::with_capacity(pool.len());
    for (v, t) in pool {
        if v.values().iter().any(|x| !x.is_finite()) || !t.is_finite() {
            return Err(Error::DegenerateFit("non-finite pool entry".into()));
        }
        points.extend_from_slice(v.values());
        times.push(*t);
    }
    Ok(KnnModel {
        schema: (*schema).clone(),
        k,
        weighting: KnnWeighting::Uniform,
        points,
        times,
    })
}

#[derive(Serialize, Deserialize)]
struct KnnRepr {
    schema: FeatureSchema,
    k: usize,
    #[serde(default)]
    weighting: KnnWeighting,
    /// `[features..., time_ms]` per entry.
    pool: Vec<Vec<f64>>,
}

impl From<KnnModel> for KnnRepr {
    fn from(m: KnnModel) -> Self {
        let d = m.schema.len();
        let pool = (0..m.times.len())
            .map(|i| {
                let mut row = m.points[i * d..(i + 1) * d].to_vec();
                row.push(m.times[i]);
                row
            })
            .collect();
        KnnRepr {
            schema: m.schema,
            k: m.k,
            weighting: m.weighting,
            pool,
        }
    }
}

impl TryFrom<KnnRepr> for KnnModel {
    type Error = String;

    fn try_from(r: KnnRepr) -> std::result::Result<Self, String> {
        let d = r.schema.len();
        if d == 0 {
            return Err("kNN schema is empty".into());
        }
        if r.k == 0 || r.pool.len() < r.k {
            return Err(format!("pool of {} entries cannot serve k = {}", r.pool.len(), r.k));
        }
        let mut points = Vec::with_capacity(r.pool.len() * d);
        let mut times = Vec::with_capacity(r.pool.len());
        for row in &r.pool {
            if row.len() != d + 1 {
                return Err(format!("pool entry has {} values, expected {}", row.len(), d + 1));
            }
            points.extend_from_slice(&row[..d]);
            times.push(row[d]);
        }
        Ok(KnnModel {
            schema: r.schema,
            k: r.k,
            weighting: r.weighting,
            points,
            times,
        })
    }
}
