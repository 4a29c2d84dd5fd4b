//! Synthetic corpora with planted cost-to-time relationships.
//!
//! Every template draws a [`CardinalityProfile`] per instance, prices it
//! with [`optimizer_cost`] and lays the cost out over a plan tree built
//! from the template's operator sequence. The execution time follows the
//! template's [`TimeLaw`] with multiplicative noise.
//!
//! Randomness is a ChaCha8 generator seeded from [`SyntheticSpec::seed`].
//! Template `i` reads three independent streams of it: stream `3i` for
//! cardinalities (five uniform draws per instance, in `n_s, n_r, n_t, n_i,
//! n_o` order, or five once for a bimodal template), stream `3i + 1` for
//! noise (one draw per instance) and stream `3i + 2` for the bimodal mode
//! (one draw per instance; the low mode is taken when the draw is below
//! `p`).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cost_model::{optimizer_cost, CardinalityProfile, CostModelParams};
use super::store::{CorpusMetadata, CorpusStore};
use crate::error::{Error, Result};
use crate::plan::{OperatorKind, PlanNode, PlanSample};

/// Execution time as a function of optimizer cost.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum TimeLaw {
    /// `a · cost`
    Linear { a: f64 },
    /// `a · cost^b`
    Power { a: f64, b: f64 },
    /// `t_low` with probability `p`, otherwise `t_high`, whatever the cost.
    /// The template's cost is held constant.
    Bimodal { t_low: f64, t_high: f64, p: f64 },
}

impl TimeLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            TimeLaw::Linear { a } => a > 0.0 && a.is_finite(),
            TimeLaw::Power { a, b } => a > 0.0 && a.is_finite() && b.is_finite(),
            TimeLaw::Bimodal { t_low, t_high, p } => {
                t_low > 0.0 && t_high > 0.0 && t_low.is_finite() && t_high.is_finite() && (0.0..=1.0).contains(&p)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid time law {self:?}")))
        }
    }
}

/// Inclusive uniform sampling range for each cardinality term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardinalityRanges {
    pub n_s: (f64, f64),
    pub n_r: (f64, f64),
    pub n_t: (f64, f64),
    pub n_i: (f64, f64),
    pub n_o: (f64, f64),
}

impl CardinalityRanges {
    /// Every term within `± spread` (a fraction) of `center`.
    pub fn around(center: CardinalityProfile, spread: f64) -> Self {
        let r = |x: f64| (x * (1.0 - spread), x * (1.0 + spread));
        CardinalityRanges {
            n_s: r(center.n_s),
            n_r: r(center.n_r),
            n_t: r(center.n_t),
            n_i: r(center.n_i),
            n_o: r(center.n_o),
        }
    }

    pub fn fixed(profile: CardinalityProfile) -> Self {
        CardinalityRanges::around(profile, 0.0)
    }

    fn terms(&self) -> [(f64, f64); 5] {
        [self.n_s, self.n_r, self.n_t, self.n_i, self.n_o]
    }

    fn low(&self) -> CardinalityProfile {
        let [s, r, t, i, o] = self.terms().map(|(lo, _)| lo);
        CardinalityProfile {
            n_s: s,
            n_r: r,
            n_t: t,
            n_i: i,
            n_o: o,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> CardinalityProfile {
        let [s, r, t, i, o] = self.terms().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>());
        CardinalityProfile {
            n_s: s,
            n_r: r,
            n_t: t,
            n_i: i,
            n_o: o,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub id: String,
    pub law: TimeLaw,
    pub ranges: CardinalityRanges,
    /// Operator kinds in pre-order. Joins take two children, scans none and
    /// every other kind one.
    pub plan_shape: Vec<OperatorKind>,
}

impl TemplateSpec {
    pub fn new(id: impl Into<String>, law: TimeLaw, ranges: CardinalityRanges, plan_shape: &[&str]) -> Result<Self> {
        let plan_shape = plan_shape.iter().map(|k| OperatorKind::new(k)).collect::<Result<_>>()?;
        Ok(TemplateSpec {
            id: id.into(),
            law,
            ranges,
            plan_shape,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub label: String,
    pub templates: Vec<TemplateSpec>,
    pub instances_per_template: usize,
    /// Half-width of the uniform multiplicative noise, in `[0, 0.5)`.
    pub noise: f64,
    pub cost_params: CostModelParams,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(
        label: impl Into<String>,
        templates: Vec<TemplateSpec>,
        instances_per_template: usize,
        noise: f64,
        seed: u64,
    ) -> Self {
        SyntheticSpec {
            label: label.into(),
            templates,
            instances_per_template,
            noise,
            cost_params: CostModelParams::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.templates.is_empty() {
            return Err(Error::Config("a synthetic corpus needs at least one template".into()));
        }
        if self.instances_per_template == 0 {
            return Err(Error::Config("instances_per_template must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.noise) {
            return Err(Error::Config(format!("noise must lie in [0, 0.5), got {}", self.noise)));
        }
        self.cost_params.validate()?;
        let mut ids = BTreeSet::new();
        for t in &self.templates {
            if !ids.insert(t.id.as_str()) {
                return Err(Error::Config(format!("template id `{}` is used twice", t.id)));
            }
            t.law.validate()?;
            for (lo, hi) in t.ranges.terms() {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                    return Err(Error::Config(format!(
                        "template `{}` has invalid range ({lo}, {hi})",
                        t.id
                    )));
                }
            }
            if !(optimizer_cost(&self.cost_params, &t.ranges.low()) > 0.0) {
                return Err(Error::Config(format!(
                    "template `{}` can produce a zero-cost plan; raise its cardinality ranges",
                    t.id
                )));
            }
            layout(&t.plan_shape).map_err(|m| Error::Config(format!("template `{}`: {m}", t.id)))?;
        }
        Ok(())
    }
}

/// A generated sample with the profile it was priced from.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSample {
    pub sample: PlanSample,
    pub profile: CardinalityProfile,
    /// Noise-free time the law assigned.
    pub law_time_ms: f64,
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<CorpusStore> {
    let samples = generate_synthetic_detailed(spec)?
        .into_iter()
        .map(|s| s.sample)
        .collect();
    CorpusStore::new(CorpusMetadata::synthetic(spec), samples)
}

/// Like [`generate_synthetic`], also returning each sample's profile and
/// noise-free time.
pub fn generate_synthetic_detailed(spec: &SyntheticSpec) -> Result<Vec<SyntheticSample>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.templates.len() * spec.instances_per_template);
    for (ti, template) in spec.templates.iter().enumerate() {
        let stream = |offset: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(3 * ti as u64 + offset);
            rng
        };
        let (mut card_rng, mut noise_rng, mut mode_rng) = (stream(0), stream(1), stream(2));
        let shape = layout(&template.plan_shape).expect("validated");
        let fixed_profile = match template.law {
            TimeLaw::Bimodal { .. } => Some(template.ranges.sample(&mut card_rng)),
            _ => None,
        };
        for j in 0..spec.instances_per_template {
            let profile = fixed_profile.unwrap_or_else(|| template.ranges.sample(&mut card_rng));
            let cost = optimizer_cost(&spec.cost_params, &profile);
            let law_time_ms = match template.law {
                TimeLaw::Linear { a } => a * cost,
                TimeLaw::Power { a, b } => a * cost.powf(b),
                TimeLaw::Bimodal { t_low, t_high, p } => {
                    if mode_rng.random::<f64>() < p {
                        t_low
                    } else {
                        t_high
                    }
                }
            };
            let factor = 1.0 + spec.noise * (2.0 * noise_rng.random::<f64>() - 1.0);
            let time = law_time_ms * factor;
            let root = shape.build(&profile, cost, time);
            let sample = PlanSample::new(format!("{}-{j}", template.id), root)
                .with_template(template.id.clone())
                .with_execution_time(time);
            out.push(SyntheticSample {
                sample,
                profile,
                law_time_ms,
            });
        }
    }
    Ok(out)
}

/// Tree skeleton laid out from a pre-order kind sequence.
struct Shape<'a> {
    kinds: &'a [OperatorKind],
    children: Vec<Vec<usize>>,
}

fn layout(kinds: &[OperatorKind]) -> std::result::Result<Shape<'_>, String> {
    if kinds.is_empty() {
        return Err("plan shape is empty".into());
    }
    let mut children = vec![Vec::new(); kinds.len()];
    let mut next = 1;
    // Explicit stack of (node, children still to attach).
    let mut stack = vec![(0usize, kinds[0].synthetic_arity())];
    while let Some((node, wanted)) = stack.pop() {
        if wanted == 0 || next >= kinds.len() {
            continue;
        }
        let child = next;
        next += 1;
        children[node].push(child);
        stack.push((node, wanted - 1));
        stack.push((child, kinds[child].synthetic_arity()));
    }
    if next < kinds.len() {
        return Err(format!(
            "plan shape has {} kinds left over after the tree is complete",
            kinds.len() - next
        ));
    }
    Ok(Shape { kinds, children })
}

impl Shape<'_> {
    /// Cardinality buckets: scans share the tuple count, index scans the
    /// index-entry count and all other operators the operator count.
    fn rows(&self, profile: &CardinalityProfile) -> Vec<f64> {
        let bucket = |k: &OperatorKind| {
            let s = k.as_str();
            if s.contains("index") {
                1
            } else if s.ends_with("_scan") {
                0
            } else {
                2
            }
        };
        let totals = [profile.n_t, profile.n_i, profile.n_o];
        let mut counts = [0usize; 3];
        for k in self.kinds {
            counts[bucket(k)] += 1;
        }
        self.kinds
            .iter()
            .map(|k| {
                let b = bucket(k);
                (totals[b] / counts[b] as f64).round()
            })
            .collect()
    }

    fn build(&self, profile: &CardinalityProfile, cost: f64, time: f64) -> PlanNode {
        let rows = self.rows(profile);
        // Subtree mass, each node weighing its rows plus one; children
        // follow their parent in pre-order so a reverse pass suffices.
        let mut mass: Vec<f64> = rows.iter().map(|r| r + 1.0).collect();
        for i in (0..self.kinds.len()).rev() {
            let child_mass: f64 = self.children[i].iter().map(|&c| mass[c]).sum();
            mass[i] += child_mass;
        }
        self.node(0, &rows, &mass, cost, time)
    }

    fn node(&self, i: usize, rows: &[f64], mass: &[f64], cost: f64, time: f64) -> PlanNode {
        let share = mass[i] / mass[0];
        let children = self.children[i]
            .iter()
            .map(|&c| self.node(c, rows, mass, cost, time))
            .collect();
        PlanNode::new(self.kinds[i].clone(), 0.0, cost * share, rows[i])
            .with_timing(time * share, 1)
            .with_children(children)
    }
}

/// Spec presets used by the acceptance suite and documentation.
pub mod presets {
    use super::*;

    /// Operator sequences cycled over the templates of multi-template
    /// presets.
    pub const SHAPES: [&[&str]; 6] = [
        &["seq_scan"],
        &["sort", "seq_scan"],
        &["aggregate", "hash_join", "seq_scan", "hash", "seq_scan"],
        &[
            "limit",
            "sort",
            "aggregate",
            "nested_loop",
            "nested_loop",
            "bitmap_heap_scan",
            "seq_scan",
            "index_scan",
        ],
        &["merge_join", "sort", "seq_scan", "sort", "index_scan"],
        &["aggregate", "nested_loop", "index_scan", "materialize", "seq_scan"],
    ];

    /// A profile whose default-priced cost is `cost`, split 50/20/20/5/5
    /// over the five terms.
    pub fn profile_for_cost(cost: f64) -> CardinalityProfile {
        let c = CostModelParams::default();
        CardinalityProfile {
            n_s: 0.5 * cost / c.c_s,
            n_r: 0.2 * cost / c.c_r,
            n_t: 0.2 * cost / c.c_t,
            n_i: 0.05 * cost / c.c_i,
            n_o: 0.05 * cost / c.c_o,
        }
    }

    /// Cluster centre of template `i` out of `n`: log-spaced from 10² to 10⁶.
    pub fn cluster_cost(i: usize, n: usize) -> f64 {
        let frac = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
        10f64.powf(2.0 + 4.0 * frac)
    }

    /// One template, every instance at `time = a · cost`.
    pub fn linear(a: f64, instances: usize, noise: f64, seed: u64) -> SyntheticSpec {
        let t = TemplateSpec::new(
            "linear",
            TimeLaw::Linear { a },
            CardinalityRanges::around(profile_for_cost(1000.0), 0.9),
            SHAPES[1],
        )
        .expect("valid shape");
        SyntheticSpec::new("linear", vec![t], instances, noise, seed)
    }

    /// `templates` clusters of `instances` each, with log-spaced centres,
    /// ±10% cardinality spread and alternating linear and power laws.
    pub fn clustered_mixed(templates: usize, instances: usize, noise: f64, seed: u64) -> SyntheticSpec {
        let list = (0..templates)
            .map(|i| {
                let law = if i % 2 == 0 {
                    TimeLaw::Linear {
                        a: 0.04 + 0.005 * (i % 5) as f64,
                    }
                } else {
                    TimeLaw::Power {
                        a: 0.02,
                        b: 1.05 + 0.025 * (i % 4) as f64,
                    }
                };
                TemplateSpec::new(
                    format!("t{:02}", i + 1),
                    law,
                    CardinalityRanges::around(profile_for_cost(cluster_cost(i, templates)), 0.1),
                    SHAPES[i % SHAPES.len()],
                )
                .expect("valid shape")
            })
            .collect();
        SyntheticSpec::new("clustered-mixed", list, instances, noise, seed)
    }

    /// A constant-cost template whose times split between two modes.
    pub fn bimodal_template(id: &str, cost: f64, t_low: f64, t_high: f64, p: f64) -> TemplateSpec {
        TemplateSpec::new(
            id,
            TimeLaw::Bimodal { t_low, t_high, p },
            CardinalityRanges::fixed(profile_for_cost(cost)),
            SHAPES[3],
        )
        .expect("valid shape")
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use crate::plan::decompose_operators;

    #[test]
    fn scale_and_count() {
        let c = generate_synthetic(&clustered_mixed(22, 100, 0.05, 42)).unwrap();
        assert_eq!(c.len(), 2200);
    }

    #[test]
    fn noiseless_linear_law() {
        for s in generate_synthetic_detailed(&linear(2.0, 50, 0.0, 7)).unwrap() {
            assert_eq!(s.sample.execution_time_ms.unwrap(), 2.0 * s.sample.plan_cost());
            let c = optimizer_cost(&CostModelParams::default(), &s.profile);
            assert_eq!(s.sample.plan_cost(), c);
        }
    }

    #[test]
    fn shapes_lay_out_as_trees() {
        for shape in SHAPES {
            let kinds: Vec<OperatorKind> = shape.iter().map(|k| k.parse().unwrap()).collect();
            let s = layout(&kinds).unwrap();
            let p = s.build(&profile_for_cost(500.0), 500.0, 9.0);
            assert_eq!(p.node_count(), shape.len());
            let got: Vec<&str> = p.iter().map(|n| n.kind.as_str()).collect();
            assert_eq!(got, shape.to_vec());
        }
        let kinds: Vec<OperatorKind> = ["seq_scan", "sort"].iter().map(|k| k.parse().unwrap()).collect();
        assert!(layout(&kinds).is_err());
    }

    #[test]
    fn node_costs_conserve() {
        for s in generate_synthetic(&clustered_mixed(6, 5, 0.05, 3)).unwrap().samples() {
            let recs = decompose_operators(s);
            assert!(recs.iter().all(|r| !r.clamped));
            let total: f64 = recs.iter().map(|r| r.exclusive_cost).sum();
            assert!((total - s.plan_cost()).abs() <= 1e-9 * s.plan_cost());
            let time: f64 = recs.iter().map(|r| r.exclusive_time_ms.unwrap()).sum();
            assert!((time - s.execution_time_ms.unwrap()).abs() <= 1e-9 * time);
        }
    }

    #[test]
    fn deterministic() {
        let spec = clustered_mixed(4, 10, 0.05, 11);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec {
            seed: 12,
            ..spec.clone()
        };
        assert_ne!(
            generate_synthetic(&spec).unwrap().samples(),
            generate_synthetic(&other).unwrap().samples()
        );
    }

    #[test]
    fn invalid_specs() {
        let mut s = linear(2.0, 10, 0.0, 1);
        s.noise = 0.5;
        assert!(matches!(generate_synthetic(&s), Err(Error::Config(_))));
        let mut s = linear(2.0, 10, 0.0, 1);
        s.instances_per_template = 0;
        assert!(s.validate().is_err());
        let mut s = linear(2.0, 10, 0.0, 1);
        s.templates.push(s.templates[0].clone());
        assert!(s.validate().is_err());
        let s = SyntheticSpec::new("b", vec![bimodal_template("b", 10.0, 1.0, 2.0, 1.5)], 1, 0.0, 0);
        assert!(s.validate().is_err());
    }
}
