//! Bounds, worst-case families and empirical approximation ratios.

mod bounds;
mod families;
mod harness;

use serde::{Deserialize, Serialize};

pub use bounds::{bound, lower_bound, BoundKind, BoundSpec};
pub use families::{
    is_limit_family, lower_bound_mc_certificate, lower_bound_mc_instance, tight_instance, FamilyParam,
};
pub use harness::{
    empirical_ratio, sample_instances, Distribution, RatioRecord, RatioSummary, RatioValue, RESOLUTION,
};

use crate::error::Result;
use crate::mechanisms::MechanismSpec;
use crate::model::Objective;

/// One line of a ratio sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mechanism: String,
    pub objective: Objective,
    pub n: usize,
    pub params: String,
    pub seed: u64,
    pub instances: usize,
    pub max_ratio: RatioValue,
    pub bound: String,
    pub at_bound: bool,
    pub witness_file: String,
}

impl SweepRow {
    pub fn exceeds_bound(&self, bound: &BoundSpec) -> bool {
        self.max_ratio.exceeds(bound.value)
    }
}

/// Samples `count` instances and records the worst ratio against the bound.
pub fn sweep(
    spec: &MechanismSpec,
    objective: Objective,
    dist: Distribution,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<(SweepRow, RatioSummary, BoundSpec)> {
    let upper = bound(&spec.id, &spec.class, n, objective)?;
    let summary = empirical_ratio(spec, objective, sample_instances(dist, n, count, seed)?)?;
    let row = SweepRow {
        mechanism: spec.id.to_string(),
        objective,
        n,
        params: format!("{};dist={dist}", spec.class),
        seed,
        instances: count,
        max_ratio: summary.max.ratio,
        bound: upper.value.to_string(),
        at_bound: summary.max.ratio == RatioValue::Finite(upper.value),
        witness_file: String::new(),
    };
    Ok((row, summary, upper))
}
