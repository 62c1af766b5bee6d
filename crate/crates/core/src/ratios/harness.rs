//! Empirical approximation ratios over instance streams.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::MechanismSpec;
use crate::model::{social_cost, AgentProfile, Objective};
use crate::number::Rational;
use crate::solvers::optimal;

/// Sample positions are multiples of `1 / RESOLUTION`.
pub const RESOLUTION: i128 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RatioValue {
    Finite(Rational),
    /// The optimum is 0 but the mechanism is not.
    Infinite,
}

impl RatioValue {
    pub fn of(mech: Rational, opt: Rational) -> Self {
        if opt.is_zero() {
            if mech.is_zero() {
                RatioValue::Finite(Rational::ONE)
            } else {
                RatioValue::Infinite
            }
        } else {
            RatioValue::Finite(mech / opt)
        }
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            RatioValue::Finite(v) => Some(*v),
            RatioValue::Infinite => None,
        }
    }

    pub fn exceeds(&self, bound: Rational) -> bool {
        self.finite().is_none_or(|v| v > bound)
    }
}

impl PartialOrd for RatioValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatioValue {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match (self, other) {
            (RatioValue::Finite(a), RatioValue::Finite(b)) => a.cmp(b),
            (RatioValue::Finite(_), RatioValue::Infinite) => Less,
            (RatioValue::Infinite, RatioValue::Finite(_)) => Greater,
            (RatioValue::Infinite, RatioValue::Infinite) => Equal,
        }
    }
}

impl fmt::Display for RatioValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioValue::Finite(v) => write!(f, "{v}"),
            RatioValue::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub instance: AgentProfile,
    pub mech_cost: Rational,
    pub opt_cost: Rational,
    pub ratio: RatioValue,
}

impl RatioRecord {
    pub fn evaluate(spec: &MechanismSpec, objective: Objective, instance: AgentProfile) -> Result<Self> {
        let placement = spec.run(&instance)?;
        let mech_cost = objective.pick(&social_cost(&instance, &placement)?);
        let opt_cost = optimal(&instance, &spec.class, objective)?.cost;
        Ok(RatioRecord { ratio: RatioValue::of(mech_cost, opt_cost), instance, mech_cost, opt_cost })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    /// First record attaining the maximum ratio.
    pub max: RatioRecord,
    pub records: Vec<RatioRecord>,
}

/// Ratio of mechanism cost to optimal cost on every instance.
pub fn empirical_ratio(
    spec: &MechanismSpec,
    objective: Objective,
    instances: impl IntoIterator<Item = AgentProfile>,
) -> Result<RatioSummary> {
    let records = instances
        .into_iter()
        .map(|instance| RatioRecord::evaluate(spec, objective, instance))
        .collect::<Result<Vec<_>>>()?;
    let max = records
        .iter()
        .fold(None::<&RatioRecord>, |best, r| match best {
            Some(b) if b.ratio >= r.ratio => Some(b),
            _ => Some(r),
        })
        .cloned()
        .ok_or(Error::EmptyInstance)?;
    Ok(RatioSummary { max, records })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Distribution {
    /// Independent points on a grid over `[0, 1]`.
    Uniform01,
    /// Two groups of random size, in `[0, 1]` and `[1 + gap, 2 + gap]`.
    TwoCluster { gap: Rational },
    /// Evenly spaced points from 0 to 1.
    Grid,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform01 => f.write_str("uniform"),
            Distribution::TwoCluster { gap } => write!(f, "two-cluster:{gap}"),
            Distribution::Grid => f.write_str("grid"),
        }
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Distribution::Uniform01),
            "grid" => Ok(Distribution::Grid),
            other => match other.strip_prefix("two-cluster:") {
                Some(gap) => Ok(Distribution::TwoCluster { gap: gap.parse()? }),
                None => Err(Error::Parse(format!("unknown distribution '{s}'"))),
            },
        }
    }
}

fn unit(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(0..=RESOLUTION), RESOLUTION)
}

fn draw(dist: Distribution, n: usize, rng: &mut ChaCha8Rng) -> AgentProfile {
    let mut positions: Vec<Rational> = match dist {
        Distribution::Uniform01 => (0..n).map(|_| unit(rng)).collect(),
        Distribution::Grid if n == 1 => vec![Rational::ZERO],
        Distribution::Grid => (0..n).map(|i| Rational::new(i as i128, n as i128 - 1)).collect(),
        Distribution::TwoCluster { gap } => {
            let left = if n > 1 { rng.gen_range(1..n) } else { 1 };
            let shift = Rational::ONE + gap;
            (0..n).map(|i| if i < left { unit(rng) } else { unit(rng) + shift }).collect()
        }
    };
    positions.sort();
    AgentProfile::from_sorted(positions).expect("sampled profile is sorted and finite")
}

/// A reproducible stream of sorted profiles.
pub fn sample_instances(dist: Distribution, n: usize, count: usize, seed: u64) -> Result<Vec<AgentProfile>> {
    if count == 0 || n == 0 {
        return Err(Error::EmptyInstance);
    }
    if let Distribution::TwoCluster { gap } = dist {
        if gap < Rational::ZERO {
            return Err(Error::Parse("cluster gap must be non-negative".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| draw(dist, n, &mut rng)).collect())
}
