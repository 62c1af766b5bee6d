//! Mechanisms and a uniform way to run them on raw reports.

mod inner;
mod percentile;
mod propagating;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use inner::{eig, eig_detailed, ic, ig, im, CapacityOverflow, EigOutcome};
pub use percentile::{check_percentiles, percentile};
pub use propagating::{pipm, pmm};

use crate::error::{Error, Result};
use crate::model::{normalize, AgentProfile, Placement, ProblemClass};
use crate::number::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MechanismId {
    Pmm,
    Pipm,
    Eig,
    Ic,
    Ig,
    Im,
    Percentile(Vec<Rational>),
}

impl MechanismId {
    pub const TRUTHFUL: [MechanismId; 6] =
        [MechanismId::Pmm, MechanismId::Pipm, MechanismId::Eig, MechanismId::Ic, MechanismId::Ig, MechanismId::Im];

    /// Whether the mechanism belongs to the two-facility framework.
    pub fn is_two_facility(&self) -> bool {
        matches!(self, MechanismId::Eig | MechanismId::Ic | MechanismId::Ig | MechanismId::Im)
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismId::Pmm => f.write_str("pmm"),
            MechanismId::Pipm => f.write_str("pipm"),
            MechanismId::Eig => f.write_str("eig"),
            MechanismId::Ic => f.write_str("ic"),
            MechanismId::Ig => f.write_str("ig"),
            MechanismId::Im => f.write_str("im"),
            MechanismId::Percentile(p) => {
                let parts: Vec<String> = p.iter().map(|v| v.to_f64().to_string()).collect();
                write!(f, "percentile:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "pmm" => MechanismId::Pmm,
            "pipm" => MechanismId::Pipm,
            "eig" => MechanismId::Eig,
            "ic" => MechanismId::Ic,
            "ig" => MechanismId::Ig,
            "im" => MechanismId::Im,
            other => {
                let Some(rest) = other.strip_prefix("percentile:") else {
                    return Err(Error::Parse(format!("unknown mechanism '{s}'")));
                };
                let p = rest.split(',').map(|v| v.trim().parse()).collect::<Result<Vec<Rational>>>()?;
                check_percentiles(&p)?;
                MechanismId::Percentile(p)
            }
        })
    }
}

impl Serialize for MechanismId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MechanismId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A mechanism bound to a problem class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MechanismSpec {
    pub id: MechanismId,
    pub class: ProblemClass,
}

impl MechanismSpec {
    pub fn new(id: MechanismId, class: ProblemClass) -> Result<Self> {
        class.check_params()?;
        let ok = match (&id, &class) {
            (MechanismId::Pmm | MechanismId::Pipm, ProblemClass::EquiCapNoSpare { .. }) => true,
            (MechanismId::Eig, ProblemClass::TwoAbundant { .. }) => true,
            (MechanismId::Ic, ProblemClass::TwoAbundant { c1, c2 }) => c1.abs_diff(*c2) == 1,
            (MechanismId::Ig | MechanismId::Im, ProblemClass::TwoAbundant { c1, c2 }) => c1 == c2,
            (MechanismId::Percentile(_), _) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::MechanismPreconditionViolated(format!("{id} does not apply to class {class}")));
        }
        Ok(MechanismSpec { id, class })
    }

    /// Checks that the mechanism can run on `n` agents.
    pub fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        match (&self.id, self.class) {
            (MechanismId::Percentile(_), _) => Ok(()),
            (MechanismId::Ic, ProblemClass::TwoAbundant { c1, c2 }) => {
                let k = c1.min(c2);
                if n != 2 * k + 1 {
                    return Err(Error::WrongParity(format!("IC requires odd n = 2k + 1 = {}, got n = {n}", 2 * k + 1)));
                }
                Ok(())
            }
            (MechanismId::Im, ProblemClass::TwoAbundant { c1, .. }) => {
                if n != 2 * c1 {
                    return Err(Error::WrongParity(format!("IM requires even n = 2k = {}, got n = {n}", 2 * c1)));
                }
                Ok(())
            }
            (_, class) => class.check_n(n),
        }
    }

    /// Runs the mechanism on a sorted profile.
    pub fn run<T: Scalar>(&self, profile: &AgentProfile<T>) -> Result<Placement<T>> {
        self.check_n(profile.n())?;
        match (&self.id, self.class) {
            (MechanismId::Pmm, ProblemClass::EquiCapNoSpare { m, k }) => pmm(profile, m, k),
            (MechanismId::Pipm, ProblemClass::EquiCapNoSpare { m, k }) => pipm(profile, m, k),
            (MechanismId::Eig, ProblemClass::TwoAbundant { c1, c2 }) => eig(profile, c1, c2),
            (MechanismId::Ic, ProblemClass::TwoAbundant { c1, c2 }) => {
                let mut placement = ic(profile, c1.min(c2))?;
                if c1 < c2 {
                    // ic indexes (k + 1, k); the class lists (k, k + 1)
                    placement.pi.iter_mut().for_each(|j| *j = 1 - *j);
                }
                Ok(placement)
            }
            (MechanismId::Ig, ProblemClass::TwoAbundant { c1, .. }) => ig(profile, c1),
            (MechanismId::Im, ProblemClass::TwoAbundant { c1, .. }) => im(profile, c1),
            (MechanismId::Percentile(p), _) => percentile(profile, p),
            _ => Err(Error::MechanismPreconditionViolated(format!("{} does not apply to class {}", self.id, self.class))),
        }
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.id, self.class)
    }
}

/// A mechanism seen from the agents: raw reports in, assigned facility
/// position per agent out, both in input order.
pub trait Mechanism: Sync {
    fn name(&self) -> String;
    fn assigned_facilities(&self, reports: &[Rational]) -> Result<Vec<Rational>>;

    /// Whether scaling every report by a positive factor scales the output by
    /// the same factor.
    fn scale_equivariant(&self) -> bool {
        false
    }

    /// Cost of each agent at its true position when everyone reports `reports`.
    fn agent_costs(&self, truth: &[Rational], reports: &[Rational]) -> Result<Vec<Rational>> {
        let assigned = self.assigned_facilities(reports)?;
        Ok(truth.iter().zip(&assigned).map(|(x, y)| (*x - *y).abs()).collect())
    }
}

impl Mechanism for MechanismSpec {
    fn name(&self) -> String {
        self.to_string()
    }

    fn scale_equivariant(&self) -> bool {
        true
    }

    fn assigned_facilities(&self, reports: &[Rational]) -> Result<Vec<Rational>> {
        let normalized = normalize(reports)?;
        let placement = self.run(&normalized.profile)?;
        Ok(normalized.rank_map.iter().map(|&rank| *placement.facility_of(rank)).collect())
    }

    /// Uncapacitated mechanisms let agents walk to the facility nearest to
    /// their true position.
    fn agent_costs(&self, truth: &[Rational], reports: &[Rational]) -> Result<Vec<Rational>> {
        let normalized = normalize(reports)?;
        let placement = self.run(&normalized.profile)?;
        Ok(match self.id {
            MechanismId::Percentile(_) => truth
                .iter()
                .map(|x| placement.y.iter().map(|y| (*x - *y).abs()).min().expect("at least one facility"))
                .collect(),
            _ => truth
                .iter()
                .zip(&normalized.rank_map)
                .map(|(x, &rank)| (*x - *placement.facility_of(rank)).abs())
                .collect(),
        })
    }
}
