//! Instances, placements and the two cost objectives.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::{Rational, Scalar};

/// Agent positions sorted left to right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct AgentProfile<T = Rational> {
    positions: Vec<T>,
}

/// A sorted profile together with the rank of every raw input agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<T = Rational> {
    pub profile: AgentProfile<T>,
    /// `rank_map[i]` is the sorted position of raw agent `i`.
    pub rank_map: Vec<usize>,
}

/// Sorts raw reports. Ties keep input order.
pub fn normalize<T: Scalar>(raw: &[T]) -> Result<Normalized<T>> {
    if raw.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if let Some(bad) = raw.iter().find(|v| !v.is_finite_val()) {
        return Err(Error::NonFiniteValue(format!("{bad:?}")));
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let mut rank_map = vec![0; raw.len()];
    for (rank, &agent) in order.iter().enumerate() {
        rank_map[agent] = rank;
    }
    let positions = order.iter().map(|&i| raw[i].clone()).collect();
    Ok(Normalized {
        profile: AgentProfile { positions },
        rank_map,
    })
}

impl<T: Scalar> AgentProfile<T> {
    /// Builds a profile from values that must already be sorted.
    pub fn from_sorted(positions: Vec<T>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyInstance);
        }
        if let Some(bad) = positions.iter().find(|v| !v.is_finite_val()) {
            return Err(Error::NonFiniteValue(format!("{bad:?}")));
        }
        if positions.windows(2).any(|w| w[0].total_cmp(&w[1]) == Ordering::Greater) {
            return Err(Error::Parse("positions are not sorted".into()));
        }
        Ok(AgentProfile { positions })
    }

    /// Sorts `raw` and drops the rank map.
    pub fn from_unsorted(raw: &[T]) -> Result<Self> {
        Ok(normalize(raw)?.profile)
    }

    pub fn positions(&self) -> &[T] {
        &self.positions
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// 1-based access, matching the order-statistic notation `x_i`.
    pub fn x(&self, i: usize) -> &T {
        &self.positions[i - 1]
    }

    pub fn first(&self) -> &T {
        &self.positions[0]
    }

    pub fn last(&self) -> &T {
        &self.positions[self.positions.len() - 1]
    }

    pub fn spread(&self) -> T {
        self.last().clone() - self.first().clone()
    }

    /// Applies `x -> scale * x + shift`. `scale` must be positive.
    pub fn affine(&self, scale: &T, shift: &T) -> Self {
        AgentProfile {
            positions: self
                .positions
                .iter()
                .map(|x| scale.clone() * x.clone() + shift.clone())
                .collect(),
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> AgentProfile<U> {
        AgentProfile {
            positions: self.positions.iter().map(f).collect(),
        }
    }
}

impl AgentProfile<Rational> {
    pub fn to_f64(&self) -> AgentProfile<f64> {
        self.map(|x| x.to_f64())
    }
}

/// The block `I_j` of `k` consecutive sorted agents, `j` 1-based.
pub fn cluster<T: Scalar>(profile: &AgentProfile<T>, j: usize, k: usize) -> Result<Vec<T>> {
    let n = profile.n();
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::NotDivisible { n, k });
    }
    let blocks = n / k;
    if j == 0 || j > blocks {
        return Err(Error::IndexOutOfRange { index: j, max: blocks });
    }
    Ok(profile.positions[(j - 1) * k..j * k].to_vec())
}

/// Which of the two frameworks an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ProblemClass {
    /// `m` facilities of capacity `k`, exactly `m * k` agents.
    #[serde(rename = "equicap")]
    EquiCapNoSpare { m: usize, k: usize },
    /// Two facilities with capacities `c1`, `c2`, each at least half the agents.
    #[serde(rename = "two")]
    TwoAbundant { c1: usize, c2: usize },
}

impl ProblemClass {
    pub fn equicap(m: usize, k: usize) -> Result<Self> {
        let class = ProblemClass::EquiCapNoSpare { m, k };
        class.check_params()?;
        Ok(class)
    }

    pub fn two(c1: usize, c2: usize) -> Result<Self> {
        let class = ProblemClass::TwoAbundant { c1, c2 };
        class.check_params()?;
        Ok(class)
    }

    /// Parameter checks that do not depend on the number of agents.
    pub fn check_params(&self) -> Result<()> {
        match *self {
            ProblemClass::EquiCapNoSpare { m, k } => {
                if m < 2 {
                    return Err(Error::InvalidClass(format!("need m >= 2, got m = {m}")));
                }
                if k < 1 {
                    return Err(Error::InvalidClass("capacity k must be at least 1".into()));
                }
            }
            ProblemClass::TwoAbundant { c1, c2 } => {
                if c1 == 0 || c2 == 0 {
                    return Err(Error::InvalidClass("capacities must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Checks the class against a profile size.
    pub fn check_n(&self, n: usize) -> Result<()> {
        self.check_params()?;
        match *self {
            ProblemClass::EquiCapNoSpare { m, k } => {
                if n != m * k {
                    return Err(Error::NotDivisible { n, k });
                }
            }
            ProblemClass::TwoAbundant { c1, c2 } => {
                let half = n / 2;
                if c1 < half || c2 < half || c1 > n.saturating_sub(1) || c2 > n.saturating_sub(1) {
                    return Err(Error::InfeasibleCapacities(format!(
                        "need floor(n/2) = {half} <= c1, c2 <= n - 1 = {}, got ({c1}, {c2})",
                        n.saturating_sub(1)
                    )));
                }
                if c1 + c2 < n {
                    return Err(Error::InfeasibleCapacities(format!(
                        "c1 + c2 = {} < n = {n}",
                        c1 + c2
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn capacities(&self) -> Vec<usize> {
        match *self {
            ProblemClass::EquiCapNoSpare { m, k } => vec![k; m],
            ProblemClass::TwoAbundant { c1, c2 } => vec![c1, c2],
        }
    }

    pub fn facility_count(&self) -> usize {
        match *self {
            ProblemClass::EquiCapNoSpare { m, .. } => m,
            ProblemClass::TwoAbundant { .. } => 2,
        }
    }

    /// The larger capacity, for the two-facility class.
    pub fn c_bar(&self) -> Option<usize> {
        match *self {
            ProblemClass::TwoAbundant { c1, c2 } => Some(c1.max(c2)),
            ProblemClass::EquiCapNoSpare { .. } => None,
        }
    }
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemClass::EquiCapNoSpare { m, k } => write!(f, "m={m};k={k}"),
            ProblemClass::TwoAbundant { c1, c2 } => write!(f, "c1={c1};c2={c2}"),
        }
    }
}

/// Facility positions `y`, the capacity permutation `pi` and the matching `mu`.
///
/// `pi[j]` is the index into the class capacities used by the facility at
/// `y[j]`. `mu[i]` is the facility serving the i-th sorted agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Placement<T = Rational> {
    pub y: Vec<T>,
    pub pi: Vec<usize>,
    pub mu: Vec<usize>,
}

impl<T: Scalar> Placement<T> {
    /// Placement with identity capacity permutation.
    pub fn identity(y: Vec<T>, mu: Vec<usize>) -> Self {
        let pi = (0..y.len()).collect();
        Placement { y, pi, mu }
    }

    /// Facility position serving sorted agent `i` (0-based).
    pub fn facility_of(&self, i: usize) -> &T {
        &self.y[self.mu[i]]
    }

    pub fn loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.y.len()];
        for &j in &self.mu {
            if j < loads.len() {
                loads[j] += 1;
            }
        }
        loads
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Placement<U> {
        Placement {
            y: self.y.iter().map(f).collect(),
            pi: self.pi.clone(),
            mu: self.mu.clone(),
        }
    }
}

/// Per-agent costs with their sum and maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CostReport<T = Rational> {
    pub per_agent: Vec<T>,
    pub sc: T,
    pub mc: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "sc")]
    Sc,
    #[serde(rename = "mc")]
    Mc,
}

impl Objective {
    pub fn pick<T: Clone>(&self, report: &CostReport<T>) -> T {
        match self {
            Objective::Sc => report.sc.clone(),
            Objective::Mc => report.mc.clone(),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Sc => "sc",
            Objective::Mc => "mc",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "social" => Ok(Objective::Sc),
            "mc" | "max" => Ok(Objective::Mc),
            _ => Err(Error::Parse(format!("unknown objective {s:?}"))),
        }
    }
}

/// Costs `|x_i - y_{mu(i)}|` with their sum and maximum.
pub fn social_cost<T: Scalar>(profile: &AgentProfile<T>, placement: &Placement<T>) -> Result<CostReport<T>> {
    if placement.mu.len() != profile.n() {
        return Err(Error::InvalidPlacement(format!(
            "matching covers {} agents, profile has {}",
            placement.mu.len(),
            profile.n()
        )));
    }
    if let Some(&j) = placement.mu.iter().find(|&&j| j >= placement.y.len()) {
        return Err(Error::InvalidPlacement(format!(
            "facility index {j} out of range for {} facilities",
            placement.y.len()
        )));
    }
    let per_agent: Vec<T> = profile
        .positions()
        .iter()
        .zip(&placement.mu)
        .map(|(x, &j)| (x.clone() - placement.y[j].clone()).abs_val())
        .collect();
    let mut sc = T::zero();
    let mut mc = T::zero();
    for c in &per_agent {
        sc = sc + c.clone();
        mc = mc.max_of(c.clone());
    }
    Ok(CostReport { per_agent, sc, mc })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    FacilityCount { expected: usize, got: usize },
    MatchingLength { expected: usize, got: usize },
    UnknownFacility { agent: usize, facility: usize },
    BadPermutation(Vec<usize>),
    Overload { facility: usize, load: usize, capacity: usize },
    ClassMismatch(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FacilityCount { expected, got } => {
                write!(f, "expected {expected} facilities, got {got}")
            }
            Violation::MatchingLength { expected, got } => {
                write!(f, "matching has {got} entries for {expected} agents")
            }
            Violation::UnknownFacility { agent, facility } => {
                write!(f, "agent {agent} matched to unknown facility {facility}")
            }
            Violation::BadPermutation(pi) => write!(f, "pi {pi:?} is not a permutation"),
            Violation::Overload { load, capacity, .. } => write!(f, "load {load} > capacity {capacity}"),
            Violation::ClassMismatch(msg) => f.write_str(msg),
        }
    }
}

/// Lists every way `placement` breaks the class constraints. Empty means ok.
pub fn validate_placement<T: Scalar>(
    class: &ProblemClass,
    profile: &AgentProfile<T>,
    placement: &Placement<T>,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if let Err(e) = class.check_n(profile.n()) {
        out.push(Violation::ClassMismatch(e.to_string()));
    }
    let caps = class.capacities();
    let m = caps.len();
    if placement.y.len() != m {
        out.push(Violation::FacilityCount { expected: m, got: placement.y.len() });
    }
    let mut sorted_pi = placement.pi.clone();
    sorted_pi.sort_unstable();
    let pi_ok = sorted_pi == (0..m).collect::<Vec<_>>() && placement.pi.len() == placement.y.len();
    if !pi_ok {
        out.push(Violation::BadPermutation(placement.pi.clone()));
    }
    if placement.mu.len() != profile.n() {
        out.push(Violation::MatchingLength { expected: profile.n(), got: placement.mu.len() });
    }
    for (agent, &facility) in placement.mu.iter().enumerate() {
        if facility >= placement.y.len() {
            out.push(Violation::UnknownFacility { agent, facility });
        }
    }
    if pi_ok {
        for (facility, load) in placement.loads().into_iter().enumerate() {
            let capacity = caps[placement.pi[facility]];
            if load > capacity {
                out.push(Violation::Overload { facility, load, capacity });
            }
        }
    }
    out
}

/// The instance file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub positions: Vec<Rational>,
    pub class: ProblemClass,
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        inst.class.check_params()?;
        Ok(inst)
    }

    pub fn normalized(&self) -> Result<Normalized<Rational>> {
        normalize(&self.positions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &str) -> Rational {
        v.parse().unwrap()
    }

    fn prof(vals: &[&str]) -> AgentProfile {
        AgentProfile::from_unsorted(&vals.iter().map(|v| q(v)).collect::<Vec<_>>()).unwrap()
    }

    fn example1() -> AgentProfile {
        prof(&["0", "0", "0", "1", "1", "2", "2.5", "4", "4"])
    }

    #[test]
    fn normalize_returns_rank_map() {
        let raw: Vec<Rational> = [2, 0, 1].iter().map(|&v| Rational::from(v)).collect();
        let norm = normalize(&raw).unwrap();
        assert_eq!(norm.profile.positions(), &[q("0"), q("1"), q("2")]);
        assert_eq!(norm.rank_map, vec![2, 0, 1]);
    }

    #[test]
    fn normalize_identity_and_example() {
        let zeros = vec![Rational::ZERO; 3];
        assert_eq!(normalize(&zeros).unwrap().rank_map, vec![0, 1, 2]);
        let raw: Vec<Rational> = ["4", "0", "2.5", "1", "0", "2", "4", "1", "0"].iter().map(|v| q(v)).collect();
        assert_eq!(normalize(&raw).unwrap().profile, example1());
    }

    #[test]
    fn normalize_errors() {
        assert_eq!(normalize::<Rational>(&[]).unwrap_err(), Error::EmptyInstance);
        assert!(matches!(normalize(&[1.0, f64::NAN]), Err(Error::NonFiniteValue(_))));
    }

    #[test]
    fn cluster_examples() {
        assert_eq!(cluster(&example1(), 2, 3).unwrap(), vec![q("1"), q("1"), q("2")]);
        assert_eq!(cluster(&prof(&["5", "5"]), 1, 2).unwrap(), vec![q("5"), q("5")]);
        assert_eq!(cluster(&prof(&["0", "1", "2", "10"]), 2, 2).unwrap(), vec![q("2"), q("10")]);
        assert!(matches!(cluster(&example1(), 4, 3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(cluster(&example1(), 1, 2), Err(Error::NotDivisible { .. })));
        assert!(matches!(cluster(&example1(), 1, 0), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn social_cost_of_pmm_output_on_example1() {
        let placement = Placement::identity(vec![q("0"), q("1"), q("3")], vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        let report = social_cost(&example1(), &placement).unwrap();
        assert_eq!(report.sc, q("3.5"));
        assert_eq!(report.mc, q("1"));
    }

    #[test]
    fn social_cost_zero_when_facilities_on_agents() {
        let p = prof(&["1", "3", "7"]);
        let placement = Placement::identity(p.positions().to_vec(), vec![0, 1, 2]);
        assert_eq!(social_cost(&p, &placement).unwrap().sc, Rational::ZERO);
    }

    #[test]
    fn social_cost_rejects_bad_matching() {
        let p = prof(&["1", "3"]);
        let placement = Placement::identity(vec![q("1")], vec![0, 1]);
        assert!(matches!(social_cost(&p, &placement), Err(Error::InvalidPlacement(_))));
    }

    #[test]
    fn max_cost_of_coincident_facilities() {
        let p = prof(&["0", "0", "0", "0", "0", "1"]);
        let placement = Placement::identity(vec![q("0"), q("0")], vec![0, 0, 0, 0, 1, 1]);
        assert_eq!(social_cost(&p, &placement).unwrap().mc, q("1"));
    }

    #[test]
    fn validate_block_matching_ok() {
        let class = ProblemClass::equicap(3, 3).unwrap();
        let placement = Placement::identity(vec![q("0"), q("1"), q("3")], vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert!(validate_placement(&class, &example1(), &placement).is_empty());
    }

    #[test]
    fn validate_reports_overload() {
        let class = ProblemClass::two(3, 2).unwrap();
        let p = prof(&["0", "1", "2", "3", "4"]);
        let placement = Placement { y: vec![q("1"), q("4")], pi: vec![0, 1], mu: vec![0, 0, 0, 0, 1] };
        let violations = validate_placement(&class, &p, &placement);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].to_string(), "load 4 > capacity 3");
    }

    #[test]
    fn class_checks() {
        assert!(ProblemClass::equicap(1, 3).is_err());
        assert!(ProblemClass::equicap(2, 0).is_err());
        let two = ProblemClass::two(4, 4).unwrap();
        assert!(two.check_n(6).is_ok());
        assert!(two.check_n(9).is_err());
        assert!(ProblemClass::two(3, 2).unwrap().check_n(5).is_ok());
        assert!(ProblemClass::two(5, 2).unwrap().check_n(5).is_err());
        assert_eq!(two.c_bar(), Some(4));
    }

    #[test]
    fn instance_json_accepts_strings_and_numbers() {
        let inst = Instance::from_json(r#"{"positions":[0, "2.5", 1.5, "1/3"], "class":{"type":"two","c1":2,"c2":2}}"#).unwrap();
        assert_eq!(inst.positions, vec![q("0"), q("5/2"), q("3/2"), q("1/3")]);
        assert_eq!(inst.class, ProblemClass::TwoAbundant { c1: 2, c2: 2 });
        let eq = Instance::from_json(r#"{"positions":[1,2],"class":{"type":"equicap","m":2,"k":1}}"#).unwrap();
        assert_eq!(eq.class, ProblemClass::EquiCapNoSpare { m: 2, k: 1 });
        assert!(Instance::from_json(r#"{"positions":[1],"class":{"type":"equicap","m":1,"k":1}}"#).is_err());
    }
}
