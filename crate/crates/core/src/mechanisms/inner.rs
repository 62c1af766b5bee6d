//! Two-facility mechanisms for abundant capacities: Extended InnerGap and
//! its special cases InnerChoice, InnerGap and InnerPoint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AgentProfile, Placement, ProblemClass};
use crate::number::Scalar;

/// A closest-facility assignment that had to move agents to respect capacity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapacityOverflow {
    pub facility: usize,
    pub load: usize,
    pub capacity: usize,
    /// Every moved agent was equidistant from both facilities.
    pub tie_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigOutcome<T> {
    pub placement: Placement<T>,
    pub overflow: Option<CapacityOverflow>,
}

/// Sends every agent to its closer facility (ties to the left one). When
/// both facilities coincide the left one is filled first. Returns the
/// matching and, if capacities forced agents off their closer facility, a
/// diagnostic.
fn assign_closest<T: Scalar>(
    profile: &AgentProfile<T>,
    y1: &T,
    y2: &T,
    cap_left: usize,
    cap_right: usize,
) -> (Vec<usize>, Option<CapacityOverflow>) {
    let n = profile.n();
    let xs = profile.positions();
    let coincide = y1.approx_eq(y2);
    let preferred = if coincide {
        n.min(cap_left)
    } else {
        let twice_z = y1.clone() + y2.clone();
        xs.iter()
            .take_while(|&x| (x.clone() + x.clone()).approx_le(&twice_z))
            .count()
    };
    let left = preferred.min(cap_left).max(n.saturating_sub(cap_right));
    let overflow = (left != preferred).then(|| {
        let (facility, load, capacity) = if preferred > left {
            (0, preferred, cap_left)
        } else {
            (1, n - preferred, cap_right)
        };
        let moved = if preferred > left { &xs[left..preferred] } else { &xs[preferred..left] };
        let tie_only = moved.iter().all(|x| {
            (x.clone() - y1.clone()).abs_val().approx_eq(&(x.clone() - y2.clone()).abs_val())
        });
        CapacityOverflow { facility, load, capacity, tie_only }
    });
    let mu = (0..n).map(|i| usize::from(i >= left)).collect();
    (mu, overflow)
}

/// Extended InnerGap with the full diagnostic.
///
/// Facilities go to `x_{n - c̄}` and `x_{c̄ + 1}`. The agents strictly between
/// them in sorted order, `x_{n - c̄ + 1} ..= x_{c̄}`, are split by the midpoint
/// `z`: `n1` at or left of `z`, `n2` right of it. The larger capacity takes
/// the left site when `n1 >= n2`. Equal capacities keep `pi` identity.
pub fn eig_detailed<T: Scalar>(profile: &AgentProfile<T>, c1: usize, c2: usize) -> Result<EigOutcome<T>> {
    let n = profile.n();
    ProblemClass::TwoAbundant { c1, c2 }.check_n(n)?;
    let caps = [c1, c2];
    let c_bar = c1.max(c2);
    let y1 = profile.x(n - c_bar).clone();
    let y2 = profile.x(c_bar + 1).clone();
    let twice_z = y1.clone() + y2.clone();
    let n1 = (n - c_bar + 1..=c_bar)
        .filter(|&i| (profile.x(i).clone() + profile.x(i).clone()).approx_le(&twice_z))
        .count();
    let n2 = 2 * c_bar - n - n1;
    let big = if c1 >= c2 { 0 } else { 1 };
    let pi = if c1 == c2 || n1 >= n2 { vec![big, 1 - big] } else { vec![1 - big, big] };
    let (mu, overflow) = assign_closest(profile, &y1, &y2, caps[pi[0]], caps[pi[1]]);
    Ok(EigOutcome { placement: Placement { y: vec![y1, y2], pi, mu }, overflow })
}

/// Extended InnerGap mechanism.
pub fn eig<T: Scalar>(profile: &AgentProfile<T>, c1: usize, c2: usize) -> Result<Placement<T>> {
    Ok(eig_detailed(profile, c1, c2)?.placement)
}

/// InnerChoice for `n = 2k + 1` agents and capacities `(k + 1, k)`.
///
/// `pi` indexes the capacities in that order: index 0 is `k + 1`.
pub fn ic<T: Scalar>(profile: &AgentProfile<T>, k: usize) -> Result<Placement<T>> {
    let n = profile.n();
    if k == 0 || n != 2 * k + 1 {
        return Err(Error::WrongParity(format!("IC requires odd n = 2k + 1, got n = {n}, k = {k}")));
    }
    let left = profile.x(k).clone();
    let mid = profile.x(k + 1).clone();
    let right = profile.x(k + 2).clone();
    let delta1 = (mid.clone() - left.clone()).abs_val();
    let delta2 = (right.clone() - mid).abs_val();
    let pi = if delta1.approx_le(&delta2) { vec![0, 1] } else { vec![1, 0] };
    let caps = [k + 1, k];
    let (mu, _) = assign_closest(profile, &left, &right, caps[pi[0]], caps[pi[1]]);
    Ok(Placement { y: vec![left, right], pi, mu })
}

/// InnerGap: both capacities `k >= ceil(n / 2)`.
pub fn ig<T: Scalar>(profile: &AgentProfile<T>, k: usize) -> Result<Placement<T>> {
    let n = profile.n();
    if 2 * k < n {
        return Err(Error::InfeasibleCapacities(format!("IG requires k >= ceil(n/2), got k = {k}, n = {n}")));
    }
    eig(profile, k, k)
}

/// InnerPoint: `n = 2k` agents, both capacities `k`, facilities at `x_k`, `x_{k+1}`.
pub fn im<T: Scalar>(profile: &AgentProfile<T>, k: usize) -> Result<Placement<T>> {
    let n = profile.n();
    if k == 0 || n != 2 * k {
        return Err(Error::WrongParity(format!("IM requires even n = 2k, got n = {n}, k = {k}")));
    }
    let y1 = profile.x(k).clone();
    let y2 = profile.x(k + 1).clone();
    let (mu, _) = assign_closest(profile, &y1, &y2, k, k);
    Ok(Placement { y: vec![y1, y2], pi: vec![0, 1], mu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{social_cost, validate_placement};
    use crate::number::Rational;

    fn q(v: &str) -> Rational {
        v.parse().unwrap()
    }

    fn prof(vals: &[&str]) -> AgentProfile {
        AgentProfile::from_unsorted(&vals.iter().map(|v| q(v)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn eig_degenerate_sites() {
        let p = prof(&["0", "0", "0", "0", "0", "1"]);
        let out = eig_detailed(&p, 4, 4).unwrap();
        assert_eq!(out.placement.y, vec![q("0"), q("0")]);
        assert_eq!(social_cost(&p, &out.placement).unwrap().mc, q("1"));
        assert!(out.overflow.is_none());
        assert!(validate_placement(&ProblemClass::two(4, 4).unwrap(), &p, &out.placement).is_empty());
    }

    #[test]
    fn eig_first_sc_family() {
        let p = prof(&["0", "0", "1", "5", "5", "5"]);
        let placement = eig(&p, 3, 3).unwrap();
        assert_eq!(placement.y, vec![q("1"), q("5")]);
        assert_eq!(social_cost(&p, &placement).unwrap().sc, q("2"));
    }

    #[test]
    fn eig_coincident() {
        let p = prof(&["2"; 5]);
        let placement = eig(&p, 3, 4).unwrap();
        assert_eq!(placement.y, vec![q("2"), q("2")]);
        assert_eq!(social_cost(&p, &placement).unwrap().sc, Rational::ZERO);
    }

    #[test]
    fn eig_puts_larger_capacity_on_heavier_side() {
        // n = 5, c = (2, 3): sites x_2 = 1 and x_4 = 3, midpoint 2.
        let p = prof(&["0", "1", "1.5", "3", "4"]);
        let placement = eig(&p, 2, 3).unwrap();
        assert_eq!(placement.pi, vec![1, 0]);
        assert_eq!(placement.mu, vec![0, 0, 0, 1, 1]);
        let p = prof(&["0", "1", "2.5", "3", "4"]);
        let placement = eig(&p, 2, 3).unwrap();
        assert_eq!(placement.pi, vec![0, 1]);
        assert_eq!(placement.mu, vec![0, 0, 1, 1, 1]);
    }

    #[test]
    fn eig_counts_only_inner_agents() {
        // Copies of the sites do not vote: x_3 = 1/4 is the only inner agent.
        let p = prof(&["0", "0", "1/4", "1/4", "1"]);
        let placement = eig(&p, 3, 2).unwrap();
        assert_eq!(placement.pi, vec![1, 0]);
        assert_eq!(social_cost(&p, &placement).unwrap().sc, q("3/4"));
        assert_eq!(placement, ic(&p, 2).unwrap());

        let p = prof(&["0", "0", "0", "3/4", "3/4", "3/4", "1", "1"]);
        let placement = eig(&p, 5, 4).unwrap();
        assert_eq!(placement.pi, vec![1, 0]);
        assert_eq!(social_cost(&p, &placement).unwrap().mc, q("1/4"));
    }

    #[test]
    fn ic_examples() {
        let p = prof(&["0", "0", "11/30", "2/3", "1"]);
        let placement = ic(&p, 2).unwrap();
        assert_eq!(placement.y, vec![q("0"), q("2/3")]);
        // capacity 3 (index 0) at 2/3, capacity 2 at 0
        assert_eq!(placement.pi, vec![1, 0]);
        assert_eq!(social_cost(&p, &placement).unwrap().mc, q("1/3"));

        let p = prof(&["0", "0", "0", "1", "1", "1", "2"]);
        let placement = ic(&p, 3).unwrap();
        assert_eq!(placement.y, vec![q("0"), q("1")]);
        assert_eq!(placement.pi, vec![1, 0]);

        let p = prof(&["4"; 3]);
        assert_eq!(ic(&p, 1).unwrap().y, vec![q("4"), q("4")]);
        assert!(matches!(ic(&prof(&["0", "1", "2", "3"]), 2), Err(Error::WrongParity(_))));
    }

    #[test]
    fn ig_examples() {
        let p = prof(&["0", "0", "1", "5", "5", "5"]);
        assert_eq!(ig(&p, 3).unwrap(), eig(&p, 3, 3).unwrap());
        assert_eq!(ig(&prof(&["0", "1", "2"]), 2).unwrap().y, vec![q("0"), q("2")]);
        assert_eq!(ig(&prof(&["1"; 4]), 3).unwrap().y, vec![q("1"), q("1")]);
        assert!(ig(&prof(&["0", "1", "2", "3", "4"]), 2).is_err());
    }

    #[test]
    fn im_examples() {
        assert_eq!(im(&prof(&["0", "0", "1", "1"]), 2).unwrap().y, vec![q("0"), q("1")]);
        assert_eq!(im(&prof(&["0", "4", "4", "4"]), 2).unwrap().y, vec![q("4"), q("4")]);
        let p = prof(&["6"; 4]);
        assert_eq!(social_cost(&p, &im(&p, 2).unwrap()).unwrap().sc, Rational::ZERO);
        assert!(matches!(im(&prof(&["0", "1", "2"]), 1), Err(Error::WrongParity(_))));
    }
}
