//! Exact optimal Social Cost and Maximum Cost for both frameworks, plus an
//! exhaustive oracle for small instances.

use crate::error::{Error, Result};
use crate::model::{social_cost, AgentProfile, Objective, Placement, ProblemClass};
use crate::number::Scalar;

/// Largest instance the exhaustive oracle accepts by default.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<T> {
    pub placement: Placement<T>,
    pub cost: T,
    pub objective: Objective,
}

/// Left median of a sorted group (index `floor((len + 1) / 2)`, 1-based).
fn left_median<T: Scalar>(group: &[T]) -> T {
    group[group.len().div_ceil(2) - 1].clone()
}

fn midpoint<T: Scalar>(group: &[T]) -> T {
    (group[0].clone() + group[group.len() - 1].clone()).half()
}

/// Cost of serving a sorted, non-empty group from its best single point.
fn group_cost<T: Scalar>(group: &[T], objective: Objective) -> (T, T) {
    match objective {
        Objective::Sc => {
            let y = left_median(group);
            let cost = group
                .iter()
                .fold(T::zero(), |acc, x| acc + (x.clone() - y.clone()).abs_val());
            (y, cost)
        }
        Objective::Mc => {
            let y = midpoint(group);
            let cost = (group[group.len() - 1].clone() - group[0].clone()).half();
            (y, cost)
        }
    }
}

fn check_blocks(n: usize, m: usize, k: usize) -> Result<()> {
    if k == 0 || m == 0 || n != m * k {
        return Err(Error::NotDivisible { n, k });
    }
    Ok(())
}

fn equicap<T: Scalar>(profile: &AgentProfile<T>, m: usize, k: usize, objective: Objective) -> Result<OptResult<T>> {
    check_blocks(profile.n(), m, k)?;
    let mut y = Vec::with_capacity(m);
    let mut total = T::zero();
    for block in profile.positions().chunks(k) {
        let (pos, cost) = group_cost(block, objective);
        y.push(pos);
        total = match objective {
            Objective::Sc => total + cost,
            Objective::Mc => total.max_of(cost),
        };
    }
    let mu = (0..profile.n()).map(|i| i / k).collect();
    Ok(OptResult { placement: Placement::identity(y, mu), cost: total, objective })
}

/// Optimal SC with `m` facilities of capacity `k`: each block at its left median.
pub fn optimal_sc_equicap<T: Scalar>(profile: &AgentProfile<T>, m: usize, k: usize) -> Result<OptResult<T>> {
    equicap(profile, m, k, Objective::Sc)
}

/// Optimal MC with `m` facilities of capacity `k`: each block at its midpoint.
pub fn optimal_mc_equicap<T: Scalar>(profile: &AgentProfile<T>, m: usize, k: usize) -> Result<OptResult<T>> {
    equicap(profile, m, k, Objective::Mc)
}

/// Enumerates contiguous splits `s | n - s` under both capacity orders.
fn two<T: Scalar>(profile: &AgentProfile<T>, c1: usize, c2: usize, objective: Objective) -> Result<OptResult<T>> {
    let n = profile.n();
    ProblemClass::TwoAbundant { c1, c2 }.check_n(n)?;
    let caps = [c1, c2];
    let xs = profile.positions();
    let mut best: Option<OptResult<T>> = None;
    for s in 0..=n {
        for (a, b) in [(0usize, 1usize), (1, 0)] {
            if s > caps[a] || n - s > caps[b] {
                continue;
            }
            let (left_y, left_cost) = if s == 0 {
                (xs[0].clone(), T::zero())
            } else {
                group_cost(&xs[..s], objective)
            };
            let (right_y, right_cost) = if s == n {
                (xs[n - 1].clone(), T::zero())
            } else {
                group_cost(&xs[s..], objective)
            };
            let cost = match objective {
                Objective::Sc => left_cost + right_cost,
                Objective::Mc => left_cost.max_of(right_cost),
            };
            if best.as_ref().is_none_or(|b| cost.total_cmp(&b.cost).is_lt()) {
                let mu = (0..n).map(|i| usize::from(i >= s)).collect();
                best = Some(OptResult {
                    placement: Placement { y: vec![left_y, right_y], pi: vec![a, b], mu },
                    cost,
                    objective,
                });
            }
        }
    }
    best.ok_or_else(|| Error::InfeasibleCapacities(format!("no feasible split for n = {n}, c = ({c1}, {c2})")))
}

/// Optimal SC with two facilities of capacities `c1`, `c2`.
pub fn optimal_sc_two<T: Scalar>(profile: &AgentProfile<T>, c1: usize, c2: usize) -> Result<OptResult<T>> {
    two(profile, c1, c2, Objective::Sc)
}

/// Optimal MC with two facilities of capacities `c1`, `c2`.
pub fn optimal_mc_two<T: Scalar>(profile: &AgentProfile<T>, c1: usize, c2: usize) -> Result<OptResult<T>> {
    two(profile, c1, c2, Objective::Mc)
}

/// Dispatches to the structured solver for `class`.
pub fn optimal<T: Scalar>(profile: &AgentProfile<T>, class: &ProblemClass, objective: Objective) -> Result<OptResult<T>> {
    class.check_n(profile.n())?;
    match *class {
        ProblemClass::EquiCapNoSpare { m, k } => equicap(profile, m, k, objective),
        ProblemClass::TwoAbundant { c1, c2 } => two(profile, c1, c2, objective),
    }
}

/// Exhaustive optimum over every capacity-feasible assignment, `n <= 8`.
pub fn brute_force_optimal<T: Scalar>(
    profile: &AgentProfile<T>,
    capacities: &[usize],
    objective: Objective,
) -> Result<OptResult<T>> {
    brute_force_optimal_with_cap(profile, capacities, objective, DEFAULT_BRUTE_FORCE_CAP)
}

struct Search<'a, T> {
    xs: &'a [T],
    caps: &'a [usize],
    objective: Objective,
    assign: Vec<usize>,
    loads: Vec<usize>,
    best: Option<(T, Vec<usize>, Vec<T>)>,
}

impl<T: Scalar> Search<'_, T> {
    fn evaluate(&mut self) {
        let m = self.caps.len();
        let mut y = Vec::with_capacity(m);
        let mut total = T::zero();
        for j in 0..m {
            let group: Vec<T> = self
                .xs
                .iter()
                .zip(&self.assign)
                .filter(|(_, &f)| f == j)
                .map(|(x, _)| x.clone())
                .collect();
            if group.is_empty() {
                y.push(self.xs[0].clone());
                continue;
            }
            let (pos, cost) = group_cost(&group, self.objective);
            y.push(pos);
            total = match self.objective {
                Objective::Sc => total + cost,
                Objective::Mc => total.max_of(cost),
            };
        }
        if self.best.as_ref().is_none_or(|(c, _, _)| total.total_cmp(c).is_lt()) {
            self.best = Some((total, self.assign.clone(), y));
        }
    }

    fn go(&mut self, i: usize) {
        if i == self.xs.len() {
            self.evaluate();
            return;
        }
        for j in 0..self.caps.len() {
            if self.loads[j] >= self.caps[j] {
                continue;
            }
            // Equal-capacity facilities are interchangeable: open them in index order.
            if self.loads[j] == 0
                && (0..j).any(|l| self.loads[l] == 0 && self.caps[l] == self.caps[j])
            {
                continue;
            }
            self.loads[j] += 1;
            self.assign.push(j);
            self.go(i + 1);
            self.assign.pop();
            self.loads[j] -= 1;
        }
    }
}

/// [`brute_force_optimal`] with an explicit size cap.
pub fn brute_force_optimal_with_cap<T: Scalar>(
    profile: &AgentProfile<T>,
    capacities: &[usize],
    objective: Objective,
    cap: usize,
) -> Result<OptResult<T>> {
    let n = profile.n();
    if n > cap {
        return Err(Error::InstanceTooLarge { n, cap });
    }
    if capacities.iter().sum::<usize>() < n {
        return Err(Error::InfeasibleCapacities(format!("total capacity below n = {n}")));
    }
    let mut search = Search {
        xs: profile.positions(),
        caps: capacities,
        objective,
        assign: Vec::with_capacity(n),
        loads: vec![0; capacities.len()],
        best: None,
    };
    search.go(0);
    let (cost, mu, y) = search
        .best
        .ok_or_else(|| Error::InfeasibleCapacities("no feasible assignment".into()))?;
    let placement = Placement::identity(y, mu);
    debug_assert!({
        let report = social_cost(profile, &placement).expect("oracle placement is well formed");
        objective.pick(&report).approx_eq(&cost)
    });
    Ok(OptResult { placement, cost, objective })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_placement;
    use crate::number::Rational;

    fn q(v: &str) -> Rational {
        v.parse().unwrap()
    }

    fn prof(vals: &[&str]) -> AgentProfile {
        AgentProfile::from_unsorted(&vals.iter().map(|v| q(v)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn sc_equicap_examples() {
        let r = optimal_sc_equicap(&prof(&["0", "0", "0", "1", "1", "1"]), 3, 2).unwrap();
        assert_eq!(r.placement.y, vec![q("0"), q("0"), q("1")]);
        assert_eq!(r.cost, q("1"));
        let r = optimal_sc_equicap(&prof(&["7"; 6]), 2, 3).unwrap();
        assert_eq!(r.cost, Rational::ZERO);
        let r = optimal_sc_equicap(&prof(&["0", "1", "2", "10"]), 2, 2).unwrap();
        assert_eq!(r.placement.y, vec![q("0"), q("2")]);
        assert_eq!(r.cost, q("9"));
        assert!(matches!(optimal_sc_equicap(&prof(&["0", "1", "2"]), 2, 2), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn mc_equicap_examples() {
        let r = optimal_mc_equicap(&prof(&["0", "1", "2", "10"]), 2, 2).unwrap();
        assert_eq!(r.placement.y, vec![q("0.5"), q("6")]);
        assert_eq!(r.cost, q("4"));
        let r = optimal_mc_equicap(&prof(&["0", "2", "2", "2"]), 2, 2).unwrap();
        assert_eq!(r.placement.y, vec![q("1"), q("2")]);
        assert_eq!(r.cost, q("1"));
        assert_eq!(optimal_mc_equicap(&prof(&["3"; 4]), 2, 2).unwrap().cost, Rational::ZERO);
    }

    #[test]
    fn sc_two_examples() {
        let r = optimal_sc_two(&prof(&["0", "0", "1", "5", "5"]), 3, 2).unwrap();
        assert_eq!(r.cost, q("1"));
        assert_eq!(r.placement.mu, vec![0, 0, 0, 1, 1]);
        let r = optimal_sc_two(&prof(&["0", "0", "0", "1", "1"]), 3, 3).unwrap();
        assert_eq!(r.cost, Rational::ZERO);
        assert_eq!(optimal_sc_two(&prof(&["2"; 4]), 2, 3).unwrap().cost, Rational::ZERO);
    }

    #[test]
    fn mc_two_examples() {
        let r = optimal_mc_two(&prof(&["0", "0", "0", "0", "0", "1"]), 4, 4).unwrap();
        assert_eq!(r.cost, q("0.5"));
        let r = optimal_mc_two(&prof(&["0", "0", "11/30", "2/3", "1"]), 3, 2).unwrap();
        assert_eq!(r.cost, q("11/60"));
        assert_eq!(optimal_mc_two(&prof(&["1"; 3]), 2, 2).unwrap().cost, Rational::ZERO);
    }

    #[test]
    fn two_rejects_bad_capacities() {
        let p = prof(&["0", "1", "2", "3", "4"]);
        assert!(matches!(optimal_sc_two(&p, 2, 2), Err(Error::InfeasibleCapacities(_))));
        assert!(matches!(optimal_mc_two(&p, 5, 3), Err(Error::InfeasibleCapacities(_))));
    }

    #[test]
    fn solver_placements_are_feasible() {
        let p = prof(&["0", "0", "1", "5", "5"]);
        let class = ProblemClass::two(3, 2).unwrap();
        for obj in [Objective::Sc, Objective::Mc] {
            let r = optimal(&p, &class, obj).unwrap();
            assert!(validate_placement(&class, &p, &r.placement).is_empty());
            assert_eq!(obj.pick(&social_cost(&p, &r.placement).unwrap()), r.cost);
        }
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force_optimal(&prof(&["0", "1", "2", "10"]), &[2, 2], Objective::Sc).unwrap();
        assert_eq!(r.cost, q("9"));
        let r = brute_force_optimal(&prof(&["0", "0", "1", "5", "5"]), &[3, 2], Objective::Sc).unwrap();
        assert_eq!(r.cost, q("1"));
        let r = brute_force_optimal(&prof(&["4"]), &[1], Objective::Sc).unwrap();
        assert_eq!(r.cost, Rational::ZERO);
        let nine = prof(&["0"; 9]);
        assert!(matches!(
            brute_force_optimal(&nine, &[5, 5], Objective::Sc),
            Err(Error::InstanceTooLarge { n: 9, cap: 8 })
        ));
    }

    #[test]
    fn brute_force_finds_non_contiguous_if_better() {
        // Capacities force the oracle to consider every assignment, not just splits.
        let p = prof(&["0", "1", "2"]);
        let r = brute_force_optimal(&p, &[1, 1, 1], Objective::Mc).unwrap();
        assert_eq!(r.cost, Rational::ZERO);
    }

    #[test]
    fn float_mode_matches() {
        let p = prof(&["0", "0", "1", "5", "5"]).to_f64();
        let r = optimal_sc_two(&p, 3, 2).unwrap();
        assert!((r.cost - 1.0).abs() < 1e-12);
    }
}
