//! Reference computations for the integration tests. Nothing here calls the
//! library solvers.

#![allow(dead_code)]

use capflp::mechanisms::{Mechanism, MechanismSpec};
use capflp::model::{AgentProfile, Objective, Placement, ProblemClass};
use capflp::ratios::RatioValue;
use capflp::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(v: &str) -> Rational {
    v.parse().unwrap()
}

pub fn qs(vals: &[&str]) -> Vec<Rational> {
    vals.iter().map(|v| q(v)).collect()
}

pub fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

/// Repeats each value the given number of times.
pub fn groups(parts: &[(usize, Rational)]) -> Vec<Rational> {
    parts.iter().flat_map(|&(count, v)| std::iter::repeat_n(v, count)).collect()
}

/// Best cost of serving a group from one point. Social cost tries every
/// member as the location.
pub fn point_cost(group: &[Rational], objective: Objective) -> Rational {
    if group.is_empty() {
        return Rational::ZERO;
    }
    match objective {
        Objective::Sc => group
            .iter()
            .map(|y| group.iter().fold(Rational::ZERO, |acc, x| acc + (*x - *y).abs()))
            .min()
            .unwrap(),
        Objective::Mc => {
            let lo = group.iter().min().unwrap();
            let hi = group.iter().max().unwrap();
            (*hi - *lo) / int(2)
        }
    }
}

fn combine(costs: impl Iterator<Item = Rational>, objective: Objective) -> Rational {
    match objective {
        Objective::Sc => costs.fold(Rational::ZERO, |a, b| a + b),
        Objective::Mc => costs.fold(Rational::ZERO, |a, b| a.max(b)),
    }
}

/// Optimum over every assignment of agents to facilities within capacity.
pub fn assignment_opt(xs: &[Rational], caps: &[usize], objective: Objective) -> Rational {
    fn go(
        i: usize,
        xs: &[Rational],
        caps: &[usize],
        groups: &mut Vec<Vec<Rational>>,
        objective: Objective,
        best: &mut Option<Rational>,
    ) {
        if i == xs.len() {
            let cost = combine(groups.iter().map(|g| point_cost(g, objective)), objective);
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        for j in 0..caps.len() {
            if groups[j].len() < caps[j] {
                groups[j].push(xs[i]);
                go(i + 1, xs, caps, groups, objective, best);
                groups[j].pop();
            }
        }
    }
    let mut best = None;
    go(0, xs, caps, &mut vec![Vec::new(); caps.len()], objective, &mut best);
    best.expect("some assignment fits")
}

/// Optimum over contiguous groups of the sorted profile, one per facility in
/// capacity order and in either orientation.
pub fn contiguous_opt(xs: &[Rational], class: &ProblemClass, objective: Objective) -> Rational {
    let mut sorted = xs.to_vec();
    sorted.sort();
    match *class {
        ProblemClass::EquiCapNoSpare { k, .. } => combine(sorted.chunks(k).map(|c| point_cost(c, objective)), objective),
        ProblemClass::TwoAbundant { c1, c2 } => (0..=sorted.len())
            .filter(|&i| (i <= c1 && sorted.len() - i <= c2) || (i <= c2 && sorted.len() - i <= c1))
            .map(|i| {
                let (l, r) = sorted.split_at(i);
                combine([point_cost(l, objective), point_cost(r, objective)].into_iter(), objective)
            })
            .min()
            .unwrap(),
    }
}

/// Cost of a mechanism placement, checking capacities along the way.
pub fn placement_cost(xs: &[Rational], class: &ProblemClass, placement: &Placement, objective: Objective) -> Rational {
    let caps = class.capacities();
    assert_eq!(placement.mu.len(), xs.len());
    for (j, &c) in placement.pi.iter().enumerate() {
        let load = placement.mu.iter().filter(|&&f| f == j).count();
        assert!(load <= caps[c], "facility {j} serves {load} > {}", caps[c]);
    }
    combine(xs.iter().zip(&placement.mu).map(|(x, &j)| (*x - placement.y[j]).abs()), objective)
}

pub fn ratio_of(mech: Rational, opt: Rational) -> RatioValue {
    RatioValue::of(mech, opt)
}

/// Mechanism ratio against the contiguous oracle.
pub fn oracle_ratio(spec: &MechanismSpec, xs: &[Rational], objective: Objective) -> (Rational, Rational, RatioValue) {
    let profile = AgentProfile::from_unsorted(xs).unwrap();
    let placement = spec.run(&profile).unwrap();
    let mech = placement_cost(profile.positions(), &spec.class, &placement, objective);
    let opt = contiguous_opt(xs, &spec.class, objective);
    (mech, opt, ratio_of(mech, opt))
}

/// Reproducible profiles on a fine grid, with some coarse ones to force ties.
pub struct Sampler(ChaCha8Rng);

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.0.gen_range(0..bound)
    }

    pub fn profile(&mut self, n: usize) -> Vec<Rational> {
        let res = if self.0.gen_bool(0.25) { 4 } else { 1000 };
        (0..n).map(|_| Rational::new(self.0.gen_range(0..=res), res)).collect()
    }
}

pub fn agent_costs(spec: &MechanismSpec, xs: &[Rational]) -> Vec<Rational> {
    spec.agent_costs(xs, xs).unwrap()
}

/// One acceptance line.
pub fn report(id: usize, title: &str, failures: &[String]) -> bool {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} {status}  {title}");
    for f in failures.iter().take(12) {
        println!("    {f}");
    }
    if failures.len() > 12 {
        println!("    ... {} more", failures.len() - 12);
    }
    failures.is_empty()
}
