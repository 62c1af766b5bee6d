//! Truthfulness, group strategyproofness and anonymity audits.
//!
//! Audits search a finite candidate set of misreports. A failure carries a
//! concrete witness that can be replayed with [`verify_witness`]. A pass only
//! means no violation was found over the candidate set.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::number::Rational;

pub const PASS_NOTE: &str = "no violation found over candidate set";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub epsilon_offsets: Vec<Rational>,
    /// Defaults to ten times the profile spread (at least ten).
    pub outer_margin: Option<Rational>,
    pub max_coalition: usize,
    pub exhaustive_candidates: bool,
    /// Maximum number of mechanism evaluations per audit.
    pub budget: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            epsilon_offsets: vec![Rational::new(1, 1000), Rational::ONE],
            outer_margin: None,
            max_coalition: 3,
            exhaustive_candidates: true,
            budget: 50_000_000,
        }
    }
}

impl AuditConfig {
    pub fn with_coalition(max_coalition: usize) -> Self {
        AuditConfig { max_coalition, ..AuditConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon_offsets.iter().any(|d| *d <= Rational::ZERO) {
            return Err(Error::Parse("epsilon offsets must be positive".into()));
        }
        if matches!(self.outer_margin, Some(m) if m <= Rational::ZERO) {
            return Err(Error::Parse("outer margin must be positive".into()));
        }
        if self.max_coalition == 0 {
            return Err(Error::Parse("max_coalition must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditKind {
    Truthful,
    Gsp,
    Anonymous,
}

/// A profitable deviation. Indices are 0-based positions in `profile`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manipulation {
    pub profile: Vec<Rational>,
    pub agents: Vec<usize>,
    pub true_positions: Vec<Rational>,
    pub misreports: Vec<Rational>,
    pub cost_before: Vec<Rational>,
    pub cost_after: Vec<Rational>,
}

impl Manipulation {
    pub fn deltas(&self) -> Vec<Rational> {
        self.cost_before.iter().zip(&self.cost_after).map(|(b, a)| *b - *a).collect()
    }
}

/// A reordering of the input that changed some agent's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationWitness {
    pub profile: Vec<Rational>,
    /// `permutation[i]` is the original agent placed at input slot `i`.
    pub permutation: Vec<usize>,
    pub outcome_before: Vec<(Rational, Rational)>,
    pub outcome_after: Vec<(Rational, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    Manipulation(Manipulation),
    Permutation(PermutationWitness),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub passed: bool,
    pub kind: AuditKind,
    pub mechanism: String,
    pub evaluations: u64,
    pub note: String,
    pub witness: Option<Witness>,
}

impl AuditVerdict {
    fn pass(kind: AuditKind, mechanism: String, evaluations: u64) -> Self {
        let note = match kind {
            AuditKind::Anonymous => "no violation found over sampled permutations",
            _ => PASS_NOTE,
        };
        AuditVerdict { passed: true, kind, mechanism, evaluations, note: note.into(), witness: None }
    }

    fn fail(kind: AuditKind, mechanism: String, evaluations: u64, witness: Witness) -> Self {
        let note = match kind {
            AuditKind::Truthful => "profitable unilateral misreport",
            AuditKind::Gsp => "profitable group misreport",
            AuditKind::Anonymous => "outcome depends on input order",
        };
        AuditVerdict { passed: false, kind, mechanism, evaluations, note: note.into(), witness: Some(witness) }
    }

    pub fn manipulation(&self) -> Option<&Manipulation> {
        match &self.witness {
            Some(Witness::Manipulation(m)) => Some(m),
            _ => None,
        }
    }
}

/// Candidate misreports: every report, midpoints of neighbours, every report
/// shifted by each offset, and two far points outside the profile.
///
/// Deduplicated and ordered by tier in that order, ascending within a tier,
/// so searches try exact collisions first.
pub fn candidate_misreports(profile: &[Rational], cfg: &AuditConfig) -> Vec<Rational> {
    let mut sorted = profile.to_vec();
    sorted.sort();
    let (Some(&first), Some(&last)) = (sorted.first(), sorted.last()) else {
        return Vec::new();
    };
    let margin = cfg.outer_margin.unwrap_or_else(|| Rational::from(10) * (last - first).max(Rational::ONE));
    let midpoints: BTreeSet<Rational> = sorted.windows(2).map(|w| (w[0] + w[1]) * Rational::new(1, 2)).collect();
    let shifted: BTreeSet<Rational> = sorted
        .iter()
        .flat_map(|&x| cfg.epsilon_offsets.iter().flat_map(move |&d| [x - d, x + d]))
        .collect();
    let mut seen = BTreeSet::new();
    sorted
        .iter()
        .copied()
        .chain(midpoints)
        .chain(shifted)
        .chain([first - margin, last + margin])
        .filter(|c| seen.insert(*c))
        .collect()
}

fn check_budget(evaluations: u64, cfg: &AuditConfig) -> Result<()> {
    if evaluations > cfg.budget {
        return Err(Error::SearchBudgetExceeded { evaluations });
    }
    Ok(())
}

/// Unilateral deviations: every agent tries every candidate misreport.
pub fn check_truthful(mech: &dyn Mechanism, profile: &[Rational], cfg: &AuditConfig) -> Result<AuditVerdict> {
    cfg.validate()?;
    let before = mech.agent_costs(profile, profile)?;
    let candidates = candidate_misreports(profile, cfg);
    let mut evaluations = 1u64;
    let mut reports = profile.to_vec();
    for i in 0..profile.len() {
        for &c in &candidates {
            if c == profile[i] {
                continue;
            }
            evaluations += 1;
            check_budget(evaluations, cfg)?;
            reports[i] = c;
            let after = mech.agent_costs(profile, &reports)?[i];
            reports[i] = profile[i];
            if after < before[i] {
                let witness = Manipulation {
                    profile: profile.to_vec(),
                    agents: vec![i],
                    true_positions: vec![profile[i]],
                    misreports: vec![c],
                    cost_before: vec![before[i]],
                    cost_after: vec![after],
                };
                return Ok(AuditVerdict::fail(AuditKind::Truthful, mech.name(), evaluations, Witness::Manipulation(witness)));
            }
        }
    }
    Ok(AuditVerdict::pass(AuditKind::Truthful, mech.name(), evaluations))
}

fn thread_count() -> usize {
    std::env::var("CAPFLP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// First group deviation by the set `deviators`, in lexicographic order of
/// misreport tuples.
fn search_deviators(
    mech: &dyn Mechanism,
    profile: &[Rational],
    before: &[Rational],
    deviators: &[usize],
    candidates: &[Rational],
    cfg: &AuditConfig,
    counter: &AtomicU64,
) -> Result<Option<Manipulation>> {
    let options: Vec<Vec<Rational>> =
        deviators.iter().map(|&i| candidates.iter().copied().filter(|c| *c != profile[i]).collect()).collect();
    let mut reports = profile.to_vec();
    for tuple in options.iter().map(|o| o.iter()).multi_cartesian_product() {
        let evaluations = counter.fetch_add(1, AtomicOrdering::Relaxed) + 1;
        check_budget(evaluations, cfg)?;
        for (&i, &c) in deviators.iter().zip(&tuple) {
            reports[i] = *c;
        }
        let after = mech.agent_costs(profile, &reports)?;
        for &i in deviators {
            reports[i] = profile[i];
        }
        if deviators.iter().any(|&i| after[i] > before[i]) {
            continue;
        }
        let coalition = if deviators.iter().any(|&i| after[i] < before[i]) {
            Some(deviators.to_vec())
        } else if deviators.len() < cfg.max_coalition {
            (0..profile.len()).find(|j| !deviators.contains(j) && after[*j] < before[*j]).map(|j| {
                let mut c = deviators.to_vec();
                c.push(j);
                c.sort_unstable();
                c
            })
        } else {
            None
        };
        if let Some(agents) = coalition {
            let misreports = agents
                .iter()
                .map(|&a| match deviators.iter().position(|&d| d == a) {
                    Some(p) => *tuple[p],
                    None => profile[a],
                })
                .collect();
            return Ok(Some(Manipulation {
                profile: profile.to_vec(),
                true_positions: agents.iter().map(|&a| profile[a]).collect(),
                misreports,
                cost_before: agents.iter().map(|&a| before[a]).collect(),
                cost_after: agents.iter().map(|&a| after[a]).collect(),
                agents,
            }));
        }
    }
    Ok(None)
}

/// Group deviations: every set of at most `max_coalition` misreporting agents
/// tries every tuple of candidate misreports. A deviation counts when every
/// misreporting agent is weakly better off and some agent in the coalition is
/// strictly better off. The coalition may include one truthful beneficiary
/// when the size limit allows.
///
/// With `exhaustive_candidates` off, agents with zero truthful cost are left
/// out of the misreporting set.
pub fn check_gsp(mech: &dyn Mechanism, profile: &[Rational], cfg: &AuditConfig) -> Result<AuditVerdict> {
    cfg.validate()?;
    let candidates = candidate_misreports(profile, cfg);
    if let Some(scale) = common_scale(profile, &candidates).filter(|_| mech.scale_equivariant()) {
        // Integer inputs keep exact arithmetic on its fast path.
        let up = |v: &[Rational]| v.iter().map(|x| *x * scale).collect::<Vec<_>>();
        let mut verdict = search_gsp(mech, &up(profile), &up(&candidates), cfg)?;
        if let Some(Witness::Manipulation(w)) = &mut verdict.witness {
            let down = |v: &mut Vec<Rational>| v.iter_mut().for_each(|x| *x = *x / scale);
            for field in [&mut w.profile, &mut w.true_positions, &mut w.misreports, &mut w.cost_before, &mut w.cost_after] {
                down(field);
            }
        }
        match &verdict.witness {
            Some(w) if !verify_witness(mech, w)? => {}
            _ => return Ok(verdict),
        }
    }
    search_gsp(mech, profile, &candidates, cfg)
}

/// Least common denominator of all values, if it is small enough to scale by.
fn common_scale(profile: &[Rational], candidates: &[Rational]) -> Option<Rational> {
    let mut lcm: i128 = 1;
    for v in profile.iter().chain(candidates) {
        lcm = num_integer::lcm(lcm, v.denom());
        if lcm > 1_000_000_000_000 {
            return None;
        }
    }
    (lcm > 1).then(|| Rational::from_integer(lcm))
}

fn search_gsp(mech: &dyn Mechanism, profile: &[Rational], candidates: &[Rational], cfg: &AuditConfig) -> Result<AuditVerdict> {
    let n = profile.len();
    let before = mech.agent_costs(profile, profile)?;
    let eligible: Vec<usize> =
        (0..n).filter(|&i| cfg.exhaustive_candidates || before[i] > Rational::ZERO).collect();
    let sets: Vec<Vec<usize>> = (1..=cfg.max_coalition.min(n))
        .flat_map(|size| eligible.iter().copied().combinations(size))
        .collect();
    let counter = AtomicU64::new(1);
    let threads = thread_count().min(sets.len()).max(1);
    let mut found: Option<(usize, Manipulation)> = None;
    if threads == 1 {
        for (idx, set) in sets.iter().enumerate() {
            if let Some(w) = search_deviators(mech, profile, &before, set, candidates, cfg, &counter)? {
                found = Some((idx, w));
                break;
            }
        }
    } else {
        let best = std::sync::Mutex::new(None::<(usize, Manipulation)>);
        let failure = std::sync::Mutex::new(None::<Error>);
        std::thread::scope(|scope| {
            for t in 0..threads {
                let (sets, best, failure, counter, before, candidates) =
                    (&sets, &best, &failure, &counter, &before, candidates);
                scope.spawn(move || {
                    for idx in (t..sets.len()).step_by(threads) {
                        if matches!(*best.lock().unwrap(), Some((b, _)) if b < idx) || failure.lock().unwrap().is_some() {
                            return;
                        }
                        match search_deviators(mech, profile, before, &sets[idx], candidates, cfg, counter) {
                            Ok(Some(w)) => {
                                let mut guard = best.lock().unwrap();
                                if guard.as_ref().is_none_or(|(b, _)| idx < *b) {
                                    *guard = Some((idx, w));
                                }
                                return;
                            }
                            Ok(None) => {}
                            Err(e) => {
                                *failure.lock().unwrap() = Some(e);
                                return;
                            }
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        found = best.into_inner().unwrap();
    }
    let evaluations = counter.load(AtomicOrdering::Relaxed);
    Ok(match found {
        Some((_, w)) => AuditVerdict::fail(AuditKind::Gsp, mech.name(), evaluations, Witness::Manipulation(w)),
        None => AuditVerdict::pass(AuditKind::Gsp, mech.name(), evaluations),
    })
}

fn outcome_multiset(positions: &[Rational], assigned: &[Rational]) -> Vec<(Rational, Rational)> {
    let mut out: Vec<_> = positions.iter().copied().zip(assigned.iter().copied()).collect();
    out.sort();
    out
}

/// Runs the mechanism on `trials` seeded shuffles of the input and compares
/// the multiset of (position, assigned facility) pairs.
pub fn check_anonymous(mech: &dyn Mechanism, profile: &[Rational], trials: usize, seed: u64) -> Result<AuditVerdict> {
    let baseline = outcome_multiset(profile, &mech.assigned_facilities(profile)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut permutation: Vec<usize> = (0..profile.len()).collect();
    for trial in 0..trials {
        permutation.shuffle(&mut rng);
        let shuffled: Vec<Rational> = permutation.iter().map(|&i| profile[i]).collect();
        let outcome = outcome_multiset(&shuffled, &mech.assigned_facilities(&shuffled)?);
        if outcome != baseline {
            let witness = PermutationWitness {
                profile: profile.to_vec(),
                permutation: permutation.clone(),
                outcome_before: baseline,
                outcome_after: outcome,
            };
            return Ok(AuditVerdict::fail(AuditKind::Anonymous, mech.name(), trial as u64 + 2, Witness::Permutation(witness)));
        }
    }
    Ok(AuditVerdict::pass(AuditKind::Anonymous, mech.name(), trials as u64 + 1))
}

/// Replays a witness. Returns true when the recorded costs are reproduced
/// exactly and the deviation is profitable.
pub fn verify_witness(mech: &dyn Mechanism, witness: &Witness) -> Result<bool> {
    match witness {
        Witness::Manipulation(w) => {
            let before = mech.agent_costs(&w.profile, &w.profile)?;
            let mut reports = w.profile.clone();
            for (&a, &r) in w.agents.iter().zip(&w.misreports) {
                reports[a] = r;
            }
            let after = mech.agent_costs(&w.profile, &reports)?;
            let recorded = w.agents.iter().enumerate().all(|(p, &a)| {
                w.true_positions[p] == w.profile[a] && w.cost_before[p] == before[a] && w.cost_after[p] == after[a]
            });
            let weak = w.agents.iter().all(|&a| after[a] <= before[a]);
            let strict = w.agents.iter().any(|&a| after[a] < before[a]);
            Ok(recorded && weak && strict)
        }
        Witness::Permutation(w) => {
            let baseline = outcome_multiset(&w.profile, &mech.assigned_facilities(&w.profile)?);
            let shuffled: Vec<Rational> = w.permutation.iter().map(|&i| w.profile[i]).collect();
            let outcome = outcome_multiset(&shuffled, &mech.assigned_facilities(&shuffled)?);
            Ok(baseline == w.outcome_before && outcome == w.outcome_after && outcome != baseline)
        }
    }
}

/// Control mechanisms that are known to fail the audits.
pub mod doubles {
    use super::*;

    /// One facility at the mean of the reports.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct MeanMechanism;

    impl Mechanism for MeanMechanism {
        fn name(&self) -> String {
            "mean".into()
        }

        fn assigned_facilities(&self, reports: &[Rational]) -> Result<Vec<Rational>> {
            if reports.is_empty() {
                return Err(Error::EmptyInstance);
            }
            let sum = reports.iter().fold(Rational::ZERO, |acc, x| acc + *x);
            let mean = sum / Rational::from(reports.len());
            Ok(vec![mean; reports.len()])
        }
    }

    /// Two facilities at the reports of input slots 0 and 1; slot `i` uses
    /// facility `i mod 2`.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct IndexDictator;

    impl Mechanism for IndexDictator {
        fn name(&self) -> String {
            "index-dictator".into()
        }

        fn assigned_facilities(&self, reports: &[Rational]) -> Result<Vec<Rational>> {
            if reports.is_empty() {
                return Err(Error::EmptyInstance);
            }
            let second = *reports.get(1).unwrap_or(&reports[0]);
            Ok((0..reports.len()).map(|i| if i % 2 == 0 { reports[0] } else { second }).collect())
        }
    }
}
