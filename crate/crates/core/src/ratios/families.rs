//! Worst-case instance families for each bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::model::{AgentProfile, Objective, ProblemClass};
use crate::number::Rational;
use crate::solvers::optimal;

/// Which member of a family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "value", rename_all = "lowercase")]
pub enum FamilyParam {
    /// The unparameterized family.
    Exact,
    /// The second family of the EIG social cost bound.
    Second,
    /// A family that reaches the bound as `epsilon -> 0`.
    Epsilon(Rational),
}

fn profile(groups: &[(usize, Rational)]) -> Result<AgentProfile> {
    let positions = groups.iter().flat_map(|&(count, v)| std::iter::repeat_n(v, count)).collect();
    AgentProfile::from_sorted(positions)
}

fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

fn need_epsilon(param: FamilyParam) -> Result<Rational> {
    match param {
        FamilyParam::Epsilon(eps) if eps > Rational::ZERO => Ok(eps),
        FamilyParam::Epsilon(_) => Err(Error::MechanismPreconditionViolated("epsilon must be positive".into())),
        _ => Err(Error::MechanismPreconditionViolated("this family needs an epsilon parameter".into())),
    }
}

/// Blocks `0..lo` at 0, block `lo` ends in a 1, block `lo + 1` is 1s ending
/// in `2 + epsilon`, the rest at `2 + epsilon`.
fn stepped(n: usize, k: usize, lo: usize, eps: Rational) -> Result<AgentProfile> {
    let zeros = k * lo - 1;
    let ones = k;
    profile(&[(zeros, Rational::ZERO), (ones, Rational::ONE), (n - zeros - ones, int(2) + eps)])
}

/// Builds the instance on which `id` attains (or approaches) its bound.
pub fn tight_instance(
    id: &MechanismId,
    class: &ProblemClass,
    n: usize,
    objective: Objective,
    param: FamilyParam,
) -> Result<AgentProfile> {
    class.check_n(n)?;
    let unsupported =
        || Error::MechanismPreconditionViolated(format!("no {objective} family for {id} on class {class} with {param:?}"));
    match (id, *class, objective) {
        (MechanismId::Pmm, ProblemClass::EquiCapNoSpare { m, k }, Objective::Sc) if param == FamilyParam::Exact => {
            let r = m.div_ceil(2);
            profile(&[(k * r - 1, Rational::ZERO), (n - (k * r - 1), Rational::ONE)])
        }
        (MechanismId::Pmm, ProblemClass::EquiCapNoSpare { m, k }, Objective::Mc) => {
            let eps = need_epsilon(param)?;
            stepped(n, k, m.div_ceil(2), eps)
        }
        (MechanismId::Pipm, ProblemClass::EquiCapNoSpare { m, k }, Objective::Sc) if param == FamilyParam::Exact => {
            if m % 2 == 0 {
                let ones = n / 2 - 1;
                profile(&[(ones, int(1)), (1, int(2)), (1, int(3)), (n - ones - 2, int(4))])
            } else {
                let r = m / 2;
                profile(&[(r * k, int(0)), (1, int(1)), (n - r * k - 1, int(2))])
            }
        }
        (MechanismId::Pipm, ProblemClass::EquiCapNoSpare { m: 2, .. }, Objective::Mc) if param == FamilyParam::Exact => {
            profile(&[(1, int(0)), (n - 1, int(1))])
        }
        (MechanismId::Pipm, ProblemClass::EquiCapNoSpare { m, k }, Objective::Mc) if m >= 3 => {
            let eps = need_epsilon(param)?;
            stepped(n, k, m / 2 + 1, eps)
        }
        (MechanismId::Eig | MechanismId::Ig | MechanismId::Im, ProblemClass::TwoAbundant { c1, c2 }, Objective::Sc) => {
            let c_bar = c1.max(c2);
            match param {
                FamilyParam::Exact => profile(&[(n - c_bar - 1, int(0)), (1, int(1)), (c_bar, int(5))]),
                FamilyParam::Second => {
                    profile(&[(n - c_bar, int(0)), (2 * c_bar - n, int(1)), (n - c_bar, int(2))])
                }
                FamilyParam::Epsilon(_) => Err(unsupported()),
            }
        }
        (MechanismId::Eig | MechanismId::Ig | MechanismId::Im, ProblemClass::TwoAbundant { c1, c2 }, Objective::Mc)
            if param == FamilyParam::Exact =>
        {
            let c_bar = c1.max(c2);
            profile(&[(c_bar + 1, int(0)), (n - c_bar - 1, int(1))])
        }
        (MechanismId::Ic, ProblemClass::TwoAbundant { c1, c2 }, Objective::Mc) if n == 2 * c1.min(c2) + 1 && n >= 5 => {
            let eps = need_epsilon(param)?;
            let k = c1.min(c2);
            profile(&[(k, int(0)), (1, Rational::new(1, 3) + eps), (1, Rational::new(2, 3)), (k - 1, int(1))])
        }
        _ => Err(unsupported()),
    }
}

/// Whether the family only approaches its bound in a limit.
pub fn is_limit_family(param: FamilyParam) -> bool {
    matches!(param, FamilyParam::Epsilon(_))
}

/// One agent at `-t`, everyone else at 2. Equal capacities of at least 2.
pub fn lower_bound_mc_instance(class: &ProblemClass, n: usize, t: Rational) -> Result<AgentProfile> {
    class.check_n(n)?;
    if !matches!(class, ProblemClass::EquiCapNoSpare { k, .. } if *k >= 2) {
        return Err(Error::MechanismPreconditionViolated(format!("no -t family for class {class}")));
    }
    if t <= Rational::ZERO {
        return Err(Error::MechanismPreconditionViolated("t must be positive".into()));
    }
    profile(&[(1, -t), (n - 1, int(2))])
}

/// Ratio forced on any truthful mechanism by the `-t` instance: the agent
/// at `-t` is served no further left than 0, so its cost is at least `t`.
pub fn lower_bound_mc_certificate(class: &ProblemClass, n: usize, t: Rational) -> Result<Rational> {
    let instance = lower_bound_mc_instance(class, n, t)?;
    let opt = optimal(&instance, class, Objective::Mc)?.cost;
    Ok(t / opt)
}
