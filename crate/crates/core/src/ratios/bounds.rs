//! Closed-form approximation ratio bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanisms::MechanismId;
use crate::model::{Objective, ProblemClass};
use crate::number::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    /// Attained by the named mechanism.
    UpperTight,
    /// No truthful deterministic mechanism does better.
    LowerAllMechanisms,
    /// No truthful, deterministic and anonymous mechanism does better.
    LowerAnonymous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    /// Mechanism name, or `any` for lower bounds.
    pub subject: String,
    pub objective: Objective,
    pub value: Rational,
    pub kind: BoundKind,
    /// Formula value before clamping to 1, when clamping happened.
    pub raw_value: Option<Rational>,
    pub note: Option<String>,
}

impl BoundSpec {
    fn new(subject: impl Into<String>, objective: Objective, raw: Rational, kind: BoundKind) -> Self {
        let clamped = raw < Rational::ONE;
        BoundSpec {
            subject: subject.into(),
            objective,
            value: raw.max(Rational::ONE),
            kind,
            raw_value: clamped.then_some(raw),
            note: clamped.then(|| format!("formula gives {raw}, clamped to 1")),
        }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(match self.note.take() {
            Some(old) => format!("{old}; {note}"),
            None => note.to_string(),
        });
        self
    }
}

impl fmt::Display for BoundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}

fn int(v: i128) -> Rational {
    Rational::from_integer(v)
}

/// Agent count for a class, checking `n` where the class fixes it.
fn agents(class: &ProblemClass, n: usize) -> Result<usize> {
    class.check_n(n)?;
    Ok(n)
}

/// Worst-case ratio of a mechanism.
pub fn bound(id: &MechanismId, class: &ProblemClass, n: usize, objective: Objective) -> Result<BoundSpec> {
    let n = agents(class, n)?;
    let name = id.to_string();
    let sc = match (id, *class) {
        (MechanismId::Pmm, ProblemClass::EquiCapNoSpare { m, k }) => int((k * (m / 2) + 1) as i128),
        (MechanismId::Pipm, ProblemClass::EquiCapNoSpare { m, k }) => int((k * m.div_ceil(2)) as i128 - 1),
        (MechanismId::Eig | MechanismId::Ig | MechanismId::Im, ProblemClass::TwoAbundant { c1, c2 }) => {
            let c_bar = c1.max(c2) as i128;
            let rest = n as i128 - c_bar;
            int(rest - 1).max(Rational::new(c_bar, rest) - Rational::ONE)
        }
        (MechanismId::Ic, ProblemClass::TwoAbundant { c1, c2 }) if c1.abs_diff(c2) == 1 && n == 2 * c1.min(c2) + 1 => {
            let k = c1.min(c2) as i128;
            if n > 5 {
                int(k - 1)
            } else {
                int(1)
            }
        }
        _ => {
            return Err(Error::MechanismPreconditionViolated(format!(
                "no bound for {id} on class {class} with n = {n}"
            )))
        }
    };
    let raw = match objective {
        Objective::Sc => sc,
        Objective::Mc => int(2),
    };
    Ok(BoundSpec::new(name, objective, raw, BoundKind::UpperTight))
}

/// Lower bound over all truthful deterministic mechanisms, or over the
/// anonymous ones.
pub fn lower_bound(class: &ProblemClass, n: usize, objective: Objective, anonymous: bool) -> Result<BoundSpec> {
    let n = agents(class, n)?;
    let kind = if anonymous { BoundKind::LowerAnonymous } else { BoundKind::LowerAllMechanisms };
    if objective == Objective::Mc {
        return Ok(BoundSpec::new("any", objective, int(2), kind));
    }
    Ok(match (*class, anonymous) {
        (ProblemClass::EquiCapNoSpare { .. }, false) => {
            BoundSpec::new("any", objective, int(3), kind).with_note("applies when k > 3")
        }
        (ProblemClass::EquiCapNoSpare { m, k }, true) => {
            let (m, k) = (m as i128, k as i128);
            let raw = if m % 2 == 1 { int(k * (m - 1) / 2 + 1) } else { int(k * m / 2 - 1) };
            BoundSpec::new("any", objective, raw, kind)
        }
        (ProblemClass::TwoAbundant { .. }, false) => BoundSpec::new("any", objective, int(3), kind),
        (ProblemClass::TwoAbundant { c1, c2 }, true) => {
            BoundSpec::new("any", objective, int(n as i128 - c1.max(c2) as i128 - 1), kind)
        }
    })
}
