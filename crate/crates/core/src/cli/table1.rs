//! Summary table of lower and upper bounds.

use serde::Serialize;

use crate::error::Result;
use crate::mechanisms::MechanismId;
use crate::model::{Objective, ProblemClass};
use crate::number::Rational;
use crate::ratios::{bound, lower_bound};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub class: ProblemClass,
    pub n: usize,
    pub sc_lb: Rational,
    pub sc_lb_note: Option<String>,
    /// Lower bound for anonymous mechanisms, as the formula gives it.
    pub sc_lb_anonymous: Rational,
    /// Upper bound formula value, before any clamping.
    pub sc_ub: Rational,
    pub sc_ub_mechanism: String,
    pub mc_lb: Rational,
    pub mc_ub: Rational,
    pub mc_ub_mechanism: String,
    /// Bound of every implemented mechanism on this class, `(name, sc, mc)`.
    pub mechanisms: Vec<(String, Rational, Rational)>,
}

fn raw(spec: &crate::ratios::BoundSpec) -> Rational {
    spec.raw_value.unwrap_or(spec.value)
}

/// Evaluates the table row for one class.
pub fn table1_row(class: &ProblemClass, n: usize) -> Result<Table1Row> {
    let sc_lb = lower_bound(class, n, Objective::Sc, false)?;
    let sc_lb_anonymous = raw(&lower_bound(class, n, Objective::Sc, true)?);
    let mc_lb = lower_bound(class, n, Objective::Mc, false)?.value;
    let (sc_ub_id, candidates): (MechanismId, Vec<MechanismId>) = match *class {
        ProblemClass::EquiCapNoSpare { m, .. } => {
            let best = if m % 2 == 1 { MechanismId::Pmm } else { MechanismId::Pipm };
            (best, vec![MechanismId::Pmm, MechanismId::Pipm])
        }
        ProblemClass::TwoAbundant { c1, c2 } => {
            let mut all = vec![MechanismId::Eig];
            if c1.abs_diff(c2) == 1 && n == 2 * c1.min(c2) + 1 {
                all.push(MechanismId::Ic);
            }
            if c1 == c2 {
                all.push(MechanismId::Ig);
                if n == 2 * c1 {
                    all.push(MechanismId::Im);
                }
            }
            (MechanismId::Eig, all)
        }
    };
    let sc_ub = raw(&bound(&sc_ub_id, class, n, Objective::Sc)?);
    let mc_ub = bound(&sc_ub_id, class, n, Objective::Mc)?.value;
    let mechanisms = candidates
        .iter()
        .map(|id| {
            Ok((id.to_string(), bound(id, class, n, Objective::Sc)?.value, bound(id, class, n, Objective::Mc)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1Row {
        class: *class,
        n,
        sc_lb: sc_lb.value,
        sc_lb_note: sc_lb.note,
        sc_lb_anonymous,
        sc_ub,
        sc_ub_mechanism: sc_ub_id.to_string(),
        mc_lb,
        mc_ub,
        mc_ub_mechanism: sc_ub_id.to_string(),
        mechanisms,
    })
}

pub fn render_table(rows: &[Table1Row]) -> String {
    let mut out = String::from("class               n    SC LB  SC LB*  SC UB         MC LB  MC UB\n");
    for r in rows {
        let class = r.class.to_string();
        let ub = format!("{} ({})", r.sc_ub, r.sc_ub_mechanism);
        out.push_str(&format!(
            "{class:<19} {:<4} {:<6} {:<7} {ub:<13} {:<6} {}\n",
            r.n,
            r.sc_lb.to_string(),
            r.sc_lb_anonymous.to_string(),
            r.mc_lb.to_string(),
            r.mc_ub
        ));
    }
    for r in rows {
        if let Some(note) = &r.sc_lb_note {
            out.push_str(&format!("{}: SC LB {note}\n", r.class));
        }
    }
    out
}
