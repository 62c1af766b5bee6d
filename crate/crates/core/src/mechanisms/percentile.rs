//! Uncapacitated percentile mechanism.

use crate::error::{Error, Result};
use crate::model::{AgentProfile, Placement};
use crate::number::{Rational, Scalar};

pub fn check_percentiles(p: &[Rational]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::MechanismPreconditionViolated("percentile vector is empty".into()));
    }
    if p.iter().any(|v| *v < Rational::ZERO || *v > Rational::ONE) {
        return Err(Error::MechanismPreconditionViolated("percentiles must lie in [0, 1]".into()));
    }
    if p.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::MechanismPreconditionViolated("percentiles must be strictly increasing".into()));
    }
    Ok(())
}

/// Facility `t` goes to `x_{floor((n-1) p_t) + 1}`; every agent uses its
/// nearest facility, lowest index on ties. Capacities are ignored.
pub fn percentile<T: Scalar>(profile: &AgentProfile<T>, p: &[Rational]) -> Result<Placement<T>> {
    check_percentiles(p)?;
    let n = profile.n();
    let scale = Rational::from(n - 1);
    let y: Vec<T> = p
        .iter()
        .map(|pt| {
            let idx = (scale * *pt).floor_int() as usize + 1;
            profile.x(idx).clone()
        })
        .collect();
    let mu = profile
        .positions()
        .iter()
        .map(|x| {
            let mut best = 0;
            for (j, yj) in y.iter().enumerate().skip(1) {
                let d = (x.clone() - yj.clone()).abs_val();
                let b = (x.clone() - y[best].clone()).abs_val();
                if d.approx_lt(&b) {
                    best = j;
                }
            }
            best
        })
        .collect();
    Ok(Placement::identity(y, mu))
}
