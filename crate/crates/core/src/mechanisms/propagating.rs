//! Propagating Median and Propagating InnerPoint mechanisms for `m`
//! facilities of equal capacity `k` with `n = m * k` agents.
//!
//! Both seed one or two central facilities inside their blocks, then place
//! every further facility by reflecting the previous facility's distance
//! to the block boundary. Agents in block `I_j` use facility `j`.

use crate::error::{Error, Result};
use crate::model::{AgentProfile, Placement};
use crate::number::Scalar;

fn check(profile_n: usize, m: usize, k: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidClass(format!("need at least two facilities, got m = {m}")));
    }
    if k == 0 || profile_n != m * k {
        return Err(Error::NotDivisible { n: profile_n, k });
    }
    Ok(())
}

/// Fills `y` outward from the seeded facilities. `y` is 1-based through the
/// closures; facilities `lo..=hi` must already be set.
fn propagate<T: Scalar>(profile: &AgentProfile<T>, k: usize, y: &mut [Option<T>], lo: usize, hi: usize) {
    let m = y.len();
    let x = |i: usize| profile.x(i).clone();
    for l in hi..m {
        let yl = y[l - 1].clone().expect("seeded");
        let edge = x(k * l);
        let d = (yl - edge.clone()).abs_val();
        y[l] = Some(x(k * l + 1).max_of(edge + d));
    }
    for l in (2..=lo).rev() {
        let yl = y[l - 1].clone().expect("seeded");
        let edge = x(k * (l - 1) + 1);
        let d = (yl - edge.clone()).abs_val();
        y[l - 2] = Some(x(k * (l - 1)).min_of(edge - d));
    }
}

fn finish<T: Scalar>(y: Vec<Option<T>>, n: usize, k: usize) -> Placement<T> {
    let y = y.into_iter().map(|v| v.expect("every facility placed")).collect();
    Placement::identity(y, (0..n).map(|i| i / k).collect())
}

/// Propagating Median Mechanism.
///
/// With `r = floor((m + 1) / 2)`, facility `r` sits at the left median of
/// `I_r`, i.e. `x_{k(r-1) + floor((k+1)/2)}`.
pub fn pmm<T: Scalar>(profile: &AgentProfile<T>, m: usize, k: usize) -> Result<Placement<T>> {
    check(profile.n(), m, k)?;
    let r = m.div_ceil(2);
    let mut y: Vec<Option<T>> = vec![None; m];
    y[r - 1] = Some(profile.x(k * (r - 1) + k.div_ceil(2)).clone());
    propagate(profile, k, &mut y, r, r);
    Ok(finish(y, profile.n(), k))
}

/// Propagating InnerPoint Mechanism.
///
/// With `r = floor(m / 2)`, facilities `r` and `r + 1` sit at `x_{rk}` and
/// `x_{rk+1}`, the two innermost agents around the central block boundary.
pub fn pipm<T: Scalar>(profile: &AgentProfile<T>, m: usize, k: usize) -> Result<Placement<T>> {
    check(profile.n(), m, k)?;
    let r = m / 2;
    let mut y: Vec<Option<T>> = vec![None; m];
    y[r - 1] = Some(profile.x(r * k).clone());
    y[r] = Some(profile.x(r * k + 1).clone());
    propagate(profile, k, &mut y, r, r + 1);
    Ok(finish(y, profile.n(), k))
}
