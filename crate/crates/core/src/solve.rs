//! Bracketed scalar root solving and a damped planar Newton iteration.

use crate::error::{Error, Result};
use crate::point::{Mat2, Point2};
use crate::scalar::ScalarMap;

/// Solve h(t) = v for an increasing h on the bracket [lo, hi].
///
/// Newton steps are taken when they stay inside the current bracket and the
/// local derivative is positive; otherwise the step falls back to bisection.
/// The bracket invariant h(lo) <= v <= h(hi) is maintained throughout, so the
/// result is correct even if h wobbles below the resolution of its samples.
/// A non-positive derivative at any visited point is reported as lost
/// monotonicity rather than silently bisected around.
pub(crate) fn invert_monotone(h: &ScalarMap, v: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::InvalidBracket(format!("[{lo}, {hi}]")));
    }
    let flo = h.eval(lo);
    let fhi = h.eval(hi);
    if !(flo <= v && v <= fhi) {
        return Err(Error::InvalidBracket(format!(
            "h([{lo}, {hi}]) = [{flo}, {fhi}] does not bracket {v}"
        )));
    }
    let res_tol = 1e-13 * v.abs().max(1.0);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let ft = h.eval(t);
        let r = ft - v;
        if r.abs() <= res_tol {
            return Ok(t);
        }
        if r > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= f64::EPSILON * t.abs().max(1.0) {
            return Ok(t);
        }
        let dt = h.deriv(t);
        if dt <= 0.0 {
            return Err(Error::MonotonicityLost(t));
        }
        let newton = t - r / dt;
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NoConvergence(format!("inverse solve stalled at t = {t}")))
}

/// One damped Newton solve for a planar residual. `eval` returns the residual
/// and its Jacobian at a point, or None when the point has left the usable
/// domain. Steps are halved until the residual norm decreases; convergence
/// means max-norm residual at or below `tol`.
pub(crate) fn damped_newton2<E>(start: Point2, eval: E, max_iter: usize, tol: f64) -> Option<(Point2, f64)>
where
    E: Fn(Point2) -> Option<((f64, f64), Mat2)>,
{
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let mut p = start;
    let (mut r, mut jac) = eval(p)?;
    for _ in 0..max_iter {
        if norm(r) <= tol {
            return Some((p, norm(r)));
        }
        let (dx, dy) = jac.solve((-r.0, -r.1))?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let q = Point2 { x: p.x + step * dx, y: p.y + step * dy };
            if let Some((rq, jq)) = eval(q) {
                if norm(rq) < norm(r) {
                    accepted = Some((q, rq, jq));
                    break;
                }
            }
            step *= 0.5;
        }
        let (q, rq, jq) = accepted?;
        p = q;
        r = rq;
        jac = jq;
    }
    if norm(r) <= tol {
        Some((p, norm(r)))
    } else {
        None
    }
}
