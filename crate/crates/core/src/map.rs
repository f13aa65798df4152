//! The planar map family and its basic pointwise operations.
//!
//! The quadratic family is
//!
//!   F(x, y) = (mu x (1 - x) + delta y, delta x)
//!
//! and the general family replaces the logistic part by any unimodal g and the
//! coupling by any increasing h with h(0) = 0 that stays C^2-close to
//! multiplication by a reference slope:
//!
//!   F(x, y) = (g(x) + h(y), h(x)).
//!
//! Both are invertible whenever the coupling is, and everything downstream
//! (orbits, manifolds, rasters, checks) goes through the handful of methods
//! here: apply, apply_inverse, jacobian, eigenvalues_at, fixed points.

use crate::error::{Error, Result};
use crate::point::{pt, Mat2, Point2};
use crate::scalar::{c2_distance_to_linear, ScalarMap};
use crate::solve::{damped_newton2, invert_monotone};

/// |h(0)| above this rejects a general family at construction.
const H_ORIGIN_TOL: f64 = 1e-12;
/// Interval on which a general family is validated when none is given.
const DEFAULT_VALIDATION_INTERVAL: (f64, f64) = (-20.0, 20.0);
const DEFAULT_VALIDATION_SAMPLES: usize = 2001;
/// Retained roots of F(p) = p closer than this are treated as one point.
const FIXED_POINT_DEDUP: f64 = 1e-8;

/// Parameters (delta, mu) of the quadratic family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenonParams {
    pub delta: f64,
    pub mu: f64,
    /// True when 0 < delta < 1 and 1 - delta^2 < mu < 3(1 - delta^2), the
    /// wedge in parameter space where the full basin-boundary picture is
    /// expected. Recorded for reports, never enforced.
    pub h11_member: bool,
}

pub fn make_henon(delta: f64, mu: f64) -> Result<HenonParams> {
    if !delta.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidParams(format!("non-finite parameters ({delta}, {mu})")));
    }
    if delta == 0.0 {
        return Err(Error::InvalidParams("delta = 0 collapses the map onto a line".into()));
    }
    if mu <= 0.0 {
        return Err(Error::InvalidParams(format!("mu = {mu} must be positive")));
    }
    let h11_member =
        delta > 0.0 && delta < 1.0 && 1.0 - delta * delta < mu && mu < 3.0 * (1.0 - delta * delta);
    Ok(HenonParams { delta, mu, h11_member })
}

/// Ordered real eigenvalues of a Jacobian: minus < plus for every member of
/// the family away from delta = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub minus: f64,
    pub plus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Saddle,
    /// Saddle whose contracting or expanding direction carries a negative
    /// eigenvalue, so orbits alternate sides along it.
    FlipSaddle,
    Repelling,
    NonHyperbolic,
}

impl Stability {
    pub fn classify(eigen: EigenPair) -> Stability {
        let (l1, l2) = (eigen.minus, eigen.plus);
        let (a1, a2) = (l1.abs(), l2.abs());
        if a1 == 1.0 || a2 == 1.0 {
            return Stability::NonHyperbolic;
        }
        match (a1 < 1.0, a2 < 1.0) {
            (true, true) => Stability::Attracting,
            (false, false) => Stability::Repelling,
            _ => {
                if (l1 > -1.0 && l1 < 0.0 && l2 > 1.0) || (l1 < -1.0 && a2 < 1.0) {
                    Stability::FlipSaddle
                } else {
                    Stability::Saddle
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPointInfo {
    pub location: Point2,
    pub eigenvalues: EigenPair,
    pub stability: Stability,
}

/// Result of a grid-seeded Newton scan for fixed points.
#[derive(Debug, Clone)]
pub struct FixedPointScan {
    pub points: Vec<FixedPointInfo>,
    pub starts_used: usize,
    pub nonconverged_starts: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
struct GeneralParts {
    g: ScalarMap,
    h: ScalarMap,
    delta_ref: f64,
    /// Sampled C^2 distance of h to t -> delta_ref t on `interval`.
    eps: f64,
    interval: (f64, f64),
    alpha: Option<Point2>,
}

#[derive(Debug)]
enum MapKind {
    Henon(HenonParams),
    General(GeneralParts),
}

#[derive(Debug)]
pub struct MapFamily {
    kind: MapKind,
}

impl MapFamily {
    pub fn henon(delta: f64, mu: f64) -> Result<Self> {
        Ok(Self { kind: MapKind::Henon(make_henon(delta, mu)?) })
    }

    pub fn from_params(params: HenonParams) -> Self {
        Self { kind: MapKind::Henon(params) }
    }

    /// General family validated on a default interval.
    pub fn general(g: ScalarMap, h: ScalarMap, delta_ref: f64) -> Result<Self> {
        Self::general_on(g, h, delta_ref, DEFAULT_VALIDATION_INTERVAL, DEFAULT_VALIDATION_SAMPLES)
    }

    /// General family validated on a caller-chosen interval: h(0) must vanish,
    /// h must be increasing on the interval, the supplied derivatives of both
    /// maps must agree with finite differences, and the C^2 distance of h to
    /// the reference slope must stay below that slope. The distance is sampled,
    /// so the interval should cover the region the map will be used on.
    pub fn general_on(
        g: ScalarMap,
        h: ScalarMap,
        delta_ref: f64,
        interval: (f64, f64),
        samples: usize,
    ) -> Result<Self> {
        if !delta_ref.is_finite() || delta_ref <= 0.0 {
            return Err(Error::InvalidParams(format!("delta_ref = {delta_ref} must be positive")));
        }
        if h.eval(0.0).abs() > H_ORIGIN_TOL {
            return Err(Error::InvalidParams(format!(
                "h(0) = {} but the coupling must fix 0",
                h.eval(0.0)
            )));
        }
        g.check_derivatives(interval, 101)?;
        h.check_derivatives(interval, 101)?;
        let n = samples.max(101);
        for i in 0..n {
            let x = interval.0 + (interval.1 - interval.0) * i as f64 / (n - 1) as f64;
            if h.deriv(x) <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "h'({x}) = {} but the coupling must be increasing",
                    h.deriv(x)
                )));
            }
        }
        let eps = c2_distance_to_linear(&h, delta_ref, interval, n)?.value;
        if eps >= delta_ref {
            return Err(Error::InvalidParams(format!(
                "h is C^2-distance {eps} from slope {delta_ref}; need strictly less than the slope"
            )));
        }
        let mut map = Self {
            kind: MapKind::General(GeneralParts { g, h, delta_ref, eps, interval, alpha: None }),
        };
        let alpha = map.locate_general_alpha();
        if let MapKind::General(parts) = &mut map.kind {
            parts.alpha = alpha;
        }
        Ok(map)
    }

    pub fn is_henon(&self) -> bool {
        matches!(self.kind, MapKind::Henon(_))
    }

    pub fn params(&self) -> Option<&HenonParams> {
        match &self.kind {
            MapKind::Henon(p) => Some(p),
            MapKind::General(_) => None,
        }
    }

    /// Coupling slope at the origin's scale: delta for the quadratic family,
    /// the reference slope for a general one. Budget defaults key off this.
    pub fn delta_ref(&self) -> f64 {
        match &self.kind {
            MapKind::Henon(p) => p.delta,
            MapKind::General(g) => g.delta_ref,
        }
    }

    /// Sampled C^2 distance of the coupling from linear; zero for the
    /// quadratic family.
    pub fn coupling_distance(&self) -> f64 {
        match &self.kind {
            MapKind::Henon(_) => 0.0,
            MapKind::General(g) => g.eps,
        }
    }

    /// Interval the coupling distance was sampled on; None for the closed
    /// form, where the distance is identically zero.
    pub fn coupling_interval(&self) -> Option<(f64, f64)> {
        match &self.kind {
            MapKind::Henon(_) => None,
            MapKind::General(g) => Some(g.interval),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            MapKind::Henon(p) => format!("henon(delta={}, mu={})", p.delta, p.mu),
            MapKind::General(g) => format!(
                "general(g={}, h={}, delta_ref={})",
                g.g.label(),
                g.h.label(),
                g.delta_ref
            ),
        }
    }

    pub fn apply(&self, p: Point2) -> Result<Point2> {
        if !p.is_finite() {
            return Err(Error::NonFinitePoint { x: p.x, y: p.y });
        }
        let q = match &self.kind {
            MapKind::Henon(hp) => {
                pt(hp.mu * p.x * (1.0 - p.x) + hp.delta * p.y, hp.delta * p.x)
            }
            MapKind::General(g) => pt(g.g.eval(p.x) + g.h.eval(p.y), g.h.eval(p.x)),
        };
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::NumericBlowup)
        }
    }

    /// One backward step. For the quadratic family this is closed form; for a
    /// general family both coordinates come from bracketed solves of h, which
    /// track monotonicity as they go.
    pub fn apply_inverse(&self, p: Point2) -> Result<Point2> {
        if !p.is_finite() {
            return Err(Error::NonFinitePoint { x: p.x, y: p.y });
        }
        let q = match &self.kind {
            MapKind::Henon(hp) => {
                let a = p.y / hp.delta;
                let b = (p.x - hp.mu * a * (1.0 - a)) / hp.delta;
                pt(a, b)
            }
            MapKind::General(g) => {
                let a = invert_coupling(g, p.y)?;
                let b = invert_coupling(g, p.x - g.g.eval(a))?;
                pt(a, b)
            }
        };
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::NumericBlowup)
        }
    }

    pub fn jacobian(&self, p: Point2) -> Mat2 {
        match &self.kind {
            MapKind::Henon(hp) => Mat2 {
                a: hp.mu * (1.0 - 2.0 * p.x),
                b: hp.delta,
                c: hp.delta,
                d: 0.0,
            },
            MapKind::General(g) => Mat2 {
                a: g.g.deriv(p.x),
                b: g.h.deriv(p.y),
                c: g.h.deriv(p.x),
                d: 0.0,
            },
        }
    }

    /// Eigenvalues of the Jacobian at `p`. The determinant -delta^2 (or
    /// -h'(x) h'(y)) is negative throughout the family's domain of use, so the
    /// pair is real with minus < 0 < plus; a complex pair can only mean the
    /// point is outside the validated coupling region.
    pub fn eigenvalues_at(&self, p: Point2) -> Result<EigenPair> {
        let jac = self.jacobian(p);
        let (minus, plus) = jac.real_eigenvalues().ok_or_else(|| {
            Error::Unsupported(format!("complex eigenvalues at ({}, {})", p.x, p.y))
        })?;
        Ok(EigenPair { minus, plus })
    }

    /// The interior fixed point: closed form for the quadratic family, the
    /// one located at construction for a general family.
    pub fn alpha(&self) -> Option<Point2> {
        match &self.kind {
            MapKind::Henon(hp) => {
                let x = 1.0 - (1.0 - hp.delta * hp.delta) / hp.mu;
                Some(pt(x, hp.delta * x))
            }
            MapKind::General(g) => g.alpha,
        }
    }

    /// Fixed points of the quadratic family, origin first, from the closed
    /// form. A general family has no closed form; scan a box instead.
    pub fn fixed_points(&self) -> Result<Vec<FixedPointInfo>> {
        match &self.kind {
            MapKind::Henon(_) => {
                let origin = self.fixed_point_info(Point2::ORIGIN)?;
                let alpha = self.fixed_point_info(self.alpha().expect("closed form"))?;
                Ok(vec![origin, alpha])
            }
            MapKind::General(_) => Err(Error::Unsupported(
                "no closed-form fixed points for a general family; use fixed_points_in".into(),
            )),
        }
    }

    /// Newton scan for fixed points inside a box, seeded from every cell
    /// center of a grid. Roots within 1e-8 of each other are merged; roots
    /// outside the box are dropped.
    pub fn fixed_points_in(
        &self,
        bounds: (f64, f64, f64, f64),
        grid_per_axis: usize,
    ) -> Result<FixedPointScan> {
        let (x_min, x_max, y_min, y_max) = bounds;
        if !(x_min < x_max && y_min < y_max) || grid_per_axis == 0 {
            return Err(Error::InvalidParams("empty search box or grid".into()));
        }
        let mut roots: Vec<(Point2, f64)> = Vec::new();
        let mut nonconverged = 0usize;
        let n = grid_per_axis;
        for j in 0..n {
            for i in 0..n {
                let start = pt(
                    x_min + (x_max - x_min) * (i as f64 + 0.5) / n as f64,
                    y_min + (y_max - y_min) * (j as f64 + 0.5) / n as f64,
                );
                match newton_periodic(self, 1, start) {
                    Some((p, res)) => {
                        let inside = p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
                        if !inside {
                            continue;
                        }
                        if let Some(existing) =
                            roots.iter_mut().find(|(q, _)| q.dist_inf(p) < FIXED_POINT_DEDUP)
                        {
                            if res < existing.1 {
                                *existing = (p, res);
                            }
                        } else {
                            roots.push((p, res));
                        }
                    }
                    None => nonconverged += 1,
                }
            }
        }
        let mut warnings = Vec::new();
        for a in 0..roots.len() {
            for b in a + 1..roots.len() {
                if roots[a].0.dist_inf(roots[b].0) < 1e-6 {
                    warnings.push(format!(
                        "fixed points ({}, {}) and ({}, {}) are closely spaced; the grid may be too coarse to separate a missed root",
                        roots[a].0.x, roots[a].0.y, roots[b].0.x, roots[b].0.y
                    ));
                }
            }
        }
        let points = roots
            .iter()
            .map(|(p, _)| self.fixed_point_info(*p))
            .collect::<Result<Vec<_>>>()?;
        Ok(FixedPointScan { points, starts_used: n * n, nonconverged_starts: nonconverged, warnings })
    }

    fn fixed_point_info(&self, p: Point2) -> Result<FixedPointInfo> {
        let eigenvalues = self.eigenvalues_at(p)?;
        Ok(FixedPointInfo { location: p, eigenvalues, stability: Stability::classify(eigenvalues) })
    }

    /// Seed a planar Newton solve for the interior fixed point from the
    /// attractor of the scalar part: iterate g from the critical region, then
    /// polish the planar system. None when the solve does not settle.
    fn locate_general_alpha(&self) -> Option<Point2> {
        let MapKind::General(parts) = &self.kind else { return None };
        let mut x = 0.5;
        for _ in 0..200 {
            let next = parts.g.eval(x);
            if !next.is_finite() || next.abs() > 100.0 {
                break;
            }
            x = next;
        }
        let seed = pt(x, parts.h.eval(x));
        let (p, _res) = newton_periodic(self, 1, seed)?;
        if p.dist_inf(Point2::ORIGIN) < 1e-6 {
            return None;
        }
        Some(p)
    }
}

/// Solve h(t) = v for a general family's coupling. The derivative bound
/// |h' - delta_ref| <= eps pins the preimage between v scaled by the two
/// extreme slopes; the bracket is verified and widened before solving in case
/// v lies outside the interval the bound was sampled on.
fn invert_coupling(parts: &GeneralParts, v: f64) -> Result<f64> {
    let d = parts.delta_ref;
    if parts.eps == 0.0 {
        return Ok(v / d);
    }
    let e = parts.eps;
    let (mut lo, mut hi) =
        if v >= 0.0 { (v / (d + e), v / (d - e)) } else { (v / (d - e), v / (d + e)) };
    let pad = 1e-9 * (1.0 + v.abs() / d);
    lo -= pad;
    hi += pad;
    for _ in 0..64 {
        if parts.h.eval(lo) <= v && v <= parts.h.eval(hi) {
            return invert_monotone(&parts.h, v, lo, hi);
        }
        let w = (hi - lo).max(pad);
        lo -= w;
        hi += w;
    }
    Err(Error::InvalidBracket(format!("could not bracket a preimage of {v} under the coupling")))
}

/// The reflection (x, y) -> (x, -y). Conjugating the quadratic family by it
/// flips the sign of delta, so negative couplings add nothing new.
pub fn conjugate_flip(p: Point2) -> Point2 {
    pt(p.x, -p.y)
}

/// Newton for a root of F^n(p) = p, with the Jacobian of the full composition
/// accumulated by the chain rule along the orbit. Returns the root and its
/// final max-norm residual.
pub(crate) fn newton_periodic(map: &MapFamily, n: usize, start: Point2) -> Option<(Point2, f64)> {
    damped_newton2(
        start,
        |p| {
            let mut q = p;
            let mut jac = Mat2::IDENTITY;
            for _ in 0..n {
                if q.norm_inf() > 1e8 {
                    return None;
                }
                jac = map.jacobian(q).mul(&jac);
                q = map.apply(q).ok()?;
            }
            let res = (q.x - p.x, q.y - p.y);
            let jr = Mat2 { a: jac.a - 1.0, b: jac.b, c: jac.c, d: jac.d - 1.0 };
            Some((res, jr))
        },
        80,
        1e-12,
    )
}
