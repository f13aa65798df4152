//! Stable and unstable manifolds of the saddle at the origin, traced as
//! polylines, plus the crossing structure of the basin boundary inside the
//! positive strip and the connecting curve through the fourth quadrant.
//!
//! The contracting eigenvalue at the origin is negative, so a single map
//! application swaps the two arms of each manifold. All growing therefore
//! uses the doubled map G (two forward or two backward applications), which
//! fixes each arm setwise and stretches along it by the squared eigenvalue.
//!
//! Points are grown ring by ring: a seed offset sigma along the eigenvector
//! gives the fundamental chord [sigma v, G(sigma v)], and ring r is the image
//! of that chord under G^r. Every emitted point is an exact r-fold image of a
//! chord point, so refinement (inserting chord midpoints) never drifts off
//! the manifold: the only approximation is the chord itself, whose error is
//! O(sigma^2) and is controlled by halving sigma until the reconstructed arm
//! stops moving.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fmt::float17;
use crate::map::{MapFamily, Stability};
use crate::orbit::{classify_forward, FateKind, OrbitBudget};
use crate::point::{pt, Point2};
use crate::regions::delta_thresholds;

/// Initial seed offset along the eigenvector.
const SEED_SIGMA0: f64 = 1e-7;
/// Arm-endpoint displacement below which a seed offset is accepted.
const SEED_TOL: f64 = 1e-9;
/// Give up halving the seed below this.
const SEED_MIN_SIGMA: f64 = 1e-12;
/// Arm length used for seed acceptance (and by default for local segments).
const LOCAL_ARM: f64 = 1e-2;
/// Ring budget while accepting a seed; far above anything a sane trace uses.
const ACCEPT_RING_CAP: usize = 256;
/// A full ring adding less arc than this means the tip has stopped moving.
const SATURATION_ARC: f64 = 1e-9;
/// Subdivision depth cap per ring segment.
const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Seeded along the canonical eigenvector (positive x component; positive
    /// y breaks a tie).
    Plus,
    /// Seeded opposite it.
    Minus,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::Plus => "Plus",
            Branch::Minus => "Minus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceOutcome {
    /// Cumulative arclength reached the target.
    ReachedTarget,
    /// The next point fell outside the window; the curve ends at the last
    /// point inside.
    ExitedWindow,
    /// A whole ring added almost no arc: the tip has converged (the unstable
    /// arm that ends on the interior fixed point does this).
    Saturated,
    /// Ring budget exhausted first.
    RingCapHit,
    /// A map application overflowed; the curve keeps what was computed.
    Blowup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// (x_min, x_max, y_min, y_max); None traces unwindowed.
    pub window: Option<(f64, f64, f64, f64)>,
    pub ring_cap: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { window: Some((-3.0, 4.0, -3.0, 3.0)), ring_cap: 64 }
    }
}

#[derive(Debug, Clone)]
pub struct ManifoldCurve {
    pub kind: ManifoldKind,
    pub branch: Branch,
    pub points: Vec<Point2>,
    /// Same length as `points`; entry 0 is 0.
    pub cumulative_arclength: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub curve: ManifoldCurve,
    pub outcome: TraceOutcome,
}

impl ManifoldCurve {
    fn from_points(kind: ManifoldKind, branch: Branch, points: Vec<Point2>) -> Self {
        let mut cum = Vec::with_capacity(points.len());
        let mut total = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                total += p.dist(points[i - 1]);
            }
            cum.push(total);
        }
        Self { kind, branch, points, cumulative_arclength: cum }
    }

    pub fn total_arclength(&self) -> f64 {
        *self.cumulative_arclength.last().unwrap_or(&0.0)
    }

    /// Linear interpolation along the polyline; clamped at both ends.
    pub fn point_at_arclength(&self, s: f64) -> Point2 {
        if self.points.is_empty() {
            return Point2::ORIGIN;
        }
        if s <= 0.0 {
            return self.points[0];
        }
        let total = self.total_arclength();
        if s >= total {
            return *self.points.last().unwrap();
        }
        let idx = match self
            .cumulative_arclength
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.points[i],
            Err(i) => i,
        };
        let (a, b) = (self.points[idx - 1], self.points[idx]);
        let (ca, cb) = (self.cumulative_arclength[idx - 1], self.cumulative_arclength[idx]);
        let t = if cb > ca { (s - ca) / (cb - ca) } else { 0.0 };
        pt(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
    }

    pub fn max_consecutive_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).fold(0.0, f64::max)
    }

    /// Euclidean distance from `p` to the polyline.
    pub fn distance_to(&self, p: Point2) -> f64 {
        match self.points.len() {
            0 => f64::INFINITY,
            1 => p.dist(self.points[0]),
            _ => self
                .points
                .windows(2)
                .map(|w| point_segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// True when two non-adjacent segments of the polyline share a point.
    /// Segments are bucketed on a grid sized by the longest segment, so only
    /// nearby pairs are tested.
    pub fn has_self_intersection(&self) -> bool {
        let n = self.points.len();
        if n < 4 {
            return false;
        }
        let cell = self.max_consecutive_spacing().max(1e-12);
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let coord = |v: f64| (v / cell).floor() as i64;
        for i in 0..n - 1 {
            let (a, b) = (self.points[i], self.points[i + 1]);
            let (x0, x1) = (coord(a.x.min(b.x)), coord(a.x.max(b.x)));
            let (y0, y1) = (coord(a.y.min(b.y)), coord(a.y.max(b.y)));
            for kx in x0..=x1 {
                for ky in y0..=y1 {
                    buckets.entry((kx, ky)).or_default().push(i);
                }
            }
        }
        for segs in buckets.values() {
            for (ai, &i) in segs.iter().enumerate() {
                for &j in &segs[ai + 1..] {
                    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                    if hi - lo <= 1 {
                        continue;
                    }
                    if segments_intersect(
                        self.points[lo],
                        self.points[lo + 1],
                        self.points[hi],
                        self.points[hi + 1],
                    ) {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x,y\n");
        for (i, p) in self.points.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                float17(self.cumulative_arclength[i]),
                float17(p.x),
                float17(p.y)
            ));
        }
        out
    }
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (vx, vy) = (b.x - a.x, b.y - a.y);
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0);
    p.dist(pt(a.x + t * vx, a.y + t * vy))
}

fn orient(o: Point2, a: Point2, b: Point2) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point2, p2: Point2, p3: Point2, p4: Point2) -> bool {
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p3, p4, p1))
        || (d2 == 0.0 && on_segment(p3, p4, p2))
        || (d3 == 0.0 && on_segment(p1, p2, p3))
        || (d4 == 0.0 && on_segment(p1, p2, p4))
}

/// Unit eigenvector at the origin for the requested manifold, canonical sign,
/// negated for the Minus branch. Errors unless the origin is a saddle.
fn branch_direction(map: &MapFamily, kind: ManifoldKind, branch: Branch) -> Result<Point2> {
    let eig = map.eigenvalues_at(Point2::ORIGIN)?;
    match Stability::classify(eig) {
        Stability::Saddle | Stability::FlipSaddle => {}
        _ => return Err(Error::OriginNotSaddle),
    }
    let lambda = match kind {
        ManifoldKind::Stable => {
            if eig.minus.abs() < 1.0 {
                eig.minus
            } else {
                eig.plus
            }
        }
        ManifoldKind::Unstable => {
            if eig.minus.abs() > 1.0 {
                eig.minus
            } else {
                eig.plus
            }
        }
    };
    // (lambda, h'(0)) solves the eigenvalue equation for a Jacobian with zero
    // lower-right entry and equal off-diagonal couplings at the origin.
    let coupling = map.jacobian(Point2::ORIGIN).b;
    let norm = lambda.hypot(coupling);
    let mut v = pt(lambda / norm, coupling / norm);
    if v.x < 0.0 || (v.x == 0.0 && v.y < 0.0) {
        v = pt(-v.x, -v.y);
    }
    if branch == Branch::Minus {
        v = pt(-v.x, -v.y);
    }
    Ok(v)
}

struct Tracer<'a> {
    map: &'a MapFamily,
    kind: ManifoldKind,
    /// sigma * direction.
    p0: Point2,
    /// G(p0): outer end of the fundamental chord.
    p1: Point2,
}

impl<'a> Tracer<'a> {
    fn new(map: &'a MapFamily, kind: ManifoldKind, dir: Point2, sigma: f64) -> Result<Self> {
        let p0 = pt(sigma * dir.x, sigma * dir.y);
        let p1 = gstep(map, kind, p0)?;
        Ok(Self { map, kind, p0, p1 })
    }

    fn seed(&self, s: f64) -> Point2 {
        pt(self.p0.x + s * (self.p1.x - self.p0.x), self.p0.y + s * (self.p1.y - self.p0.y))
    }

    /// G^ring applied to the chord point at parameter s: exactly on the ring's
    /// lineage, whatever s is.
    fn eval(&self, ring: usize, s: f64) -> Result<Point2> {
        let mut q = self.seed(s);
        for _ in 0..ring {
            q = gstep(self.map, self.kind, q)?;
        }
        Ok(q)
    }
}

/// The doubled map along the manifold direction.
fn gstep(map: &MapFamily, kind: ManifoldKind, p: Point2) -> Result<Point2> {
    match kind {
        ManifoldKind::Unstable => map.apply(map.apply(p)?),
        ManifoldKind::Stable => map.apply_inverse(map.apply_inverse(p)?),
    }
}

struct GrowState {
    points: Vec<Point2>,
    cum: Vec<f64>,
    spacing: f64,
    target: f64,
    window: Option<(f64, f64, f64, f64)>,
    outcome: Option<TraceOutcome>,
}

impl GrowState {
    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Append a point, enforcing window and target. False stops the trace.
    fn push(&mut self, p: Point2) -> bool {
        if let Some((x0, x1, y0, y1)) = self.window {
            if p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1 {
                self.outcome = Some(TraceOutcome::ExitedWindow);
                return false;
            }
        }
        let step = p.dist(*self.points.last().unwrap());
        let total = self.total() + step;
        self.points.push(p);
        self.cum.push(total);
        if total >= self.target {
            self.outcome = Some(TraceOutcome::ReachedTarget);
            return false;
        }
        true
    }
}

/// Emit ring points between chord parameters s_a and s_b (p_a already
/// emitted), subdividing until image spacing fits. False stops the trace.
#[allow(clippy::too_many_arguments)]
fn emit_segment(
    tracer: &Tracer,
    ring: usize,
    s_a: f64,
    p_a: Point2,
    s_b: f64,
    p_b: Point2,
    depth: usize,
    st: &mut GrowState,
) -> bool {
    if p_a.dist(p_b) <= st.spacing || depth >= MAX_DEPTH || (s_b - s_a) <= 4.0 * f64::EPSILON {
        return st.push(p_b);
    }
    let s_m = 0.5 * (s_a + s_b);
    match tracer.eval(ring, s_m) {
        Ok(p_m) => {
            emit_segment(tracer, ring, s_a, p_a, s_m, p_m, depth + 1, st)
                && emit_segment(tracer, ring, s_m, p_m, s_b, p_b, depth + 1, st)
        }
        Err(_) => {
            st.outcome = Some(TraceOutcome::Blowup);
            false
        }
    }
}

fn grow(
    tracer: &Tracer,
    spacing: f64,
    target: f64,
    window: Option<(f64, f64, f64, f64)>,
    ring_cap: usize,
) -> (Vec<Point2>, TraceOutcome) {
    let mut st = GrowState {
        points: vec![Point2::ORIGIN],
        cum: vec![0.0],
        spacing,
        target,
        window,
        outcome: None,
    };
    if st.push(tracer.p0) {
        let mut ring_start = tracer.p0;
        for ring in 0..ring_cap {
            let before = st.total();
            let ring_end = match tracer.eval(ring, 1.0) {
                Ok(p) => p,
                Err(_) => {
                    st.outcome = Some(TraceOutcome::Blowup);
                    break;
                }
            };
            if !emit_segment(tracer, ring, 0.0, ring_start, 1.0, ring_end, 0, &mut st) {
                break;
            }
            if st.total() - before < SATURATION_ARC && st.total() > 1e-6 {
                st.outcome = Some(TraceOutcome::Saturated);
                break;
            }
            ring_start = ring_end;
        }
    }
    let outcome = st.outcome.unwrap_or(TraceOutcome::RingCapHit);
    (st.points, outcome)
}

/// Halve the seed offset until the arm reconstructed out to `probe_len`
/// stops moving, then return the accepted offset and that arm.
fn accept_sigma(
    map: &MapFamily,
    kind: ManifoldKind,
    branch: Branch,
    dir: Point2,
    probe_len: f64,
    spacing: f64,
) -> Result<(f64, Trace)> {
    let mut sigma = SEED_SIGMA0;
    let mut prev: Option<Trace> = None;
    loop {
        let tracer = Tracer::new(map, kind, dir, sigma)?;
        let (points, outcome) = grow(&tracer, spacing, probe_len, None, ACCEPT_RING_CAP);
        let trace =
            Trace { curve: ManifoldCurve::from_points(kind, branch, points), outcome };
        if let Some(p) = &prev {
            let l = trace.curve.total_arclength().min(p.curve.total_arclength());
            let d = trace.curve.point_at_arclength(l).dist(p.curve.point_at_arclength(l));
            if d < SEED_TOL {
                return Ok((sigma, trace));
            }
        }
        sigma *= 0.5;
        if sigma < SEED_MIN_SIGMA {
            return Ok((sigma * 2.0, trace));
        }
        prev = Some(trace);
    }
}

/// Both arms of the local manifold, grown to `arm_length` of arc at spacing
/// arm_length/32. Plus first.
pub fn local_segment(
    map: &MapFamily,
    kind: ManifoldKind,
    arm_length: f64,
) -> Result<(ManifoldCurve, ManifoldCurve)> {
    if !(arm_length > 0.0 && arm_length.is_finite()) {
        return Err(Error::InvalidParams(format!("arm_length = {arm_length} must be positive")));
    }
    let mut arms = Vec::with_capacity(2);
    for branch in [Branch::Plus, Branch::Minus] {
        let dir = branch_direction(map, kind, branch)?;
        let (_sigma, trace) =
            accept_sigma(map, kind, branch, dir, arm_length, arm_length / 32.0)?;
        arms.push(trace.curve);
    }
    let minus = arms.pop().unwrap();
    let plus = arms.pop().unwrap();
    Ok((plus, minus))
}

pub fn trace_manifold(
    map: &MapFamily,
    kind: ManifoldKind,
    branch: Branch,
    target_arclength: f64,
    max_spacing: f64,
) -> Result<Trace> {
    trace_manifold_with(map, kind, branch, target_arclength, max_spacing, &TraceOptions::default())
}

pub fn trace_manifold_with(
    map: &MapFamily,
    kind: ManifoldKind,
    branch: Branch,
    target_arclength: f64,
    max_spacing: f64,
    opts: &TraceOptions,
) -> Result<Trace> {
    if !(target_arclength > 0.0 && target_arclength.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "target_arclength = {target_arclength} must be positive"
        )));
    }
    if !(max_spacing > 0.0 && max_spacing.is_finite()) {
        return Err(Error::InvalidParams(format!("max_spacing = {max_spacing} must be positive")));
    }
    let dir = branch_direction(map, kind, branch)?;
    let probe = LOCAL_ARM.min(target_arclength);
    let (sigma, _arm) = accept_sigma(map, kind, branch, dir, probe, probe / 32.0)?;
    let tracer = Tracer::new(map, kind, dir, sigma)?;
    let (points, outcome) =
        grow(&tracer, max_spacing, target_arclength, opts.window, opts.ring_cap);
    Ok(Trace { curve: ManifoldCurve::from_points(kind, branch, points), outcome })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingSide {
    Left,
    Right,
}

/// One basin-boundary crossing of a horizontal line in the strip: at height
/// ybar, orbits on one side of xbar converge to the interior fixed point and
/// on the other escape.
#[derive(Debug, Clone, Copy)]
pub struct CrossingSolution {
    pub ybar: f64,
    pub xbar: f64,
    pub side: CrossingSide,
    pub bracket_width_final: f64,
}

fn crossing_bisect(
    map: &MapFamily,
    ybar: f64,
    tol: f64,
    side: CrossingSide,
    mut lo: f64,
    mut hi: f64,
) -> Result<CrossingSolution> {
    let budget = OrbitBudget::default_for(map);
    let fate = |x: f64| classify_forward(map, pt(x, ybar), &budget).kind;
    // Orientation: which fate sits at lo.
    let (lo_kind, hi_kind) = match side {
        CrossingSide::Left => (FateKind::ToInfinity, FateKind::ToAlpha),
        CrossingSide::Right => (FateKind::ToAlpha, FateKind::ToInfinity),
    };
    let (flo, fhi) = (fate(lo), fate(hi));
    if flo != lo_kind || fhi != hi_kind {
        return Err(Error::InvalidBracket(format!(
            "fates at [{lo}, {hi}] x {ybar} are {flo:?}/{fhi:?}, expected {lo_kind:?}/{hi_kind:?}"
        )));
    }
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match fate(mid) {
            k if k == lo_kind => lo = mid,
            k if k == hi_kind => hi = mid,
            FateKind::ToOrigin => {
                // Landed on the boundary itself.
                return Ok(CrossingSolution { ybar, xbar: mid, side, bracket_width_final: hi - lo });
            }
            k => {
                return Err(Error::NoConvergence(format!(
                    "fate {k:?} at x = {mid}, y = {ybar} does not resolve the crossing"
                )))
            }
        }
    }
    Ok(CrossingSolution { ybar, xbar: 0.5 * (lo + hi), side, bracket_width_final: hi - lo })
}

/// Left crossing at height ybar in [0, 2 delta]: the boundary point inside
/// [-beta ybar, 0]. At ybar = 0 the bracket pinches to the origin.
pub fn xbar_left(map: &MapFamily, ybar: f64, tol: f64) -> Result<CrossingSolution> {
    let params = map
        .params()
        .ok_or_else(|| Error::Unsupported("crossings are specific to the quadratic family".into()))?;
    let th = delta_thresholds(params)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParams(format!("tol = {tol} must be positive")));
    }
    if !(ybar >= 0.0 && ybar <= 2.0 * params.delta) {
        return Err(Error::InvalidParams(format!(
            "ybar = {ybar} outside the strip [0, {}]",
            2.0 * params.delta
        )));
    }
    if ybar == 0.0 {
        return Ok(CrossingSolution {
            ybar,
            xbar: 0.0,
            side: CrossingSide::Left,
            bracket_width_final: 0.0,
        });
    }
    crossing_bisect(map, ybar, tol, CrossingSide::Left, -th.beta * ybar, 0.0)
}

/// Right crossing at height ybar in [0, 2 delta]: the boundary point inside
/// [1, 2], converging side on the left this time.
pub fn xbar_right(map: &MapFamily, ybar: f64, tol: f64) -> Result<CrossingSolution> {
    let params = map
        .params()
        .ok_or_else(|| Error::Unsupported("crossings are specific to the quadratic family".into()))?;
    delta_thresholds(params)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParams(format!("tol = {tol} must be positive")));
    }
    if !(ybar >= 0.0 && ybar <= 2.0 * params.delta) {
        return Err(Error::InvalidParams(format!(
            "ybar = {ybar} outside the strip [0, {}]",
            2.0 * params.delta
        )));
    }
    crossing_bisect(map, ybar, tol, CrossingSide::Right, 1.0, 2.0)
}

/// The arc of the stable set crossing the fourth quadrant: preimages of the
/// left-crossing arc between the origin and the image of the right crossing
/// at height 0. Ordered from the origin; interior points dip below the axis.
pub fn curve_c(map: &MapFamily, samples: usize) -> Result<ManifoldCurve> {
    if samples < 2 {
        return Err(Error::InvalidParams("need at least 2 samples".into()));
    }
    let params = map
        .params()
        .ok_or_else(|| Error::Unsupported("crossings are specific to the quadratic family".into()))?;
    let top = params.delta * xbar_right(map, 0.0, 1e-10)?.xbar;
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let ybar = top * i as f64 / (samples - 1) as f64;
        let xbar = if i == 0 { 0.0 } else { xbar_left(map, ybar, 1e-10)?.xbar };
        points.push(map.apply_inverse(pt(xbar, ybar))?);
    }
    Ok(ManifoldCurve::from_points(ManifoldKind::Stable, Branch::Plus, points))
}
