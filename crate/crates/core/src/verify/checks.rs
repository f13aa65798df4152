//! Implementations behind the check catalog. Every check draws its own
//! samples (seeded per id by the caller), decides each sample against an
//! independent oracle (long iteration, closed forms, or bisected boundaries),
//! and records failures verbatim.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::census::census_periodic_orbits;
use super::Tally;
use crate::basin::{extract_boundary, rasterize, GridSpec};
use crate::error::Result;
use crate::manifold::{
    curve_c, trace_manifold_with, xbar_left, xbar_right, Branch, ManifoldCurve, ManifoldKind,
    TraceOptions,
};
use crate::map::{conjugate_flip, make_henon, MapFamily, Stability};
use crate::orbit::{classify_forward, FateKind, OrbitBudget};
use crate::point::{pt, Point2};
use crate::regions::{delta_thresholds, RegionContext, RegionTag};
use crate::scalar::{c2_distance_to_linear, ScalarMap};

/// Orbits past this norm have escaped for oracle purposes; far beyond any
/// recurrent structure of the family.
const ORACLE_NORM: f64 = 1e6;
const ORACLE_STEPS: usize = 2000;

/// Window used when the stable manifold has to run through the whole
/// fourth-quadrant dip (the default window would clip it).
const DEEP_WINDOW: TraceOptions =
    TraceOptions { window: Some((-3.0, 4.0, -6.0, 3.0)), ring_cap: 64 };

struct Cx<'a> {
    map: &'a MapFamily,
    budget: OrbitBudget,
    rng: ChaCha8Rng,
}

impl Cx<'_> {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    /// 80% from the working window, 20% from a far square band where escape
    /// behavior must also hold.
    fn sample_desk(&mut self) -> Point2 {
        if self.rng.gen::<f64>() < 0.8 {
            let x = self.uniform(-3.0, 4.0);
            let y = self.uniform(-3.0, 3.0);
            pt(x, y)
        } else {
            let m = self.uniform(10.0, 20.0);
            let t = self.uniform(-m, m);
            match self.rng.gen_range(0..4u8) {
                0 => pt(m, t),
                1 => pt(-m, t),
                2 => pt(t, m),
                _ => pt(t, -m),
            }
        }
    }

    fn forward(&self, p: Point2) -> FateKind {
        classify_forward(self.map, p, &self.budget).kind
    }

    fn escapes(&self, p: Point2, backward: bool) -> bool {
        let mut q = p;
        for _ in 0..ORACLE_STEPS {
            if q.norm_inf() > ORACLE_NORM {
                return true;
            }
            let step = if backward { self.map.apply_inverse(q) } else { self.map.apply(q) };
            q = match step {
                Ok(v) => v,
                Err(_) => return true,
            };
        }
        q.norm_inf() > ORACLE_NORM
    }

    /// Only called from checks the catalog gates to the quadratic family.
    fn henon(&self) -> crate::map::HenonParams {
        *self.map.params().expect("catalog gate admits only the quadratic family here")
    }

    fn region(&self) -> std::result::Result<RegionContext, Tally> {
        RegionContext::new(self.henon())
            .map_err(|e| Tally::inapplicable(format!("region structure unavailable: {e}")))
    }
}

pub(crate) fn run(map: &MapFamily, id: &str, samples: usize, rng: ChaCha8Rng) -> Result<Tally> {
    let mut cx = Cx { map, budget: OrbitBudget::default_for(map), rng };
    let n = samples.max(1);
    Ok(match id {
        "lemma4_wdelta_backward_escape" => wdelta_backward(&mut cx, n),
        "lemma5_beta_cone_forward_escape" => beta_cone(&mut cx, n),
        "lemma6_right_wedge" => right_wedge(&mut cx, n),
        "prop7_polydisk_contraction" => polydisk_contraction(&mut cx, n),
        "cor8_vertical_slab" => vertical_slab(&mut cx, n),
        "prop9_a_delta_to_alpha" => a_delta_converges(&mut cx, n),
        "thm10_left_crossing" => left_crossing(&mut cx, n),
        "thm12_right_crossing" => right_crossing(&mut cx, n),
        "prop13_strip_trichotomy" => strip_trichotomy(&mut cx, n),
        "prop16i_q4_right_wedge" => q4_right_wedge(&mut cx, n),
        "prop16ii_q4_deep_strip" => q4_deep_strip(&mut cx, n),
        "prop18_lower_half_trichotomy" => lower_half_trichotomy(&mut cx, n),
        "lemma17_curve_c_split" => curve_c_split(&mut cx, n),
        "lemma19_periodic_census" => periodic_census(&mut cx, n),
        "lemma19_boundary_is_stable_set" => boundary_is_stable_set(&mut cx, n),
        "lemma19_stable_set_backward_escape" => stable_set_backward_escape(&mut cx, n),
        "lemma21_k_characterization" => k_characterization(&mut cx, n),
        "conjugacy_flip" => conjugacy_flip_check(&mut cx, n),
        "flip_saddle_origin" => flip_saddle_origin(&mut cx, n),
        "eigen_thresholds_origin" => eigen_thresholds(&mut cx, n),
        "alpha_attracting_threshold" => alpha_attracting(&mut cx, n),
        "general_hypotheses" => general_hypotheses(&mut cx, n),
        other => {
            return Err(crate::error::Error::InvalidParams(format!(
                "check {other} has no implementation"
            )))
        }
    })
}

fn wdelta_backward(cx: &mut Cx, n: usize) -> Tally {
    let ctx = match cx.region() {
        Ok(c) => c,
        Err(t) => return t,
    };
    let p = cx.henon();
    let bound = ctx.thresholds().lemma4_bound;
    if p.delta >= bound {
        return Tally::inapplicable(format!(
            "delta = {} is not below the backward-escape bound {bound}",
            p.delta
        ));
    }
    let mut t = Tally::new();
    for _ in 0..n {
        let x = cx.uniform(-20.0, 20.0);
        let floor = (2.0 * p.delta).max(p.delta * x.abs());
        let mag = cx.uniform(floor, floor + 20.0);
        let q = pt(x, if cx.rng.gen::<bool>() { mag } else { -mag });
        debug_assert!(ctx.contains(RegionTag::WDelta, q));
        t.check(cx.escapes(q, true), || format!("{q:?} did not escape backward"));
    }
    t
}

fn beta_cone(cx: &mut Cx, n: usize) -> Tally {
    let ctx = match cx.region() {
        Ok(c) => c,
        Err(t) => return t,
    };
    let beta = ctx.thresholds().beta;
    let mut t = Tally::new();
    for _ in 0..n {
        let y = cx.uniform(-20.0, 20.0);
        let hi = (-beta * y).min(0.0);
        let q = pt(cx.uniform(hi - 10.0, hi), y);
        debug_assert!(ctx.contains(RegionTag::BetaCone, q));
        let invariant = match cx.map.apply(q) {
            Ok(next) => ctx.contains(RegionTag::BetaCone, next),
            Err(_) => true,
        };
        let escapes = cx.escapes(q, false);
        t.check(invariant && escapes, || {
            format!("{q:?}: invariant west cone = {invariant}, escapes = {escapes}")
        });
    }
    t
}

fn right_wedge(cx: &mut Cx, n: usize) -> Tally {
    let ctx = match cx.region() {
        Ok(c) => c,
        Err(t) => return t,
    };
    let p = cx.henon();
    let bound = ctx.thresholds().lemma6_bound;
    if p.delta >= bound {
        return Tally::inapplicable(format!(
            "delta = {} is not below the wedge-escape bound {bound}",
            p.delta
        ));
    }
    let mut t = Tally::new();
    for _ in 0..n {
        let x = cx.uniform(2.0, 20.0);
        let q = pt(x, cx.uniform(0.0, p.delta * x));
        debug_assert!(ctx.contains(RegionTag::RightWedge, q));
        t.check(cx.escapes(q, false), || format!("{q:?} did not escape forward"));
    }
    t
}

fn polydisk_contraction(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let alpha = match cx.map.alpha() {
        Some(a) => a,
        None => return Tally::inapplicable("no interior fixed point at these parameters"),
    };
    let mut t = Tally::new();
    let mut any = false;
    for r in [0.4, 0.2, 0.1, 0.05] {
        let gamma = (2.0 - p.mu).abs() + 2.0 * p.delta * p.delta + p.mu * r;
        let rho = gamma + p.delta.abs();
        if rho >= 1.0 {
            t.note(format!("r = {r}: ratio {rho:.4} not contracting, skipped"));
            continue;
        }
        any = true;
        for _ in 0..(n / 4).max(8) {
            let q = pt(alpha.x + cx.uniform(-r, r), alpha.y + cx.uniform(-r, r));
            let d0 = q.dist_inf(alpha);
            match cx.map.apply(q) {
                Ok(img) => {
                    let d1 = img.dist_inf(alpha);
                    t.check(d1 <= rho * d0 + 1e-14, || {
                        format!("r = {r}, {q:?}: step ratio {} exceeds {rho}", d1 / d0)
                    });
                }
                Err(e) => t.fail(format!("r = {r}, {q:?}: {e}")),
            }
        }
        t.note(format!("r = {r}: gamma = {gamma:.6}, ratio = {rho:.6}"));
    }
    if !any {
        return Tally::inapplicable("no disk radius contracts at these parameters");
    }
    t
}

fn vertical_slab(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let alpha = match cx.map.alpha() {
        Some(a) => a,
        None => return Tally::inapplicable("no interior fixed point at these parameters"),
    };
    let mut t = Tally::new();
    for _ in 0..n {
        let q = pt(alpha.x + cx.uniform(-0.2, 0.2), cx.uniform(0.0, 2.0 * p.delta));
        let mut cur = q;
        let mut entered = false;
        for _ in 0..5 {
            cur = match cx.map.apply(cur) {
                Ok(v) => v,
                Err(_) => break,
            };
            if cur.dist_inf(alpha) <= 0.4 {
                entered = true;
                break;
            }
        }
        let fate = cx.forward(q);
        t.check(entered && fate == FateKind::ToAlpha, || {
            format!("{q:?}: entered disk = {entered}, fate = {fate:?}")
        });
    }
    t
}

fn a_delta_converges(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let mut t = Tally::new();
    for _ in 0..n {
        let q = pt(cx.uniform(0.0, 1.0), cx.uniform(0.0, 2.0 * p.delta));
        if q == Point2::ORIGIN {
            continue;
        }
        let fate = cx.forward(q);
        t.check(fate == FateKind::ToAlpha, || format!("{q:?}: fate {fate:?}"));
    }
    t
}

fn left_crossing(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let ctx = match cx.region() {
        Ok(c) => c,
        Err(t) => return t,
    };
    let beta = ctx.thresholds().beta;
    let heights = (n / 66).clamp(4, 64);
    let mut t = Tally::new();
    for j in 1..=heights {
        let ybar = j as f64 * 2.0 * p.delta / heights as f64;
        let sol = match xbar_left(cx.map, ybar, 1e-8) {
            Ok(s) => s,
            Err(e) => {
                t.fail(format!("height {ybar}: {e}"));
                continue;
            }
        };
        let lo = -beta * ybar;
        t.check(sol.xbar > lo && sol.xbar < 0.0, || {
            format!("height {ybar}: crossing {} outside ({lo}, 0)", sol.xbar)
        });
        for k in 0..64 {
            let x = lo - lo * (k as f64 + 0.5) / 64.0;
            if (x - sol.xbar).abs() < 2e-8 {
                continue;
            }
            let expect =
                if x < sol.xbar { FateKind::ToInfinity } else { FateKind::ToAlpha };
            let got = cx.forward(pt(x, ybar));
            t.check(got == expect, || {
                format!("({x}, {ybar}): {got:?} on the {expect:?} side of {}", sol.xbar)
            });
        }
        for f in [0.95, 1.05] {
            let xs = sol.xbar * f;
            if xs <= lo || xs >= 0.0 || (xs - sol.xbar).abs() < 1e-12 {
                continue;
            }
            let expect = if xs < sol.xbar { FateKind::ToInfinity } else { FateKind::ToAlpha };
            let got = cx.forward(pt(xs, ybar));
            t.check(got == expect, || format!("spot ({xs}, {ybar}): {got:?}"));
        }
    }
    t
}

fn right_crossing(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let heights = (n / 66).clamp(4, 64);
    let mut t = Tally::new();
    for j in 0..=heights {
        let ybar = j as f64 * 2.0 * p.delta / heights as f64;
        let sol = match xbar_right(cx.map, ybar, 1e-8) {
            Ok(s) => s,
            Err(e) => {
                t.fail(format!("height {ybar}: {e}"));
                continue;
            }
        };
        t.check(sol.xbar > 1.0 && sol.xbar < 2.0, || {
            format!("height {ybar}: crossing {} outside (1, 2)", sol.xbar)
        });
        for k in 0..64 {
            let x = 1.0 + (k as f64 + 0.5) / 64.0;
            if (x - sol.xbar).abs() < 2e-8 {
                continue;
            }
            let expect =
                if x < sol.xbar { FateKind::ToAlpha } else { FateKind::ToInfinity };
            let got = cx.forward(pt(x, ybar));
            t.check(got == expect, || {
                format!("({x}, {ybar}): {got:?} on the {expect:?} side of {}", sol.xbar)
            });
        }
        for f in [0.95, 1.05] {
            let xs = sol.xbar * f;
            if xs <= 0.3 || xs >= 2.5 || (xs - sol.xbar).abs() < 1e-12 {
                continue;
            }
            let expect = if xs < sol.xbar { FateKind::ToAlpha } else { FateKind::ToInfinity };
            let got = cx.forward(pt(xs, ybar));
            t.check(got == expect, || format!("spot ({xs}, {ybar}): {got:?}"));
        }
    }
    t
}

fn strip_trichotomy(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let mut t = Tally::new();
    const LEVELS: usize = 32;
    let mut crossings: Vec<Option<(f64, f64)>> = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let ybar = (k as f64 + 0.5) * 2.0 * p.delta / LEVELS as f64;
        let pair = match (xbar_left(cx.map, ybar, 1e-8), xbar_right(cx.map, ybar, 1e-8)) {
            (Ok(l), Ok(r)) => Some((l.xbar, r.xbar)),
            (l, r) => {
                t.fail(format!("height {ybar}: crossings unavailable ({l:?} / {r:?})"));
                None
            }
        };
        crossings.push(pair);
    }
    for _ in 0..n {
        let k = cx.rng.gen_range(0..LEVELS);
        let Some((xl, xr)) = crossings[k] else { continue };
        let ybar = (k as f64 + 0.5) * 2.0 * p.delta / LEVELS as f64;
        let x = cx.uniform(-3.0, 4.0);
        if (x - xl).abs() < 1e-6 || (x - xr).abs() < 1e-6 {
            continue;
        }
        let expect = if x > xl && x < xr { FateKind::ToAlpha } else { FateKind::ToInfinity };
        let got = cx.forward(pt(x, ybar));
        t.check(got == expect, || {
            format!("({x}, {ybar}): {got:?}, crossings at {xl} and {xr}")
        });
    }
    t
}

fn q4_right_wedge(cx: &mut Cx, n: usize) -> Tally {
    let ctx = match cx.region() {
        Ok(c) => c,
        Err(t) => return t,
    };
    let p = cx.henon();
    let bound = ctx.thresholds().prop16i_bound;
    if p.delta >= bound {
        return Tally::inapplicable(format!(
            "delta = {} is not below the quadrant-wedge bound {bound}",
            p.delta
        ));
    }
    let mut t = Tally::new();
    for _ in 0..n {
        let q = pt(cx.uniform(2.0, 20.0), cx.uniform(-20.0, 0.0));
        debug_assert!(ctx.contains(RegionTag::Q4RightWedge, q));
        t.check(cx.escapes(q, false), || format!("{q:?} did not escape forward"));
    }
    t
}

fn q4_deep_strip(cx: &mut Cx, n: usize) -> Tally {
    let ctx = match cx.region() {
        Ok(c) => c,
        Err(t) => return t,
    };
    let p = cx.henon();
    if p.delta > 1.0 {
        return Tally::inapplicable(format!("delta = {} exceeds the deep-strip bound 1", p.delta));
    }
    let d0 = ctx.thresholds().delta0;
    let mut t = Tally::new();
    for _ in 0..n {
        let q = pt(cx.uniform(0.0, 2.0), cx.uniform(-d0 - 6.0, -d0));
        debug_assert!(ctx.contains(RegionTag::Q4DeepStrip, q));
        t.check(cx.escapes(q, false), || format!("{q:?} did not escape forward"));
    }
    t
}

/// Bisect a fate transition along a horizontal line; endpoint fates must
/// match the stated orientation.
fn bisect_fate(
    cx: &Cx,
    y: f64,
    mut lo: f64,
    mut hi: f64,
    lo_kind: FateKind,
    hi_kind: FateKind,
) -> std::result::Result<f64, String> {
    let (flo, fhi) = (cx.forward(pt(lo, y)), cx.forward(pt(hi, y)));
    if flo != lo_kind || fhi != hi_kind {
        return Err(format!(
            "bracket [{lo}, {hi}] at height {y}: fates {flo:?}/{fhi:?}, wanted {lo_kind:?}/{hi_kind:?}"
        ));
    }
    for _ in 0..60 {
        if hi - lo <= 1e-9 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let got = cx.forward(pt(mid, y));
        if got == lo_kind {
            lo = mid;
        } else if got == hi_kind {
            hi = mid;
        } else if got == FateKind::ToOrigin {
            return Ok(mid);
        } else {
            return Err(format!("fate {got:?} at ({mid}, {y}) does not resolve the transition"));
        }
    }
    Ok(0.5 * (lo + hi))
}

fn lower_half_trichotomy(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let mut t = Tally::new();
    let c = match curve_c(cx.map, 801) {
        Ok(c) => c,
        Err(e) => {
            t.fail(format!("connecting curve construction failed: {e}"));
            return t;
        }
    };
    const LEVELS: usize = 12;
    let mut bounds: Vec<Option<(f64, f64)>> = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let y = -(k as f64 + 0.5) * 2.0 * p.delta / LEVELS as f64;
        let left = bisect_fate(cx, y, -0.5, 0.3, FateKind::ToInfinity, FateKind::ToAlpha);
        let right = bisect_fate(cx, y, 0.7, 1.5, FateKind::ToAlpha, FateKind::ToInfinity);
        match (left, right) {
            (Ok(x1), Ok(x2)) => {
                // Both transition abscissas must sit on the connecting curve.
                t.check(c.distance_to(pt(x1, y)) <= 0.01, || {
                    format!("left transition ({x1}, {y}) is off the curve")
                });
                t.check(c.distance_to(pt(x2, y)) <= 0.01, || {
                    format!("right transition ({x2}, {y}) is off the curve")
                });
                bounds.push(Some((x1, x2)));
            }
            (l, r) => {
                if let Err(e) = l {
                    t.fail(format!("height {y}: {e}"));
                }
                if let Err(e) = r {
                    t.fail(format!("height {y}: {e}"));
                }
                bounds.push(None);
            }
        }
    }
    for _ in 0..n {
        let k = cx.rng.gen_range(0..LEVELS);
        let Some((x1, x2)) = bounds[k] else { continue };
        let y = -(k as f64 + 0.5) * 2.0 * p.delta / LEVELS as f64;
        let x = cx.uniform(-1.2, 1.6);
        if (x - x1).abs() < 1e-5 || (x - x2).abs() < 1e-5 {
            continue;
        }
        let expect = if x > x1 && x < x2 { FateKind::ToAlpha } else { FateKind::ToInfinity };
        let got = cx.forward(pt(x, y));
        t.check(got == expect, || {
            format!("({x}, {y}): {got:?}, transitions at {x1} and {x2}")
        });
    }
    t
}

fn curve_c_split(cx: &mut Cx, n: usize) -> Tally {
    let mut t = Tally::new();
    let c = match curve_c(cx.map, 801) {
        Ok(c) => c,
        Err(e) => {
            t.fail(format!("connecting curve construction failed: {e}"));
            return t;
        }
    };
    let total = c.total_arclength();
    for _ in 0..n {
        let w = c.point_at_arclength(cx.uniform(0.05, 0.95) * total);
        if w.y > -1e-3 {
            continue;
        }
        let below = cx.forward(pt(w.x, 1.5 * w.y));
        let above = cx.forward(pt(w.x, 0.5 * w.y));
        t.check(below == FateKind::ToInfinity, || {
            format!("below the curve at ({}, {}): {below:?}", w.x, 1.5 * w.y)
        });
        t.check(above == FateKind::ToAlpha, || {
            format!("above the curve at ({}, {}): {above:?}", w.x, 0.5 * w.y)
        });
    }
    t
}

fn periodic_census(cx: &mut Cx, _n: usize) -> Tally {
    let mut t = Tally::new();
    let orbits = match census_periodic_orbits(cx.map, 2, (-3.0, 4.0, -3.0, 3.0), 32) {
        Ok(o) => o.orbits,
        Err(e) => {
            t.fail(format!("census failed: {e}"));
            return t;
        }
    };
    let fixed = orbits.iter().filter(|o| o.period == 1).count();
    t.check(fixed == 2, || format!("found {fixed} fixed points, expected 2"));
    for orbit in &orbits {
        let mut cur = orbit.points[0];
        let mut ok = true;
        for _ in 0..orbit.period {
            cur = match cx.map.apply(cur) {
                Ok(v) => v,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
        }
        t.check(ok && cur.dist_inf(orbit.points[0]) < 1e-9, || {
            format!("census point {:?} does not return after {} steps", orbit.points[0], orbit.period)
        });
    }
    if cx.map.is_henon() {
        match cx.map.fixed_points() {
            Ok(closed) => {
                for info in &closed {
                    let hit = orbits
                        .iter()
                        .filter(|o| o.period == 1)
                        .any(|o| o.points[0].dist_inf(info.location) < 1e-9);
                    t.check(hit, || {
                        format!("closed-form fixed point {:?} missing from the census", info.location)
                    });
                }
            }
            Err(e) => t.fail(format!("closed-form fixed points unavailable: {e}")),
        }
    }
    let alpha_attracting = cx
        .map
        .alpha()
        .and_then(|a| cx.map.eigenvalues_at(a).ok())
        .map(|e| e.minus.abs() < 1.0 && e.plus.abs() < 1.0)
        .unwrap_or(false);
    if alpha_attracting {
        t.check(orbits.iter().all(|o| o.period == 1), || {
            "found a genuine period-2 orbit although the interior fixed point attracts".into()
        });
    } else {
        t.note("interior fixed point not attracting; period-2 count not constrained");
    }
    t
}

fn boundary_is_stable_set(cx: &mut Cx, _n: usize) -> Tally {
    let mut t = Tally::new();
    let grid = GridSpec::new(120, 120, -1.0, 2.0, -0.5, 0.5).expect("static grid");
    let raster = rasterize(cx.map, &grid, &cx.budget);
    let boundary = extract_boundary(&raster);
    if boundary.is_empty() {
        t.fail("raster produced no boundary cells".into());
        return t;
    }
    let mut curves: Vec<ManifoldCurve> = Vec::new();
    for branch in [Branch::Plus, Branch::Minus] {
        match trace_manifold_with(cx.map, ManifoldKind::Stable, branch, 16.0, 0.01, &DEEP_WINDOW) {
            Ok(trace) => curves.push(trace.curve),
            Err(e) => {
                t.fail(format!("stable manifold trace ({branch}) failed: {e}"));
                return t;
            }
        }
    }
    let tol = 2.0 * grid.diagonal();
    for p in &boundary {
        let d = curves.iter().map(|c| c.distance_to(*p)).fold(f64::INFINITY, f64::min);
        t.check(d <= tol, || format!("boundary cell {p:?} is {d:.4} from the stable set"));
    }
    t.note(format!("{} boundary cells, tolerance {tol:.4}", boundary.len()));
    t
}

fn stable_set_backward_escape(cx: &mut Cx, n: usize) -> Tally {
    let mut t = Tally::new();
    let mut candidates: Vec<Point2> = Vec::new();
    for branch in [Branch::Plus, Branch::Minus] {
        match trace_manifold_with(cx.map, ManifoldKind::Stable, branch, 8.0, 0.01, &DEEP_WINDOW) {
            Ok(trace) => {
                let c = trace.curve;
                for (i, p) in c.points.iter().enumerate() {
                    let s = c.cumulative_arclength[i];
                    if s > 0.5 && s < c.total_arclength() - 0.1 && p.norm_inf() > 0.25 {
                        candidates.push(*p);
                    }
                }
            }
            Err(e) => {
                t.fail(format!("stable manifold trace ({branch}) failed: {e}"));
                return t;
            }
        }
    }
    if candidates.is_empty() {
        t.fail("no stable-set sample points away from the origin".into());
        return t;
    }
    for _ in 0..n {
        let q = candidates[cx.rng.gen_range(0..candidates.len())];
        t.check(cx.escapes(q, true), || format!("{q:?} did not escape backward"));
    }
    t
}

fn k_characterization(cx: &mut Cx, _n: usize) -> Tally {
    let mut t = Tally::new();
    let window = TraceOptions::default();
    let arms: Vec<_> = [Branch::Plus, Branch::Minus]
        .into_iter()
        .map(|b| trace_manifold_with(cx.map, ManifoldKind::Unstable, b, 1.0, 0.005, &window))
        .collect();
    let mut basin_branch: Option<Branch> = None;
    let mut escape_branch: Option<Branch> = None;
    for (branch, arm) in [Branch::Plus, Branch::Minus].into_iter().zip(&arms) {
        let curve = match arm {
            Ok(trace) => &trace.curve,
            Err(e) => {
                t.fail(format!("unstable arm ({branch}) failed: {e}"));
                return t;
            }
        };
        let total = curve.total_arclength();
        let mut to_alpha = 0;
        let mut to_inf = 0;
        for k in 0..20 {
            let q = curve.point_at_arclength((0.2 + 0.7 * k as f64 / 19.0) * total);
            match cx.forward(q) {
                FateKind::ToAlpha | FateKind::ToOrigin => to_alpha += 1,
                FateKind::ToInfinity => to_inf += 1,
                FateKind::Undecided => {}
            }
        }
        if to_alpha == 20 {
            basin_branch = Some(branch);
        }
        if to_inf == 20 {
            escape_branch = Some(branch);
        }
        t.check(to_alpha == 20 || to_inf == 20, || {
            format!("arm {branch} splits {to_alpha} converging / {to_inf} escaping")
        });
    }
    t.check(basin_branch.is_some() && escape_branch.is_some(), || {
        "expected one converging arm and one escaping arm".into()
    });
    // Bounded backward orbits: walk the converging arm outward ring by ring;
    // read backward, the recorded prefix is the backward orbit, descending
    // into the origin with no transverse error to amplify.
    if let Some(basin) = basin_branch {
        let fine = TraceOptions { window: None, ring_cap: 256 };
        match trace_manifold_with(cx.map, ManifoldKind::Unstable, basin, 0.01, 0.01 / 32.0, &fine) {
            Ok(trace) => {
                let seed = trace.curve.points[1];
                let mut prefix = vec![seed];
                loop {
                    let last = *prefix.last().unwrap();
                    let next = match cx.map.apply(last).and_then(|v| cx.map.apply(v)) {
                        Ok(v) => v,
                        Err(_) => break,
                    };
                    if next.norm_inf() > 0.35 || prefix.len() >= 80 {
                        break;
                    }
                    prefix.push(next);
                }
                t.check(prefix.len() >= 5, || {
                    format!(
                        "arm prefix too short ({} rings) to witness bounded backward orbits",
                        prefix.len()
                    )
                });
                for w in prefix.windows(2) {
                    t.check(w[1].norm_inf() > w[0].norm_inf(), || {
                        format!(
                            "backward step {:?} -> {:?} does not descend toward the origin",
                            w[1], w[0]
                        )
                    });
                }
                t.check(seed.norm_inf() < 1e-6, || {
                    format!("closest backward approach {} is not near the origin", seed.norm_inf())
                });
                t.note(format!("bounded backward orbit witnessed on the {basin} arm"));
            }
            Err(e) => t.fail(format!("fine unstable arm ({basin}) failed: {e}")),
        }
    }
    // Contrast: basin interior points off the unstable arm escape backward.
    if let Some(alpha) = cx.map.alpha() {
        let q = pt(alpha.x + 0.15, alpha.y);
        t.check(cx.escapes(q, true), || {
            format!("interior contrast point {q:?} did not escape backward")
        });
    }
    t
}

fn conjugacy_flip_check(cx: &mut Cx, n: usize) -> Tally {
    let p = cx.henon();
    let mut t = Tally::new();
    let mirrored = match MapFamily::henon(-p.delta, p.mu) {
        Ok(m) => m,
        Err(e) => {
            t.fail(format!("mirrored map unavailable: {e}"));
            return t;
        }
    };
    for _ in 0..n {
        let q = cx.sample_desk();
        match (mirrored.apply(q), cx.map.apply(conjugate_flip(q)).map(conjugate_flip)) {
            (Ok(a), Ok(b)) => t.check(a == b, || {
                format!("{q:?}: mirrored image {a:?} differs from conjugated image {b:?}")
            }),
            (Err(_), Err(_)) => t.pass(),
            (a, b) => t.fail(format!("{q:?}: one side blew up ({a:?} vs {b:?})")),
        }
    }
    match (mirrored.eigenvalues_at(Point2::ORIGIN), cx.map.eigenvalues_at(Point2::ORIGIN)) {
        (Ok(a), Ok(b)) => t.check(a.minus == b.minus && a.plus == b.plus, || {
            "origin eigenvalues change under the coupling sign flip".into()
        }),
        _ => t.fail("origin eigenvalues unavailable".into()),
    }
    t
}

fn flip_saddle_origin(cx: &mut Cx, _n: usize) -> Tally {
    let mut t = Tally::new();
    let eig = match cx.map.eigenvalues_at(Point2::ORIGIN) {
        Ok(e) => e,
        Err(e) => {
            t.fail(format!("origin eigenvalues unavailable: {e}"));
            return t;
        }
    };
    t.check(matches!(Stability::classify(eig), Stability::FlipSaddle), || {
        format!("origin classifies as {:?}", Stability::classify(eig))
    });
    t.check(eig.minus > -1.0 && eig.minus < 0.0, || {
        format!("contracting eigenvalue {} not in (-1, 0)", eig.minus)
    });
    t.check(eig.plus > 1.0, || format!("expanding eigenvalue {} not above 1", eig.plus));
    let j = cx.map.jacobian(Point2::ORIGIN);
    t.check(
        (eig.minus * eig.plus - j.det()).abs() <= 1e-12 * (1.0 + j.det().abs()),
        || format!("eigenvalue product {} vs determinant {}", eig.minus * eig.plus, j.det()),
    );
    t.check(
        (eig.minus + eig.plus - j.trace()).abs() <= 1e-12 * (1.0 + j.trace().abs()),
        || format!("eigenvalue sum {} vs trace {}", eig.minus + eig.plus, j.trace()),
    );
    if let Some(p) = cx.map.params() {
        // The expanding eigenvalue crosses 1 exactly where mu crosses
        // 1 - delta^2; a guard band well above rounding, far below the scan.
        let mu_star = 1.0 - p.delta * p.delta;
        for (mu_test, expanding) in [(mu_star - 1e-9, false), (mu_star + 1e-9, true)] {
            match MapFamily::henon(p.delta, mu_test)
                .and_then(|m| m.eigenvalues_at(Point2::ORIGIN))
            {
                Ok(e2) => t.check((e2.plus > 1.0) == expanding, || {
                    format!("at mu = {mu_test}, expanding eigenvalue is {}", e2.plus)
                }),
                Err(e) => t.fail(format!("scan at mu = {mu_test} failed: {e}")),
            }
        }
        t.note("saddle onset scanned across the closed-form boundary");
    }
    t
}

fn eigen_thresholds(cx: &mut Cx, _n: usize) -> Tally {
    let mut t = Tally::new();
    let check_identities = |t: &mut Tally, delta: f64, mu: f64| {
        let params = match make_henon(delta, mu) {
            Ok(p) => p,
            Err(e) => {
                t.fail(format!("params ({delta}, {mu}): {e}"));
                return;
            }
        };
        let th = match delta_thresholds(&params) {
            Ok(th) => th,
            Err(e) => {
                t.fail(format!("thresholds at ({delta}, {mu}): {e}"));
                return;
            }
        };
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * (1.0 + b.abs());
        t.check(close(th.beta, delta / (mu - 1.0)), || format!("beta at ({delta}, {mu})"));
        t.check(close(th.lemma4_bound, (mu - 1.0).max(1.0)), || {
            format!("backward-escape bound at ({delta}, {mu})")
        });
        t.check(close(th.lemma6_bound, (mu - 1.0).sqrt()), || {
            format!("wedge bound at ({delta}, {mu})")
        });
        t.check(close(th.prop16i_bound, (3.0 * mu * (mu - 1.0)).sqrt()), || {
            format!("quadrant-wedge bound at ({delta}, {mu})")
        });
        t.check(close(th.delta0, (2.0 * delta * delta / (mu - 1.0) + 1.0) / delta), || {
            format!("deep-strip depth at ({delta}, {mu})")
        });
    };
    let p = cx.henon();
    check_identities(&mut t, p.delta, p.mu);
    for (d2, m2) in [(0.1, 1.5), (0.2, 2.5), (0.05, 1.1)] {
        check_identities(&mut t, d2, m2);
    }
    if p.delta == 0.1 && p.mu == 2.0 {
        let th = delta_thresholds(&p).expect("valid params");
        t.check((th.beta - 0.1).abs() < 1e-15, || format!("beta = {}", th.beta));
        t.check(th.lemma4_bound == 1.0, || format!("backward bound = {}", th.lemma4_bound));
        t.check(th.lemma6_bound == 1.0, || format!("wedge bound = {}", th.lemma6_bound));
        t.check((th.prop16i_bound - 6.0_f64.sqrt()).abs() < 1e-15, || {
            format!("quadrant bound = {}", th.prop16i_bound)
        });
        t.check((th.delta0 - 10.2).abs() < 1e-12, || format!("depth = {}", th.delta0));
    }
    t
}

fn alpha_attracting(cx: &mut Cx, _n: usize) -> Tally {
    let mut t = Tally::new();
    let alpha = match cx.map.alpha() {
        Some(a) => a,
        None => {
            t.fail("interior fixed point unavailable".into());
            return t;
        }
    };
    match cx.map.apply(alpha) {
        Ok(img) => t.check(img.dist_inf(alpha) <= 1e-9, || {
            format!("fixed-point residual {}", img.dist_inf(alpha))
        }),
        Err(e) => t.fail(format!("map failed at the fixed point: {e}")),
    }
    let eig = match cx.map.eigenvalues_at(alpha) {
        Ok(e) => e,
        Err(e) => {
            t.fail(format!("eigenvalues at the fixed point unavailable: {e}"));
            return t;
        }
    };
    t.check(eig.minus.abs() < 1.0 && eig.plus.abs() < 1.0, || {
        format!("eigenvalues ({}, {}) do not both contract", eig.minus, eig.plus)
    });
    if let Some(p) = cx.map.params() {
        if p.delta == 0.1 && p.mu == 2.0 {
            t.check((eig.minus + 0.110_498_756_2).abs() < 1e-9, || {
                format!("contracting eigenvalue {}", eig.minus)
            });
            t.check((eig.plus - 0.090_498_756_2).abs() < 1e-9, || {
                format!("second eigenvalue {}", eig.plus)
            });
            let j = cx.map.jacobian(alpha);
            t.check((j.trace() + 0.02).abs() < 1e-12, || format!("trace {}", j.trace()));
        }
        // The weaker eigenvalue crosses -1 exactly where mu crosses
        // 3 (1 - delta^2).
        let mu_flip = 3.0 * (1.0 - p.delta * p.delta);
        for (mu_test, attracting) in [(mu_flip - 1e-9, true), (mu_flip + 1e-9, false)] {
            let verdict = MapFamily::henon(p.delta, mu_test).ok().and_then(|m| {
                let a = m.alpha()?;
                let e = m.eigenvalues_at(a).ok()?;
                Some(e.minus.abs() < 1.0 && e.plus.abs() < 1.0)
            });
            t.check(verdict == Some(attracting), || {
                format!("at mu = {mu_test}, attraction verdict {verdict:?}")
            });
        }
        t.note("attraction scanned across the closed-form flip boundary");
    }
    t
}

fn general_hypotheses(cx: &mut Cx, n: usize) -> Tally {
    let mut t = Tally::new();
    match cx.map.apply(Point2::ORIGIN) {
        Ok(img) => t.check(img == Point2::ORIGIN, || {
            format!("origin maps to {img:?}, not itself")
        }),
        Err(e) => t.fail(format!("map failed at the origin: {e}")),
    }
    match cx.map.eigenvalues_at(Point2::ORIGIN) {
        Ok(eig) => t.check(
            matches!(Stability::classify(eig), Stability::FlipSaddle | Stability::Saddle),
            || format!("origin classifies as {:?}", Stability::classify(eig)),
        ),
        Err(e) => t.fail(format!("origin eigenvalues unavailable: {e}")),
    }
    t.check(cx.map.coupling_distance() < cx.map.delta_ref(), || {
        format!(
            "coupling distance {} is not below the reference slope {}",
            cx.map.coupling_distance(),
            cx.map.delta_ref()
        )
    });
    match cx.map.alpha() {
        Some(alpha) => match cx.map.apply(alpha) {
            Ok(img) => t.check(img.dist_inf(alpha) <= 1e-9, || {
                format!("interior fixed-point residual {}", img.dist_inf(alpha))
            }),
            Err(e) => t.fail(format!("map failed at the interior fixed point: {e}")),
        },
        None => t.fail("interior fixed point unavailable".into()),
    }
    for _ in 0..n.min(500) {
        let q = cx.sample_desk();
        match cx.map.apply(q).and_then(|v| cx.map.apply_inverse(v)) {
            Ok(back) => t.check(back.dist_inf(q) <= 1e-9 * (1.0 + q.norm_inf()), || {
                format!("round trip moved {q:?} to {back:?}")
            }),
            Err(e) => t.fail(format!("round trip failed at {q:?}: {e}")),
        }
    }
    if let Some(p) = cx.map.params() {
        // The quadratic family factors as a logistic first component plus a
        // linear coupling; spot-check that factorization.
        let logistic = ScalarMap::logistic(p.mu);
        for k in 0..100 {
            let x = -3.0 + 7.0 * k as f64 / 99.0;
            match cx.map.apply(pt(x, 0.0)) {
                Ok(img) => t.check(
                    (img.x - logistic.eval(x)).abs() <= 1e-12 * (1.0 + logistic.eval(x).abs())
                        && (img.y - p.delta * x).abs() <= 1e-12 * (1.0 + x.abs()),
                    || format!("factorization breaks at x = {x}"),
                ),
                Err(e) => t.fail(format!("map failed at ({x}, 0): {e}")),
            }
        }
        for k in 0..20 {
            let x_up = 0.02 + 0.43 * k as f64 / 19.0;
            let x_down = 0.55 + 0.43 * k as f64 / 19.0;
            t.check(logistic.deriv(x_up) > 0.0 && logistic.deriv(x_down) < 0.0, || {
                format!("first component is not unimodal near {x_up} / {x_down}")
            });
        }
    } else {
        t.note(format!(
            "coupling distance {} against slope {} sampled on {:?}",
            cx.map.coupling_distance(),
            cx.map.delta_ref(),
            cx.map.coupling_interval()
        ));
    }
    t
}

/// Hypothesis-by-hypothesis evaluation of a raw scalar pair; every violation
/// is recorded, none aborts the report.
pub(crate) fn hypotheses_for_parts(
    g: &ScalarMap,
    h: &ScalarMap,
    delta_ref: f64,
    interval: (f64, f64),
) -> Tally {
    const N: usize = 1001;
    const EXACT: f64 = 1e-12;
    let mut t = Tally::new();
    t.check(g.eval(0.0).abs() <= EXACT, || format!("g(0) = {}", g.eval(0.0)));
    t.check(g.eval(1.0).abs() <= EXACT, || format!("g(1) = {}", g.eval(1.0)));
    t.check(g.deriv(0.0) > 1.0, || format!("g'(0) = {} is not above 1", g.deriv(0.0)));
    t.check(g.deriv(1.0) < -1.0, || format!("g'(1) = {} is not below -1", g.deriv(1.0)));
    for k in 0..N {
        let x = k as f64 / (N - 1) as f64;
        let v = g.eval(x);
        t.check((0.0..1.0).contains(&v), || format!("g({x}) = {v} leaves [0, 1)"));
    }
    // Unimodality read off the derivative: exactly one sign change on [0, 1].
    let mut changes = 0;
    let mut prev = g.deriv(0.0);
    for k in 1..N {
        let d = g.deriv(k as f64 / (N - 1) as f64);
        if (prev > 0.0 && d < 0.0) || (prev < 0.0 && d > 0.0) {
            changes += 1;
        }
        if d != 0.0 {
            prev = d;
        }
    }
    t.check(changes == 1, || format!("g' changes sign {changes} times on [0, 1]"));
    // Concave outside the unit interval, sampled where the interval leaves it.
    let mut sup = f64::NEG_INFINITY;
    for k in 0..N {
        let x = interval.0 + (interval.1 - interval.0) * k as f64 / (N - 1) as f64;
        if x > 0.0 && x < 1.0 {
            continue;
        }
        sup = sup.max(g.second_deriv(x));
    }
    t.check(sup < 0.0, || format!("g'' reaches {sup} outside (0, 1)"));
    t.note(format!("g'' outside (0, 1) stays at or below {}", crate::fmt::float17(sup)));
    match interior_fixed_point_1d(g) {
        Some(xg) => {
            t.check(g.deriv(xg).abs() < 1.0, || {
                format!("interior fixed point {xg} has |g'| = {}", g.deriv(xg).abs())
            });
            for k in 1..33 {
                let start = k as f64 / 33.0;
                let mut x = start;
                let mut reached = false;
                for _ in 0..500 {
                    x = g.eval(x);
                    if (x - xg).abs() < 1e-6 {
                        reached = true;
                        break;
                    }
                }
                t.check(reached, || {
                    format!("iteration from {start} does not settle on the interior fixed point")
                });
            }
        }
        None => t.fail("no interior fixed point of the first component in (0, 1)".into()),
    }
    t.check(h.eval(0.0).abs() <= EXACT, || format!("h(0) = {}", h.eval(0.0)));
    for k in 0..N {
        let x = interval.0 + (interval.1 - interval.0) * k as f64 / (N - 1) as f64;
        t.check(h.deriv(x) > 0.0, || format!("h'({x}) = {} is not positive", h.deriv(x)));
    }
    match g.check_derivatives(interval, 101) {
        Ok(()) => t.pass(),
        Err(e) => t.fail(format!("g derivative tables inconsistent: {e}")),
    }
    match h.check_derivatives(interval, 101) {
        Ok(()) => t.pass(),
        Err(e) => t.fail(format!("h derivative tables inconsistent: {e}")),
    }
    match c2_distance_to_linear(h, delta_ref, interval, N) {
        Ok(d) => {
            t.check(d.value < delta_ref, || {
                format!("coupling distance {} is not below the slope {delta_ref}", d.value)
            });
            t.note(format!(
                "C2 distance to the linear coupling: {}",
                crate::fmt::float17(d.value)
            ));
        }
        Err(e) => t.fail(format!("coupling distance unavailable: {e}")),
    }
    t
}

/// Bisect g(x) = x on (0, 1), skipping the root pinned at 0.
fn interior_fixed_point_1d(g: &ScalarMap) -> Option<f64> {
    let r = |x: f64| g.eval(x) - x;
    let mut lo = 0.05;
    let mut hi = lo;
    let mut found = false;
    for k in 1..=200 {
        let x = 0.05 + 0.94 * k as f64 / 200.0;
        if r(hi).signum() != r(x).signum() {
            lo = hi;
            hi = x;
            found = true;
            break;
        }
        hi = x;
    }
    if !found {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if r(mid).signum() == r(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
