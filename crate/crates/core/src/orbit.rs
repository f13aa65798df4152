//! Orbit iteration and fate classification under an explicit budget.
//!
//! A fate is a budgeted verdict, not a theorem: convergence means the orbit
//! sat within `attract_tol` of a fixed point for `confirm_steps` consecutive
//! iterates, and escape means either a certified region was entered or the
//! max norm exceeded `escape_norm`. Region certificates are only consulted
//! for the quadratic family, and each one only when the coupling is below the
//! threshold its argument needs.

use crate::fmt::float17;
use crate::map::MapFamily;
use crate::point::Point2;
use crate::regions::{RegionContext, RegionTag};

pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_ATTRACT_TOL: f64 = 1e-9;
pub const DEFAULT_CONFIRM_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitBudget {
    pub max_iter: usize,
    /// Max norm beyond which an orbit counts as escaped.
    pub escape_norm: f64,
    /// Max-norm distance at which an iterate counts as sitting on a fixed point.
    pub attract_tol: f64,
    /// Consecutive in-tolerance iterates needed to call convergence.
    pub confirm_steps: usize,
}

impl OrbitBudget {
    /// Defaults keyed to the coupling: escape triggers beyond max(10, 3/|delta|),
    /// far enough out that the quadratic term dominates the coupling term.
    pub fn default_for(map: &MapFamily) -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            escape_norm: (3.0 / map.delta_ref().abs()).max(10.0),
            attract_tol: DEFAULT_ATTRACT_TOL,
            confirm_steps: DEFAULT_CONFIRM_STEPS,
        }
    }

    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_escape_norm(mut self, r: f64) -> Self {
        self.escape_norm = r;
        self
    }

    pub fn with_attract_tol(mut self, tol: f64) -> Self {
        self.attract_tol = tol;
        self
    }

    pub fn with_confirm_steps(mut self, k: usize) -> Self {
        self.confirm_steps = k;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FateKind {
    ToOrigin,
    ToAlpha,
    ToInfinity,
    Undecided,
}

impl std::fmt::Display for FateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FateKind::ToOrigin => "ToOrigin",
            FateKind::ToAlpha => "ToAlpha",
            FateKind::ToInfinity => "ToInfinity",
            FateKind::Undecided => "Undecided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fate {
    pub kind: FateKind,
    /// For convergence: the first iterate of the confirmed run, so a point
    /// sitting exactly on a fixed point reports 0. For escape: the iterate at
    /// which the certificate or norm test fired.
    pub iterations_used: usize,
    /// The region that certified escape, when one did; norm-based escape and
    /// convergence carry no witness.
    pub witness: Option<RegionTag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<Point2>,
    pub direction: Direction,
    /// True when iteration stopped early because a step overflowed; the
    /// overflowed point is not included.
    pub truncated_by_blowup: bool,
}

impl Trajectory {
    /// Step index, point pairs with backward steps counted negatively.
    pub fn indexed(&self) -> impl Iterator<Item = (i64, Point2)> + '_ {
        let sign = match self.direction {
            Direction::Forward => 1i64,
            Direction::Backward => -1i64,
        };
        self.points.iter().enumerate().map(move |(k, p)| (sign * k as i64, *p))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,y\n");
        for (n, p) in self.indexed() {
            out.push_str(&format!("{n},{},{}\n", float17(p.x), float17(p.y)));
        }
        out
    }
}

/// Record `steps` iterates (or fewer on blowup) starting from `start`.
pub fn iterate(map: &MapFamily, start: Point2, steps: usize, direction: Direction) -> Trajectory {
    let mut points = Vec::with_capacity(steps + 1);
    let mut truncated = false;
    if start.is_finite() {
        points.push(start);
        let mut current = start;
        for _ in 0..steps {
            let stepped = match direction {
                Direction::Forward => map.apply(current),
                Direction::Backward => map.apply_inverse(current),
            };
            match stepped {
                Ok(q) => {
                    points.push(q);
                    current = q;
                }
                Err(_) => {
                    truncated = true;
                    break;
                }
            }
        }
    } else {
        truncated = true;
    }
    Trajectory { points, direction, truncated_by_blowup: truncated }
}

pub fn classify_forward(map: &MapFamily, start: Point2, budget: &OrbitBudget) -> Fate {
    classify(map, start, budget, Direction::Forward)
}

pub fn classify_backward(map: &MapFamily, start: Point2, budget: &OrbitBudget) -> Fate {
    classify(map, start, budget, Direction::Backward)
}

/// Escape regions whose argument applies in the given direction at these
/// parameters. Order is the order they are tested in, so the first containing
/// region becomes the witness.
fn certificates(ctx: &RegionContext, direction: Direction) -> Vec<RegionTag> {
    let t = ctx.thresholds();
    let d = ctx.params().delta;
    match direction {
        Direction::Forward => {
            let mut v = vec![RegionTag::BetaCone];
            if d < t.lemma6_bound {
                v.push(RegionTag::RightWedge);
            }
            if d < t.prop16i_bound {
                v.push(RegionTag::Q4RightWedge);
            }
            if d <= 1.0 {
                v.push(RegionTag::Q4DeepStrip);
            }
            v
        }
        Direction::Backward => {
            if d < t.lemma4_bound {
                vec![RegionTag::WDelta]
            } else {
                Vec::new()
            }
        }
    }
}

fn classify(map: &MapFamily, start: Point2, budget: &OrbitBudget, direction: Direction) -> Fate {
    let confirm = budget.confirm_steps.max(1);
    let alpha = map.alpha();
    let ctx = map.params().and_then(|p| RegionContext::new(*p).ok());
    let certs = ctx.as_ref().map(|c| certificates(c, direction)).unwrap_or_default();
    let mut current = start;
    let mut streak_origin = 0usize;
    let mut streak_alpha = 0usize;
    for n in 0..=budget.max_iter {
        let near_origin = current.dist_inf(Point2::ORIGIN) <= budget.attract_tol;
        let near_alpha = alpha.is_some_and(|a| current.dist_inf(a) <= budget.attract_tol);
        streak_origin = if near_origin { streak_origin + 1 } else { 0 };
        streak_alpha = if near_alpha { streak_alpha + 1 } else { 0 };
        if streak_origin >= confirm {
            return Fate { kind: FateKind::ToOrigin, iterations_used: n + 1 - confirm, witness: None };
        }
        if streak_alpha >= confirm {
            return Fate { kind: FateKind::ToAlpha, iterations_used: n + 1 - confirm, witness: None };
        }
        // An iterate parked on a fixed point is never simultaneously tested
        // for escape; the cone through the origin touches (0, 0) itself.
        if !near_origin && !near_alpha {
            if let Some(c) = &ctx {
                if let Some(tag) = certs.iter().copied().find(|t| c.contains(*t, current)) {
                    return Fate { kind: FateKind::ToInfinity, iterations_used: n, witness: Some(tag) };
                }
            }
            if current.norm_inf() > budget.escape_norm {
                return Fate { kind: FateKind::ToInfinity, iterations_used: n, witness: None };
            }
        }
        if n == budget.max_iter {
            break;
        }
        let stepped = match direction {
            Direction::Forward => map.apply(current),
            Direction::Backward => map.apply_inverse(current),
        };
        match stepped {
            Ok(q) => current = q,
            // Overflow is the strongest escape signal there is.
            Err(_) => {
                return Fate { kind: FateKind::ToInfinity, iterations_used: n + 1, witness: None }
            }
        }
    }
    Fate { kind: FateKind::Undecided, iterations_used: budget.max_iter, witness: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JuliaMembership {
    Yes,
    No,
    Undecided,
}

/// Membership in the filled invariant set: No as soon as either direction
/// escapes, Yes only when both directions confirm convergence to a fixed
/// point, Undecided otherwise.
pub fn in_filled_julia(map: &MapFamily, p: Point2, budget: &OrbitBudget) -> JuliaMembership {
    let converged =
        |f: &Fate| matches!(f.kind, FateKind::ToOrigin | FateKind::ToAlpha);
    let fwd = classify_forward(map, p, budget);
    if fwd.kind == FateKind::ToInfinity {
        return JuliaMembership::No;
    }
    let bwd = classify_backward(map, p, budget);
    if bwd.kind == FateKind::ToInfinity {
        return JuliaMembership::No;
    }
    if converged(&fwd) && converged(&bwd) {
        JuliaMembership::Yes
    } else {
        JuliaMembership::Undecided
    }
}
