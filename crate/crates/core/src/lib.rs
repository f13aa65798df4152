//! Numerical toolkit for a two-parameter family of planar quadratic maps and
//! their smooth perturbations: orbit fate classification with region-certified
//! escape, stable/unstable manifolds of the saddle at the origin, basin
//! rasters with boundary extraction, and a catalog of runnable dynamical
//! checks.

pub mod basin;
pub mod error;
pub mod fmt;
pub mod manifold;
pub mod map;
pub mod orbit;
pub mod point;
pub mod regions;
pub mod scalar;
mod solve;
pub mod verify;

pub use basin::{
    estimate_k, extract_boundary, one_sided_hausdorff, points_csv, ppm_bytes, rasterize,
    undecided_fringe, write_ppm, BasinRaster, GridSpec,
};
pub use error::{Error, Result};
pub use manifold::{
    curve_c, local_segment, trace_manifold, trace_manifold_with, xbar_left, xbar_right, Branch,
    CrossingSide, CrossingSolution, ManifoldCurve, ManifoldKind, Trace, TraceOptions, TraceOutcome,
};
pub use map::{
    conjugate_flip, make_henon, EigenPair, FixedPointInfo, FixedPointScan, HenonParams, MapFamily,
    Stability,
};
pub use orbit::{
    classify_backward, classify_forward, in_filled_julia, iterate, Direction, Fate, FateKind,
    JuliaMembership, OrbitBudget, Trajectory,
};
pub use point::{Mat2, Point2};
pub use regions::{classify_region, delta_thresholds, DeltaThresholds, RegionContext, RegionTag};
pub use scalar::{c2_distance_to_linear, C2Distance, ScalarMap};
pub use verify::{
    catalog, census_periodic_orbits, check_general_hypotheses, run_all, run_check, CensusOutcome,
    CheckReport, CheckSpec, PeriodicOrbit, Verdict, CATALOG,
};
