//! Periodic orbit census by Newton iteration from a grid of starts.

use crate::error::{Error, Result};
use crate::map::newton_periodic;
use crate::map::MapFamily;
use crate::point::{pt, Point2};

/// Accept a Newton root only below this residual.
const RESIDUAL_TOL: f64 = 1e-10;
/// Two cycles closer than this share an orbit.
const ORBIT_DEDUP: f64 = 1e-6;
/// Returning within this of the start under a proper divisor of the period
/// demotes the candidate to the smaller period.
const MINIMAL_PERIOD_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    /// Minimal period.
    pub period: usize,
    /// The full cycle, rotated so the lexicographically smallest point leads.
    pub points: Vec<Point2>,
    /// Max-norm Newton residual at the representative.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct CensusOutcome {
    pub orbits: Vec<PeriodicOrbit>,
    /// Newton starts that never converged, across all periods. Informational:
    /// most starts sit in escaping territory and are expected to fail.
    pub newton_failures: usize,
}

/// Find the periodic orbits of minimal period 1..=period_max whose points lie
/// inside `bounds`, seeding Newton from 4 staggered starts per grid cell.
/// Orbits are sorted by period, then by representative. Deterministic: no
/// randomness, fixed scan order.
pub fn census_periodic_orbits(
    map: &MapFamily,
    period_max: usize,
    bounds: (f64, f64, f64, f64),
    grid_per_axis: usize,
) -> Result<CensusOutcome> {
    let (x0, x1, y0, y1) = bounds;
    if period_max == 0 {
        return Err(Error::InvalidParams("period_max must be at least 1".into()));
    }
    if grid_per_axis == 0 {
        return Err(Error::InvalidParams("grid_per_axis must be at least 1".into()));
    }
    if !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite() && x0 < x1 && y0 < y1)
    {
        return Err(Error::InvalidParams(format!(
            "census bounds [{x0}, {x1}] x [{y0}, {y1}] are not an increasing finite box"
        )));
    }
    let g = grid_per_axis as f64;
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut newton_failures = 0usize;
    for n in 1..=period_max {
        let mut cycles: Vec<(Vec<Point2>, f64)> = Vec::new();
        for j in 0..grid_per_axis {
            for i in 0..grid_per_axis {
                for (ox, oy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                    let start = pt(
                        x0 + (i as f64 + ox) * (x1 - x0) / g,
                        y0 + (j as f64 + oy) * (y1 - y0) / g,
                    );
                    let Some((q, residual)) = newton_periodic(map, n, start) else {
                        newton_failures += 1;
                        continue;
                    };
                    if residual > RESIDUAL_TOL {
                        continue;
                    }
                    if q.x < x0 - 1e-9 || q.x > x1 + 1e-9 || q.y < y0 - 1e-9 || q.y > y1 + 1e-9 {
                        continue;
                    }
                    if !minimal_period_is(map, q, n) {
                        continue;
                    }
                    let Some(cycle) = build_cycle(map, q, n) else { continue };
                    let dup = cycles.iter().any(|(c, _)| {
                        c.iter().any(|a| cycle.iter().any(|b| a.dist_inf(*b) < ORBIT_DEDUP))
                    });
                    if dup {
                        continue;
                    }
                    cycles.push((canonical_rotation(cycle), residual));
                }
            }
        }
        cycles.sort_by(|(a, _), (b, _)| {
            (a[0].x, a[0].y).partial_cmp(&(b[0].x, b[0].y)).unwrap()
        });
        for (points, residual) in cycles {
            orbits.push(PeriodicOrbit { period: n, points, residual });
        }
    }
    Ok(CensusOutcome { orbits, newton_failures })
}

fn minimal_period_is(map: &MapFamily, q: Point2, n: usize) -> bool {
    let mut cur = q;
    for d in 1..n {
        cur = match map.apply(cur) {
            Ok(p) => p,
            Err(_) => return false,
        };
        if n.is_multiple_of(d) && cur.dist_inf(q) < MINIMAL_PERIOD_TOL {
            return false;
        }
    }
    true
}

fn build_cycle(map: &MapFamily, q: Point2, n: usize) -> Option<Vec<Point2>> {
    let mut cycle = Vec::with_capacity(n);
    let mut cur = q;
    for _ in 0..n {
        cycle.push(cur);
        cur = map.apply(cur).ok()?;
    }
    Some(cycle)
}

fn canonical_rotation(cycle: Vec<Point2>) -> Vec<Point2> {
    let lead = cycle
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut rotated = Vec::with_capacity(cycle.len());
    rotated.extend_from_slice(&cycle[lead..]);
    rotated.extend_from_slice(&cycle[..lead]);
    rotated
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarMap;

    fn map() -> MapFamily {
        MapFamily::henon(0.1, 2.0).unwrap()
    }

    #[test]
    fn fixed_point_census_matches_the_closed_form() {
        let m = map();
        let out = census_periodic_orbits(&m, 1, (-3.0, 4.0, -3.0, 3.0), 32).unwrap();
        assert_eq!(out.orbits.len(), 2);
        let known = m.fixed_points().unwrap();
        for (orbit, fp) in out.orbits.iter().zip(&known) {
            assert_eq!(orbit.period, 1);
            assert!(orbit.residual <= 1e-10);
            assert!(orbit.points[0].dist_inf(fp.location) < 1e-9);
        }
        // The period-1 system is globally quadratic; every start converges.
        assert_eq!(out.newton_failures, 0);
    }

    #[test]
    fn far_starts_fail_newton_at_high_period_and_are_counted() {
        // By period 6 the far corners of the box blow past the orbit guard
        // before the composition completes; those starts are tallied, and no
        // spurious high-period orbit appears.
        let out = census_periodic_orbits(&map(), 6, (-3.0, 4.0, -3.0, 3.0), 8).unwrap();
        assert!(out.newton_failures > 0);
        assert!(out.orbits.iter().all(|o| o.period == 1));
    }

    #[test]
    fn no_genuine_period_two_orbit_at_these_parameters() {
        // The interior fixed point is attracting here, well before the flip;
        // period 2 contributes nothing beyond the fixed points themselves.
        let out = census_periodic_orbits(&map(), 2, (-3.0, 4.0, -3.0, 3.0), 32).unwrap();
        assert_eq!(out.orbits.len(), 2);
        assert!(out.orbits.iter().all(|o| o.period == 1));
    }

    #[test]
    fn refinement_does_not_add_orbits() {
        let m = map();
        let coarse = census_periodic_orbits(&m, 2, (-3.0, 4.0, -3.0, 3.0), 16).unwrap().orbits;
        let fine = census_periodic_orbits(&m, 2, (-3.0, 4.0, -3.0, 3.0), 32).unwrap().orbits;
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            assert_eq!(a.period, b.period);
            assert!(a.points[0].dist_inf(b.points[0]) < 1e-6);
        }
    }

    #[test]
    fn bounds_filter_excludes_outside_orbits() {
        // A box around the origin only: the interior fixed point drops out.
        let orbits = census_periodic_orbits(&map(), 1, (-0.3, 0.3, -0.3, 0.3), 16).unwrap().orbits;
        assert_eq!(orbits.len(), 1);
        assert!(orbits[0].points[0].norm_inf() < 1e-9);
    }

    #[test]
    fn census_works_on_the_perturbed_family() {
        let m = MapFamily::general(
            ScalarMap::logistic(2.0),
            ScalarMap::linear_plus_sine(0.1, 0.001),
            0.1,
        )
        .unwrap();
        let orbits = census_periodic_orbits(&m, 1, (-3.0, 4.0, -3.0, 3.0), 32).unwrap().orbits;
        assert_eq!(orbits.len(), 2);
        for orbit in &orbits {
            let image = m.apply(orbit.points[0]).unwrap();
            assert!(image.dist_inf(orbit.points[0]) < 1e-9);
        }
        assert!(orbits[0].points[0].norm_inf() < 1e-9);
        let alpha = m.alpha().unwrap();
        assert!(orbits[1].points[0].dist_inf(alpha) < 1e-6);
    }
}
