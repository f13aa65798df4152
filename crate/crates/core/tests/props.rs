//! Randomized structural invariants: things that must hold for every valid
//! input, not just the handful of values the unit tests pin down.

use basinbound::{
    classify_forward, conjugate_flip, fmt::float17, iterate, make_henon, Direction, FateKind,
    GridSpec, MapFamily, OrbitBudget, Point2, RegionContext, RegionTag,
};
use proptest::prelude::*;

fn reference_map() -> MapFamily {
    MapFamily::henon(0.1, 2.0).unwrap()
}

const CANONICAL: [RegionTag; 9] = [
    RegionTag::WDelta,
    RegionTag::BetaCone,
    RegionTag::RightWedge,
    RegionTag::ADelta,
    RegionTag::StripS,
    RegionTag::BRect,
    RegionTag::Q4RightWedge,
    RegionTag::Q4DeepStrip,
    RegionTag::Polydisk,
];

proptest! {
    #[test]
    fn inverse_round_trips_everywhere(x in -100.0..100.0f64, y in -100.0..100.0f64) {
        let m = reference_map();
        let p = Point2 { x, y };
        let tol = 1e-9 * (1.0 + p.norm_inf());
        let back = m.apply_inverse(m.apply(p).unwrap()).unwrap();
        prop_assert!(back.dist_inf(p) <= tol, "forward-inverse drift {}", back.dist_inf(p));
        let fwd = m.apply(m.apply_inverse(p).unwrap()).unwrap();
        prop_assert!(fwd.dist_inf(p) <= tol, "inverse-forward drift {}", fwd.dist_inf(p));
    }

    #[test]
    fn eigenvalues_straddle_zero_and_match_the_jacobian(
        x in -10.0..10.0f64,
        y in -10.0..10.0f64,
        delta in 0.01..1.2f64,
        mu in 1.01..2.99f64,
    ) {
        // det J = -delta^2 < 0 forces one eigenvalue on each side of zero.
        let m = MapFamily::henon(delta, mu).unwrap();
        let p = Point2 { x, y };
        let e = m.eigenvalues_at(p).unwrap();
        let j = m.jacobian(p);
        prop_assert!(e.minus < 0.0 && e.plus > 0.0);
        let det = j.det();
        let tr = j.trace();
        prop_assert!((e.minus * e.plus - det).abs() <= 1e-10 * (1.0 + det.abs()));
        prop_assert!((e.minus + e.plus - tr).abs() <= 1e-10 * (1.0 + tr.abs()));
    }

    #[test]
    fn coupling_sign_flip_conjugates_bitwise(
        x in -50.0..50.0f64,
        y in -50.0..50.0f64,
        delta in 0.01..1.0f64,
        mu in 1.01..2.99f64,
    ) {
        let plus = MapFamily::henon(delta, mu).unwrap();
        let minus = MapFamily::henon(-delta, mu).unwrap();
        let p = Point2 { x, y };
        let lhs = minus.apply(p).unwrap();
        let rhs = conjugate_flip(plus.apply(conjugate_flip(p)).unwrap());
        prop_assert_eq!(lhs.x.to_bits(), rhs.x.to_bits());
        prop_assert_eq!(lhs.y.to_bits(), rhs.y.to_bits());
    }

    #[test]
    fn tall_region_absorbs_upward_scaling(x in -20.0..20.0f64, sign in 0..2, t in 1.0..100.0f64) {
        // Membership depends on |y| >= 2*delta and |y| >= delta*|x|; scaling a
        // member by t >= 1 preserves the second and can only help the first.
        let params = make_henon(0.1, 2.0).unwrap();
        let ctx = RegionContext::new(params).unwrap();
        // A hair above the boundary ray: exact-boundary membership is 1-ulp
        // sensitive to whether the scaling multiplies before or after delta.
        let floor = (2.0 * 0.1f64).max(0.1 * x.abs()) * (1.0 + 1e-9);
        let y = if sign == 0 { floor } else { -floor };
        let p = Point2 { x, y };
        prop_assert!(ctx.contains(RegionTag::WDelta, p));
        let q = Point2 { x: t * x, y: t * y };
        prop_assert!(ctx.contains(RegionTag::WDelta, q));
    }

    #[test]
    fn open_third_quadrant_sits_in_the_left_cone(
        x in -1000.0..-1e-9f64,
        y in -1000.0..0.0f64,
    ) {
        // x < 0 <= -beta*y whenever y <= 0, so the whole quadrant qualifies.
        let ctx = RegionContext::new(make_henon(0.1, 2.0).unwrap()).unwrap();
        let p = Point2 { x, y };
        prop_assert!(ctx.contains(RegionTag::BetaCone, p));
    }

    #[test]
    fn left_cone_points_escape_forward(y in -20.0..20.0f64, off in 1e-6..10.0f64) {
        let m = reference_map();
        let ctx = RegionContext::new(*m.params().unwrap()).unwrap();
        let x = (-ctx.thresholds().beta * y).min(0.0) - off;
        let p = Point2 { x, y };
        prop_assert!(ctx.contains(RegionTag::BetaCone, p));
        let fate = classify_forward(&m, p, &OrbitBudget::default_for(&m));
        prop_assert_eq!(fate.kind, FateKind::ToInfinity);
    }

    #[test]
    fn classification_lists_exactly_the_containing_regions_in_order(
        x in -30.0..30.0f64,
        y in -30.0..30.0f64,
    ) {
        let ctx = RegionContext::with_polydisk(make_henon(0.1, 2.0).unwrap(), 0.3).unwrap();
        let p = Point2 { x, y };
        let tags = ctx.classify(p);
        prop_assert!(!tags.is_empty());
        if tags != vec![RegionTag::Other] {
            let rank = |t: RegionTag| CANONICAL.iter().position(|c| *c == t).unwrap();
            prop_assert!(tags.windows(2).all(|w| rank(w[0]) < rank(w[1])), "{tags:?}");
            for tag in CANONICAL {
                prop_assert_eq!(tags.contains(&tag), ctx.contains(tag, p));
            }
        }
    }

    #[test]
    fn trajectories_chain_by_single_applications(
        x in -2.0..2.0f64,
        y in -1.0..1.0f64,
        steps in 0usize..12,
        backward in proptest::bool::ANY,
    ) {
        let m = reference_map();
        let dir = if backward { Direction::Backward } else { Direction::Forward };
        let tr = iterate(&m, Point2 { x, y }, steps, dir);
        prop_assert!(!tr.points.is_empty());
        prop_assert!(tr.points.len() <= steps + 1);
        if !tr.truncated_by_blowup {
            prop_assert_eq!(tr.points.len(), steps + 1);
        }
        for w in tr.points.windows(2) {
            let next = match dir {
                Direction::Forward => m.apply(w[0]).unwrap(),
                Direction::Backward => m.apply_inverse(w[0]).unwrap(),
            };
            prop_assert_eq!(next.x.to_bits(), w[1].x.to_bits());
            prop_assert_eq!(next.y.to_bits(), w[1].y.to_bits());
        }
    }

    #[test]
    fn float17_round_trips_every_finite_double(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let back: f64 = float17(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn grid_centers_stay_strictly_inside_and_index_is_a_bijection(
        nx in 1usize..32,
        ny in 1usize..32,
        x0 in -5.0..0.0f64,
        w in 0.1..10.0f64,
        y0 in -5.0..0.0f64,
        h in 0.1..10.0f64,
    ) {
        let g = GridSpec::new(nx, ny, x0, x0 + w, y0, y0 + h).unwrap();
        let mut seen = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = g.cell_center(i, j);
                prop_assert!(c.x > x0 && c.x < x0 + w && c.y > y0 && c.y < y0 + h);
                let k = g.index(i, j);
                prop_assert!(k < seen.len());
                prop_assert!(!seen[k]);
                seen[k] = true;
            }
        }
    }
}
