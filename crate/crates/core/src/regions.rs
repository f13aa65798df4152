//! Membership tests for the invariant regions of the quadratic family, and
//! the parameter thresholds that decide when each region certifies escape.
//!
//! All inequalities are closed exactly as stated here; boundary points are
//! members. A point may lie in several regions at once and classification
//! reports every one of them.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::HenonParams;
use crate::point::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    /// Tall wedge |y| >= 2 delta, |y| >= delta |x|: backward orbits there
    /// escape with strictly growing |y|.
    WDelta,
    /// Third-quadrant cone x <= min(-beta y, 0), minus the origin: forward
    /// orbits escape to the left.
    BetaCone,
    /// x >= 2 with 0 <= y <= delta x: forward orbits escape to the right.
    RightWedge,
    /// [0, 1] x [0, 2 delta] minus the origin: forward orbits converge to the
    /// interior fixed point.
    ADelta,
    /// Open strip 0 < y < 2 delta.
    StripS,
    /// [1, 2] x [0, 2 delta].
    BRect,
    /// Fourth-quadrant wedge x >= 2, y <= 0.
    Q4RightWedge,
    /// 0 <= x <= 2 at depth y <= -delta0.
    Q4DeepStrip,
    /// Square of radius r around the interior fixed point; only reported when
    /// the classification context carries an explicit radius.
    Polydisk,
    /// None of the above.
    Other,
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionTag::WDelta => "WDelta",
            RegionTag::BetaCone => "BetaCone",
            RegionTag::RightWedge => "RightWedge",
            RegionTag::ADelta => "ADelta",
            RegionTag::StripS => "StripS",
            RegionTag::BRect => "BRect",
            RegionTag::Q4RightWedge => "Q4RightWedge",
            RegionTag::Q4DeepStrip => "Q4DeepStrip",
            RegionTag::Polydisk => "Polydisk",
            RegionTag::Other => "Other",
        })
    }
}

/// Canonical reporting order.
const ALL_TAGS: [RegionTag; 9] = [
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

/// Parameter thresholds gating the escape certificates. Each bound is the
/// largest coupling the corresponding region argument tolerates; beta and
/// delta0 are the geometric constants the regions themselves use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaThresholds {
    /// Backward escape of the tall wedge holds for delta < max(mu - 1, 1).
    pub lemma4_bound: f64,
    /// Right-wedge forward escape holds for delta < sqrt(mu - 1).
    pub lemma6_bound: f64,
    /// Fourth-quadrant right-wedge escape holds for delta < sqrt(3 mu (mu - 1)).
    pub prop16i_bound: f64,
    /// Cone slope delta / (mu - 1).
    pub beta: f64,
    /// Depth (2 delta^2 / (mu - 1) + 1) / delta below which the deep strip starts.
    pub delta0: f64,
}

/// Thresholds for parameters with 1 < mu < 3 and delta > 0; outside that
/// range the defining expressions lose their meaning.
pub fn delta_thresholds(params: &HenonParams) -> Result<DeltaThresholds> {
    let (d, mu) = (params.delta, params.mu);
    if !(mu > 1.0 && mu < 3.0) {
        return Err(Error::InvalidParams(format!("thresholds need 1 < mu < 3, got mu = {mu}")));
    }
    if d <= 0.0 {
        return Err(Error::InvalidParams(format!("thresholds need delta > 0, got {d}")));
    }
    Ok(DeltaThresholds {
        lemma4_bound: (mu - 1.0).max(1.0),
        lemma6_bound: (mu - 1.0).sqrt(),
        prop16i_bound: (3.0 * mu * (mu - 1.0)).sqrt(),
        beta: d / (mu - 1.0),
        delta0: (2.0 * d * d / (mu - 1.0) + 1.0) / d,
    })
}

/// Everything needed to test region membership: the parameters, their derived
/// thresholds, and optionally a polydisk around the interior fixed point.
#[derive(Debug, Clone, Copy)]
pub struct RegionContext {
    params: HenonParams,
    thresholds: DeltaThresholds,
    polydisk: Option<(Point2, f64)>,
}

impl RegionContext {
    pub fn new(params: HenonParams) -> Result<Self> {
        let thresholds = delta_thresholds(&params)?;
        Ok(Self { params, thresholds, polydisk: None })
    }

    /// Same context with the polydisk of radius `r` around the interior fixed
    /// point included in classification.
    pub fn with_polydisk(params: HenonParams, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidParams(format!("polydisk radius {r} must be positive")));
        }
        let mut ctx = Self::new(params)?;
        let x = 1.0 - (1.0 - params.delta * params.delta) / params.mu;
        ctx.polydisk = Some((Point2 { x, y: params.delta * x }, r));
        Ok(ctx)
    }

    pub fn params(&self) -> &HenonParams {
        &self.params
    }

    pub fn thresholds(&self) -> &DeltaThresholds {
        &self.thresholds
    }

    pub fn contains(&self, tag: RegionTag, p: Point2) -> bool {
        let d = self.params.delta;
        let (x, y) = (p.x, p.y);
        match tag {
            RegionTag::WDelta => y.abs() >= 2.0 * d && y.abs() >= d * x.abs(),
            RegionTag::BetaCone => {
                x <= 0.0 && x <= -self.thresholds.beta * y && !(x == 0.0 && y == 0.0)
            }
            RegionTag::RightWedge => x >= 2.0 && y >= 0.0 && y <= d * x,
            RegionTag::ADelta => {
                (0.0..=1.0).contains(&x) && (0.0..=2.0 * d).contains(&y) && !(x == 0.0 && y == 0.0)
            }
            RegionTag::StripS => y > 0.0 && y < 2.0 * d,
            RegionTag::BRect => (1.0..=2.0).contains(&x) && (0.0..=2.0 * d).contains(&y),
            RegionTag::Q4RightWedge => x >= 2.0 && y <= 0.0,
            RegionTag::Q4DeepStrip => (0.0..=2.0).contains(&x) && y <= -self.thresholds.delta0,
            RegionTag::Polydisk => match self.polydisk {
                Some((c, r)) => (x - c.x).abs() <= r && (y - c.y).abs() <= r,
                None => false,
            },
            RegionTag::Other => ALL_TAGS.iter().all(|t| !self.contains(*t, p)),
        }
    }

    /// Every region containing `p`, in canonical order; [Other] when none does.
    pub fn classify(&self, p: Point2) -> Vec<RegionTag> {
        let tags: Vec<RegionTag> =
            ALL_TAGS.iter().copied().filter(|t| self.contains(*t, p)).collect();
        if tags.is_empty() {
            vec![RegionTag::Other]
        } else {
            tags
        }
    }
}

pub fn classify_region(ctx: &RegionContext, p: Point2) -> Vec<RegionTag> {
    ctx.classify(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::make_henon;
    use crate::point::pt;
    use approx::assert_abs_diff_eq;

    fn ctx(delta: f64, mu: f64) -> RegionContext {
        RegionContext::new(make_henon(delta, mu).unwrap()).unwrap()
    }

    #[test]
    fn thresholds_at_reference_parameters() {
        let t = *ctx(0.1, 2.0).thresholds();
        assert_eq!(t.lemma4_bound, 1.0);
        assert_eq!(t.lemma6_bound, 1.0);
        assert_abs_diff_eq!(t.prop16i_bound, 6.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.beta, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(t.delta0, 10.2, epsilon = 1e-12);
    }

    #[test]
    fn thresholds_at_low_mu() {
        let t = *ctx(0.1, 1.5).thresholds();
        assert_eq!(t.lemma4_bound, 1.0);
        assert_abs_diff_eq!(t.lemma6_bound, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.beta, 0.2, epsilon = 1e-15);
    }

    #[test]
    fn thresholds_reject_parameters_outside_range() {
        assert!(delta_thresholds(&make_henon(0.1, 3.5).unwrap()).is_err());
        assert!(delta_thresholds(&make_henon(-0.1, 2.0).unwrap()).is_err());
    }

    #[test]
    fn classification_reports_every_containing_region() {
        let c = ctx(0.1, 2.0);
        assert_eq!(c.classify(pt(0.5, 0.1)), vec![RegionTag::ADelta, RegionTag::StripS]);
        assert_eq!(c.classify(pt(-0.3, 5.0)), vec![RegionTag::WDelta]);
        assert_eq!(c.classify(pt(-0.5, 1.0)), vec![RegionTag::WDelta, RegionTag::BetaCone]);
        assert_eq!(c.classify(pt(3.0, 0.1)), vec![RegionTag::RightWedge, RegionTag::StripS]);
        assert_eq!(c.classify(pt(3.0, -0.1)), vec![RegionTag::Q4RightWedge]);
        assert_eq!(c.classify(pt(3.0, -0.5)), vec![RegionTag::WDelta, RegionTag::Q4RightWedge]);
        // Deep fourth-quadrant points are also in the tall wedge; both are reported.
        assert_eq!(c.classify(pt(1.0, -11.0)), vec![RegionTag::WDelta, RegionTag::Q4DeepStrip]);
        assert_eq!(c.classify(pt(0.5, -3.0)), vec![RegionTag::WDelta]);
        assert_eq!(c.classify(Point2::ORIGIN), vec![RegionTag::Other]);
        assert_eq!(c.classify(pt(1.5, 0.05)), vec![RegionTag::StripS, RegionTag::BRect]);
    }

    #[test]
    fn boundaries_are_members() {
        let c = ctx(0.1, 2.0);
        // Top edge of the box is closed, so it belongs to ADelta but not the
        // open strip; it is also the closed lower edge of the tall region.
        assert_eq!(c.classify(pt(0.5, 0.2)), vec![RegionTag::WDelta, RegionTag::ADelta]);
        // Cone boundary through the origin, origin itself excluded.
        assert!(c.contains(RegionTag::BetaCone, pt(-0.1, 1.0)));
        assert!(!c.contains(RegionTag::BetaCone, Point2::ORIGIN));
        // Wedge lower edge.
        assert!(c.contains(RegionTag::RightWedge, pt(2.0, 0.0)));
        assert!(c.contains(RegionTag::Q4RightWedge, pt(2.0, 0.0)));
    }

    #[test]
    fn polydisk_only_reported_with_explicit_radius() {
        let params = make_henon(0.1, 2.0).unwrap();
        let plain = RegionContext::new(params).unwrap();
        let with = RegionContext::with_polydisk(params, 0.4).unwrap();
        let p = pt(0.6, 0.15);
        assert_eq!(plain.classify(p), vec![RegionTag::ADelta, RegionTag::StripS]);
        assert_eq!(
            with.classify(p),
            vec![RegionTag::ADelta, RegionTag::StripS, RegionTag::Polydisk]
        );
        assert!(RegionContext::with_polydisk(params, 0.0).is_err());
    }
}
