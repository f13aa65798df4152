//! A runnable catalog of the dynamical claims the rest of the crate is built
//! on: certified escape regions, contraction near the interior fixed point,
//! the crossing structure of the basin boundary, the periodic census, and the
//! structural identities of the family. Each check samples its own domain,
//! reports pass/fail counts with capped failure details, and never weakens a
//! tolerance to get green.

mod census;
mod checks;

pub use census::{census_periodic_orbits, CensusOutcome, PeriodicOrbit};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::MapFamily;

/// Cap on stored failure details per report; the count keeps the true total.
pub const MAX_FAILURE_DETAILS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub params: String,
    pub samples: usize,
    pub passes: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
    pub verdict: Verdict,
    pub notes: String,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub id: &'static str,
    pub summary: &'static str,
    /// True for checks that need the quadratic family's closed-form structure
    /// (regions, crossings, parameter thresholds); they report Inapplicable
    /// on a general map.
    pub quadratic_only: bool,
}

pub const CATALOG: [CheckSpec; 22] = [
    CheckSpec {
        id: "lemma4_wdelta_backward_escape",
        summary: "backward orbits escape from the wide horizontal region",
        quadratic_only: true,
    },
    CheckSpec {
        id: "lemma5_beta_cone_forward_escape",
        summary: "the left cone is forward invariant and escapes",
        quadratic_only: true,
    },
    CheckSpec {
        id: "lemma6_right_wedge",
        summary: "forward orbits escape from the right wedge",
        quadratic_only: true,
    },
    CheckSpec {
        id: "prop7_polydisk_contraction",
        summary: "the map contracts square disks around the interior fixed point",
        quadratic_only: true,
    },
    CheckSpec {
        id: "cor8_vertical_slab",
        summary: "the strip slab over the interior fixed point falls into the disk",
        quadratic_only: true,
    },
    CheckSpec {
        id: "prop9_a_delta_to_alpha",
        summary: "the unit strip box converges to the interior fixed point",
        quadratic_only: true,
    },
    CheckSpec {
        id: "thm10_left_crossing",
        summary: "one fate crossing per height on the left bracket",
        quadratic_only: true,
    },
    CheckSpec {
        id: "thm12_right_crossing",
        summary: "one fate crossing per height on the right bracket",
        quadratic_only: true,
    },
    CheckSpec {
        id: "prop13_strip_trichotomy",
        summary: "escape, converge, escape across each strip height",
        quadratic_only: true,
    },
    CheckSpec {
        id: "prop16i_q4_right_wedge",
        summary: "forward orbits escape from the fourth-quadrant wedge",
        quadratic_only: true,
    },
    CheckSpec {
        id: "prop16ii_q4_deep_strip",
        summary: "forward orbits escape from the deep fourth-quadrant strip",
        quadratic_only: true,
    },
    CheckSpec {
        id: "prop18_lower_half_trichotomy",
        summary: "below the axis the boundary abscissas sit on the connecting curve",
        quadratic_only: true,
    },
    CheckSpec {
        id: "lemma17_curve_c_split",
        summary: "the connecting curve separates convergence from escape",
        quadratic_only: true,
    },
    CheckSpec {
        id: "lemma19_periodic_census",
        summary: "the periodic census finds exactly the two fixed points",
        quadratic_only: false,
    },
    CheckSpec {
        id: "lemma19_boundary_is_stable_set",
        summary: "the rasterized basin boundary tracks the stable manifold",
        quadratic_only: false,
    },
    CheckSpec {
        id: "lemma19_stable_set_backward_escape",
        summary: "stable-manifold points escape backward",
        quadratic_only: false,
    },
    CheckSpec {
        id: "lemma21_k_characterization",
        summary: "bounded-orbit points ride the unstable arm into the basin",
        quadratic_only: false,
    },
    CheckSpec {
        id: "conjugacy_flip",
        summary: "negating the coupling conjugates the map by a vertical flip",
        quadratic_only: true,
    },
    CheckSpec {
        id: "flip_saddle_origin",
        summary: "the origin is a flip saddle with the stated eigenvalue identities",
        quadratic_only: false,
    },
    CheckSpec {
        id: "eigen_thresholds_origin",
        summary: "the derived parameter thresholds match their defining formulas",
        quadratic_only: true,
    },
    CheckSpec {
        id: "alpha_attracting_threshold",
        summary: "the interior fixed point attracts below the flip threshold",
        quadratic_only: false,
    },
    CheckSpec {
        id: "general_hypotheses",
        summary: "the map satisfies the structural hypotheses the toolkit assumes",
        quadratic_only: false,
    },
];

pub fn catalog() -> &'static [CheckSpec] {
    &CATALOG
}

/// Per-check accumulator the implementations fill in.
pub(crate) struct Tally {
    samples: usize,
    passes: usize,
    failure_count: usize,
    failures: Vec<String>,
    notes: Vec<String>,
    inapplicable: Option<String>,
}

impl Tally {
    pub(crate) fn new() -> Self {
        Self {
            samples: 0,
            passes: 0,
            failure_count: 0,
            failures: Vec::new(),
            notes: Vec::new(),
            inapplicable: None,
        }
    }

    pub(crate) fn inapplicable(reason: impl Into<String>) -> Self {
        let mut t = Self::new();
        t.inapplicable = Some(reason.into());
        t
    }

    pub(crate) fn pass(&mut self) {
        self.samples += 1;
        self.passes += 1;
    }

    pub(crate) fn fail(&mut self, detail: String) {
        self.samples += 1;
        self.failure_count += 1;
        if self.failures.len() < MAX_FAILURE_DETAILS {
            self.failures.push(detail);
        }
    }

    pub(crate) fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            self.pass();
        } else {
            self.fail(detail());
        }
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn into_report(self, check_id: &str, params: String) -> CheckReport {
        let verdict = if self.inapplicable.is_some() {
            Verdict::Inapplicable
        } else if self.samples == 0 {
            Verdict::Fail
        } else if self.failure_count == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let mut notes = self.notes;
        if let Some(reason) = self.inapplicable {
            notes.insert(0, reason);
        } else if self.samples == 0 {
            notes.push("no samples were evaluated".into());
        }
        CheckReport {
            check_id: check_id.to_string(),
            params,
            samples: self.samples,
            passes: self.passes,
            failure_count: self.failure_count,
            failures: self.failures,
            verdict,
            notes: notes.join("; "),
        }
    }
}

pub(crate) fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Run one catalog check. The RNG stream is keyed on both the caller's seed
/// and the check id, so reordering or subsetting a run never shifts samples
/// between checks.
pub fn run_check(map: &MapFamily, check_id: &str, samples: usize, seed: u64) -> Result<CheckReport> {
    let spec = CATALOG
        .iter()
        .find(|c| c.id == check_id)
        .ok_or_else(|| Error::InvalidParams(format!("unknown check id: {check_id}")))?;
    if spec.quadratic_only && !map.is_henon() {
        let t = Tally::inapplicable(
            "needs the quadratic family's closed-form structure (regions, crossings, thresholds)",
        );
        return Ok(t.into_report(check_id, map.label()));
    }
    let rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(check_id));
    let tally = checks::run(map, check_id, samples, rng)?;
    Ok(tally.into_report(check_id, map.label()))
}

/// Evaluate the structural hypotheses on a raw scalar pair without building a
/// map first: failed hypotheses land in the report rather than erroring, so a
/// pair the map constructor would reject still gets a diagnosis. The interval
/// must contain [-1, 2].
pub fn check_general_hypotheses(
    g: &crate::scalar::ScalarMap,
    h: &crate::scalar::ScalarMap,
    delta_ref: f64,
    interval: (f64, f64),
) -> Result<CheckReport> {
    if !(interval.0.is_finite() && interval.1.is_finite() && interval.0 <= -1.0 && interval.1 >= 2.0)
    {
        return Err(Error::InvalidParams(format!(
            "interval [{}, {}] must contain [-1, 2]",
            interval.0, interval.1
        )));
    }
    if !(delta_ref.is_finite() && delta_ref > 0.0) {
        return Err(Error::InvalidParams(format!(
            "reference slope {delta_ref} must be positive and finite"
        )));
    }
    let tally = checks::hypotheses_for_parts(g, h, delta_ref, interval);
    Ok(tally.into_report(
        "general_hypotheses",
        format!("general(g={}, h={}, delta_ref={delta_ref})", g.label(), h.label()),
    ))
}

/// Run the whole catalog in its canonical order.
pub fn run_all(map: &MapFamily, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    CATALOG.iter().map(|c| run_check(map, c.id, samples, seed)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_ids_are_stable() {
        let ids: Vec<&str> = CATALOG.iter().map(|c| c.id).collect();
        assert_eq!(
            ids,
            [
                "lemma4_wdelta_backward_escape",
                "lemma5_beta_cone_forward_escape",
                "lemma6_right_wedge",
                "prop7_polydisk_contraction",
                "cor8_vertical_slab",
                "prop9_a_delta_to_alpha",
                "thm10_left_crossing",
                "thm12_right_crossing",
                "prop13_strip_trichotomy",
                "prop16i_q4_right_wedge",
                "prop16ii_q4_deep_strip",
                "prop18_lower_half_trichotomy",
                "lemma17_curve_c_split",
                "lemma19_periodic_census",
                "lemma19_boundary_is_stable_set",
                "lemma19_stable_set_backward_escape",
                "lemma21_k_characterization",
                "conjugacy_flip",
                "flip_saddle_origin",
                "eigen_thresholds_origin",
                "alpha_attracting_threshold",
                "general_hypotheses",
            ]
        );
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len(), "duplicate check id");
    }

    #[test]
    fn unknown_check_id_errors() {
        let m = MapFamily::henon(0.1, 2.0).unwrap();
        assert!(run_check(&m, "no_such_check", 10, 7).is_err());
    }

    #[test]
    fn fnv_distinguishes_ids() {
        let mut hashes: Vec<u64> = CATALOG.iter().map(|c| fnv1a(c.id)).collect();
        hashes.sort_unstable();
        hashes.dedup();
        assert_eq!(hashes.len(), CATALOG.len());
    }

    #[test]
    fn report_serializes_with_stable_field_order() {
        let report = CheckReport {
            check_id: "demo".into(),
            params: "henon(delta=0.1, mu=2)".into(),
            samples: 3,
            passes: 2,
            failure_count: 1,
            failures: vec!["p = (1, 2): wrong fate".into()],
            verdict: Verdict::Fail,
            notes: String::new(),
        };
        let json = serde_json::to_string(&report).unwrap();
        let key_order: Vec<usize> = [
            "\"check_id\"",
            "\"params\"",
            "\"samples\"",
            "\"passes\"",
            "\"failure_count\"",
            "\"failures\"",
            "\"verdict\"",
            "\"notes\"",
        ]
        .iter()
        .map(|k| json.find(k).unwrap())
        .collect();
        assert!(key_order.windows(2).all(|w| w[0] < w[1]));
        assert!(json.contains("\"verdict\":\"fail\""));
    }
}
