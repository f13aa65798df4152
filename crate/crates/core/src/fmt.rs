//! Float formatting for file outputs.

/// 17 significant digits in scientific notation: enough to round-trip any
/// f64 exactly, so written files are as reproducible as the computation.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}
