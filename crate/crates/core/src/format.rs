//! Number formatting shared by every CSV writer.

/// Formats `x` with 17 significant digits in decimal scientific notation,
/// which round-trips every finite `f64` exactly.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0" and keep the column width uniform
        return "0.0000000000000000e0".to_string();
    }
    format!("{:.16e}", x)
}
