//! Shortest round-trip decimal formatting shared by every text output.

/// Shortest decimal string that parses back to exactly `x`. Plain notation
/// for `1e-4 <= |x| < 1e15` and zero, exponent notation otherwise.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
