//! Number formatting for reports and CLI output.

/// Shortest decimal string that parses back to exactly `x`.
///
/// Integral values print without a fractional part (`0`, `10`); very large or
/// very small magnitudes switch to exponent notation.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
