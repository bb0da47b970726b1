//! Number formatting for CSV artifacts.

/// Shortest decimal string that parses back to the same `f64`.
pub fn shortest(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Display for f64 is the shortest round-trip representation
        format!("{x}")
    }
}

/// Fixed count of significant digits in scientific notation, e.g. `4.60454334888e0`.
pub fn significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return shortest(x);
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
}
