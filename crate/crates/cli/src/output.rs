//! Number formatting for data files: every double is printed with 17
//! significant digits so files round-trip exactly and hash stably.

pub use randwave::numeric::fmt_g17;

/// JSON-safe float: finite values as 17-digit numbers, non-finite as
/// quoted strings (JSON has no literal for them).
pub fn json_f64(x: f64) -> String {
    if x.is_finite() {
        fmt_g17(x)
    } else if x.is_nan() {
        "\"nan\"".to_string()
    } else if x > 0.0 {
        "\"inf\"".to_string()
    } else {
        "\"-inf\"".to_string()
    }
}

/// Render a JSON array of doubles.
pub fn json_f64_array(xs: &[f64]) -> String {
    let inner: Vec<String> = xs.iter().map(|&x| json_f64(x)).collect();
    format!("[{}]", inner.join(", "))
}
