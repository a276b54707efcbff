//! Numeric formatting shared by the CSV report writers.

/// Rounds to the given number of significant digits. Zero, non-finite
/// values, and extremes where the scale factor itself would overflow pass
/// through unchanged.
pub fn round_to_significant(value: f64, digits: i32) -> f64 {
    if value == 0.0 || !value.is_finite() {
        return value;
    }
    let magnitude = value.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    if !factor.is_finite() || factor == 0.0 {
        return value;
    }
    let rounded = (value * factor).round() / factor;
    if rounded.is_finite() {
        rounded
    } else {
        value
    }
}

/// Shortest decimal form that parses back to the identical `f64`.
pub fn format_float(value: f64) -> String {
    format!("{value}")
}

/// Report form: six significant digits unless full precision is requested.
pub fn format_report_float(value: f64, full_precision: bool) -> String {
    if full_precision {
        format_float(value)
    } else {
        format_float(round_to_significant(value, 6))
    }
}
