//! Numeric formatting helpers for CSV export.

/// Format `x` in plain decimal notation with `sig` significant digits.
///
/// Exports pin 12 significant digits so files are diffable across runs
/// while staying readable; shortest round-trip printing is reserved for
/// the model file, where reloads must be bit-exact.
pub(crate) fn significant(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::significant;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(significant(2.0f64.ln(), 12), "0.693147180560");
        assert_eq!(significant(693.1471805599453, 12), "693.147180560");
        assert_eq!(significant(0.0, 12), "0");
        assert_eq!(significant(-0.25, 12), "-0.250000000000");
        assert_eq!(significant(125000.0, 3), "125000");
    }
}
