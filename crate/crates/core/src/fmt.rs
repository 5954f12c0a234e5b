//! Output formatting shared by reports and the command line.

/// Formats `x` with 12 significant digits in plain decimal notation.
pub fn sig12(x: f64) -> String {
    sig(x, 12)
}

pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit, e.g. 9.99.. -> 10.0..
    let rounded: f64 = s.parse().unwrap_or(x);
    if decimals > 0 && rounded.abs() >= 10f64.powi(magnitude as i32 + 1) {
        let decimals = decimals - 1;
        return format!("{x:.decimals$}");
    }
    s
}
