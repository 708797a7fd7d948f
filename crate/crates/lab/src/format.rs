//! Locale-free numeric rendering for CSV output.

/// Significant digits used in every CSV cell.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Renders `x` like C's `%.12g`: 12 significant digits, trailing zeros
/// dropped, fixed notation for exponents in `[-5, 12)` and scientific
/// (`1.5e-7`) otherwise.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if x.is_nan() {
        return "nan".to_owned();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_owned();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

/// `sig` for optional values; `None` becomes an empty cell.
pub fn sig_opt(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
