//! Text form of real numbers in every file this crate writes.
//!
//! Values are printed in the shortest decimal form that parses back to the
//! same `f64`, switching to exponent notation outside `[1e-5, 1e16)`.

pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn parse_real(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}
