//! Number formatting shared by the CSV writers.

/// Decimal rendering with exactly 9 significant digits and `.` as separator.
///
/// Values of moderate magnitude are written in fixed notation, others in
/// scientific notation; the output never depends on the locale.
pub fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.00000000".into();
    }
    let sci = format!("{v:.8e}");
    let e_at = sci.find('e').unwrap();
    let exp: i32 = sci[e_at + 1..].parse().unwrap();
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}
