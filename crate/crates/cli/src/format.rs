/// Twelve digits after the point with trailing zeros dropped, switching to
/// scientific notation outside `[1e-4, 1e12)`.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e12).contains(&a) {
        return format!("{x:.11e}");
    }
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Shortest decimal string that parses back to the same `f64`. Whole
/// numbers print without a fractional part.
pub fn exact(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x:?}")
    }
}
