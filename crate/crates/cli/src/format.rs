/// Rounds to 12 significant digits and prints the shortest decimal that
/// round-trips the rounded value. Locale independent.
pub fn sig12(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

/// Parses `a..b` (inclusive), `a,b,c` or a single integer.
pub fn parse_indices(raw: &str) -> Result<Vec<u64>, String> {
    let raw = raw.trim();
    if let Some((a, b)) = raw.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad range start '{a}'"))?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range end '{b}'"))?;
        if a == 0 || b < a {
            return Err(format!("range {raw} must satisfy 1 <= start <= end"));
        }
        return Ok((a..=b).collect());
    }
    raw.split(',')
        .map(|s| match s.trim().parse::<u64>() {
            Ok(0) => Err("indices start at 1".to_string()),
            Ok(v) => Ok(v),
            Err(_) => Err(format!("'{}' is not a positive integer", s.trim())),
        })
        .collect()
}
