//! Parsers for the numeric command-line forms.

use std::f64::consts::PI;

/// A scale factor `M`: a number, a fraction of pi such as `45/2pi`, or
/// `exact` to derive an exact-phase value from the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScaleArg {
    Value(f64),
    Exact,
}

pub fn parse_scale(s: &str) -> Result<ScaleArg, String> {
    let norm: String = s
        .trim()
        .to_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '(' && *c != ')')
        .collect();
    if norm == "exact" {
        return Ok(ScaleArg::Exact);
    }
    let value = match norm.split_once('/') {
        None => parse_factor(&norm)?,
        Some((num, den)) => parse_factor(num)? / parse_factor(den)?,
    };
    if !value.is_finite() || value <= 0.0 {
        return Err(format!("scale factor must be positive and finite, got {s}"));
    }
    Ok(ScaleArg::Value(value))
}

/// A number optionally followed by `pi` (`2pi`, `2*pi`, `pi`).
fn parse_factor(s: &str) -> Result<f64, String> {
    let (coef, pi) = match s.strip_suffix("pi") {
        Some(c) => (c.strip_suffix('*').unwrap_or(c), true),
        None => (s, false),
    };
    let c = if coef.is_empty() && pi {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| format!("cannot read {s:?} as a number"))?
    };
    Ok(if pi { c * PI } else { c })
}

/// `4..9` (inclusive), `4..=9`, `4,5,6` or `4`.
pub fn parse_p_list(s: &str) -> Result<Vec<u32>, String> {
    let s = s.trim();
    let num = |x: &str| x.trim().parse::<u32>().map_err(|_| format!("bad level count {x:?}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?);
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',').map(num).collect()
}

/// Sample counts such as `1e6`, `250000` or `1_000_000`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let clean = s.trim().replace('_', "");
    if let Ok(v) = clean.parse::<u64>() {
        return if v > 0 { Ok(v) } else { Err("count must be positive".into()) };
    }
    let v: f64 = clean.parse().map_err(|_| format!("cannot read {s:?} as a count"))?;
    if v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(format!("{s} is not a positive whole number"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(s: &str) -> f64 {
        match parse_scale(s).unwrap() {
            ScaleArg::Value(v) => v,
            ScaleArg::Exact => panic!("{s} parsed as exact"),
        }
    }

    #[test]
    fn scale_forms() {
        let want = 45.0 / (2.0 * PI);
        for s in ["45/2pi", "45/(2pi)", "45 / 2*pi", "45/2π"] {
            assert!((value(s) - want).abs() < 1e-15, "{s}");
        }
        assert_eq!(value("1.5"), 1.5);
        assert!((value("pi/4") - PI / 4.0).abs() < 1e-15);
        assert_eq!(parse_scale("Exact").unwrap(), ScaleArg::Exact);
        for bad in ["", "-1", "0", "45/0", "abc", "45/2pa"] {
            assert!(parse_scale(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn p_lists() {
        assert_eq!(parse_p_list("4..9").unwrap(), vec![4, 5, 6, 7, 8, 9]);
        assert_eq!(parse_p_list("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_p_list("1,3").unwrap(), vec![1, 3]);
        assert_eq!(parse_p_list("7").unwrap(), vec![7]);
        assert!(parse_p_list("5..4").is_err());
        assert!(parse_p_list("x").is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("1_000").unwrap(), 1000);
        assert_eq!(parse_count("2.5e1").unwrap(), 25);
        for bad in ["0", "1.5", "-3", "1e400", "many"] {
            assert!(parse_count(bad).is_err(), "{bad}");
        }
    }
}
