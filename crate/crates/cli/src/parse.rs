//! Parsers for the textual option formats.

use dispherical_core::action::Window;
use dispherical_core::trajectory::{MotionConstant, ZeroSign};
use dispherical_core::wavefield::Source;

use crate::Failure;

fn invalid<T>(what: &str, text: &str) -> Result<T, Failure> {
    Err(Failure::Invalid(format!("{what}: cannot parse `{text}`")))
}

fn number(what: &str, text: &str) -> Result<f64, Failure> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => invalid(what, text),
    }
}

/// `start:step:end`, inclusive of `end` up to rounding, at most 100000 values;
/// a single number is a one-value range.
pub fn range(what: &str, text: &str) -> Result<Vec<f64>, Failure> {
    if !text.contains(':') {
        return Ok(vec![number(what, text)?]);
    }
    let parts: Vec<&str> = text.split(':').collect();
    let [s, d, e] = parts[..] else {
        return invalid(what, text);
    };
    let (start, step, end) = (number(what, s)?, number(what, d)?, number(what, e)?);
    if !(step > 0.0) || end < start {
        return invalid(what, text);
    }
    let n = ((end - start) / step + 1e-9).floor();
    if n > 1e5 {
        return invalid(what, text);
    }
    Ok((0..=n as usize).map(|i| start + i as f64 * step).collect())
}

/// Comma-separated numbers.
pub fn list(what: &str, text: &str) -> Result<Vec<f64>, Failure> {
    let v = text
        .split(',')
        .map(|s| number(what, s))
        .collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return invalid(what, text);
    }
    Ok(v)
}

/// `xi0:xi1,eta0:eta1`.
pub fn window(text: &str) -> Result<Window, Failure> {
    let Some((x, e)) = text.split_once(',') else {
        return invalid("window", text);
    };
    let pair = |t: &str| -> Result<(f64, f64), Failure> {
        let Some((lo, hi)) = t.split_once(':') else {
            return invalid("window", text);
        };
        Ok((number("window", lo)?, number("window", hi)?))
    };
    Window::new(pair(x)?, pair(e)?).map_err(|e| Failure::Invalid(format!("window: {e}")))
}

/// `lower` or `upper`.
pub fn source(text: &str) -> Result<Source, Failure> {
    match text.trim() {
        "lower" => Ok(Source::Lower),
        "upper" => Ok(Source::Upper),
        _ => invalid("source", text),
    }
}

/// `lower`, `upper` or `both`, in source order.
pub fn sources(text: &str) -> Result<Vec<Source>, Failure> {
    match text.trim() {
        "both" => Ok(vec![Source::Lower, Source::Upper]),
        t => Ok(vec![source(t)?]),
    }
}

/// A constant of the motion; a zero must carry an explicit sign.
pub fn eta_a(text: &str) -> Result<MotionConstant, Failure> {
    let t = text.trim();
    let v = number("eta-a", t)?;
    let c = if v == 0.0 {
        let zs = match t.as_bytes().first() {
            Some(b'+') => ZeroSign::Positive,
            Some(b'-') => ZeroSign::Negative,
            _ => {
                return Err(Failure::Invalid(
                    "eta-a: a zero constant must be written +0 or -0".into(),
                ))
            }
        };
        MotionConstant::with_zero_sign(0.0, Some(zs))
    } else {
        MotionConstant::new(v)
    };
    c.map_err(|e| Failure::Invalid(format!("eta-a: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_end() {
        let v = range("levels", "0.5:0.5:5.0").unwrap();
        assert_eq!(v.len(), 10);
        assert_eq!(v[9], 5.0);
        assert!(range("levels", "1:0:2").is_err());
        assert!(range("levels", "2:1:1").is_err());
    }

    #[test]
    fn signed_zero_tokens() {
        assert_eq!(eta_a("-0").unwrap().zero_sign(), Some(ZeroSign::Negative));
        assert_eq!(eta_a("+0").unwrap().zero_sign(), Some(ZeroSign::Positive));
        assert!(eta_a("0").is_err());
        assert!(eta_a("1.5").is_err());
        assert_eq!(eta_a("-0.173648").unwrap().eta_a(), -0.173648);
    }

    #[test]
    fn windows() {
        let w = window("1:6,0:1").unwrap();
        assert_eq!(w.xi, (1.0, 6.0));
        assert!(window("0.5:6,0:1").is_err());
        assert!(window("1:6").is_err());
    }
}
