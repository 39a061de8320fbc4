//! Locale-independent number formatting shared by every text output.

use std::fmt::Write;

use num_complex::Complex64;

use crate::Error;

/// Formats `x` with 9 significant digits using `%g` rules: fixed notation for
/// decimal exponents in `[-4, 9)`, scientific otherwise, trailing zeros removed.
pub fn fmt_sig9(x: f64) -> String {
    fmt_sig(x, 9)
}

pub(crate) fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp >= -4 && exp < digits as i32 {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = strip_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Appends `re+imj` (or `re-imj`).
pub fn write_complex(out: &mut String, v: Complex64) {
    // `+ 0.0` folds negative zero.
    let (re, im) = (v.re + 0.0, v.im + 0.0);
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    write!(out, "{}{}{}j", fmt_sig9(re), sign, fmt_sig9(im.abs())).expect("writing to String");
}

pub fn fmt_complex(v: Complex64) -> String {
    let mut s = String::new();
    write_complex(&mut s, v);
    s
}

/// Parses `re+imj` / `re-imj`.
pub fn parse_complex(tok: &str) -> Result<Complex64, Error> {
    let bad = || Error::Parse(format!("malformed complex value {tok:?}"));
    let body = tok.strip_suffix('j').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}
