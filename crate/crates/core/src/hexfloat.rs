//! Lossless text form for `f64` values: C99-style hex-float literals.
//!
//! Scenario files must round-trip exactly, and decimal shortest-form printing
//! is easy to get subtly wrong across tools, so reals are stored as strings
//! like `0x1.5bf0a8b145769p+1`. Formatting emits the full mantissa (trailing
//! zeros trimmed); parsing accepts the general literal form with any number
//! of digits and rounds to nearest like a float literal would.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HexFloatError {
    #[error("empty hex-float literal")]
    Empty,
    #[error("hex-float literal {0:?} is malformed")]
    Malformed(String),
    #[error("hex-float literal {0:?} has too many mantissa digits")]
    TooManyDigits(String),
    #[error("hex-float literal {0:?} does not fit in an f64")]
    OutOfRange(String),
    #[error("cannot format non-finite value {0}")]
    NonFinite(f64),
}

/// Formats a finite `f64` as a hex-float literal that parses back bit-exactly.
pub fn format_f64(x: f64) -> Result<String, HexFloatError> {
    if !x.is_finite() {
        return Err(HexFloatError::NonFinite(x));
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & 0x000f_ffff_ffff_ffff;

    if exp == 0 && mant == 0 {
        return Ok(format!("{sign}0x0p+0"));
    }
    let (lead, frac, pexp) = if exp == 0 {
        // Subnormal: leading digit 0, fixed binary exponent.
        ("0", mant, -1022i64)
    } else {
        ("1", mant, exp - 1023)
    };
    let mut digits = format!("{frac:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    if digits.is_empty() {
        Ok(format!("{sign}0x{lead}p{pexp:+}"))
    } else {
        Ok(format!("{sign}0x{lead}.{digits}p{pexp:+}"))
    }
}

/// Parses a hex-float literal. Exact for anything `format_f64` emits; rounds
/// to nearest-even for longer hand-written mantissas.
pub fn parse_f64(text: &str) -> Result<f64, HexFloatError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(HexFloatError::Empty);
    }
    let malformed = || HexFloatError::Malformed(text.to_string());

    let (negative, rest) = match s.as_bytes()[0] {
        b'+' => (false, &s[1..]),
        b'-' => (true, &s[1..]),
        _ => (false, s),
    };
    let rest = rest
        .strip_prefix("0x")
        .or_else(|| rest.strip_prefix("0X"))
        .ok_or_else(malformed)?;
    let p_at = rest.find(['p', 'P']).ok_or_else(malformed)?;
    let (mant_text, exp_text) = (&rest[..p_at], &rest[p_at + 1..]);
    let exp_text = exp_text.strip_prefix('+').unwrap_or(exp_text);
    let pexp: i64 = exp_text.parse().map_err(|_| malformed())?;

    let (int_part, frac_part) = match mant_text.find('.') {
        Some(dot) => (&mant_text[..dot], &mant_text[dot + 1..]),
        None => (mant_text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }

    // Fold all digits into one integer; the binary exponent absorbs the
    // fractional shift. Leading zeros cost nothing; cap significant digits so
    // the u128 cannot overflow (32 hex digits = 128 mantissa bits, far more
    // than an f64 can hold anyway).
    let mut mant: u128 = 0;
    let mut significant = 0usize;
    for c in int_part.chars().chain(frac_part.chars()) {
        let d = c.to_digit(16).ok_or_else(malformed)? as u128;
        if mant != 0 || d != 0 {
            significant += 1;
            if significant > 32 {
                return Err(HexFloatError::TooManyDigits(text.to_string()));
            }
        }
        mant = mant.checked_mul(16).ok_or_else(malformed)?.checked_add(d).ok_or_else(malformed)?;
    }
    let shift = pexp - 4 * frac_part.len() as i64;

    if mant == 0 {
        return Ok(if negative { -0.0 } else { 0.0 });
    }
    let magnitude = mul_pow2(mant as f64, shift)?;
    if !magnitude.is_finite() {
        return Err(HexFloatError::OutOfRange(text.to_string()));
    }
    Ok(if negative { -magnitude } else { magnitude })
}

/// x * 2^e with at most one rounding step. Split so the intermediate stays
/// in normal range; only the final multiply may round into subnormals.
fn mul_pow2(x: f64, e: i64) -> Result<f64, HexFloatError> {
    if e.abs() <= 1000 {
        return Ok(x * 2f64.powi(e as i32));
    }
    if e.abs() > 3000 {
        // Way outside any f64 exponent; avoid powi overflow games.
        return Ok(if e > 0 { f64::INFINITY } else { 0.0 });
    }
    let half = e / 2;
    Ok(x * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32))
}

/// Serde adapter for a single `f64` field.
pub mod serde_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        let text = format_f64(*x).map_err(serde::ser::Error::custom)?;
        s.serialize_str(&text)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        parse_f64(&text).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a 2-D position.
pub mod serde_pos {
    use super::*;

    pub fn serialize<S: Serializer>(p: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
        let xs = [
            format_f64(p[0]).map_err(serde::ser::Error::custom)?,
            format_f64(p[1]).map_err(serde::ser::Error::custom)?,
        ];
        xs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 2], D::Error> {
        let xs = <[String; 2]>::deserialize(d)?;
        Ok([
            parse_f64(&xs[0]).map_err(serde::de::Error::custom)?,
            parse_f64(&xs[1]).map_err(serde::de::Error::custom)?,
        ])
    }
}

/// Serde adapter for flat real arrays (the gain tensor).
pub mod serde_f64_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Vec<f64>, s: S) -> Result<S::Ok, S::Error> {
        let texts: Result<Vec<String>, _> = v.iter().map(|x| format_f64(*x)).collect();
        texts.map_err(serde::ser::Error::custom)?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let texts = Vec::<String>::deserialize(d)?;
        texts
            .iter()
            .map(|t| parse_f64(t).map_err(serde::de::Error::custom))
            .collect()
    }
}
