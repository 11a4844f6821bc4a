//! Exact hexadecimal rendering of f64 values for bit-faithful model files.
//!
//! Emission is canonical: `[-]0x1.{13 hex digits}p{+|-}{exp}` for normals,
//! `[-]0x0.{13 hex digits}p-1022` for subnormals and `[-]0x0p+0` for zero.
//! Parsing rebuilds the bit pattern with integer arithmetic only, so a
//! round trip reproduces the original bits on every platform.

use crate::error::{Error, Result};

/// Canonical hexadecimal rendering. Non-finite values are not
/// representable and error.
pub fn to_hex(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::Config(format!(
            "non-finite value {v} has no hexadecimal rendering"
        )));
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    Ok(if exp == 0 && mantissa == 0 {
        format!("{sign}0x0p+0")
    } else if exp == 0 {
        format!("{sign}0x0.{mantissa:013x}p-1022")
    } else {
        format!("{sign}0x1.{mantissa:013x}p{:+}", exp - 1023)
    })
}

/// Parses the canonical grammar back to the exact f64.
///
/// Accepted form: optional `-`, `0x`, one leading digit `0` or `1`, an
/// optional `.` fraction of 1 to 13 hex digits, `p`, a signed decimal
/// exponent. A leading `1` requires an exponent in -1022..=1023; a leading
/// `0` is either zero (all-zero fraction) or a subnormal pinned to `p-1022`.
pub fn from_hex(s: &str) -> Result<f64> {
    let err = |msg: &str| Error::Config(format!("invalid float literal {s:?}: {msg}"));

    let (sign_bit, rest) = match s.strip_prefix('-') {
        Some(rest) => (1u64 << 63, rest),
        None => (0, s),
    };
    let rest = rest
        .strip_prefix("0x")
        .ok_or_else(|| err("expected 0x prefix"))?;
    let (digits, exp_text) = rest
        .split_once('p')
        .ok_or_else(|| err("expected p exponent"))?;

    let (head, fraction) = match digits.split_once('.') {
        Some((h, f)) => (h, f),
        None => (digits, ""),
    };
    let leading = match head {
        "0" => 0u64,
        "1" => 1u64,
        _ => return Err(err("leading digit must be 0 or 1")),
    };
    if fraction.len() > 13 || (digits.contains('.') && fraction.is_empty()) {
        return Err(err("fraction must be 1 to 13 hex digits"));
    }
    let mut mantissa: u64 = 0;
    for ch in fraction.chars() {
        let nibble = ch
            .to_digit(16)
            .ok_or_else(|| err("bad hex digit in fraction"))?;
        if ch.is_uppercase() {
            return Err(err("hex digits must be lowercase"));
        }
        mantissa = mantissa << 4 | nibble as u64;
    }
    mantissa <<= 4 * (13 - fraction.len());

    let (exp_sign, magnitude) = match exp_text.as_bytes().first() {
        Some(b'+') => (1i64, &exp_text[1..]),
        Some(b'-') => (-1i64, &exp_text[1..]),
        Some(b) if b.is_ascii_digit() => (1i64, exp_text),
        _ => return Err(err("bad exponent")),
    };
    if magnitude.is_empty() || magnitude.len() > 6 || !magnitude.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(err("bad exponent"));
    }
    let exp: i64 = exp_sign * magnitude.parse::<i64>().map_err(|_| err("bad exponent"))?;

    let bits = if leading == 1 {
        if !(-1022..=1023).contains(&exp) {
            return Err(err("exponent out of range for a normal value"));
        }
        sign_bit | (((exp + 1023) as u64) << 52) | mantissa
    } else if mantissa == 0 {
        sign_bit
    } else if exp == -1022 {
        sign_bit | mantissa
    } else {
        return Err(err("subnormal values require exponent -1022"));
    };
    Ok(f64::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(v: f64) {
        let s = to_hex(v).unwrap();
        let back = from_hex(&s).unwrap();
        assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s} -> {back}");
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(to_hex(0.0).unwrap(), "0x0p+0");
        assert_eq!(to_hex(-0.0).unwrap(), "-0x0p+0");
        assert_eq!(to_hex(1.0).unwrap(), "0x1.0000000000000p+0");
        assert_eq!(to_hex(-2.0).unwrap(), "-0x1.0000000000000p+1");
        assert_eq!(to_hex(0.5).unwrap(), "0x1.0000000000000p-1");
        assert_eq!(to_hex(f64::MAX).unwrap(), "0x1.fffffffffffffp+1023");
        assert_eq!(
            to_hex(f64::MIN_POSITIVE).unwrap(),
            "0x1.0000000000000p-1022"
        );
        // the smallest subnormal
        assert_eq!(
            to_hex(f64::from_bits(1)).unwrap(),
            "0x0.0000000000001p-1022"
        );
    }

    #[test]
    fn exact_round_trips() {
        for v in [
            0.0,
            -0.0,
            1.0,
            -1.0,
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            f64::MAX,
            f64::MIN,
            f64::MIN_POSITIVE,
            f64::EPSILON,
            f64::from_bits(1),
            f64::from_bits(0x000f_ffff_ffff_ffff), // largest subnormal
            -f64::from_bits(1),                    // smallest negative subnormal
        ] {
            round_trip(v);
        }
    }

    #[test]
    fn round_trips_pseudorandom_bit_patterns() {
        // cheap xorshift sweep over the bit space, skipping inf/nan
        let mut x = 0x243f_6a88_85a3_08d3u64;
        for _ in 0..20_000 {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let v = f64::from_bits(x);
            if v.is_finite() {
                round_trip(v);
            }
        }
    }

    #[test]
    fn short_fractions_parse() {
        assert_eq!(from_hex("0x1.8p+1").unwrap(), 3.0);
        assert_eq!(from_hex("0x1p+0").unwrap(), 1.0);
        assert_eq!(from_hex("-0x1.4p+3").unwrap(), -10.0);
    }

    #[test]
    fn non_finite_values_do_not_render() {
        assert!(to_hex(f64::NAN).is_err());
        assert!(to_hex(f64::INFINITY).is_err());
        assert!(to_hex(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn malformed_literals_are_rejected() {
        for bad in [
            "",
            "1.0",
            "0x",
            "0x2.0p+0",
            "0x1.p+0",
            "0x1.0P+0",
            "0x1.0p",
            "0x1.0p+",
            "0x1.0p++1",
            "0x1.0p+99999999999",
            "0x1.0p+1024",
            "0x1.0p-1023",
            "0x0.1p-1021",
            "0x1.00000000000000p+0",
            "0x1.0gp+0",
            "0x1.0p+1.5",
            "0x1.Ap+0",
            "+0x1.0p+0",
            "0x1,0p+0",
        ] {
            assert!(from_hex(bad).is_err(), "{bad:?} should not parse");
        }
    }
}
