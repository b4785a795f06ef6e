//! Number formatting shared by the CSV, JSON and SVG writers.

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to 12 significant digits, for JSON output.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    sig12(x).parse().unwrap_or(x)
}

/// `serialize_with` helper writing an `f64` rounded to 12 significant digits.
pub fn ser_f64<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round12(*x))
}

/// `serialize_with` helper for slices of floats.
pub fn ser_f64_vec<S: serde::Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&round12(*x))?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_like_printf_g() {
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(-2.0), "-2");
        assert_eq!(sig12(123456.789), "123456.789");
        assert_eq!(sig12(1.5e-7), "1.5e-7");
        assert_eq!(sig12(2.0e13), "2e13");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(round12(0.1 + 0.2), 0.3);
    }
}
