//! Number formatting for output files.

/// Nine significant digits, plain decimal for moderate magnitudes and
/// scientific otherwise. Trailing zeros are dropped so equal values always
/// print identically.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// [`fmt_sig9`] read back, for JSON output. Non-finite values become
/// `None`.
pub fn sig9(x: f64) -> Option<f64> {
    if x.is_finite() {
        Some(fmt_sig9(x).parse().expect("formatted float parses"))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(fmt_sig9(4090.0), "4090");
        assert_eq!(fmt_sig9(1.0 / 4090.0), "0.000244498778");
        assert_eq!(fmt_sig9(147.24), "147.24");
        assert_eq!(fmt_sig9(-0.036), "-0.036");
        assert_eq!(fmt_sig9(59.999999999999), "60");
        assert_eq!(fmt_sig9(9.9999999999), "10");
        assert_eq!(fmt_sig9(1.234567891e20), "1.23456789e20");
        assert_eq!(fmt_sig9(2.5e-9), "2.5e-9");
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(f64::INFINITY), "inf");
        assert_eq!(fmt_sig9(f64::NAN), "NaN");
        assert_eq!(sig9(f64::NAN), None);
        assert_eq!(sig9(1.0 / 3.0), Some(0.333333333));
    }
}
