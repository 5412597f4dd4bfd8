//! Number formatting for the text exports.

/// `%g`-style formatting with `digits` significant digits and trailing zeros
/// removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

/// Scientific notation with 17 significant digits; parses back to the same
/// `f64`.
pub fn format_17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.439_140_681_372_6, 6), "0.439141");
        assert_eq!(format_sig(2.058_244_143_9, 6), "2.05824");
        assert_eq!(format_sig(9.999_996, 6), "10");
        assert_eq!(format_sig(-1.5e-9, 6), "-1.5e-9");
        assert_eq!(format_sig(123_456_789.0, 6), "1.23457e8");
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(4.0, 6), "4");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1.676_956_674_215_576, -2.5e-300, 0.0] {
            let s = format_17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }
}
