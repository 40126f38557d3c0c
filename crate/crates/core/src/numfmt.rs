//! Deterministic decimal formatting.

/// Formats `v` with `digits` significant digits (correctly rounded, ties to even on the
/// exact binary value), trims trailing zeros and uses positional notation for moderate
/// exponents. Negative zero prints as `0`.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits_str: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits_str = digits_str.trim_end_matches('0');
    let digits_str = if digits_str.is_empty() { "0" } else { digits_str };
    let body = if (-5..16).contains(&exp) {
        if exp < 0 {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits_str)
        } else {
            let int_len = exp as usize + 1;
            if digits_str.len() <= int_len {
                format!("{}{}", digits_str, "0".repeat(int_len - digits_str.len()))
            } else {
                format!("{}.{}", &digits_str[..int_len], &digits_str[int_len..])
            }
        }
    } else {
        let (first, rest) = digits_str.split_at(1);
        if rest.is_empty() {
            format!("{first}e{exp}")
        } else {
            format!("{first}.{rest}e{exp}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::format_sig;

    #[test]
    fn formats() {
        assert_eq!(format_sig(0.25, 15), "0.25");
        assert_eq!(format_sig(0.75, 15), "0.75");
        assert_eq!(format_sig(-0.0, 15), "0");
        assert_eq!(format_sig(1.0, 15), "1");
        assert_eq!(format_sig(120.0, 15), "120");
        assert_eq!(format_sig(1.0 / 3.0, 15), "0.333333333333333");
        assert_eq!(format_sig(-2.5e-7, 15), "-2.5e-7");
        assert_eq!(format_sig(0.000123, 15), "0.000123");
        assert_eq!(format_sig(1e20, 15), "1e20");
    }

    #[test]
    fn round_trips_to_fifteen_digits() {
        for &v in &[0.1, 2.0 / 3.0, -17.123456789012345, 1e-3 / 7.0] {
            let back: f64 = format_sig(v, 15).parse().unwrap();
            assert!((back - v).abs() <= 1e-14 * v.abs());
        }
    }
}
