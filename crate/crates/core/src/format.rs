//! Float formatting shared by the CSV exporters.

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// scientific notation when the decimal exponent is below -4 or at least 17.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::sig17;

    #[test]
    fn matches_printf_g17() {
        assert_eq!(sig17(20.0), "20");
        assert_eq!(sig17(0.5), "0.5");
        assert_eq!(sig17(0.1), "0.10000000000000001");
        assert_eq!(sig17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(sig17(0.0018), "0.0018");
        assert_eq!(sig17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(sig17(1e20), "1e+20");
        assert_eq!(sig17(-2.5), "-2.5");
        assert_eq!(sig17(123456.0), "123456");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 137.25, 2.0f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
        }
    }
}
