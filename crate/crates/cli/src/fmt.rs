//! Bit-stable numeric formatting for CSV artifacts.

/// 17 significant digits in scientific notation, '.' decimal separator.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Join one CSV row with '\n' termination left to the caller.
pub fn csv_row(fields: &[String]) -> String {
    fields.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(float17(0.5), "5.0000000000000000e-1");
        assert_eq!(float17(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(float17(std::f64::consts::PI), "3.1415926535897931e0");
    }

    #[test]
    fn round_trips_exactly() {
        for &x in &[0.1, 2.0 / 3.0, 1e-300, 123456.789, -0.0625] {
            let back: f64 = float17(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
