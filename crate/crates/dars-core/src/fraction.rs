//! Exact rational fractions for quota and threshold arithmetic.
//!
//! Observed fractions are always `count / total` over concrete records, so
//! comparisons against declared minima must be exact; no epsilon is involved
//! anywhere.

use num_rational::Ratio;

/// Exact non-negative rational. Quota minima, threshold minima and observed
/// fractions all use this representation.
pub type Fraction = Ratio<u64>;

/// Parses a non-negative decimal digit string (`"10"`, `"0.5"`, `"12.5"`)
/// into an exact fraction. Returns `None` for anything that is not a plain
/// decimal numeral.
pub fn fraction_from_decimal(text: &str) -> Option<Fraction> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut num: u64 = int_part.parse().ok()?;
    let mut den: u64 = 1;
    for b in frac_part.bytes() {
        num = num.checked_mul(10)?.checked_add(u64::from(b - b'0'))?;
        den = den.checked_mul(10)?;
    }
    Some(Fraction::new(num, den))
}

/// Renders a fraction as an exact decimal string when the expansion
/// terminates (denominator of the form 2^a·5^b), e.g. `19/200` → `"0.095"`.
/// Non-terminating fractions fall back to `"num/den"`.
pub fn fraction_to_decimal(f: &Fraction) -> String {
    let mut d = *f.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    let scale = || -> Option<String> {
        if d != 1 {
            return None;
        }
        let m = twos.max(fives);
        let factor = 2u64
            .checked_pow(m - twos)?
            .checked_mul(5u64.checked_pow(m - fives)?)?;
        let scaled = f.numer().checked_mul(factor)?;
        let digits = scaled.to_string();
        let m = m as usize;
        if m == 0 {
            return Some(digits);
        }
        let digits = if digits.len() <= m {
            format!("{}{digits}", "0".repeat(m + 1 - digits.len()))
        } else {
            digits
        };
        let (int, frac) = digits.split_at(digits.len() - m);
        let frac = frac.trim_end_matches('0');
        Some(if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        })
    };
    scale().unwrap_or_else(|| format!("{}/{}", f.numer(), f.denom()))
}

/// Renders a fraction as a percent literal, e.g. `1/10` → `"10%"`,
/// `1/8` → `"12.5%"`.
pub fn percent_text(f: &Fraction) -> String {
    format!("{}%", fraction_to_decimal(&(f * Fraction::from_integer(100))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_decimals() {
        assert_eq!(fraction_from_decimal("10"), Some(Fraction::new(10, 1)));
        assert_eq!(fraction_from_decimal("0.5"), Some(Fraction::new(1, 2)));
        assert_eq!(fraction_from_decimal("12.5"), Some(Fraction::new(25, 2)));
        assert_eq!(fraction_from_decimal("0.095"), Some(Fraction::new(19, 200)));
        assert_eq!(fraction_from_decimal(""), None);
        assert_eq!(fraction_from_decimal(".5"), None);
        assert_eq!(fraction_from_decimal("1.2.3"), None);
        assert_eq!(fraction_from_decimal("-1"), None);
    }

    #[test]
    fn prints_terminating_decimals_exactly() {
        assert_eq!(fraction_to_decimal(&Fraction::new(19, 200)), "0.095");
        assert_eq!(fraction_to_decimal(&Fraction::new(1, 10)), "0.1");
        assert_eq!(fraction_to_decimal(&Fraction::new(3, 1)), "3");
        assert_eq!(fraction_to_decimal(&Fraction::new(0, 1)), "0");
        assert_eq!(fraction_to_decimal(&Fraction::new(1, 3)), "1/3");
    }

    #[test]
    fn percent_round_trips_through_decimal_parse() {
        for (num, den) in [(1, 10), (19, 200), (1, 8), (1, 1), (3, 100)] {
            let f = Fraction::new(num, den);
            let text = percent_text(&f);
            let digits = text.strip_suffix('%').unwrap();
            let reparsed = fraction_from_decimal(digits).unwrap() / Fraction::from_integer(100);
            assert_eq!(reparsed, f, "{text}");
        }
    }
}
