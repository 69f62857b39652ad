//! Numbers with unit suffixes: `9.8nm`, `100 us`, `2.87GHz`, `3mT`, `30G`.
//! A bare number is taken in SI units.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Frequency,
    Field,
    Dimensionless,
}

impl Dimension {
    /// Suffix and decimal exponent of its scale.
    fn suffixes(self) -> &'static [(&'static str, i32)] {
        match self {
            Dimension::Length => &[("nm", -9), ("um", -6), ("µm", -6), ("mm", -3), ("m", 0)],
            Dimension::Time => &[("ns", -9), ("us", -6), ("µs", -6), ("ms", -3), ("s", 0)],
            Dimension::Frequency => &[("GHz", 9), ("MHz", 6), ("kHz", 3), ("Hz", 0)],
            Dimension::Field => &[("mT", -3), ("uT", -6), ("µT", -6), ("T", 0), ("G", -4)],
            Dimension::Dimensionless => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Frequency => "frequency",
            Dimension::Field => "magnetic field",
            Dimension::Dimensionless => "number",
        }
    }
}

/// Parses one quantity into SI units. The unit is folded into the decimal exponent
/// before conversion, so `9.8nm` gives exactly the double nearest to 9.8e-9.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| c.is_alphabetic() && !is_exponent(t, i) || c == 'µ')
        .map_or(t.len(), |(i, _)| i);
    let (number, unit) = (t[..split].trim(), t[split..].trim());
    let shift = if unit.is_empty() {
        0
    } else {
        dim.suffixes()
            .iter()
            .find(|(s, _)| *s == unit)
            .map(|&(_, e)| e)
            .ok_or_else(|| format!("unknown {} unit `{unit}` in `{t}`", dim.name()))?
    };
    let bad = || format!("`{t}` is not a {}", dim.name());
    let (mantissa, exponent) = match number.find(['e', 'E']) {
        Some(i) => (
            &number[..i],
            number[i + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (number, 0),
    };
    if mantissa.is_empty()
        || !mantissa
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+'))
    {
        return Err(bad());
    }
    let value: f64 = format!("{mantissa}e{}", exponent + shift)
        .parse()
        .map_err(|_| bad())?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{t}` is not finite"))
    }
}

/// `e`/`E` inside a float literal such as `1e-3`.
fn is_exponent(t: &str, i: usize) -> bool {
    let b = t.as_bytes();
    matches!(b[i], b'e' | b'E')
        && i > 0
        && (b[i - 1].is_ascii_digit() || b[i - 1] == b'.')
        && b.get(i + 1)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
}

/// Comma-separated quantities of one dimension.
pub fn parse_list(text: &str, dim: Dimension) -> Result<Vec<f64>, String> {
    text.split(',').map(|p| parse_quantity(p, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use Dimension::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_quantity("9.8nm", Length).unwrap(), 9.8e-9);
        assert_eq!(parse_quantity("100 us", Time).unwrap(), 100e-6);
        assert_eq!(parse_quantity("2.87GHz", Frequency).unwrap(), 2.87e9);
        assert_eq!(parse_quantity("3mT", Field).unwrap(), 3e-3);
        assert_eq!(parse_quantity("30G", Field).unwrap(), 30e-4);
        assert_eq!(parse_quantity("200us", Time).unwrap(), 200e-6);
        assert_eq!(parse_quantity("1e-3", Time).unwrap(), 1e-3);
        assert_eq!(parse_quantity("1.5e3kHz", Frequency).unwrap(), 1.5e6);
        assert_eq!(parse_quantity("-42kHz", Frequency).unwrap(), -42e3);
        assert_eq!(
            parse_list("1nm, 2nm,3", Length).unwrap(),
            vec![1e-9, 2e-9, 3.0]
        );
    }

    #[test]
    fn rejects() {
        assert!(parse_quantity("3 mT", Length).is_err());
        assert!(parse_quantity("fast", Time).is_err());
        assert!(parse_quantity("", Time).is_err());
        assert!(parse_quantity("inf", Time).is_err());
        assert!(parse_quantity("1e999", Time).is_err());
        assert!(parse_quantity("2.87 GHZ", Frequency).is_err());
    }
}
