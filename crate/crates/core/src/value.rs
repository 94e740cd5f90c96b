//! Domain values: exact numbers, strings and the two booleans.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact rational; floats are kept as their decimal value.
pub type Number = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Num(Number),
    Str(Arc<str>),
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Num(Number::from_integer(n))
    }

    pub fn str(s: &str) -> Self {
        Value::Str(Arc::from(s))
    }

    pub fn as_num(&self) -> Option<Number> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, Value::Num(n) if n.is_integer())
    }

    /// Parse a boolean literal. `Yes`/`No` are canonical, `true`/`false` are synonyms.
    pub fn parse_bool(text: &str) -> Option<bool> {
        match text.to_ascii_lowercase().as_str() {
            "yes" | "true" => Some(true),
            "no" | "false" => Some(false),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("Yes"),
            Value::Bool(false) => f.write_str("No"),
            Value::Num(n) => f.write_str(&format_number(n)),
            Value::Str(s) => f.write_str(s),
        }
    }
}

/// Parse an integer or a plain decimal (`-3`, `0.25`, `.5`).
pub fn parse_number(text: &str) -> Option<Number> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if body.contains('.') && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i64 = digits.parse().ok()?;
    let denom = 10i64.checked_pow(frac_part.len() as u32)?;
    let value = Number::new(numer, denom);
    Some(if neg { -value } else { value })
}

/// Number of decimal places written in a numeric literal.
pub fn decimal_places(text: &str) -> u32 {
    text.trim()
        .split_once('.')
        .map(|(_, f)| f.len() as u32)
        .unwrap_or(0)
}

/// Canonical rendering: integers plainly, terminating fractions as decimals,
/// everything else as `n/d`.
pub fn format_number(n: &Number) -> String {
    if n.is_integer() {
        return n.to_integer().to_string();
    }
    let mut denom = *n.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while denom % 2 == 0 {
        denom /= 2;
        twos += 1;
    }
    while denom % 5 == 0 {
        denom /= 5;
        fives += 1;
    }
    if denom != 1 {
        return format!("{}/{}", n.numer(), n.denom());
    }
    let places = twos.max(fives);
    let scale = 10i128.pow(places);
    let scaled = (*n.numer() as i128) * scale / (*n.denom() as i128);
    let sign = if n.is_negative() { "-" } else { "" };
    let abs = scaled.abs();
    let int_part = abs / scale;
    let frac_part = abs % scale;
    format!(
        "{sign}{int_part}.{frac:0width$}",
        frac = frac_part,
        width = places as usize
    )
}

pub fn number_to_f64(n: &Number) -> f64 {
    n.to_f64().unwrap_or(f64::NAN)
}

pub fn is_zero(n: &Number) -> bool {
    n.is_zero()
}
