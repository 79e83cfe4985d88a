//! Seventeen-significant-digit number formatting.
//!
//! Every real printed by the toolkit (JSON and CSV alike) goes through
//! [`fmt_g17`], which behaves like C's `%.17g`. Seventeen digits identify
//! any `f64` uniquely, so parsing the output recovers the exact bits.

use serde::{Serialize, Serializer};
use std::str::FromStr;

/// Format `x` like `printf("%.17g", x)`.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };

    if (-4..17).contains(&exp) {
        let (int_part, frac_part) = if exp >= 0 {
            let split = exp as usize + 1;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            let zeros = "0".repeat((-exp - 1) as usize);
            ("0".to_string(), format!("{zeros}{digits}"))
        };
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let (lead, rest) = digits.split_at(1);
        let rest = rest.trim_end_matches('0');
        let exp_sign = if exp < 0 { '-' } else { '+' };
        let body = if rest.is_empty() {
            lead.to_string()
        } else {
            format!("{lead}.{rest}")
        };
        format!("{sign}{body}e{exp_sign}{:02}", exp.abs())
    }
}

/// Serialize an `f64` as a raw JSON number token in `%.17g` form.
pub fn serialize_g17<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let number = serde_json::Number::from_str(&fmt_g17(*x)).map_err(serde::ser::Error::custom)?;
    number.serialize(s)
}

/// Wrapper that serializes through [`serialize_g17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G17(pub f64);

impl Serialize for G17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_g17(&self.0, s)
    }
}

/// `Option<f64>` variant of [`serialize_g17`]; `None` becomes `null`.
pub fn serialize_opt_g17<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_g17(v, s),
        None => s.serialize_none(),
    }
}
