//! Shared JSON building blocks for reports.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::carpet::HpValue;
use crate::hp::{bits_for_digits, Interval};
use crate::scalar::fmt_ratio;

/// Version tag carried by every JSON document.
pub const SCHEMA: &str = "carpet-lab/1";

/// A real number as a decimal string with its precision, plus the exact
/// `p/q` form and the symbolic log form when available.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecimalValue {
    pub decimal: String,
    pub precision: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
}

impl DecimalValue {
    pub fn from_hp(v: &HpValue, digits: u32) -> Self {
        let exact = v.rational();
        let decimal = match &exact {
            Some(q) => Interval::from_rational(q, bits_for_digits(digits)).to_decimal(digits),
            None => v.decimal(digits),
        };
        DecimalValue { decimal, precision: digits, exact: exact.as_ref().map(fmt_ratio), form: Some(v.exact.to_string()) }
    }

    pub fn from_rational(q: &BigRational, digits: u32) -> Self {
        DecimalValue {
            decimal: Interval::from_rational(q, bits_for_digits(digits)).to_decimal(digits),
            precision: digits,
            exact: Some(fmt_ratio(q)),
            form: None,
        }
    }

    pub fn from_interval(v: &Interval, digits: u32) -> Self {
        DecimalValue { decimal: v.to_decimal(digits), precision: digits, exact: None, form: None }
    }

    /// Lossy numeric view for plotting and tolerance checks.
    pub fn to_f64(&self) -> f64 {
        self.decimal.parse().unwrap_or(f64::NAN)
    }
}
