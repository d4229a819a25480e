//! Positive magnitudes carried as natural logarithms.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};

/// A positive real stored as `ln(value)`; bounds routinely exceed `f64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogNumber {
    ln_value: f64,
}

impl LogNumber {
    pub const ONE: LogNumber = LogNumber { ln_value: 0.0 };
    pub const ZERO: LogNumber = LogNumber {
        ln_value: f64::NEG_INFINITY,
    };

    pub fn from_ln(ln_value: f64) -> Self {
        Self { ln_value }
    }

    /// `x` must be nonnegative; zero maps to [`LogNumber::ZERO`].
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x >= 0.0);
        Self { ln_value: x.ln() }
    }

    pub fn ln(self) -> f64 {
        self.ln_value
    }

    pub fn log10(self) -> f64 {
        self.ln_value / std::f64::consts::LN_10
    }

    /// The value as `f64`; overflows to infinity above ~1.8e308.
    pub fn to_f64(self) -> f64 {
        self.ln_value.exp()
    }

    pub fn powi(self, k: i32) -> Self {
        Self::from_ln(self.ln_value * k as f64)
    }

    pub fn powf(self, k: f64) -> Self {
        Self::from_ln(self.ln_value * k)
    }

    /// `d.ddde±EE`: four significant digits, exponent `⌊log10⌋`.
    pub fn to_sci(self) -> String {
        if self.ln_value == f64::NEG_INFINITY {
            return "0.000e+00".into();
        }
        if !self.ln_value.is_finite() {
            return format!("{}", self.ln_value.exp());
        }
        let l10 = self.log10();
        let mut exp = l10.floor();
        let mut mant = 10f64.powf(l10 - exp);
        if (mant * 1000.0).round() >= 10000.0 {
            mant /= 10.0;
            exp += 1.0;
        }
        let sign = if exp < 0.0 { '-' } else { '+' };
        format!("{:.3}e{}{:02}", mant, sign, exp.abs() as i64)
    }
}

/// `log-sum-exp`, stable for operands of very different size.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl Add for LogNumber {
    type Output = LogNumber;
    fn add(self, rhs: Self) -> Self {
        Self::from_ln(log_add(self.ln_value, rhs.ln_value))
    }
}

impl Mul for LogNumber {
    type Output = LogNumber;
    fn mul(self, rhs: Self) -> Self {
        Self::from_ln(self.ln_value + rhs.ln_value)
    }
}

impl Div for LogNumber {
    type Output = LogNumber;
    fn div(self, rhs: Self) -> Self {
        Self::from_ln(self.ln_value - rhs.ln_value)
    }
}

impl PartialOrd for LogNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln_value.partial_cmp(&other.ln_value)
    }
}

impl fmt::Display for LogNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sci())
    }
}
