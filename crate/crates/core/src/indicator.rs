//! Indicators of change: absolute and relative change, the log-ratio, and the
//! two one-parameter families `f_λ` and `F_λ` that interpolate between them.
//!
//! `f_λ(x, y) = (y − x) / x^λ` recovers absolute change at λ = 0 and relative
//! change at λ = 1. `F_λ` is its antisymmetric, additive companion,
//! `(y^{1−λ} − x^{1−λ}) / (1 − λ)`, which recovers absolute change at λ = 0
//! and the log-ratio at λ = 1.
//!
//! For an input measured in unit `u`, `f_λ` carries unit `u^{1−λ}`. Units are
//! not tracked here; only quotients of indicator values are unit-free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interpolation parameter λ. Any finite real is accepted; [0, 1] is the
/// range that interpolates between absolute and relative change.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lambda(f64);

impl Lambda {
    pub const ZERO: Lambda = Lambda(0.0);
    pub const HALF: Lambda = Lambda(0.5);
    pub const ONE: Lambda = Lambda(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Lambda(value))
        } else {
            Err(Error::NonFiniteLambda(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Lambda {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Lambda::new(value)
    }
}

impl From<Lambda> for f64 {
    fn from(l: Lambda) -> f64 {
        l.0
    }
}

impl std::fmt::Display for Lambda {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// An observation `(x, y)` of a past and a present value, both strictly
/// positive and measured in the same unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivePair {
    x: f64,
    y: f64,
}

impl PositivePair {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        check_positive("past value x", x)?;
        check_positive("present value y", y)?;
        Ok(PositivePair { x, y })
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    /// The pair with past and present swapped.
    pub fn reversed(&self) -> PositivePair {
        PositivePair {
            x: self.y,
            y: self.x,
        }
    }

    /// Both coordinates multiplied by `c`, i.e. the same observation in a
    /// different measurement unit.
    pub fn scaled(&self, c: f64) -> Result<PositivePair> {
        PositivePair::new(c * self.x, c * self.y)
    }

    pub fn is_stagnant(&self) -> bool {
        self.x == self.y
    }
}

impl<'de> Deserialize<'de> for PositivePair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x: f64,
            y: f64,
        }
        let raw = Raw::deserialize(d)?;
        PositivePair::new(raw.x, raw.y).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}

/// `y − x`.
#[inline]
pub fn abs_change(p: PositivePair) -> f64 {
    p.y - p.x
}

/// `(y − x) / x`.
#[inline]
pub fn rel_change(p: PositivePair) -> f64 {
    (p.y - p.x) / p.x
}

/// `ln(y / x)`.
///
/// When `y` lies within a factor of two of `x` the difference `y − x` is exact
/// and `ln_1p((y − x) / x)` keeps full relative accuracy near stagnation;
/// otherwise the value is the difference `ln y − ln x`, which never forms the
/// (possibly overflowing) quotient.
pub fn log_ratio(p: PositivePair) -> f64 {
    let (x, y) = (p.x, p.y);
    if y >= 0.5 * x && y <= 2.0 * x {
        ((y - x) / x).ln_1p()
    } else {
        y.ln() - x.ln()
    }
}

/// `x^λ` with the endpoints 0 and 1 returned exactly.
#[inline]
fn pow_lambda(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else if lambda == 1.0 {
        x
    } else {
        x.powf(lambda)
    }
}

/// `f_λ(x, y) = (y − x) / x^λ`.
///
/// λ = 0 and λ = 1 return [`abs_change`] and [`rel_change`] bit for bit.
pub fn eval_f(lambda: Lambda, p: PositivePair) -> f64 {
    let l = lambda.value();
    if l == 0.0 {
        abs_change(p)
    } else if l == 1.0 {
        rel_change(p)
    } else {
        (p.y - p.x) / pow_lambda(p.x, l)
    }
}

/// `F_λ(x, y) = (y^{1−λ} − x^{1−λ}) / (1 − λ)`, and `ln(y / x)` at λ = 1.
///
/// With `a = 1 − λ` and `r = ln(y / x)` the value is evaluated as
/// `x^a · expm1(a·r) / a`. No difference of nearly equal powers is formed, so
/// the result stays accurate both as λ → 1 and as y → x. λ = 0 returns
/// [`abs_change`] and λ = 1 returns [`log_ratio`] bit for bit.
pub fn eval_big_f(lambda: Lambda, p: PositivePair) -> f64 {
    let l = lambda.value();
    if l == 0.0 {
        return abs_change(p);
    }
    let r = log_ratio(p);
    if l == 1.0 {
        return r;
    }
    let a = 1.0 - l;
    pow_lambda(p.x, a) * (a * r).exp_m1() / a
}

/// The Cobb-Douglas reading of `f_λ`: `rel(x, y)^λ · abs(x, y)^{1−λ}`.
///
/// Fractional powers of negative changes are not real, so only growth
/// (`y > x`) is accepted.
pub fn cobb_douglas_f(lambda: Lambda, p: PositivePair) -> Result<f64> {
    if p.y <= p.x {
        return Err(Error::GrowthOnly { x: p.x, y: p.y });
    }
    let l = lambda.value();
    Ok(pow_lambda(rel_change(p), l) * pow_lambda(abs_change(p), 1.0 - l))
}

/// Generalized quantity `y / x^λ` of an absolute quantity `y ≥ 0` relative to
/// `x > 0`: the absolute quantity at λ = 0, the relative one at λ = 1.
pub fn quantity_indicator(lambda: Lambda, x: f64, y: f64) -> Result<f64> {
    check_positive("x", x)?;
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::Negative {
            name: "y",
            value: y,
        });
    }
    let l = lambda.value();
    Ok(if l == 0.0 { y } else { y / pow_lambda(x, l) })
}

/// Unit-free quotient `f_λ(b) / f_λ(a)` comparing observation `b` against
/// the reference `a`.
pub fn relative_comparison(lambda: Lambda, a: PositivePair, b: PositivePair) -> Result<f64> {
    if a.is_stagnant() {
        return Err(Error::StagnantReference { x: a.x, y: a.y });
    }
    Ok(eval_f(lambda, b) / eval_f(lambda, a))
}
