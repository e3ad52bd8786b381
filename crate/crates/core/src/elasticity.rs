//! Marginal functions, classical elasticity and the generalized elasticity
//! `ε_g^λ(x) = g'(x)·(x / g(x))^λ`, which is the marginal function at λ = 0
//! and the classical elasticity at λ = 1.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::indicator::Lambda;

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Relative step of the central finite difference used when no exact
/// derivative is available.
pub const FD_RELATIVE_STEP: f64 = 1e-6;

/// A positive-valued economic function of one variable, optionally carrying
/// its exact derivative and a closed form of its classical elasticity.
#[derive(Clone)]
pub struct EconFunction {
    name: String,
    eval: Arc<RealFn>,
    derivative: Option<Arc<RealFn>>,
    elasticity: Option<Arc<RealFn>>,
    domain: (f64, f64),
}

impl EconFunction {
    /// A function on `(0, ∞)` without derivative information.
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        EconFunction {
            name: name.into(),
            eval: Arc::new(eval),
            derivative: None,
            elasticity: None,
            domain: (0.0, f64::INFINITY),
        }
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Closed form of `g'(x)·x / g(x)`.
    pub fn with_elasticity<F>(mut self, elasticity: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.elasticity = Some(Arc::new(elasticity));
        self
    }

    /// Open interval on which the function is defined and positive.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    /// The same function with all closed forms dropped, so every derived
    /// quantity goes through finite differences.
    pub fn numeric_only(&self) -> Self {
        EconFunction {
            derivative: None,
            elasticity: None,
            ..self.clone()
        }
    }

    /// `A·x^k`, A > 0, on `(0, ∞)`. Constant elasticity `k`.
    pub fn power(a: f64, k: f64) -> Result<Self> {
        check_param("A", a, a > 0.0)?;
        check_param("k", k, true)?;
        Ok(
            EconFunction::new(format!("power:A={a},k={k}"), move |x| a * x.powf(k))
                .with_derivative(move |x| a * k * x.powf(k - 1.0))
                .with_elasticity(move |_| k),
        )
    }

    /// `A·e^{bx}`, A > 0, defined on all reals. Elasticity `b·x`.
    pub fn exponential(a: f64, b: f64) -> Result<Self> {
        check_param("A", a, a > 0.0)?;
        check_param("b", b, true)?;
        Ok(
            EconFunction::new(format!("exp:A={a},b={b}"), move |x| a * (b * x).exp())
                .with_derivative(move |x| a * b * (b * x).exp())
                .with_elasticity(move |x| b * x)
                .with_domain(f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    /// `a + b·x`, restricted to the positive part of `(0, ∞)` where
    /// `a + b·x > 0`. Elasticity `b·x / (a + b·x)`.
    pub fn affine(a: f64, b: f64) -> Result<Self> {
        check_param("a", a, true)?;
        check_param("b", b, true)?;
        let root = -a / b;
        let domain = if b > 0.0 {
            (root.max(0.0), f64::INFINITY)
        } else if b < 0.0 && a > 0.0 {
            (0.0, root)
        } else if b == 0.0 && a > 0.0 {
            (0.0, f64::INFINITY)
        } else {
            return Err(Error::InvalidFunction(format!(
                "affine:a={a},b={b} is nowhere positive on x > 0"
            )));
        };
        Ok(
            EconFunction::new(format!("affine:a={a},b={b}"), move |x| a + b * x)
                .with_derivative(move |_| b)
                .with_elasticity(move |x| b * x / (a + b * x))
                .with_domain(domain.0, domain.1),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.domain.0 && x < self.domain.1
    }

    fn require(&self, x: f64) -> Result<()> {
        if x.is_finite() && self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                function: self.name.clone(),
                x,
            })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.require(x)?;
        Ok((self.eval)(x))
    }

    /// `g(x)`, which must be strictly positive, at `x > 0`.
    fn positive_at(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::OutOfDomain {
                function: self.name.clone(),
                x,
            });
        }
        let value = self.eval(x)?;
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonPositiveValue {
                function: self.name.clone(),
                x,
                value,
            })
        }
    }
}

impl fmt::Debug for EconFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EconFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("derivative", &self.derivative.is_some())
            .finish()
    }
}

fn check_param(name: &str, value: f64, ok: bool) -> Result<()> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(Error::InvalidFunction(format!(
            "parameter {name} = {value} is not allowed"
        )))
    }
}

/// Parses `family:key=value,...`, e.g. `power:A=5,k=0.3`, `exp:A=1,b=2` or
/// `affine:a=1,b=0.5`. Missing parameters take the defaults A = 1, k = 1,
/// b = 1, a = 0.
impl FromStr for EconFunction {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
        let mut values: Vec<(String, f64)> = Vec::new();
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidFunction(format!("expected key=value, got '{item}'"))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::InvalidFunction(format!("parameter {key} is not a number: '{value}'"))
            })?;
            values.push((key.trim().to_string(), value));
        }
        let take = |allowed: &[(&str, f64)]| -> Result<Vec<f64>> {
            for (key, _) in &values {
                if !allowed.iter().any(|(k, _)| k == key) {
                    return Err(Error::InvalidFunction(format!(
                        "unknown parameter '{key}' for {family}"
                    )));
                }
            }
            Ok(allowed
                .iter()
                .map(|(k, default)| {
                    values
                        .iter()
                        .rev()
                        .find(|(key, _)| key == k)
                        .map_or(*default, |&(_, v)| v)
                })
                .collect())
        };
        match family.trim() {
            "power" => {
                let p = take(&[("A", 1.0), ("k", 1.0)])?;
                EconFunction::power(p[0], p[1])
            }
            "exp" | "exponential" => {
                let p = take(&[("A", 1.0), ("b", 1.0)])?;
                EconFunction::exponential(p[0], p[1])
            }
            "affine" => {
                let p = take(&[("a", 0.0), ("b", 1.0)])?;
                EconFunction::affine(p[0], p[1])
            }
            other => Err(Error::InvalidFunction(format!(
                "unknown function family '{other}' (expected power, exp or affine)"
            ))),
        }
    }
}

/// `g'(x)`: the exact derivative when available, otherwise
/// [`marginal_finite_difference`].
pub fn marginal(g: &EconFunction, x: f64) -> Result<f64> {
    g.require(x)?;
    match &g.derivative {
        Some(d) => Ok(d(x)),
        None => marginal_finite_difference(g, x),
    }
}

/// Central difference `(g(x+h) − g(x−h)) / 2h` with `h = max(|x|, 1)·10⁻⁶`.
pub fn marginal_finite_difference(g: &EconFunction, x: f64) -> Result<f64> {
    g.require(x)?;
    let h = x.abs().max(1.0) * FD_RELATIVE_STEP;
    let (up, down) = (x + h, x - h);
    Ok(((g.eval)(up) - (g.eval)(down)) / (up - down))
}

/// `ε_g(x) = g'(x)·x / g(x)`, or the function's closed-form elasticity.
pub fn classical_elasticity(g: &EconFunction, x: f64) -> Result<f64> {
    let value = g.positive_at(x)?;
    match &g.elasticity {
        Some(e) => Ok(e(x)),
        None => Ok(marginal(g, x)? * x / value),
    }
}

/// `ε_g^λ(x) = g'(x)·(x / g(x))^λ`.
///
/// λ = 0 returns [`marginal`] and λ = 1 returns [`classical_elasticity`].
pub fn generalized_elasticity(lambda: Lambda, g: &EconFunction, x: f64) -> Result<f64> {
    let value = g.positive_at(x)?;
    let l = lambda.value();
    if l == 0.0 {
        marginal(g, x)
    } else if l == 1.0 {
        classical_elasticity(g, x)
    } else {
        Ok(marginal(g, x)? * (x / value).powf(l))
    }
}

/// The difference quotient whose limit as `h → 0` is the generalized
/// elasticity:
///
/// ```text
/// ((g(x+h) − g(x)) / g(x)^λ) / (h / x^λ)
/// ```
///
/// The step actually used is the representable `(x + h) − x`.
pub fn elasticity_quotient(lambda: Lambda, g: &EconFunction, x: f64, h: f64) -> Result<f64> {
    if h == 0.0 {
        return Err(Error::ZeroStep);
    }
    let gx = g.positive_at(x)?;
    let y = x + h;
    let gy = g.positive_at(y)?;
    let step = y - x;
    let l = lambda.value();
    let q = if l == 0.0 {
        (gy - gx) / step
    } else if l == 1.0 {
        ((gy - gx) / gx) / (step / x)
    } else {
        ((gy - gx) / gx.powf(l)) / (step / x.powf(l))
    };
    Ok(q)
}
