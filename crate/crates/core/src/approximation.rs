//! Taylor expansion of `y ↦ F_λ(x, y)` around `y = x`, the quadratic bound
//! between `F_λ` and its linearization `f_λ`, and the Box-Cox view of
//! `F_λ(1, y)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::indicator::{check_positive, eval_big_f, eval_f, Lambda, PositivePair};

/// Largest supported truncation order.
pub const MAX_TAYLOR_ORDER: u32 = 64;

/// Truncation order `n` of the Taylor series; `n = 1` is the linear term
/// `f_λ` alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TaylorOrder(u32);

impl TaylorOrder {
    pub fn new(n: u32) -> Result<Self> {
        if (1..=MAX_TAYLOR_ORDER).contains(&n) {
            Ok(TaylorOrder(n))
        } else {
            Err(Error::InvalidOrder(n))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// The coefficient of `(y − x)^k` in the expansion of `F_λ(x, ·)` at `x`:
///
/// ```text
/// (−1)^{k+1} Γ(λ+k−1) / (k! · x^{k+λ−1} · Γ(λ))
/// ```
///
/// The Gamma quotient is the rising factorial `λ(λ+1)···(λ+k−2)`, which is
/// finite for every real λ and zero at λ = 0.
pub fn taylor_coefficient(lambda: Lambda, k: u32, x: f64) -> Result<f64> {
    if !(2..=MAX_TAYLOR_ORDER).contains(&k) {
        return Err(Error::InvalidOrder(k));
    }
    check_positive("x", x)?;
    let l = lambda.value();
    // Π_{j=0}^{k−2} (λ + j) / (j + 2) is the rising factorial over k!
    let ratio: f64 = (0..k - 1)
        .map(|j| (l + j as f64) / (j as f64 + 2.0))
        .product();
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    Ok(sign * ratio * x.powf(-(k as f64 + l - 1.0)))
}

/// `F_λ(x, y)` approximated by its Taylor polynomial of order `n` around `x`.
///
/// The series converges for `|y − x| < x`; outside that range the truncation
/// is still evaluated but carries no accuracy guarantee. Order 1 returns
/// [`eval_f`] exactly.
pub fn taylor_big_f(lambda: Lambda, p: PositivePair, order: TaylorOrder) -> f64 {
    let l = lambda.value();
    let first = eval_f(lambda, p);
    let step = (p.y() - p.x()) / p.x();
    let mut term = first;
    let mut sum = first;
    for k in 1..order.get() {
        let k = k as f64;
        term *= -(l + k - 1.0) / (k + 1.0) * step;
        sum += term;
    }
    sum
}

/// Upper bound `λ·(y − x)² / min(x, y)^{1+λ}` on `|F_λ(x, y) − f_λ(x, y)|`.
///
/// Only asserted for λ ≥ 0; negative λ is rejected.
pub fn remainder_bound(lambda: Lambda, p: PositivePair) -> Result<f64> {
    let l = lambda.value();
    if l < 0.0 {
        return Err(Error::NegativeLambda(l));
    }
    if l == 0.0 {
        return Ok(0.0);
    }
    let h = p.y() - p.x();
    Ok(l * h * h / p.x().min(p.y()).powf(1.0 + l))
}

/// `F_λ(x, x + h) − f_λ(x, x + h)`, which is `O(h²)` as `h → 0`.
pub fn linearization_residual(lambda: Lambda, x: f64, h: f64) -> Result<f64> {
    check_positive("x", x)?;
    let y = x + h;
    let p = PositivePair::new(x, y).map_err(|_| Error::InvalidConstructedPair { x, y })?;
    Ok(eval_big_f(lambda, p) - eval_f(lambda, p))
}

/// `F_λ(1, y)`, the Box-Cox transform of `y` with power `1 − λ`.
pub fn box_cox(lambda: Lambda, y: f64) -> Result<f64> {
    Ok(eval_big_f(lambda, PositivePair::new(1.0, y)?))
}

/// Values of `F_λ(1, y)` for several λ over a grid of `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTable {
    pub lambdas: Vec<Lambda>,
    pub rows: Vec<CurveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub y: f64,
    pub values: Vec<f64>,
}

/// The λ values of the default curve set: 0, 1/5, 1/2 and 1.
pub fn default_curve_lambdas() -> Vec<Lambda> {
    [0.0, 0.2, 0.5, 1.0]
        .into_iter()
        .map(|v| Lambda::new(v).expect("finite"))
        .collect()
}

/// Default curve grid: 500 uniform points on [0.01, 5].
pub fn default_curve_grid() -> Vec<f64> {
    uniform_grid(0.01, 5.0, 500).expect("valid default grid")
}

/// `points` uniformly spaced values from `lo` to `hi`, both included.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidRange(format!(
            "need lo < hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidRange(format!(
            "need at least 2 points, got {points}"
        )));
    }
    let n = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let i = i as f64;
            (lo * (n - i) + hi * i) / n
        })
        .collect())
}

pub fn curve_table(lambdas: &[Lambda], grid: &[f64]) -> Result<CurveTable> {
    let rows = grid
        .iter()
        .map(|&y| {
            let values = lambdas
                .iter()
                .map(|&l| box_cox(l, y))
                .collect::<Result<Vec<_>>>()?;
            Ok(CurveRow { y, values })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveTable {
        lambdas: lambdas.to_vec(),
        rows,
    })
}

impl CurveTable {
    /// CSV with header `y,F_<λ>,...`; values in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y");
        for l in &self.lambdas {
            out.push_str(",F_");
            out.push_str(&format_significant(l.value(), 4));
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{}", row.y).unwrap();
            for v in &row.values {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Renders `v` with at most `digits` significant digits, trailing zeros
/// dropped (`0.2`, `0.3333`, `1`).
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{}", if v == 0.0 { 0.0 } else { v });
    }
    let magnitude = v.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
