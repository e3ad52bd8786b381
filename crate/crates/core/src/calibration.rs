//! Choosing λ: calibration from a pair of observations judged equally good,
//! and the diagnostics behind the symmetric choice λ = 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::{eval_f, Lambda, PositivePair};

/// Relative tolerance for the self-check performed by [`calibrate_lambda`].
pub const CALIBRATION_TOLERANCE: f64 = 1e-9;

/// Past values closer than this in log space cannot determine λ.
const MIN_LOG_SEPARATION: f64 = 1e-12;

/// Two observations that should receive the same indicator value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInput {
    pub reference: PositivePair,
    pub comparison: PositivePair,
}

impl CalibrationInput {
    pub fn new(reference: PositivePair, comparison: PositivePair) -> Result<Self> {
        let input = CalibrationInput {
            reference,
            comparison,
        };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        let (r, c) = (self.reference, self.comparison);
        for p in [r, c] {
            if p.is_stagnant() {
                return Err(Error::StagnantPair { x: p.x(), y: p.y() });
            }
        }
        if r.x() == c.x() || (c.x() / r.x()).ln().abs() < MIN_LOG_SEPARATION {
            return Err(Error::EqualPastValues { x: r.x() });
        }
        if (r.y() > r.x()) != (c.y() > c.x()) {
            return Err(Error::SignMismatch);
        }
        Ok(())
    }
}

/// The λ for which `f_λ(reference) = f_λ(comparison)`:
///
/// ```text
/// λ = ln((ȳ − x̄) / (y − x)) / ln(x̄ / x)
/// ```
///
/// The result is not clamped to [0, 1]. Before returning, both pairs are
/// re-evaluated at the computed λ and the call fails with
/// [`Error::CalibrationResidual`] if they disagree by more than
/// [`CALIBRATION_TOLERANCE`] (relative).
pub fn calibrate_lambda(input: &CalibrationInput) -> Result<Lambda> {
    input.validate()?;
    let (r, c) = (input.reference, input.comparison);
    let change_ratio = (c.y() - c.x()) / (r.y() - r.x());
    let value = change_ratio.ln() / (c.x() / r.x()).ln();
    let lambda = Lambda::new(value)?;

    let residual = calibration_residual(lambda, input);
    if residual.is_finite() && residual <= CALIBRATION_TOLERANCE {
        Ok(lambda)
    } else {
        Err(Error::CalibrationResidual {
            lambda: value,
            residual,
        })
    }
}

/// `|f_λ(ref) − f_λ(cmp)| / max(|f_λ(ref)|, |f_λ(cmp)|)`.
pub fn calibration_residual(lambda: Lambda, input: &CalibrationInput) -> f64 {
    let a = eval_f(lambda, input.reference);
    let b = eval_f(lambda, input.comparison);
    (a - b).abs() / a.abs().max(b.abs())
}

/// `f_λ(Cx, Cy) − f_λ(x/C, y − x + x/C)`.
///
/// The first pair keeps the relative change and scales the absolute change by
/// C; the second keeps the absolute change and scales the relative change by
/// C. Analytically the residual is `(C^{1−λ} − C^λ)·f_λ(x, y)`, which vanishes
/// for every C only at λ = 1/2.
pub fn symmetric_scaling_residual(lambda: Lambda, p: PositivePair, c: f64) -> Result<f64> {
    let (lhs, rhs) = symmetric_scaling_sides(lambda, p, c)?;
    Ok(lhs - rhs)
}

/// Both sides of [`symmetric_scaling_residual`].
pub fn symmetric_scaling_sides(lambda: Lambda, p: PositivePair, c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::NonPositive {
            name: "C",
            value: c,
        });
    }
    let scaled_abs = p.scaled(c)?;
    let past = p.x() / c;
    let present = p.y() - p.x() + past;
    let scaled_rel =
        PositivePair::new(past, present).map_err(|_| Error::InvalidConstructedPair {
            x: past,
            y: present,
        })?;
    Ok((eval_f(lambda, scaled_abs), eval_f(lambda, scaled_rel)))
}

/// `(f_λ(2, 4), f_λ(1/2, 3/2))`: doubling the absolute change of the
/// reference `(1, 2)` versus doubling its relative change. The components are
/// `2^{1−λ}` and `2^λ` and coincide only at λ = 1/2.
pub fn doubling_example(lambda: Lambda) -> (f64, f64) {
    let doubled_abs = PositivePair::new(2.0, 4.0).expect("valid pair");
    let doubled_rel = PositivePair::new(0.5, 1.5).expect("valid pair");
    (eval_f(lambda, doubled_abs), eval_f(lambda, doubled_rel))
}

/// Marginal rate of substitution `λ/(1 − λ) · x` of the Cobb-Douglas reading
/// of `f_λ` (with `L = rel`, `K = abs`). Only the past value is used.
pub fn mrs_cobb_douglas(lambda: Lambda, p: PositivePair) -> Result<f64> {
    let l = lambda.value();
    if l == 1.0 {
        return Err(Error::LambdaIsOne);
    }
    Ok(l / (1.0 - l) * p.x())
}
