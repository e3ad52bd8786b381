//! Parametric change indicators between a past value `x > 0` and a present
//! value `y > 0`.
//!
//! The family `f_λ(x, y) = (y − x) / x^λ` interpolates between absolute
//! change (λ = 0) and relative change (λ = 1). Its integrated counterpart
//! `F_λ(x, y) = (y^{1−λ} − x^{1−λ}) / (1 − λ)` reaches the log-ratio at
//! λ = 1. Around these sit calibration of λ from a judged pair of
//! observations, Taylor approximation of `F_λ`, randomized checks of the
//! defining properties, generalized elasticities, and ranking reports.

pub mod approximation;
pub mod axioms;
pub mod calibration;
pub mod elasticity;
pub mod error;
pub mod indicator;
pub mod report;

pub use approximation::{
    box_cox, curve_table, remainder_bound, taylor_big_f, taylor_coefficient, CurveTable,
    TaylorOrder,
};
pub use calibration::{calibrate_lambda, CalibrationInput};
pub use elasticity::{
    classical_elasticity, elasticity_quotient, generalized_elasticity, marginal, EconFunction,
};
pub use error::{Error, Result};
pub use indicator::{
    abs_change, cobb_douglas_f, eval_big_f, eval_f, log_ratio, quantity_indicator, rel_change,
    relative_comparison, Lambda, PositivePair,
};
pub use report::{
    parse_csv, rank, Dataset, IndicatorKind, IndicatorReport, LabeledObservation, OutputFormat,
};
