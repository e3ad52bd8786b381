//! Sampling-based checkers for the axioms an indicator of change may satisfy.
//!
//! Each checker draws a deterministic stream of inputs from a [`SampleConfig`],
//! evaluates the residual of one identity per sample, and reports the largest
//! normalized residual together with the input that produced it. Residuals are
//! divided by `max(1, |terms|)`, so identities are checked relative to the
//! magnitude of the values involved once those exceed 1 and absolutely below.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indicator::{
    abs_change, eval_big_f, eval_f, log_ratio, rel_change, Lambda, PositivePair,
};

/// Normalized residual tolerance for identities that hold exactly in real
/// arithmetic.
pub const CHECK_TOLERANCE: f64 = 1e-9;

/// A counterexample must exceed this normalized residual to count as a
/// violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-6;

/// Step sizes, relative to `x`, at which the linearization is probed.
const NORMED_STEPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

type Evaluator = dyn Fn(PositivePair) -> f64 + Send + Sync;

/// A function of a positive pair under test.
#[derive(Clone)]
pub struct Indicator {
    name: String,
    eval: Arc<Evaluator>,
}

impl Indicator {
    pub fn new<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(PositivePair) -> f64 + Send + Sync + 'static,
    {
        Indicator {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn f(lambda: Lambda) -> Self {
        Indicator::new(format!("f_{lambda}"), move |p| eval_f(lambda, p))
    }

    pub fn big_f(lambda: Lambda) -> Self {
        Indicator::new(format!("F_{lambda}"), move |p| eval_big_f(lambda, p))
    }

    pub fn abs() -> Self {
        Indicator::new("abs", abs_change)
    }

    pub fn rel() -> Self {
        Indicator::new("rel", rel_change)
    }

    pub fn log_ratio() -> Self {
        Indicator::new("log_ratio", log_ratio)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, p: PositivePair) -> f64 {
        (self.eval)(p)
    }

    /// Evaluates at raw coordinates, which must be positive.
    fn at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval(PositivePair::new(x, y)?))
    }
}

impl fmt::Debug for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Indicator")
            .field("name", &self.name)
            .finish()
    }
}

/// Parameters of the random input stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub count: usize,
    /// Pair coordinates are drawn log-uniformly from this range.
    pub value_range: (f64, f64),
    /// λ is drawn uniformly from this range (only used by [`check_normed`]).
    pub lambda_range: (f64, f64),
    /// Scale factors C are drawn log-uniformly from this range.
    pub scale_range: (f64, f64),
}

pub const DEFAULT_SEED: u64 = 0x00C0_FFEE;

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: DEFAULT_SEED,
            count: 10_000,
            value_range: (1e-3, 1e3),
            lambda_range: (-1.0, 2.0),
            scale_range: (1e-3, 1e3),
        }
    }
}

impl SampleConfig {
    pub fn with_seed(seed: u64) -> Self {
        SampleConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive_range = |name: &str, (lo, hi): (f64, f64)| {
            if lo > 0.0 && lo < hi && hi.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidRange(format!(
                    "{name} must satisfy 0 < lo < hi, got ({lo}, {hi})"
                )))
            }
        };
        positive_range("value range", self.value_range)?;
        positive_range("scale range", self.scale_range)?;
        let (lo, hi) = self.lambda_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidRange(format!(
                "lambda range ({lo}, {hi}) is empty"
            )));
        }
        if self.count == 0 {
            return Err(Error::InvalidRange("sample count must be positive".into()));
        }
        Ok(())
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    cfg: SampleConfig,
}

impl Sampler {
    fn new(cfg: &SampleConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Sampler {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg: *cfg,
        })
    }

    fn log_uniform(&mut self, (lo, hi): (f64, f64)) -> f64 {
        let e = self.rng.random_range(lo.ln()..=hi.ln());
        e.exp().clamp(lo, hi)
    }

    fn value(&mut self) -> f64 {
        self.log_uniform(self.cfg.value_range)
    }

    fn scale(&mut self) -> f64 {
        self.log_uniform(self.cfg.scale_range)
    }

    fn lambda(&mut self) -> Lambda {
        let (lo, hi) = self.cfg.lambda_range;
        Lambda::new(self.rng.random_range(lo..=hi)).expect("finite range")
    }

    fn unit(&mut self) -> f64 {
        self.rng.random_range(0.0..=1.0)
    }

    fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }
}

/// Raw residual of one identity at one input, with the magnitude it is
/// normalized by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub raw: f64,
    pub scale: f64,
}

impl Residual {
    fn of(raw: f64, terms: &[f64]) -> Self {
        let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        Residual {
            raw: raw.abs(),
            scale,
        }
    }

    pub fn normalized(&self) -> f64 {
        self.raw / self.scale
    }
}

/// The input at which a check observed its largest residual. Serializes as a
/// JSON object with keys in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Witness(Vec<(&'static str, f64)>);

impl Witness {
    pub fn new(fields: &[(&'static str, f64)]) -> Self {
        Witness(fields.to_vec())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.0.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
    }

    pub fn fields(&self) -> &[(&'static str, f64)] {
        &self.0
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub samples: usize,
    pub max_residual: f64,
    pub worst_case: Witness,
    pub pass: bool,
    #[serde(skip)]
    pub tolerance: f64,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Tracks the largest residual seen so far; NaN counts as a violation.
struct Worst {
    property: &'static str,
    tolerance: f64,
    samples: usize,
    max: f64,
    witness: Witness,
}

impl Worst {
    fn new(property: &'static str, tolerance: f64) -> Self {
        Worst {
            property,
            tolerance,
            samples: 0,
            max: 0.0,
            witness: Witness::default(),
        }
    }

    fn record(&mut self, residual: f64, witness: &[(&'static str, f64)]) {
        self.samples += 1;
        let residual = if residual.is_nan() {
            f64::INFINITY
        } else {
            residual
        };
        if residual > self.max || self.witness.0.is_empty() {
            self.max = residual;
            self.witness = Witness::new(witness);
        }
    }

    fn finish(self) -> CheckReport {
        CheckReport {
            property: self.property.to_string(),
            samples: self.samples,
            pass: self.max <= self.tolerance,
            max_residual: self.max,
            worst_case: self.witness,
            tolerance: self.tolerance,
        }
    }
}

/// `ind(x, (1−t)y₁ + t·y₂) − (1−t)·ind(x, y₁) − t·ind(x, y₂)`.
pub fn affine_residual(ind: &Indicator, x: f64, y1: f64, y2: f64, t: f64) -> Result<Residual> {
    let mixed = ind.at(x, (1.0 - t) * y1 + t * y2)?;
    let a = (1.0 - t) * ind.at(x, y1)?;
    let b = t * ind.at(x, y2)?;
    Ok(Residual::of(mixed - a - b, &[mixed, a, b]))
}

/// `ind(x, y)·ind(Cx̄, Cȳ) − ind(x̄, ȳ)·ind(Cx, Cy)`.
pub fn scaling_residual(
    ind: &Indicator,
    (x, y): (f64, f64),
    (xb, yb): (f64, f64),
    c: f64,
) -> Result<Residual> {
    let lhs = ind.at(x, y)? * ind.at(c * xb, c * yb)?;
    let rhs = ind.at(xb, yb)? * ind.at(c * x, c * y)?;
    Ok(Residual::of(lhs - rhs, &[lhs, rhs]))
}

/// `ind(Cx, Cy) − ind(x, y)`.
pub fn vartia_residual(ind: &Indicator, x: f64, y: f64, c: f64) -> Result<Residual> {
    let scaled = ind.at(c * x, c * y)?;
    let plain = ind.at(x, y)?;
    Ok(Residual::of(scaled - plain, &[scaled, plain]))
}

/// `ind(x, y) + ind(y, x)`.
pub fn antisymmetry_residual(ind: &Indicator, x: f64, y: f64) -> Result<Residual> {
    let forward = ind.at(x, y)?;
    let backward = ind.at(y, x)?;
    Ok(Residual::of(forward + backward, &[forward, backward]))
}

/// `ind(x, y) + ind(y, z) − ind(x, z)`.
pub fn additivity_residual(ind: &Indicator, x: f64, y: f64, z: f64) -> Result<Residual> {
    let first = ind.at(x, y)?;
    let second = ind.at(y, z)?;
    let whole = ind.at(x, z)?;
    Ok(Residual::of(
        first + second - whole,
        &[first, second, whole],
    ))
}

/// Affine linearity in the present value: `ind(x, y) = m(x)·y + b(x)`.
pub fn check_affine_linearity(ind: &Indicator, cfg: &SampleConfig) -> Result<CheckReport> {
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("affine_linearity", CHECK_TOLERANCE);
    for _ in 0..cfg.count {
        let (x, y1, y2, t) = (s.value(), s.value(), s.value(), s.unit());
        let r = affine_residual(ind, x, y1, y2, t)?;
        worst.record(
            r.normalized(),
            &[("x", x), ("y1", y1), ("y2", y2), ("t", t)],
        );
    }
    Ok(worst.finish())
}

/// Naturality: `ind(x, x) = 0` exactly, the sign of `ind(x, y)` is the sign
/// of `y − x`, values are finite, and `y ↦ ind(x, y)` is non-decreasing.
///
/// Continuity cannot be observed by sampling; finiteness and monotonicity
/// stand in for it. A violated sign or ordering has residual 1.
pub fn check_naturality(ind: &Indicator, cfg: &SampleConfig) -> Result<CheckReport> {
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("naturality", 0.0);
    for i in 0..cfg.count {
        let x = s.value();
        let (y, other) = (s.value(), s.value());
        let y = if i % 8 == 0 { x } else { y };
        let v = ind.at(x, y)?;
        let w = ind.at(x, other)?;
        let residual = if !v.is_finite() || !w.is_finite() {
            f64::INFINITY
        } else if x == y {
            v.abs()
        } else if v.signum() != (y - x).signum()
            || v == 0.0
            || (y < other && v > w)
            || (other < y && w > v)
        {
            1.0
        } else {
            0.0
        };
        worst.record(residual, &[("x", x), ("y", y), ("y_other", other)]);
    }
    Ok(worst.finish())
}

/// Relative scaling invariance: `ind(x,y)·ind(Cx̄,Cȳ) = ind(x̄,ȳ)·ind(Cx,Cy)`.
pub fn check_relative_scaling(ind: &Indicator, cfg: &SampleConfig) -> Result<CheckReport> {
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("relative_scaling", CHECK_TOLERANCE);
    for _ in 0..cfg.count {
        let (x, y, xb, yb, c) = (s.value(), s.value(), s.value(), s.value(), s.scale());
        let r = scaling_residual(ind, (x, y), (xb, yb), c)?;
        worst.record(
            r.normalized(),
            &[("x", x), ("y", y), ("x_bar", xb), ("y_bar", yb), ("c", c)],
        );
    }
    Ok(worst.finish())
}

/// Full scale invariance `ind(Cx, Cy) = ind(x, y)`, which characterizes
/// indicators of purely relative change.
pub fn check_vartia_invariance(ind: &Indicator, cfg: &SampleConfig) -> Result<CheckReport> {
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("vartia_invariance", CHECK_TOLERANCE);
    for _ in 0..cfg.count {
        let (x, y, c) = (s.value(), s.value(), s.scale());
        let r = vartia_residual(ind, x, y, c)?;
        worst.record(r.normalized(), &[("x", x), ("y", y), ("c", c)]);
    }
    Ok(worst.finish())
}

/// `ind(x, y) = −ind(y, x)`.
pub fn check_antisymmetry(ind: &Indicator, cfg: &SampleConfig) -> Result<CheckReport> {
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("antisymmetry", CHECK_TOLERANCE);
    for _ in 0..cfg.count {
        let (x, y) = (s.value(), s.value());
        let r = antisymmetry_residual(ind, x, y)?;
        worst.record(r.normalized(), &[("x", x), ("y", y)]);
    }
    Ok(worst.finish())
}

/// `ind(x, y) + ind(y, z) = ind(x, z)`.
pub fn check_additivity(ind: &Indicator, cfg: &SampleConfig) -> Result<CheckReport> {
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("additivity", CHECK_TOLERANCE);
    for _ in 0..cfg.count {
        let (x, y, z) = (s.value(), s.value(), s.value());
        let r = additivity_residual(ind, x, y, z)?;
        worst.record(r.normalized(), &[("x", x), ("y", y), ("z", z)]);
    }
    Ok(worst.finish())
}

/// Second-order constant `K` with `|F_λ(x, y) − f_λ(x, y)| ≤ K·(y − x)²`.
///
/// For λ ≥ 0 this is the remainder bound `λ / min(x, y)^{1+λ}`. For λ < 0 the
/// second derivative `−λ·t^{−1−λ}` peaks at the other end of the interval, so
/// the larger of the two endpoint values is used.
pub fn second_order_constant(lambda: Lambda, x: f64, y: f64) -> f64 {
    let l = lambda.value();
    let e = -1.0 - l;
    l.abs() * x.powf(e).max(y.powf(e))
}

/// Normedness: the linearization of `y ↦ F(x, y)` at `y = x` equals `f`.
///
/// For each sampled `(λ, x)` the pair `(x, x ± s·x)` is probed at
/// `s ∈ {10⁻¹, …, 10⁻⁴}` and `|F − f|` is compared with `K·h²` from
/// [`second_order_constant`]. The residual is the ratio of the two (with a
/// few ulps of slack), so the check passes when it stays at or below 1.
pub fn check_normed<BigF, SmallF>(
    big_family: BigF,
    small_family: SmallF,
    cfg: &SampleConfig,
) -> Result<CheckReport>
where
    BigF: Fn(Lambda) -> Indicator,
    SmallF: Fn(Lambda) -> Indicator,
{
    let mut s = Sampler::new(cfg)?;
    let mut worst = Worst::new("normed", 1.0);
    for _ in 0..cfg.count {
        let lambda = s.lambda();
        let x = s.value();
        let sign = if s.coin() { 1.0 } else { -1.0 };
        let (big, small) = (big_family(lambda), small_family(lambda));
        let mut sample_worst = (0.0f64, 0.0f64);
        for step in NORMED_STEPS {
            let h = sign * step * x;
            let y = x + h;
            let (fb, fs) = (big.at(x, y)?, small.at(x, y)?);
            let gap = (fb - fs).abs();
            let allowed = second_order_constant(lambda, x, y) * h * h
                + 8.0 * f64::EPSILON * (fb.abs() + fs.abs());
            let ratio = if gap == 0.0 { 0.0 } else { gap / allowed };
            if ratio.is_nan() || ratio > sample_worst.0 {
                sample_worst = (ratio, h);
            }
        }
        worst.record(
            sample_worst.0,
            &[("lambda", lambda.value()), ("x", x), ("h", sample_worst.1)],
        );
    }
    Ok(worst.finish())
}

/// What `verify` exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// `f_λ`
    SmallF,
    /// `F_λ`
    BigF,
    Rel,
    Abs,
    Log,
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(Target::SmallF),
            "F" => Ok(Target::BigF),
            "rel" => Ok(Target::Rel),
            "abs" => Ok(Target::Abs),
            "log" | "log_ratio" => Ok(Target::Log),
            other => Err(Error::Validation {
                message: format!(
                    "unknown verify target '{other}' (expected f, F, rel, abs or log)"
                ),
            }),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::SmallF => "f",
            Target::BigF => "F",
            Target::Rel => "rel",
            Target::Abs => "abs",
            Target::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    AffineLinearity,
    Naturality,
    RelativeScaling,
    VartiaInvariance,
    Antisymmetry,
    Additivity,
    Normed,
}

/// A check together with the outcome the theory predicts for it.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifiedCheck {
    pub report: CheckReport,
    pub expected_pass: bool,
}

impl VerifiedCheck {
    pub fn as_expected(&self) -> bool {
        self.report.pass == self.expected_pass
    }
}

/// The properties checked for `target` and whether each should hold.
pub fn verification_plan(target: Target, lambda: Lambda) -> Vec<(Property, bool)> {
    use Property::*;
    match target {
        Target::SmallF => vec![
            (AffineLinearity, true),
            (Naturality, true),
            (RelativeScaling, true),
            (VartiaInvariance, lambda.value() == 1.0),
        ],
        Target::BigF => vec![
            (Naturality, true),
            (RelativeScaling, true),
            (Antisymmetry, true),
            (Additivity, true),
            (Normed, true),
        ],
        Target::Rel => vec![
            (AffineLinearity, true),
            (Naturality, true),
            (RelativeScaling, true),
            (VartiaInvariance, true),
            (Antisymmetry, false),
            (Additivity, false),
        ],
        Target::Abs => vec![
            (AffineLinearity, true),
            (Naturality, true),
            (RelativeScaling, true),
            (VartiaInvariance, false),
            (Antisymmetry, true),
            (Additivity, true),
        ],
        Target::Log => vec![
            (AffineLinearity, false),
            (Naturality, true),
            (RelativeScaling, true),
            (VartiaInvariance, true),
            (Antisymmetry, true),
            (Additivity, true),
        ],
    }
}

pub fn target_indicator(target: Target, lambda: Lambda) -> Indicator {
    match target {
        Target::SmallF => Indicator::f(lambda),
        Target::BigF => Indicator::big_f(lambda),
        Target::Rel => Indicator::rel(),
        Target::Abs => Indicator::abs(),
        Target::Log => Indicator::log_ratio(),
    }
}

/// Runs every check in the [`verification_plan`] of `target`.
///
/// For the normed check λ is pinned to `lambda` (the configured λ range is
/// ignored) and the linear reference is `f_λ` for `F` and rel for `log`.
pub fn verify(target: Target, lambda: Lambda, cfg: &SampleConfig) -> Result<Vec<VerifiedCheck>> {
    let ind = target_indicator(target, lambda);
    verification_plan(target, lambda)
        .into_iter()
        .map(|(property, expected_pass)| {
            let report = match property {
                Property::AffineLinearity => check_affine_linearity(&ind, cfg)?,
                Property::Naturality => check_naturality(&ind, cfg)?,
                Property::RelativeScaling => check_relative_scaling(&ind, cfg)?,
                Property::VartiaInvariance => check_vartia_invariance(&ind, cfg)?,
                Property::Antisymmetry => check_antisymmetry(&ind, cfg)?,
                Property::Additivity => check_additivity(&ind, cfg)?,
                Property::Normed => {
                    let pinned = SampleConfig {
                        lambda_range: (lambda.value(), lambda.value()),
                        ..*cfg
                    };
                    check_normed(Indicator::big_f, Indicator::f, &pinned)?
                }
            };
            Ok(VerifiedCheck {
                report,
                expected_pass,
            })
        })
        .collect()
}
