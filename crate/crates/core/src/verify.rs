//! Seeded verification batches, one per monotonicity claim or integral
//! identity.
//!
//! A batch walks the trial stream `(seed, 0), (seed, 1), …`, drawing each
//! trial's inputs from its own substream, until `trials` trials have been
//! evaluated. Sampler rejections (and trials whose inputs fail a re-check)
//! are counted but not evaluated. Trials run in parallel blocks; outcomes are
//! consumed in index order, so reports do not depend on scheduling.
//!
//! Every trial yields a normalized margin, `(larger side − smaller side) /
//! scale`, and passes iff the margin is at least `−tolerance`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    divided_difference_power, eval_integral_identity, power_sum, renyi_entropy, shannon_entropy,
    subentropy_closed, subentropy_integral, sum_sq_logs, EntropyOrder, IntegralRepresentation,
    SubentropyInput, DEFAULT_GAP_THRESHOLD,
};
use crate::order::{
    compare, esym_all, log_spaced_grid, verify_generating_inequality, ComparisonTolerance,
    PositiveVector,
};
use crate::sampling::{
    default_shrink, majorization_pair, matrix_pair, matrix_triple, sample_pair, substream,
    uses_general_generator, DominancePair, PairConstraint,
};
use crate::spd::{
    format_f64, logdet_I_plus, quantum_renyi, relative_spectrum, riemannian_distance, s_divergence,
    SpdMatrix,
};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default pass tolerance on normalized margins.
pub const MARGIN_TOL: f64 = 1e-8;
/// Tolerance for the purely algebraic checks (Schur-concavity, generating
/// functions), whose only error source is rounding.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Quadrature against closed form for the integral identities.
pub const IDENTITY_TOL: f64 = 1e-6;
/// Closed-form against quadrature subentropy.
pub const CROSSCHECK_TOL: f64 = 1e-7;
/// Eigensolver reconstruction bound relative to the Frobenius norm.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

pub const DEFAULT_RENYI_ALPHAS: [f64; 7] = [0.0, 0.25, 0.5, 0.75, 1.25, 1.5, 2.0];
pub const DEFAULT_DIVDIFF_ALPHAS: [f64; 3] = [0.25, 0.5, 0.75];
pub const DEFAULT_FRACTIONAL_ALPHAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const DEFAULT_COMPENSATED_ALPHAS: [f64; 9] = [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9];
pub const IDENTITY_S_GRID: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

/// Generating-function inequalities are checked on this many log-spaced
/// points of `[1e-3, 1e3]`.
pub const GEN_FUNC_GRID_POINTS: usize = 32;

/// Trials evaluated per parallel block.
const BLOCK: u64 = 512;

/// A verifiable claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PropertyId {
    /// Sum of squared logarithms is monotone.
    Ssli,
    /// Rényi entropies of probability vectors are monotone.
    Renyi,
    Shannon,
    /// Power sums increase for `α < 1` and decrease for `α > 1`.
    PowerSumDirection,
    Subentropy,
    /// Sign of the change in the divided difference of `s^α`.
    DivdiffPower,
    /// Each `e_k` is Schur-concave.
    SchurConcave,
    /// Both generating-function products are monotone.
    GenFunc,
    /// `log det(I + A)`.
    Logdet,
    /// Affine-invariant Riemannian distance to a common reference.
    Riemannian,
    /// S-divergence to a common reference.
    Sdiv,
    /// Rényi entropy of unit-trace positive definite matrices.
    QuantumRenyi,
    /// `s^α` as an integral of `log(1 + ts)`, `0 < α < 1`.
    Eq7Identity,
    /// `s^α` as an integral of `log(1 + ts) − ts`, `1 < α < 2`.
    Eq8Identity,
    /// `(log s)²` as an integral of a log-ratio.
    Eq10Identity,
    /// Closed-form against quadrature subentropy.
    Eq14Crosscheck,
}

impl PropertyId {
    pub const ALL: [PropertyId; 16] = [
        Self::Ssli,
        Self::Renyi,
        Self::Shannon,
        Self::PowerSumDirection,
        Self::Subentropy,
        Self::DivdiffPower,
        Self::SchurConcave,
        Self::GenFunc,
        Self::Logdet,
        Self::Riemannian,
        Self::Sdiv,
        Self::QuantumRenyi,
        Self::Eq7Identity,
        Self::Eq8Identity,
        Self::Eq10Identity,
        Self::Eq14Crosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ssli => "SSLI",
            Self::Renyi => "RENYI",
            Self::Shannon => "SHANNON",
            Self::PowerSumDirection => "POWER_SUM_DIRECTION",
            Self::Subentropy => "SUBENTROPY",
            Self::DivdiffPower => "DIVDIFF_POWER",
            Self::SchurConcave => "SCHUR_CONCAVE",
            Self::GenFunc => "GEN_FUNC",
            Self::Logdet => "LOGDET",
            Self::Riemannian => "RIEMANNIAN",
            Self::Sdiv => "SDIV",
            Self::QuantumRenyi => "QUANTUM_RENYI",
            Self::Eq7Identity => "EQ7_IDENTITY",
            Self::Eq8Identity => "EQ8_IDENTITY",
            Self::Eq10Identity => "EQ10_IDENTITY",
            Self::Eq14Crosscheck => "EQ14_CROSSCHECK",
        }
    }

    /// Fixed grid instead of sampled trials.
    pub fn is_identity(self) -> bool {
        matches!(
            self,
            Self::Eq7Identity | Self::Eq8Identity | Self::Eq10Identity
        )
    }

    /// The weakest pair constraint under which the claim holds; `None` for
    /// properties that do not sample dominance pairs.
    pub fn hypothesis(self) -> Option<PairConstraint> {
        use PairConstraint::*;
        match self {
            Self::Ssli | Self::DivdiffPower | Self::Riemannian | Self::Sdiv => Some(FullStrict),
            Self::Renyi | Self::Shannon | Self::PowerSumDirection | Self::QuantumRenyi => {
                Some(SimplexStrict)
            }
            Self::Subentropy | Self::Eq14Crosscheck => Some(SimplexWeak),
            Self::GenFunc | Self::Logdet => Some(WeakOnly),
            Self::SchurConcave | Self::Eq7Identity | Self::Eq8Identity | Self::Eq10Identity => None,
        }
    }

    /// Constraint sampled when none is requested.
    pub fn default_constraint(self) -> Option<PairConstraint> {
        match self {
            Self::GenFunc => Some(PairConstraint::FullStrict),
            other => other.hypothesis(),
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            Self::SchurConcave | Self::GenFunc => ALGEBRAIC_TOL,
            Self::Eq7Identity | Self::Eq8Identity | Self::Eq10Identity => IDENTITY_TOL,
            Self::Eq14Crosscheck => CROSSCHECK_TOL,
            _ => MARGIN_TOL,
        }
    }

    fn default_alphas(self) -> Vec<f64> {
        match self {
            Self::Renyi | Self::QuantumRenyi | Self::PowerSumDirection => {
                DEFAULT_RENYI_ALPHAS.to_vec()
            }
            Self::DivdiffPower => DEFAULT_DIVDIFF_ALPHAS.to_vec(),
            Self::Eq7Identity => DEFAULT_FRACTIONAL_ALPHAS.to_vec(),
            Self::Eq8Identity => DEFAULT_COMPENSATED_ALPHAS.to_vec(),
            _ => Vec::new(),
        }
    }

    fn uses_alphas(self) -> bool {
        !self.default_alphas().is_empty()
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown property `{s}`")))
    }
}

/// `a` guarantees every condition `b` asks for.
fn implies(a: PairConstraint, b: PairConstraint) -> bool {
    (a.fixes_last() || !b.fixes_last()) && (a.is_simplex() || !b.is_simplex())
}

/// Inputs of the worst trial, at full precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    Pair {
        x: Vec<f64>,
        y: Vec<f64>,
        alpha: Option<f64>,
    },
    Matrices {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Option<Vec<Vec<f64>>>,
        alpha: Option<f64>,
    },
    Identity {
        s: f64,
        alpha: Option<f64>,
        quadrature: f64,
        closed_form: f64,
    },
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn pair_witness(x: &PositiveVector, y: &PositiveVector, alpha: Option<f64>) -> Witness {
    Witness::Pair {
        x: x.as_slice().to_vec(),
        y: y.as_slice().to_vec(),
        alpha,
    }
}

/// Result of one seeded batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub property: PropertyId,
    pub seed: u64,
    pub n: usize,
    /// Trials consumed from the stream, rejected ones included.
    pub trials: u64,
    pub passes: u64,
    pub rejections: u64,
    /// Smallest normalized margin; `null` when nothing was evaluated.
    pub worst_margin: Option<f64>,
    pub worst_witness: Witness,
    pub wall_time_ms: u64,
    pub library_version: String,
    /// Property-specific observations (empirical directions, sampler
    /// settings, auxiliary error maxima).
    pub findings: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn evaluated(&self) -> u64 {
        self.trials - self.rejections
    }

    pub fn failures(&self) -> u64 {
        self.evaluated() - self.passes
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    /// Numeric finding, if present and parseable.
    pub fn finding_f64(&self, key: &str) -> Option<f64> {
        self.findings.get(key).and_then(|v| v.parse().ok())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {} n={} seed={} trials={} passes={} failures={} rejections={} worst_margin={} time={}ms",
            if self.passed() { "PASS" } else { "FAIL" },
            self.property,
            self.n,
            self.seed,
            self.trials,
            self.passes,
            self.failures(),
            self.rejections,
            self.worst_margin.map_or("none".to_string(), format_f64),
            self.wall_time_ms,
        )
    }
}

/// What to run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub property: PropertyId,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Overrides the property's default order grid.
    pub alphas: Option<Vec<f64>>,
    /// Overrides the property's default pair constraint.
    pub constraint: Option<PairConstraint>,
}

impl VerifyConfig {
    pub fn new(property: PropertyId, n: usize, trials: usize, seed: u64) -> Self {
        Self {
            property,
            n,
            trials,
            seed,
            alphas: None,
            constraint: None,
        }
    }

    pub fn with_alphas(mut self, alphas: Vec<f64>) -> Self {
        self.alphas = Some(alphas);
        self
    }

    pub fn with_constraint(mut self, constraint: PairConstraint) -> Self {
        self.constraint = Some(constraint);
        self
    }
}

/// A validated configuration.
struct Plan {
    property: PropertyId,
    n: usize,
    alphas: Vec<f64>,
    constraint: Option<PairConstraint>,
    grid: Vec<f64>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidProblem(msg.into())
}

impl Plan {
    fn new(config: &VerifyConfig) -> Result<Self> {
        let property = config.property;
        let alphas = match &config.alphas {
            Some(a) if !property.uses_alphas() => {
                return Err(invalid(format!(
                    "{property} takes no order grid, got {a:?}"
                )))
            }
            Some(a) if a.is_empty() => return Err(invalid("empty order grid")),
            Some(a) => a.clone(),
            None => property.default_alphas(),
        };
        for &alpha in &alphas {
            let ok = match property {
                Property::Renyi | Property::QuantumRenyi => alpha.is_finite() && alpha >= 0.0,
                Property::PowerSumDirection => alpha.is_finite() && alpha >= 0.0,
                Property::DivdiffPower | Property::Eq7Identity => alpha > 0.0 && alpha < 1.0,
                Property::Eq8Identity => alpha > 1.0 && alpha < 2.0,
                _ => true,
            };
            if !ok {
                return Err(Error::InvalidOrder(alpha));
            }
        }
        if property == Property::PowerSumDirection && alphas.iter().all(|&a| a == 0.0 || a == 1.0) {
            return Err(invalid(
                "power-sum direction needs an order other than 0 and 1",
            ));
        }

        let constraint = match (property.hypothesis(), config.constraint) {
            (None, Some(c)) => {
                return Err(invalid(format!(
                    "{property} does not sample pairs, got {c}"
                )))
            }
            (None, None) => None,
            (Some(h), Some(c)) if !implies(c, h) => {
                return Err(invalid(format!(
                    "{property} needs {h} pairs; {c} is weaker"
                )))
            }
            (Some(_), Some(c)) => Some(c),
            (Some(_), None) => property.default_constraint(),
        };
        if let Some(c) = constraint {
            c.check_dim(config.n)?;
        } else if !property.is_identity() && config.n < 2 {
            return Err(Error::InfeasibleConstraint {
                constraint: "majorization".into(),
                n: config.n,
            });
        }
        Ok(Self {
            property,
            n: config.n,
            alphas,
            constraint,
            grid: log_spaced_grid(1e-3, 1e3, GEN_FUNC_GRID_POINTS),
        })
    }

    fn constraint(&self) -> PairConstraint {
        self.constraint.expect("sampled property has a constraint")
    }
}

type Property = PropertyId;

/// Per-trial side observations aggregated into findings.
#[derive(Debug, Clone, Default)]
struct Aux {
    /// Largest auxiliary error (cross-check deviation, reconstruction ratio).
    max_error: f64,
    /// Per-order sign of the change (`+1`, `−1`, or `0` for a tie).
    signs: Vec<i8>,
    /// Closed form unavailable; quadrature used instead.
    fallback: bool,
}

#[derive(Debug, Clone)]
struct Evaluation {
    margin: f64,
    witness: Witness,
    aux: Aux,
}

enum Outcome {
    Rejected,
    Evaluated(Evaluation),
}

fn normalized(larger: f64, smaller: f64) -> f64 {
    (larger - smaller) / larger.abs().max(smaller.abs()).max(1.0)
}

/// Minimum of `(margin, alpha)` candidates.
fn worst_over(items: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    items
        .into_iter()
        .fold((f64::INFINITY, f64::NAN), |acc, it| {
            if it.0 < acc.0 {
                it
            } else {
                acc
            }
        })
}

fn reconstruction_ratio(m: &SpdMatrix) -> f64 {
    m.reconstruction_error() / m.frobenius_norm()
}

fn pair_or_reject(plan: &Plan, index: u64, seed: u64) -> Result<Option<DominancePair>> {
    match sample_pair(&mut substream(seed, index), plan.n, plan.constraint()) {
        Ok(pair) => Ok(Some(pair)),
        Err(Error::Rejected(_)) | Err(Error::RootSolverFailure(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn entropy_of(x: &PositiveVector, alpha: f64) -> Result<f64> {
    match EntropyOrder::from_alpha(alpha)? {
        EntropyOrder::Shannon => shannon_entropy(x),
        EntropyOrder::Renyi(order) => renyi_entropy(x, order),
    }
}

fn matrix_entropy(m: &SpdMatrix, alpha: f64) -> Result<f64> {
    match EntropyOrder::from_alpha(alpha)? {
        EntropyOrder::Shannon => shannon_entropy(&m.spectrum()),
        EntropyOrder::Renyi(order) => quantum_renyi(m, order),
    }
}

fn subentropy(x: &PositiveVector) -> Result<(f64, bool)> {
    let input = SubentropyInput::new(x.clone())?;
    match subentropy_closed(&input, DEFAULT_GAP_THRESHOLD) {
        Ok(q) => Ok((q, false)),
        Err(Error::DegenerateSpectrum { .. }) => Ok((subentropy_integral(&input)?, true)),
        Err(e) => Err(e),
    }
}

fn evaluate_trial(plan: &Plan, seed: u64, index: u64) -> Result<Outcome> {
    use Outcome::{Evaluated, Rejected};
    let property = plan.property;

    if property == Property::SchurConcave {
        let (x, y) = majorization_pair(&mut substream(seed, index), plan.n)?;
        let (ex, ey) = (esym_all(&x), esym_all(&y));
        let margin = (1..=plan.n)
            .map(|k| (ex.e(k) - ey.e(k)) / ex.e(k).max(ey.e(k)))
            .fold(f64::INFINITY, f64::min);
        return Ok(Evaluated(Evaluation {
            margin,
            witness: pair_witness(&x, &y, None),
            aux: Aux::default(),
        }));
    }

    if matches!(property, Property::Logdet | Property::QuantumRenyi) {
        let (a, b, _) = match matrix_pair(&mut substream(seed, index), plan.n, plan.constraint()) {
            Ok(t) => t,
            Err(Error::Rejected(_)) | Err(Error::RootSolverFailure(_)) => return Ok(Rejected),
            Err(e) => return Err(e),
        };
        let (sa, sb) = (a.spectrum(), b.spectrum());
        let verdict = compare(&sa, &sb, ComparisonTolerance::default())?;
        if !plan.constraint().admits(&verdict, &sa, &sb) {
            return Ok(Rejected);
        }
        let aux = Aux {
            max_error: reconstruction_ratio(&a).max(reconstruction_ratio(&b)),
            ..Aux::default()
        };
        let (margin, alpha) = if property == Property::Logdet {
            (normalized(logdet_I_plus(&b), logdet_I_plus(&a)), f64::NAN)
        } else {
            let items = plan
                .alphas
                .iter()
                .map(|&alpha| {
                    Ok((
                        normalized(matrix_entropy(&b, alpha)?, matrix_entropy(&a, alpha)?),
                        alpha,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            worst_over(items)
        };
        return Ok(Evaluated(Evaluation {
            margin,
            witness: Witness::Matrices {
                a: rows(a.matrix()),
                b: rows(b.matrix()),
                c: None,
                alpha: (!alpha.is_nan()).then_some(alpha),
            },
            aux,
        }));
    }

    if matches!(property, Property::Riemannian | Property::Sdiv) {
        let t = match matrix_triple(&mut substream(seed, index), plan.n, plan.constraint()) {
            Ok(t) => t,
            Err(Error::Rejected(_)) | Err(Error::RootSolverFailure(_)) => return Ok(Rejected),
            Err(e) => return Err(e),
        };
        // Re-derive the hypothesis from the matrices themselves.
        let la = PositiveVector::new(relative_spectrum(&t.a, &t.c)?)?;
        let lb = PositiveVector::new(relative_spectrum(&t.b, &t.c)?)?;
        let verdict = compare(&la, &lb, ComparisonTolerance::default())?;
        if !verdict.left_strictly_below_right() {
            return Ok(Rejected);
        }
        let distance = if property == Property::Riemannian {
            riemannian_distance
        } else {
            s_divergence
        };
        let margin = normalized(distance(&t.b, &t.c)?, distance(&t.a, &t.c)?);
        let aux = Aux {
            max_error: [&t.a, &t.b, &t.c]
                .into_iter()
                .map(reconstruction_ratio)
                .fold(0.0, f64::max),
            ..Aux::default()
        };
        return Ok(Evaluated(Evaluation {
            margin,
            witness: Witness::Matrices {
                a: rows(t.a.matrix()),
                b: rows(t.b.matrix()),
                c: Some(rows(t.c.matrix())),
                alpha: None,
            },
            aux,
        }));
    }

    let Some(pair) = pair_or_reject(plan, index, seed)? else {
        return Ok(Rejected);
    };
    let (x, y) = (&pair.x, &pair.y);
    let mut aux = Aux::default();
    let (margin, alpha) = match property {
        Property::Ssli => (normalized(sum_sq_logs(y), sum_sq_logs(x)), f64::NAN),
        Property::Shannon => (
            normalized(shannon_entropy(y)?, shannon_entropy(x)?),
            f64::NAN,
        ),
        Property::Renyi => worst_over(
            plan.alphas
                .iter()
                .map(|&alpha| {
                    Ok((
                        normalized(entropy_of(y, alpha)?, entropy_of(x, alpha)?),
                        alpha,
                    ))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Property::PowerSumDirection => worst_over(
            plan.alphas
                .iter()
                .filter(|&&alpha| alpha != 0.0 && alpha != 1.0)
                .map(|&alpha| {
                    let (px, py) = (power_sum(x, alpha), power_sum(y, alpha));
                    let m = if alpha < 1.0 {
                        normalized(py, px)
                    } else {
                        normalized(px, py)
                    };
                    (m, alpha)
                }),
        ),
        Property::Subentropy => {
            let (qx, fx) = subentropy(x)?;
            let (qy, fy) = subentropy(y)?;
            aux.fallback = fx || fy;
            (normalized(qy, qx), f64::NAN)
        }
        Property::Eq14Crosscheck => {
            let mut deviation: Option<f64> = None;
            for v in [x, y] {
                let input = SubentropyInput::new(v.clone())?;
                match subentropy_closed(&input, DEFAULT_GAP_THRESHOLD) {
                    Ok(closed) => {
                        let d = (closed - subentropy_integral(&input)?).abs();
                        deviation = Some(deviation.unwrap_or(0.0).max(d));
                    }
                    Err(Error::DegenerateSpectrum { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            let Some(d) = deviation else {
                return Ok(Rejected);
            };
            aux.max_error = d;
            (-d, f64::NAN)
        }
        Property::DivdiffPower => {
            // The predicted sign alternates with n: (−1)^n DD(x) ≥ (−1)^n DD(y).
            let parity = if plan.n.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut items = Vec::with_capacity(plan.alphas.len());
            for &alpha in &plan.alphas {
                let (dx, dy) = match (
                    divided_difference_power(x, alpha),
                    divided_difference_power(y, alpha),
                ) {
                    (Ok(dx), Ok(dy)) => (dx, dy),
                    (Err(Error::DegenerateSpectrum { .. }), _)
                    | (_, Err(Error::DegenerateSpectrum { .. })) => return Ok(Rejected),
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                };
                let m = parity * (dx - dy) / dx.abs().max(dy.abs()).max(f64::MIN_POSITIVE);
                aux.signs.push(if m.abs() <= MARGIN_TOL {
                    0
                } else if m > 0.0 {
                    1
                } else {
                    -1
                });
                items.push((m, alpha));
            }
            worst_over(items)
        }
        Property::GenFunc => (verify_generating_inequality(x, y, &plan.grid)?, f64::NAN),
        _ => unreachable!("{property} handled above"),
    };
    Ok(Evaluated(Evaluation {
        margin,
        witness: pair_witness(x, y, (!alpha.is_nan()).then_some(alpha)),
        aux,
    }))
}

/// Running totals over evaluated trials, consumed in index order.
struct Tally {
    tolerance: f64,
    trials: u64,
    rejections: u64,
    passes: u64,
    worst: Option<(f64, Witness)>,
    max_error: f64,
    fallbacks: u64,
    /// Per order: (positive, negative, tie) counts.
    signs: Vec<[u64; 3]>,
}

impl Tally {
    fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            trials: 0,
            rejections: 0,
            passes: 0,
            worst: None,
            max_error: 0.0,
            fallbacks: 0,
            signs: Vec::new(),
        }
    }

    fn evaluated(&self) -> u64 {
        self.trials - self.rejections
    }

    fn push(&mut self, outcome: Outcome) {
        self.trials += 1;
        let eval = match outcome {
            Outcome::Rejected => {
                self.rejections += 1;
                return;
            }
            Outcome::Evaluated(e) => e,
        };
        if eval.margin >= -self.tolerance {
            self.passes += 1;
        }
        if self
            .worst
            .as_ref()
            .is_none_or(|(m, _)| eval.margin < *m || eval.margin.is_nan())
        {
            self.worst = Some((eval.margin, eval.witness));
        }
        self.max_error = self.max_error.max(eval.aux.max_error);
        self.fallbacks += u64::from(eval.aux.fallback);
        if self.signs.len() < eval.aux.signs.len() {
            self.signs.resize(eval.aux.signs.len(), [0; 3]);
        }
        for (slot, s) in self.signs.iter_mut().zip(&eval.aux.signs) {
            slot[match s {
                1 => 0,
                -1 => 1,
                _ => 2,
            }] += 1;
        }
    }
}

fn format_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn identity_findings(plan: &Plan, tally: &Tally, findings: &mut BTreeMap<String, String>) {
    findings.insert("s_grid".into(), format_list(&IDENTITY_S_GRID));
    if !plan.alphas.is_empty() {
        findings.insert("alphas".into(), format_list(&plan.alphas));
    }
    findings.insert("max_abs_deviation".into(), format_f64(tally.max_error));
}

fn sampled_findings(plan: &Plan, tally: &Tally, findings: &mut BTreeMap<String, String>) {
    let evaluated = tally.evaluated();
    if let Some(c) = plan.constraint {
        findings.insert("constraint".into(), c.to_string());
        if uses_general_generator(plan.n, c) {
            findings.insert("shrink".into(), default_shrink(plan.n).to_string());
        }
    } else {
        findings.insert("sampler".into(), "majorization".into());
    }
    if tally.trials > 0 {
        findings.insert(
            "acceptance_rate".into(),
            format_f64(evaluated as f64 / tally.trials as f64),
        );
    }
    if plan.property.uses_alphas() {
        findings.insert("alphas".into(), format_list(&plan.alphas));
    }
    match plan.property {
        Property::Renyi | Property::QuantumRenyi if plan.alphas.contains(&0.0) => {
            findings.insert(
                "alpha_0".into(),
                "boundary order: both sides equal log n, margin identically zero".into(),
            );
        }
        _ => {}
    }
    if matches!(plan.property, Property::Renyi | Property::QuantumRenyi)
        && plan.alphas.iter().any(|&a| a > 2.0)
    {
        findings.insert(
            "uncertified_alphas".into(),
            format_list(
                &plan
                    .alphas
                    .iter()
                    .copied()
                    .filter(|&a| a > 2.0)
                    .collect::<Vec<_>>(),
            ),
        );
    }
    match plan.property {
        Property::Logdet | Property::QuantumRenyi | Property::Riemannian | Property::Sdiv => {
            findings.insert(
                "max_reconstruction_ratio".into(),
                format_f64(tally.max_error),
            );
        }
        Property::Eq14Crosscheck => {
            findings.insert("max_abs_deviation".into(), format_f64(tally.max_error));
        }
        Property::Subentropy => {
            findings.insert("quadrature_fallbacks".into(), tally.fallbacks.to_string());
        }
        Property::DivdiffPower => divdiff_findings(plan, tally, findings),
        _ => {}
    }
}

fn divdiff_findings(plan: &Plan, tally: &Tally, findings: &mut BTreeMap<String, String>) {
    let mut consistent = true;
    for (alpha, counts) in plan.alphas.iter().zip(&tally.signs) {
        let [pos, neg, ties] = *counts;
        // `pos` counts trials where (−1)^n DD(x) > (−1)^n DD(y).
        let (x_above, y_above) = if plan.n.is_multiple_of(2) {
            (pos, neg)
        } else {
            (neg, pos)
        };
        let direction = match (x_above, y_above) {
            (_, 0) if x_above > 0 => "DD(x) >= DD(y)",
            (0, _) if y_above > 0 => "DD(x) <= DD(y)",
            (0, 0) => "all ties",
            _ => {
                consistent = false;
                "mixed"
            }
        };
        findings.insert(format!("direction_alpha_{alpha}"), direction.into());
        findings.insert(
            format!("counts_alpha_{alpha}"),
            format!("x_above={x_above},y_above={y_above},ties={ties}"),
        );
    }
    findings.insert("direction_consistent".into(), consistent.to_string());
    findings.insert(
        "predicted_direction".into(),
        if plan.n.is_multiple_of(2) {
            "DD(x) >= DD(y) (n even)"
        } else {
            "DD(x) <= DD(y) (n odd)"
        }
        .into(),
    );
}

fn identity_grid(plan: &Plan) -> Result<Vec<(IntegralRepresentation, f64)>> {
    let reps: Vec<IntegralRepresentation> = match plan.property {
        Property::Eq7Identity => plan
            .alphas
            .iter()
            .map(|&a| IntegralRepresentation::fractional_power(a))
            .collect::<Result<_>>()?,
        Property::Eq8Identity => plan
            .alphas
            .iter()
            .map(|&a| IntegralRepresentation::compensated_power(a))
            .collect::<Result<_>>()?,
        _ => vec![IntegralRepresentation::squared_log()],
    };
    Ok(reps
        .into_iter()
        .flat_map(|rep| IDENTITY_S_GRID.map(|s| (rep, s)))
        .collect())
}

fn evaluate_identity(rep: &IntegralRepresentation, s: f64) -> Result<Outcome> {
    let quadrature = eval_integral_identity(rep, s)?;
    let closed_form = rep.closed_form(s);
    let deviation = (quadrature - closed_form).abs();
    Ok(Outcome::Evaluated(Evaluation {
        margin: -deviation / closed_form.abs().max(1.0),
        witness: Witness::Identity {
            s,
            alpha: rep.alpha(),
            quadrature,
            closed_form,
        },
        aux: Aux {
            max_error: deviation,
            ..Aux::default()
        },
    }))
}

/// Runs one batch.
pub fn run(config: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let plan = Plan::new(config)?;
    let mut tally = Tally::new(plan.property.tolerance());
    let mut findings = BTreeMap::new();

    if plan.property.is_identity() {
        let grid = identity_grid(&plan)?;
        let outcomes: Vec<Result<Outcome>> = grid
            .par_iter()
            .map(|(rep, s)| evaluate_identity(rep, *s))
            .collect();
        for outcome in outcomes {
            tally.push(outcome?);
        }
        identity_findings(&plan, &tally, &mut findings);
    } else {
        let target = config.trials as u64;
        let budget = crate::sampling::attempt_budget(config.trials);
        let mut next = 0;
        while tally.evaluated() < target && next < budget {
            let end = (next + BLOCK).min(budget);
            let outcomes: Vec<Result<Outcome>> = (next..end)
                .into_par_iter()
                .map(|i| evaluate_trial(&plan, config.seed, i))
                .collect();
            for outcome in outcomes {
                if tally.evaluated() == target {
                    break;
                }
                tally.push(outcome?);
            }
            next = end;
        }
        if tally.evaluated() < target {
            findings.insert(
                "budget_exhausted".into(),
                format!("{} of {target} trials evaluated", tally.evaluated()),
            );
        }
        sampled_findings(&plan, &tally, &mut findings);
    }

    let (worst_margin, worst_witness) = match tally.worst.take() {
        Some((m, w)) => (Some(m), w),
        None => (None, Witness::None),
    };
    Ok(VerificationReport {
        property: plan.property,
        seed: config.seed,
        n: plan.n,
        trials: tally.trials,
        passes: tally.passes,
        rejections: tally.rejections,
        worst_margin,
        worst_witness,
        wall_time_ms: start.elapsed().as_millis() as u64,
        library_version: LIBRARY_VERSION.to_string(),
        findings,
    })
}
