//! Scalar functionals that are monotone under the dominance order, and the
//! integral representations used to certify them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::order::{esym_coefficients, sorted, PositiveVector};
use crate::quadrature::{
    integrate_halfline, integrate_with_power_weight, QuadratureProblem, TailBehavior,
};

/// Tolerance on `Σ x_i = 1` for probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Default relative gap below which closed divided-difference forms refuse
/// to evaluate.
pub const DEFAULT_GAP_THRESHOLD: f64 = 1e-4;

/// Below this `ts`, `log(1 + ts) − ts` is summed as a series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Order `alpha ≥ 0`, `alpha ≠ 1`, of a Rényi entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 || alpha == 1.0 {
            return Err(Error::InvalidOrder(alpha));
        }
        Ok(Self(alpha))
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    /// Monotonicity under the dominance order is only claimed on `[0, 2]`.
    pub fn is_certified(self) -> bool {
        self.0 <= 2.0
    }
}

/// A Rényi order or the Shannon limit at `alpha = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyOrder {
    Renyi(RenyiOrder),
    Shannon,
}

impl EntropyOrder {
    /// Maps `1.0` to [`EntropyOrder::Shannon`].
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if alpha == 1.0 {
            Ok(Self::Shannon)
        } else {
            RenyiOrder::new(alpha).map(Self::Renyi)
        }
    }

    pub fn label(self) -> String {
        match self {
            Self::Shannon => "shannon".to_string(),
            Self::Renyi(order) => format!("{}", order.alpha()),
        }
    }
}

fn check_simplex(x: &PositiveVector) -> Result<f64> {
    let sum = x.sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::SimplexViolation {
            sum,
            tol: SIMPLEX_TOL,
        });
    }
    Ok(sum)
}

/// `Σ (log x_i)²`.
pub fn sum_sq_logs(x: &PositiveVector) -> f64 {
    x.sorted().iter().map(|v| v.ln().powi(2)).sum()
}

/// `Σ x_i^alpha`.
pub fn power_sum(x: &PositiveVector, alpha: f64) -> f64 {
    x.sorted().iter().map(|v| v.powf(alpha)).sum()
}

/// Rényi entropy of a probability vector.
///
/// `log Σ x_i^α` is formed as `log1p(Σ x_i − 1 + Σ x_i·expm1((α−1) log x_i))`,
/// which keeps full accuracy as `α → 1`.
pub fn renyi_entropy(x: &PositiveVector, order: RenyiOrder) -> Result<f64> {
    let sum = check_simplex(x)?;
    let alpha = order.alpha();
    if alpha == 0.0 {
        return Ok((x.len() as f64).ln());
    }
    let excess: f64 = x
        .sorted()
        .iter()
        .map(|&v| v * ((alpha - 1.0) * v.ln()).exp_m1())
        .sum();
    Ok(((sum - 1.0) + excess).ln_1p() / (1.0 - alpha))
}

/// Shannon entropy `−Σ x_i log x_i` of a probability vector.
pub fn shannon_entropy(x: &PositiveVector) -> Result<f64> {
    check_simplex(x)?;
    Ok(-x.sorted().iter().map(|&v| v * v.ln()).sum::<f64>())
}

/// Dispatches on [`EntropyOrder`].
pub fn entropy(x: &PositiveVector, order: EntropyOrder) -> Result<f64> {
    match order {
        EntropyOrder::Renyi(o) => renyi_entropy(x, o),
        EntropyOrder::Shannon => shannon_entropy(x),
    }
}

/// A probability spectrum: positive entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SubentropyInput(PositiveVector);

impl SubentropyInput {
    pub fn new(x: PositiveVector) -> Result<Self> {
        check_simplex(&x)?;
        Ok(Self(x))
    }

    pub fn vector(&self) -> &PositiveVector {
        &self.0
    }
}

/// Smallest `|x_i − x_j| / max(x_i, x_j)` over pairs; `+∞` for `n = 1`.
pub fn min_relative_gap(x: &[f64]) -> f64 {
    sorted(x)
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[1])
        .fold(f64::INFINITY, f64::min)
}

fn check_gap(x: &[f64], threshold: f64) -> Result<()> {
    let gap = min_relative_gap(x);
    if gap <= threshold {
        return Err(Error::DegenerateSpectrum { gap, threshold });
    }
    Ok(())
}

/// `Σ_i g(x_i) / ∏_{j≠i} (x_i − x_j)` over sorted nodes.
fn divided_difference(nodes: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let denom: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| xi - xj)
                .product();
            g(xi) / denom
        })
        .sum()
}

/// Subentropy by its closed divided-difference form.
///
/// Fails with [`Error::DegenerateSpectrum`] when two entries are closer than
/// `gap_threshold` in relative terms; use [`subentropy_integral`] there.
pub fn subentropy_closed(x: &SubentropyInput, gap_threshold: f64) -> Result<f64> {
    let nodes = x.vector().sorted();
    check_gap(&nodes, gap_threshold)?;
    let n = nodes.len() as i32;
    Ok(-divided_difference(&nodes, |v| v.powi(n) * v.ln()))
}

/// Subentropy by quadrature of its regularized integral representation.
///
/// With `e_1 = 1` the integrand `t^n/∏(t+x_j) − t/(1+t)` equals
/// `−Σ_{k≥2} e_k t^(n+1−k) / ((t+e_1) ∏(t+x_j))`, which has no cancellation.
/// The `e_1 log e_1` term is the exact correction for sums that differ from
/// one by rounding.
pub fn subentropy_integral(x: &SubentropyInput) -> Result<f64> {
    let nodes = x.vector().sorted();
    let n = nodes.len();
    if n == 1 {
        return Ok(0.0);
    }
    let e = esym_coefficients(&nodes);
    let e1 = e[1];
    let integrand = |t: f64| {
        if t <= 1.0 {
            let num: f64 = (2..=n).map(|k| e[k] * t.powi((n + 1 - k) as i32)).sum();
            let den: f64 = nodes.iter().map(|&v| t + v).product::<f64>() * (t + e1);
            num / den
        } else {
            let r = 1.0 / t;
            let num: f64 = (2..=n).map(|k| e[k] * r.powi(k as i32)).sum();
            let den: f64 = nodes.iter().map(|&v| 1.0 + v * r).product::<f64>() * (1.0 + e1 * r);
            num / den
        }
    };
    let problem = QuadratureProblem::new(integrand)
        .with_exponents(0.0, 2.0)
        .with_tolerances(1e-13, 1e-11);
    let result = integrate_halfline(&problem)?;
    Ok(result.value - e1 * e1.ln())
}

/// Divided difference of `s ↦ s^alpha` at the entries of `x`, `0 < alpha < 1`.
///
/// The value is symmetric in the entries; summation runs over sorted nodes.
pub fn divided_difference_power(x: &PositiveVector, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidOrder(alpha));
    }
    let nodes = x.sorted();
    check_gap(&nodes, DEFAULT_GAP_THRESHOLD)?;
    Ok(divided_difference(&nodes, |v| v.powf(alpha)))
}

/// Which integral representation of a scalar function is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepresentationKind {
    /// `s^α = c_α ∫ log(1+ts) t^(−α−1) dt`, `0 < α < 1`.
    FractionalPower,
    /// `s^α = c_α ∫ (log(1+ts) − ts) t^(−α−1) dt`, `1 < α < 2`.
    CompensatedPower,
    /// `(log s)² = ∫ log((1+ts)(t+s) / (s(1+t)²)) dt/t`.
    SquaredLog,
}

/// An integral representation `prefactor · ∫ integrand(t, s) · weight(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralRepresentation {
    kind: RepresentationKind,
    alpha: f64,
}

impl IntegralRepresentation {
    pub fn fractional_power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidOrder(alpha));
        }
        Ok(Self {
            kind: RepresentationKind::FractionalPower,
            alpha,
        })
    }

    pub fn compensated_power(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::InvalidOrder(alpha));
        }
        Ok(Self {
            kind: RepresentationKind::CompensatedPower,
            alpha,
        })
    }

    pub fn squared_log() -> Self {
        Self {
            kind: RepresentationKind::SquaredLog,
            alpha: f64::NAN,
        }
    }

    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    /// `None` for the squared-log representation.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            RepresentationKind::SquaredLog => None,
            _ => Some(self.alpha),
        }
    }

    /// `α sin(απ)/π` for the power representations, 1 otherwise.
    /// Negative for `1 < α < 2`.
    pub fn prefactor(&self) -> f64 {
        match self.kind {
            RepresentationKind::SquaredLog => 1.0,
            _ => self.alpha * (self.alpha * PI).sin() / PI,
        }
    }

    /// Density of the measure `dμ(t)/dt`.
    pub fn measure_weight(&self, t: f64) -> f64 {
        match self.kind {
            RepresentationKind::SquaredLog => 1.0 / t,
            _ => t.powf(-self.alpha - 1.0),
        }
    }

    /// The integrand before the measure weight is applied.
    pub fn integrand(&self, t: f64, s: f64) -> f64 {
        match self.kind {
            RepresentationKind::FractionalPower => (t * s).ln_1p(),
            RepresentationKind::CompensatedPower => log1p_minus_identity(t * s),
            RepresentationKind::SquaredLog => {
                // Symmetric under t -> 1/t; evaluate on (0, 1].
                let r = if t > 1.0 { 1.0 / t } else { t };
                (r * s).ln_1p() + (r / s).ln_1p() - 2.0 * r.ln_1p()
            }
        }
    }

    /// The function the representation reproduces.
    pub fn closed_form(&self, s: f64) -> f64 {
        match self.kind {
            RepresentationKind::SquaredLog => s.ln().powi(2),
            _ => s.powf(self.alpha),
        }
    }

    pub fn valid_at(&self, s: f64) -> bool {
        match self.kind {
            RepresentationKind::SquaredLog => s > 0.0 && s.is_finite(),
            _ => s >= 0.0 && s.is_finite(),
        }
    }
}

/// `log(1 + z) − z` without cancellation for small `z ≥ 0`.
pub fn log1p_minus_identity(z: f64) -> f64 {
    if z < SERIES_CUTOFF {
        // −z²/2 + z³/3 − z⁴/4 + z⁵/5, Horner form
        let z2 = z * z;
        z2 * (-0.5 + z * (1.0 / 3.0 + z * (-0.25 + z * 0.2)))
    } else {
        z.ln_1p() - z
    }
}

/// Numerically evaluates an integral representation at `s`.
pub fn eval_integral_identity(rep: &IntegralRepresentation, s: f64) -> Result<f64> {
    if !rep.valid_at(s) {
        return Err(Error::InvalidProblem(format!(
            "s = {s} outside the representation's domain"
        )));
    }
    let value = match rep.kind {
        RepresentationKind::FractionalPower => {
            integrate_with_power_weight(
                |t| rep.integrand(t, s),
                rep.alpha,
                TailBehavior::Logarithmic,
            )?
            .value
        }
        RepresentationKind::CompensatedPower => {
            integrate_with_power_weight(|t| rep.integrand(t, s), rep.alpha, TailBehavior::Linear)?
                .value
        }
        RepresentationKind::SquaredLog => {
            let problem = QuadratureProblem::new(|t: f64| rep.integrand(t, s) / t);
            integrate_halfline(&problem)?.value
        }
    };
    Ok(rep.prefactor() * value)
}
