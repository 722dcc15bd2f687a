//! Elementary symmetric polynomials and the dominance order they induce.
//!
//! For `x, y` in the open positive orthant, `x ≺_E y` holds when
//! `e_k(x) ≤ e_k(y)` for `k < n` and `e_n(x) = e_n(y)`; the weak order
//! `x ⪯_E y` relaxes the last condition to `e_n(x) ≤ e_n(y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly positive, finite real vector of length at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, &value)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveEntry { index, value });
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        sorted(&self.0).iter().sum()
    }

    /// Entries sorted ascending. Reductions run over this order so that
    /// results do not depend on how the caller ordered the entries.
    pub fn sorted(&self) -> Vec<f64> {
        sorted(&self.0)
    }
}

pub(crate) fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// The values `(e_1, …, e_n)` of a vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ESignature {
    values: Vec<f64>,
}

impl ESignature {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// `e_k` for `0 ≤ k ≤ n`, with `e_0 = 1`.
    pub fn e(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }

    /// `(e_1, …, e_n)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest relative slack of the Newton–Maclaurin chain
    /// `E_k² ≥ E_{k-1} E_{k+1}` with `E_k = e_k / C(n, k)`.
    ///
    /// Returns `+∞` when `n < 2` (no inequalities to check).
    pub fn newton_maclaurin_slack(&self) -> f64 {
        let n = self.n();
        let mean = |k: usize| self.e(k) / binomial(n, k);
        (1..n)
            .map(|k| {
                let lhs = mean(k) * mean(k);
                let rhs = mean(k - 1) * mean(k + 1);
                (lhs - rhs) / lhs.max(rhs)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients `(e_0, e_1, …, e_n)` of `∏(1 + t·v_i)`.
///
/// Entries are expanded one at a time, updating the coefficient array from
/// the top index down. For nonnegative input every step is a sum of
/// nonnegative terms. The input is sorted first so the result is bitwise
/// independent of entry order.
pub(crate) fn esym_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &v) in sorted(values).iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e
}

/// Elementary symmetric polynomials of a positive vector.
pub fn esym_all(x: &PositiveVector) -> ESignature {
    let mut e = esym_coefficients(x.as_slice());
    e.remove(0);
    ESignature { values: e }
}

/// `∏ (1 + t·x_i)`, the generating function `Σ t^k e_k(x)`.
pub fn gen_poly_one_plus_t(x: &PositiveVector, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    x.sorted().iter().map(|&v| 1.0 + t * v).product()
}

/// `∏ (t + x_i)`, the generating function `Σ t^k e_{n-k}(x)`.
pub fn gen_poly_t_plus_x(x: &PositiveVector, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    x.sorted().iter().map(|&v| t + v).product()
}

/// Tolerances used when comparing two signatures.
///
/// The `e_n` equality test is relative: `|e_n(x) − e_n(y)| ≤ tol_eq·max(e_n)`.
/// One-sided tests on `e_k` use `scale_k = max(|e_k(x)|, |e_k(y)|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonTolerance {
    tol_eq: f64,
}

impl ComparisonTolerance {
    pub const DEFAULT_TOL_EQ: f64 = 1e-9;

    pub fn new(tol_eq: f64) -> Result<Self> {
        if !(tol_eq.is_finite() && tol_eq > 0.0) {
            return Err(Error::InvalidTolerance(tol_eq));
        }
        Ok(Self { tol_eq })
    }

    pub fn tol_eq(&self) -> f64 {
        self.tol_eq
    }
}

impl Default for ComparisonTolerance {
    fn default() -> Self {
        Self {
            tol_eq: Self::DEFAULT_TOL_EQ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Equal,
    /// `≺_E`: `e_n` equal, remaining `e_k` ordered.
    StrictOrder,
    /// `⪯_E` without `e_n` equality.
    WeakOrder,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LeftBelowRight,
    RightBelowLeft,
    NotApplicable,
}

impl Direction {
    pub fn mirrored(self) -> Self {
        match self {
            Direction::LeftBelowRight => Direction::RightBelowLeft,
            Direction::RightBelowLeft => Direction::LeftBelowRight,
            Direction::NotApplicable => Direction::NotApplicable,
        }
    }
}

/// Result of comparing two vectors under `≺_E` / `⪯_E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub kind: VerdictKind,
    pub direction: Direction,
    /// `e_k(y) − e_k(x)` for `k = 1..=n`.
    pub margins: Vec<f64>,
}

impl DominanceVerdict {
    /// True for `Equal`, or a strict/weak order with the left argument below.
    pub fn left_below_right(&self) -> bool {
        self.kind == VerdictKind::Equal
            || (matches!(self.kind, VerdictKind::StrictOrder | VerdictKind::WeakOrder)
                && self.direction == Direction::LeftBelowRight)
    }

    /// True for `Equal` or `StrictOrder` with the left argument below.
    pub fn left_strictly_below_right(&self) -> bool {
        self.kind == VerdictKind::Equal
            || (self.kind == VerdictKind::StrictOrder
                && self.direction == Direction::LeftBelowRight)
    }
}

/// Classifies a pair of vectors under the dominance order.
pub fn compare(
    x: &PositiveVector,
    y: &PositiveVector,
    tol: ComparisonTolerance,
) -> Result<DominanceVerdict> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(compare_signatures(&esym_all(x), &esym_all(y), tol))
}

pub(crate) fn compare_signatures(
    ex: &ESignature,
    ey: &ESignature,
    tol: ComparisonTolerance,
) -> DominanceVerdict {
    let n = ex.n();
    let tol_eq = tol.tol_eq();
    let margins: Vec<f64> = ex
        .values()
        .iter()
        .zip(ey.values())
        .map(|(a, b)| b - a)
        .collect();
    let slack = |k: usize| tol_eq * ex.e(k).abs().max(ey.e(k).abs()).max(1.0);

    let en_gap = margins[n - 1];
    let en_equal = en_gap.abs() <= tol_eq * ex.e(n).max(ey.e(n));
    let lower_equal = (1..n).all(|k| margins[k - 1].abs() <= slack(k));

    if en_equal && lower_equal {
        return DominanceVerdict {
            kind: VerdictKind::Equal,
            direction: Direction::NotApplicable,
            margins,
        };
    }
    if n == 1 {
        return DominanceVerdict {
            kind: VerdictKind::Incomparable,
            direction: Direction::NotApplicable,
            margins,
        };
    }

    let left_lower = (1..n).all(|k| margins[k - 1] >= -slack(k));
    let right_lower = (1..n).all(|k| margins[k - 1] <= slack(k));
    let (kind, direction) = if en_equal && left_lower {
        (VerdictKind::StrictOrder, Direction::LeftBelowRight)
    } else if en_equal && right_lower {
        (VerdictKind::StrictOrder, Direction::RightBelowLeft)
    } else if left_lower && en_gap >= -slack(n) {
        (VerdictKind::WeakOrder, Direction::LeftBelowRight)
    } else if right_lower && en_gap <= slack(n) {
        (VerdictKind::WeakOrder, Direction::RightBelowLeft)
    } else {
        (VerdictKind::Incomparable, Direction::NotApplicable)
    };
    DominanceVerdict {
        kind,
        direction,
        margins,
    }
}

/// Worst normalized margin of the two generating-function inequalities
/// `∏(1+t·x_i) ≤ ∏(1+t·y_i)` and `∏(t+x_i) ≤ ∏(t+y_i)` over a grid of `t`.
///
/// Each gap is divided by the larger of its two products, so the result is
/// a relative margin that stays meaningful when the products reach `1e30`.
pub fn verify_generating_inequality(
    x: &PositiveVector,
    y: &PositiveVector,
    t_grid: &[f64],
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let relative = |a: f64, b: f64| {
        let scale = a.max(b);
        if scale == 0.0 {
            0.0
        } else {
            (b - a) / scale
        }
    };
    Ok(t_grid
        .iter()
        .map(|&t| {
            let one_plus = relative(gen_poly_one_plus_t(x, t), gen_poly_one_plus_t(y, t));
            let t_plus = relative(gen_poly_t_plus_x(x, t), gen_poly_t_plus_x(y, t));
            one_plus.min(t_plus)
        })
        .fold(f64::INFINITY, f64::min))
}

/// `count` points log-spaced over `[lo, hi]`, endpoints included.
pub fn log_spaced_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}
