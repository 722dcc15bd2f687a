//! Simultaneous root finding for real monic polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
pub const DEFAULT_IMAG_TOL: f64 = 1e-8;
/// Relative step below which a root that never met the tight test counts as settled.
const STALL_TOL: f64 = 1e-10;
/// A root whose relative step is below this and no longer shrinking is at
/// its attainable accuracy.
const STAGNATION_TOL: f64 = 1e-9;

/// `z^n + c[0] z^(n-1) + … + c[n-1]` and its derivative at `z`.
fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of the monic polynomial with lower coefficients `coeffs`,
/// by Aberth–Ehrlich iteration.
pub fn monic_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    // Start on a circle through the geometric mean of root moduli, rotated
    // off the real axis so conjugate-symmetric stalls cannot occur.
    let radius = coeffs
        .last()
        .map_or(1.0, |c| c.abs().powf(1.0 / n as f64))
        .max(f64::MIN_POSITIVE);
    let start: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();
    aberth(coeffs, start)
}

/// As [`monic_roots`], starting from approximations `guess` to the roots
/// (for example the roots of a nearby polynomial).
///
/// Guesses are nudged off the real axis in alternating directions, since
/// an iteration started on the real line never leaves it.
pub fn monic_roots_near(coeffs: &[f64], guess: &[f64]) -> Result<Vec<Complex64>> {
    if guess.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            left: coeffs.len(),
            right: guess.len(),
        });
    }
    let start = guess
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(g, sign * 1e-3 * g.abs().max(1e-3))
        })
        .collect();
    aberth(coeffs, start)
}

fn aberth(coeffs: &[f64], mut z: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = coeffs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(-coeffs[0], 0.0)]);
    }

    let mut done = vec![false; n];
    let mut last_step = vec![f64::INFINITY; n];
    for _ in 0..MAX_ITERATIONS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, z[k]);
            if p == Complex64::new(0.0, 0.0) {
                done[k] = true;
                last_step[k] = 0.0;
                continue;
            }
            let newton = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return Err(Error::RootSolverFailure(MAX_ITERATIONS));
            }
            z[k] -= step;
            let relative = step.norm() / z[k].norm();
            // Converged, or stagnating at the rounding floor of a cluster.
            if relative <= 8.0 * f64::EPSILON
                || (relative <= STAGNATION_TOL && relative >= last_step[k])
            {
                done[k] = true;
            }
            last_step[k] = relative;
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    // Iterates that wander at the rounding floor are converged for our use.
    if last_step.iter().all(|&s| s <= STALL_TOL) {
        return Ok(z);
    }
    Err(Error::RootSolverFailure(MAX_ITERATIONS))
}

/// Realness test of a root set.
#[derive(Debug, Clone, PartialEq)]
pub struct RootednessCheck {
    pub roots: Vec<Complex64>,
    pub imag_tol: f64,
    pub accepted: bool,
}

impl RootednessCheck {
    /// Accepts when every root is real within `imag_tol·max(|r|, 1)` and
    /// strictly negative (so that `−r` is a positive vector entry).
    pub fn new(roots: Vec<Complex64>, imag_tol: f64) -> Self {
        let accepted = roots
            .iter()
            .all(|r| r.im.abs() <= imag_tol * r.norm().max(1.0) && -r.re > 0.0);
        Self {
            roots,
            imag_tol,
            accepted,
        }
    }

    /// `−Re r` for each root.
    pub fn negated_real_parts(&self) -> Vec<f64> {
        self.roots.iter().map(|r| -r.re).collect()
    }
}
