//! Seeded generators of comparable pairs, majorization pairs and matrix
//! triples.
//!
//! Every generator takes an explicit RNG. [`substream`] derives an
//! independent ChaCha8 stream from `(seed, index)`, so trial `i` of a batch
//! sees the same randomness regardless of scheduling.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::functionals::SIMPLEX_TOL;
use crate::order::{compare, esym_all, ComparisonTolerance, DominanceVerdict, PositiveVector};
use crate::roots::{monic_roots, RootednessCheck, DEFAULT_IMAG_TOL};
use crate::spd::{format_f64, SpdMatrix};

pub const DEFAULT_SHRINK: f64 = 0.05;

/// Shrink used by [`sample_pair`] in dimension `n`.
///
/// Independent 5% coefficient perturbations leave the real-rooted cone
/// almost surely once `n ≥ 8` (measured acceptance: 0 of 5 000 at `n = 8`),
/// so larger dimensions use smaller perturbations. Measured acceptance with
/// this schedule stays above 10% through `n = 8`.
pub fn default_shrink(n: usize) -> f64 {
    match n {
        0..=6 => DEFAULT_SHRINK,
        7 => 5e-3,
        8 => 2e-3,
        _ => 5e-4,
    }
}

/// Entries of sampled base vectors are log-uniform in this range.
pub const ENTRY_RANGE: (f64, f64) = (0.1, 10.0);

/// Independent stream for trial `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Which hypothesis a sampled pair must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairConstraint {
    /// `x ≺_E y`: `e_n` equal.
    FullStrict,
    /// `x ⪯_E y`.
    WeakOnly,
    /// `x ≺_E y` with `e_1 = 1` on both sides.
    SimplexStrict,
    /// `x ⪯_E y` with `e_1 = 1` on both sides.
    SimplexWeak,
}

impl PairConstraint {
    pub const ALL: [PairConstraint; 4] = [
        Self::FullStrict,
        Self::WeakOnly,
        Self::SimplexStrict,
        Self::SimplexWeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FullStrict => "FullStrict",
            Self::WeakOnly => "WeakOnly",
            Self::SimplexStrict => "SimplexStrict",
            Self::SimplexWeak => "SimplexWeak",
        }
    }

    pub fn is_simplex(self) -> bool {
        matches!(self, Self::SimplexStrict | Self::SimplexWeak)
    }

    pub fn fixes_last(self) -> bool {
        matches!(self, Self::FullStrict | Self::SimplexStrict)
    }

    /// With `n = 2`, fixing both `e_1` and `e_2` forces `x = y`.
    pub fn min_dim(self) -> usize {
        match self {
            Self::SimplexStrict => 3,
            _ => 2,
        }
    }

    pub fn check_dim(self, n: usize) -> Result<()> {
        if n < self.min_dim() {
            return Err(Error::InfeasibleConstraint {
                constraint: self.name().to_string(),
                n,
            });
        }
        Ok(())
    }

    /// Whether a recomputed verdict (and the pair's sums) meet the constraint.
    pub fn admits(
        self,
        verdict: &DominanceVerdict,
        x: &PositiveVector,
        y: &PositiveVector,
    ) -> bool {
        let order_ok = if self.fixes_last() {
            verdict.left_strictly_below_right()
        } else {
            verdict.left_below_right()
        };
        let sums_ok = !self.is_simplex()
            || ((x.sum() - 1.0).abs() <= SIMPLEX_TOL && (y.sum() - 1.0).abs() <= SIMPLEX_TOL);
        order_ok && sums_ok
    }
}

impl fmt::Display for PairConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairConstraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown constraint `{s}`")))
    }
}

/// A sampled pair with its recomputed verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct DominancePair {
    pub x: PositiveVector,
    pub y: PositiveVector,
    pub constraint: PairConstraint,
    pub verdict: DominanceVerdict,
}

impl DominancePair {
    /// Recomputes the verdict and rejects pairs that miss the constraint.
    pub fn certify(
        x: PositiveVector,
        y: PositiveVector,
        constraint: PairConstraint,
    ) -> Result<Self> {
        let verdict = compare(&x, &y, ComparisonTolerance::default())?;
        if !constraint.admits(&verdict, &x, &y) {
            return Err(Error::Rejected(format!(
                "recomputed verdict {:?}/{:?} does not satisfy {constraint}",
                verdict.kind, verdict.direction
            )));
        }
        Ok(Self {
            x,
            y,
            constraint,
            verdict,
        })
    }
}

/// Ranges for the two-dimensional generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N2Ranges {
    /// Product `e_2` is drawn log-uniformly from this range.
    pub product: (f64, f64),
    /// Sums are drawn from `[2√p, sum_factor·√p]`.
    pub sum_factor: f64,
}

impl Default for N2Ranges {
    fn default() -> Self {
        Self {
            product: (0.1, 10.0),
            sum_factor: 10.0,
        }
    }
}

/// Roots of `t² − s t + p`, larger first.
fn quadratic_roots(s: f64, p: f64) -> (f64, f64) {
    let disc = (s * s - 4.0 * p).max(0.0);
    let big = 0.5 * (s + disc.sqrt());
    (big, p / big)
}

/// Pair with common product `p` and sums `s_x ≤ s_y`.
pub fn pair_n2_from(p: f64, s_x: f64, s_y: f64) -> Result<DominancePair> {
    let (x1, x2) = quadratic_roots(s_x, p);
    let (y1, y2) = quadratic_roots(s_y, p);
    DominancePair::certify(
        PositiveVector::new(vec![x1, x2])?,
        PositiveVector::new(vec![y1, y2])?,
        PairConstraint::FullStrict,
    )
}

/// Rejection-free `FullStrict` pair in two dimensions.
pub fn pair_n2<R: Rng + ?Sized>(rng: &mut R, ranges: &N2Ranges) -> Result<DominancePair> {
    let p = log_uniform(rng, ranges.product.0, ranges.product.1);
    let (lo, hi) = (2.0 * p.sqrt(), ranges.sum_factor * p.sqrt());
    let a = lo + rng.random::<f64>() * (hi - lo);
    let b = lo + rng.random::<f64>() * (hi - lo);
    pair_n2_from(p, a.min(b), a.max(b))
}

/// Discriminant of `t³ − t² + c t − p`.
fn cubic_discriminant(c: f64, p: f64) -> f64 {
    18.0 * c * p - 4.0 * p + c * c - 4.0 * c * c * c - 27.0 * p * p
}

/// Interval of `e_2` values for which `e_1 = 1, e_3 = p` is realized by a
/// positive vector, located by bisection on the discriminant sign.
pub fn feasible_e2_interval(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p <= 1.0 / 27.0) {
        return Err(Error::InfeasibleProduct(p));
    }
    // The discriminant is a cubic in c with its local maximum at c*.
    let peak = (2.0 + (4.0 + 864.0 * p).sqrt()) / 24.0;
    if cubic_discriminant(peak, p) <= 0.0 {
        return Ok((peak, peak));
    }
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if cubic_discriminant(mid, p) >= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    Ok((bisect(peak, 0.0), bisect(peak, 1.0 / 3.0)))
}

/// Real roots of `t³ − t² + c t − p` by the trigonometric solution,
/// assuming three real roots.
fn simplex_cubic_roots(c: f64, p: f64) -> [f64; 3] {
    let shift = 1.0 / 3.0;
    // t = s + 1/3:  s³ + a s + b = 0
    let a = c - shift;
    let b = -2.0 / 27.0 + c / 3.0 - p;
    if a >= -1e-14 {
        return [shift; 3];
    }
    let m = 2.0 * (-a / 3.0).sqrt();
    let arg = ((3.0 * b / (2.0 * a)) * (-3.0 / a).sqrt()).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
    [0, 1, 2].map(|k| shift + m * (theta - two_pi_3 * k as f64).cos())
}

/// `SimplexStrict` pair at `n = 3` from `e_3 = p` and `e_2` values `c_x ≤ c_y`.
pub fn pair_n3_simplex_from(p: f64, c_x: f64, c_y: f64) -> Result<DominancePair> {
    let (lo, hi) = feasible_e2_interval(p)?;
    let clamp = |c: f64| c.clamp(lo, hi);
    let x = simplex_cubic_roots(clamp(c_x), p);
    let y = simplex_cubic_roots(clamp(c_y), p);
    DominancePair::certify(
        PositiveVector::new(x.to_vec())?,
        PositiveVector::new(y.to_vec())?,
        PairConstraint::SimplexStrict,
    )
}

/// Rejection-free `SimplexStrict` pair in three dimensions.
pub fn pair_n3_simplex<R: Rng + ?Sized>(rng: &mut R) -> Result<DominancePair> {
    let z: Vec<f64> = (0..3)
        .map(|_| log_uniform(rng, ENTRY_RANGE.0, ENTRY_RANGE.1))
        .collect();
    let total: f64 = z.iter().sum();
    let p = z.iter().map(|v| v / total).product::<f64>().min(1.0 / 27.0);
    let (lo, hi) = feasible_e2_interval(p)?;
    let a = lo + rng.random::<f64>() * (hi - lo);
    let b = lo + rng.random::<f64>() * (hi - lo);
    pair_n3_simplex_from(p, a.min(b), a.max(b))
}

/// General pair by shrinking the signature of a random `y` and recovering
/// `x` from the shrunk coefficients.
///
/// `y` has log-uniform entries (normalized to sum one for simplex kinds).
/// Targets are `c_k = (1 − shrink·u_k)·e_k(y)`, with `c_n` (strict kinds) and
/// `c_1` (simplex kinds) held at `y`'s values. Returns [`Error::Rejected`]
/// when the target polynomial is not real-rooted with negative roots, or
/// when the recovered pair fails recertification.
pub fn pair_general<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: PairConstraint,
    shrink: f64,
) -> Result<DominancePair> {
    constraint.check_dim(n)?;
    if !(0.0..=0.2).contains(&shrink) {
        return Err(Error::InvalidProblem(format!(
            "shrink {shrink} outside [0, 0.2]"
        )));
    }
    let mut y: Vec<f64> = (0..n)
        .map(|_| log_uniform(rng, ENTRY_RANGE.0, ENTRY_RANGE.1))
        .collect();
    if constraint.is_simplex() {
        let total: f64 = y.iter().sum();
        y.iter_mut().for_each(|v| *v /= total);
    }
    let y = PositiveVector::new(y)?;
    let ey = esym_all(&y);
    let targets: Vec<f64> = (1..=n)
        .map(|k| {
            let u: f64 = rng.random();
            let held = (k == n && constraint.fixes_last()) || (k == 1 && constraint.is_simplex());
            if held {
                ey.e(k)
            } else {
                (1.0 - shrink * u) * ey.e(k)
            }
        })
        .collect();
    let x = recover_from_signature(&targets)?;
    DominancePair::certify(x, y, constraint)
}

/// Positive vector whose signature is `targets`, if one exists.
pub fn recover_from_signature(targets: &[f64]) -> Result<PositiveVector> {
    let roots = monic_roots(targets)?;
    let check = RootednessCheck::new(roots, DEFAULT_IMAG_TOL);
    if !check.accepted {
        return Err(Error::Rejected(
            "target polynomial is not real-rooted".into(),
        ));
    }
    PositiveVector::new(check.negated_real_parts())
        .map_err(|_| Error::Rejected("recovered entry is not positive".into()))
}

/// Draws a pair for `constraint`, using the rejection-free generators where
/// they apply (`n = 2` strict, `n = 3` simplex strict).
pub fn sample_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: PairConstraint,
) -> Result<DominancePair> {
    constraint.check_dim(n)?;
    match (n, constraint) {
        (2, PairConstraint::FullStrict) => pair_n2(rng, &N2Ranges::default()),
        (3, PairConstraint::SimplexStrict) => pair_n3_simplex(rng),
        _ => pair_general(rng, n, constraint, default_shrink(n)),
    }
}

/// Whether [`sample_pair`] uses the rejection-sampling generator for
/// `(n, constraint)`.
pub fn uses_general_generator(n: usize, constraint: PairConstraint) -> bool {
    !matches!(
        (n, constraint),
        (2, PairConstraint::FullStrict) | (3, PairConstraint::SimplexStrict)
    )
}

/// Upper bound on attempts spent collecting `count` accepted samples.
pub fn attempt_budget(count: usize) -> u64 {
    (count as u64).saturating_mul(1000).max(10_000)
}

/// The first `count` accepted pairs of the stream `(seed, 0), (seed, 1), …`,
/// each tagged with its stream index.
pub fn collect_pairs(
    n: usize,
    constraint: PairConstraint,
    seed: u64,
    count: usize,
) -> Result<Vec<(u64, DominancePair)>> {
    constraint.check_dim(n)?;
    let mut out = Vec::with_capacity(count);
    let mut index = 0;
    while out.len() < count {
        if index >= attempt_budget(count) {
            return Err(Error::Rejected(format!(
                "only {} of {count} pairs accepted within {index} attempts",
                out.len()
            )));
        }
        match sample_pair(&mut substream(seed, index), n, constraint) {
            Ok(pair) => out.push((index, pair)),
            Err(Error::Rejected(_)) | Err(Error::RootSolverFailure(_)) => {}
            Err(e) => return Err(e),
        }
        index += 1;
    }
    Ok(out)
}

/// CSV header `n,constraint,seed,index,x_1..x_n,y_1..y_n`.
pub fn corpus_header(n: usize) -> String {
    let mut cols = vec![
        "n".to_string(),
        "constraint".into(),
        "seed".into(),
        "index".into(),
    ];
    cols.extend((1..=n).map(|i| format!("x_{i}")));
    cols.extend((1..=n).map(|i| format!("y_{i}")));
    cols.join(",")
}

/// Writes a pair corpus, one row per pair, 17 significant digits.
pub fn write_corpus(n: usize, seed: u64, pairs: &[(u64, DominancePair)]) -> String {
    let mut out = corpus_header(n);
    out.push('\n');
    for (index, pair) in pairs {
        let mut row = vec![
            n.to_string(),
            pair.constraint.to_string(),
            seed.to_string(),
            index.to_string(),
        ];
        row.extend(pair.x.as_slice().iter().map(|&v| format_f64(v)));
        row.extend(pair.y.as_slice().iter().map(|&v| format_f64(v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One parsed corpus row.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRow {
    pub n: usize,
    pub constraint: PairConstraint,
    pub seed: u64,
    pub index: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Parses a corpus written by [`write_corpus`].
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty corpus".into()))?;
    if !header.starts_with("n,constraint,seed,index") {
        return Err(Error::Parse(format!("unexpected header `{header}`")));
    }
    let field = |v: &str| Error::Parse(format!("bad field `{v}`"));
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            let n: usize = cols[0].parse().map_err(|_| field(cols[0]))?;
            if cols.len() != 4 + 2 * n {
                return Err(Error::Parse(format!(
                    "row has {} fields, expected {}",
                    cols.len(),
                    4 + 2 * n
                )));
            }
            let nums = |range: std::ops::Range<usize>| -> Result<Vec<f64>> {
                cols[range]
                    .iter()
                    .map(|v| v.parse().map_err(|_| field(v)))
                    .collect()
            };
            Ok(CorpusRow {
                n,
                constraint: cols[1].parse()?,
                seed: cols[2].parse().map_err(|_| field(cols[2]))?,
                index: cols[3].parse().map_err(|_| field(cols[3]))?,
                x: nums(4..4 + n)?,
                y: nums(4 + n..4 + 2 * n)?,
            })
        })
        .collect()
}

/// `(x, y)` with `x` majorized by `y`, by `transforms` random T-transforms.
pub fn majorization_pair_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    transforms: usize,
) -> Result<(PositiveVector, PositiveVector)> {
    if n < 2 {
        return Err(Error::InfeasibleConstraint {
            constraint: "majorization".into(),
            n,
        });
    }
    let y: Vec<f64> = (0..n)
        .map(|_| log_uniform(rng, ENTRY_RANGE.0, ENTRY_RANGE.1))
        .collect();
    let mut x = y.clone();
    for _ in 0..transforms {
        let i = rng.random_range(0..n);
        let j = (i + 1 + rng.random_range(0..n - 1)) % n;
        let lambda: f64 = rng.random();
        let (a, b) = (x[i], x[j]);
        x[i] = lambda * a + (1.0 - lambda) * b;
        x[j] = lambda * b + (1.0 - lambda) * a;
    }
    Ok((PositiveVector::new(x)?, PositiveVector::new(y)?))
}

/// Majorization pair with `2n` T-transforms.
pub fn majorization_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
) -> Result<(PositiveVector, PositiveVector)> {
    majorization_pair_with(rng, n, 2 * n)
}

/// Largest violation of `x ≺ y` in classical majorization: the maximum over
/// `k` of the decreasing partial sums of `x` minus those of `y`, and the
/// total-sum gap. Nonpositive (up to rounding) when `x ≺ y`.
pub fn majorization_excess(x: &[f64], y: &[f64]) -> f64 {
    let desc = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (xs, ys) = (desc(x), desc(y));
    let mut px = 0.0;
    let mut py = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        worst = worst.max(px - py);
    }
    worst.max((px - py).abs())
}

/// Haar-distributed orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `(A, B, C)` with `λ(AC⁻¹) = x` and `λ(BC⁻¹) = y` for a sampled pair.
#[derive(Debug, Clone)]
pub struct MatrixTriple {
    pub a: SpdMatrix,
    pub b: SpdMatrix,
    pub c: SpdMatrix,
    pub pair: DominancePair,
}

/// Builds `A = C^{1/2} U diag(x) Uᵀ C^{1/2}` and the analogue for `B`.
pub fn matrix_triple_from(
    pair: DominancePair,
    u: &DMatrix<f64>,
    v: &DMatrix<f64>,
    c: SpdMatrix,
) -> Result<MatrixTriple> {
    let root = c.sqrt();
    let conj = |q: &DMatrix<f64>, d: &[f64]| -> Result<SpdMatrix> {
        let inner = SpdMatrix::from_spectrum(q, d)?;
        let m = &root * inner.matrix() * &root;
        SpdMatrix::new((&m + m.transpose()) * 0.5)
    };
    let a = conj(u, pair.x.as_slice())?;
    let b = conj(v, pair.y.as_slice())?;
    Ok(MatrixTriple { a, b, c, pair })
}

/// Eigenvalues of `C` are log-uniform in this range.
pub const CONGRUENCE_RANGE: (f64, f64) = (0.25, 4.0);

/// Random triple for `constraint` in dimension `n`.
pub fn matrix_triple<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: PairConstraint,
) -> Result<MatrixTriple> {
    let pair = sample_pair(rng, n, constraint)?;
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let w = random_orthogonal(rng, n);
    let spectrum: Vec<f64> = (0..n)
        .map(|_| log_uniform(rng, CONGRUENCE_RANGE.0, CONGRUENCE_RANGE.1))
        .collect();
    let c = SpdMatrix::from_spectrum(&w, &spectrum)?;
    matrix_triple_from(pair, &u, &v, c)
}

/// Draws a pair and conjugates both sides by independent random rotations:
/// `(U diag(x) Uᵀ, V diag(y) Vᵀ)`.
pub fn matrix_pair<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: PairConstraint,
) -> Result<(SpdMatrix, SpdMatrix, DominancePair)> {
    let pair = sample_pair(rng, n, constraint)?;
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let a = SpdMatrix::from_spectrum(&u, pair.x.as_slice())?;
    let b = SpdMatrix::from_spectrum(&v, pair.y.as_slice())?;
    Ok((a, b, pair))
}
