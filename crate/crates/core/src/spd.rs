//! Real symmetric positive definite matrices and the spectral quantities the
//! dominance order is lifted to.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::functionals::{renyi_entropy, RenyiOrder, SIMPLEX_TOL};
use crate::order::{
    compare, esym_coefficients, ComparisonTolerance, DominanceVerdict, PositiveVector,
};

/// Relative symmetry tolerance accepted on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius mass, relative to `‖A‖_F`, at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 60;

/// Verdict of the matrix order; computed on eigenvalue vectors.
pub type MatrixDominanceVerdict = DominanceVerdict;

/// Symmetric positive definite matrix with its spectral decomposition.
///
/// Eigenvalues are ascending; column `i` of `eigenvectors` belongs to
/// eigenvalue `i`. The decomposition is computed once on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let norm = matrix.norm().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * norm {
            return Err(Error::NotSymmetric(asym));
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        let (eigenvalues, eigenvectors) = jacobi_eigen(&matrix)?;
        if eigenvalues[0].is_nan() || eigenvalues[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite(eigenvalues[0]));
        }
        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        ))
    }

    /// `Q diag(λ) Qᵀ` for an orthogonal `Q` and positive `λ`.
    pub fn from_spectrum(q: &DMatrix<f64>, eigenvalues: &[f64]) -> Result<Self> {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues));
        Self::new(q * d * q.transpose())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn spectrum(&self) -> PositiveVector {
        PositiveVector::from_slice(&self.eigenvalues)
            .expect("eigenvalues of an SpdMatrix are positive")
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// `Q f(Λ) Qᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).scale_mut(fj);
        }
        let out = scaled * q.transpose();
        (&out + out.transpose()) * 0.5
    }

    pub fn sqrt(&self) -> DMatrix<f64> {
        self.spectral_map(f64::sqrt)
    }

    pub fn inv_sqrt(&self) -> DMatrix<f64> {
        self.spectral_map(|l| 1.0 / l.sqrt())
    }

    pub fn log(&self) -> DMatrix<f64> {
        self.spectral_map(f64::ln)
    }

    /// `Σ log λ_i`.
    pub fn log_det(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// `‖Q Λ Qᵀ − A‖_F`.
    pub fn reconstruction_error(&self) -> f64 {
        (self.spectral_map(|l| l) - &self.matrix).norm()
    }

    /// `‖QᵀQ − I‖_F`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        (self.eigenvectors.transpose() * &self.eigenvectors - DMatrix::identity(n, n)).norm()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius mass
/// drops to `JACOBI_TOL·‖A‖_F`. Eigenvalues are returned ascending.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let target = JACOBI_TOL * a.norm();

    let off = |m: &DMatrix<f64>| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence(JACOBI_MAX_SWEEPS));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off(&m) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let eigenvalues = order.iter().map(|&i| m[(i, i)]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok((eigenvalues, eigenvectors))
}

/// Eigenvalues (ascending) and eigenvectors from the cached decomposition.
pub fn eigendecompose(a: &SpdMatrix) -> (Vec<f64>, DMatrix<f64>) {
    (a.eigenvalues.clone(), a.eigenvectors.clone())
}

/// `tr(∧^k A) = e_k(λ(A))`, without forming the exterior power.
pub fn exterior_trace(a: &SpdMatrix, k: usize) -> Result<f64> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    Ok(esym_coefficients(&a.eigenvalues)[k])
}

/// The dominance order applied to the spectra of `a` and `b`.
pub fn matrix_compare(
    a: &SpdMatrix,
    b: &SpdMatrix,
    tol: ComparisonTolerance,
) -> Result<MatrixDominanceVerdict> {
    compare(&a.spectrum(), &b.spectrum(), tol)
}

/// `log det(I + A)`.
#[allow(non_snake_case)]
pub fn logdet_I_plus(a: &SpdMatrix) -> f64 {
    a.eigenvalues.iter().map(|l| l.ln_1p()).sum()
}

fn check_dims(a: &SpdMatrix, b: &SpdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Spectrum of `B^{-1/2} A B^{-1/2}`, which is the spectrum of `A B^{-1}`.
pub fn relative_spectrum(a: &SpdMatrix, b: &SpdMatrix) -> Result<Vec<f64>> {
    check_dims(a, b)?;
    let w = b.inv_sqrt();
    let m = &w * a.matrix() * &w;
    let m = (&m + m.transpose()) * 0.5;
    Ok(jacobi_eigen(&m)?.0)
}

/// Affine-invariant Riemannian distance `‖log B^{-1/2} A B^{-1/2}‖_F`.
pub fn riemannian_distance(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    let lambda = relative_spectrum(a, b)?;
    Ok(lambda.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// `log det((A+B)/2) − ½ (log det A + log det B)`.
pub fn s_divergence(a: &SpdMatrix, b: &SpdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let mid = SpdMatrix::new((a.matrix() + b.matrix()) * 0.5)?;
    Ok(mid.log_det() - 0.5 * (a.log_det() + b.log_det()))
}

/// Quantum Rényi entropy of a unit-trace positive definite matrix.
pub fn quantum_renyi(x: &SpdMatrix, order: RenyiOrder) -> Result<f64> {
    let trace = x.trace();
    if (trace - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::TraceViolation(trace));
    }
    renyi_entropy(&x.spectrum(), order)
}

/// Writes a matrix as a CSV block: a `dim,<n>` header then `n` rows.
pub fn write_csv_block(m: &DMatrix<f64>, out: &mut String) {
    let _ = writeln!(out, "dim,{}", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_f64(m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
}

/// Parses consecutive CSV blocks written by [`write_csv_block`].
pub fn parse_csv_blocks(text: &str) -> Result<Vec<DMatrix<f64>>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut blocks = Vec::new();
    while let Some(header) = lines.next() {
        let n: usize = header
            .strip_prefix("dim,")
            .and_then(|s| s.trim().parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Parse(format!("expected `dim,<n>` header, got `{header}`")))?;
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("block truncated at row {r}")))?;
            let row: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {r}: {e}")))?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        blocks.push(DMatrix::from_row_slice(n, n, &data));
    }
    Ok(blocks)
}

/// 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
