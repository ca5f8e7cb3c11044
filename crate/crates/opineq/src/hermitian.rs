//! Hermitian matrices and the pieces of functional calculus the inequality
//! chains are built from: spectral decomposition, `f(A)` for scalar `f`,
//! the Loewner partial order with signed gaps, operator norms, and the
//! geodesic chord operator
//! `f(m)^{(M·1−A)/(M−m)} · f(M)^{(A−m·1)/(M−m)}`.
//!
//! Complex entries are first-class throughout: real symmetric input is just
//! the special case of zero imaginary parts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scalar::ScalarFunction;
use crate::{Error, Result};

/// Relative tolerance for the Hermitian-ness check at construction.
const ASYMMETRY_RTOL: f64 = 1e-12;
/// Relative slack when testing whether a spectrum sits inside `[m, M]`.
const BRACKET_SLACK: f64 = 1e-12;

/// A square matrix with the Hermitian invariant enforced at construction.
///
/// The stored matrix is exactly self-adjoint: accepted input is replaced by
/// `(X + X*)/2`, which also clears rounding noise on the diagonal imaginary
/// parts. All downstream code may therefore use the Hermitian-only
/// eigensolver unconditionally.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Accepts `mat` if its asymmetry `max |a_ij − conj(a_ji)|` stays below
    /// `1e-12 · (1 + max |a_ij|)`, then stores the symmetrized part.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        check_square(&mat)?;
        let mut asymmetry: f64 = 0.0;
        let mut max_entry: f64 = 0.0;
        for i in 0..mat.nrows() {
            for j in 0..mat.ncols() {
                max_entry = max_entry.max(mat[(i, j)].norm());
                let delta = (mat[(i, j)] - mat[(j, i)].conj()).norm();
                asymmetry = asymmetry.max(delta);
            }
        }
        let tol = ASYMMETRY_RTOL * (1.0 + max_entry);
        if asymmetry > tol {
            return Err(Error::NotHermitian { asymmetry, tol });
        }
        Ok(Self::symmetrize(mat))
    }

    /// Symmetrizes `(X + X*)/2` without an asymmetry check.
    ///
    /// Intended for matrices that are Hermitian in exact arithmetic but
    /// carry rounding noise from products of the functional calculus, e.g.
    /// `U f(Λ) U*` or `Σ K* A K`.
    pub fn from_symmetrized(mat: DMatrix<Complex64>) -> Result<Self> {
        check_square(&mat)?;
        Ok(Self::symmetrize(mat))
    }

    fn symmetrize(mat: DMatrix<Complex64>) -> Self {
        let sym = (&mat + mat.adjoint()).scale(0.5);
        Self { mat: sym }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    /// Diagonal matrix from real entries (in the given order).
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&d| Complex64::new(d, 0.0)));
        Self {
            mat: DMatrix::from_diagonal(&v),
        }
    }

    /// Builds from real entries, row by row; the input must be symmetric.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.iter().map(|r| r.len()).max().unwrap_or(0),
            });
        }
        let mat = DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self {
            mat: &self.mat - &other.mat,
        })
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// Eigendecomposition `A = U Λ U*` with eigenvalues sorted ascending.
    pub fn spectral_decompose(&self) -> SpectralDecomposition {
        let eig = self.mat.clone().symmetric_eigen();
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral_decompose().eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self
            .spectral_decompose()
            .eigenvalues
            .last()
            .expect("dimension >= 1")
    }

    /// Spectral norm `max |λ_i|`; cheaper and sharper than the general
    /// singular-value route because the spectrum is real.
    pub fn operator_norm(&self) -> f64 {
        self.spectral_decompose()
            .eigenvalues
            .iter()
            .fold(0.0, |acc, l| acc.max(l.abs()))
    }

    /// Applies `λ ↦ g(λ)` on the spectrum: `U diag(g(λ)) U*`.
    ///
    /// The result is re-symmetrized, so chained products stay inside the
    /// Hermitian invariant.
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let decomp = self.spectral_decompose();
        let mapped: Result<Vec<f64>> = decomp.eigenvalues.iter().map(|&l| g(l)).collect();
        Self::from_symmetrized(decomp.recompose_with(&mapped?))
    }

    /// Functional calculus `f(A)` for a registry function.
    ///
    /// Every eigenvalue must lie in the domain of `f`; the first offender is
    /// named in the error.
    pub fn apply_function(&self, f: &ScalarFunction) -> Result<Self> {
        self.map_eigenvalues(|l| {
            if !f.domain_contains(l) {
                return Err(Error::EigenvalueOutsideDomain {
                    eigenvalue: l,
                    function: f.id().to_string(),
                });
            }
            f.evaluate(l)
        })
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Invariants: eigenvalues ascending; eigenvector columns orthonormal
/// (`U*U = 1` within 1e-10); `U Λ U*` reconstructs the source within
/// `1e-10 · (1 + ‖A‖)`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("dimension >= 1")
    }

    /// `U diag(values) U*` for replacement eigenvalues `values`.
    pub fn recompose_with(&self, values: &[f64]) -> DMatrix<Complex64> {
        let v = DVector::from_iterator(values.len(), values.iter().map(|&d| Complex64::new(d, 0.0)));
        let diag = DMatrix::from_diagonal(&v);
        &self.eigenvectors * diag * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        self.recompose_with(&self.eigenvalues)
    }
}

/// Spectral band `0 < m < M` used to bracket instance spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundsWire", into = "BoundsWire")]
pub struct SpectrumBounds {
    m: f64,
    upper: f64,
}

impl SpectrumBounds {
    pub fn new(m: f64, upper: f64) -> Result<Self> {
        if !(m.is_finite() && upper.is_finite()) || m <= 0.0 || upper <= m {
            return Err(Error::InvalidBounds { m, upper });
        }
        Ok(Self { m, upper })
    }

    /// Lower endpoint `m`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Upper endpoint `M`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn pair(&self) -> (f64, f64) {
        (self.m, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.m
    }

    pub fn condition(&self) -> f64 {
        self.upper / self.m
    }

    pub fn contains(&self, t: f64) -> bool {
        self.m <= t && t <= self.upper
    }

    /// Checks `spectrum ⊆ [m − s, M + s]` with slack `s = 1e-12 · max(1, M)`.
    pub fn brackets(&self, eigenvalues: &[f64]) -> Result<()> {
        let slack = BRACKET_SLACK * self.upper.max(1.0);
        let lambda_min = eigenvalues.iter().fold(f64::INFINITY, |a, &l| a.min(l));
        let lambda_max = eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &l| a.max(l));
        if lambda_min < self.m - slack || lambda_max > self.upper + slack {
            return Err(Error::SpectrumOutsideBounds {
                lambda_min,
                lambda_max,
                m: self.m,
                upper: self.upper,
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct BoundsWire {
    m: f64,
    #[serde(rename = "M")]
    upper: f64,
}

impl TryFrom<BoundsWire> for SpectrumBounds {
    type Error = String;

    fn try_from(w: BoundsWire) -> std::result::Result<Self, String> {
        SpectrumBounds::new(w.m, w.upper).map_err(|e| e.to_string())
    }
}

impl From<SpectrumBounds> for BoundsWire {
    fn from(b: SpectrumBounds) -> Self {
        BoundsWire {
            m: b.m,
            upper: b.upper,
        }
    }
}

/// Outcome of a Loewner comparison `A ≤ B`.
///
/// `gap = λ_min(B − A)` is signed: negative means the inequality is
/// violated by that spectral amount. `holds` applies the tolerance policy
/// `gap ≥ −(atol + rtol · scale)` with `scale = max(1, ‖A‖, ‖B‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoewnerVerdict {
    pub holds: bool,
    pub gap: f64,
    pub scale: f64,
}

/// Compares `a ≤ b` in the Loewner order.
pub fn loewner_leq(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    rtol: f64,
    atol: f64,
) -> Result<LoewnerVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let diff = b.sub(a)?;
    let gap = diff.min_eigenvalue();
    let scale = 1.0_f64.max(a.operator_norm()).max(b.operator_norm());
    Ok(LoewnerVerdict {
        holds: gap >= -(atol + rtol * scale),
        gap,
        scale,
    })
}

/// Spectral norm of an arbitrary (not necessarily Hermitian) matrix via
/// `‖X‖² = λ_max(X*X)`. Needed for products like `A^{1/2} B^{-1/2}`.
pub fn spectral_norm(x: &DMatrix<Complex64>) -> f64 {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0.0;
    }
    let gram = x.adjoint() * x;
    let h = HermitianMatrix::from_symmetrized(gram).expect("gram matrix is square");
    h.max_eigenvalue().max(0.0).sqrt()
}

/// Geodesic chord operator
/// `f(m)^{(M·1−A)/(M−m)} · f(M)^{(A−m·1)/(M−m)}`.
///
/// Both factors are functions of `A`, so they commute and the product is
/// the single functional-calculus image of
/// `t ↦ f(m)^{(M−t)/(M−m)} · f(M)^{(t−m)/(M−m)}`; that is how it is
/// evaluated here. Eigenvalues at the endpoints reproduce `f(m)` and `f(M)`
/// exactly because `x^0 = 1` and `x^1 = x` are exact.
pub fn chord_operator(
    a: &HermitianMatrix,
    bounds: &SpectrumBounds,
    f: &ScalarFunction,
) -> Result<HermitianMatrix> {
    let (m, upper) = bounds.pair();
    let fm = f.evaluate(m)?;
    let fu = f.evaluate(upper)?;
    for (t, v) in [(m, fm), (upper, fu)] {
        if v <= 0.0 {
            return Err(Error::NonPositiveValue {
                function: f.id().to_string(),
                t,
                value: v,
            });
        }
    }
    let decomp = a.spectral_decompose();
    bounds.brackets(decomp.eigenvalues())?;
    let width = upper - m;
    let values: Vec<f64> = decomp
        .eigenvalues()
        .iter()
        .map(|&l| fm.powf((upper - l) / width) * fu.powf((l - m) / width))
        .collect();
    HermitianMatrix::from_symmetrized(decomp.recompose_with(&values))
}

fn check_square(mat: &DMatrix<Complex64>) -> Result<()> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::NotSquare {
            rows: mat.nrows(),
            cols: mat.ncols(),
        });
    }
    if mat.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(())
}
