//! Normalized positive linear maps `Φ: B(H) → B(K)`, i.e. linear maps that
//! send positive operators to positive operators with `Φ(1_H) = 1_K`.
//!
//! The canonical representation is a Kraus family
//! `Φ(A) = Σ K_i* A K_i` with `Σ K_i* K_i = 1_K`, where each
//! `K_i ∈ C^{dim_in × dim_out}`. Structured variants that appear constantly
//! in the inequality literature — pinchings, compressions, the normalized
//! trace, mixtures of unitary conjugations — are kept as named constructors
//! so campaign reports can say which family an instance came from.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gen;
use crate::hermitian::{spectral_norm, HermitianMatrix};
use crate::{Error, Result};

/// Residual threshold for structural invariants (unitality, idempotence,
/// isometry) at validating construction.
const STRUCTURE_TOL: f64 = 1e-10;

/// Specification of a normalized positive linear map.
///
/// Serializes as a tagged JSON object; matrices become nested row arrays of
/// `[re, im]` pairs. Deserialization is structural only — run
/// [`MapSpec::validate_structure`] (or use [`MapSpec::from_json`]) to
/// re-establish the invariants on untrusted input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MapSpec {
    Kraus {
        #[serde(with = "cmat::list")]
        operators: Vec<DMatrix<Complex64>>,
    },
    Pinching {
        #[serde(with = "cmat::list")]
        projections: Vec<DMatrix<Complex64>>,
    },
    Compression {
        #[serde(with = "cmat::single")]
        isometry: DMatrix<Complex64>,
    },
    NormalizedTrace {
        dim: usize,
    },
    UnitaryMixture {
        weights: Vec<f64>,
        #[serde(with = "cmat::list")]
        unitaries: Vec<DMatrix<Complex64>>,
    },
}

/// Outcome of empirical map validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapValidationReport {
    /// `‖Φ(1) − 1‖` in operator norm.
    pub unitality_residual: f64,
    /// Number of random PSD inputs whose image failed the PSD check.
    pub positivity_failures: usize,
    pub samples: usize,
}

impl MapSpec {
    /// Kraus family, verified unital: `‖Σ K_i* K_i − 1‖ ≤ 1e-10`.
    pub fn kraus(operators: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let spec = Self::kraus_unchecked(operators)?;
        spec.validate_structure()?;
        Ok(spec)
    }

    /// Kraus family with shape checks only — unitality is *not* verified.
    ///
    /// Exists so that broken specs can be built and handed to
    /// [`MapSpec::validate`] for diagnosis.
    pub fn kraus_unchecked(operators: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidMap("kraus family is empty".to_string()))?;
        let (rows, cols) = (first.nrows(), first.ncols());
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMap("kraus operators must be nonempty".to_string()));
        }
        if operators.iter().any(|k| k.nrows() != rows || k.ncols() != cols) {
            return Err(Error::InvalidMap(
                "kraus operators must share one shape".to_string(),
            ));
        }
        Ok(MapSpec::Kraus { operators })
    }

    /// Pinching by explicit projections, verified: each Hermitian idempotent
    /// and `Σ P_i = 1` within 1e-10 (which forces mutual orthogonality).
    pub fn pinching(projections: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let spec = Self::pinching_unchecked(projections)?;
        spec.validate_structure()?;
        Ok(spec)
    }

    /// Pinching with shape checks only.
    pub fn pinching_unchecked(projections: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let first = projections
            .first()
            .ok_or_else(|| Error::InvalidMap("pinching has no projections".to_string()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidMap("projections must be nonempty".to_string()));
        }
        if projections.iter().any(|p| p.nrows() != dim || p.ncols() != dim) {
            return Err(Error::InvalidMap(
                "projections must be square of one dimension".to_string(),
            ));
        }
        Ok(MapSpec::Pinching { projections })
    }

    /// Pinching onto consecutive coordinate blocks of the given sizes.
    /// Unitality is exact by construction.
    pub fn block_pinching(dim: usize, sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidMap("block sizes must be nonempty".to_string()));
        }
        if sizes.iter().sum::<usize>() != dim {
            return Err(Error::InvalidMap(format!(
                "block sizes sum to {}, expected {dim}",
                sizes.iter().sum::<usize>()
            )));
        }
        let mut projections = Vec::with_capacity(sizes.len());
        let mut offset = 0;
        for &s in sizes {
            let p = DMatrix::from_fn(dim, dim, |i, j| {
                if i == j && i >= offset && i < offset + s {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            projections.push(p);
            offset += s;
        }
        Ok(MapSpec::Pinching { projections })
    }

    /// Compression `A ↦ V* A V`, verified isometric: `‖V*V − 1‖ ≤ 1e-10`
    /// with `V ∈ C^{dim_in × dim_out}`, `dim_out ≤ dim_in`.
    pub fn compression(isometry: DMatrix<Complex64>) -> Result<Self> {
        let spec = Self::compression_unchecked(isometry)?;
        spec.validate_structure()?;
        Ok(spec)
    }

    /// Compression with shape checks only.
    pub fn compression_unchecked(isometry: DMatrix<Complex64>) -> Result<Self> {
        if isometry.nrows() == 0 || isometry.ncols() == 0 {
            return Err(Error::InvalidMap("isometry must be nonempty".to_string()));
        }
        if isometry.ncols() > isometry.nrows() {
            return Err(Error::InvalidMap(
                "isometry cannot expand the space".to_string(),
            ));
        }
        Ok(MapSpec::Compression { isometry })
    }

    /// Normalized trace `A ↦ [tr(A)/dim]` into a 1×1 output space.
    pub fn normalized_trace(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMap("trace needs dim >= 1".to_string()));
        }
        Ok(MapSpec::NormalizedTrace { dim })
    }

    /// Convex mixture `A ↦ Σ w_i U_i* A U_i`, verified: weights positive and
    /// summing to 1 within 1e-10, each factor unitary within 1e-10.
    pub fn unitary_mixture(terms: Vec<(f64, DMatrix<Complex64>)>) -> Result<Self> {
        let spec = Self::unitary_mixture_unchecked(terms)?;
        spec.validate_structure()?;
        Ok(spec)
    }

    /// Unitary mixture with shape checks only.
    pub fn unitary_mixture_unchecked(terms: Vec<(f64, DMatrix<Complex64>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidMap("mixture has no terms".to_string()));
        }
        let dim = terms[0].1.nrows();
        if dim == 0 {
            return Err(Error::InvalidMap("unitaries must be nonempty".to_string()));
        }
        if terms.iter().any(|(_, u)| u.nrows() != dim || u.ncols() != dim) {
            return Err(Error::InvalidMap(
                "unitaries must be square of one dimension".to_string(),
            ));
        }
        let (weights, unitaries) = terms.into_iter().unzip();
        Ok(MapSpec::UnitaryMixture { weights, unitaries })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            MapSpec::Kraus { operators } => operators[0].nrows(),
            MapSpec::Pinching { projections } => projections[0].nrows(),
            MapSpec::Compression { isometry } => isometry.nrows(),
            MapSpec::NormalizedTrace { dim } => *dim,
            MapSpec::UnitaryMixture { unitaries, .. } => unitaries[0].nrows(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            MapSpec::Kraus { operators } => operators[0].ncols(),
            MapSpec::Pinching { projections } => projections[0].nrows(),
            MapSpec::Compression { isometry } => isometry.ncols(),
            MapSpec::NormalizedTrace { .. } => 1,
            MapSpec::UnitaryMixture { unitaries, .. } => unitaries[0].nrows(),
        }
    }

    /// Short family tag used in reports: `trace`, `pinching`, `compression`,
    /// `kraus(n)`, `unitary_mixture(k)`.
    pub fn variant_name(&self) -> String {
        match self {
            MapSpec::Kraus { operators } => format!("kraus({})", operators.len()),
            MapSpec::Pinching { .. } => "pinching".to_string(),
            MapSpec::Compression { .. } => "compression".to_string(),
            MapSpec::NormalizedTrace { .. } => "trace".to_string(),
            MapSpec::UnitaryMixture { unitaries, .. } => {
                format!("unitary_mixture({})", unitaries.len())
            }
        }
    }

    /// Re-checks the structural invariants of the variant; the error carries
    /// the offending residual.
    pub fn validate_structure(&self) -> Result<()> {
        let id_out = DMatrix::<Complex64>::identity(self.output_dim(), self.output_dim());
        match self {
            MapSpec::Kraus { operators } => {
                let mut acc = DMatrix::<Complex64>::zeros(self.output_dim(), self.output_dim());
                for k in operators {
                    acc += k.adjoint() * k;
                }
                let residual = spectral_norm(&(acc - &id_out));
                if residual > STRUCTURE_TOL {
                    return Err(Error::InvalidMap(format!(
                        "kraus family is not unital: residual {residual:.3e}"
                    )));
                }
            }
            MapSpec::Pinching { projections } => {
                let dim = self.input_dim();
                let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
                for p in projections {
                    let herm = spectral_norm(&(p - p.adjoint()));
                    if herm > STRUCTURE_TOL {
                        return Err(Error::InvalidMap(format!(
                            "projection is not Hermitian: residual {herm:.3e}"
                        )));
                    }
                    let idem = spectral_norm(&(p * p - p));
                    if idem > STRUCTURE_TOL {
                        return Err(Error::InvalidMap(format!(
                            "projection is not idempotent: residual {idem:.3e}"
                        )));
                    }
                    sum += p;
                }
                let residual = spectral_norm(&(sum - &id_out));
                if residual > STRUCTURE_TOL {
                    return Err(Error::InvalidMap(format!(
                        "projections do not resolve the identity: residual {residual:.3e}"
                    )));
                }
            }
            MapSpec::Compression { isometry } => {
                let residual = spectral_norm(&(isometry.adjoint() * isometry - &id_out));
                if residual > STRUCTURE_TOL {
                    return Err(Error::InvalidMap(format!(
                        "compression is not isometric: residual {residual:.3e}"
                    )));
                }
            }
            MapSpec::NormalizedTrace { .. } => {}
            MapSpec::UnitaryMixture { weights, unitaries } => {
                if weights.iter().any(|&w| !(w > 0.0)) {
                    return Err(Error::InvalidMap("mixture weights must be positive".to_string()));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > STRUCTURE_TOL {
                    return Err(Error::InvalidMap(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
                let dim = self.input_dim();
                let id = DMatrix::<Complex64>::identity(dim, dim);
                for u in unitaries {
                    let residual = spectral_norm(&(u.adjoint() * u - &id));
                    if residual > STRUCTURE_TOL {
                        return Err(Error::InvalidMap(format!(
                            "mixture factor is not unitary: residual {residual:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies the map. The output is re-symmetrized, so rounding noise from
    /// the sandwich products cannot leak out of the Hermitian invariant.
    pub fn apply(&self, a: &HermitianMatrix) -> Result<HermitianMatrix> {
        if a.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: self.input_dim(),
            });
        }
        let out = match self {
            MapSpec::Kraus { operators } => {
                let mut acc = DMatrix::<Complex64>::zeros(self.output_dim(), self.output_dim());
                for k in operators {
                    acc += k.adjoint() * a.matrix() * k;
                }
                acc
            }
            MapSpec::Pinching { projections } => {
                let dim = self.input_dim();
                let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                for p in projections {
                    acc += p * a.matrix() * p;
                }
                acc
            }
            MapSpec::Compression { isometry } => isometry.adjoint() * a.matrix() * isometry,
            MapSpec::NormalizedTrace { dim } => {
                let mean = a.matrix().trace() / (*dim as f64);
                DMatrix::from_element(1, 1, Complex64::new(mean.re, 0.0))
            }
            MapSpec::UnitaryMixture { weights, unitaries } => {
                let dim = self.input_dim();
                let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
                for (w, u) in weights.iter().zip(unitaries) {
                    acc += (u.adjoint() * a.matrix() * u).scale(*w);
                }
                acc
            }
        };
        HermitianMatrix::from_symmetrized(out)
    }

    /// Empirical validation: measures `‖Φ(1) − 1‖` and counts PSD inputs
    /// whose image picks up an eigenvalue below `−(1e-10 + 1e-9·scale)`.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<MapValidationReport> {
        let id_in = HermitianMatrix::identity(self.input_dim());
        let id_out = HermitianMatrix::identity(self.output_dim());
        let image = self.apply(&id_in)?;
        let unitality_residual = image.sub(&id_out)?.operator_norm();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positivity_failures = 0;
        for _ in 0..samples {
            let input = gen::random_psd_with(self.input_dim(), 5.0, &mut rng)?;
            let out = self.apply(&input)?;
            let scale = out.operator_norm().max(1.0);
            if out.min_eigenvalue() < -(crate::DEFAULT_ATOL + crate::DEFAULT_RTOL * scale) {
                positivity_failures += 1;
            }
        }
        Ok(MapValidationReport {
            unitality_residual,
            positivity_failures,
            samples,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map serialization cannot fail")
    }

    /// Deserializes and re-validates the structural invariants.
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: MapSpec = serde_json::from_str(json)
            .map_err(|e| Error::InvalidMap(format!("malformed map JSON: {e}")))?;
        spec.validate_structure()?;
        Ok(spec)
    }
}

/// Random unital Kraus family: Ginibre draws `G_i` whitened by
/// `S^{-1/2}` where `S = Σ G_i* G_i`, giving `K_i = G_i S^{-1/2}` with
/// `Σ K_i* K_i = 1` exactly in exact arithmetic.
///
/// Requires `n_kraus · dim_in ≥ dim_out`, otherwise `S` cannot be invertible
/// and no unital family of that shape exists.
pub fn random_unital_map(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    seed: u64,
) -> Result<MapSpec> {
    if dim_in == 0 || dim_out == 0 {
        return Err(Error::InvalidMap("dimensions must be at least 1".to_string()));
    }
    if n_kraus == 0 {
        return Err(Error::InvalidMap("need at least one Kraus operator".to_string()));
    }
    if n_kraus * dim_in < dim_out {
        return Err(Error::InvalidMap(format!(
            "no unital family with {n_kraus} operators from dim {dim_in} to dim {dim_out}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MAX_ATTEMPTS: u32 = 8;
    for _ in 0..MAX_ATTEMPTS {
        let draws: Vec<DMatrix<Complex64>> =
            (0..n_kraus).map(|_| gen::ginibre(dim_in, dim_out, &mut rng)).collect();
        let mut s = DMatrix::<Complex64>::zeros(dim_out, dim_out);
        for g in &draws {
            s += g.adjoint() * g;
        }
        let s = HermitianMatrix::from_symmetrized(s)?;
        let eigs = s.spectral_decompose();
        // Reject numerically singular accumulators instead of whitening noise.
        if eigs.min() <= 1e-12 * eigs.max().max(1.0) {
            continue;
        }
        let whitener = s.map_eigenvalues(|l| Ok(l.powf(-0.5)))?;
        let operators: Vec<DMatrix<Complex64>> =
            draws.into_iter().map(|g| g * whitener.matrix()).collect();
        return MapSpec::kraus(operators);
    }
    Err(Error::SingularAccumulator {
        attempts: MAX_ATTEMPTS,
    })
}

/// Matrix wire format: rows of `[re, im]` pairs.
mod cmat {
    use super::*;

    pub type Wire = Vec<Vec<[f64; 2]>>;

    pub fn to_wire(m: &DMatrix<Complex64>) -> Wire {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect()
    }

    pub fn from_wire(w: &Wire) -> std::result::Result<DMatrix<Complex64>, String> {
        let rows = w.len();
        if rows == 0 {
            return Err("matrix has no rows".to_string());
        }
        let cols = w[0].len();
        if cols == 0 {
            return Err("matrix has no columns".to_string());
        }
        if w.iter().any(|r| r.len() != cols) {
            return Err("matrix rows have unequal lengths".to_string());
        }
        Ok(DMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(w[i][j][0], w[i][j][1])
        }))
    }

    pub mod single {
        use super::*;
        use serde::{Deserializer, Serializer};

        pub fn serialize<S: Serializer>(
            m: &DMatrix<Complex64>,
            ser: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            serde::Serialize::serialize(&to_wire(m), ser)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            de: D,
        ) -> std::result::Result<DMatrix<Complex64>, D::Error> {
            let wire: Wire = serde::Deserialize::deserialize(de)?;
            from_wire(&wire).map_err(serde::de::Error::custom)
        }
    }

    pub mod list {
        use super::*;
        use serde::{Deserializer, Serializer};

        pub fn serialize<S: Serializer>(
            ms: &[DMatrix<Complex64>],
            ser: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            let wires: Vec<Wire> = ms.iter().map(to_wire).collect();
            serde::Serialize::serialize(&wires, ser)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            de: D,
        ) -> std::result::Result<Vec<DMatrix<Complex64>>, D::Error> {
            let wires: Vec<Wire> = serde::Deserialize::deserialize(de)?;
            wires
                .iter()
                .map(|w| from_wire(w).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}
