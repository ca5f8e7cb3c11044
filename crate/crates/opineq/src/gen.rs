//! Seeded instance generation: banded Hermitian matrices with assigned
//! spectra, Haar-distributed unitaries, structured random maps, and the
//! deterministic edge-case instances every campaign should touch.
//!
//! Determinism contract: an [`InstanceRecipe`] pins everything. The same
//! recipe reproduces bit-identical matrices and maps, independent of how
//! many other instances were generated before it — each consumer derives
//! its own stream via [`mix_seed`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hermitian::{HermitianMatrix, SpectrumBounds};
use crate::maps::{random_unital_map, MapSpec};
use crate::{Error, Result};

/// SplitMix64 finalizer over `seed + (index+1)·golden`: cheap, well-mixed,
/// and stable — replay files depend on these exact values.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Complex Ginibre matrix: i.i.d. entries `(N(0,1) + i·N(0,1))/√2`.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase
/// correction `U = Q · diag(r_ii/|r_ii|)`; plain QR alone is not
/// Haar-distributed.
pub fn random_unitary_with(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            rjj / rjj.norm()
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Seeded variant of [`random_unitary_with`].
pub fn random_unitary(dim: usize, seed: u64) -> DMatrix<Complex64> {
    random_unitary_with(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// How the assigned spectrum is laid out inside the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumStyle {
    /// i.i.d. uniform draws in `[m, M]`.
    UniformInBand,
    /// Eigenvalues at `{m, M}` only, both endpoints always present.
    TwoPoint,
    /// Exact endpoints `m` and `M`, interior uniform.
    EndpointPinned,
    /// Two tight clusters near (but off) the endpoints.
    Clustered,
}

impl SpectrumStyle {
    pub const ALL: [SpectrumStyle; 4] = [
        SpectrumStyle::UniformInBand,
        SpectrumStyle::TwoPoint,
        SpectrumStyle::EndpointPinned,
        SpectrumStyle::Clustered,
    ];
}

impl std::fmt::Display for SpectrumStyle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SpectrumStyle::UniformInBand => "uniform-in-band",
            SpectrumStyle::TwoPoint => "two-point",
            SpectrumStyle::EndpointPinned => "endpoint-pinned",
            SpectrumStyle::Clustered => "clustered",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for SpectrumStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform-in-band" => Ok(SpectrumStyle::UniformInBand),
            "two-point" => Ok(SpectrumStyle::TwoPoint),
            "endpoint-pinned" => Ok(SpectrumStyle::EndpointPinned),
            "clustered" => Ok(SpectrumStyle::Clustered),
            other => Err(Error::InvalidRecipe(format!("unknown spectrum style {other:?}"))),
        }
    }
}

/// Which family of normalized positive maps to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapStyle {
    /// Normalized trace into a 1×1 output.
    Trace,
    /// Block pinching with a random partition.
    Pinching,
    /// Compression onto a random subspace of smaller dimension.
    Compression,
    /// Random unital Kraus family with this many operators.
    Kraus(usize),
    /// Convex mixture of this many unitary conjugations.
    UnitaryMixture(usize),
}

impl std::fmt::Display for MapStyle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MapStyle::Trace => f.write_str("trace"),
            MapStyle::Pinching => f.write_str("pinching"),
            MapStyle::Compression => f.write_str("compression"),
            MapStyle::Kraus(n) => write!(f, "kraus({n})"),
            MapStyle::UnitaryMixture(k) => write!(f, "unitary_mixture({k})"),
        }
    }
}

impl std::str::FromStr for MapStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "trace" => return Ok(MapStyle::Trace),
            "pinching" => return Ok(MapStyle::Pinching),
            "compression" => return Ok(MapStyle::Compression),
            _ => {}
        }
        let parse_count = |inner: &str| -> Result<usize> {
            inner
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::InvalidRecipe(format!("bad count in map style {s:?}")))
        };
        if let Some(inner) = s.strip_prefix("kraus(").and_then(|r| r.strip_suffix(')')) {
            return Ok(MapStyle::Kraus(parse_count(inner)?));
        }
        if let Some(inner) = s
            .strip_prefix("unitary_mixture(")
            .and_then(|r| r.strip_suffix(')'))
        {
            return Ok(MapStyle::UnitaryMixture(parse_count(inner)?));
        }
        Err(Error::InvalidRecipe(format!("unknown map style {s:?}")))
    }
}

impl Serialize for MapStyle {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MapStyle {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything needed to reproduce one instance exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecipe {
    pub dim: usize,
    pub bounds: SpectrumBounds,
    pub spectrum_style: SpectrumStyle,
    pub map_style: MapStyle,
    pub seed: u64,
}

/// A realized recipe: the matrix, its map, and the spectrum that was
/// assigned before conjugation (the matrix's exact eigenvalues up to
/// eigensolver roundoff).
#[derive(Debug, Clone)]
pub struct Instance {
    pub matrix: HermitianMatrix,
    pub map: MapSpec,
    pub spectrum: Vec<f64>,
    pub recipe: InstanceRecipe,
}

impl Instance {
    /// Bracket from the exactly-assigned extremes; errors when the assigned
    /// spectrum is degenerate (all eigenvalues equal, e.g. `dim = 1`).
    pub fn tight_bounds(&self) -> Result<SpectrumBounds> {
        let lo = self.spectrum[0];
        let hi = *self.spectrum.last().expect("dim >= 1");
        SpectrumBounds::new(lo, hi).map_err(|_| {
            Error::InvalidRecipe(format!(
                "assigned spectrum [{lo}, {hi}] is degenerate; no tight bracket exists"
            ))
        })
    }
}

fn validate_recipe(recipe: &InstanceRecipe) -> Result<()> {
    if recipe.dim == 0 {
        return Err(Error::InvalidRecipe("dimension must be at least 1".to_string()));
    }
    match recipe.map_style {
        MapStyle::Kraus(0) => Err(Error::InvalidRecipe("kraus(0) has no operators".to_string())),
        MapStyle::UnitaryMixture(0) => {
            Err(Error::InvalidRecipe("unitary_mixture(0) has no terms".to_string()))
        }
        _ => Ok(()),
    }
}

fn sample_spectrum(recipe: &InstanceRecipe, rng: &mut impl Rng) -> Vec<f64> {
    let dim = recipe.dim;
    let (m, upper) = recipe.bounds.pair();
    let width = upper - m;
    let mut values: Vec<f64> = match recipe.spectrum_style {
        SpectrumStyle::UniformInBand => (0..dim).map(|_| rng.random_range(m..=upper)).collect(),
        SpectrumStyle::TwoPoint => (0..dim)
            .map(|i| {
                if i == 0 {
                    m
                } else if i == 1 {
                    upper
                } else if rng.random::<bool>() {
                    upper
                } else {
                    m
                }
            })
            .collect(),
        SpectrumStyle::EndpointPinned => (0..dim)
            .map(|i| {
                if i == 0 {
                    m
                } else if i == 1 {
                    upper
                } else {
                    rng.random_range(m..=upper)
                }
            })
            .collect(),
        SpectrumStyle::Clustered => {
            let centers = [m + 0.1 * width, upper - 0.1 * width];
            (0..dim)
                .map(|_| {
                    let c = centers[usize::from(rng.random::<bool>())];
                    let noise: f64 = rng.sample(StandardNormal);
                    (c + 0.02 * width * noise).clamp(m, upper)
                })
                .collect()
        }
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Hermitian matrix with the recipe's assigned spectrum, conjugated by a
/// Haar unitary derived from the recipe seed.
pub fn random_hermitian_in_band(recipe: &InstanceRecipe) -> Result<HermitianMatrix> {
    Ok(instantiate_matrix(recipe)?.1)
}

fn instantiate_matrix(recipe: &InstanceRecipe) -> Result<(Vec<f64>, HermitianMatrix)> {
    validate_recipe(recipe)?;
    let mut spec_rng = ChaCha8Rng::seed_from_u64(mix_seed(recipe.seed, 1));
    let spectrum = sample_spectrum(recipe, &mut spec_rng);
    let mut unitary_rng = ChaCha8Rng::seed_from_u64(mix_seed(recipe.seed, 2));
    let u = random_unitary_with(recipe.dim, &mut unitary_rng);
    let matrix = conjugate_spectrum(&spectrum, &u)?;
    Ok((spectrum, matrix))
}

/// `U diag(spectrum) U*` as a [`HermitianMatrix`].
pub fn conjugate_spectrum(spectrum: &[f64], u: &DMatrix<Complex64>) -> Result<HermitianMatrix> {
    let diag = HermitianMatrix::from_diagonal(spectrum);
    HermitianMatrix::from_symmetrized(u * diag.matrix() * u.adjoint())
}

/// Map for the recipe's map style, drawn from streams derived from the
/// recipe seed.
pub fn build_map(recipe: &InstanceRecipe) -> Result<MapSpec> {
    validate_recipe(recipe)?;
    let dim = recipe.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(recipe.seed, 3));
    match recipe.map_style {
        MapStyle::Trace => MapSpec::normalized_trace(dim),
        MapStyle::Pinching => {
            let sizes = random_partition(dim, &mut rng);
            MapSpec::block_pinching(dim, &sizes)
        }
        MapStyle::Compression => {
            let out = if dim == 1 { 1 } else { rng.random_range(1..dim) };
            let u = random_unitary_with(dim, &mut rng);
            MapSpec::compression(u.columns(0, out).into_owned())
        }
        MapStyle::Kraus(n) => random_unital_map(dim, dim, n, mix_seed(recipe.seed, 4)),
        MapStyle::UnitaryMixture(k) => {
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let terms: Vec<(f64, DMatrix<Complex64>)> = raw
                .into_iter()
                .map(|w| (w / total, random_unitary_with(dim, &mut rng)))
                .collect();
            MapSpec::unitary_mixture(terms)
        }
    }
}

/// Random partition of `dim` into 2..=4 nonempty blocks (1 block for `dim = 1`).
fn random_partition(dim: usize, rng: &mut impl Rng) -> Vec<usize> {
    if dim == 1 {
        return vec![1];
    }
    let k = rng.random_range(2..=dim.min(4));
    let cuts = rand::seq::index::sample(rng, dim - 1, k - 1);
    let mut cuts: Vec<usize> = cuts.iter().map(|c| c + 1).collect();
    cuts.sort_unstable();
    cuts.push(dim);
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// Realizes a recipe into matrix + map + assigned spectrum.
pub fn instantiate(recipe: &InstanceRecipe) -> Result<Instance> {
    let (spectrum, matrix) = instantiate_matrix(recipe)?;
    let map = build_map(recipe)?;
    Ok(Instance {
        matrix,
        map,
        spectrum,
        recipe: recipe.clone(),
    })
}

/// Positive definite matrix with spectrum uniform in `[lo, hi]`, `lo > 0`.
pub fn random_pd_with(dim: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Result<HermitianMatrix> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidBounds { m: lo, upper: hi });
    }
    let mut spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(lo..=hi)).collect();
    spectrum.sort_by(f64::total_cmp);
    let u = random_unitary_with(dim, rng);
    conjugate_spectrum(&spectrum, &u)
}

/// Positive semidefinite matrix with spectrum uniform in `[0, hi]`; half the
/// time the smallest eigenvalue is pinned to exactly 0 so rank deficiency is
/// exercised.
pub fn random_psd_with(dim: usize, hi: f64, rng: &mut impl Rng) -> Result<HermitianMatrix> {
    if !(hi > 0.0) {
        return Err(Error::InvalidBounds { m: 0.0, upper: hi });
    }
    let mut spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..=hi)).collect();
    if rng.random::<bool>() {
        spectrum[0] = 0.0;
    }
    spectrum.sort_by(f64::total_cmp);
    let u = random_unitary_with(dim, rng);
    conjugate_spectrum(&spectrum, &u)
}

/// A deterministic stress instance with the bracket it should be checked
/// against.
#[derive(Debug, Clone)]
pub struct EdgeInstance {
    pub label: String,
    pub matrix: HermitianMatrix,
    pub map: MapSpec,
    pub bounds: SpectrumBounds,
}

const EDGE_SEED: u64 = 0xED6E;

/// Deterministic edge cases: exact two-point spectrum under the trace,
/// spectrum hugging the lower band edge under a compression, a condition-1e4
/// band under a Kraus family, and a nearly degenerate band.
pub fn edge_instances(bounds: &SpectrumBounds, dim: usize) -> Result<Vec<EdgeInstance>> {
    if dim < 2 {
        return Err(Error::InvalidRecipe(
            "edge instances need dim >= 2 so both band endpoints can be hit".to_string(),
        ));
    }
    let (m, upper) = bounds.pair();
    let mut out = Vec::new();

    let two_point = instantiate(&InstanceRecipe {
        dim,
        bounds: *bounds,
        spectrum_style: SpectrumStyle::TwoPoint,
        map_style: MapStyle::Trace,
        seed: mix_seed(EDGE_SEED, 1),
    })?;
    out.push(EdgeInstance {
        label: "two-point-trace".to_string(),
        matrix: two_point.matrix,
        map: two_point.map,
        bounds: *bounds,
    });

    // Spectrum within 1e-6·width of m, still bracketed by the full band.
    let eps = 1e-6 * bounds.width();
    let lower_edge = instantiate(&InstanceRecipe {
        dim,
        bounds: SpectrumBounds::new(m, m + eps)?,
        spectrum_style: SpectrumStyle::UniformInBand,
        map_style: MapStyle::Compression,
        seed: mix_seed(EDGE_SEED, 2),
    })?;
    out.push(EdgeInstance {
        label: "near-lower-edge-compression".to_string(),
        matrix: lower_edge.matrix,
        map: lower_edge.map,
        bounds: *bounds,
    });

    let harsh = SpectrumBounds::new(m, m * 1e4)?;
    let high_condition = instantiate(&InstanceRecipe {
        dim,
        bounds: harsh,
        spectrum_style: SpectrumStyle::EndpointPinned,
        map_style: MapStyle::Kraus(3),
        seed: mix_seed(EDGE_SEED, 3),
    })?;
    out.push(EdgeInstance {
        label: "high-condition-kraus".to_string(),
        matrix: high_condition.matrix,
        map: high_condition.map,
        bounds: harsh,
    });

    let sliver = SpectrumBounds::new(upper, upper + 1e-6 * upper.max(1.0))?;
    let near_degenerate = instantiate(&InstanceRecipe {
        dim,
        bounds: sliver,
        spectrum_style: SpectrumStyle::EndpointPinned,
        map_style: MapStyle::Trace,
        seed: mix_seed(EDGE_SEED, 4),
    })?;
    out.push(EdgeInstance {
        label: "near-degenerate-band".to_string(),
        matrix: near_degenerate.matrix,
        map: near_degenerate.map,
        bounds: sliver,
    });

    Ok(out)
}
