//! Checkers for the inequality chains. Each checker evaluates every link of
//! its chain on one concrete instance and returns a [`ChainReport`]: the
//! links in order with signed spectral gaps, a digest of the instance, and
//! an overall verdict.
//!
//! Shared conventions:
//!
//! * an operator link `X ≤ Y` is measured by `gap = λ_min(Y − X)`; a norm
//!   link `x ≤ y` by `gap = y − x`;
//! * a link holds when `gap ≥ −(atol + rtol·scale)` with
//!   `scale = max(1, ‖X‖, ‖Y‖)`;
//! * banded checkers first verify `m·1 ≤ A ≤ M·1` (up to eigensolver slack)
//!   and that the matrix fits the map's input space — a violated
//!   precondition is an error, never a "failed" chain.

use serde::{Deserialize, Serialize};

use crate::hermitian::{
    chord_operator, loewner_leq, spectral_norm, HermitianMatrix, SpectrumBounds,
};
use crate::maps::MapSpec;
use crate::scalar::{
    classical_kantorovich, kantorovich_constant, linear_chord, mu_constant,
    squared_chain_constant, ScalarFunction,
};
use crate::{Error, Result, DEFAULT_ATOL, DEFAULT_RTOL};

/// Exponent magnitudes beyond this exhaust f64 dynamic range on harsh bands.
const MAX_EXPONENT: f64 = 16.0;
/// Half-width of the undecidable band of the norm criterion, relative to √α.
const NORM_CRITERION_BAND: f64 = 1e-8;

/// Tolerance policy for link verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        }
    }
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }

    /// Allowed negative excursion of a gap at the given scale.
    pub fn margin(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale.max(1.0)
    }
}

/// One inequality link of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub lhs: String,
    pub rhs: String,
    /// `λ_min(rhs − lhs)` for operator links, `rhs − lhs` for norm links.
    pub gap: f64,
    pub holds: bool,
    /// Set only by the norm criterion when the instance sits inside the
    /// undecidable band around the threshold.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inconclusive: bool,
}

/// Identifying digest of the checked instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDigest {
    /// Generation seed; 0 when the instance was supplied directly rather
    /// than generated from a recipe.
    #[serde(default)]
    pub seed: u64,
    pub dim: usize,
    /// Band endpoints; for checks that take no band these are the actual
    /// spectrum extremes of the inputs.
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    /// Map family tag, or `"none"` for pair checks without a map.
    pub map_variant: String,
    /// Parameter slot: exponent for power chains, α for the norm criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
}

/// Full result of checking one chain on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub name: String,
    pub links: Vec<Link>,
    pub instance: InstanceDigest,
    pub all_hold: bool,
}

impl ChainReport {
    pub fn min_gap(&self) -> f64 {
        self.links.iter().map(|l| l.gap).fold(f64::INFINITY, f64::min)
    }

    pub fn inconclusive(&self) -> bool {
        self.links.iter().any(|l| l.inconclusive)
    }

    fn new(name: &str, links: Vec<Link>, instance: InstanceDigest) -> Self {
        let all_hold = links.iter().all(|l| l.holds);
        Self {
            name: name.to_string(),
            links,
            instance,
            all_hold,
        }
    }
}

fn operator_link(
    lhs_label: &str,
    lhs: &HermitianMatrix,
    rhs_label: &str,
    rhs: &HermitianMatrix,
    tol: Tolerance,
) -> Result<Link> {
    let v = loewner_leq(lhs, rhs, tol.rtol, tol.atol)?;
    Ok(Link {
        lhs: lhs_label.to_string(),
        rhs: rhs_label.to_string(),
        gap: v.gap,
        holds: v.holds,
        inconclusive: false,
    })
}

fn norm_link(lhs_label: &str, lhs: f64, rhs_label: &str, rhs: f64, tol: Tolerance) -> Link {
    let scale = lhs.abs().max(rhs.abs());
    let gap = rhs - lhs;
    Link {
        lhs: lhs_label.to_string(),
        rhs: rhs_label.to_string(),
        gap,
        holds: gap >= -tol.margin(scale),
        inconclusive: false,
    }
}

/// Shared precondition of the banded chains.
fn prepare_banded(a: &HermitianMatrix, phi: &MapSpec, bounds: &SpectrumBounds) -> Result<()> {
    if a.dim() != phi.input_dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: phi.input_dim(),
        });
    }
    let decomp = a.spectral_decompose();
    bounds.brackets(decomp.eigenvalues())
}

fn banded_digest(a: &HermitianMatrix, phi: &MapSpec, bounds: &SpectrumBounds) -> InstanceDigest {
    InstanceDigest {
        seed: 0,
        dim: a.dim(),
        m: bounds.m(),
        upper: bounds.upper(),
        map_variant: phi.variant_name(),
        p: None,
        f: None,
    }
}

fn pair_digest(a: &HermitianMatrix, b: &HermitianMatrix) -> InstanceDigest {
    InstanceDigest {
        seed: 0,
        dim: a.dim(),
        m: a.min_eigenvalue().min(b.min_eigenvalue()),
        upper: a.max_eigenvalue().max(b.max_eigenvalue()),
        map_variant: "none".to_string(),
        p: None,
        f: None,
    }
}

fn psd_guard(x: &HermitianMatrix, tol: Tolerance) -> Result<()> {
    let min = x.min_eigenvalue();
    if min < -tol.margin(x.operator_norm()) {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

/// `X^r` for PSD `X`, clamping rounding-level negative eigenvalues to zero
/// so fractional powers stay real.
fn psd_power(x: &HermitianMatrix, r: f64) -> Result<HermitianMatrix> {
    x.map_eigenvalues(|l| Ok(l.max(0.0).powf(r)))
}

/// Classical ratio bound: `Φ(A^{-1}) ≤ K(m,M,−1) · Φ(A)^{-1}` with
/// `K(m,M,−1) = (M+m)²/(4mM)`.
pub fn check_kantorovich(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    tol: Tolerance,
) -> Result<ChainReport> {
    prepare_banded(a, phi, bounds)?;
    let inv = ScalarFunction::inverse();
    let lhs = phi.apply(&a.apply_function(&inv)?)?;
    let rhs = phi
        .apply(a)?
        .apply_function(&inv)?
        .scale(classical_kantorovich(bounds));
    let link = operator_link("Phi(A^-1)", &lhs, "K(m,M,-1)*Phi(A)^-1", &rhs, tol)?;
    Ok(ChainReport::new(
        "kantorovich",
        vec![link],
        banded_digest(a, phi, bounds),
    ))
}

/// Refined ratio bound with the geodesic chord as middle term:
/// `Φ(A^{-1}) ≤ Φ(G) ≤ K(m,M,−1) · Φ(A)^{-1}` where `G` is the chord
/// operator of `1/t` over the band.
pub fn check_refined_kantorovich(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    tol: Tolerance,
) -> Result<ChainReport> {
    prepare_banded(a, phi, bounds)?;
    let inv = ScalarFunction::inverse();
    let lhs = phi.apply(&a.apply_function(&inv)?)?;
    let mid = phi.apply(&chord_operator(a, bounds, &inv)?)?;
    let rhs = phi
        .apply(a)?
        .apply_function(&inv)?
        .scale(classical_kantorovich(bounds));
    let links = vec![
        operator_link("Phi(A^-1)", &lhs, "Phi(chord_inv)", &mid, tol)?,
        operator_link("Phi(chord_inv)", &mid, "K(m,M,-1)*Phi(A)^-1", &rhs, tol)?,
    ];
    Ok(ChainReport::new(
        "refined-kantorovich",
        links,
        banded_digest(a, phi, bounds),
    ))
}

/// Chain for log-convex `f`:
/// `Φ(f(A)) ≤ Φ(G_f) ≤ μ(m,M,f) · f(Φ(A))`, plus the diagnostic third link
/// `Φ(G_f) ≤ Φ(L_f(A))` against the linear chord, which localizes a failure
/// to the scalar or the operator half of the argument.
pub fn check_logconvex_refinement(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    f: &ScalarFunction,
    tol: Tolerance,
) -> Result<ChainReport> {
    if !f.properties().log_convex {
        return Err(Error::MissingFunctionProperty {
            function: f.id().to_string(),
            property: "log-convex",
        });
    }
    prepare_banded(a, phi, bounds)?;
    let (m, upper) = bounds.pair();
    let mu = mu_constant(bounds, f)?;

    let fa = phi.apply(&a.apply_function(f)?)?;
    let chord = phi.apply(&chord_operator(a, bounds, f)?)?;
    let f_of_phi = phi.apply(a)?.map_eigenvalues(|l| f.evaluate(l.clamp(m, upper)))?;
    let linear = phi.apply(&a.map_eigenvalues(|l| linear_chord(l.clamp(m, upper), bounds, f))?)?;

    let links = vec![
        operator_link("Phi(f(A))", &fa, "Phi(chord_f)", &chord, tol)?,
        operator_link("Phi(chord_f)", &chord, "mu(m,M,f)*f(Phi(A))", &f_of_phi.scale(mu), tol)?,
        operator_link("Phi(chord_f)", &chord, "Phi(linear_f(A))", &linear, tol)?,
    ];
    let mut digest = banded_digest(a, phi, bounds);
    digest.f = Some(f.id().to_string());
    Ok(ChainReport::new("logconvex-refinement", links, digest))
}

/// Negative-power chain:
/// `Φ(A^p) ≤ Φ(G_p) ≤ K(m,M,p) · Φ(A)^p` for `p < 0`.
pub fn check_power_refinement(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    p: f64,
    tol: Tolerance,
) -> Result<ChainReport> {
    if !(p < 0.0) {
        return Err(Error::InvalidExponent {
            p,
            reason: "power chain needs p < 0".to_string(),
        });
    }
    if p.abs() > MAX_EXPONENT {
        return Err(Error::InvalidExponent {
            p,
            reason: format!("|p| capped at {MAX_EXPONENT} to stay inside f64 range"),
        });
    }
    prepare_banded(a, phi, bounds)?;
    let f = ScalarFunction::power(p);
    let k = kantorovich_constant(bounds, p)?;

    let lhs = phi.apply(&a.apply_function(&f)?)?;
    let mid = phi.apply(&chord_operator(a, bounds, &f)?)?;
    let rhs = phi.apply(a)?.apply_function(&f)?.scale(k);
    let links = vec![
        operator_link("Phi(A^p)", &lhs, "Phi(chord_p)", &mid, tol)?,
        operator_link("Phi(chord_p)", &mid, "K(m,M,p)*Phi(A)^p", &rhs, tol)?,
    ];
    let mut digest = banded_digest(a, phi, bounds);
    digest.p = Some(p);
    Ok(ChainReport::new("power-refinement", links, digest))
}

/// Jensen-type inequality for operator convex `f`:
/// `f(Φ(A)) ≤ Φ(f(A))`.
pub fn check_cdj(
    a: &HermitianMatrix,
    phi: &MapSpec,
    f: &ScalarFunction,
    tol: Tolerance,
) -> Result<ChainReport> {
    if !f.properties().operator_convex {
        return Err(Error::MissingFunctionProperty {
            function: f.id().to_string(),
            property: "operator-convex",
        });
    }
    if a.dim() != phi.input_dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: phi.input_dim(),
        });
    }
    let lhs = phi.apply(a)?.apply_function(f)?;
    let rhs = phi.apply(&a.apply_function(f)?)?;
    let link = operator_link("f(Phi(A))", &lhs, "Phi(f(A))", &rhs, tol)?;
    let decomp = a.spectral_decompose();
    let digest = InstanceDigest {
        seed: 0,
        dim: a.dim(),
        m: decomp.min(),
        upper: decomp.max(),
        map_variant: phi.variant_name(),
        p: None,
        f: Some(f.id().to_string()),
    };
    Ok(ChainReport::new("choi-davis-jensen", vec![link], digest))
}

/// Two-sided ratio bound for positive convex `f`:
/// `(1/μ)·Φ(f(A)) ≤ f(Φ(A)) ≤ μ·Φ(f(A))` with `μ = μ(m,M,f)`.
pub fn check_mu_bound(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    f: &ScalarFunction,
    tol: Tolerance,
) -> Result<ChainReport> {
    if !f.properties().convex {
        return Err(Error::MissingFunctionProperty {
            function: f.id().to_string(),
            property: "convex",
        });
    }
    if !f.positive_on(bounds) {
        let (m, upper) = bounds.pair();
        let (fm, fu) = (f.evaluate(m)?, f.evaluate(upper)?);
        let (t, value) = if fm <= fu { (m, fm) } else { (upper, fu) };
        return Err(Error::NonPositiveValue {
            function: f.id().to_string(),
            t,
            value,
        });
    }
    prepare_banded(a, phi, bounds)?;
    let (m, upper) = bounds.pair();
    let mu = mu_constant(bounds, f)?;
    let pf = phi.apply(&a.apply_function(f)?)?;
    let fp = phi.apply(a)?.map_eigenvalues(|l| f.evaluate(l.clamp(m, upper)))?;
    let links = vec![
        operator_link("Phi(f(A))/mu", &pf.scale(1.0 / mu), "f(Phi(A))", &fp, tol)?,
        operator_link("f(Phi(A))", &fp, "mu*Phi(f(A))", &pf.scale(mu), tol)?,
    ];
    let mut digest = banded_digest(a, phi, bounds);
    digest.f = Some(f.id().to_string());
    Ok(ChainReport::new("mu-bound", links, digest))
}

/// Norm product bound for PSD pairs: `‖AB‖ ≤ ¼‖A+B‖²`.
pub fn check_bhatia_kittaneh(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: Tolerance,
) -> Result<ChainReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    psd_guard(a, tol)?;
    psd_guard(b, tol)?;
    // A·B is not Hermitian, so this genuinely needs the singular-value norm.
    let lhs = spectral_norm(&(a.matrix() * b.matrix()));
    let rhs = 0.25 * a.add(b)?.operator_norm().powi(2);
    let link = norm_link("||A*B||", lhs, "0.25*||A+B||^2", rhs, tol);
    Ok(ChainReport::new(
        "bhatia-kittaneh",
        vec![link],
        pair_digest(a, b),
    ))
}

/// Power-sum norm bound for PSD pairs and `r ≥ 1`:
/// `‖A^r + B^r‖ ≤ ‖(A+B)^r‖`.
pub fn check_ando(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    r: f64,
    tol: Tolerance,
) -> Result<ChainReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if !(r >= 1.0) || r > MAX_EXPONENT {
        return Err(Error::InvalidExponent {
            p: r,
            reason: format!("power-sum bound needs 1 <= r <= {MAX_EXPONENT}"),
        });
    }
    psd_guard(a, tol)?;
    psd_guard(b, tol)?;
    let lhs = psd_power(a, r)?.add(&psd_power(b, r)?)?.operator_norm();
    let rhs = psd_power(&a.add(b)?, r)?.operator_norm();
    let link = norm_link("||A^r+B^r||", lhs, "||(A+B)^r||", rhs, tol);
    let mut digest = pair_digest(a, b);
    digest.p = Some(r);
    Ok(ChainReport::new("ando", vec![link], digest))
}

/// Chord-sum bound: `Φ(A) + mM·Φ(G) ≤ (M+m)·1` with `G` the chord operator
/// of `1/t` over the band.
pub fn check_chord_sum(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    tol: Tolerance,
) -> Result<ChainReport> {
    prepare_banded(a, phi, bounds)?;
    let (m, upper) = bounds.pair();
    let chord = chord_operator(a, bounds, &ScalarFunction::inverse())?;
    let lhs = phi.apply(a)?.add(&phi.apply(&chord)?.scale(m * upper))?;
    let rhs = HermitianMatrix::identity(phi.output_dim()).scale(m + upper);
    let link = operator_link("Phi(A)+m*M*Phi(chord_inv)", &lhs, "(M+m)*1", &rhs, tol)?;
    Ok(ChainReport::new(
        "chord-sum",
        vec![link],
        banded_digest(a, phi, bounds),
    ))
}

/// Equivalence of the order predicate and the norm predicate:
/// `A ≤ α·B  ⟺  ‖A^{1/2} B^{-1/2}‖ ≤ √α` for PSD `A`, PD `B`.
///
/// Both predicates are evaluated; `holds` records their agreement, `gap` the
/// signed norm slack `√α − ‖A^{1/2}B^{-1/2}‖`. Instances with
/// `|‖·‖ − √α| ≤ 1e-8·√α` are flagged inconclusive rather than judged.
pub fn check_norm_criterion(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    alpha: f64,
    tol: Tolerance,
) -> Result<ChainReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "must be a positive real".to_string(),
        });
    }
    psd_guard(a, tol)?;
    let b_min = b.min_eigenvalue();
    if b_min <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: b_min,
        });
    }

    let order_holds = loewner_leq(a, &b.scale(alpha), tol.rtol, tol.atol)?.holds;
    let a_sqrt = psd_power(a, 0.5)?;
    let b_inv_sqrt = b.map_eigenvalues(|l| Ok(l.powf(-0.5)))?;
    let norm = spectral_norm(&(a_sqrt.matrix() * b_inv_sqrt.matrix()));
    let threshold = alpha.sqrt();
    let norm_holds = norm <= threshold;
    let inconclusive = (norm - threshold).abs() <= NORM_CRITERION_BAND * threshold;

    let link = Link {
        lhs: "A <= alpha*B".to_string(),
        rhs: "||A^1/2*B^-1/2|| <= sqrt(alpha)".to_string(),
        gap: threshold - norm,
        holds: inconclusive || order_holds == norm_holds,
        inconclusive,
    };
    let mut digest = pair_digest(a, b);
    digest.p = Some(alpha);
    Ok(ChainReport::new("norm-criterion", vec![link], digest))
}

/// Squared chord bound for `p ≥ 2`:
/// `Φ(G)^p ≤ ((M+m)²/(4^{2/p} mM))^p · Φ(A)^{-p}` with `G` the chord
/// operator of `1/t`.
pub fn check_squared(
    a: &HermitianMatrix,
    phi: &MapSpec,
    bounds: &SpectrumBounds,
    p: f64,
    tol: Tolerance,
) -> Result<ChainReport> {
    if !(p >= 2.0) || p > MAX_EXPONENT {
        return Err(Error::InvalidExponent {
            p,
            reason: format!("squared chain needs 2 <= p <= {MAX_EXPONENT}"),
        });
    }
    prepare_banded(a, phi, bounds)?;
    let chord = phi.apply(&chord_operator(a, bounds, &ScalarFunction::inverse())?)?;
    let c = squared_chain_constant(bounds, p)?;
    let lhs = chord.apply_function(&ScalarFunction::power(p))?;
    let rhs = phi
        .apply(a)?
        .apply_function(&ScalarFunction::power(-p))?
        .scale(c);
    let link = operator_link("Phi(chord_inv)^p", &lhs, "C(m,M,p)*Phi(A)^-p", &rhs, tol)?;
    let mut digest = banded_digest(a, phi, bounds);
    digest.p = Some(p);
    Ok(ChainReport::new("squared-chain", vec![link], digest))
}
