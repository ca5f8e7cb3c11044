//! Scalar groundwork for the operator inequalities: the function registry,
//! linear and geometric (log-scale) chords over a band `[m, M]`, sampled
//! convexity classification, and the two optimal constants
//!
//! * `μ(m, M, f) = max_{t ∈ [m, M]} L(t)/f(t)` with `L` the linear chord,
//! * `K(m, M, p)`, the power-function constant with
//!   `K(m, M, −1) = (M+m)²/(4mM)`.
//!
//! Everything an operator checker compares against is computed here first
//! in plain `f64` arithmetic, so the matrix layer can be tested against
//! scalar ground truth.

use serde::{Deserialize, Serialize};

use crate::hermitian::SpectrumBounds;
use crate::{Error, Result};

/// Grid resolution used before golden-section refinement in [`mu_constant`].
const MU_GRID_POINTS: usize = 2049;
/// Interval width at which golden-section refinement stops.
const GOLDEN_WIDTH_TOL: f64 = 1e-10;
/// Exponents this close to 0 or 1 are rejected by [`kantorovich_constant`].
const EXPONENT_EXCLUSION: f64 = 1e-8;

/// A member of the scalar function registry.
///
/// The registry is deliberately small — reciprocal, real powers, decaying
/// exponential, affine — because those are the shapes the inequality chains
/// quantify over; each carries its convexity pedigree as data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunction {
    id: String,
    kind: FunctionKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FunctionKind {
    /// `t ↦ 1/t` on `(0, ∞)`.
    Inverse,
    /// `t ↦ t^p`; domain depends on `p` (see [`ScalarFunction::domain_contains`]).
    Power(f64),
    /// `t ↦ exp(−t)` on `ℝ`.
    ExpNeg,
    /// `t ↦ a·t + b` on `ℝ`.
    Affine { slope: f64, intercept: f64 },
}

/// Analytic convexity flags of a registry function (on its domain).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionProperties {
    pub log_convex: bool,
    pub convex: bool,
    pub operator_convex: bool,
}

impl ScalarFunction {
    pub fn inverse() -> Self {
        Self {
            id: "inv".to_string(),
            kind: FunctionKind::Inverse,
        }
    }

    pub fn power(p: f64) -> Self {
        Self {
            id: format!("pow({p})"),
            kind: FunctionKind::Power(p),
        }
    }

    pub fn exp_neg() -> Self {
        Self {
            id: "exp-neg".to_string(),
            kind: FunctionKind::ExpNeg,
        }
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        Self {
            id: format!("affine({slope},{intercept})"),
            kind: FunctionKind::Affine { slope, intercept },
        }
    }

    /// Parses `"inv"`, `"pow(p)"`, `"exp-neg"`, or `"affine(a,b)"`.
    pub fn parse(input: &str) -> Result<Self> {
        let s = input.trim();
        let unknown = || Error::UnknownFunction {
            input: input.to_string(),
        };
        match s {
            "inv" => return Ok(Self::inverse()),
            "exp-neg" => return Ok(Self::exp_neg()),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("pow(").and_then(|r| r.strip_suffix(')')) {
            let p: f64 = arg.trim().parse().map_err(|_| unknown())?;
            if !p.is_finite() {
                return Err(unknown());
            }
            return Ok(Self::power(p));
        }
        if let Some(args) = s.strip_prefix("affine(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 2 {
                return Err(unknown());
            }
            let a: f64 = parts[0].trim().parse().map_err(|_| unknown())?;
            let b: f64 = parts[1].trim().parse().map_err(|_| unknown())?;
            if !(a.is_finite() && b.is_finite()) {
                return Err(unknown());
            }
            return Ok(Self::affine(a, b));
        }
        Err(unknown())
    }

    /// Stable identifier, also used in reports (`"inv"`, `"pow(-2)"`, …).
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn domain_contains(&self, t: f64) -> bool {
        if !t.is_finite() {
            return false;
        }
        match self.kind {
            FunctionKind::Inverse => t > 0.0,
            FunctionKind::Power(p) => {
                if p < 0.0 {
                    t > 0.0
                } else if is_integral(p) {
                    true
                } else {
                    t >= 0.0
                }
            }
            FunctionKind::ExpNeg | FunctionKind::Affine { .. } => true,
        }
    }

    pub fn domain_description(&self) -> &'static str {
        match self.kind {
            FunctionKind::Inverse => "(0, inf)",
            FunctionKind::Power(p) => {
                if p < 0.0 {
                    "(0, inf)"
                } else if is_integral(p) {
                    "all reals"
                } else {
                    "[0, inf)"
                }
            }
            FunctionKind::ExpNeg | FunctionKind::Affine { .. } => "all reals",
        }
    }

    /// Evaluates `f(t)`, rejecting arguments outside the domain and any
    /// non-finite result.
    ///
    /// Integral powers go through `powi`, so `pow(-1)` agrees bit-for-bit
    /// with `inv` and `pow(2)` with plain squaring.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !self.domain_contains(t) {
            return Err(Error::EigenvalueOutsideDomain {
                eigenvalue: t,
                function: self.id.clone(),
            });
        }
        let v = match self.kind {
            FunctionKind::Inverse => 1.0 / t,
            FunctionKind::Power(p) => {
                if is_integral(p) {
                    t.powi(p as i32)
                } else {
                    t.powf(p)
                }
            }
            FunctionKind::ExpNeg => (-t).exp(),
            FunctionKind::Affine { slope, intercept } => slope * t + intercept,
        };
        if !v.is_finite() {
            return Err(Error::NonFiniteValue {
                function: self.id.clone(),
                t,
            });
        }
        Ok(v)
    }

    pub fn properties(&self) -> FunctionProperties {
        match self.kind {
            FunctionKind::Inverse => FunctionProperties {
                log_convex: true,
                convex: true,
                operator_convex: true,
            },
            FunctionKind::Power(p) => FunctionProperties {
                log_convex: p <= 0.0,
                convex: p <= 0.0 || p >= 1.0,
                operator_convex: (-1.0..=0.0).contains(&p) || (1.0..=2.0).contains(&p),
            },
            FunctionKind::ExpNeg => FunctionProperties {
                log_convex: true,
                convex: true,
                operator_convex: false,
            },
            FunctionKind::Affine { slope, intercept } => FunctionProperties {
                // log-convex only in the degenerate constant-positive case;
                // otherwise log of an affine function is strictly concave.
                log_convex: slope == 0.0 && intercept > 0.0,
                convex: true,
                operator_convex: true,
            },
        }
    }

    /// Whether `f > 0` everywhere on the band. Exact for the registry:
    /// every member is monotone there, so the endpoints decide.
    pub fn positive_on(&self, bounds: &SpectrumBounds) -> bool {
        match self.kind {
            FunctionKind::Inverse | FunctionKind::ExpNeg => true,
            FunctionKind::Power(_) => true, // t > 0 on the band
            FunctionKind::Affine { slope, intercept } => {
                let (m, upper) = bounds.pair();
                (slope * m + intercept).min(slope * upper + intercept) > 0.0
            }
        }
    }
}

fn is_integral(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() <= 64.0
}

/// Result of sampled convexity classification on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub kind: ConvexityKind,
    /// Largest midpoint violation of the first test that failed: the
    /// log-convexity defect for `ConvexOnly`, the convexity defect for
    /// `Neither`, and the (noise-level) log defect for `LogConvex`.
    pub worst_violation: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvexityKind {
    LogConvex,
    ConvexOnly,
    Neither,
}

/// Classifies `f` on `[lo, hi]` by midpoint tests over all sample pairs:
/// log-convex (`ln f` convex), convex only, or neither.
///
/// Requires `f > 0` at every sample so the log test is defined.
pub fn is_log_convex(f: &ScalarFunction, interval: (f64, f64), n: usize) -> Result<ConvexityReport> {
    let (lo, hi) = interval;
    if n < 3 {
        return Err(Error::GridTooSmall { min: 3, got: n });
    }
    if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
        return Err(Error::InvalidBounds { m: lo, upper: hi });
    }
    let ts: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let mut vals = Vec::with_capacity(n);
    for &t in &ts {
        let v = f.evaluate(t)?;
        if v <= 0.0 {
            return Err(Error::NonPositiveValue {
                function: f.id().to_string(),
                t,
                value: v,
            });
        }
        vals.push(v);
    }
    let max_f = vals.iter().fold(0.0_f64, |a, &v| a.max(v));
    let max_log = vals.iter().fold(0.0_f64, |a, &v| a.max(v.ln().abs()));
    let log_tol = 1e-9 * (1.0 + max_log);
    let convex_tol = 1e-9 * (1.0 + max_f);

    let mut worst_log: f64 = f64::NEG_INFINITY;
    let mut worst_convex: f64 = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let mid = 0.5 * (ts[i] + ts[j]);
            let fm = f.evaluate(mid)?;
            if fm <= 0.0 {
                return Err(Error::NonPositiveValue {
                    function: f.id().to_string(),
                    t: mid,
                    value: fm,
                });
            }
            worst_log = worst_log.max(fm.ln() - 0.5 * (vals[i].ln() + vals[j].ln()));
            worst_convex = worst_convex.max(fm - 0.5 * (vals[i] + vals[j]));
        }
    }

    let report = if worst_log <= log_tol {
        ConvexityReport {
            kind: ConvexityKind::LogConvex,
            worst_violation: worst_log,
            samples: n,
        }
    } else if worst_convex <= convex_tol {
        ConvexityReport {
            kind: ConvexityKind::ConvexOnly,
            worst_violation: worst_log,
            samples: n,
        }
    } else {
        ConvexityReport {
            kind: ConvexityKind::Neither,
            worst_violation: worst_convex,
            samples: n,
        }
    };
    Ok(report)
}

fn require_in_band(t: f64, bounds: &SpectrumBounds) -> Result<()> {
    if !bounds.contains(t) {
        return Err(Error::OutsideInterval {
            t,
            m: bounds.m(),
            upper: bounds.upper(),
        });
    }
    Ok(())
}

/// Linear chord of `f` over the band:
/// `L(t) = ((M−t)·f(m) + (t−m)·f(M)) / (M−m)`.
///
/// Exact at the endpoints because the opposite weight vanishes exactly.
pub fn linear_chord(t: f64, bounds: &SpectrumBounds, f: &ScalarFunction) -> Result<f64> {
    require_in_band(t, bounds)?;
    let (m, upper) = bounds.pair();
    let w = (upper - t) / (upper - m);
    Ok(w * f.evaluate(m)? + (1.0 - w) * f.evaluate(upper)?)
}

/// Geometric (log-scale) chord of `f` over the band:
/// `G(t) = f(m)^{(M−t)/(M−m)} · f(M)^{(t−m)/(M−m)}` — requires
/// `f(m), f(M) > 0`.
///
/// For log-convex `f` this sits between `f` and the linear chord:
/// `f ≤ G ≤ L` pointwise on `[m, M]`.
pub fn log_chord(t: f64, bounds: &SpectrumBounds, f: &ScalarFunction) -> Result<f64> {
    require_in_band(t, bounds)?;
    let (m, upper) = bounds.pair();
    let fm = f.evaluate(m)?;
    let fu = f.evaluate(upper)?;
    for (at, v) in [(m, fm), (upper, fu)] {
        if v <= 0.0 {
            return Err(Error::NonPositiveValue {
                function: f.id().to_string(),
                t: at,
                value: v,
            });
        }
    }
    let w = (upper - t) / (upper - m);
    Ok(fm.powf(w) * fu.powf(1.0 - w))
}

/// Optimal ratio `μ(m, M, f) = max_{t ∈ [m, M]} L(t)/f(t)` of linear chord
/// to function value.
///
/// Computed by a 2049-point grid scan followed by golden-section refinement
/// of the bracketing cell down to an interval width of 1e-10. For positive
/// convex `f` the value is ≥ 1, with equality iff `f` is affine on the band.
pub fn mu_constant(bounds: &SpectrumBounds, f: &ScalarFunction) -> Result<f64> {
    let (m, upper) = bounds.pair();
    let ratio = |t: f64| -> Result<f64> {
        let v = f.evaluate(t)?;
        if v <= 0.0 {
            return Err(Error::NonPositiveValue {
                function: f.id().to_string(),
                t,
                value: v,
            });
        }
        Ok(linear_chord(t, bounds, f)? / v)
    };

    let n = MU_GRID_POINTS;
    let step = (upper - m) / (n - 1) as f64;
    let mut best_idx = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..n {
        let t = if i == n - 1 { upper } else { m + i as f64 * step };
        let r = ratio(t)?;
        if r > best_val {
            best_val = r;
            best_idx = i;
        }
    }
    // The true maximizer lies within one cell of the grid argmax; refine there.
    let lo = m + step * best_idx.saturating_sub(1) as f64;
    let hi = (m + step * (best_idx + 1) as f64).min(upper);
    let (_, refined) = golden_max(lo, hi, &ratio)?;
    Ok(best_val.max(refined))
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
fn golden_max(
    mut lo: f64,
    mut hi: f64,
    f: &impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    const INVPHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut iterations = 0;
    while hi - lo > GOLDEN_WIDTH_TOL && iterations < 200 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2)?;
        }
        iterations += 1;
    }
    if f1 >= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

/// Classical ratio bound `(M+m)² / (4mM)` — the `p = −1` specialization of
/// [`kantorovich_constant`], kept in closed form so the classical chain and
/// identity checks share one exact expression.
pub fn classical_kantorovich(bounds: &SpectrumBounds) -> f64 {
    let (m, upper) = bounds.pair();
    (upper + m).powi(2) / (4.0 * m * upper)
}

/// Generalized power constant
/// `K(m, M, p) = (mM^p − Mm^p)/((p−1)(M−m)) ·
///  ((p−1)/p · (M^p − m^p)/(mM^p − Mm^p))^p`.
///
/// Rejects exponents within 1e-8 of the removable singularities `p ∈ {0, 1}`.
pub fn kantorovich_constant(bounds: &SpectrumBounds, p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            reason: "exponent must be finite".to_string(),
        });
    }
    if p.abs() < EXPONENT_EXCLUSION {
        return Err(Error::InvalidExponent {
            p,
            reason: "within 1e-8 of the excluded value 0".to_string(),
        });
    }
    if (p - 1.0).abs() < EXPONENT_EXCLUSION {
        return Err(Error::InvalidExponent {
            p,
            reason: "within 1e-8 of the excluded value 1".to_string(),
        });
    }
    let (m, upper) = bounds.pair();
    let mp = m.powf(p);
    let up = upper.powf(p);
    let cross = m * up - upper * mp;
    let front = cross / ((p - 1.0) * (upper - m));
    let base = (p - 1.0) / p * (up - mp) / cross;
    let k = front * base.powf(p);
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::InvalidExponent {
            p,
            reason: format!("constant is not a positive real for this band: {k}"),
        });
    }
    Ok(k)
}

/// Constant of the squared-chain bound for `p ≥ 2`:
/// `((M+m)² / (4^{2/p} mM))^p`.
///
/// Evaluated as `(classical · 4^{1−2/p})^p`; at `p = 2` the inner factor is
/// exactly 1, so the result is exactly the square of the classical constant.
pub fn squared_chain_constant(bounds: &SpectrumBounds, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::InvalidExponent {
            p,
            reason: "squared-chain bound needs p >= 2".to_string(),
        });
    }
    let base = classical_kantorovich(bounds) * 4.0_f64.powf(1.0 - 2.0 / p);
    let c = if is_integral(p) {
        base.powi(p as i32)
    } else {
        base.powf(p)
    };
    if !c.is_finite() {
        return Err(Error::InvalidExponent {
            p,
            reason: "constant overflows for this band".to_string(),
        });
    }
    Ok(c)
}

/// Scalar gap of the weighted arithmetic–geometric bound behind the
/// chord-sum chain:
/// `(M + m) − t − m^{(t−m)/(M−m)} · M^{(M−t)/(M−m)} ≥ 0` on `[m, M]`.
///
/// Vanishes at both endpoints (exactly, up to one rounding of `M + m`).
pub fn chord_sum_gap(t: f64, bounds: &SpectrumBounds) -> Result<f64> {
    require_in_band(t, bounds)?;
    let (m, upper) = bounds.pair();
    let w = (t - m) / (upper - m);
    let geo = m.powf(w) * upper.powf(1.0 - w);
    Ok((upper + m) - t - geo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn band(m: f64, upper: f64) -> SpectrumBounds {
        SpectrumBounds::new(m, upper).unwrap()
    }

    #[test]
    fn parse_round_trips() {
        for s in ["inv", "exp-neg", "pow(-2.5)", "pow(3)", "affine(0.5,2)"] {
            let f = ScalarFunction::parse(s).unwrap();
            assert_eq!(f.id(), s);
        }
        assert_eq!(ScalarFunction::parse(" pow( -1 ) ").unwrap().id(), "pow(-1)");
        for bad in ["", "sqrt", "pow()", "pow(x)", "affine(1)", "affine(1,2,3)", "pow(inf)"] {
            assert!(ScalarFunction::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn evaluate_registry_values() {
        assert_eq!(ScalarFunction::inverse().evaluate(2.0).unwrap(), 0.5);
        assert_eq!(ScalarFunction::power(2.0).evaluate(1.5).unwrap(), 2.25);
        assert_eq!(ScalarFunction::power(0.5).evaluate(4.0).unwrap(), 2.0);
        assert_eq!(ScalarFunction::power(2.0).evaluate(-3.0).unwrap(), 9.0);
        assert_eq!(ScalarFunction::exp_neg().evaluate(0.0).unwrap(), 1.0);
        assert_eq!(ScalarFunction::affine(2.0, 1.0).evaluate(3.0).unwrap(), 7.0);
    }

    #[test]
    fn integral_powers_match_inverse_bitwise() {
        let inv = ScalarFunction::inverse();
        let pm1 = ScalarFunction::power(-1.0);
        for t in [0.3, 1.0, 1.7, 2.5, 97.0] {
            assert_eq!(inv.evaluate(t).unwrap(), pm1.evaluate(t).unwrap());
        }
    }

    #[test]
    fn domain_rejections() {
        assert!(ScalarFunction::inverse().evaluate(0.0).is_err());
        assert!(ScalarFunction::inverse().evaluate(-1.0).is_err());
        assert!(ScalarFunction::power(-2.0).evaluate(0.0).is_err());
        assert!(ScalarFunction::power(0.5).evaluate(-1.0).is_err());
        assert!(ScalarFunction::power(0.5).evaluate(0.0).is_ok());
    }

    #[test]
    fn convexity_flags() {
        let table = [
            ("inv", true, true, true),
            ("pow(-2)", true, true, false),
            ("pow(-1)", true, true, true),
            ("pow(-0.5)", true, true, true),
            ("pow(0.5)", false, false, false),
            ("pow(2)", false, true, true),
            ("pow(3)", false, true, false),
            ("exp-neg", true, true, false),
            ("affine(1,0)", false, true, true),
            ("affine(0,2)", true, true, true),
        ];
        for (id, log_convex, convex, operator_convex) in table {
            let p = ScalarFunction::parse(id).unwrap().properties();
            assert_eq!(p.log_convex, log_convex, "{id} log_convex");
            assert_eq!(p.convex, convex, "{id} convex");
            assert_eq!(p.operator_convex, operator_convex, "{id} operator_convex");
        }
    }

    #[test]
    fn positivity_on_band() {
        let b = band(1.0, 2.0);
        assert!(ScalarFunction::inverse().positive_on(&b));
        assert!(!ScalarFunction::affine(1.0, -3.0).positive_on(&b));
        assert!(ScalarFunction::affine(1.0, -3.0).positive_on(&band(4.0, 5.0)));
    }

    #[test]
    fn linear_chord_frozen_values() {
        let inv = ScalarFunction::inverse();
        assert_eq!(linear_chord(1.5, &band(1.0, 2.0), &inv).unwrap(), 0.75);
        let sq = ScalarFunction::power(2.0);
        assert_eq!(linear_chord(2.0, &band(1.0, 3.0), &sq).unwrap(), 5.0);
        // Endpoints are exact.
        assert_eq!(linear_chord(1.0, &band(1.0, 2.0), &inv).unwrap(), 1.0);
        assert_eq!(linear_chord(2.0, &band(1.0, 2.0), &inv).unwrap(), 0.5);
        assert!(linear_chord(0.5, &band(1.0, 2.0), &inv).is_err());
    }

    #[test]
    fn log_chord_frozen_values() {
        let inv = ScalarFunction::inverse();
        let b = band(1.0, 2.0);
        assert_abs_diff_eq!(
            log_chord(1.5, &b, &inv).unwrap(),
            0.7071067811865476,
            epsilon = 1e-16
        );
        assert_eq!(log_chord(1.0, &b, &inv).unwrap(), 1.0);
        assert_eq!(log_chord(2.0, &b, &inv).unwrap(), 0.5);
        let crossing = ScalarFunction::affine(1.0, -3.0);
        assert!(matches!(
            log_chord(1.5, &b, &crossing),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn chords_sandwich_log_convex_functions() {
        // f ≤ geometric chord ≤ linear chord, pointwise, within relative
        // slack 1e-12 (the exponential case is an exact tie for the first
        // leg, so slack is genuinely needed).
        let b = band(0.5, 4.0);
        for id in ["inv", "pow(-2)", "exp-neg"] {
            let f = ScalarFunction::parse(id).unwrap();
            for i in 0..=1000 {
                let t = 0.5 + 3.5 * i as f64 / 1000.0;
                let ft = f.evaluate(t).unwrap();
                let g = log_chord(t, &b, &f).unwrap();
                let l = linear_chord(t, &b, &f).unwrap();
                let slack = 1e-12 * ft.abs().max(g.abs()).max(l.abs());
                assert!(ft <= g + slack, "{id}: f({t}) = {ft} > geometric {g}");
                assert!(g <= l + slack, "{id}: geometric {g} > linear {l} at {t}");
            }
        }
    }

    #[test]
    fn classify_inverse_as_log_convex() {
        let r = is_log_convex(&ScalarFunction::inverse(), (0.5, 4.0), 129).unwrap();
        assert_eq!(r.kind, ConvexityKind::LogConvex);
        assert!(r.worst_violation <= 1e-12);
        assert_eq!(r.samples, 129);
    }

    #[test]
    fn classify_square_as_convex_only() {
        let r = is_log_convex(&ScalarFunction::power(2.0), (1.0, 2.0), 129).unwrap();
        assert_eq!(r.kind, ConvexityKind::ConvexOnly);
        // Worst log-midpoint defect is attained at the endpoint pair:
        // 2·ln(1.5) − ln(2) ≈ 0.1178.
        assert!((0.11..0.13).contains(&r.worst_violation));
    }

    #[test]
    fn classify_sqrt_as_neither() {
        let r = is_log_convex(&ScalarFunction::power(0.5), (1.0, 4.0), 65).unwrap();
        assert_eq!(r.kind, ConvexityKind::Neither);
        assert!(r.worst_violation > 0.0);
    }

    #[test]
    fn classify_constant_as_log_convex() {
        let r = is_log_convex(&ScalarFunction::affine(0.0, 2.0), (1.0, 2.0), 33).unwrap();
        assert_eq!(r.kind, ConvexityKind::LogConvex);
    }

    #[test]
    fn classify_rejects_sign_changes_and_tiny_grids() {
        let crossing = ScalarFunction::affine(1.0, -3.0);
        assert!(matches!(
            is_log_convex(&crossing, (1.0, 4.0), 33),
            Err(Error::NonPositiveValue { .. })
        ));
        assert!(matches!(
            is_log_convex(&ScalarFunction::inverse(), (1.0, 2.0), 2),
            Err(Error::GridTooSmall { .. })
        ));
    }

    #[test]
    fn mu_frozen_values() {
        let inv = ScalarFunction::inverse();
        assert_abs_diff_eq!(mu_constant(&band(1.0, 2.0), &inv).unwrap(), 1.125, epsilon = 1e-10);
        assert_abs_diff_eq!(mu_constant(&band(1.0, 4.0), &inv).unwrap(), 1.5625, epsilon = 1e-10);
        // The square shares the same optimal ratio as the reciprocal.
        let sq = ScalarFunction::power(2.0);
        assert_abs_diff_eq!(mu_constant(&band(1.0, 2.0), &sq).unwrap(), 1.125, epsilon = 1e-10);
        // Affine functions coincide with their own chord: μ = 1.
        let aff = ScalarFunction::affine(0.3, 0.7);
        assert_abs_diff_eq!(mu_constant(&band(1.0, 2.0), &aff).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mu_matches_closed_form_beyond_grid_resolution() {
        // Grid-only scanning plateaus near 1e-7 relative error; agreement at
        // 1e-10 shows the golden-section refinement is doing its job.
        let inv = ScalarFunction::inverse();
        for (m, upper) in [(1.0, 2.0), (0.5, 3.7), (0.1, 10.0)] {
            let b = band(m, upper);
            let mu = mu_constant(&b, &inv).unwrap();
            let k = classical_kantorovich(&b);
            assert!((mu - k).abs() / k <= 1e-10, "band ({m},{upper}): {mu} vs {k}");
        }
    }

    #[test]
    fn mu_rejects_nonpositive_function() {
        let crossing = ScalarFunction::affine(1.0, -3.0);
        assert!(matches!(
            mu_constant(&band(1.0, 4.0), &crossing),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn kantorovich_constant_frozen_values() {
        assert_abs_diff_eq!(
            kantorovich_constant(&band(1.0, 2.0), -1.0).unwrap(),
            1.125,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            kantorovich_constant(&band(1.0, 4.0), -1.0).unwrap(),
            1.5625,
            epsilon = 1e-14
        );
        // K(1, 2, −2) = 343/243.
        assert_abs_diff_eq!(
            kantorovich_constant(&band(1.0, 2.0), -2.0).unwrap(),
            343.0 / 243.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn kantorovich_constant_matches_classical_at_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let m = rng.random_range(0.05..5.0);
            let upper = m * rng.random_range(1.01..100.0);
            let b = band(m, upper);
            let k = kantorovich_constant(&b, -1.0).unwrap();
            let classical = classical_kantorovich(&b);
            assert!(
                (k - classical).abs() / classical <= 1e-12,
                "band ({m},{upper}): {k} vs {classical}"
            );
        }
    }

    #[test]
    fn kantorovich_constant_rejects_excluded_exponents() {
        let b = band(1.0, 2.0);
        for p in [0.0, 1.0, 5e-9, -5e-9, 1.0 + 5e-9, 1.0 - 5e-9, f64::NAN] {
            assert!(kantorovich_constant(&b, p).is_err(), "accepted p = {p}");
        }
        assert!(kantorovich_constant(&b, 2.0).is_ok());
        assert!(kantorovich_constant(&b, -0.5).is_ok());
    }

    #[test]
    fn squared_constant_is_exact_square_at_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..50 {
            let m = rng.random_range(0.1..3.0);
            let upper = m * rng.random_range(1.1..50.0);
            let b = band(m, upper);
            let classical = classical_kantorovich(&b);
            // Bit-exact, not merely close.
            assert_eq!(
                squared_chain_constant(&b, 2.0).unwrap(),
                classical * classical
            );
        }
    }

    #[test]
    fn squared_constant_frozen_value_and_rejection() {
        assert_abs_diff_eq!(
            squared_chain_constant(&band(1.0, 2.0), 4.0).unwrap(),
            25.62890625,
            epsilon = 1e-12
        );
        assert!(squared_chain_constant(&band(1.0, 2.0), 1.5).is_err());
        assert!(squared_chain_constant(&band(1.0, 2.0), f64::NAN).is_err());
    }

    #[test]
    fn chord_sum_gap_frozen_values() {
        let b = band(1.0, 2.0);
        assert_abs_diff_eq!(
            chord_sum_gap(1.5, &b).unwrap(),
            0.08578643762690485,
            epsilon = 1e-15
        );
        assert_eq!(chord_sum_gap(1.0, &b).unwrap(), 0.0);
        assert_eq!(chord_sum_gap(2.0, &b).unwrap(), 0.0);
        assert!(chord_sum_gap(2.5, &b).is_err());
    }

    #[test]
    fn chord_sum_gap_nonnegative_on_random_bands() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..50 {
            let m = rng.random_range(0.05..4.0);
            let upper = m * rng.random_range(1.001..200.0);
            let b = band(m, upper);
            for i in 0..=500 {
                let t = m + (upper - m) * i as f64 / 500.0;
                let gap = chord_sum_gap(t.min(upper), &b).unwrap();
                assert!(
                    gap >= -1e-12 * (upper + m),
                    "gap {gap} at t = {t} on ({m}, {upper})"
                );
            }
            assert!(chord_sum_gap(m, &b).unwrap().abs() <= 1e-12 * (upper + m));
            assert!(chord_sum_gap(upper, &b).unwrap().abs() <= 1e-12 * (upper + m));
        }
    }
}
