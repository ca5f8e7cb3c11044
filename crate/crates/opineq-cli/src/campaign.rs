//! Campaign execution: deterministic instance scheduling, per-theorem
//! drivers, failure replay, the tightness sweep, the constants table, and the
//! fixed equality-case regression set.
//!
//! Seeding scheme: `seed_i = mix(mix(campaign_seed, theorem_ordinal), i)`.
//! Instance metadata (dimension, band) is drawn from a stream keyed off
//! `seed_i`, and `seed_i` is also the recipe seed, so any instance can be
//! reconstructed from its digest alone.

use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opineq::checks::{
    check_ando, check_bhatia_kittaneh, check_cdj, check_chord_sum, check_kantorovich,
    check_logconvex_refinement, check_mu_bound, check_norm_criterion, check_power_refinement,
    check_refined_kantorovich, check_squared, ChainReport, Tolerance,
};
use opineq::gen::{
    self, conjugate_spectrum, instantiate, mix_seed, random_unitary, Instance, InstanceRecipe,
    SpectrumStyle,
};
use opineq::hermitian::{HermitianMatrix, SpectrumBounds};
use opineq::maps::MapSpec;
use opineq::scalar::ScalarFunction;

use crate::config::{CampaignConfig, Theorem, NORM_ALPHA_FACTORS};
use crate::report::{
    classify, CampaignSummary, CaseClass, ConstantRow, ConstantsReport, EqualityCase,
    FailingCase, MuRow, Report, TheoremStats, TightnessRow, REPORT_VERSION,
};
use crate::{CliError, Result};

/// Seed stream indices, disjoint from the 1..=4 streams used inside
/// `gen::instantiate`.
const META_STREAM: u64 = 9;
const PAIR_STREAM: u64 = 5;

/// Gap magnitude accepted as "equality" for the fixed equality witnesses.
pub const EQUALITY_TOL: f64 = 1e-10;

/// Band policy when the config leaves bounds unset: modest lower edge, condition
/// numbers spread log-uniformly up to 100.
fn draw_band(rng: &mut ChaCha8Rng) -> SpectrumBounds {
    let m = rng.random_range(0.05..3.0);
    let ratio = rng.random_range((1.001f64).ln()..(100.0f64).ln()).exp();
    SpectrumBounds::new(m, m * ratio).expect("band policy is always valid")
}

fn tolerance(cfg: &CampaignConfig) -> Tolerance {
    Tolerance {
        rtol: cfg.rtol,
        atol: cfg.atol,
    }
}

struct MappedCase {
    inst: Instance,
    bracket: SpectrumBounds,
    recipe: InstanceRecipe,
}

fn build_mapped(cfg: &CampaignConfig, index: usize, seed: u64) -> Result<MappedCase> {
    let mut meta = ChaCha8Rng::seed_from_u64(mix_seed(seed, META_STREAM));
    let dim = meta.random_range(cfg.dims.lo..=cfg.dims.hi);
    let band = cfg.bounds.unwrap_or_else(|| draw_band(&mut meta));
    let styles = cfg.map_styles_for_run();
    let recipe = InstanceRecipe {
        dim,
        bounds: band,
        spectrum_style: SpectrumStyle::ALL[index % SpectrumStyle::ALL.len()],
        map_style: styles[index % styles.len()],
        seed,
    };
    let inst = instantiate(&recipe)?;
    let bracket = if cfg.tight_bracket {
        inst.tight_bounds()?
    } else {
        band
    };
    Ok(MappedCase {
        inst,
        bracket,
        recipe,
    })
}

fn run_mapped(
    cfg: &CampaignConfig,
    theorem: Theorem,
    index: usize,
    case: &MappedCase,
) -> Result<ChainReport> {
    let tol = tolerance(cfg);
    let a = &case.inst.matrix;
    let phi = &case.inst.map;
    let bracket = &case.bracket;
    let report = match theorem {
        Theorem::Kantorovich => check_kantorovich(a, phi, bracket, tol)?,
        Theorem::Refined => check_refined_kantorovich(a, phi, bracket, tol)?,
        Theorem::ChordSum => check_chord_sum(a, phi, bracket, tol)?,
        Theorem::Logconvex => {
            let fs = cfg.functions_for(theorem);
            check_logconvex_refinement(a, phi, bracket, &fs[index % fs.len()], tol)?
        }
        Theorem::MuBound => {
            let fs = cfg.functions_for(theorem);
            check_mu_bound(a, phi, bracket, &fs[index % fs.len()], tol)?
        }
        Theorem::Cdj => {
            let fs = cfg.functions_for(theorem);
            check_cdj(a, phi, &fs[index % fs.len()], tol)?
        }
        Theorem::Power => {
            let ps = cfg.exponents_for(theorem);
            check_power_refinement(a, phi, bracket, ps[index % ps.len()], tol)?
        }
        Theorem::Squared => {
            let ps = cfg.exponents_for(theorem);
            check_squared(a, phi, bracket, ps[index % ps.len()], tol)?
        }
        _ => unreachable!("pair theorems handled separately"),
    };
    Ok(report)
}

/// The norm ratio lambda_max(B^{-1/2} A B^{-1/2}), the exact threshold for
/// A <= alpha B.
fn norm_ratio(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let s = b.map_eigenvalues(|l| Ok(l.powf(-0.5)))?;
    let sandwiched = s.matrix() * a.matrix() * s.matrix();
    Ok(HermitianMatrix::from_symmetrized(sandwiched)?.max_eigenvalue())
}

fn run_pair(
    cfg: &CampaignConfig,
    theorem: Theorem,
    index: usize,
    seed: u64,
) -> Result<(ChainReport, SpectrumBounds)> {
    let mut meta = ChaCha8Rng::seed_from_u64(mix_seed(seed, META_STREAM));
    let dim = meta.random_range(cfg.dims.lo..=cfg.dims.hi);
    let band = cfg.bounds.unwrap_or_else(|| draw_band(&mut meta));
    let r_for_ando = {
        let rs = cfg.exponents_for(Theorem::Ando);
        rs[index % rs.len()]
    };
    let alpha_factor = NORM_ALPHA_FACTORS[index % NORM_ALPHA_FACTORS.len()];
    let report = replay_pair(cfg, theorem, dim, band, seed, Some(r_for_ando), Some(alpha_factor))?;
    Ok((report, band))
}

fn build_pair_matrices(
    theorem: Theorem,
    dim: usize,
    band: SpectrumBounds,
    seed: u64,
) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, PAIR_STREAM));
    let (m, upper) = band.pair();
    let pair = match theorem {
        Theorem::BhatiaKittaneh => (
            gen::random_pd_with(dim, m, upper, &mut rng)?,
            gen::random_pd_with(dim, m, upper, &mut rng)?,
        ),
        Theorem::Ando => (
            gen::random_psd_with(dim, upper, &mut rng)?,
            gen::random_psd_with(dim, upper, &mut rng)?,
        ),
        Theorem::NormCriterion => {
            let b = gen::random_pd_with(dim, m, upper, &mut rng)?;
            let a = gen::random_psd_with(dim, upper, &mut rng)?;
            (a, b)
        }
        _ => unreachable!("not a pair theorem"),
    };
    Ok(pair)
}

/// Build and check one pair instance. For the norm criterion, a fresh run
/// derives alpha from `alpha_factor` times the exact norm ratio; a replay
/// passes the stored alpha through `r` with `alpha_factor = None`.
fn replay_pair(
    cfg: &CampaignConfig,
    theorem: Theorem,
    dim: usize,
    band: SpectrumBounds,
    seed: u64,
    r: Option<f64>,
    alpha_factor: Option<f64>,
) -> Result<ChainReport> {
    let tol = tolerance(cfg);
    let (a, b) = build_pair_matrices(theorem, dim, band, seed)?;
    let mut report = match theorem {
        Theorem::BhatiaKittaneh => check_bhatia_kittaneh(&a, &b, tol)?,
        Theorem::Ando => {
            let r = r.ok_or_else(|| CliError::Config("missing exponent for replay".into()))?;
            check_ando(&a, &b, r, tol)?
        }
        Theorem::NormCriterion => {
            let alpha = match alpha_factor {
                Some(factor) => norm_ratio(&a, &b)? * factor,
                None => r.ok_or_else(|| {
                    CliError::Config("missing alpha for norm-criterion replay".into())
                })?,
            };
            check_norm_criterion(&a, &b, alpha, tol)?
        }
        _ => unreachable!(),
    };
    report.instance.seed = seed;
    Ok(report)
}

struct CaseRecord {
    report: ChainReport,
    recipe: Option<InstanceRecipe>,
    band: Option<SpectrumBounds>,
}

fn run_theorem(cfg: &CampaignConfig, theorem: Theorem) -> Result<Vec<CaseRecord>> {
    let theorem_seed = mix_seed(cfg.seed, theorem.ordinal());
    let mut records = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.trials {
        let seed_i = mix_seed(theorem_seed, i as u64);
        let record = if theorem.uses_map() {
            let case = build_mapped(cfg, i, seed_i)?;
            let mut report = run_mapped(cfg, theorem, i, &case)?;
            report.instance.seed = seed_i;
            CaseRecord {
                report,
                recipe: Some(case.recipe),
                band: None,
            }
        } else {
            let (report, band) = run_pair(cfg, theorem, i, seed_i)?;
            CaseRecord {
                report,
                recipe: None,
                band: Some(band),
            }
        };
        records.push(record);
    }
    Ok(records)
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<Report> {
    let start = Instant::now();
    let mut results: Vec<ChainReport> = Vec::new();
    let mut failing: Vec<FailingCase> = Vec::new();
    let mut per_theorem = std::collections::BTreeMap::new();

    for theorem in cfg.theorem.theorems() {
        let records = run_theorem(cfg, theorem)?;
        let stats = TheoremStats::from_reports(records.iter().map(|r| &r.report));
        per_theorem.insert(theorem.name().to_string(), stats);
        for record in records {
            if classify(&record.report) == CaseClass::Failure {
                failing.push(FailingCase {
                    theorem: theorem.name().to_string(),
                    instance: record.report.instance.clone(),
                    recipe: record.recipe.clone(),
                    band: record.band,
                });
            }
            results.push(record.report);
        }
    }

    Ok(Report {
        version: REPORT_VERSION,
        config: cfg.clone(),
        results,
        summary: CampaignSummary {
            per_theorem,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            failing,
        },
    })
}

/// Re-run the failing cases recorded in a previous report, using that
/// report's tolerances. Returns the fresh verdicts in input order.
pub fn replay_failures(report: &Report) -> Result<Vec<(FailingCase, ChainReport)>> {
    let cfg = &report.config;
    let tol = tolerance(cfg);
    let mut out = Vec::with_capacity(report.summary.failing.len());
    for case in &report.summary.failing {
        let theorem = Theorem::from_str(&case.theorem).map_err(CliError::Config)?;
        let digest = &case.instance;
        let rerun = if let Some(recipe) = &case.recipe {
            let inst = instantiate(recipe)?;
            let bracket = SpectrumBounds::new(digest.m, digest.upper)
                .map_err(|e| CliError::Config(format!("bad bracket in failing case: {e}")))?;
            let a = &inst.matrix;
            let phi = &inst.map;
            let mut report = match theorem {
                Theorem::Kantorovich => check_kantorovich(a, phi, &bracket, tol)?,
                Theorem::Refined => check_refined_kantorovich(a, phi, &bracket, tol)?,
                Theorem::ChordSum => check_chord_sum(a, phi, &bracket, tol)?,
                Theorem::Logconvex | Theorem::MuBound | Theorem::Cdj => {
                    let id = digest.f.as_deref().ok_or_else(|| {
                        CliError::Config("failing case lacks its function id".into())
                    })?;
                    let f = ScalarFunction::parse(id)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    match theorem {
                        Theorem::Logconvex => {
                            check_logconvex_refinement(a, phi, &bracket, &f, tol)?
                        }
                        Theorem::MuBound => check_mu_bound(a, phi, &bracket, &f, tol)?,
                        _ => check_cdj(a, phi, &f, tol)?,
                    }
                }
                Theorem::Power | Theorem::Squared => {
                    let p = digest.p.ok_or_else(|| {
                        CliError::Config("failing case lacks its exponent".into())
                    })?;
                    match theorem {
                        Theorem::Power => check_power_refinement(a, phi, &bracket, p, tol)?,
                        _ => check_squared(a, phi, &bracket, p, tol)?,
                    }
                }
                _ => unreachable!("pair theorems carry no recipe"),
            };
            report.instance.seed = digest.seed;
            report
        } else {
            let band = case.band.ok_or_else(|| {
                CliError::Config("pair failing case lacks its generation band".into())
            })?;
            // digest.p carries r (ando) or the exact alpha (norm criterion).
            replay_pair(cfg, theorem, digest.dim, band, digest.seed, digest.p, None)?
        };
        out.push((case.clone(), rerun));
    }
    Ok(out)
}

/// Refined-versus-classical gap columns over one campaign's worth of
/// instances; shares the refined theorem's seed stream.
pub fn run_tightness(cfg: &CampaignConfig) -> Result<Vec<TightnessRow>> {
    let theorem_seed = mix_seed(cfg.seed, Theorem::Refined.ordinal());
    let tol = tolerance(cfg);
    let mut rows = Vec::with_capacity(cfg.trials);
    for i in 0..cfg.trials {
        let seed_i = mix_seed(theorem_seed, i as u64);
        let case = build_mapped(cfg, i, seed_i)?;
        let refined =
            check_refined_kantorovich(&case.inst.matrix, &case.inst.map, &case.bracket, tol)?;
        let classical = check_kantorovich(&case.inst.matrix, &case.inst.map, &case.bracket, tol)?;
        rows.push(TightnessRow {
            index: i,
            seed: seed_i,
            dim: case.recipe.dim,
            m: refined.instance.m,
            upper: refined.instance.upper,
            map_variant: refined.instance.map_variant.clone(),
            link1_gap: refined.links[0].gap,
            link2_gap: refined.links[1].gap,
            classical_slack: classical.links[0].gap,
        });
    }
    Ok(rows)
}

pub fn compute_constants(
    m: f64,
    upper: f64,
    ps: &[f64],
    fs: &[String],
) -> Result<ConstantsReport> {
    let bounds =
        SpectrumBounds::new(m, upper).map_err(|e| CliError::Config(e.to_string()))?;
    let classical = opineq::scalar::classical_kantorovich(&bounds);
    let mut k = Vec::with_capacity(ps.len());
    for &p in ps {
        let value = opineq::scalar::kantorovich_constant(&bounds, p)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if (p + 1.0).abs() < 1e-12 {
            // Internal consistency: at p = -1 the general constant is the
            // classical ratio.
            assert!(
                (value - classical).abs() <= 1e-12 * classical,
                "constant at p = -1 drifted from the classical ratio: {value} vs {classical}"
            );
        }
        k.push(ConstantRow { p, value });
    }
    let mut mu = Vec::with_capacity(fs.len());
    for id in fs {
        let f = ScalarFunction::parse(id).map_err(|e| CliError::Config(e.to_string()))?;
        let value = opineq::scalar::mu_constant(&bounds, &f)
            .map_err(|e| CliError::Config(e.to_string()))?;
        mu.push(MuRow {
            f: id.clone(),
            value,
        });
    }
    Ok(ConstantsReport {
        m,
        upper,
        classical,
        k,
        mu,
    })
}

/// Fixed witnesses where every link of the refined, chord-sum, and squared
/// (p = 2) chains collapses to equality: spectra {m, M} with balanced
/// multiplicity under the normalized trace, conjugated by a fixed unitary.
pub fn run_equality_cases() -> Result<Vec<EqualityCase>> {
    const UNITARY_SEED: u64 = 0x0E11;
    let tol = Tolerance::default();
    let bands = [(1.0, 2.0), (0.5, 3.5)];
    let mut cases = Vec::new();
    for (k, &(m, upper)) in bands.iter().enumerate() {
        let bounds = SpectrumBounds::new(m, upper)?;
        let specs: [(&str, Vec<f64>); 2] = [
            ("dim 2", vec![m, upper]),
            ("dim 4 balanced", vec![m, m, upper, upper]),
        ];
        for (tag, spectrum) in specs {
            let dim = spectrum.len();
            let u = random_unitary(dim, mix_seed(UNITARY_SEED, k as u64));
            let a = conjugate_spectrum(&spectrum, &u)?;
            let phi = MapSpec::normalized_trace(dim)?;
            let label = format!("band [{m}, {upper}] {tag}");
            let chains = [
                check_refined_kantorovich(&a, &phi, &bounds, tol)?,
                check_chord_sum(&a, &phi, &bounds, tol)?,
                check_squared(&a, &phi, &bounds, 2.0, tol)?,
            ];
            for chain in chains {
                let max_abs_gap = chain
                    .links
                    .iter()
                    .map(|l| l.gap.abs())
                    .fold(0.0f64, f64::max);
                cases.push(EqualityCase {
                    label: label.clone(),
                    chain: chain.name.clone(),
                    max_abs_gap,
                    ok: max_abs_gap <= EQUALITY_TOL,
                });
            }
        }
    }
    Ok(cases)
}
