//! Report schema written by `verify` plus the flat tightness and constants
//! outputs. JSON field order follows struct order and maps are BTreeMaps, so
//! serialization is byte-stable for a given campaign.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use opineq::checks::{ChainReport, InstanceDigest};
use opineq::gen::InstanceRecipe;
use opineq::hermitian::SpectrumBounds;

use crate::config::CampaignConfig;

pub const REPORT_VERSION: u32 = 1;

/// Chains whose binding gap is below this are flagged as failures by the
/// summary only via their recorded verdicts; classification logic lives in
/// [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseClass {
    Pass,
    Failure,
    Inconclusive,
}

pub fn classify(report: &ChainReport) -> CaseClass {
    if !report.all_hold {
        CaseClass::Failure
    } else if report.inconclusive() {
        CaseClass::Inconclusive
    } else {
        CaseClass::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub config: CampaignConfig,
    pub results: Vec<ChainReport>,
    pub summary: CampaignSummary,
}

impl Report {
    pub fn to_json(&self) -> crate::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub per_theorem: BTreeMap<String, TheoremStats>,
    pub wall_time_seconds: f64,
    pub failing: Vec<FailingCase>,
}

impl CampaignSummary {
    pub fn total_failures(&self) -> usize {
        self.per_theorem.values().map(|s| s.failures).sum()
    }

    pub fn total_instances(&self) -> usize {
        self.per_theorem.values().map(|s| s.instances).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremStats {
    pub instances: usize,
    pub passes: usize,
    pub failures: usize,
    pub inconclusive: usize,
    /// Statistics of the binding (smallest) link gap per instance.
    pub min_gap: f64,
    pub median_gap: f64,
    pub max_gap: f64,
}

impl TheoremStats {
    pub fn from_reports<'a>(reports: impl Iterator<Item = &'a ChainReport>) -> TheoremStats {
        let mut gaps: Vec<f64> = Vec::new();
        let mut stats = TheoremStats {
            instances: 0,
            passes: 0,
            failures: 0,
            inconclusive: 0,
            min_gap: f64::NAN,
            median_gap: f64::NAN,
            max_gap: f64::NAN,
        };
        for report in reports {
            stats.instances += 1;
            match classify(report) {
                CaseClass::Pass => stats.passes += 1,
                CaseClass::Failure => stats.failures += 1,
                CaseClass::Inconclusive => stats.inconclusive += 1,
            }
            gaps.push(report.min_gap());
        }
        if !gaps.is_empty() {
            gaps.sort_by(f64::total_cmp);
            stats.min_gap = gaps[0];
            stats.max_gap = gaps[gaps.len() - 1];
            let mid = gaps.len() / 2;
            stats.median_gap = if gaps.len() % 2 == 1 {
                gaps[mid]
            } else {
                0.5 * (gaps[mid - 1] + gaps[mid])
            };
        }
        stats
    }
}

/// Everything needed to re-run one failing case in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailingCase {
    pub theorem: String,
    pub instance: InstanceDigest,
    /// Present for matrix+map instances; pair checks regenerate from
    /// `instance.seed`, `instance.dim`, and `band`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<InstanceRecipe>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<SpectrumBounds>,
}

pub fn render_summary(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>9} {:>7} {:>7} {:>8} {:>13} {:>13} {:>13}",
        "theorem", "instances", "pass", "fail", "inconcl", "min_gap", "median_gap", "max_gap"
    );
    for (name, s) in &report.summary.per_theorem {
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>7} {:>7} {:>8} {:>13.4e} {:>13.4e} {:>13.4e}",
            name, s.instances, s.passes, s.failures, s.inconclusive, s.min_gap, s.median_gap, s.max_gap
        );
    }
    let failures = report.summary.total_failures();
    if failures == 0 {
        let _ = writeln!(
            out,
            "all chains held over {} instances ({:.2}s)",
            report.summary.total_instances(),
            report.summary.wall_time_seconds
        );
    } else {
        let _ = writeln!(
            out,
            "FAILURES: {failures} of {} instances; failing recipes recorded in the report",
            report.summary.total_instances()
        );
    }
    out
}

pub const TIGHTNESS_HEADER: &str =
    "index,seed,dim,m,M,map_variant,link1_gap,link2_gap,classical_slack";

/// One instance of the refined chain next to the classical bound it tightens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub index: usize,
    pub seed: u64,
    pub dim: usize,
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    pub map_variant: String,
    pub link1_gap: f64,
    pub link2_gap: f64,
    pub classical_slack: f64,
}

pub fn tightness_csv(rows: &[TightnessRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TIGHTNESS_HEADER);
    out.push('\n');
    for r in rows {
        // Gap columns span many orders of magnitude; scientific notation
        // keeps them short while still round-tripping exactly.
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:e},{:e},{:e}",
            r.index,
            r.seed,
            r.dim,
            r.m,
            r.upper,
            r.map_variant,
            r.link1_gap,
            r.link2_gap,
            r.classical_slack
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuRow {
    pub f: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    /// (M+m)^2 / (4 m M).
    pub classical: f64,
    pub k: Vec<ConstantRow>,
    pub mu: Vec<MuRow>,
}

pub fn render_constants(report: &ConstantsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "classical (M+m)^2/(4 m M) for [{}, {}] = {}",
        report.m, report.upper, report.classical
    );
    for row in &report.k {
        let _ = writeln!(out, "K({}, {}, {}) = {}", report.m, report.upper, row.p, row.value);
    }
    for row in &report.mu {
        let _ = writeln!(out, "mu({}, {}, {}) = {}", report.m, report.upper, row.f, row.value);
    }
    out
}

/// One fixed equality witness and the largest |gap| observed across a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityCase {
    pub label: String,
    pub chain: String,
    pub max_abs_gap: f64,
    pub ok: bool,
}

pub fn render_equality_cases(cases: &[EqualityCase]) -> String {
    let mut out = String::new();
    for c in cases {
        let _ = writeln!(
            out,
            "{:<28} {:<14} max|gap| = {:>12.4e}  {}",
            c.label,
            c.chain,
            c.max_abs_gap,
            if c.ok { "ok" } else { "FAIL" }
        );
    }
    out
}
