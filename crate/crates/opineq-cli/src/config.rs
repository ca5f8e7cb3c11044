//! Campaign configuration: selector/dimension parsing, JSON config files,
//! flag overrides, and per-theorem parameter resolution (exponents,
//! functions, map styles).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use opineq::gen::MapStyle;
use opineq::hermitian::SpectrumBounds;
use opineq::scalar::ScalarFunction;
use opineq::{DEFAULT_ATOL, DEFAULT_RTOL};

use crate::{CliError, Result};

/// Exponents this close to the excluded points {0, 1} are rejected up front.
const EXPONENT_MARGIN: f64 = 1e-8;
/// Campaign dimension cap; the checkers themselves have no limit, but
/// verification runs are desk-scale by design.
pub const MAX_DIM: usize = 16;
/// Largest |exponent| accepted in campaigns, to keep constants like
/// ((M+m)^2/(4^{2/p} m M))^p inside double range.
pub const MAX_EXPONENT: f64 = 16.0;

pub const DEFAULT_POWER_PS: [f64; 4] = [-0.5, -1.0, -2.0, -3.0];
pub const DEFAULT_SQUARED_PS: [f64; 4] = [2.0, 3.0, 4.0, 8.0];
pub const DEFAULT_ANDO_RS: [f64; 3] = [1.5, 2.0, 3.0];
pub const DEFAULT_LOGCONVEX_FS: [&str; 3] = ["inv", "exp-neg", "pow(-2)"];
pub const DEFAULT_CDJ_FS: [&str; 2] = ["inv", "pow(2)"];
pub const DEFAULT_MU_FS: [&str; 3] = ["pow(2)", "inv", "affine(0.5,1)"];
pub const DEFAULT_MAP_STYLES: [MapStyle; 5] = [
    MapStyle::Trace,
    MapStyle::Pinching,
    MapStyle::Compression,
    MapStyle::Kraus(3),
    MapStyle::UnitaryMixture(4),
];
/// Multiples of the observed norm ratio used to pick alpha for the norm
/// criterion; 1.0 lands on the decision boundary and exercises the
/// inconclusive band.
pub const NORM_ALPHA_FACTORS: [f64; 5] = [0.25, 0.8, 1.0, 1.25, 4.0];

/// One inequality chain the campaign can exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Theorem {
    Kantorovich,
    Refined,
    Logconvex,
    Power,
    Squared,
    Cdj,
    MuBound,
    BhatiaKittaneh,
    Ando,
    ChordSum,
    NormCriterion,
}

impl Theorem {
    /// Fixed execution order; the position feeds the per-theorem seed stream.
    pub const ALL: [Theorem; 11] = [
        Theorem::Kantorovich,
        Theorem::Refined,
        Theorem::Logconvex,
        Theorem::Power,
        Theorem::Squared,
        Theorem::Cdj,
        Theorem::MuBound,
        Theorem::BhatiaKittaneh,
        Theorem::Ando,
        Theorem::ChordSum,
        Theorem::NormCriterion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Kantorovich => "kantorovich",
            Theorem::Refined => "refined",
            Theorem::Logconvex => "logconvex",
            Theorem::Power => "power",
            Theorem::Squared => "squared",
            Theorem::Cdj => "cdj",
            Theorem::MuBound => "mu-bound",
            Theorem::BhatiaKittaneh => "bhatia-kittaneh",
            Theorem::Ando => "ando",
            Theorem::ChordSum => "chord-sum",
            Theorem::NormCriterion => "norm-criterion",
        }
    }

    pub fn ordinal(self) -> u64 {
        Theorem::ALL.iter().position(|t| *t == self).unwrap() as u64
    }

    /// Checkers that consume a `(matrix, map, bracket)` instance, as opposed
    /// to the pair checks built from two matrices.
    pub fn uses_map(self) -> bool {
        !matches!(
            self,
            Theorem::BhatiaKittaneh | Theorem::Ando | Theorem::NormCriterion
        )
    }

    pub fn uses_functions(self) -> bool {
        matches!(self, Theorem::Logconvex | Theorem::Cdj | Theorem::MuBound)
    }

    pub fn uses_exponents(self) -> bool {
        matches!(self, Theorem::Power | Theorem::Squared | Theorem::Ando)
    }

    /// Why a function is (un)acceptable for this checker.
    fn function_requirement(self) -> &'static str {
        match self {
            Theorem::Logconvex => "log-convex",
            Theorem::Cdj => "operator convex",
            Theorem::MuBound => "convex",
            _ => "unused",
        }
    }

    fn function_suits(self, f: &ScalarFunction) -> bool {
        let props = f.properties();
        match self {
            Theorem::Logconvex => props.log_convex,
            Theorem::Cdj => props.operator_convex,
            Theorem::MuBound => props.convex,
            _ => false,
        }
    }

    fn exponent_suits(self, p: f64) -> bool {
        match self {
            Theorem::Power => (-MAX_EXPONENT..=-EXPONENT_MARGIN).contains(&p),
            Theorem::Squared => (2.0..=MAX_EXPONENT).contains(&p),
            Theorem::Ando => (1.0..=MAX_EXPONENT).contains(&p),
            _ => false,
        }
    }

    fn exponent_requirement(self) -> &'static str {
        match self {
            Theorem::Power => "a negative exponent in [-16, 0)",
            Theorem::Squared => "an exponent in [2, 16]",
            Theorem::Ando => "an exponent in [1, 16]",
            _ => "no exponent",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| format!("unknown theorem {s:?}"))
    }
}

/// `--theorem` accepts any single chain or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    All,
    One(Theorem),
}

impl Selector {
    pub fn theorems(self) -> Vec<Theorem> {
        match self {
            Selector::All => Theorem::ALL.to_vec(),
            Selector::One(t) => vec![t],
        }
    }

    pub fn name(self) -> String {
        match self {
            Selector::All => "all".to_string(),
            Selector::One(t) => t.name().to_string(),
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Selector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim() == "all" {
            return Ok(Selector::All);
        }
        Theorem::from_str(s).map(Selector::One).map_err(|_| {
            let names: Vec<&str> = Theorem::ALL.iter().map(|t| t.name()).collect();
            format!("unknown theorem {s:?}; expected one of: all, {}", names.join(", "))
        })
    }
}

impl Serialize for Selector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Selector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Selector::from_str(&raw).map_err(serde::de::Error::custom)
    }
}

/// Inclusive dimension range, written `lo..hi` (or a single number).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

impl DimRange {
    pub fn new(lo: usize, hi: usize) -> std::result::Result<Self, String> {
        if lo == 0 || lo > hi {
            return Err(format!("invalid dimension range {lo}..{hi}"));
        }
        Ok(DimRange { lo, hi })
    }
}

impl Default for DimRange {
    fn default() -> Self {
        DimRange { lo: 2, hi: 8 }
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let parse_one = |part: &str| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad dimension {part:?} in {s:?}"))
        };
        match s.split_once("..") {
            Some((lo, hi)) => DimRange::new(parse_one(lo)?, parse_one(hi)?),
            None => {
                let d = parse_one(s)?;
                DimRange::new(d, d)
            }
        }
    }
}

impl Serialize for DimRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DimRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        DimRange::from_str(&raw).map_err(serde::de::Error::custom)
    }
}

/// Which spectrum bracket the checkers receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketMode {
    /// Bracket at the exact assigned extremes (stresses the bounds hardest).
    Tight,
    /// Bracket at the generation band, leaving slack around the spectrum.
    Band,
}

impl FromStr for BracketMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "tight" => Ok(BracketMode::Tight),
            "band" => Ok(BracketMode::Band),
            other => Err(format!("unknown bracket mode {other:?}; expected tight or band")),
        }
    }
}

fn default_trials() -> usize {
    100
}

fn default_tight_bracket() -> bool {
    true
}

fn default_rtol() -> f64 {
    DEFAULT_RTOL
}

fn default_atol() -> f64 {
    DEFAULT_ATOL
}

fn default_selector() -> Selector {
    Selector::All
}

/// Full campaign description. A JSON file with any subset of these fields is
/// accepted via `--config`; individual flags override file values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub theorem: Selector,
    pub trials: usize,
    pub dims: DimRange,
    /// Generation band; when absent each instance draws its own nominal band.
    pub bounds: Option<SpectrumBounds>,
    /// true: bracket at assigned spectral extremes; false: bracket at the band.
    pub tight_bracket: bool,
    /// Exponents for power/squared (and the exponent r when running ando
    /// alone); empty means per-theorem defaults.
    pub p_values: Vec<f64>,
    /// Function ids for logconvex/cdj/mu-bound; empty means per-theorem
    /// defaults.
    pub functions: Vec<String>,
    /// Map families to rotate through; empty means the canonical five.
    pub map_styles: Vec<MapStyleField>,
    pub seed: u64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            theorem: default_selector(),
            trials: default_trials(),
            dims: DimRange::default(),
            bounds: None,
            tight_bracket: default_tight_bracket(),
            p_values: Vec::new(),
            functions: Vec::new(),
            map_styles: Vec::new(),
            seed: 0,
            rtol: default_rtol(),
            atol: default_atol(),
        }
    }
}

/// MapStyle serialized as its display string ("kraus(3)", "trace", ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapStyleField(pub MapStyle);

impl Serialize for MapStyleField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for MapStyleField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse::<MapStyle>()
            .map(MapStyleField)
            .map_err(serde::de::Error::custom)
    }
}

/// Flag-level overrides collected by the CLI; `None` leaves the config (or
/// default) value in place.
#[derive(Debug, Default)]
pub struct Overrides {
    pub theorem: Option<Selector>,
    pub trials: Option<usize>,
    pub dims: Option<DimRange>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub bracket: Option<BracketMode>,
    pub p_values: Option<Vec<f64>>,
    pub functions: Option<Vec<String>>,
    pub map_styles: Option<Vec<MapStyle>>,
    pub seed: Option<u64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
}

impl CampaignConfig {
    /// Load the optional config file, apply flag overrides, validate.
    pub fn resolve(file: Option<&Path>, ov: Overrides) -> Result<CampaignConfig> {
        let mut cfg = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str::<CampaignConfig>(&text).map_err(|e| {
                    CliError::Config(format!("bad config {}: {e}", path.display()))
                })?
            }
            None => CampaignConfig::default(),
        };

        if let Some(v) = ov.theorem {
            cfg.theorem = v;
        }
        if let Some(v) = ov.trials {
            cfg.trials = v;
        }
        if let Some(v) = ov.dims {
            cfg.dims = v;
        }
        match (ov.lower, ov.upper) {
            (None, None) => {}
            (Some(m), Some(upper)) => {
                let b = SpectrumBounds::new(m, upper)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                cfg.bounds = Some(b);
            }
            _ => {
                return Err(CliError::Config(
                    "--m and --M must be given together".to_string(),
                ))
            }
        }
        if let Some(mode) = ov.bracket {
            cfg.tight_bracket = matches!(mode, BracketMode::Tight);
        }
        if let Some(v) = ov.p_values {
            cfg.p_values = v;
        }
        if let Some(v) = ov.functions {
            cfg.functions = v;
        }
        if let Some(v) = ov.map_styles {
            cfg.map_styles = v.into_iter().map(MapStyleField).collect();
        }
        if let Some(v) = ov.seed {
            cfg.seed = v;
        }
        if let Some(v) = ov.rtol {
            cfg.rtol = v;
        }
        if let Some(v) = ov.atol {
            cfg.atol = v;
        }

        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));

        if self.trials == 0 {
            return fail("trials must be at least 1".to_string());
        }
        if self.dims.lo < 2 || self.dims.hi > MAX_DIM {
            return fail(format!(
                "dimension range {} outside the campaign range 2..{MAX_DIM}",
                self.dims
            ));
        }
        if !(self.rtol.is_finite() && self.rtol >= 0.0) {
            return fail(format!("rtol must be finite and nonnegative, got {}", self.rtol));
        }
        if !(self.atol.is_finite() && self.atol >= 0.0) {
            return fail(format!("atol must be finite and nonnegative, got {}", self.atol));
        }

        for style in &self.map_styles {
            match style.0 {
                MapStyle::Kraus(n) | MapStyle::UnitaryMixture(n) if !(1..=16).contains(&n) => {
                    return fail(format!("map style {} has an unreasonable count", style.0));
                }
                _ => {}
            }
        }

        for p in &self.p_values {
            if !p.is_finite() {
                return fail(format!("exponent {p} is not finite"));
            }
        }

        match self.theorem {
            Selector::One(t) => self.validate_single(t)?,
            Selector::All => self.validate_all()?,
        }
        Ok(())
    }

    fn validate_single(&self, t: Theorem) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));

        if !self.p_values.is_empty() && !t.uses_exponents() {
            return fail(format!("theorem {t} does not take exponents (--p)"));
        }
        for &p in &self.p_values {
            if !t.exponent_suits(p) {
                return fail(format!(
                    "exponent {p} invalid for theorem {t}; expected {}",
                    t.exponent_requirement()
                ));
            }
        }

        if !self.functions.is_empty() && !t.uses_functions() {
            return fail(format!("theorem {t} does not take functions (--f)"));
        }
        for f in self.parsed_functions()? {
            if !t.function_suits(&f) {
                return fail(format!(
                    "function {} is not {} as required by theorem {t}",
                    f.id(),
                    t.function_requirement()
                ));
            }
        }

        if !self.map_styles.is_empty() && !t.uses_map() {
            return fail(format!("theorem {t} does not take map styles"));
        }
        Ok(())
    }

    fn validate_all(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));

        for &p in &self.p_values {
            if !Theorem::Power.exponent_suits(p) && !Theorem::Squared.exponent_suits(p) {
                return fail(format!(
                    "exponent {p} fits neither the power chain (negative) nor the squared chain ([2, 16])"
                ));
            }
        }
        if !self.functions.is_empty() {
            let parsed = self.parsed_functions()?;
            for t in [Theorem::Logconvex, Theorem::Cdj, Theorem::MuBound] {
                if !parsed.iter().any(|f| t.function_suits(f)) {
                    return fail(format!(
                        "none of the supplied functions is {} as required by theorem {t}",
                        t.function_requirement()
                    ));
                }
            }
        }
        Ok(())
    }

    fn parsed_functions(&self) -> Result<Vec<ScalarFunction>> {
        self.functions
            .iter()
            .map(|id| {
                ScalarFunction::parse(id).map_err(|e| CliError::Config(e.to_string()))
            })
            .collect()
    }

    /// Exponent list a theorem actually runs with.
    pub fn exponents_for(&self, t: Theorem) -> Vec<f64> {
        match t {
            Theorem::Power => {
                let user: Vec<f64> = self
                    .p_values
                    .iter()
                    .copied()
                    .filter(|&p| Theorem::Power.exponent_suits(p))
                    .collect();
                if user.is_empty() {
                    DEFAULT_POWER_PS.to_vec()
                } else {
                    user
                }
            }
            Theorem::Squared => {
                let user: Vec<f64> = self
                    .p_values
                    .iter()
                    .copied()
                    .filter(|&p| Theorem::Squared.exponent_suits(p))
                    .collect();
                if user.is_empty() {
                    DEFAULT_SQUARED_PS.to_vec()
                } else {
                    user
                }
            }
            Theorem::Ando => {
                // Under `all`, --p feeds power/squared; ando keeps its cycle.
                let user: Vec<f64> = match self.theorem {
                    Selector::One(Theorem::Ando) => self.p_values.clone(),
                    _ => Vec::new(),
                };
                if user.is_empty() {
                    DEFAULT_ANDO_RS.to_vec()
                } else {
                    user
                }
            }
            _ => Vec::new(),
        }
    }

    /// Function list a theorem actually runs with (already validated).
    pub fn functions_for(&self, t: Theorem) -> Vec<ScalarFunction> {
        let defaults: &[&str] = match t {
            Theorem::Logconvex => &DEFAULT_LOGCONVEX_FS,
            Theorem::Cdj => &DEFAULT_CDJ_FS,
            Theorem::MuBound => &DEFAULT_MU_FS,
            _ => return Vec::new(),
        };
        if self.functions.is_empty() {
            return defaults
                .iter()
                .map(|id| ScalarFunction::parse(id).expect("default function ids parse"))
                .collect();
        }
        let suited: Vec<ScalarFunction> = self
            .parsed_functions()
            .expect("validated before use")
            .into_iter()
            .filter(|f| t.function_suits(f))
            .collect();
        debug_assert!(!suited.is_empty(), "validation guarantees a usable subset");
        suited
    }

    pub fn map_styles_for_run(&self) -> Vec<MapStyle> {
        if self.map_styles.is_empty() {
            DEFAULT_MAP_STYLES.to_vec()
        } else {
            self.map_styles.iter().map(|s| s.0).collect()
        }
    }
}
