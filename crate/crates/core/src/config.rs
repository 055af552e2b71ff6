//! TOML run configuration.
//!
//! ```toml
//! preset = "hibiscus"     # optional; supplies [family] and [plan] defaults
//! workers = 0             # 0 = one per core
//!
//! [family]                # kind = expr | kac | lucas | cubic | explicit
//! kind = "expr"
//! degree = 2
//! terms = { "2" = "1", "0" = "t1^2 + i*t2" }
//!
//! [plan]                  # fields override the preset's plan one by one
//! count = 10000
//! seed = 7
//! domain1 = { kind = "circle", radius = 1.0 }
//! domain2 = { kind = "segment", z0 = [-1.0, 0.0], z1 = [1.0, 0.0] }
//!
//! [grid]
//! width = 1024
//! height = 1024
//! margin_fraction = 0.05
//! # bounds = { re_min = -2.0, re_max = 2.0, im_min = -2.0, im_max = 2.0 }
//!
//! [solver]
//! engine = "companion"    # or "aberth"
//! significand_bits = 53   # 53 or 106 (aberth)
//!
//! [render]
//! mode = "smooth_glow"    # pure_pixel | smooth_glow | smoky_bloom
//! palette = "ember"
//!
//! [output]
//! image = "out.png"       # relative paths resolve against the config file
//! grid_dump = "out.polygrid"
//! roots_csv = "roots.csv"
//! ```
//!
//! Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{Bounds, DEFAULT_MARGIN_FRACTION};
use crate::expr::CoefficientExpr;
use crate::family::{preset, ExprFamily, FamilySpec};
use crate::poly::Polynomial;
use crate::render::RenderSpec;
use crate::sampling::{DomainError, SamplingDomain, SamplingPlan};
use crate::solver::{Engine, PrecisionConfig, DEFAULT_DEGREE_CAP};

pub const MIN_GRID_SIZE: usize = 16;
pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const DEFAULT_CSV_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config error at `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl ToString) -> Self {
        Self {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawCoeff {
    Real(f64),
    Complex([f64; 2]),
}

impl RawCoeff {
    fn value(&self) -> Complex64 {
        match *self {
            RawCoeff::Real(x) => Complex64::new(x, 0.0),
            RawCoeff::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn from_value(z: Complex64) -> Self {
        if z.im == 0.0 {
            RawCoeff::Real(z.re)
        } else {
            RawCoeff::Complex([z.re, z.im])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RawFamily {
    Expr {
        degree: usize,
        terms: BTreeMap<String, String>,
    },
    Kac {
        degree: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Lucas {
        degree: usize,
    },
    Cubic {},
    /// Ascending coefficients `[a0, a1, ..., an]`; entries are numbers or `[re, im]`.
    Explicit {
        polynomials: Vec<Vec<RawCoeff>>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPlan {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain1: Option<SamplingDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain2: Option<SamplingDomain>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub margin_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: DEFAULT_GRID_SIZE,
            height: DEFAULT_GRID_SIZE,
            margin_fraction: DEFAULT_MARGIN_FRACTION,
            bounds: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub engine: Engine,
    pub significand_bits: u32,
    pub max_iterations: usize,
    pub tolerance_factor: f64,
    pub extended_evaluation: bool,
    pub degree_cap: usize,
    /// Newton-polish every root set after solving.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = PrecisionConfig::default();
        Self {
            engine: Engine::CompanionQr,
            significand_bits: p.significand_bits,
            max_iterations: p.max_iterations,
            tolerance_factor: p.tolerance_factor,
            extended_evaluation: p.extended_evaluation,
            degree_cap: DEFAULT_DEGREE_CAP,
            polish: false,
        }
    }
}

impl SolverConfig {
    pub fn precision(&self) -> PrecisionConfig {
        PrecisionConfig {
            significand_bits: self.significand_bits,
            max_iterations: self.max_iterations,
            tolerance_factor: self.tolerance_factor,
            extended_evaluation: self.extended_evaluation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub image: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_dump: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roots_csv: Option<PathBuf>,
    pub csv_cap: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            image: Some(PathBuf::from("polynomiogram.png")),
            grid_dump: None,
            roots_csv: None,
            csv_cap: DEFAULT_CSV_CAP,
        }
    }
}

/// The file as written, before presets are expanded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default)]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<RawFamily>,
    #[serde(default)]
    pub plan: RawPlan,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub render: RenderSpec,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub family: FamilySpec,
    /// For explicit families the count is the number of polynomials and the
    /// domains are unused.
    pub plan: SamplingPlan,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub render: RenderSpec,
    pub output: OutputConfig,
    pub workers: usize,
}

fn raw_family(spec: &FamilySpec) -> RawFamily {
    match spec {
        FamilySpec::Expr(f) => RawFamily::Expr {
            degree: f.degree(),
            terms: f.terms().iter().map(|(k, e)| (k.to_string(), e.source().to_string())).collect(),
        },
        FamilySpec::Kac { degree, seed } => RawFamily::Kac {
            degree: *degree,
            seed: Some(*seed),
        },
        FamilySpec::Lucas { degree } => RawFamily::Lucas { degree: *degree },
        FamilySpec::Cubic => RawFamily::Cubic {},
        FamilySpec::Explicit(polys) => RawFamily::Explicit {
            polynomials: polys
                .iter()
                .map(|p| p.coeffs().iter().map(|&z| RawCoeff::from_value(z)).collect())
                .collect(),
        },
    }
}

fn build_family(raw: &RawFamily, plan_seed: u64) -> Result<FamilySpec, ConfigError> {
    let spec = match raw {
        RawFamily::Expr { degree, terms } => {
            let mut map = BTreeMap::new();
            for (k, src) in terms {
                let key = format!("family.terms.{k}");
                let exp: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::new(&key, "term keys must be nonnegative integers"))?;
                let e = CoefficientExpr::parse(src).map_err(|e| ConfigError::new(&key, e))?;
                map.insert(exp, e);
            }
            FamilySpec::Expr(ExprFamily::new(*degree, map).map_err(|e| ConfigError::new("family.terms", e))?)
        }
        RawFamily::Kac { degree, seed } => FamilySpec::Kac {
            degree: *degree,
            seed: seed.unwrap_or(plan_seed),
        },
        RawFamily::Lucas { degree } => FamilySpec::Lucas { degree: *degree },
        RawFamily::Cubic {} => FamilySpec::Cubic,
        RawFamily::Explicit { polynomials } => {
            let mut polys = Vec::new();
            for (i, coeffs) in polynomials.iter().enumerate() {
                let c: Vec<Complex64> = coeffs.iter().map(RawCoeff::value).collect();
                let p = Polynomial::new(c).map_err(|e| ConfigError::new(format!("family.polynomials[{i}]"), e))?;
                polys.push(p);
            }
            FamilySpec::Explicit(polys)
        }
    };
    let key = match raw {
        RawFamily::Explicit { .. } => "family.polynomials",
        _ => "family.degree",
    };
    spec.validate().map_err(|e| ConfigError::new(key, e))?;
    Ok(spec)
}

fn domain_key(e: &DomainError, which: &str) -> String {
    match e {
        DomainError::Count => "plan.count".into(),
        _ => format!("plan.{which}"),
    }
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.trim().to_string())
                .unwrap_or_default();
            ConfigError::new(key, msg)
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The raw config with the preset's family and plan spelled out.
    pub fn expanded(&self) -> Result<RawConfig, ConfigError> {
        let mut out = self.clone();
        if let Some(name) = &self.preset {
            let p = preset(name).map_err(|e| ConfigError::new("preset", e))?;
            if out.family.is_none() {
                out.family = Some(raw_family(&p.family));
            }
            let plan = &mut out.plan;
            plan.count.get_or_insert(p.plan.count);
            plan.seed.get_or_insert(p.plan.seed);
            plan.domain1.get_or_insert(p.plan.domain1);
            plan.domain2.get_or_insert(p.plan.domain2);
            out.preset = None;
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<RunConfig, ConfigError> {
        let raw = self.expanded()?;
        let family_raw = raw.family.as_ref().ok_or_else(|| ConfigError::new("family", "missing (or set `preset`)"))?;
        let explicit = matches!(family_raw, RawFamily::Explicit { .. });
        let seed = raw.plan.seed.unwrap_or(0);
        let family = build_family(family_raw, seed)?;

        let unit = SamplingDomain::Circle { radius: 1.0 };
        let plan = if explicit {
            let FamilySpec::Explicit(polys) = &family else { unreachable!() };
            SamplingPlan {
                domain1: raw.plan.domain1.unwrap_or(unit),
                domain2: raw.plan.domain2.unwrap_or(unit),
                count: polys.len() as u64,
                seed,
            }
        } else {
            SamplingPlan {
                domain1: raw.plan.domain1.ok_or_else(|| ConfigError::new("plan.domain1", "missing"))?,
                domain2: raw.plan.domain2.ok_or_else(|| ConfigError::new("plan.domain2", "missing"))?,
                count: raw.plan.count.ok_or_else(|| ConfigError::new("plan.count", "missing"))?,
                seed,
            }
        };
        if plan.count == 0 {
            return Err(ConfigError::new("plan.count", "must be at least 1"));
        }
        plan.domain1.validate().map_err(|e| ConfigError::new(domain_key(&e, "domain1"), e))?;
        plan.domain2.validate().map_err(|e| ConfigError::new(domain_key(&e, "domain2"), e))?;

        let g = &raw.grid;
        if g.width < MIN_GRID_SIZE {
            return Err(ConfigError::new("grid.width", format!("must be at least {MIN_GRID_SIZE}")));
        }
        if g.height < MIN_GRID_SIZE {
            return Err(ConfigError::new("grid.height", format!("must be at least {MIN_GRID_SIZE}")));
        }
        if !(g.margin_fraction.is_finite() && g.margin_fraction >= 0.0) {
            return Err(ConfigError::new("grid.margin_fraction", "must be finite and nonnegative"));
        }
        let mut grid = g.clone();
        if let Some(b) = g.bounds {
            grid.bounds = Some(Bounds::new(b.re_min, b.re_max, b.im_min, b.im_max).map_err(|e| ConfigError::new("grid.bounds", e))?);
        }

        let s = &raw.solver;
        if !matches!(s.significand_bits, 53 | 106) {
            return Err(ConfigError::new("solver.significand_bits", "supported values are 53 and 106"));
        }
        if s.max_iterations == 0 {
            return Err(ConfigError::new("solver.max_iterations", "must be at least 1"));
        }
        if !(s.tolerance_factor.is_finite() && s.tolerance_factor > 0.0) {
            return Err(ConfigError::new("solver.tolerance_factor", "must be positive"));
        }
        if s.degree_cap == 0 {
            return Err(ConfigError::new("solver.degree_cap", "must be at least 1"));
        }
        if s.engine == Engine::CompanionQr && family.degree() > s.degree_cap {
            return Err(ConfigError::new(
                "solver.degree_cap",
                format!("family degree {} exceeds the cap {}", family.degree(), s.degree_cap),
            ));
        }
        raw.render.validate().map_err(|e| ConfigError::new("render", e))?;

        Ok(RunConfig {
            family,
            plan,
            grid,
            solver: s.clone(),
            render: raw.render.clone(),
            output: raw.output.clone(),
            workers: raw.workers,
        })
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        RawConfig::from_toml(text)?.build()
    }

    /// Reads a config file; relative output paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_path_buf(), e))?;
        let mut cfg = Self::from_toml(&text).map_err(LoadError::Config)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        cfg.output.resolve_against(dir);
        Ok(cfg)
    }

    /// Config for a named preset with default grid, solver and render settings.
    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        RawConfig {
            preset: Some(name.to_string()),
            ..RawConfig::default()
        }
        .build()
    }
}

impl OutputConfig {
    pub fn resolve_against(&mut self, dir: &Path) {
        for p in [&mut self.image, &mut self.grid_dump, &mut self.roots_csv].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Config(ConfigError),
}

/// Equivalent full config text for a preset.
pub fn preset_config_text(name: &str) -> Result<String, ConfigError> {
    let raw = RawConfig {
        preset: Some(name.to_string()),
        ..RawConfig::default()
    }
    .expanded()?;
    Ok(raw.to_toml())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::PRESET_NAMES;

    const EXPR: &str = r#"
workers = 2
[family]
kind = "expr"
degree = 2
terms = { "2" = "1", "0" = "t1^2 + i*t2" }
[plan]
count = 10
seed = 3
domain1 = { kind = "circle", radius = 1.0 }
domain2 = { kind = "segment", z0 = [-1, 0], z1 = [1, 0] }
[grid]
width = 32
height = 32
"#;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::from_toml(EXPR).unwrap();
        assert_eq!(cfg.plan.count, 10);
        assert_eq!(cfg.family.degree(), 2);
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.solver.engine, Engine::CompanionQr);
        assert_eq!(cfg.render, RenderSpec::default());
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::from_toml(&EXPR.replace("count = 10", "count = 0")).unwrap_err();
        assert_eq!(e.key, "plan.count");
        let e = RunConfig::from_toml(&EXPR.replace("width = 32", "width = 8")).unwrap_err();
        assert_eq!(e.key, "grid.width");
        let e = RunConfig::from_toml(&EXPR.replace("\"0\" = \"t1^2 + i*t2\"", "\"0\" = \"2t1\"")).unwrap_err();
        assert_eq!(e.key, "family.terms.0");
        let e = RunConfig::from_toml(&EXPR.replace("radius = 1.0", "radius = -1.0")).unwrap_err();
        assert_eq!(e.key, "plan.domain1");
        let e = RunConfig::from_toml(&EXPR.replace("seed = 3", "seed = 3\ncont = 4")).unwrap_err();
        assert!(e.key.contains("cont") || e.message.contains("cont"), "{e}");
        let e = RunConfig::from_toml(&EXPR.replace("height = 32", "height = 32\nbogus = 1")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
    }

    #[test]
    fn preset_overrides() {
        let cfg = RunConfig::from_toml("preset = \"hibiscus\"\n[plan]\ncount = 500\n").unwrap();
        assert_eq!(cfg.plan.count, 500);
        assert_eq!(cfg.family.degree(), 28);
        assert_eq!(cfg.plan.domain1, SamplingDomain::Annulus { r_in: 0.5, r_out: 1.0 });
        assert_eq!(
            RunConfig::from_toml("preset = \"nope\"").unwrap_err().key,
            "preset"
        );
    }

    #[test]
    fn preset_text_round_trips() {
        for name in PRESET_NAMES {
            let text = preset_config_text(name).unwrap();
            let a = RunConfig::from_toml(&text).unwrap();
            let b = RunConfig::from_preset(name).unwrap();
            assert_eq!(a, b, "{name}:\n{text}");
        }
    }

    #[test]
    fn explicit_family() {
        let cfg = RunConfig::from_toml(
            "[family]\nkind = \"explicit\"\npolynomials = [[1, 0, 1], [[0, 1], 2.5]]\n",
        )
        .unwrap();
        assert_eq!(cfg.plan.count, 2);
        let e = RunConfig::from_toml("[family]\nkind = \"explicit\"\npolynomials = [[1, 0]]\n").unwrap_err();
        assert_eq!(e.key, "family.polynomials[0]");
    }

    #[test]
    fn solver_validation() {
        let e = RunConfig::from_toml(&format!("{EXPR}\n[solver]\nsignificand_bits = 64\n")).unwrap_err();
        assert_eq!(e.key, "solver.significand_bits");
        let cfg = RunConfig::from_toml(&format!("{EXPR}\n[solver]\nengine = \"aberth\"\nsignificand_bits = 106\n")).unwrap();
        assert_eq!(cfg.solver.precision().significand_bits, 106);
    }
}
