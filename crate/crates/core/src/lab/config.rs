//! TOML experiment configuration. Every section is optional except `model`.
//! Unknown keys are rejected.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::presets::preset;
use crate::algebra::{MultiIndex, Polynomial};
use crate::basis::{CenterPath, CoefficientField, ExpansionScheme, PolynomialModel};
use crate::engine::{ExpansionPlan, FrozenPoint};
use crate::error::{Error, Result};
use crate::oracles::McSettings;
use crate::payoff::Payoff;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub payoff: PayoffConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A preset name or inline polynomial coefficients.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub preset: Option<String>,
    pub dim: Option<usize>,
    pub ellipticity: Option<f64>,
    #[serde(default)]
    pub coefficients: Vec<CoefficientConfig>,
}

/// `a_α(x) = Σ c · x^e` for `terms = [[c, e_1, .., e_d], ..]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub alpha: Vec<u32>,
    pub terms: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    #[default]
    Taylor,
    EnhancedTaylor,
    TimeTaylor,
    Hermite,
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FrozenConfig {
    #[default]
    Diagonal,
    Fixed,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default)]
    pub kind: SchemeKind,
    /// Expansion orders `N` to evaluate.
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    /// Expansion point for `frozen = "fixed"`; the first evaluation point otherwise.
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub frozen: FrozenConfig,
    /// `M_1..M_N` for the enhanced Taylor scheme.
    pub groups: Option<Vec<u32>>,
    /// Row-major Hermite weight covariance; identity by default.
    pub hermite_weight: Option<Vec<f64>>,
}

fn default_orders() -> Vec<usize> {
    vec![0, 1, 2]
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: SchemeKind::Taylor,
            orders: default_orders(),
            center: None,
            frozen: FrozenConfig::Diagonal,
            groups: None,
            hermite_weight: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    #[default]
    Bump,
    Call,
    Put,
    Digital,
    Linear,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PayoffConfig {
    #[serde(default)]
    pub kind: PayoffKind,
    #[serde(default = "one")]
    pub strike: f64,
    #[serde(default = "yes")]
    pub log_price: bool,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "quarter")]
    pub width: f64,
    /// Declared class `k` with `φ ∈ C_b^{k−1,1}`; the catalog value by default.
    pub smoothness: Option<u8>,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn quarter() -> f64 {
    0.25
}

impl Default for PayoffConfig {
    fn default() -> Self {
        PayoffConfig {
            kind: PayoffKind::Bump,
            strike: 1.0,
            log_price: true,
            center: 0.0,
            width: 0.25,
            smoothness: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    #[serde(default)]
    pub t: f64,
    /// Evaluation points; the preset spot when empty.
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    /// Horizons `T − t`.
    #[serde(default = "default_horizons")]
    pub horizons: Vec<f64>,
    /// Bootstrap step counts `m`; empty disables bootstrapping.
    #[serde(default)]
    pub bootstrap_steps: Vec<usize>,
    /// Grid nodes per axis for bootstrapping.
    #[serde(default = "default_bootstrap_points")]
    pub bootstrap_points: usize,
    /// Horizon `T − t` of the bootstrap sweep.
    #[serde(default = "one")]
    pub bootstrap_horizon: f64,
}

fn default_horizons() -> Vec<f64> {
    vec![0.05, 0.1, 0.2, 0.4, 0.8]
}
fn default_bootstrap_points() -> usize {
    801
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            t: 0.0,
            points: Vec::new(),
            horizons: default_horizons(),
            bootstrap_steps: Vec::new(),
            bootstrap_points: default_bootstrap_points(),
            bootstrap_horizon: 1.0,
        }
    }
}

/// Lattice for `run_density`: offsets in leading-order standard deviations
/// about the first evaluation point.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default = "default_x_offsets")]
    pub x_offsets: Vec<f64>,
    #[serde(default = "default_y_offsets")]
    pub y_offsets: Vec<f64>,
    /// Mollifier width in coarse grid cells.
    #[serde(default = "default_mollifier")]
    pub mollifier_cells: f64,
    /// `ε` in the bound `Γ^{M+ε}`.
    #[serde(default = "one")]
    pub epsilon: f64,
}

fn default_x_offsets() -> Vec<f64> {
    (0..9).map(|i| 0.5 * (i as f64 - 4.0)).collect()
}
fn default_y_offsets() -> Vec<f64> {
    (0..9).map(|i| i as f64 - 4.0).collect()
}
fn default_mollifier() -> f64 {
    4.0
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            x_offsets: default_x_offsets(),
            y_offsets: default_y_offsets(),
            mollifier_cells: default_mollifier(),
            epsilon: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    #[default]
    Fd,
    Mc,
    Exact,
}

impl std::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd" => Ok(OracleKind::Fd),
            "mc" => Ok(OracleKind::Mc),
            "exact" => Ok(OracleKind::Exact),
            other => Err(Error::Config(format!("unknown oracle {other:?}; expected fd, mc or exact"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub kind: OracleKind,
    /// Coarsest FD nodes per axis; a dimension-dependent default when absent.
    pub fd_points: Option<usize>,
    pub fd_steps: Option<usize>,
    pub fd_richardson_levels: Option<usize>,
    #[serde(default = "default_fd_width")]
    pub fd_width_sd: f64,
    #[serde(default = "default_mc_paths")]
    pub mc_paths: usize,
    #[serde(default = "default_mc_steps")]
    pub mc_steps: usize,
    #[serde(default = "yes")]
    pub mc_antithetic: bool,
    #[serde(default = "yes")]
    pub mc_richardson: bool,
}

fn default_fd_width() -> f64 {
    crate::oracles::DEFAULT_WIDTH_SD
}
fn default_mc_paths() -> usize {
    1_000_000
}
fn default_mc_steps() -> usize {
    50
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            kind: OracleKind::Fd,
            fd_points: None,
            fd_steps: None,
            fd_richardson_levels: None,
            fd_width_sd: default_fd_width(),
            mc_paths: default_mc_paths(),
            mc_steps: default_mc_steps(),
            mc_antithetic: true,
            mc_richardson: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Allowed shortfall of a fitted slope below its theoretical rate.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Rows with `|error| < floor_factor × oracle error` are excluded from fits.
    #[serde(default = "default_floor")]
    pub floor_factor: f64,
}

fn default_tolerance() -> f64 {
    0.3
}
fn default_floor() -> f64 {
    10.0
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tolerance: default_tolerance(),
            floor_factor: default_floor(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

/// A validated configuration with its model, payoff and points resolved.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub field: CoefficientField,
    pub payoff: Payoff,
    /// Declared smoothness class `k`.
    pub smoothness: u8,
    pub points: Vec<Vec<f64>>,
    /// Non-fatal remarks, e.g. a payoff rougher than the rate assumes.
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// Parses TOML; syntax errors carry line and column.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// Checks every field and resolves the model, payoff and points.
    pub fn build(&self) -> Result<Experiment> {
        let bad = |field: &str, msg: String| Error::Config(format!("{field}: {msg}"));
        let mut warnings = Vec::new();
        let (field, spot) = self.model_field()?;
        let d = field.dim();

        let payoff = self.payoff_value();
        let smoothness = self.payoff.smoothness.unwrap_or_else(|| payoff.smoothness());
        if smoothness > 2 {
            return Err(bad("payoff.smoothness", format!("k must be 0, 1 or 2, got {smoothness}")));
        }
        if smoothness > payoff.smoothness() {
            return Err(bad(
                "payoff.smoothness",
                format!("declared k = {smoothness} exceeds the payoff's class {}", payoff.smoothness()),
            ));
        }
        if matches!(self.payoff.kind, PayoffKind::Call | PayoffKind::Put) {
            warnings.push(
                "call/put payoffs are unbounded with a Lipschitz kink; the bounded-derivative hypothesis \
                 of the rate estimate is relaxed and slopes are reported without asserting a class"
                    .into(),
            );
        }
        if !(self.payoff.width > 0.0) {
            return Err(bad("payoff.width", "must be positive".into()));
        }
        if self.payoff.log_price && !(self.payoff.strike > 0.0) {
            return Err(bad("payoff.strike", "log-price strikes must be positive".into()));
        }

        if self.scheme.orders.is_empty() {
            return Err(bad("scheme.orders", "at least one order is required".into()));
        }
        if let Some(n) = self.scheme.orders.iter().find(|n| **n > 6) {
            return Err(bad("scheme.orders", format!("orders above 6 are not supported, got {n}")));
        }

        let points = if self.evaluation.points.is_empty() {
            vec![spot]
        } else {
            self.evaluation.points.clone()
        };
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(bad(
                    &format!("evaluation.points[{i}]"),
                    format!("expected {d} coordinates, got {}", p.len()),
                ));
            }
        }
        if !self.evaluation.t.is_finite() {
            return Err(bad("evaluation.t", "must be finite".into()));
        }
        if self.evaluation.horizons.is_empty() || self.evaluation.horizons.iter().any(|h| !(*h > 0.0)) {
            return Err(bad("evaluation.horizons", "need at least one positive horizon".into()));
        }
        if !self.evaluation.bootstrap_steps.is_empty() {
            if self.scheme.orders.contains(&0) {
                return Err(bad("scheme.orders", "bootstrap sweeps require N ≥ 1".into()));
            }
            if self.evaluation.bootstrap_steps.contains(&0) {
                return Err(bad("evaluation.bootstrap_steps", "step counts must be positive".into()));
            }
            if !(self.evaluation.bootstrap_horizon > 0.0) {
                return Err(bad("evaluation.bootstrap_horizon", "must be positive".into()));
            }
            if self.evaluation.bootstrap_points < 4 {
                return Err(bad("evaluation.bootstrap_points", "need at least 4".into()));
            }
            if d > 2 {
                return Err(bad("model", "bootstrapping supports d ≤ 2".into()));
            }
        }
        if self.oracle.kind == OracleKind::Fd && d > 2 {
            return Err(bad("oracle.kind", "finite differences support d ≤ 2".into()));
        }
        if self.oracle.kind == OracleKind::Mc && (self.oracle.mc_paths < 2 || self.oracle.mc_steps == 0) {
            return Err(bad("oracle", "Monte Carlo needs ≥ 2 paths and ≥ 1 step".into()));
        }
        if self.oracle.mc_richardson && self.oracle.mc_steps % 2 == 1 {
            return Err(bad("oracle.mc_steps", "must be even with mc_richardson".into()));
        }
        if !(self.fit.tolerance >= 0.0) || !(self.fit.floor_factor >= 0.0) {
            return Err(bad("fit", "tolerance and floor_factor must be non-negative".into()));
        }
        if !(self.density.mollifier_cells > 0.0) || !(self.density.epsilon > 0.0) {
            return Err(bad("density", "mollifier_cells and epsilon must be positive".into()));
        }

        let experiment = Experiment {
            config: self.clone(),
            field,
            payoff,
            smoothness,
            points,
            warnings,
        };
        // Catch scheme errors (orders, groups, derivative order) up front.
        for &n in &self.scheme.orders {
            experiment.plan(n, &experiment.points[0])?;
        }
        Ok(experiment)
    }

    fn model_field(&self) -> Result<(CoefficientField, Vec<f64>)> {
        let m = &self.model;
        match (&m.preset, m.coefficients.is_empty()) {
            (Some(name), true) => {
                if m.dim.is_some() || m.ellipticity.is_some() {
                    return Err(Error::Config(
                        "model: dim and ellipticity only apply to inline coefficients".into(),
                    ));
                }
                let p = preset(name).map_err(|e| Error::Config(format!("model.preset: {e}")))?;
                Ok((p.field, p.spot))
            }
            (None, false) => {
                let d = m
                    .dim
                    .ok_or_else(|| Error::Config("model.dim: required for inline coefficients".into()))?;
                let mut coefficients = Vec::new();
                for (i, c) in m.coefficients.iter().enumerate() {
                    let at = format!("model.coefficients[{i}]");
                    if c.alpha.len() != d || c.alpha.iter().sum::<u32>() > 2 {
                        return Err(Error::Config(format!("{at}.alpha: need {d} entries with |α| ≤ 2")));
                    }
                    let mut terms = Vec::new();
                    for (j, term) in c.terms.iter().enumerate() {
                        if term.len() != d + 1 || term[1..].iter().any(|e| *e < 0.0 || e.fract() != 0.0) {
                            return Err(Error::Config(format!(
                                "{at}.terms[{j}]: expected [coefficient, {d} non-negative integer exponents]"
                            )));
                        }
                        terms.push((MultiIndex::new(term[1..].iter().map(|e| *e as u32)), term[0]));
                    }
                    let p = Polynomial::from_terms(d, terms).map_err(|e| Error::Config(format!("{at}: {e}")))?;
                    coefficients.push((MultiIndex::from(c.alpha.clone()), p));
                }
                let model = PolynomialModel::new(d, coefficients)?;
                let ellipticity = m.ellipticity.unwrap_or(100.0);
                let field = CoefficientField::new(model, 16, ellipticity)
                    .map_err(|e| Error::Config(format!("model: {e}")))?;
                Ok((field, vec![0.0; d]))
            }
            _ => Err(Error::Config(
                "model: give exactly one of `preset` or inline `coefficients`".into(),
            )),
        }
    }

    fn payoff_value(&self) -> Payoff {
        let p = &self.payoff;
        match p.kind {
            PayoffKind::Bump => Payoff::GaussianBump {
                center: p.center,
                width: p.width,
            },
            PayoffKind::Call => Payoff::Call {
                strike: p.strike,
                log_price: p.log_price,
            },
            PayoffKind::Put => Payoff::Put {
                strike: p.strike,
                log_price: p.log_price,
            },
            PayoffKind::Digital => Payoff::Digital {
                strike: p.strike,
                log_price: p.log_price,
            },
            PayoffKind::Linear => Payoff::Linear,
        }
    }
}

impl Experiment {
    /// The expansion plan of order `n`; `x` supplies the default center.
    pub fn plan(&self, n: usize, x: &[f64]) -> Result<ExpansionPlan> {
        let cfg = &self.config.scheme;
        let d = self.field.dim();
        let center = cfg.center.clone().unwrap_or_else(|| x.to_vec());
        if center.len() != d {
            return Err(Error::Config(format!("scheme.center: expected {d} coordinates")));
        }
        let scheme = match cfg.kind {
            SchemeKind::Taylor => ExpansionScheme::taylor(center),
            SchemeKind::EnhancedTaylor => {
                let groups = cfg
                    .groups
                    .clone()
                    .unwrap_or_else(|| (1..=n as u32).collect());
                if groups.len() < n {
                    return Err(Error::Config(format!("scheme.groups: need at least {n} entries")));
                }
                ExpansionScheme::EnhancedTaylor {
                    center,
                    groups: groups[..n].to_vec(),
                }
            }
            SchemeKind::TimeTaylor => ExpansionScheme::TimeTaylor {
                path: CenterPath::OrderZeroMean {
                    start: center,
                    t0: self.config.evaluation.t,
                },
            },
            SchemeKind::Hermite => {
                let weight = match &cfg.hermite_weight {
                    Some(w) if w.len() == d * d => DMatrix::from_row_slice(d, d, w),
                    Some(_) => {
                        return Err(Error::Config(format!("scheme.hermite_weight: need {} entries", d * d)))
                    }
                    None => DMatrix::identity(d, d),
                };
                ExpansionScheme::Hermite { center, weight }
            }
        };
        let frozen = match cfg.frozen {
            FrozenConfig::Diagonal => FrozenPoint::Diagonal,
            FrozenConfig::Fixed => FrozenPoint::Fixed,
        };
        ExpansionPlan::new(self.field.clone(), scheme, n)
            .map(|p| p.with_frozen_point(frozen))
            .map_err(|e| Error::Config(format!("scheme: {e}")))
    }

    pub(crate) fn mc_settings(&self) -> McSettings {
        let o = &self.config.oracle;
        McSettings {
            paths: o.mc_paths,
            steps: o.mc_steps,
            seed: self.config.output.seed,
            antithetic: o.mc_antithetic,
            richardson: o.mc_richardson,
            ..McSettings::default()
        }
    }
}
