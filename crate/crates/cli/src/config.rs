//! Experiment configuration, read from TOML.
//!
//! ```toml
//! output = "aoi.csv"
//!
//! [geometry]
//! altitude_km = 800.0
//! node_zenith_deg = 1.0        # or a [geometry.link_budget] table
//! density_per_km2 = 2e-5
//!
//! [model]
//! update_rate = 1.0
//! delay_s = 1.0
//!
//! [sweep]
//! variable = "update_rate"     # update_rate | density | node_zenith
//! log_range = { start = 0.1, stop = 10.0, points = 9 }   # or grid = [...]
//! densities = [2e-5, 5e-4]
//!
//! [sim]
//! n_arrivals = 1000000
//! seed = 1
//! engine = "all"               # analytic | renewal | orbital | all
//! ```
//!
//! Angles are degrees here and radians everywhere else.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use leo_aoi::analysis::UpdateModel;
use leo_aoi::geometry::{
    max_range_from_budget, DomeBoundary, GeometryConfig, LinkBudget, EARTH_RADIUS_KM,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output: Option<PathBuf>,
    pub geometry: GeometrySection,
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub sim: SimSection,
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
    pub angular_rate_rad_s: f64,
    /// Defaults to 1° when no link budget is given either.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_zenith_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_budget: Option<LinkBudgetSection>,
    pub density_per_km2: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            earth_radius_km: EARTH_RADIUS_KM,
            altitude_km: 800.0,
            angular_rate_rad_s: PI / 3600.0,
            node_zenith_deg: None,
            link_budget: None,
            density_per_km2: 2e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetSection {
    pub tx_power_w: f64,
    pub noise_power_w: f64,
    pub snr_threshold: f64,
    pub pathloss_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub update_rate: f64,
    pub delay_s: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            update_rate: 1.0,
            delay_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    UpdateRate,
    Density,
    NodeZenith,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl LogRange {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let ratio = self.stop / self.start;
        (0..self.points)
            .map(|k| self.start * ratio.powf(k as f64 / (self.points - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_range: Option<LogRange>,
    /// Ignored when `variable = "density"`.
    pub densities: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            variable: SweepVariable::UpdateRate,
            grid: None,
            log_range: None,
            densities: vec![2e-5, 5e-4],
        }
    }
}

pub const DEFAULT_NODE_ZENITH_DEG: f64 = 1.0;

/// μ grid used when neither `grid` nor `log_range` is given.
pub const DEFAULT_UPDATE_RATES: LogRange = LogRange {
    start: 0.1,
    stop: 10.0,
    points: 9,
};

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        match (&self.grid, &self.log_range) {
            (Some(g), _) => g.clone(),
            (None, Some(r)) => r.values(),
            (None, None) => match self.variable {
                SweepVariable::UpdateRate => DEFAULT_UPDATE_RATES.values(),
                SweepVariable::Density => vec![2e-5, 5e-4],
                SweepVariable::NodeZenith => (1..=10).map(|k| 0.5 * k as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Renewal,
    Orbital,
    All,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::All)
    }

    pub fn renewal(self) -> bool {
        matches!(self, Engine::Renewal | Engine::All)
    }

    pub fn orbital(self) -> bool {
        matches!(self, Engine::Orbital | Engine::All)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n_arrivals: u64,
    pub seed: u64,
    pub engine: Engine,
    /// Lengthen simulations to span at least this many off periods on
    /// average (0 = exactly `n_arrivals`).
    pub min_off_periods: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            n_arrivals: 1_000_000,
            seed: 1,
            engine: Engine::All,
            min_off_periods: 40_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Revolutions simulated for the coverage-law tests.
    pub cycles: u64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { cycles: 10_000 }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.to_owned(),
                source,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: PathBuf::from("<config>"),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        if g.node_zenith_deg.is_some() && g.link_budget.is_some() {
            return Err(invalid(
                "geometry",
                "give either node_zenith_deg or link_budget, not both",
            ));
        }
        self.geometry_config(g.density_per_km2)
            .map_err(|e| invalid("geometry", e.to_string()))?;
        self.update_model(self.model.update_rate)
            .map_err(|e| invalid("model", e.to_string()))?;

        let s = &self.sweep;
        if s.grid.is_some() && s.log_range.is_some() {
            return Err(invalid("sweep", "give either grid or log_range, not both"));
        }
        if let Some(r) = &s.log_range {
            if r.points == 0 || !(r.start > 0.0 && r.stop > r.start && r.stop.is_finite()) {
                return Err(invalid(
                    "sweep.log_range",
                    "need 0 < start < stop and points >= 1",
                ));
            }
        }
        check_grid("sweep.grid", &s.values())?;
        if s.variable != SweepVariable::Density {
            check_grid("sweep.densities", &s.densities)?;
        }
        if s.variable == SweepVariable::NodeZenith
            && s.values().iter().any(|&z| !(z > 0.0 && z <= 90.0))
        {
            return Err(invalid(
                "sweep.grid",
                "node zenith angles must lie in (0, 90] degrees",
            ));
        }

        if self.sim.n_arrivals < leo_aoi::renewal_sim::MIN_ARRIVALS {
            return Err(invalid(
                "sim.n_arrivals",
                format!("must be at least {}", leo_aoi::renewal_sim::MIN_ARRIVALS),
            ));
        }
        if self.validate.cycles == 0 {
            return Err(invalid("validate.cycles", "must be at least 1"));
        }
        Ok(())
    }

    /// Geometry for a given density, with the configured dome boundary.
    pub fn geometry_config(&self, density: f64) -> leo_aoi::Result<GeometryConfig> {
        self.geometry_config_at(density, None)
    }

    /// As [`geometry_config`](Self::geometry_config) with the node zenith
    /// angle (degrees) overridden.
    pub fn geometry_config_at(
        &self,
        density: f64,
        node_zenith_deg: Option<f64>,
    ) -> leo_aoi::Result<GeometryConfig> {
        let g = &self.geometry;
        let boundary = match (node_zenith_deg.or(g.node_zenith_deg), g.link_budget) {
            (None, Some(b)) => DomeBoundary::MaxRange(max_range_from_budget(&LinkBudget {
                tx_power: b.tx_power_w,
                noise_power: b.noise_power_w,
                snr_threshold: b.snr_threshold,
                pathloss_exponent: b.pathloss_exponent,
            })?),
            (z, _) => DomeBoundary::NodeZenith(z.unwrap_or(DEFAULT_NODE_ZENITH_DEG).to_radians()),
        };
        let cfg = GeometryConfig {
            earth_radius: g.earth_radius_km,
            altitude: g.altitude_km,
            angular_rate: g.angular_rate_rad_s,
            boundary,
            density,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn update_model(&self, update_rate: f64) -> leo_aoi::Result<UpdateModel> {
        UpdateModel::new(update_rate, self.model.delay_s)
    }
}

fn check_grid(field: &'static str, values: &[f64]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(invalid(field, "values must be finite"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(field, "must be sorted in increasing order"));
    }
    Ok(())
}
