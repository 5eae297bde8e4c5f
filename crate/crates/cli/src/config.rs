//! Scenario configuration. A TOML file provides defaults; command-line flags
//! override individual keys.

use std::path::Path;

use ace_core::baselines::AdaptivePolicy;
use ace_core::sim::sweep::parse_ratios;
use ace_core::units::{mbps_to_pps, DEFAULT_PACKET_BYTES};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Bundled topology name or topology file path.
    pub topology: String,
    pub pairs: usize,
    /// First seed; `seeds` consecutive seeds are run.
    pub seed: u64,
    pub seeds: u64,
    pub loss: f64,
    pub horizon: usize,
    /// `a:b` list, e.g. `0.2:0.8,0.5:0.5`.
    pub ratios: String,
    pub per_assignment_cost: f64,
    pub traffic: TrafficConfig,
    pub adaptive: AdaptivePolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Rate of every flow at tick 0.
    pub initial_mbps: f64,
    /// Ticks between doublings.
    pub period: usize,
    pub packet_bytes: f64,
    /// `r_f` as a fraction of the flow's peak rate.
    pub recommended_fraction: f64,
    /// Sampling capacity of every switch, overriding the topology file.
    pub capacity_pps: Option<f64>,
    /// Rate of the fixed baseline; the peak rate when unset.
    pub fixed_rate_pps: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: "usnet".into(),
            pairs: 10,
            seed: 1,
            seeds: 1,
            loss: 0.01,
            horizon: 60,
            ratios: "0.2:0.8,0.5:0.5,0.8:0.2".into(),
            per_assignment_cost: 10.0,
            traffic: TrafficConfig::default(),
            adaptive: AdaptivePolicy::default(),
        }
    }
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            initial_mbps: 1.0,
            period: 10,
            packet_bytes: DEFAULT_PACKET_BYTES,
            recommended_fraction: 0.5,
            capacity_pps: Some(10_000.0),
            fixed_rate_pps: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn ratio_list(&self) -> Result<Vec<(f64, f64)>, CliError> {
        parse_ratios(&self.ratios).map_err(CliError::Usage)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds.max(1)).map(|i| self.seed.wrapping_add(i)).collect()
    }

    pub fn initial_pps(&self) -> f64 {
        mbps_to_pps(self.traffic.initial_mbps, self.traffic.packet_bytes)
    }

    /// Rate reached in the last tick of the doubling schedule.
    pub fn peak_pps(&self) -> f64 {
        let doublings = self.horizon.saturating_sub(1) / self.traffic.period.max(1);
        self.initial_pps() * 2f64.powi(doublings as i32)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.pairs == 0 {
            return bad("pairs must be positive".into());
        }
        if self.horizon == 0 || self.traffic.period == 0 {
            return bad("horizon and traffic.period must be positive".into());
        }
        if !(0.0..1.0).contains(&self.loss) {
            return bad(format!("loss {} outside [0, 1)", self.loss));
        }
        if !(self.traffic.initial_mbps > 0.0 && self.traffic.packet_bytes > 0.0) {
            return bad("traffic rates and packet size must be positive".into());
        }
        if !(self.traffic.recommended_fraction > 0.0 && self.traffic.recommended_fraction <= 1.0) {
            return bad("recommended_fraction must lie in (0, 1]".into());
        }
        self.adaptive.validate().map_err(CliError::Usage)?;
        self.ratio_list()?;
        Ok(())
    }
}
