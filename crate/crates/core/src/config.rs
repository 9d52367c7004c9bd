//! TOML run configuration.
//!
//! Every key is optional; missing keys take the reference defaults and
//! unknown keys are rejected. The file structs below mirror the on-disk
//! layout and are converted into the domain types by [`Config::resolve`].
//!
//! ```toml
//! [network]
//! area_width_m = 1000.0
//! area_height_m = 1000.0
//! bs_density_per_km2 = 100.0
//! user_density_per_km2 = 500.0
//! n1 = 0.5
//!
//! [rate]
//! bandwidth_hz = 1e9
//! overhead = 0.2
//! loss_factor = 0.5
//! tx_power_dbm = 30.0
//! noise_figure_db = 7.0
//! noise_psd_dbm_hz = -174.0
//!
//! [antenna.bs]          # and [antenna.user]
//! main_lobe_gain_db = 20.0
//! back_lobe_gain_db = -10.0
//! beamwidth_deg = 5.0
//!
//! [channel]
//! outage_decay_per_m = 0.0333333
//! outage_offset = 5.2
//! los_decay_per_m = 0.0149031
//!
//! [channel.los]         # and [channel.nlos]
//! intercept_db = 69.8
//! slope = 2.0
//! shadowing_sigma_db = 5.8
//!
//! [scheduler]
//! gamma = 0.01
//! rate_unit_bps = 1e9
//!
//! [simulation]
//! slots_per_drop = 10000
//! num_drops = 50
//! base_seed = 1
//! interference = "full"   # or "noise_limited"
//! psi_grid = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
//! psi1 = 0.6
//!
//! [market]
//! n1 = 0.6
//! n2 = 0.4
//! c1 = 0.0
//! c2 = 0.0
//! mu = 1.0
//! omega_hat = 1.0
//! psi1 = 0.63
//! consumer_mass = 1.0
//! undercut_epsilon = 1e-6
//! grid_resolution = 1e-4
//! region_resolution = 0.01
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{AntennaPattern, ChannelParams, InterferenceMode, PathLossModel, RateConfig};
use crate::duopoly::MarketParams;
use crate::error::{Error, Result};
use crate::geometry::Area;
use crate::simengine::{default_psi_grid, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub bs_density_per_km2: f64,
    pub user_density_per_km2: f64,
    pub n1: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        let sim = SimConfig::default();
        NetworkSection {
            area_width_m: sim.area.width_m,
            area_height_m: sim.area.height_m,
            bs_density_per_km2: sim.bs_density_per_km2,
            user_density_per_km2: sim.user_density_per_km2,
            n1: sim.n1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateSection {
    pub bandwidth_hz: f64,
    pub overhead: f64,
    pub loss_factor: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    pub noise_psd_dbm_hz: f64,
}

impl Default for RateSection {
    fn default() -> Self {
        let r = RateConfig::<f64>::default();
        RateSection {
            bandwidth_hz: r.bandwidth_hz,
            overhead: r.overhead,
            loss_factor: r.loss_factor,
            tx_power_dbm: r.tx_power_dbm,
            noise_figure_db: r.noise_figure_db,
            noise_psd_dbm_hz: r.noise_psd_dbm_hz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSection {
    pub main_lobe_gain_db: f64,
    pub back_lobe_gain_db: f64,
    pub beamwidth_deg: f64,
}

impl From<AntennaPattern<f64>> for PatternSection {
    fn from(p: AntennaPattern<f64>) -> Self {
        PatternSection {
            main_lobe_gain_db: p.main_lobe_gain_db,
            back_lobe_gain_db: p.back_lobe_gain_db,
            beamwidth_deg: p.beamwidth_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaSection {
    pub bs: PatternSection,
    pub user: PatternSection,
}

impl Default for AntennaSection {
    fn default() -> Self {
        AntennaSection {
            bs: AntennaPattern::base_station_8x8().into(),
            user: AntennaPattern::user_4x4().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossSection {
    pub intercept_db: f64,
    pub slope: f64,
    pub shadowing_sigma_db: f64,
}

impl From<PathLossModel<f64>> for PathLossSection {
    fn from(m: PathLossModel<f64>) -> Self {
        PathLossSection {
            intercept_db: m.intercept_db,
            slope: m.slope,
            shadowing_sigma_db: m.shadowing_sigma_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub outage_decay_per_m: f64,
    pub outage_offset: f64,
    pub los_decay_per_m: f64,
    pub los: PathLossSection,
    pub nlos: PathLossSection,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = ChannelParams::<f64>::mmwave_73ghz();
        ChannelSection {
            outage_decay_per_m: c.outage_decay_per_m,
            outage_offset: c.outage_offset,
            los_decay_per_m: c.los_decay_per_m,
            los: c.los.into(),
            nlos: c.nlos.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerSection {
    pub gamma: f64,
    pub rate_unit_bps: f64,
}

impl Default for SchedulerSection {
    fn default() -> Self {
        let sim = SimConfig::default();
        SchedulerSection {
            gamma: sim.gamma,
            rate_unit_bps: sim.rate_unit_bps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceSetting {
    Full,
    NoiseLimited,
}

impl From<InterferenceSetting> for InterferenceMode {
    fn from(s: InterferenceSetting) -> Self {
        match s {
            InterferenceSetting::Full => InterferenceMode::Full,
            InterferenceSetting::NoiseLimited => InterferenceMode::NoiseLimited,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub slots_per_drop: u64,
    pub num_drops: u64,
    pub base_seed: u64,
    pub interference: InterferenceSetting,
    pub psi_grid: Vec<f64>,
    /// NSP 1 weight used by single-regime weighted runs.
    pub psi1: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let sim = SimConfig::default();
        SimulationSection {
            slots_per_drop: sim.slots_per_drop as u64,
            num_drops: sim.num_drops as u64,
            base_seed: sim.base_seed,
            interference: InterferenceSetting::Full,
            psi_grid: default_psi_grid(),
            psi1: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketSection {
    pub n1: f64,
    pub n2: f64,
    pub c1: f64,
    pub c2: f64,
    pub mu: f64,
    pub omega_hat: f64,
    pub psi1: f64,
    pub consumer_mass: f64,
    pub undercut_epsilon: f64,
    /// Price step of the backward-induction oracle.
    pub grid_resolution: f64,
    /// Step of the (n1, n2) grid for the mutual-benefit region.
    pub region_resolution: f64,
}

impl Default for MarketSection {
    fn default() -> Self {
        MarketSection {
            n1: 0.6,
            n2: 0.4,
            c1: 0.0,
            c2: 0.0,
            mu: 1.0,
            omega_hat: 1.0,
            psi1: 0.63,
            consumer_mass: 1.0,
            undercut_epsilon: 1e-6,
            grid_resolution: 1e-4,
            region_resolution: 0.01,
        }
    }
}

/// On-disk configuration; every section and key may be omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub rate: RateSection,
    pub antenna: AntennaSection,
    pub channel: ChannelSection,
    pub scheduler: SchedulerSection,
    pub simulation: SimulationSection,
    pub market: MarketSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Canonical TOML text: every key present, fixed order.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }
}

/// Validated configuration in domain types.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub file: ConfigFile,
    pub sim: SimConfig,
    pub sim_psi1: f64,
    pub market: MarketParams<f64>,
    pub grid_resolution: f64,
    pub region_resolution: f64,
}

impl Config {
    pub fn resolve(file: ConfigFile) -> Result<Config> {
        let n = &file.network;
        let s = &file.simulation;
        // TOML integers are signed 64-bit.
        if s.base_seed > i64::MAX as u64 {
            return Err(Error::invalid("simulation.base_seed", "must not exceed 2^63 - 1"));
        }
        let antenna = |p: &PatternSection, name: &str| {
            AntennaPattern::new(p.main_lobe_gain_db, p.back_lobe_gain_db, p.beamwidth_deg)
                .map_err(|e| prefix(e, name))
        };
        let path_loss = |m: &PathLossSection| PathLossModel {
            intercept_db: m.intercept_db,
            slope: m.slope,
            shadowing_sigma_db: m.shadowing_sigma_db,
        };
        let sim = SimConfig {
            area: Area {
                width_m: n.area_width_m,
                height_m: n.area_height_m,
            },
            bs_density_per_km2: n.bs_density_per_km2,
            user_density_per_km2: n.user_density_per_km2,
            n1: n.n1,
            rate: RateConfig {
                bandwidth_hz: file.rate.bandwidth_hz,
                overhead: file.rate.overhead,
                loss_factor: file.rate.loss_factor,
                tx_power_dbm: file.rate.tx_power_dbm,
                noise_figure_db: file.rate.noise_figure_db,
                noise_psd_dbm_hz: file.rate.noise_psd_dbm_hz,
            },
            channel: ChannelParams {
                outage_decay_per_m: file.channel.outage_decay_per_m,
                outage_offset: file.channel.outage_offset,
                los_decay_per_m: file.channel.los_decay_per_m,
                los: path_loss(&file.channel.los),
                nlos: path_loss(&file.channel.nlos),
            },
            bs_antenna: antenna(&file.antenna.bs, "antenna.bs")?,
            user_antenna: antenna(&file.antenna.user, "antenna.user")?,
            gamma: file.scheduler.gamma,
            rate_unit_bps: file.scheduler.rate_unit_bps,
            psi_grid: s.psi_grid.clone(),
            slots_per_drop: s.slots_per_drop as usize,
            num_drops: s.num_drops as usize,
            base_seed: s.base_seed,
            interference: s.interference.into(),
        };
        sim.validate()?;
        if !(0.0..=1.0).contains(&s.psi1) {
            return Err(Error::invalid("simulation.psi1", "must lie in [0, 1]"));
        }
        let m = &file.market;
        let market = MarketParams {
            n1: m.n1,
            n2: m.n2,
            c1: m.c1,
            c2: m.c2,
            mu: m.mu,
            omega_hat: m.omega_hat,
            psi1: m.psi1,
            consumer_mass: m.consumer_mass,
            undercut_epsilon: m.undercut_epsilon,
        };
        market.validate().map_err(|e| prefix(e, "market"))?;
        if !(m.grid_resolution > 0.0 && m.grid_resolution.is_finite()) {
            return Err(Error::invalid("market.grid_resolution", "must be positive"));
        }
        if !(m.region_resolution > 0.0 && m.region_resolution <= 0.5) {
            return Err(Error::invalid("market.region_resolution", "must lie in (0, 0.5]"));
        }
        Ok(Config {
            sim,
            sim_psi1: s.psi1,
            market,
            grid_resolution: m.grid_resolution,
            region_resolution: m.region_resolution,
            file,
        })
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::resolve(ConfigFile::load(path)?)
    }

    pub fn parse(text: &str) -> Result<Config> {
        Config::resolve(ConfigFile::parse(text)?)
    }

    /// SHA-256 of the canonical TOML emission.
    pub fn digest(&self) -> Result<String> {
        Ok(digest_text(&self.file.to_toml()?))
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::resolve(ConfigFile::default()).expect("defaults are valid")
    }
}

pub fn digest_text(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn prefix(e: Error, section: &str) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            reason,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = Config::parse("").unwrap();
        assert_eq!(c.sim, SimConfig::default());
        assert_eq!(c.sim.rate.bandwidth_hz, 1e9);
        assert_eq!(c.sim.rate.overhead, 0.2);
        assert_eq!(c.sim.bs_antenna.beamwidth_deg, 5.0);
        assert_eq!(c.sim.user_antenna.main_lobe_gain_db, 10.0);
        assert_eq!(c.sim.gamma, 0.01);
        assert_eq!(c.market.n1, 0.6);
    }

    #[test]
    fn overhead_out_of_range_is_named() {
        let err = Config::parse("[rate]\noverhead = 1.5\n").unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("overhead"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = Config::parse("[rate]\nbandwith_hz = 1.0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("bandwith_hz"), "{err}");
        assert!(Config::parse("[nonsense]\n").is_err());
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = Config::parse("[rate]\noverhead = = 2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn round_trip_preserves_digest() {
        let c = Config::parse("[network]\nn1 = 0.7\n[simulation]\ninterference = \"noise_limited\"\n").unwrap();
        let text = c.file.to_toml().unwrap();
        let again = Config::parse(&text).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.digest().unwrap(), c.digest().unwrap());
        assert_ne!(c.digest().unwrap(), Config::default().digest().unwrap());
        assert_eq!(again.sim.interference, InterferenceMode::NoiseLimited);
    }

    #[test]
    fn market_constraints() {
        assert!(Config::parse("[market]\nn1 = 0.3\nn2 = 0.4\n").is_err());
        let err = Config::parse("[market]\nmu = 0.0\n").unwrap_err();
        assert!(err.to_string().contains("market.mu"), "{err}");
    }
}
