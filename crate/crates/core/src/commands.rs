//! Subcommands behind the CLI: each renders a result file from a resolved
//! configuration and writes a manifest next to it.
//!
//! Result files contain data only, so two runs with the same manifest are
//! byte-identical. The manifest (`<out>.manifest.json`) holds the full
//! canonical configuration, its digest, the subcommand parameters and a
//! creation timestamp; [`replay`] regenerates the result from it.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{digest_text, Config, ConfigFile, InterferenceSetting};
use crate::duopoly::{self, GridEquilibrium, MarketOutcome, MarketParams};
use crate::error::{Error, Result};
use crate::scheduler::WeightRegime;
use crate::simengine::{self, SimMetrics};
use crate::stats::Estimate;
use crate::SharingRegime;

/// Bumped whenever a CSV header or JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const THROUGHPUT_HEADER: [&str; 11] = [
    "regime",
    "psi1",
    "nsp",
    "avg_user_tput_bps",
    "ci_user",
    "avg_cell_tput_bps",
    "ci_cell",
    "total_cell_tput_bps",
    "ci_total",
    "drops",
    "slots",
];

pub const REGION_HEADER: [&str; 6] = ["n1", "n2", "psi_min", "psi_max", "psi_max_raw", "beneficial"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    Simulate { regime: SharingRegime },
    Sweep,
    Game { regime: SharingRegime, verify: bool },
    Region,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::Sweep => "sweep",
            Command::Game { .. } => "game",
            Command::Region => "region",
        }
    }
}

/// Command-line adjustments applied to the file configuration before it is
/// resolved, so the manifest records the values actually used.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub drops: Option<u64>,
    pub slots: Option<u64>,
    pub noise_limited: bool,
    /// Sets both the simulation and the market weight.
    pub psi1: Option<f64>,
    pub region_resolution: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, file: &mut ConfigFile) {
        if let Some(seed) = self.seed {
            file.simulation.base_seed = seed;
        }
        if let Some(drops) = self.drops {
            file.simulation.num_drops = drops;
        }
        if let Some(slots) = self.slots {
            file.simulation.slots_per_drop = slots;
        }
        if self.noise_limited {
            file.simulation.interference = InterferenceSetting::NoiseLimited;
        }
        if let Some(psi1) = self.psi1 {
            file.simulation.psi1 = psi1;
            file.market.psi1 = psi1;
        }
        if let Some(r) = self.region_resolution {
            file.market.region_resolution = r;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    #[serde(flatten)]
    pub command: Command,
    /// File name of the result, relative to the manifest's directory.
    pub output: String,
    pub seed: u64,
    pub config_digest: String,
    /// Canonical TOML of the resolved configuration.
    pub config: String,
    pub created_unix: u64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Result file contents for `command`.
pub fn render(command: &Command, config: &Config) -> Result<Vec<u8>> {
    match *command {
        Command::Simulate { regime } => {
            let weights = match regime {
                SharingRegime::NoSharing => WeightRegime::NoSharing,
                SharingRegime::EqualSharing => WeightRegime::EqualSharing,
                SharingRegime::WeightedSharing => WeightRegime::weighted_duopoly(config.sim_psi1)?,
            };
            let metrics = simengine::run_campaign(&config.sim, &weights)?;
            throughput_csv(std::slice::from_ref(&metrics))
        }
        Command::Sweep => {
            let sweep = simengine::sweep_psi(&config.sim)?;
            let all: Vec<SimMetrics> = sweep.all().cloned().collect();
            throughput_csv(&all)
        }
        Command::Game { regime, verify } => game_json(&config.market, regime, verify.then_some(config.grid_resolution)),
        Command::Region => region_csv(config.region_resolution),
    }
}

/// Renders `command`, writes it to `out` and the manifest beside it.
pub fn execute(command: &Command, config: &Config, out: &Path) -> Result<Manifest> {
    let body = render(command, config)?;
    write_file(out, &body)?;
    let text = config.file.to_toml()?;
    let manifest = Manifest {
        tool: "mmshare".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        command: *command,
        output: out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        seed: config.sim.base_seed,
        config_digest: digest_text(&text),
        config: text,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Serialize(e.to_string()))?;
    json.push(b'\n');
    write_file(&manifest_path(out), &json)?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

/// Regenerates the result recorded in a manifest. Writes to `out` if given,
/// otherwise to the original output path next to the manifest.
pub fn replay(manifest_file: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let manifest = read_manifest(manifest_file)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "manifest schema version {} is not supported (expected {SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    if digest_text(&manifest.config) != manifest.config_digest {
        return Err(Error::Config("manifest configuration does not match its digest".into()));
    }
    let config = Config::parse(&manifest.config)?;
    let target = match out {
        Some(p) => p.to_path_buf(),
        None => manifest_file.with_file_name(&manifest.output),
    };
    write_file(&target, &render(&manifest.command, &config)?)?;
    Ok(target)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Serialize(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

fn half_width(e: &Estimate) -> String {
    e.half_width.map(|h| h.to_string()).unwrap_or_default()
}

/// One row per NSP plus a `total` row for each campaign.
pub fn throughput_csv(campaigns: &[SimMetrics]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(THROUGHPUT_HEADER).map_err(csv_error)?;
    for m in campaigns {
        let regime = m.regime.as_str();
        let psi = m.psi1.map(|p| p.to_string()).unwrap_or_default();
        let (drops, slots) = (m.drops.to_string(), m.slots.to_string());
        let total = &m.total_cell_tput;
        let rows = [
            ("1", &m.user_tput[0], &m.cell_tput[0]),
            ("2", &m.user_tput[1], &m.cell_tput[1]),
            ("total", &m.user_tput_all, total),
        ];
        for (nsp, user, cell) in rows {
            w.write_record([
                regime,
                &psi,
                nsp,
                &user.mean.to_string(),
                &half_width(user),
                &cell.mean.to_string(),
                &half_width(cell),
                &total.mean.to_string(),
                &half_width(total),
                &drops,
                &slots,
            ])
            .map_err(csv_error)?;
        }
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub resolution: f64,
    pub grid: GridEquilibrium,
    pub delta_p1: f64,
    pub delta_p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameReport {
    pub market: MarketParams<f64>,
    pub outcome: MarketOutcome<f64>,
    pub verify: Option<Verification>,
}

pub fn game_report(market: &MarketParams<f64>, regime: SharingRegime, verify: Option<f64>) -> Result<GameReport> {
    let outcome = duopoly::solve(market, regime)?;
    let verify = match verify {
        Some(resolution) => {
            let grid = duopoly::numeric_equilibrium(market, regime, resolution)?;
            Some(Verification {
                resolution,
                delta_p1: grid.p1 - outcome.p1,
                delta_p2: grid.p2 - outcome.p2,
                grid,
            })
        }
        None => None,
    };
    Ok(GameReport {
        market: *market,
        outcome,
        verify,
    })
}

fn game_json(market: &MarketParams<f64>, regime: SharingRegime, verify: Option<f64>) -> Result<Vec<u8>> {
    let report = game_report(market, regime, verify)?;
    let mut json = serde_json::to_vec_pretty(&report).map_err(|e| Error::Serialize(e.to_string()))?;
    json.push(b'\n');
    Ok(json)
}

/// Grid coordinates like `3 * 0.1` print as `0.3`, not `0.30000000000000004`.
fn grid_coordinate(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_string()
}

pub fn region_csv(resolution: f64) -> Result<Vec<u8>> {
    let cells = duopoly::mutual_benefit_region(resolution)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(REGION_HEADER).map_err(csv_error)?;
    for c in cells {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            grid_coordinate(c.n1),
            grid_coordinate(c.n2),
            c.bounds.psi_min.to_string(),
            opt(c.bounds.psi_max()),
            opt(c.bounds.psi_max_raw),
            if c.bounds.is_beneficial() { "yes" } else { "no" }.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Config {
        Config::parse(
            "[network]\narea_width_m = 200.0\narea_height_m = 200.0\n\
             [simulation]\nslots_per_drop = 50\nnum_drops = 2\npsi_grid = [0.5, 0.7]\n",
        )
        .unwrap()
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_path(Path::new("/tmp/x.csv")), PathBuf::from("/tmp/x.csv.manifest.json"));
    }

    #[test]
    fn simulate_csv_shape() {
        let body = render(
            &Command::Simulate {
                regime: SharingRegime::EqualSharing,
            },
            &tiny(),
        )
        .unwrap();
        let text = String::from_utf8(body).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], THROUGHPUT_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("equal,,1,"));
        assert!(lines[3].starts_with("equal,,total,"));
        assert!(lines[3].ends_with(",2,50"));
    }

    #[test]
    fn sweep_rows() {
        let text = String::from_utf8(render(&Command::Sweep, &tiny()).unwrap()).unwrap();
        // header + (none, equal, 0.5, 0.7) x 3 rows
        assert_eq!(text.lines().count(), 13);
        assert!(text.lines().any(|l| l.starts_with("weighted,0.7,2,")));
    }

    #[test]
    fn region_rows_format_grid_cleanly() {
        let text = String::from_utf8(region_csv(0.1).unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), REGION_HEADER.join(","));
        assert!(text.lines().any(|l| l.starts_with("0.5,0.5,0.5,1,")));
        assert!(text.lines().any(|l| l.starts_with("0.3,0.1,")));
    }

    #[test]
    fn game_report_with_verification() {
        let r = game_report(&Config::default().market, SharingRegime::NoSharing, Some(1e-3)).unwrap();
        let v = r.verify.unwrap();
        assert!(v.delta_p1.abs() <= 2e-3 && v.delta_p2.abs() <= 2e-3);
        assert!(!r.outcome.corner);
    }

    #[test]
    fn overrides_apply_before_resolution() {
        let mut file = ConfigFile::default();
        Overrides {
            seed: Some(9),
            drops: Some(3),
            noise_limited: true,
            psi1: Some(0.8),
            ..Overrides::default()
        }
        .apply(&mut file);
        let c = Config::resolve(file).unwrap();
        assert_eq!(c.sim.base_seed, 9);
        assert_eq!(c.sim.num_drops, 3);
        assert_eq!(c.sim_psi1, 0.8);
        assert_eq!(c.market.psi1, 0.8);
    }
}
