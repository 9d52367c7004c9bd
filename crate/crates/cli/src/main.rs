use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use mmshare::commands::{self, Command, Overrides};
use mmshare::config::{Config, ConfigFile};
use mmshare::SharingRegime;

#[derive(Debug, Parser)]
#[command(name = "mmshare", version, about = "mmWave base-station sharing simulator and duopoly pricing solver")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration; omitted keys take the reference defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed for all random streams.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Number of independent network drops.
    #[arg(long, global = true, value_name = "N")]
    drops: Option<u64>,

    /// Scheduling slots per drop.
    #[arg(long, global = true, value_name = "N")]
    slots: Option<u64>,

    /// Ignore interference (Y = 0).
    #[arg(long, global = true)]
    noise_limited: bool,

    /// NSP 1 weight for weighted sharing (simulation and market).
    #[arg(long, global = true, value_name = "F")]
    psi1: Option<f64>,

    /// Result file; the manifest is written to `<PATH>.manifest.json`.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    None,
    Equal,
    Weighted,
}

impl From<RegimeArg> for SharingRegime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::None => SharingRegime::NoSharing,
            RegimeArg::Equal => SharingRegime::EqualSharing,
            RegimeArg::Weighted => SharingRegime::WeightedSharing,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Monte Carlo campaign for one sharing regime (CSV).
    Simulate {
        #[arg(long, value_enum, default_value = "weighted")]
        regime: RegimeArg,
    },
    /// Weighted sharing over the psi1 grid plus both baselines (CSV).
    Sweep,
    /// Equilibrium prices, shares and profits of the pricing game (JSON).
    Game {
        #[arg(long, value_enum, default_value = "weighted")]
        regime: RegimeArg,
        /// Cross-check the closed form against grid backward induction.
        #[arg(long)]
        verify: bool,
    },
    /// psi1 bounds over the (n1, n2) grid (CSV).
    Region {
        /// Grid step in n1 and n2.
        #[arg(long, value_name = "F")]
        resolution: Option<f64>,
    },
    /// Regenerate a result file from its manifest.
    Replay {
        #[arg(long, value_name = "PATH")]
        manifest: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (command, resolution) = match cli.command {
        Cmd::Replay { manifest } => {
            let written = commands::replay(&manifest, cli.out.as_deref())?;
            println!("{}", written.display());
            return Ok(());
        }
        Cmd::Simulate { regime } => (Command::Simulate { regime: regime.into() }, None),
        Cmd::Sweep => (Command::Sweep, None),
        Cmd::Game { regime, verify } => (
            Command::Game {
                regime: regime.into(),
                verify,
            },
            None,
        ),
        Cmd::Region { resolution } => (Command::Region, resolution),
    };
    let mut file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Overrides {
        seed: cli.seed,
        drops: cli.drops,
        slots: cli.slots,
        noise_limited: cli.noise_limited,
        psi1: cli.psi1,
        region_resolution: resolution,
    }
    .apply(&mut file);
    let config = Config::resolve(file)?;
    let out = cli.out.unwrap_or_else(|| {
        let ext = if matches!(command, Command::Game { .. }) { "json" } else { "csv" };
        PathBuf::from(format!("{}.{ext}", command.name()))
    });
    let manifest = commands::execute(&command, &config, &out)
        .with_context(|| format!("{} failed", command.name()))?;
    println!("{}", out.display());
    println!("{}", commands::manifest_path(&out).display());
    eprintln!("config digest {}", manifest.config_digest);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e
                .chain()
                .find_map(|c| c.downcast_ref::<mmshare::Error>())
                .is_some_and(|e| e.is_validation());
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}
