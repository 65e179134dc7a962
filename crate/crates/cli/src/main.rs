use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ergodic_mm_cli::commands::replay;
use ergodic_mm_cli::config::DEFAULTS;
use ergodic_mm_cli::{
    execute, CliError, Command, Config, ExperimentKind, Run, RunManifest, SeedSource,
};

#[derive(Parser)]
#[command(
    name = "ergodic-mm",
    version,
    about = "Ergodic Avellaneda-Stoikov market making experiments"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed. Drawn from the OS and recorded in the manifest when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override one config key, `key=value`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ergodic solution tables: solution.csv, gamma and lambda_max on stdout.
    Solve {
        /// Accept q_max == q_min.
        #[arg(long)]
        allow_degenerate: bool,
    },
    /// One path: trajectory.csv and, for learning policies, trace.csv.
    Simulate {
        /// ergodic:<kappa>|myopic|learn:full|learn:sw|learn:ewma|fixed:<depth>
        #[arg(long)]
        policy: Option<String>,
    },
    /// Monte Carlo experiments.
    Experiment {
        #[arg(value_enum)]
        variant: Variant,
        #[arg(long)]
        policy: Option<String>,
    },
    /// Misspecified ergodic reward over experiment.kappa_grid: misspec_gamma.csv.
    MisspecGamma,
    /// v(0, q; T)/T over experiment.fh_horizons: finite_horizon.csv.
    FiniteHorizon,
    /// Print the resolved configuration, or the defaults table with --describe.
    Config {
        #[arg(long)]
        describe: bool,
    },
    /// Check a manifest's digests; with --rerun, reproduce the run into --out and compare.
    Verify {
        manifest: PathBuf,
        #[arg(long)]
        rerun: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Regret,
    Equilibrium,
    Nonstationary,
    SweepC1,
    MleConsistency,
}

impl From<Variant> for ExperimentKind {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Regret => ExperimentKind::Regret,
            Variant::Equilibrium => ExperimentKind::Equilibrium,
            Variant::Nonstationary => ExperimentKind::Nonstationary,
            Variant::SweepC1 => ExperimentKind::SweepC1,
            Variant::MleConsistency => ExperimentKind::MleConsistency,
        }
    }
}

fn load_config(cli: &Cli, policy: Option<&str>) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            Config::parse(&std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?)?
        }
        None => Config::default(),
    };
    for o in &cli.overrides {
        config.apply_override(o)?;
    }
    if let Some(p) = policy {
        config.set("experiment.policy", p)?;
    }
    Ok(config)
}

fn verify(manifest_path: &Path, rerun: bool, out: &Path) -> Result<(), CliError> {
    let manifest = RunManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let bad = manifest.mismatches(dir);
    if !bad.is_empty() {
        return Err(CliError::Config(format!(
            "digest mismatch: {}",
            bad.join(", ")
        )));
    }
    println!("{} outputs verified", manifest.outputs.len());
    if rerun {
        let again = execute(&replay(&manifest, out)?, &mut std::io::sink())?;
        let digests = |m: &RunManifest| {
            m.outputs
                .iter()
                .map(|o| (o.file.clone(), o.sha256.clone()))
                .collect::<Vec<_>>()
        };
        if digests(&again) != digests(&manifest) {
            return Err(CliError::Config("rerun produced different digests".into()));
        }
        println!("rerun reproduced every digest");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let command = match &cli.command {
        Cmd::Solve { allow_degenerate } => Command::Solve {
            allow_degenerate: *allow_degenerate,
        },
        Cmd::Simulate { .. } => Command::Simulate,
        Cmd::Experiment { variant, .. } => Command::Experiment((*variant).into()),
        Cmd::MisspecGamma => Command::MisspecGamma,
        Cmd::FiniteHorizon => Command::FiniteHorizon,
        Cmd::Config { describe } => {
            if *describe {
                for (k, v, doc) in DEFAULTS {
                    println!("{k} = {v}  # {doc}");
                }
            } else {
                print!("{}", load_config(&cli, None)?.serialize());
            }
            return Ok(());
        }
        Cmd::Verify { manifest, rerun } => return verify(manifest, *rerun, &cli.out),
    };
    let policy = match &cli.command {
        Cmd::Simulate { policy } | Cmd::Experiment { policy, .. } => policy.as_deref(),
        _ => None,
    };
    let config = load_config(&cli, policy)?;
    let (seed, seed_source) = match cli.seed {
        Some(s) => (s, SeedSource::Flag),
        None => (rand::random(), SeedSource::Entropy),
    };
    let run = Run {
        command,
        config,
        seed,
        seed_source,
        out: cli.out.clone(),
    };
    execute(&run, &mut std::io::stdout().lock())?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
