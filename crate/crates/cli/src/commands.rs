use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ergodic_mm::estimator::{consistency_experiment, write_trace, DepthSchedule};
use ergodic_mm::format::float;
use ergodic_mm::hjb::{
    equilibrium_distribution, finite_horizon_value, misspecified_gamma, solve_ergodic_with,
    transition_rate_matrix,
};
use ergodic_mm::regret::output::{
    write_consistency, write_error_mean, write_fit_json, write_regret_mean, write_sweep, write_tv,
};
use ergodic_mm::regret::{
    c1_dependency_sweep, equilibrium_convergence_study, monte_carlo, nonstationary_experiment,
    regime_tracking, MonteCarloResult, OutputGrid,
};
use ergodic_mm::rng::RngSpec;
use ergodic_mm::sim::{simulate, write_trajectory, PolicySpec, SimOptions, SimulationSetup};

use crate::config::Config;
use crate::error::CliError;
use crate::manifest::{OutputSet, RunManifest, SeedSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Regret,
    Equilibrium,
    Nonstationary,
    SweepC1,
    MleConsistency,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Regret => "regret",
            ExperimentKind::Equilibrium => "equilibrium",
            ExperimentKind::Nonstationary => "nonstationary",
            ExperimentKind::SweepC1 => "sweep-c1",
            ExperimentKind::MleConsistency => "mle-consistency",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Solve { allow_degenerate: bool },
    Simulate,
    Experiment(ExperimentKind),
    MisspecGamma,
    FiniteHorizon,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Solve {
                allow_degenerate: false,
            } => "solve".into(),
            Command::Solve {
                allow_degenerate: true,
            } => "solve --allow-degenerate".into(),
            Command::Simulate => "simulate".into(),
            Command::Experiment(k) => format!("experiment {}", k.name()),
            Command::MisspecGamma => "misspec-gamma".into(),
            Command::FiniteHorizon => "finite-horizon".into(),
        }
    }
}

pub struct Run {
    pub command: Command,
    pub config: Config,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub out: PathBuf,
}

/// Executes one command, writing its files and the manifest into `run.out`.
/// Text for standard output goes to `stdout`.
pub fn execute(run: &Run, stdout: &mut dyn Write) -> Result<RunManifest, CliError> {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut out = OutputSet::create(&run.out)?;
    match &run.command {
        Command::Solve { allow_degenerate } => {
            solve(&run.config, *allow_degenerate, &mut out, &mut lines)?
        }
        Command::Simulate => simulate_one(&run.config, run.seed, &mut out, &mut lines)?,
        Command::Experiment(kind) => {
            experiment(*kind, &run.config, run.seed, &mut out, &mut lines)?
        }
        Command::MisspecGamma => misspec(&run.config, &mut out)?,
        Command::FiniteHorizon => finite_horizon(&run.config, &mut out)?,
    }
    let manifest = out.finish(RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: run.command.name(),
        seed: run.seed,
        seed_source: run.seed_source.clone(),
        config: run.config.entries().clone(),
        duration_seconds: started.elapsed().as_secs_f64(),
        outputs: Vec::new(),
    })?;
    for line in lines {
        writeln!(stdout, "{line}").map_err(|e| CliError::io("<stdout>", e))?;
    }
    Ok(manifest)
}

/// Ten significant digits, positional unless the magnitude is extreme.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return float(x);
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..10).contains(&exponent) {
        format!("{x:.*}", (9 - exponent).max(0) as usize)
    } else {
        format!("{x:.9e}")
    }
}

fn solve(
    config: &Config,
    allow_degenerate: bool,
    out: &mut OutputSet,
    lines: &mut Vec<String>,
) -> Result<(), CliError> {
    let params = config.model()?;
    let sol = solve_ergodic_with(&params, allow_degenerate)?;
    let rates = transition_rate_matrix(&sol.psi_plus, &sol.psi_minus, params.kappa, &params)?;
    let pi = equilibrium_distribution(&rates)?.probabilities;
    out.write("solution.csv", |w| {
        writeln!(w, "q,v_hat,psi_plus,psi_minus,pi")?;
        for (i, q) in sol.grid.states().enumerate() {
            writeln!(
                w,
                "{q},{},{},{},{}",
                float(sol.v_hat[i]),
                sol.psi_plus[i],
                sol.psi_minus[i],
                float(pi[i])
            )?;
        }
        Ok(())
    })?;
    lines.push(format!("gamma = {}", sig10(sol.gamma)));
    lines.push(format!("lambda_max = {}", sig10(sol.lambda_max)));
    Ok(())
}

fn simulate_one(
    config: &Config,
    seed: u64,
    out: &mut OutputSet,
    lines: &mut Vec<String>,
) -> Result<(), CliError> {
    let policy = config.policy(None)?;
    let setup = SimulationSetup {
        initial_inventory: config.get("experiment.initial_inventory")?,
        ..SimulationSetup::new(
            config.model()?,
            policy,
            config.estimator()?,
            config.get("experiment.horizon")?,
        )
    };
    let setup = if config.get::<bool>("schedule.enabled")? {
        setup.with_schedule(config.schedule()?)
    } else {
        setup
    };
    let options = SimOptions {
        record_events: true,
        mid_price: config.get("experiment.mid_price")?,
        ..Default::default()
    };
    let traj = simulate(&setup, RngSpec::new(seed), 0, &options)?;
    out.write("trajectory.csv", |w| write_trajectory(w, &traj))?;
    if policy.learns() {
        out.write("trace.csv", |w| write_trace(w, &traj.trace))?;
    }
    lines.push(format!("events = {}", traj.event_count));
    lines.push(format!("fills = {}", traj.fill_count));
    lines.push(format!("reward_integral = {}", sig10(traj.reward_integral)));
    lines.push(format!("final_inventory = {}", traj.final_inventory));
    if let Some(k) = traj.final_kappa_hat {
        lines.push(format!("final_kappa_hat = {}", sig10(k)));
    }
    if let Some(p) = traj.pnl {
        lines.push(format!("pnl = {}", sig10(p)));
    }
    Ok(())
}

fn write_monte_carlo(
    out: &mut OutputSet,
    prefix: &str,
    r: &MonteCarloResult,
) -> Result<(), CliError> {
    out.write(&format!("{prefix}regret_mean.csv"), |w| {
        write_regret_mean(w, r)
    })?;
    if let Some(err) = &r.mean_error {
        out.write(&format!("{prefix}error_mean.csv"), |w| {
            write_error_mean(w, &r.times, err)
        })?;
    }
    out.write(&format!("{prefix}fit.json"), |w| write_fit_json(w, &r.fit))
}

fn experiment(
    kind: ExperimentKind,
    config: &Config,
    seed: u64,
    out: &mut OutputSet,
    lines: &mut Vec<String>,
) -> Result<(), CliError> {
    match kind {
        ExperimentKind::Regret => {
            let cfg = config.experiment(config.policy(None)?, seed)?;
            let r = monte_carlo(&cfg)?;
            write_monte_carlo(out, "", &r)?;
            lines.push(format!("preferred = {}", r.fit.preferred.tag()));
            for f in &r.fit.fits {
                let c: Vec<String> = f.coefficients.iter().map(|c| sig10(*c)).collect();
                lines.push(format!(
                    "{}: coefficients = [{}], rss = {}",
                    f.model.tag(),
                    c.join(", "),
                    sig10(f.rss)
                ));
            }
        }
        ExperimentKind::Equilibrium => {
            let params = config.model()?;
            let policy = match config.policy(None)? {
                p if p.learns() => PolicySpec::Ergodic {
                    kappa: params.kappa,
                },
                p => p,
            };
            let times = config.list("experiment.tv_times")?;
            let s = equilibrium_convergence_study(
                &params,
                policy,
                config.get("experiment.initial_inventory")?,
                &times,
                config.get("experiment.tv_scenarios")?,
                config.get("experiment.bootstrap")?,
                RngSpec::new(seed),
            )?;
            out.write("tv.csv", |w| write_tv(w, &s))?;
            lines.push(format!("policy = {policy}"));
            lines.push(format!("slope = {}", sig10(s.slope)));
            lines.push(format!(
                "slope_ci99 = [{}, {}]",
                sig10(s.slope_ci.0),
                sig10(s.slope_ci.1)
            ));
            lines.push(format!("fit_points = {}", s.fit_points));
            lines.push(format!("sampling_floor = {}", sig10(s.noise_floor)));
        }
        ExperimentKind::Nonstationary => {
            let schedule = config.schedule()?;
            let mut base = config.experiment(config.policy(None)?, seed)?;
            base.horizon = config.get("schedule.horizon")?;
            base.scenarios = config.get("schedule.scenarios")?;
            base.schedule = Some(schedule.clone());
            let step = match base.grid {
                OutputGrid::Uniform { step } => step,
                OutputGrid::LogSpaced { .. } => 1.0,
            };
            let reports = nonstationary_experiment(&base, &config.methods()?)?;
            let mut tracking = Vec::new();
            for rep in &reports {
                write_monte_carlo(out, &format!("{}/", rep.name), &rep.result)?;
                let err = rep
                    .result
                    .mean_error
                    .as_deref()
                    .expect("learned policies record errors");
                let rows = regime_tracking(
                    &rep.result.times,
                    err,
                    schedule.segments(),
                    base.horizon,
                    step,
                );
                for (row, &(_, kappa)) in rows.iter().zip(schedule.segments()) {
                    tracking.push((rep.name, kappa, *row));
                }
                lines.push(format!(
                    "{}: terminal mean regret = {}",
                    rep.name,
                    sig10(*rep.result.mean_regret.last().unwrap())
                ));
            }
            out.write("tracking.csv", |w| {
                writeln!(
                    w,
                    "method,start,end,kappa_star,error_at_start,error_at_end,error_before_switch"
                )?;
                for (name, kappa, r) in &tracking {
                    writeln!(
                        w,
                        "{name},{},{},{},{},{},{}",
                        float(r.start),
                        float(r.end),
                        float(*kappa),
                        float(r.error_at_start),
                        float(r.error_at_end),
                        ergodic_mm::format::opt_float(r.error_before_switch)
                    )?;
                }
                Ok(())
            })?;
        }
        ExperimentKind::SweepC1 => {
            let mut base = config.experiment(config.policy(None)?, seed)?;
            base.horizon = config.get("experiment.sweep_horizon")?;
            base.scenarios = config.get("experiment.sweep_scenarios")?;
            let axes = config.sweep_axes()?;
            let p1 = config.list("experiment.sweep_param1")?;
            let p2 = config.list("experiment.sweep_param2")?;
            let cells: Vec<(f64, f64)> = p1
                .iter()
                .flat_map(|&a| p2.iter().map(move |&b| (a, b)))
                .collect();
            let rows = c1_dependency_sweep(&base, axes, &cells)?;
            out.write("sweep_c1.csv", |w| write_sweep(w, &rows))?;
            let (n1, n2) = axes.names();
            lines.push(format!(
                "param1 = {n1}, param2 = {n2}, cells = {}",
                rows.len()
            ));
        }
        ExperimentKind::MleConsistency => {
            let params = config.model()?;
            let sizes = config
                .list("experiment.mle_sizes")?
                .into_iter()
                .map(|n| {
                    if n >= 1.0 && n.fract() == 0.0 {
                        Ok(n as usize)
                    } else {
                        Err(CliError::Config(format!(
                            "`experiment.mle_sizes`: {n} is not a positive integer"
                        )))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let report = consistency_experiment(
                params.kappa,
                DepthSchedule::Constant(config.get("experiment.mle_depth")?),
                &sizes,
                config.get("experiment.mle_replications")?,
                &config.estimator()?,
                RngSpec::new(seed),
            )?;
            out.write("mle_consistency.csv", |w| write_consistency(w, &report))?;
            lines.push(format!("log_log_slope = {}", sig10(report.slope)));
        }
    }
    Ok(())
}

fn misspec(config: &Config, out: &mut OutputSet) -> Result<(), CliError> {
    let params = config.model()?;
    let kappas = config.list("experiment.kappa_grid")?;
    let optimum = solve_ergodic_with(&params, false)?.gamma;
    let rows = kappas
        .iter()
        .map(|&k| Ok((k, misspecified_gamma(k, params.kappa, &params)?.gamma_cross)))
        .collect::<Result<Vec<_>, CliError>>()?;
    out.write("misspec_gamma.csv", |w| {
        writeln!(w, "kappa,gamma_cross,gap")?;
        for (k, g) in &rows {
            writeln!(w, "{},{},{}", float(*k), float(*g), float(optimum - g))?;
        }
        Ok(())
    })
}

fn finite_horizon(config: &Config, out: &mut OutputSet) -> Result<(), CliError> {
    let params = config.model()?;
    params.validate(false)?;
    let horizons = config.list("experiment.fh_horizons")?;
    let mut rows = Vec::new();
    for &t in &horizons {
        if t.is_nan() || t <= 0.0 {
            return Err(CliError::Config(format!(
                "`experiment.fh_horizons`: {t} is not positive"
            )));
        }
        rows.push((t, finite_horizon_value(0.0, t, &params)?));
    }
    out.write("finite_horizon.csv", |w| {
        writeln!(w, "horizon,q,value_over_t")?;
        for (t, v) in &rows {
            for (q, x) in params.grid().states().zip(v) {
                writeln!(w, "{},{q},{}", float(*t), float(x / t))?;
            }
        }
        Ok(())
    })
}

/// Re-runs the command recorded in a manifest into `out`.
pub fn replay(manifest: &RunManifest, out: &Path) -> Result<Run, CliError> {
    let config = Config::parse(&manifest.config_text())?;
    let command = parse_command_name(&manifest.command).ok_or_else(|| {
        CliError::Config(format!(
            "manifest command `{}` is not recognised",
            manifest.command
        ))
    })?;
    Ok(Run {
        command,
        config,
        seed: manifest.seed,
        seed_source: SeedSource::Flag,
        out: out.to_path_buf(),
    })
}

fn parse_command_name(name: &str) -> Option<Command> {
    Some(match name {
        "solve" => Command::Solve {
            allow_degenerate: false,
        },
        "solve --allow-degenerate" => Command::Solve {
            allow_degenerate: true,
        },
        "simulate" => Command::Simulate,
        "misspec-gamma" => Command::MisspecGamma,
        "finite-horizon" => Command::FiniteHorizon,
        "experiment regret" => Command::Experiment(ExperimentKind::Regret),
        "experiment equilibrium" => Command::Experiment(ExperimentKind::Equilibrium),
        "experiment nonstationary" => Command::Experiment(ExperimentKind::Nonstationary),
        "experiment sweep-c1" => Command::Experiment(ExperimentKind::SweepC1),
        "experiment mle-consistency" => Command::Experiment(ExperimentKind::MleConsistency),
        _ => return None,
    })
}
