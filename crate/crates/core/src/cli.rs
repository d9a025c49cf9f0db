//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or validation error (and failed
//! self-tests), 2 when every requested run was infeasible. Diagnostics go to
//! stderr; data goes to `--output` or stdout.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::comms::{direct_rate, tran_delay, ChannelParams};
use crate::config::{derive_seed, split_override, ScenarioConfig, SEED_TRACE};
use crate::error::{ConfigError, CostError, HarnessError};
use crate::harness::{
    planning_rng, run_sweep, run_world, write_metrics_csv, FilterMode, Simulator, SweepAxis, SweepSpec, World,
};
use crate::mobility::{gen_freeway_trace, write_trace};
use crate::solvers::SolverKind;

const DEPARTURE_SCENARIO: &str = include_str!("../scenarios/departure.toml");

#[derive(Debug, Parser)]
#[command(name = "v2v-offload", version, about = "V2V task offloading simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic freeway trace CSV.
    GenTrace(ScenarioArgs),
    /// Plan once and report the assignment.
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// hgsa, random, df, scf, ssf or brute.
        #[arg(long, default_value = "hgsa")]
        solver: SolverKind,
        /// Candidate filter: on or off.
        #[arg(long, default_value = "on")]
        filter: FilterMode,
        /// Also write one row per subtask to this file.
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
    /// Plan and execute, re-offloading after departures; writes metrics CSV.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated; one run per solver and filter setting.
        #[arg(long, value_delimiter = ',', default_value = "hgsa")]
        solver: Vec<SolverKind>,
        #[arg(long, value_delimiter = ',', default_value = "on")]
        filter: Vec<FilterMode>,
    },
    /// Run a parameter sweep; writes metrics CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// vehicles, subtasks or task_vehicle.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values; `a-b` expands to an inclusive range.
        #[arg(long, required = true)]
        values: String,
        #[arg(long, value_delimiter = ',', default_value = "hgsa,random,df,scf,ssf")]
        solvers: Vec<SolverKind>,
        #[arg(long, value_delimiter = ',', default_value = "on")]
        filters: Vec<FilterMode>,
        #[arg(long, default_value_t = 1)]
        reps: u32,
    },
    /// Check the built-in departure example and channel formulas.
    SelfTest,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario TOML file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any config key, e.g. `--set channel.bandwidth=1e6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Master seed; fleet, trace and planning streams derive from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generated fleet size.
    #[arg(long)]
    pub vehicles: Option<u32>,
    /// Generated subtask count.
    #[arg(long)]
    pub subtasks: Option<u32>,
    /// Id of the vehicle that owns the tasks.
    #[arg(long)]
    pub task_vehicle: Option<u32>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

impl ScenarioArgs {
    /// Defaults, then the file, then `--set`, then the dedicated flags.
    pub fn load(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut overrides = Vec::new();
        for raw in &self.overrides {
            let (k, v) = split_override(raw)?;
            overrides.push((k.to_string(), v.to_string()));
        }
        let flags = [
            ("rng_seed", self.seed.map(|v| v.to_string())),
            ("fleet.n_vehicles", self.vehicles.map(|v| v.to_string())),
            ("fleet.n_subtasks", self.subtasks.map(|v| v.to_string())),
            ("task_vehicle", self.task_vehicle.map(|v| v.to_string())),
        ];
        overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        match &self.config {
            Some(path) => ScenarioConfig::load(path, &overrides),
            None => ScenarioConfig::from_toml_with_overrides("", &overrides),
        }
    }

    fn writer(&self) -> Result<Box<dyn Write>, HarnessError> {
        open_output(self.output.as_deref())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| ConfigError::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Parses `10,12,14` or `10-20` or a mix.
pub fn parse_values(s: &str) -> Result<Vec<u32>, ConfigError> {
    let bad = |part: &str| ConfigError::invalid("values", format!("cannot parse '{part}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u32 = a.trim().parse().map_err(|_| bad(part))?;
                let b: u32 = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if out.is_empty() {
        return Err(ConfigError::invalid("values", "no values given"));
    }
    Ok(out)
}

pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match Cli::try_parse() {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn resolved(args: &ScenarioArgs) -> Result<Option<ScenarioConfig>, HarnessError> {
    let cfg = args.load()?;
    if args.print_config {
        let text = cfg.resolve()?.to_toml_string();
        args.writer()?.write_all(text.as_bytes())?;
        return Ok(None);
    }
    Ok(Some(cfg))
}

fn dispatch(command: Command) -> Result<i32, HarnessError> {
    match command {
        Command::GenTrace(args) => {
            let Some(cfg) = resolved(&args)? else { return Ok(0) };
            let cfg = cfg.resolve()?;
            let samples = gen_freeway_trace(
                &cfg.build_vehicles()?,
                cfg.horizon,
                &cfg.mobility,
                derive_seed(cfg.rng_seed, SEED_TRACE),
            )?;
            let mut w = args.writer()?;
            write_trace(&mut w, &samples)?;
            w.flush()?;
            Ok(0)
        }
        Command::Solve {
            scenario,
            solver,
            filter,
            assignment,
        } => {
            let Some(cfg) = resolved(&scenario)? else { return Ok(0) };
            let world = World::build(&cfg)?;
            let mut rng = planning_rng(world.config.rng_seed, solver);
            let (problem, out) = Simulator::from_world(&world).plan(&world, solver, filter, &mut rng)?;
            let mut w = scenario.writer()?;
            writeln!(w, "solver,filter,n_vehicles,n_subtasks,makespan_s,feasible")?;
            let ms = out.as_ref().map_or(f64::NAN, |o| o.makespan);
            writeln!(
                w,
                "{solver},{filter},{},{},{ms},{}",
                world.n_vehicles(),
                world.subtasks.len(),
                out.is_ok()
            )?;
            w.flush()?;
            let out = match out {
                Ok(out) => out,
                Err(e) => {
                    eprintln!("infeasible: {e}");
                    return Ok(2);
                }
            };
            if let Some(path) = assignment {
                let mut a = open_output(Some(&path))?;
                writeln!(a, "subtask,task_id,vehicle_id,cost_s")?;
                for (i, &j) in out.assignment.iter().enumerate() {
                    let task = world.tasks[world.task_of[i]].id;
                    writeln!(a, "{i},{task},{},{}", world.vehicles[j].id, problem.costs.get(i, j))?;
                }
                a.flush()?;
            }
            Ok(0)
        }
        Command::Simulate {
            scenario,
            solver,
            filter,
        } => {
            let Some(cfg) = resolved(&scenario)? else { return Ok(0) };
            let world = World::build(&cfg)?;
            let mut records = Vec::new();
            for &s in &solver {
                for &f in &filter {
                    records.push(run_world(&world, s, f, "scenario")?);
                }
            }
            let mut w = scenario.writer()?;
            write_metrics_csv(&mut w, &records)?;
            w.flush()?;
            Ok(infeasible_code(records.iter().all(|r| r.infeasible)))
        }
        Command::Sweep {
            scenario,
            axis,
            values,
            solvers,
            filters,
            reps,
        } => {
            let Some(cfg) = resolved(&scenario)? else { return Ok(0) };
            let spec = SweepSpec {
                axis,
                values: parse_values(&values)?,
                solvers,
                filters,
                repetitions: reps,
                seed: cfg.rng_seed,
            };
            let records = run_sweep(&cfg, &spec)?;
            let mut w = scenario.writer()?;
            write_metrics_csv(&mut w, &records)?;
            w.flush()?;
            Ok(infeasible_code(records.iter().all(|r| r.infeasible)))
        }
        Command::SelfTest => {
            let checks = self_test()?;
            let mut ok = true;
            for (name, pass, detail) in &checks {
                println!("{} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
                ok &= pass;
            }
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn infeasible_code(all_infeasible: bool) -> i32 {
    if all_infeasible {
        2
    } else {
        0
    }
}

/// Named checks with their outcome and a one-line detail.
pub fn self_test() -> Result<Vec<(&'static str, bool, String)>, HarnessError> {
    let cfg = ScenarioConfig::from_toml_str(DEPARTURE_SCENARIO)?;
    let world = World::build(&cfg)?;
    let off = run_world(&world, SolverKind::Hgsa, FilterMode::Off, "departure")?;
    let on = run_world(&world, SolverKind::Hgsa, FilterMode::On, "departure")?;

    let ch = ChannelParams::default();
    let snr: f64 = 1.3 * 4.0 / 3e-13;
    let hand_rate = 2e6 * (1.0 + snr).log2();
    let rate = direct_rate(&ch, 2).map_err(CostError::from)?;
    let delay = tran_delay(1e6, &ch, 2, 1).map_err(CostError::from)?;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();

    Ok(vec![
        (
            "departure without filter",
            off.planned_makespan == 5.0 && off.makespan == 7.0 && off.reoffload_count > 0,
            format!(
                "planned {} realized {} reoffloads {}",
                off.planned_makespan, off.makespan, off.reoffload_count
            ),
        ),
        (
            "departure with filter",
            on.makespan == 6.0 && on.reoffload_count == 0,
            format!("realized {} reoffloads {}", on.makespan, on.reoffload_count),
        ),
        (
            "direct rate",
            rel(rate, hand_rate) <= 1e-9,
            format!("{rate} bit/s vs {hand_rate}"),
        ),
        (
            "transmission delay",
            rel(delay, 1e6 / rate) <= 1e-12,
            format!("{delay} s"),
        ),
    ])
}
