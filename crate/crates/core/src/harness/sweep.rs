use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::MetricsRecord;
use super::sim::{run_world, FilterMode};
use super::world::World;
use crate::config::{derive_seed, ScenarioConfig};
use crate::error::{ConfigError, HarnessError};
use crate::solvers::SolverKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Vehicles,
    Subtasks,
    TaskVehicle,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Vehicles => "vehicles",
            SweepAxis::Subtasks => "subtasks",
            SweepAxis::TaskVehicle => "task_vehicle",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vehicles" => Ok(SweepAxis::Vehicles),
            "subtasks" => Ok(SweepAxis::Subtasks),
            "task_vehicle" | "task-vehicle" => Ok(SweepAxis::TaskVehicle),
            _ => Err(format!("axis must be vehicles|subtasks|task_vehicle, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<u32>,
    pub solvers: Vec<SolverKind>,
    pub filters: Vec<FilterMode>,
    pub repetitions: u32,
    pub seed: u64,
}

/// Configuration of one (value, repetition) cell.
pub fn cell_config(
    base: &ScenarioConfig,
    spec: &SweepSpec,
    value_idx: usize,
    rep: u32,
) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = base.clone();
    let v = spec.values[value_idx];
    cfg.rng_seed = derive_seed(spec.seed, ((value_idx as u64) << 32) | u64::from(rep));
    match spec.axis {
        SweepAxis::Vehicles => {
            if !base.vehicles.is_empty() {
                return Err(ConfigError::invalid(
                    "vehicles",
                    "a vehicles sweep needs a generated fleet",
                ));
            }
            cfg.fleet.n_vehicles = v;
        }
        SweepAxis::Subtasks => {
            if !base.tasks.is_empty() {
                return Err(ConfigError::invalid("tasks", "a subtasks sweep needs generated tasks"));
            }
            cfg.fleet.n_subtasks = v;
        }
        SweepAxis::TaskVehicle => cfg.task_vehicle = Some(v),
    }
    Ok(cfg)
}

fn failed_cell(scenario: &str, solver: SolverKind, filter: FilterMode, err: &HarnessError) -> MetricsRecord {
    log::warn!("{scenario} {solver} filter={filter}: {err}");
    MetricsRecord {
        scenario: scenario.to_string(),
        solver,
        filter,
        n_vehicles: 0,
        n_subtasks: 0,
        makespan: f64::NAN,
        planned_makespan: f64::NAN,
        avg_subtask_delay: f64::NAN,
        reoffload_count: 0,
        failed_tasks: 1,
        infeasible: true,
        per_vehicle_busy: Vec::new(),
    }
}

/// Every (value × repetition × solver × filter) cell. Cells run in parallel;
/// the result order is value, repetition, solver, filter regardless of scheduling.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<MetricsRecord>, HarnessError> {
    if spec.values.is_empty() || spec.solvers.is_empty() || spec.filters.is_empty() {
        return Err(HarnessError::EmptySweep);
    }
    let cells: Vec<(usize, u32)> = (0..spec.values.len())
        .flat_map(|vi| (0..spec.repetitions.max(1)).map(move |r| (vi, r)))
        .collect();
    let out: Vec<Vec<MetricsRecord>> = cells
        .par_iter()
        .map(|&(vi, rep)| {
            let scenario = format!("{}={}/rep={}", spec.axis, spec.values[vi], rep);
            let world = cell_config(base, spec, vi, rep)
                .map_err(HarnessError::from)
                .and_then(|cfg| World::build(&cfg));
            let mut records = Vec::new();
            for &solver in &spec.solvers {
                for &filter in &spec.filters {
                    let rec = world
                        .as_ref()
                        .map_err(|e| HarnessError::Config(ConfigError::invalid("scenario", e.to_string())))
                        .and_then(|w| run_world(w, solver, filter, &scenario))
                        .unwrap_or_else(|e| failed_cell(&scenario, solver, filter, &e));
                    records.push(rec);
                }
            }
            records
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}
