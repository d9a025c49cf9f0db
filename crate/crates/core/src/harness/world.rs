use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{derive_seed, ScenarioConfig, SEED_NOISE, SEED_TRACE};
use crate::cost::{preview_costs, CostContext, CostTimeMatrix};
use crate::error::{ConfigError, HarnessError, TraceError};
use crate::mobility::{connectivity_at, estimate_stays, gen_freeway_trace, load_trace, StayScan, TraceSet};
use crate::model::{split_tasks, Subtask, Task, Vehicle};

#[derive(Debug, Clone)]
enum Env {
    Trace(TraceSet),
    /// Per-vehicle subtask time, used for every subtask.
    Explicit(Vec<f64>),
}

/// Everything fixed about one scenario: fleet, workload, ground-truth
/// departures and the stay estimates the planner sees.
#[derive(Debug, Clone)]
pub struct World {
    pub config: ScenarioConfig,
    pub vehicles: Vec<Vehicle>,
    pub tasks: Vec<Task>,
    pub subtasks: Vec<Subtask>,
    /// Index into `tasks` of each subtask.
    pub task_of: Vec<usize>,
    /// Column of the task vehicle.
    pub task_col: usize,
    /// Absolute instant each vehicle stops being reachable; infinite if never.
    pub departures: Vec<f64>,
    /// What the planner believes `departures` to be.
    pub estimated_departures: Vec<f64>,
    env: Env,
}

impl World {
    /// Resolves `config` and loads or generates its trace.
    pub fn build(config: &ScenarioConfig) -> Result<World, HarnessError> {
        let config = config.clone().resolve()?;
        let vehicles = config.build_vehicles()?;
        let tasks = config.build_tasks()?;
        let subtasks = split_tasks(&tasks, config.subtask_unit)?;
        let task_index: BTreeMap<u32, usize> = tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
        let task_of = subtasks.iter().map(|s| task_index[&s.parent_task]).collect();
        let k = config.task_vehicle.expect("resolved");
        let task_col = vehicles.iter().position(|v| v.id == k).expect("validated");

        let (env, mut departures) = match &config.explicit {
            Some(ex) => (Env::Explicit(ex.unit_times_s.clone()), ex.departures_s.clone()),
            None => {
                let samples = match &config.trace {
                    Some(path) => load_trace(path)?,
                    None => gen_freeway_trace(
                        &vehicles,
                        config.horizon,
                        &config.mobility,
                        derive_seed(config.rng_seed, SEED_TRACE),
                    )?,
                };
                let traces = TraceSet::from_samples(&samples)?;
                let departures = scan_departures(&traces, &vehicles, k, &config)?;
                (Env::Trace(traces), departures)
            }
        };
        // The task vehicle never leaves itself.
        departures[task_col] = f64::INFINITY;

        let estimated_departures = if config.harness.stay_noise_std > 0.0 {
            let noise = Normal::new(0.0, config.harness.stay_noise_std)
                .map_err(|e| ConfigError::invalid("harness.stay_noise_std", e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.rng_seed, SEED_NOISE));
            departures
                .iter()
                .map(|&d| {
                    let e = noise.sample(&mut rng);
                    if d.is_finite() {
                        (d + e).max(0.0)
                    } else {
                        d
                    }
                })
                .collect()
        } else {
            departures.clone()
        };

        Ok(World {
            config,
            vehicles,
            tasks,
            subtasks,
            task_of,
            task_col,
            departures,
            estimated_departures,
            env,
        })
    }

    pub fn n_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn vehicle_ids(&self) -> Vec<u32> {
        self.vehicles.iter().map(|v| v.id).collect()
    }

    pub fn traces(&self) -> Option<&TraceSet> {
        match &self.env {
            Env::Trace(t) => Some(t),
            Env::Explicit(_) => None,
        }
    }

    pub fn is_present(&self, j: usize, t: f64) -> bool {
        t < self.departures[j]
    }

    /// Cost of each listed subtask on every vehicle when planned at `t`, with
    /// the band split `m_prime` ways. Departed vehicles cost infinity.
    pub fn costs_at(&self, t: f64, rows: &[usize], m_prime: usize) -> Result<CostTimeMatrix, HarnessError> {
        let n = self.n_vehicles();
        let mut m = match &self.env {
            Env::Explicit(unit) => CostTimeMatrix::from_rows(&vec![unit.clone(); rows.len()]),
            Env::Trace(traces) => {
                let hops = self.hops_at(traces, t)?;
                let subs: Vec<Subtask> = rows.iter().map(|&i| self.subtasks[i].clone()).collect();
                let ctx = CostContext {
                    channel: &self.config.channel,
                    task_vehicle: self.task_col,
                    hops: &hops,
                    m_prime,
                };
                preview_costs(&subs, &self.vehicles, &ctx)?
            }
        };
        for j in (0..n).filter(|&j| !self.is_present(j, t)) {
            for i in 0..rows.len() {
                m.set(i, j, f64::INFINITY);
            }
        }
        Ok(m)
    }

    fn hops_at(&self, traces: &TraceSet, t: f64) -> Result<Vec<Option<u32>>, HarnessError> {
        let (_, end) = traces.horizon().expect("non-empty");
        let g = connectivity_at(traces, t.min(end), self.config.comm_range)?;
        let by_id = g.hops_from(self.vehicles[self.task_col].id)?;
        let pos: BTreeMap<u32, usize> = g.ids().iter().enumerate().map(|(i, &id)| (id, i)).collect();
        self.vehicles
            .iter()
            .map(|v| {
                pos.get(&v.id)
                    .map(|&i| by_id[i])
                    .ok_or_else(|| TraceError::UnknownVehicle(v.id).into())
            })
            .collect()
    }

    /// Distance from the task vehicle at `t`; configured positions when there is no trace.
    pub fn distances_at(&self, t: f64) -> Vec<f64> {
        let k = &self.vehicles[self.task_col];
        match &self.env {
            Env::Explicit(_) => self.vehicles.iter().map(|v| v.position.distance(&k.position)).collect(),
            Env::Trace(traces) => {
                let at = |id| traces.position_at(id, t).ok().flatten();
                let pk = at(k.id);
                self.vehicles
                    .iter()
                    .map(|v| match (pk, at(v.id)) {
                        (Some(a), Some(b)) => a.distance(&b),
                        _ => f64::INFINITY,
                    })
                    .collect()
            }
        }
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.vehicles.iter().map(|v| v.compute_capacity).collect()
    }
}

fn scan_departures(
    traces: &TraceSet,
    vehicles: &[Vehicle],
    task_vehicle: u32,
    config: &ScenarioConfig,
) -> Result<Vec<f64>, HarnessError> {
    let scan = StayScan {
        comm_range: config.comm_range,
        horizon: config.horizon,
        dt: config.stay_scan_dt,
    };
    let stays: BTreeMap<u32, f64> = estimate_stays(traces, task_vehicle, 0.0, &scan)?
        .into_iter()
        .map(|s| (s.vehicle_id, s.stay_time))
        .collect();
    vehicles
        .iter()
        .map(|v| {
            stays
                .get(&v.id)
                .copied()
                .ok_or_else(|| TraceError::UnknownVehicle(v.id).into())
        })
        .collect()
}
