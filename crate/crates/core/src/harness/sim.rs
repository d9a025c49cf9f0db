use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::MetricsRecord;
use super::world::World;
use crate::candidate::{record_outcome, select_candidates, CandidateFeatures, Histories, Outcome, SuitabilityModel};
use crate::config::{derive_seed, SEED_ADMIT, SEED_PLAN};
use crate::cost::{CostTimeMatrix, Problem};
use crate::error::{HarnessError, SolveError};
use crate::solvers::{solve, SolveOutcome, SolverKind, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    Off,
    On,
}

impl FilterMode {
    pub fn is_on(self) -> bool {
        self == FilterMode::On
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_on() { "on" } else { "off" })
    }
}

impl FromStr for FilterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "on" | "true" => Ok(FilterMode::On),
            "off" | "false" => Ok(FilterMode::Off),
            _ => Err(format!("filter must be on|off, got '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimEventKind {
    SubtaskComplete {
        subtask: usize,
        vehicle: usize,
    },
    VehicleDeparted {
        vehicle: usize,
    },
    /// Emitted at re-planning time for each orphaned subtask.
    Reoffload {
        subtask: usize,
        from: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub kind: SimEventKind,
}

/// Heap entry; earliest time first, then insertion order.
#[derive(Debug)]
struct Pending {
    time: f64,
    seq: u64,
    kind: SimEventKind,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone)]
struct Job {
    subtask: usize,
    vehicle: usize,
    start: f64,
    finish: f64,
    round: usize,
    done: bool,
}

/// One vehicle's share of a planning round, awaiting its outcome.
#[derive(Debug, Clone)]
struct Share {
    vehicle: usize,
    task_id: u32,
    features: CandidateFeatures,
    remaining: usize,
    settled: bool,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub metrics: MetricsRecord,
    /// Processed events in time order.
    pub events: Vec<SimEvent>,
}

/// Runs scenarios while carrying the suitability model and vehicle
/// histories from one run to the next.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub model: SuitabilityModel,
    pub histories: Histories,
    pub options: SolverOptions,
}

impl Simulator {
    pub fn from_world(world: &World) -> Self {
        Simulator {
            model: SuitabilityModel::new(world.config.candidate.suitability()),
            histories: world.config.build_histories(),
            options: world.config.solver_options(),
        }
    }

    pub fn run<R: Rng + ?Sized>(
        &mut self,
        world: &World,
        solver: SolverKind,
        filter: FilterMode,
        scenario: &str,
        rng: &mut R,
    ) -> Result<Simulation, HarnessError> {
        let mut run = Run::new(world, self, solver, filter);
        let all: Vec<usize> = (0..world.subtasks.len()).collect();
        let planned = run.plan(0.0, &all, rng)?;
        for (j, &d) in world.departures.iter().enumerate() {
            if d.is_finite() {
                run.push(d, SimEventKind::VehicleDeparted { vehicle: j });
            }
        }
        while let Some(ev) = run.heap.pop() {
            run.events.push(SimEvent {
                time: ev.time,
                kind: ev.kind,
            });
            match ev.kind {
                SimEventKind::SubtaskComplete { subtask, .. } => run.complete(ev.time, subtask),
                SimEventKind::VehicleDeparted { vehicle } => run.depart(ev.time, vehicle, rng)?,
                SimEventKind::Reoffload { .. } => {}
            }
        }
        let metrics = run.metrics(scenario, planned);
        Ok(Simulation {
            metrics,
            events: run.events,
        })
    }
}

impl Simulator {
    /// The initial plan alone, without executing it.
    pub fn plan<R: Rng + ?Sized>(
        &mut self,
        world: &World,
        solver: SolverKind,
        filter: FilterMode,
        rng: &mut R,
    ) -> Result<(Problem, Result<SolveOutcome, SolveError>), HarnessError> {
        let mut run = Run::new(world, self, solver, filter);
        let all: Vec<usize> = (0..world.subtasks.len()).collect();
        let (problem, _, _) = run.problem_at(0.0, &all)?;
        let out = solve(solver, &problem, &run.sim.options, rng);
        Ok((problem, out))
    }
}

struct Run<'a> {
    world: &'a World,
    sim: &'a mut Simulator,
    solver: SolverKind,
    filter: FilterMode,
    jobs: Vec<Job>,
    shares: Vec<Share>,
    busy_until: Vec<f64>,
    heap: BinaryHeap<Pending>,
    seq: u64,
    events: Vec<SimEvent>,
    completed_at: Vec<f64>,
    /// Latest job of each subtask.
    current_job: Vec<usize>,
    task_failed: Vec<bool>,
    reoffloads: usize,
    infeasible: bool,
    /// Admission draws come from the scenario, not the solver, so every
    /// solver sees the same first candidate sets.
    admit_rng: ChaCha8Rng,
}

impl<'a> Run<'a> {
    fn new(world: &'a World, sim: &'a mut Simulator, solver: SolverKind, filter: FilterMode) -> Self {
        Run {
            world,
            sim,
            solver,
            filter,
            jobs: Vec::new(),
            shares: Vec::new(),
            busy_until: vec![0.0; world.n_vehicles()],
            heap: BinaryHeap::new(),
            seq: 0,
            events: Vec::new(),
            completed_at: vec![f64::NAN; world.subtasks.len()],
            current_job: vec![usize::MAX; world.subtasks.len()],
            task_failed: vec![false; world.tasks.len()],
            reoffloads: 0,
            infeasible: false,
            admit_rng: ChaCha8Rng::seed_from_u64(derive_seed(world.config.rng_seed, SEED_ADMIT)),
        }
    }

    fn push(&mut self, time: f64, kind: SimEventKind) {
        self.heap.push(Pending {
            time,
            seq: self.seq,
            kind,
        });
        self.seq += 1;
    }

    /// The assignment problem for `rows` at time `t`, the unmasked costs and
    /// the remaining stays the planner believes in.
    fn problem_at(&mut self, t: f64, rows: &[usize]) -> Result<(Problem, CostTimeMatrix, Vec<f64>), HarnessError> {
        let w = self.world;
        let n = w.n_vehicles();
        let k = w.task_col;
        // Re-sent subtasks keep the bandwidth share of the original round.
        let preview = w.costs_at(t, rows, w.subtasks.len())?;
        let stays: Vec<f64> = (0..n)
            .map(|j| {
                if j == k {
                    f64::INFINITY
                } else if !w.is_present(j, t) {
                    0.0
                } else {
                    (w.estimated_departures[j] - t).max(0.0)
                }
            })
            .collect();
        let fill = self.solver.is_fill_baseline();
        let masked = self.filter.is_on() && (!fill || w.config.harness.baselines_use_filter);
        let stay_aware = self.filter.is_on() || fill;
        let costs = if masked {
            let sets = select_candidates(
                &preview,
                &stays,
                &w.vehicle_ids(),
                k,
                &self.sim.histories,
                &self.sim.model,
                &mut self.admit_rng,
            );
            preview.masked(&sets)
        } else {
            preview.clone()
        };
        let problem = Problem {
            costs,
            categories: rows.iter().map(|&i| w.subtasks[i].category.kind).collect(),
            task_of: rows.iter().map(|&i| w.task_of[i]).collect(),
            deadlines: w.tasks.iter().map(|task| task.deadline - t).collect(),
            stays: if stay_aware {
                stays.clone()
            } else {
                vec![f64::INFINITY; n]
            },
            initial_load: self.busy_until.iter().map(|&b| (b - t).max(0.0)).collect(),
            distances: w.distances_at(t),
            capacities: w.capacities(),
            task_vehicle: k,
        };
        Ok((problem, preview, stays))
    }

    /// Plans `rows` at time `t` and queues them; returns the planned makespan
    /// (NaN when planning failed and the rows fell back to local execution).
    fn plan<R: Rng + ?Sized>(&mut self, t: f64, rows: &[usize], rng: &mut R) -> Result<f64, HarnessError> {
        let w = self.world;
        let n = w.n_vehicles();
        let k = w.task_col;
        let (problem, preview, stays) = self.problem_at(t, rows)?;
        match solve(self.solver, &problem, &self.sim.options, rng) {
            Ok(out) => {
                let round_start = self.shares.len();
                let mut share_of = vec![None; n];
                for (r, &i) in rows.iter().enumerate() {
                    let j = out.assignment[r];
                    if j != k {
                        let idx = *share_of[j].get_or_insert_with(|| {
                            self.shares.push(Share {
                                vehicle: j,
                                task_id: w.tasks[w.task_of[i]].id,
                                features: CandidateFeatures {
                                    stay_time: stays[j],
                                    completion_time: out.tau[j],
                                    history_success_rate: self.sim.histories.success_rate(w.vehicles[j].id),
                                },
                                remaining: 0,
                                settled: false,
                            });
                            self.shares.len() - 1
                        });
                        self.shares[idx].remaining += 1;
                    }
                    self.assign(t, i, j, problem.costs.get(r, j), share_of[j].unwrap_or(usize::MAX));
                }
                debug_assert!(self.shares[round_start..].iter().all(|s| s.remaining > 0));
                Ok(out.makespan)
            }
            Err(e) => {
                log::debug!("planning {} subtasks at t={t} failed: {e}; running locally", rows.len());
                self.infeasible = true;
                for (r, &i) in rows.iter().enumerate() {
                    self.task_failed[w.task_of[i]] = true;
                    self.assign(t, i, k, preview.get(r, k), usize::MAX);
                }
                Ok(f64::NAN)
            }
        }
    }

    fn assign(&mut self, t: f64, subtask: usize, vehicle: usize, cost: f64, round: usize) {
        let start = self.busy_until[vehicle].max(t);
        let finish = start + cost;
        self.busy_until[vehicle] = finish;
        self.current_job[subtask] = self.jobs.len();
        self.jobs.push(Job {
            subtask,
            vehicle,
            start,
            finish,
            round,
            done: false,
        });
        if self.world.is_present(vehicle, finish) {
            self.push(finish, SimEventKind::SubtaskComplete { subtask, vehicle });
        }
    }

    fn complete(&mut self, t: f64, subtask: usize) {
        let job = &mut self.jobs[self.current_job[subtask]];
        debug_assert!(!job.done);
        job.done = true;
        self.completed_at[subtask] = t;
        let round = job.round;
        if let Some(share) = self.shares.get_mut(round) {
            share.remaining -= 1;
            if share.remaining == 0 && !share.settled {
                share.settled = true;
                let share = share.clone();
                self.settle(&share, Outcome::Success);
            }
        }
    }

    fn depart<R: Rng + ?Sized>(&mut self, t: f64, vehicle: usize, rng: &mut R) -> Result<(), HarnessError> {
        let orphans: Vec<usize> = self
            .jobs
            .iter()
            .filter(|j| j.vehicle == vehicle && !j.done)
            .map(|j| j.subtask)
            .collect();
        let failed_rounds: Vec<usize> = self
            .jobs
            .iter()
            .filter(|j| j.vehicle == vehicle && !j.done && j.round != usize::MAX)
            .map(|j| j.round)
            .collect();
        // Detach so these jobs are not matched again.
        for j in self.jobs.iter_mut().filter(|j| j.vehicle == vehicle && !j.done) {
            j.done = true;
            j.finish = f64::NAN;
        }
        for r in failed_rounds {
            let share = &mut self.shares[r];
            if !share.settled {
                share.settled = true;
                let share = share.clone();
                self.settle(&share, Outcome::Failure);
            }
        }
        if orphans.is_empty() {
            return Ok(());
        }
        for &s in &orphans {
            self.events.push(SimEvent {
                time: t,
                kind: SimEventKind::Reoffload {
                    subtask: s,
                    from: vehicle,
                },
            });
        }
        self.reoffloads += orphans.len();
        self.plan(t, &orphans, rng)?;
        Ok(())
    }

    fn settle(&mut self, share: &Share, outcome: Outcome) {
        let id = self.world.vehicles[share.vehicle].id;
        record_outcome(
            &mut self.sim.model,
            &mut self.sim.histories,
            id,
            share.task_id,
            share.features,
            outcome,
        );
    }

    fn metrics(&self, scenario: &str, planned: f64) -> MetricsRecord {
        let w = self.world;
        let mut task_done = vec![0.0f64; w.tasks.len()];
        for (i, &c) in self.completed_at.iter().enumerate() {
            let t = &mut task_done[w.task_of[i]];
            *t = t.max(c);
        }
        let failed = w
            .tasks
            .iter()
            .enumerate()
            .filter(|&(ti, task)| self.task_failed[ti] || !(task_done[ti] <= task.deadline))
            .count();
        let mut busy = vec![0.0; w.n_vehicles()];
        for job in &self.jobs {
            let end = if job.finish.is_nan() {
                w.departures[job.vehicle]
            } else {
                job.finish
            };
            busy[job.vehicle] += (end.min(w.departures[job.vehicle]) - job.start).max(0.0);
        }
        let m = self.completed_at.len();
        MetricsRecord {
            scenario: scenario.to_string(),
            solver: self.solver,
            filter: self.filter,
            n_vehicles: w.n_vehicles(),
            n_subtasks: m,
            makespan: self.completed_at.iter().copied().fold(0.0, f64::max),
            planned_makespan: planned,
            avg_subtask_delay: self.completed_at.iter().sum::<f64>() / m as f64,
            reoffload_count: self.reoffloads,
            failed_tasks: failed,
            infeasible: self.infeasible,
            per_vehicle_busy: busy,
        }
    }
}

/// Builds the world for `cfg` and runs one solver on it with fresh learning state.
pub fn run_scenario(
    cfg: &crate::config::ScenarioConfig,
    solver: SolverKind,
    filter: FilterMode,
) -> Result<MetricsRecord, HarnessError> {
    let world = World::build(cfg)?;
    run_world(&world, solver, filter, "scenario")
}

/// Runs one solver on a prepared world; the rng derives from the scenario
/// seed and the solver so results do not depend on run order.
pub fn run_world(
    world: &World,
    solver: SolverKind,
    filter: FilterMode,
    scenario: &str,
) -> Result<MetricsRecord, HarnessError> {
    let mut rng = planning_rng(world.config.rng_seed, solver);
    let mut sim = Simulator::from_world(world);
    Ok(sim.run(world, solver, filter, scenario, &mut rng)?.metrics)
}

pub fn planning_rng(seed: u64, solver: SolverKind) -> ChaCha8Rng {
    let idx = SolverKind::ALL.iter().position(|&k| k == solver).unwrap_or(0) as u64;
    ChaCha8Rng::seed_from_u64(derive_seed(seed, SEED_PLAN + 16 * idx))
}
