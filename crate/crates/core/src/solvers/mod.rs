//! Offloading-matrix solvers.
//!
//! All solvers share the same feasibility rules: an entry with infinite cost
//! is never used, a vehicle's cumulative time (initial load included) must
//! not exceed its stay time, and for each task the largest per-vehicle sum
//! of its subtasks' delays must not exceed the task deadline.

mod baselines;
mod brute;
mod hgsa;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::Problem;
use crate::error::SolveError;
use crate::model::OffloadingMatrix;

pub use baselines::{solve_df, solve_random, solve_scf, solve_ssf};
pub use brute::brute_force;
pub use hgsa::{greedy_init, hgsa, hgsa_with_restarts, NeighborMove};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealSchedule {
    pub t_max: f64,
    pub t_min: f64,
    /// Cooling factor applied once per iteration.
    pub alpha: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t_max: 100.0,
            t_min: 0.01,
            alpha: 0.98,
        }
    }
}

impl AnnealSchedule {
    /// Checks `0 < alpha < 1` and positive temperatures. `t_max <= t_min` is
    /// allowed and simply skips annealing.
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SolveError::InvalidSchedule(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.t_min > 0.0) || !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(SolveError::InvalidSchedule(format!(
                "temperatures must be positive, got t_max={} t_min={}",
                self.t_max, self.t_min
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x: OffloadingMatrix,
    /// Column of each subtask.
    pub assignment: Vec<usize>,
    /// Per-vehicle total time, initial load included.
    pub tau: Vec<f64>,
    pub makespan: f64,
    pub iterations: u64,
    pub accepted_worse: u64,
}

impl SolveOutcome {
    pub(crate) fn from_assignment(problem: &Problem, assignment: Vec<usize>) -> Self {
        let tau = totals(problem, &assignment);
        let makespan = tau.iter().copied().fold(0.0, f64::max);
        SolveOutcome {
            x: OffloadingMatrix::from_assignment(&assignment, problem.vehicles()),
            assignment,
            tau,
            makespan,
            iterations: 0,
            accepted_worse: 0,
        }
    }
}

/// Per-vehicle totals summed in row order.
pub(crate) fn totals(problem: &Problem, assignment: &[usize]) -> Vec<f64> {
    let mut tau = problem.initial_load.clone();
    for (i, &j) in assignment.iter().enumerate() {
        tau[j] += problem.costs.get(i, j);
    }
    tau
}

/// Exact feasibility check of a complete assignment.
pub(crate) fn is_feasible(problem: &Problem, assignment: &[usize]) -> bool {
    let n = problem.vehicles();
    let mut task_sums = vec![vec![0.0; n]; problem.deadlines.len()];
    for (i, &j) in assignment.iter().enumerate() {
        let c = problem.costs.get(i, j);
        if !c.is_finite() {
            return false;
        }
        task_sums[problem.task_of[i]][j] += c;
    }
    let tau = totals(problem, assignment);
    tau.iter().zip(&problem.stays).all(|(t, s)| t <= s)
        && task_sums
            .iter()
            .zip(&problem.deadlines)
            .all(|(row, &d)| row.iter().all(|&v| v <= d))
}

/// Incrementally maintained vehicle totals and per-task sums.
#[derive(Debug, Clone)]
pub(crate) struct LoadState<'a> {
    pub p: &'a Problem,
    pub tau: Vec<f64>,
    pub task_sums: Vec<Vec<f64>>,
}

impl<'a> LoadState<'a> {
    pub fn new(p: &'a Problem) -> Self {
        LoadState {
            p,
            tau: p.initial_load.clone(),
            task_sums: vec![vec![0.0; p.vehicles()]; p.deadlines.len()],
        }
    }

    /// Whether subtask `i` can be added to vehicle `j` without breaking a constraint.
    pub fn fits(&self, i: usize, j: usize) -> bool {
        let c = self.p.costs.get(i, j);
        let t = self.p.task_of[i];
        c.is_finite() && self.tau[j] + c <= self.p.stays[j] && self.task_sums[t][j] + c <= self.p.deadlines[t]
    }

    pub fn add(&mut self, i: usize, j: usize) {
        let c = self.p.costs.get(i, j);
        self.tau[j] += c;
        self.task_sums[self.p.task_of[i]][j] += c;
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        let c = self.p.costs.get(i, j);
        self.tau[j] -= c;
        self.task_sums[self.p.task_of[i]][j] -= c;
    }

    pub fn makespan(&self) -> f64 {
        self.tau.iter().copied().fold(0.0, f64::max)
    }
}

/// Solver names accepted on the command line and in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Hgsa,
    Random,
    Df,
    Scf,
    Ssf,
    Brute,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Hgsa,
        SolverKind::Random,
        SolverKind::Df,
        SolverKind::Scf,
        SolverKind::Ssf,
        SolverKind::Brute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Hgsa => "hgsa",
            SolverKind::Random => "random",
            SolverKind::Df => "df",
            SolverKind::Scf => "scf",
            SolverKind::Ssf => "ssf",
            SolverKind::Brute => "brute",
        }
    }

    /// Baselines whose definition ranks vehicles by stay-related budgets.
    pub fn is_fill_baseline(self) -> bool {
        matches!(self, SolverKind::Df | SolverKind::Scf | SolverKind::Ssf)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SolveError::UnknownSolver(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub anneal: AnnealSchedule,
    pub neighbor: NeighborMove,
    /// HGSA runs with shuffled row orders after the first; best is kept.
    pub hgsa_repetitions: u32,
    /// Random draws per subtask before giving up.
    pub random_retries: u32,
    /// Largest `n^m'` the exhaustive search accepts.
    pub brute_cap: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            anneal: AnnealSchedule::default(),
            neighbor: NeighborMove::default(),
            hgsa_repetitions: 5,
            random_retries: 100,
            brute_cap: 1_000_000,
        }
    }
}

/// Runs the named solver.
pub fn solve<R: Rng + ?Sized>(
    kind: SolverKind,
    problem: &Problem,
    opts: &SolverOptions,
    rng: &mut R,
) -> Result<SolveOutcome, SolveError> {
    match kind {
        SolverKind::Hgsa => hgsa_with_restarts(problem, &opts.anneal, opts.neighbor, opts.hgsa_repetitions.max(1), rng),
        SolverKind::Random => solve_random(problem, opts.random_retries, rng),
        SolverKind::Df => solve_df(problem),
        SolverKind::Scf => solve_scf(problem),
        SolverKind::Ssf => solve_ssf(problem),
        SolverKind::Brute => brute_force(problem, opts.brute_cap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_roundtrip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert!(matches!("sa".parse::<SolverKind>(), Err(SolveError::UnknownSolver(_))));
    }

    #[test]
    fn schedule_validation() {
        assert!(AnnealSchedule::default().validate().is_ok());
        let bad = AnnealSchedule {
            alpha: 1.0,
            ..AnnealSchedule::default()
        };
        assert!(bad.validate().is_err());
        let zero = AnnealSchedule {
            t_min: 0.0,
            ..AnnealSchedule::default()
        };
        assert!(zero.validate().is_err());
        let inverted = AnnealSchedule {
            t_max: 0.001,
            ..AnnealSchedule::default()
        };
        assert!(inverted.validate().is_ok());
    }
}
