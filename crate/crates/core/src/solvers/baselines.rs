//! Comparison strategies: uniform random placement and three fill-in-order
//! heuristics (distance first, strongest compute first, shortest stay first).

use std::cmp::Ordering;

use rand::Rng;

use super::{LoadState, SolveOutcome};
use crate::cost::Problem;
use crate::error::SolveError;

/// Each subtask goes to a uniformly drawn finite-cost vehicle, redrawn until
/// the constraints hold or `retries` draws are spent.
pub fn solve_random<R: Rng + ?Sized>(problem: &Problem, retries: u32, rng: &mut R) -> Result<SolveOutcome, SolveError> {
    let mut state = LoadState::new(problem);
    let mut assignment = Vec::with_capacity(problem.subtasks());
    for i in 0..problem.subtasks() {
        let choices: Vec<usize> = (0..problem.vehicles())
            .filter(|&j| problem.costs.is_candidate(i, j))
            .collect();
        if choices.is_empty() {
            return Err(SolveError::Infeasible { subtask: i });
        }
        let mut placed = None;
        for _ in 0..retries.max(1) {
            let j = choices[rng.random_range(0..choices.len())];
            if state.fits(i, j) {
                placed = Some(j);
                break;
            }
        }
        let j = placed.ok_or(SolveError::Infeasible { subtask: i })?;
        state.add(i, j);
        assignment.push(j);
    }
    Ok(SolveOutcome::from_assignment(problem, assignment))
}

/// Service vehicles sorted by `cmp` (ties by column), task vehicle last.
fn fill_order(problem: &Problem, cmp: impl Fn(usize, usize) -> Ordering) -> Vec<usize> {
    let k = problem.task_vehicle;
    let mut order: Vec<usize> = (0..problem.vehicles()).filter(|&j| j != k).collect();
    order.sort_by(|&a, &b| cmp(a, b).then(a.cmp(&b)));
    if k < problem.vehicles() {
        order.push(k);
    }
    order
}

/// Places each subtask, in row order, on the first vehicle of `order` that
/// still has budget for it.
fn fill(problem: &Problem, order: &[usize]) -> Result<SolveOutcome, SolveError> {
    let mut state = LoadState::new(problem);
    let mut assignment = Vec::with_capacity(problem.subtasks());
    for i in 0..problem.subtasks() {
        let j = order
            .iter()
            .copied()
            .find(|&j| state.fits(i, j))
            .ok_or(SolveError::Infeasible { subtask: i })?;
        state.add(i, j);
        assignment.push(j);
    }
    Ok(SolveOutcome::from_assignment(problem, assignment))
}

/// Nearest vehicle first.
pub fn solve_df(problem: &Problem) -> Result<SolveOutcome, SolveError> {
    let d = &problem.distances;
    fill(problem, &fill_order(problem, |a, b| d[a].total_cmp(&d[b])))
}

/// Highest compute capacity first.
pub fn solve_scf(problem: &Problem) -> Result<SolveOutcome, SolveError> {
    let f = &problem.capacities;
    fill(problem, &fill_order(problem, |a, b| f[b].total_cmp(&f[a])))
}

/// Earliest-leaving vehicle first; vehicles that never leave come last.
pub fn solve_ssf(problem: &Problem) -> Result<SolveOutcome, SolveError> {
    let s = &problem.stays;
    fill(problem, &fill_order(problem, |a, b| s[a].total_cmp(&s[b])))
}
