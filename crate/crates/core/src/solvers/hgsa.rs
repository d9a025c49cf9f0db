//! Greedy construction followed by simulated annealing over the makespan.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{is_feasible, totals, AnnealSchedule, LoadState, SolveOutcome};
use crate::cost::Problem;
use crate::error::SolveError;

/// Neighbourhood used by the annealing phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborMove {
    /// Swap the vehicles of two subtasks of different categories; when every
    /// subtask shares one category, move a single subtask instead.
    TypeSwap,
    /// Each step flips a coin between the type swap and a single-subtask move.
    #[default]
    Mixed,
}

/// Assigns subtasks in row order, each to the vehicle minimising `τ_j + C_ij`
/// among those that keep every constraint satisfied. Ties go to the lowest
/// column.
pub fn greedy_init(problem: &Problem) -> Result<SolveOutcome, SolveError> {
    let mut state = LoadState::new(problem);
    let mut assignment = Vec::with_capacity(problem.subtasks());
    for i in 0..problem.subtasks() {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..problem.vehicles() {
            if !state.fits(i, j) {
                continue;
            }
            let load = state.tau[j] + problem.costs.get(i, j);
            if best.is_none_or(|(_, b)| load < b) {
                best = Some((j, load));
            }
        }
        let (j, _) = best.ok_or(SolveError::Infeasible { subtask: i })?;
        state.add(i, j);
        assignment.push(j);
    }
    Ok(SolveOutcome::from_assignment(problem, assignment))
}

enum Proposal {
    Swap { a: usize, b: usize },
    Move { a: usize, to: usize },
}

struct Annealer<'a, R: Rng + ?Sized> {
    p: &'a Problem,
    state: LoadState<'a>,
    assignment: Vec<usize>,
    /// At least two categories present, so a type swap is possible.
    mixed_types: bool,
    rng: &'a mut R,
}

impl<R: Rng + ?Sized> Annealer<'_, R> {
    fn propose(&mut self, neighbor: NeighborMove) -> Option<Proposal> {
        let m = self.p.subtasks();
        let swap = self.mixed_types
            && match neighbor {
                NeighborMove::TypeSwap => true,
                NeighborMove::Mixed => self.rng.random_bool(0.5),
            };
        let a = self.rng.random_range(0..m);
        if swap {
            let cat = self.p.categories[a];
            let b = loop {
                let b = self.rng.random_range(0..m);
                if self.p.categories[b] != cat {
                    break b;
                }
            };
            (self.assignment[a] != self.assignment[b]).then_some(Proposal::Swap { a, b })
        } else {
            let from = self.assignment[a];
            let choices: Vec<usize> = (0..self.p.vehicles())
                .filter(|&j| j != from && self.p.costs.is_candidate(a, j))
                .collect();
            if choices.is_empty() {
                return None;
            }
            let to = choices[self.rng.random_range(0..choices.len())];
            Some(Proposal::Move { a, to })
        }
    }

    /// Applies the proposal if it keeps every constraint; returns whether it did.
    fn apply(&mut self, prop: &Proposal) -> bool {
        match *prop {
            Proposal::Swap { a, b } => {
                let (ja, jb) = (self.assignment[a], self.assignment[b]);
                self.state.remove(a, ja);
                self.state.remove(b, jb);
                if self.state.fits(a, jb) {
                    self.state.add(a, jb);
                    if self.state.fits(b, ja) {
                        self.state.add(b, ja);
                        self.assignment[a] = jb;
                        self.assignment[b] = ja;
                        return true;
                    }
                    self.state.remove(a, jb);
                }
                self.state.add(a, ja);
                self.state.add(b, jb);
                false
            }
            Proposal::Move { a, to } => {
                let from = self.assignment[a];
                self.state.remove(a, from);
                if self.state.fits(a, to) {
                    self.state.add(a, to);
                    self.assignment[a] = to;
                    true
                } else {
                    self.state.add(a, from);
                    false
                }
            }
        }
    }

    fn undo(&mut self, prop: &Proposal) {
        match *prop {
            Proposal::Swap { a, b } => {
                let (ja, jb) = (self.assignment[a], self.assignment[b]);
                self.state.remove(a, ja);
                self.state.remove(b, jb);
                self.state.add(a, jb);
                self.state.add(b, ja);
                self.assignment[a] = jb;
                self.assignment[b] = ja;
            }
            Proposal::Move { a, to } => {
                // Reverse move: `to` is the vehicle the subtask returns to.
                let from = self.assignment[a];
                self.state.remove(a, from);
                self.state.add(a, to);
                self.assignment[a] = to;
            }
        }
    }

    fn resync(&mut self) {
        let mut state = LoadState::new(self.p);
        for (i, &j) in self.assignment.iter().enumerate() {
            state.add(i, j);
        }
        self.state = state;
    }
}

/// Greedy seed plus Metropolis annealing. Returns the best feasible plan seen.
pub fn hgsa<R: Rng + ?Sized>(
    problem: &Problem,
    sched: &AnnealSchedule,
    neighbor: NeighborMove,
    rng: &mut R,
) -> Result<SolveOutcome, SolveError> {
    sched.validate()?;
    let greedy = greedy_init(problem)?;
    let first_cat = problem.categories.first().copied();
    let mixed_types = problem.categories.iter().any(|&c| Some(c) != first_cat);
    let mut best = greedy.assignment.clone();
    let mut best_makespan = greedy.makespan;
    let mut ann = Annealer {
        p: problem,
        state: LoadState::new(problem),
        assignment: greedy.assignment,
        mixed_types,
        rng,
    };
    ann.resync();
    let mut current = ann.state.makespan();
    let mut iterations = 0u64;
    let mut accepted_worse = 0u64;
    let mut temp = sched.t_max;
    while temp > sched.t_min {
        iterations += 1;
        if iterations % 1024 == 0 {
            ann.resync();
            current = ann.state.makespan();
        }
        if let Some(prop) = ann.propose(neighbor) {
            let reverse = match prop {
                Proposal::Swap { a, b } => Proposal::Swap { a, b },
                Proposal::Move { a, .. } => Proposal::Move {
                    a,
                    to: ann.assignment[a],
                },
            };
            if ann.apply(&prop) {
                let candidate = ann.state.makespan();
                let delta = candidate - current;
                let accept = delta < 0.0 || ann.rng.random::<f64>() < (-delta / temp).exp();
                if accept {
                    if delta > 0.0 {
                        accepted_worse += 1;
                    }
                    current = candidate;
                    if candidate < best_makespan && is_feasible(problem, &ann.assignment) {
                        let exact = totals(problem, &ann.assignment).into_iter().fold(0.0, f64::max);
                        if exact < best_makespan {
                            best_makespan = exact;
                            best.clone_from(&ann.assignment);
                        }
                    }
                } else {
                    ann.undo(&reverse);
                }
            }
        }
        temp *= sched.alpha;
    }
    let mut out = SolveOutcome::from_assignment(problem, best);
    out.iterations = iterations;
    out.accepted_worse = accepted_worse;
    Ok(out)
}

/// Runs [`hgsa`] `repetitions` times, the first on the given row order and the
/// rest on shuffled orders, and keeps the lowest makespan.
pub fn hgsa_with_restarts<R: Rng + ?Sized>(
    problem: &Problem,
    sched: &AnnealSchedule,
    neighbor: NeighborMove,
    repetitions: u32,
    rng: &mut R,
) -> Result<SolveOutcome, SolveError> {
    if repetitions <= 1 {
        return hgsa(problem, sched, neighbor, rng);
    }
    let m = problem.subtasks();
    let mut best: Option<SolveOutcome> = None;
    let mut first_err = None;
    let (mut iterations, mut accepted_worse) = (0, 0);
    for rep in 0..repetitions {
        let mut order: Vec<usize> = (0..m).collect();
        if rep > 0 {
            order.shuffle(rng);
        }
        let sub = problem.select_rows(&order);
        match hgsa(&sub, sched, neighbor, rng) {
            Ok(out) => {
                iterations += out.iterations;
                accepted_worse += out.accepted_worse;
                let mut assignment = vec![0; m];
                for (r, &row) in order.iter().enumerate() {
                    assignment[row] = out.assignment[r];
                }
                let cand = SolveOutcome::from_assignment(problem, assignment);
                if best.as_ref().is_none_or(|b| cand.makespan < b.makespan) {
                    best = Some(cand);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some(mut b) => {
            b.iterations = iterations;
            b.accepted_worse = accepted_worse;
            Ok(b)
        }
        None => Err(first_err.expect("at least one repetition ran")),
    }
}
