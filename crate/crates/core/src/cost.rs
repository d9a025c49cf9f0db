//! Cost-time matrix construction and evaluation of offloading plans against
//! the makespan objective and the deadline/stay constraints.

use crate::candidate::CandidateSets;
use crate::comms::{tran_delay, ChannelParams};
use crate::error::{CostError, ModelError};
use crate::model::{OffloadingMatrix, Subtask, TaskKind, Vehicle};

/// m'×n completion times in seconds. `f64::INFINITY` marks a vehicle that is
/// not a candidate for that subtask.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTimeMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl CostTimeMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged cost matrix");
            entries.extend_from_slice(r);
        }
        CostTimeMatrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        CostTimeMatrix {
            rows,
            cols,
            entries: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_candidate(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_finite()
    }

    /// Copy with every non-candidate entry replaced by infinity.
    pub fn masked(&self, candidates: &CandidateSets) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !candidates.contains(i, j) {
                    out.set(i, j, f64::INFINITY);
                }
            }
        }
        out
    }

    /// First row without a finite entry, if any.
    pub fn first_empty_row(&self) -> Option<usize> {
        (0..self.rows).find(|&i| self.row(i).iter().all(|c| !c.is_finite()))
    }

    /// Reorders rows: row `i` of the result is row `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for &r in order {
            entries.extend_from_slice(self.row(r));
        }
        CostTimeMatrix {
            rows: order.len(),
            cols: self.cols,
            entries,
        }
    }
}

/// Everything needed to cost one subtask on one vehicle.
#[derive(Debug, Clone)]
pub struct CostContext<'a> {
    pub channel: &'a ChannelParams,
    /// Column of the task vehicle.
    pub task_vehicle: usize,
    /// Hop count from the task vehicle to each vehicle; `None` = unreachable.
    pub hops: &'a [Option<u32>],
    /// Subtasks sharing the band in this planning round.
    pub m_prime: usize,
}

/// Completion time of `subtask` on `vehicles[j]`: compute time, plus the
/// multi-hop transfer when `j` is not the task vehicle. Unreachable vehicles
/// cost infinity.
pub fn subtask_delay(
    subtask: &Subtask,
    vehicles: &[Vehicle],
    j: usize,
    ctx: &CostContext<'_>,
) -> Result<f64, CostError> {
    let f = vehicles[j].compute_capacity;
    if !(f > 0.0) {
        return Err(CostError::NoCompute { vehicle: j });
    }
    let compute = subtask.category.complexity * subtask.size / f;
    if j == ctx.task_vehicle {
        return Ok(compute);
    }
    match ctx.hops[j] {
        None | Some(0) => Ok(f64::INFINITY),
        Some(mu) => Ok(compute + tran_delay(subtask.size, ctx.channel, ctx.m_prime, mu)?),
    }
}

/// Cost of every (subtask, vehicle) pair, ignoring candidate filtering.
pub fn preview_costs(
    subtasks: &[Subtask],
    vehicles: &[Vehicle],
    ctx: &CostContext<'_>,
) -> Result<CostTimeMatrix, CostError> {
    let n = vehicles.len();
    let mut m = CostTimeMatrix::filled(subtasks.len(), n, f64::INFINITY);
    for (i, s) in subtasks.iter().enumerate() {
        for j in 0..n {
            m.set(i, j, subtask_delay(s, vehicles, j, ctx)?);
        }
    }
    Ok(m)
}

/// Cost matrix restricted to each subtask's candidate set.
pub fn build_cost_matrix(
    subtasks: &[Subtask],
    vehicles: &[Vehicle],
    candidates: &CandidateSets,
    ctx: &CostContext<'_>,
) -> Result<CostTimeMatrix, CostError> {
    let m = preview_costs(subtasks, vehicles, ctx)?.masked(candidates);
    match m.first_empty_row() {
        Some(subtask) => Err(CostError::EmptyCandidates { subtask }),
        None => Ok(m),
    }
}

/// A cost matrix plus the side information solvers and the evaluator need.
#[derive(Debug, Clone)]
pub struct Problem {
    pub costs: CostTimeMatrix,
    /// Category of each row, used by the annealing swap move.
    pub categories: Vec<TaskKind>,
    /// Index into `deadlines` of each row's parent task.
    pub task_of: Vec<usize>,
    /// Per task, seconds.
    pub deadlines: Vec<f64>,
    /// Per vehicle, seconds from planning time; infinity = never leaves.
    pub stays: Vec<f64>,
    /// Per vehicle, work already queued at planning time (seconds).
    pub initial_load: Vec<f64>,
    /// Per vehicle, meters from the task vehicle.
    pub distances: Vec<f64>,
    /// Per vehicle, cycles/s.
    pub capacities: Vec<f64>,
    pub task_vehicle: usize,
}

impl Problem {
    /// Single task, no deadline, infinite stays, idle vehicles.
    pub fn from_costs(costs: CostTimeMatrix) -> Self {
        let (m, n) = (costs.rows(), costs.cols());
        Problem {
            costs,
            categories: vec![TaskKind::A; m],
            task_of: vec![0; m],
            deadlines: vec![f64::INFINITY],
            stays: vec![f64::INFINITY; n],
            initial_load: vec![0.0; n],
            distances: (0..n).map(|j| j as f64).collect(),
            capacities: vec![1.0; n],
            task_vehicle: 0,
        }
    }

    pub fn subtasks(&self) -> usize {
        self.costs.rows()
    }

    pub fn vehicles(&self) -> usize {
        self.costs.cols()
    }

    pub fn with_stays(mut self, stays: Vec<f64>) -> Self {
        self.stays = stays;
        self
    }

    /// Problem restricted to the given rows, in that order.
    pub fn select_rows(&self, order: &[usize]) -> Problem {
        Problem {
            costs: self.costs.permute_rows(order),
            categories: order.iter().map(|&i| self.categories[i]).collect(),
            task_of: order.iter().map(|&i| self.task_of[i]).collect(),
            ..self.clone()
        }
    }

    pub fn check_shapes(&self) -> Result<(), ModelError> {
        let (m, n) = (self.subtasks(), self.vehicles());
        let ok = self.categories.len() == m
            && self.task_of.len() == m
            && self.task_of.iter().all(|&t| t < self.deadlines.len())
            && self.stays.len() == n
            && self.initial_load.len() == n
            && self.distances.len() == n
            && self.capacities.len() == n
            && self.task_vehicle < n.max(1);
        if ok {
            Ok(())
        } else {
            Err(ModelError::ShapeMismatch {
                expected_rows: m,
                expected_cols: n,
                rows: self.task_of.len(),
                cols: self.stays.len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Row does not contain exactly one 1.
    Assignment {
        subtask: usize,
    },
    NonCandidate {
        subtask: usize,
        vehicle: usize,
    },
    Deadline {
        task: usize,
        completion: f64,
        limit: f64,
    },
    Stay {
        vehicle: usize,
        total: f64,
        stay: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    /// Initial load plus assigned completion times, per vehicle.
    pub per_vehicle_total: Vec<f64>,
    pub makespan: f64,
    /// Per task: max over vehicles of the summed delays of that task's subtasks.
    pub per_task_completion: Vec<f64>,
    pub violations: Vec<Violation>,
}

impl EvaluationResult {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-vehicle totals, makespan, per-task completion and constraint violations.
pub fn evaluate(x: &OffloadingMatrix, problem: &Problem) -> Result<EvaluationResult, CostError> {
    problem.check_shapes()?;
    let (m, n) = (problem.subtasks(), problem.vehicles());
    if x.rows() != m || x.cols() != n {
        return Err(ModelError::ShapeMismatch {
            expected_rows: m,
            expected_cols: n,
            rows: x.rows(),
            cols: x.cols(),
        }
        .into());
    }
    let mut violations = Vec::new();
    let mut totals = problem.initial_load.clone();
    let mut task_sums = vec![vec![0.0; n]; problem.deadlines.len()];
    for i in 0..m {
        if x.assigned_vehicle(i).is_none() {
            violations.push(Violation::Assignment { subtask: i });
        }
        for j in 0..n {
            let xij = x.get(i, j);
            if xij == 0 {
                continue;
            }
            let d = problem.costs.get(i, j);
            if !d.is_finite() {
                violations.push(Violation::NonCandidate { subtask: i, vehicle: j });
            }
            totals[j] += f64::from(xij) * d;
            task_sums[problem.task_of[i]][j] += f64::from(xij) * d;
        }
    }
    let per_task_completion: Vec<f64> = task_sums
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .collect();
    for (t, (&c, &limit)) in per_task_completion.iter().zip(&problem.deadlines).enumerate() {
        if c > limit {
            violations.push(Violation::Deadline {
                task: t,
                completion: c,
                limit,
            });
        }
    }
    // Work queued before planning may already overrun a stay; that only
    // counts against a plan which adds to it.
    let used: Vec<bool> = (0..n).map(|j| (0..m).any(|i| x.get(i, j) != 0)).collect();
    for (j, (&total, &stay)) in totals.iter().zip(&problem.stays).enumerate() {
        if used[j] && total > stay {
            violations.push(Violation::Stay {
                vehicle: j,
                total,
                stay,
            });
        }
    }
    let makespan = totals.iter().copied().fold(0.0, f64::max);
    Ok(EvaluationResult {
        per_vehicle_total: totals,
        makespan,
        per_task_completion,
        violations,
    })
}
