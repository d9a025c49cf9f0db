use std::io::Write;

use super::sim::FilterMode;
use crate::solvers::SolverKind;

/// Outcome of one simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub scenario: String,
    pub solver: SolverKind,
    pub filter: FilterMode,
    pub n_vehicles: usize,
    pub n_subtasks: usize,
    /// Time the last subtask finished, re-offloading included.
    pub makespan: f64,
    /// Makespan of the initial plan; NaN if it could not be planned.
    pub planned_makespan: f64,
    /// Mean finishing time over subtasks.
    pub avg_subtask_delay: f64,
    /// Subtasks moved off a departing vehicle.
    pub reoffload_count: usize,
    pub failed_tasks: usize,
    /// Some planning round had no feasible assignment.
    pub infeasible: bool,
    /// Seconds each vehicle spent working, in vehicle order.
    pub per_vehicle_busy: Vec<f64>,
}

/// Writes records as CSV with `busy_v1_s ..` columns up to the widest fleet;
/// narrower rows leave the extra cells empty.
pub fn write_metrics_csv<W: Write>(w: W, records: &[MetricsRecord]) -> Result<(), csv::Error> {
    let width = records.iter().map(|r| r.per_vehicle_busy.len()).max().unwrap_or(0);
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let mut header: Vec<String> = [
        "scenario",
        "solver",
        "filter",
        "n_vehicles",
        "n_subtasks",
        "makespan_s",
        "avg_subtask_delay_s",
        "reoffloads",
        "failed_tasks",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=width).map(|j| format!("busy_v{j}_s")));
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.scenario.clone(),
            r.solver.to_string(),
            r.filter.to_string(),
            r.n_vehicles.to_string(),
            r.n_subtasks.to_string(),
            r.makespan.to_string(),
            r.avg_subtask_delay.to_string(),
            r.reoffload_count.to_string(),
            r.failed_tasks.to_string(),
        ];
        row.extend((0..width).map(|j| r.per_vehicle_busy.get(j).map(f64::to_string).unwrap_or_default()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
