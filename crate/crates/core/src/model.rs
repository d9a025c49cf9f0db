//! Domain types shared by every other module, plus task splitting and
//! offloading-matrix validation.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// 2-D position in meters: `x` runs along the highway, `y` across lanes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: u32,
    /// CPU cycles per second.
    pub compute_capacity: f64,
    pub position: Position,
    /// Meters per second along the highway axis.
    pub speed: f64,
    pub lane: u8,
}

impl Vehicle {
    pub fn new(id: u32, compute_capacity: f64, position: Position, speed: f64, lane: u8) -> Result<Self, ModelError> {
        if !(compute_capacity > 0.0) || !compute_capacity.is_finite() {
            return Err(ModelError::InvalidVehicle {
                vehicle: id,
                field: "compute_capacity",
                value: compute_capacity,
            });
        }
        if !(speed >= 0.0) || !speed.is_finite() {
            return Err(ModelError::InvalidVehicle {
                vehicle: id,
                field: "speed",
                value: speed,
            });
        }
        Ok(Vehicle {
            id,
            compute_capacity,
            position,
            speed,
            lane,
        })
    }
}

/// Checks that vehicle ids are unique within a fleet.
pub fn check_unique_ids(vehicles: &[Vehicle]) -> Result<(), ModelError> {
    let mut seen = HashSet::with_capacity(vehicles.len());
    for v in vehicles {
        if !seen.insert(v.id) {
            return Err(ModelError::DuplicateVehicle(v.id));
        }
    }
    Ok(())
}

/// The four workload kinds: image, video, game and augmented reality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    A,
    B,
    C,
    D,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [TaskKind::A, TaskKind::B, TaskKind::C, TaskKind::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            TaskKind::A => "image",
            TaskKind::B => "video",
            TaskKind::C => "game",
            TaskKind::D => "augmented-reality",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TaskKind::A => "A",
            TaskKind::B => "B",
            TaskKind::C => "C",
            TaskKind::D => "D",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskCategory {
    pub kind: TaskKind,
    /// CPU cycles per bit.
    pub complexity: f64,
}

/// Complexity (cycles/bit) for each of the four kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Complexities {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

impl Default for Complexities {
    fn default() -> Self {
        Complexities {
            a: 30.0,
            b: 15.0,
            c: 40.0,
            d: 20.0,
        }
    }
}

impl Complexities {
    pub fn category(&self, kind: TaskKind) -> TaskCategory {
        let complexity = match kind {
            TaskKind::A => self.a,
            TaskKind::B => self.b,
            TaskKind::C => self.c,
            TaskKind::D => self.d,
        };
        TaskCategory { kind, complexity }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for kind in TaskKind::ALL {
            let c = self.category(kind).complexity;
            if !(c > 0.0) || !c.is_finite() {
                return Err(ModelError::NonPositiveTaskField {
                    task: 0,
                    field: "complexity",
                    value: c,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: u32,
    /// Bits.
    pub data_size: f64,
    pub category: TaskCategory,
    /// Maximum tolerated delay in seconds.
    pub deadline: f64,
}

impl Task {
    pub fn new(id: u32, data_size: f64, category: TaskCategory, deadline: f64) -> Result<Self, ModelError> {
        for (field, value) in [
            ("data_size", data_size),
            ("deadline", deadline),
            ("complexity", category.complexity),
        ] {
            if !(value > 0.0) {
                return Err(ModelError::NonPositiveTaskField { task: id, field, value });
            }
        }
        Ok(Task {
            id,
            data_size,
            category,
            deadline,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subtask {
    pub id: u32,
    pub parent_task: u32,
    /// Bits; identical for every subtask of a scenario.
    pub size: f64,
    pub category: TaskCategory,
}

/// Splits tasks into uniform subtasks of `unit` bits.
///
/// A task whose size is not a multiple of `unit` yields `ceil(S / unit)`
/// subtasks; the last fragment is padded to the full unit.
pub fn split_tasks(tasks: &[Task], unit: f64) -> Result<Vec<Subtask>, ModelError> {
    if !(unit > 0.0) || !unit.is_finite() {
        return Err(ModelError::InvalidSubtaskUnit(unit));
    }
    if tasks.is_empty() {
        return Err(ModelError::NoWork);
    }
    let mut out = Vec::new();
    let mut next_id = 0u32;
    for task in tasks {
        if !(task.data_size > 0.0) {
            return Err(ModelError::NonPositiveTaskField {
                task: task.id,
                field: "data_size",
                value: task.data_size,
            });
        }
        let ratio = task.data_size / unit;
        // Treat tiny float noise (e.g. 3e6 / 1e6 = 3.0000000000000004) as exact.
        let rounded = ratio.round();
        let count = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded
        } else {
            log::warn!(
                "task {} size {} is not a multiple of {}; padding last subtask",
                task.id,
                task.data_size,
                unit
            );
            ratio.ceil()
        };
        for _ in 0..count as u64 {
            out.push(Subtask {
                id: next_id,
                parent_task: task.id,
                size: unit,
                category: task.category,
            });
            next_id += 1;
        }
    }
    Ok(out)
}

/// Dense m'×n binary assignment matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffloadingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl OffloadingMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        OffloadingMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    /// Builds the matrix with a single 1 per row at `assignment[i]`.
    pub fn from_assignment(assignment: &[usize], cols: usize) -> Self {
        let mut m = Self::zeros(assignment.len(), cols);
        for (i, &j) in assignment.iter().enumerate() {
            m.set(i, j, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u8) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Column holding the single 1 in row `i`, if the row is well-formed.
    pub fn assigned_vehicle(&self, i: usize) -> Option<usize> {
        let row = self.row(i);
        let mut found = None;
        for (j, &v) in row.iter().enumerate() {
            match v {
                0 => {}
                1 if found.is_none() => found = Some(j),
                _ => return None,
            }
        }
        found
    }

    pub fn assignment(&self) -> Option<Vec<usize>> {
        (0..self.rows).map(|i| self.assigned_vehicle(i)).collect()
    }
}

/// True iff every row has exactly one 1 and every entry is 0 or 1.
pub fn validate_matrix(x: &OffloadingMatrix, subtasks: usize, vehicles: usize) -> Result<bool, ModelError> {
    if x.rows() != subtasks || x.cols() != vehicles {
        return Err(ModelError::ShapeMismatch {
            expected_rows: subtasks,
            expected_cols: vehicles,
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let ok = (0..x.rows()).all(|i| {
        let row = x.row(i);
        row.iter().all(|&v| v <= 1) && row.iter().map(|&v| v as u32).sum::<u32>() == 1
    });
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: u32, size: f64) -> Task {
        Task::new(id, size, Complexities::default().category(TaskKind::A), 10.0).unwrap()
    }

    #[test]
    fn split_exact_division() {
        let e = 1e6;
        let subs = split_tasks(&[task(0, 100.0 * e)], e).unwrap();
        assert_eq!(subs.len(), 100);
        assert!(subs.iter().all(|s| s.parent_task == 0 && s.size == e));
    }

    #[test]
    fn split_sums_over_tasks() {
        let e = 1e6;
        let subs = split_tasks(&[task(0, 50.0 * e), task(1, 70.0 * e)], e).unwrap();
        assert_eq!(subs.len(), 120);
        assert_eq!(subs.iter().filter(|s| s.parent_task == 1).count(), 70);
        let ids: HashSet<u32> = subs.iter().map(|s| s.id).collect();
        assert_eq!(ids.len(), 120);
    }

    #[test]
    fn split_pads_remainder() {
        let e = 1e6;
        let subs = split_tasks(&[task(3, 2.5 * e)], e).unwrap();
        assert_eq!(subs.len(), 3);
        let total: f64 = subs.iter().map(|s| s.size).sum();
        assert!(total >= 2.5 * e && total - 2.5 * e < e);
    }

    #[test]
    fn split_rejects_bad_input() {
        assert_eq!(
            split_tasks(&[task(0, 5.0)], 0.0),
            Err(ModelError::InvalidSubtaskUnit(0.0))
        );
        assert_eq!(
            split_tasks(&[task(0, 5.0)], -1.0),
            Err(ModelError::InvalidSubtaskUnit(-1.0))
        );
        assert_eq!(split_tasks(&[], 1.0), Err(ModelError::NoWork));
    }

    #[test]
    fn task_and_vehicle_invariants() {
        let cat = Complexities::default().category(TaskKind::B);
        assert!(Task::new(0, 0.0, cat, 1.0).is_err());
        assert!(Task::new(0, 1.0, cat, 0.0).is_err());
        assert!(Vehicle::new(1, 0.0, Position::default(), 10.0, 0).is_err());
        assert!(Vehicle::new(1, 1e7, Position::default(), -1.0, 0).is_err());
        let a = Vehicle::new(1, 1e7, Position::default(), 10.0, 0).unwrap();
        assert_eq!(check_unique_ids(&[a.clone(), a]), Err(ModelError::DuplicateVehicle(1)));
    }

    #[test]
    fn default_complexities() {
        let c = Complexities::default();
        let got: Vec<f64> = TaskKind::ALL.iter().map(|&k| c.category(k).complexity).collect();
        assert_eq!(got, vec![30.0, 15.0, 40.0, 20.0]);
    }

    #[test]
    fn validate_matrix_cases() {
        let good = OffloadingMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(validate_matrix(&good, 3, 3), Ok(true));
        let zero_row = OffloadingMatrix::from_rows(&[vec![1, 0], vec![0, 0]]);
        assert_eq!(validate_matrix(&zero_row, 2, 2), Ok(false));
        let double = OffloadingMatrix::from_rows(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(validate_matrix(&double, 2, 2), Ok(false));
        let non_binary = OffloadingMatrix::from_rows(&[vec![2, 0]]);
        assert_eq!(validate_matrix(&non_binary, 1, 2), Ok(false));
        assert!(matches!(
            validate_matrix(&good, 2, 3),
            Err(ModelError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn assignment_roundtrip() {
        let x = OffloadingMatrix::from_assignment(&[2, 0, 1, 2], 3);
        assert_eq!(x.assignment(), Some(vec![2, 0, 1, 2]));
        assert_eq!(validate_matrix(&x, 4, 3), Ok(true));
    }
}
