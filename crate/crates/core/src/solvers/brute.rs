use super::{LoadState, SolveOutcome};
use crate::cost::Problem;
use crate::error::SolveError;

/// Exact minimum-makespan assignment by enumerating every `n^m'` mapping.
///
/// Partial assignments that already break a constraint are cut, which is
/// exact because every constraint sum only grows as subtasks are added.
/// Among equal makespans the lexicographically first assignment wins.
pub fn brute_force(problem: &Problem, cap: u64) -> Result<SolveOutcome, SolveError> {
    let (m, n) = (problem.subtasks(), problem.vehicles());
    let size = (n as u64).checked_pow(m as u32);
    if size.is_none_or(|s| s > cap) {
        return Err(SolveError::TooLarge {
            vehicles: n,
            subtasks: m,
            cap,
        });
    }
    let mut search = Search {
        state: LoadState::new(problem),
        current: Vec::with_capacity(m),
        best: None,
    };
    search.descend(0);
    match search.best {
        Some((assignment, _)) => Ok(SolveOutcome::from_assignment(problem, assignment)),
        None => Err(SolveError::NoFeasibleAssignment),
    }
}

struct Search<'a> {
    state: LoadState<'a>,
    current: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, i: usize) {
        let p = self.state.p;
        if i == p.subtasks() {
            let ms = self.state.makespan();
            if self.best.as_ref().is_none_or(|(_, b)| ms < *b) {
                self.best = Some((self.current.clone(), ms));
            }
            return;
        }
        for j in 0..p.vehicles() {
            if !self.state.fits(i, j) {
                continue;
            }
            let saved = (self.state.tau[j], self.state.task_sums[p.task_of[i]][j]);
            self.state.add(i, j);
            self.current.push(j);
            self.descend(i + 1);
            self.current.pop();
            // Restore exactly rather than subtracting, so leaf sums stay in row order.
            self.state.tau[j] = saved.0;
            self.state.task_sums[p.task_of[i]][j] = saved.1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostTimeMatrix;

    fn problem(rows: &[Vec<f64>]) -> Problem {
        Problem::from_costs(CostTimeMatrix::from_rows(rows))
    }

    #[test]
    fn single_subtask_picks_row_min() {
        let out = brute_force(&problem(&[vec![4.0, 1.5, 3.0]]), 1_000).unwrap();
        assert_eq!(out.assignment, vec![1]);
        assert_eq!(out.makespan, 1.5);
    }

    #[test]
    fn departure_example_unfiltered_is_five() {
        let out = brute_force(&problem(&vec![vec![5.0, 5.0, 3.0, 4.0]; 4]), 1_000).unwrap();
        assert_eq!(out.makespan, 5.0);
    }

    #[test]
    fn three_by_two_is_four() {
        let out = brute_force(&problem(&vec![vec![2.0, 3.0]; 3]), 1_000).unwrap();
        assert_eq!(out.makespan, 4.0);
    }

    /// Independent check of the 3×2 case: enumerate all 8 mappings directly.
    #[test]
    fn three_by_two_enumeration() {
        let costs = [2.0, 3.0];
        let best = (0..8u32)
            .map(|mask| {
                let mut t = [0.0f64; 2];
                for i in 0..3 {
                    let j = ((mask >> i) & 1) as usize;
                    t[j] += costs[j];
                }
                t[0].max(t[1])
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(best, 4.0);
    }

    #[test]
    fn refuses_large_and_reports_infeasible() {
        let big = problem(&vec![vec![1.0; 10]; 7]);
        assert!(matches!(brute_force(&big, 1_000_000), Err(SolveError::TooLarge { .. })));
        let p = problem(&[vec![3.0, 3.0], vec![3.0, 3.0], vec![3.0, 3.0]]).with_stays(vec![3.0, 3.0]);
        assert_eq!(brute_force(&p, 100), Err(SolveError::NoFeasibleAssignment));
    }
}
