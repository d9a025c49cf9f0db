use std::collections::{HashMap, VecDeque};

use crate::error::TraceError;
use crate::model::Position;

use super::trace::TraceSet;

/// Undirected unit-disk graph over vehicle ids at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityGraph {
    ids: Vec<u32>,
    index: HashMap<u32, usize>,
    adj: Vec<Vec<usize>>,
}

impl ConnectivityGraph {
    /// Links every pair within `comm_range` (inclusive). `None` marks a vehicle
    /// with no position, which stays isolated.
    pub fn from_positions(nodes: &[(u32, Option<Position>)], comm_range: f64) -> Self {
        let ids: Vec<u32> = nodes.iter().map(|(id, _)| *id).collect();
        let index = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut adj = vec![Vec::new(); nodes.len()];
        for a in 0..nodes.len() {
            let Some(pa) = nodes[a].1 else { continue };
            for b in a + 1..nodes.len() {
                let Some(pb) = nodes[b].1 else { continue };
                if pa.distance(&pb) <= comm_range {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        ConnectivityGraph { ids, index, adj }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        match (self.index.get(&a), self.index.get(&b)) {
            (Some(&ia), Some(&ib)) => self.adj[ia].contains(&ib),
            _ => false,
        }
    }

    pub fn neighbors(&self, id: u32) -> Option<impl Iterator<Item = u32> + '_> {
        let i = *self.index.get(&id)?;
        Some(self.adj[i].iter().map(move |&j| self.ids[j]))
    }

    /// BFS hop counts from `src` to every node, in `ids()` order.
    pub fn hops_from(&self, src: u32) -> Result<Vec<Option<u32>>, TraceError> {
        let s = *self.index.get(&src).ok_or(TraceError::UnknownVehicle(src))?;
        let mut dist = vec![None; self.ids.len()];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap() + 1;
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }
}

/// Positions of every traced vehicle at `t`, linked within `comm_range`.
pub fn connectivity_at(traces: &TraceSet, t: f64, comm_range: f64) -> Result<ConnectivityGraph, TraceError> {
    let (start, end) = traces.horizon().unwrap_or((0.0, 0.0));
    if traces.is_empty() || !(t >= start && t <= end) {
        return Err(TraceError::OutOfHorizon { time: t, start, end });
    }
    let nodes: Vec<(u32, Option<Position>)> = traces
        .vehicle_ids()
        .map(|id| (id, traces.get(id).and_then(|tr| tr.position_at(t))))
        .collect();
    Ok(ConnectivityGraph::from_positions(&nodes, comm_range))
}

/// Minimum hop count between two vehicles; `None` when no path exists.
/// `src == dst` is zero hops.
pub fn hop_count(g: &ConnectivityGraph, src: u32, dst: u32) -> Result<Option<u32>, TraceError> {
    let d = *g.index.get(&dst).ok_or(TraceError::UnknownVehicle(dst))?;
    Ok(g.hops_from(src)?[d])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], range: f64) -> ConnectivityGraph {
        let nodes: Vec<_> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (i as u32 + 1, Some(Position::new(x, 0.0))))
            .collect();
        ConnectivityGraph::from_positions(&nodes, range)
    }

    #[test]
    fn range_edges() {
        assert!(line(&[0.0, 100.0], 150.0).has_edge(1, 2));
        assert!(line(&[0.0, 150.0], 150.0).has_edge(1, 2));
        assert!(!line(&[0.0, 150.000001], 150.0).has_edge(1, 2));
    }

    #[test]
    fn collinear_triple() {
        let g = line(&[0.0, 140.0, 280.0], 150.0);
        assert!(g.has_edge(1, 2) && g.has_edge(2, 3));
        assert!(!g.has_edge(1, 3));
        assert_eq!(hop_count(&g, 1, 2).unwrap(), Some(1));
        assert_eq!(hop_count(&g, 1, 3).unwrap(), Some(2));
        assert_eq!(hop_count(&g, 3, 1).unwrap(), Some(2));
    }

    #[test]
    fn disconnected_and_unknown() {
        let g = line(&[0.0, 500.0], 150.0);
        assert_eq!(hop_count(&g, 1, 2).unwrap(), None);
        assert!(matches!(hop_count(&g, 1, 7), Err(TraceError::UnknownVehicle(7))));
    }

    #[test]
    fn absent_vehicle_is_isolated() {
        let g = ConnectivityGraph::from_positions(&[(1, Some(Position::default())), (2, None)], 150.0);
        assert_eq!(g.len(), 2);
        assert_eq!(hop_count(&g, 1, 2).unwrap(), None);
    }
}
