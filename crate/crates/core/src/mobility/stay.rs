use crate::error::TraceError;

use super::graph::connectivity_at;
use super::trace::TraceSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayEstimate {
    pub vehicle_id: u32,
    /// Seconds; `f64::INFINITY` when the vehicle never leaves within the scan.
    pub stay_time: f64,
}

impl StayEstimate {
    pub fn is_infinite(&self) -> bool {
        self.stay_time.is_infinite()
    }
}

/// Parameters of the reachability scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StayScan {
    pub comm_range: f64,
    /// Maximum look-ahead from `t0`, seconds.
    pub horizon: f64,
    /// Scan step, seconds.
    pub dt: f64,
}

impl StayScan {
    fn validate(&self) -> Result<(), TraceError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(TraceError::InvalidParam {
                field: "dt",
                value: self.dt,
            });
        }
        if !(self.comm_range > 0.0) {
            return Err(TraceError::InvalidParam {
                field: "comm_range",
                value: self.comm_range,
            });
        }
        if !(self.horizon >= 0.0) {
            return Err(TraceError::InvalidParam {
                field: "horizon",
                value: self.horizon,
            });
        }
        Ok(())
    }
}

/// Stay time of every traced vehicle with respect to `task_vehicle`.
///
/// A vehicle's stay ends at the first scan instant `t0 + k·dt` at which it
/// cannot reach the task vehicle over any multi-hop path. The scan stops at
/// `t0 + horizon` or at the end of the trace, whichever is earlier; vehicles
/// still reachable there get an infinite stay. Results follow the trace's
/// vehicle-id order; the task vehicle itself is always infinite.
pub fn estimate_stays(
    traces: &TraceSet,
    task_vehicle: u32,
    t0: f64,
    scan: &StayScan,
) -> Result<Vec<StayEstimate>, TraceError> {
    scan.validate()?;
    let traj = traces
        .get(task_vehicle)
        .ok_or(TraceError::UnknownVehicle(task_vehicle))?;
    if traj.position_at(t0).is_none() {
        return Err(TraceError::Absent {
            vehicle: task_vehicle,
            time: t0,
        });
    }
    let (_, trace_end) = traces.horizon().expect("non-empty trace");
    let end = (t0 + scan.horizon).min(trace_end);
    let ids: Vec<u32> = traces.vehicle_ids().collect();
    let k_idx = ids.iter().position(|&id| id == task_vehicle).unwrap();
    let mut stays: Vec<Option<f64>> = vec![None; ids.len()];
    stays[k_idx] = Some(f64::INFINITY);
    let mut open = ids.len() - 1;
    let mut step = 0u64;
    loop {
        let t = t0 + step as f64 * scan.dt;
        if t > end + 1e-9 * scan.dt || open == 0 {
            break;
        }
        let t = t.min(trace_end);
        if traj.position_at(t).is_none() {
            // Task vehicle itself left the trace: everyone is cut off.
            for s in stays.iter_mut().filter(|s| s.is_none()) {
                *s = Some(t - t0);
            }
            break;
        }
        let g = connectivity_at(traces, t, scan.comm_range)?;
        let hops = g.hops_from(task_vehicle)?;
        for (i, h) in hops.iter().enumerate() {
            if stays[i].is_none() && h.is_none() {
                stays[i] = Some(t - t0);
                open -= 1;
            }
        }
        step += 1;
    }
    Ok(ids
        .iter()
        .zip(stays)
        .map(|(&vehicle_id, s)| StayEstimate {
            vehicle_id,
            stay_time: s.unwrap_or(f64::INFINITY),
        })
        .collect())
}

/// Stay time of one vehicle `v` with respect to `task_vehicle`.
pub fn estimate_stay(
    traces: &TraceSet,
    task_vehicle: u32,
    v: u32,
    t0: f64,
    scan: &StayScan,
) -> Result<StayEstimate, TraceError> {
    let tv = traces.get(v).ok_or(TraceError::UnknownVehicle(v))?;
    if tv.position_at(t0).is_none() {
        return Err(TraceError::Absent { vehicle: v, time: t0 });
    }
    estimate_stays(traces, task_vehicle, t0, scan)?
        .into_iter()
        .find(|s| s.vehicle_id == v)
        .ok_or(TraceError::UnknownVehicle(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::trace::TraceSample;
    use crate::model::Position;

    fn straight(id: u32, x0: f64, speed: f64, until: f64) -> Vec<TraceSample> {
        let mut out = Vec::new();
        let mut t = 0.0;
        while t <= until {
            out.push(TraceSample {
                time: t,
                vehicle_id: id,
                position: Position::new(x0 + speed * t, 0.0),
                speed,
            });
            t += 1.0;
        }
        out
    }

    fn scan(range: f64) -> StayScan {
        StayScan {
            comm_range: range,
            horizon: 1800.0,
            dt: 0.1,
        }
    }

    #[test]
    fn always_reachable_is_infinite() {
        let mut s = straight(1, 0.0, 25.0, 1800.0);
        s.extend(straight(2, 50.0, 25.0, 1800.0));
        let set = TraceSet::from_samples(&s).unwrap();
        let est = estimate_stay(&set, 1, 2, 0.0, &scan(150.0)).unwrap();
        assert!(est.is_infinite());
    }

    #[test]
    fn receding_vehicle_matches_closed_form() {
        // 100 + 10 t = 150  =>  t = 5 s.
        let mut s = straight(1, 0.0, 20.0, 60.0);
        s.extend(straight(2, 100.0, 30.0, 60.0));
        let set = TraceSet::from_samples(&s).unwrap();
        let est = estimate_stay(&set, 1, 2, 0.0, &scan(150.0)).unwrap();
        let exact = (150.0 - 100.0) / 10.0;
        assert!(
            est.stay_time >= exact && est.stay_time <= exact + 0.1 + 1e-9,
            "{}",
            est.stay_time
        );
    }

    #[test]
    fn already_disconnected_is_zero() {
        let mut s = straight(1, 0.0, 20.0, 10.0);
        s.extend(straight(2, 400.0, 20.0, 10.0));
        let set = TraceSet::from_samples(&s).unwrap();
        assert_eq!(estimate_stay(&set, 1, 2, 0.0, &scan(150.0)).unwrap().stay_time, 0.0);
    }

    #[test]
    fn relay_extends_stay() {
        // 3 relays for 2 while the chain holds.
        let mut s = straight(1, 0.0, 20.0, 60.0);
        s.extend(straight(2, 200.0, 30.0, 60.0));
        s.extend(straight(3, 100.0, 25.0, 60.0));
        let set = TraceSet::from_samples(&s).unwrap();
        let all = estimate_stays(&set, 1, 0.0, &scan(150.0)).unwrap();
        // 1-3 gap 100+5t ≤ 150 until 10 s; 3-2 gap 100+5t likewise.
        let v2 = all.iter().find(|e| e.vehicle_id == 2).unwrap();
        assert!(v2.stay_time >= 10.0 && v2.stay_time <= 10.1 + 1e-9);
    }

    #[test]
    fn task_vehicle_absent_errors() {
        let set = TraceSet::from_samples(&straight(1, 0.0, 20.0, 5.0)).unwrap();
        assert!(matches!(
            estimate_stays(&set, 1, 99.0, &scan(150.0)),
            Err(TraceError::Absent { .. })
        ));
    }
}
