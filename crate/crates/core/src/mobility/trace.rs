use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::TraceError;
use crate::model::Position;

pub const TRACE_HEADER: [&str; 5] = ["time_s", "vehicle_id", "x_m", "y_m", "speed_mps"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub vehicle_id: u32,
    pub position: Position,
    pub speed: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    time_s: f64,
    vehicle_id: u32,
    x_m: f64,
    y_m: f64,
    speed_mps: f64,
}

impl From<TraceRow> for TraceSample {
    fn from(r: TraceRow) -> Self {
        TraceSample {
            time: r.time_s,
            vehicle_id: r.vehicle_id,
            position: Position::new(r.x_m, r.y_m),
            speed: r.speed_mps,
        }
    }
}

/// Reads a trace CSV. Samples come back grouped by vehicle id and sorted by time.
pub fn load_trace(path: &Path) -> Result<Vec<TraceSample>, TraceError> {
    let file = File::open(path).map_err(|source| TraceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_trace(file)
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceSample>, TraceError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| TraceError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if !headers.is_empty() && headers.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(TraceError::Parse {
            line: 1,
            message: format!("expected header '{}'", TRACE_HEADER.join(",")),
        });
    }
    let mut samples = Vec::new();
    for (idx, rec) in rdr.deserialize::<TraceRow>().enumerate() {
        let row = rec.map_err(|e| TraceError::Parse {
            line: e.position().map_or(idx as u64 + 2, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = idx as u64 + 2;
        if !row.time_s.is_finite() || !row.x_m.is_finite() || !row.y_m.is_finite() {
            return Err(TraceError::Parse {
                line,
                message: "non-finite time or position".into(),
            });
        }
        if !(row.speed_mps >= 0.0) {
            return Err(TraceError::Parse {
                line,
                message: format!("negative speed {}", row.speed_mps),
            });
        }
        samples.push(TraceSample::from(row));
    }
    // Stable sort keeps file order for equal keys, so duplicates surface below.
    samples.sort_by(|a, b| a.vehicle_id.cmp(&b.vehicle_id).then(a.time.total_cmp(&b.time)));
    for w in samples.windows(2) {
        if w[0].vehicle_id == w[1].vehicle_id && w[1].time <= w[0].time {
            return Err(TraceError::NonMonotone {
                vehicle: w[1].vehicle_id,
                time: w[1].time,
            });
        }
    }
    Ok(samples)
}

pub fn write_trace<W: Write>(writer: W, samples: &[TraceSample]) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for s in samples {
        wtr.serialize(TraceRow {
            time_s: s.time,
            vehicle_id: s.vehicle_id,
            x_m: s.position.x,
            y_m: s.position.y,
            speed_mps: s.speed,
        })?;
    }
    if samples.is_empty() {
        wtr.write_record(TRACE_HEADER)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Time-sorted samples of one vehicle, linearly interpolated on query.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<TraceSample>,
}

impl Trajectory {
    pub fn start(&self) -> f64 {
        self.samples[0].time
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].time
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    fn bracket(&self, t: f64) -> Option<(usize, f64)> {
        if !(t >= self.start() && t <= self.end()) {
            return None;
        }
        let hi = self.samples.partition_point(|s| s.time < t);
        if hi == 0 {
            return Some((0, 0.0));
        }
        let (a, b) = (&self.samples[hi - 1], &self.samples[hi]);
        Some((hi - 1, (t - a.time) / (b.time - a.time)))
    }

    pub fn position_at(&self, t: f64) -> Option<Position> {
        let (i, w) = self.bracket(t)?;
        let a = self.samples[i].position;
        if w == 0.0 {
            return Some(a);
        }
        let b = self.samples[i + 1].position;
        Some(Position::new(a.x + (b.x - a.x) * w, a.y + (b.y - a.y) * w))
    }

    pub fn speed_at(&self, t: f64) -> Option<f64> {
        let (i, w) = self.bracket(t)?;
        let a = self.samples[i].speed;
        if w == 0.0 {
            return Some(a);
        }
        Some(a + (self.samples[i + 1].speed - a) * w)
    }
}

/// All trajectories of a scenario keyed by vehicle id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceSet {
    trajectories: BTreeMap<u32, Trajectory>,
}

impl TraceSet {
    pub fn from_samples(samples: &[TraceSample]) -> Result<Self, TraceError> {
        let mut grouped: BTreeMap<u32, Vec<TraceSample>> = BTreeMap::new();
        for s in samples {
            grouped.entry(s.vehicle_id).or_default().push(*s);
        }
        let mut trajectories = BTreeMap::new();
        for (id, mut v) in grouped {
            v.sort_by(|a, b| a.time.total_cmp(&b.time));
            for w in v.windows(2) {
                if w[1].time <= w[0].time {
                    return Err(TraceError::NonMonotone {
                        vehicle: id,
                        time: w[1].time,
                    });
                }
            }
            trajectories.insert(id, Trajectory { samples: v });
        }
        Ok(TraceSet { trajectories })
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn vehicle_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.trajectories.keys().copied()
    }

    pub fn get(&self, id: u32) -> Option<&Trajectory> {
        self.trajectories.get(&id)
    }

    /// Earliest start and latest end over all vehicles.
    pub fn horizon(&self) -> Option<(f64, f64)> {
        let start = self.trajectories.values().map(Trajectory::start).reduce(f64::min)?;
        let end = self.trajectories.values().map(Trajectory::end).reduce(f64::max)?;
        Some((start, end))
    }

    pub fn position_at(&self, id: u32, t: f64) -> Result<Option<Position>, TraceError> {
        let traj = self.get(id).ok_or(TraceError::UnknownVehicle(id))?;
        Ok(traj.position_at(t))
    }

    pub fn to_samples(&self) -> Vec<TraceSample> {
        self.trajectories
            .values()
            .flat_map(|t| t.samples.iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(body: &str) -> String {
        format!("time_s,vehicle_id,x_m,y_m,speed_mps\n{body}")
    }

    #[test]
    fn empty_file_is_empty_trace() {
        assert!(read_trace("".as_bytes()).unwrap().is_empty());
        assert!(read_trace(csv("").as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn single_row() {
        let s = read_trace(csv("0.0,1,0.0,0.0,25.0\n").as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].time, 0.0);
        assert_eq!(s[0].vehicle_id, 1);
        assert_eq!(s[0].speed, 25.0);
    }

    #[test]
    fn interpolates_midpoint() {
        let s = read_trace(csv("10.0,1,250.0,0.0,25.0\n0.0,1,0.0,0.0,25.0\n").as_bytes()).unwrap();
        let set = TraceSet::from_samples(&s).unwrap();
        let p = set.position_at(1, 5.0).unwrap().unwrap();
        assert_eq!(p.x, 125.0);
        assert_eq!(set.position_at(1, 10.5).unwrap(), None);
        assert!(matches!(set.position_at(9, 1.0), Err(TraceError::UnknownVehicle(9))));
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = read_trace(csv("0.0,1,0.0,0.0,25.0\n1.0,x,0.0,0.0,25.0\n").as_bytes()).unwrap_err();
        match err {
            TraceError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header_rejected() {
        let err = read_trace("t,id,x,y,s\n0,1,0,0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceError::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_timestamp_rejected() {
        let err = read_trace(csv("1.0,1,0.0,0.0,25.0\n1.0,1,5.0,0.0,25.0\n").as_bytes()).unwrap_err();
        assert!(matches!(err, TraceError::NonMonotone { vehicle: 1, .. }));
    }

    #[test]
    fn write_then_read() {
        let samples = vec![
            TraceSample {
                time: 0.0,
                vehicle_id: 2,
                position: Position::new(1.5, 4.0),
                speed: 20.0,
            },
            TraceSample {
                time: 1.0,
                vehicle_id: 2,
                position: Position::new(21.5, 4.0),
                speed: 20.25,
            },
        ];
        let mut buf = Vec::new();
        write_trace(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time_s,vehicle_id,x_m,y_m,speed_mps\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_trace(buf.as_slice()).unwrap(), samples);
    }
}
