//! Per-subtask candidate selection.
//!
//! Each (subtask, vehicle) pair gets a suitability `λ ∈ [0,1]` computed from
//! the vehicle's stay time, the subtask's completion time on it and the
//! vehicle's offloading success history. The pair is admitted with
//! probability `λ`. Two hard rules wrap the learned part:
//!
//! * `completion_time >= stay_time` gives `λ = 0` (the work cannot finish);
//! * an infinite stay with a perfect history gives `λ = 1`.
//!
//! The learned part is a logistic model whose weights are constrained so that
//! `λ` never decreases with stay time or success rate and never increases
//! with completion time. Until it has seen any outcome, `λ` falls back to the
//! history success rate.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cost::CostTimeMatrix;

/// Per-subtask × per-vehicle admission flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSets {
    rows: usize,
    cols: usize,
    flags: Vec<bool>,
}

impl CandidateSets {
    pub fn all(rows: usize, cols: usize) -> Self {
        CandidateSets {
            rows,
            cols,
            flags: vec![true; rows * cols],
        }
    }

    pub fn none(rows: usize, cols: usize) -> Self {
        CandidateSets {
            rows,
            cols,
            flags: vec![false; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.flags[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.flags[i * self.cols + j] = v;
    }

    pub fn candidates(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.cols).filter(move |&j| self.contains(i, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VehicleHistory {
    pub participations: u32,
    pub successes: u32,
}

impl VehicleHistory {
    pub fn new(participations: u32, successes: u32) -> Option<Self> {
        (successes <= participations).then_some(VehicleHistory {
            participations,
            successes,
        })
    }

    pub fn success_rate(&self, prior: f64) -> f64 {
        if self.participations == 0 {
            prior
        } else {
            f64::from(self.successes) / f64::from(self.participations)
        }
    }

    fn record(&mut self, success: bool) {
        self.participations += 1;
        if success {
            self.successes += 1;
        }
    }
}

/// Success counters for every vehicle seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Histories {
    entries: BTreeMap<u32, VehicleHistory>,
    /// Rate reported for vehicles that never participated.
    pub prior: f64,
}

impl Default for Histories {
    fn default() -> Self {
        Histories::new(0.5)
    }
}

impl Histories {
    pub fn new(prior: f64) -> Self {
        Histories {
            entries: BTreeMap::new(),
            prior: prior.clamp(0.0, 1.0),
        }
    }

    pub fn get(&self, vehicle: u32) -> VehicleHistory {
        self.entries.get(&vehicle).copied().unwrap_or_default()
    }

    pub fn insert(&mut self, vehicle: u32, h: VehicleHistory) {
        self.entries.insert(vehicle, h);
    }

    pub fn success_rate(&self, vehicle: u32) -> f64 {
        self.get(vehicle).success_rate(self.prior)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFeatures {
    pub stay_time: f64,
    pub completion_time: f64,
    pub history_success_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        self == Outcome::Success
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingRecord {
    pub task_id: u32,
    pub features: CandidateFeatures,
    pub outcome: Outcome,
}

/// Learned component behind the hard rules.
pub trait Suitability {
    /// Score in `[0, 1]`, or `None` while the model has no training data.
    fn score(&self, feat: &CandidateFeatures) -> Option<f64>;
    /// Online update with one labelled record.
    fn observe(&mut self, record: &TrainingRecord);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuitabilityParams {
    pub learning_rate: f64,
    /// Gradient steps per observed record.
    pub steps_per_update: u32,
    /// Seconds; times enter the model as `t / (t + time_scale)`.
    pub time_scale: f64,
}

impl Default for SuitabilityParams {
    fn default() -> Self {
        SuitabilityParams {
            learning_rate: 0.5,
            steps_per_update: 1,
            time_scale: 60.0,
        }
    }
}

/// Logistic model with sign-constrained weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SuitabilityModel {
    pub params: SuitabilityParams,
    bias: f64,
    // All three stored non-negative; completion enters with a minus sign.
    w_stay: f64,
    w_completion: f64,
    w_rate: f64,
    buffer: Vec<TrainingRecord>,
}

impl Default for SuitabilityModel {
    fn default() -> Self {
        SuitabilityModel::new(SuitabilityParams::default())
    }
}

impl SuitabilityModel {
    pub fn new(params: SuitabilityParams) -> Self {
        SuitabilityModel {
            params,
            bias: -2.0,
            w_stay: 1.0,
            w_completion: 1.0,
            w_rate: 1.0,
            buffer: Vec::new(),
        }
    }

    pub fn buffer(&self) -> &[TrainingRecord] {
        &self.buffer
    }

    pub fn weights(&self) -> (f64, f64, f64, f64) {
        (self.bias, self.w_stay, self.w_completion, self.w_rate)
    }

    fn squash(&self, t: f64) -> f64 {
        if t.is_infinite() {
            1.0
        } else {
            t / (t + self.params.time_scale)
        }
    }

    fn inputs(&self, f: &CandidateFeatures) -> [f64; 3] {
        [
            self.squash(f.stay_time),
            self.squash(f.completion_time),
            rate_evidence(f.history_success_rate),
        ]
    }

    fn logit(&self, f: &CandidateFeatures) -> f64 {
        let [s, c, r] = self.inputs(f);
        self.bias + self.w_stay * s - self.w_completion * c + self.w_rate * r
    }

    fn step(&mut self, rec: &TrainingRecord) {
        // The hard rule already explains these; fitting them only blurs the margin.
        if hard_rule(&rec.features).is_some() {
            return;
        }
        let [s, c, r] = self.inputs(&rec.features);
        let p = sigmoid(self.logit(&rec.features));
        let y = if rec.outcome.is_success() { 1.0 } else { 0.0 };
        let g = (p - y) * self.params.learning_rate;
        self.bias -= g;
        self.w_stay = (self.w_stay - g * s).max(0.0);
        self.w_completion = (self.w_completion + g * c).max(0.0);
        self.w_rate = (self.w_rate - g * r).max(0.0);
    }

    /// Batch refit over the whole buffer, in buffer order.
    pub fn fit(&mut self, epochs: u32) {
        let buf = std::mem::take(&mut self.buffer);
        for _ in 0..epochs {
            for rec in &buf {
                self.step(rec);
            }
        }
        self.buffer = buf;
    }

    /// Appends records without touching the weights; call [`fit`](Self::fit) afterwards.
    pub fn extend_buffer(&mut self, records: impl IntoIterator<Item = TrainingRecord>) {
        self.buffer.extend(records);
    }

    pub fn export_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        write_training_csv(w, &self.buffer)
    }
}

impl Suitability for SuitabilityModel {
    fn score(&self, feat: &CandidateFeatures) -> Option<f64> {
        if self.buffer.is_empty() {
            return None;
        }
        Some(sigmoid(self.logit(feat)))
    }

    fn observe(&mut self, record: &TrainingRecord) {
        self.buffer.push(*record);
        for _ in 0..self.params.steps_per_update {
            self.step(record);
        }
    }
}

/// Success rate as smoothed log-odds, so a clean failure record can outweigh
/// any stay/completion margin.
fn rate_evidence(r: f64) -> f64 {
    ((r + 0.05) / (1.05 - r)).ln()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `λ` fixed by the feature values alone, before any learning.
fn hard_rule(feat: &CandidateFeatures) -> Option<f64> {
    if feat.completion_time >= feat.stay_time {
        Some(0.0)
    } else if feat.stay_time.is_infinite() && feat.history_success_rate >= 1.0 {
        Some(1.0)
    } else {
        None
    }
}

/// Suitability `λ` of one (subtask, vehicle) pair.
pub fn predict_lambda<M: Suitability + ?Sized>(model: &M, feat: &CandidateFeatures) -> f64 {
    let rate = feat.history_success_rate.clamp(0.0, 1.0);
    if let Some(l) = hard_rule(feat) {
        return l;
    }
    match model.score(feat) {
        Some(p) => p.clamp(0.0, 1.0),
        None => rate,
    }
}

/// Bernoulli draw with probability `λ`.
pub fn admit<M: Suitability + ?Sized, R: Rng + ?Sized>(model: &M, feat: &CandidateFeatures, rng: &mut R) -> bool {
    let lambda = predict_lambda(model, feat);
    if lambda >= 1.0 {
        true
    } else if lambda <= 0.0 {
        false
    } else {
        rng.random::<f64>() < lambda
    }
}

/// Candidate sets for every subtask. Vehicles with an infinite preview cost
/// (unreachable) are never admitted; the task vehicle always is. One draw per
/// (subtask, vehicle) pair in row-major order.
pub fn select_candidates<M: Suitability + ?Sized, R: Rng + ?Sized>(
    preview: &CostTimeMatrix,
    stays: &[f64],
    vehicle_ids: &[u32],
    task_vehicle: usize,
    histories: &Histories,
    model: &M,
    rng: &mut R,
) -> CandidateSets {
    let (m, n) = (preview.rows(), preview.cols());
    let mut sets = CandidateSets::none(m, n);
    for i in 0..m {
        for j in 0..n {
            let admitted = if j == task_vehicle {
                true
            } else if !preview.is_candidate(i, j) {
                false
            } else {
                let feat = CandidateFeatures {
                    stay_time: stays[j],
                    completion_time: preview.get(i, j),
                    history_success_rate: histories.success_rate(vehicle_ids[j]),
                };
                admit(model, &feat, rng)
            };
            sets.set(i, j, admitted);
        }
    }
    sets
}

/// Counts the outcome against `vehicle` and trains the model on it.
pub fn record_outcome<M: Suitability + ?Sized>(
    model: &mut M,
    histories: &mut Histories,
    vehicle: u32,
    task_id: u32,
    features: CandidateFeatures,
    outcome: Outcome,
) {
    let mut h = histories.get(vehicle);
    h.record(outcome.is_success());
    histories.insert(vehicle, h);
    model.observe(&TrainingRecord {
        task_id,
        features,
        outcome,
    });
}

#[derive(Debug, Serialize, Deserialize)]
struct TrainingRow {
    task_id: u32,
    stay_time_s: f64,
    completion_time_s: f64,
    history_success_rate: f64,
    outcome: Outcome,
}

pub fn write_training_csv<W: Write>(w: W, records: &[TrainingRecord]) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    if records.is_empty() {
        wtr.write_record([
            "task_id",
            "stay_time_s",
            "completion_time_s",
            "history_success_rate",
            "outcome",
        ])?;
    }
    for r in records {
        wtr.serialize(TrainingRow {
            task_id: r.task_id,
            stay_time_s: r.features.stay_time,
            completion_time_s: r.features.completion_time,
            history_success_rate: r.features.history_success_rate,
            outcome: r.outcome,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_training_csv<R: Read>(r: R) -> Result<Vec<TrainingRecord>, csv::Error> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize::<TrainingRow>()
        .map(|row| {
            let row = row?;
            Ok(TrainingRecord {
                task_id: row.task_id,
                features: CandidateFeatures {
                    stay_time: row.stay_time_s,
                    completion_time: row.completion_time_s,
                    history_success_rate: row.history_success_rate,
                },
                outcome: row.outcome,
            })
        })
        .collect()
}
