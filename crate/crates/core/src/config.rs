//! Scenario files.
//!
//! A scenario is a TOML document. Top-level keys hold the scalar parameters;
//! nested tables hold the channel, annealing schedule, mobility model and so
//! on. Vehicles and tasks may be listed explicitly (`[[vehicles]]`,
//! `[[tasks]]`); when omitted they are synthesised from `[fleet]` and the
//! seed. [`ScenarioConfig::resolve`] performs that synthesis so the printed
//! configuration is fully self-contained.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::candidate::{Histories, SuitabilityParams, VehicleHistory};
use crate::comms::ChannelParams;
use crate::error::ConfigError;
use crate::mobility::FreewayParams;
use crate::model::{check_unique_ids, Complexities, Position, Task, TaskKind, Vehicle};
use crate::solvers::{AnnealSchedule, NeighborMove, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub id: u32,
    pub compute_capacity: f64,
    pub x: f64,
    pub y: f64,
    /// m/s.
    pub speed: f64,
    #[serde(default)]
    pub lane: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub id: u32,
    /// Bits.
    pub data_size: f64,
    pub category: TaskKind,
    /// Seconds.
    pub deadline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySpec {
    pub vehicle: u32,
    pub participations: u32,
    pub successes: u32,
}

/// Parameters for synthesising a platoon and its workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FleetParams {
    pub n_vehicles: u32,
    pub n_subtasks: u32,
    /// Cycles/s.
    pub compute_min: f64,
    pub compute_max: f64,
    /// Std of cruise speeds around the common traffic-flow speed, km/h.
    pub speed_spread_kmh: f64,
    /// Longitudinal spacing between consecutive vehicles, meters.
    pub gap_min: f64,
    pub gap_max: f64,
    /// Subtasks per generated task.
    pub task_subtasks_min: u32,
    pub task_subtasks_max: u32,
    /// Deadline of generated tasks, seconds.
    pub deadline: f64,
}

impl Default for FleetParams {
    fn default() -> Self {
        FleetParams {
            n_vehicles: 20,
            n_subtasks: 400,
            compute_min: 4e6,
            compute_max: 2e7,
            speed_spread_kmh: 5.0,
            gap_min: 10.0,
            gap_max: 60.0,
            task_subtasks_min: 50,
            task_subtasks_max: 150,
            deadline: 1800.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CandidateConfig {
    /// Success rate assumed for vehicles without history.
    pub prior_success_rate: f64,
    pub learning_rate: f64,
    pub steps_per_update: u32,
    /// Seconds.
    pub time_scale: f64,
}

impl Default for CandidateConfig {
    fn default() -> Self {
        let m = SuitabilityParams::default();
        CandidateConfig {
            prior_success_rate: 0.5,
            learning_rate: m.learning_rate,
            steps_per_update: m.steps_per_update,
            time_scale: m.time_scale,
        }
    }
}

impl CandidateConfig {
    pub fn suitability(&self) -> SuitabilityParams {
        SuitabilityParams {
            learning_rate: self.learning_rate,
            steps_per_update: self.steps_per_update,
            time_scale: self.time_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverTuning {
    pub neighbor: NeighborMove,
    pub hgsa_repetitions: u32,
    pub random_retries: u32,
    pub brute_cap: u64,
}

impl Default for SolverTuning {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverTuning {
            neighbor: d.neighbor,
            hgsa_repetitions: d.hgsa_repetitions,
            random_retries: d.random_retries,
            brute_cap: d.brute_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    /// Apply candidate filtering to the df/scf/ssf baselines as well.
    pub baselines_use_filter: bool,
    /// Gaussian noise (seconds) added to stay estimates; 0 = perfect estimates.
    pub stay_noise_std: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            baselines_use_filter: false,
            stay_noise_std: 0.0,
        }
    }
}

/// Fixed per-vehicle subtask times and departure instants, bypassing the
/// channel/compute model and the trace. Entries follow `vehicles` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitInstance {
    pub unit_times_s: Vec<f64>,
    pub departures_s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub rng_seed: u64,
    /// Id of the vehicle that owns the tasks; defaults to the platoon's middle vehicle.
    pub task_vehicle: Option<u32>,
    /// Bits per subtask.
    pub subtask_unit: f64,
    /// Meters.
    pub comm_range: f64,
    /// Seconds.
    pub horizon: f64,
    /// Trace CSV; generated from the freeway model when absent.
    pub trace: Option<PathBuf>,
    /// Step of the stay-time reachability scan, seconds.
    pub stay_scan_dt: f64,
    pub channel: ChannelParams,
    pub anneal: AnnealSchedule,
    pub complexity: Complexities,
    pub mobility: FreewayParams,
    pub candidate: CandidateConfig,
    pub solver: SolverTuning,
    pub harness: HarnessConfig,
    pub fleet: FleetParams,
    pub explicit: Option<ExplicitInstance>,
    pub vehicles: Vec<VehicleSpec>,
    pub tasks: Vec<TaskSpec>,
    pub histories: Vec<HistorySpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            rng_seed: 1,
            task_vehicle: None,
            subtask_unit: 1e6,
            comm_range: 150.0,
            horizon: 1800.0,
            trace: None,
            stay_scan_dt: 0.1,
            channel: ChannelParams::default(),
            anneal: AnnealSchedule::default(),
            complexity: Complexities::default(),
            mobility: FreewayParams::default(),
            candidate: CandidateConfig::default(),
            solver: SolverTuning::default(),
            harness: HarnessConfig::default(),
            fleet: FleetParams::default(),
            explicit: None,
            vehicles: Vec::new(),
            tasks: Vec::new(),
            histories: Vec::new(),
        }
    }
}

/// SplitMix64 finaliser; used to derive independent seeds from one base seed.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    let mut z = base ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) const SEED_FLEET: u64 = 1;
pub(crate) const SEED_TRACE: u64 = 2;
pub(crate) const SEED_PLAN: u64 = 3;
pub(crate) const SEED_NOISE: u64 = 4;
pub(crate) const SEED_ADMIT: u64 = 5;

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Sets `path` (dot-separated) in `table`, creating intermediate tables.
/// Numeric segments index into existing arrays, e.g. `tasks.0.deadline`.
pub fn apply_override(table: &mut toml::Table, path: &str, raw: &str) -> Result<(), ConfigError> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(ConfigError::BadOverride(path.into()));
    }
    let (first, rest) = keys.split_first().expect("split yields one key");
    let mut cur = table
        .entry(first.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    for k in rest {
        cur = match cur {
            toml::Value::Table(t) => t
                .entry(k.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new())),
            toml::Value::Array(a) => {
                let len = a.len();
                k.parse::<usize>()
                    .ok()
                    .and_then(|i| a.get_mut(i))
                    .ok_or_else(|| ConfigError::invalid(path, format!("'{k}' is not an index below {len}")))?
            }
            _ => return Err(ConfigError::invalid(path, format!("cannot descend into '{k}'"))),
        };
    }
    *cur = parse_value(raw);
    Ok(())
}

/// Splits `key=value`.
pub fn split_override(s: &str) -> Result<(&str, &str), ConfigError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| ConfigError::BadOverride(s.to_string()))
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, applies `key=value` overrides on top, then deserialises.
    pub fn from_toml_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for (k, v) in overrides {
            apply_override(&mut table, k, v)?;
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_with_overrides(&text, overrides).map_err(|e| match e {
            ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        // Relative trace paths are relative to the config file.
        if let (Some(trace), Some(dir)) = (&cfg.trace, path.parent()) {
            if trace.is_relative() {
                cfg.trace = Some(dir.join(trace));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            anneal: self.anneal,
            neighbor: self.solver.neighbor,
            hgsa_repetitions: self.solver.hgsa_repetitions,
            random_retries: self.solver.random_retries,
            brute_cap: self.solver.brute_cap,
        }
    }

    /// Fills generated vehicles, tasks and the task vehicle, then validates.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        if self.vehicles.is_empty() {
            self.vehicles = self.generate_fleet()?;
            if self.task_vehicle.is_none() {
                let mut by_x: Vec<&VehicleSpec> = self.vehicles.iter().collect();
                by_x.sort_by(|a, b| a.x.total_cmp(&b.x));
                self.task_vehicle = by_x.get(by_x.len() / 2).map(|v| v.id);
            }
        }
        if self.tasks.is_empty() {
            self.tasks = self.generate_tasks()?;
        }
        if self.task_vehicle.is_none() {
            self.task_vehicle = self.vehicles.first().map(|v| v.id);
        }
        self.validate()?;
        Ok(self)
    }

    fn generate_fleet(&self) -> Result<Vec<VehicleSpec>, ConfigError> {
        let f = &self.fleet;
        let mob = &self.mobility;
        if f.n_vehicles == 0 {
            return Err(ConfigError::invalid("fleet.n_vehicles", "must be at least 1"));
        }
        if !(f.compute_min > 0.0 && f.compute_max >= f.compute_min) {
            return Err(ConfigError::invalid(
                "fleet.compute_min",
                "need 0 < compute_min <= compute_max",
            ));
        }
        if !(f.gap_min >= 0.0 && f.gap_max >= f.gap_min) {
            return Err(ConfigError::invalid("fleet.gap_min", "need 0 <= gap_min <= gap_max"));
        }
        if !(f.speed_spread_kmh >= 0.0) {
            return Err(ConfigError::invalid("fleet.speed_spread_kmh", "must be non-negative"));
        }
        mob.validate()
            .map_err(|e| ConfigError::invalid("mobility", e.to_string()))?;
        let (lo, hi) = mob.speed_bounds_mps();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.rng_seed, SEED_FLEET));
        let flow = rng.random_range(lo..=hi);
        let spread = Normal::new(0.0, f.speed_spread_kmh / 3.6)
            .map_err(|e| ConfigError::invalid("fleet.speed_spread_kmh", e.to_string()))?;
        let mut x = 0.0;
        let mut out = Vec::with_capacity(f.n_vehicles as usize);
        for id in 1..=f.n_vehicles {
            if id > 1 {
                x += rng.random_range(f.gap_min..=f.gap_max);
            }
            let lane = rng.random_range(0..mob.lanes);
            out.push(VehicleSpec {
                id,
                compute_capacity: rng.random_range(f.compute_min..=f.compute_max),
                x,
                y: f64::from(lane) * mob.lane_width,
                speed: (flow + spread.sample(&mut rng)).clamp(lo, hi),
                lane,
            });
        }
        Ok(out)
    }

    fn generate_tasks(&self) -> Result<Vec<TaskSpec>, ConfigError> {
        let f = &self.fleet;
        if f.n_subtasks == 0 {
            return Err(ConfigError::invalid("fleet.n_subtasks", "must be at least 1"));
        }
        if f.task_subtasks_min == 0 || f.task_subtasks_max < f.task_subtasks_min {
            return Err(ConfigError::invalid(
                "fleet.task_subtasks_min",
                "need 1 <= task_subtasks_min <= task_subtasks_max",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.rng_seed, SEED_FLEET));
        rng.set_stream(1);
        let mut left = f.n_subtasks;
        let mut out = Vec::new();
        let mut id = 1;
        while left > 0 {
            let want = rng.random_range(f.task_subtasks_min..=f.task_subtasks_max);
            let count = want.min(left);
            left -= count;
            out.push(TaskSpec {
                id,
                data_size: f64::from(count) * self.subtask_unit,
                category: TaskKind::ALL[rng.random_range(0..4)],
                deadline: f.deadline,
            });
            id += 1;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.comm_range > 0.0) {
            return Err(ConfigError::invalid("comm_range", "must be positive"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(ConfigError::invalid("horizon", "must be positive and finite"));
        }
        if !(self.subtask_unit > 0.0) {
            return Err(ConfigError::invalid("subtask_unit", "must be positive"));
        }
        if !(self.stay_scan_dt > 0.0) {
            return Err(ConfigError::invalid("stay_scan_dt", "must be positive"));
        }
        if !(self.candidate.learning_rate > 0.0) || !(self.candidate.time_scale > 0.0) {
            return Err(ConfigError::invalid(
                "candidate",
                "learning_rate and time_scale must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.candidate.prior_success_rate) {
            return Err(ConfigError::invalid("candidate.prior_success_rate", "must be in [0,1]"));
        }
        if !(self.harness.stay_noise_std >= 0.0) {
            return Err(ConfigError::invalid("harness.stay_noise_std", "must be non-negative"));
        }
        self.channel
            .validate()
            .map_err(|e| ConfigError::invalid("channel", e.to_string()))?;
        self.anneal
            .validate()
            .map_err(|e| ConfigError::invalid("anneal", e.to_string()))?;
        self.complexity.validate()?;
        self.mobility
            .validate()
            .map_err(|e| ConfigError::invalid("mobility", e.to_string()))?;
        let vehicles = self.build_vehicles()?;
        self.build_tasks()?;
        let k = self
            .task_vehicle
            .ok_or_else(|| ConfigError::invalid("task_vehicle", "no vehicles"))?;
        if !vehicles.iter().any(|v| v.id == k) {
            return Err(ConfigError::invalid("task_vehicle", format!("no vehicle with id {k}")));
        }
        for h in &self.histories {
            if VehicleHistory::new(h.participations, h.successes).is_none() {
                return Err(ConfigError::invalid(
                    format!("histories[vehicle={}]", h.vehicle),
                    "successes exceed participations",
                ));
            }
        }
        if let Some(ex) = &self.explicit {
            let n = vehicles.len();
            if ex.unit_times_s.len() != n || ex.departures_s.len() != n {
                return Err(ConfigError::invalid(
                    "explicit",
                    format!("unit_times_s and departures_s need {n} entries"),
                ));
            }
            if ex.unit_times_s.iter().any(|t| !(*t > 0.0)) {
                return Err(ConfigError::invalid(
                    "explicit.unit_times_s",
                    "entries must be positive",
                ));
            }
            if ex.departures_s.iter().any(|t| !(*t >= 0.0)) {
                return Err(ConfigError::invalid(
                    "explicit.departures_s",
                    "entries must be non-negative",
                ));
            }
        }
        Ok(())
    }

    pub fn build_vehicles(&self) -> Result<Vec<Vehicle>, ConfigError> {
        let vs = self
            .vehicles
            .iter()
            .map(|s| Vehicle::new(s.id, s.compute_capacity, Position::new(s.x, s.y), s.speed, s.lane))
            .collect::<Result<Vec<_>, _>>()?;
        if vs.is_empty() {
            return Err(ConfigError::invalid("vehicles", "at least one vehicle required"));
        }
        check_unique_ids(&vs)?;
        Ok(vs)
    }

    pub fn build_tasks(&self) -> Result<Vec<Task>, ConfigError> {
        if self.tasks.is_empty() {
            return Err(ConfigError::invalid("tasks", "at least one task required"));
        }
        self.tasks
            .iter()
            .map(|t| {
                Task::new(t.id, t.data_size, self.complexity.category(t.category), t.deadline)
                    .map_err(ConfigError::from)
            })
            .collect()
    }

    pub fn build_histories(&self) -> Histories {
        let mut h = Histories::new(self.candidate.prior_success_rate);
        for s in &self.histories {
            if let Some(v) = VehicleHistory::new(s.participations, s.successes) {
                h.insert(s.vehicle, v);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = ScenarioConfig::default().resolve().unwrap();
        assert_eq!(cfg.vehicles.len(), 20);
        let total: f64 = cfg.tasks.iter().map(|t| t.data_size).sum();
        assert_eq!(total, 400.0 * 1e6);
        assert!(cfg.tasks.iter().all(|t| t.data_size <= 150e6));
        let (lo, hi) = cfg.mobility.speed_bounds_mps();
        assert!(cfg.vehicles.iter().all(|v| v.speed >= lo && v.speed <= hi));
        assert!(cfg.vehicles.iter().all(|v| (4e6..=2e7).contains(&v.compute_capacity)));
    }

    #[test]
    fn resolution_is_deterministic_and_printable() {
        let a = ScenarioConfig::default().resolve().unwrap();
        let b = ScenarioConfig::default().resolve().unwrap();
        assert_eq!(a, b);
        let text = a.to_toml_string();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn overrides_win_over_file() {
        let text = "rng_seed = 5\ncomm_range = 100.0\n[fleet]\nn_vehicles = 8\n";
        let ovr = vec![
            ("comm_range".to_string(), "120.5".to_string()),
            ("fleet.n_vehicles".to_string(), "6".to_string()),
            ("channel.bandwidth".to_string(), "1e6".to_string()),
        ];
        let cfg = ScenarioConfig::from_toml_with_overrides(text, &ovr).unwrap();
        assert_eq!(cfg.rng_seed, 5);
        assert_eq!(cfg.comm_range, 120.5);
        assert_eq!(cfg.fleet.n_vehicles, 6);
        assert_eq!(cfg.channel.bandwidth, 1e6);
        assert_eq!(cfg.channel.tx_power, 1.3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
        let ovr = vec![("channel.bogus".to_string(), "1".to_string())];
        assert!(ScenarioConfig::from_toml_with_overrides("", &ovr).is_err());
    }

    #[test]
    fn infinite_departures_parse() {
        let text = r#"
            task_vehicle = 1
            [[vehicles]]
            id = 1
            compute_capacity = 1e7
            x = 0.0
            y = 0.0
            speed = 20.0
            [[tasks]]
            id = 1
            data_size = 4e6
            category = "A"
            deadline = 100.0
            [explicit]
            unit_times_s = [5.0]
            departures_s = [inf]
        "#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap().resolve().unwrap();
        assert!(cfg.explicit.unwrap().departures_s[0].is_infinite());
    }

    #[test]
    fn validation_names_field() {
        let cfg = ScenarioConfig {
            comm_range: 0.0,
            ..ScenarioConfig::default()
        };
        let err = cfg.resolve().unwrap_err().to_string();
        assert!(err.contains("comm_range"), "{err}");
        let cfg = ScenarioConfig {
            task_vehicle: Some(99),
            ..ScenarioConfig::default()
        };
        assert!(cfg.resolve().unwrap_err().to_string().contains("task_vehicle"));
    }

    #[test]
    fn override_indexes_arrays() {
        let text = "[[tasks]]\nid = 1\ndata_size = 4e6\ncategory = \"A\"\ndeadline = 100.0\n";
        let ovr = vec![("tasks.0.deadline".to_string(), "7.5".to_string())];
        let cfg = ScenarioConfig::from_toml_with_overrides(text, &ovr).unwrap();
        assert_eq!(cfg.tasks[0].deadline, 7.5);
        let ovr = vec![("tasks.1.deadline".to_string(), "7.5".to_string())];
        assert!(ScenarioConfig::from_toml_with_overrides(text, &ovr).is_err());
        let ovr = vec![("rng_seed.x".to_string(), "1".to_string())];
        assert!(ScenarioConfig::from_toml_with_overrides(text, &ovr).is_err());
    }

    #[test]
    fn split_override_forms() {
        assert_eq!(split_override("a.b=3").unwrap(), ("a.b", "3"));
        assert!(split_override("novalue").is_err());
        assert!(split_override("=3").is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 1), derive_seed(2, 1));
        assert_eq!(derive_seed(9, 3), derive_seed(9, 3));
    }
}
