use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::TraceError;
use crate::model::{Position, Vehicle};

use super::trace::TraceSample;

/// Lane-keeping freeway motion: each vehicle stays in its lane and its speed
/// takes a Gaussian step every sample interval, clamped to the speed bounds.
/// With `speed_reversion > 0` the step also pulls the speed back toward the
/// vehicle's initial (cruise) speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreewayParams {
    pub speed_min_kmh: f64,
    pub speed_max_kmh: f64,
    /// Standard deviation of the per-step speed change, m/s.
    pub speed_noise_std: f64,
    /// Fraction of the gap to the cruise speed closed per second; 0 = pure random walk.
    pub speed_reversion: f64,
    /// Trace sampling interval, seconds.
    pub sample_dt: f64,
    pub lanes: u8,
    pub lane_width: f64,
}

impl Default for FreewayParams {
    fn default() -> Self {
        FreewayParams {
            speed_min_kmh: 60.0,
            speed_max_kmh: 100.0,
            speed_noise_std: 0.5,
            speed_reversion: 0.1,
            sample_dt: 1.0,
            lanes: 3,
            lane_width: 3.5,
        }
    }
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

impl FreewayParams {
    pub fn speed_bounds_mps(&self) -> (f64, f64) {
        (kmh_to_mps(self.speed_min_kmh), kmh_to_mps(self.speed_max_kmh))
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let bad = |field, value| Err(TraceError::InvalidParam { field, value });
        if self.lanes == 0 {
            return bad("lanes", 0.0);
        }
        if !(self.speed_min_kmh >= 0.0) {
            return bad("speed_min_kmh", self.speed_min_kmh);
        }
        if !(self.speed_max_kmh >= self.speed_min_kmh) || !self.speed_max_kmh.is_finite() {
            return bad("speed_max_kmh", self.speed_max_kmh);
        }
        if !(self.speed_noise_std >= 0.0) || !self.speed_noise_std.is_finite() {
            return bad("speed_noise_std", self.speed_noise_std);
        }
        if !(0.0..=1.0).contains(&self.speed_reversion) {
            return bad("speed_reversion", self.speed_reversion);
        }
        if !(self.sample_dt > 0.0) || !self.sample_dt.is_finite() {
            return bad("sample_dt", self.sample_dt);
        }
        if !(self.lane_width > 0.0) {
            return bad("lane_width", self.lane_width);
        }
        Ok(())
    }
}

/// Generates samples at `k·sample_dt` for every vehicle until `horizon` is covered.
///
/// Each vehicle draws from its own ChaCha stream, so adding a vehicle does not
/// perturb the others.
pub fn gen_freeway_trace(
    vehicles: &[Vehicle],
    horizon: f64,
    params: &FreewayParams,
    seed: u64,
) -> Result<Vec<TraceSample>, TraceError> {
    params.validate()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(TraceError::InvalidParam {
            field: "horizon",
            value: horizon,
        });
    }
    let (lo, hi) = params.speed_bounds_mps();
    let steps = (horizon / params.sample_dt).ceil() as u64;
    let noise = Normal::new(0.0, params.speed_noise_std).expect("validated std");
    let mut out = Vec::with_capacity(vehicles.len() * (steps as usize + 1));
    for v in vehicles {
        // Small tolerance for km/h <-> m/s round trips.
        if v.speed < lo - 1e-9 || v.speed > hi + 1e-9 {
            return Err(TraceError::InvalidParam {
                field: "speed",
                value: v.speed,
            });
        }
        if u32::from(v.lane) >= u32::from(params.lanes) {
            return Err(TraceError::InvalidParam {
                field: "lane",
                value: f64::from(v.lane),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(v.id));
        let mut x = v.position.x;
        let cruise = v.speed.clamp(lo, hi);
        let pull = (params.speed_reversion * params.sample_dt).min(1.0);
        let mut speed = cruise;
        for k in 0..=steps {
            out.push(TraceSample {
                time: k as f64 * params.sample_dt,
                vehicle_id: v.id,
                position: Position::new(x, v.position.y),
                speed,
            });
            x += speed * params.sample_dt;
            if params.speed_noise_std > 0.0 {
                let drift = pull * (cruise - speed);
                speed = (speed + drift + noise.sample(&mut rng)).clamp(lo, hi);
            }
        }
    }
    Ok(out)
}
