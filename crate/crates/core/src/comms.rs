//! V2V transmission rates and delays.
//!
//! Units are bits, bits per second and seconds throughout. The channel
//! bandwidth is shared by the `m' - 1` simultaneous outbound transfers of a
//! planning round; a lone subtask keeps the full band.

use serde::{Deserialize, Serialize};

use crate::error::CommsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    /// Hz.
    pub bandwidth: f64,
    /// Watts.
    pub tx_power: f64,
    pub channel_gain: f64,
    /// Watts.
    pub noise_power: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            bandwidth: 2e6,
            tx_power: 1.3,
            channel_gain: 4.0,
            noise_power: 3e-13,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), CommsError> {
        for (field, value) in [
            ("bandwidth", self.bandwidth),
            ("tx_power", self.tx_power),
            ("channel_gain", self.channel_gain),
            ("noise_power", self.noise_power),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CommsError::InvalidChannel { field, value });
            }
        }
        Ok(())
    }

    pub fn snr(&self) -> f64 {
        self.tx_power * self.channel_gain / self.noise_power
    }

    /// Shannon spectral efficiency `log2(1 + p·h/N)` in bits/s/Hz.
    pub fn spectral_efficiency(&self) -> f64 {
        self.snr().ln_1p() / std::f64::consts::LN_2
    }
}

fn share_divisor(m_prime: usize) -> Result<f64, CommsError> {
    if m_prime == 0 {
        return Err(CommsError::NoSubtasks);
    }
    Ok((m_prime.saturating_sub(1)).max(1) as f64)
}

/// Single-hop rate between the task vehicle and a neighbour.
pub fn direct_rate(ch: &ChannelParams, m_prime: usize) -> Result<f64, CommsError> {
    ch.validate()?;
    let div = share_divisor(m_prime)?;
    Ok(ch.bandwidth / div * ch.spectral_efficiency())
}

/// End-to-end rate of a relay chain whose hops run at `hop_rates`.
pub fn harmonic_rate(hop_rates: &[f64]) -> Result<f64, CommsError> {
    if hop_rates.is_empty() {
        return Err(CommsError::Unreachable);
    }
    let inv: f64 = hop_rates.iter().map(|r| 1.0 / r).sum();
    Ok(1.0 / inv)
}

/// Rate over `mu` hops of equal power.
pub fn multihop_rate(ch: &ChannelParams, m_prime: usize, mu: u32) -> Result<f64, CommsError> {
    if mu == 0 {
        return Err(CommsError::Unreachable);
    }
    Ok(direct_rate(ch, m_prime)? / mu as f64)
}

/// Seconds needed to push `size` bits over `mu` hops.
pub fn tran_delay(size: f64, ch: &ChannelParams, m_prime: usize, mu: u32) -> Result<f64, CommsError> {
    if !(size >= 0.0) || !size.is_finite() {
        return Err(CommsError::InvalidSize(size));
    }
    if mu == 0 {
        return Err(CommsError::Unreachable);
    }
    ch.validate()?;
    let div = share_divisor(m_prime)?;
    Ok(size * mu as f64 * div / (ch.bandwidth * ch.spectral_efficiency()))
}
