//! Air-to-ground multipath channel: power-delay profile, Doppler process,
//! delay/coherence statistics and sum-of-sinusoids tap generation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::special::db_to_linear;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Sinusoids per tap in the sum-of-sinusoids generator.
pub const SINUSOIDS_PER_TAP: usize = 64;

/// Measured maximum excess delay of the en-route ATG channel, used for CP sizing.
pub const MEASURED_TAU_MAX_NS: f64 = 1500.0;

/// Delays of the en-route ATG prototype profile, ns.
pub const ATG_DELAYS_NS: [f64; 8] = [0.0, 33.0, 70.0, 115.0, 175.0, 262.0, 405.0, 682.0];
/// Relative powers of the en-route ATG prototype profile, dB.
pub const ATG_POWERS_DB: [f64; 8] = [0.0, -8.7, -9.6, -11.3, -13.4, -15.2, -17.0, -20.2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay_ns: f64,
    pub power_db: f64,
}

/// Ordered multipath taps. The first tap sits at 0 ns, delays increase
/// strictly, and the strongest tap is at exactly 0 dB.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    taps: Vec<Tap>,
}

impl PowerDelayProfile {
    /// Builds a profile, rejecting anything that violates the invariants.
    pub fn new(delays_ns: &[f64], powers_db: &[f64]) -> Result<Self> {
        if delays_ns.len() != powers_db.len() {
            return Err(Error::InvalidProfile(format!(
                "delays_ns has {} entries but powers_db has {}",
                delays_ns.len(),
                powers_db.len()
            )));
        }
        if delays_ns.is_empty() {
            return Err(Error::InvalidProfile("at least one tap is required".into()));
        }
        if delays_ns.iter().chain(powers_db).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("non-finite delay or power".into()));
        }
        if delays_ns[0] != 0.0 {
            return Err(Error::InvalidProfile("first delay must be 0 ns".into()));
        }
        if delays_ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProfile(
                "delays must be strictly increasing".into(),
            ));
        }
        if powers_db.iter().any(|&p| p > 0.0) {
            return Err(Error::InvalidProfile("powers must not exceed 0 dB".into()));
        }
        if !powers_db.contains(&0.0) {
            return Err(Error::InvalidProfile(
                "strongest tap must be exactly 0 dB".into(),
            ));
        }
        let taps = delays_ns
            .iter()
            .zip(powers_db)
            .map(|(&delay_ns, &power_db)| Tap { delay_ns, power_db })
            .collect();
        Ok(Self { taps })
    }

    /// Re-anchors an arbitrary delay/power list: delays are shifted so the
    /// first tap is at 0 ns and powers are offset so the strongest is 0 dB.
    pub fn normalized(delays_ns: &[f64], powers_db: &[f64]) -> Result<Self> {
        let first = delays_ns.first().copied().unwrap_or(0.0);
        let peak = powers_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let delays: Vec<f64> = delays_ns.iter().map(|d| d - first).collect();
        let powers: Vec<f64> = powers_db.iter().map(|p| p - peak).collect();
        Self::new(&delays, &powers)
    }

    /// The eight-tap en-route ATG prototype.
    pub fn atg_prototype() -> Self {
        Self::new(&ATG_DELAYS_NS, &ATG_POWERS_DB).expect("prototype profile is valid")
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn delays_ns(&self) -> impl Iterator<Item = f64> + '_ {
        self.taps.iter().map(|t| t.delay_ns)
    }

    /// Linear tap powers scaled to unit total power.
    pub fn normalized_linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.taps.iter().map(|t| db_to_linear(t.power_db)).collect();
        let total: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / total).collect()
    }
}

impl Default for PowerDelayProfile {
    fn default() -> Self {
        Self::atg_prototype()
    }
}

/// Power-weighted RMS spread of the delay axis, ns.
pub fn rms_delay_spread(pdp: &PowerDelayProfile) -> f64 {
    let weights = pdp.normalized_linear_powers();
    let scale = max_excess_delay(pdp);
    if scale == 0.0 {
        return 0.0;
    }
    // centred and scaled so huge delays neither overflow nor cancel
    let mean: f64 = pdp
        .delays_ns()
        .zip(&weights)
        .map(|(d, w)| d / scale * w)
        .sum();
    let var: f64 = pdp
        .delays_ns()
        .zip(&weights)
        .map(|(d, w)| (d / scale - mean).powi(2) * w)
        .sum();
    var.sqrt() * scale
}

/// Last tap delay minus first tap delay, ns.
pub fn max_excess_delay(pdp: &PowerDelayProfile) -> f64 {
    let taps = pdp.taps();
    taps[taps.len() - 1].delay_ns - taps[0].delay_ns
}

/// Maximum Doppler shift, Hz, for a speed in m/s.
pub fn doppler_max(velocity_mps: f64, carrier_hz: f64) -> f64 {
    velocity_mps * carrier_hz / SPEED_OF_LIGHT
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Frequency-correlation level used for the coherence-bandwidth estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceLevel {
    /// 0.5 correlation: 1/(5 sigma).
    #[default]
    Corr50,
    /// 0.9 correlation: 1/(50 sigma).
    Corr90,
}

/// Coherence bandwidth estimate, Hz, from an RMS delay spread in ns.
///
/// A zero spread (single-path channel) yields an infinite bandwidth.
pub fn coherence_bandwidth(sigma_tau_ns: f64, level: CoherenceLevel) -> f64 {
    let sigma = sigma_tau_ns * 1e-9;
    if sigma <= 0.0 {
        return f64::INFINITY;
    }
    match level {
        CoherenceLevel::Corr50 => 1.0 / (5.0 * sigma),
        CoherenceLevel::Corr90 => 1.0 / (50.0 * sigma),
    }
}

/// Coherence time estimate 0.423/f_d, seconds.
///
/// A zero Doppler shift returns [`Error::StaticChannel`]; callers treat the
/// coherence-time constraint as satisfied in that case.
pub fn coherence_time(f_d: f64) -> Result<f64> {
    if f_d <= 0.0 {
        return Err(Error::StaticChannel);
    }
    Ok(0.423 / f_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DopplerModel {
    #[default]
    Jakes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerSpectrum {
    pub model: DopplerModel,
    pub max_doppler_hz: f64,
}

impl DopplerSpectrum {
    pub fn jakes(max_doppler_hz: f64) -> Self {
        assert!(max_doppler_hz >= 0.0, "Doppler shift must be non-negative");
        Self {
            model: DopplerModel::Jakes,
            max_doppler_hz,
        }
    }

    /// Power spectral density at frequency `nu`, normalized to unit area.
    /// Zero outside `(-f_d, f_d)`; singular at the band edges.
    pub fn density(&self, nu: f64) -> f64 {
        let fd = self.max_doppler_hz;
        match self.model {
            DopplerModel::Jakes => {
                if fd <= 0.0 || nu.abs() >= fd {
                    0.0
                } else {
                    let r = nu / fd;
                    1.0 / (PI * fd * (1.0 - r * r).sqrt())
                }
            }
        }
    }
}

/// Delay, coherence and Doppler statistics for one link condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub sigma_tau_ns: f64,
    pub tau_max_ns: f64,
    pub coherence_bandwidth_hz: f64,
    /// Infinite for a static channel.
    pub coherence_time_s: f64,
}

impl ChannelStats {
    pub fn compute(pdp: &PowerDelayProfile, f_d: f64, level: CoherenceLevel) -> Self {
        let sigma_tau_ns = rms_delay_spread(pdp);
        Self {
            sigma_tau_ns,
            tau_max_ns: max_excess_delay(pdp),
            coherence_bandwidth_hz: coherence_bandwidth(sigma_tau_ns, level),
            coherence_time_s: coherence_time(f_d).unwrap_or(f64::INFINITY),
        }
    }
}

/// Complex gain sequences, one per PDP tap, sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProcessRealization {
    pub sample_interval: f64,
    pub gains: Vec<Vec<Complex64>>,
    pub seed: u64,
}

impl TapProcessRealization {
    pub fn num_samples(&self) -> usize {
        self.gains.first().map_or(0, Vec::len)
    }
}

/// Generates independent Rayleigh tap processes with a Jakes Doppler
/// spectrum, each scaled to its tap's share of unit total power.
///
/// Each tap draws from its own substream of `seed`, so the output is
/// identical regardless of how the taps are scheduled.
pub fn generate_tap_processes(
    pdp: &PowerDelayProfile,
    doppler: DopplerSpectrum,
    num_samples: usize,
    sample_interval: f64,
    seed: u64,
) -> TapProcessRealization {
    assert!(num_samples > 0, "num_samples must be positive");
    assert!(sample_interval > 0.0, "sample_interval must be positive");
    let gains = pdp
        .normalized_linear_powers()
        .iter()
        .enumerate()
        .map(|(idx, &power)| {
            let mut out = vec![Complex64::new(0.0, 0.0); num_samples];
            sum_of_sinusoids(
                seed,
                0,
                idx as u64,
                power,
                doppler.max_doppler_hz,
                sample_interval,
                &mut out,
            );
            out
        })
        .collect();
    TapProcessRealization {
        sample_interval,
        gains,
        seed,
    }
}

/// Fills `out` with one sum-of-sinusoids tap process of mean power `power`.
///
/// Arrival angles are equally spaced with a random common rotation, and each
/// sinusoid carries an independent uniform phase.
pub(crate) fn sum_of_sinusoids(
    seed: u64,
    realization: u64,
    lane: u64,
    power: f64,
    f_d: f64,
    dt: f64,
    out: &mut [Complex64],
) {
    let mut rng = substream(seed, realization, lane);
    let m = SINUSOIDS_PER_TAP as f64;
    let amplitude = (power / m).sqrt();
    let rotation: f64 = rng.gen_range(-PI..PI);

    let mut phasors = [Complex64::new(0.0, 0.0); SINUSOIDS_PER_TAP];
    let mut steps = [Complex64::new(0.0, 0.0); SINUSOIDS_PER_TAP];
    for (i, (ph, st)) in phasors.iter_mut().zip(steps.iter_mut()).enumerate() {
        let angle = (2.0 * PI * i as f64 + rotation) / m;
        let phase: f64 = rng.gen_range(-PI..PI);
        *ph = Complex64::from_polar(amplitude, phase);
        *st = Complex64::from_polar(1.0, 2.0 * PI * f_d * angle.cos() * dt);
    }

    // Re-seed the recurrence from exact phasors every block to bound drift.
    const BLOCK: usize = 4096;
    let base = phasors;
    let mut start = 0;
    while start < out.len() {
        if start > 0 {
            let t = start as f64 * dt;
            for (i, ph) in phasors.iter_mut().enumerate() {
                let angle = (2.0 * PI * i as f64 + rotation) / m;
                *ph = base[i] * Complex64::from_polar(1.0, 2.0 * PI * f_d * angle.cos() * t);
            }
        }
        let end = (start + BLOCK).min(out.len());
        for sample in &mut out[start..end] {
            let mut acc = Complex64::new(0.0, 0.0);
            for (ph, st) in phasors.iter_mut().zip(&steps) {
                acc += *ph;
                *ph *= st;
            }
            *sample = acc;
        }
        start = end;
    }
}
