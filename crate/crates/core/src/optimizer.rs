//! Subcarrier-spacing selection: spectral-efficiency objective under
//! coherence-bandwidth and coherence-time constraints.

use serde::{Deserialize, Serialize};

use crate::channel::{doppler_max, kmh_to_mps, ChannelStats, PowerDelayProfile, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::ofdm::{
    average_sinr, ber_mqam_awgn, ici_power_analytic, qam_bit_load, sinr_monte_carlo, snr_gap,
    LinkScenario, SinrProfile, WaveformCandidate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingConstraint {
    None,
    CoherenceBw,
    CoherenceTime,
}

impl BindingConstraint {
    pub fn as_str(self) -> &'static str {
        match self {
            BindingConstraint::None => "none",
            BindingConstraint::CoherenceBw => "coherence_bw",
            BindingConstraint::CoherenceTime => "coherence_time",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveResult {
    pub delta_f: f64,
    pub spectral_efficiency: f64,
    pub feasible: bool,
    pub binding_constraint: BindingConstraint,
}

/// Goodput per hertz for a given per-subcarrier loading:
/// sum of b(k) (1 - BER(k)) over one symbol, divided by bandwidth times
/// symbol duration.
pub fn spectral_efficiency_from_loading(
    bits: &[u8],
    bers: &[f64],
    bw_hz: f64,
    total_symbol: f64,
) -> f64 {
    let goodput: f64 = bits
        .iter()
        .zip(bers)
        .map(|(&b, &ber)| f64::from(b) * (1.0 - ber))
        .sum();
    goodput.max(0.0) / (bw_hz * total_symbol)
}

/// Spectral efficiency of `candidate`, loading each effective subcarrier
/// from its SINR with the gap approximation.
pub fn spectral_efficiency(
    candidate: &WaveformCandidate,
    sinr: &SinrProfile,
    scenario: &LinkScenario,
) -> Result<f64> {
    if sinr.per_subcarrier.len() < candidate.n_used {
        return Err(Error::InvalidInput(format!(
            "SINR profile covers {} subcarriers, candidate uses {}",
            sinr.per_subcarrier.len(),
            candidate.n_used
        )));
    }
    let gap = snr_gap(scenario.target_ber)?;
    let mut bits = Vec::with_capacity(candidate.n_used);
    let mut bers = Vec::with_capacity(candidate.n_used);
    for &s in &sinr.per_subcarrier[..candidate.n_used] {
        let b = qam_bit_load(s, gap, &scenario.allowed_bits);
        bits.push(b);
        bers.push(if b == 0 { 0.0 } else { ber_mqam_awgn(b, s)? });
    }
    Ok(spectral_efficiency_from_loading(
        &bits,
        &bers,
        scenario.bw_hz,
        candidate.total_symbol,
    ))
}

/// Strict-inequality check of spacing against coherence bandwidth and
/// total symbol time against coherence time. Bandwidth is reported first
/// when both fail.
pub fn check_feasibility(
    candidate: &WaveformCandidate,
    stats: &ChannelStats,
) -> (bool, BindingConstraint) {
    if candidate.delta_f >= stats.coherence_bandwidth_hz {
        (false, BindingConstraint::CoherenceBw)
    } else if candidate.total_symbol >= stats.coherence_time_s {
        (false, BindingConstraint::CoherenceTime)
    } else {
        (true, BindingConstraint::None)
    }
}

/// Where per-candidate SINR comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SinrSource {
    Analytic,
    MonteCarlo { realizations: usize, seed: u64 },
}

/// Objective values for every candidate at one velocity, in candidate order.
pub fn evaluate_candidates(
    scenario: &LinkScenario,
    pdp: &PowerDelayProfile,
    velocity_kmh: f64,
    source: &SinrSource,
) -> Result<Vec<ObjectiveResult>> {
    scenario.validate()?;
    let f_d = doppler_max(kmh_to_mps(velocity_kmh), scenario.carrier_hz);
    let stats = ChannelStats::compute(pdp, f_d, scenario.coherence_level);
    scenario
        .candidates()?
        .iter()
        .map(|cand| {
            let sinr = match source {
                SinrSource::Analytic => average_sinr(
                    ici_power_analytic(f_d, cand.delta_f),
                    scenario.snr_db,
                    cand.n_used,
                )?,
                SinrSource::MonteCarlo { realizations, seed } => {
                    sinr_monte_carlo(pdp, f_d, cand, scenario.snr_db, *realizations, *seed)
                }
            };
            let (feasible, binding_constraint) = check_feasibility(cand, &stats);
            Ok(ObjectiveResult {
                delta_f: cand.delta_f,
                spectral_efficiency: spectral_efficiency(cand, &sinr, scenario)?,
                feasible,
                binding_constraint,
            })
        })
        .collect()
}

/// Feasible entry with the highest objective; ties go to the smaller spacing.
pub fn select_optimum(results: &[ObjectiveResult]) -> Result<ObjectiveResult> {
    let mut best: Option<ObjectiveResult> = None;
    for r in results.iter().filter(|r| r.feasible) {
        best = match best {
            Some(b) if r.spectral_efficiency > b.spectral_efficiency => Some(*r),
            Some(b) if r.spectral_efficiency == b.spectral_efficiency && r.delta_f < b.delta_f => {
                Some(*r)
            }
            Some(b) => Some(b),
            None => Some(*r),
        };
    }
    best.ok_or(Error::NoFeasibleNumerology)
}

/// Best feasible spacing at one velocity.
pub fn optimize_subcarrier_spacing(
    scenario: &LinkScenario,
    pdp: &PowerDelayProfile,
    velocity_kmh: f64,
    source: &SinrSource,
) -> Result<ObjectiveResult> {
    select_optimum(&evaluate_candidates(scenario, pdp, velocity_kmh, source)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingEntry {
    pub velocity_kmh: f64,
    pub outcome: Result<ObjectiveResult>,
}

impl MappingEntry {
    pub fn optimal_spacing(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.delta_f)
    }
}

/// Optimal spacing per velocity. Failures are kept as annotated entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VelocityMapping {
    pub entries: Vec<MappingEntry>,
}

pub fn velocity_mapping(
    scenario: &LinkScenario,
    pdp: &PowerDelayProfile,
    velocities_kmh: &[f64],
    source: &SinrSource,
) -> Result<VelocityMapping> {
    if velocities_kmh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "velocities must be strictly increasing".into(),
        ));
    }
    let entries = velocities_kmh
        .iter()
        .map(|&v| MappingEntry {
            velocity_kmh: v,
            outcome: optimize_subcarrier_spacing(scenario, pdp, v, source),
        })
        .collect();
    Ok(VelocityMapping { entries })
}

/// A velocity band with its expected optimal spacing, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceBand {
    pub v_min_kmh: f64,
    pub v_max_kmh: f64,
    pub spacing_khz: f64,
}

/// Published 5 GHz mapping: 9 kHz up to 60 km/h, 18 kHz for 80-140 km/h,
/// 35 kHz for 160-200 km/h.
pub fn reference_bands_5ghz() -> Vec<ReferenceBand> {
    vec![
        ReferenceBand {
            v_min_kmh: 0.0,
            v_max_kmh: 60.0,
            spacing_khz: 9.0,
        },
        ReferenceBand {
            v_min_kmh: 80.0,
            v_max_kmh: 140.0,
            spacing_khz: 18.0,
        },
        ReferenceBand {
            v_min_kmh: 160.0,
            v_max_kmh: 200.0,
            spacing_khz: 35.0,
        },
    ]
}

/// Published 1 GHz mapping: 9 kHz at every velocity up to 200 km/h.
pub fn reference_bands_1ghz() -> Vec<ReferenceBand> {
    vec![ReferenceBand {
        v_min_kmh: 0.0,
        v_max_kmh: 200.0,
        spacing_khz: 9.0,
    }]
}

/// Expected spacing (Hz) for `velocity_kmh`, if a band covers it.
pub fn reference_spacing(bands: &[ReferenceBand], velocity_kmh: f64) -> Option<f64> {
    bands
        .iter()
        .find(|b| velocity_kmh >= b.v_min_kmh && velocity_kmh <= b.v_max_kmh)
        .map(|b| b.spacing_khz * 1e3)
}

/// UL/DL guard period: round-trip propagation plus turnaround, seconds.
pub fn tdd_guard_time(range_m: f64, switch_time_s: f64) -> f64 {
    2.0 * range_m / SPEED_OF_LIGHT + switch_time_s
}
