//! OFDM numerology, Doppler-induced inter-carrier interference, per-subcarrier
//! SINR and uncoded M-QAM bit loading.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::channel::{sum_of_sinusoids, CoherenceLevel, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::special::{db_to_linear, integrate, linear_to_db, q_function, sinc};

/// Largest constellation supported by the bit loader (256-QAM).
pub const MAX_BITS: u8 = 8;

/// Closest power of two to `floor(bw_alpha / delta_f)`; ties go to the
/// smaller size.
pub fn select_fft_size(bw_alpha: f64, delta_f: f64) -> Result<usize> {
    let target = subcarrier_budget(bw_alpha, delta_f);
    if target == 0 {
        return Err(Error::SpacingExceedsBandwidth { bw_alpha, delta_f });
    }
    if target.is_power_of_two() {
        return Ok(target);
    }
    let upper = target.next_power_of_two();
    let lower = upper / 2;
    if target - lower <= upper - target {
        Ok(lower)
    } else {
        Ok(upper)
    }
}

/// Number of non-virtual subcarriers: the FFT size capped by how many
/// spacings fit in the effective bandwidth.
pub fn effective_subcarriers(n_fft: usize, bw_alpha: f64, delta_f: f64) -> usize {
    n_fft.min(subcarrier_budget(bw_alpha, delta_f))
}

fn subcarrier_budget(bw_alpha: f64, delta_f: f64) -> usize {
    if !(bw_alpha > 0.0 && delta_f > 0.0) {
        return 0;
    }
    let ratio = bw_alpha / delta_f;
    // absorb representation error in ratios that are exact integers
    let snapped = ratio.round();
    let count = if (ratio - snapped).abs() <= 1e-9 * ratio {
        snapped
    } else {
        ratio.floor()
    };
    if count >= usize::MAX as f64 {
        usize::MAX
    } else {
        count as usize
    }
}

/// One candidate numerology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformCandidate {
    pub delta_f: f64,
    pub n_fft: usize,
    pub n_used: usize,
    pub cp_duration: f64,
    pub useful_symbol: f64,
    pub total_symbol: f64,
}

impl WaveformCandidate {
    pub fn new(delta_f: f64, bw_alpha: f64, cp_duration: f64) -> Result<Self> {
        if !(cp_duration > 0.0) || !cp_duration.is_finite() {
            return Err(Error::InvalidScenario(
                "CP duration must be positive".into(),
            ));
        }
        let n_fft = select_fft_size(bw_alpha, delta_f)?;
        let n_used = effective_subcarriers(n_fft, bw_alpha, delta_f);
        let useful_symbol = 1.0 / delta_f;
        Ok(Self {
            delta_f,
            n_fft,
            n_used,
            cp_duration,
            useful_symbol,
            total_symbol: useful_symbol + cp_duration,
        })
    }
}

/// Everything the spacing objective is evaluated against.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    pub bw_hz: f64,
    pub alpha: f64,
    pub carrier_hz: f64,
    pub snr_db: f64,
    pub cp_s: f64,
    pub target_ber: f64,
    /// Ascending, always contains 0.
    pub allowed_bits: Vec<u8>,
    /// Ascending.
    pub candidate_spacings_hz: Vec<f64>,
    pub coherence_level: CoherenceLevel,
}

impl Default for LinkScenario {
    /// 5 MHz channel, 4.5 MHz occupied, 5 GHz carrier, 14 dB SNR, 2 us CP.
    fn default() -> Self {
        Self {
            bw_hz: 5e6,
            alpha: 0.9,
            carrier_hz: 5e9,
            snr_db: 14.0,
            cp_s: 2e-6,
            target_ber: 1e-3,
            allowed_bits: (0..=MAX_BITS).collect(),
            candidate_spacings_hz: vec![3e3, 6e3, 9e3, 18e3, 35e3, 45e3],
            coherence_level: CoherenceLevel::Corr50,
        }
    }
}

impl LinkScenario {
    pub fn bw_alpha(&self) -> f64 {
        self.alpha * self.bw_hz
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidScenario(m.to_string()));
        if !(self.bw_hz > 0.0 && self.bw_hz.is_finite()) {
            return bad("bandwidth must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return bad("carrier frequency must be positive");
        }
        if self.snr_db.is_nan() {
            return bad("SNR must be a number");
        }
        if !(self.cp_s > 0.0 && self.cp_s.is_finite()) {
            return bad("CP duration must be positive");
        }
        if !(self.target_ber > 0.0 && self.target_ber < 0.2) {
            return bad("target BER must lie in (0, 0.2)");
        }
        if !self.allowed_bits.contains(&0) {
            return bad("allowed bits must contain 0");
        }
        if self.allowed_bits.iter().any(|&b| b > MAX_BITS) {
            return bad("allowed bits must lie in 0..=8");
        }
        if self.allowed_bits.windows(2).any(|w| w[1] <= w[0]) {
            return bad("allowed bits must be strictly increasing");
        }
        if self.candidate_spacings_hz.is_empty() {
            return bad("candidate spacing list is empty");
        }
        if self
            .candidate_spacings_hz
            .iter()
            .any(|&s| !(s > 0.0 && s.is_finite()))
        {
            return bad("candidate spacings must be positive");
        }
        if self.candidate_spacings_hz.windows(2).any(|w| w[1] <= w[0]) {
            return bad("candidate spacings must be strictly increasing");
        }
        Ok(())
    }

    /// Numerology for every candidate spacing, in candidate order.
    pub fn candidates(&self) -> Result<Vec<WaveformCandidate>> {
        self.candidate_spacings_hz
            .iter()
            .map(|&df| WaveformCandidate::new(df, self.bw_alpha(), self.cp_s))
            .collect()
    }
}

/// Split of received power between the desired subcarrier and leakage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IciPower {
    pub signal: f64,
    pub ici: f64,
}

/// Desired-signal and ICI power fractions for a Jakes Doppler spectrum.
///
/// The signal fraction is the Jakes-weighted sinc^2 leakage integral. With
/// nu = f_d sin(theta) the Jakes density becomes uniform in theta, leaving a
/// smooth integrand that composite Gauss–Legendre handles to round-off.
pub fn ici_power_analytic(f_d: f64, delta_f: f64) -> IciPower {
    assert!(f_d >= 0.0 && delta_f > 0.0, "need f_d >= 0 and delta_f > 0");
    if f_d == 0.0 {
        return IciPower {
            signal: 1.0,
            ici: 0.0,
        };
    }
    let r = f_d / delta_f;
    // even integrand: integrate over [0, pi/2] and double
    let half = integrate(|th| sinc(r * th.sin()).powi(2), 0.0, PI / 2.0, 8, 16);
    let signal = (2.0 * half / PI).clamp(0.0, 1.0);
    IciPower {
        signal,
        ici: 1.0 - signal,
    }
}

/// Per-subcarrier SINR over the effective subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrProfile {
    /// Linear SINR per effective subcarrier, lowest frequency first.
    pub per_subcarrier: Vec<f64>,
    /// `10 log10` of the arithmetic mean of `per_subcarrier`.
    pub mean_sinr_db: f64,
    /// Share of received signal power lost to ICI.
    pub ici_fraction: f64,
}

impl SinrProfile {
    fn from_linear(per_subcarrier: Vec<f64>, ici_fraction: f64) -> Self {
        let mean = per_subcarrier.iter().sum::<f64>() / per_subcarrier.len().max(1) as f64;
        Self {
            per_subcarrier,
            mean_sinr_db: linear_to_db(mean),
            ici_fraction,
        }
    }
}

/// Flat analytic SINR p_signal / (p_ici + 1/snr) on `n_used` subcarriers.
pub fn average_sinr(power: IciPower, snr_db: f64, n_used: usize) -> Result<SinrProfile> {
    if (power.signal + power.ici - 1.0).abs() > 1e-9 || power.signal < 0.0 || power.ici < 0.0 {
        return Err(Error::InvalidInput(format!(
            "signal and ICI fractions must sum to 1 (got {} + {})",
            power.signal, power.ici
        )));
    }
    let noise = db_to_linear(-snr_db);
    let sinr = power.signal / (power.ici + noise);
    Ok(SinrProfile::from_linear(
        vec![sinr; n_used.max(1)],
        power.ici,
    ))
}

/// Summed per-subcarrier powers from a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierPowers {
    /// Sum over realizations of |H(k,k)|^2.
    pub signal: Vec<f64>,
    /// Sum over realizations of the leakage from every other effective subcarrier.
    pub ici: Vec<f64>,
    /// Sum over realizations of the received power per effective
    /// subcarrier, averaged across the band.
    pub energy: f64,
    pub realizations: usize,
}

const CHUNK: usize = 16;

/// Simulates `realizations` independent symbols of the time-varying channel
/// and accumulates desired-signal and ICI power on each effective subcarrier.
///
/// The channel matrix entry H(k, m) is assembled from the DFT of each tap's
/// gain across the useful symbol. Leakage into subcarrier k,
/// sum over m != k of |H(k, m)|^2, is evaluated for all k at once as a
/// circular convolution per tap pair.
pub fn simulate_subcarrier_powers(
    pdp: &PowerDelayProfile,
    f_d: f64,
    candidate: &WaveformCandidate,
    realizations: usize,
    seed: u64,
) -> SubcarrierPowers {
    assert!(realizations >= 1, "need at least one realization");
    let sim = IciSimulator::new(pdp, f_d, candidate);
    let chunks: Vec<SubcarrierPowers> = (0..realizations.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(realizations);
            sim.run_range(seed, lo..hi)
        })
        .collect();
    let n_used = candidate.n_used;
    let mut total = SubcarrierPowers {
        signal: vec![0.0; n_used],
        ici: vec![0.0; n_used],
        energy: 0.0,
        realizations,
    };
    for chunk in chunks {
        for (a, b) in total.signal.iter_mut().zip(&chunk.signal) {
            *a += b;
        }
        for (a, b) in total.ici.iter_mut().zip(&chunk.ici) {
            *a += b;
        }
        total.energy += chunk.energy;
    }
    total
}

/// Monte Carlo SINR profile for one candidate.
///
/// Noise power is referenced to the mean in-band received power, so
/// `snr_db` is the receive SNR and a static channel returns it exactly. Per-subcarrier SINR is the ratio of
/// realization-averaged signal power to averaged ICI plus noise.
pub fn sinr_monte_carlo(
    pdp: &PowerDelayProfile,
    f_d: f64,
    candidate: &WaveformCandidate,
    snr_db: f64,
    realizations: usize,
    seed: u64,
) -> SinrProfile {
    let powers = simulate_subcarrier_powers(pdp, f_d, candidate, realizations, seed);
    let r = powers.realizations as f64;
    let noise = powers.energy / r * db_to_linear(-snr_db);
    let per: Vec<f64> = powers
        .signal
        .iter()
        .zip(&powers.ici)
        .map(|(s, i)| (s / r) / (i / r + noise))
        .collect();
    let s_tot: f64 = powers.signal.iter().sum();
    let i_tot: f64 = powers.ici.iter().sum();
    SinrProfile::from_linear(per, i_tot / (s_tot + i_tot))
}

struct IciSimulator {
    n_fft: usize,
    n_used: usize,
    f_d: f64,
    dt: f64,
    powers: Vec<f64>,
    /// Per-tap phase rotation on each effective subcarrier, in bin order.
    steering: Vec<Vec<Complex64>>,
    /// Effective bin index (0..n_fft) of each effective subcarrier.
    bins: Vec<usize>,
    /// Spectrum of the windowed steering product for each tap pair p <= q,
    /// pre-scaled by 2 for p < q and by 1/n_fft for the inverse transform.
    pair_kernels: Vec<(usize, usize, Vec<Complex64>)>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl IciSimulator {
    fn new(pdp: &PowerDelayProfile, f_d: f64, candidate: &WaveformCandidate) -> Self {
        let n = candidate.n_fft;
        let n_used = candidate.n_used;
        let half = (n_used / 2) as i64;
        let bins: Vec<usize> = (0..n_used as i64)
            .map(|j| (j - half).rem_euclid(n as i64) as usize)
            .collect();
        let delays_s: Vec<f64> = pdp.delays_ns().map(|d| d * 1e-9).collect();
        let steering: Vec<Vec<Complex64>> = delays_s
            .iter()
            .map(|tau| {
                (0..n_used as i64)
                    .map(|j| {
                        let f = (j - half) as f64 * candidate.delta_f;
                        Complex64::from_polar(1.0, -2.0 * PI * f * tau)
                    })
                    .collect()
            })
            .collect();

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);

        let taps = delays_s.len();
        let mut pair_kernels = Vec::with_capacity(taps * (taps + 1) / 2);
        for p in 0..taps {
            for q in p..taps {
                let mut u = vec![Complex64::new(0.0, 0.0); n];
                for (j, &b) in bins.iter().enumerate() {
                    u[b] = steering[p][j] * steering[q][j].conj();
                }
                fft.process(&mut u);
                let scale = if p == q { 1.0 } else { 2.0 } / n as f64;
                u.iter_mut().for_each(|z| *z *= scale);
                pair_kernels.push((p, q, u));
            }
        }

        Self {
            n_fft: n,
            n_used,
            f_d,
            dt: candidate.useful_symbol / n as f64,
            powers: pdp.normalized_linear_powers(),
            steering,
            bins,
            pair_kernels,
            fft,
            ifft,
        }
    }

    fn run_range(&self, seed: u64, range: std::ops::Range<usize>) -> SubcarrierPowers {
        let n = self.n_fft;
        let taps = self.powers.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = SubcarrierPowers {
            signal: vec![0.0; self.n_used],
            ici: vec![0.0; self.n_used],
            energy: 0.0,
            realizations: range.len(),
        };
        let mut spectra = vec![vec![zero; n]; taps];
        let mut product = vec![zero; n];
        let mut total = vec![zero; n];
        let mut scratch = vec![
            zero;
            self.fft
                .get_inplace_scratch_len()
                .max(self.ifft.get_inplace_scratch_len())
        ];

        for r in range {
            for (p, spec) in spectra.iter_mut().enumerate() {
                sum_of_sinusoids(
                    seed,
                    r as u64,
                    p as u64,
                    self.powers[p],
                    self.f_d,
                    self.dt,
                    spec,
                );
                self.fft.process_with_scratch(spec, &mut scratch);
                let inv = 1.0 / n as f64;
                spec.iter_mut().for_each(|z| *z *= inv);
            }

            total.iter_mut().for_each(|z| *z = zero);
            for (p, q, kernel) in &self.pair_kernels {
                let (gp, gq) = (&spectra[*p], &spectra[*q]);
                for ((out, a), b) in product.iter_mut().zip(gp).zip(gq) {
                    *out = a * b.conj();
                }
                self.fft.process_with_scratch(&mut product, &mut scratch);
                for ((t, v), k) in total.iter_mut().zip(&product).zip(kernel) {
                    *t += v * k;
                }
            }
            self.ifft.process_with_scratch(&mut total, &mut scratch);

            let mut in_band = 0.0;
            for (j, &b) in self.bins.iter().enumerate() {
                let h_kk: Complex64 = (0..taps).map(|p| self.steering[p][j] * spectra[p][0]).sum();
                let signal = h_kk.norm_sqr();
                let received = total[b].re.max(signal);
                acc.signal[j] += signal;
                acc.ici[j] += received - signal;
                in_band += received;
            }
            acc.energy += in_band / self.n_used as f64;
        }
        acc
    }
}

/// SNR gap for uncoded QAM at a target BER: -ln(5 BER) / 1.6.
pub fn snr_gap(target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 0.2) {
        return Err(Error::GapApproximationInvalid(target_ber));
    }
    Ok(-(5.0 * target_ber).ln() / 1.6)
}

/// Largest permitted constellation size not above log2(1 + sinr/gap).
pub fn qam_bit_load(sinr_linear: f64, gap: f64, allowed_bits: &[u8]) -> u8 {
    let capacity = (1.0 + sinr_linear.max(0.0) / gap).log2();
    allowed_bits
        .iter()
        .copied()
        .filter(|&b| f64::from(b) <= capacity)
        .max()
        .unwrap_or(0)
}

/// Uncoded BER of Gray-mapped M-QAM in AWGN.
///
/// One bit uses the exact BPSK expression; every higher order, odd orders
/// included, uses the square-QAM nearest-neighbour approximation.
pub fn ber_mqam_awgn(bits: u8, sinr_linear: f64) -> Result<f64> {
    match bits {
        0 => Err(Error::NoModulation),
        1 => Ok(q_function((2.0 * sinr_linear).sqrt())),
        b if b <= MAX_BITS => {
            let m = f64::from(1u32 << b);
            let bf = f64::from(b);
            Ok((4.0 / bf)
                * (1.0 - 1.0 / m.sqrt())
                * q_function((3.0 * sinr_linear / (m - 1.0)).sqrt()))
        }
        b => Err(Error::InvalidInput(format!(
            "{b} bits per symbol is not supported"
        ))),
    }
}
