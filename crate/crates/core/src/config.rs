//! Run configuration: a TOML document whose physical quantities carry their
//! unit in the key name (`bw_mhz`, `cp_us`, ...). Every section is optional
//! and defaults to the en-route UAV link study. Unknown keys are rejected.

use serde::Deserialize;

use crate::channel::{
    CoherenceLevel, PowerDelayProfile, ATG_DELAYS_NS, ATG_POWERS_DB, MEASURED_TAU_MAX_NS,
};
use crate::error::{Error, Result};
use crate::forecast::{
    effective_fleet, AltitudeClass, BandwidthInputs, DensityScenario, GrowthModel, LinkClass,
    BASELINE_CNPC_SE, DEFAULT_BASE_YEAR, REFERENCE_AREA_KM2, US_AREA_KM2,
};
use crate::ofdm::LinkScenario;
use crate::optimizer::{reference_bands_1ghz, reference_bands_5ghz, ReferenceBand};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    scenario: RawScenario,
    #[serde(default)]
    channel: RawChannel,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    monte_carlo: RawMonteCarlo,
    #[serde(default)]
    optimize: RawOptimize,
    #[serde(default)]
    forecast: RawForecast,
    #[serde(default)]
    density: RawDensity,
    #[serde(default)]
    bandwidth: RawBandwidth,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScenario {
    bw_mhz: f64,
    alpha: f64,
    carrier_ghz: f64,
    snr_db: f64,
    cp_us: f64,
    tau_max_us: f64,
    target_ber: f64,
    allowed_bits: Vec<u8>,
    spacings_khz: Vec<f64>,
    coherence_level: CoherenceLevel,
}

impl Default for RawScenario {
    fn default() -> Self {
        let s = LinkScenario::default();
        Self {
            bw_mhz: s.bw_hz / 1e6,
            alpha: s.alpha,
            carrier_ghz: s.carrier_hz / 1e9,
            snr_db: s.snr_db,
            cp_us: s.cp_s * 1e6,
            tau_max_us: MEASURED_TAU_MAX_NS / 1e3,
            target_ber: s.target_ber,
            allowed_bits: s.allowed_bits,
            spacings_khz: s.candidate_spacings_hz.iter().map(|f| f / 1e3).collect(),
            coherence_level: s.coherence_level,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawChannel {
    delays_ns: Vec<f64>,
    powers_db: Vec<f64>,
}

impl Default for RawChannel {
    fn default() -> Self {
        Self {
            delays_ns: ATG_DELAYS_NS.to_vec(),
            powers_db: ATG_POWERS_DB.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSweep {
    velocities_kmh: Vec<f64>,
}

impl Default for RawSweep {
    fn default() -> Self {
        Self {
            velocities_kmh: default_velocities_kmh(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMonteCarlo {
    realizations: usize,
    seed: u64,
}

impl Default for RawMonteCarlo {
    fn default() -> Self {
        Self {
            realizations: 2000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawOptimize {
    reference: Option<Vec<ReferenceBand>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawForecast {
    base_year: i32,
    start_year: i32,
    end_year: i32,
    models: Vec<RawModel>,
    dataset: Option<String>,
}

impl Default for RawForecast {
    fn default() -> Self {
        let row = |name: &str, m: GrowthModel| RawModel {
            name: name.into(),
            p1: m.p1,
            p2: m.p2,
            p3: m.p3,
            p4: m.p4,
        };
        Self {
            base_year: DEFAULT_BASE_YEAR,
            start_year: 2015,
            end_year: 2035,
            models: vec![
                row("commercial", GrowthModel::commercial()),
                row("federal", GrowthModel::federal_agencies()),
                row("state_local", GrowthModel::state_local_agencies()),
            ],
            dataset: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAltitudeClass {
    name: String,
    count: f64,
    #[serde(default = "one")]
    fleet_factor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDensity {
    total_area_km2: f64,
    reference_area_km2: f64,
    classes: Vec<RawAltitudeClass>,
}

impl Default for RawDensity {
    fn default() -> Self {
        Self {
            total_area_km2: US_AREA_KM2,
            reference_area_km2: REFERENCE_AREA_KM2,
            classes: DensityScenario::default()
                .classes
                .into_iter()
                .map(|c| RawAltitudeClass {
                    name: c.name,
                    count: c.effective_count,
                    fleet_factor: 1.0,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinkClass {
    name: String,
    density: f64,
    cell_area_km2: f64,
    rate_kbps: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawBandwidth {
    spectral_efficiency_bps_hz: f64,
    reference_area_km2: f64,
    available_mhz: f64,
    estimates_mhz: Vec<f64>,
    classes: Vec<RawLinkClass>,
}

impl Default for RawBandwidth {
    fn default() -> Self {
        Self {
            spectral_efficiency_bps_hz: BASELINE_CNPC_SE,
            reference_area_km2: REFERENCE_AREA_KM2,
            available_mhz: 34.0,
            estimates_mhz: vec![69.5, 39.5],
            classes: Vec::new(),
        }
    }
}

/// Velocities 40, 60, ..., 200 km/h.
pub fn default_velocities_kmh() -> Vec<f64> {
    (0..9).map(|i| 40.0 + 20.0 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedModel {
    pub name: String,
    pub model: GrowthModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSettings {
    pub start_year: i32,
    pub end_year: i32,
    pub base_year: i32,
    pub models: Vec<NamedModel>,
    /// Path of a two-column growth dataset, as written in the config.
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSettings {
    pub inputs: BandwidthInputs,
    pub available_hz: f64,
    /// Externally derived requirement figures, Hz.
    pub estimates_hz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSettings {
    pub realizations: usize,
    pub seed: u64,
}

/// Validated configuration for every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: LinkScenario,
    pub tau_max_s: f64,
    pub pdp: PowerDelayProfile,
    pub velocities_kmh: Vec<f64>,
    pub monte_carlo: MonteCarloSettings,
    pub reference_bands: Vec<ReferenceBand>,
    pub forecast: ForecastSettings,
    pub density: DensityScenario,
    pub bandwidth: BandwidthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_toml_str("").expect("default configuration is valid")
    }
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of_offset(src, s.start)),
            message: e.message().to_string(),
        })?;
        let locate = KeyLocator { src };
        resolve(raw, &locate)
    }
}

struct KeyLocator<'a> {
    src: &'a str,
}

impl KeyLocator<'_> {
    /// Line of `key = ...` inside `[section]` (or an `[[section.*]]` table).
    fn line(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (idx, raw) in self.src.lines().enumerate() {
            let line = raw.trim();
            if let Some(h) = line.strip_prefix('[') {
                current = h
                    .trim_start_matches('[')
                    .split(']')
                    .next()
                    .unwrap_or("")
                    .trim()
                    .to_string();
                continue;
            }
            let in_section = current == section || current.starts_with(&format!("{section}."));
            if in_section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return Some(idx + 1);
                    }
                }
            }
        }
        None
    }

    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.line(section, key),
            message: format!("{section}.{key}: {}", message.into()),
        }
    }
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    let end = offset.min(src.len());
    src.as_bytes()[..end]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

fn finite_positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn resolve(raw: RawConfig, at: &KeyLocator<'_>) -> Result<RunConfig> {
    let sc = &raw.scenario;
    let checks: [(&str, f64); 4] = [
        ("bw_mhz", sc.bw_mhz),
        ("carrier_ghz", sc.carrier_ghz),
        ("cp_us", sc.cp_us),
        ("tau_max_us", sc.tau_max_us),
    ];
    for (key, v) in checks {
        if !finite_positive(v) {
            return Err(at.err("scenario", key, "must be a positive number"));
        }
    }
    if !(sc.alpha > 0.0 && sc.alpha <= 1.0) {
        return Err(at.err("scenario", "alpha", "must lie in (0, 1]"));
    }
    if !sc.snr_db.is_finite() {
        return Err(at.err("scenario", "snr_db", "must be finite"));
    }
    if !(sc.target_ber > 0.0 && sc.target_ber < 0.2) {
        return Err(at.err("scenario", "target_ber", "must lie in (0, 0.2)"));
    }
    if sc.tau_max_us > sc.cp_us {
        return Err(at.err(
            "scenario",
            "cp_us",
            "cyclic prefix shorter than the maximum excess delay",
        ));
    }
    let scenario = LinkScenario {
        bw_hz: sc.bw_mhz * 1e6,
        alpha: sc.alpha,
        carrier_hz: sc.carrier_ghz * 1e9,
        snr_db: sc.snr_db,
        cp_s: sc.cp_us * 1e-6,
        target_ber: sc.target_ber,
        allowed_bits: sc.allowed_bits.clone(),
        candidate_spacings_hz: sc.spacings_khz.iter().map(|f| f * 1e3).collect(),
        coherence_level: sc.coherence_level,
    };
    if let Err(Error::InvalidScenario(msg)) = scenario.validate() {
        let key = if msg.contains("bits") {
            "allowed_bits"
        } else {
            "spacings_khz"
        };
        return Err(at.err("scenario", key, msg));
    }
    if let Err(e) = scenario.candidates() {
        return Err(at.err("scenario", "spacings_khz", e.to_string()));
    }

    let pdp = PowerDelayProfile::new(&raw.channel.delays_ns, &raw.channel.powers_db)
        .map_err(|e| at.err("channel", "delays_ns", e.to_string()))?;

    let v = &raw.sweep.velocities_kmh;
    if v.is_empty() {
        return Err(at.err("sweep", "velocities_kmh", "velocity grid empty"));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(at.err("sweep", "velocities_kmh", "velocities must be non-negative"));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(at.err(
            "sweep",
            "velocities_kmh",
            "velocities must be strictly increasing",
        ));
    }

    if raw.monte_carlo.realizations == 0 {
        return Err(at.err("monte_carlo", "realizations", "must be at least 1"));
    }

    let reference_bands = match raw.optimize.reference {
        Some(bands) => {
            if bands
                .iter()
                .any(|b| !(b.v_min_kmh <= b.v_max_kmh) || !finite_positive(b.spacing_khz))
            {
                return Err(at.err(
                    "optimize",
                    "reference",
                    "bands need v_min_kmh <= v_max_kmh and a positive spacing",
                ));
            }
            bands
        }
        None if scenario.carrier_hz < 3e9 => reference_bands_1ghz(),
        None => reference_bands_5ghz(),
    };

    let fc = raw.forecast;
    if fc.end_year < fc.start_year {
        return Err(at.err("forecast", "end_year", "must not precede start_year"));
    }
    if fc.start_year < fc.base_year {
        return Err(at.err("forecast", "start_year", "must not precede base_year"));
    }
    let mut models = Vec::with_capacity(fc.models.len());
    for m in fc.models {
        let model = GrowthModel::new(m.p1, m.p2, m.p3, m.p4, fc.base_year)
            .map_err(|e| at.err("forecast", "p1", format!("model '{}': {e}", m.name)))?;
        models.push(NamedModel {
            name: m.name,
            model,
        });
    }
    let forecast = ForecastSettings {
        start_year: fc.start_year,
        end_year: fc.end_year,
        base_year: fc.base_year,
        models,
        dataset: fc.dataset,
    };

    let dn = raw.density;
    if !finite_positive(dn.total_area_km2) {
        return Err(at.err("density", "total_area_km2", "must be positive"));
    }
    if !finite_positive(dn.reference_area_km2) {
        return Err(at.err("density", "reference_area_km2", "must be positive"));
    }
    let mut classes = Vec::with_capacity(dn.classes.len());
    for c in dn.classes {
        if !c.count.is_finite() {
            return Err(at.err(
                "density",
                "count",
                format!("class '{}' has a non-finite count", c.name),
            ));
        }
        let effective_count = effective_fleet(c.count, c.fleet_factor)
            .map_err(|e| at.err("density", "fleet_factor", e.to_string()))?;
        classes.push(AltitudeClass {
            name: c.name,
            effective_count,
        });
    }
    let density = DensityScenario {
        classes,
        total_area_km2: dn.total_area_km2,
        reference_area_km2: dn.reference_area_km2,
    };

    let bw = raw.bandwidth;
    if !finite_positive(bw.spectral_efficiency_bps_hz) {
        return Err(at.err(
            "bandwidth",
            "spectral_efficiency_bps_hz",
            "must be positive",
        ));
    }
    if !finite_positive(bw.reference_area_km2) {
        return Err(at.err("bandwidth", "reference_area_km2", "must be positive"));
    }
    if !finite_positive(bw.available_mhz) {
        return Err(at.err("bandwidth", "available_mhz", "must be positive"));
    }
    if bw.estimates_mhz.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(at.err("bandwidth", "estimates_mhz", "must be non-negative"));
    }
    for c in &bw.classes {
        if [c.density, c.cell_area_km2, c.rate_kbps]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(at.err(
                "bandwidth",
                "density",
                format!("link class '{}' needs non-negative inputs", c.name),
            ));
        }
    }
    let bandwidth = BandwidthSettings {
        inputs: BandwidthInputs {
            classes: bw
                .classes
                .into_iter()
                .map(|c| LinkClass {
                    name: c.name,
                    density: c.density,
                    cell_area_km2: c.cell_area_km2,
                    rate_bps: c.rate_kbps * 1e3,
                })
                .collect(),
            reference_area_km2: bw.reference_area_km2,
            spectral_efficiency: bw.spectral_efficiency_bps_hz,
        },
        available_hz: bw.available_mhz * 1e6,
        estimates_hz: bw.estimates_mhz.iter().map(|x| x * 1e6).collect(),
    };

    Ok(RunConfig {
        scenario,
        tau_max_s: sc.tau_max_us * 1e-6,
        pdp,
        velocities_kmh: v.clone(),
        monte_carlo: MonteCarloSettings {
            realizations: raw.monte_carlo.realizations,
            seed: raw.monte_carlo.seed,
        },
        reference_bands,
        forecast,
        density,
        bandwidth,
    })
}
