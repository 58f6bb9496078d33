use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use uaswave::channel::{doppler_max, kmh_to_mps};
use uaswave::config::RunConfig;
use uaswave::forecast::{
    cnpc_bandwidth, fit_logistic, logistic_eval, parse_growth_records, required_spectral_efficiency,
};
use uaswave::ofdm::{average_sinr, ici_power_analytic, sinr_monte_carlo};
use uaswave::optimizer::{evaluate_candidates, reference_spacing, select_optimum, SinrSource};
use uaswave::Error;

use crate::output::Table;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io { path: PathBuf, source: io::Error },
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Domain(_) => 4,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Domain(m) => f.write_str(m),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoFeasibleNumerology
            | Error::FitDidNotConverge { .. }
            | Error::StaticChannel => CliError::Domain(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

pub struct Context {
    pub command: String,
    pub config: RunConfig,
    pub config_dir: PathBuf,
    pub config_hash: String,
    pub seed: u64,
    pub monte_carlo: bool,
}

impl Context {
    pub fn load(
        command: &str,
        path: Option<&Path>,
        seed: Option<u64>,
        monte_carlo: bool,
    ) -> Result<Self, CliError> {
        let (text, config_dir) = match path {
            Some(p) => {
                let bytes = fs::read(p).map_err(|e| CliError::io(p, e))?;
                let text = String::from_utf8(bytes).map_err(|_| {
                    CliError::Config(format!("{}: config is not valid UTF-8", p.display()))
                })?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (text, dir)
            }
            None => (String::new(), PathBuf::from(".")),
        };
        let config = RunConfig::from_toml_str(&text).map_err(|e| match path {
            Some(p) => CliError::Config(format!("{}: {e}", p.display())),
            None => CliError::from(e),
        })?;
        let config_hash = format!("{:x}", Sha256::digest(text.as_bytes()));
        let seed = seed.unwrap_or(config.monte_carlo.seed);
        Ok(Self {
            command: command.to_string(),
            config,
            config_dir,
            config_hash,
            seed,
            monte_carlo,
        })
    }

    fn preamble(&self) -> Vec<String> {
        let sinr = if self.monte_carlo {
            format!(
                "monte-carlo ({} realizations)",
                self.config.monte_carlo.realizations
            )
        } else {
            "analytic".to_string()
        };
        vec![
            format!("tool: uaswave {}", env!("CARGO_PKG_VERSION")),
            format!("command: {}", self.command),
            format!("seed: {}", self.seed),
            format!("sinr-model: {sinr}"),
            format!("config-sha256: {}", self.config_hash),
        ]
    }

    fn source(&self) -> SinrSource {
        if self.monte_carlo {
            SinrSource::MonteCarlo {
                realizations: self.config.monte_carlo.realizations,
                seed: self.seed,
            }
        } else {
            SinrSource::Analytic
        }
    }

    fn write(&self, table: &Table, dir: &Path, name: &str) -> Result<(), CliError> {
        let path = table
            .write_atomic(dir, name)
            .map_err(|e| CliError::io(&dir.join(name), e))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

pub fn sweep_sinr(ctx: &Context, out: &Path) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let mut table = Table::new(ctx.preamble(), "velocity_kmh,delta_f_hz,mean_sinr_db,p_ici");
    for cand in cfg.scenario.candidates()? {
        for &v in &cfg.velocities_kmh {
            let f_d = doppler_max(kmh_to_mps(v), cfg.scenario.carrier_hz);
            let profile = if ctx.monte_carlo {
                sinr_monte_carlo(
                    &cfg.pdp,
                    f_d,
                    &cand,
                    cfg.scenario.snr_db,
                    cfg.monte_carlo.realizations,
                    ctx.seed,
                )
            } else {
                average_sinr(
                    ici_power_analytic(f_d, cand.delta_f),
                    cfg.scenario.snr_db,
                    cand.n_used,
                )?
            };
            table.push(format!(
                "{},{},{:.6},{:.6e}",
                v, cand.delta_f, profile.mean_sinr_db, profile.ici_fraction
            ));
        }
    }
    ctx.write(&table, out, "sweep_sinr.csv")
}

pub fn optimize(ctx: &Context, out: &Path) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let source = ctx.source();
    let mut objective = Table::new(
        ctx.preamble(),
        "velocity_kmh,delta_f_hz,n_fft,n_used,spectral_efficiency_bps_hz,feasible,binding_constraint",
    );
    let mut mapping = Table::new(
        ctx.preamble(),
        "velocity_kmh,f_d_hz,optimal_delta_f_hz,spectral_efficiency_bps_hz,reference_delta_f_hz,status",
    );
    let candidates = cfg.scenario.candidates()?;
    let mut deviations = 0;
    for &v in &cfg.velocities_kmh {
        let results = evaluate_candidates(&cfg.scenario, &cfg.pdp, v, &source)?;
        for (r, c) in results.iter().zip(&candidates) {
            objective.push(format!(
                "{},{},{},{},{:.6},{},{}",
                v,
                r.delta_f,
                c.n_fft,
                c.n_used,
                r.spectral_efficiency,
                r.feasible,
                r.binding_constraint.as_str()
            ));
        }
        let best =
            select_optimum(&results).map_err(|e| CliError::Domain(format!("{e} at {v} km/h")))?;
        let f_d = doppler_max(kmh_to_mps(v), cfg.scenario.carrier_hz);
        let (reference, status) = match reference_spacing(&cfg.reference_bands, v) {
            Some(r) if r == best.delta_f => (r.to_string(), "match"),
            Some(r) => {
                deviations += 1;
                eprintln!(
                    "deviation: {v} km/h -> {} Hz, reference {} Hz",
                    best.delta_f, r
                );
                (r.to_string(), "deviation")
            }
            None => (String::new(), "no_reference"),
        };
        mapping.push(format!(
            "{},{:.3},{},{:.6},{},{}",
            v, f_d, best.delta_f, best.spectral_efficiency, reference, status
        ));
    }
    ctx.write(&objective, out, "objective.csv")?;
    ctx.write(&mapping, out, "optimal_spacing.csv")?;
    if deviations > 0 {
        eprintln!("{deviations} velocity point(s) deviate from the reference mapping");
    }
    Ok(())
}

pub fn forecast(ctx: &Context, out: &Path) -> Result<(), CliError> {
    let fc = &ctx.config.forecast;
    let header = std::iter::once("year")
        .chain(fc.models.iter().map(|m| m.name.as_str()))
        .collect::<Vec<_>>()
        .join(",");
    let mut table = Table::new(ctx.preamble(), header);
    for year in fc.start_year..=fc.end_year {
        let mut row = year.to_string();
        for m in &fc.models {
            row.push_str(&format!(",{:.3}", logistic_eval(&m.model, f64::from(year))));
        }
        table.push(row);
    }
    ctx.write(&table, out, "forecast.csv")?;

    if let Some(rel) = &fc.dataset {
        let path = ctx.config_dir.join(rel);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let points = parse_growth_records(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let fit = fit_logistic(&points, fc.base_year).map_err(|e| match e {
            Error::InvalidInput(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => CliError::Domain(other.to_string()),
        })?;
        let mut t = Table::new(ctx.preamble(), "p1,p2,p3,p4,base_year,residual_norm");
        let m = fit.model;
        t.push(format!(
            "{:.6},{:.6},{:.6},{:.6},{},{:.6e}",
            m.p1, m.p2, m.p3, m.p4, m.base_year, fit.residual_norm
        ));
        ctx.write(&t, out, "fit.csv")?;
    }

    density(ctx, out)?;
    bandwidth(ctx, out)
}

pub fn density(ctx: &Context, out: &Path) -> Result<(), CliError> {
    let d = &ctx.config.density;
    let mut table = Table::new(
        ctx.preamble(),
        "class,effective_count,density_per_reference_area",
    );
    for (c, rho) in d.classes.iter().zip(d.densities()?) {
        table.push(format!("{},{:.3},{:.6}", c.name, c.effective_count, rho));
    }
    ctx.write(&table, out, "density.csv")
}

pub fn bandwidth(ctx: &Context, out: &Path) -> Result<(), CliError> {
    let b = &ctx.config.bandwidth;
    let baseline = b.inputs.spectral_efficiency;
    let mut figures: Vec<(String, f64)> = b
        .estimates_hz
        .iter()
        .enumerate()
        .map(|(i, &hz)| (format!("estimate_{}", i + 1), hz))
        .collect();
    if !b.inputs.classes.is_empty() {
        figures.push(("computed".to_string(), cnpc_bandwidth(&b.inputs)?));
    }
    let mut table = Table::new(
        ctx.preamble(),
        "source,required_mhz,available_mhz,baseline_se_bps_hz,required_se_bps_hz",
    );
    for (name, hz) in figures {
        let se = required_spectral_efficiency(hz, b.available_hz, baseline)?;
        table.push(format!(
            "{},{:.6},{:.6},{:.6},{:.6}",
            name,
            hz / 1e6,
            b.available_hz / 1e6,
            baseline,
            se
        ));
    }
    ctx.write(&table, out, "bandwidth.csv")
}
