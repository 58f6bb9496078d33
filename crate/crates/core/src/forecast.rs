//! Fleet growth projection, UAV densities and CNPC spectrum requirements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BASE_YEAR: i32 = 2015;
/// Land area of the United States, km^2.
pub const US_AREA_KM2: f64 = 9.8e6;
pub const REFERENCE_AREA_KM2: f64 = 1e4;
/// Share of commercial UAVs kept after removing the agricultural fleet.
pub const COMMERCIAL_NON_AGRICULTURAL: f64 = 0.12;
/// Share of public-agency UAVs flown on a regular basis.
pub const PUBLIC_REGULAR_USE: f64 = 0.15;
/// Spectral efficiency assumed for all CNPC links, bps/Hz.
pub const BASELINE_CNPC_SE: f64 = 0.75;

/// Four-parameter base-10 logistic
/// f(x) = p1 + (p2 - p1) / (1 + 10^(p4 (p3 - x))), x = year - base_year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthModel {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub base_year: i32,
}

impl GrowthModel {
    pub fn new(p1: f64, p2: f64, p3: f64, p4: f64, base_year: i32) -> Result<Self> {
        let m = Self {
            p1,
            p2,
            p3,
            p4,
            base_year,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.p1, self.p2, self.p3, self.p4]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if self.p1 < 0.0 {
            return Err(Error::InvalidModel("p1 must be non-negative".into()));
        }
        if self.p2 <= self.p1 {
            return Err(Error::InvalidModel("p2 must exceed p1".into()));
        }
        if self.p4 <= 0.0 {
            return Err(Error::InvalidModel("p4 must be positive".into()));
        }
        Ok(())
    }

    /// Commercial fleet fit.
    pub fn commercial() -> Self {
        Self {
            p1: 487.95,
            p2: 2.03e5,
            p3: 15.75,
            p4: 0.18,
            base_year: DEFAULT_BASE_YEAR,
        }
    }

    /// Federal agencies fleet fit.
    pub fn federal_agencies() -> Self {
        Self {
            p1: 207.22,
            p2: 1.02e4,
            p3: 9.73,
            p4: 0.18,
            base_year: DEFAULT_BASE_YEAR,
        }
    }

    /// State and local agencies fleet fit.
    pub fn state_local_agencies() -> Self {
        Self {
            p1: 1.87e3,
            p2: 4.64e4,
            p3: 12.49,
            p4: 0.19,
            base_year: DEFAULT_BASE_YEAR,
        }
    }

    fn eval_x(&self, x: f64) -> f64 {
        self.p1 + (self.p2 - self.p1) / (1.0 + 10f64.powf(self.p4 * (self.p3 - x)))
    }
}

/// Fleet size in `year` (fractional years allowed).
pub fn logistic_eval(model: &GrowthModel, year: f64) -> f64 {
    model.eval_x(year - f64::from(model.base_year))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticFit {
    pub model: GrowthModel,
    /// Euclidean norm of the residual vector at the solution.
    pub residual_norm: f64,
}

/// Least-squares fit of the logistic to `(year, count)` samples.
///
/// A grid over (p3, p4) with closed-form (p1, p2) picks the start point;
/// Levenberg–Marquardt refines all four parameters. A fit whose curve is not
/// increasing (p2 <= p1 or p4 <= 0) is rejected. p1 is not constrained to be
/// non-negative, since noisy data can pull the lower asymptote below zero.
pub fn fit_logistic(points: &[(f64, f64)], base_year: i32) -> Result<LogisticFit> {
    if points.len() < 4 {
        return Err(Error::InvalidInput(
            "at least 4 points are needed to fit 4 parameters".into(),
        ));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let mut years: Vec<f64> = points.iter().map(|p| p.0).collect();
    years.sort_by(f64::total_cmp);
    if years.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("sample years must be distinct".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 - f64::from(base_year)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();

    let start = grid_start(&xs, &ys);
    let (params, sse, converged) = levenberg_marquardt(&xs, &ys, start);
    let residual = sse.sqrt();
    if !converged || !params.iter().all(|p| p.is_finite()) {
        return Err(Error::FitDidNotConverge {
            best: params,
            residual,
        });
    }
    let [p1, p2, p3, p4] = params;
    if p2 <= p1 || p4 <= 0.0 {
        return Err(Error::InvalidModel(format!(
            "fitted curve is not increasing (p1={p1}, p2={p2}, p4={p4})"
        )));
    }
    Ok(LogisticFit {
        model: GrowthModel {
            p1,
            p2,
            p3,
            p4,
            base_year,
        },
        residual_norm: residual,
    })
}

fn sigmoid(p3: f64, p4: f64, x: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(p4 * (p3 - x)))
}

/// Best (p1, p2) for fixed shape parameters, with its SSE.
fn linear_asymptotes(xs: &[f64], ys: &[f64], p3: f64, p4: f64) -> Option<([f64; 4], f64)> {
    // y = p1 (1 - s) + p2 s
    let (mut aa, mut ab, mut bb, mut ay, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let s = sigmoid(p3, p4, x);
        let a = 1.0 - s;
        aa += a * a;
        ab += a * s;
        bb += s * s;
        ay += a * y;
        by += s * y;
    }
    let det = aa * bb - ab * ab;
    if det.abs() <= 1e-12 * (aa * bb).max(f64::MIN_POSITIVE) {
        return None;
    }
    let p1 = (ay * bb - by * ab) / det;
    let p2 = (aa * by - ab * ay) / det;
    let params = [p1, p2, p3, p4];
    Some((params, sse(xs, ys, &params)))
}

fn grid_start(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1.0);
    let mut best = (
        [ys[0], ys[ys.len() - 1], 0.5 * (lo + hi), 1.0 / span],
        f64::INFINITY,
    );
    const P3_STEPS: usize = 160;
    const P4_STEPS: usize = 100;
    for i in 0..=P3_STEPS {
        let p3 = lo - 0.5 * span + 2.0 * span * i as f64 / P3_STEPS as f64;
        for j in 0..=P4_STEPS {
            // log-spaced steepness from 1e-3 to 10 per unit x, scaled by span
            let p4 = 10f64.powf(-3.0 + 4.0 * j as f64 / P4_STEPS as f64) * 10.0 / span;
            if let Some((params, err)) = linear_asymptotes(xs, ys, p3, p4) {
                if err < best.1 && params[1] > params[0] {
                    best = (params, err);
                }
            }
        }
    }
    best.0
}

fn sse(xs: &[f64], ys: &[f64], p: &[f64; 4]) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = p[0] + (p[1] - p[0]) * sigmoid(p[2], p[3], x) - y;
            r * r
        })
        .sum()
}

fn levenberg_marquardt(xs: &[f64], ys: &[f64], start: [f64; 4]) -> ([f64; 4], f64, bool) {
    const MAX_ITER: usize = 500;
    let ln10 = std::f64::consts::LN_10;
    let scale_y = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut p = start;
    let mut err = sse(xs, ys, &p);
    let mut lambda = 1e-3;

    for _ in 0..MAX_ITER {
        if err <= 1e-28 * scale_y {
            return (p, err, true);
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for (&x, &y) in xs.iter().zip(ys) {
            let s = sigmoid(p[2], p[3], x);
            let ds = ln10 * s * (1.0 - s); // d s / d(p4 (x - p3))
            let d = p[1] - p[0];
            let jac = [1.0 - s, s, -d * ds * p[3], d * ds * (x - p[2])];
            let r = p[0] + d * s - y;
            for a in 0..4 {
                jtr[a] += jac[a] * r;
                for b in 0..4 {
                    jtj[a][b] += jac[a] * jac[b];
                }
            }
        }

        let mut improved = false;
        while lambda < 1e16 {
            let mut m = jtj;
            for (a, row) in m.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-300);
            }
            let rhs = jtr.map(|v| -v);
            let Some(step) = solve4(m, rhs) else {
                lambda *= 10.0;
                continue;
            };
            let cand = [
                p[0] + step[0],
                p[1] + step[1],
                p[2] + step[2],
                p[3] + step[3],
            ];
            let cand_err = sse(xs, ys, &cand);
            if cand_err.is_finite() && cand_err < err {
                let rel_drop = (err - cand_err) / err.max(f64::MIN_POSITIVE);
                let rel_step = (0..4)
                    .map(|i| step[i].abs() / (p[i].abs() + 1e-12))
                    .fold(0.0, f64::max);
                p = cand;
                err = cand_err;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel_drop < 1e-14 || rel_step < 1e-13 {
                    return (p, err, true);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left: stationary point
            return (p, err, true);
        }
    }
    (p, err, false)
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            let pivot = m[col];
            for (v, p) in m[row].iter_mut().zip(pivot).skip(col) {
                *v -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Parses two-column `(year, count)` records. Columns may be separated by
/// whitespace or a comma; blank lines and `#` comments are skipped.
pub fn parse_growth_records(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 columns (year, count), found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line: line_no,
                    message: format!("invalid {what} '{s}'"),
                }),
            }
        };
        let year = parse(fields[0], "year")?;
        let count = parse(fields[1], "count")?;
        if count < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: "count must be non-negative".into(),
            });
        }
        out.push((year, count));
    }
    Ok(out)
}

/// `raw * factor`, where `factor` is the retained share of the fleet.
pub fn effective_fleet(raw_count: f64, factor: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&factor) {
        return Err(Error::InvalidInput(format!(
            "fleet factor {factor} outside [0, 1]"
        )));
    }
    if raw_count < 0.0 {
        return Err(Error::InvalidInput(
            "fleet size must be non-negative".into(),
        ));
    }
    Ok(raw_count * factor)
}

/// UAVs per reference area.
pub fn uav_density(
    effective_count: f64,
    total_area_km2: f64,
    reference_area_km2: f64,
) -> Result<f64> {
    if !(total_area_km2 > 0.0 && reference_area_km2 > 0.0) {
        return Err(Error::InvalidInput("areas must be positive".into()));
    }
    if effective_count < 0.0 {
        return Err(Error::InvalidInput("counts must be non-negative".into()));
    }
    Ok(effective_count / (total_area_km2 / reference_area_km2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltitudeClass {
    pub name: String,
    pub effective_count: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityScenario {
    pub classes: Vec<AltitudeClass>,
    pub total_area_km2: f64,
    pub reference_area_km2: f64,
}

impl Default for DensityScenario {
    /// Effective 2030 fleet by operating altitude over the US land area.
    fn default() -> Self {
        let class = |name: &str, effective_count| AltitudeClass {
            name: name.into(),
            effective_count,
        };
        Self {
            classes: vec![
                class("small", 7229.0),
                class("medium", 8919.0),
                class("large", 760.0),
            ],
            total_area_km2: US_AREA_KM2,
            reference_area_km2: REFERENCE_AREA_KM2,
        }
    }
}

impl DensityScenario {
    pub fn densities(&self) -> Result<Vec<f64>> {
        self.classes
            .iter()
            .map(|c| {
                uav_density(
                    c.effective_count,
                    self.total_area_km2,
                    self.reference_area_km2,
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkClass {
    pub name: String,
    /// UAVs per reference area.
    pub density: f64,
    pub cell_area_km2: f64,
    /// Aggregate data rate per UAV, bps.
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthInputs {
    pub classes: Vec<LinkClass>,
    pub reference_area_km2: f64,
    pub spectral_efficiency: f64,
}

/// Total CNPC bandwidth, Hz: per class, UAVs in a cell times their rate,
/// summed and divided by the spectral efficiency.
pub fn cnpc_bandwidth(inputs: &BandwidthInputs) -> Result<f64> {
    if !(inputs.spectral_efficiency > 0.0) {
        return Err(Error::InvalidInput(
            "spectral efficiency must be positive".into(),
        ));
    }
    if !(inputs.reference_area_km2 > 0.0) {
        return Err(Error::InvalidInput(
            "reference area must be positive".into(),
        ));
    }
    let mut total_rate = 0.0;
    for c in &inputs.classes {
        if c.density < 0.0 || c.cell_area_km2 < 0.0 || c.rate_bps < 0.0 {
            return Err(Error::InvalidInput(format!(
                "link class '{}' has a negative input",
                c.name
            )));
        }
        total_rate += c.density * c.cell_area_km2 / inputs.reference_area_km2 * c.rate_bps;
    }
    Ok(total_rate / inputs.spectral_efficiency)
}

/// Spectral efficiency needed to fit `required_bw` into `available_bw`.
pub fn required_spectral_efficiency(
    required_bw: f64,
    available_bw: f64,
    baseline_se: f64,
) -> Result<f64> {
    if !(available_bw > 0.0) {
        return Err(Error::InvalidInput(
            "available bandwidth must be positive".into(),
        ));
    }
    Ok(baseline_se * required_bw / available_bw)
}
