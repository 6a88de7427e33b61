//! Feeder-head load and DER time series: ingestion, synthesis, and the
//! statistics used by pair selection.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Uniformly sampled series of real power values in kW.
///
/// Timestamps are an opaque start label plus a uniform step; the planning
/// method never needs calendar arithmetic beyond hour-of-day.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start_label: String,
    step_hours: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start_label: impl Into<String>, step_hours: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries("series must have at least one value".into()));
        }
        if !step_hours.is_finite() || step_hours <= 0.0 {
            return Err(Error::InvalidSeries(format!(
                "step_hours must be a positive real, got {step_hours}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(Self {
            start_label: start_label.into(),
            step_hours,
            values,
        })
    }

    pub fn start_label(&self) -> &str {
        &self.start_label
    }

    pub fn step_hours(&self) -> f64 {
        self.step_hours
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of time steps (n_t).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires n_t >= 1
    }

    /// Hour of day in [0, 24) of step `i`, assuming the label marks midnight.
    pub fn hour_of_day(&self, i: usize) -> f64 {
        (i as f64 * self.step_hours) % 24.0
    }
}

/// Aligned load and DER generation series for one feeder, with its
/// back-feeding limit toward the substation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeederProfile {
    load: TimeSeries,
    der: TimeSeries,
    backfeed_limit_kw: f64,
}

impl FeederProfile {
    pub fn new(load: TimeSeries, der: TimeSeries, backfeed_limit_kw: f64) -> Result<Self> {
        if load.len() != der.len() {
            return Err(Error::InvalidProfile(format!(
                "load has {} steps but der has {}",
                load.len(),
                der.len()
            )));
        }
        if load.step_hours() != der.step_hours() {
            return Err(Error::InvalidProfile(format!(
                "load step {} h differs from der step {} h",
                load.step_hours(),
                der.step_hours()
            )));
        }
        if let Some(i) = load.values().iter().position(|v| *v < 0.0) {
            return Err(Error::InvalidProfile(format!("negative load at index {i}")));
        }
        if let Some(i) = der.values().iter().position(|v| *v < 0.0) {
            return Err(Error::InvalidProfile(format!("negative der at index {i}")));
        }
        if backfeed_limit_kw.is_nan() || backfeed_limit_kw < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "backfeed_limit_kw must be nonnegative, got {backfeed_limit_kw}"
            )));
        }
        Ok(Self {
            load,
            der,
            backfeed_limit_kw,
        })
    }

    pub fn load(&self) -> &TimeSeries {
        &self.load
    }

    pub fn der(&self) -> &TimeSeries {
        &self.der
    }

    pub fn backfeed_limit_kw(&self) -> f64 {
        self.backfeed_limit_kw
    }

    /// Returns the same profile with a different back-feeding limit.
    /// The limit is configured separately from the CSV data.
    pub fn with_backfeed_limit(mut self, kw: f64) -> Result<Self> {
        if kw.is_nan() || kw < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "backfeed_limit_kw must be nonnegative, got {kw}"
            )));
        }
        self.backfeed_limit_kw = kw;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.load.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step_hours(&self) -> f64 {
        self.load.step_hours()
    }
}

/// Summary statistics of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileStats {
    pub mean_kw: f64,
    /// Population standard deviation (divide by n_t, not n_t - 1).
    pub std_kw: f64,
    pub peak_kw: f64,
}

/// Net load: load minus DER generation, elementwise. Negative values mean
/// excess generation (back-feeding).
pub fn net_load(p: &FeederProfile) -> TimeSeries {
    let values = p
        .load
        .values()
        .iter()
        .zip(p.der.values())
        .map(|(l, d)| l - d)
        .collect();
    TimeSeries {
        start_label: p.load.start_label.clone(),
        step_hours: p.load.step_hours,
        values,
    }
}

/// Mean, population standard deviation, and peak of a series.
pub fn profile_stats(ts: &TimeSeries) -> ProfileStats {
    let n = ts.len() as f64;
    let mean = ts.values().iter().sum::<f64>() / n;
    let peak = ts.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ts.values().iter().cloned().fold(f64::INFINITY, f64::min);
    // A constant series has zero variance by definition; the rounding of
    // sum/n must not leak into the deviations.
    let std = if min == peak {
        0.0
    } else {
        (ts.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    ProfileStats {
        mean_kw: mean,
        std_kw: std,
        peak_kw: peak,
    }
}

/// Ratio of the two feeders' peak loads, max(load1) / max(load2).
pub fn peak_ratio(p1: &FeederProfile, p2: &FeederProfile) -> Result<f64> {
    let peak1 = profile_stats(p1.load()).peak_kw;
    let peak2 = profile_stats(p2.load()).peak_kw;
    if peak2 <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "peak load of feeder 2 must be positive, got {peak2}"
        )));
    }
    Ok(peak1 / peak2)
}

const PROFILE_HEADER: &str = "index,load_kw,der_kw";

/// Reads a profile from the CSV format:
///
/// ```text
/// step_hours=<real>
/// index,load_kw,der_kw
/// 0,<load>,<der>
/// ...
/// ```
///
/// The back-feeding limit is not part of the file; it defaults to zero and is
/// supplied separately via configuration.
pub fn load_profile_csv(path: impl AsRef<Path>) -> Result<FeederProfile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::ProfileParse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let step_hours = first
        .strip_prefix("step_hours=")
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| parse_err(1, format!("expected `step_hours=<real>`, got `{first}`")))?;
    if !step_hours.is_finite() || step_hours <= 0.0 {
        return Err(parse_err(1, format!("step_hours must be positive, got {step_hours}")));
    }

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(2, "missing header row".into()))?;
    if header.trim() != PROFILE_HEADER {
        return Err(parse_err(2, format!("expected header `{PROFILE_HEADER}`, got `{header}`")));
    }

    let mut load = Vec::new();
    let mut der = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 fields `index,load_kw,der_kw`, got {}", fields.len()),
            ));
        }
        let index: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad index `{}`", fields[0])))?;
        if index != load.len() {
            return Err(parse_err(
                line_no,
                format!("non-uniform implied step: expected index {}, got {index}", load.len()),
            ));
        }
        let load_kw: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad load_kw `{}`", fields[1])))?;
        let der_kw: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad der_kw `{}`", fields[2])))?;
        if !load_kw.is_finite() || load_kw < 0.0 {
            return Err(parse_err(line_no, format!("load must be finite and nonnegative, got {load_kw}")));
        }
        if !der_kw.is_finite() || der_kw < 0.0 {
            return Err(parse_err(line_no, format!("der must be finite and nonnegative, got {der_kw}")));
        }
        load.push(load_kw);
        der.push(der_kw);
    }
    if load.is_empty() {
        return Err(parse_err(3, "no data rows".into()));
    }

    let load = TimeSeries::new("", step_hours, load)?;
    let der = TimeSeries::new("", step_hours, der)?;
    FeederProfile::new(load, der, 0.0)
}

/// Writes a profile in the CSV format accepted by [`load_profile_csv`].
pub fn write_profile_csv(p: &FeederProfile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("step_hours={}\n", p.step_hours()));
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for (i, (l, d)) in p.load.values().iter().zip(p.der.values()).enumerate() {
        out.push_str(&format!("{i},{l},{d}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Load class for the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadClass {
    Residential,
    Commercial,
}

impl LoadClass {
    /// Normalized load level for an hour of day; commercial buildings keep a
    /// weekday occupancy plateau and run low on weekends, residential load
    /// ramps to an evening peak every day.
    fn shape(self, hour: f64, weekday: bool) -> f64 {
        match self {
            LoadClass::Residential => match hour {
                h if h < 6.0 => 0.25,
                h if h < 9.0 => 0.45,
                h if h < 16.0 => 0.40,
                h if h < 17.0 => 0.50,
                h if h < 18.0 => 0.75,
                h if h < 21.0 => 1.00,
                h if h < 22.0 => 0.85,
                h if h < 23.0 => 0.55,
                _ => 0.35,
            },
            LoadClass::Commercial if weekday => match hour {
                h if h < 7.0 => 0.32,
                h if h < 9.0 => 0.45,
                h if h < 10.0 => 0.55,
                h if h < 11.0 => 0.75,
                h if h < 15.0 => 1.00,
                h if h < 16.0 => 0.75,
                h if h < 17.0 => 0.55,
                h if h < 19.0 => 0.50,
                _ => 0.35,
            },
            LoadClass::Commercial => match hour {
                h if h < 8.0 => 0.32,
                h if h < 18.0 => 0.50,
                _ => 0.35,
            },
        }
    }
}

/// Normal draws are clamped to this many sigmas so a noisy off-peak step can
/// never outgrow the daily peak region.
const NOISE_CLAMP: f64 = 2.5;

/// Shape-independent knobs of the synthetic generator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SynthOptions {
    /// Relative sigma of the multiplicative load noise.
    pub noise_sigma: f64,
    /// Lower end of the per-day clear-sky factor; 1.0 means every day is
    /// fully clear, smaller values add cloudy-day variability.
    pub day_factor_min: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            noise_sigma: 0.10,
            day_factor_min: 0.70,
        }
    }
}

/// Generates a deterministic synthetic feeder profile.
///
/// The load follows a per-class daily curve with seeded multiplicative noise
/// (sigma 10% of the curve value) and is rescaled so its maximum equals
/// `peak_kw`. The DER series is a clear-sky solar bell peaking at solar noon,
/// with amplitude `pv_peak_kw` and a seeded per-day clear-sky factor.
pub fn synth_profile(
    kind: LoadClass,
    peak_kw: f64,
    days: usize,
    step_hours: f64,
    pv_peak_kw: f64,
    seed: u64,
) -> Result<FeederProfile> {
    synth_profile_with(kind, peak_kw, days, step_hours, pv_peak_kw, seed, SynthOptions::default())
}

pub fn synth_profile_with(
    kind: LoadClass,
    peak_kw: f64,
    days: usize,
    step_hours: f64,
    pv_peak_kw: f64,
    seed: u64,
    opts: SynthOptions,
) -> Result<FeederProfile> {
    if !peak_kw.is_finite() || peak_kw <= 0.0 {
        return Err(Error::InvalidInput(format!("peak_kw must be positive, got {peak_kw}")));
    }
    if days < 1 {
        return Err(Error::InvalidInput("days must be at least 1".into()));
    }
    if !step_hours.is_finite() || step_hours <= 0.0 {
        return Err(Error::InvalidInput(format!("step_hours must be positive, got {step_hours}")));
    }
    if !pv_peak_kw.is_finite() || pv_peak_kw < 0.0 {
        return Err(Error::InvalidInput(format!("pv_peak_kw must be nonnegative, got {pv_peak_kw}")));
    }
    if opts.noise_sigma.is_nan() || opts.noise_sigma < 0.0 || opts.noise_sigma > 0.12 {
        return Err(Error::InvalidInput(format!(
            "noise_sigma must be in [0, 0.12] to keep the daily peak in its class window, got {}",
            opts.noise_sigma
        )));
    }
    if opts.day_factor_min.is_nan() || opts.day_factor_min <= 0.0 || opts.day_factor_min > 1.0 {
        return Err(Error::InvalidInput(format!(
            "day_factor_min must be in (0, 1], got {}",
            opts.day_factor_min
        )));
    }

    let steps_per_day = (24.0 / step_hours).round() as usize;
    if steps_per_day == 0 || (steps_per_day as f64 * step_hours - 24.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "step_hours must divide a 24-hour day, got {step_hours}"
        )));
    }
    let n_t = days * steps_per_day;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let day_factors: Vec<f64> = (0..days)
        .map(|_| rng.gen_range(opts.day_factor_min..=1.0))
        .collect();

    let mut load = Vec::with_capacity(n_t);
    let mut der = Vec::with_capacity(n_t);
    for i in 0..n_t {
        let day = i / steps_per_day;
        let hour = (i % steps_per_day) as f64 * step_hours;
        let weekday = day % 7 < 5;

        let z = normal_draw(&mut rng).clamp(-NOISE_CLAMP, NOISE_CLAMP);
        let noisy = kind.shape(hour, weekday) * (1.0 + opts.noise_sigma * z);
        load.push(noisy.max(0.0));

        der.push(pv_peak_kw * day_factors[day] * solar_bell(hour));
    }

    let max = load.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = peak_kw / max;
    for v in &mut load {
        *v *= scale;
    }

    let load = TimeSeries::new(format!("synthetic-{seed}"), step_hours, load)?;
    let der = TimeSeries::new(format!("synthetic-{seed}"), step_hours, der)?;
    FeederProfile::new(load, der, 0.0)
}

/// Clear-sky normalized output: zero at night, 1.0 at solar noon.
fn solar_bell(hour: f64) -> f64 {
    if !(6.0..=18.0).contains(&hour) {
        return 0.0;
    }
    (std::f64::consts::PI * (hour - 6.0) / 12.0).sin()
}

/// Box-Muller standard normal draw.
fn normal_draw<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
