//! Price paths: CSV ingestion and synthetic generators.
//!
//! Recorded series are treated as one continuous path. Overnight gaps, halts
//! and session boundaries are concatenated as they appear in the file; only
//! the order of samples matters to the grid embedding, not calendar time.

use std::io::Read;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{domain, Error, Result};

/// Largest number of fBm steps accepted by the exact generator.
///
/// The circulant embedding needs a complex FFT of length `2n`, i.e. 32 bytes
/// per step before scratch space; 2^24 steps is about 512 MiB.
pub const MAX_FBM_STEPS: usize = 1 << 24;

/// Timestamped, strictly positive price series.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    timestamps: Vec<f64>,
    prices: Vec<f64>,
    label: String,
}

impl PricePath {
    /// Builds a path, checking lengths, positivity and strict time order.
    pub fn new(timestamps: Vec<f64>, prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(domain(format!("{} timestamps but {} prices", timestamps.len(), prices.len())));
        }
        if prices.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, found: prices.len() });
        }
        for (i, &p) in prices.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(domain(format!("price at sample {i} is not a positive number: {p}")));
            }
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() || w[1] <= w[0] {
                return Err(Error::Ordering { line: (i + 2) as u64, time: w[1], previous: w[0] });
            }
        }
        Ok(Self { timestamps, prices, label: label.into() })
    }

    /// Path with sample indices 0, 1, 2, … as timestamps.
    pub fn from_prices(prices: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let timestamps = (0..prices.len()).map(|i| i as f64).collect();
        Self::new(timestamps, prices, label)
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    /// Always false: a valid path has at least two samples.
    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn log_prices(&self) -> Vec<f64> {
        self.prices.iter().map(|p| p.ln()).collect()
    }

    /// Same path with every price multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let prices = self.prices.iter().map(|p| p * factor).collect();
        Self::new(self.timestamps.clone(), prices, self.label.clone())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// A CSV column addressed by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    /// Digits are read as an index, anything else as a header name.
    pub fn parse(s: &str) -> Self {
        match s.trim().parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.trim().to_string()),
        }
    }
}

/// Which CSV columns hold the timestamp and the price.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    /// `None` assigns timestamps 0, 1, 2, … in row order.
    pub time: Option<Column>,
    pub price: Column,
}

impl Default for ColumnSpec {
    /// `time,price` layout: column 0 is time, column 1 is price.
    fn default() -> Self {
        Self { time: Some(Column::Index(0)), price: Column::Index(1) }
    }
}

impl ColumnSpec {
    /// Single price column, timestamps assigned by row index.
    pub fn price_only(price: Column) -> Self {
        Self { time: None, price }
    }

    fn uses_names(&self) -> bool {
        matches!(self.price, Column::Name(_)) || matches!(self.time, Some(Column::Name(_)))
    }
}

fn resolve(col: &Column, header: Option<&csv::StringRecord>) -> Result<usize> {
    match col {
        Column::Index(i) => Ok(*i),
        Column::Name(name) => header
            .and_then(|h| h.iter().position(|f| f.trim() == name))
            .ok_or_else(|| Error::Parse { line: 1, message: format!("no column named {name:?}") }),
    }
}

fn field(rec: &csv::StringRecord, idx: usize, line: u64) -> Result<&str> {
    rec.get(idx).map(str::trim).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column {idx} (record has {} fields)", rec.len()),
    })
}

/// Reads a price path from comma-separated text.
///
/// A header row is optional. When columns are addressed by index, the first
/// record is taken as a header only if its price field is not a number.
/// Lines starting with `#` are skipped.
pub fn load_price_csv<R: Read>(source: R, columns: &ColumnSpec, label: &str) -> Result<PricePath> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).comment(Some(b'#')).from_reader(source);

    let mut records = reader.records().peekable();
    let mut header = None;
    if columns.uses_names() {
        header = records.next().transpose()?;
    } else if let Some(Ok(first)) = records.peek() {
        let price_idx = resolve(&columns.price, None)?;
        if first.get(price_idx).is_some_and(|f| f.trim().parse::<f64>().is_err()) {
            header = records.next().transpose()?;
        }
    }
    let price_idx = resolve(&columns.price, header.as_ref())?;
    let time_idx = columns.time.as_ref().map(|c| resolve(c, header.as_ref())).transpose()?;

    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let raw = field(&rec, price_idx, line)?;
        let price: f64 =
            raw.parse().map_err(|_| Error::Parse { line, message: format!("price {raw:?} is not a number") })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::Parse { line, message: format!("price {raw} is not positive") });
        }
        let time = match time_idx {
            Some(ti) => {
                let raw = field(&rec, ti, line)?;
                let t: f64 = raw
                    .parse()
                    .map_err(|_| Error::Parse { line, message: format!("timestamp {raw:?} is not a number") })?;
                if !t.is_finite() {
                    return Err(Error::Parse { line, message: format!("timestamp {raw} is not finite") });
                }
                if let Some(&previous) = timestamps.last() {
                    if t <= previous {
                        return Err(Error::Ordering { line, time: t, previous });
                    }
                }
                t
            }
            None => timestamps.len() as f64,
        };
        timestamps.push(time);
        prices.push(price);
    }
    if prices.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, found: prices.len() });
    }
    PricePath::new(timestamps, prices, label)
}

/// Geometric Brownian motion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmParams {
    /// Drift per unit time; the log price drifts at `mu - sigma^2/2`.
    pub mu: f64,
    pub sigma: f64,
    pub s0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl GbmParams {
    /// Driftless-in-price parameters: `mu = 0`, so `S` is a martingale.
    pub fn martingale(sigma: f64, dt: f64, horizon: f64, seed: u64) -> Self {
        Self { mu: 0.0, sigma, s0: 1.0, dt, horizon, seed }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(domain(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(domain(format!("horizon {} must be at least dt {}", self.horizon, self.dt)));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(domain(format!("s0 must be positive, got {}", self.s0)));
        }
        if !self.mu.is_finite() {
            return Err(domain("mu must be finite"));
        }
        Ok(())
    }
}

/// Samples a GBM path on the regular grid `0, dt, 2dt, …`.
///
/// Log increments are i.i.d. `Normal((mu - sigma^2/2) dt, sigma^2 dt)`.
pub fn generate_gbm(params: &GbmParams) -> Result<PricePath> {
    let steps = params.steps();
    let mut prices = Vec::with_capacity(steps + 1);
    prices.push(params.s0);
    stream_gbm(params, |_, log_s| prices.push(log_s.exp()))?;
    let timestamps = (0..=steps).map(|k| k as f64 * params.dt).collect();
    PricePath::new(timestamps, prices, format!("gbm(mu={},sigma={},seed={})", params.mu, params.sigma, params.seed))
}

/// Same draws as [`generate_gbm`], delivered as `sink(time, log_price)` for
/// samples `1..=steps` without storing the path.
pub fn stream_gbm(params: &GbmParams, mut sink: impl FnMut(f64, f64)) -> Result<()> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let drift = (params.mu - 0.5 * params.sigma * params.sigma) * params.dt;
    let scale = params.sigma * params.dt.sqrt();
    let mut log_s = params.s0.ln();
    for k in 1..=params.steps() {
        let z: f64 = rng.sample(StandardNormal);
        log_s += drift + scale * z;
        sink(k as f64 * params.dt, log_s);
    }
    Ok(())
}

/// Exponentiated fractional Brownian motion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmParams {
    pub hurst: f64,
    pub sigma: f64,
    pub s0: f64,
    /// Number of increments; the path has `n + 1` samples.
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
}

impl FbmParams {
    fn validate(&self) -> Result<()> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(domain(format!("hurst must lie in (0, 1), got {}", self.hurst)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(domain(format!("s0 must be positive, got {}", self.s0)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(domain(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n == 0 {
            return Err(domain("n must be at least 1"));
        }
        Ok(())
    }
}

/// Exact sampler of unit-step fractional Gaussian noise (Davies–Harte).
///
/// The autocovariance of fGn is embedded in a circulant matrix of order `2n`
/// whose eigenvalues are obtained by one FFT; every draw then costs one more
/// FFT of the same length. Each draw yields two independent sequences (real
/// and imaginary parts of the transform).
pub struct FgnSampler {
    n: usize,
    hurst: f64,
    /// sqrt(lambda_k / 2m) per frequency.
    scales: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FgnSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnSampler").field("n", &self.n).field("hurst", &self.hurst).finish()
    }
}

/// Autocovariance of unit fGn at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let two_h = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

impl FgnSampler {
    pub fn new(n: usize, hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(domain(format!("hurst must lie in (0, 1), got {hurst}")));
        }
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if n > MAX_FBM_STEPS {
            return Err(Error::Capacity { requested: n, limit: MAX_FBM_STEPS });
        }
        let m = 2 * n;
        // First row of the circulant: g0, g1, …, gn, g(n-1), …, g1.
        let mut row: Vec<Complex64> = (0..=n).map(|k| Complex64::new(fgn_autocovariance(hurst, k), 0.0)).collect();
        row.extend((1..n).rev().map(|k| Complex64::new(fgn_autocovariance(hurst, k), 0.0)));

        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);

        let max = row.iter().map(|c| c.re).fold(0.0_f64, f64::max);
        let mut scales = Vec::with_capacity(m);
        for (k, c) in row.iter().enumerate() {
            let lambda = c.re;
            if lambda < -1e-9 * max {
                return Err(domain(format!(
                    "circulant embedding not non-negative definite (eigenvalue {lambda:e} at {k})"
                )));
            }
            scales.push((lambda.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { n, hurst, scales, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Two independent unit-variance fGn sequences of length `n`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let mut w: Vec<Complex64> = self
            .scales
            .iter()
            .map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut w);
        w.truncate(self.n);
        w.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_pair(rng).0
    }
}

/// Samples `s0 * exp(sigma * B_H(t_k))`, `t_k = k dt`, `k = 0..=n`.
///
/// `B_H` is standard fBm, so `Var(B_H(t)) = t^{2H}`. The increments come from
/// [`FgnSampler`]; `n` is capped at [`MAX_FBM_STEPS`].
pub fn generate_fbm_exp(params: &FbmParams) -> Result<PricePath> {
    params.validate()?;
    let sampler = FgnSampler::new(params.n, params.hurst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = sampler.sample(&mut rng);
    let step_scale = params.sigma * params.dt.powf(params.hurst);

    let mut prices = Vec::with_capacity(params.n + 1);
    let mut log_s = params.s0.ln();
    prices.push(params.s0);
    for z in noise {
        log_s += step_scale * z;
        prices.push(log_s.exp());
    }
    let timestamps = (0..=params.n).map(|k| k as f64 * params.dt).collect();
    PricePath::new(timestamps, prices, format!("fbm(H={},sigma={},seed={})", params.hurst, params.sigma, params.seed))
}

/// Streams `n` steps of exponentiated fBm built from independent exact
/// segments of `segment` steps each, calling `sink(time, log_price)` for
/// samples `1..=n` (sample 0 is `(0, ln s0)`).
///
/// Increments are exactly fGn within a segment and independent across
/// segments; the log path is continuous. Memory is `O(segment)`, so `n` is
/// not capped by [`MAX_FBM_STEPS`].
pub fn stream_segmented_fbm(params: &FbmParams, segment: usize, mut sink: impl FnMut(f64, f64)) -> Result<()> {
    params.validate()?;
    let sampler = FgnSampler::new(segment.min(params.n), params.hurst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let step_scale = params.sigma * params.dt.powf(params.hurst);
    let mut log_s = params.s0.ln();
    let mut k = 0usize;
    while k < params.n {
        let (a, b) = sampler.sample_pair(&mut rng);
        for z in a.into_iter().chain(b) {
            if k == params.n {
                break;
            }
            k += 1;
            log_s += step_scale * z;
            sink(k as f64 * params.dt, log_s);
        }
    }
    Ok(())
}
