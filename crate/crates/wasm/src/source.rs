use gridbet::{
    load_price_csv, stream_gbm, stream_segmented_fbm, Column, ColumnSpec, CrossingRule, Embedding, FbmParams,
    GbmParams, Grid, StreamingEmbedder,
};
use serde::{Deserialize, Serialize};

use crate::MAX_PLOT_POINTS;

/// Largest number of generated steps accepted from a page.
pub const MAX_STEPS: usize = 1 << 22;

fn one() -> f64 {
    1.0
}

/// Price series requested by the page.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceSpec {
    Gbm {
        #[serde(default)]
        mu: f64,
        sigma: f64,
        dt: f64,
        horizon: f64,
        #[serde(default = "one")]
        s0: f64,
    },
    Fbm {
        hurst: f64,
        sigma: f64,
        n: usize,
        #[serde(default = "one")]
        dt: f64,
        #[serde(default = "one")]
        s0: f64,
    },
    /// Pasted CSV: `time,price` rows, or one price per line.
    Prices { text: String },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PreviewPoint {
    pub time: f64,
    pub price: f64,
}

pub struct Series {
    pub embedding: Embedding,
    pub samples: usize,
    /// Every k-th sample, enough to draw the path.
    pub preview: Vec<PreviewPoint>,
}

/// Streams samples into the embedder while keeping a thinned copy.
struct Collector {
    embedder: StreamingEmbedder,
    stride: usize,
    seen: usize,
    preview: Vec<PreviewPoint>,
}

impl Collector {
    fn new(grid: Grid, total: usize, time: f64, price: f64) -> Result<Self, String> {
        let embedder =
            StreamingEmbedder::new(grid, CrossingRule::Interpolate, time, price, None).map_err(|e| e.to_string())?;
        Ok(Self {
            embedder,
            stride: total.div_ceil(MAX_PLOT_POINTS).max(1),
            seen: 1,
            preview: vec![PreviewPoint { time, price }],
        })
    }

    fn push_log(&mut self, time: f64, log_price: f64) {
        self.embedder.push_log(time, log_price);
        if self.seen.is_multiple_of(self.stride) {
            self.preview.push(PreviewPoint { time, price: log_price.exp() });
        }
        self.seen += 1;
    }

    fn finish(self) -> Series {
        Series { embedding: self.embedder.finish(), samples: self.seen, preview: self.preview }
    }
}

fn check_steps(steps: usize) -> Result<(), String> {
    if steps > MAX_STEPS {
        return Err(format!("{steps} steps requested; the demo allows at most {MAX_STEPS}"));
    }
    Ok(())
}

impl SourceSpec {
    /// Embeds the series on `grid`. Generated paths use `seed`.
    pub fn embed(&self, grid: Grid, seed: u64) -> Result<Series, String> {
        match *self {
            SourceSpec::Gbm { mu, sigma, dt, horizon, s0 } => {
                let params = GbmParams { mu, sigma, s0, dt, horizon, seed };
                let steps = if dt > 0.0 { (horizon / dt).round() } else { f64::INFINITY };
                if !(steps.is_finite() && steps >= 0.0) {
                    return Err("dt and horizon must be positive".into());
                }
                check_steps(steps as usize)?;
                let mut c = Collector::new(grid, steps as usize + 1, 0.0, s0)?;
                stream_gbm(&params, |t, l| c.push_log(t, l)).map_err(|e| e.to_string())?;
                Ok(c.finish())
            }
            SourceSpec::Fbm { hurst, sigma, n, dt, s0 } => {
                check_steps(n)?;
                let params = FbmParams { hurst, sigma, s0, n, dt, seed };
                let mut c = Collector::new(grid, n + 1, 0.0, s0)?;
                // One segment: the exact sampler covers the whole path.
                stream_segmented_fbm(&params, n, |t, l| c.push_log(t, l)).map_err(|e| e.to_string())?;
                Ok(c.finish())
            }
            SourceSpec::Prices { ref text } => {
                let single = text
                    .lines()
                    .map(str::trim)
                    .find(|l| !l.is_empty() && !l.starts_with('#'))
                    .is_some_and(|l| !l.contains(','));
                let columns = if single { ColumnSpec::price_only(Column::Index(0)) } else { ColumnSpec::default() };
                let path = load_price_csv(text.as_bytes(), &columns, "pasted").map_err(|e| e.to_string())?;
                let (times, prices) = (path.timestamps(), path.prices());
                let mut c = Collector::new(grid, path.len(), times[0], prices[0])?;
                for (&t, &p) in times.iter().zip(prices).skip(1) {
                    c.push_log(t, p.ln());
                }
                Ok(c.finish())
            }
        }
    }
}
