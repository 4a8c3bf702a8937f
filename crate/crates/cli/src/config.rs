//! Run configuration: a flat TOML file overridden by command-line flags.

use std::path::{Path, PathBuf};

use gridbet::{BetaBinomialParams, Column, ColumnSpec, FbmParams, GbmParams, Grid, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Keys accepted in the config file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<String>,
    pub eta: Option<Vec<String>>,
    pub strategy: Option<Vec<String>>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    pub horizon: Option<f64>,
    pub costs: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub time_column: Option<String>,
    pub price_column: Option<String>,
    pub label: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// Fills every unset key of `self` from `lower`.
    pub fn or(self, lower: FileConfig) -> FileConfig {
        FileConfig {
            input: self.input.or(lower.input),
            eta: self.eta.or(lower.eta),
            strategy: self.strategy.or(lower.strategy),
            a: self.a.or(lower.a),
            b: self.b.or(lower.b),
            alpha: self.alpha.or(lower.alpha),
            horizon: self.horizon.or(lower.horizon),
            costs: self.costs.or(lower.costs),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            time_column: self.time_column.or(lower.time_column),
            price_column: self.price_column.or(lower.price_column),
            label: self.label.or(lower.label),
        }
    }
}

/// Where prices come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    File { path: PathBuf },
    Gbm { mu: f64, sigma: f64, s0: f64, dt: f64, horizon: f64 },
    Fbm { hurst: f64, sigma: f64, s0: f64, n: usize, dt: f64 },
}

impl Source {
    /// `gbm:key=value,...`, `fbm:key=value,...`, or a file path.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (kind, rest) = match spec.split_once(':') {
            Some((k, r)) if k == "gbm" || k == "fbm" => (k, r),
            _ => return Ok(Source::File { path: PathBuf::from(spec) }),
        };
        let mut kv = std::collections::BTreeMap::new();
        for pair in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("generator option {pair:?} is not key=value")))?;
            let v: f64 = parse_number(v)
                .ok_or_else(|| CliError::Config(format!("generator option {k} = {v:?} is not a number")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let mut take = |key: &str, default: Option<f64>| {
            kv.remove(key).or(default).ok_or_else(|| CliError::Config(format!("{kind} generator needs {key}=")))
        };
        let source = if kind == "gbm" {
            Source::Gbm {
                mu: take("mu", Some(0.0))?,
                sigma: take("sigma", None)?,
                s0: take("s0", Some(1.0))?,
                dt: take("dt", None)?,
                horizon: take("horizon", None)?,
            }
        } else {
            let n = take("n", None)?;
            if !(n >= 1.0 && n.fract() == 0.0) {
                return Err(CliError::Config(format!("fbm n must be a positive integer, got {n}")));
            }
            Source::Fbm {
                hurst: take("hurst", None)?,
                sigma: take("sigma", None)?,
                s0: take("s0", Some(1.0))?,
                n: n as usize,
                dt: take("dt", Some(1.0))?,
            }
        };
        if let Some(extra) = kv.keys().next() {
            return Err(CliError::Config(format!("unknown {kind} generator option {extra:?}")));
        }
        Ok(source)
    }

    pub fn gbm_params(&self, seed: u64) -> Option<GbmParams> {
        match *self {
            Source::Gbm { mu, sigma, s0, dt, horizon } => Some(GbmParams { mu, sigma, s0, dt, horizon, seed }),
            _ => None,
        }
    }

    pub fn fbm_params(&self, seed: u64) -> Option<FbmParams> {
        match *self {
            Source::Fbm { hurst, sigma, s0, n, dt } => Some(FbmParams { hurst, sigma, s0, n, dt, seed }),
            _ => None,
        }
    }
}

/// Decimal number or power of two written `2^-8`.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        return exp.trim().parse::<i32>().ok().map(|e| 2f64.powi(e));
    }
    s.parse().ok()
}

/// Grid spacing from `2^-k`, `k=8`, or a decimal.
pub fn parse_eta(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let eta = match s.strip_prefix("k=") {
        Some(k) => k.parse::<i32>().ok().map(|k| 2f64.powi(-k)),
        None => parse_number(s),
    };
    match eta {
        Some(e) if e > 0.0 && e.is_finite() => Ok(e),
        _ => Err(CliError::Config(format!("eta {s:?} is not a positive number (use e.g. 2^-8, k=8 or 0.0039)"))),
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub source: Source,
    pub etas: Vec<f64>,
    pub strategies: Vec<StrategyKind>,
    /// `None` couples the prior to the grid, `a = b = 0.01 / eta`.
    pub prior: Option<(f64, f64)>,
    pub alpha: f64,
    pub horizon: Option<f64>,
    /// Unit costs as multiples of the grid step `delta`.
    pub costs: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    #[serde(skip)]
    pub columns: ColumnSpec,
    pub label: String,
}

pub const DEFAULT_ETA: &str = "2^-8";
pub const DEFAULT_ALPHA: f64 = 1e-3;
pub const DEFAULT_COSTS: [f64; 4] = [0.0, 0.01, 0.03, 0.05];

impl RunConfig {
    pub fn resolve(cfg: FileConfig) -> Result<Self, CliError> {
        let input = cfg.input.ok_or_else(|| CliError::Config("no input given (--input or `input` key)".into()))?;
        let source = Source::parse(&input)?;
        let etas = cfg
            .eta
            .unwrap_or_else(|| vec![DEFAULT_ETA.to_string()])
            .iter()
            .map(|s| parse_eta(s))
            .collect::<Result<Vec<_>, _>>()?;
        if etas.is_empty() {
            return Err(CliError::Config("at least one eta is required".into()));
        }
        let strategies = cfg
            .strategy
            .unwrap_or_else(|| vec!["bb".into(), "markov".into()])
            .iter()
            .map(|s| s.parse::<StrategyKind>().map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if strategies.is_empty() {
            return Err(CliError::Config("at least one strategy is required".into()));
        }
        let prior = match (cfg.a, cfg.b) {
            (None, None) => None,
            (Some(a), Some(b)) => {
                BetaBinomialParams::new(a, b).map_err(|e| CliError::Config(e.to_string()))?;
                Some((a, b))
            }
            _ => return Err(CliError::Config("a and b must be given together".into())),
        };
        let alpha = cfg.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Config(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if let Some(h) = cfg.horizon {
            if !(h.is_finite()) {
                return Err(CliError::Config(format!("horizon must be finite, got {h}")));
            }
        }
        let costs = cfg.costs.unwrap_or_else(|| DEFAULT_COSTS.to_vec());
        if let Some(c) = costs.iter().find(|&&c| !(0.0..1.0).contains(&c)) {
            return Err(CliError::Config(format!("cost {c} (in units of delta) must lie in [0, 1)")));
        }
        let time = match cfg.time_column.as_deref() {
            None => Some(Column::Index(0)),
            Some("none") => None,
            Some(s) => Some(Column::parse(s)),
        };
        let price = cfg.price_column.as_deref().map_or(Column::Index(1), Column::parse);
        let label = cfg.label.unwrap_or_else(|| match &source {
            Source::File { path } => path.file_stem().map_or("series".into(), |s| s.to_string_lossy().into_owned()),
            Source::Gbm { .. } => "gbm".into(),
            Source::Fbm { .. } => "fbm".into(),
        });
        Ok(Self {
            source,
            etas,
            strategies,
            prior,
            alpha,
            horizon: cfg.horizon,
            costs,
            seed: cfg.seed.unwrap_or(0),
            out: cfg.out.unwrap_or_else(|| PathBuf::from("gridbet-out")),
            columns: ColumnSpec { time, price },
            label,
        })
    }

    pub fn params(&self, grid: &Grid) -> BetaBinomialParams {
        match self.prior {
            Some((a, b)) => BetaBinomialParams { a, b },
            None => BetaBinomialParams::coupled(grid),
        }
    }
}

/// File-name tag for a grid: `k8` for `2^-8`, else the spacing itself.
pub fn grid_tag(eta: f64) -> String {
    let k = -eta.log2();
    if (k - k.round()).abs() < 1e-12 {
        format!("k{}", k.round() as i64)
    } else {
        format!("eta{eta}")
    }
}
