//! Browser bindings for the gridbet demo page.
//!
//! Every export takes a JSON request string and returns a JSON response
//! string, or an error message. The same functions run natively, which is
//! how they are tested.

mod source;

use gridbet::{
    critical_cost, empirical_probs, markov_growth_rate, run, run_markov_with_costs, run_max_test, run_stopping_test,
    BetaBinomialParams, CostParams, Embedding, Grid, StrategyKind, TestConfig, TestOutcome,
};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

pub use source::{PreviewPoint, SourceSpec, MAX_STEPS};

/// Longest series returned for plotting.
pub const MAX_PLOT_POINTS: usize = 1500;

fn default_alpha() -> f64 {
    1e-3
}

fn default_eta() -> f64 {
    1.0 / 256.0
}

fn default_costs() -> Vec<f64> {
    vec![0.0, 0.01, 0.03, 0.05]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestRequest {
    pub source: SourceSpec,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct StrategyResult {
    pub strategy: StrategyKind,
    /// `(round, log10 capital)`, thinned for plotting; always ends at the last round.
    pub log10_capital: Vec<(usize, f64)>,
    pub outcome: TestOutcome,
}

#[derive(Debug, Serialize)]
pub struct TestResponse {
    pub grid: Grid,
    pub samples: usize,
    pub n_star: usize,
    pub threshold: f64,
    pub preview: Vec<PreviewPoint>,
    pub p1: Option<f64>,
    pub p11: Option<f64>,
    pub p00: Option<f64>,
    pub h1: Option<f64>,
    pub h0: Option<f64>,
    pub strategies: Vec<StrategyResult>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRequest {
    pub source: SourceSpec,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    /// Unit costs as multiples of `delta`.
    #[serde(default = "default_costs")]
    pub costs: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct CostCurve {
    pub c_over_delta: f64,
    /// `(round, log10 capital)`; `null` after ruin.
    pub log10_capital: Vec<(usize, Option<f64>)>,
    pub capital_at_report: f64,
    pub hold_rounds_at_report: usize,
    pub ruined_at: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct CostResponse {
    pub grid: Grid,
    pub n_star: usize,
    /// First round where the frictionless capital reaches `1/alpha`, else `n_star`.
    pub report_round: usize,
    pub crossed: bool,
    pub curves: Vec<CostCurve>,
    pub critical_cost: String,
    pub critical_cost_value: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthRequest {
    pub hursts: Vec<f64>,
    pub sigma: f64,
    pub n: usize,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct GrowthRow {
    pub hurst: f64,
    pub n_star: usize,
    /// Final log capital per hit.
    pub markov_growth: Option<f64>,
    pub bb_growth: Option<f64>,
    /// Long-run Markov growth per hit for exponentiated fBm with this index.
    pub markov_theory: f64,
    pub p11: Option<f64>,
    pub p00: Option<f64>,
}

fn parse<T: for<'de> Deserialize<'de>>(request: &str) -> Result<T, String> {
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

fn respond<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn grid(eta: f64) -> Result<Grid, String> {
    Grid::from_eta(eta).map_err(|e| e.to_string())
}

/// Indices `0, s, 2s, …, last` with at most about `MAX_PLOT_POINTS` entries.
fn thin(len: usize) -> impl Iterator<Item = usize> {
    let stride = len.div_ceil(MAX_PLOT_POINTS).max(1);
    let last = len.saturating_sub(1);
    (0..len).step_by(stride).chain((len > 0 && !last.is_multiple_of(stride)).then_some(last))
}

fn last(values: &[Option<f64>]) -> Option<f64> {
    values.last().copied().flatten()
}

/// Embeds a series, runs both strategies against `1/alpha`, and returns the
/// capital curves with the empirical continuation statistics.
#[wasm_bindgen]
pub fn run_test(request: &str) -> Result<String, String> {
    let req: TestRequest = parse(request)?;
    let config = TestConfig::new(req.alpha).map_err(|e| e.to_string())?;
    let grid = grid(req.eta)?;
    let series = req.source.embed(grid, req.seed)?;
    let e = &series.embedding;
    let params = BetaBinomialParams::coupled(&grid);
    let strategies = [StrategyKind::BetaBinomial, StrategyKind::Markov]
        .into_iter()
        .map(|kind| {
            let cp = run(kind, e, &params);
            let outcome = run_max_test(&cp, &config.with_horizon(e.n_star()))
                .expect("horizon equals the number of rounds")
                .with_round_times(|n| e.round_time(n));
            let log10_capital =
                thin(cp.log_capital.len()).map(|n| (n, cp.log_capital[n] / std::f64::consts::LN_10)).collect();
            StrategyResult { strategy: kind, log10_capital, outcome }
        })
        .collect();
    let stats = empirical_probs(e);
    respond(&TestResponse {
        grid,
        samples: series.samples,
        n_star: e.n_star(),
        threshold: config.threshold(),
        preview: series.preview,
        p1: last(&stats.p1),
        p11: last(&stats.p11),
        p00: last(&stats.p00),
        h1: last(&stats.h1),
        h0: last(&stats.h0),
        strategies,
    })
}

/// Markov strategy under proportional trading costs, plus the critical cost.
#[wasm_bindgen]
pub fn run_costs(request: &str) -> Result<String, String> {
    let req: CostRequest = parse(request)?;
    let config = TestConfig::new(req.alpha).map_err(|e| e.to_string())?;
    let grid = grid(req.eta)?;
    let params = BetaBinomialParams::coupled(&grid);
    for &c in &req.costs {
        CostParams::new(c * grid.delta, params, &grid).map_err(|e| e.to_string())?;
    }
    let series = req.source.embed(grid, req.seed)?;
    let e: &Embedding = &series.embedding;
    let frictionless = run(StrategyKind::Markov, e, &params);
    let crossing = run_stopping_test(&frictionless, &config).first_crossing_round;
    let report_round = crossing.unwrap_or(e.n_star());
    let curves = req
        .costs
        .iter()
        .map(|&c| {
            let r = run_markov_with_costs(e, &params, c * grid.delta);
            let log10_capital = thin(r.log_capital.len())
                .map(|n| {
                    let v = r.log_capital[n];
                    (n, v.is_finite().then_some(v / std::f64::consts::LN_10))
                })
                .collect();
            CostCurve {
                c_over_delta: c,
                log10_capital,
                capital_at_report: r.capital_at(report_round),
                hold_rounds_at_report: r.hold_rounds_through(report_round),
                ruined_at: r.ruined_at,
            }
        })
        .collect();
    let cc = critical_cost(e, &params, Some(report_round)).map_err(|e| e.to_string())?;
    respond(&CostResponse {
        grid,
        n_star: e.n_star(),
        report_round,
        crossed: crossing.is_some(),
        curves,
        critical_cost: cc.delta_units(),
        critical_cost_value: (cc.status != gridbet::CriticalCostStatus::NotFound).then_some(cc.c),
    })
}

/// Growth per hit of both strategies on exponentiated fBm across Hurst
/// indices, next to the long-run Markov rate.
#[wasm_bindgen]
pub fn growth_by_hurst(request: &str) -> Result<String, String> {
    let req: GrowthRequest = parse(request)?;
    if req.hursts.is_empty() {
        return Err("hursts must not be empty".into());
    }
    if req.hursts.len().saturating_mul(req.n) > 4 * MAX_STEPS {
        return Err(format!("hursts.len() * n must not exceed {}", 4 * MAX_STEPS));
    }
    let grid = grid(req.eta)?;
    let params = BetaBinomialParams::coupled(&grid);
    let mut rows = Vec::with_capacity(req.hursts.len());
    for (i, &hurst) in req.hursts.iter().enumerate() {
        let source = SourceSpec::Fbm { hurst, sigma: req.sigma, n: req.n, dt: 1.0, s0: 1.0 };
        let series = source.embed(grid, req.seed.wrapping_add(i as u64))?;
        let e = &series.embedding;
        let per_hit = |kind| {
            let cp = run(kind, e, &params);
            (e.n_star() > 0).then(|| cp.final_log_capital() / e.n_star() as f64)
        };
        let stats = empirical_probs(e);
        rows.push(GrowthRow {
            hurst,
            n_star: e.n_star(),
            markov_growth: per_hit(StrategyKind::Markov),
            bb_growth: per_hit(StrategyKind::BetaBinomial),
            markov_theory: markov_growth_rate(hurst),
            p11: last(&stats.p11),
            p00: last(&stats.p00),
        });
    }
    respond(&rows)
}
