//! Markov strategy under proportional transaction costs.
//!
//! Trading `beta` (as a fraction of capital) costs `c |beta|`. With exposure
//! `mu` carried into the round and price return `ds`, the capital moves by
//!
//! ```text
//! K_n = K_{n-1} (1 + mu ds + beta (ds - c sgn beta))
//! ```
//!
//! Each round the investor picks `beta` maximising the expected log growth
//! under the Markov predictive distribution of the next grid move. On a grid
//! the return is two-point (`+delta` or `-delta/(1+delta)`), so the
//! first-order condition on either side of zero is linear in `beta` and is
//! solved in closed form.

use serde::{Deserialize, Serialize};

use crate::embedding::{Counts, Embedding, Grid};
use crate::error::{domain, Error, Result};
use crate::strategies::{markov_predictive, BetaBinomialParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TradeDecision {
    Buy,
    Sell,
    Hold,
}

/// Unit cost and prior for the cost-aware Markov strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub c: f64,
    pub params: BetaBinomialParams,
}

/// Largest admissible unit cost (exclusive) on `grid`: `delta / (1 + delta)`.
///
/// At or above it, selling to cut a long position costs more than the down
/// move it protects against, and the optimiser can no longer restore a
/// prudent exposure.
pub fn max_unit_cost(grid: &Grid) -> f64 {
    -grid.down_return()
}

impl CostParams {
    pub fn new(c: f64, params: BetaBinomialParams, grid: &Grid) -> Result<Self> {
        if !(c >= 0.0 && c < max_unit_cost(grid)) {
            return Err(domain(format!(
                "unit cost {c} must lie in [0, {}) on a grid with delta = {}",
                max_unit_cost(grid),
                grid.delta
            )));
        }
        Ok(Self { c, params })
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One-round growth factor `1 + mu ds + beta (ds - c sgn beta)`.
pub fn growth_factor(mu_prev: f64, beta: f64, ds: f64, c: f64) -> f64 {
    1.0 + mu_prev * ds + beta * (ds - c * sign(beta))
}

/// Capital after one round; fails if the factor is not positive.
pub fn cost_step(prev_capital: f64, mu_prev: f64, beta: f64, ds: f64, c: f64) -> Result<f64> {
    let factor = growth_factor(mu_prev, beta, ds, c);
    if factor.is_nan() || factor <= 0.0 {
        return Err(Error::Prudence { factor });
    }
    Ok(prev_capital * factor)
}

/// Derivative of the expected log growth at `beta` (one-sided at 0 via `side`).
pub fn growth_derivative(p: f64, mu_prev: f64, beta: f64, delta: f64, c: f64, side: f64) -> f64 {
    let (up, down) = (delta, -delta / (1.0 + delta));
    let s = if beta != 0.0 { sign(beta) } else { side };
    let a = up - c * s;
    let b = down - c * s;
    p * a / (1.0 + mu_prev * up + beta * a) + (1.0 - p) * b / (1.0 + mu_prev * down + beta * b)
}

/// Log-growth-optimal trade for up probability `p`, carried exposure `mu_prev`.
///
/// Buys when the right derivative at zero is positive, sells when the left
/// derivative is negative, holds otherwise. If the carried exposure would
/// already bankrupt the investor on one outcome, the trade on the side that
/// restores solvency is forced.
pub fn optimal_beta(p: f64, mu_prev: f64, delta: f64, c: f64) -> (f64, TradeDecision) {
    debug_assert!(p > 0.0 && p < 1.0);
    let (up, down) = (delta, -delta / (1.0 + delta));
    let hold_up = 1.0 + mu_prev * up;
    let hold_down = 1.0 + mu_prev * down;

    let root = |s: f64| {
        let a = up - c * s;
        let b = down - c * s;
        -(p * a * hold_down + (1.0 - p) * b * hold_up) / (a * b)
    };

    if hold_up <= 0.0 {
        return (root(1.0), TradeDecision::Buy);
    }
    if hold_down <= 0.0 {
        return (root(-1.0), TradeDecision::Sell);
    }
    if growth_derivative(p, mu_prev, 0.0, delta, c, 1.0) > 0.0 {
        (root(1.0), TradeDecision::Buy)
    } else if growth_derivative(p, mu_prev, 0.0, delta, c, -1.0) < 0.0 {
        (root(-1.0), TradeDecision::Sell)
    } else {
        (0.0, TradeDecision::Hold)
    }
}

/// Capital path of the cost-aware Markov strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRunResult {
    pub c: f64,
    /// `log K_n`, `n = 0..=n*`; `-inf` from the round of ruin on.
    pub log_capital: Vec<f64>,
    /// Exposure `mu_n` carried out of round `n` (after the price move).
    pub exposures: Vec<f64>,
    /// Trade `beta_n` made at the start of round `n` (`trades[n - 1]`).
    pub trades: Vec<f64>,
    pub decisions: Vec<TradeDecision>,
    pub hold_rounds: usize,
    pub final_capital: f64,
    /// Round in which no trade could keep the capital positive.
    pub ruined_at: Option<usize>,
}

impl CostRunResult {
    pub fn rounds(&self) -> usize {
        self.log_capital.len() - 1
    }

    pub fn final_log_capital(&self) -> f64 {
        *self.log_capital.last().expect("round 0 present")
    }

    pub fn capital_at(&self, round: usize) -> f64 {
        self.log_capital[round].exp()
    }

    /// Hold decisions among rounds `1..=round`.
    pub fn hold_rounds_through(&self, round: usize) -> usize {
        self.decisions[..round.min(self.decisions.len())].iter().filter(|d| **d == TradeDecision::Hold).count()
    }
}

/// Runs the cost-aware Markov strategy on an embedding.
///
/// The predictive probability comes from the same pair counts as the
/// frictionless Markov strategy. Round 1 has no previous move and holds the
/// initial zero exposure. After the price move the exposure is the asset
/// value divided by the new capital, `(mu + beta)(1 + ds) / factor`.
pub fn run_markov_with_costs(embedding: &Embedding, params: &BetaBinomialParams, c: f64) -> CostRunResult {
    let grid = embedding.grid;
    let n = embedding.n_star();
    let mut log_capital = Vec::with_capacity(n + 1);
    let mut exposures = Vec::with_capacity(n + 1);
    let mut trades = Vec::with_capacity(n);
    let mut decisions = Vec::with_capacity(n);
    let mut counts = Counts::default();
    let mut mu = 0.0;
    let mut log_k = 0.0;
    let mut ruined_at = None;
    log_capital.push(log_k);
    exposures.push(mu);

    for (i, &x) in embedding.directions.iter().enumerate() {
        let (beta, decision) = match markov_predictive(counts.last, &counts, params) {
            Some(p) => optimal_beta(p, mu, grid.delta, c),
            None => (0.0, TradeDecision::Hold),
        };
        let ds = grid.price_return(x);
        let factor = growth_factor(mu, beta, ds, c);
        trades.push(beta);
        decisions.push(decision);
        if factor.is_nan() || factor <= 0.0 {
            ruined_at = Some(i + 1);
            log_capital.resize(n + 1, f64::NEG_INFINITY);
            exposures.resize(n + 1, 0.0);
            break;
        }
        log_k += factor.ln();
        mu = (mu + beta) * (1.0 + ds) / factor;
        log_capital.push(log_k);
        exposures.push(mu);
        counts.push(x);
    }
    let hold_rounds = decisions.iter().filter(|d| **d == TradeDecision::Hold).count();
    let final_capital = log_capital.last().expect("round 0").exp();
    CostRunResult { c, log_capital, exposures, trades, decisions, hold_rounds, final_capital, ruined_at }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalCostStatus {
    /// A cost below the admissible limit pushes the capital under 1.
    Found,
    /// The frictionless capital is already at most 1; `c* = 0`.
    Degenerate,
    /// No scanned cost pushes the capital under 1.
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCost {
    pub status: CriticalCostStatus,
    /// `c*` in hundredths of `delta`.
    pub hundredths_of_delta: u32,
    pub c: f64,
    /// Round at which capital is compared with 1.
    pub round: usize,
    pub frictionless_capital: f64,
    /// Capital and hold count at `round` under `c*`.
    pub capital_at_c: f64,
    pub hold_rounds_at_c: usize,
}

impl CriticalCost {
    /// `c*` as a multiple of delta with two decimals, e.g. `0.05δ`.
    pub fn delta_units(&self) -> String {
        match self.status {
            CriticalCostStatus::NotFound => "not found".to_string(),
            _ => format!("{:.2}δ", self.hundredths_of_delta as f64 / 100.0),
        }
    }
}

/// Smallest unit cost, on a `0.01 delta` grid scanned upward from zero, at
/// which the capital at `round` (default: last round) drops below 1.
///
/// Monotonicity in `c` is not assumed; the first crossing is reported.
pub fn critical_cost(embedding: &Embedding, params: &BetaBinomialParams, round: Option<usize>) -> Result<CriticalCost> {
    let grid = embedding.grid;
    let round = round.unwrap_or(embedding.n_star());
    if round > embedding.n_star() {
        return Err(domain(format!("round {round} exceeds n* = {}", embedding.n_star())));
    }
    let frictionless = run_markov_with_costs(embedding, params, 0.0);
    let frictionless_capital = frictionless.capital_at(round);
    if frictionless_capital <= 1.0 {
        return Ok(CriticalCost {
            status: CriticalCostStatus::Degenerate,
            hundredths_of_delta: 0,
            c: 0.0,
            round,
            frictionless_capital,
            capital_at_c: frictionless_capital,
            hold_rounds_at_c: frictionless.hold_rounds_through(round),
        });
    }

    let limit = max_unit_cost(&grid);
    let candidates: Vec<u32> = (1..).take_while(|&j| j as f64 * 0.01 * grid.delta < limit).collect();
    let eval = |&j: &u32| {
        let c = j as f64 * 0.01 * grid.delta;
        let run = run_markov_with_costs(embedding, params, c);
        (run.capital_at(round) < 1.0).then(|| (j, c, run.capital_at(round), run.hold_rounds_through(round)))
    };
    #[cfg(feature = "parallel")]
    let hit = {
        use rayon::prelude::*;
        candidates.par_iter().find_map_first(eval)
    };
    #[cfg(not(feature = "parallel"))]
    let hit = candidates.iter().find_map(eval);

    Ok(match hit {
        Some((j, c, capital_at_c, hold_rounds_at_c)) => CriticalCost {
            status: CriticalCostStatus::Found,
            hundredths_of_delta: j,
            c,
            round,
            frictionless_capital,
            capital_at_c,
            hold_rounds_at_c,
        },
        None => CriticalCost {
            status: CriticalCostStatus::NotFound,
            hundredths_of_delta: 0,
            c: f64::NAN,
            round,
            frictionless_capital,
            capital_at_c: f64::NAN,
            hold_rounds_at_c: 0,
        },
    })
}
