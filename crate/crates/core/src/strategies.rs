//! Prudent betting strategies for the embedded coin-tossing game.
//!
//! Each round the investor announces a bet `nu` and the capital is multiplied
//! by `1 + nu (x - rho)`. Both strategies below bet the Bayesian predictive
//! probability `p` against `rho` with `nu = (p - rho) / (rho (1 - rho))`, so
//! the factor is `p / rho` on an up move and `(1 - p) / (1 - rho)` on a down
//! move. The capital is a likelihood ratio and is kept in log form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::embedding::{Counts, Embedding, Grid};
use crate::error::{domain, Result};

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `log((c)_l)` for the rising factorial `c (c+1) … (c+l-1)`.
pub fn ln_pochhammer(c: f64, l: u64) -> f64 {
    if l == 0 {
        0.0
    } else {
        ln_gamma(c + l as f64) - ln_gamma(c)
    }
}

/// Beta prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBinomialParams {
    pub a: f64,
    pub b: f64,
}

impl BetaBinomialParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(domain(format!("hyperparameters must be positive, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }

    /// `a = b = 0.01 / eta`, i.e. `0.01 * 2^k` on the grid `eta = 2^-k`.
    pub fn coupled(grid: &Grid) -> Self {
        let v = 0.01 / grid.eta;
        Self { a: v, b: v }
    }

    /// Posterior predictive probability of an up move after `ups` ups in
    /// `total` observations.
    pub fn predictive(&self, ups: u64, total: u64) -> f64 {
        let p = (self.a + ups as f64) / (self.a + self.b + total as f64);
        debug_assert!(p > 0.0 && p < 1.0, "predictive {p} left (0, 1)");
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    #[serde(rename = "bb")]
    BetaBinomial,
    Markov,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::BetaBinomial => "bb",
            StrategyKind::Markov => "markov",
        })
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bb" | "beta-binomial" | "bayes" => Ok(StrategyKind::BetaBinomial),
            "markov" | "mk" => Ok(StrategyKind::Markov),
            other => Err(domain(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Capital of a strategy after each round, `log_capital[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalProcess {
    pub strategy: StrategyKind,
    pub log_capital: Vec<f64>,
    /// `bets[n - 1]` is the bet announced for round `n`.
    pub bets: Vec<f64>,
}

impl CapitalProcess {
    /// Number of rounds played.
    pub fn rounds(&self) -> usize {
        self.bets.len()
    }

    pub fn final_log_capital(&self) -> f64 {
        *self.log_capital.last().expect("log_capital holds round 0")
    }

    pub fn capital(&self, n: usize) -> f64 {
        self.log_capital[n].exp()
    }
}

/// A strategy that announces a bet from the moves seen so far.
pub trait BettingStrategy {
    fn kind(&self) -> StrategyKind;
    /// Bet for the coming round.
    fn bet(&self, rho: f64) -> f64;
    fn observe(&mut self, x: bool);
}

/// Runs `strategy` over `directions` and records the log capital.
pub fn run_strategy<S: BettingStrategy>(mut strategy: S, directions: &[bool], rho: f64) -> CapitalProcess {
    let mut log_capital = Vec::with_capacity(directions.len() + 1);
    let mut bets = Vec::with_capacity(directions.len());
    let mut log_k = 0.0;
    log_capital.push(log_k);
    for &x in directions {
        let nu = strategy.bet(rho);
        let excess = nu * (x as u8 as f64 - rho);
        assert!(1.0 + excess > 0.0, "prudence violated: factor {}", 1.0 + excess);
        log_k += excess.ln_1p();
        log_capital.push(log_k);
        bets.push(nu);
        strategy.observe(x);
    }
    CapitalProcess { strategy: strategy.kind(), log_capital, bets }
}

fn bet_from_predictive(p: f64, rho: f64) -> f64 {
    (p - rho) / (rho * (1.0 - rho))
}

/// Bet of the beta-binomial strategy in round `n` after `h_prev` ups.
pub fn bb_bet(h_prev: u64, n: u64, params: &BetaBinomialParams, rho: f64) -> f64 {
    debug_assert!(n >= 1 && h_prev < n);
    bet_from_predictive(params.predictive(h_prev, n - 1), rho)
}

/// Closed-form log capital of the beta-binomial strategy after `h` ups and `t` downs.
pub fn bb_capital_closed(h: u64, t: u64, params: &BetaBinomialParams, rho: f64) -> f64 {
    let BetaBinomialParams { a, b } = *params;
    ln_pochhammer(a, h) + ln_pochhammer(b, t)
        - ln_pochhammer(a + b, h + t)
        - h as f64 * rho.ln()
        - t as f64 * (1.0 - rho).ln()
}

/// Beta-binomial strategy state.
#[derive(Debug, Clone)]
pub struct BetaBinomial {
    params: BetaBinomialParams,
    ups: u64,
    rounds: u64,
}

impl BetaBinomial {
    pub fn new(params: BetaBinomialParams) -> Self {
        Self { params, ups: 0, rounds: 0 }
    }
}

impl BettingStrategy for BetaBinomial {
    fn kind(&self) -> StrategyKind {
        StrategyKind::BetaBinomial
    }

    fn bet(&self, rho: f64) -> f64 {
        bb_bet(self.ups, self.rounds + 1, &self.params, rho)
    }

    fn observe(&mut self, x: bool) {
        self.ups += x as u64;
        self.rounds += 1;
    }
}

pub fn run_bb_directions(directions: &[bool], params: &BetaBinomialParams, rho: f64) -> CapitalProcess {
    run_strategy(BetaBinomial::new(*params), directions, rho)
}

pub fn run_bb(embedding: &Embedding, params: &BetaBinomialParams) -> CapitalProcess {
    run_bb_directions(&embedding.directions, params, embedding.grid.rho)
}

/// Predictive up probability of the first-order Markov strategy.
///
/// `None` before the first move, when there is nothing to condition on.
pub fn markov_predictive(last: Option<bool>, counts: &Counts, params: &BetaBinomialParams) -> Option<f64> {
    match last? {
        true => Some(params.predictive(counts.q11, counts.after_up())),
        false => Some(params.predictive(counts.q01, counts.after_down())),
    }
}

/// Bet of the Markov strategy given the last move and pair counts so far.
/// No bet is placed in round 1.
pub fn markov_bet(last: Option<bool>, counts: &Counts, params: &BetaBinomialParams, rho: f64) -> f64 {
    markov_predictive(last, counts, params).map_or(0.0, |p| bet_from_predictive(p, rho))
}

/// Closed-form log capital of the Markov strategy from pair counts.
///
/// Counts cover pairs `(x_{i-1}, x_i)`, `i = 2..=n`; round 1 carries no bet,
/// so the `rho` exponents are the ups and downs among `x_2..x_n`.
pub fn markov_capital_closed(q11: u64, q10: u64, q01: u64, q00: u64, params: &BetaBinomialParams, rho: f64) -> f64 {
    let BetaBinomialParams { a, b } = *params;
    let row = |s: u64, f: u64| ln_pochhammer(a, s) + ln_pochhammer(b, f) - ln_pochhammer(a + b, s + f);
    row(q11, q10) + row(q01, q00) - (q11 + q01) as f64 * rho.ln() - (q10 + q00) as f64 * (1.0 - rho).ln()
}

/// First-order Markov strategy state.
#[derive(Debug, Clone)]
pub struct Markov {
    params: BetaBinomialParams,
    counts: Counts,
}

impl Markov {
    pub fn new(params: BetaBinomialParams) -> Self {
        Self { params, counts: Counts::default() }
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    /// Predictive up probability for the coming round, if any move was seen.
    pub fn predictive(&self) -> Option<f64> {
        markov_predictive(self.counts.last, &self.counts, &self.params)
    }
}

impl BettingStrategy for Markov {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Markov
    }

    fn bet(&self, rho: f64) -> f64 {
        markov_bet(self.counts.last, &self.counts, &self.params, rho)
    }

    fn observe(&mut self, x: bool) {
        self.counts.push(x);
    }
}

pub fn run_markov_directions(directions: &[bool], params: &BetaBinomialParams, rho: f64) -> CapitalProcess {
    run_strategy(Markov::new(*params), directions, rho)
}

pub fn run_markov(embedding: &Embedding, params: &BetaBinomialParams) -> CapitalProcess {
    run_markov_directions(&embedding.directions, params, embedding.grid.rho)
}

/// Runs the strategy named by `kind`.
pub fn run(kind: StrategyKind, embedding: &Embedding, params: &BetaBinomialParams) -> CapitalProcess {
    match kind {
        StrategyKind::BetaBinomial => run_bb(embedding, params),
        StrategyKind::Markov => run_markov(embedding, params),
    }
}

/// Kullback–Leibler divergence between Bernoulli(p) and Bernoulli(q), in nats.
pub fn kl_divergence(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("p must lie in [0, 1], got {p}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("q must lie in (0, 1), got {q}")));
    }
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    Ok((term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0))
}

/// Leading terms of the beta-binomial log capital, `n D(h/n || rho) - log(n) / 2`.
pub fn asymptotic_log_capital(n: u64, h: u64, rho: f64) -> f64 {
    debug_assert!(n >= 1 && h <= n);
    let d = kl_divergence(h as f64 / n as f64, rho).expect("rho in (0, 1)");
    n as f64 * d - 0.5 * (n as f64).ln()
}

/// Probability that a path with Hölder exponent `hurst` continues in the
/// same direction at the next grid hit, `1 / 2^(1/H - 1)`.
pub fn continuation_probability(hurst: f64) -> f64 {
    2f64.powf(1.0 - 1.0 / hurst)
}

/// Per-hit log growth of the Markov strategy on a path with Hölder exponent `hurst`.
pub fn markov_growth_rate(hurst: f64) -> f64 {
    debug_assert!(hurst > 0.0 && hurst < 1.0);
    kl_divergence(continuation_probability(hurst), 0.5).expect("0 < p <= 1")
}
