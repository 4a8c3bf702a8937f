//! Grid embedding of a price path into a discrete coin-tossing game.
//!
//! The log price is cut by the lattice `log S(t_0) + k * eta`. Each time the
//! path reaches the next level above or below the current one a round is
//! played: the direction is the move, the waiting time is the time since the
//! previous hit.

use crate::error::{domain, Error, Result};
use crate::path_model::PricePath;
use serde::Serialize;

/// Slack, in units of `eta`, under which a sample counts as sitting on a level.
const LEVEL_TOLERANCE: f64 = 1e-9;

/// Multiplicative price grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    /// Log spacing.
    pub eta: f64,
    /// Relative price step `e^eta - 1`.
    pub delta: f64,
    /// Risk-neutral up probability `1 / (2 + delta)`.
    pub rho: f64,
}

impl Grid {
    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(domain(format!("eta must be positive, got {eta}")));
        }
        let delta = eta.exp_m1();
        Ok(Self { eta, delta, rho: 1.0 / (2.0 + delta) })
    }

    /// Grid with `eta = 2^-k`.
    pub fn dyadic(k: i32) -> Self {
        Self::from_eta(2f64.powi(-k)).expect("2^-k is positive")
    }

    /// `-log2(eta)`, the `k` of a dyadic grid (fractional for other spacings).
    pub fn k(&self) -> f64 {
        -self.eta.log2()
    }

    /// Relative price change on an up move.
    pub fn up_return(&self) -> f64 {
        self.delta
    }

    /// Relative price change on a down move, `-delta / (1 + delta)`.
    pub fn down_return(&self) -> f64 {
        -self.delta / (1.0 + self.delta)
    }

    pub fn price_return(&self, up: bool) -> f64 {
        if up {
            self.up_return()
        } else {
            self.down_return()
        }
    }
}

/// Builds a [`Grid`] from its log spacing.
pub fn grid_from_eta(eta: f64) -> Result<Grid> {
    Grid::from_eta(eta)
}

/// How a sampling interval that crosses several levels is turned into hits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CrossingRule {
    /// One hit per crossed level, timed by log-linear interpolation between
    /// the two samples.
    #[default]
    Interpolate,
    /// At most one hit per sample, stamped with the sample time. Remaining
    /// crossed levels are picked up by later samples if the price stays there.
    OnePerSample,
}

/// Result of embedding a path on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub grid: Grid,
    pub rule: CrossingRule,
    /// Time and price of the anchor sample (round 0).
    pub start_time: f64,
    pub start_price: f64,
    /// `true` for an up move.
    pub directions: Vec<bool>,
    pub waiting_times: Vec<f64>,
    pub hit_times: Vec<f64>,
    /// Index of the first source sample at or beyond each hit.
    pub hit_indices: Vec<usize>,
    /// Grid level reached at each hit.
    pub hit_prices: Vec<f64>,
}

impl Embedding {
    /// Number of hits `n*` within the horizon.
    pub fn n_star(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Directions as 0/1 values.
    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        self.directions.iter().map(|&x| x as u8)
    }

    pub fn counts(&self, n: usize) -> Result<Counts> {
        counts(self, n)
    }

    /// Time of round `n`; round 0 is the start of the path.
    pub fn round_time(&self, n: usize) -> Option<f64> {
        match n {
            0 => Some(self.start_time),
            _ => self.hit_times.get(n - 1).copied(),
        }
    }
}

/// Incremental embedding of a path delivered one sample at a time.
///
/// Holds only the hits, so paths too long to keep in memory can be embedded
/// as they are generated. [`embed_with`] is this type applied to a stored
/// path.
#[derive(Debug, Clone)]
pub struct StreamingEmbedder {
    grid: Grid,
    rule: CrossingRule,
    horizon: Option<f64>,
    log_anchor: f64,
    level: i64,
    last_time: f64,
    prev: (f64, f64),
    samples: usize,
    done: bool,
    out: Embedding,
}

impl StreamingEmbedder {
    /// Anchors the lattice at `start_price`, observed at `start_time` (sample 0).
    pub fn new(
        grid: Grid,
        rule: CrossingRule,
        start_time: f64,
        start_price: f64,
        horizon: Option<f64>,
    ) -> Result<Self> {
        if !(start_price > 0.0 && start_price.is_finite()) {
            return Err(domain(format!("start price must be positive and finite, got {start_price}")));
        }
        Ok(Self {
            grid,
            rule,
            horizon,
            log_anchor: start_price.ln(),
            level: 0,
            last_time: start_time,
            prev: (start_time, 0.0),
            samples: 1,
            done: false,
            out: Embedding {
                grid,
                rule,
                start_time,
                start_price,
                directions: Vec::new(),
                waiting_times: Vec::new(),
                hit_times: Vec::new(),
                hit_indices: Vec::new(),
                hit_prices: Vec::new(),
            },
        })
    }

    /// Number of hits so far.
    pub fn n_star(&self) -> usize {
        self.out.directions.len()
    }

    /// Whether the horizon has been reached; later samples are ignored.
    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Feeds the next sample. Times must increase and prices be positive;
    /// the caller guarantees both.
    pub fn push(&mut self, time: f64, price: f64) {
        self.push_log(time, price.ln());
    }

    /// Feeds the next sample by its log price.
    pub fn push_log(&mut self, time: f64, log_price: f64) {
        let j = self.samples;
        self.samples += 1;
        if self.done || self.horizon.is_some_and(|t| self.prev.0 >= t) {
            self.done = true;
            return;
        }
        let cur = (time, (log_price - self.log_anchor) / self.grid.eta);
        if !self.step(j, self.prev, cur) {
            self.done = true;
        }
        self.prev = cur;
    }

    pub fn finish(self) -> Embedding {
        self.out
    }

    /// Records a hit; returns false once the horizon has been reached.
    fn hit(&mut self, up: bool, time: f64, index: usize) -> bool {
        if self.horizon.is_some_and(|t| time >= t) {
            return false;
        }
        self.level += if up { 1 } else { -1 };
        let price = self.out.start_price * (self.level as f64 * self.grid.eta).exp();
        self.out.directions.push(up);
        self.out.waiting_times.push(time - self.last_time);
        self.out.hit_times.push(time);
        self.out.hit_indices.push(index);
        self.out.hit_prices.push(price);
        self.last_time = time;
        true
    }

    /// Processes the sampling interval ending at sample `j`.
    fn step(&mut self, j: usize, (t0, u0): (f64, f64), (t1, u1): (f64, f64)) -> bool {
        let crossed_up = |level: i64| u1 >= (level + 1) as f64 - LEVEL_TOLERANCE;
        let crossed_down = |level: i64| u1 <= (level - 1) as f64 + LEVEL_TOLERANCE;
        let interp = |target: f64| {
            let frac = ((target - u0) / (u1 - u0)).clamp(0.0, 1.0);
            t0 + frac * (t1 - t0)
        };
        match self.rule {
            CrossingRule::Interpolate => {
                while crossed_up(self.level) {
                    let time = interp((self.level + 1) as f64);
                    if !self.hit(true, time, j) {
                        return false;
                    }
                }
                while crossed_down(self.level) {
                    let time = interp((self.level - 1) as f64);
                    if !self.hit(false, time, j) {
                        return false;
                    }
                }
                true
            }
            CrossingRule::OnePerSample => {
                if crossed_up(self.level) {
                    self.hit(true, t1, j)
                } else if crossed_down(self.level) {
                    self.hit(false, t1, j)
                } else {
                    true
                }
            }
        }
    }
}

/// Extracts grid hits from `path`.
///
/// The lattice is anchored at the first price. A sample landing exactly on a
/// level counts as reaching it. Hits at or after `horizon` are dropped, so
/// the result holds the `n*` hits with `t_{n*} < T`.
pub fn embed(path: &PricePath, grid: Grid, horizon: Option<f64>) -> Result<Embedding> {
    embed_with(path, grid, horizon, CrossingRule::Interpolate)
}

pub fn embed_with(path: &PricePath, grid: Grid, horizon: Option<f64>, rule: CrossingRule) -> Result<Embedding> {
    if path.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, found: path.len() });
    }
    let times = path.timestamps();
    let prices = path.prices();
    let mut e = StreamingEmbedder::new(grid, rule, times[0], prices[0], horizon)?;
    for j in 1..prices.len() {
        e.push(times[j], prices[j]);
        if e.is_done() {
            break;
        }
    }
    Ok(e.finish())
}

/// Head/tail and adjacent-pair counts over a prefix of directions.
///
/// Pair counts cover `(x_{i-1}, x_i)` for `i = 2..=n`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub heads: u64,
    pub tails: u64,
    pub q11: u64,
    pub q10: u64,
    pub q01: u64,
    pub q00: u64,
    pub last: Option<bool>,
}

impl Counts {
    pub fn from_directions(directions: &[bool]) -> Self {
        let mut c = Self::default();
        for &x in directions {
            c.push(x);
        }
        c
    }

    pub fn push(&mut self, x: bool) {
        if x {
            self.heads += 1;
        } else {
            self.tails += 1;
        }
        match (self.last, x) {
            (Some(true), true) => self.q11 += 1,
            (Some(true), false) => self.q10 += 1,
            (Some(false), true) => self.q01 += 1,
            (Some(false), false) => self.q00 += 1,
            (None, _) => {}
        }
        self.last = Some(x);
    }

    pub fn rounds(&self) -> u64 {
        self.heads + self.tails
    }

    /// Pairs whose first element is an up move.
    pub fn after_up(&self) -> u64 {
        self.q11 + self.q10
    }

    /// Pairs whose first element is a down move.
    pub fn after_down(&self) -> u64 {
        self.q01 + self.q00
    }
}

/// Counts over the first `n` rounds of `embedding`.
pub fn counts(embedding: &Embedding, n: usize) -> Result<Counts> {
    if n > embedding.n_star() {
        return Err(domain(format!("prefix {n} exceeds n* = {}", embedding.n_star())));
    }
    Ok(Counts::from_directions(&embedding.directions[..n]))
}
