//! Reference implementations used as oracles by the integration tests.
//!
//! Everything here is written from the defining formulas, independently of
//! the library code paths it is compared against.

#![allow(dead_code)]

use gridbet::{
    stream_gbm, stream_segmented_fbm, CrossingRule, Embedding, FbmParams, GbmParams, Grid, StreamingEmbedder,
};

/// Direct product of `1 + nu_n (x_n - rho)` with the Laplace-type predictive.
pub fn oracle_bb_log_capital(dirs: &[bool], a: f64, b: f64, rho: f64) -> f64 {
    let mut heads = 0.0;
    let mut log_k = 0.0;
    for (i, &x) in dirs.iter().enumerate() {
        let p = (a + heads) / (a + b + i as f64);
        let nu = (p - rho) / (rho * (1.0 - rho));
        log_k += (1.0 + nu * (f64::from(x as u8) - rho)).ln();
        heads += f64::from(x as u8);
    }
    log_k
}

/// Direct product for the first-order Markov predictive.
pub fn oracle_markov_log_capital(dirs: &[bool], a: f64, b: f64, rho: f64) -> f64 {
    // trans[prev][next]
    let mut trans = [[0.0f64; 2]; 2];
    let mut log_k = 0.0;
    for i in 0..dirs.len() {
        let x = dirs[i] as usize;
        if i > 0 {
            let prev = dirs[i - 1] as usize;
            let p = (trans[prev][1] + a) / (trans[prev][1] + trans[prev][0] + a + b);
            let nu = (p - rho) / (rho * (1.0 - rho));
            log_k += (1.0 + nu * (x as f64 - rho)).ln();
            trans[prev][x] += 1.0;
        }
    }
    log_k
}

pub fn kl(p: f64, q: f64) -> f64 {
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Expected log growth derivative under a two-point return, written from
/// the capital update `1 + mu ds + beta (ds - c sgn beta)`.
pub fn cost_growth_derivative(p: f64, mu: f64, beta: f64, delta: f64, c: f64, side: f64) -> f64 {
    let s = if beta > 0.0 {
        1.0
    } else if beta < 0.0 {
        -1.0
    } else {
        side
    };
    let outcomes = [(p, delta), (1.0 - p, 1.0 / (1.0 + delta) - 1.0)];
    outcomes.iter().map(|&(w, ds)| w * (ds - c * s) / (1.0 + mu * ds + beta * (ds - c * s))).sum()
}

/// Root of a decreasing function on `(lo, hi)` by bisection.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// GBM embedded on the fly; the path is never stored.
pub fn embed_gbm_stream(params: &GbmParams, grid: Grid) -> Embedding {
    let mut e = StreamingEmbedder::new(grid, CrossingRule::Interpolate, 0.0, params.s0, None).unwrap();
    stream_gbm(params, |t, l| e.push_log(t, l)).unwrap();
    e.finish()
}

pub fn embed_fbm_stream(params: &FbmParams, segment: usize, grid: Grid) -> Embedding {
    let mut e = StreamingEmbedder::new(grid, CrossingRule::Interpolate, 0.0, params.s0, None).unwrap();
    stream_segmented_fbm(params, segment, |t, l| e.push_log(t, l)).unwrap();
    e.finish()
}

/// `sigma * sqrt(dt) = eta / ratio`: time step giving `ratio` per-sample
/// standard deviations per grid step.
pub fn dt_for_ratio(eta: f64, sigma: f64, ratio: f64) -> f64 {
    (eta / (ratio * sigma)).powi(2)
}

/// Sample lag-1 autocorrelation of 0/1 directions.
pub fn direction_autocorr(dirs: &[bool]) -> f64 {
    let xs: Vec<f64> = dirs.iter().map(|&d| d as u8 as f64).collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
    let cov = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>();
    cov / var
}

/// Fraction of moves that repeat the previous one.
pub fn continuation_frequency(dirs: &[bool]) -> f64 {
    let same = dirs.windows(2).filter(|w| w[0] == w[1]).count();
    same as f64 / (dirs.len() - 1) as f64
}

/// Embedding with unit waiting times on a lattice walk.
pub fn lattice_embedding(grid: Grid, directions: Vec<bool>) -> Embedding {
    let n = directions.len();
    let mut level = 0i64;
    let hit_prices = directions
        .iter()
        .map(|&x| {
            level += if x { 1 } else { -1 };
            (level as f64 * grid.eta).exp()
        })
        .collect();
    Embedding {
        grid,
        rule: CrossingRule::Interpolate,
        start_time: 0.0,
        start_price: 1.0,
        directions,
        waiting_times: vec![1.0; n],
        hit_times: (1..=n).map(|t| t as f64).collect(),
        hit_indices: (1..=n).collect(),
        hit_prices,
    }
}
