//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdict lines are always printed; exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{
    bisect_decreasing, cost_growth_derivative, direction_autocorr, dt_for_ratio, embed_fbm_stream, embed_gbm_stream,
    kl, lattice_embedding,
};
use gridbet::costs::max_unit_cost;
use gridbet::diagnostics::prob_from_holder;
use gridbet::strategies::{bb_capital_closed, markov_capital_closed, run_bb_directions, run_markov_directions};
use gridbet::{
    holder_from_prob, optimal_beta, run_bb, run_markov, run_markov_with_costs, run_stopping_test, BetaBinomialParams,
    Counts, Embedding, FbmParams, GbmParams, Grid, TestConfig, TradeDecision,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn exhaustive_martingale() -> Verdict {
    let coupled = 0.01 * 256.0;
    let mut worst: f64 = 0.0;
    for &(a, b) in &[(1.0, 1.0), (coupled, coupled)] {
        let params = BetaBinomialParams::new(a, b).unwrap();
        for &rho in &[1.0 / 3.0, Grid::dyadic(8).rho] {
            for n in 0..=12u32 {
                let (mut e_bb, mut e_mk) = (0.0, 0.0);
                for mask in 0u32..(1 << n) {
                    let dirs: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                    let h = mask.count_ones() as i32;
                    let w = rho.powi(h) * (1.0 - rho).powi(n as i32 - h);
                    e_bb += w * run_bb_directions(&dirs, &params, rho).final_log_capital().exp();
                    e_mk += w * run_markov_directions(&dirs, &params, rho).final_log_capital().exp();
                }
                worst = worst.max((e_bb - 1.0).abs()).max((e_mk - 1.0).abs());
            }
        }
    }
    verdict(worst <= 1e-10, format!("max |E K_n - 1| = {worst:.2e} (tol 1e-10)"))
}

fn closed_form_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(0..=10_000);
        let p_up: f64 = rng.random_range(0.05..0.95);
        let dirs: Vec<bool> = (0..n).map(|_| rng.random_bool(p_up)).collect();
        let params = BetaBinomialParams::new(rng.random_range(0.1..10.0), rng.random_range(0.1..10.0)).unwrap();
        let rho = Grid::dyadic(rng.random_range(1..=10)).rho;
        let c = Counts::from_directions(&dirs);
        let bb = run_bb_directions(&dirs, &params, rho).final_log_capital();
        let mk = run_markov_directions(&dirs, &params, rho).final_log_capital();
        worst = worst
            .max((bb - bb_capital_closed(c.heads, c.tails, &params, rho)).abs())
            .max((mk - markov_capital_closed(c.q11, c.q10, c.q01, c.q00, &params, rho)).abs());
    }
    verdict(worst <= 1e-9, format!("max |recursive - closed| = {worst:.2e} over 1000 sequences (tol 1e-9)"))
}

fn size_control() -> Verdict {
    let grid = Grid::dyadic(6);
    let sigma = 0.2;
    let dt = dt_for_ratio(grid.eta, sigma, 16.0);
    let params = BetaBinomialParams::coupled(&grid);
    let cfg = TestConfig::new(0.05).unwrap();
    let paths = 1000;
    let (mut rej_bb, mut rej_mk) = (0, 0);
    for seed in 0..paths {
        let gbm = GbmParams::martingale(sigma, dt, 1e5 * dt, 10_000 + seed);
        let e = embed_gbm_stream(&gbm, grid);
        rej_bb += run_stopping_test(&run_bb(&e, &params), &cfg).rejected as u32;
        rej_mk += run_stopping_test(&run_markov(&e, &params), &cfg).rejected as u32;
    }
    let limit = 0.05 + 3.0 * (0.05f64 * 0.95 / paths as f64).sqrt();
    let (r_bb, r_mk) = (rej_bb as f64 / paths as f64, rej_mk as f64 / paths as f64);
    verdict(r_bb <= limit && r_mk <= limit, format!("rejection rate bb {r_bb:.3}, markov {r_mk:.3} (limit {limit:.3})"))
}

fn gbm_growth_limit() -> Verdict {
    let grid = Grid::dyadic(6);
    let (mu, sigma, horizon) = (0.2, 0.3, 500.0);
    let dt = dt_for_ratio(grid.eta, sigma, 8.0);
    let params = BetaBinomialParams::coupled(&grid);
    let seeds = 20;
    let mean = (0..seeds)
        .map(|seed| {
            let e = embed_gbm_stream(&GbmParams { mu, sigma, s0: 1.0, dt, horizon, seed: 500 + seed }, grid);
            run_bb(&e, &params).final_log_capital() / horizon
        })
        .sum::<f64>()
        / seeds as f64;
    let target = mu * mu / (2.0 * sigma * sigma);
    let rel = (mean / target - 1.0).abs();
    verdict(rel <= 0.25, format!("mean log K(T)/T = {mean:.4} vs {target:.4} (rel err {rel:.3}, tol 0.25)"))
}

fn markov_growth_fbm(embeddings: &mut Vec<Embedding>) -> Verdict {
    let grid = Grid::dyadic(6);
    let params = BetaBinomialParams::coupled(&grid);
    let anti = FbmParams { hurst: 0.4, sigma: grid.eta / 64.0, s0: 1.0, n: 650_000_000, dt: 1.0, seed: 2024 };
    let e = embed_fbm_stream(&anti, 1 << 20, grid);
    let hits = e.n_star();
    let growth = run_markov(&e, &params).final_log_capital() / hits as f64;
    let p = 2f64.powf(-1.5);
    let target = kl(p, 0.5);
    let rel = (growth / target - 1.0).abs();
    embeddings.push(e);

    let white = FbmParams { hurst: 0.5, sigma: grid.eta / 16.0, s0: 1.0, n: 30_000_000, dt: 1.0, seed: 2025 };
    let e = embed_fbm_stream(&white, 1 << 20, grid);
    let growth_half = run_markov(&e, &params).final_log_capital() / e.n_star() as f64;
    embeddings.push(e);
    verdict(
        hits >= 30_000 && rel <= 0.25 && growth_half.abs() <= 0.003,
        format!(
            "H=0.4: {growth:.4}/hit over {hits} hits vs {target:.4} (rel err {rel:.3}, tol 0.25); \
             H=0.5: {growth_half:.5}/hit (tol 0.003)"
        ),
    )
}

fn direction_independence(embeddings: &mut Vec<Embedding>) -> Verdict {
    let grid = Grid::dyadic(6);
    let sigma = 0.2;
    let dt = dt_for_ratio(grid.eta, sigma, 64.0);
    let e = embed_gbm_stream(&GbmParams::martingale(sigma, dt, 5e7 * dt, 33), grid);
    let n = e.n_star() as f64;
    let ups = e.directions.iter().filter(|&&d| d).count() as f64;
    let z_p = (ups / n - grid.rho) / (grid.rho * (1.0 - grid.rho) / n).sqrt();
    let z_r = direction_autocorr(&e.directions) * n.sqrt();
    embeddings.push(e);
    verdict(
        n >= 1e4 && z_p.abs() <= 4.0 && z_r.abs() <= 4.0,
        format!("{n} hits: P(up) z = {z_p:.2}, lag-1 autocorrelation z = {z_r:.2} (tol 4)"),
    )
}

fn zero_cost_equivalence(embeddings: &mut Vec<Embedding>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in [3, 6, 8] {
        let g = Grid::dyadic(k);
        embeddings.push(lattice_embedding(g, (0..5000).map(|_| rng.random_bool(0.5)).collect()));
        embeddings.push(lattice_embedding(g, (0..5000).map(|i| i % 2 == 0).collect()));
        embeddings.push(lattice_embedding(g, (0..5000).map(|i| i % 3 != 0).collect()));
    }
    let mut worst: f64 = 0.0;
    for e in embeddings.iter() {
        let params = BetaBinomialParams::coupled(&e.grid);
        let with_costs = run_markov_with_costs(e, &params, 0.0).final_log_capital();
        worst = worst.max((with_costs - run_markov(e, &params).final_log_capital()).abs());
    }
    verdict(worst <= 1e-9, format!("max |difference| = {worst:.2e} over {} embeddings (tol 1e-9)", embeddings.len()))
}

fn cost_optimizer() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_grad, mut worst_root): (f64, f64) = (0.0, 0.0);
    let mut hold_violations = 0;
    let mut counts = [0usize; 3];
    for _ in 0..1000 {
        let g = Grid::dyadic(rng.random_range(2..=10));
        let p: f64 = rng.random_range(0.02..0.98);
        let mu = rng.random_range(-0.95..0.95) / g.delta;
        let c = rng.random_range(0.0..0.99) * max_unit_cost(&g);
        let (beta, decision) = optimal_beta(p, mu, g.delta, c);
        match decision {
            TradeDecision::Hold => {
                counts[2] += 1;
                let right = cost_growth_derivative(p, mu, 0.0, g.delta, c, 1.0);
                let left = cost_growth_derivative(p, mu, 0.0, g.delta, c, -1.0);
                hold_violations += (beta != 0.0 || right > 1e-12 || left < -1e-12) as usize;
            }
            _ => {
                let side = if decision == TradeDecision::Buy { 1.0 } else { -1.0 };
                counts[(side < 0.0) as usize] += 1;
                let gprime = |b: f64| cost_growth_derivative(p, mu, b, g.delta, c, side);
                worst_grad = worst_grad.max(gprime(beta).abs());
                let (lo, hi) = bracket(mu, g.delta, c, side);
                let oracle = bisect_decreasing(gprime, lo, hi);
                worst_root = worst_root.max((beta - oracle).abs() / (1.0 + oracle.abs()));
            }
        }
    }
    verdict(
        worst_grad <= 1e-10 && worst_root <= 1e-8 && hold_violations == 0,
        format!(
            "buy/sell/hold = {}/{}/{}: max |g'(beta)| = {worst_grad:.2e}, max root gap = {worst_root:.2e}, \
             hold violations = {hold_violations}",
            counts[0], counts[1], counts[2]
        ),
    )
}

/// Solvent trades on one side of zero.
fn bracket(mu: f64, delta: f64, c: f64, side: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for ds in [delta, 1.0 / (1.0 + delta) - 1.0] {
        let slope = ds - c * side;
        let bound = -(1.0 + mu * ds) / slope;
        if slope > 0.0 {
            lo = lo.max(bound);
        } else {
            hi = hi.min(bound);
        }
    }
    if side > 0.0 {
        (lo.max(0.0), hi)
    } else {
        (lo, hi.min(0.0))
    }
}

fn holder_roundtrip() -> Verdict {
    let mut worst: f64 = 0.0;
    for i in 1..=10_000 {
        let p = i as f64 / 10_000.0;
        let h = holder_from_prob(p).unwrap();
        worst = worst.max((prob_from_holder(h).unwrap() - p).abs());
        worst = worst.max((holder_from_prob(prob_from_holder(h).unwrap()).unwrap() - h).abs());
    }
    let half = holder_from_prob(1.0 / 3.0).unwrap();
    verdict(worst <= 1e-12 && (half - 0.5).abs() <= 1e-12, format!("max roundtrip error {worst:.2e}; H(1/3) = {half}"))
}

/// Each criterion may reuse embeddings built by earlier ones.
type Criterion = Box<dyn FnOnce(&mut Vec<Embedding>) -> Verdict>;

fn main() -> ExitCode {
    let mut embeddings = Vec::new();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("exhaustive martingale oracle", Box::new(|_| exhaustive_martingale())),
        ("closed-form equivalence", Box::new(|_| closed_form_equivalence())),
        ("size control", Box::new(|_| size_control())),
        ("GBM growth limit", Box::new(|_| gbm_growth_limit())),
        ("Markov growth on fBm", Box::new(markov_growth_fbm)),
        ("direction independence under the martingale", Box::new(direction_independence)),
        ("zero-cost equivalence", Box::new(zero_cost_equivalence)),
        ("cost-optimizer correctness", Box::new(|_| cost_optimizer())),
        ("diagnostics roundtrip", Box::new(|_| holder_roundtrip())),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let v = check(&mut embeddings);
        let secs = start.elapsed().as_secs_f64();
        println!("{} {name}: {} [{secs:.1}s]", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += !v.pass as usize;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
