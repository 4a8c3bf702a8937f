mod common;

use common::{kl, ln_factorial, oracle_bb_log_capital, oracle_markov_log_capital};
use gridbet::strategies::{
    asymptotic_log_capital, bb_capital_closed, ln_gamma, markov_capital_closed, run_bb_directions,
    run_markov_directions,
};
use gridbet::{kl_divergence, BetaBinomialParams, Counts, Grid};
use proptest::prelude::*;

fn directions(max_len: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 0..max_len)
}

fn prior() -> impl Strategy<Value = BetaBinomialParams> {
    (0.05f64..20.0, 0.05f64..20.0).prop_map(|(a, b)| BetaBinomialParams::new(a, b).unwrap())
}

fn rho() -> impl Strategy<Value = f64> {
    prop_oneof![Just(Grid::dyadic(8).rho), Just(Grid::dyadic(2).rho), 0.05f64..0.95]
}

proptest! {
    #[test]
    fn bb_recursion_matches_oracle(dirs in directions(600), p in prior(), rho in rho()) {
        let lib = run_bb_directions(&dirs, &p, rho).final_log_capital();
        let oracle = oracle_bb_log_capital(&dirs, p.a, p.b, rho);
        prop_assert!((lib - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
    }

    #[test]
    fn markov_recursion_matches_oracle(dirs in directions(600), p in prior(), rho in rho()) {
        let lib = run_markov_directions(&dirs, &p, rho).final_log_capital();
        let oracle = oracle_markov_log_capital(&dirs, p.a, p.b, rho);
        prop_assert!((lib - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
    }

    #[test]
    fn closed_forms_match_recursion(dirs in directions(3000), p in prior(), rho in rho()) {
        let c = Counts::from_directions(&dirs);
        let bb = run_bb_directions(&dirs, &p, rho).final_log_capital();
        prop_assert!((bb - bb_capital_closed(c.heads, c.tails, &p, rho)).abs() < 1e-9);
        let mk = run_markov_directions(&dirs, &p, rho).final_log_capital();
        prop_assert!((mk - markov_capital_closed(c.q11, c.q10, c.q01, c.q00, &p, rho)).abs() < 1e-9);
    }

    #[test]
    fn bb_final_capital_is_order_free(dirs in directions(400), p in prior(), seed in any::<u64>()) {
        let rho = Grid::dyadic(6).rho;
        let mut shuffled = dirs.clone();
        // Fisher-Yates with a splitmix-style sequence.
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let j = (s >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let a = run_bb_directions(&dirs, &p, rho).final_log_capital();
        let b = run_bb_directions(&shuffled, &p, rho).final_log_capital();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn bets_keep_capital_positive(dirs in directions(500), p in prior(), rho in rho()) {
        for cp in [run_bb_directions(&dirs, &p, rho), run_markov_directions(&dirs, &p, rho)] {
            prop_assert_eq!(cp.log_capital.len(), dirs.len() + 1);
            prop_assert_eq!(cp.log_capital[0], 0.0);
            for &nu in &cp.bets {
                prop_assert!(nu > -1.0 / (1.0 - rho) && nu < 1.0 / rho);
            }
            prop_assert!(cp.log_capital.iter().all(|l| l.is_finite()));
        }
    }

    #[test]
    fn markov_never_bets_in_round_one(dirs in prop::collection::vec(any::<bool>(), 1..50), p in prior()) {
        let cp = run_markov_directions(&dirs, &p, 0.4);
        prop_assert_eq!(cp.bets[0], 0.0);
        prop_assert_eq!(cp.log_capital[1], 0.0);
    }

    #[test]
    fn kl_matches_reference(p in 0.0f64..=1.0, q in 0.001f64..0.999) {
        let d = kl_divergence(p, q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - kl(p, q)).abs() < 1e-12);
    }
}

#[test]
fn ln_gamma_against_factorials() {
    for n in 1..=2000u64 {
        let lg = ln_gamma(n as f64 + 1.0);
        let exact = ln_factorial(n);
        assert!((lg - exact).abs() <= 1e-10 * exact.max(1.0), "n = {n}: {lg} vs {exact}");
    }
}

#[test]
fn exhaustive_martingale_small_n() {
    for n in 0..=10u32 {
        for &(a, b) in &[(1.0, 1.0), (0.3, 4.0)] {
            let p = BetaBinomialParams::new(a, b).unwrap();
            for &rho in &[0.25, 0.5, Grid::dyadic(3).rho] {
                let (mut e_bb, mut e_mk) = (0.0, 0.0);
                for mask in 0u32..(1 << n) {
                    let dirs: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                    let h = mask.count_ones() as i32;
                    let w = rho.powi(h) * (1.0 - rho).powi(n as i32 - h);
                    e_bb += w * run_bb_directions(&dirs, &p, rho).final_log_capital().exp();
                    e_mk += w * run_markov_directions(&dirs, &p, rho).final_log_capital().exp();
                }
                assert!((e_bb - 1.0).abs() < 1e-10, "bb n={n}: {e_bb}");
                assert!((e_mk - 1.0).abs() < 1e-10, "markov n={n}: {e_mk}");
            }
        }
    }
}

/// `log K - (n D - log(n)/2)` settles to a constant for a fixed frequency.
#[test]
fn asymptote_remainder_is_bounded() {
    let p = BetaBinomialParams::new(0.64, 0.64).unwrap();
    let rho = Grid::dyadic(6).rho;
    for &freq in &[0.2, 0.5, 0.7] {
        let remainder = |n: u64| {
            let h = (freq * n as f64).round() as u64;
            bb_capital_closed(h, n - h, &p, rho) - asymptotic_log_capital(n, h, rho)
        };
        let (r4, r5, r6) = (remainder(10_000), remainder(100_000), remainder(1_000_000));
        assert!(r6.abs() < 5.0, "freq {freq}: remainder {r6}");
        assert!((r5 - r6).abs() < 0.01 && (r4 - r5).abs() < 0.05, "freq {freq}: {r4} {r5} {r6}");
    }
}
