//! Sequential tests of the martingale hypothesis for price series.
//!
//! A price path is sampled at the times it crosses a multiplicative grid
//! `S_0 e^{k eta}`. Between crossings the log-price moves by exactly one grid
//! step, so the path reduces to a coin-toss sequence on which betting
//! strategies play. Capital growth of a prudent strategy is evidence against
//! the martingale hypothesis.
//!
//! ```
//! use gridbet::{embed, run_markov, BetaBinomialParams, Grid, PricePath};
//!
//! let prices: Vec<f64> = (0..200).map(|i| 100.0 * (1.0 + 0.02 * (i as f64 * 0.7).sin())).collect();
//! let path = PricePath::from_prices(prices, "toy").unwrap();
//! let grid = Grid::dyadic(7);
//! let emb = embed(&path, grid, None).unwrap();
//! let capital = run_markov(&emb, &BetaBinomialParams::coupled(&grid));
//! assert_eq!(capital.rounds(), emb.n_star());
//! ```

pub mod costs;
pub mod diagnostics;
pub mod embedding;
pub mod error;
pub mod path_model;
pub mod report;
pub mod strategies;

pub use costs::{
    critical_cost, optimal_beta, run_markov_with_costs, CostParams, CostRunResult, CriticalCost, CriticalCostStatus,
    TradeDecision,
};
pub use diagnostics::{empirical_probs, holder_from_prob, path_stats, EmpiricalStats, PathStats};
pub use embedding::{embed, embed_with, grid_from_eta, Counts, CrossingRule, Embedding, Grid, StreamingEmbedder};
pub use error::{Error, Result};
pub use path_model::{
    generate_fbm_exp, generate_gbm, load_price_csv, stream_gbm, stream_segmented_fbm, Column, ColumnSpec, FbmParams,
    FgnSampler, GbmParams, PricePath,
};
pub use sequential_test::{bonferroni, run_max_test, run_stopping_test, BonferroniOutcome, TestConfig, TestOutcome};
pub use strategies::{
    kl_divergence, markov_growth_rate, run, run_bb, run_markov, BetaBinomialParams, CapitalProcess, StrategyKind,
};
