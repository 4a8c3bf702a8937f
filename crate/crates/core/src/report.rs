//! Columnar CSV output.
//!
//! Every file starts with `# key: value` metadata lines followed by a header
//! whose column names carry their units. Undefined values are empty cells.

use std::io::Write;

use serde::Serialize;

use crate::costs::{CostRunResult, CriticalCost, TradeDecision};
use crate::diagnostics::EmpiricalStats;
use crate::embedding::Embedding;
use crate::error::Result;
use crate::sequential_test::TestOutcome;
use crate::strategies::CapitalProcess;

pub type Metadata<'a> = &'a [(&'a str, String)];

fn write_metadata<W: Write>(out: &mut W, metadata: Metadata) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}")?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

/// One row per grid hit.
pub fn write_embedding<W: Write>(mut out: W, embedding: &Embedding, metadata: Metadata) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    let mut w = writer(out);
    w.write_record(["hit", "time", "price", "direction", "waiting_time", "source_index"])?;
    for i in 0..embedding.n_star() {
        w.write_record([
            (i + 1).to_string(),
            embedding.hit_times[i].to_string(),
            embedding.hit_prices[i].to_string(),
            if embedding.directions[i] { "1" } else { "0" }.to_string(),
            embedding.waiting_times[i].to_string(),
            embedding.hit_indices[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Capital process by round, starting at round 0.
pub fn write_capital<W: Write>(mut out: W, process: &CapitalProcess, metadata: Metadata) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    let mut w = writer(out);
    w.write_record(["round", "log_capital", "capital", "bet"])?;
    for (n, &lk) in process.log_capital.iter().enumerate() {
        let bet = n.checked_sub(1).map(|i| process.bets[i]);
        w.write_record([n.to_string(), lk.to_string(), lk.exp().to_string(), opt(bet)])?;
    }
    w.flush()?;
    Ok(())
}

/// Running empirical probabilities and Hölder estimates by round.
pub fn write_stats<W: Write>(mut out: W, stats: &EmpiricalStats, metadata: Metadata) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    let mut w = writer(out);
    w.write_record(["round", "p1", "p11", "p00", "h1", "h0"])?;
    for n in 0..stats.p1.len() {
        w.write_record([
            n.to_string(),
            opt(stats.p1[n]),
            opt(stats.p11[n]),
            opt(stats.p00[n]),
            opt(stats.h1[n]),
            opt(stats.h0[n]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn decision_code(d: TradeDecision) -> &'static str {
    match d {
        TradeDecision::Buy => "buy",
        TradeDecision::Sell => "sell",
        TradeDecision::Hold => "hold",
    }
}

/// Cost-aware capital, trade and exposure by round.
pub fn write_cost_run<W: Write>(mut out: W, run: &CostRunResult, metadata: Metadata) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    let mut w = writer(out);
    w.write_record(["round", "log_capital", "capital", "trade", "decision", "exposure"])?;
    for n in 0..run.log_capital.len() {
        let (trade, decision) = match n.checked_sub(1).and_then(|i| run.trades.get(i).zip(run.decisions.get(i))) {
            Some((t, d)) => (t.to_string(), decision_code(*d).to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            n.to_string(),
            run.log_capital[n].to_string(),
            run.log_capital[n].exp().to_string(),
            trade,
            decision,
            run.exposures[n].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Summary row of a test on one series.
///
/// Capital and empirical statistics are taken at `report_round`: the first
/// crossing round when there is one, the last scanned round otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeRow {
    pub series: String,
    pub eta: f64,
    pub strategy: String,
    pub n_star: usize,
    pub first_crossing_round: Option<usize>,
    pub first_crossing_time: Option<f64>,
    pub report_round: usize,
    pub capital: f64,
    pub max_capital: f64,
    pub final_capital: f64,
    pub p_value: f64,
    pub rejected: bool,
    pub p1: Option<f64>,
    pub p11: Option<f64>,
    pub p00: Option<f64>,
    pub h1: Option<f64>,
    pub h0: Option<f64>,
}

impl OutcomeRow {
    pub fn new(
        series: &str,
        embedding: &Embedding,
        process: &CapitalProcess,
        outcome: &TestOutcome,
        stats: &EmpiricalStats,
    ) -> Self {
        let round = outcome.first_crossing_round.unwrap_or(outcome.rounds_scanned);
        let at = |v: &Vec<Option<f64>>| v.get(round).copied().flatten();
        Self {
            series: series.to_string(),
            eta: embedding.grid.eta,
            strategy: process.strategy.to_string(),
            n_star: embedding.n_star(),
            first_crossing_round: outcome.first_crossing_round,
            first_crossing_time: outcome.first_crossing_time,
            report_round: round,
            capital: process.capital(round),
            max_capital: outcome.max_capital(),
            final_capital: process.final_log_capital().exp(),
            p_value: outcome.p_value,
            rejected: outcome.rejected,
            p1: at(&stats.p1),
            p11: at(&stats.p11),
            p00: at(&stats.p00),
            h1: at(&stats.h1),
            h0: at(&stats.h0),
        }
    }
}

/// Capital of the cost-aware strategy at one cost level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostLevelRow {
    pub series: String,
    /// Cost in units of delta.
    pub c_over_delta: f64,
    pub c: f64,
    pub round: usize,
    pub capital: f64,
    pub hold_rounds: usize,
    pub ruined_at: Option<usize>,
}

impl CostLevelRow {
    pub fn new(series: &str, delta: f64, run: &CostRunResult, round: usize) -> Self {
        Self {
            series: series.to_string(),
            c_over_delta: run.c / delta,
            c: run.c,
            round,
            capital: run.capital_at(round),
            hold_rounds: run.hold_rounds_through(round),
            ruined_at: run.ruined_at,
        }
    }
}

/// Critical cost of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalCostRow {
    pub series: String,
    pub eta: f64,
    pub round: usize,
    pub frictionless_capital: f64,
    pub critical_cost: String,
    pub c: Option<f64>,
    pub capital_at_c: Option<f64>,
    pub hold_rounds_at_c: Option<usize>,
}

impl CriticalCostRow {
    pub fn new(series: &str, eta: f64, cc: &CriticalCost) -> Self {
        let found = cc.c.is_finite();
        Self {
            series: series.to_string(),
            eta,
            round: cc.round,
            frictionless_capital: cc.frictionless_capital,
            critical_cost: cc.delta_units(),
            c: found.then_some(cc.c),
            capital_at_c: found.then_some(cc.capital_at_c),
            hold_rounds_at_c: found.then_some(cc.hold_rounds_at_c),
        }
    }
}

/// Serialises rows with a header derived from the field names.
pub fn write_rows<W: Write, T: Serialize>(mut out: W, rows: &[T], metadata: Metadata) -> Result<()> {
    write_metadata(&mut out, metadata)?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
