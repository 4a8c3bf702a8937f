use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gridbet::report::{
    write_capital, write_cost_run, write_embedding, write_rows, write_stats, CostLevelRow, CriticalCostRow, OutcomeRow,
};
use gridbet::{
    bonferroni, critical_cost, embed, empirical_probs, generate_fbm_exp, generate_gbm, load_price_csv, path_stats,
    run as run_strategy, run_markov_with_costs, run_max_test, run_stopping_test, CostParams, Embedding, Grid,
    PricePath, StrategyKind, TestConfig, TestOutcome,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{grid_tag, RunConfig, Source};
use crate::error::CliError;

pub fn load_path(cfg: &RunConfig) -> Result<PricePath, CliError> {
    let path = match &cfg.source {
        Source::File { path } => {
            let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
            load_price_csv(std::io::BufReader::new(file), &cfg.columns, &cfg.label)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        s @ Source::Gbm { .. } => generate_gbm(&s.gbm_params(cfg.seed).expect("gbm")).map_err(CliError::from_input)?,
        s @ Source::Fbm { .. } => {
            generate_fbm_exp(&s.fbm_params(cfg.seed).expect("fbm")).map_err(CliError::from_input)?
        }
    };
    Ok(path.with_label(cfg.label.clone()))
}

struct Run {
    cfg: RunConfig,
    path: PricePath,
    embeddings: Vec<Embedding>,
    files: Vec<PathBuf>,
}

impl Run {
    fn start(cfg: RunConfig) -> Result<Self, CliError> {
        let path = load_path(&cfg)?;
        let grids = cfg
            .etas
            .iter()
            .map(|&eta| Grid::from_eta(eta).map_err(|e| CliError::Config(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let embeddings = grids
            .par_iter()
            .map(|&g| embed(&path, g, cfg.horizon))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::from_input)?;
        fs::create_dir_all(&cfg.out)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", cfg.out.display())))?;
        Ok(Self { cfg, path, embeddings, files: Vec::new() })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.cfg.out.join(name);
        let file = File::create(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    fn metadata(&self, e: &Embedding) -> Vec<(&'static str, String)> {
        vec![
            ("series", self.path.label().to_string()),
            ("eta", e.grid.eta.to_string()),
            ("delta", e.grid.delta.to_string()),
            ("rho", e.grid.rho.to_string()),
            ("n_star", e.n_star().to_string()),
        ]
    }

    fn grid_summary(&self) -> Vec<Value> {
        self.embeddings
            .iter()
            .map(|e| {
                let stats = path_stats(e).ok();
                json!({
                    "eta": e.grid.eta,
                    "tag": grid_tag(e.grid.eta),
                    "n_star": e.n_star(),
                    "total_variation": stats.map(|s| s.tv),
                    "net_log_change": stats.map(|s| s.l),
                    "zeta": stats.map(|s| s.zeta),
                })
            })
            .collect()
    }

    fn finish(mut self, command: &str, results: Value) -> Result<(), CliError> {
        let summary_path = self.cfg.out.join("summary.json");
        self.files.push(summary_path.clone());
        let summary = json!({
            "command": command,
            "config": &self.cfg,
            "series": self.path.label(),
            "samples": self.path.len(),
            "grids": self.grid_summary(),
            "results": results,
            "files": self.files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        });
        let text = serde_json::to_string_pretty(&summary).map_err(CliError::output)?;
        fs::write(&summary_path, text + "\n").map_err(CliError::output)
    }
}

fn out_err(e: gridbet::Error) -> CliError {
    CliError::output(e)
}

pub fn cmd_embed(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg)?;
    for i in 0..run.embeddings.len() {
        let e = run.embeddings[i].clone();
        let tag = grid_tag(e.grid.eta);
        let mut meta = run.metadata(&e);
        meta.push(("start_time", e.start_time.to_string()));
        meta.push(("start_price", e.start_price.to_string()));
        meta.push(("horizon", run.cfg.horizon.map_or("none".into(), |h| h.to_string())));
        let w = run.create(&format!("embedding_{tag}.csv"))?;
        write_embedding(w, &e, &meta).map_err(out_err)?;
        println!("eta={} ({tag}): n* = {}", e.grid.eta, e.n_star());
    }
    run.finish("embed", Value::Null)
}

#[derive(Serialize)]
struct TestRecord {
    eta: f64,
    strategy: StrategyKind,
    outcome: TestOutcome,
}

/// Stopping test for every (grid, strategy); writes capital and statistics
/// series and returns the outcome records.
fn run_tests(run: &mut Run, num_tests: usize) -> Result<Vec<TestRecord>, CliError> {
    let config = TestConfig::new(run.cfg.alpha)
        .and_then(|c| c.with_num_tests(num_tests))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let jobs: Vec<(usize, StrategyKind)> =
        (0..run.embeddings.len()).flat_map(|i| run.cfg.strategies.iter().map(move |&s| (i, s))).collect();
    let processes: Vec<_> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let e = &run.embeddings[i];
            let cp = run_strategy(s, e, &run.cfg.params(&e.grid));
            // Same verdict and first crossing as the stopping test; the p-value
            // uses the maximum over every round instead of stopping at 1/alpha.
            let outcome = run_max_test(&cp, &config.with_horizon(e.n_star()))
                .expect("horizon equals the number of rounds")
                .with_round_times(|n| e.round_time(n));
            (i, cp, outcome)
        })
        .collect();

    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, e) in run.embeddings.clone().iter().enumerate() {
        let stats = empirical_probs(e);
        let tag = grid_tag(e.grid.eta);
        let w = run.create(&format!("stats_{tag}.csv"))?;
        write_stats(w, &stats, &run.metadata(e)).map_err(out_err)?;
        for (_, cp, outcome) in processes.iter().filter(|(j, _, _)| *j == i) {
            let mut meta = run.metadata(e);
            meta.push(("strategy", cp.strategy.to_string()));
            meta.push(("alpha", run.cfg.alpha.to_string()));
            meta.push(("threshold", config.threshold().to_string()));
            let w = run.create(&format!("capital_{}_{tag}.csv", cp.strategy))?;
            write_capital(w, cp, &meta).map_err(out_err)?;
            rows.push(OutcomeRow::new(run.path.label(), e, cp, outcome, &stats));
            println!(
                "eta={} {:>6}: n* = {:>7}, max K = {:.4e}, p = {:.4e}, fn = {}{}",
                e.grid.eta,
                cp.strategy.to_string(),
                e.n_star(),
                outcome.max_capital(),
                outcome.p_value,
                outcome.first_crossing_round.map_or("-".into(), |n| n.to_string()),
                if outcome.rejected { "  rejected" } else { "" },
            );
            records.push(TestRecord { eta: e.grid.eta, strategy: cp.strategy, outcome: outcome.clone() });
        }
    }
    let w = run.create("outcomes.csv")?;
    let meta = [("alpha", run.cfg.alpha.to_string()), ("threshold", config.threshold().to_string())];
    write_rows(w, &rows, &meta).map_err(out_err)?;
    Ok(records)
}

pub fn cmd_test(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg)?;
    let records = run_tests(&mut run, 1)?;
    run.finish("test", json!({ "outcomes": records }))
}

#[derive(Serialize)]
struct SweepRow {
    strategy: String,
    num_tests: usize,
    best_eta: f64,
    min_p: f64,
    combined_p: f64,
    alpha: f64,
    rejected: bool,
}

pub fn cmd_sweep(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg)?;
    let m = run.embeddings.len();
    let records = run_tests(&mut run, m)?;
    let mut rows = Vec::new();
    for &s in &run.cfg.strategies {
        let family: Vec<&TestRecord> = records.iter().filter(|r| r.strategy == s).collect();
        let outcomes: Vec<TestOutcome> = family.iter().map(|r| r.outcome.clone()).collect();
        let b = bonferroni(&outcomes, run.cfg.alpha).map_err(|e| CliError::Config(e.to_string()))?;
        println!(
            "{s}: min p = {:.4e} at eta={}, Bonferroni p = {:.4e} over {} grids{}",
            b.min_p,
            family[b.best].eta,
            b.combined_p,
            b.num_tests,
            if b.rejected { "  rejected" } else { "" }
        );
        rows.push(SweepRow {
            strategy: s.to_string(),
            num_tests: b.num_tests,
            best_eta: family[b.best].eta,
            min_p: b.min_p,
            combined_p: b.combined_p,
            alpha: b.alpha,
            rejected: b.rejected,
        });
    }
    let w = run.create("sweep.csv")?;
    write_rows(w, &rows, &[("series", run.path.label().to_string())]).map_err(out_err)?;
    run.finish("sweep", json!({ "outcomes": records, "combined": rows }))
}

/// Cost analysis per grid. Capitals and holding rounds are reported at the
/// first round where the frictionless Markov capital reaches `1/alpha`, or
/// at the last round when it never does.
pub fn cmd_costs(cfg: RunConfig) -> Result<(), CliError> {
    let mut run = Run::start(cfg)?;
    let config = TestConfig::new(run.cfg.alpha).map_err(|e| CliError::Config(e.to_string()))?;
    for e in &run.embeddings {
        let params = run.cfg.params(&e.grid);
        for &c in &run.cfg.costs {
            CostParams::new(c * e.grid.delta, params, &e.grid).map_err(|err| CliError::Config(err.to_string()))?;
        }
    }

    let mut level_rows = Vec::new();
    let mut critical_rows = Vec::new();
    for e in run.embeddings.clone() {
        let tag = grid_tag(e.grid.eta);
        let params = run.cfg.params(&e.grid);
        let frictionless = run_strategy(StrategyKind::Markov, &e, &params);
        let outcome = run_stopping_test(&frictionless, &config);
        let (round, round_kind) = match outcome.first_crossing_round {
            Some(n) => (n, "first_crossing"),
            None => (e.n_star(), "final"),
        };
        let runs: Vec<_> =
            run.cfg.costs.par_iter().map(|&c| run_markov_with_costs(&e, &params, c * e.grid.delta)).collect();
        let costs = run.cfg.costs.clone();
        for (cr, &c) in runs.iter().zip(&costs) {
            let mut meta = run.metadata(&e);
            meta.push(("unit_cost", cr.c.to_string()));
            meta.push(("unit_cost_over_delta", c.to_string()));
            meta.push(("report_round", round.to_string()));
            let w = run.create(&format!("cost_{tag}_c{c}.csv"))?;
            write_cost_run(w, cr, &meta).map_err(out_err)?;
            level_rows.push(CostLevelRow::new(run.path.label(), e.grid.delta, cr, round));
            println!(
                "eta={} c={c}δ: K({round_kind} round {round}) = {:.4e}, holds = {}{}",
                e.grid.eta,
                cr.capital_at(round),
                cr.hold_rounds_through(round),
                cr.ruined_at.map_or(String::new(), |n| format!(", ruined at round {n}")),
            );
        }
        let cc = critical_cost(&e, &params, Some(round)).map_err(|err| CliError::Config(err.to_string()))?;
        println!("eta={}: critical cost c* = {}", e.grid.eta, cc.delta_units());
        critical_rows.push(CriticalCostRow::new(run.path.label(), e.grid.eta, &cc));
    }
    let meta = [("alpha", run.cfg.alpha.to_string())];
    let w = run.create("cost_levels.csv")?;
    write_rows(w, &level_rows, &meta).map_err(out_err)?;
    let w = run.create("critical_costs.csv")?;
    write_rows(w, &critical_rows, &meta).map_err(out_err)?;
    run.finish("costs", json!({ "cost_levels": level_rows, "critical_costs": critical_rows }))
}

/// Writes the generated or loaded path as `time,price`.
pub fn cmd_simulate(cfg: RunConfig) -> Result<(), CliError> {
    let path = load_path(&cfg)?;
    fs::create_dir_all(&cfg.out).map_err(CliError::output)?;
    let file_path = cfg.out.join("path.csv");
    let mut w = BufWriter::new(File::create(&file_path).map_err(CliError::output)?);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "# series: {}", path.label())?;
        writeln!(w, "# seed: {}", cfg.seed)?;
        writeln!(w, "time,price")?;
        for (t, p) in path.timestamps().iter().zip(path.prices()) {
            writeln!(w, "{t},{p}")?;
        }
        w.flush()
    };
    body().map_err(CliError::output)?;
    println!("wrote {} samples to {}", path.len(), file_path.display());
    Ok(())
}

/// Per-kind record files merged by `report`, with the table each feeds.
const REPORT_KINDS: [(&str, &str); 4] = [
    ("outcomes.csv", "table_outcomes.csv"),
    ("cost_levels.csv", "table_cost_levels.csv"),
    ("critical_costs.csv", "table_critical_costs.csv"),
    ("sweep.csv", "table_sweep.csv"),
];

/// Concatenates record files of several run directories, prefixing a `run` column.
pub fn cmd_report(dirs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    if dirs.is_empty() {
        return Err(CliError::Config("report needs at least one run directory".into()));
    }
    fs::create_dir_all(out).map_err(CliError::output)?;
    for (source, target) in REPORT_KINDS {
        let mut header: Option<csv::StringRecord> = None;
        let mut rows = Vec::new();
        for dir in dirs {
            let path = dir.join(source);
            if !path.exists() {
                continue;
            }
            let mut reader = csv::ReaderBuilder::new()
                .comment(Some(b'#'))
                .from_path(&path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let h = reader.headers().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?.clone();
            match &header {
                Some(prev) if *prev != h => {
                    return Err(CliError::Input(format!("{}: columns differ from earlier runs", path.display())))
                }
                _ => header = Some(h),
            }
            let run_name = dir.file_name().map_or(dir.to_string_lossy(), |n| n.to_string_lossy()).into_owned();
            for rec in reader.records() {
                let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                let mut row = vec![run_name.clone()];
                row.extend(rec.iter().map(str::to_string));
                rows.push(row);
            }
        }
        let Some(header) = header else { continue };
        let mut w = csv::Writer::from_path(out.join(target)).map_err(CliError::output)?;
        let mut cols = vec!["run".to_string()];
        cols.extend(header.iter().map(str::to_string));
        w.write_record(&cols).map_err(CliError::output)?;
        for row in &rows {
            w.write_record(row).map_err(CliError::output)?;
        }
        w.flush().map_err(CliError::output)?;
        println!("{}: {} rows", target, rows.len());
    }
    Ok(())
}
