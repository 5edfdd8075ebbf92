use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use quantevo_core::calibration::{calibrate as run_tpe, ConvergencePoint, TrialRecord};
use quantevo_core::eval::BacktestEvaluator;
use quantevo_core::evolution::{
    evolve as run_evolution, lineage, mutator_stats, ExternalMutator, Mutator, MutatorStats,
    PerturbMutator, RunEntry, RunRecord,
};
use quantevo_core::forecaster::{calcset, forward_returns, greedy_select, CalcsetConfig};
use quantevo_core::market_data::{split, write_csv, SplitLabel, SplitResult};
use quantevo_core::simulator::LedgerTotals;
use quantevo_core::stats::{
    perf_metrics, AnalysisReport, DailyPnlSeries, IsOosCurve, NullBlock, NullModel, PerfMetrics,
    SizingDecomposition, SHARPE_CONVENTION,
};
use quantevo_core::strategy::StrategyParams;
use quantevo_core::Genome;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{runtime, CliError, GlobalArgs};

pub const SCHEMA_VERSION: u32 = 1;

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.output.dir).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", cfg.output.dir.display()))
    })?;
    Ok(&cfg.output.dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(runtime)?;
    writeln!(w).and_then(|_| w.flush()).map_err(runtime)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn load_splits(cfg: &RunConfig) -> Result<SplitResult, CliError> {
    let series = cfg.load_series()?;
    let spec = cfg.split_spec(&series)?;
    let splits = split(&series, &spec).map_err(|e| CliError::Usage(e.to_string()))?;
    for w in &splits.warnings {
        log::warn!("{w}");
    }
    Ok(splits)
}

fn evaluator(cfg: &RunConfig, g: &GlobalArgs) -> Result<BacktestEvaluator, CliError> {
    let splits = load_splits(cfg)?;
    let mut ev = BacktestEvaluator::prepare(
        &splits,
        &cfg.forecaster,
        cfg.sim,
        cfg.impact,
        StrategyParams::default().to_genome().merged(&cfg.strategy),
    )
    .map_err(runtime)?;
    ev.inner_jobs = g.jobs();
    Ok(ev)
}

#[derive(Debug, Serialize)]
struct SplitSection {
    days: usize,
    totals: LedgerTotals,
    metrics: Option<PerfMetrics>,
    daily: DailyPnlSeries,
    /// Present when the strategy differs from the baseline genome.
    sizing: Option<SizingDecomposition>,
}

#[derive(Debug, Serialize)]
struct BacktestReport {
    schema_version: u32,
    kind: &'static str,
    sharpe_convention: &'static str,
    genome: Genome,
    splits: BTreeMap<String, SplitSection>,
}

fn fmt_opt(x: Option<f64>, prec: usize) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.prec$}"),
        _ => "n/a".into(),
    }
}

pub fn backtest(cfg: &RunConfig, g: &GlobalArgs) -> Result<(), CliError> {
    let ev = evaluator(cfg, g)?;
    let dir = out_dir(cfg)?;
    let labels = g
        .splits
        .clone()
        .unwrap_or_else(|| vec![SplitLabel::Validation, SplitLabel::Test]);
    let baseline = StrategyParams::default().to_genome();
    let custom = ev.base != baseline;

    let mut report = BacktestReport {
        schema_version: SCHEMA_VERSION,
        kind: "backtest",
        sharpe_convention: SHARPE_CONVENTION,
        genome: ev.base.clone(),
        splits: BTreeMap::new(),
    };
    for label in labels {
        let ledger = ev.ledger(&Genome::new(), label).map_err(runtime)?;
        let mut w = create(&dir.join(format!("ledger_{}.csv", label.as_str())))?;
        ledger.write_csv(&mut w).map_err(runtime)?;
        let totals = ledger.totals();
        let daily = DailyPnlSeries::from_ledger(&ledger);
        let sizing = if custom {
            // The full baseline genome replaces every configured override.
            let bt = ev.evaluate(&baseline, label).map_err(runtime)?.totals;
            SizingDecomposition::new(
                bt.pnl_net,
                bt.impact_cost,
                bt.traded_notional,
                totals.pnl_adj,
                totals.traded_notional,
            )
            .ok()
        } else {
            None
        };
        report.splits.insert(
            label.as_str().to_string(),
            SplitSection {
                days: daily.len(),
                totals,
                metrics: perf_metrics(&daily).ok(),
                daily,
                sizing,
            },
        );
    }
    write_json(&dir.join("report.json"), &report)?;

    println!(
        "{:<12}{:>10}{:>16}{:>18}{:>10}{:>8}",
        "split", "sharpe", "pnl_adj", "volume_usd", "win_rate", "fills"
    );
    for (name, s) in &report.splits {
        println!(
            "{:<12}{:>10}{:>16.2}{:>18.0}{:>10}{:>8}",
            name,
            fmt_opt(s.metrics.map(|m| m.sharpe), 3),
            s.totals.pnl_adj,
            s.totals.traded_notional,
            fmt_opt(s.metrics.map(|m| m.win_rate), 3),
            s.totals.trades
        );
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CalibrationReport<'a> {
    schema_version: u32,
    kind: &'static str,
    seed: u64,
    n_trials: usize,
    n_random: usize,
    n_failed: usize,
    best: Option<&'a TrialRecord>,
    /// Best parameters merged over the configured base genome.
    best_genome: Option<Genome>,
    convergence: Vec<ConvergencePoint>,
}

pub fn calibrate(cfg: &RunConfig, g: &GlobalArgs) -> Result<(), CliError> {
    let seed = g.require_seed("calibrate")?;
    let mut tpe = cfg.calibration.tpe;
    tpe.seed = seed;
    let ev = evaluator(cfg, g)?;
    let dir = out_dir(cfg)?;
    let space = cfg.param_space();
    let objective = |genome: &Genome| -> Result<f64, String> {
        ev.evaluate(genome, SplitLabel::Validation)
            .map(|r| r.fitness)
            .map_err(|e| e.to_string())
    };
    let cal =
        run_tpe(&space, objective, &tpe, g.jobs()).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut w = create(&dir.join("trials.jsonl"))?;
    cal.write_jsonl(&mut w)
        .and_then(|_| w.flush())
        .map_err(runtime)?;
    let best = cal.best();
    let report = CalibrationReport {
        schema_version: SCHEMA_VERSION,
        kind: "calibration",
        seed,
        n_trials: cal.trials.len(),
        n_random: tpe.n_random,
        n_failed: cal.trials.iter().filter(|t| t.is_failed()).count(),
        best,
        best_genome: best.map(|b| ev.base.merged(&b.genome)),
        convergence: cal.convergence(),
    };
    write_json(&dir.join("calibration.json"), &report)?;
    match best {
        Some(b) => println!(
            "best validation pnl_adj {:.2} at trial {}",
            b.score(),
            b.trial_index
        ),
        None => println!("all {} trials failed", cal.trials.len()),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvolutionSummary<'a> {
    schema_version: u32,
    kind: &'static str,
    seed: u64,
    generations: u32,
    n_candidates: usize,
    n_failed: usize,
    n_migrations: usize,
    baseline_fitness: Option<f64>,
    best: Option<&'a RunEntry>,
    is_oos: IsOosCurve,
}

pub fn evolve(cfg: &RunConfig, g: &GlobalArgs, generations: Option<u32>) -> Result<(), CliError> {
    let seed = g.require_seed("evolve")?;
    let mut engine = cfg.evolution.engine.clone();
    engine.seed = seed;
    if let Some(n) = generations {
        engine.generations = n;
    }
    let space = cfg.param_space();
    let perturb = PerturbMutator::new(space.clone());
    let externals: Vec<ExternalMutator> = cfg
        .evolution
        .external_mutators
        .iter()
        .map(|m| ExternalMutator {
            name: m.name.clone(),
            command: m.command.clone(),
        })
        .collect();
    let mut mutators: Vec<&dyn Mutator> = Vec::new();
    if cfg.evolution.perturb {
        mutators.push(&perturb);
    }
    mutators.extend(externals.iter().map(|m| m as &dyn Mutator));
    if mutators.is_empty() {
        return Err(CliError::Usage("no mutators enabled".into()));
    }

    let mut ev = evaluator(cfg, g)?;
    // Parallelism goes to whole-candidate evaluation.
    ev.inner_jobs = quantevo_core::Jobs::SEQUENTIAL;
    let dir = out_dir(cfg)?;
    let record = run_evolution(&engine, &ev.base, &space, &ev, &mutators, g.jobs()).map_err(
        |e| match e {
            quantevo_core::evolution::EvolutionError::Config(m) => CliError::Usage(m),
            other => runtime(other),
        },
    )?;

    let mut w = create(&dir.join("run_record.jsonl"))?;
    record
        .write_jsonl(&mut w)
        .and_then(|_| w.flush())
        .map_err(runtime)?;
    let summary = EvolutionSummary {
        schema_version: SCHEMA_VERSION,
        kind: "evolution",
        seed,
        generations: engine.generations,
        n_candidates: record.entries.len(),
        n_failed: record
            .entries
            .iter()
            .filter(|e| e.is_fitness.is_none())
            .count(),
        n_migrations: record.migrations.len(),
        baseline_fitness: record.entries.first().and_then(|e| e.is_fitness),
        best: record.best(),
        is_oos: record.is_oos_curve(),
    };
    write_json(&dir.join("evolution.json"), &summary)?;
    println!(
        "{} candidates; best IS fitness {} (baseline {})",
        summary.n_candidates,
        fmt_opt(summary.best.and_then(|b| b.is_fitness), 2),
        fmt_opt(summary.baseline_fitness, 2)
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct FeatureReport {
    schema_version: u32,
    kind: &'static str,
    horizon: usize,
    max_features: usize,
    corr_cap: f64,
    candidates: Vec<String>,
    selected: Vec<String>,
}

pub fn select_features(cfg: &RunConfig, _g: &GlobalArgs) -> Result<(), CliError> {
    let f = &cfg.features;
    if f.horizon == 0 {
        return Err(CliError::Usage("features.horizon must be positive".into()));
    }
    let splits = load_splits(cfg)?;
    if splits.train.len() < 2 {
        return Err(CliError::Usage("train split is empty".into()));
    }
    let pool = CalcsetConfig {
        windows: f.windows.clone(),
        ..cfg.forecaster.calcset.clone()
    };
    let x = calcset(&splits.train, &pool).map_err(|e| CliError::Usage(e.to_string()))?;
    let target = forward_returns(
        &splits.train.closes(),
        f.horizon,
        cfg.forecaster.target_kind,
    );
    let selected = greedy_select(&x, &target, f.max_features, f.corr_cap);
    let dir = out_dir(cfg)?;
    let report = FeatureReport {
        schema_version: SCHEMA_VERSION,
        kind: "features",
        horizon: f.horizon,
        max_features: f.max_features,
        corr_cap: f.corr_cap,
        candidates: x.names.clone(),
        selected,
    };
    write_json(&dir.join("features.json"), &report)?;
    println!(
        "selected {} of {}: {}",
        report.selected.len(),
        report.candidates.len(),
        report.selected.join(", ")
    );
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunAnalysis {
    schema_version: u32,
    kind: &'static str,
    n_candidates: usize,
    best_id: Option<u64>,
    /// Ancestry of the best candidate, best first.
    best_lineage: Vec<u64>,
    mutator_stats: BTreeMap<String, MutatorStats>,
    #[serde(flatten)]
    report: AnalysisReport,
}

pub fn analyze_record(cfg: &RunConfig, record: &RunRecord) -> Result<RunAnalysis, CliError> {
    let mut report = AnalysisReport::new();
    report.is_oos = Some(record.is_oos_curve());
    let best = record.best();
    if let Some(n) = cfg.analysis.null_model {
        let k = record
            .entries
            .iter()
            .filter(|e| e.is_fitness.is_some())
            .count()
            .max(1);
        let null = NullModel::new(n.pnl0, n.s0, n.window_days)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let block = NullBlock::new(&null, k, best.and_then(|b| b.is_fitness)).map_err(runtime)?;
        report.null_model.insert("validation".into(), block);
        if let (Some(pnl0), Some(days)) = (n.test_pnl0, n.test_days) {
            let test = null.rescaled(pnl0, days);
            let block =
                NullBlock::new(&test, k, best.and_then(|b| b.oos_fitness)).map_err(runtime)?;
            report.null_model.insert("test".into(), block);
        }
    }
    Ok(RunAnalysis {
        schema_version: SCHEMA_VERSION,
        kind: "analysis",
        n_candidates: record.entries.len(),
        best_id: best.map(|b| b.id),
        best_lineage: best.map(|b| lineage(record, b.id)).unwrap_or_default(),
        mutator_stats: mutator_stats(record, cfg.analysis.top_k),
        report,
    })
}

pub fn analyze(cfg: &RunConfig, _g: &GlobalArgs, path: &PathBuf) -> Result<(), CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open run record {}: {e}", path.display())))?;
    let record = RunRecord::read_jsonl(BufReader::new(file))
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let analysis = analyze_record(cfg, &record)?;
    let dir = out_dir(cfg)?;
    write_json(&dir.join("analysis.json"), &analysis)?;
    println!(
        "{:<14}{:>10}{:>10}{:>14}{:>8}{:>10}",
        "mutator", "children", "failures", "improve_rate", "top_k", "lineage"
    );
    for (name, s) in &analysis.mutator_stats {
        println!(
            "{:<14}{:>10}{:>10}{:>14.3}{:>8}{:>10}",
            name, s.children, s.failures, s.improvement_rate, s.top_k, s.lineage_steps
        );
    }
    Ok(())
}

pub fn synth_data(cfg: &RunConfig, g: &GlobalArgs) -> Result<(), CliError> {
    let seed = g.require_seed("synth-data")?;
    let spec = quantevo_core::market_data::SynthSpec {
        seed,
        ..cfg.data.synth.clone().unwrap_or_default()
    };
    let series = quantevo_core::market_data::synthesize(&spec)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let dir = out_dir(cfg)?;
    let path = dir.join("synth.csv");
    let w = create(&path)?;
    write_csv(&series, w).map_err(runtime)?;
    println!("wrote {} bars to {}", series.len(), path.display());
    Ok(())
}
