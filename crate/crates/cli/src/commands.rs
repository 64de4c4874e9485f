//! One function per subcommand, each taking the resolved configuration.

use std::path::Path;

use sac_core::analysis::{
    evaluate_classifier, evaluate_oracle, mismatch_mc, multiplier_error_table, regime_sweep, snr_experiment, BlockId,
    Evaluation, SweepResult, SweepSetup,
};
use sac_core::blocks::wta;
use sac_core::network::{train_with_history, ACTIVATION_SPAN};
use sac_core::{Activation, BlockParams, MismatchSpec, SacNetwork, SacUnit, ShapeKind, TrainConfig};

use crate::config::{Grid, RunConfig};
use crate::data::load_dataset;
use crate::error::CliError;
use crate::model::{read_network, write_network};
use crate::output::{emit, Cell, Table};

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command.as_str() {
        "shape" => shape(cfg),
        "block" => block(cfg),
        "wta" => wta_sweep(cfg),
        "mul-error" => mul_error(cfg),
        "snr" => snr(cfg),
        "mismatch" => mismatch(cfg),
        "train" => train(cfg),
        "eval" => eval(cfg),
        other => Err(CliError::Usage(format!("unknown command `{other}`"))),
    }
}

fn kinds(cfg: &RunConfig) -> Result<Vec<ShapeKind>, CliError> {
    if cfg.families.is_empty() {
        return Err(CliError::Usage(String::from("--families needs at least one family")));
    }
    cfg.families
        .iter()
        .map(|f| ShapeKind::from_id(f).ok_or_else(|| CliError::Usage(format!("unknown family `{f}`"))))
        .collect()
}

fn first_kind(cfg: &RunConfig) -> Result<ShapeKind, CliError> {
    Ok(kinds(cfg)?[0])
}

fn temperature(cfg: &RunConfig) -> Result<f64, CliError> {
    cfg.temperatures.first().copied().ok_or_else(|| CliError::Usage(String::from("--temps needs a value")))
}

fn setup(cfg: &RunConfig) -> SweepSetup {
    SweepSetup {
        spline_count: cfg.spline_count(),
        c: cfg.c,
        k: cfg.k.unwrap_or(ACTIVATION_SPAN * cfg.c),
        weight: cfg.weight,
        relu_threshold: cfg.threshold,
    }
}

/// `x`, one column per series, then the normalized copies.
fn sweep_table(r: &SweepResult, prefix: &str, single_temperature: bool) -> Table {
    let names: Vec<String> = r
        .series
        .iter()
        .map(|s| {
            if single_temperature {
                format!("{prefix}_{}", s.family.id())
            } else {
                format!("{prefix}_{}_{}C", s.family.id(), s.celsius)
            }
        })
        .collect();
    let mut columns = vec![String::from("x")];
    columns.extend(names.iter().cloned());
    columns.extend(names.iter().map(|n| format!("{n}_norm")));
    let mut t = Table::new(columns);
    let norm: Vec<Vec<f64>> = r.series.iter().map(|s| s.normalized()).collect();
    for (i, &x) in r.variable.iter().enumerate() {
        let mut row = vec![Cell::from(x)];
        row.extend(r.series.iter().map(|s| Cell::from(s.values[i])));
        row.extend(norm.iter().map(|n| Cell::from(n[i])));
        t.push(row);
    }
    t
}

fn sweep(cfg: &RunConfig, block: BlockId, prefix: &str) -> Result<(), CliError> {
    let grid = Grid::parse(&cfg.grid)?.points();
    let r = regime_sweep(block, &grid, &kinds(cfg)?, &cfg.temperatures, &setup(cfg))?;
    eprintln!("max pairwise normalized deviation: {:.6}", r.max_pairwise_deviation());
    emit(&sweep_table(&r, prefix, cfg.temperatures.len() == 1).render(cfg), cfg.out.as_deref())
}

fn shape(cfg: &RunConfig) -> Result<(), CliError> {
    sweep(cfg, BlockId::Proto, "h")
}

fn block(cfg: &RunConfig) -> Result<(), CliError> {
    let id = BlockId::parse(&cfg.block)?;
    sweep(cfg, id, id.id())
}

fn wta_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Usage(String::from("--inputs needs at least one value")));
    }
    let budgets = Grid::parse(&cfg.budgets)?;
    if budgets.lo < 0.0 {
        return Err(CliError::Usage(String::from("budgets must be >= 0")));
    }
    let unit = SacUnit::for_regime(1, cfg.c, first_kind(cfg)?, temperature(cfg)?)?;
    let p = BlockParams::new(unit)?;
    let mut columns: Vec<String> = ["C", "h", "M", "winner"].map(String::from).to_vec();
    columns.extend((0..cfg.inputs.len()).map(|i| format!("out_{i}")));
    let mut t = Table::new(columns);
    for c in budgets.points() {
        let r = wta(&cfg.inputs, c, &p)?;
        let mut row = vec![Cell::from(c), Cell::from(r.h), Cell::from(r.winner_count), Cell::from(r.winner_index)];
        row.extend(r.outputs.iter().map(|&o| Cell::from(o)));
        t.push(row);
    }
    emit(&t.render(cfg), cfg.out.as_deref())
}

fn mul_error(cfg: &RunConfig) -> Result<(), CliError> {
    let rows = multiplier_error_table(&cfg.spline_counts, cfg.c, first_kind(cfg)?, cfg.grid_n)?;
    let mut t = Table::new(["S", "C", "grid_n", "max_error_pct", "avg_abs_error_pct", "error_bias_pct", "std_dev_pct"]);
    for r in rows {
        t.push(vec![
            r.spline_count.into(),
            r.c.into(),
            r.grid_n.into(),
            r.max_error_pct.into(),
            r.avg_abs_error_pct.into(),
            r.error_bias_pct.into(),
            r.std_dev_pct.into(),
        ]);
    }
    emit(&t.render(cfg), cfg.out.as_deref())
}

fn snr(cfg: &RunConfig) -> Result<(), CliError> {
    let r = snr_experiment(cfg.amplitude, cfg.gain, cfg.n_in, cfg.n_ckt, cfg.trials.unwrap_or(100_000), cfg.seed)?;
    let mut t = Table::new(["trials", "amplitude", "gain", "n_in", "n_ckt", "snr_single", "snr_parallel", "ratio"]);
    t.push(vec![
        r.trials.into(),
        r.amplitude.into(),
        r.gain.into(),
        r.n_in_sigma.into(),
        r.n_ckt_sigma.into(),
        r.snr_single.into(),
        r.snr_parallel.into(),
        r.ratio.into(),
    ]);
    emit(&t.render(cfg), cfg.out.as_deref())
}

fn mismatch(cfg: &RunConfig) -> Result<(), CliError> {
    let block = BlockId::parse(&cfg.block)?;
    let grid = Grid::parse(&cfg.grid)?.points();
    let kind = first_kind(cfg)?;
    let trials = cfg.trials.unwrap_or(200);
    let mut t = Table::new(["block", "family", "gain_sigma", "offset_sigma", "trials", "mean_deviation_pct", "max_deviation_pct"]);
    for &sigma in &cfg.gain_sigmas {
        let spec = MismatchSpec::new(sigma, cfg.offset_sigma, cfg.seed)?;
        let m = mismatch_mc(block, spec, trials, &grid, kind, &setup(cfg))?;
        t.push(vec![
            block.id().into(),
            kind.id().into(),
            sigma.into(),
            cfg.offset_sigma.into(),
            trials.into(),
            m.mean_deviation_pct.into(),
            m.max_deviation_pct.into(),
        ]);
    }
    emit(&t.render(cfg), cfg.out.as_deref())
}

/// Layer sizes from `a-b-c`.
pub fn parse_topology(s: &str) -> Result<Vec<usize>, CliError> {
    let sizes: Result<Vec<usize>, _> = s.split('-').map(|p| p.trim().parse::<usize>()).collect();
    match sizes {
        Ok(v) if v.len() >= 2 && !v.contains(&0) => Ok(v),
        _ => Err(CliError::Usage(format!("topology `{s}` is not like 2-4-1"))),
    }
}

fn train(cfg: &RunConfig) -> Result<(), CliError> {
    let out = cfg.out.as_deref().ok_or_else(|| CliError::Usage(String::from("train needs --out <net.json>")))?;
    let data = load_dataset(cfg)?;
    let sizes = parse_topology(&cfg.topology)?;
    if sizes[0] != data.dim() {
        return Err(CliError::Data(format!("dataset has {} features, topology expects {}", data.dim(), sizes[0])));
    }
    let hidden = Activation::from_id(&cfg.hidden).ok_or_else(|| CliError::Usage(format!("unknown activation `{}`", cfg.hidden)))?;
    let unit = SacUnit::for_regime(cfg.spline_count(), cfg.c, first_kind(cfg)?, temperature(cfg)?)?;
    let params = BlockParams::with_k(unit, cfg.k.unwrap_or(0.5 * cfg.c))?;
    let net = SacNetwork::random(&sizes, hidden, &vec![params; sizes.len() - 1], cfg.seed)?;
    let mismatch = (cfg.mismatch_sigma > 0.0).then(|| MismatchSpec::new(cfg.mismatch_sigma, 0.0, cfg.seed)).transpose()?;
    let tc = TrainConfig {
        learning_rate: cfg.learning_rate,
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        weight_clip: cfg.weight_clip,
        mismatch_during_training: mismatch,
        momentum: cfg.momentum,
        ..TrainConfig::default()
    };
    let (net, history) = train_with_history(&net, &data, &tc)?;
    write_network(&net, Path::new(out))?;
    eprintln!("train accuracy: {:.4}", net.accuracy(&data)?);
    if let Some(log) = cfg.log.as_deref() {
        let mut t = Table::new(["epoch", "loss"]);
        for h in history {
            t.push(vec![h.epoch.into(), h.loss.into()]);
        }
        emit(&t.render(cfg), Some(log))?;
    }
    Ok(())
}

fn eval(cfg: &RunConfig) -> Result<(), CliError> {
    let path = cfg.net.as_deref().ok_or_else(|| CliError::Usage(String::from("eval needs --net <net.json>")))?;
    let net = read_network(Path::new(path))?;
    let data = load_dataset(cfg)?;
    let mut results: Vec<Evaluation> = evaluate_classifier(&net, &data, &kinds(cfg)?)?;
    if cfg.oracle {
        results.push(evaluate_oracle(&net, &data)?);
    }
    let mut t = Table::new(["label", "accuracy", "samples", "confusion"]);
    for e in results {
        let confusion = e
            .confusion
            .iter()
            .map(|r| r.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(";");
        t.push(vec![e.label.into(), e.accuracy.into(), data.len().into(), confusion.into()]);
    }
    emit(&t.render(cfg), cfg.out.as_deref())
}
