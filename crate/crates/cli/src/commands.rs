//! Subcommand implementations. Each returns `Ok(false)` when some cells failed
//! but the rest of the outputs were still written.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use graphsig::analysis::{
    analytic_cell, density_overlap_1d, homophily_stats, mixture_demo, run_monte_carlo, unimodal_demo, Aggregator,
    Density1d, ExperimentConfig, OverlapAggregation, OverlapGrid,
};
use graphsig::classify::{graph_agnostic_deflection, optimal_alpha_closed_form, optimize_alpha_grid};
use graphsig::model::DegreePriors;
use graphsig::synthgraph::{generate_dcsbm, load_graph};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{csv_writer, num, opt, Manifest};
use crate::{BoundArgs, DemoArgs, HomophilyArgs, RunArgs};

fn load_config(path: &Path, seed: Option<u64>, trials: Option<u64>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut config =
        ExperimentConfig::from_json_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = trials {
        config.trials = t;
    }
    config.validate()?;
    Ok(config)
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn simulate(args: &RunArgs) -> Result<bool> {
    let config = load_config(&args.config, args.seed, args.trials)?;
    if config.aggregators.is_empty() {
        bail!("nothing to simulate: the config lists no aggregators");
    }
    prepare_dir(&args.out)?;
    let start = Instant::now();
    let result = run_monte_carlo(&config)?;
    info!("{} cells in {:.1}s", result.cells.len(), start.elapsed().as_secs_f64());

    let mut errors = csv_writer(&args.out.join("errors.csv"))?;
    errors.write_record([
        "aggregator", "case", "p_h", "degree", "trials", "error", "stderr", "bound", "alpha_star", "note",
    ])?;
    let mut deflections = csv_writer(&args.out.join("deflections.csv"))?;
    deflections.write_record(["aggregator", "case", "p_h", "degree", "m", "l", "gamma"])?;
    for c in &result.cells {
        errors.write_record([
            c.aggregator.name().to_string(),
            c.case.clone(),
            num(c.p_h),
            c.degree.to_string(),
            c.trials.to_string(),
            num(c.error_rate),
            num(c.stderr),
            opt(c.bound),
            opt(c.alpha_star),
            c.note(),
        ])?;
        let m = c.deflection.num_classes();
        for a in 0..m {
            for b in (a + 1)..m {
                deflections.write_record([
                    c.aggregator.name().to_string(),
                    c.case.clone(),
                    num(c.p_h),
                    c.degree.to_string(),
                    (a + 1).to_string(),
                    (b + 1).to_string(),
                    num(c.deflection.get(a, b)),
                ])?;
            }
        }
    }
    errors.flush()?;
    deflections.flush()?;

    let failures: Vec<String> = result
        .failures
        .iter()
        .map(|f| {
            format!(
                "aggregator={} case={} p_h={} degree={}: {}",
                f.aggregator.name(),
                f.case,
                num(f.p_h),
                f.degree,
                f.message
            )
        })
        .collect();
    for f in &failures {
        eprintln!("cell failed: {f}");
    }
    let mut manifest = Manifest::new("simulate", &config);
    manifest.seed = Some(config.seed);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.cell_count = result.cells.len();
    manifest.outputs = vec!["errors.csv".into(), "deflections.csv".into()];
    manifest.failures = failures;
    manifest.write(&args.out)?;
    Ok(result.failures.is_empty())
}

pub fn optimize_alpha(args: &RunArgs) -> Result<bool> {
    let config = load_config(&args.config, args.seed, args.trials)?;
    prepare_dir(&args.out)?;
    let start = Instant::now();
    let model = config.build_model()?;
    let priors = DegreePriors::from_model(&model);
    let gamma0 = graph_agnostic_deflection(&model)?;
    let sweep = config.sweep()?;
    let points: Vec<_> = sweep
        .iter()
        .flat_map(|pt| config.degrees.iter().map(move |&d| (pt, d)))
        .collect();
    let searches: Vec<_> = points
        .par_iter()
        .map(|&(pt, d)| optimize_alpha_grid(&model, &pt.transition, d, &config.alpha_grid, &priors))
        .collect();

    let mut best = csv_writer(&args.out.join("alpha.csv"))?;
    best.write_record(["case", "p_h", "degree", "alpha_star", "bound", "alpha_closed_form"])?;
    let mut curve = csv_writer(&args.out.join("alpha_curve.csv"))?;
    curve.write_record(["case", "p_h", "degree", "alpha", "bound"])?;
    let mut failures = Vec::new();
    for (&(pt, d), search) in points.iter().zip(searches) {
        let search = match search {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("case={} p_h={} degree={d}: {e}", pt.case, num(pt.p_h)));
                continue;
            }
        };
        let p = &pt.transition;
        let closed = (p.order() == 2 && p.get(0, 0) == p.get(1, 1))
            .then(|| optimal_alpha_closed_form(p.get(0, 0), gamma0.get(0, 1)).ok())
            .flatten();
        best.write_record([
            pt.case.clone(),
            num(pt.p_h),
            d.to_string(),
            num(search.alpha),
            num(search.objective),
            opt(closed),
        ])?;
        for (a, b) in &search.curve {
            curve.write_record([pt.case.clone(), num(pt.p_h), d.to_string(), num(*a), num(*b)])?;
        }
    }
    best.flush()?;
    curve.flush()?;
    for f in &failures {
        eprintln!("cell failed: {f}");
    }
    let mut manifest = Manifest::new("optimize-alpha", &config);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.cell_count = points.len() - failures.len();
    manifest.outputs = vec!["alpha.csv".into(), "alpha_curve.csv".into()];
    manifest.failures = failures;
    manifest.write(&args.out)?;
    Ok(manifest.failures.is_empty())
}

#[derive(Serialize)]
struct HomophilyInputs<'a> {
    edges: &'a Path,
    labels: &'a Path,
    allow_unlabeled: bool,
}

pub fn homophily(args: &HomophilyArgs) -> Result<bool> {
    let start = Instant::now();
    let loaded = load_graph(&args.edges, &args.labels, None, args.allow_unlabeled)?;
    if loaded.self_loops_dropped + loaded.duplicate_edges_dropped > 0 {
        warn!(
            "dropped {} self-loops and {} duplicate edges",
            loaded.self_loops_dropped, loaded.duplicate_edges_dropped
        );
    }
    if loaded.unlabeled_nodes > 0 {
        warn!("{} nodes have no label and are excluded", loaded.unlabeled_nodes);
    }
    let graph = &loaded.graph;
    let report = homophily_stats(graph)?;
    prepare_dir(&args.out)?;

    let mut rows = csv_writer(&args.out.join("homophily.csv"))?;
    rows.write_record(["degree", "count", "mean_kappa", "std_kappa"])?;
    for r in &report.per_degree {
        rows.write_record([r.degree.to_string(), r.count.to_string(), num(r.mean_kappa), num(r.std_kappa)])?;
    }
    let kappas: Vec<f64> = report.per_node.iter().flatten().copied().collect();
    let var = kappas.iter().map(|k| (k - report.global).powi(2)).sum::<f64>() / kappas.len() as f64;
    rows.write_record([
        "global".to_string(),
        report.nodes_used.to_string(),
        num(report.global),
        num(var.sqrt()),
    ])?;
    rows.flush()?;

    let mut nodes = csv_writer(&args.out.join("kappa.csv"))?;
    nodes.write_record(["node_id", "degree", "kappa"])?;
    for (i, k) in report.per_node.iter().enumerate() {
        if let Some(k) = k {
            nodes.write_record([graph.node_id(i).to_string(), graph.degree(i).to_string(), num(*k)])?;
        }
    }
    nodes.flush()?;

    let inputs = HomophilyInputs {
        edges: &args.edges,
        labels: &args.labels,
        allow_unlabeled: args.allow_unlabeled,
    };
    let mut manifest = Manifest::new("homophily", &inputs);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.cell_count = report.per_degree.len();
    manifest.outputs = vec!["homophily.csv".into(), "kappa.csv".into()];
    manifest.write(&args.out)?;
    Ok(true)
}

pub fn gen_graph(args: &RunArgs) -> Result<bool> {
    let config = load_config(&args.config, args.seed, None)?;
    let spec = config.graph.as_ref().context("config has no \"graph\" section (N and degrees)")?;
    let sweep = config.sweep()?;
    if sweep.len() > 1 {
        warn!("config sweeps {} transition matrices; using the first (p_h = {})", sweep.len(), sweep[0].p_h);
    }
    prepare_dir(&args.out)?;
    let start = Instant::now();
    let model = config.build_model()?;
    let (graph, report) = generate_dcsbm(&model, &sweep[0].transition, &spec.degrees, spec.nodes, config.seed)?;
    graph.write_edge_list(&args.out.join("edges.txt"))?;
    graph.write_labels(&args.out.join("labels.csv"))?;
    graph.write_features(&args.out.join("features.csv"))?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    crate::output::write_atomic(&args.out.join("generation.json"), text.as_bytes())?;
    let mut manifest = Manifest::new("gen-graph", &config);
    manifest.seed = Some(config.seed);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.cell_count = 1;
    manifest.outputs = ["edges.txt", "labels.csv", "features.csv", "generation.json"]
        .map(String::from)
        .to_vec();
    manifest.write(&args.out)?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityPair {
    class1: Density1d,
    class2: Density1d,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemoConfig {
    unimodal: Option<DensityPair>,
    mixture: Option<DensityPair>,
    #[serde(default = "equal_priors")]
    priors: [f64; 2],
    grid: Option<OverlapGrid>,
}

fn equal_priors() -> [f64; 2] {
    [0.5, 0.5]
}

pub fn demo_overlap(args: &DemoArgs) -> Result<bool> {
    let config: DemoConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid demo config {}", path.display()))?
        }
        None => DemoConfig {
            unimodal: None,
            mixture: None,
            priors: equal_priors(),
            grid: None,
        },
    };
    let pair = |given: &Option<DensityPair>, (class1, class2): (Density1d, Density1d)| {
        given.clone().unwrap_or(DensityPair { class1, class2 })
    };
    let cases = [
        ("unimodal", pair(&config.unimodal, unimodal_demo())),
        ("mixture", pair(&config.mixture, mixture_demo())),
    ];
    prepare_dir(&args.out)?;
    let start = Instant::now();
    let mut densities = csv_writer(&args.out.join("densities.csv"))?;
    densities.write_record(["panel", "x", "class1", "class2"])?;
    let mut overlaps = csv_writer(&args.out.join("overlap.csv"))?;
    overlaps.write_record(["case", "before", "after"])?;
    for (name, pair) in &cases {
        let mut values = Vec::new();
        for (stage, agg) in [("before", OverlapAggregation::None), ("after", OverlapAggregation::PairwiseMean)] {
            let r = density_overlap_1d(&pair.class1, &pair.class2, agg, config.priors, config.grid)
                .with_context(|| format!("{name} densities"))?;
            let panel = format!("{name}_{stage}");
            for ((x, a), b) in r.grid.iter().zip(&r.class1).zip(&r.class2) {
                densities.write_record([panel.clone(), num(*x), num(*a), num(*b)])?;
            }
            values.push(r.overlap);
        }
        overlaps.write_record([name.to_string(), num(values[0]), num(values[1])])?;
    }
    densities.flush()?;
    overlaps.flush()?;
    let mut manifest = Manifest::new("demo-overlap", &config);
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    manifest.cell_count = 2;
    manifest.outputs = vec!["densities.csv".into(), "overlap.csv".into()];
    manifest.write(&args.out)?;
    Ok(true)
}

pub fn bound(args: &BoundArgs) -> Result<bool> {
    let config = load_config(&args.config, None, None)?;
    let model = config.build_model()?;
    let sweep = config.sweep()?;
    let aggregators = if config.aggregators.is_empty() {
        vec![Aggregator::Agnostic, Aggregator::Wsa, Aggregator::Sca]
    } else {
        let mut a = config.aggregators.clone();
        a.sort();
        a.dedup();
        a
    };
    let degrees = &config.degrees;
    let cells: Vec<_> = aggregators
        .iter()
        .flat_map(|&a| sweep.iter().flat_map(move |pt| degrees.iter().map(move |&d| (a, pt, d))))
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(a, pt, d)| analytic_cell(a, &config, &model, pt, d))
        .collect();

    let sink: Box<dyn std::io::Write> = match &args.out {
        Some(dir) => {
            prepare_dir(dir)?;
            Box::new(std::fs::File::create(dir.join("bound.csv")).context("cannot create bound.csv")?)
        }
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(["aggregator", "case", "p_h", "degree", "alpha", "bound", "min_gamma"])?;
    let mut failures = Vec::new();
    for (&(a, pt, d), r) in cells.iter().zip(results) {
        match r {
            Ok(cell) => w.write_record([
                a.name().to_string(),
                pt.case.clone(),
                num(pt.p_h),
                d.to_string(),
                opt(cell.alpha),
                opt(cell.bound),
                num(cell.deflection.min_pair()),
            ])?,
            Err(e) => failures.push(format!("aggregator={} case={} p_h={} degree={d}: {e}", a.name(), pt.case, num(pt.p_h))),
        }
    }
    w.flush()?;
    for f in &failures {
        eprintln!("cell failed: {f}");
    }
    Ok(failures.is_empty())
}
