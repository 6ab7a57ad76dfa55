//! Command-line front end. `run` does the work so tests can drive it
//! without spawning a process.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dimmsb_core::{
    build_omega, common_submatrix, degree_filter, di_mixed_hamming, disp, disp_equivalence, largest_strong_component,
    largest_weak_component, mixed_hamming, prune_zero_degree, sample_adjacency, BiAdjacency, DispOptions,
    MembershipMatrix,
};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::{
    builtin_config, real_data_table, run_experiment_with, write_plot_csv, write_summary_csv, write_table_csv,
    ExperimentConfig, RunOptions,
};
use crate::graphio::{
    declares_rectangular, load_membership, parse_graph, save_dense, save_graph, save_membership, GraphFormat,
    LoadOptions,
};
use crate::provenance::{sha256_hex, Provenance};

#[derive(Debug, Parser)]
#[command(name = "dimmsb", version, about = "Directed mixed-membership network simulation and spectral estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a network from an experiment setting and write it with its truth.
    Simulate(SimulateArgs),
    /// Estimate row and column memberships of a graph.
    Fit(FitArgs),
    /// Compare estimated memberships with the truth.
    Eval(EvalArgs),
    /// Giant component, degree filtering and common-node extraction.
    Preprocess(PreprocessArgs),
    /// Run a simulation experiment and write summary tables.
    Experiment(ExperimentArgs),
    /// Purity and mixing statistics over a range of degree thresholds.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct GraphInput {
    /// Edge list (TSV) or Matrix Market file.
    #[arg(long)]
    pub graph: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<GraphFormat>,
    /// Keep separate row and column label universes. Edge lists with
    /// `#@rows`/`#@cols` directives are rectangular unless `--square` is given.
    #[arg(long, conflicts_with = "square")]
    pub rectangular: bool,
    /// Share one label universe between rows and columns.
    #[arg(long)]
    pub square: bool,
    /// Treat any nonzero weight as an edge instead of rejecting weights other than 0/1.
    #[arg(long)]
    pub loose_weights: bool,
}

impl GraphInput {
    fn load(&self) -> Result<BiAdjacency> {
        let format = self.format.unwrap_or_else(|| GraphFormat::from_path(&self.graph));
        let text = fs::read_to_string(&self.graph).map_err(|e| Error::io(&self.graph, e))?;
        let square = if self.rectangular {
            false
        } else if self.square {
            true
        } else {
            !(format == GraphFormat::EdgeList && declares_rectangular(&text))
        };
        let opts = LoadOptions { square, strict_binary: !self.loose_weights };
        parse_graph(&text, format, &opts)
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment configuration (JSON).
    #[arg(long, required_unless_present = "id", conflicts_with = "id")]
    pub config: Option<PathBuf>,
    /// Built-in experiment 1..7 instead of a config file.
    #[arg(long)]
    pub id: Option<u32>,
    /// Grid point to simulate.
    #[arg(long, default_value_t = 0)]
    pub point: usize,
    /// Sampling seed; defaults to the configuration's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep zero-degree nodes instead of removing them.
    #[arg(long)]
    pub no_prune: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long)]
    pub k: usize,
    /// Use the projection-matrix form of the estimator.
    #[arg(long)]
    pub equivalence: bool,
    /// Seed of the randomized SVD.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub est_r: PathBuf,
    #[arg(long)]
    pub est_c: PathBuf,
    #[arg(long)]
    pub true_r: PathBuf,
    #[arg(long)]
    pub true_c: PathBuf,
    /// Also write the metrics as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub input: GraphInput,
    /// Keep only the largest weakly connected component first.
    #[arg(long)]
    pub giant: bool,
    /// With `--giant`, use the largest strongly connected component instead.
    #[arg(long, requires = "giant")]
    pub strong: bool,
    /// Iterated degree threshold for rows (out-degree) and columns (in-degree).
    #[arg(long, default_value_t = 1)]
    pub min_degree: usize,
    /// Restrict to nodes present as both a row and a column.
    #[arg(long)]
    pub common: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; guessed from the extension when omitted.
    #[arg(long)]
    pub out_format: Option<GraphFormat>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment configuration (JSON).
    #[arg(long, required_unless_present = "id", conflicts_with = "id")]
    pub config: Option<PathBuf>,
    /// Built-in experiment 1..7 instead of a config file.
    #[arg(long)]
    pub id: Option<u32>,
    /// Override the number of repetitions per grid point.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub equivalence: bool,
    /// Worker threads (defaults to DIMMSB_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory for summary.csv, plot.csv and result.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: GraphInput,
    #[arg(long)]
    pub k: usize,
    /// Thresholds as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1")]
    pub min_degree_list: String,
    /// Keep only the largest weakly connected component first.
    #[arg(long)]
    pub giant: bool,
    /// With `--giant`, use the largest strongly connected component instead.
    #[arg(long, requires = "giant")]
    pub strong: bool,
    /// Estimated nodes with largest weight at least `1 - pure_tol` count as pure.
    #[arg(long, default_value_t = 1e-6)]
    pub pure_tol: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Suggestion printed under an error message.
pub fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::Core(dimmsb_core::Error::ZeroDegreeNode { .. }) => {
            Some("remove zero-degree nodes first, e.g. `dimmsb preprocess --min-degree 1`")
        }
        Error::Core(dimmsb_core::Error::RankDeficient { .. } | dimmsb_core::Error::RankCollapse { .. }) => {
            Some("K exceeds the numerical rank of the graph; try a smaller --k")
        }
        _ => None,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Fit(a) => fit(&a),
        Command::Eval(a) => eval(&a),
        Command::Preprocess(a) => preprocess(&a),
        Command::Experiment(a) => experiment(&a),
        Command::Stats(a) => stats(&a),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn load_config(config: Option<&Path>, id: Option<u32>) -> Result<(ExperimentConfig, Vec<u8>)> {
    let cfg = match (config, id) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(id)) => builtin_config(id)?,
        (None, None) => return Err(Error::Config("need --config or --id".into())),
    };
    let canonical = serde_json::to_vec(&cfg)?;
    Ok((cfg, canonical))
}

/// Hash of the command's arguments, for commands without a config file.
fn args_hash(args: &impl std::fmt::Debug) -> String {
    sha256_hex(format!("{args:?}").as_bytes())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let (cfg, canonical) = load_config(args.config.as_deref(), args.id)?;
    cfg.validate()?;
    let point = cfg.grid_point(args.point)?;
    let seed = args.seed.unwrap_or(cfg.base_seed);
    let omega = build_omega(&point.params)?;
    let a = sample_adjacency(&omega, seed)?;
    let pi_r = point.params.pi_r.clone().with_labels(a.row_labels().to_vec())?;
    let pi_c = point.params.pi_c.clone().with_labels(a.col_labels().to_vec())?;
    let (a, pi_r, pi_c) = if args.no_prune { (a, pi_r, pi_c) } else { prune_zero_degree(&a, &pi_r, &pi_c)? };
    let prov = Provenance::new("simulate")
        .with_seed(seed)
        .with_config_hash(&canonical)
        .with("experiment", &cfg.name)
        .with(cfg.grid.axis(), point.value);
    ensure_dir(&args.out)?;
    save_graph(&args.out.join("adjacency.tsv"), &a, GraphFormat::EdgeList, Some(&prov))?;
    save_membership(&args.out.join("pi_r.csv"), &pi_r, Some(&prov))?;
    save_membership(&args.out.join("pi_c.csv"), &pi_c, Some(&prov))?;
    save_dense(&args.out.join("omega.csv"), &omega, Some(&prov))?;
    println!("wrote {}x{} adjacency with {} edges to {}", a.nrows(), a.ncols(), a.nnz(), args.out.display());
    Ok(())
}

#[derive(Serialize)]
struct FitReport<'a> {
    provenance: BTreeMap<&'a str, &'a str>,
    k: usize,
    n_r: usize,
    n_c: usize,
    equivalence: bool,
    singular_values: &'a [f64],
    row_corners: Vec<&'a str>,
    col_corners: Vec<&'a str>,
    diagnostics: &'a BTreeMap<String, f64>,
}

fn provenance_map(p: &Provenance) -> BTreeMap<&str, &str> {
    p.entries().iter().map(|(k, v)| (k.as_str(), v.as_str())).collect()
}

fn fit(args: &FitArgs) -> Result<()> {
    let a = args.input.load()?;
    let mut opts = DispOptions::default();
    if let Some(seed) = args.seed {
        opts.svd.seed = seed;
    }
    let res = if args.equivalence { disp_equivalence(&a, args.k, &opts)? } else { disp(&a, args.k, &opts)? };
    let prov = Provenance::new("fit").with_seed(opts.svd.seed).with("args_sha256", args_hash(args));
    ensure_dir(&args.out)?;
    save_membership(&args.out.join("pi_r_hat.csv"), &res.pi_r_hat, Some(&prov))?;
    save_membership(&args.out.join("pi_c_hat.csv"), &res.pi_c_hat, Some(&prov))?;
    let report = FitReport {
        provenance: provenance_map(&prov),
        k: args.k,
        n_r: a.nrows(),
        n_c: a.ncols(),
        equivalence: args.equivalence,
        singular_values: &res.svd.singular_values,
        row_corners: res.vertex_r.indices.iter().map(|&i| a.row_labels()[i].as_str()).collect(),
        col_corners: res.vertex_c.indices.iter().map(|&j| a.col_labels()[j].as_str()).collect(),
        diagnostics: &res.diagnostics,
    };
    write_file(&args.out.join("diagnostics.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    println!("fitted K={} on {}x{}; wrote {}", args.k, a.nrows(), a.ncols(), args.out.display());
    Ok(())
}

/// Rows of `truth` reordered to match the labels of `estimate`.
fn align_truth(estimate: &MembershipMatrix, truth: &MembershipMatrix) -> Result<MembershipMatrix> {
    let (Some(est), Some(tru)) = (estimate.labels(), truth.labels()) else {
        return Ok(truth.clone());
    };
    if est == tru {
        return Ok(truth.clone());
    }
    let position: HashMap<&str, usize> = tru.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let rows = est
        .iter()
        .map(|l| {
            position
                .get(l.as_str())
                .copied()
                .ok_or_else(|| Error::Config(format!("estimated node '{l}' is missing from the truth")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(truth.select_rows(&rows))
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub di_mhamm: f64,
    pub row_mhamm: f64,
    pub col_mhamm: f64,
}

pub fn evaluate(
    est_r: &MembershipMatrix,
    est_c: &MembershipMatrix,
    true_r: &MembershipMatrix,
    true_c: &MembershipMatrix,
) -> Result<EvalReport> {
    let true_r = align_truth(est_r, true_r)?;
    let true_c = align_truth(est_c, true_c)?;
    Ok(EvalReport {
        di_mhamm: di_mixed_hamming(est_r, &true_r, est_c, &true_c)?,
        row_mhamm: mixed_hamming(est_r, &true_r)?,
        col_mhamm: mixed_hamming(est_c, &true_c)?,
    })
}

fn eval(args: &EvalArgs) -> Result<()> {
    let report = evaluate(
        &load_membership(&args.est_r)?,
        &load_membership(&args.est_c)?,
        &load_membership(&args.true_r)?,
        &load_membership(&args.true_c)?,
    )?;
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(out) = &args.out {
        write_file(out, json.as_bytes())?;
    }
    Ok(())
}

fn preprocess(args: &PreprocessArgs) -> Result<()> {
    let mut a = args.input.load()?;
    eprintln!("loaded {}x{} ({} edges)", a.nrows(), a.ncols(), a.nnz());
    if args.giant {
        a = giant_component(&a, args.strong)?;
        eprintln!("largest {} component: {}x{}", if args.strong { "strong" } else { "weak" }, a.nrows(), a.ncols());
    }
    if args.min_degree > 0 {
        let outcome = degree_filter(&a, args.min_degree);
        if outcome.emptied {
            log::warn!("degree filter at {} removed every row or column", args.min_degree);
        }
        a = outcome.adjacency;
        eprintln!("degree filter {} ({} passes): {}x{}", args.min_degree, outcome.passes, a.nrows(), a.ncols());
    }
    if args.common {
        a = common_submatrix(&a)?;
        eprintln!("common nodes: {}x{}", a.nrows(), a.ncols());
    }
    let prov = Provenance::new("preprocess").with("args_sha256", args_hash(args));
    let format = args.out_format.unwrap_or_else(|| GraphFormat::from_path(&args.out));
    save_graph(&args.out, &a, format, Some(&prov))?;
    println!("{}x{}", a.nrows(), a.ncols());
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let (mut cfg, _) = load_config(args.config.as_deref(), args.id)?;
    if let Some(reps) = args.reps {
        cfg.repetitions = reps;
    }
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    let canonical = serde_json::to_vec(&cfg)?;
    let opts = RunOptions { equivalence: args.equivalence, threads: args.threads, ..RunOptions::default() };
    let result = run_experiment_with(&cfg, &opts)?;
    let prov = Provenance::new("experiment").with_seed(cfg.base_seed).with_config_hash(&canonical);
    ensure_dir(&args.out)?;
    let mut summary = prov.render("#").into_bytes();
    write_summary_csv(&result, &mut summary)?;
    write_file(&args.out.join("summary.csv"), &summary)?;
    let mut plot = prov.render("#").into_bytes();
    write_plot_csv(&result, &mut plot)?;
    write_file(&args.out.join("plot.csv"), &plot)?;
    let json = serde_json::json!({ "provenance": provenance_map(&prov), "result": result });
    write_file(&args.out.join("result.json"), serde_json::to_string_pretty(&json)?.as_bytes())?;
    let failures: usize = result.points.iter().map(|p| p.failures).sum();
    println!(
        "{}: {} grid points x {} repetitions ({failures} failed); wrote {}",
        cfg.name,
        result.points.len(),
        cfg.repetitions,
        args.out.display()
    );
    Ok(())
}

/// `"1..28"` (inclusive) or `"1,2,5"`.
pub fn parse_threshold_list(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("bad threshold list '{text}' (use a..b or a,b,c)"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn giant_component(a: &BiAdjacency, strong: bool) -> Result<BiAdjacency> {
    Ok(if strong { largest_strong_component(a)? } else { largest_weak_component(a)? })
}

fn stats(args: &StatsArgs) -> Result<()> {
    let thresholds = parse_threshold_list(&args.min_degree_list)?;
    let mut a = args.input.load()?;
    if args.giant {
        a = giant_component(&a, args.strong)?;
    }
    let mut opts = DispOptions::default();
    if let Some(seed) = args.seed {
        opts.svd.seed = seed;
    }
    let rows = real_data_table(&a, args.k, &thresholds, &opts, args.pure_tol)?;
    let prov = Provenance::new("stats").with_seed(opts.svd.seed).with("args_sha256", args_hash(args));
    let mut buf = prov.render("#").into_bytes();
    write_table_csv(&rows, &mut buf)?;
    match &args.out {
        Some(path) => write_file(path, &buf)?,
        None => io::stdout().write_all(&buf).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}
