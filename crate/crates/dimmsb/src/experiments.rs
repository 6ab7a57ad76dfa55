//! Monte Carlo harness for the simulation study, the real-network
//! statistics table and the concentration probe.
//!
//! Every repetition draws from its own stream,
//! `derive_seed(base_seed, [grid_point, repetition])`, so results do not
//! depend on thread count or scheduling.

use std::io::Write;
use std::time::Instant;

use dimmsb_core::rng::{derive_seed, CellStream};
use dimmsb_core::{
    build_omega, check_identifiability, common_submatrix, degree_filter, di_mixed_hamming, disp, disp_equivalence,
    make_planted_memberships, mixed_hamming, network_stats, prune_zero_degree, sample_adjacency, BiAdjacency,
    DispOptions, Matrix, MembershipMatrix, MixedProfileSpec, ModelParams, ProbabilityMatrix,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the block matrix `P` is built at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PSpec {
    /// `P` given entry by entry (rows of the matrix).
    Explicit { entries: Vec<Vec<f64>> },
    /// `P = rho * p_tilde`.
    Scaled { rho: f64, p_tilde: Vec<Vec<f64>> },
    /// `P = rho * (beta I + (1 - beta) 11')`.
    Beta {
        beta: f64,
        #[serde(default = "one")]
        rho: f64,
    },
    /// Constant diagonal, strictly-upper and strictly-lower entries.
    Banded { diagonal: f64, upper: f64, lower: f64 },
}

fn one() -> f64 {
    1.0
}

/// The swept parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Grid {
    NPure(Vec<usize>),
    Rho(Vec<f64>),
    Beta(Vec<f64>),
    K(Vec<usize>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::NPure(v) | Grid::K(v) => v.len(),
            Grid::Rho(v) | Grid::Beta(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self) -> &'static str {
        match self {
            Grid::NPure(_) => "n_pure",
            Grid::Rho(_) => "rho",
            Grid::Beta(_) => "beta",
            Grid::K(_) => "k",
        }
    }

    pub fn value(&self, point: usize) -> f64 {
        match self {
            Grid::NPure(v) | Grid::K(v) => v[point] as f64,
            Grid::Rho(v) | Grid::Beta(v) => v[point],
        }
    }
}

/// Memberships of the nodes that are not planted pure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixedSpec {
    /// Split evenly across the listed PMFs; the count must divide exactly.
    Profiles { pmfs: Vec<Vec<f64>> },
    /// Every mixed node gets `(1/K, ..., 1/K)`.
    Uniform,
    /// Every remaining node is pure in a community drawn uniformly at random.
    RandomCommunity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n_r: usize,
    pub n_c: usize,
    pub k: usize,
    /// Pure nodes per community on each side, unless the grid sweeps it.
    pub n_pure: usize,
    pub p: PSpec,
    pub grid: Grid,
    pub mixed: MixedSpec,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_repetitions() -> usize {
    50
}

/// The concrete model at one grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub value: f64,
    pub n_pure: usize,
    pub params: ModelParams,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(Error::Config(format!("{what} must be a nonempty square matrix")));
    }
    Ok(Matrix::from_fn(k, k, |i, j| rows[i][j]))
}

fn beta_family(k: usize, beta: f64) -> Matrix {
    Matrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { 1.0 - beta })
}

fn banded(k: usize, diagonal: f64, upper: f64, lower: f64) -> Matrix {
    Matrix::from_fn(k, k, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => diagonal,
        std::cmp::Ordering::Less => upper,
        std::cmp::Ordering::Greater => lower,
    })
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn probability_matrix(&self, k: usize, rho: Option<f64>, beta: Option<f64>) -> Result<ProbabilityMatrix> {
        let p = match &self.p {
            PSpec::Explicit { entries } => ProbabilityMatrix::from_entries(matrix_from_rows(entries, "P")?)?,
            PSpec::Scaled { rho: r, p_tilde } => {
                ProbabilityMatrix::from_scaled(rho.unwrap_or(*r), matrix_from_rows(p_tilde, "p_tilde")?)?
            }
            PSpec::Beta { beta: b, rho: r } => {
                let b = beta.unwrap_or(*b);
                if !(b > 0.0 && b <= 1.0) {
                    return Err(Error::Config(format!("beta={b} is not in (0, 1]")));
                }
                ProbabilityMatrix::from_scaled(rho.unwrap_or(*r), beta_family(k, b))?
            }
            PSpec::Banded { diagonal, upper, lower } => {
                ProbabilityMatrix::from_entries(banded(k, *diagonal, *upper, *lower))?
            }
        };
        if p.k() != k {
            return Err(Error::Config(format!("P is {0}x{0} but K = {k}", p.k())));
        }
        Ok(p)
    }

    fn memberships(&self, n: usize, k: usize, n_pure: usize, seed: u64) -> Result<MembershipMatrix> {
        let mixed = n
            .checked_sub(k * n_pure)
            .ok_or_else(|| Error::Config(format!("{k} communities x {n_pure} pure nodes exceed n = {n}")))?;
        match &self.mixed {
            MixedSpec::Profiles { pmfs } => {
                Ok(make_planted_memberships(n, k, n_pure, &MixedProfileSpec::even_split(pmfs.clone(), mixed)?)?)
            }
            MixedSpec::Uniform => {
                let spec = MixedProfileSpec::new(vec![(vec![1.0 / k as f64; k], mixed)]);
                Ok(make_planted_memberships(n, k, n_pure, &spec)?)
            }
            MixedSpec::RandomCommunity => {
                let mut stream = CellStream::new(seed);
                let mut w = Matrix::zeros(n, k);
                for i in 0..n {
                    let c = if i < k * n_pure {
                        i / n_pure
                    } else {
                        ((stream.next_uniform() * k as f64) as usize).min(k - 1)
                    };
                    w[(i, c)] = 1.0;
                }
                Ok(MembershipMatrix::new(w)?)
            }
        }
    }

    /// Builds the model at grid point `index`.
    pub fn grid_point(&self, index: usize) -> Result<GridPoint> {
        if index >= self.grid.len() {
            return Err(Error::Config(format!("grid point {index} out of range")));
        }
        let (mut k, mut n_pure, mut rho, mut beta) = (self.k, self.n_pure, None, None);
        match &self.grid {
            Grid::NPure(v) => n_pure = v[index],
            Grid::K(v) => k = v[index],
            Grid::Rho(v) => {
                if matches!(self.p, PSpec::Explicit { .. } | PSpec::Banded { .. }) {
                    return Err(Error::Config("a rho grid needs a scaled or beta P".into()));
                }
                rho = Some(v[index]);
            }
            Grid::Beta(v) => {
                if !matches!(self.p, PSpec::Beta { .. }) {
                    return Err(Error::Config("a beta grid needs a beta P".into()));
                }
                beta = Some(v[index]);
            }
        }
        if k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        let p = self.probability_matrix(k, rho, beta)?;
        let side_seed = |side: u64| derive_seed(self.base_seed, &[index as u64, u64::MAX, side]);
        let pi_r = self.memberships(self.n_r, k, n_pure, side_seed(0))?;
        let pi_c = self.memberships(self.n_c, k, n_pure, side_seed(1))?;
        Ok(GridPoint { index, value: self.grid.value(index), n_pure, params: ModelParams::new(p, pi_r, pi_c)? })
    }

    /// Grid nonempty, repetitions positive, and every grid point identifiable.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be positive".into()));
        }
        for index in 0..self.grid.len() {
            let point = self.grid_point(index)?;
            let report = check_identifiability(&point.params);
            if !report.passes() {
                return Err(Error::Config(format!(
                    "grid point {index} ({} = {}) is not identifiable: {}",
                    self.grid.axis(),
                    point.value,
                    report.describe()
                )));
            }
        }
        Ok(())
    }
}

const EXP1_P: [[f64; 3]; 3] = [[0.8, 0.1, 0.3], [0.2, 0.9, 0.4], [0.5, 0.2, 0.9]];
const EXP2_P_TILDE: [[f64; 3]; 3] = [[1.0, 0.4, 0.4], [0.6, 1.0, 1.0], [0.2, 0.2, 0.4]];

fn rows(m: &[[f64; 3]; 3]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

/// The four mixed PMFs used with `K = 3`.
pub fn four_profiles() -> Vec<Vec<f64>> {
    let third = 1.0 / 3.0;
    vec![vec![0.4, 0.4, 0.2], vec![0.4, 0.2, 0.4], vec![0.2, 0.4, 0.4], vec![third, third, third]]
}

fn tenths() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Settings of simulation experiments 1 to 7.
///
/// Experiments 2 and 3 sweep `rho` and `beta` at a fixed pure count that
/// is otherwise unset; 12 per community is used (pure fraction 0.6 on
/// the rows, the same as 120 of 600 per community in experiments 5 and 6).
pub fn builtin_config(id: u32) -> Result<ExperimentConfig> {
    let small = |name: &str, p: PSpec, grid: Grid| ExperimentConfig {
        name: name.into(),
        n_r: 60,
        n_c: 80,
        k: 3,
        n_pure: 12,
        p,
        grid,
        mixed: MixedSpec::Profiles { pmfs: four_profiles() },
        repetitions: default_repetitions(),
        base_seed: u64::from(id),
    };
    let large = |cfg: ExperimentConfig| ExperimentConfig { n_r: 600, n_c: 800, n_pure: 120, ..cfg };
    let exp1 = PSpec::Explicit { entries: rows(&EXP1_P) };
    let exp2 = PSpec::Scaled { rho: 1.0, p_tilde: rows(&EXP2_P_TILDE) };
    let exp3 = PSpec::Beta { beta: 0.5, rho: 1.0 };
    let cfg = match id {
        1 => small("experiment-1", exp1, Grid::NPure(vec![4, 8, 12, 16, 20])),
        2 => small("experiment-2", exp2, Grid::Rho(tenths())),
        3 => small("experiment-3", exp3, Grid::Beta(tenths())),
        4 => large(small("experiment-4", exp1, Grid::NPure((40..=200).step_by(20).collect()))),
        5 => large(small("experiment-5", exp2, Grid::Rho(tenths()))),
        6 => large(small("experiment-6", exp3, Grid::Beta(tenths()))),
        7 => ExperimentConfig {
            n_r: 1200,
            n_c: 1600,
            mixed: MixedSpec::Uniform,
            ..large(small(
                "experiment-7",
                PSpec::Banded { diagonal: 0.5, upper: 0.2, lower: 0.3 },
                Grid::K((2..=8).collect()),
            ))
        },
        other => return Err(Error::UnknownId(other)),
    };
    Ok(cfg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub point: usize,
    pub repetition: usize,
    pub seed: u64,
    /// Nodes left after removing zero-degree rows and columns.
    pub n_r: usize,
    pub n_c: usize,
    pub di_mhamm: Option<f64>,
    pub row_mhamm: Option<f64>,
    pub col_mhamm: Option<f64>,
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub value: f64,
    pub k: usize,
    pub n_pure: usize,
    pub rho: f64,
    pub successes: usize,
    pub failures: usize,
    pub mean_di_mhamm: f64,
    pub sd_di_mhamm: f64,
    pub mean_row_mhamm: f64,
    pub sd_row_mhamm: f64,
    pub mean_col_mhamm: f64,
    pub sd_col_mhamm: f64,
    pub mean_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub points: Vec<PointSummary>,
    pub records: Vec<RepetitionRecord>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub disp: DispOptions,
    /// Use the projection-matrix variant of the estimator.
    pub equivalence: bool,
    /// Worker cap; `None` reads `DIMMSB_THREADS`, falling back to all cores.
    pub threads: Option<usize>,
}

/// Worker count from `DIMMSB_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("DIMMSB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> T {
    match threads.or_else(env_threads) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(job),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                job()
            }
        },
        None => job(),
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn run_repetition(
    point: &GridPoint,
    omega: &Matrix,
    repetition: usize,
    seed: u64,
    opts: &RunOptions,
) -> RepetitionRecord {
    let mut record = RepetitionRecord {
        point: point.index,
        repetition,
        seed,
        n_r: 0,
        n_c: 0,
        di_mhamm: None,
        row_mhamm: None,
        col_mhamm: None,
        seconds: None,
        error: None,
    };
    let k = point.params.k();
    let outcome = (|| -> dimmsb_core::Result<()> {
        let a = sample_adjacency(omega, seed)?;
        let (a, pi_r, pi_c) = prune_zero_degree(&a, &point.params.pi_r, &point.params.pi_c)?;
        record.n_r = a.nrows();
        record.n_c = a.ncols();
        let start = Instant::now();
        let fit = if opts.equivalence { disp_equivalence(&a, k, &opts.disp)? } else { disp(&a, k, &opts.disp)? };
        record.seconds = Some(start.elapsed().as_secs_f64());
        record.row_mhamm = Some(mixed_hamming(&fit.pi_r_hat, &pi_r)?);
        record.col_mhamm = Some(mixed_hamming(&fit.pi_c_hat, &pi_c)?);
        record.di_mhamm = Some(di_mixed_hamming(&fit.pi_r_hat, &pi_r, &fit.pi_c_hat, &pi_c)?);
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
        record.seconds = None;
    }
    record
}

fn summarize(point: &GridPoint, records: &[RepetitionRecord]) -> PointSummary {
    let ok: Vec<&RepetitionRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let collect =
        |f: fn(&RepetitionRecord) -> Option<f64>| mean_sd(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
    let (mean_di_mhamm, sd_di_mhamm) = collect(|r| r.di_mhamm);
    let (mean_row_mhamm, sd_row_mhamm) = collect(|r| r.row_mhamm);
    let (mean_col_mhamm, sd_col_mhamm) = collect(|r| r.col_mhamm);
    let (mean_seconds, _) = collect(|r| r.seconds);
    PointSummary {
        point: point.index,
        value: point.value,
        k: point.params.k(),
        n_pure: point.n_pure,
        rho: point.params.p.rho(),
        successes: ok.len(),
        failures: records.len() - ok.len(),
        mean_di_mhamm,
        sd_di_mhamm,
        mean_row_mhamm,
        sd_row_mhamm,
        mean_col_mhamm,
        sd_col_mhamm,
        mean_seconds,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(cfg, &RunOptions::default())
}

/// Steps (a) to (e) of the simulation study for every grid point.
///
/// Failed repetitions are kept as records with their error and left out
/// of the means.
pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentResult> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.grid.len());
    let mut records = Vec::with_capacity(cfg.grid.len() * cfg.repetitions);
    for index in 0..cfg.grid.len() {
        let point = cfg.grid_point(index)?;
        let omega = build_omega(&point.params)?;
        let reps: Vec<RepetitionRecord> = with_pool(opts.threads, || {
            (0..cfg.repetitions)
                .into_par_iter()
                .map(|rep| {
                    let seed = derive_seed(cfg.base_seed, &[index as u64, rep as u64]);
                    run_repetition(&point, &omega, rep, seed, opts)
                })
                .collect()
        });
        let summary = summarize(&point, &reps);
        if summary.failures > 0 {
            log::warn!(
                "{}: {} of {} repetitions failed at {} = {}",
                cfg.name,
                summary.failures,
                reps.len(),
                cfg.grid.axis(),
                point.value
            );
        }
        log::info!("{}: {} = {} mean DiMHamm {:.4}", cfg.name, cfg.grid.axis(), point.value, summary.mean_di_mhamm);
        points.push(summary);
        records.extend(reps);
    }
    Ok(ExperimentResult { config: cfg.clone(), points, records })
}

fn csv_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

/// One row per grid point.
pub fn write_summary_csv(result: &ExperimentResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "experiment",
        "axis",
        "value",
        "k",
        "n_pure",
        "rho",
        "successes",
        "failures",
        "mean_di_mhamm",
        "sd_di_mhamm",
        "mean_row_mhamm",
        "sd_row_mhamm",
        "mean_col_mhamm",
        "sd_col_mhamm",
        "mean_seconds",
    ])?;
    for p in &result.points {
        w.write_record([
            result.config.name.clone(),
            result.config.grid.axis().into(),
            p.value.to_string(),
            p.k.to_string(),
            p.n_pure.to_string(),
            p.rho.to_string(),
            p.successes.to_string(),
            p.failures.to_string(),
            csv_float(p.mean_di_mhamm),
            csv_float(p.sd_di_mhamm),
            csv_float(p.mean_row_mhamm),
            csv_float(p.sd_row_mhamm),
            csv_float(p.mean_col_mhamm),
            csv_float(p.sd_col_mhamm),
            csv_float(p.mean_seconds),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Long format for plotting: one row per (grid point, metric).
pub fn write_plot_csv(result: &ExperimentResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["experiment", "axis", "value", "metric", "mean", "sd"])?;
    for p in &result.points {
        let metrics = [
            ("di_mhamm", p.mean_di_mhamm, p.sd_di_mhamm),
            ("row_mhamm", p.mean_row_mhamm, p.sd_row_mhamm),
            ("col_mhamm", p.mean_col_mhamm, p.sd_col_mhamm),
            ("seconds", p.mean_seconds, f64::NAN),
        ];
        for (name, mean, sd) in metrics {
            w.write_record([
                result.config.name.clone(),
                result.config.grid.axis().into(),
                p.value.to_string(),
                name.into(),
                csv_float(mean),
                csv_float(sd),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            r[o] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (average ranks for ties). NaN when either
/// side is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub n_r: usize,
    pub n_c: usize,
    pub pure_r: usize,
    pub mixed_r: usize,
    pub pure_c: usize,
    pub mixed_c: usize,
    pub mu_r: f64,
    pub nu_r: f64,
    pub mu_c: f64,
    pub nu_c: f64,
    pub mhamm: Option<f64>,
}

/// One line of the real-network table. `skipped` explains a missing entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n_edges: usize,
    /// `"filtered"` for the degree-filtered matrix, `"common"` for its common-node part.
    pub matrix: String,
    pub stats: Option<SideStats>,
    pub skipped: Option<String>,
}

fn side_stats(
    a: &BiAdjacency,
    k: usize,
    opts: &DispOptions,
    pure_tol: f64,
    with_mhamm: bool,
) -> dimmsb_core::Result<SideStats> {
    let fit = disp(a, k, opts)?;
    let s = network_stats(&fit.pi_r_hat, &fit.pi_c_hat, pure_tol);
    Ok(SideStats {
        n_r: s.n_r,
        n_c: s.n_c,
        pure_r: s.pure_r,
        mixed_r: s.mixed_r,
        pure_c: s.pure_c,
        mixed_c: s.mixed_c,
        mu_r: s.mu_r,
        nu_r: s.nu_r,
        mu_c: s.mu_c,
        nu_c: s.nu_c,
        mhamm: if with_mhamm { s.mhamm } else { None },
    })
}

fn table_row(n_edges: usize, matrix: &str, stats: dimmsb_core::Result<SideStats>) -> TableRow {
    match stats {
        Ok(s) => TableRow { n_edges, matrix: matrix.into(), stats: Some(s), skipped: None },
        Err(e) => TableRow { n_edges, matrix: matrix.into(), stats: None, skipped: Some(e.to_string()) },
    }
}

/// For each threshold: degree-filter, fit and summarize `A_n`, then the
/// square common-node part of `A_n` (which also gets the row/column MHamm).
/// Empty filters and failed fits become skipped rows.
pub fn real_data_table(
    a: &BiAdjacency,
    k: usize,
    n_edges_list: &[usize],
    opts: &DispOptions,
    pure_tol: f64,
) -> Result<Vec<TableRow>> {
    if !a.is_square_aligned() {
        return Err(dimmsb_core::Error::NotSquare.into());
    }
    let mut out = Vec::with_capacity(2 * n_edges_list.len());
    for &n_edges in n_edges_list {
        let filtered = degree_filter(a, n_edges.max(1));
        if filtered.emptied {
            let reason = format!("no nodes have degree at least {n_edges}");
            for matrix in ["filtered", "common"] {
                out.push(TableRow { n_edges, matrix: matrix.into(), stats: None, skipped: Some(reason.clone()) });
            }
            continue;
        }
        let a_n = filtered.adjacency;
        out.push(table_row(n_edges, "filtered", side_stats(&a_n, k, opts, pure_tol, false)));
        let common = common_submatrix(&a_n).and_then(|c| side_stats(&c, k, opts, pure_tol, true));
        out.push(table_row(n_edges, "common", common));
    }
    Ok(out)
}

pub fn write_table_csv(rows: &[TableRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n_edges", "matrix", "n_r", "n_c", "pure_r", "mixed_r", "pure_c", "mixed_c", "mu_r", "nu_r", "mu_c", "nu_c",
        "mhamm", "skipped",
    ])?;
    for row in rows {
        let mut rec = vec![row.n_edges.to_string(), row.matrix.clone()];
        match &row.stats {
            Some(s) => rec.extend([
                s.n_r.to_string(),
                s.n_c.to_string(),
                s.pure_r.to_string(),
                s.mixed_r.to_string(),
                s.pure_c.to_string(),
                s.mixed_c.to_string(),
                s.mu_r.to_string(),
                s.nu_r.to_string(),
                s.mu_c.to_string(),
                s.nu_c.to_string(),
                s.mhamm.map(|m| m.to_string()).unwrap_or_default(),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 11)),
        }
        rec.push(row.skipped.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n_r: usize,
    pub n_c: usize,
    pub rho: f64,
    pub repetitions: usize,
    /// `||A - Omega|| / sqrt(rho max(n_r, n_c) log(n_r + n_c))` per repetition.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `rho max(n_r, n_c) >= log(n_r + n_c)`.
    pub assumption_holds: bool,
    pub warning: Option<String>,
}

pub fn bound_probe(params: &ModelParams, reps: usize, seed: u64) -> Result<BoundReport> {
    bound_probe_omega(&build_omega(params)?, params.p.rho(), reps, seed)
}

/// Samples `reps` networks from `omega` and reports the scaled spectral
/// deviation. A zero `Omega` gives ratio zero.
pub fn bound_probe_omega(omega: &Matrix, rho: f64, reps: usize, seed: u64) -> Result<BoundReport> {
    let (n_r, n_c) = omega.shape();
    let log_n = ((n_r + n_c) as f64).ln();
    let scale = (rho * n_r.max(n_c) as f64 * log_n).sqrt();
    let assumption_holds = rho * n_r.max(n_c) as f64 >= log_n;
    let warning = (!assumption_holds).then(|| {
        format!(
            "sparsity assumption fails: rho * max(n_r, n_c) = {} < log(n_r + n_c) = {log_n:.3}",
            rho * n_r.max(n_c) as f64
        )
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    let ratios = with_pool(None, || {
        (0..reps)
            .into_par_iter()
            .map(|rep| -> Result<f64> {
                let a = sample_adjacency(omega, derive_seed(seed, &[rep as u64]))?;
                let deviation = (a.to_dense() - omega).singular_values().max();
                Ok(if deviation == 0.0 { 0.0 } else { deviation / scale })
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(BoundReport { n_r, n_c, rho, repetitions: reps, ratios, max_ratio, assumption_holds, warning })
}
