//! Runs one experiment and writes its artifacts.
//!
//! Every artifact is produced in memory first, so a configuration or
//! numerical error leaves no partial output behind (numerical failures only
//! leave their trace dump).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tensormor_core::formats::TtTensor;
use tensormor_core::formats::{dense_cap, tt_svd};
use tensormor_core::generators::uniform_grid;
use tensormor_core::greedy::{strong_greedy, weak_greedy, GreedyResult, TrainSet};
use tensormor_core::linalg::norm2;
use tensormor_core::lrtf;
use tensormor_core::order2::{pod, SnapshotSet};
use tensormor_core::regression::{cp_als_fit, cross_validate, AlsOptions, FeatureBasis, SampleSet};
use tensormor_core::rom::{AffineModel, ParameterDomain, ReducedModel};
use tensormor_core::solver::{
    assemble_from_affine, greedy_rank_one, truncated_richardson, KroneckerOperator, PgdOptions, RichardsonOptions,
    StepSize,
};
use tensormor_core::{DenseTensor, Error as CoreError, Matrix};

use crate::config::{
    ExperimentConfig, Method, PgdConfig, RegressConfig, RichardsonConfig, RomOptions, SnapshotOptions, TtsvdConfig,
    WeakGreedyOptions,
};
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Seed offset of the independent test-parameter stream.
pub const TEST_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug)]
pub struct RunRequest {
    pub method: Method,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub verbose: bool,
}

/// A named output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Outcome of a method before anything is written.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.artifacts.push(Artifact { name: name.to_string(), bytes });
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub summary: Value,
    pub artifacts: Vec<String>,
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    timings: bool,
    verbose: bool,
}

impl Context<'_> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("tensormor: {}", msg.as_ref());
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses the configuration, runs the method and writes the artifacts plus
/// `summary.json` into the output directory.
pub fn execute(req: &RunRequest) -> CliResult<RunSummary> {
    let text = fs::read(&req.config)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", req.config.display())))?;
    let config = ExperimentConfig::parse(
        std::str::from_utf8(&text).map_err(|_| CliError::Config("config is not valid UTF-8".into()))?,
    )?;
    if let Some(m) = config.method {
        if m != req.method {
            return Err(CliError::Usage(format!("config declares method {m} but {} was requested", req.method)));
        }
    }
    let seed = match (req.seed, config.seed) {
        (Some(s), _) | (None, Some(s)) => Some(s),
        (None, None) => None,
    };
    if req.method.randomized() && seed.is_none() {
        return Err(CliError::Config(format!("method {} needs a seed (config \"seed\" or --seed)", req.method)));
    }
    let out_dir = req
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("tensormor-out").join(req.method.as_str()));
    let ctx =
        Context { config: &config, seed: seed.unwrap_or(0), timings: config.record_timings, verbose: req.verbose };
    ctx.log(format!("{} on {} → {}", req.method, config.problem.name(), out_dir.display()));

    let start = Instant::now();
    let outcome = match run_method(req.method, &ctx) {
        Ok(o) => o,
        Err(CliError::Core(CoreError::Divergence { iteration, residual, trace })) => {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf, ctx.timings)?;
            write_atomic(&out_dir, "breakdown_trace.csv", &buf)?;
            ctx.log(format!("trace dumped to {}", out_dir.join("breakdown_trace.csv").display()));
            return Err(CliError::Core(CoreError::Divergence { iteration, residual, trace }));
        }
        Err(e) => return Err(e),
    };
    let seconds = start.elapsed().as_secs_f64();

    let mut names = Vec::new();
    for a in &outcome.artifacts {
        write_atomic(&out_dir, &a.name, &a.bytes)?;
        names.push(a.name.clone());
    }
    let summary = json!({
        "tool": "tensormor",
        "version": VERSION,
        "method": req.method.as_str(),
        "problem": config.problem,
        "seed": seed,
        "config_sha256": sha256_hex(&text),
        "artifacts": names,
        "results": outcome.results,
        "warnings": outcome.warnings,
        "timings": { "total_seconds": seconds },
    });
    let pretty = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    write_atomic(&out_dir, "summary.json", &pretty)?;
    names.push("summary.json".into());
    for w in &outcome.warnings {
        eprintln!("tensormor: warning: {w}");
    }
    Ok(RunSummary { out_dir, summary, artifacts: names })
}

/// Writes `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(format!("writing {}", target.display()), e)
    })
}

fn run_method(method: Method, ctx: &Context) -> CliResult<Outcome> {
    match method {
        Method::Pod => run_pod(ctx),
        Method::StrongGreedy => run_strong_greedy(ctx),
        Method::WeakGreedy => run_weak_greedy(ctx),
        Method::Rom => run_rom(ctx),
        Method::Richardson => run_richardson(ctx),
        Method::Pgd => run_pgd(ctx),
        Method::Regress => run_regress(ctx),
        Method::Ttsvd => run_ttsvd(ctx),
    }
}

fn require(cond: bool, msg: impl Into<String>) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn snapshots(model: &AffineModel, k: usize, seed: u64, ctx: &Context) -> CliResult<SnapshotSet> {
    require(k >= 1, "train_size must be at least 1")?;
    ctx.log(format!("computing {k} snapshots of dimension {}", model.dim()));
    let params = model.domain.sample(k, seed)?;
    let cols = params.iter().map(|xi| model.full_solve(xi)).collect::<Result<Vec<_>, _>>()?;
    Ok(SnapshotSet::uniform(Matrix::from_cols(&cols)?, params)?)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> tensormor_core::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// `step,index,xi_1,…,xi_d` for the selected train points.
fn selection_csv(selected: &[usize], points: &[Vec<f64>]) -> CliResult<Vec<u8>> {
    let d = points.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "index".to_string()];
    header.extend((1..=d).map(|i| format!("xi_{i}")));
    w.write_record(&header).map_err(core_csv)?;
    for (step, &k) in selected.iter().enumerate() {
        let mut row = vec![(step + 1).to_string(), k.to_string()];
        row.extend(points[k].iter().map(|&x| fmt(x)));
        w.write_record(&row).map_err(core_csv)?;
    }
    finish_csv(w)
}

fn core_csv(e: csv::Error) -> CliError {
    CliError::Core(CoreError::Csv(e))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> CliResult<Vec<u8>> {
    w.into_inner().map_err(|e| CliError::io("flushing csv", std::io::Error::other(e.to_string())))
}

fn greedy_outcome(g: &GreedyResult, points: &[Vec<f64>], ctx: &Context) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    out.add("errors.csv", csv_bytes(|b| g.report.write_csv(b, ctx.timings))?);
    out.add("selected.csv", selection_csv(&g.selected, points)?);
    out.add("basis.lrtf", lrtf::encode_matrix(g.subspace.basis()));
    out.results = json!({
        "dimension": g.subspace.dim(),
        "selected": g.selected,
        "max_errors": g.max_errors(),
        "gamma": g.gamma,
        "degenerate": g.degenerate,
    });
    out.warnings = g.warnings.clone();
    Ok(out)
}

fn run_pod(ctx: &Context) -> CliResult<Outcome> {
    let opts: SnapshotOptions = ctx.config.options()?;
    let model = ctx.config.problem.model()?;
    let s = snapshots(&model, opts.train_size, ctx.seed, ctx)?;
    let (basis, report) = pod(&s, opts.m)?;
    let mut out = Outcome::default();
    out.add("errors.csv", csv_bytes(|b| report.write_csv(b, ctx.timings))?);
    out.add("basis.lrtf", lrtf::encode_matrix(basis.basis()));
    out.results = json!({ "dimension": basis.dim(), "errors": report.errors() });
    Ok(out)
}

fn run_strong_greedy(ctx: &Context) -> CliResult<Outcome> {
    let opts: SnapshotOptions = ctx.config.options()?;
    let model = ctx.config.problem.model()?;
    let s = snapshots(&model, opts.train_size, ctx.seed, ctx)?;
    let g = strong_greedy(&s, opts.m)?;
    greedy_outcome(&g, s.params(), ctx)
}

fn run_weak_greedy(ctx: &Context) -> CliResult<Outcome> {
    let opts: WeakGreedyOptions = ctx.config.options()?;
    require(opts.train_size >= 1, "train_size must be at least 1")?;
    let model = ctx.config.problem.model()?;
    let train = TrainSet::new(model.domain.sample(opts.train_size, ctx.seed)?, None)?;
    ctx.log(format!("weak greedy over {} train points", train.len()));
    let g = weak_greedy(&model, opts.indicator, &train, opts.m)?;
    greedy_outcome(&g, train.points(), ctx)
}

fn run_rom(ctx: &Context) -> CliResult<Outcome> {
    let opts: RomOptions = ctx.config.options()?;
    require(opts.test_size >= 1, "test_size must be at least 1")?;
    let model = ctx.config.problem.model()?;
    let s = snapshots(&model, opts.train_size, ctx.seed, ctx)?;
    let g = strong_greedy(&s, opts.m)?;
    let basis = g.subspace;
    ctx.log(format!("reduced model of dimension {}", basis.dim()));
    let rm = ReducedModel::build(&model, &basis, None)?;
    let test = model.domain.sample(opts.test_size, ctx.seed ^ TEST_STREAM)?;

    let d = model.param_dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k".to_string()];
    header.extend((1..=d).map(|i| format!("xi_{i}")));
    header.extend(["error", "best_error", "residual", "quasi_ratio", "bound"].map(String::from));
    w.write_record(&header).map_err(core_csv)?;
    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0;
    for (k, xi) in test.iter().enumerate() {
        let u = model.full_solve(xi)?;
        let sol = rm.solve(xi)?;
        let um = rm.lift(&sol.coefficients);
        let error = norm2(&tensormor_core::linalg::sub(&u, &um));
        let best = basis.projection_error(&u)?;
        let ratio = if best > 0.0 {
            error / best
        } else if error == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        let bound = model.bounds_at(xi).map_or(f64::NAN, |(lo, hi)| hi / lo);
        worst_ratio = worst_ratio.max(ratio);
        if ratio > bound * (1.0 + 1e-8) {
            violations += 1;
        }
        let mut row = vec![k.to_string()];
        row.extend(xi.iter().map(|&x| fmt(x)));
        row.extend([error, best, sol.residual, ratio, bound].map(fmt));
        w.write_record(&row).map_err(core_csv)?;
    }
    let mut out = Outcome::default();
    out.add("rom.csv", finish_csv(w)?);
    out.add("basis_errors.csv", csv_bytes(|b| g.report.write_csv(b, ctx.timings))?);
    out.results = json!({
        "dimension": basis.dim(),
        "test_size": opts.test_size,
        "max_quasi_ratio": worst_ratio,
        "bound_violations": violations,
    });
    out.warnings = g.warnings;
    Ok(out)
}

fn tensor_system(ctx: &Context, grid: usize) -> CliResult<(KroneckerOperator, TtTensor)> {
    require(grid >= 1, "grid must be at least 1")?;
    let model = ctx.config.problem.model()?;
    let grids: Vec<Vec<f64>> =
        model.domain.lower.iter().zip(&model.domain.upper).map(|(&a, &b)| uniform_grid(grid, a, b)).collect();
    ctx.log(format!("tensor system of shape {} × {grid}^{}", model.dim(), grids.len()));
    Ok(assemble_from_affine(&model, &grids)?)
}

fn run_richardson(ctx: &Context) -> CliResult<Outcome> {
    let opts: RichardsonConfig = ctx.config.options()?;
    let (a, b) = tensor_system(ctx, opts.grid)?;
    let ro = RichardsonOptions {
        step: opts.step.map_or(StepSize::Auto, StepSize::Fixed),
        epsilon: opts.epsilon,
        max_iter: opts.max_iter,
        target_residual: opts.target_residual,
    };
    let res = truncated_richardson(&a, &b, &ro)?;
    let mut out = Outcome::default();
    out.add("trace.csv", csv_bytes(|buf| res.trace.write_csv(buf, ctx.timings))?);
    let last = res.trace.records.last();
    out.results = json!({
        "stop": res.stop,
        "step": res.step,
        "plateau": res.plateau,
        "iterations": res.trace.records.len().saturating_sub(1),
        "relative_residual": last.map(|r| r.residual / b.norm()),
        "ranks": res.solution.ranks(),
    });
    Ok(out)
}

fn run_pgd(ctx: &Context) -> CliResult<Outcome> {
    let opts: PgdConfig = ctx.config.options()?;
    let (a, b) = tensor_system(ctx, opts.grid)?;
    let po = PgdOptions { max_rank: opts.max_rank, inner_sweeps: opts.inner_sweeps, tol: opts.tol, seed: ctx.seed };
    let res = greedy_rank_one(&a, &b, &po)?;
    let mut out = Outcome::default();
    out.add("trace.csv", csv_bytes(|buf| res.trace.write_csv(buf, ctx.timings))?);
    out.results = json!({
        "rank": res.solution.rank(),
        "breakdown": res.breakdown,
        "functionals": res.trace.functionals(),
    });
    out.warnings = res.warnings;
    Ok(out)
}

fn run_regress(ctx: &Context) -> CliResult<Outcome> {
    let opts: RegressConfig = ctx.config.options()?;
    require(opts.train_size >= 1, "train_size must be at least 1")?;
    let f = ctx.config.problem.function()?;
    let d = f.dim();
    let basis = FeatureBasis::uniform(opts.family, opts.degree, d, opts.lower, opts.upper)?;
    let domain = ParameterDomain::uniform_box(vec![opts.lower; d], vec![opts.upper; d])?;
    let train = SampleSet::from_fn(domain.sample(opts.train_size, ctx.seed)?, |x| f.eval(x))?;
    let test = if opts.test_size > 0 {
        Some(SampleSet::from_fn(domain.sample(opts.test_size, ctx.seed ^ TEST_STREAM)?, |x| f.eval(x))?)
    } else {
        None
    };
    let mut als = AlsOptions {
        rank: opts.rank,
        ridge: opts.ridge,
        sweeps: opts.sweeps,
        seed: ctx.seed,
        init: opts.init,
        restarts: opts.restarts,
        ..Default::default()
    };
    let mut out = Outcome::default();
    let mut cv_best = Value::Null;
    if let Some(cv) = &opts.cv {
        ctx.log(format!("cross-validating {} ranks × {} ridges", cv.ranks.len(), cv.ridges.len()));
        let report = cross_validate(&train, &basis, &cv.ranks, &cv.ridges, cv.folds, &als)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rank", "ridge", "mean_rmse"]).map_err(core_csv)?;
        for e in &report.entries {
            w.write_record([e.rank.to_string(), fmt(e.ridge), fmt(e.mean_rmse)]).map_err(core_csv)?;
        }
        out.add("cv.csv", finish_csv(w)?);
        als.rank = report.best.rank;
        als.ridge = report.best.ridge;
        cv_best = json!(report.best);
    }
    ctx.log(format!("fitting rank {} with ridge {:e}", als.rank, als.ridge));
    let (_, fit) = cp_als_fit(&train, &basis, &als, test.as_ref())?;
    out.add("samples.csv", csv_bytes(|b| train.write_csv(b))?);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["update", "objective"]).map_err(core_csv)?;
    for (i, v) in fit.objective_trace.iter().enumerate() {
        w.write_record([(i + 1).to_string(), fmt(*v)]).map_err(core_csv)?;
    }
    out.add("objective.csv", finish_csv(w)?);
    out.add("fit.json", serde_json::to_vec_pretty(&fit).map_err(|e| CliError::Config(e.to_string()))?);
    out.results = json!({
        "rank": fit.rank,
        "ridge": fit.ridge,
        "train_rmse": fit.train_rmse,
        "test_rmse": fit.validation_rmse,
        "sweeps": fit.sweeps,
        "sample_ratio": fit.sample_ratio,
        "cv_best": cv_best,
    });
    out.warnings = fit.warnings;
    Ok(out)
}

fn run_ttsvd(ctx: &Context) -> CliResult<Outcome> {
    let opts: TtsvdConfig = ctx.config.options()?;
    require(opts.points >= 1, "points must be at least 1")?;
    require(opts.tol >= 0.0, "tol must be nonnegative")?;
    let f = ctx.config.problem.function()?;
    let d = f.dim();
    let entries = (opts.points as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    let cap = dense_cap();
    if entries > cap as u128 {
        return Err(CoreError::Capacity { requested: entries.min(usize::MAX as u128) as usize, cap }.into());
    }
    let grid = uniform_grid(opts.points, opts.lower, opts.upper);
    let u: DenseTensor = f.on_grid(&vec![grid; d])?;
    let tt = tt_svd(&u, opts.tol, opts.max_rank)?;
    let err = tt.to_dense()?.sub(&u)?.norm() / u.norm().max(f64::MIN_POSITIVE);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bond", "rank"]).map_err(core_csv)?;
    for (i, r) in tt.ranks().iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()]).map_err(core_csv)?;
    }
    let mut out = Outcome::default();
    out.add("ranks.csv", finish_csv(w)?);
    out.add("tt.bin", tt.to_bytes());
    out.results = json!({
        "ranks": tt.ranks(),
        "storage": tt.storage_count(),
        "dense_entries": u.len(),
        "relative_error": err,
    });
    Ok(out)
}
