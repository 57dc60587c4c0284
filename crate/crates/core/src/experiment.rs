//! End-to-end runs: sample, initialize, assemble, solve, evaluate; plus
//! seed replicates, parameter sweeps, CSV tables, field dumps and the
//! comparison against the finite-difference reference.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::assembly::assemble;
use crate::config::{ExperimentConfig, SweepParameter};
use crate::error::{Error, Result};
use crate::fdm::{solve_fdm, FdmGrid};
use crate::features::HiddenLayer;
use crate::geometry::Domain;
use crate::metrics::{evaluate, median};
use crate::problems::{get_problem, ProblemSpec};
use crate::solve::{solve_system, SolveConfig, TrainedModel};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FPIELM_OUT_DIR";

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

pub const CSV_HEADER: &str =
    "problem,domain,activation,n_hidden,delta,q,p,lambda,seed,rel,max_abs_err,train_s,eval_s,rank,cond";

/// One run at one seed. `config` has the seed and the scale factor actually
/// used filled in, so it reproduces this record on its own.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub domain: String,
    pub seed: u64,
    pub rel: f64,
    pub max_abs_error: f64,
    pub train_seconds: f64,
    pub eval_seconds: f64,
    pub rank: usize,
    pub condition_estimate: f64,
    /// Set when the run failed; the metrics are then NaN.
    pub failure: Option<String>,
}

pub struct TrainedRun {
    pub record: RunRecord,
    pub model: TrainedModel,
    pub problem: ProblemSpec,
}

/// Compact, comma-free description of a domain for tables.
pub fn domain_label(domain: &Domain) -> String {
    let span = |lo: &[f64], hi: &[f64]| {
        lo.iter().zip(hi).map(|(l, h)| format!("[{l}:{h}]")).collect::<Vec<_>>().join("x")
    };
    match domain {
        Domain::Box { lo, hi } => format!("box{}", span(lo, hi)),
        Domain::Hexagram { lo, hi, .. } => format!("hexagram{}", span(lo, hi)),
        Domain::PorousPlate { lo, hi, holes } => format!("porous{}-{}holes", span(lo, hi), holes.len()),
        Domain::HoledCube { lo, hi, holes } => format!("holed-cube{}-{}holes", span(lo, hi), holes.len()),
        Domain::SphericalShell {
            center,
            r_inner,
            r_outer,
        } => format!("shell({}:{}:{};{r_inner}:{r_outer})", center[0], center[1], center[2]),
    }
}

/// Trains and evaluates one model at `config.seed`.
pub fn train(config: &ExperimentConfig) -> Result<TrainedRun> {
    config.validate()?;
    let problem = get_problem(&config.problem, config.domain.build()?)?;
    let delta = config.resolved_delta(&problem.domain)?;
    let grid = config.resolved_grid(problem.dim())?;
    let solver = SolveConfig::ridge(config.ridge_lambda);

    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let interior = problem
        .domain
        .sample_interior(config.q_interior, &mut rng)
        .map_err(|e| e.in_stage("sample interior"))?;
    let (boundary, normals) = problem
        .domain
        .sample_boundary(config.p_boundary, &mut rng)
        .map_err(|e| e.in_stage("sample boundary"))?;
    let colloc = crate::geometry::CollocationSet {
        interior,
        boundary,
        normals,
    };
    let layer = HiddenLayer::init(config.hidden_n, problem.dim(), config.activation, delta, &mut rng)
        .map_err(|e| e.in_stage("init hidden"))?;
    let system = assemble(&layer, &colloc, &problem, problem.regime).map_err(|e| e.in_stage("assemble"))?;
    drop(colloc);
    let model = solve_system(&system, &solver).map_err(|e| e.in_stage("solve"))?;
    drop(system);
    let train_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let points = problem.domain.grid(&grid).map_err(|e| e.in_stage("evaluate"))?;
    let report = evaluate(&model, &problem, points.as_ref(), 0.0).map_err(|e| e.in_stage("evaluate"))?;
    let eval_seconds = start.elapsed().as_secs_f64();

    let mut echo = config.clone();
    echo.delta = Some(delta);
    echo.replicates = 1;
    echo.sweep = None;
    let record = RunRecord {
        config: echo,
        domain: domain_label(&problem.domain),
        seed: config.seed,
        rel: report.rel,
        max_abs_error: report.max_abs_error,
        train_seconds,
        eval_seconds,
        rank: model.diagnostics.rank,
        condition_estimate: model.diagnostics.condition_estimate,
        failure: None,
    };
    Ok(TrainedRun { record, model, problem })
}

pub fn run_single(config: &ExperimentConfig) -> Result<RunRecord> {
    train(config).map(|t| t.record)
}

/// Runs seeds `seed, seed + 1, ...`, one per replicate.
pub fn run_replicates(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    (0..config.replicates as u64)
        .map(|k| {
            let mut c = config.clone();
            c.seed = config.seed.wrapping_add(k);
            run_single(&c)
        })
        .collect()
}

/// Median REL over successful records; `None` if there are none.
pub fn median_rel(records: &[RunRecord]) -> Option<f64> {
    let rels: Vec<f64> = records.iter().filter(|r| r.failure.is_none()).map(|r| r.rel).collect();
    (!rels.is_empty()).then(|| median(&rels))
}

fn failed_record(config: &ExperimentConfig, err: &Error) -> RunRecord {
    let domain = match config.domain.build() {
        Ok(Some(d)) => domain_label(&d),
        _ => get_problem(&config.problem, None).map(|p| domain_label(&p.domain)).unwrap_or_default(),
    };
    RunRecord {
        config: config.clone(),
        domain,
        seed: config.seed,
        rel: f64::NAN,
        max_abs_error: f64::NAN,
        train_seconds: f64::NAN,
        eval_seconds: f64::NAN,
        rank: 0,
        condition_estimate: f64::NAN,
        failure: Some(err.to_string()),
    }
}

/// Runs every replicate of every sweep value, handing each record to `sink`
/// as soon as it exists. Failed runs become records with `failure` set.
pub fn run_sweep(
    config: &ExperimentConfig,
    sink: &mut dyn FnMut(&RunRecord) -> Result<()>,
) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("no sweep configured".into()))?;
    let mut records = Vec::new();
    for &value in &sweep.values {
        let mut point = config.clone();
        point.sweep = None;
        match sweep.parameter {
            SweepParameter::Delta => point.delta = Some(value),
            SweepParameter::HiddenN => point.hidden_n = value as usize,
        }
        for k in 0..config.replicates as u64 {
            let mut c = point.clone();
            c.seed = config.seed.wrapping_add(k);
            let record = run_single(&c).unwrap_or_else(|e| failed_record(&c, &e));
            sink(&record)?;
            records.push(record);
        }
    }
    Ok(records)
}

/// Writes run records as CSV. With timings off the two time columns are
/// left empty, which makes the output byte-for-byte reproducible.
pub struct CsvWriter<W: Write> {
    out: W,
    timings: bool,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, timings: bool) -> Result<Self> {
        writeln!(out, "{CSV_HEADER}")?;
        Ok(CsvWriter { out, timings })
    }

    pub fn write(&mut self, r: &RunRecord) -> Result<()> {
        let c = &r.config;
        let time = |t: f64| if self.timings { format!("{t:.6}") } else { String::new() };
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{},{},{:e},{:e},{},{},{},{:e}",
            c.problem,
            r.domain,
            c.activation,
            c.hidden_n,
            c.delta.map(|d| d.to_string()).unwrap_or_default(),
            c.q_interior,
            c.p_boundary,
            c.ridge_lambda,
            r.seed,
            r.rel,
            r.max_abs_error,
            time(r.train_seconds),
            time(r.eval_seconds),
            r.rank,
            r.condition_estimate,
        )?;
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Writes `x1..xd,u_exact,u_pred,abs_err` for every grid point inside the
/// domain and returns the number of rows.
pub fn dump_field(model: &TrainedModel, problem: &ProblemSpec, resolution: &[usize], path: &Path) -> Result<usize> {
    let points = problem.domain.grid(resolution)?;
    let report = evaluate(model, problem, points.as_ref(), 0.0)?;
    let mut out = BufWriter::new(File::create(path)?);
    let coords: Vec<String> = (1..=problem.dim()).map(|k| format!("x{k}")).collect();
    writeln!(out, "{},u_exact,u_pred,abs_err", coords.join(","))?;
    for p in &report.pointwise {
        for x in &p.point {
            write!(out, "{x:e},")?;
        }
        writeln!(out, "{:e},{:e},{:e}", p.u_exact, p.u_pred, p.abs_err)?;
    }
    out.flush()?;
    Ok(report.n_points)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub method: &'static str,
    /// Mesh resolution for the finite-difference rows, hidden units otherwise.
    pub size: usize,
    pub rel: f64,
    pub seconds: f64,
}

/// Finite differences at each resolution, then one network run at `elm`.
/// The problem must live on a 2D box.
pub fn compare_fdm(elm: &ExperimentConfig, resolutions: &[usize]) -> Result<Vec<CompareRow>> {
    elm.validate()?;
    let problem = get_problem(&elm.problem, elm.domain.build()?)?;
    let Domain::Box { lo, hi } = &problem.domain else {
        return Err(Error::UnsupportedGeometry("comparison needs a box domain".into()));
    };
    if lo.len() != 2 {
        return Err(Error::UnsupportedGeometry("comparison needs a 2D box".into()));
    }
    let mut rows = Vec::with_capacity(resolutions.len() + 1);
    for &n in resolutions {
        let start = Instant::now();
        let grid = FdmGrid::with_resolution([lo[0], lo[1]], [hi[0], hi[1]], n)?;
        let rel = solve_fdm(&problem, &grid)?.rel_error(&problem)?;
        rows.push(CompareRow {
            method: "fdm",
            size: n,
            rel,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let record = run_single(elm)?;
    rows.push(CompareRow {
        method: "fpielm",
        size: elm.hidden_n,
        rel: record.rel,
        seconds: record.train_seconds + record.eval_seconds,
    });
    Ok(rows)
}

pub fn write_compare_csv<W: Write>(mut out: W, rows: &[CompareRow], timings: bool) -> Result<()> {
    writeln!(out, "method,size,rel,seconds")?;
    for r in rows {
        let t = if timings { format!("{:.6}", r.seconds) } else { String::new() };
        writeln!(out, "{},{},{:e},{t}", r.method, r.size, r.rel)?;
    }
    out.flush()?;
    Ok(())
}
