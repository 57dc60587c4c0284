use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fpielm::experiment::{
    compare_fdm, default_output_dir, dump_field, median_rel, run_replicates, run_sweep, train, write_compare_csv,
    CsvWriter, OUT_DIR_ENV,
};
use fpielm::fdm::{solve_fdm, FdmGrid};
use fpielm::{get_problem, Domain, Error, ExperimentConfig, Result};

/// Physics-informed extreme learning machines for biharmonic problems.
#[derive(Parser)]
#[command(name = "fpielm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate at `replicates` consecutive seeds; one CSV row each.
    Run(Common),
    /// Sweep hidden units or the scale factor (needs --sweep and --values).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `hidden` or `delta`.
        #[arg(long)]
        sweep: Option<String>,
        /// Comma-separated sweep values.
        #[arg(long)]
        values: Option<String>,
    },
    /// Train once and write the gridded pointwise error field.
    Field(Common),
    /// Finite-difference reference solution at several mesh resolutions.
    Fdm {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "64,128,256")]
        resolutions: String,
    },
    /// Finite differences at several resolutions next to one network run.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "64,128,256,512,1024")]
        resolutions: String,
    },
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// sine, sigmoid, gaussian or tanh.
    #[arg(long)]
    activation: Option<String>,
    /// Hidden units N.
    #[arg(long)]
    hidden: Option<String>,
    /// Scale factor; defaults to the reference value for the domain.
    #[arg(long)]
    delta: Option<String>,
    /// Interior collocation points Q.
    #[arg(long)]
    q: Option<String>,
    /// Boundary collocation points P.
    #[arg(long)]
    p: Option<String>,
    /// Tikhonov parameter.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    /// Test grid points per axis, one value or one per axis.
    #[arg(long)]
    grid: Option<String>,
    /// Output file; defaults to stdout, or to a file in $FPIELM_OUT_DIR when set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any config key, e.g. `--set domain.kind=box`; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Leave the timing columns empty so repeated runs give identical files.
    #[arg(long)]
    no_timings: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::parse(&fs::read_to_string(path)?)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("problem", &self.problem),
            ("activation", &self.activation),
            ("hidden", &self.hidden),
            ("delta", &self.delta),
            ("q", &self.q),
            ("p", &self.p),
            ("lambda", &self.lambda),
            ("seed", &self.seed),
            ("replicates", &self.replicates),
            ("grid", &self.grid),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{pair}`")))?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    fn output(&self, default_name: &str) -> Result<Box<dyn Write>> {
        let path = match &self.out {
            Some(p) => Some(p.clone()),
            None if std::env::var_os(OUT_DIR_ENV).is_some() => Some(default_output_dir().join(default_name)),
            None => None,
        };
        Ok(match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir)?;
                }
                Box::new(BufWriter::new(File::create(p)?))
            }
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn parse_resolutions(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad resolution `{}`", v.trim())))
        })
        .collect()
}

fn summarize(records: &[fpielm::RunRecord]) {
    for r in records.iter().filter(|r| r.failure.is_some()) {
        eprintln!("seed {} failed: {}", r.seed, r.failure.as_deref().unwrap_or_default());
    }
    if let Some(m) = median_rel(records) {
        eprintln!("median REL over {} runs: {m:e}", records.len());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let config = common.config()?;
            let records = run_replicates(&config)?;
            let mut csv = CsvWriter::new(common.output("run.csv")?, !common.no_timings)?;
            for r in &records {
                csv.write(r)?;
            }
            summarize(&records);
        }
        Command::Sweep { common, sweep, values } => {
            let mut config = common.config()?;
            if let Some(s) = sweep {
                config.set("sweep.parameter", &s)?;
            }
            if let Some(v) = values {
                config.set("sweep.values", &v)?;
            }
            let mut csv = CsvWriter::new(common.output("sweep.csv")?, !common.no_timings)?;
            let records = run_sweep(&config, &mut |r| csv.write(r))?;
            summarize(&records);
        }
        Command::Field(common) => {
            let config = common.config()?;
            let trained = train(&config)?;
            let grid = config.resolved_grid(trained.problem.dim())?;
            let path = common.out.clone().unwrap_or_else(|| default_output_dir().join("field.csv"));
            let rows = dump_field(&trained.model, &trained.problem, &grid, &path)?;
            eprintln!("wrote {rows} points to {}; REL {:e}", path.display(), trained.record.rel);
        }
        Command::Fdm { common, resolutions } => {
            let config = common.config()?;
            let problem = get_problem(&config.problem, config.domain.build()?)?;
            let Domain::Box { lo, hi } = &problem.domain else {
                return Err(Error::UnsupportedGeometry("finite differences need a box domain".into()));
            };
            if lo.len() != 2 {
                return Err(Error::UnsupportedGeometry("finite differences need a 2D box".into()));
            }
            let mut out = common.output("fdm.csv")?;
            writeln!(out, "resolution,rel,seconds")?;
            for n in parse_resolutions(&resolutions)? {
                let start = Instant::now();
                let grid = FdmGrid::with_resolution([lo[0], lo[1]], [hi[0], hi[1]], n)?;
                let rel = solve_fdm(&problem, &grid)?.rel_error(&problem)?;
                let t = if common.no_timings {
                    String::new()
                } else {
                    format!("{:.6}", start.elapsed().as_secs_f64())
                };
                writeln!(out, "{n},{rel:e},{t}")?;
            }
            out.flush()?;
        }
        Command::Compare { common, resolutions } => {
            let config = common.config()?;
            let rows = compare_fdm(&config, &parse_resolutions(&resolutions)?)?;
            write_compare_csv(common.output("compare.csv")?, &rows, !common.no_timings)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
