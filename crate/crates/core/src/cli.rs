//! Command-line front end. Exit codes: 0 success, 2 bad configuration or
//! arguments, 3 numerical failure, 1 anything else.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{factor_grid, StabilityFunction};
use crate::config::ExperimentConfig;
use crate::driver;
use crate::error::{Error, Result};
use crate::pit::{Basis, PropagatorSpec};
use crate::presets;
use crate::spectral::decay_rate;
use crate::trace_io::{write_factors, write_trace, FieldWriter};

#[derive(Debug, Parser)]
#[command(
    name = "parareal",
    version,
    about = "Parareal experiments with and without a coarse propagator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Parareal and write the per-slice error trace.
    Run(RunArgs),
    /// Tabulate contraction factors with and without a coarse propagator.
    Factors(FactorArgs),
    /// Write the sequential fine solution as x,t,u rows.
    SolutionField(FieldArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Args)]
pub struct Source {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset; ignored when --config is given.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Drop the coarse propagator.
    #[arg(long)]
    pub no_coarse: bool,
    /// Maximum number of iterations.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Evaluate slices on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Fill the wall-time column.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub source: Source,
    /// Write every `stride`-th fine step.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Sine,
    Cosine,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(long, default_value_t = 1)]
    pub m_min: usize,
    #[arg(long, default_value_t = 16)]
    pub m_max: usize,
    /// Smallest slice width; widths double up to --dt-max.
    #[arg(long, default_value_t = 0.015625)]
    pub dt_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub dt_max: f64,
    #[arg(long, value_enum, default_value_t = BasisArg::Sine)]
    pub basis: BasisArg,
    /// Domain length L; decay rates are (m pi / L)^2.
    #[arg(long, default_value_t = PI)]
    pub length: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. }
        | Error::InvalidArgument(_)
        | Error::NotFound(_)
        | Error::UndefinedFactor { .. } => 2,
        Error::SingularSystem { .. } | Error::Numerical(_) => 3,
        Error::Io(_) => 1,
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(source: &Source) -> Result<ExperimentConfig> {
    let mut cfg = match (&source.config, &source.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => presets::preset(name)?,
        (None, None) => ExperimentConfig::default(),
    };
    if let Some(out) = &source.out {
        cfg.output.path = Some(out.clone());
    }
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut cfg = load(&args.source)?;
    if args.no_coarse {
        cfg = cfg.without_coarse();
    }
    if let Some(k) = args.iterations {
        cfg.parareal.iterations = k;
    }
    if args.sequential {
        cfg.parareal.parallel = false;
    }
    if args.timing {
        cfg.parareal.timing = true;
    }
    let exp = cfg.build()?;
    let trace = driver::run(exp.model.as_ref(), &exp.u0, &exp.parareal)?;
    let mut out = open_out(cfg.output.path.as_deref())?;
    write_trace(&trace, &mut out)?;
    out.flush()?;
    if let Some(k) = trace.last_iteration() {
        eprintln!("iterations: {k}, sup error: {:e}", trace.sup_error(k)?);
    }
    Ok(())
}

fn cmd_factors(args: &FactorArgs) -> Result<()> {
    if args.m_min > args.m_max {
        return Err(Error::config("--m-min", "mode range is empty"));
    }
    let basis = match args.basis {
        BasisArg::Sine => Basis::Sine,
        BasisArg::Cosine => Basis::Cosine,
    };
    if basis == Basis::Sine && args.m_min == 0 {
        return Err(Error::config("--m-min", "the sine basis has no mode 0"));
    }
    if !(args.length > 0.0) || !args.length.is_finite() {
        return Err(Error::config("--length", "must be positive"));
    }
    if !(args.dt_min > 0.0) || !args.dt_min.is_finite() {
        return Err(Error::config("--dt-min", "must be positive"));
    }
    let mut widths = Vec::new();
    let mut dt = args.dt_min;
    while dt <= args.dt_max * (1.0 + 1e-12) {
        widths.push(dt);
        dt *= 2.0;
    }
    if widths.is_empty() {
        return Err(Error::config("--dt-min", "slice-width range is empty"));
    }
    let modes: Vec<usize> = (args.m_min..=args.m_max).collect();
    let grid = factor_grid(&modes, &widths, StabilityFunction::BackwardEuler, |m| {
        decay_rate(m, args.length)
    })?;
    let mut out = open_out(args.out.as_deref())?;
    write_factors(&grid, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_solution_field(args: &FieldArgs) -> Result<()> {
    if args.stride == 0 {
        return Err(Error::config("--stride", "must be at least 1"));
    }
    let cfg = load(&args.source)?;
    let exp = cfg.build()?;
    let model = exp.model.as_ref();
    let points = model
        .grid_points()
        .ok_or_else(|| Error::config("model.kind", "solution-field needs a grid model"))?;
    let part = &exp.parareal.partition;
    let steps = exp.parareal.fine.steps_per_slice;
    let one = PropagatorSpec::fine(1);
    let mut state = exp.u0.clone();
    let mut samples = vec![(part.t_start(), state.values().to_vec())];
    let mut count = 0usize;
    for n in 0..part.n_slices() {
        let (a, b) = part.slice(n);
        let h = (b - a) / steps as f64;
        for j in 0..steps {
            let t0 = a + j as f64 * h;
            let t1 = if j + 1 == steps {
                b
            } else {
                a + (j + 1) as f64 * h
            };
            state = model.propagate(&one, &state, t0, t1)?;
            if !state.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at t = {t1}")));
            }
            count += 1;
            if count.is_multiple_of(args.stride) || (n + 1 == part.n_slices() && j + 1 == steps) {
                samples.push((t1, state.values().to_vec()));
            }
        }
    }
    let mut out = open_out(cfg.output.path.as_deref())?;
    let mut field = FieldWriter::new(&mut out)?;
    for (t, values) in &samples {
        field.write_slice(&points, *t, values)?;
    }
    field.finish()?;
    out.flush()?;
    Ok(())
}

fn cmd_presets() -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for name in presets::names() {
        writeln!(out, "{name:<22} {}", presets::describe(name).unwrap_or(""))?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Factors(args) => cmd_factors(args),
        Command::SolutionField(args) => cmd_solution_field(args),
        Command::Presets => cmd_presets(),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
