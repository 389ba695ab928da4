use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smmr_core::coefficients::{builtin_schemes, load_scheme_file};
use smmr_harness::config::{ConfigFile, MethodSpec, ProblemKind, ProjectionChoice, StepSequence, SweepConfig};
use smmr_harness::sweep::REFERENCE_REFINEMENT;
use smmr_harness::{build_problem, emit_csv, reference_solve, work_precision, write_csv, HarnessError};

#[derive(Parser)]
#[command(name = "smmr", version, about = "Surrogate-model multirate integrator benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep methods over a range of macro step sizes and write CSV rows.
    Run(RunArgs),
    /// Check the consistency identities of the built-in (and a loaded) scheme.
    ValidateSchemes {
        #[arg(long)]
        scheme_file: Option<PathBuf>,
    },
    /// Compute the full-model reference solution at the final time.
    Reference(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// lorenz96 | brusselator | advection | linear
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated methods: euler, mri-ralston2, spc-ralston2,
    /// mri-ralston3, spc-ralston3, rk-full[:k], rk-surrogate[:k], or a
    /// scheme-file name.
    #[arg(long)]
    methods: Option<String>,
    /// Step counts as n0,ratio,count.
    #[arg(long)]
    steps: Option<String>,
    /// Inner method order (default: scheme order + 1).
    #[arg(long)]
    inner_order: Option<u32>,
    #[arg(long)]
    micro_steps: Option<usize>,
    /// identity | mesh1d | mesh2d | file:<path>
    #[arg(long)]
    projection: Option<String>,
    /// CSV (run) or vector (reference) output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    fine_p: Option<usize>,
    #[arg(long)]
    coarse_p: Option<usize>,
    #[arg(long)]
    surrogate_forcing: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    /// Concurrent runs; 1 keeps timings undisturbed.
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML file with any of the options above; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme_file: Option<PathBuf>,
    /// Skip the discarded warm-up run per method.
    #[arg(long)]
    no_warm_up: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<(SweepConfig, Option<PathBuf>), HarnessError> {
        let file = match &self.config {
            Some(p) => SweepConfig::from_file(p)?,
            None => ConfigFile::default(),
        };
        let problem = self
            .problem
            .clone()
            .or(file.problem)
            .ok_or_else(|| HarnessError::Config("--problem is required".into()))?;
        let kind: ProblemKind = problem.parse()?;
        let mut cfg = SweepConfig::for_problem(kind);

        if let Some(m) = &self.methods {
            cfg.methods = MethodSpec::parse_list(m)?;
        } else if let Some(list) = &file.methods {
            cfg.methods = list.iter().map(|m| MethodSpec::parse(m)).collect::<Result<_, _>>()?;
        }
        if let Some(s) = &self.steps {
            cfg.steps = s.parse()?;
        } else if let Some(s) = file.steps {
            cfg.steps = StepSequence::new(s.n0, s.ratio, s.count)?;
        }
        cfg.inner_order = self.inner_order.or(file.inner_order);
        if let Some(m) = self.micro_steps.or(file.micro_steps) {
            cfg.micro_steps = m;
        }
        if let Some(p) = self.projection.as_ref().or(file.projection.as_ref()) {
            cfg.problem.projection = p.parse::<ProjectionChoice>()?;
        }
        cfg.problem.fine_p = self.fine_p.or(file.fine_p);
        cfg.problem.coarse_p = self.coarse_p.or(file.coarse_p);
        cfg.problem.surrogate_forcing = self.surrogate_forcing.or(file.surrogate_forcing);
        cfg.problem.t_end = self.tend.or(file.tend);
        if let Some(j) = self.jobs.or(file.jobs) {
            cfg.jobs = j;
        }
        cfg.scheme_file = self.scheme_file.clone().or(file.scheme_file);
        if let Some(path) = &cfg.scheme_file {
            // A loaded scheme joins the default method list.
            if self.methods.is_none() && file.methods.is_none() {
                let s = load_scheme_file(path)?;
                cfg.methods.push(MethodSpec::Scheme(s.name().to_string()));
            }
        }
        cfg.warm_up = !self.no_warm_up && file.warm_up.unwrap_or(true);
        if let Some(c) = file.reference_check {
            cfg.reference_check = c;
        }
        cfg.validate()?;
        Ok((cfg, self.out.clone().or(file.out)))
    }
}

fn run(args: &RunArgs) -> Result<bool, HarnessError> {
    let (cfg, out) = args.resolve()?;
    let report = work_precision(&cfg)?;
    match &out {
        Some(path) => emit_csv(&report, path)?,
        None => write_csv(&report, std::io::stdout().lock()).map_err(|e| HarnessError::Csv {
            path: "<stdout>".into(),
            message: e.to_string(),
        })?,
    }

    eprintln!("{}", report.problem);
    for s in &report.slopes {
        match s.slope {
            Some(v) => eprintln!(
                "  {:<16} slope {:>6.3} (nominal {}, {} points, {} on floor)",
                s.method, v, s.nominal_order, s.points, s.floor_points
            ),
            None => eprintln!("  {:<16} slope n/a ({} usable points)", s.method, s.points),
        }
    }
    if let Some(r) = &report.reference {
        if !r.passed() {
            eprintln!(
                "warning: reference ({} steps) changes by {:.2}x the smallest sweep error when its step is doubled",
                r.n_steps,
                r.gate_ratio.unwrap_or(f64::NAN)
            );
        }
    }
    for f in &report.failures {
        eprintln!("run failed: {} with {} steps: {}", f.method, f.n_steps, f.message);
    }
    for r in report.audit_failures() {
        eprintln!(
            "counter mismatch: {} with {} steps: got ({}, {}), expected {:?}",
            r.method, r.n_steps, r.full_evals, r.surrogate_evals, r.expected_evals
        );
    }
    Ok(report.ok())
}

fn reference(args: &RunArgs) -> Result<bool, HarnessError> {
    let (cfg, out) = args.resolve()?;
    let setup = build_problem(&cfg.problem)?;
    let finest = *cfg.steps.counts()?.last().expect("validated");
    let y = reference_solve(&setup, finest * REFERENCE_REFINEMENT)?;
    let mut text = String::with_capacity(y.len() * 26);
    for v in &y {
        text.push_str(&format!("{v:.16e}\n"));
    }
    match out {
        Some(path) => std::fs::write(&path, text).map_err(|source| HarnessError::Io { path, source })?,
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| HarnessError::Io {
                path: "<stdout>".into(),
                source,
            })?,
    }
    Ok(true)
}

fn validate(scheme_file: Option<&PathBuf>) -> Result<bool, HarnessError> {
    let mut schemes = builtin_schemes();
    if let Some(p) = scheme_file {
        schemes.push(load_scheme_file(p)?);
    }
    let mut ok = true;
    for s in &schemes {
        let d = s.validate();
        if d.is_empty() {
            println!("{:<16} ok ({}, order {}, {} stages)", s.name(), s.kind(), s.order(), s.stages());
        } else {
            ok = false;
            println!("{:<16} FAILED", s.name());
            for diag in d {
                println!("    {diag}");
            }
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Reference(a) => reference(a),
        Command::ValidateSchemes { scheme_file } => validate(scheme_file.as_ref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
