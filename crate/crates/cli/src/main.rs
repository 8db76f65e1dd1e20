mod error;
mod problem;
mod report;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dirinfo_core::capacity::{brute_force_capacity_with, solve_capacity_with};
use dirinfo_core::dirinfo::audit::{run_audit, AuditPlan, Property};
use dirinfo_core::dirinfo::{directed_information_sum, DUAL_FORMULA_TOLERANCE};
use dirinfo_core::nrdf::{brute_force_nrdf, curve_shape_violations, rd_curve, solve_nrdf, NrdfResult};
use dirinfo_core::{KernelClass, SolverConfig};

use error::CliError;
use problem::{kernel_file, Budgets, ClassName, Format, ProblemFile, Units};
use report::*;

/// Directed information, feedback capacity and causal rate distortion on
/// finite alphabets.
#[derive(Parser)]
#[command(name = "dirinfo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Directed information of a (backward, forward) kernel pair.
    Compute(Common),
    /// Feedback capacity of a forward kernel, optionally under a power constraint.
    Capacity(Common),
    /// Causal rate distortion of a source, at one budget or along a budget grid.
    Nrdf(Common),
    /// Randomized property audits.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
    /// Also run the brute-force grid oracle at this resolution.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    units: Option<Units>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    /// convexity, concavity, lsc, dual-formula, no-feedback or all.
    suite: String,
    /// Optional problem file whose kernels are audited as an extra instance.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the violation threshold of every property.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
}

struct Settings {
    cfg: SolverConfig,
    units: Units,
    format: Format,
    output: Option<PathBuf>,
    grid: Option<usize>,
}

impl Settings {
    fn new(file: &ProblemFile, args: &Common) -> Result<Self, CliError> {
        let mut cfg = file.solver_config();
        cfg.tol = args.tol.unwrap_or(cfg.tol);
        cfg.max_iters = args.max_iters.unwrap_or(cfg.max_iters);
        cfg.seed = args.seed.unwrap_or(cfg.seed);
        let explicit = file.solver.as_ref().and_then(|s| s.grid_resolution);
        let grid = args.grid.or(explicit);
        if let Some(g) = grid {
            cfg.grid_resolution = g;
        }
        cfg.validate()?;
        Ok(Self {
            cfg,
            units: args.out.units.unwrap_or(file.units()),
            format: args.out.format.unwrap_or(file.format()),
            output: args.out.output.clone(),
            grid,
        })
    }

    fn emit(&self, report: &impl Report) -> Result<(), CliError> {
        emit(report, self.format, self.output.as_deref())
    }
}

fn emit(report: &impl Report, format: Format, output: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => report.json(),
        Format::Csv => report.csv(),
    };
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn compute(args: &Common) -> Result<(), CliError> {
    let file = ProblemFile::read(&args.input)?;
    let settings = Settings::new(&file, args)?;
    let spec = file.alphabet()?;
    let (p, q) = (file.backward(&spec)?, file.forward(&spec)?);
    let r = directed_information_sum(&p, &q)?;
    let u = settings.units;
    let gap = r.formula_gap();
    settings.emit(&ComputeReport {
        command: "compute",
        units: u,
        sum_form: u.convert(r.sum_form.nats()),
        divergence_form: u.convert(r.divergence_form.nats()),
        formula_gap: u.convert(gap),
        per_step_terms: r.per_step_terms.iter().map(|t| u.convert(t.nats())).collect(),
        normalized: r.normalized.map(|v| u.convert(v)),
    })?;
    if gap > DUAL_FORMULA_TOLERANCE {
        return Err(CliError::Inconsistent(format!("the two routes differ by {gap:e} nats")));
    }
    Ok(())
}

fn capacity(args: &Common) -> Result<(), CliError> {
    let file = ProblemFile::read(&args.input)?;
    let settings = Settings::new(&file, args)?;
    let spec = file.alphabet()?;
    let q = file.forward(&spec)?;
    let c = file.power(&spec)?;
    let class = file.class();
    let r = solve_capacity_with(&q, c.as_ref(), &settings.cfg, class)?;
    let u = settings.units;
    let grid = match settings.grid {
        Some(res) => Some(GridCheck {
            resolution: res,
            value: u.convert(brute_force_capacity_with(&q, c.as_ref(), res, class)?.nats()),
        }),
        None => None,
    };
    settings.emit(&CapacityReport {
        command: "capacity",
        units: u,
        kernel_class: match class {
            KernelClass::Feedback => ClassName::Feedback,
            KernelClass::NoFeedback => ClassName::NoFeedback,
        },
        value: u.convert(r.value.nats()),
        normalized: u.convert(r.normalized()),
        iterations: r.iterations,
        converged: r.converged,
        budget: c.as_ref().map(|c| c.budget()),
        constraint_slack: r.constraint_slack,
        multiplier: r.multiplier.map(|s| u.convert(s)),
        grid,
        argmax: r.argmax.steps().to_vec(),
    })
}

fn nrdf_point(budget: f64, r: &NrdfResult, u: Units) -> NrdfPoint {
    NrdfPoint {
        budget,
        value: u.convert(r.value.nats()),
        normalized: u.convert(r.normalized()),
        iterations: r.iterations,
        converged: r.converged,
        distortion_slack: r.distortion_slack,
        multiplier: r.multiplier.map(|s| u.convert(s)),
    }
}

fn nrdf(args: &Common) -> Result<(), CliError> {
    let file = ProblemFile::read(&args.input)?;
    let settings = Settings::new(&file, args)?;
    let spec = file.alphabet()?;
    let src = file.source(&spec)?;
    let (d, budgets) = file.distortion(&spec)?;
    let u = settings.units;
    match budgets {
        Budgets::Single(budget) => {
            let r = solve_nrdf(&src, &d, &settings.cfg)?;
            let grid = match settings.grid {
                Some(res) => Some(GridCheck {
                    resolution: res,
                    value: u.convert(brute_force_nrdf(&src, &d, res)?.nats()),
                }),
                None => None,
            };
            settings.emit(&NrdfReport {
                command: "nrdf",
                units: u,
                point: nrdf_point(budget, &r, u),
                grid,
                argmin: r.argmin.steps().to_vec(),
            })
        }
        Budgets::Curve(budgets) => {
            let curve = rd_curve(&src, &d, &budgets, &settings.cfg)?;
            let pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.budget, p.result.value.nats())).collect();
            let (increase, excess) = curve_shape_violations(&pts);
            settings.emit(&CurveReport {
                command: "nrdf",
                units: u,
                curve: curve.iter().map(|p| nrdf_point(p.budget, &p.result, u)).collect(),
                max_increase: u.convert(increase),
                max_chord_excess: u.convert(excess),
            })
        }
    }
}

fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let properties: Vec<Property> = match args.suite.as_str() {
        "all" => Property::ALL.to_vec(),
        name => vec![Property::parse(name).ok_or_else(|| {
            CliError::Parse(format!(
                "unknown suite {name:?}; expected convexity, concavity, lsc, dual-formula, no-feedback or all"
            ))
        })?],
    };
    let file = args.input.as_deref().map(ProblemFile::read).transpose()?;
    let extra = match &file {
        Some(f) => {
            let spec = f.alphabet()?;
            Some((f.backward(&spec)?, f.forward(&spec)?))
        }
        None => None,
    };
    let seed = args
        .seed
        .unwrap_or_else(|| file.as_ref().map(|f| f.solver_config().seed).unwrap_or_default());
    let plan = AuditPlan {
        threshold: args.threshold,
        ..AuditPlan::with_seed(seed)
    };
    let mut outcomes = Vec::new();
    for property in properties {
        let o = run_audit(property, &plan, extra.as_ref().map(|(p, q)| (p, q)))?;
        let counterexample = o.counterexample.map(|inst| Counterexample {
            files: inst
                .backward
                .iter()
                .flat_map(|p| inst.forward.iter().map(move |q| kernel_file(p, q)))
                .collect(),
            label: inst.label,
        });
        outcomes.push(PropertyOutcome {
            property: property.name(),
            instances: o.instances,
            worst: o.worst,
            threshold: o.threshold,
            passed: o.passed,
            counterexample,
        });
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.property).collect();
    let format = args.out.format.or(file.as_ref().map(|f| f.format())).unwrap_or_default();
    emit(
        &VerifyReport {
            command: "verify",
            suite: args.suite.clone(),
            seed,
            passed,
            properties: outcomes,
        },
        format,
        args.out.output.as_deref(),
    )?;
    if !passed {
        return Err(CliError::Violation(failed.join(", ")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute(a) => compute(a),
        Command::Capacity(a) => capacity(a),
        Command::Nrdf(a) => nrdf(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirinfo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
