use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use winograd_core::harness::{
    condition_table, parse_points, render_condition_table, render_matrices, run_bench,
    ExperimentConfig, MatrixFormat, Precision,
};
use winograd_core::tensor::{max_abs_error, rel_l2_error};
use winograd_core::{
    build_plan, conv2d_direct, conv2d_direct_quantized, conv2d_winograd,
    conv2d_winograd_quantized, plan_to_float, BaseMode, Error, Result, Tensor, WinogradPlan,
};

#[derive(Parser)]
#[command(name = "winograd", version, about = "Winograd convolution transforms and error analysis")]
struct Cli {
    /// Seed for Monte-Carlo experiments (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit JSON instead of text/CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Base {
    Canonical,
    Legendre,
}

impl From<Base> for BaseMode {
    fn from(b: Base) -> Self {
        match b {
            Base::Canonical => BaseMode::Canonical,
            Base::Legendre => BaseMode::Legendre,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvMode {
    Canonical,
    Legendre,
    Direct,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Exact,
    Float,
}

#[derive(clap::Args)]
struct PlanArgs {
    /// Output tile edge.
    #[arg(long, default_value_t = 4)]
    o: usize,
    /// Kernel edge.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Comma-separated interpolation points, `inf` for infinity, or `default`.
    #[arg(long, default_value = "default", allow_hyphen_values = true)]
    points: String,
}

#[derive(Subcommand)]
enum Command {
    /// Print the transform matrices of F(o, k).
    GenMatrices {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, value_enum, default_value = "canonical")]
        base: Base,
        #[arg(long, value_enum, default_value = "exact")]
        format: Format,
    },
    /// Convolve tensor files and report the error against direct convolution.
    Conv {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, value_enum, default_value = "canonical")]
        mode: ConvMode,
        /// `float`, `<n>b` or `<n>b+<h>b`.
        #[arg(long, default_value = "float")]
        precision: String,
        /// Output tile edge.
        #[arg(long, default_value_t = 4)]
        o: usize,
        #[arg(long, default_value = "default", allow_hyphen_values = true)]
        points: String,
    },
    /// Monte-Carlo error experiment; writes the report as CSV (and JSON).
    BenchError {
        /// JSON experiment config; defaults apply to missing fields.
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Run trials on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Condition numbers of canonical and Legendre-stage transform matrices.
    Cond {
        #[command(flatten)]
        plan: PlanArgs,
    },
}

fn usage(e: Error) -> Error {
    match e {
        Error::Dimension(msg) => Error::Config(msg),
        other => other,
    }
}

fn plan_from(o: usize, k: usize, points: &str, legendre: bool) -> Result<WinogradPlan> {
    if o == 0 || k == 0 {
        return Err(Error::Config("o and k must be >= 1".into()));
    }
    let pts = parse_points(points, o + k - 1)?;
    build_plan(o, k, pts, legendre).map_err(usage)
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.output.as_deref();
    match cli.command {
        Command::GenMatrices { plan, base, format } => {
            let p = plan_from(plan.o, plan.k, &plan.points, true)?;
            let format = match format {
                Format::Exact => MatrixFormat::Exact,
                Format::Float => MatrixFormat::Float,
            };
            emit(out, &render_matrices(&p, base.into(), format, cli.json))
        }
        Command::Conv {
            input,
            weights,
            mode,
            precision,
            o,
            points,
        } => {
            let x = Tensor::read(&input)?;
            let w = Tensor::read(&weights)?;
            let (_, _, k, _) = w.dims4()?;
            let precision = Precision::parse_name(&precision)?;
            let reference = conv2d_direct(&x, &w)?;
            let y = match mode {
                ConvMode::Direct => match precision {
                    Precision::Float => reference.clone(),
                    Precision::Quantized(q) => conv2d_direct_quantized(&x, &w, &q)?,
                },
                ConvMode::Canonical | ConvMode::Legendre => {
                    let base = if matches!(mode, ConvMode::Legendre) {
                        BaseMode::Legendre
                    } else {
                        BaseMode::Canonical
                    };
                    let plan = plan_to_float(&plan_from(o, k, &points, true)?);
                    match precision {
                        Precision::Float => conv2d_winograd(&x, &w, &plan, base)?,
                        Precision::Quantized(q) => {
                            conv2d_winograd_quantized(&x, &w, &plan, base, &q)?.output
                        }
                    }
                }
            };
            let rel = rel_l2_error(y.data(), reference.data());
            let max = max_abs_error(y.data(), reference.data());
            let summary = if cli.json {
                serde_json::json!({"rel_l2_err": rel, "max_abs_err": max}).to_string()
            } else {
                format!("rel_l2_err={rel:e} max_abs_err={max:e}")
            };
            match out {
                Some(path) => {
                    y.write(path)?;
                    println!("{summary}");
                }
                None => {
                    println!("{}", y.to_json());
                    eprintln!("{summary}");
                }
            }
            Ok(())
        }
        Command::BenchError {
            config,
            trials,
            serial,
        } => {
            let mut cfg = match config {
                Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
                None => ExperimentConfig::default(),
            };
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if serial {
                cfg.parallel = false;
            }
            let report = run_bench(&cfg)?;
            match out {
                Some(path) => {
                    std::fs::write(path, report.to_csv())?;
                    std::fs::write(path.with_extension("json"), report.to_json())?;
                }
                None if cli.json => println!("{}", report.to_json()),
                None => print!("{}", report.to_csv()),
            }
            Ok(())
        }
        Command::Cond { plan } => {
            let p = plan_from(plan.o, plan.k, &plan.points, true)?;
            let rows = condition_table(&p);
            if rows
                .iter()
                .any(|r| !r.two_norm.is_finite() || !r.frobenius.is_finite())
            {
                return Err(Error::Numeric("singular transform matrix".into()));
            }
            let text = if cli.json {
                serde_json::to_string_pretty(&rows)? + "\n"
            } else {
                render_condition_table(&rows)
            };
            emit(out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
