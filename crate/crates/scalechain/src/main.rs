use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scalechain::files::{self, ModelFile, SweepSpec};
use scalechain::harness::{self, SimulateDocument, SimulationSummary};
use scalechain::trace_csv;
use scalechain::{Error, Result};
use scalechain_core::{MetricKind, ModelBundle, SimulationConfig};

const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "scalechain",
    version,
    about = "Steady-state model and simulator for metric-based serverless autoscaling"
)]
struct Cli {
    /// Autoscaler configuration JSON.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master random seed; overrides the seed in a simulation config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of independent simulation seeds.
    #[arg(long, global = true, default_value_t = 1)]
    seeds: usize,
    /// Largest accepted relative error for `compare`.
    #[arg(long, global = true, default_value_t = 0.15)]
    tolerance: f64,
    /// Include transition matrices and the stationary vector in `predict` output.
    #[arg(long, global = true)]
    explain: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the metric model and response-time function to a profiling trace.
    Fit {
        trace: PathBuf,
        #[arg(long, default_value = "cc")]
        metric: MetricKind,
    },
    /// Predict steady-state averages for one arrival rate.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Report the expected request count over a window of this many seconds.
        #[arg(long)]
        request_window: Option<f64>,
    },
    /// Predict every (lambda, target value) point of a sweep spec into a CSV.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        spec: PathBuf,
    },
    /// Run the discrete-event simulator.
    Simulate {
        sim_config: PathBuf,
        /// Write the post-warmup profiling trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Add the `carried` diagnostic column to the trace.
        #[arg(long)]
        carried: bool,
        /// Keep the per-second time series in the report.
        #[arg(long)]
        series: bool,
    },
    /// Compare analytical predictions with the simulator.
    Compare {
        #[arg(long)]
        model: PathBuf,
        sim_config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn require_config(cli: &Cli) -> Result<scalechain_core::AutoscalerConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Invalid("--config <json> is required".into()))?;
    files::read_config(path)
}

fn read_sim_config(cli: &Cli, path: &PathBuf) -> Result<SimulationConfig> {
    let mut cfg: SimulationConfig = files::read_json(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Fit { trace, metric } => {
            let out = cli
                .out
                .as_ref()
                .ok_or_else(|| Error::Invalid("--out <path> is required for fit".into()))?;
            let loaded = trace_csv::parse_trace(trace)?;
            let bundle = ModelBundle::fit(&loaded.trace, *metric)?;
            let mm = &bundle.metric_model;
            let rtf = &bundle.response_time_function;
            println!(
                "trace: {} rows, {} distinct per-container rates",
                loaded.trace.len(),
                loaded.distinct_rates
            );
            if loaded.trace.len() < scalechain_core::config::RECOMMENDED_MIN_ROWS {
                eprintln!(
                    "warning: fewer than {} measurements; fits may be unreliable",
                    scalechain_core::config::RECOMMENDED_MIN_ROWS
                );
            }
            println!("metric model:   mse={:.6} r2={:.4}", mm.fit_mse, mm.fit_r2);
            println!("response time:  mse={:.6} r2={:.4}", rtf.fit_mse, rtf.fit_r2);
            files::write_json(out, &ModelFile::new(bundle))?;
            Ok(0)
        }
        Command::Predict {
            model,
            lambda,
            request_window,
        } => {
            let bundle = files::read_model(model)?;
            let cfg = require_config(cli)?;
            let doc = harness::predict_document(&bundle, &cfg, *lambda, cli.explain, *request_window)?;
            if doc.report.diagnostics.transient_states > 0 {
                eprintln!(
                    "note: {} transient states carry no stationary mass",
                    doc.report.diagnostics.transient_states
                );
            }
            if doc.report.diagnostics.extrapolated_mass > 0.0 {
                eprintln!(
                    "warning: {:.3} of the stationary mass sits beyond the profiled rate range",
                    doc.report.diagnostics.extrapolated_mass
                );
            }
            emit(cli.out.as_ref(), &files::to_json(&doc))?;
            Ok(0)
        }
        Command::Sweep { model, spec } => {
            let out = cli
                .out
                .as_ref()
                .ok_or_else(|| Error::Invalid("--out <csv> is required for sweep".into()))?;
            let bundle = files::read_model(model)?;
            let spec: SweepSpec = files::read_json(spec)?;
            let rows = harness::run_sweep(&bundle, &spec)?;
            harness::write_sweep_csv(&rows, out)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("warning: {failed} of {} sweep points failed", rows.len());
            }
            Ok(if failed == rows.len() { 2 } else { 0 })
        }
        Command::Simulate {
            sim_config,
            trace,
            carried,
            series,
        } => {
            let cfg = read_sim_config(cli, sim_config)?;
            let mut runs = harness::simulate_seeds(&cfg, cli.seeds)?;
            if let Some(path) = trace {
                let mut rows = scalechain_core::ProfilingTrace::default();
                let mut flags = Vec::new();
                for r in &runs {
                    let (t, c) = r.profiling_trace();
                    rows.extend(&t);
                    flags.extend(c);
                }
                if *carried {
                    trace_csv::write_trace_with_carried(&rows, &flags, path)?;
                } else {
                    trace_csv::write_trace(&rows, path)?;
                }
            }
            if !series {
                runs.iter_mut().for_each(|r| r.series.clear());
            }
            let doc = SimulateDocument {
                schema_version: files::SCHEMA_VERSION,
                config: cfg,
                summary: SimulationSummary::from_runs(&runs),
                runs,
            };
            emit(cli.out.as_ref(), &files::to_json(&doc))?;
            Ok(0)
        }
        Command::Compare { model, sim_config } => {
            let bundle = files::read_model(model)?;
            let sim = read_sim_config(cli, sim_config)?;
            let model_cfg = cli.config.as_ref().map(files::read_config).transpose()?;
            let cmp = harness::compare(&bundle, model_cfg.as_ref(), &sim, cli.seeds, cli.tolerance)?;
            println!(
                "{:<22}{:>14}{:>14}{:>10}",
                "metric", "analytical", "simulated", "rel.err"
            );
            let rows = [
                (
                    "avg_replica_count",
                    cmp.analytical.avg_replica_count,
                    cmp.simulated.avg_replica_count.mean,
                    cmp.relative_error.avg_replica_count,
                ),
                (
                    "avg_concurrency",
                    cmp.analytical.avg_concurrency,
                    cmp.simulated.avg_concurrency.mean,
                    cmp.relative_error.avg_concurrency,
                ),
                (
                    "avg_response_time_s",
                    cmp.analytical.avg_response_time_s,
                    cmp.simulated.avg_response_time_s.mean,
                    cmp.relative_error.avg_response_time_s,
                ),
            ];
            for (name, a, s, e) in rows {
                println!("{name:<22}{a:>14.6}{s:>14.6}{:>9.2}%", 100.0 * e);
            }
            if let Some(out) = &cli.out {
                files::write_json(out, &cmp)?;
            }
            if cmp.within_tolerance {
                println!("within tolerance {}", cmp.tolerance);
                Ok(0)
            } else {
                println!("exceeds tolerance {}", cmp.tolerance);
                Ok(EXIT_TOLERANCE)
            }
        }
    }
}
