use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use marginnn::harness::{
    cmd_fit, cmd_gridcheck, cmd_predict, cmd_sample, run_experiment, ExperimentConfig, Method,
    PenaltyFlags,
};
use marginnn::{CoverMode, Error, PenaltyParams, SpiralParams};

/// Margin-regularized 1-NN: fit, predict, and run the spiral benchmark.
#[derive(Parser)]
#[command(name = "marginnn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PenaltyArgs {
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c_dim: Option<f64>,
    /// Doubling dimension; defaults to the data dimension.
    #[arg(long)]
    ddim: Option<f64>,
}

impl From<PenaltyArgs> for PenaltyFlags {
    fn from(a: PenaltyArgs) -> Self {
        PenaltyFlags {
            c1: a.c1,
            c_dim: a.c_dim,
            ddim: a.ddim,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Select a margin for a sample and write the model and trace.
    Fit {
        /// Sample CSV (x1,...,xd,label) or JSON ([[coords], label] pairs).
        sample: PathBuf,
        #[arg(long, default_value = "model.json")]
        model_out: PathBuf,
        #[arg(long, default_value = "trace.csv")]
        trace_out: PathBuf,
        #[arg(long, default_value = "exact")]
        mode: CoverMode,
        #[command(flatten)]
        penalty: PenaltyArgs,
    },
    /// Predict labels for a points CSV with a saved model.
    Predict {
        model: PathBuf,
        points: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the spiral comparison described by a JSON config.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        test_size: Option<usize>,
        /// Base seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cv_cover: Option<CoverMode>,
    },
    /// Check that the penalty dominates the deviation levels of the margin grid.
    Gridcheck {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        levels: usize,
        #[arg(long, default_value_t = 2.0)]
        c1: f64,
        #[arg(long, default_value_t = 1.0)]
        c_dim: f64,
        #[arg(long, default_value_t = 2.0)]
        ddim: f64,
    },
    /// Draw a spiral sample as CSV.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 3.0)]
        frequency: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Exit status on success: 0, or 1 when a grid check fails.
fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Fit {
            sample,
            model_out,
            trace_out,
            mode,
            penalty,
        } => {
            let s = cmd_fit(&sample, penalty.into(), mode, &model_out, &trace_out)?;
            println!("gamma = {}", marginnn::io::fmt_g17(s.gamma));
            println!("removed_count = {} of {}", s.removed_count, s.n);
            match s.objective {
                Some(o) => println!("objective = {}", marginnn::io::fmt_g17(o)),
                None => println!("objective = none"),
            }
        }
        Command::Predict { model, points, out } => {
            let mut w = output(out)?;
            cmd_predict(&model, &points, &mut w)?;
            w.flush()?;
        }
        Command::Experiment {
            config,
            output,
            methods,
            sizes,
            trials,
            folds,
            test_size,
            seed,
            cv_cover,
        } => {
            let mut cfg = ExperimentConfig::parse(&std::fs::read_to_string(&config)?)?;
            if let Some(v) = output {
                cfg.output = Some(v);
            }
            if let Some(v) = methods {
                cfg.methods = v;
            }
            if let Some(v) = sizes {
                cfg.sizes = v;
            }
            if let Some(v) = trials {
                cfg.trials = v;
            }
            if let Some(v) = folds {
                cfg.folds = v;
            }
            if let Some(v) = test_size {
                cfg.test_size = v;
            }
            if let Some(v) = seed {
                cfg.spiral.seed = v;
            }
            if let Some(v) = cv_cover {
                cfg.cv_cover = v;
            }
            if cfg.output.is_none() {
                cfg.output = Some(PathBuf::from("results.csv"));
            }
            let outcome = run_experiment(&cfg)?;
            let paths = outcome.paths.expect("output path set");
            eprintln!(
                "{} rows ({} reused) -> {}",
                outcome.rows.len(),
                outcome.reused,
                paths.results.display()
            );
            for s in &outcome.summary {
                println!(
                    "{:<15} n={:<6} mean_test_error={:.9} std={:.9}",
                    s.method.name(),
                    s.n,
                    s.mean_test_error,
                    s.std_test_error
                );
            }
        }
        Command::Gridcheck {
            n,
            levels,
            c1,
            c_dim,
            ddim,
        } => {
            let p = PenaltyParams::new(c1, c_dim, ddim)?;
            let (report, text) = cmd_gridcheck(n, &p, levels)?;
            print!("{text}");
            if !report.passed() {
                return Ok(1);
            }
        }
        Command::Sample {
            n,
            amplitude,
            frequency,
            seed,
            out,
        } => {
            let p = SpiralParams::new(amplitude, frequency, seed)?;
            let mut w = output(out)?;
            let (bayes, asym) = cmd_sample(&p, n, &mut w)?;
            w.flush()?;
            eprintln!("bayes_risk = {bayes:.9}");
            eprintln!("one_nn_asymptote = {asym:.9}");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("marginnn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
