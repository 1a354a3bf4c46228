//! `drbem`: fit disturbance models, run closed-loop experiments, export
//! controller LPs.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or parse error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Method, RunConfig};

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

#[derive(Parser)]
#[command(name = "drbem", version, about = "Distributionally robust energy management for building districts")]
struct Cli {
    /// Experiment config (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Scalar overrides applied on top of the config file.
#[derive(clap::Args)]
struct Overrides {
    /// Run this seed only.
    #[arg(long)]
    seed: Option<u64>,
    /// Controllers to run; repeat for several.
    #[arg(long = "method", value_enum)]
    methods: Vec<Method>,
    #[arg(long)]
    weeks: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.seeds = vec![s];
        }
        if !self.methods.is_empty() {
            cfg.methods = self.methods;
        }
        if let Some(w) = self.weeks {
            cfg.weeks = w;
        }
        if let Some(t) = self.horizon {
            cfg.horizon = t;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = e;
        }
        if let Some(g) = self.gamma {
            cfg.gamma = g;
        }
        if let Some(o) = self.out {
            cfg.output_dir = o;
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit forecast-error models and ambiguity bounds to `<id>.csv` histories.
    Fit {
        history_dir: PathBuf,
        /// Write the JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Closed-loop simulation of every (seed, method) pair.
    Simulate {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the LP solved at one hour of the test period.
    ExportLp {
        #[arg(long)]
        hour: usize,
        #[arg(long, value_enum, default_value = "adr")]
        method: Method,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
        /// LP file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also solve it and print the objective.
        #[arg(long)]
        solve: bool,
    },
    /// Summarise the traces of a previous `simulate` run.
    Report { dir: PathBuf },
    /// Generate synthetic training histories and a test scenario.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        weeks: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Fit { history_dir, out, horizon } => {
            if let Some(t) = horizon {
                cfg.horizon = t;
            }
            cfg.validate()?;
            commands::fit(&cfg, &history_dir, out.as_deref())
        }
        Command::Simulate { overrides } => {
            overrides.apply(&mut cfg);
            let rep = commands::simulate(&cfg)?;
            print!("{}", rep.to_table());
            eprintln!("outputs in {}", cfg.output_dir.display());
            Ok(())
        }
        Command::ExportLp {
            hour,
            method,
            seed,
            horizon,
            out,
            solve,
        } => {
            if let Some(t) = horizon {
                cfg.horizon = t;
            }
            commands::export(&cfg, seed, method, hour, &out, solve)
        }
        Command::Report { dir } => {
            print!("{}", commands::report_dir(&dir)?.to_table());
            Ok(())
        }
        Command::Synth { seed, weeks, out } => {
            if let Some(w) = weeks {
                cfg.weeks = w;
            }
            cfg.validate()?;
            commands::synth(&cfg, seed, &out)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors by itself.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("drbem: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
