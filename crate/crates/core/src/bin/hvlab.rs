use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use hvlab::sim::{self, ExperimentSpec};
use hvlab::{Error, Result};

#[derive(Parser)]
#[command(name = "hvlab", version, about = "H-V walk and RWLM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Return-probability cells: CSV summary and JSON-lines trials.
    Simulate,
    /// SVG of one trajectory, edges colored by first visit.
    Render,
    /// Frozen-label (q = 0) experiments.
    Q0,
    /// Label statistics around the walker against spanning-tree samples.
    Stationarity,
    /// Exact parity enumeration of q = 1 paths.
    Enumerate,
}

/// Every flag is also a key of the spec file; flags win.
#[derive(Args)]
struct Opts {
    /// Flat key=value file with defaults for the flags below.
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    #[arg(long, global = true)]
    walk: Option<String>,
    #[arg(long, global = true)]
    q: Option<String>,
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    r: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    ustp_radius: Option<String>,
    #[arg(long, global = true)]
    depth: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    window: Option<String>,
}

impl Opts {
    fn spec(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::default();
        if let Some(path) = &self.spec {
            spec.apply_file(path)?;
        }
        let flags = [
            ("walk", &self.walk),
            ("q", &self.q),
            ("p", &self.p),
            ("n", &self.n),
            ("config", &self.config),
            ("seed", &self.seed),
            ("k", &self.k),
            ("r", &self.r),
            ("trials", &self.trials),
            ("steps", &self.steps),
            ("out", &self.out),
            ("threads", &self.threads),
            ("preset", &self.preset),
            ("ustp-radius", &self.ustp_radius),
            ("depth", &self.depth),
            ("target", &self.target),
            ("window", &self.window),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                spec.set(key, v)?;
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn run(cli: Cli) -> Result<()> {
    let spec = cli.opts.spec()?;
    if let Some(t) = spec.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate => {
            let out = sim::cmd_simulate(&spec)?;
            for c in &out.cells {
                eprintln!(
                    "q={} n={} k={} r={}: p_hat={:.4} bound={:.4} z={:.2}",
                    c.q, c.n, c.k, c.r, c.p_hat, c.bound, c.z
                );
            }
            if out.cap_hits > 0 {
                eprintln!("warning: {} trials hit the step cap and were excluded", out.cap_hits);
            }
            println!("{}", out.csv.display());
            println!("{}", out.jsonl.display());
        }
        Command::Render => println!("{}", sim::cmd_render(&spec)?.display()),
        Command::Q0 => {
            let (report, path) = sim::cmd_q0_experiments(&spec)?;
            if !report.alternating.all_diagonal() {
                eprintln!("warning: non-diagonal two-step increments on the alternating configuration");
            }
            println!("{}", path.display());
        }
        Command::Stationarity => println!("{}", sim::cmd_stationarity_probe(&spec)?.1.display()),
        Command::Enumerate => {
            let report = sim::cmd_enumerate(&spec)?;
            let path = sim::output_file(&spec, "enumeration.json")?;
            sim::write_json(&report, &path)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hvlab: {e}");
            ExitCode::from(sim::exit_code(&e) as u8)
        }
    }
}
