use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradamp::config::ExperimentConfig;
use gradamp::pipeline::{self, SweepAxis};
use gradamp::Result;

#[derive(Parser, Debug)]
#[command(name = "gradamp", version, about = "Gradient amplification experiments for Schrödinger equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Store every K-th time step.
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Use the closed-form single-ball kernel instead of fitting.
    #[arg(long, global = true)]
    exact_kernel: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select parameters, place balls, fit the kernel.
    Design,
    /// Run the direct and auxiliary solvers.
    Simulate,
    /// Measure the stored snapshots and write the report.
    Verify,
    /// Repeat the pipeline along one axis: m, lambda, n_nodes or grid.
    Sweep { axis: SweepAxis },
    /// Print the report and any sweep tables.
    Report,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path =
        cli.config.as_ref().ok_or_else(|| gradamp::Error::Validation("this command needs --config PATH".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(stride) = cli.stride {
        cfg.stride = stride;
    }
    cfg.design.exact_kernel |= cli.exact_kernel;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Report = cli.command {
        let out = match (&cli.out, &cli.config) {
            (Some(o), _) => o.clone(),
            (None, Some(_)) => load(cli)?.output,
            (None, None) => PathBuf::from("gradamp-out"),
        };
        print!("{}", pipeline::run_report(&out)?);
        return Ok(());
    }
    let cfg = load(cli)?;
    let out = cfg.output.clone();
    match &cli.command {
        Command::Design => {
            let d = pipeline::run_design(&cfg, &out)?;
            let a = &d.artifacts;
            println!("r0 = {}  m = {}  eps required = {:.3e}", a.params.r0, a.params.m, a.params.eps);
            for r in &a.residuals {
                println!("  {:<16} eps = {:.3e}  (value {:.3e}, grad {:.3e})", r.name, r.eps, r.eps_value, r.eps_grad);
            }
            println!("eps_hat = {:.3e}  feasible = {}", a.eps_hat, a.eps_feasible);
        }
        Command::Simulate => {
            let s = pipeline::run_simulate(&cfg, &out)?;
            println!(
                "{} snapshots; decomposition discrepancy {:.3e}; conservation drift {:.3e}; max Picard {}",
                s.auxiliary.n_snapshots, s.decomposition_discrepancy, s.conservation_drift, s.direct.max_picard
            );
        }
        Command::Verify => {
            let r = pipeline::run_verify(&cfg, &out)?;
            print!("{}", r.summary());
        }
        Command::Sweep { axis } => {
            let t = pipeline::run_sweep(&cfg, &out, *axis)?;
            print!("{}", t.to_csv());
        }
        Command::Report => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
