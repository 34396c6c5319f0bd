use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use svlab::harness::acceptance::{run_criterion, CRITERIA};
use svlab::harness::run::{all_passed, audit_text, cell, homogenize, simulate};
use svlab::harness::scenario::{preset, SCENARIOS};
use svlab::harness::{init_workers, run_convergence_study, OutputDir, RunConfig};

#[derive(Parser)]
#[command(name = "svlab", version, about = "Fluid-kinetic Stokes-Vlasov solver with homogenization tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fine-scale coupled run at the first eps of the configuration.
    Simulate(RunArgs),
    /// Cell problems and effective tensors C0, C1.
    Cell(RunArgs),
    /// Homogenized run with freshly computed tensors.
    Homogenize(RunArgs),
    /// Refinement study in eps against the homogenized run.
    Converge(RunArgs),
    /// Acceptance suite.
    Check {
        /// Run only these criteria (1-based).
        #[arg(long = "criterion", value_name = "N")]
        criteria: Vec<usize>,
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH", conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario preset.
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            (None, Some(name)) => preset(name)?,
            (None, None) => bail!("pass --config PATH or --scenario NAME (one of {})", SCENARIOS.join(", ")),
        };
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        cfg.validate()?;
        if let Some(n) = cfg.workers {
            init_workers(n)?;
        }
        Ok(cfg)
    }
}

fn report(audits: &[svlab::harness::run::Audit]) -> bool {
    print!("{}", audit_text(audits));
    all_passed(audits)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.config()?;
            let mut out = OutputDir::create(&cfg.out_dir, &cfg)?;
            let s = simulate(&cfg, &mut out)?;
            println!("{} steps, {} particles, written to {}", s.steps, s.particles, out.root().display());
            Ok(report(&s.audits))
        }
        Command::Cell(args) => {
            let cfg = args.config()?;
            let mut out = OutputDir::create(&cfg.out_dir, &cfg)?;
            let (s, _) = cell(&cfg, Some(&mut out))?;
            println!("C0 = {:?}", s.tensors.c0);
            Ok(report(&s.audits))
        }
        Command::Homogenize(args) => {
            let cfg = args.config()?;
            let mut out = OutputDir::create(&cfg.out_dir, &cfg)?;
            let (s, last) = homogenize(&cfg, &mut out)?;
            println!("t = {:.4}, energy {:.6e}", last.t, last.energy());
            Ok(report(&s.audits))
        }
        Command::Converge(args) => {
            let cfg = args.config()?;
            let mut out = OutputDir::create(&cfg.out_dir, &cfg)?;
            let table = run_convergence_study(&cfg, Some(&mut out))?;
            print!("{}", table.to_csv());
            let plain = table.plain_errors();
            let decreasing = plain.windows(2).all(|w| w[1] < w[0]);
            println!("{} plain error strictly decreasing", if decreasing { "PASS" } else { "FAIL" });
            Ok(decreasing)
        }
        Command::Check { criteria, workers } => {
            if let Some(n) = workers {
                init_workers(n)?;
            }
            let ids = if criteria.is_empty() { (1..=CRITERIA).collect() } else { criteria };
            if let Some(bad) = ids.iter().find(|id| !(1..=CRITERIA).contains(*id)) {
                bail!("no criterion {bad}; valid ids are 1..={CRITERIA}");
            }
            let mut ok = true;
            for id in ids {
                let r = run_criterion(id);
                println!("{r}");
                ok &= r.passed;
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
