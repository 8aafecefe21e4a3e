use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;
mod cmg;
mod gen;
mod method;
mod oracle;
mod output;
mod plotdata;
mod settings;
mod solve;
mod system;

/// Block coordinate descent over transport polytopes.
#[derive(Parser, Debug)]
#[command(name = "otbcd", version)]
struct Cli {
    /// Flat key-value config file (`schema = otbcd-config/1`); flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discretize a system and write its manifest, masses and barycenters.
    Gen(gen::GenArgs),
    /// Run one method over several seeded trials.
    Solve(solve::SolveArgs),
    /// Cascadic multigrid chain.
    Cmg(cmg::CmgArgs),
    /// One-dimensional reference solution.
    Oracle(oracle::OracleArgs),
    /// Map and potential files from a finished run.
    Plotdata(plotdata::PlotArgs),
    /// Time methods over a range of K and fit power laws.
    Bench(bench::BenchArgs),
}

/// Input problems the user can fix.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn code_for(e: &otbcd::Error) -> u8 {
    use otbcd::Error as E;
    match e {
        E::Level { source, .. } => code_for(source),
        _ if e.is_infeasible() => 4,
        E::Overflow { .. } | E::KernelUnderflow | E::LpIterationCap { .. } | E::StepTooLarge { .. } | E::Orphan { .. } => 3,
        E::Io(_) => 1,
        _ => 2,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<otbcd::Error>() {
            return code_for(e);
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings::load_config(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Gen(a) => gen::run(&a, &cfg),
        Command::Solve(a) => solve::run(&a, &cfg),
        Command::Cmg(a) => cmg::run(&a, &cfg),
        Command::Oracle(a) => oracle::run(&a, &cfg),
        Command::Plotdata(a) => plotdata::run(&a),
        Command::Bench(a) => bench::run(&a, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
