use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tensormor_cli::{compare, execute, CliError, Method, RunRequest};

#[derive(Parser)]
#[command(name = "tensormor", version, about = "Low-rank and reduced-order experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON configuration.
    #[command(name = "run", hide = true)]
    Run {
        method: Method,
        #[command(flatten)]
        args: RunArgs,
    },
    Pod(RunArgs),
    StrongGreedy(RunArgs),
    WeakGreedy(RunArgs),
    Rom(RunArgs),
    Richardson(RunArgs),
    Pgd(RunArgs),
    Regress(RunArgs),
    Ttsvd(RunArgs),
    /// Compare report B against baseline A row by row.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Ratios b/a above this factor are flagged.
        #[arg(long, default_value_t = 1.1)]
        factor: f64,
        /// Value column (defaults to the first of error, resid, objective,
        /// mean_rmse, rank).
        #[arg(long)]
        column: Option<String>,
        /// Exit with status 4 when any row is flagged.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    verbose: bool,
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (method, args) = match cli.command {
        Command::Compare { a, b, factor, column, strict } => {
            return match compare(&a, &b, factor, column.as_deref()).and_then(|c| Ok((c.to_csv()?, c.regressions()))) {
                Ok((csv, flagged)) => {
                    print!("{csv}");
                    if flagged > 0 {
                        eprintln!("tensormor: {flagged} row(s) exceed the factor {factor}");
                    }
                    if strict && flagged > 0 {
                        ExitCode::from(4)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => fail(e),
            };
        }
        Command::Run { method, args } => (method, args),
        Command::Pod(a) => (Method::Pod, a),
        Command::StrongGreedy(a) => (Method::StrongGreedy, a),
        Command::WeakGreedy(a) => (Method::WeakGreedy, a),
        Command::Rom(a) => (Method::Rom, a),
        Command::Richardson(a) => (Method::Richardson, a),
        Command::Pgd(a) => (Method::Pgd, a),
        Command::Regress(a) => (Method::Regress, a),
        Command::Ttsvd(a) => (Method::Ttsvd, a),
    };
    let req = RunRequest { method, config: args.config, out: args.out, seed: args.seed, verbose: args.verbose };
    match execute(&req) {
        Ok(s) => {
            println!("{}", s.out_dir.join("summary.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
