//! Thin command-line front end; all logic lives in `towerlab::cli`.

use clap::{Args, Parser, Subcommand};
use towerlab::cli::{
    budget_from_env, cmd_example, cmd_run, cmd_verify, exit_code, ExampleParams, Report,
    RunConfig,
};
use towerlab::Result;

#[derive(Parser)]
#[command(name = "towerlab", about = "Power towers of subfields in characteristic p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Emit the report as a single JSON document.
    #[arg(long)]
    json: bool,
    /// Dimension cap for exact linear algebra (overrides TOWERLAB_BUDGET).
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and execute a .twr script.
    Run {
        /// Path to the script.
        file: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in verification suite.
    Verify {
        /// Seed for the randomized parts of the suite.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run a bundled example family: ekedahl, nonintegrable, transcendental,
    /// or ppower.
    Example {
        name: String,
        /// Characteristic (default depends on the family).
        #[arg(long)]
        p: Option<u32>,
        /// Tower depth.
        #[arg(long)]
        depth: Option<usize>,
        /// Comma-separated family coefficients, e.g. --A 1,2.
        #[arg(long = "A", value_delimiter = ',')]
        a: Option<Vec<u32>>,
        #[command(flatten)]
        common: Common,
    },
}

fn config_of(common: &Common, seed: u64) -> RunConfig {
    RunConfig {
        budget: common.budget.unwrap_or_else(budget_from_env),
        seed,
        json: common.json,
    }
}

fn main() {
    let cli = Cli::parse();
    let (outcome, config): (Result<Report>, RunConfig) = match &cli.command {
        Command::Run { file, common } => {
            let config = config_of(common, 1);
            (cmd_run(file, &config), config)
        }
        Command::Verify { seed, common } => {
            let config = config_of(common, *seed);
            (cmd_verify(&config), config)
        }
        Command::Example {
            name,
            p,
            depth,
            a,
            common,
        } => {
            let config = config_of(common, 1);
            let params = ExampleParams {
                p: *p,
                depth: *depth,
                a: a.clone(),
            };
            (cmd_example(name, &params, &config), config)
        }
    };
    let code = exit_code(&outcome);
    match &outcome {
        Ok(report) => {
            if config.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_human());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    std::process::exit(code);
}
