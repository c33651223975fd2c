use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semiplug::acceptance::{run_acceptance, Tier};
use semiplug::par::Execution;
use semiplug_cli::{exit, parse_config, run::summary_table, run_experiment};

#[derive(Parser)]
#[command(
    name = "semiplug",
    version,
    about = "Monte Carlo harness for substitution estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run the built-in acceptance suite.
    Accept {
        #[arg(long, value_enum, default_value = "fast")]
        tier: TierArg,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// Run replications on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// List models and the functionals each supports.
    ListModels,
}

const MODELS: &[(&str, &str, &str)] = &[
    (
        "location",
        "theta0, law, scale",
        "cdf-at (efficient|plain), variance, h-moment",
    ),
    (
        "sym-regression",
        "theta0 (one per covariate), law, scale, covariate",
        "cdf-at (efficient|plain)",
    ),
    (
        "std-regression",
        "theta0 (intercept, slopes), sigma0, law, scale, covariate",
        "cdf-at, h-moment",
    ),
    ("two-sample", "theta0, law, scale", "cdf-at"),
    (
        "cox",
        "theta0, lambda0, t0, covariate_p, baseline",
        "cdf-at (baseline cdf)",
    ),
];

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => run(config),
        Command::Accept { tier, seed, serial } => {
            let tier = match tier {
                TierArg::Fast => Tier::Fast,
                TierArg::Full => Tier::Full,
            };
            let exec = if serial {
                Execution::Serial
            } else {
                Execution::Parallel
            };
            let report = run_acceptance(tier, seed, exec);
            println!("acceptance suite, {} tier, seed {seed}", tier.name());
            for line in report.lines() {
                println!("{line}");
            }
            for line in report.timing_lines() {
                eprintln!("time {line}");
            }
            if report.all_passed() {
                exit::SUCCESS
            } else {
                exit::EXPERIMENT_FAILURE
            }
        }
        Command::ListModels => {
            for (name, params, functionals) in MODELS {
                println!(
                    "{name:<16} parameters: {params}\n{:<16} functionals: {functionals}",
                    ""
                );
            }
            exit::SUCCESS
        }
    };
    ExitCode::from(code)
}

fn run(path: PathBuf) -> u8 {
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return exit::CONFIG_ERROR;
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error in {}: {e}", path.display());
            return exit::CONFIG_ERROR;
        }
    };
    match run_experiment(&cfg) {
        Ok(out) => {
            print!("{}", summary_table(&out.summaries));
            println!(
                "wrote {} and {}",
                out.records.display(),
                out.summary.display()
            );
            exit::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            exit::EXPERIMENT_FAILURE
        }
    }
}
