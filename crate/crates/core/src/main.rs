use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cellsched::cli::{self, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use cellsched::{Comparison, Policy, Result};

#[derive(Parser)]
#[command(
    name = "cellsched",
    version,
    about = "Downlink scheduler comparison simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single simulation and write its CSV tables.
    Run(Common),
    /// Run several policies on the same channel and tabulate them.
    Compare(CompareArgs),
    /// Same as `compare`, plus the four SVG charts.
    Figures(CompareArgs),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
    /// Override one config key, e.g. `--set n_users=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "pfa,dpfa,vpfa")]
    policies: String,
    #[arg(long, default_value = "pfa")]
    reference: String,
}

fn print_comparison(cmp: &Comparison) {
    println!("policy  fi        system_bits      drop_pct");
    for row in &cmp.rows {
        println!(
            "{:<7} {:<9.4} {:<16.4e} {:.2}",
            row.policy.as_str(),
            row.fi,
            row.system_bits,
            row.drop_pct
        );
    }
}

fn compare(args: &CompareArgs, figures: bool) -> Result<()> {
    let c = &args.common;
    let config = cli::load_config(c.config.as_deref(), &c.overrides)?;
    let policies = cli::parse_policies(&args.policies)?;
    let reference: Policy =
        args.reference
            .parse()
            .map_err(|e: String| cellsched::Error::Config {
                key: "reference".into(),
                msg: e,
            })?;
    let cmp = if figures {
        cli::cmd_figures(&config, &policies, reference, &c.out)?
    } else {
        cli::cmd_compare(&config, &policies, reference, &c.out)?
    };
    print_comparison(&cmp);
    println!("wrote {}", c.out.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let config = cli::load_config(c.config.as_deref(), &c.overrides)?;
            let result = cli::cmd_run(&config, &c.out)?;
            println!(
                "{}: fi {:.4}, system bits {:.4e}",
                config.policy,
                result.fairness(),
                result.system_bits()
            );
            if let Some(slot) = result.phase_switch_slot() {
                println!("variance phase from slot {slot}");
            }
            for w in &result.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", c.out.display());
            Ok(())
        }
        Command::Compare(args) => compare(&args, false),
        Command::Figures(args) => compare(&args, true),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
