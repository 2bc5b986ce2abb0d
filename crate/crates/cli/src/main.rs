use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rucb::artifacts::{resolve_output_dir, run_command, Command, RunOptions, OUTPUT_ROOT_ENV};
use rucb::config::parse_config;
use rucb::scheduler::Policy;

/// Hardness-aware sample selection experiments on synthetic corpora.
#[derive(Parser, Debug)]
#[command(name = "rucb", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one policy on a scripted-reward corpus.
    Simulate(RunArgs),
    /// Train the toy pixel classifier on a segmentation corpus with one policy.
    TrainToy(RunArgs),
    /// Run Uniform, OHEM, UCB and RUCB on the configured corpus.
    Compare(RunArgs),
    /// Re-render tables and summaries from an existing output directory.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(short, long)]
    config: PathBuf,
    /// Run this seed only, replacing the config's seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: config `output_dir`, then $RUCB_OUTPUT_ROOT, then ./rucb-output].
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Replace the config's policy (uniform, ohem, ucb, rucb).
    #[arg(long, value_parser = parse_policy)]
    policy: Option<Policy>,
    /// Also write each seed's generated corpus to datasets/.
    #[arg(long)]
    export_dataset: bool,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Output directory of an earlier run [default: $RUCB_OUTPUT_ROOT, then ./rucb-output].
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: rucb::Error| e.to_string())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let env = std::env::var_os(OUTPUT_ROOT_ENV);
    let (command, outcome) = match cli.command {
        Cmd::Report(args) => {
            let out = resolve_output_dir(args.out.as_deref(), None, env);
            let opts = RunOptions {
                output_dir: out,
                ..RunOptions::default()
            };
            (Command::Report, run_command(Command::Report, None, &opts)?)
        }
        Cmd::Simulate(args) => run_with(Command::Simulate, args, env)?,
        Cmd::TrainToy(args) => run_with(Command::TrainToy, args, env)?,
        Cmd::Compare(args) => run_with(Command::Compare, args, env)?,
    };
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let s = &outcome.summary;
    let mut text = format!(
        "{}: {} corpus, {} samples, {} iterations per run -> {}\n",
        command.name(),
        s.corpus,
        s.num_samples,
        s.total_iterations,
        outcome.output_dir.display()
    );
    for p in &s.policies {
        let dsc = p
            .dsc_avg
            .map(|c| format!("  DSC {}", c.display()))
            .unwrap_or_default();
        text.push_str(&format!(
            "  {:<8} runs {:>2}  corrupted share {:.4}{dsc}\n",
            p.policy.label(),
            p.runs.len(),
            p.mean_boot_corrupted_share
        ));
    }
    // a closed pipe (e.g. `| head`) is not an error for a summary printout
    let _ = std::io::stdout().write_all(text.as_bytes());
    Ok(())
}

fn run_with(
    command: Command,
    args: RunArgs,
    env: Option<std::ffi::OsString>,
) -> anyhow::Result<(Command, rucb::artifacts::Outcome)> {
    let config = parse_config(&args.config)?;
    let opts = RunOptions {
        output_dir: resolve_output_dir(args.out.as_deref(), Some(&config), env),
        seed: args.seed,
        policy: args.policy,
        export_dataset: args.export_dataset,
    };
    let outcome = run_command(command, Some(&config), &opts)
        .with_context(|| format!("`{}` failed", command.name()))?;
    Ok((command, outcome))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
