use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evidence_harness::{emit, run, ExperimentConfig, Format, Group, HarnessError, Status};

#[derive(Parser)]
#[command(name = "duality", version, about = "Verify e-value duality claims from JSON experiment configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unit moments and Markov bounds on both sides of the duality.
    VerifyMarkov(Single),
    /// Bayes-risk thresholds, error rates and risk sweeps.
    BayesRisk(Single),
    /// Mixture alternatives and composite Type II bounds.
    Composite(Single),
    /// Redundancy and large-sample expansions.
    Redundancy(Single),
    /// E-processes, optional stopping and rate checks.
    Sequential(Single),
    /// Every `*.json` config in a directory, in name order.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Single {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory; without it the JSON report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "json")]
    format: Vec<Format>,
    /// Emit nats-valued CSV columns in bits.
    #[arg(long)]
    bits: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::VerifyMarkov(s) => single(Group::VerifyMarkov, &s),
        Command::BayesRisk(s) => single(Group::BayesRisk, &s),
        Command::Composite(s) => single(Group::Composite, &s),
        Command::Redundancy(s) => single(Group::Redundancy, &s),
        Command::Sequential(s) => single(Group::Sequential, &s),
        Command::Suite { dir, output } => suite(&dir, &output),
    };
    ExitCode::from(code as u8)
}

fn single(group: Group, args: &Single) -> i32 {
    match execute(&args.config, Some(group), &args.output, true) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn suite(dir: &Path, output: &Output) -> i32 {
    let entries = match std::fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) => {
            let e = HarnessError::io(dir, e);
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut configs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    configs.sort();
    let mut worst = 0;
    for path in &configs {
        let code = match execute(path, None, output, false) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        };
        worst = worst.max(code);
    }
    worst
}

fn execute(path: &Path, group: Option<Group>, output: &Output, stdout_json: bool) -> Result<i32, HarnessError> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(group) = group {
        if config.check.group() != group {
            return Err(HarnessError::WrongSubcommand {
                check: config.check.name(),
                expected: config.check.group().name(),
                given: group.name(),
            });
        }
    }
    if let Some(seed) = output.seed {
        config.master_seed = seed;
    }
    let report = run(&config).map_err(|e| e.in_file(path))?;
    let out_dir = output.out.clone().or_else(|| config.output.clone());
    match out_dir {
        Some(dir) => {
            for written in emit(&report, &dir, &output.format, output.bits)? {
                eprintln!("wrote {}", written.display());
            }
        }
        None if stdout_json => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
        None => {}
    }
    for s in &report.sections {
        eprintln!("  [{}] {}", label(s.status), s.title);
    }
    eprintln!("{} {} ({})", label(report.status), report.name, path.display());
    Ok(report.exit_code())
}

fn label(status: Status) -> &'static str {
    match status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::ReportOnly => "REPORT",
        Status::ExpectedFailure => "XFAIL",
    }
}
