use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rkhs_purity_cli::report::{golden_json, EXIT_INVALID};
use rkhs_purity_cli::{runner, run_suite, CliError, Overrides, ScenarioConfig, Task, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "rkhs-purity", version, about = "Run purity, identity and dilation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Purity verdicts of multipliers, or slice consistency.
    Purity(RunArgs),
    /// Defect and Chen identities on ball spaces.
    Identity(RunArgs),
    /// Complete Nevanlinna-Pick certificates.
    Cnp(RunArgs),
    /// BCL isometry pairs and their dilation certificate.
    Bcl(RunArgs),
    /// Schur-Agler transfer functions of unitary colligations.
    Colligation(RunArgs),
    /// Decay of adjoint powers, and restrictions to invariant subspaces.
    Decay(RunArgs),
    /// Wandering witnesses of invariant subspaces.
    Witness(RunArgs),
    /// Run every scenario listed in a manifest.
    Suite(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file, or manifest for `suite`.
    #[arg(long)]
    config: PathBuf,
    /// Report file; for `suite`, the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides a tolerance, as `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Omit timing fields from the written reports.
    #[arg(long)]
    no_timing: bool,
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn render<T: serde::Serialize>(report: &T, no_timing: bool) -> String {
    if no_timing {
        golden_json(report)
    } else {
        let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
        text.push('\n');
        text
    }
}

fn fail(e: &CliError) -> ExitCode {
    let object = serde_json::json!({ "error": e.to_object() });
    eprintln!("{}", serde_json::to_string(&object).expect("errors serialize"));
    ExitCode::from(EXIT_INVALID as u8)
}

fn run_one(task: Task, args: &RunArgs) -> Result<i32, CliError> {
    let overrides = Overrides { seed: args.seed, tolerances: args.tol.clone() };
    let mut config = ScenarioConfig::load(&args.config)?;
    if config.task != task {
        return Err(CliError::Config(format!("scenario task is {}, not {task}", config.task)));
    }
    overrides.apply(&mut config)?;
    config.validate()?;
    let report = runner::run(&config);
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{}.json", config.scenario_id))));
    write_text(out.as_deref(), &render(&report, args.no_timing))?;
    if let Some(e) = &report.error {
        eprintln!("{}", serde_json::to_string(&serde_json::json!({ "error": e })).expect("errors serialize"));
    }
    Ok(report.exit_code)
}

fn suite(args: &RunArgs) -> Result<i32, CliError> {
    let overrides = Overrides { seed: args.seed, tolerances: args.tol.clone() };
    let report = run_suite(&args.config, &overrides)?;
    let dir = args.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    match dir {
        Some(dir) => {
            write_text(Some(&dir.join("suite_report.json")), &render(&report, args.no_timing))?;
            let mut csv = Vec::new();
            rkhs_purity_cli::suite::write_summary_csv(&report, &mut csv)?;
            write_text(Some(&dir.join("summary.csv")), &String::from_utf8(csv).expect("csv is utf-8"))?;
        }
        None => rkhs_purity_cli::suite::write_summary_csv(&report, std::io::stdout())?,
    }
    Ok(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Purity(a) => run_one(Task::Purity, a),
        Command::Identity(a) => run_one(Task::Identity, a),
        Command::Cnp(a) => run_one(Task::Cnp, a),
        Command::Bcl(a) => run_one(Task::Bcl, a),
        Command::Colligation(a) => run_one(Task::Colligation, a),
        Command::Decay(a) => run_one(Task::Decay, a),
        Command::Witness(a) => run_one(Task::Witness, a),
        Command::Suite(a) => suite(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => fail(&e),
    }
}
