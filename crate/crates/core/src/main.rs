use std::path::PathBuf;
use std::process::ExitCode;

use bayesimax::cli::{parse_config, run, CliError, Command, Overrides};
use clap::{Parser, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bayesimax",
    version,
    about = "Minimum Bayes risk of prior disclosure games"
)]
struct Args {
    command: CommandArg,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the risk profile or optimizer trace as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    emit_per_rep: bool,
    #[arg(long)]
    check_truth_telling: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CommandArg {
    Entropy,
    Optimize,
    Game,
    Asymptotic,
    Sequence,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Entropy => Command::Entropy,
            CommandArg::Optimize => Command::Optimize,
            CommandArg::Game => Command::Game,
            CommandArg::Asymptotic => Command::Asymptotic,
            CommandArg::Sequence => Command::Sequence,
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text)?;
    let command = Command::from(args.command);
    if cfg.command != command {
        return Err(CliError::Validation {
            field: "command".into(),
            message: format!(
                "config is for `{}`, not `{}`",
                cfg.command.name(),
                command.name()
            ),
        });
    }
    cfg.apply(&Overrides {
        seed: args.seed,
        output_path: args.out.clone(),
        csv_path: args.csv.clone(),
        emit_per_rep: args.emit_per_rep,
        check_truth_telling: args.check_truth_telling,
    })?;

    let doc = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation {
                field: "threads".into(),
                message: e.to_string(),
            })?
            .install(|| run(&cfg))?,
        None => run(&cfg)?,
    };

    let write = |path: &PathBuf, body: &str| {
        std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    if let (Some(path), Some(csv)) = (&cfg.csv_path, &doc.csv) {
        write(path, csv)?;
    }
    let body = doc.to_json_string();
    match &cfg.output_path {
        Some(path) => write(path, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
