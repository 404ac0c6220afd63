//! `facells-kit`: the sketch pipeline from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
//! The last line on stdout is always `STATUS key=value ...`.

mod commands;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use facells_core::ErrorKind;

#[derive(Parser)]
#[command(name = "facells-kit", version, about = "Line-drawing attribute classifiers and FaCell composition")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// More progress output on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Trace PGM portraits into stroke drawings.
    Vectorize(commands::VectorizeArgs),
    /// Reorder strokes to reduce pen-up travel.
    Order(commands::OrderArgs),
    /// Write (a, b, p) sequences for each drawing.
    Encode(commands::EncodeArgs),
    /// Generate the synthetic glasses dataset.
    MakeToy(commands::MakeToyArgs),
    /// Train a classifier from a plan file.
    Train(commands::TrainArgs),
    /// Evaluate a checkpoint on labelled drawings.
    Eval(commands::EvalArgs),
    /// Run several plans and compare their test loss.
    Compare(commands::CompareArgs),
    /// Per-point attribute scores.
    Score(commands::ScoreArgs),
    /// Compose a FaCell image.
    Facell(commands::FacellArgs),
    /// Finite-difference gradient check of the model configurations.
    Gradcheck(commands::GradcheckArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Vectorize(_) => "vectorize",
            Command::Order(_) => "order",
            Command::Encode(_) => "encode",
            Command::MakeToy(_) => "make-toy",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Compare(_) => "compare",
            Command::Score(_) => "score",
            Command::Facell(_) => "facell",
            Command::Gradcheck(_) => "gradcheck",
        }
    }
}

/// Ordered `key=value` pairs for the closing status line.
#[derive(Default)]
pub struct Status(Vec<(String, String)>);

impl Status {
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    fn line(&self) -> String {
        let mut s = String::from("STATUS");
        for (k, v) in &self.0 {
            if v.is_empty() || v.contains(char::is_whitespace) || v.contains('"') {
                let _ = write!(s, " {k}={v:?}");
            } else {
                let _ = write!(s, " {k}={v}");
            }
        }
        s
    }
}

/// Bad arguments found after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<facells_core::Error>().map(facells_core::Error::kind) {
        Some(ErrorKind::Numeric) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            println!("{}", Status::default().with("status", if code == 0 { "ok" } else { "usage" }).line());
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
        }
    }
    let result = match cli.command {
        Command::Vectorize(a) => commands::vectorize(&cli.global, a),
        Command::Order(a) => commands::order(&cli.global, a),
        Command::Encode(a) => commands::encode(&cli.global, a),
        Command::MakeToy(a) => commands::make_toy(&cli.global, a),
        Command::Train(a) => commands::train(&cli.global, a),
        Command::Eval(a) => commands::eval(&cli.global, a),
        Command::Compare(a) => commands::compare(&cli.global, a),
        Command::Score(a) => commands::score(&cli.global, a),
        Command::Facell(a) => commands::facell(&cli.global, a),
        Command::Gradcheck(a) => commands::gradcheck(&cli.global, a),
    };
    match result {
        Ok(details) => {
            let mut status = Status::default().with("command", name).with("status", "ok");
            status.0.extend(details.0);
            println!("{}", status.line());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e:#}");
            let status = Status::default()
                .with("command", name)
                .with("status", "error")
                .with("exit", code)
                .with("error", format!("{e:#}").replace('\n', " "));
            println!("{}", status.line());
            ExitCode::from(code)
        }
    }
}
