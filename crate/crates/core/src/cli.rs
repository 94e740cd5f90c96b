//! Command-line front end. Every command writes to the given streams and
//! returns its exit code, so it can be driven from tests.
//!
//! Exit codes: 0 success (SAT/OPTIMUM, no diagnostics), 1 UNSAT or
//! diagnostics, 2 input/output or usage problems, 3 LIMIT.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::compile::{compile_model, CompiledModel};
use crate::corpus;
use crate::emit;
use crate::error::{Error, ErrorKind};
use crate::format::parse_named;
use crate::glossary::Diagnostic;
use crate::ground::{ground, GroundOptions};
use crate::solve::{run, solve, ModelResult, SolveOptions, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "cdmn", version, about = "Check, ground and solve constraint decision-table models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, validate and compile a model; report diagnostics.
    Check {
        model: PathBuf,
        /// Write the compiled theory as JSON.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Solve the model's task and print the models found.
    Solve {
        model: PathBuf,
        /// Number of models to enumerate, overriding the model's execute block.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        models: Option<u64>,
        /// Give up after this many seconds and report the best result so far.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Ground the model and write the ground problem as JSON.
    Ground {
        model: PathBuf,
        /// Output file; standard output when absent.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Run every bundled corpus model against its recorded expectation.
    Corpus {
        /// Corpus directory; defaults to the one shipped with the crate.
        dir: Option<PathBuf>,
        /// Recompute the expectations by brute force and overwrite them.
        #[arg(long)]
        regen_oracle: bool,
        #[arg(long)]
        timeout: Option<f64>,
    },
}

/// Parse `args` (including the program name) and run the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command, out, err),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match command {
        Command::Check { model, emit } => cmd_check(&model, emit.as_deref(), out, err),
        Command::Solve {
            model,
            models,
            timeout,
            format,
        } => {
            let options = SolveOptions {
                timeout: timeout.map(secs),
                max_models: models.map(|n| n as usize),
            };
            cmd_solve(&model, options, format, out, err)
        }
        Command::Ground { model, emit } => cmd_ground(&model, emit.as_deref(), out, err),
        Command::Corpus {
            dir,
            regen_oracle,
            timeout,
        } => {
            let dir = dir.unwrap_or_else(corpus::default_dir);
            let timeout = timeout.map(secs).unwrap_or(corpus::DEFAULT_TIMEOUT);
            corpus::cmd_corpus(&dir, regen_oracle, timeout, out, err)
        }
    }
}

fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s.max(0.0))
}

/// What loading a model produced: a compiled model, or the reason it failed.
pub enum Loaded {
    Model(Box<CompiledModel>),
    Invalid(Vec<Diagnostic>),
    Unreadable(String),
}

pub fn load(path: &Path) -> Loaded {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Loaded::Unreadable(format!("{}: {e}", path.display())),
    };
    match parse_named(&text, &path.display().to_string()).and_then(|raw| compile_model(&raw)) {
        Ok(m) => Loaded::Model(Box::new(m)),
        Err(e) => Loaded::Invalid(vec![Diagnostic::from_error(&e)]),
    }
}

fn write_diagnostics(ds: &[Diagnostic], w: &mut dyn Write) {
    for d in ds {
        let _ = writeln!(w, "{d}");
    }
}

pub fn cmd_check(path: &Path, emit_to: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let diagnostics = match load(path) {
        Loaded::Unreadable(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return 2;
        }
        Loaded::Invalid(ds) => ds,
        Loaded::Model(m) => {
            if let Some(target) = emit_to {
                if let Err(e) = fs::write(target, emit::to_text(&emit::compiled_model(&m))) {
                    let _ = writeln!(err, "error: {}: {e}", target.display());
                    return 2;
                }
            }
            m.diagnostics
        }
    };
    write_diagnostics(&diagnostics, out);
    let plural = if diagnostics.len() == 1 { "" } else { "s" };
    let _ = writeln!(out, "{} diagnostic{plural}", diagnostics.len());
    i32::from(!diagnostics.is_empty())
}

/// Load a model that must be free of diagnostics; on failure, the exit code.
fn load_clean(path: &Path, err: &mut dyn Write) -> Result<CompiledModel, i32> {
    match load(path) {
        Loaded::Unreadable(msg) => {
            let _ = writeln!(err, "error: {msg}");
            Err(2)
        }
        Loaded::Invalid(ds) => {
            write_diagnostics(&ds, err);
            Err(1)
        }
        Loaded::Model(m) if !m.diagnostics.is_empty() => {
            write_diagnostics(&m.diagnostics, err);
            Err(1)
        }
        Loaded::Model(m) => Ok(*m),
    }
}

fn report_error(e: &Error, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {e}");
    match e.kind {
        ErrorKind::Io(_) => 2,
        _ => 1,
    }
}

/// One model as sorted `symbol(args) = value` lines.
pub fn model_text(m: &ModelResult, model: &CompiledModel) -> String {
    let mut lines: Vec<String> = m
        .assignment
        .iter()
        .map(|(atom, v)| format!("{} = {v}", atom.show(&model.vocab)))
        .collect();
    lines.sort();
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

pub fn status_line(status: Status, objective: Option<&crate::value::Value>) -> String {
    match (status, objective) {
        (Status::Optimum, Some(v)) => format!("status: OPTIMUM (objective={v})"),
        (s, _) => format!("status: {}", s.name()),
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Sat | Status::Optimum => 0,
        Status::Unsat => 1,
        Status::Limit => 3,
    }
}

pub fn cmd_solve(path: &Path, options: SolveOptions, format: OutputFormat, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let model = match load_clean(path, err) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let problem = match ground(&model, GroundOptions::default()) {
        Ok(p) => p,
        Err(e) => return report_error(&e, err),
    };
    write_diagnostics(&problem.diagnostics, err);
    let (models, status) = match run(solve(&model, problem, options)) {
        Ok(r) => r,
        Err(e) => return report_error(&e, err),
    };
    // when optimizing, show only the final (best) model
    let optimizing = models.iter().any(|m| m.objective.is_some());
    let shown: Vec<ModelResult> = if optimizing {
        models.last().cloned().into_iter().collect()
    } else {
        models
    };
    let objective = shown.last().and_then(|m| m.objective.clone());
    match format {
        OutputFormat::Text => {
            let blocks: Vec<String> = shown.iter().map(|m| model_text(m, &model)).collect();
            let _ = write!(out, "{}", blocks.join("---\n"));
            let _ = writeln!(out, "{}", status_line(status, objective.as_ref()));
        }
        OutputFormat::Json => {
            let doc = emit::results(&shown, status, objective.as_ref(), &model.vocab);
            let _ = write!(out, "{}", emit::to_text(&doc));
        }
    }
    exit_code(status)
}

pub fn cmd_ground(path: &Path, emit_to: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let model = match load_clean(path, err) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let problem = match ground(&model, GroundOptions::default()) {
        Ok(p) => p,
        Err(e) => return report_error(&e, err),
    };
    let text = emit::to_text(&emit::ground_problem(&problem, &model.vocab));
    match emit_to {
        Some(target) => {
            if let Err(e) = fs::write(target, text) {
                let _ = writeln!(err, "error: {}: {e}", target.display());
                return 2;
            }
            let _ = writeln!(out, "{} ground constraints written to {}", problem.constraints.len(), target.display());
        }
        None => {
            let _ = write!(out, "{text}");
        }
    }
    0
}
