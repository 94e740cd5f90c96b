//! Compiler and solver for decision-table models extended with constraint
//! tables, aggregates and optimization.
//!
//! The pipeline is: [`format::parse_model`] reads the table text,
//! [`compile::compile_model`] builds the vocabulary, theory and data structure,
//! [`ground::ground`] instantiates the theory over the finite domains, and
//! [`solve::solve`] enumerates or optimizes models. [`oracle`] holds an
//! independent brute-force reference used for verification.

pub mod cli;
pub mod compile;
pub mod corpus;
pub mod emit;
pub mod error;
pub mod expr;
pub mod format;
pub mod glossary;
pub mod ground;
pub mod logic;
pub mod oracle;
pub mod solve;
pub mod value;

pub use compile::{compile_model, CompiledModel, Task};
pub use error::{Error, ErrorKind, Result};
pub use ground::{ground, GroundOptions, GroundProblem};
pub use oracle::{brute_force_models, check_model, Assignment};
pub use solve::{solve, ModelResult, SolveOptions, Status};

/// Parse and compile model text.
pub fn compile_str(source: &str) -> Result<CompiledModel> {
    compile_model(&format::parse_model(source)?)
}

/// Compile, ground and solve model text, collecting every result.
pub fn solve_str(source: &str, options: SolveOptions) -> Result<(Vec<ModelResult>, Status)> {
    let model = compile_str(source)?;
    let problem = ground(&model, GroundOptions::default())?;
    solve::run(solve(&model, problem, options))
}
