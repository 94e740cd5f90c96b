//! Aggregate tables summing fixed ingredient data.

use cdmn::{compile_str, solve_str, SolveOptions};

pub fn run_example() -> cdmn::Result<String> {
    let source = include_str!("../corpus/burger.cdmn");
    let vocab = compile_str(source)?.vocab;
    let (models, _) = solve_str(source, SolveOptions::default())?;
    Ok(models[0]
        .assignment
        .iter()
        .map(|(atom, value)| format!("{} = {value}\n", atom.show(&vocab)))
        .collect())
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
