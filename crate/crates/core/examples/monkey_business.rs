//! A logic grid puzzle with a unique solution.

use cdmn::{compile_str, solve_str, SolveOptions};

pub fn run_example() -> cdmn::Result<String> {
    let source = include_str!("../corpus/monkey_business.cdmn");
    let vocab = compile_str(source)?.vocab;
    let (models, status) = solve_str(source, SolveOptions { max_models: Some(0), ..SolveOptions::default() })?;
    let mut out = format!("{} solution(s), {}\n", models.len(), status.name());
    for (atom, value) in &models[0].assignment {
        out += &format!("{:<16} {value}\n", atom.show(&vocab));
    }
    Ok(out)
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
