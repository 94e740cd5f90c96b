//! Enumerate every coloring of a small map where neighbours differ.

use cdmn::oracle::check_model;
use cdmn::solve::run;
use cdmn::{compile_str, ground, solve, GroundOptions, SolveOptions};

pub fn run_example() -> cdmn::Result<String> {
    let model = compile_str(include_str!("../corpus/map_coloring.cdmn"))?;
    let problem = ground(&model, GroundOptions::default())?;
    let options = SolveOptions { max_models: Some(0), ..SolveOptions::default() };
    let (models, _) = run(solve(&model, problem, options))?;
    assert!(models.iter().all(|m| check_model(&model, &m.assignment).is_empty()));
    let mut out = format!("{} colorings\nfirst:\n", models.len());
    for (atom, value) in &models[0].assignment {
        out += &format!("  {} = {value}\n", atom.show(&model.vocab));
    }
    Ok(out)
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
