//! The Dreadsbury Mansion puzzle: every model names the same killer.

use std::collections::BTreeSet;

use cdmn::solve::run;
use cdmn::{compile_str, ground, solve, GroundOptions, SolveOptions};

pub fn run_example() -> cdmn::Result<String> {
    let model = compile_str(include_str!("../corpus/who_killed_agatha.cdmn"))?;
    let problem = ground(&model, GroundOptions::default())?;
    let options = SolveOptions { max_models: Some(0), ..SolveOptions::default() };
    let (models, _) = run(solve(&model, problem, options))?;
    let killers: BTreeSet<String> = models
        .iter()
        .flat_map(|m| m.assignment.iter())
        .filter(|(atom, _)| atom.show(&model.vocab) == "Killer")
        .map(|(_, v)| v.to_string())
        .collect();
    Ok(format!("{} models; killers: {:?}\n", models.len(), killers))
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
