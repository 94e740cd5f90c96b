//! Inspect the ground problem: one constraint per table instance after
//! folding away everything the data decide.

use cdmn::{compile_str, emit, ground, GroundOptions};

pub fn run_example() -> cdmn::Result<String> {
    let model = compile_str(include_str!("../corpus/map_coloring.cdmn"))?;
    let problem = ground(&model, GroundOptions::default())?;
    let mut out = String::new();
    for (table, n) in &problem.instantiations {
        out += &format!("{table}: {n} instances, ");
    }
    out += &format!("{} constraints\n", problem.constraints.len());
    for c in &problem.constraints {
        out += &format!("  {}\n", problem.show_formula(&c.formula, &model.vocab));
    }
    let doc = emit::ground_problem(&problem, &model.vocab);
    out += &format!("json keys: {:?}\n", doc.as_object().map(|o| o.keys().collect::<Vec<_>>()).unwrap_or_default());
    Ok(out)
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
