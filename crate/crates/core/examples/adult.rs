//! A single-hit decision table that derives adulthood from a fixed age.

use cdmn::{solve_str, SolveOptions};

pub fn run_example() -> cdmn::Result<String> {
    let mut out = String::new();
    for source in [include_str!("../corpus/adult_18.cdmn"), include_str!("../corpus/adult_17.cdmn")] {
        let vocab = cdmn::compile_str(source)?.vocab;
        let (models, status) = solve_str(source, SolveOptions::default())?;
        for (atom, value) in models.iter().flat_map(|m| &m.assignment) {
            out += &format!("{} = {value}\n", atom.show(&vocab));
        }
        out += &format!("status: {}\n", status.name());
    }
    Ok(out)
}

fn main() -> cdmn::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
