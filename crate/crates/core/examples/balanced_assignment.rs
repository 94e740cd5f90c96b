//! Branch and bound on a group assignment score. The small instance is
//! solved to optimality; the large one reports improving incumbents until
//! the timeout given as the first argument (seconds, default 3).

use std::time::Duration;

use cdmn::{compile_str, ground, solve, GroundOptions, SolveOptions, Status};

pub fn run_example(seconds: f64) -> cdmn::Result<String> {
    let desk = compile_str(include_str!("../corpus/balanced_desk.cdmn"))?;
    let problem = ground(&desk, GroundOptions::default())?;
    let (models, status) = cdmn::solve::run(solve(&desk, problem, SolveOptions::default()))?;
    let best = models.last().and_then(|m| m.objective.clone());
    let mut out = format!("desk: {} score {}\n", status.name(), best.map(|v| v.to_string()).unwrap_or_default());

    let full = compile_str(include_str!("../corpus/large/balanced_full.cdmn"))?;
    let problem = ground(&full, GroundOptions::default())?;
    let options = SolveOptions { timeout: Some(Duration::from_secs_f64(seconds)), max_models: None };
    let mut improvements = 0;
    for result in solve(&full, problem, options) {
        let result = result?;
        match result.status {
            Status::Sat => improvements += 1,
            status => {
                let score = result.objective.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
                out += &format!("full: {} after {improvements} improvements, score {score}\n", status.name());
            }
        }
    }
    Ok(out)
}

fn main() -> cdmn::Result<()> {
    let seconds = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3.0);
    print!("{}", run_example(seconds)?);
    Ok(())
}
