//! The bundled model corpus: each `NAME.cdmn` sits next to a
//! `NAME.expected.json` produced by the brute-force oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value as Json};

use crate::cli::{load, Loaded};
use crate::compile::{CompiledModel, Task};
use crate::emit;
use crate::ground::{ground, GroundOptions};
use crate::oracle::{brute_force_models, optimum, DEFAULT_ORACLE_LIMIT};
use crate::solve::{run, solve, SolveOptions, Status};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

pub fn default_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Model files in the directory, sorted by name.
pub fn entries(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cdmn"))
        .collect();
    out.sort();
    Ok(out)
}

pub fn expected_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().unwrap_or_default().to_string_lossy();
    model.with_file_name(format!("{stem}.expected.json"))
}

type ModelSet = BTreeSet<BTreeMap<String, String>>;

fn load_model(path: &Path) -> Result<CompiledModel, String> {
    match load(path) {
        Loaded::Model(m) if m.diagnostics.is_empty() => Ok(*m),
        Loaded::Model(m) => Err(format!("{} diagnostics", m.diagnostics.len())),
        Loaded::Invalid(ds) => Err(ds.first().map(ToString::to_string).unwrap_or_default()),
        Loaded::Unreadable(msg) => Err(msg),
    }
}

/// Expectation document computed by the oracle.
pub fn oracle_expectation(model: &CompiledModel) -> Result<Json, String> {
    let models = brute_force_models(model, DEFAULT_ORACLE_LIMIT).map_err(|e| e.to_string())?;
    let optimizing = !matches!(model.task, Task::Enumerate { .. });
    let status = match (models.is_empty(), optimizing) {
        (true, _) => Status::Unsat,
        (false, true) => Status::Optimum,
        (false, false) => Status::Sat,
    };
    let listed: Vec<Json> = if optimizing {
        Vec::new()
    } else {
        models
            .iter()
            .map(|m| Json::Object(emit::assignment(&m.assignment, &model.vocab)))
            .collect()
    };
    Ok(json!({
        "status": status.name(),
        "count": models.len(),
        "models": listed,
        "optimum": optimum(model, &models).map(|v| v.to_string()),
    }))
}

/// What the solver produces for the same expectation fields.
pub fn solver_outcome(model: &CompiledModel, timeout: Duration) -> Result<Json, String> {
    let problem = ground(model, GroundOptions::default()).map_err(|e| e.to_string())?;
    let options = SolveOptions {
        timeout: Some(timeout),
        max_models: Some(0),
    };
    let (models, status) = run(solve(model, problem, options)).map_err(|e| e.to_string())?;
    let optimizing = !matches!(model.task, Task::Enumerate { .. });
    let (count, listed, best) = if optimizing {
        (None, Vec::new(), models.last().and_then(|m| m.objective.as_ref()).map(ToString::to_string))
    } else {
        let listed: Vec<Json> = models
            .iter()
            .map(|m| Json::Object(emit::assignment(&m.assignment, &model.vocab)))
            .collect();
        (Some(listed.len()), listed, None)
    };
    Ok(json!({ "status": status.name(), "count": count, "models": listed, "optimum": best }))
}

fn model_set(doc: &Json) -> ModelSet {
    doc["models"]
        .as_array()
        .map(|ms| {
            ms.iter()
                .filter_map(Json::as_object)
                .map(|m| m.iter().map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string())).collect())
                .collect()
        })
        .unwrap_or_default()
}

/// Compare the solver's outcome for one corpus file with its expectation.
pub fn check_entry(path: &Path, timeout: Duration) -> Result<String, String> {
    let text = fs::read_to_string(expected_path(path)).map_err(|_| "no expectation file".to_string())?;
    let expected: Json = serde_json::from_str(&text).map_err(|e| format!("bad expectation: {e}"))?;
    let model = load_model(path)?;
    let got = solver_outcome(&model, timeout)?;
    if got["status"] != expected["status"] {
        return Err(format!("status {} (expected {})", got["status"], expected["status"]));
    }
    if expected["optimum"].is_string() {
        if got["optimum"] != expected["optimum"] {
            return Err(format!("optimum {} (expected {})", got["optimum"], expected["optimum"]));
        }
        return Ok(format!("optimum {}", expected["optimum"].as_str().unwrap_or_default()));
    }
    let (ours, theirs) = (model_set(&got), model_set(&expected));
    if ours != theirs {
        return Err(format!(
            "{} models, expected {} ({} missing, {} extra)",
            ours.len(),
            theirs.len(),
            theirs.difference(&ours).count(),
            ours.difference(&theirs).count()
        ));
    }
    Ok(format!("{} model{}", ours.len(), if ours.len() == 1 { "" } else { "s" }))
}

pub fn cmd_corpus(dir: &Path, regen: bool, timeout: Duration, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let files = match entries(dir) {
        Ok(f) if !f.is_empty() => f,
        Ok(_) => {
            let _ = writeln!(err, "error: no models in {}", dir.display());
            return 2;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", dir.display());
            return 2;
        }
    };
    let mut failures = 0;
    for path in &files {
        let name = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        if regen {
            let written = load_model(path).and_then(|m| oracle_expectation(&m)).and_then(|doc| {
                fs::write(expected_path(path), emit::to_text(&doc)).map_err(|e| e.to_string())?;
                Ok(format!("{} models", doc["count"]))
            });
            match written {
                Ok(msg) => {
                    let _ = writeln!(out, "{name:<28} REGEN {msg}");
                }
                Err(msg) => {
                    failures += 1;
                    let _ = writeln!(out, "{name:<28} FAIL  {msg}");
                }
            }
            continue;
        }
        match check_entry(path, timeout) {
            Ok(msg) => {
                let _ = writeln!(out, "{name:<28} PASS  {msg}");
            }
            Err(msg) => {
                failures += 1;
                let _ = writeln!(out, "{name:<28} FAIL  {msg}");
            }
        }
    }
    let _ = writeln!(out, "{}/{} passed", files.len() - failures, files.len());
    i32::from(failures > 0)
}
