//! Reference semantics by exhaustive enumeration. Shares only the formula
//! evaluator with the rest of the pipeline, so solver results can be checked
//! against it.

use std::collections::{BTreeMap, BTreeSet};

use crate::compile::{CompiledModel, Task};
use crate::error::{ErrorKind, Result};
use crate::glossary::SymbolId;
use crate::logic::{evaluate_formula, evaluate_term, symbols_of, symbols_of_term, Candidate, GroundAtom, Valuation};
use crate::value::Value;

/// Default cap on the number of candidate assignments.
pub const DEFAULT_ORACLE_LIMIT: u128 = 10_000_000;

pub type Assignment = BTreeMap<GroundAtom, Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleModel {
    /// Unknown and derived symbol instances.
    pub assignment: Assignment,
    pub objective: Option<Value>,
}

/// Titles of the theory entries that `assignment` violates. An entry whose
/// evaluation fails counts as violated.
pub fn check_model(model: &CompiledModel, assignment: &Assignment) -> Vec<String> {
    let cand = Candidate::new(&model.theory, &model.structure, assignment);
    model
        .theory
        .entries
        .iter()
        .filter(|e| !matches!(evaluate_formula(&e.formula, &cand, &mut Valuation::default()), Ok(true)))
        .map(|e| e.title.clone())
        .collect()
}

/// Add the values of every derived symbol instance to `assignment`.
pub fn complete_assignment(model: &CompiledModel, assignment: &Assignment) -> Result<Assignment> {
    let cand = Candidate::new(&model.theory, &model.structure, assignment);
    let mut out = assignment.clone();
    for def in model.theory.definitions() {
        let tuples = model
            .structure
            .arg_tuples(&model.vocab, def.symbol)
            .ok_or_else(|| ErrorKind::UnboundedUnknown(model.vocab.symbol(def.symbol).ident.clone()))?;
        for args in tuples {
            let mut env = Valuation::default();
            for (p, a) in def.params.iter().zip(&args) {
                env.push(p.clone(), a.clone());
            }
            let v = evaluate_term(&def.body, &cand, &mut env).map_err(ErrorKind::from)?;
            out.insert(GroundAtom { symbol: def.symbol, args }, v);
        }
    }
    Ok(out)
}

/// Objective value of a candidate, if the task has one.
pub fn objective_of(model: &CompiledModel, assignment: &Assignment) -> Result<Option<Value>> {
    let term = match &model.task {
        Task::Enumerate { .. } => return Ok(None),
        Task::Minimize(t) | Task::Maximize(t) => t,
    };
    let cand = Candidate::new(&model.theory, &model.structure, assignment);
    Ok(Some(
        evaluate_term(term, &cand, &mut Valuation::default()).map_err(ErrorKind::from)?,
    ))
}

/// Every model of the theory, in odometer order over the unknown symbol
/// instances. Candidates whose evaluation fails are not models.
pub fn brute_force_models(model: &CompiledModel, limit: u128) -> Result<Vec<OracleModel>> {
    let structure = &model.structure;
    let vocab = &model.vocab;
    let mut atoms: Vec<(GroundAtom, Vec<Value>)> = Vec::new();
    let mut total: u128 = 1;
    for &sym in &structure.unknown {
        let decl = vocab.symbol(sym);
        let (Some(tuples), Some(dom)) = (structure.arg_tuples(vocab, sym), structure.domain(decl.result)) else {
            return Err(ErrorKind::UnboundedUnknown(decl.ident.clone()).into());
        };
        for args in tuples {
            total = total.saturating_mul(dom.len() as u128);
            atoms.push((GroundAtom { symbol: sym, args }, dom.to_vec()));
        }
    }
    if total > limit {
        return Err(ErrorKind::OracleTooLarge(total).into());
    }

    // an entry can be checked once every unknown symbol it mentions, directly or
    // through definitions, is fully assigned
    let defined: BTreeMap<SymbolId, BTreeSet<SymbolId>> = model
        .theory
        .definitions()
        .map(|d| (d.symbol, symbols_of_term(&d.body)))
        .collect();
    let expand = |start: BTreeSet<SymbolId>| {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<SymbolId> = start.into_iter().collect();
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                if let Some(more) = defined.get(&s) {
                    stack.extend(more.iter().copied());
                }
            }
        }
        seen
    };
    let last_index: BTreeMap<SymbolId, usize> = atoms
        .iter()
        .enumerate()
        .map(|(i, (a, _))| (a.symbol, i))
        .collect();
    // checks[i]: entries that become decidable once atom i is assigned
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); atoms.len() + 1];
    for (e, entry) in model.theory.entries.iter().enumerate() {
        let level = expand(symbols_of(&entry.formula))
            .iter()
            .filter_map(|s| last_index.get(s).map(|&i| i + 1))
            .max()
            .unwrap_or(0);
        checks[level].push(e);
    }

    let holds = |assignment: &Assignment, entries: &[usize]| {
        let cand = Candidate::new(&model.theory, structure, assignment);
        entries.iter().all(|&e| {
            matches!(
                evaluate_formula(&model.theory.entries[e].formula, &cand, &mut Valuation::default()),
                Ok(true)
            )
        })
    };

    let mut out = Vec::new();
    let mut assignment = Assignment::new();
    if !holds(&assignment, &checks[0]) {
        return Ok(out);
    }
    // explicit odometer: digits[i] is the index into atoms[i].1 currently tried
    let n = atoms.len();
    let mut digits = vec![0usize; n];
    let mut depth = 0usize;
    loop {
        if depth == n {
            if let Ok(objective) = objective_of(model, &assignment) {
                if let Ok(full) = complete_assignment(model, &assignment) {
                    out.push(OracleModel { assignment: full, objective });
                }
            }
            if n == 0 {
                break;
            }
            depth -= 1;
            digits[depth] += 1;
            continue;
        }
        let (atom, dom) = &atoms[depth];
        if digits[depth] == dom.len() {
            assignment.remove(atom);
            digits[depth] = 0;
            if depth == 0 {
                break;
            }
            depth -= 1;
            digits[depth] += 1;
            continue;
        }
        assignment.insert(atom.clone(), dom[digits[depth]].clone());
        if holds(&assignment, &checks[depth + 1]) {
            depth += 1;
        } else {
            digits[depth] += 1;
        }
    }
    Ok(out)
}

/// Optimal objective value among the models, if any and if the task optimizes.
pub fn optimum(model: &CompiledModel, models: &[OracleModel]) -> Option<Value> {
    let values = models.iter().filter_map(|m| m.objective.clone());
    match model.task {
        Task::Enumerate { .. } => None,
        Task::Minimize(_) => values.min(),
        Task::Maximize(_) => values.max(),
    }
}
