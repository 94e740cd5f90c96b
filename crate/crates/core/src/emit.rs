//! Deterministic JSON documents for compiled models, ground problems and
//! solver results. Object keys are sorted, so equal inputs give identical text.

use serde_json::{json, Map, Value as Json};

use crate::compile::{CompiledModel, Task};
use crate::glossary::{Diagnostic, Domain, Vocabulary};
use crate::ground::{GFormula, GTerm, GroundProblem, Sense};
use crate::logic::{Formula, GroundAtom, Term};
use crate::oracle::Assignment;
use crate::solve::{ModelResult, Status};
use crate::value::{format_number, Value};

pub fn value(v: &Value) -> Json {
    match v {
        Value::Bool(b) => Json::Bool(*b),
        Value::Num(n) if n.is_integer() => json!(n.to_integer()),
        Value::Num(n) => Json::String(format_number(n)),
        Value::Str(s) => Json::String(s.to_string()),
    }
}

fn values(vs: &[Value]) -> Json {
    Json::Array(vs.iter().map(value).collect())
}

fn term(t: &Term, vocab: &Vocabulary) -> Json {
    match t {
        Term::Var(v) => json!({ "var": v.name }),
        Term::Value(v) => json!({ "value": value(v) }),
        Term::Apply(sym, args) => json!({
            "apply": vocab.symbol(*sym).ident,
            "args": args.iter().map(|a| term(a, vocab)).collect::<Vec<_>>(),
        }),
        Term::Arith(op, a, b) => json!({ "op": op.symbol(), "args": [term(a, vocab), term(b, vocab)] }),
        Term::Aggregate { kind, vars, parts } => json!({
            "aggregate": kind.name(),
            "vars": vars.iter().map(|v| json!({ "name": v.name, "type": vocab.sort(v.sort).name })).collect::<Vec<_>>(),
            "parts": parts
                .iter()
                .map(|(c, b)| json!({ "if": formula(c, vocab), "then": term(b, vocab) }))
                .collect::<Vec<_>>(),
        }),
    }
}

pub fn formula(f: &Formula, vocab: &Vocabulary) -> Json {
    let many = |op: &str, fs: &[Formula]| json!({ "op": op, "args": fs.iter().map(|f| formula(f, vocab)).collect::<Vec<_>>() });
    match f {
        Formula::True => Json::Bool(true),
        Formula::False => Json::Bool(false),
        Formula::Compare(op, a, b) => json!({ "op": op.symbol(), "args": [term(a, vocab), term(b, vocab)] }),
        Formula::Atom(sym, args) => json!({
            "atom": vocab.symbol(*sym).ident,
            "args": args.iter().map(|a| term(a, vocab)).collect::<Vec<_>>(),
        }),
        Formula::Not(x) => json!({ "op": "not", "args": [formula(x, vocab)] }),
        Formula::And(fs) => many("and", fs),
        Formula::Or(fs) => many("or", fs),
        Formula::Implies(a, b) => json!({ "op": "implies", "args": [formula(a, vocab), formula(b, vocab)] }),
        Formula::Forall(vars, body) => json!({
            "forall": vars.iter().map(|v| json!({ "name": v.name, "type": vocab.sort(v.sort).name })).collect::<Vec<_>>(),
            "body": formula(body, vocab),
        }),
    }
}

fn diagnostics(ds: &[Diagnostic]) -> Json {
    Json::Array(
        ds.iter()
            .map(|d| json!({ "kind": format!("{:?}", d.kind), "message": d.message, "line": d.line, "table": d.table }))
            .collect(),
    )
}

fn task(t: &Task, vocab: &Vocabulary) -> Json {
    match t {
        Task::Enumerate { limit } => json!({ "enumerate": limit }),
        Task::Minimize(t) => json!({ "minimize": term(t, vocab) }),
        Task::Maximize(t) => json!({ "maximize": term(t, vocab) }),
    }
}

/// The vocabulary, theory, structure and task of a compiled model.
pub fn compiled_model(m: &CompiledModel) -> Json {
    let vocab = &m.vocab;
    let types: Vec<Json> = vocab
        .user_sorts()
        .map(|(id, s)| {
            let domain = match &s.domain {
                Domain::Unbounded => Json::Null,
                _ => m.structure.domain(id).map(values).unwrap_or(Json::Null),
            };
            json!({ "name": s.name, "base": s.base.name(), "domain": domain })
        })
        .collect();
    let symbols: Vec<Json> = vocab
        .symbol_ids()
        .map(|id| {
            let d = vocab.symbol(id);
            json!({
                "name": d.ident,
                "phrase": d.phrase,
                "kind": format!("{:?}", d.kind),
                "args": d.arg_sorts.iter().map(|s| vocab.sort(*s).name.clone()).collect::<Vec<_>>(),
                "result": vocab.sort(d.result).name,
            })
        })
        .collect();
    let theory: Vec<Json> = m
        .theory
        .entries
        .iter()
        .map(|e| {
            let definition = e.definition.as_ref().map(|d| {
                json!({
                    "symbol": vocab.symbol(d.symbol).ident,
                    "params": d.params.iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
                    "body": term(&d.body, vocab),
                })
            });
            json!({ "table": e.title, "formula": formula(&e.formula, vocab), "definition": definition })
        })
        .collect();
    let mut fixed = Map::new();
    for (sym, map) in &m.structure.fixed {
        for (args, v) in map {
            let atom = GroundAtom { symbol: *sym, args: args.clone() };
            fixed.insert(atom.show(vocab), value(v));
        }
    }
    json!({
        "types": types,
        "symbols": symbols,
        "theory": theory,
        "fixed": fixed,
        "unknown": m.structure.unknown.iter().map(|s| vocab.symbol(*s).ident.clone()).collect::<Vec<_>>(),
        "task": task(&m.task, vocab),
        "diagnostics": diagnostics(&m.diagnostics),
    })
}

fn gterm(t: &GTerm, p: &GroundProblem, vocab: &Vocabulary) -> Json {
    match t {
        GTerm::Const(v) => json!({ "value": value(v) }),
        GTerm::Var(i) => json!({ "var": p.vars[*i].atom.show(vocab) }),
        GTerm::Def(i) => json!({ "def": p.defs[*i].0.show(vocab) }),
        GTerm::Arith(op, a, b) => json!({ "op": op.symbol(), "args": [gterm(a, p, vocab), gterm(b, p, vocab)] }),
        GTerm::Agg { kind, items } => json!({
            "aggregate": kind.name(),
            "items": items
                .iter()
                .map(|(c, b)| json!({ "if": gformula(c, p, vocab), "then": gterm(b, p, vocab) }))
                .collect::<Vec<_>>(),
        }),
        GTerm::Select { keys, cases } => json!({
            "select": keys.iter().map(|k| gterm(k, p, vocab)).collect::<Vec<_>>(),
            "cases": cases
                .iter()
                .map(|(k, b)| json!({ "key": values(k), "then": gterm(b, p, vocab) }))
                .collect::<Vec<_>>(),
        }),
    }
}

fn gformula(f: &GFormula, p: &GroundProblem, vocab: &Vocabulary) -> Json {
    let many = |op: &str, fs: &[GFormula]| json!({ "op": op, "args": fs.iter().map(|f| gformula(f, p, vocab)).collect::<Vec<_>>() });
    match f {
        GFormula::True => Json::Bool(true),
        GFormula::False => Json::Bool(false),
        GFormula::Cmp(op, a, b) => json!({ "op": op.symbol(), "args": [gterm(a, p, vocab), gterm(b, p, vocab)] }),
        GFormula::Not(x) => json!({ "op": "not", "args": [gformula(x, p, vocab)] }),
        GFormula::And(fs) => many("and", fs),
        GFormula::Or(fs) => many("or", fs),
    }
}

pub fn ground_problem(p: &GroundProblem, vocab: &Vocabulary) -> Json {
    let mut instantiations = Map::new();
    for (t, n) in &p.instantiations {
        instantiations.insert(t.clone(), json!(n));
    }
    json!({
        "vars": p.vars.iter().map(|v| json!({ "atom": v.atom.show(vocab), "domain": values(&v.domain) })).collect::<Vec<_>>(),
        "defs": p.defs.iter().map(|(a, t)| json!({ "atom": a.show(vocab), "term": gterm(t, p, vocab) })).collect::<Vec<_>>(),
        "constraints": p
            .constraints
            .iter()
            .map(|c| json!({ "table": c.table, "formula": gformula(&c.formula, p, vocab) }))
            .collect::<Vec<_>>(),
        "objective": p.objective.as_ref().map(|(s, t)| json!({
            "sense": match s { Sense::Minimize => "minimize", Sense::Maximize => "maximize" },
            "term": gterm(t, p, vocab),
        })),
        "instantiations": instantiations,
        "diagnostics": diagnostics(&p.diagnostics),
    })
}

/// `symbol(args) -> value text`, the shared content of text and JSON output.
pub fn assignment(a: &Assignment, vocab: &Vocabulary) -> Map<String, Json> {
    a.iter()
        .map(|(atom, v)| (atom.show(vocab), Json::String(v.to_string())))
        .collect()
}

pub fn results(models: &[ModelResult], status: Status, objective: Option<&Value>, vocab: &Vocabulary) -> Json {
    json!({
        "models": models
            .iter()
            .map(|m| json!({
                "assignments": assignment(&m.assignment, vocab),
                "objective": m.objective.as_ref().map(|v| v.to_string()),
            }))
            .collect::<Vec<_>>(),
        "status": status.name(),
        "objective": objective.map(|v| v.to_string()),
    })
}

pub fn to_text(doc: &Json) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("json values serialize");
    s.push('\n');
    s
}
