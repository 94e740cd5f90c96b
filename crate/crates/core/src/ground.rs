//! Instantiation of the compiled theory over the finite domains, with constant
//! folding against the data-table interpretations.

use std::collections::{BTreeMap, HashMap};

use crate::compile::{CompiledModel, Task};
use crate::error::{Error, ErrorKind, Result};
use crate::glossary::{Diagnostic, DiagnosticKind, SymbolId, Vocabulary};
use crate::logic::{cartesian, AggKind, ArithOp, CmpOp, Definition, Formula, GroundAtom, Term, Var};
use crate::value::{Number, Value};

/// Default cap on the number of ground instantiations.
pub const DEFAULT_GROUND_LIMIT: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GTerm {
    Const(Value),
    /// Index into `GroundProblem::vars`.
    Var(usize),
    /// Index into `GroundProblem::defs`.
    Def(usize),
    Arith(ArithOp, Box<GTerm>, Box<GTerm>),
    Agg {
        kind: AggKind,
        items: Vec<(GFormula, GTerm)>,
    },
    /// A symbol applied to arguments that depend on unknowns: the case whose
    /// key tuple equals the evaluated `keys`.
    Select {
        keys: Vec<GTerm>,
        cases: Vec<(Vec<Value>, GTerm)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GFormula {
    True,
    False,
    Cmp(CmpOp, GTerm, GTerm),
    Not(Box<GFormula>),
    And(Vec<GFormula>),
    Or(Vec<GFormula>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundVar {
    pub atom: GroundAtom,
    pub domain: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundConstraint {
    pub table: String,
    pub formula: GFormula,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct GroundProblem {
    pub vars: Vec<GroundVar>,
    pub defs: Vec<(GroundAtom, GTerm)>,
    pub constraints: Vec<GroundConstraint>,
    pub objective: Option<(Sense, GTerm)>,
    /// Instantiations per table before folding, in table order.
    pub instantiations: Vec<(String, usize)>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Copy, Debug)]
pub struct GroundOptions {
    pub limit: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            limit: DEFAULT_GROUND_LIMIT,
        }
    }
}

fn not(f: GFormula) -> GFormula {
    match f {
        GFormula::True => GFormula::False,
        GFormula::False => GFormula::True,
        GFormula::Not(inner) => *inner,
        other => GFormula::Not(Box::new(other)),
    }
}

/// Conjunction with flattening; `None` parts are impossible by construction.
fn and(parts: Vec<GFormula>) -> GFormula {
    let mut out = Vec::new();
    for p in parts {
        match p {
            GFormula::True => {}
            GFormula::False => return GFormula::False,
            GFormula::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => GFormula::True,
        1 => out.pop().unwrap(),
        _ => GFormula::And(out),
    }
}

fn or(parts: Vec<GFormula>) -> GFormula {
    let mut out = Vec::new();
    for p in parts {
        match p {
            GFormula::False => {}
            GFormula::True => return GFormula::True,
            GFormula::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    match out.len() {
        0 => GFormula::False,
        1 => out.pop().unwrap(),
        _ => GFormula::Or(out),
    }
}

type Env = BTreeMap<Var, Value>;

enum Resolved {
    Const(Value),
    Var(usize),
    Def(usize),
}

struct Grounder<'a> {
    vocab: &'a Vocabulary,
    model: &'a CompiledModel,
    definitions: BTreeMap<SymbolId, &'a Definition>,
    var_index: HashMap<GroundAtom, usize>,
    vars: Vec<GroundVar>,
    defs: Vec<(GroundAtom, GTerm)>,
    def_index: HashMap<GroundAtom, Resolved>,
}

fn eval_err(e: crate::logic::EvalError) -> Error {
    Error::new(ErrorKind::from(e))
}

impl Grounder<'_> {
    fn resolve(&mut self, symbol: SymbolId, args: Vec<Value>) -> Result<Resolved> {
        let structure = &self.model.structure;
        if let Some(map) = structure.fixed.get(&symbol) {
            return match map.get(&args) {
                Some(v) => Ok(Resolved::Const(v.clone())),
                None => Err(ErrorKind::Eval(format!(
                    "no data for {}",
                    GroundAtom { symbol, args }.show(self.vocab)
                ))
                .into()),
            };
        }
        let atom = GroundAtom { symbol, args };
        if let Some(&i) = self.var_index.get(&atom) {
            return Ok(Resolved::Var(i));
        }
        if let Some(r) = self.def_index.get(&atom) {
            return Ok(match r {
                Resolved::Const(v) => Resolved::Const(v.clone()),
                Resolved::Var(i) => Resolved::Var(*i),
                Resolved::Def(i) => Resolved::Def(*i),
            });
        }
        let Some(def) = self.definitions.get(&symbol).copied() else {
            return Err(ErrorKind::Eval(format!("{} is not interpreted", atom.show(self.vocab))).into());
        };
        let env: Env = def.params.iter().cloned().zip(atom.args.iter().cloned()).collect();
        let body = self.term(&def.body, &env)?;
        let r = match body {
            GTerm::Const(v) => Resolved::Const(v),
            other => {
                self.defs.push((atom.clone(), other));
                Resolved::Def(self.defs.len() - 1)
            }
        };
        let copy = match &r {
            Resolved::Const(v) => Resolved::Const(v.clone()),
            Resolved::Var(i) => Resolved::Var(*i),
            Resolved::Def(i) => Resolved::Def(*i),
        };
        self.def_index.insert(atom, copy);
        Ok(r)
    }

    fn apply(&mut self, symbol: SymbolId, args: Vec<GTerm>) -> Result<GTerm> {
        if args.iter().all(|a| matches!(a, GTerm::Const(_))) {
            let vals = args
                .into_iter()
                .map(|a| match a {
                    GTerm::Const(v) => v,
                    _ => unreachable!(),
                })
                .collect();
            return Ok(match self.resolve(symbol, vals)? {
                Resolved::Const(v) => GTerm::Const(v),
                Resolved::Var(i) => GTerm::Var(i),
                Resolved::Def(i) => GTerm::Def(i),
            });
        }
        // some argument depends on unknowns: tabulate every admissible key
        let mut choices: Vec<Vec<Value>> = Vec::new();
        for (a, sort) in args.iter().zip(&self.vocab.symbol(symbol).arg_sorts) {
            choices.push(match a {
                GTerm::Const(v) => vec![v.clone()],
                GTerm::Var(i) => self.vars[*i].domain.clone(),
                _ => self
                    .model
                    .structure
                    .domain(*sort)
                    .map(<[Value]>::to_vec)
                    .ok_or_else(|| Error::new(ErrorKind::Eval("argument over an unbounded type".into())))?,
            });
        }
        let refs: Vec<&[Value]> = choices.iter().map(Vec::as_slice).collect();
        let mut cases = Vec::new();
        for key in cartesian(&refs) {
            let t = match self.resolve(symbol, key.clone())? {
                Resolved::Const(v) => GTerm::Const(v),
                Resolved::Var(i) => GTerm::Var(i),
                Resolved::Def(i) => GTerm::Def(i),
            };
            cases.push((key, t));
        }
        Ok(GTerm::Select { keys: args, cases })
    }

    fn term(&mut self, term: &Term, env: &Env) -> Result<GTerm> {
        match term {
            Term::Var(v) => env
                .get(v)
                .cloned()
                .map(GTerm::Const)
                .ok_or_else(|| ErrorKind::Eval(format!("unbound variable {}", v.name)).into()),
            Term::Value(v) => Ok(GTerm::Const(v.clone())),
            Term::Apply(sym, args) => {
                let args = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>>>()?;
                self.apply(*sym, args)
            }
            Term::Arith(op, a, b) => {
                let a = self.term(a, env)?;
                let b = self.term(b, env)?;
                if let (GTerm::Const(x), GTerm::Const(y)) = (&a, &b) {
                    let (Some(x), Some(y)) = (x.as_num(), y.as_num()) else {
                        return Err(ErrorKind::SortMismatch(format!("arithmetic on {x} and {y}")).into());
                    };
                    let r = op.apply(x, y).map_err(eval_err)?;
                    if *op == ArithOp::Div && x.is_integer() && y.is_integer() && !r.is_integer() {
                        return Err(ErrorKind::SortMismatch(format!("{x} / {y} is not an integer")).into());
                    }
                    return Ok(GTerm::Const(Value::Num(r)));
                }
                Ok(GTerm::Arith(*op, Box::new(a), Box::new(b)))
            }
            Term::Aggregate { kind, vars, parts } => self.aggregate(*kind, vars, parts, env),
        }
    }

    fn aggregate(&mut self, kind: AggKind, vars: &[Var], parts: &[(Formula, Term)], env: &Env) -> Result<GTerm> {
        let doms: Vec<&[Value]> = vars
            .iter()
            .map(|v| {
                self.model
                    .structure
                    .domain(v.sort)
                    .ok_or_else(|| Error::new(ErrorKind::Eval("aggregate over an unbounded type".into())))
            })
            .collect::<Result<_>>()?;
        let tuples = cartesian(&doms);
        let mut items: Vec<(GFormula, GTerm)> = Vec::new();
        let mut env = env.clone();
        for tuple in tuples {
            for (v, x) in vars.iter().zip(tuple) {
                env.insert(v.clone(), x);
            }
            for (cond, body) in parts {
                let c = self.formula(cond, &env)?;
                if c == GFormula::False {
                    continue;
                }
                let b = self.term(body, &env)?;
                items.push((c, b));
            }
        }
        for v in vars {
            env.remove(v);
        }

        let all_known = items
            .iter()
            .all(|(c, b)| *c == GFormula::True && matches!(b, GTerm::Const(_)));
        if all_known {
            let nums = items
                .iter()
                .map(|(_, b)| match b {
                    GTerm::Const(v) => v.as_num().ok_or_else(|| Error::new(ErrorKind::SortMismatch(format!("aggregating {v}")))),
                    _ => unreachable!(),
                })
                .collect::<Result<Vec<Number>>>()?;
            return kind
                .fold(nums)
                .map(|n| GTerm::Const(Value::Num(n)))
                .ok_or_else(|| ErrorKind::EmptyAggregate.into());
        }
        if matches!(kind, AggKind::Sum | AggKind::Count) {
            // merge constant bodies sharing a condition; fold the certain ones into one item
            let mut merged: Vec<(GFormula, GTerm)> = Vec::new();
            let mut index: HashMap<GFormula, usize> = HashMap::new();
            let mut certain = Number::from_integer(0);
            for (c, b) in items {
                match (&c, &b) {
                    (GFormula::True, GTerm::Const(Value::Num(n))) => certain += n,
                    (_, GTerm::Const(Value::Num(n))) => match index.get(&c) {
                        Some(&i) => {
                            if let GTerm::Const(Value::Num(m)) = &mut merged[i].1 {
                                *m += n;
                            }
                        }
                        None => {
                            index.insert(c.clone(), merged.len());
                            merged.push((c, b));
                        }
                    },
                    _ => merged.push((c, b)),
                }
            }
            if certain != Number::from_integer(0) {
                merged.insert(0, (GFormula::True, GTerm::Const(Value::Num(certain))));
            }
            let kind = if kind == AggKind::Count { AggKind::Sum } else { kind };
            return Ok(GTerm::Agg { kind, items: merged });
        }
        Ok(GTerm::Agg { kind, items })
    }

    fn compare(&mut self, op: CmpOp, a: GTerm, b: GTerm) -> Result<GFormula> {
        if let (GTerm::Const(x), GTerm::Const(y)) = (&a, &b) {
            let holds = op
                .eval(x, y)
                .map_err(|e| Error::new(ErrorKind::SortMismatch(e.to_string())))?;
            return Ok(if holds { GFormula::True } else { GFormula::False });
        }
        if a == b && matches!(a, GTerm::Var(_)) {
            return Ok(if op.holds(std::cmp::Ordering::Equal) {
                GFormula::True
            } else {
                GFormula::False
            });
        }
        Ok(GFormula::Cmp(op, a, b))
    }

    fn formula(&mut self, f: &Formula, env: &Env) -> Result<GFormula> {
        match f {
            Formula::True => Ok(GFormula::True),
            Formula::False => Ok(GFormula::False),
            Formula::Compare(op, a, b) => {
                let a = self.term(a, env)?;
                let b = self.term(b, env)?;
                self.compare(*op, a, b)
            }
            Formula::Atom(sym, args) => {
                let args = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>>>()?;
                let t = self.apply(*sym, args)?;
                self.compare(CmpOp::Eq, t, GTerm::Const(Value::Bool(true)))
            }
            Formula::Not(inner) => Ok(not(self.formula(inner, env)?)),
            Formula::And(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    let g = self.formula(f, env)?;
                    if g == GFormula::False {
                        return Ok(GFormula::False);
                    }
                    parts.push(g);
                }
                Ok(and(parts))
            }
            Formula::Or(fs) => {
                let mut parts = Vec::new();
                for f in fs {
                    let g = self.formula(f, env)?;
                    if g == GFormula::True {
                        return Ok(GFormula::True);
                    }
                    parts.push(g);
                }
                Ok(or(parts))
            }
            Formula::Implies(a, b) => {
                let ga = self.formula(a, env)?;
                match ga {
                    GFormula::False => Ok(GFormula::True),
                    GFormula::True => self.formula(b, env),
                    other => {
                        let gb = self.formula(b, env)?;
                        Ok(or(vec![not(other), gb]))
                    }
                }
            }
            Formula::Forall(vars, body) => {
                let doms: Vec<&[Value]> = vars
                    .iter()
                    .map(|v| {
                        self.model
                            .structure
                            .domain(v.sort)
                            .ok_or_else(|| Error::new(ErrorKind::Eval("quantifier over an unbounded type".into())))
                    })
                    .collect::<Result<_>>()?;
                let mut env = env.clone();
                let mut parts = Vec::new();
                for tuple in cartesian(&doms) {
                    for (v, x) in vars.iter().zip(tuple) {
                        env.insert(v.clone(), x);
                    }
                    let g = self.formula(body, &env)?;
                    if g == GFormula::False {
                        return Ok(GFormula::False);
                    }
                    parts.push(g);
                }
                Ok(and(parts))
            }
        }
    }
}

/// Evaluation failures that reject every candidate rather than abort grounding.
fn undefined(e: &Error) -> bool {
    matches!(e.kind, ErrorKind::DivisionByZero | ErrorKind::EmptyAggregate)
}

fn describe_tuple(vars: &[Var], tuple: &[Value]) -> String {
    vars.iter()
        .zip(tuple)
        .map(|(v, x)| format!("{} = {x}", v.name))
        .collect::<Vec<_>>()
        .join(", ")
}

fn failed(
    constraints: &mut Vec<GroundConstraint>,
    diagnostics: &mut Vec<Diagnostic>,
    table: &str,
    line: Option<usize>,
    e: &Error,
    at: &str,
) {
    let message = if at.is_empty() {
        format!("cannot be evaluated: {}", e.kind)
    } else {
        format!("cannot be evaluated for {at}: {}", e.kind)
    };
    diagnostics.push(Diagnostic {
        kind: DiagnosticKind::TableViolated,
        message,
        line,
        table: Some(table.to_string()),
    });
    constraints.push(GroundConstraint {
        table: table.to_string(),
        formula: GFormula::False,
    });
}

/// Ground the compiled theory and the task objective.
pub fn ground(model: &CompiledModel, options: GroundOptions) -> Result<GroundProblem> {
    let vocab = &model.vocab;
    let structure = &model.structure;
    let mut g = Grounder {
        vocab,
        model,
        definitions: model.theory.definitions().map(|d| (d.symbol, d)).collect(),
        var_index: HashMap::new(),
        vars: Vec::new(),
        defs: Vec::new(),
        def_index: HashMap::new(),
    };

    for &sym in &structure.unknown {
        let decl = vocab.symbol(sym);
        let domain = structure.domain(decl.result);
        let tuples = structure.arg_tuples(vocab, sym);
        let (Some(domain), Some(tuples)) = (domain, tuples) else {
            return Err(ErrorKind::UnboundedUnknown(decl.ident.clone()).into());
        };
        for args in tuples {
            let atom = GroundAtom { symbol: sym, args };
            g.var_index.insert(atom.clone(), g.vars.len());
            g.vars.push(GroundVar {
                atom,
                domain: domain.to_vec(),
            });
        }
    }

    let mut planned = 0usize;
    let mut sizes = Vec::new();
    for t in &model.tables {
        let mut tuples = t.conjuncts.len();
        for v in &t.vars {
            let n = structure
                .domain(v.sort)
                .map(<[Value]>::len)
                .ok_or_else(|| Error::new(ErrorKind::Eval("quantifier over an unbounded type".into())).in_table(&t.title))?;
            tuples = tuples.saturating_mul(n);
        }
        planned = planned.saturating_add(tuples);
        sizes.push(tuples);
    }
    if planned > options.limit {
        return Err(ErrorKind::GroundSizeLimit(options.limit).into());
    }

    let mut constraints = Vec::new();
    let mut diagnostics = Vec::new();
    let mut instantiations = Vec::new();
    for (t, size) in model.tables.iter().zip(sizes) {
        instantiations.push((t.title.clone(), size));
        let doms: Vec<&[Value]> = t.vars.iter().map(|v| structure.domain(v.sort).unwrap()).collect();
        for tuple in cartesian(&doms) {
            let env: Env = t.vars.iter().cloned().zip(tuple.iter().cloned()).collect();
            for (i, conjunct) in t.conjuncts.iter().enumerate() {
                let f = match g.formula(conjunct, &env) {
                    Err(e) if undefined(&e) => {
                        let at = describe_tuple(&t.vars, &tuple);
                        failed(&mut constraints, &mut diagnostics, &t.title, Some(t.line), &e, &at);
                        continue;
                    }
                    other => other.map_err(|e| e.with_line(t.line).in_table(&t.title))?,
                };
                match f {
                    GFormula::True => {}
                    GFormula::False => {
                        let at = describe_tuple(&t.vars, &tuple);
                        let (kind, what) = if t.coverage == Some(i) {
                            (DiagnosticKind::NullOutput, "no row applies and no default is declared")
                        } else {
                            (DiagnosticKind::TableViolated, "the data alone violate this table")
                        };
                        diagnostics.push(Diagnostic {
                            kind,
                            message: if at.is_empty() { what.to_string() } else { format!("{what} for {at}") },
                            line: Some(t.line),
                            table: Some(t.title.clone()),
                        });
                        constraints.push(GroundConstraint {
                            table: t.title.clone(),
                            formula: GFormula::False,
                        });
                    }
                    other => constraints.push(GroundConstraint {
                        table: t.title.clone(),
                        formula: other,
                    }),
                }
            }
        }
    }

    // every derived instance is grounded, so a value that can never be
    // computed shows up here even when no table mentions it
    for entry in &model.theory.entries {
        let Some(def) = &entry.definition else { continue };
        let tuples = structure
            .arg_tuples(vocab, def.symbol)
            .ok_or_else(|| Error::new(ErrorKind::UnboundedUnknown(vocab.symbol(def.symbol).ident.clone())))?;
        for args in tuples {
            match g.resolve(def.symbol, args.clone()) {
                Err(e) if undefined(&e) => {
                    let at = GroundAtom { symbol: def.symbol, args }.show(vocab);
                    failed(&mut constraints, &mut diagnostics, &entry.title, None, &e, &at);
                }
                other => {
                    other.map_err(|e| e.in_table(&entry.title))?;
                }
            }
        }
    }

    let objective = match &model.task {
        Task::Enumerate { .. } => None,
        Task::Minimize(t) | Task::Maximize(t) => {
            let sense = if matches!(model.task, Task::Minimize(_)) { Sense::Minimize } else { Sense::Maximize };
            match g.term(t, &Env::new()) {
                Ok(t) => Some((sense, t)),
                Err(e) if undefined(&e) => {
                    failed(&mut constraints, &mut diagnostics, "objective", None, &e, "");
                    None
                }
                Err(e) => return Err(e),
            }
        }
    };

    Ok(GroundProblem {
        vars: g.vars,
        defs: g.defs,
        constraints,
        objective,
        instantiations,
        diagnostics,
    })
}

impl GroundProblem {
    pub fn show_term(&self, t: &GTerm, vocab: &Vocabulary) -> String {
        match t {
            GTerm::Const(v) => v.to_string(),
            GTerm::Var(i) => self.vars[*i].atom.show(vocab),
            GTerm::Def(i) => self.defs[*i].0.show(vocab),
            GTerm::Arith(op, a, b) => format!("({} {} {})", self.show_term(a, vocab), op.symbol(), self.show_term(b, vocab)),
            GTerm::Agg { kind, items } => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|(c, b)| format!("{} -> {}", self.show_formula(c, vocab), self.show_term(b, vocab)))
                    .collect();
                format!("{}{{{}}}", kind.name(), parts.join("; "))
            }
            GTerm::Select { keys, cases } => {
                let keys: Vec<String> = keys.iter().map(|k| self.show_term(k, vocab)).collect();
                let cases: Vec<String> = cases
                    .iter()
                    .map(|(k, t)| {
                        let k: Vec<String> = k.iter().map(Value::to_string).collect();
                        format!("({}) -> {}", k.join(", "), self.show_term(t, vocab))
                    })
                    .collect();
                format!("case ({}) of {{{}}}", keys.join(", "), cases.join("; "))
            }
        }
    }

    pub fn show_formula(&self, f: &GFormula, vocab: &Vocabulary) -> String {
        let join = |fs: &[GFormula], sep: &str| {
            let parts: Vec<String> = fs.iter().map(|x| self.show_formula(x, vocab)).collect();
            format!("({})", parts.join(sep))
        };
        match f {
            GFormula::True => "true".into(),
            GFormula::False => "false".into(),
            GFormula::Cmp(op, a, b) => format!("{} {} {}", self.show_term(a, vocab), op.symbol(), self.show_term(b, vocab)),
            GFormula::Not(x) => format!("~({})", self.show_formula(x, vocab)),
            GFormula::And(fs) => join(fs, " & "),
            GFormula::Or(fs) => join(fs, " | "),
        }
    }
}
