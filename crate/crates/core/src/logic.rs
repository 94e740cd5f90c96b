//! Typed first-order terms and formulas, theories, structures, and the
//! reference evaluator shared by the oracle and model checking.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::error::ErrorKind;
use crate::glossary::{Base, SortId, SymbolId, Vocabulary};
use crate::value::{Number, Value};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: SortId,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: SortId) -> Self {
        Var {
            name: name.into(),
            sort,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub fn apply(self, a: Number, b: Number) -> Result<Number, EvalError> {
        Ok(match self {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => {
                if b == Number::from_integer(0) {
                    return Err(EvalError::DivisionByZero);
                }
                a / b
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
        }
    }

    /// Compare two values. Ordering comparisons need numbers on both sides.
    pub fn eval(self, a: &Value, b: &Value) -> Result<bool, EvalError> {
        if self.is_ordering() {
            match (a, b) {
                (Value::Num(x), Value::Num(y)) => Ok(self.holds(x.cmp(y))),
                _ => Err(EvalError::Type(format!("cannot order {a} and {b}"))),
            }
        } else {
            Ok((a == b) == (self == CmpOp::Eq))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggKind {
    Sum,
    Count,
    Min,
    Max,
}

impl AggKind {
    pub fn name(self) -> &'static str {
        match self {
            AggKind::Sum => "sum",
            AggKind::Count => "count",
            AggKind::Min => "min",
            AggKind::Max => "max",
        }
    }

    /// Fold a selection. `None` for min/max over nothing.
    pub fn fold(self, items: impl IntoIterator<Item = Number>) -> Option<Number> {
        let iter = items.into_iter();
        match self {
            AggKind::Sum | AggKind::Count => Some(iter.sum()),
            AggKind::Min => iter.min(),
            AggKind::Max => iter.max(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Value(Value),
    Apply(SymbolId, Vec<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
    /// Folds `body` over every tuple of `vars` for which `cond` holds, per part.
    /// A table with several rows contributes one part per row.
    Aggregate {
        kind: AggKind,
        vars: Vec<Var>,
        parts: Vec<(Formula, Term)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Compare(CmpOp, Term, Term),
    /// `r(args) = Yes`
    Atom(SymbolId, Vec<Term>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn forall(vars: Vec<Var>, body: Formula) -> Formula {
        if vars.is_empty() || body == Formula::True {
            body
        } else {
            Formula::Forall(vars, Box::new(body))
        }
    }

    /// Conjunction that collapses the empty and singleton cases.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }
}

/// A symbol whose value is computed from a term, as produced by aggregate tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub symbol: SymbolId,
    pub params: Vec<Var>,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryEntry {
    pub title: String,
    pub formula: Formula,
    pub definition: Option<Definition>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub entries: Vec<TheoryEntry>,
}

impl Theory {
    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.entries.iter().filter_map(|e| e.definition.as_ref())
    }

    pub fn definition_of(&self, symbol: SymbolId) -> Option<&Definition> {
        self.definitions().find(|d| d.symbol == symbol)
    }
}

/// Sort domains plus the symbol interpretations fixed by data tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Structure {
    /// Elements of every bounded sort, in declaration order.
    pub domains: BTreeMap<SortId, Vec<Value>>,
    pub fixed: BTreeMap<SymbolId, BTreeMap<Vec<Value>, Value>>,
    /// Symbols the solver must interpret, in declaration order.
    pub unknown: Vec<SymbolId>,
}

impl Structure {
    pub fn domain(&self, sort: SortId) -> Option<&[Value]> {
        self.domains.get(&sort).map(Vec::as_slice)
    }

    /// All argument tuples of a symbol, in lexicographic domain order.
    pub fn arg_tuples(&self, vocab: &Vocabulary, symbol: SymbolId) -> Option<Vec<Vec<Value>>> {
        let domains: Option<Vec<&[Value]>> = vocab
            .symbol(symbol)
            .arg_sorts
            .iter()
            .map(|s| self.domain(*s))
            .collect();
        Some(cartesian(&domains?))
    }
}

/// Every tuple of the product of `domains`, first position slowest.
pub fn cartesian(domains: &[&[Value]]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for dom in domains {
        let mut next = Vec::with_capacity(out.len() * dom.len());
        for prefix in &out {
            for v in dom.iter() {
                let mut t = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// A ground symbol instance such as `hates(Agatha, Butler)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub symbol: SymbolId,
    pub args: Vec<Value>,
}

impl GroundAtom {
    pub fn show(&self, vocab: &Vocabulary) -> String {
        let ident = &vocab.symbol(self.symbol).ident;
        if self.args.is_empty() {
            ident.clone()
        } else {
            let args: Vec<String> = self.args.iter().map(Value::to_string).collect();
            format!("{ident}({})", args.join(", "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("min/max over an empty selection")]
    EmptyAggregate,
    #[error("no value for symbol instance {0:?}")]
    Uninterpreted(GroundAtom),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("cannot quantify over unbounded sort {0:?}")]
    Unbounded(SortId),
    #[error("{0}")]
    Type(String),
}

impl From<EvalError> for ErrorKind {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::DivisionByZero => ErrorKind::DivisionByZero,
            EvalError::EmptyAggregate => ErrorKind::EmptyAggregate,
            other => ErrorKind::Eval(other.to_string()),
        }
    }
}

/// What the evaluator needs from a (partial) structure.
pub trait Interpretation {
    fn domain(&self, sort: SortId) -> Option<&[Value]>;
    fn lookup(&self, symbol: SymbolId, args: &[Value]) -> Result<Value, EvalError>;
}

/// A structure extended with values for its unknown symbols; derived symbols
/// are computed from their definitions on demand and cached.
pub struct Candidate<'a> {
    pub structure: &'a Structure,
    pub assignment: &'a BTreeMap<GroundAtom, Value>,
    definitions: BTreeMap<SymbolId, &'a Definition>,
    cache: RefCell<BTreeMap<GroundAtom, Value>>,
}

impl<'a> Candidate<'a> {
    pub fn new(
        theory: &'a Theory,
        structure: &'a Structure,
        assignment: &'a BTreeMap<GroundAtom, Value>,
    ) -> Self {
        Candidate {
            structure,
            assignment,
            definitions: theory.definitions().map(|d| (d.symbol, d)).collect(),
            cache: RefCell::new(BTreeMap::new()),
        }
    }
}

impl Interpretation for Candidate<'_> {
    fn domain(&self, sort: SortId) -> Option<&[Value]> {
        self.structure.domain(sort)
    }

    fn lookup(&self, symbol: SymbolId, args: &[Value]) -> Result<Value, EvalError> {
        if let Some(v) = self.structure.fixed.get(&symbol).and_then(|m| m.get(args)) {
            return Ok(v.clone());
        }
        let atom = GroundAtom {
            symbol,
            args: args.to_vec(),
        };
        if let Some(v) = self.assignment.get(&atom) {
            return Ok(v.clone());
        }
        if let Some(def) = self.definitions.get(&symbol) {
            if let Some(v) = self.cache.borrow().get(&atom) {
                return Ok(v.clone());
            }
            let mut env = Valuation::default();
            for (p, a) in def.params.iter().zip(args) {
                env.push(p.clone(), a.clone());
            }
            let v = evaluate_term(&def.body, self, &mut env)?;
            self.cache.borrow_mut().insert(atom, v.clone());
            return Ok(v);
        }
        Err(EvalError::Uninterpreted(atom))
    }
}

/// Variable bindings, innermost last.
#[derive(Clone, Debug, Default)]
pub struct Valuation {
    bindings: Vec<(Var, Value)>,
}

impl Valuation {
    pub fn push(&mut self, var: Var, value: Value) {
        self.bindings.push((var, value));
    }

    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn get(&self, var: &Var) -> Option<&Value> {
        self.bindings
            .iter()
            .rev()
            .find(|(v, _)| v == var)
            .map(|(_, x)| x)
    }
}

pub fn evaluate_term(
    term: &Term,
    interp: &dyn Interpretation,
    env: &mut Valuation,
) -> Result<Value, EvalError> {
    match term {
        Term::Var(v) => env
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(v.name.clone())),
        Term::Value(v) => Ok(v.clone()),
        Term::Apply(sym, args) => {
            let vals = args
                .iter()
                .map(|a| evaluate_term(a, interp, env))
                .collect::<Result<Vec<_>, _>>()?;
            interp.lookup(*sym, &vals)
        }
        Term::Arith(op, a, b) => {
            let x = evaluate_term(a, interp, env)?;
            let y = evaluate_term(b, interp, env)?;
            match (x.as_num(), y.as_num()) {
                (Some(x), Some(y)) => Ok(Value::Num(op.apply(x, y)?)),
                _ => Err(EvalError::Type(format!(
                    "arithmetic on non-numbers {x} {} {y}",
                    op.symbol()
                ))),
            }
        }
        Term::Aggregate { kind, vars, parts } => {
            let mut items = Vec::new();
            for_each_tuple(vars, interp, env, &mut |env| {
                for (cond, body) in parts {
                    if evaluate_formula(cond, interp, env)? {
                        let v = evaluate_term(body, interp, env)?;
                        let n = v
                            .as_num()
                            .ok_or_else(|| EvalError::Type(format!("aggregating non-number {v}")))?;
                        items.push(if *kind == AggKind::Count {
                            Number::from_integer(1)
                        } else {
                            n
                        });
                    }
                }
                Ok(true)
            })?;
            kind.fold(items)
                .map(Value::Num)
                .ok_or(EvalError::EmptyAggregate)
        }
    }
}

/// Call `f` with `env` extended by every tuple of `vars`; stop early when `f` returns false.
/// Returns false iff some call returned false.
fn for_each_tuple(
    vars: &[Var],
    interp: &dyn Interpretation,
    env: &mut Valuation,
    f: &mut dyn FnMut(&mut Valuation) -> Result<bool, EvalError>,
) -> Result<bool, EvalError> {
    let Some((first, rest)) = vars.split_first() else {
        return f(env);
    };
    let dom = interp
        .domain(first.sort)
        .ok_or(EvalError::Unbounded(first.sort))?
        .to_vec();
    for d in dom {
        env.push(first.clone(), d);
        let r = for_each_tuple(rest, interp, env, f);
        env.pop();
        if !r? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Standard satisfaction. Connectives evaluate left to right and stop early.
pub fn evaluate_formula(
    formula: &Formula,
    interp: &dyn Interpretation,
    env: &mut Valuation,
) -> Result<bool, EvalError> {
    match formula {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Compare(op, a, b) => {
            let x = evaluate_term(a, interp, env)?;
            let y = evaluate_term(b, interp, env)?;
            op.eval(&x, &y)
        }
        Formula::Atom(sym, args) => {
            let vals = args
                .iter()
                .map(|a| evaluate_term(a, interp, env))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(interp.lookup(*sym, &vals)? == Value::Bool(true))
        }
        Formula::Not(f) => Ok(!evaluate_formula(f, interp, env)?),
        Formula::And(fs) => {
            for f in fs {
                if !evaluate_formula(f, interp, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for f in fs {
                if evaluate_formula(f, interp, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Implies(a, b) => {
            if evaluate_formula(a, interp, env)? {
                evaluate_formula(b, interp, env)
            } else {
                Ok(true)
            }
        }
        Formula::Forall(vars, body) => {
            for_each_tuple(vars, interp, env, &mut |env| evaluate_formula(body, interp, env))
        }
    }
}

pub fn free_variables(formula: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_formula(formula, &mut Vec::new(), &mut out);
    out
}

fn collect_term(term: &Term, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match term {
        Term::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        Term::Value(_) => {}
        Term::Apply(_, args) => args.iter().for_each(|a| collect_term(a, bound, out)),
        Term::Arith(_, a, b) => {
            collect_term(a, bound, out);
            collect_term(b, bound, out);
        }
        Term::Aggregate { vars, parts, .. } => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            for (c, b) in parts {
                collect_formula(c, bound, out);
                collect_term(b, bound, out);
            }
            bound.truncate(n);
        }
    }
}

fn collect_formula(formula: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match formula {
        Formula::True | Formula::False => {}
        Formula::Compare(_, a, b) => {
            collect_term(a, bound, out);
            collect_term(b, bound, out);
        }
        Formula::Atom(_, args) => args.iter().for_each(|a| collect_term(a, bound, out)),
        Formula::Not(f) => collect_formula(f, bound, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| collect_formula(f, bound, out)),
        Formula::Implies(a, b) => {
            collect_formula(a, bound, out);
            collect_formula(b, bound, out);
        }
        Formula::Forall(vars, body) => {
            let n = bound.len();
            bound.extend(vars.iter().cloned());
            collect_formula(body, bound, out);
            bound.truncate(n);
        }
    }
}

/// Symbols applied anywhere in a formula.
pub fn symbols_of(formula: &Formula) -> BTreeSet<SymbolId> {
    let mut out = BTreeSet::new();
    symbols_formula(formula, &mut out);
    out
}

pub fn symbols_of_term(term: &Term) -> BTreeSet<SymbolId> {
    let mut out = BTreeSet::new();
    symbols_term(term, &mut out);
    out
}

fn symbols_term(term: &Term, out: &mut BTreeSet<SymbolId>) {
    match term {
        Term::Var(_) | Term::Value(_) => {}
        Term::Apply(s, args) => {
            out.insert(*s);
            args.iter().for_each(|a| symbols_term(a, out));
        }
        Term::Arith(_, a, b) => {
            symbols_term(a, out);
            symbols_term(b, out);
        }
        Term::Aggregate { parts, .. } => {
            for (c, b) in parts {
                symbols_formula(c, out);
                symbols_term(b, out);
            }
        }
    }
}

fn symbols_formula(formula: &Formula, out: &mut BTreeSet<SymbolId>) {
    match formula {
        Formula::True | Formula::False => {}
        Formula::Compare(_, a, b) => {
            symbols_term(a, out);
            symbols_term(b, out);
        }
        Formula::Atom(s, args) => {
            out.insert(*s);
            args.iter().for_each(|a| symbols_term(a, out));
        }
        Formula::Not(f) => symbols_formula(f, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| symbols_formula(f, out)),
        Formula::Implies(a, b) => {
            symbols_formula(a, out);
            symbols_formula(b, out);
        }
        Formula::Forall(_, body) => symbols_formula(body, out),
    }
}

/// Coarse type of a term, for sort checking comparisons.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermType {
    Num,
    Bool,
    /// A string value of one of these sorts.
    Str(Vec<SortId>),
}

impl TermType {
    pub fn of_sort(vocab: &Vocabulary, sort: SortId) -> TermType {
        match vocab.sort(sort).base {
            Base::Int | Base::Float => TermType::Num,
            Base::Bool => TermType::Bool,
            Base::String => TermType::Str(vec![sort]),
        }
    }

    pub fn of_term(term: &Term, vocab: &Vocabulary) -> TermType {
        match term {
            Term::Var(v) => TermType::of_sort(vocab, v.sort),
            Term::Value(Value::Num(_)) => TermType::Num,
            Term::Value(Value::Bool(_)) => TermType::Bool,
            Term::Value(Value::Str(s)) => {
                TermType::Str(vocab.element_constants.get(&**s).cloned().unwrap_or_default())
            }
            Term::Apply(sym, _) => TermType::of_sort(vocab, vocab.symbol(*sym).result),
            Term::Arith(..) | Term::Aggregate { .. } => TermType::Num,
        }
    }

    pub fn compatible(&self, other: &TermType) -> bool {
        match (self, other) {
            (TermType::Num, TermType::Num) | (TermType::Bool, TermType::Bool) => true,
            (TermType::Str(a), TermType::Str(b)) => a.iter().any(|s| b.contains(s)),
            _ => false,
        }
    }

    pub fn describe(&self, vocab: &Vocabulary) -> String {
        match self {
            TermType::Num => "a number".into(),
            TermType::Bool => "Yes/No".into(),
            TermType::Str(sorts) => {
                let names: Vec<&str> = sorts.iter().map(|s| vocab.sort(*s).name.as_str()).collect();
                format!("a {}", names.join("/"))
            }
        }
    }
}

/// Deterministic, fully parenthesized rendering with symbol identifiers.
pub struct Show<'a, T: ?Sized>(pub &'a T, pub &'a Vocabulary);

fn write_vars(f: &mut fmt::Formatter<'_>, vars: &[Var], vocab: &Vocabulary) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{}[{}]", v.name, vocab.sort(v.sort).name)?;
    }
    Ok(())
}

fn write_app(f: &mut fmt::Formatter<'_>, sym: SymbolId, args: &[Term], vocab: &Vocabulary) -> fmt::Result {
    f.write_str(&vocab.symbol(sym).ident)?;
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", Show(a, vocab))?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Show<'_, Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vocab = self.1;
        match self.0 {
            Term::Var(v) => f.write_str(&v.name),
            Term::Value(v) => write!(f, "{v}"),
            Term::Apply(sym, args) => write_app(f, *sym, args, vocab),
            Term::Arith(op, a, b) => write!(f, "({} {} {})", Show(&**a, vocab), op.symbol(), Show(&**b, vocab)),
            Term::Aggregate { kind, vars, parts } => {
                write!(f, "{}{{", kind.name())?;
                write_vars(f, vars, vocab)?;
                f.write_str(": ")?;
                for (i, (c, b)) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{} -> {}", Show(c, vocab), Show(b, vocab))?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Display for Show<'_, Formula> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vocab = self.1;
        let join = |f: &mut fmt::Formatter<'_>, fs: &[Formula], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (i, x) in fs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{}", Show(x, vocab))?;
            }
            f.write_str(")")
        };
        match self.0 {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Compare(op, a, b) => write!(f, "{} {} {}", Show(a, vocab), op.symbol(), Show(b, vocab)),
            Formula::Atom(sym, args) => write_app(f, *sym, args, vocab),
            Formula::Not(x) => write!(f, "~({})", Show(&**x, vocab)),
            Formula::And(fs) => join(f, fs, " & "),
            Formula::Or(fs) => join(f, fs, " | "),
            Formula::Implies(a, b) => write!(f, "({} => {})", Show(&**a, vocab), Show(&**b, vocab)),
            Formula::Forall(vars, body) => {
                f.write_str("forall ")?;
                write_vars(f, vars, vocab)?;
                write!(f, ": {}", Show(&**body, vocab))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glossary::{Domain, Sort, SymbolDecl, SymbolKind, BOOL};

    /// Person {Agatha, Butler, Charles}, Number [0..5], Hatees of Person, Person hates Person.
    fn setup() -> (Vocabulary, Structure, SortId, SymbolId, SymbolId) {
        let mut vocab = Vocabulary::default();
        let person = SortId(vocab.sorts.len());
        vocab.sorts.push(Sort {
            name: "Person".into(),
            base: Base::String,
            domain: Domain::Enumerated(vec![Value::str("Agatha"), Value::str("Butler"), Value::str("Charles")]),
            inferred: false,
        });
        let number = SortId(vocab.sorts.len());
        vocab.sorts.push(Sort {
            name: "Number".into(),
            base: Base::Int,
            domain: Domain::Range {
                lo: Number::from_integer(0),
                hi: Number::from_integer(5),
                step: Number::from_integer(1),
            },
            inferred: false,
        });
        let decl = |kind, ident: &str, args: Vec<SortId>, result| SymbolDecl {
            kind,
            phrase: ident.into(),
            ident: ident.into(),
            pattern: vec![],
            arg_sorts: args,
            result,
            line: 0,
        };
        vocab.symbols.push(decl(SymbolKind::Function, "Hatees", vec![person], number));
        vocab.symbols.push(decl(SymbolKind::Relation, "hates", vec![person, person], BOOL));
        let mut s = Structure::default();
        for (i, sort) in vocab.sorts.iter().enumerate() {
            if let Some(e) = sort.elements() {
                s.domains.insert(SortId(i), e);
            }
        }
        s.unknown = vec![SymbolId(0), SymbolId(1)];
        (vocab, s, person, SymbolId(0), SymbolId(1))
    }

    fn hatees_lt_3(person: SortId, hatees: SymbolId) -> Formula {
        let x = Var::new("x", person);
        Formula::forall(
            vec![x.clone()],
            Formula::Compare(
                CmpOp::Lt,
                Term::Apply(hatees, vec![Term::Var(x)]),
                Term::Value(Value::int(3)),
            ),
        )
    }

    fn assign(hatees: SymbolId, counts: [i64; 3]) -> BTreeMap<GroundAtom, Value> {
        ["Agatha", "Butler", "Charles"]
            .iter()
            .zip(counts)
            .map(|(p, n)| {
                (
                    GroundAtom {
                        symbol: hatees,
                        args: vec![Value::str(p)],
                    },
                    Value::int(n),
                )
            })
            .collect()
    }

    #[test]
    fn universally_quantified_bound_holds() {
        // the hatee-count constraint, candidate Agatha 2, Butler 1, Charles 0
        let (vocab, s, person, hatees, _) = setup();
        let theory = Theory::default();
        let f = hatees_lt_3(person, hatees);
        let a = assign(hatees, [2, 1, 0]);
        let c = Candidate::new(&theory, &s, &a);
        assert!(evaluate_formula(&f, &c, &mut Valuation::default()).unwrap());
        let a = assign(hatees, [2, 3, 0]);
        let c = Candidate::new(&theory, &s, &a);
        assert!(!evaluate_formula(&f, &c, &mut Valuation::default()).unwrap());
        assert_eq!(
            Show(&f, &vocab).to_string(),
            "forall x[Person]: Hatees(x) < 3"
        );
    }

    #[test]
    fn literals_lookup_and_true() {
        let (_, s, _, hatees, _) = setup();
        let theory = Theory::default();
        let a = assign(hatees, [2, 1, 0]);
        let c = Candidate::new(&theory, &s, &a);
        let mut env = Valuation::default();
        assert_eq!(evaluate_term(&Term::Value(Value::int(3)), &c, &mut env).unwrap(), Value::int(3));
        let t = Term::Apply(hatees, vec![Term::Value(Value::str("Agatha"))]);
        assert_eq!(evaluate_term(&t, &c, &mut env).unwrap(), Value::int(2));
        assert!(evaluate_formula(&Formula::True, &c, &mut env).unwrap());
    }

    #[test]
    fn free_variable_sets() {
        let (_, _, person, hatees, hates) = setup();
        assert!(free_variables(&hatees_lt_3(person, hatees)).is_empty());
        let x = Var::new("x", person);
        let open = Formula::Compare(CmpOp::Lt, Term::Apply(hatees, vec![Term::Var(x.clone())]), Term::Value(Value::int(3)));
        assert_eq!(free_variables(&open), BTreeSet::from([x]));
        let (c1, c2) = (Var::new("c1", person), Var::new("c2", person));
        let imp = Formula::implies(
            Formula::Atom(hates, vec![Term::Var(c1.clone()), Term::Var(c2.clone())]),
            Formula::Compare(
                CmpOp::Ne,
                Term::Apply(hatees, vec![Term::Var(c1.clone())]),
                Term::Apply(hatees, vec![Term::Var(c2.clone())]),
            ),
        );
        assert_eq!(free_variables(&imp), BTreeSet::from([c1, c2]));
    }

    #[test]
    fn aggregates_and_errors() {
        let (_, s, person, hatees, _) = setup();
        let theory = Theory::default();
        let a = assign(hatees, [2, 1, 0]);
        let c = Candidate::new(&theory, &s, &a);
        let x = Var::new("x", person);
        let body = Term::Apply(hatees, vec![Term::Var(x.clone())]);
        let positive = Formula::Compare(CmpOp::Gt, body.clone(), Term::Value(Value::int(0)));
        let agg = |kind, cond: Formula| Term::Aggregate {
            kind,
            vars: vec![x.clone()],
            parts: vec![(cond, body.clone())],
        };
        let mut env = Valuation::default();
        let ev = |t: &Term, env: &mut Valuation| evaluate_term(t, &c, env);
        assert_eq!(ev(&agg(AggKind::Sum, Formula::True), &mut env).unwrap(), Value::int(3));
        assert_eq!(ev(&agg(AggKind::Count, positive.clone()), &mut env).unwrap(), Value::int(2));
        assert_eq!(ev(&agg(AggKind::Min, positive), &mut env).unwrap(), Value::int(1));
        assert_eq!(ev(&agg(AggKind::Max, Formula::True), &mut env).unwrap(), Value::int(2));
        assert_eq!(ev(&agg(AggKind::Sum, Formula::False), &mut env).unwrap(), Value::int(0));
        assert_eq!(ev(&agg(AggKind::Min, Formula::False), &mut env), Err(EvalError::EmptyAggregate));
        let div = Term::Arith(ArithOp::Div, Box::new(Term::Value(Value::int(1))), Box::new(Term::Value(Value::int(0))));
        assert_eq!(ev(&div, &mut env), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn derived_symbols_evaluate_from_definitions() {
        let (_, s, person, hatees, _) = setup();
        let x = Var::new("x", person);
        let theory = Theory {
            entries: vec![TheoryEntry {
                title: "count".into(),
                formula: Formula::True,
                definition: Some(Definition {
                    symbol: hatees,
                    params: vec![x.clone()],
                    body: Term::Value(Value::int(4)),
                }),
            }],
        };
        let empty = BTreeMap::new();
        let c = Candidate::new(&theory, &s, &empty);
        assert_eq!(c.lookup(hatees, &[Value::str("Butler")]).unwrap(), Value::int(4));
    }
}
