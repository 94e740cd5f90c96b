//! Backtracking search over the ground problem: bounds reasoning on partial
//! assignments, forward checking and value shaving on small constraints,
//! branch-and-bound for optimization.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::compile::{CompiledModel, Task};
use crate::error::{ErrorKind, Result};
use crate::ground::{GFormula, GTerm, GroundProblem, Sense};
use crate::logic::{AggKind, ArithOp, CmpOp};
use crate::oracle::{check_model, complete_assignment, Assignment};
use crate::value::{Number, Value};

/// Constraints with at most this many open variables get value shaving.
const SHAVE_VARS: usize = 3;

const TIMEOUT: &str = "timeout";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Optimum,
    Limit,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Optimum => "OPTIMUM",
            Status::Limit => "LIMIT",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelResult {
    /// Values of every unknown and derived symbol instance; empty for a bare
    /// UNSAT or LIMIT report.
    pub assignment: Assignment,
    pub objective: Option<Value>,
    pub status: Status,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveOptions {
    pub timeout: Option<Duration>,
    /// Overrides the model count requested by the task when enumerating.
    /// `Some(0)` means all models.
    pub max_models: Option<usize>,
}

/// Abstract value of a term under a partial assignment.
#[derive(Clone, Debug, PartialEq)]
enum Av {
    Known(Value),
    Range(Number, Number),
    Any,
}

impl Av {
    fn bounds(&self) -> Option<(Number, Number)> {
        match self {
            Av::Known(Value::Num(n)) => Some((*n, *n)),
            Av::Range(lo, hi) => Some((*lo, *hi)),
            _ => None,
        }
    }
}

fn range(lo: Number, hi: Number) -> Av {
    if lo == hi {
        Av::Known(Value::Num(lo))
    } else {
        Av::Range(lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn of(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

struct DomainInfo {
    values: Vec<Value>,
    index: HashMap<Value, usize>,
}

/// Bitset domains of all variables, stored flat.
#[derive(Clone, Debug)]
struct Doms(Vec<u64>);

struct Layout {
    offset: Vec<usize>,
    info: Vec<usize>,
}

fn sorted_dedup(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Exact evaluation failure; the candidate is rejected.
struct Fail;

pub struct Solver<'a> {
    model: &'a CompiledModel,
    problem: GroundProblem,
    infos: Vec<DomainInfo>,
    layout: Layout,
    cons_vars: Vec<Vec<usize>>,
    watches: Vec<Vec<usize>>,
    sense: Option<Sense>,
    limit: Option<usize>,
    deadline: Option<Instant>,
    // search state
    stack: Vec<Frame>,
    pending: Option<Doms>,
    started: bool,
    finished: bool,
    found: usize,
    best: Option<(Assignment, Value)>,
    /// For a sum objective: which items mention each variable.
    objective_items: Option<Vec<Vec<usize>>>,
}

struct Frame {
    doms: Doms,
    var: usize,
    values: Vec<usize>,
    next: usize,
}

/// Solve the ground problem for the model's task. The stream yields each model
/// (enumeration) or each improving incumbent (optimization), then a final
/// OPTIMUM, UNSAT or LIMIT report where applicable.
pub fn solve(model: &CompiledModel, problem: GroundProblem, options: SolveOptions) -> Solver<'_> {
    Solver::new(model, problem, options)
}

impl<'a> Solver<'a> {
    pub fn new(model: &'a CompiledModel, problem: GroundProblem, options: SolveOptions) -> Self {
        let mut infos: Vec<DomainInfo> = Vec::new();
        let mut by_domain: HashMap<Vec<Value>, usize> = HashMap::new();
        let mut layout = Layout {
            offset: Vec::new(),
            info: Vec::new(),
        };
        let mut words = 0;
        for v in &problem.vars {
            let id = *by_domain.entry(v.domain.clone()).or_insert_with(|| {
                infos.push(DomainInfo {
                    values: v.domain.clone(),
                    index: v.domain.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect(),
                });
                infos.len() - 1
            });
            layout.offset.push(words);
            layout.info.push(id);
            words += v.domain.len().div_ceil(64);
        }

        let mut def_vars: Vec<Option<Vec<usize>>> = vec![None; problem.defs.len()];
        let mut cons_vars = Vec::new();
        let mut watches = vec![Vec::new(); problem.vars.len()];
        for (c, con) in problem.constraints.iter().enumerate() {
            let mut vs = Vec::new();
            formula_vars(&con.formula, &problem, &mut def_vars, &mut vs);
            let vs = sorted_dedup(vs);
            for &v in &vs {
                watches[v].push(c);
            }
            cons_vars.push(vs);
        }

        let (sense, limit) = match &model.task {
            Task::Enumerate { limit } => (None, *limit),
            Task::Minimize(_) => (Some(Sense::Minimize), None),
            Task::Maximize(_) => (Some(Sense::Maximize), None),
        };
        let limit = match options.max_models {
            Some(0) => None,
            Some(n) => Some(n),
            None => limit,
        };
        let sense = problem.objective.as_ref().map(|(s, _)| *s).or(sense);

        let objective_items = problem.objective.as_ref().and_then(|(_, t)| {
            let GTerm::Agg { kind: AggKind::Sum, items } = resolve_def(t, &problem) else {
                return None;
            };
            let mut by_var = vec![Vec::new(); problem.vars.len()];
            for (i, (c, b)) in items.iter().enumerate() {
                let mut vs = Vec::new();
                formula_vars(c, &problem, &mut def_vars, &mut vs);
                term_vars(b, &problem, &mut def_vars, &mut vs);
                for v in sorted_dedup(vs) {
                    by_var[v].push(i);
                }
            }
            Some(by_var)
        });

        let mut doms = Doms(vec![0; words]);
        for (v, var) in problem.vars.iter().enumerate() {
            for k in 0..var.domain.len() {
                doms.0[layout.offset[v] + k / 64] |= 1 << (k % 64);
            }
        }

        Solver {
            model,
            problem,
            infos,
            layout,
            cons_vars,
            watches,
            sense,
            limit,
            deadline: options.timeout.map(|t| Instant::now() + t),
            stack: Vec::new(),
            pending: Some(doms),
            started: false,
            finished: false,
            found: 0,
            best: None,
            objective_items,
        }
    }

    pub fn problem(&self) -> &GroundProblem {
        &self.problem
    }

    // ---- domain helpers ----

    fn size_of(&self, d: &Doms, v: usize) -> usize {
        let n = self.infos[self.layout.info[v]].values.len();
        let off = self.layout.offset[v];
        d.0[off..off + n.div_ceil(64)].iter().map(|w| w.count_ones() as usize).sum()
    }

    fn has(&self, d: &Doms, v: usize, k: usize) -> bool {
        d.0[self.layout.offset[v] + k / 64] & (1 << (k % 64)) != 0
    }

    fn remove(&self, d: &mut Doms, v: usize, k: usize) {
        d.0[self.layout.offset[v] + k / 64] &= !(1 << (k % 64));
    }

    fn members(&self, d: &Doms, v: usize) -> Vec<usize> {
        let n = self.infos[self.layout.info[v]].values.len();
        (0..n).filter(|&k| self.has(d, v, k)).collect()
    }

    fn set_single(&self, d: &mut Doms, v: usize, k: usize) {
        let n = self.infos[self.layout.info[v]].values.len();
        let off = self.layout.offset[v];
        for w in &mut d.0[off..off + n.div_ceil(64)] {
            *w = 0;
        }
        d.0[off + k / 64] |= 1 << (k % 64);
    }

    fn value(&self, v: usize, k: usize) -> &Value {
        &self.infos[self.layout.info[v]].values[k]
    }

    fn single(&self, d: &Doms, v: usize) -> Option<&Value> {
        let mut found = None;
        let n = self.infos[self.layout.info[v]].values.len();
        let off = self.layout.offset[v];
        for (i, w) in d.0[off..off + n.div_ceil(64)].iter().enumerate() {
            match (w.count_ones(), found) {
                (0, _) => {}
                (1, None) => found = Some(i * 64 + w.trailing_zeros() as usize),
                _ => return None,
            }
        }
        found.map(|k| self.value(v, k))
    }

    // ---- abstract evaluation ----

    fn var_av(&self, d: &Doms, v: usize) -> Av {
        if let Some(x) = self.single(d, v) {
            return Av::Known(x.clone());
        }
        let info = &self.infos[self.layout.info[v]];
        let mut bounds: Option<(Number, Number)> = None;
        for k in self.members(d, v) {
            let Some(n) = info.values[k].as_num() else {
                return Av::Any;
            };
            bounds = Some(match bounds {
                None => (n, n),
                Some((lo, hi)) => (lo.min(n), hi.max(n)),
            });
        }
        match bounds {
            Some((lo, hi)) => range(lo, hi),
            None => Av::Any,
        }
    }

    fn term(&self, t: &GTerm, d: &Doms) -> Av {
        match t {
            GTerm::Const(v) => Av::Known(v.clone()),
            GTerm::Var(v) => self.var_av(d, *v),
            GTerm::Def(i) => self.term(&self.problem.defs[*i].1, d),
            GTerm::Arith(op, a, b) => {
                let a = self.term(a, d);
                let b = self.term(b, d);
                if let (Av::Known(x), Av::Known(y)) = (&a, &b) {
                    return match (x.as_num(), y.as_num()) {
                        (Some(x), Some(y)) => op.apply(x, y).map(|n| Av::Known(Value::Num(n))).unwrap_or(Av::Any),
                        _ => Av::Any,
                    };
                }
                let (Some((al, ah)), Some((bl, bh))) = (a.bounds(), b.bounds()) else {
                    return Av::Any;
                };
                match op {
                    ArithOp::Add => range(al + bl, ah + bh),
                    ArithOp::Sub => range(al - bh, ah - bl),
                    ArithOp::Mul => {
                        let ps = [al * bl, al * bh, ah * bl, ah * bh];
                        range(
                            ps.iter().copied().fold(ps[0], Number::min),
                            ps.iter().copied().fold(ps[0], Number::max),
                        )
                    }
                    ArithOp::Div => {
                        if bl == bh && bl != Number::from_integer(0) {
                            let (x, y) = (al / bl, ah / bl);
                            range(x.min(y), x.max(y))
                        } else {
                            Av::Any
                        }
                    }
                }
            }
            GTerm::Agg { kind, items } => self.aggregate(*kind, items.iter(), d),
            GTerm::Select { keys, cases } => {
                let keys: Vec<(Av, Option<usize>)> = keys
                    .iter()
                    .map(|k| {
                        let var = if let GTerm::Var(v) = k { Some(*v) } else { None };
                        (self.term(k, d), var)
                    })
                    .collect();
                let mut out: Option<Av> = None;
                for (key, body) in cases {
                    let fits = keys.iter().zip(key).all(|((av, var), x)| match (av, var) {
                        (Av::Known(k), _) => k == x,
                        (_, Some(v)) => {
                            let info = &self.infos[self.layout.info[*v]];
                            info.index.get(x).is_some_and(|&k| self.has(d, *v, k))
                        }
                        (Av::Range(lo, hi), None) => x.as_num().is_some_and(|n| *lo <= n && n <= *hi),
                        (Av::Any, None) => true,
                    });
                    if !fits {
                        continue;
                    }
                    let av = self.term(body, d);
                    out = Some(match out {
                        None => av,
                        Some(prev) => join(prev, av),
                    });
                    if out == Some(Av::Any) {
                        return Av::Any;
                    }
                }
                out.unwrap_or(Av::Any)
            }
        }
    }

    fn aggregate<'i>(&self, kind: AggKind, items: impl Iterator<Item = &'i (GFormula, GTerm)>, d: &Doms) -> Av {
        let zero = Number::from_integer(0);
        match kind {
            AggKind::Sum | AggKind::Count => {
                let (mut lo, mut hi) = (zero, zero);
                for (c, b) in items {
                    let truth = self.formula(c, d);
                    if truth == Truth::False {
                        continue;
                    }
                    let Some((bl, bh)) = self.term(b, d).bounds() else {
                        return Av::Any;
                    };
                    if truth == Truth::True {
                        lo += bl;
                        hi += bh;
                    } else {
                        lo += bl.min(zero);
                        hi += bh.max(zero);
                    }
                }
                range(lo, hi)
            }
            AggKind::Min | AggKind::Max => {
                let is_min = kind == AggKind::Min;
                // `sure`: best bound over certainly selected items; `maybe`: over all possibly selected
                let mut sure: Option<Number> = None;
                let mut maybe: Option<(Number, Number)> = None;
                for (c, b) in items {
                    let truth = self.formula(c, d);
                    if truth == Truth::False {
                        continue;
                    }
                    let Some((bl, bh)) = self.term(b, d).bounds() else {
                        return Av::Any;
                    };
                    maybe = Some(match maybe {
                        None => (bl, bh),
                        Some((l, h)) => (l.min(bl), h.max(bh)),
                    });
                    if truth == Truth::True {
                        let edge = if is_min { bh } else { bl };
                        sure = Some(match sure {
                            None => edge,
                            Some(s) if is_min => s.min(edge),
                            Some(s) => s.max(edge),
                        });
                    }
                }
                match (sure, maybe) {
                    (Some(s), Some((l, h))) => {
                        if is_min {
                            range(l, s)
                        } else {
                            range(s, h)
                        }
                    }
                    _ => Av::Any,
                }
            }
        }
    }

    fn words(&self, v: usize) -> std::ops::Range<usize> {
        let off = self.layout.offset[v];
        off..off + self.infos[self.layout.info[v]].values.len().div_ceil(64)
    }

    /// Equality between a variable and a value or another variable, decided
    /// on the bitsets directly when possible.
    fn equality(&self, a: &GTerm, b: &GTerm, d: &Doms) -> Option<Truth> {
        match (a, b) {
            (GTerm::Var(v), GTerm::Const(k)) | (GTerm::Const(k), GTerm::Var(v)) => {
                let info = &self.infos[self.layout.info[*v]];
                let Some(&i) = info.index.get(k) else {
                    return Some(Truth::False);
                };
                if !self.has(d, *v, i) {
                    Some(Truth::False)
                } else if self.size_of(d, *v) == 1 {
                    Some(Truth::True)
                } else {
                    Some(Truth::Unknown)
                }
            }
            (GTerm::Var(v), GTerm::Var(w)) if self.layout.info[*v] == self.layout.info[*w] => {
                let (rv, rw) = (self.words(*v), self.words(*w));
                let overlap = d.0[rv.clone()].iter().zip(&d.0[rw]).any(|(x, y)| x & y != 0);
                if !overlap {
                    Some(Truth::False)
                } else if self.size_of(d, *v) == 1 && self.size_of(d, *w) == 1 {
                    Some(Truth::True)
                } else {
                    Some(Truth::Unknown)
                }
            }
            _ => None,
        }
    }

    fn compare(&self, op: CmpOp, a: &GTerm, b: &GTerm, d: &Doms) -> Truth {
        if matches!(op, CmpOp::Eq | CmpOp::Ne) {
            if let Some(t) = self.equality(a, b, d) {
                return match (op, t) {
                    (CmpOp::Ne, Truth::True) => Truth::False,
                    (CmpOp::Ne, Truth::False) => Truth::True,
                    _ => t,
                };
            }
        }
        let x = self.term(a, d);
        let y = self.term(b, d);
        if let (Av::Known(x), Av::Known(y)) = (&x, &y) {
            return op.eval(x, y).map(Truth::of).unwrap_or(Truth::Unknown);
        }
        if matches!(op, CmpOp::Eq | CmpOp::Ne) {
            let outcome = |equal_possible: bool| match (op, equal_possible) {
                (CmpOp::Eq, false) => Truth::False,
                (CmpOp::Ne, false) => Truth::True,
                _ => Truth::Unknown,
            };
            match (a, b, &x, &y) {
                (GTerm::Var(v), _, _, Av::Known(k)) | (_, GTerm::Var(v), Av::Known(k), _) => {
                    let info = &self.infos[self.layout.info[*v]];
                    return outcome(info.index.get(k).is_some_and(|&i| self.has(d, *v, i)));
                }
                (GTerm::Var(v), GTerm::Var(w), _, _) => {
                    let (iv, iw) = (&self.infos[self.layout.info[*v]], &self.infos[self.layout.info[*w]]);
                    let overlap = self
                        .members(d, *v)
                        .into_iter()
                        .any(|k| iw.index.get(&iv.values[k]).is_some_and(|&j| self.has(d, *w, j)));
                    return outcome(overlap);
                }
                _ => {}
            }
        }
        let (Some((al, ah)), Some((bl, bh))) = (x.bounds(), y.bounds()) else {
            return Truth::Unknown;
        };
        match op {
            CmpOp::Lt if ah < bl => Truth::True,
            CmpOp::Lt if al >= bh => Truth::False,
            CmpOp::Le if ah <= bl => Truth::True,
            CmpOp::Le if al > bh => Truth::False,
            CmpOp::Gt if al > bh => Truth::True,
            CmpOp::Gt if ah <= bl => Truth::False,
            CmpOp::Ge if al >= bh => Truth::True,
            CmpOp::Ge if ah < bl => Truth::False,
            CmpOp::Eq if ah < bl || bh < al => Truth::False,
            CmpOp::Ne if ah < bl || bh < al => Truth::True,
            _ => Truth::Unknown,
        }
    }

    fn formula(&self, f: &GFormula, d: &Doms) -> Truth {
        match f {
            GFormula::True => Truth::True,
            GFormula::False => Truth::False,
            GFormula::Cmp(op, a, b) => self.compare(*op, a, b, d),
            GFormula::Not(inner) => match self.formula(inner, d) {
                Truth::True => Truth::False,
                Truth::False => Truth::True,
                Truth::Unknown => Truth::Unknown,
            },
            GFormula::And(fs) => {
                let mut out = Truth::True;
                for f in fs {
                    match self.formula(f, d) {
                        Truth::False => return Truth::False,
                        Truth::Unknown => out = Truth::Unknown,
                        Truth::True => {}
                    }
                }
                out
            }
            GFormula::Or(fs) => {
                let mut out = Truth::False;
                for f in fs {
                    match self.formula(f, d) {
                        Truth::True => return Truth::True,
                        Truth::Unknown => out = Truth::Unknown,
                        Truth::False => {}
                    }
                }
                out
            }
        }
    }

    // ---- exact evaluation on total assignments, left to right ----

    fn exact_term(&self, t: &GTerm, d: &Doms) -> std::result::Result<Value, Fail> {
        match t {
            GTerm::Const(v) => Ok(v.clone()),
            GTerm::Var(v) => self.single(d, *v).cloned().ok_or(Fail),
            GTerm::Def(i) => self.exact_term(&self.problem.defs[*i].1, d),
            GTerm::Arith(op, a, b) => {
                let x = self.exact_term(a, d)?.as_num().ok_or(Fail)?;
                let y = self.exact_term(b, d)?.as_num().ok_or(Fail)?;
                op.apply(x, y).map(Value::Num).map_err(|_| Fail)
            }
            GTerm::Agg { kind, items } => {
                let mut nums = Vec::new();
                for (c, b) in items {
                    if self.exact_formula(c, d)? {
                        nums.push(self.exact_term(b, d)?.as_num().ok_or(Fail)?);
                    }
                }
                kind.fold(nums).map(Value::Num).ok_or(Fail)
            }
            GTerm::Select { keys, cases } => {
                let keys = keys.iter().map(|k| self.exact_term(k, d)).collect::<std::result::Result<Vec<_>, _>>()?;
                let (_, body) = cases.iter().find(|(k, _)| *k == keys).ok_or(Fail)?;
                self.exact_term(body, d)
            }
        }
    }

    fn exact_formula(&self, f: &GFormula, d: &Doms) -> std::result::Result<bool, Fail> {
        match f {
            GFormula::True => Ok(true),
            GFormula::False => Ok(false),
            GFormula::Cmp(op, a, b) => {
                let x = self.exact_term(a, d)?;
                let y = self.exact_term(b, d)?;
                op.eval(&x, &y).map_err(|_| Fail)
            }
            GFormula::Not(inner) => Ok(!self.exact_formula(inner, d)?),
            GFormula::And(fs) => {
                for f in fs {
                    if !self.exact_formula(f, d)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            GFormula::Or(fs) => {
                for f in fs {
                    if self.exact_formula(f, d)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    // ---- propagation ----

    /// Run constraints to a fixpoint. Returns false on a wipe-out.
    fn propagate(&self, d: &mut Doms, start: impl IntoIterator<Item = usize>) -> bool {
        let mut queued = vec![false; self.problem.constraints.len()];
        let mut queue = VecDeque::new();
        for c in start {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            let f = &self.problem.constraints[c].formula;
            match self.formula(f, d) {
                Truth::False => return false,
                Truth::True => continue,
                Truth::Unknown => {}
            }
            let open: Vec<usize> = self.cons_vars[c]
                .iter()
                .copied()
                .filter(|&v| self.single(d, v).is_none())
                .collect();
            if open.is_empty() || open.len() > SHAVE_VARS {
                continue;
            }
            for v in open {
                let before = d.clone();
                let mut changed = false;
                for k in self.members(&before, v) {
                    let mut trial = before.clone();
                    self.set_single(&mut trial, v, k);
                    if self.formula(f, &trial) == Truth::False {
                        self.remove(d, v, k);
                        changed = true;
                    }
                }
                if !changed {
                    continue;
                }
                if self.size_of(d, v) == 0 {
                    return false;
                }
                for &w in &self.watches[v] {
                    if !queued[w] {
                        queued[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        true
    }

    /// Can a node with these domains still beat the incumbent?
    fn within_bound(&self, d: &Doms) -> bool {
        let (Some((sense, obj)), Some((_, best))) = (&self.problem.objective, &self.best) else {
            return true;
        };
        let Some(best) = best.as_num() else { return true };
        match (self.term(obj, d).bounds(), sense) {
            (Some((lo, _)), Sense::Minimize) => lo < best,
            (Some((_, hi)), Sense::Maximize) => hi > best,
            (None, _) => true,
        }
    }

    /// Smallest open domain first, ties by index.
    fn choose_var(&self, d: &Doms) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for v in 0..self.problem.vars.len() {
            let n = self.size_of(d, v);
            if n > 1 && best.is_none_or(|(_, m)| n < m) {
                best = Some((v, n));
                if n == 2 {
                    break;
                }
            }
        }
        best.map(|(v, _)| v)
    }

    /// Domain order; when optimizing, stably reordered by the objective bound
    /// each value leaves.
    fn order_values(&self, d: &Doms, v: usize) -> Vec<usize> {
        let values = self.members(d, v);
        let Some((sense, obj)) = &self.problem.objective else {
            return values;
        };
        let score = |bounds: Option<(Number, Number)>| {
            bounds.map(|(lo, hi)| match sense {
                Sense::Minimize => lo,
                Sense::Maximize => -hi,
            })
        };
        let mut keyed: Vec<(Option<Number>, usize)> = values
            .into_iter()
            .map(|k| {
                let mut trial = d.clone();
                self.set_single(&mut trial, v, k);
                // items not mentioning `v` contribute equally to every value
                let key = match (&self.objective_items, resolve_def(obj, &self.problem)) {
                    (Some(by_var), GTerm::Agg { kind, items }) => {
                        score(self.aggregate(*kind, by_var[v].iter().map(|&i| &items[i]), &trial).bounds())
                    }
                    _ => score(self.term(obj, &trial).bounds()),
                };
                (key, k)
            })
            .collect();
        keyed.sort_by(|a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => x.cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
        keyed.into_iter().map(|(_, k)| k).collect()
    }

    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|t| Instant::now() >= t)
    }

    /// Leaf handling: exact check, then the model as reported.
    fn accept(&self, d: &Doms) -> Option<(Assignment, Option<Value>)> {
        for c in &self.problem.constraints {
            if !matches!(self.exact_formula(&c.formula, d), Ok(true)) {
                return None;
            }
        }
        for (_, t) in &self.problem.defs {
            self.exact_term(t, d).ok()?;
        }
        let objective = match &self.problem.objective {
            Some((_, t)) => Some(self.exact_term(t, d).ok()?),
            None => None,
        };
        if let (Some(v), Some((_, best)), Some(sense)) = (&objective, &self.best, self.sense) {
            let better = match sense {
                Sense::Minimize => v < best,
                Sense::Maximize => v > best,
            };
            if !better {
                return None;
            }
        }
        let assignment: Assignment = self
            .problem
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.atom.clone(), self.single(d, i).cloned().expect("total assignment")))
            .collect();
        Some((assignment, objective))
    }

    /// Advance the search to the next leaf model. `Ok(None)` when exhausted or out of time.
    fn next_leaf(&mut self) -> Result<Option<(Assignment, Option<Value>)>> {
        if !self.started {
            self.started = true;
            let mut d = self.pending.take().expect("root domains");
            let all = 0..self.problem.constraints.len();
            if self.propagate(&mut d, all) {
                self.pending = Some(d);
            }
        }
        loop {
            if self.timed_out() {
                return Err(ErrorKind::Eval(TIMEOUT.into()).into());
            }
            if let Some(d) = self.pending.take() {
                match self.choose_var(&d) {
                    None => {
                        if let Some(found) = self.accept(&d) {
                            return Ok(Some(found));
                        }
                    }
                    Some(v) => {
                        let values = self.order_values(&d, v);
                        self.stack.push(Frame {
                            doms: d,
                            var: v,
                            values,
                            next: 0,
                        });
                    }
                }
                continue;
            }
            let Some(frame) = self.stack.last_mut() else {
                return Ok(None);
            };
            if frame.next == frame.values.len() {
                self.stack.pop();
                continue;
            }
            let k = frame.values[frame.next];
            frame.next += 1;
            let v = frame.var;
            let mut d = frame.doms.clone();
            self.set_single(&mut d, v, k);
            if self.propagate(&mut d, self.watches[v].clone()) && self.within_bound(&d) {
                self.pending = Some(d);
            }
        }
    }

    fn report(&self, assignment: &Assignment, objective: Option<Value>, status: Status) -> Result<ModelResult> {
        let assignment = complete_assignment(self.model, assignment)?;
        let violated = check_model(self.model, &assignment);
        if !violated.is_empty() {
            return Err(ErrorKind::ModelCheckFailed(violated).into());
        }
        Ok(ModelResult {
            assignment,
            objective,
            status,
        })
    }

    fn empty(status: Status) -> ModelResult {
        ModelResult {
            assignment: Assignment::new(),
            objective: None,
            status,
        }
    }
}

/// Follow definition references to the defining term.
fn resolve_def<'p>(t: &'p GTerm, p: &'p GroundProblem) -> &'p GTerm {
    match t {
        GTerm::Def(i) => resolve_def(&p.defs[*i].1, p),
        other => other,
    }
}

fn join(a: Av, b: Av) -> Av {
    if a == b {
        return a;
    }
    match (a.bounds(), b.bounds()) {
        (Some((al, ah)), Some((bl, bh))) => range(al.min(bl), ah.max(bh)),
        _ => Av::Any,
    }
}

fn term_vars(t: &GTerm, p: &GroundProblem, memo: &mut Vec<Option<Vec<usize>>>, out: &mut Vec<usize>) {
    match t {
        GTerm::Const(_) => {}
        GTerm::Var(v) => out.push(*v),
        GTerm::Def(i) => {
            if memo[*i].is_none() {
                let mut vs = Vec::new();
                term_vars(&p.defs[*i].1, p, memo, &mut vs);
                memo[*i] = Some(sorted_dedup(vs));
            }
            out.extend(memo[*i].as_ref().unwrap());
        }
        GTerm::Arith(_, a, b) => {
            term_vars(a, p, memo, out);
            term_vars(b, p, memo, out);
        }
        GTerm::Agg { items, .. } => {
            for (c, b) in items {
                formula_vars(c, p, memo, out);
                term_vars(b, p, memo, out);
            }
        }
        GTerm::Select { keys, cases } => {
            for k in keys {
                term_vars(k, p, memo, out);
            }
            for (_, b) in cases {
                term_vars(b, p, memo, out);
            }
        }
    }
}

fn formula_vars(f: &GFormula, p: &GroundProblem, memo: &mut Vec<Option<Vec<usize>>>, out: &mut Vec<usize>) {
    match f {
        GFormula::True | GFormula::False => {}
        GFormula::Cmp(_, a, b) => {
            term_vars(a, p, memo, out);
            term_vars(b, p, memo, out);
        }
        GFormula::Not(x) => formula_vars(x, p, memo, out),
        GFormula::And(fs) | GFormula::Or(fs) => {
            for f in fs {
                formula_vars(f, p, memo, out);
            }
        }
    }
}

impl Iterator for Solver<'_> {
    type Item = Result<ModelResult>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        if self.sense.is_none() && self.limit.is_some_and(|n| self.found >= n) {
            self.finished = true;
            return None;
        }
        let step = match self.next_leaf() {
            Ok(step) => step,
            Err(e) if e.kind == ErrorKind::Eval(TIMEOUT.into()) => {
                self.finished = true;
                return Some(match &self.best {
                    Some((a, v)) => self.report(a, Some(v.clone()), Status::Limit),
                    None => Ok(Self::empty(Status::Limit)),
                });
            }
            Err(e) => {
                self.finished = true;
                return Some(Err(e));
            }
        };
        match step {
            Some((assignment, objective)) => {
                self.found += 1;
                let out = self.report(&assignment, objective.clone(), Status::Sat);
                if self.sense.is_some() {
                    self.best = Some((assignment, objective.expect("objective")));
                }
                if out.is_err() {
                    self.finished = true;
                }
                Some(out)
            }
            None => {
                self.finished = true;
                match &self.best {
                    Some((a, v)) => Some(self.report(a, Some(v.clone()), Status::Optimum)),
                    None if self.found == 0 => Some(Ok(Self::empty(Status::Unsat))),
                    None => None,
                }
            }
        }
    }
}

/// Collect the stream into models and the final status.
pub fn run(solver: Solver<'_>) -> Result<(Vec<ModelResult>, Status)> {
    let mut models = Vec::new();
    let mut status = Status::Sat;
    for r in solver {
        let r = r?;
        status = r.status;
        if !r.assignment.is_empty() || r.status == Status::Sat {
            models.push(r);
        }
    }
    Ok((models, status))
}

/// Values of the unknown instances only, keyed for comparison with the oracle.
pub fn project(model: &CompiledModel, assignment: &Assignment) -> BTreeMap<crate::logic::GroundAtom, Value> {
    assignment
        .iter()
        .filter(|(a, _)| model.structure.unknown.contains(&a.symbol))
        .map(|(a, v)| (a.clone(), v.clone()))
        .collect()
}
