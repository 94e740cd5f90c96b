//! Translation of tables into theory entries, data tables into a structure,
//! and the execute block into a task.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, ErrorKind, Result};
use crate::expr::{formula_of_cell, parse_cell, parse_expr, parse_header, term_of, CellEntry, ColumnRole, Expr, VarScope};
use crate::format::{BlockKind, HitPolicy, RawBlock, RawModel};
use crate::glossary::{
    build_vocabulary, complete_domains, data_columns, validate_data, Diagnostic, Domain, SymbolId, SymbolKind,
    Vocabulary,
};
use crate::logic::{
    symbols_of, symbols_of_term, AggKind, CmpOp, Definition, Formula, Structure, Term, TermType, Theory,
    TheoryEntry, Var,
};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task {
    /// `None` enumerates every model.
    Enumerate { limit: Option<usize> },
    Minimize(Term),
    Maximize(Term),
}

impl Default for Task {
    fn default() -> Self {
        Task::Enumerate { limit: Some(1) }
    }
}

/// Compilation metadata of one decision, constraint or aggregate table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledTable {
    pub title: String,
    pub hit_policy: HitPolicy,
    /// Universally quantified variables (the variable-introducing input columns).
    pub vars: Vec<Var>,
    pub inputs: Vec<Term>,
    pub outputs: Vec<Term>,
    pub rows: usize,
    /// Conjuncts under the quantifier, one ground constraint each per tuple of `vars`.
    pub conjuncts: Vec<Formula>,
    /// Index in `conjuncts` of the "some row applies" requirement of a decision table.
    pub coverage: Option<usize>,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub vocab: Vocabulary,
    pub theory: Theory,
    pub structure: Structure,
    pub task: Task,
    /// Parallel to `theory.entries`.
    pub tables: Vec<CompiledTable>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Columns {
    scope: VarScope,
    inputs: Vec<Term>,
    outputs: Vec<Term>,
    defaults: Vec<Option<String>>,
}

/// Split `header default value` for decision-table outputs.
fn split_default(text: &str) -> (&str, Option<&str>) {
    let lower = text.to_lowercase();
    match lower.rfind(" default ") {
        Some(i) if text.is_char_boundary(i) => (&text[..i], Some(text[i + 9..].trim())),
        _ => (text, None),
    }
}

fn parse_columns(block: &RawBlock, vocab: &Vocabulary, allow_default: bool) -> Result<Columns> {
    let mut scope = VarScope::default();
    let at = |e: Error| e.with_line(block.header.line).in_table(&block.title);
    let mut inputs = Vec::new();
    for text in &block.header.inputs {
        let e = parse_header(text, vocab, &mut scope, ColumnRole::Input).map_err(at)?;
        inputs.push(term_of(&e));
    }
    let mut outputs = Vec::new();
    let mut defaults = Vec::new();
    for text in &block.header.outputs {
        let (head, default) = if allow_default {
            split_default(text)
        } else {
            (text.as_str(), None)
        };
        let e = parse_header(head, vocab, &mut scope, ColumnRole::Output).map_err(at)?;
        outputs.push(term_of(&e));
        defaults.push(default.map(str::to_string));
    }
    Ok(Columns {
        scope,
        inputs,
        outputs,
        defaults,
    })
}

fn row_inputs(
    block: &RawBlock,
    cols: &Columns,
    vocab: &Vocabulary,
) -> Result<Vec<Formula>> {
    block
        .rows
        .iter()
        .map(|row| {
            let parts = row
                .inputs
                .iter()
                .zip(&cols.inputs)
                .map(|(cell, term)| {
                    let entry = parse_cell(cell, vocab, &cols.scope)?;
                    formula_of_cell(&entry, term, vocab)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.with_line(row.line).in_table(&block.title))?;
            Ok(Formula::and(parts.into_iter().filter(|f| *f != Formula::True).collect()))
        })
        .collect()
}

fn table_meta(block: &RawBlock, cols: &Columns, conjuncts: Vec<Formula>, coverage: Option<usize>) -> CompiledTable {
    CompiledTable {
        title: block.title.clone(),
        hit_policy: block.hit_policy.expect("tables carry a hit policy"),
        vars: cols.scope.vars(),
        inputs: cols.inputs.clone(),
        outputs: cols.outputs.clone(),
        rows: block.rows.len(),
        conjuncts,
        coverage,
        line: block.header.line,
    }
}

/// An `E*` table: every row is an implication, quantified over the introduced variables.
pub fn compile_constraint_table(block: &RawBlock, vocab: &Vocabulary) -> Result<CompiledTable> {
    let cols = parse_columns(block, vocab, false)?;
    let antecedents = row_inputs(block, &cols, vocab)?;
    let mut conjuncts = Vec::new();
    for (row, antecedent) in block.rows.iter().zip(antecedents) {
        let outs = row
            .outputs
            .iter()
            .zip(&cols.outputs)
            .map(|(cell, term)| {
                let entry = parse_cell(cell, vocab, &cols.scope)?;
                formula_of_cell(&entry, term, vocab)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.with_line(row.line).in_table(&block.title))?;
        conjuncts.push(Formula::implies(antecedent, Formula::and(outs)));
    }
    Ok(table_meta(block, &cols, conjuncts, None))
}

fn literal_output(text: &str, vocab: &Vocabulary, scope: &VarScope) -> Result<Value> {
    match parse_cell(text, vocab, scope)? {
        CellEntry::Value(Expr::Literal(v)) => Ok(v),
        _ => Err(ErrorKind::NonValueOutput(text.trim().into()).into()),
    }
}

fn output_eq(term: &Term, value: &Value, vocab: &Vocabulary) -> Result<Formula> {
    let entry = CellEntry::Value(Expr::Literal(value.clone()));
    formula_of_cell(&entry, term, vocab)
}

fn output_symbols(terms: &[Term]) -> BTreeSet<SymbolId> {
    terms
        .iter()
        .filter_map(|t| match t {
            Term::Apply(s, _) => Some(*s),
            _ => None,
        })
        .collect()
}

/// A `U`, `A` or `F` table: row implications, the coverage requirement, and
/// the hit policy's overlap condition.
pub fn compile_decision_table(block: &RawBlock, vocab: &Vocabulary) -> Result<CompiledTable> {
    let policy = block.hit_policy.expect("decision table");
    let cols = parse_columns(block, vocab, true)?;
    let here = |e: Error| e.with_line(block.header.line).in_table(&block.title);

    let defined = output_symbols(&cols.outputs);
    for t in &cols.inputs {
        if let Some(s) = symbols_of_term(t).intersection(&defined).next() {
            return Err(here(ErrorKind::CyclicDefinition(vocab.symbol(*s).ident.clone()).into()));
        }
    }

    let inputs = row_inputs(block, &cols, vocab)?;
    for f in &inputs {
        if let Some(s) = symbols_of(f).intersection(&defined).next() {
            return Err(here(ErrorKind::CyclicDefinition(vocab.symbol(*s).ident.clone()).into()));
        }
    }
    let matches: Vec<Formula> = match policy {
        HitPolicy::First => inputs
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut parts = vec![m.clone()];
                parts.extend(inputs[..i].iter().map(|p| Formula::not(p.clone())));
                Formula::and(parts)
            })
            .collect(),
        _ => inputs.clone(),
    };

    let mut values: Vec<Vec<Value>> = Vec::new();
    for row in &block.rows {
        let vals = row
            .outputs
            .iter()
            .map(|cell| literal_output(cell, vocab, &cols.scope))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.with_line(row.line).in_table(&block.title))?;
        values.push(vals);
    }

    let mut conjuncts = Vec::new();
    for (m, vals) in matches.iter().zip(&values) {
        let outs = cols
            .outputs
            .iter()
            .zip(vals)
            .map(|(t, v)| output_eq(t, v, vocab))
            .collect::<Result<Vec<_>>>()
            .map_err(here)?;
        conjuncts.push(Formula::implies(m.clone(), Formula::and(outs)));
    }

    let mut fallback = Vec::new();
    for (t, d) in cols.outputs.iter().zip(&cols.defaults) {
        match d {
            Some(text) => {
                let v = literal_output(text, vocab, &cols.scope).map_err(here)?;
                fallback.push(output_eq(t, &v, vocab).map_err(here)?);
            }
            None => fallback.push(Formula::False),
        }
    }
    let consequent = if fallback.contains(&Formula::False) {
        Formula::False
    } else {
        Formula::and(fallback)
    };
    let coverage = conjuncts.len();
    conjuncts.push(Formula::implies(Formula::not(Formula::or(matches.clone())), consequent));

    for i in 0..matches.len() {
        for j in i + 1..matches.len() {
            let clash = match policy {
                HitPolicy::Unique => true,
                HitPolicy::Any => values[i] != values[j],
                _ => false,
            };
            if clash {
                conjuncts.push(Formula::not(Formula::And(vec![matches[i].clone(), matches[j].clone()])));
            }
        }
    }
    Ok(table_meta(block, &cols, conjuncts, Some(coverage)))
}

/// A `C+`, `C#`, `C<` or `C>` table: its output symbol becomes a derived
/// symbol defined by an aggregate over the non-head variables.
pub fn compile_aggregate_table(
    block: &RawBlock,
    vocab: &Vocabulary,
) -> Result<(CompiledTable, Definition, Formula)> {
    let policy = block.hit_policy.expect("aggregate table");
    let here = |e: Error| e.with_line(block.header.line).in_table(&block.title);
    if block.header.outputs.len() != 1 {
        return Err(here(ErrorKind::MultipleOutputColumns(block.header.outputs.len()).into()));
    }
    let cols = parse_columns(block, vocab, false)?;
    let head_text = &block.header.outputs[0];
    let (symbol, params) = match &cols.outputs[0] {
        Term::Apply(sym, args) => {
            let mut params: Vec<Var> = Vec::new();
            for a in args {
                match a {
                    Term::Var(v) if !params.contains(v) => params.push(v.clone()),
                    _ => return Err(here(ErrorKind::AggregateHead(head_text.clone()).into())),
                }
            }
            (*sym, params)
        }
        _ => return Err(here(ErrorKind::AggregateHead(head_text.clone()).into())),
    };
    if TermType::of_sort(vocab, vocab.symbol(symbol).result) != TermType::Num {
        return Err(here(ErrorKind::NonNumericOutput(head_text.clone()).into()));
    }
    let kind = match policy {
        HitPolicy::Sum => AggKind::Sum,
        HitPolicy::Count => AggKind::Count,
        HitPolicy::Min => AggKind::Min,
        _ => AggKind::Max,
    };
    let conds = row_inputs(block, &cols, vocab)?;
    let mut parts = Vec::new();
    for (row, cond) in block.rows.iter().zip(conds) {
        let cell = &row.outputs[0];
        let body = if kind == AggKind::Count {
            Term::Value(Value::int(1))
        } else {
            match parse_cell(cell, vocab, &cols.scope).map_err(|e| e.with_line(row.line).in_table(&block.title))? {
                CellEntry::Value(e) => {
                    let t = term_of(&e);
                    if TermType::of_term(&t, vocab) != TermType::Num {
                        return Err(Error::at(ErrorKind::NonNumericOutput(cell.clone()), row.line).in_table(&block.title));
                    }
                    t
                }
                _ => {
                    return Err(Error::at(ErrorKind::NonNumericOutput(cell.clone()), row.line).in_table(&block.title))
                }
            }
        };
        let refs = symbols_of(&cond).into_iter().chain(symbols_of_term(&body));
        for s in refs {
            if s == symbol {
                return Err(here(ErrorKind::CyclicDefinition(vocab.symbol(s).ident.clone()).into()));
            }
        }
        parts.push((cond, body));
    }
    let vars: Vec<Var> = cols.scope.vars().into_iter().filter(|v| !params.contains(v)).collect();
    let definition = Definition {
        symbol,
        params: params.clone(),
        body: Term::Aggregate { kind, vars, parts },
    };

    // the computed value must lie in the output's declared domain
    let head = Term::Apply(symbol, params.iter().cloned().map(Term::Var).collect());
    let sort = vocab.sort(vocab.symbol(symbol).result);
    let membership = match &sort.domain {
        Domain::Range { lo, hi, step } if *step == crate::value::Number::from_integer(1) && lo.is_integer() => {
            Formula::And(vec![
                Formula::Compare(CmpOp::Ge, head.clone(), Term::Value(Value::Num(*lo))),
                Formula::Compare(CmpOp::Le, head.clone(), Term::Value(Value::Num(*hi))),
            ])
        }
        Domain::Unbounded => Formula::True,
        _ => Formula::or(
            sort.elements()
                .unwrap_or_default()
                .into_iter()
                .map(|v| Formula::Compare(CmpOp::Eq, head.clone(), Term::Value(v)))
                .collect(),
        ),
    };
    let conjuncts = if membership == Formula::True { vec![] } else { vec![membership.clone()] };
    let mut meta = table_meta(block, &cols, conjuncts, None);
    meta.vars = params.clone();
    Ok((meta, definition, Formula::forall(params, membership)))
}

fn cross_product(lists: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let refs: Vec<&[Value]> = lists.iter().map(Vec::as_slice).collect();
    crate::logic::cartesian(&refs)
}

/// Record the tuples and values a data table fixes. Values that do not parse are
/// skipped; `validate_data` reports them.
pub fn compile_data_table(
    block: &RawBlock,
    vocab: &Vocabulary,
    fixed: &mut BTreeMap<SymbolId, BTreeMap<Vec<Value>, Value>>,
) -> Result<()> {
    let columns = data_columns(block, vocab)?;
    let n_in = block.header.inputs.len();
    for row in &block.rows {
        let at = |k: ErrorKind| Error::at(k, row.line).in_table(&block.title);
        let mut lists = Vec::new();
        for (col, cell) in columns[..n_in].iter().zip(&row.inputs) {
            let sort = vocab.sort(col.sort);
            lists.push(cell.split(',').filter_map(|item| sort.parse_value(item)).collect::<Vec<_>>());
        }
        let vars: Vec<&Var> = columns[..n_in]
            .iter()
            .map(|c| c.expr.introduced_var().expect("data inputs introduce variables"))
            .collect();
        for tuple in cross_product(&lists) {
            let env: BTreeMap<&Var, &Value> = vars.iter().copied().zip(&tuple).collect();
            for (col, cell) in columns[n_in..].iter().zip(&row.outputs) {
                let cell = cell.trim();
                if cell.chars().all(|c| c == '-') {
                    continue;
                }
                if cell.contains(',') {
                    return Err(at(ErrorKind::ListInOutputCell(cell.into())));
                }
                let Expr::Apply(sym, args) = &col.expr else {
                    return Err(at(ErrorKind::DataHeader(cell.into())));
                };
                let mut key = Vec::new();
                for a in args {
                    key.push(match a {
                        Expr::Var(v) => env[v].clone(),
                        Expr::Literal(v) => v.clone(),
                        _ => return Err(at(ErrorKind::DataHeader(block.header.outputs.join(" | ")))),
                    });
                }
                let Some(value) = vocab.sort(col.sort).parse_value(cell) else {
                    continue;
                };
                let slot = fixed.entry(*sym).or_default();
                match slot.get(&key) {
                    Some(old) if *old != value => {
                        let atom = crate::logic::GroundAtom { symbol: *sym, args: key };
                        return Err(at(ErrorKind::ConflictingAssignment(atom.show(vocab))));
                    }
                    _ => {
                        slot.insert(key, value);
                    }
                }
            }
        }
    }
    Ok(())
}

/// Read the execute block's single entry.
pub fn compile_execute(block: Option<&RawBlock>, vocab: &Vocabulary) -> Result<Task> {
    let Some(block) = block else {
        return Ok(Task::default());
    };
    let entries: Vec<(&str, usize)> = block
        .rows
        .iter()
        .flat_map(|r| r.inputs.iter().chain(&r.outputs).map(move |c| (c.as_str(), r.line)))
        .filter(|(c, _)| !c.trim().is_empty())
        .collect();
    let [(text, line)] = entries[..] else {
        let shown = entries.iter().map(|(c, _)| *c).collect::<Vec<_>>().join(" | ");
        return Err(Error::at(ErrorKind::MalformedExecute(shown), block.span.0));
    };
    let bad = || Error::at(ErrorKind::MalformedExecute(text.into()), line);
    let words: Vec<&str> = text.split_whitespace().collect();
    let first = words[0].to_lowercase();
    match first.as_str() {
        "get" => {
            let tail: Vec<String> = words[1..].iter().map(|w| w.to_lowercase()).collect();
            let ok_noun = |w: &str| w == "model" || w == "models";
            match tail.as_slice() {
                [n, noun] if ok_noun(noun) => {
                    if n == "all" {
                        return Ok(Task::Enumerate { limit: None });
                    }
                    let n: usize = n.parse().map_err(|_| bad())?;
                    if n == 0 {
                        return Err(bad());
                    }
                    Ok(Task::Enumerate { limit: Some(n) })
                }
                _ => Err(bad()),
            }
        }
        "minimize" | "minimise" | "maximize" | "maximise" => {
            let rest = text.trim()[words[0].len()..].trim();
            if rest.is_empty() {
                return Err(bad());
            }
            let e = parse_expr(rest, vocab, &VarScope::default()).map_err(|e| e.with_line(line))?;
            let t = term_of(&e);
            if TermType::of_term(&t, vocab) != TermType::Num {
                return Err(Error::at(ErrorKind::NonNumericObjective(rest.into()), line));
            }
            Ok(if first.starts_with("min") {
                Task::Minimize(t)
            } else {
                Task::Maximize(t)
            })
        }
        _ => Err(bad()),
    }
}

fn check_cycles(definitions: &[(Definition, String)], vocab: &Vocabulary) -> Result<()> {
    let deps: BTreeMap<SymbolId, BTreeSet<SymbolId>> = definitions
        .iter()
        .map(|(d, _)| (d.symbol, symbols_of_term(&d.body)))
        .collect();
    // 0 = unvisited, 1 = on stack, 2 = done
    fn visit(
        s: SymbolId,
        deps: &BTreeMap<SymbolId, BTreeSet<SymbolId>>,
        state: &mut BTreeMap<SymbolId, u8>,
    ) -> Option<SymbolId> {
        match state.get(&s) {
            Some(1) => return Some(s),
            Some(2) => return None,
            _ => {}
        }
        state.insert(s, 1);
        for d in deps.get(&s).into_iter().flatten() {
            if deps.contains_key(d) {
                if let Some(c) = visit(*d, deps, state) {
                    return Some(c);
                }
            }
        }
        state.insert(s, 2);
        None
    }
    let mut state = BTreeMap::new();
    for (d, title) in definitions {
        if let Some(c) = visit(d.symbol, &deps, &mut state) {
            return Err(Error::new(ErrorKind::CyclicDefinition(vocab.symbol(c).ident.clone())).in_table(title));
        }
    }
    Ok(())
}

/// Glossary, data, tables and execute block to vocabulary, structure, theory and task.
pub fn compile_model(raw: &RawModel) -> Result<CompiledModel> {
    let glossary: Vec<&RawBlock> = raw.blocks.iter().filter(|b| b.kind.is_glossary()).collect();
    let data: Vec<&RawBlock> = raw.blocks_of(BlockKind::Data).collect();
    let vocab = build_vocabulary(&glossary)?;
    let vocab = complete_domains(&vocab, &data)?;
    let diagnostics = validate_data(&vocab, &data);

    let mut structure = Structure::default();
    for (i, sort) in vocab.sorts.iter().enumerate() {
        if let Some(e) = sort.elements() {
            structure.domains.insert(crate::glossary::SortId(i), e);
        }
    }

    for block in &data {
        compile_data_table(block, &vocab, &mut structure.fixed)?;
    }
    for (&sym, map) in structure.fixed.iter_mut() {
        let decl = vocab.symbol(sym);
        let doms: Option<Vec<&[Value]>> = decl.arg_sorts.iter().map(|s| structure.domains.get(s).map(Vec::as_slice)).collect();
        let Some(doms) = doms else { continue };
        for tuple in crate::logic::cartesian(&doms) {
            if map.contains_key(&tuple) {
                continue;
            }
            if decl.kind == SymbolKind::Relation {
                map.insert(tuple, Value::Bool(false));
            } else if diagnostics.is_empty() {
                let shown: Vec<String> = tuple.iter().map(Value::to_string).collect();
                return Err(ErrorKind::PartialFunctionData(decl.ident.clone(), format!("({})", shown.join(", "))).into());
            }
        }
    }

    let mut theory = Theory::default();
    let mut tables = Vec::new();
    let mut writers: BTreeMap<SymbolId, String> = BTreeMap::new();
    let mut claim = |sym: SymbolId, title: &str, fixed: bool| -> Result<()> {
        if fixed || writers.contains_key(&sym) {
            return Err(Error::new(ErrorKind::DoublyDefined(vocab.symbol(sym).ident.clone())).in_table(title));
        }
        writers.insert(sym, title.to_string());
        Ok(())
    };
    let mut definitions = Vec::new();
    for block in raw.blocks_of(BlockKind::Table) {
        let policy = block.hit_policy.expect("table");
        if policy == HitPolicy::Every {
            let t = compile_constraint_table(block, &vocab)?;
            let formula = Formula::forall(t.vars.clone(), Formula::and(t.conjuncts.clone()));
            theory.entries.push(TheoryEntry { title: t.title.clone(), formula, definition: None });
            tables.push(t);
        } else if policy.is_aggregate() {
            let (t, def, formula) = compile_aggregate_table(block, &vocab)?;
            claim(def.symbol, &t.title, structure.fixed.contains_key(&def.symbol))?;
            definitions.push((def.clone(), t.title.clone()));
            theory.entries.push(TheoryEntry { title: t.title.clone(), formula, definition: Some(def) });
            tables.push(t);
        } else {
            let t = compile_decision_table(block, &vocab)?;
            for sym in output_symbols(&t.outputs) {
                claim(sym, &t.title, structure.fixed.contains_key(&sym))?;
            }
            let formula = Formula::forall(t.vars.clone(), Formula::and(t.conjuncts.clone()));
            theory.entries.push(TheoryEntry { title: t.title.clone(), formula, definition: None });
            tables.push(t);
        }
    }
    check_cycles(&definitions, &vocab)?;

    let task = compile_execute(raw.blocks_of(BlockKind::Execute).next(), &vocab)?;
    structure.unknown = vocab
        .symbol_ids()
        .filter(|s| !structure.fixed.contains_key(s) && theory.definition_of(*s).is_none())
        .collect();
    Ok(CompiledModel { vocab, theory, structure, task, tables, diagnostics })
}
