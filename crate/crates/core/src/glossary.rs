//! Vocabulary construction from the five glossary block kinds, domain inference
//! from data tables, and data-value validation.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, ErrorKind, Result};
use crate::expr::{parse_header, ColumnRole, Expr, VarScope};
use crate::format::{BlockKind, RawBlock};
use crate::value::{decimal_places, parse_number, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub usize);

/// The two-valued sort used for relations and booleans.
pub const BOOL: SortId = SortId(0);
pub const INT: SortId = SortId(1);
pub const FLOAT: SortId = SortId(2);
const BUILTIN_SORTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Base {
    Bool,
    Int,
    Float,
    String,
}

impl Base {
    pub fn is_numeric(self) -> bool {
        matches!(self, Base::Int | Base::Float)
    }

    pub fn name(self) -> &'static str {
        match self {
            Base::Bool => "bool",
            Base::Int => "int",
            Base::Float => "float",
            Base::String => "string",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Enumerated(Vec<Value>),
    /// Inclusive numeric range. Float ranges step by the finest decimal written in the bounds.
    Range {
        lo: Number,
        hi: Number,
        step: Number,
    },
    /// To be filled from data tables.
    Inferred,
    /// Built-in `int`/`float`; only usable for symbols whose values are fixed or computed.
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    pub base: Base,
    pub domain: Domain,
    /// The domain was completed from data tables rather than declared.
    pub inferred: bool,
}

impl Sort {
    pub fn elements(&self) -> Option<Vec<Value>> {
        match &self.domain {
            Domain::Enumerated(values) => Some(values.clone()),
            Domain::Range { lo, hi, step } => {
                let mut out = Vec::new();
                let mut x = *lo;
                while x <= *hi {
                    out.push(Value::Num(x));
                    x += step;
                }
                Some(out)
            }
            Domain::Inferred => Some(Vec::new()),
            Domain::Unbounded => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.domain, Domain::Unbounded)
    }

    pub fn contains(&self, value: &Value) -> bool {
        if !self.fits_base(value) {
            return false;
        }
        match &self.domain {
            Domain::Enumerated(values) => values.contains(value),
            Domain::Range { lo, hi, step } => match value {
                Value::Num(n) => n >= lo && n <= hi && ((n - lo) / step).is_integer(),
                _ => false,
            },
            Domain::Inferred => false,
            Domain::Unbounded => true,
        }
    }

    pub fn fits_base(&self, value: &Value) -> bool {
        match (self.base, value) {
            (Base::Bool, Value::Bool(_)) => true,
            (Base::Int, Value::Num(n)) => n.is_integer(),
            (Base::Float, Value::Num(_)) => true,
            (Base::String, Value::Str(_)) => true,
            _ => false,
        }
    }

    /// Read a data cell as a value of this sort's base type.
    pub fn parse_value(&self, text: &str) -> Option<Value> {
        let text = text.trim();
        match self.base {
            Base::Bool => Value::parse_bool(text).map(Value::Bool),
            Base::Int => parse_number(text).filter(|n| n.is_integer()).map(Value::Num),
            Base::Float => parse_number(text).map(Value::Num),
            Base::String => {
                if text.is_empty() {
                    None
                } else {
                    Some(Value::str(text))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Function,
    Relation,
    Constant,
    Boolean,
}

impl SymbolKind {
    /// Relations and booleans take values in the `Yes`/`No` sort.
    pub fn is_predicate(self) -> bool {
        matches!(self, SymbolKind::Relation | SymbolKind::Boolean)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternPart {
    Word(String),
    Slot(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub kind: SymbolKind,
    /// The phrase as written in the glossary.
    pub phrase: String,
    /// Short identifier used when printing models (`Hatees`, `is_richer_than`).
    pub ident: String,
    pub pattern: Vec<PatternPart>,
    pub arg_sorts: Vec<SortId>,
    pub result: SortId,
    pub line: usize,
}

impl SymbolDecl {
    pub fn arity(&self) -> usize {
        self.arg_sorts.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub sorts: Vec<Sort>,
    pub symbols: Vec<SymbolDecl>,
    /// Domain element name -> sorts it belongs to (string sorts only).
    pub element_constants: BTreeMap<String, Vec<SortId>>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary {
            sorts: vec![
                Sort {
                    name: "Bool".into(),
                    base: Base::Bool,
                    domain: Domain::Enumerated(vec![Value::Bool(false), Value::Bool(true)]),
                    inferred: false,
                },
                Sort {
                    name: "int".into(),
                    base: Base::Int,
                    domain: Domain::Unbounded,
                    inferred: false,
                },
                Sort {
                    name: "float".into(),
                    base: Base::Float,
                    domain: Domain::Unbounded,
                    inferred: false,
                },
            ],
            symbols: Vec::new(),
            element_constants: BTreeMap::new(),
        }
    }
}

impl Vocabulary {
    pub fn sort(&self, id: SortId) -> &Sort {
        &self.sorts[id.0]
    }

    pub fn symbol(&self, id: SymbolId) -> &SymbolDecl {
        &self.symbols[id.0]
    }

    /// User-declared sorts, skipping the built-ins.
    pub fn user_sorts(&self) -> impl Iterator<Item = (SortId, &Sort)> {
        self.sorts
            .iter()
            .enumerate()
            .skip(BUILTIN_SORTS)
            .map(|(i, s)| (SortId(i), s))
    }

    pub fn sort_by_name(&self, name: &str) -> Option<SortId> {
        self.user_sorts().find(|(_, s)| s.name == name).map(|(id, _)| id)
    }

    pub fn symbol_ids(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len()).map(SymbolId)
    }

    /// A declared 0-ary symbol whose whole name is `name`.
    pub fn constant_by_name(&self, name: &str) -> Option<SymbolId> {
        self.symbol_ids()
            .find(|&id| self.symbol(id).arity() == 0 && self.symbol(id).phrase == name)
    }

    pub fn is_element(&self, name: &str) -> bool {
        self.element_constants.contains_key(name)
    }

    fn register_elements(&mut self) {
        self.element_constants.clear();
        for i in BUILTIN_SORTS..self.sorts.len() {
            let sort = &self.sorts[i];
            if sort.base != Base::String {
                continue;
            }
            if let Domain::Enumerated(values) = &sort.domain {
                for v in values {
                    if let Value::Str(s) = v {
                        self.element_constants
                            .entry(s.to_string())
                            .or_default()
                            .push(SortId(i));
                    }
                }
            }
        }
    }

    fn resolve_result_sort(&self, text: &str) -> Option<SortId> {
        let text = text.trim();
        match text.to_ascii_lowercase().as_str() {
            "int" | "integer" => return Some(INT),
            "float" | "real" => return Some(FLOAT),
            "bool" | "boolean" => return Some(BOOL),
            _ => {}
        }
        self.sort_by_name(text)
    }
}

/// Column indexes for `Name`, `Type` and `Values`, falling back to positional order.
fn column_index(block: &RawBlock, name: &str, default: usize) -> Option<usize> {
    block
        .header
        .inputs
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .or_else(|| (default < block.header.inputs.len()).then_some(default))
}

fn cell(row: &crate::format::RawRow, idx: Option<usize>) -> &str {
    idx.and_then(|i| row.inputs.get(i))
        .map(String::as_str)
        .unwrap_or("")
}

fn parse_domain(text: &str, base: Base, line: usize) -> Result<Domain> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Domain::Inferred);
    }
    if text.starts_with('[') && text.contains("..") {
        if !base.is_numeric() {
            return Err(Error::at(ErrorKind::MalformedDomain(text.into()), line));
        }
        let inner = text
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::at(ErrorKind::MalformedDomain(text.into()), line))?;
        let (lo_txt, hi_txt) = inner
            .split_once("..")
            .ok_or_else(|| Error::at(ErrorKind::MalformedDomain(text.into()), line))?;
        let outside = |v: &str| {
            Error::at(
                ErrorKind::ValueOutsideBase {
                    value: v.trim().into(),
                    base: base.name().into(),
                },
                line,
            )
        };
        let lo = parse_number(lo_txt).ok_or_else(|| outside(lo_txt))?;
        let hi = parse_number(hi_txt).ok_or_else(|| outside(hi_txt))?;
        if base == Base::Int && !(lo.is_integer()) {
            return Err(outside(lo_txt));
        }
        if base == Base::Int && !(hi.is_integer()) {
            return Err(outside(hi_txt));
        }
        if lo > hi {
            return Err(Error::at(ErrorKind::MalformedDomain(text.into()), line));
        }
        let places = decimal_places(lo_txt).max(decimal_places(hi_txt));
        let step = Number::new(1, 10i64.pow(places));
        return Ok(Domain::Range { lo, hi, step });
    }
    let mut values = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::at(ErrorKind::MalformedDomain(text.into()), line));
        }
        let value = match base {
            Base::Int => parse_number(item).filter(|n| n.is_integer()).map(Value::Num),
            Base::Float => parse_number(item).map(Value::Num),
            Base::String => Some(Value::str(item)),
            Base::Bool => Value::parse_bool(item).map(Value::Bool),
        }
        .ok_or_else(|| {
            Error::at(
                ErrorKind::ValueOutsideBase {
                    value: item.into(),
                    base: base.name().into(),
                },
                line,
            )
        })?;
        if values.contains(&value) {
            return Err(Error::at(ErrorKind::MalformedDomain(text.into()), line));
        }
        values.push(value);
    }
    Ok(Domain::Enumerated(values))
}

/// Positions of declared sort names inside `words`, longest match first.
/// Overlapping occurrences that start at different words are ambiguous.
fn sort_occurrences(
    vocab: &Vocabulary,
    words: &[&str],
    line: usize,
    phrase: &str,
) -> Result<Vec<(usize, usize, SortId)>> {
    let sort_words: Vec<(SortId, Vec<&str>)> = vocab
        .user_sorts()
        .map(|(id, s)| (id, s.name.split_whitespace().collect()))
        .collect();
    // every (start, len, sort) occurrence, longest per start
    let mut best: Vec<Option<(usize, SortId)>> = vec![None; words.len()];
    for (start, slot) in best.iter_mut().enumerate() {
        for (id, sw) in &sort_words {
            if start + sw.len() <= words.len() && words[start..start + sw.len()] == sw[..] {
                match slot {
                    Some((len, _)) if *len >= sw.len() => {}
                    _ => *slot = Some((sw.len(), *id)),
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut covered_until = 0;
    let mut last_end = 0;
    for (start, slot) in best.iter().enumerate() {
        if let Some((len, id)) = slot {
            if start < last_end {
                // nested inside the previous longest match is fine, crossing its end is not
                if start + len > last_end {
                    return Err(Error::at(ErrorKind::AmbiguousPhrase(phrase.into()), line));
                }
                continue;
            }
            if start < covered_until {
                continue;
            }
            out.push((start, *len, *id));
            last_end = start + len;
            covered_until = last_end;
        }
    }
    Ok(out)
}

fn build_symbol(
    vocab: &Vocabulary,
    kind: SymbolKind,
    phrase: &str,
    result: SortId,
    line: usize,
) -> Result<SymbolDecl> {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    let phrase = words.join(" ");
    let mut pattern = Vec::new();
    let mut arg_sorts = Vec::new();
    let ident = match kind {
        SymbolKind::Constant | SymbolKind::Boolean => {
            pattern.extend(words.iter().map(|w| PatternPart::Word(w.to_string())));
            words.join("_")
        }
        SymbolKind::Function => {
            let of = words
                .iter()
                .position(|w| w.eq_ignore_ascii_case("of"))
                .filter(|&i| i > 0 && i + 1 < words.len())
                .ok_or_else(|| Error::at(ErrorKind::MalformedFunctionName(phrase.clone()), line))?;
            for w in &words[..=of] {
                pattern.push(PatternPart::Word(w.to_string()));
            }
            let args = &words[of + 1..];
            for (i, group) in args.split(|w| w.eq_ignore_ascii_case("and")).enumerate() {
                let name = group.join(" ");
                let sort = vocab
                    .sort_by_name(&name)
                    .ok_or_else(|| Error::at(ErrorKind::MalformedFunctionName(phrase.clone()), line))?;
                if i > 0 {
                    pattern.push(PatternPart::Word("and".into()));
                }
                pattern.push(PatternPart::Slot(arg_sorts.len()));
                arg_sorts.push(sort);
            }
            words[..of].join("_")
        }
        SymbolKind::Relation => {
            let occurrences = sort_occurrences(vocab, &words, line, &phrase)?;
            if occurrences.is_empty() {
                return Err(Error::at(ErrorKind::ZeroSlotRelation(phrase.clone()), line));
            }
            let mut i = 0;
            let mut occ = occurrences.iter().peekable();
            while i < words.len() {
                if let Some(&&(start, len, sort)) = occ.peek() {
                    if start == i {
                        pattern.push(PatternPart::Slot(arg_sorts.len()));
                        arg_sorts.push(sort);
                        i += len;
                        occ.next();
                        continue;
                    }
                }
                pattern.push(PatternPart::Word(words[i].to_string()));
                i += 1;
            }
            let mut ident_words = Vec::new();
            for (j, part) in pattern.iter().enumerate() {
                if let PatternPart::Word(w) = part {
                    let between_slots = j > 0
                        && matches!(pattern[j - 1], PatternPart::Slot(_))
                        && matches!(pattern.get(j + 1), Some(PatternPart::Slot(_)));
                    if !(between_slots && w.eq_ignore_ascii_case("and")) {
                        ident_words.push(w.as_str());
                    }
                }
            }
            if ident_words.is_empty() {
                words.join("_")
            } else {
                ident_words.join("_")
            }
        }
    };
    Ok(SymbolDecl {
        kind,
        phrase,
        ident,
        pattern,
        arg_sorts,
        result,
        line,
    })
}

fn pattern_key(decl: &SymbolDecl) -> String {
    decl.pattern
        .iter()
        .map(|p| match p {
            PatternPart::Word(w) => w.to_lowercase(),
            PatternPart::Slot(i) => format!("<{}>", decl.arg_sorts[*i].0),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Register every sort and symbol declared by the glossary blocks.
pub fn build_vocabulary(blocks: &[&RawBlock]) -> Result<Vocabulary> {
    let mut vocab = Vocabulary::default();

    for block in blocks.iter().filter(|b| b.kind == BlockKind::Type) {
        let name_col = column_index(block, "Name", 0);
        let type_col = column_index(block, "Type", 1);
        let values_col = column_index(block, "Values", 2);
        for row in &block.rows {
            let name = cell(row, name_col).split_whitespace().collect::<Vec<_>>().join(" ");
            if name.is_empty() {
                return Err(Error::at(ErrorKind::MalformedDomain(String::new()), row.line));
            }
            if vocab.sort_by_name(&name).is_some() {
                return Err(Error::at(ErrorKind::DuplicateSort(name), row.line));
            }
            let base_text = cell(row, type_col);
            let base = match base_text.trim().to_ascii_lowercase().as_str() {
                "string" => Base::String,
                "int" | "integer" => Base::Int,
                "float" | "real" => Base::Float,
                other => {
                    return Err(Error::at(ErrorKind::UnknownBaseType(other.into()), row.line))
                }
            };
            let domain = parse_domain(cell(row, values_col), base, row.line)?;
            vocab.sorts.push(Sort {
                name,
                base,
                domain,
                inferred: false,
            });
        }
    }

    let order = [
        (BlockKind::Function, SymbolKind::Function),
        (BlockKind::Relation, SymbolKind::Relation),
        (BlockKind::Constant, SymbolKind::Constant),
        (BlockKind::Boolean, SymbolKind::Boolean),
    ];
    for block in blocks {
        let Some(&(_, kind)) = order.iter().find(|(k, _)| *k == block.kind) else {
            continue;
        };
        let name_col = column_index(block, "Name", 0);
        let type_col = column_index(block, "Type", 1);
        for row in &block.rows {
            let phrase = cell(row, name_col);
            let result = match kind {
                SymbolKind::Relation | SymbolKind::Boolean => BOOL,
                SymbolKind::Function | SymbolKind::Constant => {
                    let text = cell(row, type_col);
                    vocab
                        .resolve_result_sort(text)
                        .ok_or_else(|| Error::at(ErrorKind::UnknownResultSort(text.into()), row.line))?
                }
            };
            let decl = build_symbol(&vocab, kind, phrase, result, row.line)?;
            let key = pattern_key(&decl);
            if vocab.symbols.iter().any(|s| pattern_key(s) == key) {
                return Err(Error::at(ErrorKind::DuplicateSymbol(decl.phrase), row.line));
            }
            vocab.symbols.push(decl);
        }
    }

    disambiguate_idents(&mut vocab);
    vocab.register_elements();
    Ok(vocab)
}

fn disambiguate_idents(vocab: &mut Vocabulary) {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for s in &vocab.symbols {
        *counts.entry(s.ident.clone()).or_default() += 1;
    }
    for s in &mut vocab.symbols {
        if counts[&s.ident] > 1 {
            s.ident = s.phrase.split_whitespace().collect::<Vec<_>>().join("_");
        }
    }
}

/// A data-table column: its parsed header and the sort of the values in its cells.
pub(crate) struct DataColumn {
    pub expr: Expr,
    pub sort: SortId,
    pub is_input: bool,
}

pub(crate) fn data_columns(block: &RawBlock, vocab: &Vocabulary) -> Result<Vec<DataColumn>> {
    let mut scope = VarScope::default();
    let mut out = Vec::new();
    for (text, is_input) in block
        .header
        .inputs
        .iter()
        .map(|t| (t, true))
        .chain(block.header.outputs.iter().map(|t| (t, false)))
    {
        let role = if is_input {
            ColumnRole::Input
        } else {
            ColumnRole::Output
        };
        let expr = parse_header(text, vocab, &mut scope, role)
            .map_err(|e| e.with_line(block.header.line).in_table(&block.title))?;
        let sort = match &expr {
            Expr::Intro(var, _) if is_input => var.sort,
            Expr::Apply(sym, _) if !is_input => vocab.symbol(*sym).result,
            _ => {
                return Err(Error::at(ErrorKind::DataHeader(text.clone()), block.header.line)
                    .in_table(&block.title))
            }
        };
        out.push(DataColumn {
            expr,
            sort,
            is_input,
        });
    }
    Ok(out)
}

fn cell_items(text: &str, is_input: bool) -> Vec<&str> {
    if is_input {
        text.split(',').map(str::trim).collect()
    } else {
        vec![text.trim()]
    }
}

/// Fill every `Inferred` sort with the values seen in data-table columns of that sort.
pub fn complete_domains(vocab: &Vocabulary, data_blocks: &[&RawBlock]) -> Result<Vocabulary> {
    let mut seen: BTreeMap<SortId, Vec<Value>> = BTreeMap::new();
    for block in data_blocks {
        let columns = data_columns(block, vocab)?;
        for row in &block.rows {
            let cells = row.inputs.iter().chain(row.outputs.iter());
            for (col, text) in columns.iter().zip(cells) {
                let sort = vocab.sort(col.sort);
                if !matches!(sort.domain, Domain::Inferred) {
                    continue;
                }
                for item in cell_items(text, col.is_input) {
                    if let Some(v) = sort.parse_value(item) {
                        let values = seen.entry(col.sort).or_default();
                        if !values.contains(&v) {
                            values.push(v);
                        }
                    }
                }
            }
        }
    }

    let mut out = vocab.clone();
    for (id, sort) in out.sorts.iter_mut().enumerate() {
        if !matches!(sort.domain, Domain::Inferred) {
            continue;
        }
        let mut values = seen.remove(&SortId(id)).unwrap_or_default();
        if values.is_empty() {
            let used = vocab
                .symbols
                .iter()
                .any(|s| s.result == SortId(id) || s.arg_sorts.contains(&SortId(id)));
            if used {
                return Err(ErrorKind::EmptyInferredDomain(sort.name.clone()).into());
            }
            continue;
        }
        if sort.base.is_numeric() {
            values.sort();
        }
        sort.domain = Domain::Enumerated(values);
        sort.inferred = true;
    }
    out.register_elements();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    ValueOutsideDomain,
    ValueOutsideBase,
    NullOutput,
    TableViolated,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub line: Option<usize>,
    pub table: Option<String>,
}

impl Diagnostic {
    pub fn from_error(err: &Error) -> Self {
        Diagnostic {
            kind: DiagnosticKind::Error,
            message: err.kind.to_string(),
            line: err.line,
            table: err.table.clone(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(table) = &self.table {
            write!(f, "table `{table}`: ")?;
        }
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// One diagnostic per data cell value that its column's sort does not admit.
pub fn validate_data(vocab: &Vocabulary, data_blocks: &[&RawBlock]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for block in data_blocks {
        let Ok(columns) = data_columns(block, vocab) else {
            continue;
        };
        for row in &block.rows {
            let cells = row.inputs.iter().chain(row.outputs.iter());
            for (col, text) in columns.iter().zip(cells) {
                let sort = vocab.sort(col.sort);
                for item in cell_items(text, col.is_input) {
                    match sort.parse_value(item) {
                        None => out.push(Diagnostic {
                            kind: DiagnosticKind::ValueOutsideBase,
                            message: format!(
                                "`{item}` is not a {} value for type {}",
                                sort.base.name(),
                                sort.name
                            ),
                            line: Some(row.line),
                            table: Some(block.title.clone()),
                        }),
                        Some(v) if !sort.contains(&v) => out.push(Diagnostic {
                            kind: DiagnosticKind::ValueOutsideDomain,
                            message: format!("`{item}` is not in the domain of type {}", sort.name),
                            line: Some(row.line),
                            table: Some(block.title.clone()),
                        }),
                        Some(_) => {}
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_model;

    const AGATHA_GLOSSARY: &str = "\
type: Types
Name | Type | Values
Person | string | Agatha, Butler, Charles
Number | int | [0..100]

relation: Relations
Name
Person hates Person
Person is richer than Person

constant: Constants
Name | Type
Killer | Person

function: Functions
Name | Type
Hatees of Person | Number

boolean: Booleans
Name
Suicide
";

    fn vocab_of(src: &str) -> Result<Vocabulary> {
        let model = parse_model(src)?;
        let blocks: Vec<&RawBlock> = model.blocks.iter().filter(|b| b.kind.is_glossary()).collect();
        build_vocabulary(&blocks)
    }

    fn data_of(src: &str) -> Vec<RawBlock> {
        parse_model(src)
            .unwrap()
            .blocks
            .into_iter()
            .filter(|b| b.kind == BlockKind::Data)
            .collect()
    }

    #[test]
    fn agatha_glossary() {
        let v = vocab_of(AGATHA_GLOSSARY).unwrap();
        assert_eq!(v.user_sorts().count(), 2);
        let hates = v.symbols.iter().find(|s| s.phrase == "Person hates Person").unwrap();
        assert_eq!(hates.arity(), 2);
        assert_eq!(hates.ident, "hates");
        let hatees = v.symbols.iter().find(|s| s.ident == "Hatees").unwrap();
        assert_eq!(hatees.arity(), 1);
        assert_eq!(v.sort(hatees.result).name, "Number");
        let richer = v.symbols.iter().find(|s| s.ident == "is_richer_than").unwrap();
        assert_eq!(
            richer.pattern,
            vec![
                PatternPart::Slot(0),
                PatternPart::Word("is".into()),
                PatternPart::Word("richer".into()),
                PatternPart::Word("than".into()),
                PatternPart::Slot(1),
            ]
        );
        assert_eq!(
            v.element_constants.keys().cloned().collect::<Vec<_>>(),
            vec!["Agatha", "Butler", "Charles"]
        );
        let suicide = v.constant_by_name("Suicide").unwrap();
        assert_eq!(v.symbol(suicide).result, BOOL);
        let number = v.sort_by_name("Number").unwrap();
        assert_eq!(v.sort(number).elements().unwrap().len(), 101);
    }

    #[test]
    fn empty_glossary() {
        let v = build_vocabulary(&[]).unwrap();
        assert_eq!(v.user_sorts().count(), 0);
        assert!(v.symbols.is_empty());
    }

    #[test]
    fn glossary_errors() {
        let dup = "type: T\nName | Type | Values\nA | string | x\nA | int | 1\n";
        assert!(matches!(vocab_of(dup).unwrap_err().kind, ErrorKind::DuplicateSort(_)));

        let bad_value = "type: T\nName | Type | Values\nN | int | 1, two\n";
        let err = vocab_of(bad_value).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::ValueOutsideBase { .. }));
        assert_eq!(err.line, Some(3));

        let no_slot = "type: T\nName | Type | Values\nP | string | a\n\nrelation: R\nName\nit rains\n";
        assert!(matches!(vocab_of(no_slot).unwrap_err().kind, ErrorKind::ZeroSlotRelation(_)));

        let unknown = "constant: C\nName | Type\nKiller | Person\n";
        assert!(matches!(vocab_of(unknown).unwrap_err().kind, ErrorKind::UnknownResultSort(_)));

        let dup_sym = "type: T\nName | Type | Values\nP | string | a\n\nrelation: R\nName\nP likes P\nP likes P\n";
        assert!(matches!(vocab_of(dup_sym).unwrap_err().kind, ErrorKind::DuplicateSymbol(_)));
    }

    #[test]
    fn overlapping_sort_names_are_ambiguous() {
        let src = "type: T\nName | Type | Values\nRed Wine | string | a\nWine Glass | string | b\n\nrelation: R\nName\nRed Wine Glass is full\n";
        assert!(matches!(vocab_of(src).unwrap_err().kind, ErrorKind::AmbiguousPhrase(_)));
        // a longer sort name wins over a nested shorter one
        let src = "type: T\nName | Type | Values\nWine | string | a\nRed Wine | string | b\n\nrelation: R\nName\nRed Wine pairs with Wine\n";
        let v = vocab_of(src).unwrap();
        let rel = &v.symbols[0];
        assert_eq!(v.sort(rel.arg_sorts[0]).name, "Red Wine");
        assert_eq!(v.sort(rel.arg_sorts[1]).name, "Wine");
    }

    #[test]
    fn function_names_keep_sort_words_before_of() {
        let src = "type: T\nName | Type | Values\nGroup | int | [1..2]\nPerson | string | a, b\n\nfunction: F\nName | Type\nGroup of Person | Group\n";
        let v = vocab_of(src).unwrap();
        let g = &v.symbols[0];
        assert_eq!(g.arity(), 1);
        assert_eq!(g.ident, "Group");
        assert_eq!(v.sort(g.arg_sorts[0]).name, "Person");
    }

    const MAP: &str = "\
type: Types
Name | Type | Values
Country | string |
Color | string | Red, Green, Blue, Yellow

relation: Relations
Name
Country and Country are Bordering

function: Functions
Name | Type
Color of Country | Color

data: Borders
Country called c1 | Country called c2 || c1 and c2 are Bordering
1 | Belgium | France, Luxembourg, Netherlands, Germany || Yes
2 | Germany | France, Denmark, Luxembourg || Yes
";

    #[test]
    fn infers_country_domain_from_data() {
        let v = vocab_of(MAP).unwrap();
        let data = data_of(MAP);
        let refs: Vec<&RawBlock> = data.iter().collect();
        let done = complete_domains(&v, &refs).unwrap();
        let country = done.sort_by_name("Country").unwrap();
        let names: Vec<String> = done.sort(country).elements().unwrap().iter().map(|v| v.to_string()).collect();
        assert_eq!(
            names,
            vec!["Belgium", "France", "Luxembourg", "Netherlands", "Germany", "Denmark"]
        );
        assert!(done.sort(country).inferred);
        assert_eq!(done.element_constants.len(), 6 + 4);
        // idempotent
        assert_eq!(complete_domains(&done, &refs).unwrap(), done);
        assert!(validate_data(&done, &refs).is_empty());
    }

    #[test]
    fn inferred_int_domain_is_the_seen_set() {
        let src = "type: T\nName | Type | Values\nSize | int |\nThing | string | a, b\n\nfunction: F\nName | Type\nSize of Thing | Size\n\ndata: D\nThing || Size of Thing\na || 7\nb || 3\n";
        let v = vocab_of(src).unwrap();
        let data = data_of(src);
        let done = complete_domains(&v, &data.iter().collect::<Vec<_>>()).unwrap();
        let size = done.sort_by_name("Size").unwrap();
        assert_eq!(done.sort(size).elements().unwrap(), vec![Value::int(3), Value::int(7)]);
    }

    #[test]
    fn enumerated_domain_wins_over_data() {
        let src = format!(
            "{AGATHA_GLOSSARY}\ndata: D\nPerson || Hatees of Person\nAgatha || 2\n"
        );
        let v = vocab_of(&src).unwrap();
        let data = data_of(&src);
        let done = complete_domains(&v, &data.iter().collect::<Vec<_>>()).unwrap();
        let person = done.sort_by_name("Person").unwrap();
        assert_eq!(done.sort(person).elements().unwrap().len(), 3);
    }

    #[test]
    fn empty_inferred_domain_is_an_error() {
        let src = "type: T\nName | Type | Values\nThing | string |\n\nboolean: B\nName\nRaining\n\nrelation: R\nName\nThing is red\n";
        let v = vocab_of(src).unwrap();
        let err = complete_domains(&v, &[]).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::EmptyInferredDomain(_)));
    }

    #[test]
    fn validation_reports_typos_and_out_of_range() {
        let src = format!(
            "{AGATHA_GLOSSARY}\ndata: D\nPerson || Hatees of Person\nCharless || 2\nAgatha || 150\nButler || 1\n"
        );
        let v = vocab_of(&src).unwrap();
        let data = data_of(&src);
        let refs: Vec<&RawBlock> = data.iter().collect();
        let done = complete_domains(&v, &refs).unwrap();
        let diags = validate_data(&done, &refs);
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[0].kind, DiagnosticKind::ValueOutsideDomain);
        assert!(diags[0].message.contains("Charless"));
        assert!(diags[0].message.contains("Person"));
        assert_eq!(diags[1].line, Some(26));
        assert!(diags[1].message.contains("150"));
    }

    #[test]
    fn float_range_steps_by_written_precision() {
        let src = "type: T\nName | Type | Values\nRatio | float | [0.0..0.5]\n";
        let v = vocab_of(src).unwrap();
        let r = v.sort_by_name("Ratio").unwrap();
        assert_eq!(v.sort(r).elements().unwrap().len(), 6);
        assert!(v.sort(r).contains(&Value::Num(Number::new(3, 10))));
        assert!(!v.sort(r).contains(&Value::Num(Number::new(1, 4))));
    }
}
