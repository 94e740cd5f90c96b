//! Header expressions, cell entries, and their translation to terms and formulas.

use std::collections::BTreeMap;

use crate::error::{Error, ErrorKind, Result};
use crate::glossary::{PatternPart, SymbolKind, Vocabulary};
use crate::logic::{ArithOp, CmpOp, Formula, Term, TermType, Var};
use crate::value::{parse_number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnRole {
    Input,
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntroKind {
    /// A bare type name such as `Person`.
    BareType,
    /// `Type called name`.
    Called,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// A variable-introducing header.
    Intro(Var, IntroKind),
    Var(Var),
    Literal(Value),
    /// Symbol application; 0-ary for declared constants.
    Apply(crate::glossary::SymbolId, Vec<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn introduced_var(&self) -> Option<&Var> {
        match self {
            Expr::Intro(v, _) => Some(v),
            _ => None,
        }
    }
}

/// Variables introduced by the columns of one table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarScope {
    bindings: BTreeMap<String, Var>,
    order: Vec<String>,
}

impl VarScope {
    pub fn lookup(&self, key: &str) -> Option<&Var> {
        self.bindings.get(key)
    }

    fn bind(&mut self, key: &str, var: Var) -> Result<()> {
        if self.bindings.contains_key(key) || self.bindings.values().any(|v| v.name == var.name) {
            return Err(ErrorKind::DuplicateVariable(key.into()).into());
        }
        self.bindings.insert(key.to_string(), var);
        self.order.push(key.to_string());
        Ok(())
    }

    /// Introduced variables in introduction order.
    pub fn vars(&self) -> Vec<Var> {
        self.order.iter().map(|k| self.bindings[k].clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Num(String),
    Op(ArithOp),
    LParen,
    RParen,
}

fn malformed(text: &str) -> Error {
    ErrorKind::MalformedExpression(text.into()).into()
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || (chars[i] == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)))
            {
                i += 1;
            }
            if i < chars.len() && chars[i].is_alphabetic() {
                return Err(malformed(text));
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let hyphen = d == '-'
                    && chars.get(i + 1).is_some_and(|n| n.is_alphabetic())
                    && i > start;
                if d.is_alphanumeric() || d == '_' || d == '\'' || hyphen {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Tok::Word(chars[start..i].iter().collect()));
        } else {
            out.push(match c {
                '+' => Tok::Op(ArithOp::Add),
                '-' | '\u{2212}' => Tok::Op(ArithOp::Sub),
                '*' | '\u{00d7}' => Tok::Op(ArithOp::Mul),
                '/' | '\u{00f7}' => Tok::Op(ArithOp::Div),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(malformed(text)),
            });
            i += 1;
        }
    }
    Ok(out)
}

struct Resolver<'a> {
    vocab: &'a Vocabulary,
    scope: &'a VarScope,
}

/// Rank of an error when several readings of a phrase fail; the most specific wins.
fn specificity(kind: &ErrorKind) -> u8 {
    match kind {
        ErrorKind::NonIntroducedVariableUse(_) => 4,
        ErrorKind::SortMismatch(_) => 3,
        ErrorKind::ArityMismatch(_) => 2,
        ErrorKind::AmbiguousPhrase(_) => 2,
        _ => 1,
    }
}

impl Resolver<'_> {
    fn expr_type(&self, e: &Expr) -> TermType {
        TermType::of_term(&term_of(e), self.vocab)
    }

    fn phrase(&self, words: &[String]) -> Result<Expr> {
        let text = words.join(" ");
        if words.len() == 1 {
            if let Some(b) = Value::parse_bool(&text) {
                return Ok(Expr::Literal(Value::Bool(b)));
            }
        }
        if let Some(var) = self.scope.lookup(&text) {
            return Ok(Expr::Var(var.clone()));
        }
        if self.vocab.is_element(&text) {
            return Ok(Expr::Literal(Value::str(&text)));
        }
        if let Some(c) = self.vocab.constant_by_name(&text) {
            return Ok(Expr::Apply(c, Vec::new()));
        }
        if self.vocab.sort_by_name(&text).is_some() {
            return Err(ErrorKind::NonIntroducedVariableUse(text).into());
        }

        let mut found: Vec<Expr> = Vec::new();
        let mut best: Option<Error> = None;
        let keep = |err: Error, best: &mut Option<Error>| {
            if best
                .as_ref()
                .is_none_or(|b| specificity(&err.kind) > specificity(&b.kind))
            {
                *best = Some(err);
            }
        };
        for sym in self.vocab.symbol_ids() {
            let decl = self.vocab.symbol(sym);
            if decl.arity() == 0 {
                continue;
            }
            for spans in match_pattern(&decl.pattern, words) {
                let mut args = vec![None; decl.arity()];
                let mut failed = None;
                for (slot, (a, b)) in spans {
                    match self.phrase(&words[a..b]) {
                        Ok(e) => {
                            let want = TermType::of_sort(self.vocab, decl.arg_sorts[slot]);
                            let got = self.expr_type(&e);
                            if !want.compatible(&got) {
                                failed = Some(Error::from(ErrorKind::SortMismatch(format!(
                                    "`{}` is {}, `{}` expects {}",
                                    words[a..b].join(" "),
                                    got.describe(self.vocab),
                                    decl.phrase,
                                    want.describe(self.vocab)
                                ))));
                                break;
                            }
                            args[slot] = Some(e);
                        }
                        // a lone unknown word in an argument position reads as a variable
                        Err(e) if b - a == 1 && matches!(e.kind, ErrorKind::UnknownName(_)) => {
                            failed = Some(ErrorKind::NonIntroducedVariableUse(words[a].clone()).into());
                            break;
                        }
                        Err(e) => {
                            failed = Some(e);
                            break;
                        }
                    }
                }
                match failed {
                    Some(e) => keep(e, &mut best),
                    None => {
                        let e = Expr::Apply(sym, args.into_iter().map(Option::unwrap).collect());
                        if !found.contains(&e) {
                            found.push(e);
                        }
                    }
                }
            }
        }
        match found.len() {
            1 => return Ok(found.pop().unwrap()),
            0 => {}
            _ => return Err(ErrorKind::AmbiguousPhrase(text).into()),
        }
        if let Some(e) = best.take_if(|e| specificity(&e.kind) > 1) {
            return Err(e);
        }
        // `Name of ...` naming a known function but not fitting its argument list
        if let Some(of) = words.iter().position(|w| w.eq_ignore_ascii_case("of")) {
            let head = &words[..of];
            let known = self.vocab.symbols.iter().any(|d| {
                d.kind == SymbolKind::Function
                    && d.pattern.len() > of
                    && d.pattern[..of]
                        .iter()
                        .zip(head)
                        .all(|(p, w)| matches!(p, PatternPart::Word(x) if x.eq_ignore_ascii_case(w)))
                    && matches!(&d.pattern[of], PatternPart::Word(x) if x.eq_ignore_ascii_case("of"))
            });
            if known {
                return Err(ErrorKind::ArityMismatch(text).into());
            }
        }
        Err(best.unwrap_or_else(|| ErrorKind::UnknownName(text).into()))
    }
}

/// All ways `pattern` covers `words`; each way lists (slot, word span) pairs.
fn match_pattern(pattern: &[PatternPart], words: &[String]) -> Vec<Vec<(usize, (usize, usize))>> {
    fn go(
        parts: &[PatternPart],
        words: &[String],
        pos: usize,
        acc: &mut Vec<(usize, (usize, usize))>,
        out: &mut Vec<Vec<(usize, (usize, usize))>>,
    ) {
        let Some((first, rest)) = parts.split_first() else {
            if pos == words.len() {
                out.push(acc.clone());
            }
            return;
        };
        match first {
            PatternPart::Word(w) => {
                if words.get(pos).is_some_and(|x| x.eq_ignore_ascii_case(w)) {
                    go(rest, words, pos + 1, acc, out);
                }
            }
            PatternPart::Slot(slot) => {
                let min_rest = rest.len();
                for end in pos + 1..=words.len().saturating_sub(min_rest) {
                    acc.push((*slot, (pos, end)));
                    go(rest, words, end, acc, out);
                    acc.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    go(pattern, words, 0, &mut Vec::new(), &mut out);
    out
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    text: &'a str,
    resolver: Resolver<'a>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(Tok::Op(op @ (ArithOp::Add | ArithOp::Sub))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ (ArithOp::Mul | ArithOp::Div))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Arith(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Op(ArithOp::Sub)) = self.peek() {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Literal(Value::Num(n)) => Expr::Literal(Value::Num(-n)),
                other => Expr::Arith(
                    ArithOp::Sub,
                    Box::new(Expr::Literal(Value::int(0))),
                    Box::new(other),
                ),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let n = parse_number(&n).ok_or_else(|| malformed(self.text))?;
                Ok(Expr::Literal(Value::Num(n)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(malformed(self.text));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Word(_)) => {
                let mut words = Vec::new();
                while let Some(Tok::Word(w)) = self.peek() {
                    words.push(w.clone());
                    self.pos += 1;
                }
                self.resolver.phrase(&words)
            }
            _ => Err(malformed(self.text)),
        }
    }
}

/// Parse an expression that introduces nothing (cell operands, non-introducing headers).
pub fn parse_expr(text: &str, vocab: &Vocabulary, scope: &VarScope) -> Result<Expr> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(malformed(text));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        text,
        resolver: Resolver { vocab, scope },
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(malformed(text));
    }
    Ok(e)
}

/// Parse one column header, extending `scope` when the column introduces a variable.
pub fn parse_header(
    text: &str,
    vocab: &Vocabulary,
    scope: &mut VarScope,
    role: ColumnRole,
) -> Result<Expr> {
    let text = text.trim();
    let words: Vec<&str> = text.split_whitespace().collect();
    let n = words.len();
    if n >= 3 && words[n - 2].eq_ignore_ascii_case("called") {
        if let Some(sort) = vocab.sort_by_name(&words[..n - 2].join(" ")) {
            if role == ColumnRole::Output {
                return Err(ErrorKind::OutputIntroducesVariable(text.into()).into());
            }
            let var = Var::new(words[n - 1], sort);
            scope.bind(words[n - 1], var.clone())?;
            return Ok(Expr::Intro(var, IntroKind::Called));
        }
    }
    let joined = words.join(" ");
    if let Some(sort) = vocab.sort_by_name(&joined) {
        if scope.lookup(&joined).is_none() {
            if role == ColumnRole::Output {
                return Err(ErrorKind::OutputIntroducesVariable(text.into()).into());
            }
            let var = Var::new(format!("x_{}", joined.replace(' ', "_")), sort);
            scope.bind(&joined, var.clone())?;
            return Ok(Expr::Intro(var, IntroKind::BareType));
        }
    }
    // an input header may mention a type name inside a phrase (`Age of Person`);
    // that implicitly introduces a variable of the type
    loop {
        match parse_expr(text, vocab, scope) {
            Err(Error {
                kind: ErrorKind::NonIntroducedVariableUse(name),
                ..
            }) if role == ColumnRole::Input && vocab.sort_by_name(&name).is_some() => {
                let sort = vocab.sort_by_name(&name).unwrap();
                scope.bind(&name, Var::new(format!("x_{}", name.replace(' ', "_")), sort))?;
            }
            other => return other,
        }
    }
}

/// The term an expression denotes; introduced and referenced variables map to themselves.
pub fn term_of(expr: &Expr) -> Term {
    match expr {
        Expr::Intro(v, _) | Expr::Var(v) => Term::Var(v.clone()),
        Expr::Literal(v) => Term::Value(v.clone()),
        Expr::Apply(s, args) => Term::Apply(*s, args.iter().map(term_of).collect()),
        Expr::Arith(op, a, b) => Term::Arith(*op, Box::new(term_of(a)), Box::new(term_of(b))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellEntry {
    Any,
    Compare(CmpOp, Expr),
    /// `Not(e)`; a list inside excludes each of its items.
    Not(Vec<Expr>),
    List(Vec<Expr>),
    Range {
        lo: Expr,
        lo_inclusive: bool,
        hi: Expr,
        hi_inclusive: bool,
    },
    Value(Expr),
}

const CMP_PREFIXES: &[(&str, CmpOp)] = &[
    ("<=", CmpOp::Le),
    (">=", CmpOp::Ge),
    ("!=", CmpOp::Ne),
    ("<>", CmpOp::Ne),
    ("\u{2264}", CmpOp::Le),
    ("\u{2265}", CmpOp::Ge),
    ("\u{2260}", CmpOp::Ne),
    ("<", CmpOp::Lt),
    (">", CmpOp::Gt),
    ("=", CmpOp::Eq),
];

/// Split on commas outside parentheses.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn parse_list(text: &str, vocab: &Vocabulary, scope: &VarScope) -> Result<Vec<Expr>> {
    split_top_level(text)
        .into_iter()
        .map(|item| {
            if item.trim().is_empty() {
                Err(ErrorKind::EmptyList(text.into()).into())
            } else {
                parse_expr(item, vocab, scope)
            }
        })
        .collect()
}

fn parse_range(text: &str, vocab: &Vocabulary, scope: &VarScope) -> Result<CellEntry> {
    let bad = || Error::from(ErrorKind::MalformedRange(text.into()));
    let mut chars = text.chars();
    let open = chars.next().ok_or_else(bad)?;
    let close = chars.next_back().ok_or_else(bad)?;
    let lo_inclusive = match open {
        '[' => true,
        '(' | ']' => false,
        _ => return Err(bad()),
    };
    let hi_inclusive = match close {
        ']' => true,
        ')' | '[' => false,
        _ => return Err(bad()),
    };
    let inner = &text[open.len_utf8()..text.len() - close.len_utf8()];
    let (lo_txt, hi_txt) = inner.split_once("..").ok_or_else(bad)?;
    if lo_txt.trim().is_empty() || hi_txt.trim().is_empty() || hi_txt.trim_start().starts_with('.') {
        return Err(bad());
    }
    let lo = parse_expr(lo_txt, vocab, scope)?;
    let hi = parse_expr(hi_txt, vocab, scope)?;
    for bound in [&lo, &hi] {
        if TermType::of_term(&term_of(bound), vocab) != TermType::Num {
            return Err(bad());
        }
    }
    if let (Expr::Literal(Value::Num(a)), Expr::Literal(Value::Num(b))) = (&lo, &hi) {
        if a > b {
            return Err(bad());
        }
    }
    Ok(CellEntry::Range {
        lo,
        lo_inclusive,
        hi,
        hi_inclusive,
    })
}

/// Parse a table cell under the table's full variable scope.
pub fn parse_cell(text: &str, vocab: &Vocabulary, scope: &VarScope) -> Result<CellEntry> {
    let text = text.trim();
    if text.is_empty() {
        return Err(ErrorKind::EmptyList(text.into()).into());
    }
    if text.chars().all(|c| matches!(c, '-' | '\u{2013}' | '\u{2014}')) {
        return Ok(CellEntry::Any);
    }
    let lower = text.to_lowercase();
    if let Some(rest) = lower.strip_prefix("not") {
        if rest.starts_with('(') || rest.starts_with(char::is_whitespace) {
            let mut inner = text[3..].trim();
            if inner.starts_with('(') && inner.ends_with(')') && balanced(&inner[1..inner.len() - 1]) {
                inner = &inner[1..inner.len() - 1];
            }
            return Ok(CellEntry::Not(parse_list(inner, vocab, scope)?));
        }
    }
    for (prefix, op) in CMP_PREFIXES {
        if let Some(rest) = text.strip_prefix(prefix) {
            return Ok(CellEntry::Compare(*op, parse_expr(rest, vocab, scope)?));
        }
    }
    if text.contains("..") {
        return parse_range(text, vocab, scope);
    }
    if text.starts_with('[') {
        return Err(ErrorKind::MalformedRange(text.into()).into());
    }
    let items = parse_list(text, vocab, scope)?;
    if items.len() == 1 {
        Ok(CellEntry::Value(items.into_iter().next().unwrap()))
    } else {
        Ok(CellEntry::List(items))
    }
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

fn compare(op: CmpOp, column: &Term, operand: &Expr, vocab: &Vocabulary) -> Result<Formula> {
    let t = term_of(operand);
    let left = TermType::of_term(column, vocab);
    let right = TermType::of_term(&t, vocab);
    let ok = if op.is_ordering() {
        left == TermType::Num && right == TermType::Num
    } else {
        left.compatible(&right)
    };
    if !ok {
        return Err(ErrorKind::SortMismatch(format!(
            "cannot compare {} with {} using {}",
            left.describe(vocab),
            right.describe(vocab),
            op.symbol()
        ))
        .into());
    }
    // `r(args) = Yes` is written as the relation atom itself
    if let (Term::Apply(sym, args), Term::Value(Value::Bool(b))) = (column, &t) {
        if vocab.symbol(*sym).kind.is_predicate() && matches!(op, CmpOp::Eq | CmpOp::Ne) {
            let atom = Formula::Atom(*sym, args.clone());
            return Ok(if *b == (op == CmpOp::Eq) { atom } else { Formula::not(atom) });
        }
    }
    Ok(Formula::Compare(op, column.clone(), t))
}

/// The condition a cell places on the value of its column.
pub fn formula_of_cell(entry: &CellEntry, column: &Term, vocab: &Vocabulary) -> Result<Formula> {
    Ok(match entry {
        CellEntry::Any => Formula::True,
        CellEntry::Compare(op, e) => compare(*op, column, e, vocab)?,
        CellEntry::Value(e) => compare(CmpOp::Eq, column, e, vocab)?,
        CellEntry::Not(items) => Formula::and(
            items
                .iter()
                .map(|e| compare(CmpOp::Ne, column, e, vocab))
                .collect::<Result<_>>()?,
        ),
        CellEntry::List(items) => Formula::or(
            items
                .iter()
                .map(|e| compare(CmpOp::Eq, column, e, vocab))
                .collect::<Result<_>>()?,
        ),
        CellEntry::Range {
            lo,
            lo_inclusive,
            hi,
            hi_inclusive,
        } => Formula::And(vec![
            compare(if *lo_inclusive { CmpOp::Ge } else { CmpOp::Gt }, column, lo, vocab)?,
            compare(if *hi_inclusive { CmpOp::Le } else { CmpOp::Lt }, column, hi, vocab)?,
        ]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{parse_model, RawBlock};
    use crate::glossary::build_vocabulary;
    use crate::logic::Show;

    const GLOSSARY: &str = "\
type: Types
Name | Type | Values
Person | string | Agatha, Butler, Charles
Number | int | [0..100]
Country | string | Belgium, France
Color | string | Red, Green
Item | string | Beef, Bun

relation: Relations
Name
Person hates Person
Country and Country are Bordering

function: Functions
Name | Type
Hatees of Person | Number
Color of Country | Color
Number of Item | Number
Sodium of Item | Number

constant: Constants
Name | Type
Killer | Person
Age | Number
";

    fn vocab() -> Vocabulary {
        let model = parse_model(GLOSSARY).unwrap();
        let blocks: Vec<&RawBlock> = model.blocks.iter().collect();
        build_vocabulary(&blocks).unwrap()
    }

    fn show(t: &Term, v: &Vocabulary) -> String {
        Show(t, v).to_string()
    }

    #[test]
    fn called_variable_introduction() {
        // `Country called c1` introduces c1 of sort Country
        let v = vocab();
        let mut scope = VarScope::default();
        let e = parse_header("Country called c1", &v, &mut scope, ColumnRole::Input).unwrap();
        let var = e.introduced_var().unwrap();
        assert_eq!(var.name, "c1");
        assert_eq!(v.sort(var.sort).name, "Country");
        assert_eq!(scope.len(), 1);
        // a later use refers back
        let e = parse_header("Color of c1", &v, &mut scope, ColumnRole::Output).unwrap();
        assert_eq!(show(&term_of(&e), &v), "Color(c1)");
    }

    #[test]
    fn bare_type_then_function_application() {
        // the `Hatees of Person` header after a bare `Person` column maps to Hatees(x)
        let v = vocab();
        let mut scope = VarScope::default();
        let h1 = parse_header("Person", &v, &mut scope, ColumnRole::Input).unwrap();
        assert!(matches!(h1, Expr::Intro(_, IntroKind::BareType)));
        let h2 = parse_header("Hatees of Person", &v, &mut scope, ColumnRole::Output).unwrap();
        assert!(h2.introduced_var().is_none());
        assert_eq!(show(&term_of(&h1), &v), "x_Person");
        assert_eq!(show(&term_of(&h2), &v), "Hatees(x_Person)");
    }

    #[test]
    fn unbound_variable_use() {
        let v = vocab();
        let mut scope = VarScope::default();
        let err = parse_header("Color of c2", &v, &mut scope, ColumnRole::Output).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::NonIntroducedVariableUse(_)), "{err}");
        let err = parse_header("Hatees of Person", &v, &mut scope, ColumnRole::Output).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::NonIntroducedVariableUse(_)), "{err}");
        // in an input header the type name introduces the variable implicitly
        let e = parse_header("Hatees of Person", &v, &mut scope, ColumnRole::Input).unwrap();
        assert_eq!(show(&term_of(&e), &v), "Hatees(x_Person)");
        assert_eq!(scope.vars().len(), 1);
    }

    #[test]
    fn header_errors() {
        let v = vocab();
        let mut scope = VarScope::default();
        let err = parse_header("Person called p", &v, &mut scope, ColumnRole::Output).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::OutputIntroducesVariable(_)));
        parse_header("Person called p", &v, &mut scope, ColumnRole::Input).unwrap();
        let err = parse_header("Person called p", &v, &mut scope, ColumnRole::Input).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::DuplicateVariable(_)));
        let err = parse_header("Frobnicate", &v, &mut scope, ColumnRole::Input).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::UnknownName(_)));
        let err = parse_header("Hatees of p and p", &v, &mut scope, ColumnRole::Output).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::ArityMismatch(_)), "{err}");
        let err = parse_header("Color of p", &v, &mut scope, ColumnRole::Output).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::SortMismatch(_)), "{err}");
    }

    #[test]
    fn term_mapping_cases() {
        let v = vocab();
        let mut scope = VarScope::default();
        // literal
        assert_eq!(term_of(&parse_expr("3", &v, &scope).unwrap()), Term::Value(Value::int(3)));
        // constants map to themselves
        let killer = parse_expr("Killer", &v, &scope).unwrap();
        assert_eq!(show(&term_of(&killer), &v), "Killer");
        assert_eq!(term_of(&parse_expr("Agatha", &v, &scope).unwrap()), Term::Value(Value::str("Agatha")));
        // the burger nutrition product over an introduced item
        parse_header("Item called i", &v, &mut scope, ColumnRole::Input).unwrap();
        let e = parse_expr("Number of i * Sodium of i", &v, &scope).unwrap();
        assert_eq!(show(&term_of(&e), &v), "(Number(i) * Sodium(i))");
    }

    #[test]
    fn arithmetic_precedence_and_compositionality() {
        let v = vocab();
        let scope = VarScope::default();
        let e = parse_expr("Age + 2 * 3 - 1", &v, &scope).unwrap();
        assert_eq!(show(&term_of(&e), &v), "((Age + (2 * 3)) - 1)");
        let e = parse_expr("(Age + 2) / 4", &v, &scope).unwrap();
        assert_eq!(show(&term_of(&e), &v), "((Age + 2) / 4)");
        for op in [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div] {
            let a = Expr::Literal(Value::int(2));
            let b = parse_expr("Age", &v, &scope).unwrap();
            let whole = Expr::Arith(op, Box::new(a.clone()), Box::new(b.clone()));
            assert_eq!(term_of(&whole), Term::Arith(op, Box::new(term_of(&a)), Box::new(term_of(&b))));
        }
    }

    #[test]
    fn cell_kinds() {
        let v = vocab();
        let mut scope = VarScope::default();
        parse_header("Country called c2", &v, &mut scope, ColumnRole::Input).unwrap();
        assert_eq!(parse_cell("-", &v, &scope).unwrap(), CellEntry::Any);
        assert_eq!(parse_cell("---", &v, &scope).unwrap(), CellEntry::Any);
        assert_eq!(
            parse_cell("< 3", &v, &scope).unwrap(),
            CellEntry::Compare(CmpOp::Lt, Expr::Literal(Value::int(3)))
        );
        assert!(matches!(parse_cell("\u{2265} 18", &v, &scope).unwrap(), CellEntry::Compare(CmpOp::Ge, _)));
        match parse_cell("Not(Color of c2)", &v, &scope).unwrap() {
            CellEntry::Not(items) => assert_eq!(show(&term_of(&items[0]), &v), "Color(c2)"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_cell("not Red", &v, &scope).unwrap(), CellEntry::Not(_)));
        match parse_cell("Agatha, Butler, Charles", &v, &scope).unwrap() {
            CellEntry::List(items) => assert_eq!(items.len(), 3),
            other => panic!("{other:?}"),
        }
        for (text, lo_inc, hi_inc) in [("[0..1]", true, true), ("[0..1)", true, false), ("(0..1]", false, true), ("(0..1)", false, false), ("]0..1[", false, false)] {
            match parse_cell(text, &v, &scope).unwrap() {
                CellEntry::Range { lo_inclusive, hi_inclusive, .. } => {
                    assert_eq!((lo_inclusive, hi_inclusive), (lo_inc, hi_inc), "{text}")
                }
                other => panic!("{other:?}"),
            }
        }
        assert!(matches!(parse_cell("Red", &v, &scope).unwrap(), CellEntry::Value(_)));
    }

    #[test]
    fn cell_errors() {
        let v = vocab();
        let scope = VarScope::default();
        for bad in ["[5..1]", "[1..]", "[..3]", "[1...3]", "[1, 3]", "[Red..3]"] {
            assert!(matches!(parse_cell(bad, &v, &scope).unwrap_err().kind, ErrorKind::MalformedRange(_)), "{bad}");
        }
        assert!(matches!(parse_cell("Red,,Green", &v, &scope).unwrap_err().kind, ErrorKind::EmptyList(_)));
        assert!(matches!(parse_cell("Purple", &v, &scope).unwrap_err().kind, ErrorKind::UnknownName(_)));
    }

    #[test]
    fn cell_formulas() {
        let v = vocab();
        let mut scope = VarScope::default();
        let h = parse_header("Person", &v, &mut scope, ColumnRole::Input).unwrap();
        let col = term_of(&parse_header("Hatees of Person", &v, &mut scope, ColumnRole::Output).unwrap());
        let f = |text: &str| {
            let entry = parse_cell(text, &v, &scope).unwrap();
            Show(&formula_of_cell(&entry, &col, &v).unwrap(), &v).to_string()
        };
        assert_eq!(f("< 3"), "Hatees(x_Person) < 3");
        assert_eq!(f("-"), "true");
        assert_eq!(f("[0..1)"), "(Hatees(x_Person) >= 0 & Hatees(x_Person) < 1)");
        assert_eq!(f("Not(2)"), "Hatees(x_Person) != 2");
        assert_eq!(f("1, 2"), "(Hatees(x_Person) = 1 | Hatees(x_Person) = 2)");
        assert_eq!(f("2"), "Hatees(x_Person) = 2");

        let person = term_of(&h);
        let entry = parse_cell("< 3", &v, &scope).unwrap();
        let err = formula_of_cell(&entry, &person, &v).unwrap_err();
        assert!(matches!(err.kind, ErrorKind::SortMismatch(_)));
        let entry = parse_cell("Red", &v, &scope).unwrap();
        assert!(matches!(formula_of_cell(&entry, &person, &v).unwrap_err().kind, ErrorKind::SortMismatch(_)));
    }

    #[test]
    fn relation_cells_become_atoms() {
        let v = vocab();
        let mut scope = VarScope::default();
        parse_header("Person called p", &v, &mut scope, ColumnRole::Input).unwrap();
        let col = term_of(&parse_header("Agatha hates p", &v, &mut scope, ColumnRole::Output).unwrap());
        let yes = formula_of_cell(&parse_cell("Yes", &v, &scope).unwrap(), &col, &v).unwrap();
        assert_eq!(Show(&yes, &v).to_string(), "hates(Agatha, p)");
        let no = formula_of_cell(&parse_cell("No", &v, &scope).unwrap(), &col, &v).unwrap();
        assert_eq!(Show(&no, &v).to_string(), "~(hates(Agatha, p))");
    }

    #[test]
    fn bordering_two_slot_relation() {
        let v = vocab();
        let mut scope = VarScope::default();
        parse_header("Country called c1", &v, &mut scope, ColumnRole::Input).unwrap();
        parse_header("Country called c2", &v, &mut scope, ColumnRole::Input).unwrap();
        let e = parse_header("c1 and c2 are Bordering", &v, &mut scope, ColumnRole::Input).unwrap();
        assert_eq!(show(&term_of(&e), &v), "are_Bordering(c1, c2)");
        assert_eq!(scope.vars().len(), 2);
    }
}
