//! The `.cdmn` text format.
//!
//! A model is a sequence of blocks separated by blank lines. The first line of a
//! block names its kind and title (`table: Adult`, `type: Types`, `data: Borders`,
//! or the bare word `execute`). The next line is the header; every further line is
//! a row. Cells are separated by `|`, and `||` marks where input columns end and
//! output columns begin. In a `table` header the first cell is the hit policy.
//! Lines starting with `#` are comments.
//!
//! ```text
//! table: Adult
//! U | Age of Person || Person is Adult
//! 1 | >= 18 || Yes
//! 2 | < 18  || No
//! ```

use std::fmt;

use crate::error::{Error, ErrorKind, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Type,
    Function,
    Relation,
    Constant,
    Boolean,
    Table,
    Data,
    Execute,
}

impl BlockKind {
    fn parse(word: &str) -> Option<BlockKind> {
        let word = word.trim().to_ascii_lowercase();
        let word = word.strip_prefix("glossary.").unwrap_or(&word);
        Some(match word {
            "type" => BlockKind::Type,
            "function" => BlockKind::Function,
            "relation" => BlockKind::Relation,
            "constant" => BlockKind::Constant,
            "boolean" => BlockKind::Boolean,
            "table" => BlockKind::Table,
            "data" => BlockKind::Data,
            "execute" => BlockKind::Execute,
            _ => return None,
        })
    }

    pub fn keyword(self) -> &'static str {
        match self {
            BlockKind::Type => "type",
            BlockKind::Function => "function",
            BlockKind::Relation => "relation",
            BlockKind::Constant => "constant",
            BlockKind::Boolean => "boolean",
            BlockKind::Table => "table",
            BlockKind::Data => "data",
            BlockKind::Execute => "execute",
        }
    }

    pub fn is_glossary(self) -> bool {
        matches!(
            self,
            BlockKind::Type
                | BlockKind::Function
                | BlockKind::Relation
                | BlockKind::Constant
                | BlockKind::Boolean
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HitPolicy {
    Unique,
    Any,
    First,
    Sum,
    Count,
    Min,
    Max,
    Every,
}

impl HitPolicy {
    pub fn parse(code: &str) -> Option<HitPolicy> {
        Some(match code.trim().to_ascii_uppercase().as_str() {
            "U" => HitPolicy::Unique,
            "A" => HitPolicy::Any,
            "F" => HitPolicy::First,
            "C+" => HitPolicy::Sum,
            "C#" => HitPolicy::Count,
            "C<" => HitPolicy::Min,
            "C>" => HitPolicy::Max,
            "E*" => HitPolicy::Every,
            _ => return None,
        })
    }

    pub fn code(self) -> &'static str {
        match self {
            HitPolicy::Unique => "U",
            HitPolicy::Any => "A",
            HitPolicy::First => "F",
            HitPolicy::Sum => "C+",
            HitPolicy::Count => "C#",
            HitPolicy::Min => "C<",
            HitPolicy::Max => "C>",
            HitPolicy::Every => "E*",
        }
    }

    pub fn is_aggregate(self) -> bool {
        matches!(
            self,
            HitPolicy::Sum | HitPolicy::Count | HitPolicy::Min | HitPolicy::Max
        )
    }

    pub fn is_single_hit(self) -> bool {
        matches!(self, HitPolicy::Unique | HitPolicy::Any | HitPolicy::First)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRow {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawBlock {
    pub kind: BlockKind,
    pub title: String,
    pub header: RawRow,
    pub rows: Vec<RawRow>,
    pub hit_policy: Option<HitPolicy>,
    /// First and last source line of the block (1-based, inclusive).
    pub span: (usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawModel {
    pub source_name: String,
    pub blocks: Vec<RawBlock>,
}

impl RawModel {
    pub fn blocks_of(&self, kind: BlockKind) -> impl Iterator<Item = &RawBlock> {
        self.blocks.iter().filter(move |b| b.kind == kind)
    }
}

pub fn parse_model(source: &str) -> Result<RawModel> {
    parse_named(source, "<input>")
}

pub fn parse_named(source: &str, source_name: &str) -> Result<RawModel> {
    let mut model = RawModel {
        source_name: source_name.to_string(),
        blocks: Vec::new(),
    };
    let mut pending: Vec<(usize, &str)> = Vec::new();
    for (idx, raw) in source.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let trimmed = line.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            if !pending.is_empty() {
                push_block(&mut model, &pending)?;
                pending.clear();
            }
            continue;
        }
        pending.push((idx + 1, line));
    }
    if !pending.is_empty() {
        push_block(&mut model, &pending)?;
    }
    Ok(model)
}

fn push_block(model: &mut RawModel, lines: &[(usize, &str)]) -> Result<()> {
    let block = parse_block(lines)?;
    if block.kind == BlockKind::Execute && model.blocks_of(BlockKind::Execute).next().is_some() {
        return Err(Error::at(ErrorKind::DuplicateExecuteBlock, block.span.0));
    }
    model.blocks.push(block);
    Ok(())
}

fn parse_block(lines: &[(usize, &str)]) -> Result<RawBlock> {
    let (first_line, first) = lines[0];
    let last_line = lines[lines.len() - 1].0;
    let first = first.trim();
    let (kind_word, title) = match first.split_once(':') {
        Some((k, t)) => (k, t.trim()),
        None => (first, ""),
    };
    let kind = BlockKind::parse(kind_word)
        .ok_or_else(|| Error::at(ErrorKind::UnknownBlockKind(kind_word.trim().into()), first_line))?;

    if kind == BlockKind::Execute {
        let rows = lines[1..]
            .iter()
            .map(|&(line, text)| {
                let (inputs, outputs) = split_cells(text);
                RawRow {
                    inputs,
                    outputs,
                    line,
                }
            })
            .collect();
        return Ok(RawBlock {
            kind,
            title: title.to_string(),
            header: RawRow {
                inputs: Vec::new(),
                outputs: Vec::new(),
                line: first_line,
            },
            rows,
            hit_policy: None,
            span: (first_line, last_line),
        });
    }

    let Some(&(header_line, header_text)) = lines.get(1) else {
        return Err(Error::at(ErrorKind::EmptyTable(title.to_string()), first_line));
    };
    let (mut header_inputs, header_outputs) = split_cells(header_text);
    let mut hit_policy = None;
    if kind == BlockKind::Table {
        if header_inputs.is_empty() {
            return Err(Error::at(ErrorKind::UnknownHitPolicy(String::new()), header_line));
        }
        let code = header_inputs.remove(0);
        hit_policy = Some(
            HitPolicy::parse(&code)
                .ok_or_else(|| Error::at(ErrorKind::UnknownHitPolicy(code.clone()), header_line))?,
        );
    }
    let header = RawRow {
        inputs: header_inputs,
        outputs: header_outputs,
        line: header_line,
    };

    let mut rows = Vec::new();
    for &(line, text) in &lines[2..] {
        let (mut inputs, outputs) = split_cells(text);
        if inputs.len() == header.inputs.len() + 1 && (inputs[0].is_empty() || is_row_number(&inputs[0])) {
            inputs.remove(0);
        }
        if inputs.len() != header.inputs.len() {
            return Err(Error::at(
                ErrorKind::ColumnCountMismatch {
                    part: "input",
                    expected: header.inputs.len(),
                    found: inputs.len(),
                },
                line,
            ));
        }
        if outputs.len() != header.outputs.len() {
            return Err(Error::at(
                ErrorKind::ColumnCountMismatch {
                    part: "output",
                    expected: header.outputs.len(),
                    found: outputs.len(),
                },
                line,
            ));
        }
        rows.push(RawRow {
            inputs,
            outputs,
            line,
        });
    }

    Ok(RawBlock {
        kind,
        title: title.to_string(),
        header,
        rows,
        hit_policy,
        span: (first_line, last_line),
    })
}

fn is_row_number(cell: &str) -> bool {
    !cell.is_empty() && cell.chars().all(|c| c.is_ascii_digit())
}

fn split_side(text: &str) -> Vec<String> {
    if text.trim().is_empty() {
        return Vec::new();
    }
    text.split('|').map(|c| c.trim().to_string()).collect()
}

fn split_cells(line: &str) -> (Vec<String>, Vec<String>) {
    match line.split_once("||") {
        Some((left, right)) => (split_side(left), split_side(right)),
        None => (split_side(line), Vec::new()),
    }
}

fn write_row(f: &mut fmt::Formatter<'_>, lead: Option<&str>, row: &RawRow) -> fmt::Result {
    let mut inputs: Vec<&str> = lead.into_iter().collect();
    inputs.extend(row.inputs.iter().map(String::as_str));
    let left = inputs.join(" | ");
    if row.outputs.is_empty() {
        writeln!(f, "{left}")
    } else if left.is_empty() {
        writeln!(f, "|| {}", row.outputs.join(" | "))
    } else {
        writeln!(f, "{left} || {}", row.outputs.join(" | "))
    }
}

impl fmt::Display for RawBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == BlockKind::Execute {
            if self.title.is_empty() {
                writeln!(f, "execute")?;
            } else {
                writeln!(f, "execute: {}", self.title)?;
            }
            for row in &self.rows {
                write_row(f, None, row)?;
            }
            return Ok(());
        }
        writeln!(f, "{}: {}", self.kind.keyword(), self.title)?;
        write_row(f, self.hit_policy.map(HitPolicy::code), &self.header)?;
        for row in &self.rows {
            write_row(f, None, row)?;
        }
        Ok(())
    }
}

impl fmt::Display for RawModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{block}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_adult_table() {
        let src = "table: Adult\nU | Age of Person || Person is Adult\n>= 18 || Yes\n< 18 || No\n";
        let model = parse_model(src).unwrap();
        assert_eq!(model.blocks.len(), 1);
        let b = &model.blocks[0];
        assert_eq!(b.kind, BlockKind::Table);
        assert_eq!(b.title, "Adult");
        assert_eq!(b.hit_policy, Some(HitPolicy::Unique));
        assert_eq!(b.header.inputs, vec!["Age of Person"]);
        assert_eq!(b.header.outputs, vec!["Person is Adult"]);
        assert_eq!(b.rows.len(), 2);
        assert_eq!(b.rows[1].inputs, vec!["< 18"]);
        assert_eq!(b.rows[1].line, 4);
    }

    #[test]
    fn empty_source_has_no_blocks() {
        assert!(parse_model("").unwrap().blocks.is_empty());
        assert!(parse_model("\n\n# only a comment\n").unwrap().blocks.is_empty());
    }

    #[test]
    fn leading_row_numbers_are_ignored() {
        // Two inputs, one output; three input cells only parse if the first is a row number.
        let with_number = "table: T\nE* | A | B || C\n1 | x | y || z\n";
        let model = parse_model(with_number).unwrap();
        assert_eq!(model.blocks[0].rows[0].inputs, vec!["x", "y"]);

        let without = "table: T\nE* | A | B || C\nw | x | y || z\n";
        let err = parse_model(without).unwrap_err();
        assert!(matches!(
            err.kind,
            ErrorKind::ColumnCountMismatch {
                expected: 2,
                found: 3,
                ..
            }
        ));
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn rejects_bad_blocks() {
        let err = parse_model("chart: X\na | b\n").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::UnknownBlockKind(_)));
        assert_eq!(err.line, Some(1));

        let err = parse_model("table: X\nC | a || b\n").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::UnknownHitPolicy(ref c) if c == "C"));
        assert_eq!(err.line, Some(2));

        let err = parse_model("execute\nget 1 model\n\nexecute\nminimize X\n").unwrap_err();
        assert_eq!(err.kind, ErrorKind::DuplicateExecuteBlock);
        assert_eq!(err.line, Some(4));

        let err = parse_model("\n\ntable: Lonely\n").unwrap_err();
        assert!(matches!(err.kind, ErrorKind::EmptyTable(_)));
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn output_only_rows_and_crlf() {
        let src = "table: Killer constraints\r\nE* || Killer hates Agatha | Killer is richer than Agatha\r\n1 || Yes | No\r\n";
        let model = parse_model(src).unwrap();
        let b = &model.blocks[0];
        assert!(b.header.inputs.is_empty());
        assert_eq!(b.rows[0].outputs, vec!["Yes", "No"]);
        assert!(b.rows[0].inputs.is_empty());
    }

    #[test]
    fn glossary_rows_without_separator() {
        let src = "type: Types\nName | Type | Values\nPerson | string | Agatha, Butler, Charles\nCountry | string |\n";
        let model = parse_model(src).unwrap();
        let b = &model.blocks[0];
        assert_eq!(b.kind, BlockKind::Type);
        assert_eq!(b.rows[1].inputs, vec!["Country", "string", ""]);
    }

    #[test]
    fn execute_block() {
        let model = parse_model("execute\nMinimize Score\n").unwrap();
        let b = &model.blocks[0];
        assert_eq!(b.kind, BlockKind::Execute);
        assert_eq!(b.rows[0].inputs, vec!["Minimize Score"]);
    }

    #[test]
    fn printing_round_trips() {
        let src = "type: T\nName | Type | Values\nCountry | string |\n\ntable: Adult\nU | Age of Person || Person is Adult\n1 | >= 18 || Yes\n\ntable: K\nE* || A | B\n|| Yes | No\n\nexecute\nget 2 models\n";
        let model = parse_model(src).unwrap();
        let again = parse_model(&model.to_string()).unwrap();
        assert_eq!(model, again);
    }
}
