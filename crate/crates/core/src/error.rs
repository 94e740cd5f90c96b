use std::fmt;

use thiserror::Error;

/// Everything that can go wrong between reading model text and emitting a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ErrorKind {
    // model text
    #[error("unknown block kind `{0}`")]
    UnknownBlockKind(String),
    #[error("row has {found} {part} cells, header has {expected}")]
    ColumnCountMismatch {
        part: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("unknown hit policy `{0}`")]
    UnknownHitPolicy(String),
    #[error("more than one execute block")]
    DuplicateExecuteBlock,
    #[error("block `{0}` has no header row")]
    EmptyTable(String),

    // glossary
    #[error("type `{0}` declared twice")]
    DuplicateSort(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("unknown result type `{0}`")]
    UnknownResultSort(String),
    #[error("unknown base type `{0}` (expected string, int or float)")]
    UnknownBaseType(String),
    #[error("value `{value}` does not fit base type {base}")]
    ValueOutsideBase { value: String, base: String },
    #[error("relation `{0}` mentions no type")]
    ZeroSlotRelation(String),
    #[error("function `{0}` must have the form `Name of Type and ... and Type`")]
    MalformedFunctionName(String),
    #[error("malformed value list `{0}`")]
    MalformedDomain(String),
    #[error("type `{0}` is used but no values for it appear anywhere")]
    EmptyInferredDomain(String),

    // expressions
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` has the wrong number of arguments")]
    ArityMismatch(String),
    #[error("`{0}` is not introduced by a preceding input column")]
    NonIntroducedVariableUse(String),
    #[error("output column `{0}` cannot introduce a variable")]
    OutputIntroducesVariable(String),
    #[error("variable `{0}` introduced twice in one table")]
    DuplicateVariable(String),
    #[error("`{0}` can be read in more than one way")]
    AmbiguousPhrase(String),
    #[error("malformed range `{0}`")]
    MalformedRange(String),
    #[error("empty list entry in `{0}`")]
    EmptyList(String),
    #[error("malformed expression `{0}`")]
    MalformedExpression(String),
    #[error("sort mismatch: {0}")]
    SortMismatch(String),

    // tables
    #[error("decision table output `{0}` is not a single value")]
    NonValueOutput(String),
    #[error("symbol `{0}` is defined in terms of itself")]
    CyclicDefinition(String),
    #[error("aggregate table needs exactly one output column, found {0}")]
    MultipleOutputColumns(usize),
    #[error("aggregate output `{0}` is not numeric")]
    NonNumericOutput(String),
    #[error("aggregate output `{0}` must apply a symbol to distinct variables of the table")]
    AggregateHead(String),
    #[error("data table header `{0}` is not allowed here")]
    DataHeader(String),
    #[error("list `{0}` in a data table output cell")]
    ListInOutputCell(String),
    #[error("conflicting values for {0}")]
    ConflictingAssignment(String),
    #[error("data for function `{0}` misses argument tuple {1}")]
    PartialFunctionData(String, String),
    #[error("malformed execute entry `{0}`")]
    MalformedExecute(String),
    #[error("objective `{0}` is not numeric")]
    NonNumericObjective(String),
    #[error("symbol `{0}` is defined by more than one table")]
    DoublyDefined(String),

    // grounding and search
    #[error("division by zero")]
    DivisionByZero,
    #[error("min/max over an empty selection")]
    EmptyAggregate,
    #[error("grounding exceeds {0} constraints")]
    GroundSizeLimit(usize),
    #[error("unknown symbol `{0}` has an unbounded result type")]
    UnboundedUnknown(String),
    #[error("brute-force search space of {0} candidates exceeds the cap")]
    OracleTooLarge(u128),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("emitted model violates {0:?}")]
    ModelCheckFailed(Vec<String>),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error {
    pub kind: ErrorKind,
    pub line: Option<usize>,
    pub table: Option<String>,
}

impl Error {
    pub fn new(kind: ErrorKind) -> Self {
        Error {
            kind,
            line: None,
            table: None,
        }
    }

    pub fn at(kind: ErrorKind, line: usize) -> Self {
        Error {
            kind,
            line: Some(line),
            table: None,
        }
    }

    /// Attach a line number unless one is already present.
    pub fn with_line(mut self, line: usize) -> Self {
        self.line.get_or_insert(line);
        self
    }

    pub fn in_table(mut self, title: &str) -> Self {
        if self.table.is_none() {
            self.table = Some(title.to_string());
        }
        self
    }
}

impl From<ErrorKind> for Error {
    fn from(kind: ErrorKind) -> Self {
        Error::new(kind)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(table) = &self.table {
            write!(f, "table `{table}`: ")?;
        }
        write!(f, "{}", self.kind)
    }
}

impl std::error::Error for Error {}

pub type Result<T, E = Error> = std::result::Result<T, E>;
