//! Mini-SQL frontend.
//!
//! Accepted grammar:
//!
//! ```text
//! query     := [hint-comment] [WITH cte {, cte}] select [;]
//! cte       := name AS ( select )
//! select    := SELECT * FROM item {, item} [WHERE pred {AND pred}]
//! item      := name [[AS] alias]
//! pred      := alias.col op literal | alias.col = alias.col
//! op        := = | < | > | <= | >=
//! ```
//!
//! Each `WITH` entry and the outer query become one [`QueryBlock`]; each block
//! is planned by its own optimizer run.

mod graph;
mod hints;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

pub use graph::{
    build_block_graph, build_query_graph, mask_ordinals, BaseRel, JoinEdge, QueryGraph,
    MAX_RELATIONS,
};
pub use hints::{parse_hints, HintSet};
pub use parser::parse_query;

/// Label of the outer query block.
pub const MAIN_LABEL: &str = "main";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at {line}:{column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("unsupported feature at {line}:{column}: {feature}")]
    Unsupported {
        feature: String,
        line: usize,
        column: usize,
    },
    #[error("unknown alias `{alias}`")]
    UnknownAlias {
        alias: String,
        position: Option<(usize, usize)>,
    },
    #[error("duplicate alias `{alias}` at {line}:{column}")]
    DuplicateAlias {
        alias: String,
        line: usize,
        column: usize,
    },
    #[error("CTE `{name}` references itself or a CTE defined after it")]
    CyclicCte { name: String },
    #[error("conflicting scan hints for alias `{alias}`")]
    HintConflict { alias: String },
    #[error("invalid hint: {0}")]
    InvalidHint(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown column `{alias}.{column}`")]
    UnknownColumn { alias: String, column: String },
    #[error("no row estimate for CTE `{0}`; it must be planned before its consumers")]
    MissingCteEstimate(String),
}

impl QueryError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Syntax { .. } => "syntax_error",
            QueryError::Unsupported { .. } => "unsupported_feature",
            QueryError::UnknownAlias { .. } => "unknown_alias",
            QueryError::DuplicateAlias { .. } => "duplicate_alias",
            QueryError::CyclicCte { .. } => "cyclic_cte",
            QueryError::HintConflict { .. } => "hint_conflict",
            QueryError::InvalidHint(_) => "invalid_hint",
            QueryError::UnknownRelation(_) => "unknown_relation",
            QueryError::UnknownColumn { .. } => "unknown_column",
            QueryError::MissingCteEstimate(_) => "missing_cte_estimate",
        }
    }

    /// 1-based (line, column) when the error has a source position.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            QueryError::Syntax { line, column, .. }
            | QueryError::Unsupported { line, column, .. }
            | QueryError::DuplicateAlias { line, column, .. } => Some((*line, *column)),
            QueryError::UnknownAlias { position, .. } => *position,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator with its operands swapped (`5 < x` is `x > 5`).
    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnRef {
    pub alias: String,
    pub column: String,
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.alias, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Number(String),
    Text(String),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Number(n) => f.write_str(n),
            Literal::Text(t) => write!(f, "'{}'", t.replace('\'', "''")),
        }
    }
}

/// `alias.column OP literal`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Restriction {
    pub column: ColumnRef,
    pub op: CmpOp,
    pub value: Literal,
}

/// `alias1.col1 = alias2.col2` with distinct aliases.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JoinPredicate {
    pub left: ColumnRef,
    pub right: ColumnRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FromSource {
    Relation(String),
    /// Output of an earlier block, by label.
    Cte(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FromItem {
    pub alias: String,
    pub source: FromSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBlock {
    pub label: String,
    pub from: Vec<FromItem>,
    pub restrictions: Vec<Restriction>,
    pub joins: Vec<JoinPredicate>,
    pub hints: HintSet,
}

impl QueryBlock {
    pub fn referenced_ctes(&self) -> impl Iterator<Item = &str> {
        self.from.iter().filter_map(|item| match &item.source {
            FromSource::Cte(label) => Some(label.as_str()),
            FromSource::Relation(_) => None,
        })
    }
}

/// Parsed query: CTE blocks in definition order followed by `main`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySpec {
    pub blocks: Vec<QueryBlock>,
}

impl QuerySpec {
    pub fn block(&self, label: &str) -> Option<&QueryBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }

    pub fn main(&self) -> &QueryBlock {
        self.blocks
            .last()
            .expect("a parsed query always has a main block")
    }
}
