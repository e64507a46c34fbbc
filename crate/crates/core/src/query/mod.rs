//! Filtration query language.
//!
//! A small subset of dataframe-style query syntax: comparisons joined with
//! `and`/`or`/`not`, parentheses, and backtick-quoted feature names.

mod ast;
mod eval;
mod lexer;
mod parser;

use thiserror::Error;

use crate::record::DatasetRecord;
use crate::schema::Schema;
use crate::snapshot::CatalogSnapshot;

pub use ast::{CmpOp, FilterExpr, Literal, Operand};
pub use eval::evaluate;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unterminated string literal starting at offset {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated backtick identifier starting at offset {offset}")]
    UnterminatedBacktick { offset: usize },
    #[error("illegal character {ch:?} at offset {offset}")]
    IllegalCharacter { offset: usize, ch: char },
    #[error("invalid number at offset {offset}")]
    InvalidNumber { offset: usize },
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Syntax {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("unknown feature {name:?} at offset {offset}")]
    UnknownFeature { name: String, offset: usize },
    #[error("type mismatch: {feature:?} does not support {op}")]
    TypeMismatch {
        feature: String,
        op: CmpOp,
        offset: Option<usize>,
    },
}

impl QueryError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            QueryError::UnterminatedString { offset }
            | QueryError::UnterminatedBacktick { offset }
            | QueryError::IllegalCharacter { offset, .. }
            | QueryError::InvalidNumber { offset }
            | QueryError::Syntax { offset, .. }
            | QueryError::UnknownFeature { offset, .. } => Some(*offset),
            QueryError::TypeMismatch { offset, .. } => *offset,
        }
    }

    /// Stable machine-readable name for API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::UnterminatedString { .. } => "UnterminatedString",
            QueryError::UnterminatedBacktick { .. } => "UnterminatedBacktick",
            QueryError::IllegalCharacter { .. } => "IllegalCharacter",
            QueryError::InvalidNumber { .. } => "InvalidNumber",
            QueryError::Syntax { .. } => "SyntaxError",
            QueryError::UnknownFeature { .. } => "UnknownFeature",
            QueryError::TypeMismatch { .. } => "TypeMismatch",
        }
    }
}

/// Tokenizes and parses `query` against `schema`.
pub fn compile(query: &str, schema: &Schema) -> Result<FilterExpr, QueryError> {
    parse(&tokenize(query)?, schema)
}

/// Records matching `query`, in source order. A blank query matches all.
pub fn filter_records<'a>(
    snapshot: &'a CatalogSnapshot,
    query: &str,
) -> Result<Vec<&'a DatasetRecord>, QueryError> {
    if query.trim().is_empty() {
        return Ok(snapshot.records().iter().collect());
    }
    let expr = compile(query, snapshot.schema())?;
    let mut out = Vec::new();
    for record in snapshot.records() {
        if evaluate(&expr, record)? {
            out.push(record);
        }
    }
    Ok(out)
}
