//! The class-model DSL: syntax tree, parser, canonical printer, name
//! resolution and content hashing.

mod ast;
mod ident;
mod lexer;
mod parser;
pub mod paths;
mod printer;
mod resolve;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use ast::*;
pub use ident::split_identifier;
pub use parser::{parse_model, parse_model_bytes};
pub use printer::canonical_print;
pub use resolve::{resolve, BuiltinType, RefKind, Resolution, ResolutionIssue, Resolved, SymbolTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("line {line}, column {column}: expected {expected}, found {found}{}", context_suffix(.context))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

fn context_suffix(context: &Option<String>) -> String {
    context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default()
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, expected: &str, found: &str) -> Self {
        Self { line, column, expected: expected.to_string(), found: found.to_string(), context: None }
    }

    pub(crate) fn with_context(mut self, context: String) -> Self {
        self.context = Some(context);
        self
    }
}

/// Lowercase hex SHA-256 of a model's canonical text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentHash(String);

impl ContentHash {
    pub fn of_text(canonical: &str) -> Self {
        Self(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn content_hash(m: &ModelUnit) -> ContentHash {
    ContentHash::of_text(&canonical_print(m))
}
