//! Syntax tree for `.mdl` class models.
//!
//! Names are plain strings and may be empty: an unnamed class is something the
//! instruments report, not something the parser rejects.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelUnit {
    pub name: String,
    pub purpose: PurposeSpec,
    pub classes: Vec<ClassDecl>,
    pub associations: Vec<AssocDecl>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurposeSpec {
    pub text: String,
    /// Explicit keywords, lowercase and unique. Empty means "derive from text".
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDecl {
    pub name: String,
    pub is_abstract: bool,
    pub supertypes: Vec<String>,
    pub attributes: Vec<AttrDecl>,
    pub operations: Vec<OpDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttrDecl {
    pub name: String,
    pub type_ref: String,
    pub multiplicity: Option<Multiplicity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub type_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssocDecl {
    pub name: Option<String>,
    pub end_a: AssocEnd,
    pub end_b: AssocEnd,
}

impl AssocDecl {
    pub fn ends(&self) -> [&AssocEnd; 2] {
        [&self.end_a, &self.end_b]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssocEnd {
    pub class_ref: String,
    pub multiplicity: Multiplicity,
    /// Roles are part of the data model but the textual syntax has no slot
    /// for them yet, so parsed models always carry `None`.
    pub role: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Upper {
    Bounded(u64),
    Unbounded,
}

/// A `lower..upper` range. `lower > upper` is representable so that the
/// conformity instrument can report it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Multiplicity {
    pub lower: u64,
    pub upper: Upper,
}

impl Multiplicity {
    pub const fn new(lower: u64, upper: Upper) -> Self {
        Self { lower, upper }
    }

    pub fn is_well_formed(&self) -> bool {
        match self.upper {
            Upper::Bounded(u) => self.lower <= u,
            Upper::Unbounded => true,
        }
    }

    /// Parses the assoc-end shorthand: `"1"`, `"*"`, `"0..1"`, `"1..*"`.
    pub fn parse_shorthand(s: &str) -> Option<Self> {
        fn nat(s: &str) -> Option<u64> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            s.parse().ok()
        }
        let s = s.trim();
        if s == "*" {
            return Some(Self::new(0, Upper::Unbounded));
        }
        match s.split_once("..") {
            Some((lo, "*")) => Some(Self::new(nat(lo)?, Upper::Unbounded)),
            Some((lo, hi)) => Some(Self::new(nat(lo)?, Upper::Bounded(nat(hi)?))),
            None => {
                let n = nat(s)?;
                Some(Self::new(n, Upper::Bounded(n)))
            }
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Upper::Bounded(u) => write!(f, "{}..{}", self.lower, u),
            Upper::Unbounded => write!(f, "{}..*", self.lower),
        }
    }
}
