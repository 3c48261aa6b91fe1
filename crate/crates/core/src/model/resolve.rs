use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::ModelUnit;
use super::paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BuiltinType {
    String,
    Int,
    Float,
    Bool,
    Date,
}

impl BuiltinType {
    pub const ALL: [BuiltinType; 5] =
        [BuiltinType::String, BuiltinType::Int, BuiltinType::Float, BuiltinType::Bool, BuiltinType::Date];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinType::String => "String",
            BuiltinType::Int => "Int",
            BuiltinType::Float => "Float",
            BuiltinType::Bool => "Bool",
            BuiltinType::Date => "Date",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved {
    /// Index into `ModelUnit::classes`.
    Class(usize),
    Builtin(BuiltinType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RefKind {
    /// Attribute, parameter or return type.
    Type,
    Supertype,
    AssocEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResolutionIssue {
    pub path: String,
    pub name: String,
    pub kind: RefKind,
}

impl fmt::Display for ResolutionIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RefKind::Type => write!(f, "{}: unknown type `{}`", self.path, self.name),
            RefKind::Supertype => write!(f, "{}: supertype `{}` is not a declared class", self.path, self.name),
            RefKind::AssocEnd => write!(f, "{}: association end `{}` is not a declared class", self.path, self.name),
        }
    }
}

/// Maps reference sites (by element path) to what they denote.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    classes: HashMap<String, usize>,
    refs: BTreeMap<String, Resolved>,
}

impl SymbolTable {
    /// First declaration wins when a class name is declared twice.
    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.get(name).copied()
    }

    pub fn lookup(&self, path: &str) -> Option<Resolved> {
        self.refs.get(path).copied()
    }

    pub fn len(&self) -> usize {
        self.refs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Resolution {
    pub table: SymbolTable,
    pub issues: Vec<ResolutionIssue>,
}

impl Resolution {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Resolves every type reference, supertype and association end. Supertypes
/// and association ends must name a declared class; type references may also
/// name a builtin.
pub fn resolve(m: &ModelUnit) -> Resolution {
    let mut table = SymbolTable::default();
    for (i, class) in m.classes.iter().enumerate() {
        table.classes.entry(class.name.clone()).or_insert(i);
    }
    let mut issues = Vec::new();
    let mut bind = |table: &mut SymbolTable, path: String, name: &str, kind: RefKind| {
        let target = match (table.class_index(name), kind) {
            (Some(i), _) => Some(Resolved::Class(i)),
            (None, RefKind::Type) => BuiltinType::from_name(name).map(Resolved::Builtin),
            (None, _) => None,
        };
        match target {
            Some(t) => {
                table.refs.insert(path, t);
            }
            None => issues.push(ResolutionIssue { path, name: name.to_string(), kind }),
        }
    };

    for (ci, class) in m.classes.iter().enumerate() {
        let cpath = paths::class(m, ci);
        for (si, sup) in class.supertypes.iter().enumerate() {
            bind(&mut table, format!("{cpath}.supertypes[{si}]"), sup, RefKind::Supertype);
        }
        for (ai, attr) in class.attributes.iter().enumerate() {
            bind(&mut table, format!("{}.type", paths::attr(m, ci, ai)), &attr.type_ref, RefKind::Type);
        }
        for (oi, op) in class.operations.iter().enumerate() {
            let opath = paths::op(m, ci, oi);
            for (pi, param) in op.params.iter().enumerate() {
                bind(&mut table, paths::param(m, ci, oi, pi), &param.type_ref, RefKind::Type);
            }
            if let Some(ret) = &op.return_type {
                bind(&mut table, format!("{opath}.return"), ret, RefKind::Type);
            }
        }
    }
    for (i, assoc) in m.associations.iter().enumerate() {
        let apath = paths::assoc(m, i);
        bind(&mut table, format!("{apath}.end_a"), &assoc.end_a.class_ref, RefKind::AssocEnd);
        bind(&mut table, format!("{apath}.end_b"), &assoc.end_b.class_ref, RefKind::AssocEnd);
    }
    Resolution { table, issues }
}
