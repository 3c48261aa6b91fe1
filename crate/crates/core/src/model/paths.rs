//! Dotted element paths such as `Song.op.findAll`.
//!
//! Elements without a name fall back to a positional segment
//! (`classes[2]`, `Song.ops[0]`) so that every path is nonempty.

use super::ast::ModelUnit;

pub fn model(m: &ModelUnit) -> String {
    m.name.clone()
}

pub fn class(m: &ModelUnit, ci: usize) -> String {
    named_or(&m.classes[ci].name, || format!("classes[{ci}]"))
}

pub fn attr(m: &ModelUnit, ci: usize, ai: usize) -> String {
    let c = class(m, ci);
    let name = &m.classes[ci].attributes[ai].name;
    if name.is_empty() {
        format!("{c}.attrs[{ai}]")
    } else {
        format!("{c}.attr.{name}")
    }
}

pub fn op(m: &ModelUnit, ci: usize, oi: usize) -> String {
    let c = class(m, ci);
    let name = &m.classes[ci].operations[oi].name;
    if name.is_empty() {
        format!("{c}.ops[{oi}]")
    } else {
        format!("{c}.op.{name}")
    }
}

pub fn param(m: &ModelUnit, ci: usize, oi: usize, pi: usize) -> String {
    let o = op(m, ci, oi);
    let name = &m.classes[ci].operations[oi].params[pi].name;
    if name.is_empty() {
        format!("{o}.params[{pi}]")
    } else {
        format!("{o}.param.{name}")
    }
}

pub fn assoc(m: &ModelUnit, i: usize) -> String {
    match &m.associations[i].name {
        Some(name) => format!("assoc.{name}"),
        None => format!("assoc[{i}]"),
    }
}

fn named_or(name: &str, fallback: impl FnOnce() -> String) -> String {
    if name.is_empty() {
        fallback()
    } else {
        name.to_string()
    }
}
