use std::fmt::Write as _;

use super::ast::*;
use super::lexer::{is_ident_continue, is_ident_start};

/// Renders the canonical text of a model: one declaration per line, two-space
/// indent, no comments, declaration order as in the source.
pub fn canonical_print(m: &ModelUnit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} {{", m.name);
    let _ = write!(out, "  purpose {}", quote(&m.purpose.text));
    if !m.purpose.keywords.is_empty() {
        let _ = write!(out, " keywords {}", m.purpose.keywords.join(", "));
    }
    out.push('\n');
    for class in &m.classes {
        print_class(&mut out, class);
    }
    for assoc in &m.associations {
        out.push_str("  assoc ");
        if let Some(name) = &assoc.name {
            out.push_str(name);
            out.push(' ');
        }
        let _ = writeln!(
            out,
            "{} \"{}\" -- {} \"{}\"",
            assoc.end_a.class_ref, assoc.end_a.multiplicity, assoc.end_b.class_ref, assoc.end_b.multiplicity
        );
    }
    out.push_str("}\n");
    out
}

fn print_class(out: &mut String, class: &ClassDecl) {
    out.push_str("  ");
    if class.is_abstract {
        out.push_str("abstract ");
    }
    let _ = write!(out, "class {}", name(&class.name));
    if !class.supertypes.is_empty() {
        let _ = write!(out, " extends {}", class.supertypes.join(", "));
    }
    if class.attributes.is_empty() && class.operations.is_empty() {
        out.push_str(" {}\n");
        return;
    }
    out.push_str(" {\n");
    for attr in &class.attributes {
        let _ = write!(out, "    attr {}: {}", name(&attr.name), attr.type_ref);
        if let Some(mult) = attr.multiplicity {
            let _ = write!(out, " [{mult}]");
        }
        out.push('\n');
    }
    for op in &class.operations {
        let params: Vec<String> = op.params.iter().map(|p| format!("{}: {}", name(&p.name), p.type_ref)).collect();
        let _ = write!(out, "    op {}({})", name(&op.name), params.join(", "));
        if let Some(ret) = &op.return_type {
            let _ = write!(out, ": {ret}");
        }
        out.push('\n');
    }
    out.push_str("  }\n");
}

/// Names print bare when they lex as an identifier, quoted otherwise.
fn name(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) && chars.all(is_ident_continue) => s.to_string(),
        _ => quote(s),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
