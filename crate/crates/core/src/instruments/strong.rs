use std::collections::{BTreeMap, HashMap, HashSet};

use super::{normalize, Finding, Thresholds};
use crate::model::{paths, split_identifier, ModelUnit, RefKind, Resolution, Resolved};

/// Defect-freeness, meta-model conformity and transformability checks.
///
/// `reserved_words` comes from the thresholds config but does not make these
/// findings overridable.
pub fn check_strong(m: &ModelUnit, resolution: &Resolution, t: &Thresholds) -> Vec<Finding> {
    let mut out = Vec::new();
    defect_freeness(m, &mut out);
    conformity(m, resolution, &mut out);
    transformability(m, resolution, &t.reserved_words, &mut out);
    normalize(out)
}

fn defect_freeness(m: &ModelUnit, out: &mut Vec<Finding>) {
    let mut seen_classes: HashSet<&str> = HashSet::new();
    for (ci, class) in m.classes.iter().enumerate() {
        let cpath = paths::class(m, ci);
        if class.name.is_empty() {
            out.push(Finding::new(
                "empty-class-name",
                &cpath,
                format!("class #{} has no name", ci + 1),
                "give the class a name that states what it represents",
            ));
        } else if !seen_classes.insert(&class.name) {
            out.push(Finding::new(
                "duplicate-class-name",
                &cpath,
                format!("class `{}` is declared more than once", class.name),
                "merge the declarations or rename one of them",
            ));
        }

        let mut seen_attrs: HashSet<&str> = HashSet::new();
        for (ai, attr) in class.attributes.iter().enumerate() {
            let apath = paths::attr(m, ci, ai);
            if attr.name.is_empty() {
                out.push(Finding::new("empty-member-name", &apath, format!("attribute #{} of `{cpath}` has no name", ai + 1), "name the attribute"));
            } else if !seen_attrs.insert(&attr.name) {
                out.push(Finding::new(
                    "duplicate-member-name",
                    &apath,
                    format!("attribute `{}` is declared twice in `{cpath}`", attr.name),
                    "remove the duplicate attribute",
                ));
            }
        }

        let mut seen_ops: HashSet<(&str, Vec<&str>)> = HashSet::new();
        for (oi, op) in class.operations.iter().enumerate() {
            let opath = paths::op(m, ci, oi);
            if op.name.is_empty() {
                out.push(Finding::new("empty-member-name", &opath, format!("operation #{} of `{cpath}` has no name", oi + 1), "name the operation"));
            } else {
                let sig = (op.name.as_str(), op.params.iter().map(|p| p.type_ref.as_str()).collect::<Vec<_>>());
                if !seen_ops.insert(sig) {
                    out.push(Finding::new(
                        "duplicate-member-name",
                        &opath,
                        format!("operation `{}` is declared twice in `{cpath}` with the same parameter types", op.name),
                        "remove the duplicate operation or change its parameters",
                    ));
                }
            }
            for (pi, param) in op.params.iter().enumerate() {
                if param.name.is_empty() {
                    out.push(Finding::new(
                        "empty-member-name",
                        paths::param(m, ci, oi, pi),
                        format!("parameter #{} of `{opath}` has no name", pi + 1),
                        "name the parameter",
                    ));
                }
            }
        }
    }
}

fn conformity(m: &ModelUnit, resolution: &Resolution, out: &mut Vec<Finding>) {
    for issue in &resolution.issues {
        match issue.kind {
            RefKind::Type | RefKind::Supertype => out.push(Finding::new(
                "unresolved-type-ref",
                &issue.path,
                issue.to_string(),
                format!("declare class `{}` or refer to an existing class or builtin type", issue.name),
            )),
            RefKind::AssocEnd => out.push(Finding::new(
                "dangling-assoc-end",
                &issue.path,
                issue.to_string(),
                format!("declare class `{}` or attach the association to an existing class", issue.name),
            )),
        }
    }

    for ci in classes_on_inheritance_cycles(m, resolution) {
        let cpath = paths::class(m, ci);
        out.push(Finding::new(
            "inheritance-cycle",
            &cpath,
            format!("`{cpath}` is its own ancestor"),
            "break the cycle by removing one `extends` link",
        ));
    }

    for (ci, class) in m.classes.iter().enumerate() {
        for (ai, attr) in class.attributes.iter().enumerate() {
            if let Some(mult) = attr.multiplicity.filter(|mu| !mu.is_well_formed()) {
                let apath = paths::attr(m, ci, ai);
                out.push(Finding::new(
                    "bad-multiplicity",
                    &apath,
                    format!("multiplicity [{mult}] of `{apath}` has lower bound above upper bound"),
                    "swap or correct the bounds",
                ));
            }
        }
    }
    for (i, assoc) in m.associations.iter().enumerate() {
        for (label, end) in [("end_a", &assoc.end_a), ("end_b", &assoc.end_b)] {
            if !end.multiplicity.is_well_formed() {
                let path = format!("{}.{label}", paths::assoc(m, i));
                out.push(Finding::new(
                    "bad-multiplicity",
                    &path,
                    format!("multiplicity \"{}\" of `{path}` has lower bound above upper bound", end.multiplicity),
                    "swap or correct the bounds",
                ));
            }
        }
    }
}

/// Resolved supertype edges as class indices.
pub(crate) fn supertype_edges(m: &ModelUnit, resolution: &Resolution) -> Vec<Vec<usize>> {
    m.classes
        .iter()
        .enumerate()
        .map(|(ci, class)| {
            (0..class.supertypes.len())
                .filter_map(|si| {
                    let path = format!("{}.supertypes[{si}]", paths::class(m, ci));
                    match resolution.table.lookup(&path) {
                        Some(Resolved::Class(target)) => Some(target),
                        _ => None,
                    }
                })
                .collect()
        })
        .collect()
}

/// A class is on a cycle iff it can reach itself through one or more edges.
fn classes_on_inheritance_cycles(m: &ModelUnit, resolution: &Resolution) -> Vec<usize> {
    let edges = supertype_edges(m, resolution);
    (0..m.classes.len())
        .filter(|&start| {
            let mut stack: Vec<usize> = edges[start].clone();
            let mut seen = vec![false; edges.len()];
            while let Some(n) = stack.pop() {
                if n == start {
                    return true;
                }
                if !std::mem::replace(&mut seen[n], true) {
                    stack.extend(&edges[n]);
                }
            }
            false
        })
        .collect()
}

/// Identifier a code generator would derive from a model name.
pub(crate) fn mangle(name: &str) -> String {
    split_identifier(name).join("_")
}

fn transformability(m: &ModelUnit, resolution: &Resolution, reserved: &[String], out: &mut Vec<Finding>) {
    let is_reserved = |name: &str| reserved.iter().any(|r| r == name);
    let mut reserved_hit = |name: &str, path: String, what: &str| {
        if is_reserved(name) {
            out.push(Finding::new(
                "reserved-word-name",
                &path,
                format!("{what} `{name}` is a reserved word in generated code"),
                format!("rename `{name}`"),
            ));
        }
    };
    for (ci, class) in m.classes.iter().enumerate() {
        reserved_hit(&class.name, paths::class(m, ci), "class name");
        for (ai, attr) in class.attributes.iter().enumerate() {
            reserved_hit(&attr.name, paths::attr(m, ci, ai), "attribute name");
        }
        for (oi, op) in class.operations.iter().enumerate() {
            reserved_hit(&op.name, paths::op(m, ci, oi), "operation name");
            for (pi, p) in op.params.iter().enumerate() {
                reserved_hit(&p.name, paths::param(m, ci, oi, pi), "parameter name");
            }
        }
    }

    collisions(m.classes.iter().enumerate().map(|(ci, c)| (c.name.as_str(), paths::class(m, ci))), out);
    for (ci, class) in m.classes.iter().enumerate() {
        collisions(class.attributes.iter().enumerate().map(|(ai, a)| (a.name.as_str(), paths::attr(m, ci, ai))), out);
        collisions(class.operations.iter().enumerate().map(|(oi, o)| (o.name.as_str(), paths::op(m, ci, oi))), out);
        for (oi, op) in class.operations.iter().enumerate() {
            collisions(op.params.iter().enumerate().map(|(pi, p)| (p.name.as_str(), paths::param(m, ci, oi, pi))), out);
        }
    }

    let unresolved: HashSet<&str> = resolution.issues.iter().map(|i| i.path.as_str()).collect();
    for (ci, class) in m.classes.iter().enumerate() {
        for (oi, op) in class.operations.iter().enumerate() {
            let opath = paths::op(m, ci, oi);
            let mut missing: Vec<&str> = (0..op.params.len())
                .filter(|&pi| unresolved.contains(paths::param(m, ci, oi, pi).as_str()))
                .map(|pi| op.params[pi].type_ref.as_str())
                .collect();
            if op.return_type.is_some() && unresolved.contains(format!("{opath}.return").as_str()) {
                missing.push(op.return_type.as_deref().unwrap_or_default());
            }
            if !missing.is_empty() {
                out.push(Finding::new(
                    "untypable-operation",
                    &opath,
                    format!("operation `{opath}` cannot be generated: unknown type(s) {}", missing.join(", ")),
                    "declare the missing types or use a builtin type",
                ));
            }
        }
    }
}

/// Flags elements in one namespace whose distinct names mangle to the same
/// generated identifier. The first element keeps the identifier.
fn collisions<'a>(elements: impl Iterator<Item = (&'a str, String)>, out: &mut Vec<Finding>) {
    let mut owners: HashMap<String, &str> = HashMap::new();
    let mut hits: BTreeMap<String, Finding> = BTreeMap::new();
    for (name, path) in elements {
        let mangled = mangle(name);
        if mangled.is_empty() {
            continue;
        }
        match owners.get(mangled.as_str()) {
            Some(&first) if first != name => {
                hits.entry(path.clone()).or_insert_with(|| {
                    Finding::new(
                        "generated-name-collision",
                        &path,
                        format!("`{name}` and `{first}` both generate the identifier `{mangled}`"),
                        format!("rename `{name}` so it differs from `{first}` in more than case, digits or underscores"),
                    )
                });
            }
            Some(_) => {}
            None => {
                owners.insert(mangled, name);
            }
        }
    }
    out.extend(hits.into_values());
}
