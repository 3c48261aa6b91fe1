use super::strong::supertype_edges;
use super::{normalize, Finding, Thresholds};
use crate::model::{paths, ModelUnit, Resolution, Resolved};

/// Thresholded smells for understandability, confinement and maintainability.
pub fn check_medium(m: &ModelUnit, resolution: &Resolution, t: &Thresholds) -> Vec<Finding> {
    let mut out = Vec::new();
    let model_path = paths::model(m);

    let class_count = m.classes.len();
    if class_count > t.max_classes as usize {
        out.push(Finding::new(
            "too-many-classes",
            &model_path,
            format!("model has {class_count} classes (limit {})", t.max_classes),
            "split the model into smaller library entries with one purpose each",
        ));
    }
    for (ci, class) in m.classes.iter().enumerate() {
        let n = class.attributes.len();
        if n > t.max_attrs_per_class as usize {
            let cpath = paths::class(m, ci);
            out.push(Finding::new(
                "too-many-attributes",
                &cpath,
                format!("`{cpath}` has {n} attributes (limit {})", t.max_attrs_per_class),
                "extract related attributes into a separate class",
            ));
        }
    }

    let components = class_components(m, resolution);
    if components.len() > 1 {
        let listing: Vec<String> = components
            .iter()
            .map(|c| c.iter().map(|&ci| paths::class(m, ci)).collect::<Vec<_>>().join(", "))
            .map(|s| format!("{{{s}}}"))
            .collect();
        out.push(Finding::new(
            "disconnected-model",
            &model_path,
            format!("model falls apart into {} unconnected parts: {}", components.len(), listing.join(" ")),
            "connect the parts with associations or generalizations, or store them as separate entries",
        ));
    }

    let elements = class_count
        + m.classes.iter().map(|c| c.attributes.len() + c.operations.len()).sum::<usize>()
        + m.associations.len();
    if elements > t.max_elements as usize {
        out.push(Finding::new(
            "too-many-elements",
            &model_path,
            format!("model has {elements} elements (limit {})", t.max_elements),
            "reduce the model to what its purpose needs",
        ));
    }

    for (ci, class) in m.classes.iter().enumerate() {
        for (oi, op) in class.operations.iter().enumerate() {
            if op.params.len() > t.max_params as usize {
                let opath = paths::op(m, ci, oi);
                out.push(Finding::new(
                    "long-parameter-list",
                    &opath,
                    format!("`{opath}` takes {} parameters (limit {})", op.params.len(), t.max_params),
                    "group related parameters into a class or split the operation",
                ));
            }
        }
    }

    let dit = inheritance_depths(m, resolution);
    for (ci, depth) in dit.iter().enumerate() {
        if let Some(d) = depth.filter(|&d| d > t.max_dit as usize) {
            let cpath = paths::class(m, ci);
            out.push(Finding::new(
                "deep-inheritance",
                &cpath,
                format!("`{cpath}` sits {d} levels deep in its inheritance hierarchy (limit {})", t.max_dit),
                "flatten the hierarchy or replace inheritance with composition",
            ));
        }
    }

    let mut fanout = vec![0usize; class_count];
    for (i, _) in m.associations.iter().enumerate() {
        let apath = paths::assoc(m, i);
        for end in ["end_a", "end_b"] {
            if let Some(Resolved::Class(ci)) = resolution.table.lookup(&format!("{apath}.{end}")) {
                fanout[ci] += 1;
            }
        }
    }
    for (ci, &n) in fanout.iter().enumerate() {
        if n > t.max_fanout as usize {
            let cpath = paths::class(m, ci);
            out.push(Finding::new(
                "high-fanout",
                &cpath,
                format!("`{cpath}` takes part in {n} association ends (limit {})", t.max_fanout),
                "move some responsibilities to a collaborating class",
            ));
        }
    }

    for (ci, class) in m.classes.iter().enumerate() {
        let leftover = t
            .leftover_suffixes
            .iter()
            .find(|s| class.name.len() > s.len() && class.name.ends_with(s.as_str()));
        if let Some(suffix) = leftover {
            let stripped = &class.name[..class.name.len() - suffix.len()];
            out.push(Finding::new(
                "technology-leftover-name",
                paths::class(m, ci),
                format!("class name `{}` carries the technology suffix `{suffix}`", class.name),
                format!("strip the suffix and rename the class to `{stripped}`"),
            ));
        }
    }

    normalize(out)
}

/// Connected components of the class graph (inheritance and associations,
/// undirected), each sorted, in order of their first class.
fn class_components(m: &ModelUnit, resolution: &Resolution) -> Vec<Vec<usize>> {
    let n = m.classes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut union = |a: usize, b: usize| {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };
    for (ci, sups) in supertype_edges(m, resolution).into_iter().enumerate() {
        for s in sups {
            union(ci, s);
        }
    }
    for i in 0..m.associations.len() {
        let apath = paths::assoc(m, i);
        let a = resolution.table.lookup(&format!("{apath}.end_a"));
        let b = resolution.table.lookup(&format!("{apath}.end_b"));
        if let (Some(Resolved::Class(a)), Some(Resolved::Class(b))) = (a, b) {
            union(a, b);
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for ci in 0..n {
        let root = find(&mut parent, ci);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(ci),
            None => groups.push((root, vec![ci])),
        }
    }
    groups.into_iter().map(|(_, members)| members).collect()
}

/// Depth of inheritance per class: length of the longest supertype chain.
/// `None` for classes that reach an inheritance cycle.
pub(crate) fn inheritance_depths(m: &ModelUnit, resolution: &Resolution) -> Vec<Option<usize>> {
    #[derive(Clone, Copy)]
    enum State {
        Unvisited,
        InProgress,
        Done(Option<usize>),
    }
    fn visit(ci: usize, edges: &[Vec<usize>], state: &mut [State]) -> Option<usize> {
        match state[ci] {
            State::Done(d) => return d,
            State::InProgress => return None,
            State::Unvisited => {}
        }
        state[ci] = State::InProgress;
        let mut depth = Some(0);
        for &s in &edges[ci] {
            depth = match (depth, visit(s, edges, state)) {
                (Some(d), Some(sd)) => Some(d.max(sd + 1)),
                _ => None,
            };
        }
        state[ci] = State::Done(depth);
        depth
    }
    let edges = supertype_edges(m, resolution);
    let mut state = vec![State::Unvisited; edges.len()];
    (0..edges.len()).map(|ci| visit(ci, &edges, &mut state)).collect()
}
