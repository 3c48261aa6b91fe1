//! Synthetic inputs for the benchmarks.

use std::fmt::Write;

/// A well-formed model with `classes` classes in a chain of associations,
/// each with a few attributes and operations and a shallow inheritance tree.
pub fn synthetic_model(classes: usize) -> String {
    let mut s = String::from("model Synthetic {\n  purpose \"benchmark model\" keywords entity\n");
    for i in 0..classes {
        let parent = if i % 4 == 0 || i == 0 { String::new() } else { format!(" extends Entity{}", i - i % 4) };
        let _ = writeln!(s, "  class Entity{i}{parent} {{");
        let _ = writeln!(s, "    attr name{i}: String");
        let _ = writeln!(s, "    attr size{i}: Int [0..1]");
        let _ = writeln!(s, "    op touch{i}(at: Date): Bool");
        let _ = writeln!(s, "  }}");
    }
    for i in 1..classes {
        let _ = writeln!(s, "  assoc Entity{} \"0..*\" -- Entity{i} \"1\"", i - 1);
    }
    s.push_str("}\n");
    s
}
