//! DOT structure export for lattices and beta categorizations. Layout
//! is left to graphviz; nodes keep the library's enumeration order so
//! output is byte-stable.

use aglat_core::{BetaCategorization, ConceptLattice, FormalContext};

fn label(names: &[String]) -> String {
    if names.is_empty() {
        "∅".to_string()
    } else {
        names.join(",")
    }
}

fn escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

/// One node per concept labeled with its extent, one edge per covering
/// pair, smaller concept pointing at the larger.
pub fn lattice_dot(ctx: &FormalContext, lattice: &ConceptLattice) -> String {
    let mut out = String::from("digraph lattice {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, concept) in lattice.concepts.iter().enumerate() {
        let extent = ctx.object_names(&concept.extent);
        out.push_str(&format!(
            "  c{i} [label=\"{}\"];\n",
            escape(&label(&extent))
        ));
    }
    for (lower, upper) in &lattice.covering {
        out.push_str(&format!("  c{lower} -> c{upper};\n"));
    }
    out.push_str("}\n");
    out
}

/// Beta classes with their stability indices, ordered by inclusion.
pub fn beta_dot(cat: &BetaCategorization) -> String {
    let mut out = String::from("digraph categorization {\n  rankdir=BT;\n  node [shape=box];\n");
    for (i, class) in cat.classes.iter().enumerate() {
        out.push_str(&format!(
            "  c{i} [label=\"{}\\nindex {:.3}\"];\n",
            escape(&label(&class.extent)),
            class.index
        ));
    }
    for (lower, upper) in &cat.edges {
        out.push_str(&format!("  c{lower} -> c{upper};\n"));
    }
    out.push_str("}\n");
    out
}
