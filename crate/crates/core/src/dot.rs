//! DOT export. Edges are colored by palette index; poor edges are drawn
//! bold, rich edges solid, abnormal edges dashed. Semiedges appear as point
//! nodes.

use crate::coloring::{classify_edge, EdgeClass, EdgeColoring};
use crate::multipole::{Incidence, Multipole};

const PALETTE: [&str; 5] = ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00"];

pub fn emit_dot(m: &Multipole, coloring: Option<&EdgeColoring>, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("graph \"{name}\" {{\n"));
    out.push_str("  node [shape=circle fontsize=10];\n");
    for v in 0..m.vertex_count() {
        out.push_str(&format!("  v{v};\n"));
    }
    for (i, inc) in m.semiedges().iter().enumerate() {
        if matches!(inc, Incidence::Vertex(_)) {
            out.push_str(&format!("  s{i} [shape=point width=0.05];\n"));
        }
    }
    for (e, &(u, v)) in m.edges().iter().enumerate() {
        let attrs = edge_attrs(m, coloring, e as u32);
        out.push_str(&format!("  v{u} -- v{v}{attrs};\n"));
    }
    let mut iso_done = vec![false; m.semiedge_count()];
    for (i, inc) in m.semiedges().iter().enumerate() {
        match *inc {
            Incidence::Vertex(v) => {
                let attrs = semi_attrs(m, coloring, i as u32);
                out.push_str(&format!("  v{v} -- s{i}{attrs};\n"));
            }
            Incidence::Mate(j) => {
                if !iso_done[i] {
                    iso_done[i] = true;
                    iso_done[j as usize] = true;
                    let attrs = semi_attrs(m, coloring, i as u32);
                    out.push_str(&format!(
                        "  iso{i} [shape=point width=0.02]; iso{j} [shape=point width=0.02]; iso{i} -- iso{j}{attrs};\n"
                    ));
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

fn edge_attrs(m: &Multipole, coloring: Option<&EdgeColoring>, e: u32) -> String {
    match coloring {
        None => String::new(),
        Some(c) => {
            let col = c.get(m, crate::multipole::ElementId::Edge(e));
            let hex = PALETTE[(col.0 as usize - 1).min(4)];
            let style = match classify_edge(m, c, e).expect("edge exists") {
                EdgeClass::Poor => " penwidth=3",
                EdgeClass::Rich => "",
                EdgeClass::Abnormal => " style=dashed",
            };
            format!(" [color=\"{hex}\" label={}{}]", col.0, style)
        }
    }
}

fn semi_attrs(m: &Multipole, coloring: Option<&EdgeColoring>, s: u32) -> String {
    match coloring {
        None => String::new(),
        Some(c) => {
            let col = c.get(m, crate::multipole::ElementId::Semiedge(s));
            let hex = PALETTE[(col.0 as usize - 1).min(4)];
            format!(" [color=\"{hex}\" label={}]", col.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn petersen_dot_mentions_all_vertices() {
        let p = catalog::petersen();
        let dot = emit_dot(&p, None, "petersen");
        for v in 0..10 {
            assert!(dot.contains(&format!("v{v};")));
        }
        assert!(dot.starts_with("graph"));
    }

    #[test]
    fn colored_dot_styles_poor_edges() {
        let m = catalog::k4();
        let cfg = crate::search::SearchConfig::default();
        let p = crate::search::SearchProblem::new(&m, 3, false, crate::search::SearchMode::Exists);
        let w = match crate::search::solve(&p, &cfg).expect("ok").outcome.expect("done") {
            crate::search::SearchOutcome::Exists(Some(w)) => w,
            _ => unreachable!(),
        };
        let dot = emit_dot(&m, Some(&w), "k4");
        assert!(dot.contains("penwidth=3")); // 3-colorings are all-poor
    }
}
