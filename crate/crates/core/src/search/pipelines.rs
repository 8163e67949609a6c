//! Verification pipelines built on the solver: snark detection, poor-count
//! maximization, the odd-cycle obstruction, small-cycle scans, and the
//! poor-count conjecture probe.

use super::{
    solve, SearchConfig, SearchMode, SearchOutcome, SearchProblem, Symmetry,
};
use crate::coloring::{classify_edge, Color, EdgeClass, EdgeColoring};
use crate::extend::{build_m_ext, build_m_int};
use crate::multipole::{
    cycle_edges, cycles_of_length, find_cycle, induced_submultipole, is_bridgeless, CycleQuery,
    ElementId, Multipole, SemiOrigin, Submultipole,
};
use crate::superpose::{build, SuperpositionSpec};
use serde::Serialize;
use std::collections::BTreeMap;

/// Exhaustive test for a proper 3-edge-coloring.
pub fn is_3_edge_colorable(m: &Multipole, config: &SearchConfig) -> Option<bool> {
    let p = SearchProblem::new(m, 3, false, SearchMode::Exists);
    let r = solve(&p, config).expect("well-formed problem");
    match r.outcome {
        Some(SearchOutcome::Exists(w)) => Some(w.is_some()),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub enum MaxPoorOutcome {
    /// Exact maximum with a witness coloring.
    Exact { poor: usize, witness: EdgeColoring },
    /// The graph admits no normal 5-coloring at all.
    NcEmpty,
    /// The search hit its deadline; no verdict.
    Inconclusive,
}

/// Exact maximum number of poor edges over all normal 5-colorings.
pub fn max_poor(m: &Multipole, config: &SearchConfig) -> MaxPoorOutcome {
    let mut p = SearchProblem::new(m, 5, true, SearchMode::MaximizePoor);
    p.symmetry = Symmetry::UpToColorPermutation;
    let r = solve(&p, config).expect("well-formed problem");
    match r.outcome {
        Some(SearchOutcome::MaxPoor(Some((poor, witness)))) => MaxPoorOutcome::Exact { poor, witness },
        Some(SearchOutcome::MaxPoor(None)) => MaxPoorOutcome::NcEmpty,
        _ => MaxPoorOutcome::Inconclusive,
    }
}

/// Exact minimum number of poor edges over all normal 5-colorings, by full
/// enumeration.
pub fn min_poor(m: &Multipole, config: &SearchConfig) -> Option<usize> {
    let mut p = SearchProblem::new(m, 5, true, SearchMode::Enumerate);
    p.symmetry = Symmetry::UpToColorPermutation;
    let r = solve(&p, config).expect("well-formed problem");
    match r.outcome {
        Some(SearchOutcome::Enumerate(sols)) => sols
            .iter()
            .map(|c| crate::coloring::poor_edges(m, c).len())
            .min(),
        _ => None,
    }
}

/// The two counts of the odd-cycle obstruction pipeline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PropOddReport {
    pub ext_extensions: u64,
    pub m123_compatible: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("search timed out")]
    TimedOut,
    #[error("unexpected search outcome: {0}")]
    Unexpected(String),
}

/// The unique normal 5-coloring of the Petersen graph, canonical form.
pub fn petersen_normal_coloring(config: &SearchConfig) -> Result<EdgeColoring, PipelineError> {
    let p10 = crate::catalog::petersen();
    let mut p = SearchProblem::new(&p10, 5, true, SearchMode::Enumerate);
    p.symmetry = Symmetry::UpToColorPermutation;
    let r = solve(&p, config).expect("well-formed problem");
    match r.outcome {
        Some(SearchOutcome::Enumerate(mut v)) if v.len() == 1 => Ok(v.pop().expect("one")),
        Some(SearchOutcome::Enumerate(v)) => Err(PipelineError::Unexpected(format!(
            "Petersen has {} normal coloring classes, expected 1",
            v.len()
        ))),
        _ => Err(PipelineError::TimedOut),
    }
}

/// The all-A superposition of the Petersen graph on a 5-cycle, with the
/// unique base coloring.
fn odd_instance(config: &SearchConfig) -> Result<(crate::superpose::SuperpositionResult, EdgeColoring), PipelineError> {
    let p10 = crate::catalog::petersen();
    let sigma = petersen_normal_coloring(config)?;
    let cycle = find_cycle(&p10, CycleQuery::Length(5))
        .expect("graph")
        .expect("Petersen has 5-cycles");
    let spec = SuperpositionSpec::all_a(p10, cycle);
    let result = build(&spec).expect("valid spec");
    Ok((result, sigma))
}

/// Pins a submultipole's elements whose origin edges have known colors.
fn pin_from_graph_colors(
    sub: &Submultipole,
    known: &BTreeMap<u32, Color>,
) -> Vec<(ElementId, Color)> {
    let mut fixed = Vec::new();
    for (i, &ge) in sub.edge_map.iter().enumerate() {
        if let Some(&c) = known.get(&ge) {
            fixed.push((ElementId::Edge(i as u32), c));
        }
    }
    for (i, so) in sub.semi_origin.iter().enumerate() {
        if let SemiOrigin::HalfOf(ge) = so {
            if let Some(&c) = known.get(ge) {
                fixed.push((ElementId::Semiedge(i as u32), c));
            }
        }
    }
    fixed
}

/// Base-edge colors of the superposition graph (the interior restriction).
fn interior_pins(
    result: &crate::superpose::SuperpositionResult,
    base: &Multipole,
    sigma: &EdgeColoring,
) -> BTreeMap<u32, Color> {
    result
        .base_edge_map
        .iter()
        .enumerate()
        .filter_map(|(e, ge)| ge.map(|ge| (ge, sigma.get(base, ElementId::Edge(e as u32)))))
        .collect()
}

/// Counts normal extensions of the interior restriction to `M_ext` of the
/// Petersen 5-cycle superposition, then counts `M_123` colorings compatible
/// with the unique extension. The expected result is `(1, 0)`.
pub fn verify_prop_odd(config: &SearchConfig) -> Result<PropOddReport, PipelineError> {
    let p10 = crate::catalog::petersen();
    let (result, sigma) = odd_instance(config)?;
    let known = interior_pins(&result, &p10, &sigma);

    let mext = build_m_ext(&result);
    let mut p = SearchProblem::new(&mext.multipole, 5, true, SearchMode::Enumerate);
    p.fixed = pin_from_graph_colors(&mext, &known);
    let r = solve(&p, config).expect("well-formed problem");
    let exts = match r.outcome {
        Some(SearchOutcome::Enumerate(v)) => v,
        _ => return Err(PipelineError::TimedOut),
    };
    let ext_extensions = exts.len() as u64;

    let m123_compatible = if let Some(ext_coloring) = exts.first() {
        // Graph-edge colors determined by the unique outer extension.
        let mut known_ext = known.clone();
        for (i, &ge) in mext.edge_map.iter().enumerate() {
            known_ext.insert(ge, ext_coloring.get(&mext.multipole, ElementId::Edge(i as u32)));
        }
        for (i, so) in mext.semi_origin.iter().enumerate() {
            if let SemiOrigin::HalfOf(ge) = so {
                known_ext.insert(*ge, ext_coloring.get(&mext.multipole, ElementId::Semiedge(i as u32)));
            }
        }
        let mut verts = std::collections::BTreeSet::new();
        for l in [1usize, 2, 3] {
            verts.extend(result.copy_vertices[l].iter().copied());
        }
        verts.insert(result.cycle[2]);
        verts.insert(result.cycle[3]);
        let m123 = induced_submultipole(&result.graph, &verts).expect("vertices exist");
        let mut p = SearchProblem::new(&m123.multipole, 5, true, SearchMode::Count);
        p.fixed = pin_from_graph_colors(&m123, &known_ext);
        let r = solve(&p, config).expect("well-formed problem");
        match r.outcome {
            Some(SearchOutcome::Count(n)) => n,
            _ => return Err(PipelineError::TimedOut),
        }
    } else {
        0
    };

    Ok(PropOddReport {
        ext_extensions,
        m123_compatible,
    })
}

/// Existence results for the full 50-vertex odd superposition: does some
/// normal 5-coloring exist, and does any exist with the interior fixed.
#[derive(Debug, Clone)]
pub struct OddExistenceReport {
    pub unconstrained: Option<EdgeColoring>,
    pub interior_fixed_exists: bool,
}

pub fn odd_superposition_existence(config: &SearchConfig) -> Result<OddExistenceReport, PipelineError> {
    let p10 = crate::catalog::petersen();
    let (result, sigma) = odd_instance(config)?;

    let mut p = SearchProblem::new(&result.graph, 5, true, SearchMode::Exists);
    p.symmetry = Symmetry::UpToColorPermutation;
    let r = solve(&p, config).expect("well-formed problem");
    let unconstrained = match r.outcome {
        Some(SearchOutcome::Exists(w)) => w,
        _ => return Err(PipelineError::TimedOut),
    };

    let known = interior_pins(&result, &p10, &sigma);
    let mut p = SearchProblem::new(&result.graph, 5, true, SearchMode::Exists);
    p.fixed = known
        .iter()
        .map(|(&ge, &c)| (ElementId::Edge(ge), c))
        .collect();
    let r = solve(&p, config).expect("well-formed problem");
    let interior_fixed_exists = match r.outcome {
        Some(SearchOutcome::Exists(w)) => w.is_some(),
        _ => return Err(PipelineError::TimedOut),
    };

    Ok(OddExistenceReport {
        unconstrained,
        interior_fixed_exists,
    })
}

/// Per-cycle poor-count behavior over a full enumeration of normal
/// 5-colorings: triangles must be entirely poor, 4-cycles must have exactly
/// two or four poor edges.
#[derive(Debug, Clone, Serialize)]
pub struct CycleScanReport {
    pub coloring_classes: u64,
    pub triangles: usize,
    pub four_cycles: usize,
    pub triangle_violations: Vec<CycleViolation>,
    pub four_cycle_violations: Vec<CycleViolation>,
    pub four_cycle_poor_counts_seen: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleViolation {
    pub coloring_index: usize,
    pub cycle: Vec<u32>,
    pub poor_edges_on_cycle: usize,
}

pub fn cycle_poor_scan(m: &Multipole, config: &SearchConfig) -> Result<CycleScanReport, PipelineError> {
    let mut p = SearchProblem::new(m, 5, true, SearchMode::Enumerate);
    p.symmetry = Symmetry::UpToColorPermutation;
    let r = solve(&p, config).expect("well-formed problem");
    let sols = match r.outcome {
        Some(SearchOutcome::Enumerate(v)) => v,
        _ => return Err(PipelineError::TimedOut),
    };
    let triangles = cycles_of_length(m, 3).expect("graph");
    let four_cycles = cycles_of_length(m, 4).expect("graph");
    let mut triangle_violations = Vec::new();
    let mut four_cycle_violations = Vec::new();
    let mut seen_counts = std::collections::BTreeSet::new();
    for (ci, col) in sols.iter().enumerate() {
        for tri in &triangles {
            let edges = cycle_edges(m, tri).expect("cycle edges exist");
            let poor = edges
                .iter()
                .filter(|&&e| classify_edge(m, col, e).expect("edge") == EdgeClass::Poor)
                .count();
            if poor != 3 {
                triangle_violations.push(CycleViolation {
                    coloring_index: ci,
                    cycle: tri.clone(),
                    poor_edges_on_cycle: poor,
                });
            }
        }
        for fc in &four_cycles {
            let edges = cycle_edges(m, fc).expect("cycle edges exist");
            let poor = edges
                .iter()
                .filter(|&&e| classify_edge(m, col, e).expect("edge") == EdgeClass::Poor)
                .count();
            seen_counts.insert(poor);
            if poor != 2 && poor != 4 {
                four_cycle_violations.push(CycleViolation {
                    coloring_index: ci,
                    cycle: fc.clone(),
                    poor_edges_on_cycle: poor,
                });
            }
        }
    }
    Ok(CycleScanReport {
        coloring_classes: sols.len() as u64,
        triangles: triangles.len(),
        four_cycles: four_cycles.len(),
        triangle_violations,
        four_cycle_violations,
        four_cycle_poor_counts_seen: seen_counts.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProbeStatus {
    Exact,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub name: String,
    pub vertices: usize,
    pub edges: usize,
    pub is_snark: Option<bool>,
    pub poor: Option<usize>,
    pub status: ProbeStatus,
    /// Set when the row contradicts the poor-count conjecture.
    pub finding: Option<String>,
}

/// Computes `poor(G)` for each graph and flags potential counterexamples to
/// the conjecture that `poor(G) > 0` away from the Petersen graph and
/// `poor(G) >= 6` away from its truncation as well. Timeouts are reported as
/// inconclusive, never as a verdict.
pub fn conjecture_probe(graphs: &[(String, Multipole)], config: &SearchConfig) -> Vec<ProbeRow> {
    graphs
        .iter()
        .map(|(name, g)| {
            let bridgeless = is_bridgeless(g).unwrap_or(false);
            let snark = if !bridgeless {
                Some(false)
            } else {
                is_3_edge_colorable(g, config).map(|c| !c)
            };
            let outcome = max_poor(g, config);
            let (poor, status) = match &outcome {
                MaxPoorOutcome::Exact { poor, .. } => (Some(*poor), ProbeStatus::Exact),
                MaxPoorOutcome::NcEmpty => (None, ProbeStatus::Exact),
                MaxPoorOutcome::Inconclusive => (None, ProbeStatus::Inconclusive),
            };
            let finding = match (&outcome, poor) {
                (MaxPoorOutcome::NcEmpty, _) => {
                    Some("no normal 5-coloring at all: contradicts the conjectured nonemptiness".into())
                }
                (_, Some(0)) if !crate::iso::are_isomorphic(g, &crate::catalog::petersen()) => {
                    Some("poor = 0 for a graph other than the Petersen graph".into())
                }
                (_, Some(p)) if p > 0 && p < 6 => {
                    let exceptional = crate::iso::are_isomorphic(g, &crate::catalog::petersen())
                        || crate::iso::are_isomorphic(g, &crate::catalog::petersen_truncated());
                    if exceptional {
                        None
                    } else {
                        Some(format!("poor = {p} in 1..=5 for a non-exceptional graph"))
                    }
                }
                _ => None,
            };
            ProbeRow {
                name: name.clone(),
                vertices: g.vertex_count(),
                edges: g.edge_count(),
                is_snark: snark,
                poor,
                status,
                finding,
            }
        })
        .collect()
}

/// Restriction of the Petersen coloring to the interior of a superposition,
/// exposed for tests of the odd pipeline.
pub fn interior_restriction_is_normal(config: &SearchConfig) -> Result<bool, PipelineError> {
    let (result, sigma) = odd_instance(config)?;
    let p10 = crate::catalog::petersen();
    let mint = build_m_int(&result);
    // M_int of the superposition has the same structure as the induced
    // submultipole of the base on the off-cycle vertices.
    let mut verts = std::collections::BTreeSet::new();
    for v in 0..p10.vertex_count() as u32 {
        if !result.cycle.contains(&v) {
            verts.insert(v);
        }
    }
    let base_int = induced_submultipole(&p10, &verts).expect("vertices exist");
    let restricted = crate::coloring::restrict(&p10, &sigma, &base_int)
        .map_err(|e| PipelineError::Unexpected(e.to_string()))?;
    let _ = mint;
    Ok(crate::coloring::is_normal(&base_int.multipole, &restricted))
}
