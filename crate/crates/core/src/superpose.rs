//! Superposition of a cycle in a cubic graph: every cycle vertex becomes a
//! supervertex (`A` or `A'`), every cycle edge becomes a copy of the
//! superedge `B`, everything else is kept as-is.
//!
//! Canonical wiring at position `i` (all indices mod the cycle length): the
//! copy `B_i` replaces the edge `u_i u_{i+1}`, its left connector facing
//! `u_i`. Between `B_{i-1}` and `B_i` run three strands:
//!
//! - the a-strand `a_{i-1} - u_i - a_i`, carrying the original cycle vertex;
//! - the d-strand from `d_{i-1}` to `c_i`;
//! - the h-strand from `h_{i-1}` to `g_i`.
//!
//! With supervertex `A` the d/h-strands pass straight through (the isolated
//! edges splice away); with `A'` they are subdivided by `u'_i` and `u''_i`,
//! joined by the extra edge `u'_i u''_i`. A twist at position `i` crosses the
//! two strands: `d_{i-1}` connects to `g_i` and `h_{i-1}` to `c_i`.

use crate::catalog::{B_EDGES, B_LEFT_A, B_LEFT_C, B_LEFT_G, B_RIGHT_A, B_RIGHT_D, B_RIGHT_H};
use crate::multipole::{cycle_edges, is_bridgeless, EdgeId, Multipole, SemiedgeId, VertexId};
use crate::search::SearchConfig;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Choice {
    A,
    APrime,
}

#[derive(Debug, Clone)]
pub struct SuperpositionSpec {
    pub base: Multipole,
    pub cycle: Vec<VertexId>,
    pub choices: Vec<Choice>,
    pub twists: Vec<bool>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuperposeError {
    #[error("base must be a graph (no semiedges)")]
    BaseNotGraph,
    #[error("base must be cubic")]
    BaseNotCubic,
    #[error("cycle length {0} below 3")]
    CycleTooShort(usize),
    #[error("cycle revisits vertex {0}")]
    CycleNotSimple(u32),
    #[error("cycle vertices {0} and {1} are not adjacent in the base")]
    CycleNotInBase(u32, u32),
    #[error("choices length {0} does not match cycle length {1}")]
    BadChoices(usize, usize),
    #[error("twists length {0} does not match cycle length {1}")]
    BadTwists(usize, usize),
    #[error("is_snark requires a cubic graph")]
    NotCubicGraph,
}

impl SuperpositionSpec {
    pub fn all_a(base: Multipole, cycle: Vec<VertexId>) -> Self {
        let g = cycle.len();
        SuperpositionSpec {
            base,
            cycle,
            choices: vec![Choice::A; g],
            twists: vec![false; g],
        }
    }

    pub fn validate(&self) -> Result<Vec<EdgeId>, SuperposeError> {
        if !self.base.is_graph() {
            return Err(SuperposeError::BaseNotGraph);
        }
        if self.base.validate().iter().any(|v| matches!(v, crate::multipole::Violation::Degree { .. })) {
            return Err(SuperposeError::BaseNotCubic);
        }
        let g = self.cycle.len();
        if g < 3 {
            return Err(SuperposeError::CycleTooShort(g));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &v in &self.cycle {
            if !seen.insert(v) {
                return Err(SuperposeError::CycleNotSimple(v));
            }
        }
        let edges = cycle_edges(&self.base, &self.cycle).ok_or_else(|| {
            // Find the first non-adjacent pair for the diagnostic.
            for i in 0..g {
                let (u, v) = (self.cycle[i], self.cycle[(i + 1) % g]);
                if !self.base.neighbors(u).contains(&v) {
                    return SuperposeError::CycleNotInBase(u, v);
                }
            }
            SuperposeError::CycleNotInBase(self.cycle[0], self.cycle[1])
        })?;
        if self.choices.len() != g {
            return Err(SuperposeError::BadChoices(self.choices.len(), g));
        }
        if self.twists.len() != g {
            return Err(SuperposeError::BadTwists(self.twists.len(), g));
        }
        Ok(edges)
    }
}

/// The built superposition with name maps back to the base, the copies and
/// the strands.
#[derive(Debug, Clone)]
pub struct SuperpositionResult {
    pub graph: Multipole,
    pub cycle: Vec<VertexId>,
    pub choices: Vec<Choice>,
    pub twists: Vec<bool>,
    /// Base edge ids of the superposed cycle edges `u_i u_{i+1}`.
    pub cycle_edge_ids: Vec<EdgeId>,
    /// `B_i` vertex a..h (catalog order) -> graph vertex.
    pub copy_vertices: Vec<[VertexId; 8]>,
    /// `(u'_i, u''_i)` for `A'` positions.
    pub prime_vertices: Vec<Option<(VertexId, VertexId)>>,
    /// base edge -> graph edge; `None` for cycle edges.
    pub base_edge_map: Vec<Option<EdgeId>>,
    /// `B_i` edge (catalog order) -> graph edge.
    pub copy_edge_map: Vec<[EdgeId; 9]>,
    /// Per position: (edge `a_{i-1} u_i`, edge `u_i a_i`).
    pub a_strand_edges: Vec<(EdgeId, EdgeId)>,
    /// Per position: the edges from `d_{i-1}` towards its target (one for
    /// `A`, two for `A'`, source side first).
    pub d_strand_edges: Vec<Vec<EdgeId>>,
    /// Per position: the edges from `h_{i-1}` towards its target.
    pub h_strand_edges: Vec<Vec<EdgeId>>,
    /// Edge `u'_i u''_i` for `A'` positions.
    pub prime_edge: Vec<Option<EdgeId>>,
}

/// Name maps in JSON form, for the CLI.
#[derive(Serialize)]
pub struct SuperpositionMaps {
    pub cycle: Vec<u32>,
    pub choices: Vec<Choice>,
    pub twists: Vec<bool>,
    pub copy_vertices: Vec<[u32; 8]>,
    pub prime_vertices: Vec<Option<(u32, u32)>>,
    pub base_edge_map: Vec<Option<u32>>,
    pub copy_edge_map: Vec<[u32; 9]>,
    pub a_strand_edges: Vec<(u32, u32)>,
    pub d_strand_edges: Vec<Vec<u32>>,
    pub h_strand_edges: Vec<Vec<u32>>,
    pub prime_edge: Vec<Option<u32>>,
}

impl SuperpositionResult {
    /// The graph edge carrying the given boundary semiedge of copy `l`.
    pub fn copy_boundary_edge(&self, l: usize, s: SemiedgeId) -> EdgeId {
        let g = self.cycle.len();
        let next = (l + 1) % g;
        match s {
            B_LEFT_A => self.a_strand_edges[l].1,
            B_RIGHT_A => self.a_strand_edges[next].0,
            B_LEFT_C => {
                // The strand arriving at c_l: the d-strand unless twisted.
                let strand = if self.twists[l] { &self.h_strand_edges[l] } else { &self.d_strand_edges[l] };
                *strand.last().expect("strand nonempty")
            }
            B_LEFT_G => {
                let strand = if self.twists[l] { &self.d_strand_edges[l] } else { &self.h_strand_edges[l] };
                *strand.last().expect("strand nonempty")
            }
            B_RIGHT_D => self.d_strand_edges[next][0],
            B_RIGHT_H => self.h_strand_edges[next][0],
            _ => unreachable!("B has six semiedges"),
        }
    }

    /// Base edge from `u_i` to its non-cycle neighbor, in the graph.
    pub fn pendant_edge(&self, i: usize) -> EdgeId {
        let g = self.cycle.len();
        let u = self.cycle[i];
        let (prev, next) = (self.cycle[(i + g - 1) % g], self.cycle[(i + 1) % g]);
        let base_e = (0..self.base_edge_map.len() as u32)
            .find(|&e| {
                if self.base_edge_map[e as usize].is_none() {
                    return false;
                }
                let (a, b) = self.base_edge(e);
                (a == u && b != prev && b != next) || (b == u && a != prev && a != next)
            })
            .expect("cubic vertex has a third edge");
        self.base_edge_map[base_e as usize].expect("pendant edges survive")
    }

    fn base_edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        // Graph edges of surviving base edges keep base endpoints, so the
        // graph edge endpoints below cycle length are base vertices.
        let ge = self.base_edge_map[e as usize].expect("non-cycle edge");
        self.graph.edge(ge)
    }

    pub fn maps(&self) -> SuperpositionMaps {
        SuperpositionMaps {
            cycle: self.cycle.clone(),
            choices: self.choices.clone(),
            twists: self.twists.clone(),
            copy_vertices: self.copy_vertices.clone(),
            prime_vertices: self.prime_vertices.clone(),
            base_edge_map: self.base_edge_map.clone(),
            copy_edge_map: self.copy_edge_map.clone(),
            a_strand_edges: self.a_strand_edges.clone(),
            d_strand_edges: self.d_strand_edges.clone(),
            h_strand_edges: self.h_strand_edges.clone(),
            prime_edge: self.prime_edge.clone(),
        }
    }
}

/// Number of members of the family for a cycle of length `g` (per-vertex
/// choice of `A`/`A'`; twist variants counted separately).
pub fn family_size(g: u32) -> u128 {
    1u128 << g
}

/// Builds the superposition described by `spec`.
pub fn build(spec: &SuperpositionSpec) -> Result<SuperpositionResult, SuperposeError> {
    let cycle_ids = spec.validate()?;
    let base = &spec.base;
    let g = spec.cycle.len();
    let n = base.vertex_count() as u32;
    let on_cycle: std::collections::BTreeSet<u32> = spec.cycle.iter().copied().collect();

    // Vertices: base vertices keep their ids; copies follow; primes last.
    let copy_vertices: Vec<[u32; 8]> = (0..g)
        .map(|i| std::array::from_fn(|k| n + 8 * i as u32 + k as u32))
        .collect();
    let mut next_vertex = n + 8 * g as u32;
    let mut prime_vertices: Vec<Option<(u32, u32)>> = Vec::with_capacity(g);
    for i in 0..g {
        if spec.choices[i] == Choice::APrime {
            prime_vertices.push(Some((next_vertex, next_vertex + 1)));
            next_vertex += 2;
        } else {
            prime_vertices.push(None);
        }
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut base_edge_map: Vec<Option<u32>> = Vec::with_capacity(base.edge_count());
    for (e, &(u, v)) in base.edges().iter().enumerate() {
        if cycle_ids.contains(&(e as u32)) {
            base_edge_map.push(None);
        } else {
            base_edge_map.push(Some(edges.len() as u32));
            edges.push((u, v));
        }
    }
    let mut copy_edge_map: Vec<[u32; 9]> = Vec::with_capacity(g);
    for i in 0..g {
        let ids: [u32; 9] = std::array::from_fn(|k| edges.len() as u32 + k as u32);
        for &(a, b) in B_EDGES.iter() {
            edges.push((copy_vertices[i][a as usize], copy_vertices[i][b as usize]));
        }
        copy_edge_map.push(ids);
    }

    let idx = |i: usize, name: u32| copy_vertices[i][name as usize];
    let mut a_strand_edges = Vec::with_capacity(g);
    let mut d_strand_edges = Vec::with_capacity(g);
    let mut h_strand_edges = Vec::with_capacity(g);
    let mut prime_edge = Vec::with_capacity(g);
    for i in 0..g {
        let prev = (i + g - 1) % g;
        let u = spec.cycle[i];
        // a-strand through the original cycle vertex.
        let e1 = edges.len() as u32;
        edges.push((idx(prev, crate::catalog::B_A), u));
        let e2 = edges.len() as u32;
        edges.push((u, idx(i, crate::catalog::B_A)));
        a_strand_edges.push((e1, e2));
        // d/h-strands, crossed by a twist.
        let (tgt_d, tgt_h) = if spec.twists[i] {
            (idx(i, crate::catalog::B_G), idx(i, crate::catalog::B_C))
        } else {
            (idx(i, crate::catalog::B_C), idx(i, crate::catalog::B_G))
        };
        let src_d = idx(prev, crate::catalog::B_D);
        let src_h = idx(prev, crate::catalog::B_H);
        match prime_vertices[i] {
            None => {
                let ed = edges.len() as u32;
                edges.push((src_d, tgt_d));
                let eh = edges.len() as u32;
                edges.push((src_h, tgt_h));
                d_strand_edges.push(vec![ed]);
                h_strand_edges.push(vec![eh]);
                prime_edge.push(None);
            }
            Some((up, upp)) => {
                let ed1 = edges.len() as u32;
                edges.push((src_d, up));
                let ed2 = edges.len() as u32;
                edges.push((up, tgt_d));
                let eh1 = edges.len() as u32;
                edges.push((src_h, upp));
                let eh2 = edges.len() as u32;
                edges.push((upp, tgt_h));
                let ep = edges.len() as u32;
                edges.push((up, upp));
                d_strand_edges.push(vec![ed1, ed2]);
                h_strand_edges.push(vec![eh1, eh2]);
                prime_edge.push(Some(ep));
            }
        }
    }
    let _ = on_cycle;

    let graph = Multipole::graph(next_vertex as usize, edges).expect("wiring produces a graph");
    debug_assert!(graph.validate().is_empty());
    Ok(SuperpositionResult {
        graph,
        cycle: spec.cycle.clone(),
        choices: spec.choices.clone(),
        twists: spec.twists.clone(),
        cycle_edge_ids: cycle_ids,
        copy_vertices,
        prime_vertices,
        base_edge_map,
        copy_edge_map,
        a_strand_edges,
        d_strand_edges,
        h_strand_edges,
        prime_edge,
    })
}

/// Bridgeless cubic graph with no proper 3-edge-coloring. `None` when the
/// coloring search hits its deadline.
pub fn is_snark(m: &Multipole, config: &SearchConfig) -> Result<Option<bool>, SuperposeError> {
    if !m.is_graph() || !m.validate().is_empty() {
        return Err(SuperposeError::NotCubicGraph);
    }
    if !is_bridgeless(m).expect("graph") {
        return Ok(Some(false));
    }
    Ok(crate::search::pipelines::is_3_edge_colorable(m, config).map(|c| !c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{k4, petersen};
    use crate::multipole::find_cycle;

    fn p10_six_cycle() -> Vec<u32> {
        let c = find_cycle(&petersen(), crate::multipole::CycleQuery::Length(6))
            .expect("graph")
            .expect("Petersen has a 6-cycle");
        assert_eq!(c.len(), 6);
        c
    }

    #[test]
    fn all_a_counts() {
        let spec = SuperpositionSpec::all_a(petersen(), p10_six_cycle());
        let r = build(&spec).expect("valid spec");
        assert_eq!(r.graph.vertex_count(), 58);
        assert_eq!(r.graph.edge_count(), 87);
        assert!(r.graph.validate().is_empty());
        assert!(is_bridgeless(&r.graph).expect("graph"));
    }

    #[test]
    fn one_prime_counts() {
        let mut spec = SuperpositionSpec::all_a(petersen(), p10_six_cycle());
        spec.choices[2] = Choice::APrime;
        let r = build(&spec).expect("valid spec");
        assert_eq!(r.graph.vertex_count(), 60);
        assert_eq!(r.graph.edge_count(), 90);
        assert!(r.graph.validate().is_empty());
    }

    #[test]
    fn contains_doubled_cycle() {
        let spec = SuperpositionSpec::all_a(petersen(), p10_six_cycle());
        let r = build(&spec).expect("valid spec");
        // u_0 a_0 u_1 a_1 ... is a cycle of length 2g.
        let g = 6;
        for i in 0..g {
            let (e1, e2) = r.a_strand_edges[i];
            let (a, b) = r.graph.edge(e2);
            assert_eq!(a, r.cycle[i]);
            assert_eq!(b, r.copy_vertices[i][crate::catalog::B_A as usize]);
            let (c, d) = r.graph.edge(e1);
            assert_eq!(c, r.copy_vertices[(i + g - 1) % g][crate::catalog::B_A as usize]);
            assert_eq!(d, r.cycle[i]);
        }
    }

    #[test]
    fn family_sizes() {
        assert_eq!(family_size(6), 64);
        assert_eq!(family_size(5), 32);
    }

    #[test]
    fn g4_members_pairwise_distinct() {
        // K4 has 4-cycles; the builder is structural, so a non-snark base is
        // fine for this check.
        let cycle = find_cycle(&k4(), crate::multipole::CycleQuery::Length(4))
            .expect("graph")
            .expect("K4 has a 4-cycle");
        let mut seen: Vec<(usize, Vec<(u32, u32)>)> = Vec::new();
        for bits in 0..16u32 {
            let mut spec = SuperpositionSpec::all_a(k4(), cycle.clone());
            for i in 0..4 {
                if bits & (1 << i) != 0 {
                    spec.choices[i] = Choice::APrime;
                }
            }
            let r = build(&spec).expect("valid spec");
            let mut es: Vec<(u32, u32)> = r
                .graph
                .edges()
                .iter()
                .map(|&(u, v)| (u.min(v), u.max(v)))
                .collect();
            es.sort();
            let sig = (r.graph.vertex_count(), es);
            assert!(!seen.contains(&sig), "members must be pairwise distinct");
            seen.push(sig);
        }
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn twist_pairs_are_isomorphic_to_untwisted() {
        let cycle = find_cycle(&k4(), crate::multipole::CycleQuery::Length(4))
            .expect("graph")
            .expect("K4 has a 4-cycle");
        let plain = build(&SuperpositionSpec::all_a(k4(), cycle.clone())).expect("ok");
        for twists in [vec![true, true, false, false], vec![false, true, true, false], vec![true, false, false, true]] {
            let mut spec = SuperpositionSpec::all_a(k4(), cycle.clone());
            spec.twists = twists;
            let r = build(&spec).expect("ok");
            assert!(crate::iso::are_isomorphic(&plain.graph, &r.graph));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = SuperpositionSpec::all_a(petersen(), vec![0, 1, 2]);
        assert_eq!(spec.validate().unwrap_err(), SuperposeError::CycleNotInBase(2, 0));
        spec.cycle = vec![0, 1];
        spec.choices = vec![Choice::A; 2];
        spec.twists = vec![false; 2];
        assert_eq!(spec.validate().unwrap_err(), SuperposeError::CycleTooShort(2));
    }

    #[test]
    fn petersen_is_snark_k4_is_not() {
        let cfg = SearchConfig::default();
        assert_eq!(is_snark(&petersen(), &cfg).expect("cubic"), Some(true));
        assert_eq!(is_snark(&k4(), &cfg).expect("cubic"), Some(false));
    }

    #[test]
    fn join_reproduces_one_junction() {
        // Joining B's left connector to A's right connector with the identity
        // permutation realizes the canonical wiring of one junction: the
        // a-semiedge meets the supervertex, the c/g-semiedges splice through
        // the isolated edges.
        let b = crate::catalog::superedge_b();
        let a = crate::catalog::supervertex_a();
        let joined = crate::multipole::join(&a, 1, &b.multipole, 0, &[0, 1, 2]).expect("sizes match");
        // One edge u-a is created; the two splices leave dangling chains
        // replaced by semiedges, so: vertices 1+8, edges 9+1, semiedges:
        // left-of-A (3) + third (1) + right of B (3) = 7... the two splices
        // consumed iso halves and produced fresh semiedges at c and g.
        assert_eq!(joined.vertex_count(), 9);
        assert_eq!(joined.edge_count(), 10);
        assert_eq!(joined.semiedge_count(), 7 + 6 - 2 - 2 - 2 - 2 + 2);
        assert!(joined
            .edges()
            .iter()
            .any(|&(u, v)| (u == 0 && v == 1 + crate::catalog::B_A) || (v == 0 && u == 1 + crate::catalog::B_A)));
    }
}
