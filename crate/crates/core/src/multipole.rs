//! Cubic multipoles: vertices, edges, semiedges and connectors.
//!
//! A multipole `M = (V, E, S)` consists of vertices, edges between vertices,
//! and semiedges. A semiedge is attached to a vertex, or mated with another
//! semiedge to form an isolated edge. A graph is a multipole with `S = ∅`.
//! All multipoles of interest here are cubic: every vertex has exactly three
//! incidences (edges plus attached semiedges).

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Dense vertex index, unique within one multipole.
pub type VertexId = u32;
/// Dense semiedge index, unique within one multipole.
pub type SemiedgeId = u32;
/// Dense edge index. Parallel edges are allowed, so edges are identified by
/// index rather than by endpoint pair.
pub type EdgeId = u32;

/// What a semiedge is incident to: a vertex, or its mate in an isolated edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Incidence {
    Vertex(VertexId),
    Mate(SemiedgeId),
}

/// An edge or a semiedge; the colorable elements of a multipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementId {
    Edge(EdgeId),
    Semiedge(SemiedgeId),
}

impl ElementId {
    /// Flat index used in certificates: edges first, then semiedges.
    pub fn flat(&self, m: &Multipole) -> usize {
        match *self {
            ElementId::Edge(e) => e as usize,
            ElementId::Semiedge(s) => m.edge_count() + s as usize,
        }
    }

    pub fn from_flat(m: &Multipole, idx: usize) -> Option<ElementId> {
        if idx < m.edge_count() {
            Some(ElementId::Edge(idx as EdgeId))
        } else if idx < m.element_count() {
            Some(ElementId::Semiedge((idx - m.edge_count()) as SemiedgeId))
        } else {
            None
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MultipoleError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
    #[error("semiedge {0} out of range")]
    SemiedgeOutOfRange(u32),
    #[error("edge endpoints {0} and {1} coincide (loops are not supported)")]
    Loop(u32, u32),
    #[error("mate relation is not a fixed-point-free involution at semiedge {0}")]
    BadMate(u32),
    #[error("semiedge {0} appears in more than one connector")]
    ConnectorOverlap(u32),
    #[error("unknown vertex {0} in requested vertex set")]
    UnknownVertex(u32),
    #[error("submultipoles come from different origin multipoles")]
    DifferentOrigins,
    #[error("vertex sets of the two parts overlap at origin vertex {0}")]
    OverlappingParts(u32),
    #[error("connector sizes differ: {0} vs {1}")]
    ConnectorSizeMismatch(usize, usize),
    #[error("join would identify the two ends of one isolated edge (vertex-free loop)")]
    VertexFreeLoop,
    #[error("connector index {0} out of range")]
    ConnectorOutOfRange(usize),
    #[error("not a permutation of 0..{0}")]
    BadPermutation(usize),
    #[error("operation requires a graph (no semiedges)")]
    NotAGraph,
}

/// A violated structural invariant, reported by [`Multipole::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Degree { vertex: VertexId, degree: usize },
    MateNotInvolution { semiedge: SemiedgeId },
    ConnectorOverlap { semiedge: SemiedgeId },
    ConnectorEmpty { connector: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Degree { vertex, degree } => {
                write!(f, "vertex {vertex}: degree {degree} != 3")
            }
            Violation::MateNotInvolution { semiedge } => {
                write!(f, "semiedge {semiedge}: mate relation not an involution")
            }
            Violation::ConnectorOverlap { semiedge } => {
                write!(f, "semiedge {semiedge}: in more than one connector")
            }
            Violation::ConnectorEmpty { connector } => {
                write!(f, "connector {connector}: empty")
            }
        }
    }
}

/// Immutable cubic multipole. All operations are pure functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multipole {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    semiedges: Vec<Incidence>,
    connectors: Vec<Vec<SemiedgeId>>,
    /// Incidences per vertex, in element order; built once at construction.
    incident: Vec<Vec<ElementId>>,
}

impl Multipole {
    pub fn new(
        vertex_count: usize,
        edges: Vec<(VertexId, VertexId)>,
        semiedges: Vec<Incidence>,
        connectors: Vec<Vec<SemiedgeId>>,
    ) -> Result<Self, MultipoleError> {
        for &(u, v) in &edges {
            if u as usize >= vertex_count {
                return Err(MultipoleError::VertexOutOfRange(u));
            }
            if v as usize >= vertex_count {
                return Err(MultipoleError::VertexOutOfRange(v));
            }
            if u == v {
                return Err(MultipoleError::Loop(u, v));
            }
        }
        for (i, inc) in semiedges.iter().enumerate() {
            match *inc {
                Incidence::Vertex(v) => {
                    if v as usize >= vertex_count {
                        return Err(MultipoleError::VertexOutOfRange(v));
                    }
                }
                Incidence::Mate(j) => {
                    if j as usize >= semiedges.len() {
                        return Err(MultipoleError::SemiedgeOutOfRange(j));
                    }
                    if j as usize == i || semiedges[j as usize] != Incidence::Mate(i as u32) {
                        return Err(MultipoleError::BadMate(i as u32));
                    }
                }
            }
        }
        let mut seen = BTreeSet::new();
        for conn in &connectors {
            for &s in conn {
                if s as usize >= semiedges.len() {
                    return Err(MultipoleError::SemiedgeOutOfRange(s));
                }
                if !seen.insert(s) {
                    return Err(MultipoleError::ConnectorOverlap(s));
                }
            }
        }
        let mut incident = vec![Vec::new(); vertex_count];
        for (i, &(u, v)) in edges.iter().enumerate() {
            incident[u as usize].push(ElementId::Edge(i as u32));
            incident[v as usize].push(ElementId::Edge(i as u32));
        }
        for (i, inc) in semiedges.iter().enumerate() {
            if let Incidence::Vertex(v) = *inc {
                incident[v as usize].push(ElementId::Semiedge(i as u32));
            }
        }
        Ok(Multipole {
            vertex_count,
            edges,
            semiedges,
            connectors,
            incident,
        })
    }

    /// A graph: multipole with an empty semiedge set.
    pub fn graph(vertex_count: usize, edges: Vec<(VertexId, VertexId)>) -> Result<Self, MultipoleError> {
        Multipole::new(vertex_count, edges, Vec::new(), Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn semiedge_count(&self) -> usize {
        self.semiedges.len()
    }

    /// Edges plus semiedges; the domain of an edge-coloring.
    pub fn element_count(&self) -> usize {
        self.edges.len() + self.semiedges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e as usize]
    }

    pub fn semiedges(&self) -> &[Incidence] {
        &self.semiedges
    }

    pub fn semiedge(&self, s: SemiedgeId) -> Incidence {
        self.semiedges[s as usize]
    }

    pub fn connectors(&self) -> &[Vec<SemiedgeId>] {
        &self.connectors
    }

    pub fn is_graph(&self) -> bool {
        self.semiedges.is_empty()
    }

    /// All elements incident to `v`, in insertion order.
    pub fn incident(&self, v: VertexId) -> &[ElementId] {
        &self.incident[v as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.edges.len() as u32)
            .map(ElementId::Edge)
            .chain((0..self.semiedges.len() as u32).map(ElementId::Semiedge))
    }

    /// The vertex a semiedge is attached to, if any.
    pub fn semiedge_vertex(&self, s: SemiedgeId) -> Option<VertexId> {
        match self.semiedges[s as usize] {
            Incidence::Vertex(v) => Some(v),
            Incidence::Mate(_) => None,
        }
    }

    /// Returns every violated structural invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for v in 0..self.vertex_count {
            let d = self.incident[v].len();
            if d != 3 {
                out.push(Violation::Degree {
                    vertex: v as u32,
                    degree: d,
                });
            }
        }
        for (i, inc) in self.semiedges.iter().enumerate() {
            if let Incidence::Mate(j) = *inc {
                let ok = j as usize != i && self.semiedges[j as usize] == Incidence::Mate(i as u32);
                if !ok {
                    out.push(Violation::MateNotInvolution { semiedge: i as u32 });
                }
            }
        }
        let mut seen = BTreeSet::new();
        for (ci, conn) in self.connectors.iter().enumerate() {
            if conn.is_empty() {
                out.push(Violation::ConnectorEmpty { connector: ci });
            }
            for &s in conn {
                if !seen.insert(s) {
                    out.push(Violation::ConnectorOverlap { semiedge: s });
                }
            }
        }
        out
    }

    /// FNV-1a over a canonical serialization; used to tie submultipoles and
    /// certificates to their origin.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.vertex_count as u64);
        eat(self.edges.len() as u64);
        for &(u, v) in &self.edges {
            eat(((u as u64) << 32) | v as u64);
        }
        eat(self.semiedges.len() as u64);
        for inc in &self.semiedges {
            match *inc {
                Incidence::Vertex(v) => eat(v as u64),
                Incidence::Mate(j) => eat((1u64 << 40) | j as u64),
            }
        }
        for conn in &self.connectors {
            eat(0xffff_ffff_ffff_fffe);
            for &s in conn {
                eat(s as u64);
            }
        }
        h
    }

    /// Neighbors of `v` through real edges (with multiplicity).
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        self.incident[v as usize]
            .iter()
            .filter_map(|el| match *el {
                ElementId::Edge(e) => {
                    let (a, b) = self.edges[e as usize];
                    Some(if a == v { b } else { a })
                }
                ElementId::Semiedge(_) => None,
            })
            .collect()
    }
}

/// Origin of a submultipole semiedge: inherited, or a half of an origin edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemiOrigin {
    Inherited(SemiedgeId),
    HalfOf(EdgeId),
}

/// A multipole extracted from an origin, with a name map back to it.
/// The map is what makes restriction and union well-defined.
#[derive(Debug, Clone)]
pub struct Submultipole {
    pub multipole: Multipole,
    pub origin_fingerprint: u64,
    /// new vertex -> origin vertex
    pub vertex_map: Vec<VertexId>,
    /// new edge -> origin edge
    pub edge_map: Vec<EdgeId>,
    /// new semiedge -> origin element
    pub semi_origin: Vec<SemiOrigin>,
}

impl Submultipole {
    /// Wraps a multipole as a (full) submultipole of itself.
    pub fn identity(m: &Multipole) -> Submultipole {
        Submultipole {
            origin_fingerprint: m.fingerprint(),
            vertex_map: (0..m.vertex_count() as u32).collect(),
            edge_map: (0..m.edge_count() as u32).collect(),
            semi_origin: (0..m.semiedge_count() as u32).map(SemiOrigin::Inherited).collect(),
            multipole: m.clone(),
        }
    }
}

/// Induced submultipole `M[T]`: vertices `T`, edges of `M` with both ends in
/// `T`, inherited semiedges attached in `T`, and halves of edges leaving `T`.
pub fn induced_submultipole(m: &Multipole, t: &BTreeSet<VertexId>) -> Result<Submultipole, MultipoleError> {
    for &v in t {
        if v as usize >= m.vertex_count() {
            return Err(MultipoleError::UnknownVertex(v));
        }
    }
    let vertex_map: Vec<VertexId> = t.iter().copied().collect();
    let new_id: BTreeMap<VertexId, u32> = vertex_map
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32))
        .collect();

    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    let mut semis = Vec::new();
    let mut semi_origin = Vec::new();
    for (i, &(u, v)) in m.edges().iter().enumerate() {
        match (new_id.get(&u), new_id.get(&v)) {
            (Some(&nu), Some(&nv)) => {
                edges.push((nu, nv));
                edge_map.push(i as u32);
            }
            (Some(&nu), None) => {
                semis.push(Incidence::Vertex(nu));
                semi_origin.push(SemiOrigin::HalfOf(i as u32));
            }
            (None, Some(&nv)) => {
                semis.push(Incidence::Vertex(nv));
                semi_origin.push(SemiOrigin::HalfOf(i as u32));
            }
            (None, None) => {}
        }
    }
    for (i, inc) in m.semiedges().iter().enumerate() {
        if let Incidence::Vertex(v) = *inc {
            if let Some(&nv) = new_id.get(&v) {
                semis.push(Incidence::Vertex(nv));
                semi_origin.push(SemiOrigin::Inherited(i as u32));
            }
        }
        // Mate-paired semiedges have no end-vertex in T, so an induced
        // submultipole never inherits isolated edges.
    }
    Ok(Submultipole {
        multipole: Multipole::new(t.len(), edges, semis, Vec::new())?,
        origin_fingerprint: m.fingerprint(),
        vertex_map,
        edge_map,
        semi_origin,
    })
}

/// Submultipole that keeps all vertices but halves the given edges.
pub fn halve_edges(m: &Multipole, cut: &BTreeSet<EdgeId>) -> Result<Submultipole, MultipoleError> {
    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    let mut semis = Vec::new();
    let mut semi_origin = Vec::new();
    for (i, &(u, v)) in m.edges().iter().enumerate() {
        if cut.contains(&(i as u32)) {
            semis.push(Incidence::Vertex(u));
            semi_origin.push(SemiOrigin::HalfOf(i as u32));
            semis.push(Incidence::Vertex(v));
            semi_origin.push(SemiOrigin::HalfOf(i as u32));
        } else {
            edges.push((u, v));
            edge_map.push(i as u32);
        }
    }
    // Inherited semiedges follow the halves, so mate indices shift uniformly.
    let shift = semis.len() as u32;
    for (i, inc) in m.semiedges().iter().enumerate() {
        let shifted = match *inc {
            Incidence::Vertex(v) => Incidence::Vertex(v),
            Incidence::Mate(j) => Incidence::Mate(j + shift),
        };
        semis.push(shifted);
        semi_origin.push(SemiOrigin::Inherited(i as u32));
    }
    Ok(Submultipole {
        multipole: Multipole::new(m.vertex_count(), edges, semis, Vec::new())?,
        origin_fingerprint: m.fingerprint(),
        vertex_map: (0..m.vertex_count() as u32).collect(),
        edge_map,
        semi_origin,
    })
}

/// Where a union element came from; drives compatibility checks on colorings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeProvenance {
    FromFirst(EdgeId),
    FromSecond(EdgeId),
    /// Two halves of one origin edge, one per part, rejoined.
    Joined {
        origin_edge: EdgeId,
        first_semi: SemiedgeId,
        second_semi: SemiedgeId,
    },
}

#[derive(Debug, Clone)]
pub struct UnionResult {
    pub sub: Submultipole,
    pub edge_provenance: Vec<EdgeProvenance>,
    /// new semiedge -> (part index 0/1, semiedge index in that part)
    pub semi_provenance: Vec<(usize, SemiedgeId)>,
    /// Edge counts of the two parts, for addressing part colorings.
    pub part_edge_counts: [usize; 2],
}

/// Union of two submultipoles of the same origin with disjoint vertex sets.
/// Halves of one origin edge, one in each part, fuse back into an edge.
pub fn union(m1: &Submultipole, m2: &Submultipole) -> Result<UnionResult, MultipoleError> {
    if m1.origin_fingerprint != m2.origin_fingerprint {
        return Err(MultipoleError::DifferentOrigins);
    }
    let set1: BTreeSet<VertexId> = m1.vertex_map.iter().copied().collect();
    for &v in &m2.vertex_map {
        if set1.contains(&v) {
            return Err(MultipoleError::OverlappingParts(v));
        }
    }
    let parts = [m1, m2];
    let offset = [0u32, m1.multipole.vertex_count() as u32];
    let vertex_map: Vec<VertexId> = m1
        .vertex_map
        .iter()
        .chain(m2.vertex_map.iter())
        .copied()
        .collect();

    let mut edges = Vec::new();
    let mut edge_map = Vec::new();
    let mut edge_provenance = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        for (i, &(u, v)) in part.multipole.edges().iter().enumerate() {
            edges.push((u + offset[pi], v + offset[pi]));
            edge_map.push(part.edge_map[i]);
            edge_provenance.push(if pi == 0 {
                EdgeProvenance::FromFirst(i as u32)
            } else {
                EdgeProvenance::FromSecond(i as u32)
            });
        }
    }

    // Match halves of the same origin edge across the two parts.
    let mut halves2: BTreeMap<EdgeId, Vec<SemiedgeId>> = BTreeMap::new();
    for (i, so) in m2.semi_origin.iter().enumerate() {
        if let SemiOrigin::HalfOf(e) = *so {
            halves2.entry(e).or_default().push(i as u32);
        }
    }
    let mut used2: BTreeSet<SemiedgeId> = BTreeSet::new();
    let mut used1: BTreeSet<SemiedgeId> = BTreeSet::new();
    for (i, so) in m1.semi_origin.iter().enumerate() {
        if let SemiOrigin::HalfOf(e) = *so {
            if let Some(cands) = halves2.get(&e) {
                if let Some(&j) = cands.iter().find(|j| !used2.contains(j)) {
                    used1.insert(i as u32);
                    used2.insert(j);
                    let u = match m1.multipole.semiedge(i as u32) {
                        Incidence::Vertex(v) => v + offset[0],
                        Incidence::Mate(_) => unreachable!("halves are vertex-attached"),
                    };
                    let v = match m2.multipole.semiedge(j) {
                        Incidence::Vertex(v) => v + offset[1],
                        Incidence::Mate(_) => unreachable!("halves are vertex-attached"),
                    };
                    edges.push((u, v));
                    edge_map.push(e);
                    edge_provenance.push(EdgeProvenance::Joined {
                        origin_edge: e,
                        first_semi: i as u32,
                        second_semi: j,
                    });
                }
            }
        }
    }

    let mut semis = Vec::new();
    let mut semi_origin = Vec::new();
    let mut semi_provenance = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        let used = if pi == 0 { &used1 } else { &used2 };
        // First pass: compute new indices of surviving semiedges for mates.
        let mut new_index = BTreeMap::new();
        for i in 0..part.multipole.semiedge_count() as u32 {
            if !used.contains(&i) {
                new_index.insert(i, (semis.len() + new_index.len()) as u32);
            }
        }
        for i in 0..part.multipole.semiedge_count() as u32 {
            if used.contains(&i) {
                continue;
            }
            let inc = match part.multipole.semiedge(i) {
                Incidence::Vertex(v) => Incidence::Vertex(v + offset[pi]),
                Incidence::Mate(j) => Incidence::Mate(new_index[&j]),
            };
            semis.push(inc);
            semi_origin.push(part.semi_origin[i as usize]);
            semi_provenance.push((pi, i));
        }
    }

    let vcount = vertex_map.len();
    Ok(UnionResult {
        sub: Submultipole {
            multipole: Multipole::new(vcount, edges, semis, Vec::new())?,
            origin_fingerprint: m1.origin_fingerprint,
            vertex_map,
            edge_map,
            semi_origin,
        },
        edge_provenance,
        semi_provenance,
        part_edge_counts: [m1.multipole.edge_count(), m2.multipole.edge_count()],
    })
}

/// Joins two connectors of disjoint multipoles with an explicit permutation:
/// semiedge `k` of `c1` is identified with semiedge `perm[k]` of `c2`.
/// Identification chains through isolated edges collapse to single edges.
pub fn join(
    m1: &Multipole,
    c1: usize,
    m2: &Multipole,
    c2: usize,
    perm: &[usize],
) -> Result<Multipole, MultipoleError> {
    if c1 >= m1.connectors().len() {
        return Err(MultipoleError::ConnectorOutOfRange(c1));
    }
    if c2 >= m2.connectors().len() {
        return Err(MultipoleError::ConnectorOutOfRange(c2));
    }
    let conn1 = &m1.connectors()[c1];
    let conn2 = &m2.connectors()[c2];
    if conn1.len() != conn2.len() {
        return Err(MultipoleError::ConnectorSizeMismatch(conn1.len(), conn2.len()));
    }
    let n = conn1.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(MultipoleError::BadPermutation(n));
        }
        seen[p] = true;
    }
    if perm.len() != n {
        return Err(MultipoleError::BadPermutation(n));
    }

    // Work on the disjoint union; semiedges of part 2 are offset.
    let voff = m1.vertex_count() as u32;
    let soff = m1.semiedge_count() as u32;
    let total_semis = m1.semiedge_count() + m2.semiedge_count();
    // link[s] = Some(t): s is identified with t (from the join).
    let mut link: Vec<Option<u32>> = vec![None; total_semis];
    for (k, &s1) in conn1.iter().enumerate() {
        let s2 = conn2[perm[k]] + soff;
        link[s1 as usize] = Some(s2);
        link[s2 as usize] = Some(s1);
    }
    let incidence = |s: u32| -> Incidence {
        if s < soff {
            m1.semiedge(s)
        } else {
            match m2.semiedge(s - soff) {
                Incidence::Vertex(v) => Incidence::Vertex(v + voff),
                Incidence::Mate(j) => Incidence::Mate(j + soff),
            }
        }
    };

    let mut edges: Vec<(u32, u32)> = m1.edges().to_vec();
    edges.extend(m2.edges().iter().map(|&(u, v)| (u + voff, v + voff)));

    // Each semiedge carries at most two links: its mate, and its join
    // identification. Components of the link structure are paths or cycles;
    // a path with an identification in it collapses, a cycle with one would
    // be a vertex-free loop.
    let mate_of = |s: u32| -> Option<u32> {
        match incidence(s) {
            Incidence::Mate(j) => Some(j),
            Incidence::Vertex(_) => None,
        }
    };
    #[derive(Clone, Copy, PartialEq)]
    enum End {
        AtVertex(u32),
        Free,
    }
    let mut visited = vec![false; total_semis];
    let mut consumed = vec![false; total_semis];
    // New semiedges created by collapsing chains, plus the chain-end ids they
    // replace (so connectors referencing an end can be remapped).
    let mut fresh: Vec<(Incidence, Vec<u32>)> = Vec::new();
    for start in 0..total_semis as u32 {
        if visited[start as usize] {
            continue;
        }
        let deg = mate_of(start).is_some() as usize + link[start as usize].is_some() as usize;
        if deg != 1 {
            continue; // interior node or untouched attached semiedge
        }
        // Trace the path from this endpoint.
        let mut chain = vec![start];
        let mut prev: Option<u32> = None;
        let mut cur = start;
        loop {
            let next = [mate_of(cur), link[cur as usize]]
                .into_iter()
                .flatten()
                .find(|&n| Some(n) != prev);
            match next {
                Some(n) => {
                    chain.push(n);
                    prev = Some(cur);
                    cur = n;
                }
                None => break,
            }
        }
        for &s in &chain {
            visited[s as usize] = true;
        }
        if chain.len() == 2 && link[start as usize].is_none() {
            continue; // plain isolated edge, untouched by the join
        }
        if link[start as usize].is_none() && chain.iter().all(|&s| link[s as usize].is_none()) {
            continue;
        }
        let classify = |s: u32| match incidence(s) {
            Incidence::Vertex(v) => End::AtVertex(v),
            Incidence::Mate(_) => End::Free,
        };
        let (a, b) = (classify(start), classify(cur));
        for &s in &chain {
            consumed[s as usize] = true;
        }
        match (a, b) {
            (End::AtVertex(u), End::AtVertex(v)) => edges.push((u, v)),
            (End::AtVertex(u), End::Free) => fresh.push((Incidence::Vertex(u), vec![cur])),
            (End::Free, End::AtVertex(v)) => fresh.push((Incidence::Vertex(v), vec![start])),
            (End::Free, End::Free) => {
                // The chain contracts to one isolated edge.
                fresh.push((Incidence::Mate(0), vec![start]));
                fresh.push((Incidence::Mate(0), vec![cur]));
            }
        }
    }
    // Anything unvisited with an identification link sits on a cycle.
    for s in 0..total_semis as u32 {
        if !visited[s as usize] && link[s as usize].is_some() {
            return Err(MultipoleError::VertexFreeLoop);
        }
    }

    // Surviving semiedges: unconsumed originals, then freshly created ones.
    let mut new_index: BTreeMap<u32, u32> = BTreeMap::new();
    for s in 0..total_semis as u32 {
        if !consumed[s as usize] {
            new_index.insert(s, new_index.len() as u32);
        }
    }
    let mut semis = Vec::new();
    for s in 0..total_semis as u32 {
        if consumed[s as usize] {
            continue;
        }
        let inc = match incidence(s) {
            Incidence::Vertex(v) => Incidence::Vertex(v),
            Incidence::Mate(j) => Incidence::Mate(new_index[&j]),
        };
        semis.push(inc);
    }
    let fresh_base = semis.len() as u32;
    for (fi, (inc, replaced)) in fresh.iter().enumerate() {
        let id = fresh_base + fi as u32;
        for &old in replaced {
            new_index.insert(old, id);
        }
        semis.push(*inc);
    }
    // Fix up mate pointers of fresh pairs: pairs were pushed consecutively.
    {
        let mut i = 0;
        while i < fresh.len() {
            if matches!(fresh[i].0, Incidence::Mate(_)) {
                let a = fresh_base + i as u32;
                let b = fresh_base + i as u32 + 1;
                semis[a as usize] = Incidence::Mate(b);
                semis[b as usize] = Incidence::Mate(a);
                i += 2;
            } else {
                i += 1;
            }
        }
    }

    // Remaining connectors (all except the two consumed by the join); chain
    // ends replaced by their collapsed successors, interior ids dropped.
    let mut connectors = Vec::new();
    for (ci, conn) in m1.connectors().iter().enumerate() {
        if ci != c1 {
            connectors.push(conn.iter().filter_map(|&s| new_index.get(&s).copied()).collect());
        }
    }
    for (ci, conn) in m2.connectors().iter().enumerate() {
        if ci != c2 {
            connectors.push(
                conn.iter()
                    .filter_map(|&s| new_index.get(&(s + soff)).copied())
                    .collect(),
            );
        }
    }

    Multipole::new(m1.vertex_count() + m2.vertex_count(), edges, semis, connectors)
}

/// True if the graph is connected and has no bridge. Requires `S = ∅`.
pub fn is_bridgeless(m: &Multipole) -> Result<bool, MultipoleError> {
    if !m.is_graph() {
        return Err(MultipoleError::NotAGraph);
    }
    let n = m.vertex_count();
    if n == 0 {
        return Ok(true);
    }
    // Iterative DFS computing low-links over edges (parallel edges are
    // distinct, so a doubled edge is never a bridge).
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![usize::MAX; n];
    let mut timer = 0usize;
    let mut stack: Vec<(u32, Option<EdgeId>, usize)> = vec![(0, None, 0)];
    let adj: Vec<Vec<(u32, EdgeId)>> = {
        let mut a = vec![Vec::new(); n];
        for (i, &(u, v)) in m.edges().iter().enumerate() {
            a[u as usize].push((v, i as u32));
            a[v as usize].push((u, i as u32));
        }
        a
    };
    disc[0] = timer;
    low[0] = timer;
    timer += 1;
    let mut visited_edges = 1usize;
    while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
        if *idx < adj[v as usize].len() {
            let (to, e) = adj[v as usize][*idx];
            *idx += 1;
            if Some(e) == pe {
                continue;
            }
            if disc[to as usize] == usize::MAX {
                disc[to as usize] = timer;
                low[to as usize] = timer;
                timer += 1;
                visited_edges += 1;
                stack.push((to, Some(e), 0));
            } else {
                low[v as usize] = low[v as usize].min(disc[to as usize]);
            }
        } else {
            stack.pop();
            if let Some(&(parent, _, _)) = stack.last() {
                if low[v as usize] > disc[parent as usize] {
                    return Ok(false); // bridge
                }
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
        }
    }
    let _ = visited_edges;
    Ok(disc.iter().all(|&d| d != usize::MAX))
}

/// Length of a shortest cycle, if any. Requires `S = ∅`.
pub fn girth(m: &Multipole) -> Result<Option<usize>, MultipoleError> {
    if !m.is_graph() {
        return Err(MultipoleError::NotAGraph);
    }
    // Parallel edges form a 2-cycle.
    let mut seen = BTreeSet::new();
    for &(u, v) in m.edges() {
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Ok(Some(2));
        }
    }
    let n = m.vertex_count();
    let mut best: Option<usize> = None;
    let adj: Vec<Vec<u32>> = (0..n as u32).map(|v| m.neighbors(v)).collect();
    for start in 0..n as u32 {
        // BFS from start; a non-tree edge closing at depths d1, d2 gives a
        // cycle through start of length d1 + d2 + 1.
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![u32::MAX; n];
        let mut q = std::collections::VecDeque::new();
        dist[start as usize] = 0;
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v as usize] {
                if dist[w as usize] == usize::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    parent[w as usize] = v;
                    q.push_back(w);
                } else if parent[v as usize] != w && parent[w as usize] != v {
                    let len = dist[v as usize] + dist[w as usize] + 1;
                    if best.map_or(true, |b| len < b) {
                        best = Some(len);
                    }
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleQuery {
    Length(usize),
    EvenCycle,
    OddCycle,
}

/// Finds a simple cycle matching the query, preferring shorter ones, or
/// reports absence. Deterministic. Requires `S = ∅`.
pub fn find_cycle(m: &Multipole, query: CycleQuery) -> Result<Option<Vec<VertexId>>, MultipoleError> {
    if !m.is_graph() {
        return Err(MultipoleError::NotAGraph);
    }
    let n = m.vertex_count();
    let lengths: Vec<usize> = match query {
        CycleQuery::Length(l) => vec![l],
        CycleQuery::EvenCycle => (2..=n).filter(|l| l % 2 == 0).collect(),
        CycleQuery::OddCycle => (3..=n).filter(|l| l % 2 == 1).collect(),
    };
    let adj: Vec<Vec<u32>> = (0..n as u32).map(|v| m.neighbors(v)).collect();
    for len in lengths {
        if len < 2 || len > n {
            continue;
        }
        // DFS for a path start..=last with last adjacent to start, canonical:
        // start is the smallest vertex on the cycle.
        fn dfs(
            adj: &[Vec<u32>],
            start: u32,
            path: &mut Vec<u32>,
            on_path: &mut Vec<bool>,
            target: usize,
        ) -> bool {
            if path.len() == target {
                let last = *path.last().expect("nonempty");
                return adj[last as usize].contains(&start)
                    // Length-2 cycles need two distinct parallel edges.
                    && (target > 2 || adj[last as usize].iter().filter(|&&w| w == start).count() >= 2);
            }
            let cur = *path.last().expect("nonempty");
            let mut tried = BTreeSet::new();
            for &w in &adj[cur as usize] {
                if w <= start || on_path[w as usize] || !tried.insert(w) {
                    continue;
                }
                path.push(w);
                on_path[w as usize] = true;
                if dfs(adj, start, path, on_path, target) {
                    return true;
                }
                on_path[w as usize] = false;
                path.pop();
            }
            false
        }
        for start in 0..n as u32 {
            let mut path = vec![start];
            let mut on_path = vec![false; n];
            on_path[start as usize] = true;
            if dfs(&adj, start, &mut path, &mut on_path, len) {
                return Ok(Some(path));
            }
        }
    }
    Ok(None)
}

/// All simple cycles of the given length, as canonical vertex sequences
/// (smallest vertex first, smaller neighbor second).
pub fn cycles_of_length(m: &Multipole, len: usize) -> Result<Vec<Vec<VertexId>>, MultipoleError> {
    if !m.is_graph() {
        return Err(MultipoleError::NotAGraph);
    }
    let n = m.vertex_count();
    let adj: Vec<Vec<u32>> = (0..n as u32).map(|v| m.neighbors(v)).collect();
    let mut out = Vec::new();
    fn dfs(
        adj: &[Vec<u32>],
        start: u32,
        path: &mut Vec<u32>,
        on_path: &mut Vec<bool>,
        target: usize,
        out: &mut Vec<Vec<u32>>,
    ) {
        if path.len() == target {
            let last = *path.last().expect("nonempty");
            if adj[last as usize].contains(&start) && path[1] < last {
                out.push(path.clone());
            }
            return;
        }
        let cur = *path.last().expect("nonempty");
        let mut tried = BTreeSet::new();
        for &w in &adj[cur as usize] {
            if w <= start || on_path[w as usize] || !tried.insert(w) {
                continue;
            }
            path.push(w);
            on_path[w as usize] = true;
            dfs(adj, start, path, on_path, target, out);
            on_path[w as usize] = false;
            path.pop();
        }
    }
    for start in 0..n as u32 {
        let mut path = vec![start];
        let mut on_path = vec![false; n];
        on_path[start as usize] = true;
        dfs(&adj, start, &mut path, &mut on_path, len, &mut out);
    }
    Ok(out)
}

/// Edge ids along a vertex cycle; picks distinct edges for parallel pairs.
pub fn cycle_edges(m: &Multipole, cycle: &[VertexId]) -> Option<Vec<EdgeId>> {
    let g = cycle.len();
    let mut used = BTreeSet::new();
    let mut out = Vec::with_capacity(g);
    for i in 0..g {
        let (u, v) = (cycle[i], cycle[(i + 1) % g]);
        let e = (0..m.edge_count() as u32).find(|&e| {
            let (a, b) = m.edge(e);
            ((a, b) == (u, v) || (a, b) == (v, u)) && !used.contains(&e)
        })?;
        used.insert(e);
        out.push(e);
    }
    Some(out)
}

// ---- JSON interchange ----------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SemiedgeJson {
    Vertex { id: u32, vertex: u32 },
    Mate { id: u32, mate: u32 },
}

/// On-disk multipole format:
/// `{"vertices": n, "edges": [[u,v],...], "semiedges": [{"id":k,"vertex":v}|{"id":k,"mate":j}], "connectors": [[ids...],...]}`
#[derive(Serialize, Deserialize)]
struct MultipoleJson {
    vertices: usize,
    edges: Vec<(u32, u32)>,
    semiedges: Vec<SemiedgeJson>,
    connectors: Vec<Vec<u32>>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("semiedge ids must be exactly 0..{expected}, got {got}")]
    SemiedgeIds { expected: usize, got: u32 },
    #[error("structure: {0}")]
    Structure(#[from] MultipoleError),
}

impl Multipole {
    pub fn to_json(&self) -> serde_json::Value {
        let semiedges = self
            .semiedges
            .iter()
            .enumerate()
            .map(|(i, inc)| match *inc {
                Incidence::Vertex(v) => SemiedgeJson::Vertex { id: i as u32, vertex: v },
                Incidence::Mate(j) => SemiedgeJson::Mate { id: i as u32, mate: j },
            })
            .collect();
        serde_json::to_value(MultipoleJson {
            vertices: self.vertex_count,
            edges: self.edges.clone(),
            semiedges,
            connectors: self.connectors.clone(),
        })
        .expect("serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Multipole, FormatError> {
        let raw: MultipoleJson = serde_json::from_value(value.clone())?;
        let mut semis = vec![None; raw.semiedges.len()];
        for s in &raw.semiedges {
            let (id, inc) = match *s {
                SemiedgeJson::Vertex { id, vertex } => (id, Incidence::Vertex(vertex)),
                SemiedgeJson::Mate { id, mate } => (id, Incidence::Mate(mate)),
            };
            if id as usize >= semis.len() || semis[id as usize].is_some() {
                return Err(FormatError::SemiedgeIds {
                    expected: raw.semiedges.len(),
                    got: id,
                });
            }
            semis[id as usize] = Some(inc);
        }
        let semis: Vec<Incidence> = semis.into_iter().map(|s| s.expect("filled")).collect();
        Ok(Multipole::new(raw.vertices, raw.edges, semis, raw.connectors)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod() -> Multipole {
        Multipole::new(
            1,
            vec![],
            vec![Incidence::Vertex(0); 3],
            vec![vec![0, 1, 2]],
        )
        .expect("valid")
    }

    #[test]
    fn tripod_is_valid() {
        assert!(tripod().validate().is_empty());
    }

    #[test]
    fn degree_two_vertex_is_flagged() {
        let m = Multipole::new(1, vec![], vec![Incidence::Vertex(0); 2], vec![]).expect("constructible");
        assert_eq!(
            m.validate(),
            vec![Violation::Degree { vertex: 0, degree: 2 }]
        );
    }

    #[test]
    fn degree_sum_identity() {
        let m = tripod();
        let attached = m
            .semiedges()
            .iter()
            .filter(|i| matches!(i, Incidence::Vertex(_)))
            .count();
        assert_eq!(3 * m.vertex_count(), 2 * m.edge_count() + attached);
    }

    /// Path multipole u1-u2-u3-u4 with pendants v2 at u2 and v4 at u4;
    /// free incidences filled with semiedges to make it cubic.
    fn path_multipole() -> Multipole {
        // vertices: u1=0, u2=1, u3=2, u4=3, v2=4, v4=5
        Multipole::new(
            6,
            vec![(0, 1), (1, 2), (2, 3), (1, 4), (3, 5)],
            vec![
                Incidence::Vertex(0), // s1
                Incidence::Vertex(0),
                Incidence::Vertex(2),
                Incidence::Vertex(3),
                Incidence::Vertex(4), // s1'
                Incidence::Vertex(4),
                Incidence::Vertex(5),
                Incidence::Vertex(5),
            ],
            vec![],
        )
        .expect("valid")
    }

    #[test]
    fn induced_submultipole_halves_boundary_edges() {
        let m = path_multipole();
        let t: BTreeSet<u32> = [0u32, 1, 4].into_iter().collect();
        let sub = induced_submultipole(&m, &t).expect("subset ok");
        assert_eq!(sub.multipole.vertex_count(), 3);
        assert_eq!(sub.multipole.edge_count(), 2); // u1u2, u2v2
        assert_eq!(sub.multipole.semiedge_count(), 5); // 4 inherited + half of u2u3
        let halves: Vec<_> = sub
            .semi_origin
            .iter()
            .filter(|o| matches!(o, SemiOrigin::HalfOf(_)))
            .collect();
        assert_eq!(halves.len(), 1);
        assert!(sub.multipole.validate().is_empty());
    }

    #[test]
    fn induced_on_all_vertices_is_identity() {
        let m = path_multipole();
        let t: BTreeSet<u32> = (0..6).collect();
        let sub = induced_submultipole(&m, &t).expect("ok");
        assert_eq!(sub.multipole.vertex_count(), m.vertex_count());
        assert_eq!(sub.multipole.edge_count(), m.edge_count());
        assert_eq!(sub.multipole.semiedge_count(), m.semiedge_count());
    }

    #[test]
    fn induced_on_empty_set_is_empty() {
        let m = path_multipole();
        let sub = induced_submultipole(&m, &BTreeSet::new()).expect("ok");
        assert_eq!(sub.multipole.vertex_count(), 0);
        assert_eq!(sub.multipole.element_count(), 0);
    }

    #[test]
    fn induced_rejects_unknown_vertex() {
        let m = path_multipole();
        let t: BTreeSet<u32> = [99u32].into_iter().collect();
        assert_eq!(
            induced_submultipole(&m, &t).unwrap_err(),
            MultipoleError::UnknownVertex(99)
        );
    }

    #[test]
    fn union_restores_shared_edge() {
        let m = path_multipole();
        let t1: BTreeSet<u32> = [0u32, 1, 4].into_iter().collect();
        let t2: BTreeSet<u32> = [2u32, 3, 5].into_iter().collect();
        let m1 = induced_submultipole(&m, &t1).expect("ok");
        let m2 = induced_submultipole(&m, &t2).expect("ok");
        let u = union(&m1, &m2).expect("disjoint parts");
        assert_eq!(u.sub.multipole.vertex_count(), 6);
        assert_eq!(u.sub.multipole.edge_count(), 5);
        assert_eq!(u.sub.multipole.semiedge_count(), 8);
        assert!(u
            .edge_provenance
            .iter()
            .any(|p| matches!(p, EdgeProvenance::Joined { .. })));
        // union(M[T1], M[T2]) = M[T1 ∪ T2] = M here.
        let ids: BTreeSet<(u32, u32)> = u
            .sub
            .multipole
            .edges()
            .iter()
            .map(|&(a, b)| {
                let (oa, ob) = (u.sub.vertex_map[a as usize], u.sub.vertex_map[b as usize]);
                (oa.min(ob), oa.max(ob))
            })
            .collect();
        let orig: BTreeSet<(u32, u32)> = m
            .edges()
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        assert_eq!(ids, orig);
    }

    #[test]
    fn union_with_empty_part_is_identity() {
        let m = path_multipole();
        let all: BTreeSet<u32> = (0..6).collect();
        let m1 = induced_submultipole(&m, &all).expect("ok");
        let m2 = induced_submultipole(&m, &BTreeSet::new()).expect("ok");
        let u = union(&m1, &m2).expect("ok");
        assert_eq!(u.sub.multipole.vertex_count(), m.vertex_count());
        assert_eq!(u.sub.multipole.edge_count(), m.edge_count());
        assert_eq!(u.sub.multipole.semiedge_count(), m.semiedge_count());
    }

    #[test]
    fn union_rejects_overlapping_parts() {
        let m = path_multipole();
        let t1: BTreeSet<u32> = [0u32, 1].into_iter().collect();
        let t2: BTreeSet<u32> = [1u32, 2].into_iter().collect();
        let m1 = induced_submultipole(&m, &t1).expect("ok");
        let m2 = induced_submultipole(&m, &t2).expect("ok");
        assert_eq!(
            union(&m1, &m2).unwrap_err(),
            MultipoleError::OverlappingParts(1)
        );
    }

    #[test]
    fn join_two_tripods_gives_theta() {
        let theta = join(&tripod(), 0, &tripod(), 0, &[0, 1, 2]).expect("ok");
        assert_eq!(theta.vertex_count(), 2);
        assert_eq!(theta.edge_count(), 3);
        assert_eq!(theta.semiedge_count(), 0);
        assert!(theta.validate().is_empty());
        assert_eq!(girth(&theta).expect("graph"), Some(2));
    }

    #[test]
    fn join_splices_through_isolated_edge() {
        // Isolated edge as a 2-connector pair of 1-connectors.
        let iso = Multipole::new(
            0,
            vec![],
            vec![Incidence::Mate(1), Incidence::Mate(0)],
            vec![vec![0], vec![1]],
        )
        .expect("valid");
        // Tripod with separate 1-connectors so joins can be chained.
        let tri = Multipole::new(
            1,
            vec![],
            vec![Incidence::Vertex(0); 3],
            vec![vec![0], vec![1], vec![2]],
        )
        .expect("valid");
        let half = join(&tri, 0, &iso, 0, &[0]).expect("ok");
        // half: one vertex, a dangling chain ending in the ex-mate semiedge.
        let joined = join(&half, half.connectors().len() - 1, &tri, 0, &[0]).expect("ok");
        assert_eq!(joined.vertex_count(), 2);
        assert_eq!(joined.edge_count(), 1);
        assert_eq!(joined.semiedge_count(), 4);
        assert!(joined.validate().is_empty());
    }

    #[test]
    fn join_splices_two_isolated_edges_into_one() {
        let iso = Multipole::new(
            0,
            vec![],
            vec![Incidence::Mate(1), Incidence::Mate(0)],
            vec![vec![0], vec![1]],
        )
        .expect("valid");
        let chained = join(&iso, 0, &iso, 1, &[0]).expect("ok");
        assert_eq!(chained.vertex_count(), 0);
        assert_eq!(chained.edge_count(), 0);
        assert_eq!(chained.semiedge_count(), 2);
        assert!(matches!(chained.semiedge(0), Incidence::Mate(1)));
    }

    #[test]
    fn join_rejects_vertex_free_loop() {
        // Both semiedges of each isolated edge in a single 2-connector; the
        // identity join closes the two chains into a vertex-free cycle.
        let iso = Multipole::new(
            0,
            vec![],
            vec![Incidence::Mate(1), Incidence::Mate(0)],
            vec![vec![0, 1]],
        )
        .expect("valid");
        assert_eq!(
            join(&iso, 0, &iso, 0, &[0, 1]).unwrap_err(),
            MultipoleError::VertexFreeLoop
        );
    }

    #[test]
    fn join_size_mismatch() {
        let tri = Multipole::new(
            1,
            vec![],
            vec![Incidence::Vertex(0); 3],
            vec![vec![0, 1], vec![2]],
        )
        .expect("valid");
        assert_eq!(
            join(&tri, 0, &tri, 1, &[0]).unwrap_err(),
            MultipoleError::ConnectorSizeMismatch(2, 1)
        );
    }

    #[test]
    fn json_round_trip() {
        let m = path_multipole();
        let v = m.to_json();
        let back = Multipole::from_json(&v).expect("parse");
        assert_eq!(m, back);
    }
}
