//! Fixed, labeled constructions used throughout: the Petersen graph, its
//! one-vertex truncation, the superedge `B` (Petersen minus two non-adjacent
//! vertices) with its paths `P`, `Q` and level-swap isomorphism `I`, the
//! supervertices `A` and `A'`, and a few named snarks for probing.

use crate::coloring::{Color, EdgeColoring};
use crate::multipole::{ElementId, Incidence, Multipole, SemiedgeId, VertexId};

/// Petersen graph: outer cycle 0-1-2-3-4, inner pentagram on 5..9 (i ~ i+2),
/// spokes i -> i+5.
pub fn petersen() -> Multipole {
    let mut edges = Vec::with_capacity(15);
    for i in 0..5u32 {
        edges.push((i, (i + 1) % 5)); // outer
    }
    for i in 0..5u32 {
        edges.push((i, i + 5)); // spokes
    }
    for i in 0..5u32 {
        edges.push((5 + i, 5 + (i + 2) % 5)); // inner
    }
    Multipole::graph(10, edges).expect("fixed construction")
}

/// Petersen graph with vertex 0 truncated: the vertex is replaced by a
/// triangle 9,10,11 (after shifting 1..9 down to 0..8), each triangle vertex
/// inheriting one former incidence.
pub fn petersen_truncated() -> Multipole {
    let p = petersen();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for &(u, v) in p.edges() {
        if u != 0 && v != 0 {
            edges.push((u - 1, v - 1));
        }
    }
    // 0's neighbors in order (1, 4, 5) inherit triangle vertices 9, 10, 11.
    edges.push((9, 0)); // ex-1
    edges.push((10, 3)); // ex-4
    edges.push((11, 4)); // ex-5
    edges.push((9, 10));
    edges.push((10, 11));
    edges.push((9, 11));
    Multipole::graph(12, edges).expect("fixed construction")
}

/// Vertex names inside the superedge `B`.
pub const B_A: VertexId = 0;
pub const B_B: VertexId = 1;
pub const B_C: VertexId = 2;
pub const B_D: VertexId = 3;
pub const B_E: VertexId = 4;
pub const B_F: VertexId = 5;
pub const B_G: VertexId = 6;
pub const B_H: VertexId = 7;

/// Edge order of `B`: ab, bf, fh, cd, cf, be, de, eg, gh.
pub const B_EDGES: [(VertexId, VertexId); 9] = [
    (B_A, B_B),
    (B_B, B_F),
    (B_F, B_H),
    (B_C, B_D),
    (B_C, B_F),
    (B_B, B_E),
    (B_D, B_E),
    (B_E, B_G),
    (B_G, B_H),
];

/// Semiedge names inside `B`: left connector at (a, c, g), right at (a, d, h).
pub const B_LEFT_A: SemiedgeId = 0;
pub const B_LEFT_C: SemiedgeId = 1;
pub const B_LEFT_G: SemiedgeId = 2;
pub const B_RIGHT_A: SemiedgeId = 3; // s1
pub const B_RIGHT_D: SemiedgeId = 4; // s2
pub const B_RIGHT_H: SemiedgeId = 5; // s3

/// The superedge `B` with its two connectors, distinguished paths, and the
/// level-swap isomorphism.
#[derive(Debug, Clone)]
pub struct SuperedgeB {
    pub multipole: Multipole,
    /// Path s1, ab, bf, fh, s3.
    pub path_p: Vec<ElementId>,
    /// Path s2, dc, cf, fh, s3.
    pub path_q: Vec<ElementId>,
    /// Vertex permutation (c g)(d h)(e f), fixing a and b.
    pub iso: [VertexId; 8],
}

/// Builds `B`: eight vertices a..h, nine edges, six semiedges; adding one
/// vertex on each connector reconstructs the Petersen graph. The structure is
/// self-checked at construction.
pub fn superedge_b() -> SuperedgeB {
    let multipole = Multipole::new(
        8,
        B_EDGES.to_vec(),
        vec![
            Incidence::Vertex(B_A),
            Incidence::Vertex(B_C),
            Incidence::Vertex(B_G),
            Incidence::Vertex(B_A),
            Incidence::Vertex(B_D),
            Incidence::Vertex(B_H),
        ],
        vec![
            vec![B_LEFT_A, B_LEFT_C, B_LEFT_G],
            vec![B_RIGHT_A, B_RIGHT_D, B_RIGHT_H],
        ],
    )
    .expect("fixed construction");

    let edge_id = |u: VertexId, v: VertexId| -> ElementId {
        let e = B_EDGES
            .iter()
            .position(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
            .expect("edge of B");
        ElementId::Edge(e as u32)
    };
    let path_p = vec![
        ElementId::Semiedge(B_RIGHT_A),
        edge_id(B_A, B_B),
        edge_id(B_B, B_F),
        edge_id(B_F, B_H),
        ElementId::Semiedge(B_RIGHT_H),
    ];
    let path_q = vec![
        ElementId::Semiedge(B_RIGHT_D),
        edge_id(B_D, B_C),
        edge_id(B_C, B_F),
        edge_id(B_F, B_H),
        ElementId::Semiedge(B_RIGHT_H),
    ];
    let iso = [B_A, B_B, B_G, B_H, B_F, B_E, B_C, B_D];

    let b = SuperedgeB {
        multipole,
        path_p,
        path_q,
        iso,
    };
    debug_assert!(b.self_check());
    b
}

impl SuperedgeB {
    /// Image of a semiedge under `I`: the connectors map to themselves with
    /// c-g and d-h positions exchanged.
    pub fn iso_semiedge(&self, s: SemiedgeId) -> SemiedgeId {
        match s {
            B_LEFT_A => B_LEFT_A,
            B_LEFT_C => B_LEFT_G,
            B_LEFT_G => B_LEFT_C,
            B_RIGHT_A => B_RIGHT_A,
            B_RIGHT_D => B_RIGHT_H,
            B_RIGHT_H => B_RIGHT_D,
            _ => unreachable!("B has six semiedges"),
        }
    }

    /// Image of an edge under `I`, as an edge id.
    pub fn iso_edge(&self, e: u32) -> u32 {
        let (u, v) = B_EDGES[e as usize];
        let (iu, iv) = (self.iso[u as usize], self.iso[v as usize]);
        B_EDGES
            .iter()
            .position(|&(a, b)| (a, b) == (iu, iv) || (a, b) == (iv, iu))
            .expect("I preserves edges") as u32
    }

    /// Structural self-check: `I` preserves edges and connectors, `P` and `Q`
    /// are paths with the required elements, and rejoining two vertices on
    /// the connectors yields a Petersen-isomorphic graph.
    pub fn self_check(&self) -> bool {
        for e in 0..9 {
            let _ = self.iso_edge(e); // panics if not edge-preserving
        }
        let ends = |p: &[ElementId]| {
            matches!(p.first(), Some(ElementId::Semiedge(_)))
                && matches!(p.last(), Some(ElementId::Semiedge(_)))
        };
        if !ends(&self.path_p) || !ends(&self.path_q) {
            return false;
        }
        let rejoined = self.rejoin();
        crate::iso::are_isomorphic(&rejoined, &petersen())
    }

    /// Adds a vertex adjacent to the left-connector attachments and one
    /// adjacent to the right-connector attachments.
    pub fn rejoin(&self) -> Multipole {
        let mut edges = B_EDGES.to_vec();
        let u1 = 8u32;
        let u2 = 9u32;
        for &s in &self.multipole.connectors()[0] {
            let v = self.multipole.semiedge_vertex(s).expect("attached");
            edges.push((u1, v));
        }
        for &s in &self.multipole.connectors()[1] {
            let v = self.multipole.semiedge_vertex(s).expect("attached");
            edges.push((u2, v));
        }
        Multipole::graph(10, edges).expect("fixed construction")
    }
}

/// Pullback of a coloring of `B` along `I`: `I(c)(x) = c(I^{-1}(x))`; since
/// `I` is an involution this is also pushforward.
pub fn apply_iso(b: &SuperedgeB, c: &EdgeColoring) -> EdgeColoring {
    let m = &b.multipole;
    let mut colors = vec![Color(0); m.element_count()];
    for e in 0..m.edge_count() as u32 {
        colors[e as usize] = c.get(m, ElementId::Edge(b.iso_edge(e)));
    }
    for s in 0..m.semiedge_count() as u32 {
        colors[m.edge_count() + s as usize] =
            c.get(m, ElementId::Semiedge(b.iso_semiedge(s)));
    }
    EdgeColoring::new(m, c.k, colors).expect("permutation of a total coloring")
}

/// Supervertex `A`: one vertex with three attached semiedges plus two
/// isolated edges; connectors (3,3,1).
pub fn supervertex_a() -> Multipole {
    Multipole::new(
        1,
        vec![],
        vec![
            Incidence::Vertex(0), // 0: u left
            Incidence::Mate(4),   // 1: iso1 left
            Incidence::Mate(5),   // 2: iso2 left
            Incidence::Vertex(0), // 3: u right
            Incidence::Mate(1),   // 4: iso1 right
            Incidence::Mate(2),   // 5: iso2 right
            Incidence::Vertex(0), // 6: u third
        ],
        vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]],
    )
    .expect("fixed construction")
}

/// Supervertex `A'`: three vertices u, u', u'' with the edge u'u'';
/// connectors (3,3,1).
pub fn supervertex_a_prime() -> Multipole {
    Multipole::new(
        3,
        vec![(1, 2)],
        vec![
            Incidence::Vertex(0), // 0: u left
            Incidence::Vertex(1), // 1: u' left
            Incidence::Vertex(2), // 2: u'' left
            Incidence::Vertex(0), // 3: u right
            Incidence::Vertex(1), // 4: u' right
            Incidence::Vertex(2), // 5: u'' right
            Incidence::Vertex(0), // 6: u third
        ],
        vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]],
    )
    .expect("fixed construction")
}

/// Cube graph Q3 (vertices are 3-bit strings, edges flip one bit).
pub fn cube_q3() -> Multipole {
    let mut edges = Vec::new();
    for v in 0u32..8 {
        for bit in 0..3 {
            let w = v ^ (1 << bit);
            if v < w {
                edges.push((v, w));
            }
        }
    }
    Multipole::graph(8, edges).expect("fixed construction")
}

/// Complete graph on four vertices.
pub fn k4() -> Multipole {
    Multipole::graph(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).expect("fixed construction")
}

/// Dot product of two Petersen copies: remove the independent edges `e1`,
/// `e2` from the first copy, remove the adjacent vertices 0, 1 from the
/// second, and reconnect the loose ends.
fn petersen_dot_product(e1: (u32, u32), e2: (u32, u32)) -> Multipole {
    let p = petersen();
    let mut edges: Vec<(u32, u32)> = p
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| {
            let n = (u.min(v), u.max(v));
            n != (e1.0.min(e1.1), e1.0.max(e1.1)) && n != (e2.0.min(e2.1), e2.0.max(e2.1))
        })
        .collect();
    // Second copy minus vertices 0 and 1; remaining vertices 2..9 map to
    // 10..17 (offset 8).
    let map = |v: u32| v + 8;
    for &(u, v) in p.edges() {
        if u >= 2 && v >= 2 {
            edges.push((map(u), map(v)));
        }
    }
    // 0's other neighbors (4, 5); 1's other neighbors (2, 6).
    edges.push((e1.0, map(4)));
    edges.push((e1.1, map(5)));
    edges.push((e2.0, map(2)));
    edges.push((e2.1, map(6)));
    Multipole::graph(18, edges).expect("fixed construction")
}

/// First Blanuša snark (automorphism group of order 8).
pub fn blanusa_first() -> Multipole {
    petersen_dot_product((0, 1), (7, 9))
}

/// Second Blanuša snark (automorphism group of order 4).
pub fn blanusa_second() -> Multipole {
    petersen_dot_product((0, 1), (2, 3))
}

/// Flower snark J5: five stars, the hub tips chained into a 5-cycle and a
/// 10-cycle.
pub fn flower_j5() -> Multipole {
    let n = 5u32;
    let a = |i: u32| 4 * (i % n);
    let hub = |i: u32| 4 * (i % n) + 1;
    let c = |i: u32| 4 * (i % n) + 2;
    let d = |i: u32| 4 * (i % n) + 3;
    let mut edges = Vec::new();
    for i in 0..n {
        edges.push((hub(i), a(i)));
        edges.push((hub(i), c(i)));
        edges.push((hub(i), d(i)));
        edges.push((a(i), a(i + 1)));
    }
    for i in 0..n - 1 {
        edges.push((c(i), c(i + 1)));
        edges.push((d(i), d(i + 1)));
    }
    edges.push((c(n - 1), d(0)));
    edges.push((d(n - 1), c(0)));
    Multipole::graph(20, edges).expect("fixed construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipole::{girth, is_bridgeless};

    #[test]
    fn petersen_counts_and_girth() {
        let p = petersen();
        assert_eq!(p.vertex_count(), 10);
        assert_eq!(p.edge_count(), 15);
        assert!(p.validate().is_empty());
        assert_eq!(girth(&p).expect("graph"), Some(5));
        assert!(is_bridgeless(&p).expect("graph"));
    }

    #[test]
    fn petersen_strongly_regular() {
        // Non-adjacent pairs share exactly one neighbor; adjacent share none.
        let p = petersen();
        for u in 0..10u32 {
            for v in 0..u {
                let nu: std::collections::BTreeSet<u32> = p.neighbors(u).into_iter().collect();
                let nv: std::collections::BTreeSet<u32> = p.neighbors(v).into_iter().collect();
                let common = nu.intersection(&nv).count();
                if nu.contains(&v) {
                    assert_eq!(common, 0, "adjacent {u},{v}");
                } else {
                    assert_eq!(common, 1, "non-adjacent {u},{v}");
                }
            }
        }
    }

    #[test]
    fn truncation_counts() {
        let t = petersen_truncated();
        assert_eq!(t.vertex_count(), 12);
        assert_eq!(t.edge_count(), 18);
        assert!(t.validate().is_empty());
        assert_eq!(girth(&t).expect("graph"), Some(3));
        let triangles = crate::multipole::cycles_of_length(&t, 3).expect("graph");
        assert_eq!(triangles.len(), 1);
    }

    #[test]
    fn superedge_counts_and_paths() {
        let b = superedge_b();
        assert_eq!(b.multipole.vertex_count(), 8);
        assert_eq!(b.multipole.edge_count(), 9);
        assert_eq!(b.multipole.semiedge_count(), 6);
        assert!(b.multipole.validate().is_empty());
        // P and Q share the suffix fh, s3.
        let pl = b.path_p.len();
        let ql = b.path_q.len();
        assert_eq!(&b.path_p[pl - 2..], &b.path_q[ql - 2..]);
    }

    #[test]
    fn superedge_rejoins_to_petersen() {
        let b = superedge_b();
        assert!(crate::iso::are_isomorphic(&b.rejoin(), &petersen()));
        // The two added vertices are non-adjacent by construction (no edge
        // was added between them).
    }

    #[test]
    fn iso_maps_cf_to_ge_and_is_involution() {
        let b = superedge_b();
        let cf = B_EDGES
            .iter()
            .position(|&e| e == (B_C, B_F))
            .expect("cf edge") as u32;
        let (u, v) = B_EDGES[b.iso_edge(cf) as usize];
        assert!((u, v) == (B_E, B_G) || (u, v) == (B_G, B_E));
        for e in 0..9 {
            assert_eq!(b.iso_edge(b.iso_edge(e)), e);
        }
        for s in 0..6 {
            assert_eq!(b.iso_semiedge(b.iso_semiedge(s)), s);
        }
    }

    #[test]
    fn supervertices_validate_as_7_poles() {
        for m in [supervertex_a(), supervertex_a_prime()] {
            assert_eq!(m.semiedge_count(), 7);
            assert!(m.validate().is_empty());
            let sizes: Vec<usize> = m.connectors().iter().map(|c| c.len()).collect();
            assert_eq!(sizes, vec![3, 3, 1]);
        }
        assert_eq!(supervertex_a().vertex_count(), 1);
        assert_eq!(supervertex_a().edge_count(), 0);
        assert_eq!(supervertex_a_prime().vertex_count(), 3);
        assert_eq!(supervertex_a_prime().edge_count(), 1);
    }

    #[test]
    fn named_snark_shapes() {
        for (g, n, girth_want) in [
            (blanusa_first(), 18, 5),
            (blanusa_second(), 18, 5),
            (flower_j5(), 20, 5),
        ] {
            assert_eq!(g.vertex_count(), n);
            assert!(g.validate().is_empty());
            assert!(is_bridgeless(&g).expect("graph"));
            assert_eq!(girth(&g).expect("graph"), Some(girth_want));
        }
        assert!(!crate::iso::are_isomorphic(&blanusa_first(), &blanusa_second()));
    }
}
