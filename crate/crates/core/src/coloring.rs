//! Edge-colorings of multipoles: properness, the poor/rich/abnormal edge
//! classification, normality, restriction and compatibility, complete colors,
//! Kempe chains, and canonical forms under color permutation.
//!
//! Colors are `1..=k` over edges *and* semiedges; the two semiedges of an
//! isolated edge always carry the same color.

use crate::multipole::{
    EdgeId, ElementId, Incidence, Multipole, SemiOrigin, SemiedgeId, Submultipole, UnionResult,
};
use thiserror::Error;

/// A palette color, `1..=k` with `k <= 5` in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color(pub u8);

/// Set of colors as a bitmask (bit `c` for color `c`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ColorSet(pub u8);

impl ColorSet {
    pub fn empty() -> Self {
        ColorSet(0)
    }
    pub fn full(k: u8) -> Self {
        ColorSet(((1u16 << (k + 1)) - 2) as u8)
    }
    pub fn insert(&mut self, c: Color) {
        self.0 |= 1 << c.0;
    }
    pub fn contains(&self, c: Color) -> bool {
        self.0 & (1 << c.0) != 0
    }
    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
    pub fn union(&self, other: ColorSet) -> ColorSet {
        ColorSet(self.0 | other.0)
    }
    pub fn intersection(&self, other: ColorSet) -> ColorSet {
        ColorSet(self.0 & other.0)
    }
    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        (1..=7u8).filter(|c| self.0 & (1 << c) != 0).map(Color)
    }
    pub fn from_colors(cs: &[Color]) -> ColorSet {
        let mut s = ColorSet::empty();
        for &c in cs {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("assignment is partial: element {0:?} has no color")]
    Partial(ElementId),
    #[error("coloring is not proper at vertex {0}")]
    NotProper(u32),
    #[error("element {0:?} does not exist")]
    NoSuchElement(ElementId),
    #[error("color {0} outside palette 1..={1}")]
    ColorOutOfRange(u8, u8),
    #[error("isolated edge halves {0} and {1} carry different colors")]
    MateMismatch(SemiedgeId, SemiedgeId),
    #[error("{0:?} is not an edge")]
    NotAnEdge(ElementId),
    #[error("{0} is part of an isolated edge; it has no vertex")]
    IsolatedSemiedge(SemiedgeId),
    #[error("{0:?} is not a semiedge")]
    NotASemiedge(ElementId),
    #[error("submultipole does not come from this multipole")]
    NotSubmultipole,
    #[error("chain is stale: colors changed since discovery")]
    StaleChain,
    #[error("start semiedge colored {0:?}, not in the requested pair")]
    StartOutsidePair(Color),
    #[error("not a permutation of 1..={0}")]
    BadPermutation(u8),
}

/// Total assignment of colors to the elements of one multipole.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    pub k: u8,
    colors: Vec<Color>, // flat element index: edges then semiedges
}

impl EdgeColoring {
    /// Builds a total coloring; enforces palette range and mate agreement.
    pub fn new(m: &Multipole, k: u8, colors: Vec<Color>) -> Result<Self, ColoringError> {
        if colors.len() != m.element_count() {
            let missing = ElementId::from_flat(m, colors.len())
                .unwrap_or(ElementId::Edge(m.edge_count() as u32));
            return Err(ColoringError::Partial(missing));
        }
        for &c in &colors {
            if c.0 < 1 || c.0 > k {
                return Err(ColoringError::ColorOutOfRange(c.0, k));
            }
        }
        let coloring = EdgeColoring { k, colors };
        for (i, inc) in m.semiedges().iter().enumerate() {
            if let Incidence::Mate(j) = *inc {
                if coloring.get(m, ElementId::Semiedge(i as u32))
                    != coloring.get(m, ElementId::Semiedge(j))
                {
                    return Err(ColoringError::MateMismatch(i as u32, j));
                }
            }
        }
        Ok(coloring)
    }

    pub fn get(&self, m: &Multipole, el: ElementId) -> Color {
        self.colors[el.flat(m)]
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    /// Colors actually used anywhere in the assignment.
    pub fn used_colors(&self) -> ColorSet {
        ColorSet::from_colors(&self.colors)
    }

    fn set(&mut self, m: &Multipole, el: ElementId, c: Color) {
        self.colors[el.flat(m)] = c;
    }
}

/// Colors of the elements incident to `v`.
pub fn vertex_palette(m: &Multipole, c: &EdgeColoring, v: u32) -> ColorSet {
    let mut s = ColorSet::empty();
    for &el in m.incident(v) {
        s.insert(c.get(m, el));
    }
    s
}

/// True iff the three elements at every vertex have pairwise distinct colors.
pub fn is_proper(m: &Multipole, c: &EdgeColoring) -> bool {
    (0..m.vertex_count() as u32)
        .all(|v| vertex_palette(m, c, v).len() == m.incident(v).len())
}

/// Classification of a real edge under a proper coloring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    Poor,
    Rich,
    Abnormal,
}

/// Poor if the two end palettes together span 3 colors, rich if 5,
/// abnormal otherwise.
pub fn classify_edge(m: &Multipole, c: &EdgeColoring, e: EdgeId) -> Result<EdgeClass, ColoringError> {
    if e as usize >= m.edge_count() {
        return Err(ColoringError::NoSuchElement(ElementId::Edge(e)));
    }
    let (u, v) = m.edge(e);
    let both = vertex_palette(m, c, u).union(vertex_palette(m, c, v));
    Ok(match both.len() {
        3 => EdgeClass::Poor,
        5 => EdgeClass::Rich,
        _ => EdgeClass::Abnormal,
    })
}

/// True iff the coloring is proper and no real edge is abnormal. Semiedges
/// and isolated edges impose no normality constraint.
pub fn is_normal(m: &Multipole, c: &EdgeColoring) -> bool {
    is_proper(m, c)
        && (0..m.edge_count() as u32)
            .all(|e| classify_edge(m, c, e).expect("edge exists") != EdgeClass::Abnormal)
}

pub fn poor_edges(m: &Multipole, c: &EdgeColoring) -> Vec<EdgeId> {
    (0..m.edge_count() as u32)
        .filter(|&e| classify_edge(m, c, e).expect("edge exists") == EdgeClass::Poor)
        .collect()
}

pub fn rich_edges(m: &Multipole, c: &EdgeColoring) -> Vec<EdgeId> {
    (0..m.edge_count() as u32)
        .filter(|&e| classify_edge(m, c, e).expect("edge exists") == EdgeClass::Rich)
        .collect()
}

/// Restriction of a coloring of the origin to a submultipole: edges and
/// inherited semiedges keep their colors, edge halves take the color of the
/// parent edge.
pub fn restrict(
    origin: &Multipole,
    c: &EdgeColoring,
    sub: &Submultipole,
) -> Result<EdgeColoring, ColoringError> {
    if sub.origin_fingerprint != origin.fingerprint() {
        return Err(ColoringError::NotSubmultipole);
    }
    let m = &sub.multipole;
    let mut colors = Vec::with_capacity(m.element_count());
    for &oe in &sub.edge_map {
        colors.push(c.get(origin, ElementId::Edge(oe)));
    }
    for so in &sub.semi_origin {
        colors.push(match *so {
            SemiOrigin::Inherited(s) => c.get(origin, ElementId::Semiedge(s)),
            SemiOrigin::HalfOf(e) => c.get(origin, ElementId::Edge(e)),
        });
    }
    EdgeColoring::new(m, c.k, colors)
}

/// Why two part-colorings fail to merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IncompatibilityWitness {
    /// Two halves of one rejoined origin edge disagree.
    ColorMismatch { origin_edge: EdgeId },
    /// A rejoined edge came out abnormal in the union.
    AbnormalBoundaryEdge { union_edge: EdgeId },
    /// A vertex of the union sees repeated colors.
    ImproperAt { vertex: u32 },
}

/// Merges colorings of the two parts of a union; returns the merged coloring
/// or the first conflicting element.
pub fn merge_compatible(
    u: &UnionResult,
    c1: &EdgeColoring,
    c2: &EdgeColoring,
) -> Result<EdgeColoring, IncompatibilityWitness> {
    let m = &u.sub.multipole;
    let k = c1.k.max(c2.k);
    let semi_flat = |part: usize, s: SemiedgeId| u.part_edge_counts[part] + s as usize;
    let mut colors = Vec::with_capacity(m.element_count());
    for prov in &u.edge_provenance {
        use crate::multipole::EdgeProvenance::*;
        colors.push(match *prov {
            FromFirst(e) => c1.colors()[e as usize],
            FromSecond(e) => c2.colors()[e as usize],
            Joined {
                origin_edge,
                first_semi,
                second_semi,
            } => {
                let a = c1.colors()[semi_flat(0, first_semi)];
                let b = c2.colors()[semi_flat(1, second_semi)];
                if a != b {
                    return Err(IncompatibilityWitness::ColorMismatch { origin_edge });
                }
                a
            }
        });
    }
    for &(part, s) in &u.semi_provenance {
        let c = if part == 0 { c1 } else { c2 };
        colors.push(c.colors()[semi_flat(part, s)]);
    }
    let merged = EdgeColoring::new(m, k, colors).map_err(|_| IncompatibilityWitness::ImproperAt {
        vertex: 0,
    })?;
    for v in 0..m.vertex_count() as u32 {
        if vertex_palette(m, &merged, v).len() != m.incident(v).len() {
            return Err(IncompatibilityWitness::ImproperAt { vertex: v });
        }
    }
    for (i, prov) in u.edge_provenance.iter().enumerate() {
        if matches!(prov, crate::multipole::EdgeProvenance::Joined { .. }) {
            let class = classify_edge(m, &merged, i as u32).expect("edge exists");
            if class == EdgeClass::Abnormal {
                return Err(IncompatibilityWitness::AbnormalBoundaryEdge { union_edge: i as u32 });
            }
        }
    }
    Ok(merged)
}

/// Color of a semiedge together with the colors of the other two elements at
/// its vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompleteColor {
    pub primary: Color,
    pub flanks: ColorSet,
}

pub fn complete_color(
    m: &Multipole,
    c: &EdgeColoring,
    s: SemiedgeId,
) -> Result<CompleteColor, ColoringError> {
    let v = match m.semiedge(s) {
        Incidence::Vertex(v) => v,
        Incidence::Mate(_) => return Err(ColoringError::IsolatedSemiedge(s)),
    };
    let primary = c.get(m, ElementId::Semiedge(s));
    let mut flanks = ColorSet::empty();
    for &el in m.incident(v) {
        if el != ElementId::Semiedge(s) {
            flanks.insert(c.get(m, el));
        }
    }
    Ok(CompleteColor { primary, flanks })
}

/// Maximal alternating two-colored path from one semiedge to another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KempeChain {
    pub elements: Vec<ElementId>,
    pub pair: (Color, Color),
}

/// Follows the unique alternating continuation from `start`; properness makes
/// the successor at each vertex unique or absent. Returns the chain if the
/// walk reaches another semiedge, `None` if it dies at a vertex.
pub fn find_kempe_chain(
    m: &Multipole,
    c: &EdgeColoring,
    start: SemiedgeId,
    pair: (Color, Color),
) -> Result<Option<KempeChain>, ColoringError> {
    let v0 = match m.semiedge(start) {
        Incidence::Vertex(v) => v,
        Incidence::Mate(_) => return Err(ColoringError::IsolatedSemiedge(start)),
    };
    let start_color = c.get(m, ElementId::Semiedge(start));
    if start_color != pair.0 && start_color != pair.1 {
        return Err(ColoringError::StartOutsidePair(start_color));
    }
    let other = |col: Color| if col == pair.0 { pair.1 } else { pair.0 };
    let mut elements = vec![ElementId::Semiedge(start)];
    let mut at = v0;
    let mut want = other(start_color);
    loop {
        let next = m
            .incident(at)
            .iter()
            .copied()
            .find(|&el| el != *elements.last().expect("nonempty") && c.get(m, el) == want);
        match next {
            None => return Ok(None),
            Some(ElementId::Semiedge(s)) => {
                elements.push(ElementId::Semiedge(s));
                return Ok(Some(KempeChain {
                    elements,
                    pair: (start_color, other(start_color)),
                }));
            }
            Some(ElementId::Edge(e)) => {
                let (a, b) = m.edge(e);
                elements.push(ElementId::Edge(e));
                at = if a == at { b } else { a };
                want = other(want);
            }
        }
    }
}

/// Swaps the chain's two colors along the chain. The result of swapping a
/// valid chain of a normal coloring is again normal with the same poor set.
pub fn kempe_swap(
    m: &Multipole,
    c: &EdgeColoring,
    chain: &KempeChain,
) -> Result<EdgeColoring, ColoringError> {
    let (i, j) = chain.pair;
    // Freshness: elements must still alternate in the chain's colors.
    let mut want = i;
    for &el in &chain.elements {
        if c.get(m, el) != want {
            return Err(ColoringError::StaleChain);
        }
        want = if want == i { j } else { i };
    }
    let mut out = c.clone();
    for &el in &chain.elements {
        let cur = out.get(m, el);
        out.set(m, el, if cur == i { j } else { i });
    }
    Ok(out)
}

/// Applies a color permutation: `result(x) = perm[c(x)]`.
pub fn permute_colors(c: &EdgeColoring, perm: &[u8]) -> Result<EdgeColoring, ColoringError> {
    // perm[i-1] is the image of color i; must be a permutation of 1..=k.
    if perm.len() != c.k as usize {
        return Err(ColoringError::BadPermutation(c.k));
    }
    let mut seen = vec![false; c.k as usize];
    for &p in perm {
        if p < 1 || p > c.k || seen[(p - 1) as usize] {
            return Err(ColoringError::BadPermutation(c.k));
        }
        seen[(p - 1) as usize] = true;
    }
    Ok(EdgeColoring {
        k: c.k,
        colors: c
            .colors
            .iter()
            .map(|&Color(v)| Color(perm[(v - 1) as usize]))
            .collect(),
    })
}

/// Canonical-order key: elements sorted by endpoints (then semiedge id), and
/// colors relabeled by first appearance. Two colorings have equal keys iff
/// they differ by a color permutation.
pub fn canonical_form(m: &Multipole, c: &EdgeColoring) -> Vec<u8> {
    let mut order: Vec<ElementId> = m.elements().collect();
    order.sort_by_key(|el| match *el {
        ElementId::Edge(e) => {
            let (u, v) = m.edge(e);
            (0, u.min(v), u.max(v), e)
        }
        ElementId::Semiedge(s) => (1, 0, 0, s),
    });
    let mut relabel = [0u8; 8];
    let mut next = 1u8;
    let mut out = Vec::with_capacity(order.len());
    for el in order {
        let Color(v) = c.get(m, el);
        if relabel[v as usize] == 0 {
            relabel[v as usize] = next;
            next += 1;
        }
        out.push(relabel[v as usize]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipole::{induced_submultipole, union};
    use std::collections::BTreeSet;

    fn tripod() -> Multipole {
        Multipole::new(1, vec![], vec![Incidence::Vertex(0); 3], vec![]).expect("valid")
    }

    fn colored_tripod() -> (Multipole, EdgeColoring) {
        let m = tripod();
        let c = EdgeColoring::new(&m, 3, vec![Color(1), Color(2), Color(3)]).expect("total");
        (m, c)
    }

    #[test]
    fn tripod_123_is_proper() {
        let (m, c) = colored_tripod();
        assert!(is_proper(&m, &c));
    }

    #[test]
    fn repeated_color_at_vertex_not_proper() {
        let m = tripod();
        let c = EdgeColoring::new(&m, 3, vec![Color(1), Color(1), Color(3)]).expect("total");
        assert!(!is_proper(&m, &c));
    }

    #[test]
    fn classify_by_union_size() {
        // Two vertices joined by one edge, two semiedges each.
        let m = Multipole::new(
            2,
            vec![(0, 1)],
            vec![
                Incidence::Vertex(0),
                Incidence::Vertex(0),
                Incidence::Vertex(1),
                Incidence::Vertex(1),
            ],
            vec![],
        )
        .expect("valid");
        let mk = |a: u8, b: u8, c_: u8, d: u8, e: u8| {
            EdgeColoring::new(&m, 5, vec![Color(a), Color(b), Color(c_), Color(d), Color(e)])
                .expect("total")
        };
        // palettes {1,2,3} / {1,2,3}
        assert_eq!(classify_edge(&m, &mk(1, 2, 3, 2, 3), 0).unwrap(), EdgeClass::Poor);
        // palettes {1,2,3} / {1,4,5}
        assert_eq!(classify_edge(&m, &mk(1, 2, 3, 4, 5), 0).unwrap(), EdgeClass::Rich);
        // palettes {1,2,3} / {1,2,4}
        assert_eq!(classify_edge(&m, &mk(1, 2, 3, 2, 4), 0).unwrap(), EdgeClass::Abnormal);
    }

    #[test]
    fn complete_color_of_tripod_leg() {
        let (m, c) = colored_tripod();
        let cc = complete_color(&m, &c, 0).expect("attached");
        assert_eq!(cc.primary, Color(1));
        assert_eq!(cc.flanks, ColorSet::from_colors(&[Color(2), Color(3)]));
    }

    #[test]
    fn complete_color_rejects_isolated() {
        let m = Multipole::new(
            0,
            vec![],
            vec![Incidence::Mate(1), Incidence::Mate(0)],
            vec![],
        )
        .expect("valid");
        let c = EdgeColoring::new(&m, 3, vec![Color(1), Color(1)]).expect("total");
        assert_eq!(
            complete_color(&m, &c, 0).unwrap_err(),
            ColoringError::IsolatedSemiedge(0)
        );
    }

    #[test]
    fn kempe_chain_absent_on_tripod() {
        let (m, c) = colored_tripod();
        // Walking from leg 0 in colors {1,2}: continuation is leg 1, which is
        // a semiedge, so the chain is [leg0, leg1]; in colors {1,4} there is
        // no continuation at all.
        let chain = find_kempe_chain(&m, &c, 0, (Color(1), Color(4))).expect("valid start");
        assert!(chain.is_none());
    }

    #[test]
    fn kempe_swap_is_involution() {
        let (m, c) = colored_tripod();
        let chain = find_kempe_chain(&m, &c, 0, (Color(1), Color(2)))
            .expect("valid start")
            .expect("tripod legs form a two-element chain");
        let swapped = kempe_swap(&m, &c, &chain).expect("fresh");
        let chain2 = find_kempe_chain(&m, &swapped, 0, (Color(1), Color(2)))
            .expect("valid start")
            .expect("chain");
        let back = kempe_swap(&m, &swapped, &chain2).expect("fresh");
        assert_eq!(back, c);
    }

    #[test]
    fn stale_chain_rejected() {
        let (m, c) = colored_tripod();
        let chain = find_kempe_chain(&m, &c, 0, (Color(1), Color(2)))
            .expect("valid start")
            .expect("chain");
        let other = EdgeColoring::new(&m, 3, vec![Color(2), Color(1), Color(3)]).expect("total");
        assert_eq!(kempe_swap(&m, &other, &chain).unwrap_err(), ColoringError::StaleChain);
    }

    #[test]
    fn permute_identity_and_poor_invariance() {
        let (m, c) = colored_tripod();
        let same = permute_colors(&c, &[1, 2, 3]).expect("identity");
        assert_eq!(same, c);
        let permuted = permute_colors(&c, &[2, 3, 1]).expect("cycle");
        assert_eq!(poor_edges(&m, &permuted), poor_edges(&m, &c));
    }

    #[test]
    fn canonical_form_identifies_permutation_classes() {
        let (m, c) = colored_tripod();
        let k1 = canonical_form(&m, &c);
        let k2 = canonical_form(&m, &permute_colors(&c, &[3, 1, 2]).expect("perm"));
        assert_eq!(k1, k2);
    }

    #[test]
    fn restrict_full_is_identity() {
        let (m, c) = colored_tripod();
        let sub = Submultipole::identity(&m);
        let r = restrict(&m, &c, &sub).expect("registered");
        assert_eq!(r, c);
    }

    #[test]
    fn restrict_cut_edge_keeps_color() {
        // Edge uv colored 4; cutting at the v side leaves a semiedge at u
        // colored 4.
        let m = Multipole::new(
            2,
            vec![(0, 1)],
            vec![
                Incidence::Vertex(0),
                Incidence::Vertex(0),
                Incidence::Vertex(1),
                Incidence::Vertex(1),
            ],
            vec![],
        )
        .expect("valid");
        let c = EdgeColoring::new(
            &m,
            5,
            vec![Color(4), Color(1), Color(2), Color(1), Color(2)],
        )
        .expect("total");
        let t: BTreeSet<u32> = [0u32].into_iter().collect();
        let sub = induced_submultipole(&m, &t).expect("ok");
        let r = restrict(&m, &c, &sub).expect("registered");
        let half = sub
            .semi_origin
            .iter()
            .position(|o| matches!(o, SemiOrigin::HalfOf(0)))
            .expect("half exists") as u32;
        assert_eq!(r.get(&sub.multipole, ElementId::Semiedge(half)), Color(4));
    }

    #[test]
    fn merge_detects_mismatch_and_abnormal_boundary() {
        let m = Multipole::new(
            2,
            vec![(0, 1)],
            vec![
                Incidence::Vertex(0),
                Incidence::Vertex(0),
                Incidence::Vertex(1),
                Incidence::Vertex(1),
            ],
            vec![],
        )
        .expect("valid");
        let t0: BTreeSet<u32> = [0u32].into_iter().collect();
        let t1: BTreeSet<u32> = [1u32].into_iter().collect();
        let s0 = induced_submultipole(&m, &t0).expect("ok");
        let s1 = induced_submultipole(&m, &t1).expect("ok");
        let u = union(&s0, &s1).expect("disjoint");
        let tri = |a: u8, b: u8, c_: u8| {
            EdgeColoring::new(
                &s0.multipole,
                5,
                vec![Color(a), Color(b), Color(c_)],
            )
            .expect("total")
        };
        let tri2 = |a: u8, b: u8, c_: u8| {
            EdgeColoring::new(
                &s1.multipole,
                5,
                vec![Color(a), Color(b), Color(c_)],
            )
            .expect("total")
        };
        // Halves disagree: 1 vs 2 on the shared edge.
        // Part layout: semiedges [half, inherited, inherited].
        let r = merge_compatible(&u, &tri(2, 1, 3), &tri2(1, 2, 3));
        assert_eq!(
            r.unwrap_err(),
            IncompatibilityWitness::ColorMismatch { origin_edge: 0 }
        );
        // Halves agree but the boundary edge is abnormal: {1,2,3} vs {1,2,4}.
        let r = merge_compatible(&u, &tri(1, 2, 3), &tri2(1, 2, 4));
        assert_eq!(
            r.unwrap_err(),
            IncompatibilityWitness::AbnormalBoundaryEdge { union_edge: 0 }
        );
        // Matching halves, poor boundary.
        let r = merge_compatible(&u, &tri(1, 2, 3), &tri2(1, 2, 3));
        assert!(r.is_ok());
        assert!(is_normal(&u.sub.multipole, &r.expect("merged")));
    }
}
