//! Isomorphism testing for small graphs: iterative color refinement to cut
//! the search space, then backtracking over refinement cells.

use crate::multipole::Multipole;
use std::collections::BTreeMap;

fn adjacency(m: &Multipole) -> Vec<Vec<u32>> {
    (0..m.vertex_count() as u32).map(|v| m.neighbors(v)).collect()
}

/// One round of 1-dimensional Weisfeiler-Leman refinement until stable;
/// returns per-vertex color classes (small dense ids).
fn refine(adj: &[Vec<u32>], init: &[u64]) -> Vec<u64> {
    let n = adj.len();
    let mut colors: Vec<u64> = init.to_vec();
    loop {
        let mut sigs: Vec<(u64, Vec<u64>)> = Vec::with_capacity(n);
        for v in 0..n {
            let mut neigh: Vec<u64> = adj[v].iter().map(|&w| colors[w as usize]).collect();
            neigh.sort_unstable();
            sigs.push((colors[v], neigh));
        }
        let mut ids: BTreeMap<&(u64, Vec<u64>), u64> = BTreeMap::new();
        for s in &sigs {
            let next = ids.len() as u64;
            ids.entry(s).or_insert(next);
        }
        let new: Vec<u64> = sigs.iter().map(|s| ids[s]).collect();
        if new == colors {
            return colors;
        }
        colors = new;
    }
}

fn class_histogram(colors: &[u64]) -> Vec<(u64, usize)> {
    let mut h: BTreeMap<u64, usize> = BTreeMap::new();
    for &c in colors {
        *h.entry(c).or_insert(0) += 1;
    }
    h.into_iter().collect()
}

/// Backtracking vertex-map search respecting refinement classes. `count_all`
/// counts all isomorphisms instead of stopping at the first.
fn search_maps(
    adj1: &[Vec<u32>],
    adj2: &[Vec<u32>],
    colors1: &[u64],
    colors2: &[u64],
    count_all: bool,
) -> u64 {
    let n = adj1.len();
    let mut map = vec![u32::MAX; n]; // g1 -> g2
    let mut rmap = vec![u32::MAX; n];
    // Assign vertices in order of ascending class size for early failure.
    let hist = class_histogram(colors1);
    let size_of: BTreeMap<u64, usize> = hist.into_iter().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (size_of[&colors1[v]], colors1[v], v));

    fn rec(
        idx: usize,
        order: &[usize],
        adj1: &[Vec<u32>],
        adj2: &[Vec<u32>],
        colors1: &[u64],
        colors2: &[u64],
        map: &mut [u32],
        rmap: &mut [u32],
        count_all: bool,
        found: &mut u64,
    ) -> bool {
        if idx == order.len() {
            *found += 1;
            return !count_all;
        }
        let v = order[idx];
        for w in 0..adj2.len() {
            if rmap[w] != u32::MAX || colors2[w] != colors1[v] {
                continue;
            }
            // Adjacency consistency with already-mapped vertices, with
            // multiplicity for parallel edges.
            let ok = {
                let mut ok = true;
                let mut mult1: BTreeMap<u32, usize> = BTreeMap::new();
                for &x in &adj1[v] {
                    if map[x as usize] != u32::MAX {
                        *mult1.entry(map[x as usize]).or_insert(0) += 1;
                    }
                }
                let mut mult2: BTreeMap<u32, usize> = BTreeMap::new();
                for &y in &adj2[w] {
                    if rmap[y as usize] != u32::MAX {
                        *mult2.entry(y).or_insert(0) += 1;
                    }
                }
                if mult1 != mult2 {
                    ok = false;
                }
                ok
            };
            if !ok {
                continue;
            }
            map[v] = w as u32;
            rmap[w] = v as u32;
            if rec(idx + 1, order, adj1, adj2, colors1, colors2, map, rmap, count_all, found) {
                return true;
            }
            map[v] = u32::MAX;
            rmap[w] = u32::MAX;
        }
        false
    }

    let mut found = 0;
    rec(0, &order, adj1, adj2, colors1, colors2, &mut map, &mut rmap, count_all, &mut found);
    found
}

/// True iff the two graphs are isomorphic. Intended for the small graphs in
/// this crate (up to a few dozen vertices).
pub fn are_isomorphic(g1: &Multipole, g2: &Multipole) -> bool {
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return false;
    }
    let adj1 = adjacency(g1);
    let adj2 = adjacency(g2);
    let deg1: Vec<u64> = adj1.iter().map(|a| a.len() as u64).collect();
    let deg2: Vec<u64> = adj2.iter().map(|a| a.len() as u64).collect();
    let c1 = refine(&adj1, &deg1);
    let c2 = refine(&adj2, &deg2);
    if class_histogram(&c1) != class_histogram(&c2) {
        return false;
    }
    search_maps(&adj1, &adj2, &c1, &c2, false) > 0
}

/// Number of automorphisms of a graph.
pub fn automorphism_count(g: &Multipole) -> u64 {
    let adj = adjacency(g);
    let deg: Vec<u64> = adj.iter().map(|a| a.len() as u64).collect();
    let c = refine(&adj, &deg);
    search_maps(&adj, &adj, &c, &c, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn petersen_automorphisms() {
        assert_eq!(automorphism_count(&catalog::petersen()), 120);
    }

    #[test]
    fn relabeled_petersen_is_isomorphic() {
        let p = catalog::petersen();
        let relabel = |v: u32| (3 * v + 1) % 10;
        let edges = p.edges().iter().map(|&(u, v)| (relabel(u), relabel(v))).collect();
        let q = Multipole::graph(10, edges).expect("ok");
        assert!(are_isomorphic(&p, &q));
    }

    #[test]
    fn cube_not_isomorphic_to_k33_style() {
        let q3 = catalog::cube_q3();
        // Wagner graph V8: 8-cycle plus diameters.
        let mut edges: Vec<(u32, u32)> = (0..8).map(|i| (i, (i + 1) % 8)).collect();
        edges.extend((0..4).map(|i| (i, i + 4)));
        let v8 = Multipole::graph(8, edges).expect("ok");
        assert!(!are_isomorphic(&q3, &v8));
    }

    #[test]
    fn blanusa_automorphism_orders() {
        assert_eq!(automorphism_count(&catalog::blanusa_first()), 8);
        assert_eq!(automorphism_count(&catalog::blanusa_second()), 4);
    }
}
