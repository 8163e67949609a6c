//! Exhaustive backtracking over proper / normal k-edge-colorings of
//! multipoles, with fixed partial assignments, per-element domains, and a
//! poor-count branch-and-bound mode. Drives the verification pipelines
//! (uniqueness counts, poor(G), snark detection, the odd-cycle pipeline).
//!
//! Variables are edges, vertex-attached semiedges, and isolated-edge pairs
//! (one variable for both mates). The variable order is static: fixed
//! elements first, then greedily by adjacency to the already-ordered set,
//! which keeps propagation tight and enumeration deterministic.
//!
//! Normality pruning fires only once both end palettes of an edge are
//! complete; a partially colored edge with palette union of size 4 is never
//! cut early, since a fifth color may still arrive.

use crate::coloring::{canonical_form, Color, ColorSet, EdgeColoring};
use crate::multipole::{ElementId, Incidence, Multipole};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};
use thiserror::Error;

pub mod pipelines;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exists,
    Count,
    Enumerate,
    MaximizePoor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Labeled,
    UpToColorPermutation,
}

/// Binary palette constraint: the colors of `a` and `b` must not meet `set`
/// in exactly one element. Expresses left-side block compatibility, where the
/// two flank colors must equal a given pair or avoid it entirely.
#[derive(Debug, Clone, Copy)]
pub struct PairConstraint {
    pub a: ElementId,
    pub b: ElementId,
    pub set: ColorSet,
}

#[derive(Debug, Clone)]
pub struct SearchProblem<'a> {
    pub multipole: &'a Multipole,
    pub k: u8,
    pub require_normal: bool,
    pub fixed: Vec<(ElementId, Color)>,
    pub domains: Vec<(ElementId, ColorSet)>,
    pub pairs: Vec<PairConstraint>,
    pub mode: SearchMode,
    pub symmetry: Symmetry,
}

impl<'a> SearchProblem<'a> {
    pub fn new(multipole: &'a Multipole, k: u8, require_normal: bool, mode: SearchMode) -> Self {
        SearchProblem {
            multipole,
            k,
            require_normal,
            fixed: Vec::new(),
            domains: Vec::new(),
            pairs: Vec::new(),
            mode,
            symmetry: Symmetry::Labeled,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Exists(Option<EdgeColoring>),
    Count(u64),
    /// Solutions, relabeled to canonical representatives under
    /// `Symmetry::UpToColorPermutation`, sorted by canonical key.
    Enumerate(Vec<EdgeColoring>),
    /// `None` when no normal coloring exists at all.
    MaxPoor(Option<(usize, EdgeColoring)>),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// `None` when the deadline was hit before the search completed.
    pub outcome: Option<SearchOutcome>,
    pub timed_out: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub timeout: Option<Duration>,
    /// `Some(1)` forces the sequential engine even with the parallel feature.
    pub jobs: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            timeout: Some(Duration::from_secs(default_timeout_secs())),
            jobs: None,
        }
    }
}

/// Default per-solve timeout: 10 minutes, overridable via `NCOL_TIMEOUT_SECS`.
pub fn default_timeout_secs() -> u64 {
    std::env::var("NCOL_TIMEOUT_SECS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(600)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("fixed color {0} outside palette 1..={1}")]
    FixedOutOfRange(u8, u8),
    #[error("up-to-permutation symmetry cannot be combined with fixed assignments")]
    SymmetryWithFixed,
    #[error("element {0:?} does not exist")]
    NoSuchElement(ElementId),
}

// ---- variable model ---------------------------------------------------------

#[derive(Debug, Clone)]
struct Var {
    elements: Vec<ElementId>,
    vertices: Vec<u32>,
}

struct Model<'a> {
    m: &'a Multipole,
    k: u8,
    normal: bool,
    vars: Vec<Var>,
    vertex_vars: Vec<Vec<usize>>,
    vertex_degree: Vec<u8>,
    init_domain: Vec<u8>,
    fixed_vars: Vec<(usize, u8)>,
    order: Vec<usize>,
    pair_checks: Vec<Vec<(usize, u8)>>, // per var: (other var, set mask)
    canonical: bool,
}

fn full_mask(k: u8) -> u8 {
    (((1u16 << (k + 1)) - 2) & 0xff) as u8
}

impl<'a> Model<'a> {
    fn build(p: &SearchProblem<'a>) -> Result<Model<'a>, SearchError> {
        let m = p.multipole;
        let mut vars: Vec<Var> = Vec::new();
        let mut var_of_flat = vec![usize::MAX; m.element_count()];
        for e in 0..m.edge_count() as u32 {
            let (u, v) = m.edge(e);
            var_of_flat[e as usize] = vars.len();
            vars.push(Var {
                elements: vec![ElementId::Edge(e)],
                vertices: vec![u, v],
            });
        }
        for s in 0..m.semiedge_count() as u32 {
            let flat = m.edge_count() + s as usize;
            match m.semiedge(s) {
                Incidence::Vertex(v) => {
                    var_of_flat[flat] = vars.len();
                    vars.push(Var {
                        elements: vec![ElementId::Semiedge(s)],
                        vertices: vec![v],
                    });
                }
                Incidence::Mate(j) if j < s => {
                    // Both halves of an isolated edge share one variable.
                    let vi = var_of_flat[m.edge_count() + j as usize];
                    var_of_flat[flat] = vi;
                    vars[vi].elements.push(ElementId::Semiedge(s));
                }
                Incidence::Mate(_) => {
                    var_of_flat[flat] = vars.len();
                    vars.push(Var {
                        elements: vec![ElementId::Semiedge(s)],
                        vertices: vec![],
                    });
                }
            }
        }
        let mut vertex_vars = vec![Vec::new(); m.vertex_count()];
        for (vi, var) in vars.iter().enumerate() {
            for &w in &var.vertices {
                vertex_vars[w as usize].push(vi);
            }
        }
        let vertex_degree: Vec<u8> = (0..m.vertex_count())
            .map(|v| m.incident(v as u32).len() as u8)
            .collect();

        let mut init_domain = vec![full_mask(p.k); vars.len()];
        for &(el, set) in &p.domains {
            let flat = el.flat(m);
            if flat >= m.element_count() {
                return Err(SearchError::NoSuchElement(el));
            }
            init_domain[var_of_flat[flat]] &= set.0;
        }
        let mut fixed_vars: Vec<(usize, u8)> = Vec::new();
        for &(el, Color(c)) in &p.fixed {
            let flat = el.flat(m);
            if flat >= m.element_count() {
                return Err(SearchError::NoSuchElement(el));
            }
            if c < 1 || c > p.k {
                return Err(SearchError::FixedOutOfRange(c, p.k));
            }
            let v = var_of_flat[flat];
            init_domain[v] &= 1 << c;
            fixed_vars.push((v, c));
        }
        fixed_vars.sort_unstable();
        fixed_vars.dedup();
        let canonical = p.symmetry == Symmetry::UpToColorPermutation;
        if canonical && !fixed_vars.is_empty() {
            return Err(SearchError::SymmetryWithFixed);
        }

        // Static order: greedily append the unordered variable sharing the
        // most vertices with already-ordered ones; fixed variables seed it.
        let nvars = vars.len();
        let mut ordered = vec![false; nvars];
        let mut touched = vec![false; m.vertex_count()];
        for &(v, _) in &fixed_vars {
            ordered[v] = true;
            for &w in &vars[v].vertices {
                touched[w as usize] = true;
            }
        }
        let mut order = Vec::with_capacity(nvars - fixed_vars.len());
        for _ in 0..nvars - fixed_vars.len() {
            let mut best = usize::MAX;
            let mut best_key = (0usize, 0usize);
            for (vi, var) in vars.iter().enumerate() {
                if ordered[vi] {
                    continue;
                }
                let w = var.vertices.iter().filter(|&&x| touched[x as usize]).count();
                let key = (w, usize::MAX - vi);
                if best == usize::MAX || key > best_key {
                    best = vi;
                    best_key = key;
                }
            }
            ordered[best] = true;
            for &w in &vars[best].vertices {
                touched[w as usize] = true;
            }
            order.push(best);
        }

        let mut pair_checks = vec![Vec::new(); nvars];
        for pc in &p.pairs {
            let fa = pc.a.flat(m);
            let fb = pc.b.flat(m);
            if fa >= m.element_count() {
                return Err(SearchError::NoSuchElement(pc.a));
            }
            if fb >= m.element_count() {
                return Err(SearchError::NoSuchElement(pc.b));
            }
            let a = var_of_flat[fa];
            let b = var_of_flat[fb];
            pair_checks[a].push((b, pc.set.0));
            pair_checks[b].push((a, pc.set.0));
        }

        Ok(Model {
            m,
            k: p.k,
            normal: p.require_normal,
            vars,
            vertex_vars,
            vertex_degree,
            init_domain,
            fixed_vars,
            order,
            pair_checks,
            canonical,
        })
    }

    fn coloring_of(&self, color: &[u8]) -> EdgeColoring {
        let mut flat = vec![Color(0); self.m.element_count()];
        for (vi, var) in self.vars.iter().enumerate() {
            for &el in &var.elements {
                flat[el.flat(self.m)] = Color(color[vi]);
            }
        }
        EdgeColoring::new(self.m, self.k, flat).expect("engine assignments are total and in range")
    }
}

// ---- engine state -----------------------------------------------------------

enum TrailOp {
    Assign(usize),
    Domain(usize, u8),
    Vertex(usize, u8),
    EdgeClass(u32),
    MaxUsed(u8),
}

struct State<'a, 'b> {
    model: &'b Model<'a>,
    color: Vec<u8>,
    domain: Vec<u8>,
    vtx_mask: Vec<u8>,
    vtx_cnt: Vec<u8>,
    edge_class: Vec<u8>, // 0 undecided, 1 poor, 2 rich, 3 abnormal
    poor_cnt: usize,
    rich_cnt: usize,
    max_used: u8,
    trail: Vec<TrailOp>,
    queue: Vec<usize>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl<'a, 'b> State<'a, 'b> {
    fn new(model: &'b Model<'a>, deadline: Option<Instant>) -> Self {
        State {
            color: vec![0; model.vars.len()],
            domain: model.init_domain.clone(),
            vtx_mask: vec![0; model.m.vertex_count()],
            vtx_cnt: vec![0; model.m.vertex_count()],
            edge_class: vec![0; model.m.edge_count()],
            poor_cnt: 0,
            rich_cnt: 0,
            max_used: 0,
            trail: Vec::new(),
            queue: Vec::new(),
            nodes: 0,
            deadline,
            timed_out: false,
            model,
        }
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("marked") {
                TrailOp::Assign(v) => self.color[v] = 0,
                TrailOp::Domain(v, old) => self.domain[v] = old,
                TrailOp::Vertex(w, bit) => {
                    self.vtx_mask[w] &= !bit;
                    self.vtx_cnt[w] -= 1;
                }
                TrailOp::EdgeClass(e) => {
                    match self.edge_class[e as usize] {
                        1 => self.poor_cnt -= 1,
                        2 => self.rich_cnt -= 1,
                        _ => {}
                    }
                    self.edge_class[e as usize] = 0;
                }
                TrailOp::MaxUsed(old) => self.max_used = old,
            }
        }
        self.queue.clear();
    }

    /// Assigns color `c` to var `v` and filters neighbor domains; false on
    /// conflict. Trail entries of a failed assign are cleaned by `undo_to`.
    fn assign(&mut self, v: usize, c: u8) -> bool {
        debug_assert_eq!(self.color[v], 0);
        if self.domain[v] & (1 << c) == 0 {
            return false;
        }
        self.color[v] = c;
        self.trail.push(TrailOp::Assign(v));
        if c > self.max_used {
            self.trail.push(TrailOp::MaxUsed(self.max_used));
            self.max_used = c;
        }
        let model = self.model;
        let bit = 1u8 << c;
        for vx in 0..model.vars[v].vertices.len() {
            let w = model.vars[v].vertices[vx] as usize;
            if self.vtx_mask[w] & bit != 0 {
                return false;
            }
            self.vtx_mask[w] |= bit;
            self.vtx_cnt[w] += 1;
            self.trail.push(TrailOp::Vertex(w, bit));
            for qi in 0..model.vertex_vars[w].len() {
                let q = model.vertex_vars[w][qi];
                if q == v || self.color[q] != 0 {
                    continue;
                }
                let old = self.domain[q];
                if old & bit != 0 {
                    let new = old & !bit;
                    if new == 0 {
                        return false;
                    }
                    self.domain[q] = new;
                    self.trail.push(TrailOp::Domain(q, old));
                    if new.count_ones() == 1 {
                        self.queue.push(q);
                    }
                }
            }
            if self.vtx_cnt[w] == model.vertex_degree[w] {
                for &el in model.m.incident(w as u32) {
                    if let ElementId::Edge(e) = el {
                        if self.edge_class[e as usize] != 0 {
                            continue;
                        }
                        let (a, b) = model.m.edge(e);
                        let (a, b) = (a as usize, b as usize);
                        if self.vtx_cnt[a] == model.vertex_degree[a]
                            && self.vtx_cnt[b] == model.vertex_degree[b]
                        {
                            let both = (self.vtx_mask[a] | self.vtx_mask[b]).count_ones();
                            let class = match both {
                                3 => 1u8,
                                5 => 2,
                                _ => 3,
                            };
                            if class == 3 && model.normal {
                                return false;
                            }
                            self.edge_class[e as usize] = class;
                            self.trail.push(TrailOp::EdgeClass(e));
                            match class {
                                1 => self.poor_cnt += 1,
                                2 => self.rich_cnt += 1,
                                _ => {}
                            }
                        }
                    }
                }
            }
        }
        for pi in 0..model.pair_checks[v].len() {
            let (other, set) = model.pair_checks[v][pi];
            let oc = self.color[other];
            if oc != 0 {
                let hits = (bit & set != 0) as u8 + (((1u8 << oc) & set) != 0) as u8;
                if hits == 1 {
                    return false;
                }
            }
        }
        true
    }

    fn propagate(&mut self) -> bool {
        while let Some(q) = self.queue.pop() {
            if self.color[q] != 0 {
                continue;
            }
            let c = self.domain[q].trailing_zeros() as u8;
            if !self.assign(q, c) {
                return false;
            }
        }
        true
    }

    fn check_deadline(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes % 1024 == 0 {
            if let Some(dl) = self.deadline {
                if Instant::now() > dl {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }
}

// ---- result collection --------------------------------------------------------

struct Collector<'c> {
    mode: SearchMode,
    count: u64,
    witness: Option<Vec<u8>>,
    solutions: Vec<Vec<u8>>,
    best_poor: Option<(usize, Vec<u8>)>,
    stop: Option<&'c AtomicBool>,
    shared_best: Option<&'c AtomicUsize>,
    frontier_depth: Option<usize>,
    frontier: Vec<Vec<(usize, u8)>>,
}

impl<'c> Collector<'c> {
    fn new(mode: SearchMode) -> Self {
        Collector {
            mode,
            count: 0,
            witness: None,
            solutions: Vec::new(),
            best_poor: None,
            stop: None,
            shared_best: None,
            frontier_depth: None,
            frontier: Vec::new(),
        }
    }

    /// Returns true when the whole search can stop.
    fn leaf(&mut self, st: &State) -> bool {
        match self.mode {
            SearchMode::Exists => {
                self.count += 1;
                self.witness = Some(st.color.clone());
                if let Some(flag) = self.stop {
                    flag.store(true, Ordering::Relaxed);
                }
                true
            }
            SearchMode::Count => {
                self.count += 1;
                false
            }
            SearchMode::Enumerate => {
                self.count += 1;
                self.solutions.push(st.color.clone());
                false
            }
            SearchMode::MaximizePoor => {
                if self.best_poor.as_ref().map_or(true, |(b, _)| st.poor_cnt > *b) {
                    self.best_poor = Some((st.poor_cnt, st.color.clone()));
                    if let Some(sb) = self.shared_best {
                        sb.fetch_max(st.poor_cnt, Ordering::Relaxed);
                    }
                }
                false
            }
        }
    }

    fn pruned_by_bound(&self, st: &State) -> bool {
        if self.mode != SearchMode::MaximizePoor {
            return false;
        }
        // Optimistic bound: every edge not already rich could still be poor.
        let bound = st.model.m.edge_count() - st.rich_cnt;
        if let Some((b, _)) = &self.best_poor {
            if bound <= *b {
                return true;
            }
        }
        if let Some(sb) = self.shared_best {
            // Strict comparison so subtrees that can still tie survive;
            // ties are resolved deterministically by prefix order.
            if bound < sb.load(Ordering::Relaxed) {
                return true;
            }
        }
        false
    }

    fn aborted(&self) -> bool {
        self.stop.is_some_and(|f| f.load(Ordering::Relaxed))
    }
}

fn dfs(st: &mut State, coll: &mut Collector, hint: usize, branch_path: &mut Vec<(usize, u8)>) -> bool {
    if st.check_deadline() || coll.aborted() {
        return true;
    }
    if coll.pruned_by_bound(st) {
        return false;
    }
    let model = st.model;
    let mut next = None;
    for oi in hint..model.order.len() {
        if st.color[model.order[oi]] == 0 {
            next = Some((oi, model.order[oi]));
            break;
        }
    }
    let (oi, v) = match next {
        Some(x) => x,
        None => return coll.leaf(st),
    };
    if let Some(fd) = coll.frontier_depth {
        if branch_path.len() >= fd {
            coll.frontier.push(branch_path.clone());
            return false;
        }
    }
    let limit = if model.canonical {
        model.k.min(st.max_used + 1)
    } else {
        model.k
    };
    for c in 1..=limit {
        if st.domain[v] & (1 << c) == 0 {
            continue;
        }
        let mark = st.mark();
        branch_path.push((v, c));
        if st.assign(v, c) && st.propagate() {
            if dfs(st, coll, oi + 1, branch_path) {
                branch_path.pop();
                st.undo_to(mark);
                return true;
            }
        }
        branch_path.pop();
        st.undo_to(mark);
        if st.timed_out || coll.aborted() {
            return true;
        }
    }
    false
}

fn replay(st: &mut State, decisions: &[(usize, u8)]) -> bool {
    for &(v, c) in decisions {
        if st.color[v] != 0 {
            if st.color[v] != c {
                return false;
            }
            continue;
        }
        if !st.assign(v, c) || !st.propagate() {
            return false;
        }
    }
    true
}

fn run_sequential(model: &Model, deadline: Option<Instant>, coll: &mut Collector) -> (bool, u64) {
    let mut st = State::new(model, deadline);
    if replay(&mut st, &model.fixed_vars) {
        let mut path = Vec::new();
        dfs(&mut st, coll, 0, &mut path);
    }
    (st.timed_out, st.nodes)
}

/// Solves on the current thread, regardless of `config.jobs`.
pub fn solve_sequential(problem: &SearchProblem, config: &SearchConfig) -> Result<SolveResult, SearchError> {
    let model = Model::build(problem)?;
    let deadline = config.timeout.map(|t| Instant::now() + t);
    let mut coll = Collector::new(problem.mode);
    let (timed_out, nodes) = run_sequential(&model, deadline, &mut coll);
    Ok(finish(problem, &model, coll, timed_out, nodes))
}

/// Solves with the configured parallelism. Without the `parallel` feature,
/// or with `jobs == Some(1)`, this is the sequential engine.
pub fn solve(problem: &SearchProblem, config: &SearchConfig) -> Result<SolveResult, SearchError> {
    #[cfg(feature = "parallel")]
    {
        if config.jobs != Some(1) {
            return solve_parallel(problem, config);
        }
    }
    solve_sequential(problem, config)
}

#[cfg(feature = "parallel")]
fn solve_parallel(problem: &SearchProblem, config: &SearchConfig) -> Result<SolveResult, SearchError> {
    use rayon::prelude::*;

    let model = Model::build(problem)?;
    let deadline = config.timeout.map(|t| Instant::now() + t);
    let threads = config.jobs.unwrap_or_else(rayon::current_num_threads).max(1);
    let target = threads * 8;

    // Expand the branch tree breadth-first until there are enough prefixes.
    let mut depth = 1usize;
    let mut pre;
    let mut prefixes: Vec<Vec<(usize, u8)>>;
    let mut expansion_nodes;
    loop {
        pre = Collector::new(problem.mode);
        pre.frontier_depth = Some(depth);
        let (timed_out, nodes) = run_sequential(&model, deadline, &mut pre);
        expansion_nodes = nodes;
        if timed_out {
            return Ok(SolveResult {
                outcome: None,
                timed_out: true,
                nodes,
            });
        }
        prefixes = std::mem::take(&mut pre.frontier);
        if prefixes.len() >= target || prefixes.is_empty() || depth >= 12 {
            break;
        }
        depth += 1;
    }
    pre.frontier_depth = None;
    if prefixes.is_empty() || (problem.mode == SearchMode::Exists && pre.witness.is_some()) {
        return Ok(finish(problem, &model, pre, false, expansion_nodes));
    }

    let stop = AtomicBool::new(false);
    let shared_best = AtomicUsize::new(pre.best_poor.as_ref().map_or(0, |(b, _)| *b));

    let results: Vec<(Collector, bool, u64)> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut st = State::new(&model, deadline);
            let mut coll = Collector::new(problem.mode);
            if problem.mode == SearchMode::Exists {
                coll.stop = Some(&stop);
            }
            if problem.mode == SearchMode::MaximizePoor {
                coll.shared_best = Some(&shared_best);
            }
            if replay(&mut st, &model.fixed_vars) && replay(&mut st, prefix) {
                let mut path = Vec::new();
                dfs(&mut st, &mut coll, 0, &mut path);
            }
            (coll, st.timed_out, st.nodes)
        })
        .collect();

    let mut total_nodes = expansion_nodes;
    let mut timed_out = false;
    let mut agg = pre;
    for (coll, to, nodes) in results {
        total_nodes += nodes;
        timed_out |= to;
        match problem.mode {
            SearchMode::Exists => {
                if agg.witness.is_none() && coll.witness.is_some() {
                    agg.witness = coll.witness;
                    agg.count += coll.count;
                }
            }
            SearchMode::Count => agg.count += coll.count,
            SearchMode::Enumerate => {
                agg.count += coll.count;
                agg.solutions.extend(coll.solutions);
            }
            SearchMode::MaximizePoor => {
                if let Some((p, w)) = coll.best_poor {
                    // Results arrive in prefix order; strictly-greater keeps
                    // the earliest prefix on ties.
                    if agg.best_poor.as_ref().map_or(true, |(b, _)| p > *b) {
                        agg.best_poor = Some((p, w));
                    }
                }
            }
        }
    }
    if timed_out && problem.mode == SearchMode::Exists && agg.witness.is_some() {
        // A found witness is conclusive even if another subtree timed out.
        timed_out = false;
    }
    Ok(finish(problem, &model, agg, timed_out, total_nodes))
}

fn finish(
    problem: &SearchProblem,
    model: &Model,
    coll: Collector,
    timed_out: bool,
    nodes: u64,
) -> SolveResult {
    if timed_out {
        return SolveResult {
            outcome: None,
            timed_out: true,
            nodes,
        };
    }
    let outcome = match problem.mode {
        SearchMode::Exists => SearchOutcome::Exists(coll.witness.map(|w| model.coloring_of(&w))),
        SearchMode::Count => SearchOutcome::Count(coll.count),
        SearchMode::Enumerate => {
            let m = problem.multipole;
            let mut cols: Vec<EdgeColoring> =
                coll.solutions.iter().map(|w| model.coloring_of(w)).collect();
            if problem.symmetry == Symmetry::UpToColorPermutation {
                for c in &mut cols {
                    *c = relabel_to_canonical(m, c);
                }
            }
            cols.sort_by_cached_key(|c| {
                let mut key = canonical_form(m, c);
                key.extend(c.colors().iter().map(|col| col.0));
                key
            });
            SearchOutcome::Enumerate(cols)
        }
        SearchMode::MaximizePoor => {
            SearchOutcome::MaxPoor(coll.best_poor.map(|(p, w)| (p, model.coloring_of(&w))))
        }
    };
    SolveResult {
        outcome: Some(outcome),
        timed_out: false,
        nodes,
    }
}

/// Rewrites a coloring to the canonical representative of its permutation
/// class: colors relabeled by first appearance along the fixed element order.
pub fn relabel_to_canonical(m: &Multipole, c: &EdgeColoring) -> EdgeColoring {
    let mut order: Vec<ElementId> = m.elements().collect();
    order.sort_by_key(|el| match *el {
        ElementId::Edge(e) => {
            let (u, v) = m.edge(e);
            (0, u.min(v), u.max(v), e)
        }
        ElementId::Semiedge(s) => (1, 0, 0, s),
    });
    let mut map = [0u8; 8];
    let mut next = 1u8;
    for el in order {
        let Color(v) = c.get(m, el);
        if map[v as usize] == 0 {
            map[v as usize] = next;
            next += 1;
        }
    }
    for v in 1..=c.k {
        if map[v as usize] == 0 {
            map[v as usize] = next;
            next += 1;
        }
    }
    let perm: Vec<u8> = (1..=c.k).map(|v| map[v as usize]).collect();
    crate::coloring::permute_colors(c, &perm).expect("first-appearance map is a permutation")
}

/// Number of labeled colorings represented by one canonical class under
/// palette size `k`: permutations of used colors extended by unused ones.
pub fn labeled_orbit_size(k: u8, used: usize) -> u64 {
    let mut n = 1u64;
    for i in 0..used as u64 {
        n *= k as u64 - i;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipole::Incidence;

    fn k4() -> Multipole {
        Multipole::graph(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).expect("ok")
    }

    #[test]
    fn k4_is_3_edge_colorable() {
        let m = k4();
        let p = SearchProblem::new(&m, 3, false, SearchMode::Exists);
        let r = solve_sequential(&p, &SearchConfig::default()).expect("ok");
        match r.outcome.expect("no timeout") {
            SearchOutcome::Exists(w) => {
                let w = w.expect("K4 is 3-edge-colorable");
                assert!(crate::coloring::is_proper(&m, &w));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn k4_proper_3_colorings_counts() {
        // K4's proper 3-edge-colorings are its perfect-matching partitions:
        // one class, 3! = 6 labeled.
        let m = k4();
        let mut p = SearchProblem::new(&m, 3, false, SearchMode::Count);
        let r = solve_sequential(&p, &SearchConfig::default()).expect("ok");
        assert!(matches!(r.outcome, Some(SearchOutcome::Count(6))));
        p.symmetry = Symmetry::UpToColorPermutation;
        let r = solve_sequential(&p, &SearchConfig::default()).expect("ok");
        assert!(matches!(r.outcome, Some(SearchOutcome::Count(1))));
    }

    #[test]
    fn canonical_rejects_fixed() {
        let m = k4();
        let mut p = SearchProblem::new(&m, 3, false, SearchMode::Count);
        p.symmetry = Symmetry::UpToColorPermutation;
        p.fixed.push((ElementId::Edge(0), Color(1)));
        assert_eq!(
            solve_sequential(&p, &SearchConfig::default()).unwrap_err(),
            SearchError::SymmetryWithFixed
        );
    }

    #[test]
    fn tripod_proper_count() {
        let m = Multipole::new(1, vec![], vec![Incidence::Vertex(0); 3], vec![]).expect("ok");
        let p = SearchProblem::new(&m, 5, true, SearchMode::Count);
        let r = solve_sequential(&p, &SearchConfig::default()).expect("ok");
        assert!(matches!(r.outcome, Some(SearchOutcome::Count(60))));
    }

    #[test]
    fn isolated_pair_is_one_variable() {
        let m = Multipole::new(
            0,
            vec![],
            vec![Incidence::Mate(1), Incidence::Mate(0)],
            vec![],
        )
        .expect("ok");
        let p = SearchProblem::new(&m, 5, true, SearchMode::Count);
        let r = solve_sequential(&p, &SearchConfig::default()).expect("ok");
        assert!(matches!(r.outcome, Some(SearchOutcome::Count(5))));
    }

    #[test]
    fn parallel_agrees_with_sequential() {
        let m = k4();
        for normal in [false, true] {
            let p = SearchProblem::new(&m, 5, normal, SearchMode::Count);
            let seq = solve_sequential(&p, &SearchConfig::default())
                .expect("ok")
                .outcome
                .expect("done");
            let par = solve(&p, &SearchConfig::default())
                .expect("ok")
                .outcome
                .expect("done");
            match (seq, par) {
                (SearchOutcome::Count(a), SearchOutcome::Count(b)) => assert_eq!(a, b),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn enumerate_is_sorted_and_canonical() {
        let m = k4();
        let mut p = SearchProblem::new(&m, 3, false, SearchMode::Enumerate);
        p.symmetry = Symmetry::UpToColorPermutation;
        let r = solve(&p, &SearchConfig::default()).expect("ok");
        match r.outcome.expect("done") {
            SearchOutcome::Enumerate(sols) => {
                assert_eq!(sols.len(), 1);
                let c = &sols[0];
                assert_eq!(relabel_to_canonical(&m, c), *c);
            }
            _ => unreachable!(),
        }
    }
}
