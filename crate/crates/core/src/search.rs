//! Advancing-front backtracking enumeration of the hexahedral meshes
//! conformal to a prescribed quadrilateral boundary.
//!
//! Hexahedra are built one at a time on the lexicographically smallest front
//! facet. Candidate corners are pruned by the adjacency rules, branching
//! picks the corner with the fewest candidates, and value precedence forces
//! fresh interior labels to appear in ascending order so that every solution
//! is emitted exactly once up to interior relabelling and hex reordering.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use crate::adjacency::{
    filter_candidates, fix_slot, initialize_candidates_into, precedence_limit, AdjacencyMark,
    AdjacencyState, CandidateSets, FacetUse, FilterOutcome,
};
use crate::bitset;
use crate::combinatorial::{
    canonicalize_hex_unchecked, hex_facets, tuples_compatible, CanonicalHex, CanonicalQuad,
    QuadSurface, VertexId,
};
use crate::error::{Error, Result};

/// Enumeration limits: at most `max_hexes` hexahedra and `max_vertices`
/// total vertex labels (boundary labels included).
#[derive(Copy, Clone, Debug)]
pub struct SearchLimits {
    pub max_hexes: usize,
    pub max_vertices: u32,
}

impl SearchLimits {
    pub fn new(max_hexes: usize, max_vertices: u32) -> Self {
        Self {
            max_hexes,
            max_vertices,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Value-precedence symmetry breaking; disabled only by tests that
    /// verify the deduplicated solution sets coincide.
    pub symmetry_breaking: bool,
    /// Wall-clock budget; on expiry the run stops and reports itself
    /// aborted instead of returning partial counts as complete.
    pub deadline: Option<Instant>,
    /// Stop after this many solutions (first-found remeshing).
    pub solution_limit: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            symmetry_breaking: true,
            deadline: None,
            solution_limit: None,
        }
    }
}

impl SearchOptions {
    pub fn with_budget(budget: Duration) -> Self {
        Self {
            deadline: Some(Instant::now() + budget),
            ..Self::default()
        }
    }
}

/// A fully specified enumeration instance. External hexes constrain cavity
/// searches: they participate in the adjacency rules and compatibility
/// checks but are not part of the enumerated solution. Their corner labels
/// may lie outside the search universe (`>= max_vertices`); such labels act
/// as opaque sentinels.
#[derive(Clone, Debug)]
pub struct SearchProblem {
    pub boundary: QuadSurface,
    pub limits: SearchLimits,
    external: Vec<[VertexId; 8]>,
}

impl SearchProblem {
    pub fn new(boundary: QuadSurface, limits: SearchLimits) -> Result<Self> {
        if limits.max_vertices < boundary.n_vertices() {
            return Err(Error::Capacity(format!(
                "vertex limit {} below boundary vertex count {}",
                limits.max_vertices,
                boundary.n_vertices()
            )));
        }
        Ok(Self {
            boundary,
            limits,
            external: Vec::new(),
        })
    }

    pub fn with_external_hexes(mut self, hexes: Vec<[VertexId; 8]>) -> Self {
        self.external = hexes;
        self
    }

    pub fn external_hexes(&self) -> &[[VertexId; 8]] {
        &self.external
    }
}

/// One enumerated mesh: corner tuples in construction order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub hexes: Vec<[VertexId; 8]>,
}

impl Solution {
    pub fn canonical_hexes(&self) -> Vec<CanonicalHex> {
        let mut out: Vec<CanonicalHex> = self
            .hexes
            .iter()
            .map(|t| canonicalize_hex_unchecked(*t))
            .collect();
        out.sort_unstable();
        out
    }
}

/// Canonical identity of a solution up to interior relabelling: the minimum
/// over all interior-label permutations of the sorted canonical hex list.
/// Falls back to first-occurrence normalization when the permutation count
/// would be unreasonable.
pub fn canonical_solution_key(hexes: &[[VertexId; 8]], n_boundary: u32) -> Vec<CanonicalHex> {
    let mut interior: Vec<u32> = hexes
        .iter()
        .flatten()
        .map(|v| v.0)
        .filter(|&l| l >= n_boundary)
        .collect();
    interior.sort_unstable();
    interior.dedup();
    let k = interior.len();

    let relabel = |mapping: &dyn Fn(u32) -> u32| -> Vec<CanonicalHex> {
        let mut out: Vec<CanonicalHex> = hexes
            .iter()
            .map(|t| {
                let mapped: [VertexId; 8] = std::array::from_fn(|i| {
                    let l = t[i].0;
                    VertexId(if l >= n_boundary { mapping(l) } else { l })
                });
                canonicalize_hex_unchecked(mapped)
            })
            .collect();
        out.sort_unstable();
        out
    };

    if k > 8 {
        // First-occurrence normalization in construction order.
        let mut order: HashMap<u32, u32> = HashMap::new();
        for v in hexes.iter().flatten() {
            if v.0 >= n_boundary && !order.contains_key(&v.0) {
                let next = n_boundary + order.len() as u32;
                order.insert(v.0, next);
            }
        }
        return relabel(&|l| order[&l]);
    }

    let mut best: Option<Vec<CanonicalHex>> = None;
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, k, &mut |p| {
        let mut map = HashMap::new();
        for (slot, &src) in p.iter().enumerate() {
            map.insert(interior[src], n_boundary + slot as u32);
        }
        let key = relabel(&|l| map[&l]);
        if best.as_ref().is_none_or(|b| &key < b) {
            best = Some(key);
        }
    });
    best.unwrap_or_default()
}

fn permute(arr: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        visit(arr);
        return;
    }
    for i in 0..k {
        permute(arr, k - 1, visit);
        if k.is_multiple_of(2) {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub solutions: u64,
    pub aborted: bool,
}

impl SearchStats {
    pub fn merge(&mut self, other: &SearchStats) {
        self.nodes += other.nodes;
        self.backtracks += other.backtracks;
        self.solutions += other.solutions;
        self.aborted |= other.aborted;
    }
}

/// One branch decision: the corner slot and the chosen vertex.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub slot: u8,
    pub value: u32,
}

struct CoreCounts(HashMap<CanonicalQuad, u8>);

impl FacetUse for CoreCounts {
    fn use_count(&self, quad: &CanonicalQuad) -> u8 {
        *self.0.get(quad).unwrap_or(&0)
    }
}

enum CoreUndo {
    Count { quad: CanonicalQuad, prev: u8 },
    HexPushed,
}

/// Composite rollback point over the adjacency trail and the search trail.
#[derive(Copy, Clone)]
struct Mark {
    adj: AdjacencyMark,
    undo: usize,
}

/// Mutable search state: adjacency bit-sets, facet use counts (boundary
/// quads pre-seeded at one use standing for the outside), the facet front,
/// and the partial solution.
pub struct SearchState<'p> {
    problem: &'p SearchProblem,
    adj: AdjacencyState,
    counts: CoreCounts,
    front: BTreeSet<CanonicalQuad>,
    hexes: Vec<[VertexId; 8]>,
    vtx_hex: Vec<Vec<u32>>,
    vtx_ext: Vec<Vec<u32>>,
    undo: Vec<CoreUndo>,
    n_boundary: u32,
    infeasible: bool,
}

impl<'p> SearchState<'p> {
    pub fn new(problem: &'p SearchProblem) -> Result<Self> {
        let capacity = problem.limits.max_vertices;
        let mut adj = AdjacencyState::from_boundary(&problem.boundary, capacity)?;
        let mut counts = CoreCounts(HashMap::new());
        let mut front = BTreeSet::new();
        for q in problem.boundary.quads() {
            counts.0.insert(*q, 1);
            front.insert(*q);
        }
        let mut vtx_ext: Vec<Vec<u32>> = vec![Vec::new(); capacity as usize];
        let mut infeasible = false;
        // External hexes seed relations among in-universe labels and close
        // their fully-representable facets.
        for (id, ext) in problem.external.iter().enumerate() {
            if !seed_external(&mut adj, &mut counts, &front, ext, capacity) {
                infeasible = true;
            }
            for &v in ext {
                if v.0 < capacity {
                    vtx_ext[v.index()].push(id as u32);
                }
            }
        }
        infeasible |= adj.is_infeasible();
        Ok(Self {
            problem,
            adj,
            counts,
            front,
            hexes: Vec::new(),
            vtx_hex: vec![Vec::new(); capacity as usize],
            vtx_ext,
            undo: Vec::new(),
            n_boundary: problem.boundary.n_vertices(),
            infeasible,
        })
    }

    pub fn front_is_empty(&self) -> bool {
        self.front.is_empty()
    }

    /// The facet the next hexahedron is built on: deterministic, the
    /// lexicographically smallest canonical front facet.
    pub fn select_front_facet(&self) -> Option<CanonicalQuad> {
        self.front.iter().next().copied()
    }

    pub fn hexes(&self) -> &[[VertexId; 8]] {
        &self.hexes
    }

    pub fn n_boundary(&self) -> u32 {
        self.n_boundary
    }

    fn set_count(&mut self, quad: CanonicalQuad, new: u8) {
        let prev = self.counts.use_count(&quad);
        self.undo.push(CoreUndo::Count { quad, prev });
        self.counts.0.insert(quad, new);
        if prev != 1 && new == 1 {
            self.front.insert(quad);
        } else if prev == 1 && new != 1 {
            self.front.remove(&quad);
        }
    }

    /// Validate a completed corner tuple against everything registered, then
    /// commit it. Returns `None` (state untouched) when the tuple cannot
    /// join the partial solution.
    fn register_hex(&mut self, corners: &[VertexId; 8]) -> Option<Mark> {
        if !self.adj.validate_hex_relations(corners) {
            return None;
        }
        let facets = hex_facets(corners);
        for f in &facets {
            if self.counts.use_count(f) >= 2 {
                return None;
            }
        }
        // Pairwise compatibility against every hex sharing a vertex,
        // registered or external.
        let mut seen: Vec<u32> = Vec::new();
        let mut seen_ext: Vec<u32> = Vec::new();
        for &v in corners {
            debug_assert!(v.0 < self.adj.capacity());
            seen.extend_from_slice(&self.vtx_hex[v.index()]);
            seen_ext.extend_from_slice(&self.vtx_ext[v.index()]);
        }
        seen.sort_unstable();
        seen.dedup();
        seen_ext.sort_unstable();
        seen_ext.dedup();
        for id in seen {
            if !tuples_compatible(corners, &self.hexes[id as usize]) {
                return None;
            }
        }
        for id in seen_ext {
            if !tuples_compatible(corners, &self.problem.external[id as usize]) {
                return None;
            }
        }

        let mark = Mark {
            adj: self.adj.mark(),
            undo: self.undo.len(),
        };
        self.adj.register_hex(corners);
        for f in facets {
            let c = self.counts.use_count(&f);
            self.set_count(f, c + 1);
        }
        let id = self.hexes.len() as u32;
        self.hexes.push(*corners);
        for &v in corners {
            self.vtx_hex[v.index()].push(id);
        }
        self.undo.push(CoreUndo::HexPushed);
        debug_assert!(self.front_invariant_holds());
        Some(mark)
    }

    fn rollback(&mut self, mark: Mark) {
        while self.undo.len() > mark.undo {
            match self.undo.pop().unwrap() {
                CoreUndo::Count { quad, prev } => {
                    let cur = self.counts.use_count(&quad);
                    if prev == 0 {
                        self.counts.0.remove(&quad);
                    } else {
                        self.counts.0.insert(quad, prev);
                    }
                    if cur != 1 && prev == 1 {
                        self.front.insert(quad);
                    } else if cur == 1 && prev != 1 {
                        self.front.remove(&quad);
                    }
                }
                CoreUndo::HexPushed => {
                    let corners = self.hexes.pop().unwrap();
                    for &v in &corners {
                        let popped = self.vtx_hex[v.index()].pop();
                        debug_assert_eq!(popped, Some(self.hexes.len() as u32));
                    }
                }
            }
        }
        self.adj.rollback(mark.adj);
    }

    /// Debug check, sampled: the front equals the facets with use count
    /// exactly 1. Recomputation is linear in the count map, too hot for
    /// every registration even in debug builds.
    fn front_invariant_holds(&self) -> bool {
        if cfg!(debug_assertions) {
            use std::sync::atomic::{AtomicU32, Ordering};
            static SAMPLE: AtomicU32 = AtomicU32::new(0);
            if !SAMPLE.fetch_add(1, Ordering::Relaxed).is_multiple_of(256) {
                return true;
            }
            let expect: BTreeSet<CanonicalQuad> = self
                .counts
                .0
                .iter()
                .filter(|&(_, &c)| c == 1)
                .map(|(q, _)| *q)
                .collect();
            expect == self.front
        } else {
            true
        }
    }
}

fn seed_external(
    adj: &mut AdjacencyState,
    counts: &mut CoreCounts,
    front: &BTreeSet<CanonicalQuad>,
    ext: &[VertexId; 8],
    capacity: u32,
) -> bool {
    use crate::adjacency::DiagonalOwner;
    use crate::combinatorial::{
        hex_edges, hex_facet_diagonals, hex_interior_diagonals, order_pair,
    };
    let in_universe = |v: VertexId| v.0 < capacity;
    for (a, b) in hex_edges(ext) {
        if in_universe(a) && in_universe(b) {
            if adj.is_known_diagonal(a, b) || adj.is_quad_diagonal(a, b) {
                return false;
            }
            adj.add_edge(a, b);
        }
    }
    let facets = hex_facets(ext);
    for (fi, diags) in hex_facet_diagonals(ext).iter().enumerate() {
        let [d1, d2] = *diags;
        let facet_in = facets[fi].vertices().iter().all(|&v| in_universe(v));
        for (d, partner) in [(d1, d2), (d2, d1)] {
            if in_universe(d.0) && in_universe(d.1) {
                if adj.is_known_neighbor(d.0, d.1) || adj.is_known_diagonal(d.0, d.1) {
                    return false;
                }
                // The owner quad is stored over mapped labels, sentinels
                // included, so two external hexes sharing a partially
                // out-of-universe facet recognize it as the same quad. A
                // search facet never equals a sentinel-bearing quad, which
                // is exactly the rule-4 rejection those facets need.
                if let Some(owner) = adj.diagonal_owner(d.0, d.1) {
                    if owner.quad.as_ref() != Some(&facets[fi]) {
                        return false;
                    }
                }
                let partner_in = in_universe(partner.0) && in_universe(partner.1);
                adj.add_quad_diagonal(
                    d,
                    DiagonalOwner {
                        partner: partner_in.then(|| order_pair(partner.0, partner.1)),
                        quad: Some(facets[fi]),
                    },
                );
            }
        }
        // Facets fully inside the universe that are not on the search
        // boundary are saturated: the searched mesh may never use them.
        if facet_in && !front.contains(&facets[fi]) {
            counts.0.insert(facets[fi], 2);
        }
    }
    for (a, b) in hex_interior_diagonals(ext) {
        if in_universe(a) && in_universe(b) {
            if adj.is_known_neighbor(a, b) || adj.is_quad_diagonal(a, b) {
                return false;
            }
            adj.add_interior_diagonal(a, b);
        }
    }
    true
}

/// Control block threading the drive mode through the recursion: plain
/// exploration, scripted replay of a decision prefix, and child collection
/// for the breadth-first splitter.
pub(crate) struct Drive<'a> {
    pub sink: &'a mut dyn FnMut(&[[VertexId; 8]]),
    pub stats: SearchStats,
    pub options: &'a SearchOptions,
    pub script: &'a [Decision],
    pub script_pos: usize,
    pub collect: Option<&'a mut Vec<Vec<Decision>>>,
    tick: u32,
}

struct Aborted;

impl<'a> Drive<'a> {
    pub fn new(
        options: &'a SearchOptions,
        script: &'a [Decision],
        collect: Option<&'a mut Vec<Vec<Decision>>>,
        sink: &'a mut dyn FnMut(&[[VertexId; 8]]),
    ) -> Self {
        Self {
            sink,
            stats: SearchStats::default(),
            options,
            script,
            script_pos: 0,
            collect,
            tick: 0,
        }
    }

    fn tick(&mut self) -> std::result::Result<(), Aborted> {
        self.stats.nodes += 1;
        self.tick = self.tick.wrapping_add(1);
        if self.tick.is_multiple_of(4096) {
            if let Some(deadline) = self.options.deadline {
                if Instant::now() >= deadline {
                    self.stats.aborted = true;
                    return Err(Aborted);
                }
            }
        }
        Ok(())
    }
}

fn ensure_level(levels: &mut Vec<CandidateSets>, depth: usize, capacity: u32) {
    while levels.len() <= depth + 1 {
        levels.push(CandidateSets::new(capacity));
    }
}

fn node(
    state: &mut SearchState,
    levels: &mut Vec<CandidateSets>,
    drive: &mut Drive,
    depth: usize,
    fresh: u32,
) -> std::result::Result<(), Aborted> {
    drive.tick()?;
    if state.front.is_empty() {
        drive.stats.solutions += 1;
        (drive.sink)(&state.hexes);
        if let Some(limit) = drive.options.solution_limit {
            if drive.stats.solutions >= limit {
                return Err(Aborted);
            }
        }
        return Ok(());
    }
    if state.hexes.len() >= state.problem.limits.max_hexes {
        drive.stats.backtracks += 1;
        return Ok(());
    }
    let base = state.select_front_facet().expect("front checked non-empty");
    ensure_level(levels, depth, state.adj.capacity());
    initialize_candidates_into(&state.adj, &base, &mut levels[depth]);
    expand(state, levels, drive, depth, fresh)
}

fn expand(
    state: &mut SearchState,
    levels: &mut Vec<CandidateSets>,
    drive: &mut Drive,
    depth: usize,
    fresh: u32,
) -> std::result::Result<(), Aborted> {
    drive.tick()?;
    let mut fresh = fresh;
    let outcome = filter_candidates(
        &state.adj,
        &state.counts,
        &mut levels[depth],
        &mut fresh,
        drive.options.symmetry_breaking,
    );
    match outcome {
        FilterOutcome::Dead => {
            drive.stats.backtracks += 1;
            Ok(())
        }
        FilterOutcome::Complete(corners) => match state.register_hex(&corners) {
            None => {
                drive.stats.backtracks += 1;
                Ok(())
            }
            Some(mark) => {
                let r = node(state, levels, drive, depth + 1, fresh);
                state.rollback(mark);
                r
            }
        },
        FilterOutcome::Branch(slot) => {
            let limit =
                precedence_limit(fresh, state.adj.capacity(), drive.options.symmetry_breaking);
            // Ascending label order; the fresh label is the largest and so
            // comes last.
            let values: Vec<u32> = bitset::iter_ones_upto(levels[depth].row(slot), limit).collect();

            if drive.script_pos < drive.script.len() {
                let d = drive.script[drive.script_pos];
                drive.script_pos += 1;
                debug_assert_eq!(d.slot as usize, slot, "replay must follow the same tree");
                debug_assert!(values.contains(&d.value));
                ensure_level(levels, depth, state.adj.capacity());
                let (head, tail) = levels.split_at_mut(depth + 1);
                tail[0].copy_from(&head[depth]);
                let mut f2 = fresh;
                fix_slot(&mut levels[depth + 1], slot, VertexId(d.value), &mut f2);
                return expand(state, levels, drive, depth + 1, f2);
            }

            if let Some(out) = drive.collect.as_deref_mut() {
                for v in values {
                    let mut prefix: Vec<Decision> = drive.script.to_vec();
                    prefix.push(Decision {
                        slot: slot as u8,
                        value: v,
                    });
                    out.push(prefix);
                }
                return Ok(());
            }

            for v in values {
                ensure_level(levels, depth, state.adj.capacity());
                let (head, tail) = levels.split_at_mut(depth + 1);
                tail[0].copy_from(&head[depth]);
                let mut f2 = fresh;
                fix_slot(&mut levels[depth + 1], slot, VertexId(v), &mut f2);
                expand(state, levels, drive, depth + 1, f2)?;
            }
            Ok(())
        }
    }
}

/// Run one drive over a fresh or reused state. Crate-internal entry shared
/// by the public sequential search and the parallel driver.
pub(crate) fn drive_search(
    state: &mut SearchState,
    levels: &mut Vec<CandidateSets>,
    options: &SearchOptions,
    script: &[Decision],
    collect: Option<&mut Vec<Vec<Decision>>>,
    sink: &mut dyn FnMut(&[[VertexId; 8]]),
) -> SearchStats {
    if state.infeasible {
        return SearchStats::default();
    }
    let mut drive = Drive::new(options, script, collect, sink);
    let fresh = state.n_boundary;
    let _ = node(state, levels, &mut drive, 0, fresh);
    drive.stats
}

/// Enumerate every hexahedral mesh conformal to the problem boundary within
/// the limits, streaming each solution to `sink` exactly once.
pub fn search<S: FnMut(&[[VertexId; 8]])>(
    problem: &SearchProblem,
    options: &SearchOptions,
    sink: &mut S,
) -> Result<SearchStats> {
    let mut state = SearchState::new(problem)?;
    let mut levels = Vec::new();
    Ok(drive_search(
        &mut state,
        &mut levels,
        options,
        &[],
        None,
        &mut |hexes| sink(hexes),
    ))
}

/// Count solutions without materializing them.
pub fn count_solutions(problem: &SearchProblem, options: &SearchOptions) -> Result<SearchStats> {
    search(problem, options, &mut |_| {})
}

/// Collect all solutions; intended for small instances and tests.
pub fn collect_solutions(
    problem: &SearchProblem,
    options: &SearchOptions,
) -> Result<(SearchStats, Vec<Solution>)> {
    let mut out = Vec::new();
    let stats = search(problem, options, &mut |hexes| {
        out.push(Solution {
            hexes: hexes.to_vec(),
        });
    })?;
    Ok((stats, out))
}
