//! Per-vertex adjacency bit-sets with an undo trail, and the candidate-set
//! machinery for the hexahedron under construction.
//!
//! Three relation families are tracked for every vertex `v`:
//!
//! * allowed-neighbors: vertices `u` such that the edge `(u, v)` can still be
//!   added without contradicting existing structure;
//! * known-neighbors: vertices adjacent to `v` in registered hexahedra or in
//!   boundary quads;
//! * known-diagonals: vertices `u` such that `(u, v)` is the interior
//!   diagonal of a registered hexahedron.
//!
//! A fourth family records quad-diagonal partners, together with a map from
//! each diagonal pair to the quad owning it. Candidate vertices for the
//! eight corners of a new hexahedron are pruned against these families:
//!
//! 1. an edge may match neither a quad diagonal nor an interior diagonal;
//! 2. an interior diagonal may match no existing edge, quad diagonal or
//!    interior diagonal;
//! 3. a facet diagonal may match neither an existing edge nor an interior
//!    diagonal;
//! 4. when one diagonal of a facet matches an existing quad diagonal, the
//!    other diagonal must match that quad's second diagonal;
//! 5. all eight corners are distinct.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::bitset::{self, words_for};
use crate::combinatorial::{
    canonicalize_quad_unchecked, hex_edges, hex_facet_diagonals, hex_facets,
    hex_interior_diagonals, order_pair, position_role, CanonicalQuad, PairRole, QuadSurface,
    VertexId, FACET_DIAG_POS, FACET_POS,
};
use crate::error::{Error, Result};

const MAX_CAPACITY: u32 = 1 << 16;

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum Family {
    Allowed,
    KnownNeighbors,
    KnownDiagonals,
    QuadDiagonals,
}

#[derive(Debug)]
enum TrailOp {
    /// A bit that was set; undo clears it.
    Set(Family, u32, u32),
    /// A bit that was cleared; undo sets it.
    Cleared(Family, u32, u32),
    /// A diagonal-pair map entry that was inserted; undo removes it.
    PairInserted((u32, u32)),
}

/// Marker into the trail for rollback.
#[derive(Copy, Clone, Debug)]
pub struct AdjacencyMark(usize);

/// What is known about the quad owning a diagonal pair. For cavity searches
/// the owning quad may involve vertices outside the search universe; those
/// components are then unrepresentable and recorded as `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalOwner {
    /// The quad's other diagonal.
    pub partner: Option<(VertexId, VertexId)>,
    /// The owning quad itself.
    pub quad: Option<CanonicalQuad>,
}

pub struct AdjacencyState {
    capacity: u32,
    words: usize,
    allowed: Vec<u64>,
    known_neighbors: Vec<u64>,
    known_diagonals: Vec<u64>,
    quad_diagonals: Vec<u64>,
    diag_owners: HashMap<(u32, u32), DiagonalOwner>,
    trail: Vec<TrailOp>,
    /// Set when the seeded structure itself violates the rules; the search
    /// must then report zero solutions.
    infeasible: bool,
}

impl AdjacencyState {
    pub fn new(capacity: u32) -> Result<Self> {
        if capacity > MAX_CAPACITY {
            return Err(Error::Capacity(format!(
                "vertex capacity {capacity} exceeds the supported maximum {MAX_CAPACITY}"
            )));
        }
        let words = words_for(capacity).max(1);
        let n = capacity as usize;
        let mut allowed = vec![0u64; n * words];
        for v in 0..capacity {
            let row = &mut allowed[v as usize * words..(v as usize + 1) * words];
            bitset::fill_upto(row, capacity);
            bitset::clear_bit(row, v);
        }
        Ok(Self {
            capacity,
            words,
            allowed,
            known_neighbors: vec![0u64; n * words],
            known_diagonals: vec![0u64; n * words],
            quad_diagonals: vec![0u64; n * words],
            diag_owners: HashMap::new(),
            trail: Vec::new(),
            infeasible: false,
        })
    }

    /// Seed the state from the prescribed boundary: quad edges become known
    /// neighbors, quad diagonals become quad-diagonal pairs (rule 1 prunes
    /// them from allowed-neighbors).
    pub fn from_boundary(boundary: &QuadSurface, capacity: u32) -> Result<Self> {
        if capacity < boundary.n_vertices() {
            return Err(Error::Capacity(format!(
                "capacity {} below boundary vertex count {}",
                capacity,
                boundary.n_vertices()
            )));
        }
        let mut state = Self::new(capacity)?;
        for quad in boundary.quads() {
            state.seed_quad(quad);
        }
        state.trail.clear();
        Ok(state)
    }

    /// Record one quad's edges and diagonals. Conflicts with already-seeded
    /// structure mark the state infeasible instead of failing: a boundary
    /// whose quads cross each other admits no mesh.
    pub fn seed_quad(&mut self, quad: &CanonicalQuad) {
        for (a, b) in quad.edges() {
            if self.has(Family::KnownDiagonals, a, b) || self.has(Family::QuadDiagonals, a, b) {
                self.infeasible = true;
            }
            self.set_pair(Family::KnownNeighbors, a, b);
        }
        let [d1, d2] = quad.diagonals();
        for (d, partner) in [(d1, d2), (d2, d1)] {
            if self.has(Family::KnownNeighbors, d.0, d.1) {
                self.infeasible = true;
            }
            if let Some(owner) = self.diag_owners.get(&(d.0 .0, d.1 .0)) {
                if owner.quad.as_ref() != Some(quad) {
                    self.infeasible = true;
                }
            }
            self.add_quad_diagonal(
                d,
                DiagonalOwner {
                    partner: Some(partner),
                    quad: Some(*quad),
                },
            );
        }
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn is_infeasible(&self) -> bool {
        self.infeasible
    }

    #[inline]
    fn family(&self, f: Family) -> &Vec<u64> {
        match f {
            Family::Allowed => &self.allowed,
            Family::KnownNeighbors => &self.known_neighbors,
            Family::KnownDiagonals => &self.known_diagonals,
            Family::QuadDiagonals => &self.quad_diagonals,
        }
    }

    #[inline]
    fn family_mut(&mut self, f: Family) -> &mut Vec<u64> {
        match f {
            Family::Allowed => &mut self.allowed,
            Family::KnownNeighbors => &mut self.known_neighbors,
            Family::KnownDiagonals => &mut self.known_diagonals,
            Family::QuadDiagonals => &mut self.quad_diagonals,
        }
    }

    #[inline]
    fn row_of(buf: &[u64], words: usize, v: u32) -> &[u64] {
        &buf[v as usize * words..(v as usize + 1) * words]
    }

    #[inline]
    pub fn allowed_row(&self, v: VertexId) -> &[u64] {
        Self::row_of(&self.allowed, self.words, v.0)
    }

    #[inline]
    pub fn known_neighbors_row(&self, v: VertexId) -> &[u64] {
        Self::row_of(&self.known_neighbors, self.words, v.0)
    }

    #[inline]
    pub fn known_diagonals_row(&self, v: VertexId) -> &[u64] {
        Self::row_of(&self.known_diagonals, self.words, v.0)
    }

    #[inline]
    pub fn quad_diagonals_row(&self, v: VertexId) -> &[u64] {
        Self::row_of(&self.quad_diagonals, self.words, v.0)
    }

    pub fn is_known_neighbor(&self, a: VertexId, b: VertexId) -> bool {
        self.has(Family::KnownNeighbors, a, b)
    }

    pub fn is_known_diagonal(&self, a: VertexId, b: VertexId) -> bool {
        self.has(Family::KnownDiagonals, a, b)
    }

    pub fn is_quad_diagonal(&self, a: VertexId, b: VertexId) -> bool {
        self.has(Family::QuadDiagonals, a, b)
    }

    pub fn diagonal_owner(&self, a: VertexId, b: VertexId) -> Option<&DiagonalOwner> {
        let (a, b) = order_pair(a, b);
        self.diag_owners.get(&(a.0, b.0))
    }

    fn has(&self, f: Family, a: VertexId, b: VertexId) -> bool {
        bitset::test_bit(Self::row_of(self.family(f), self.words, a.0), b.0)
    }

    fn set_pair(&mut self, f: Family, a: VertexId, b: VertexId) {
        let words = self.words;
        for (x, y) in [(a, b), (b, a)] {
            let buf = self.family_mut(f);
            let row = &mut buf[x.index() * words..(x.index() + 1) * words];
            let changed = bitset::set_bit(row, y.0);
            if changed {
                self.trail.push(TrailOp::Set(f, x.0, y.0));
            }
        }
    }

    fn clear_pair(&mut self, f: Family, a: VertexId, b: VertexId) {
        let words = self.words;
        for (x, y) in [(a, b), (b, a)] {
            let buf = self.family_mut(f);
            let row = &mut buf[x.index() * words..(x.index() + 1) * words];
            let changed = bitset::clear_bit(row, y.0);
            if changed {
                self.trail.push(TrailOp::Cleared(f, x.0, y.0));
            }
        }
    }

    pub fn add_edge(&mut self, a: VertexId, b: VertexId) {
        self.set_pair(Family::KnownNeighbors, a, b);
    }

    pub fn add_interior_diagonal(&mut self, a: VertexId, b: VertexId) {
        self.set_pair(Family::KnownDiagonals, a, b);
        self.clear_pair(Family::Allowed, a, b);
    }

    pub fn add_quad_diagonal(&mut self, pair: (VertexId, VertexId), owner: DiagonalOwner) {
        let (a, b) = order_pair(pair.0, pair.1);
        self.set_pair(Family::QuadDiagonals, a, b);
        self.clear_pair(Family::Allowed, a, b);
        let key = (a.0, b.0);
        if let std::collections::hash_map::Entry::Vacant(e) = self.diag_owners.entry(key) {
            e.insert(owner);
            self.trail.push(TrailOp::PairInserted(key));
        }
    }

    /// Check that a completed corner tuple's derived pairs do not contradict
    /// the registered structure (rules 1-4 from the receiving side).
    pub fn validate_hex_relations(&self, corners: &[VertexId; 8]) -> bool {
        for (a, b) in hex_edges(corners) {
            if self.has(Family::QuadDiagonals, a, b) || self.has(Family::KnownDiagonals, a, b) {
                return false;
            }
        }
        let facets = hex_facets(corners);
        for (fi, diags) in hex_facet_diagonals(corners).iter().enumerate() {
            for &(a, b) in diags {
                if self.has(Family::KnownNeighbors, a, b) || self.has(Family::KnownDiagonals, a, b)
                {
                    return false;
                }
                if let Some(owner) = self.diagonal_owner(a, b) {
                    if owner.quad.as_ref() != Some(&facets[fi]) {
                        return false;
                    }
                }
            }
        }
        for (a, b) in hex_interior_diagonals(corners) {
            if self.has(Family::KnownNeighbors, a, b)
                || self.has(Family::KnownDiagonals, a, b)
                || self.has(Family::QuadDiagonals, a, b)
            {
                return false;
            }
        }
        true
    }

    /// Register the 12 edges, 12 facet diagonals and 4 interior diagonals of
    /// a completed hexahedron. Callers must have validated the tuple first.
    pub fn register_hex(&mut self, corners: &[VertexId; 8]) -> AdjacencyMark {
        let mark = self.mark();
        for (a, b) in hex_edges(corners) {
            self.add_edge(a, b);
        }
        let facets = hex_facets(corners);
        for (fi, diags) in hex_facet_diagonals(corners).iter().enumerate() {
            let [d1, d2] = *diags;
            for (d, partner) in [(d1, d2), (d2, d1)] {
                self.add_quad_diagonal(
                    d,
                    DiagonalOwner {
                        partner: Some(partner),
                        quad: Some(facets[fi]),
                    },
                );
            }
        }
        for (a, b) in hex_interior_diagonals(corners) {
            self.add_interior_diagonal(a, b);
        }
        mark
    }

    pub fn mark(&self) -> AdjacencyMark {
        AdjacencyMark(self.trail.len())
    }

    pub fn rollback(&mut self, mark: AdjacencyMark) {
        while self.trail.len() > mark.0 {
            let op = self.trail.pop().unwrap();
            match op {
                TrailOp::Set(f, v, u) => {
                    let words = self.words;
                    let buf = self.family_mut(f);
                    bitset::clear_bit(&mut buf[v as usize * words..(v as usize + 1) * words], u);
                }
                TrailOp::Cleared(f, v, u) => {
                    let words = self.words;
                    let buf = self.family_mut(f);
                    bitset::set_bit(&mut buf[v as usize * words..(v as usize + 1) * words], u);
                }
                TrailOp::PairInserted(key) => {
                    self.diag_owners.remove(&key);
                }
            }
        }
    }

    /// Fingerprint of the whole bit state; used by tests to verify that
    /// rollback is bit-exact.
    pub fn fingerprint(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut mix = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        for buf in [
            &self.allowed,
            &self.known_neighbors,
            &self.known_diagonals,
            &self.quad_diagonals,
        ] {
            for &w in buf.iter() {
                mix(w);
            }
        }
        let mut keys: Vec<_> = self.diag_owners.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            mix(((a as u64) << 32) | b as u64);
        }
        h
    }
}

/// Candidate sets `C1..C8` for the hexahedron under construction. The four
/// base corners are fixed; the remaining rows hold the structurally feasible
/// vertices for the top corners. Labels not yet used by the search stay in
/// the rows; value-precedence masking narrows them to a single fresh label
/// at decision time.
#[derive(Clone)]
pub struct CandidateSets {
    words: usize,
    rows: Box<[u64]>,
    pub fixed: [Option<VertexId>; 8],
}

impl CandidateSets {
    pub fn new(capacity: u32) -> Self {
        let words = words_for(capacity).max(1);
        Self {
            words,
            rows: vec![0u64; words * 8].into_boxed_slice(),
            fixed: [None; 8],
        }
    }

    #[inline]
    pub fn row(&self, slot: usize) -> &[u64] {
        &self.rows[slot * self.words..(slot + 1) * self.words]
    }

    #[inline]
    pub fn row_mut(&mut self, slot: usize) -> &mut [u64] {
        &mut self.rows[slot * self.words..(slot + 1) * self.words]
    }

    pub fn copy_from(&mut self, other: &CandidateSets) {
        debug_assert_eq!(self.words, other.words);
        self.rows.copy_from_slice(&other.rows);
        self.fixed = other.fixed;
    }

    pub fn fix(&mut self, slot: usize, v: VertexId) {
        self.fixed[slot] = Some(v);
    }

    pub fn all_fixed(&self) -> Option<[VertexId; 8]> {
        let mut out = [VertexId(0); 8];
        for (slot, fixed) in out.iter_mut().zip(&self.fixed) {
            *slot = (*fixed)?;
        }
        Some(out)
    }
}

/// Inclusive view limit implementing value precedence: already-used labels
/// plus at most the single next fresh label remain visible.
#[inline]
pub fn precedence_limit(next_fresh: u32, capacity: u32, symmetry_breaking: bool) -> u32 {
    if symmetry_breaking {
        next_fresh.min(capacity.saturating_sub(1))
    } else {
        capacity.saturating_sub(1)
    }
}

/// Narrow one candidate row to the precedence view: used labels are kept,
/// fresh labels beyond `next_fresh` are dropped.
pub fn apply_precedence(row: &[u64], next_fresh: u32, capacity: u32) -> Vec<u32> {
    let limit = precedence_limit(next_fresh, capacity, true);
    bitset::iter_ones_upto(row, limit).collect()
}

/// (facet index, diagonal partner slot, other-diagonal slots).
type DiagEntry = (usize, usize, (usize, usize));

/// Per-slot structural tables for the corner under construction.
struct SlotTables {
    /// For each slot, the 3 facets it belongs to.
    diag_info: [[DiagEntry; 3]; 8],
    /// For each slot, facets it belongs to with the slot's 3 co-corner
    /// positions in cyclic order (for facet reconstruction).
    facet_members: [[(usize, [usize; 3]); 3]; 8],
}

fn slot_tables() -> &'static SlotTables {
    static TABLES: OnceLock<SlotTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut diag_info = [[(usize::MAX, usize::MAX, (usize::MAX, usize::MAX)); 3]; 8];
        let mut facet_members = [[(usize::MAX, [usize::MAX; 3]); 3]; 8];
        let mut di_len = [0usize; 8];
        let mut fm_len = [0usize; 8];
        for (fi, facet) in FACET_POS.iter().enumerate() {
            let [(a1, b1), (a2, b2)] = FACET_DIAG_POS[fi];
            for &s in facet {
                let (partner, other) = if s == a1 {
                    (b1, (a2, b2))
                } else if s == b1 {
                    (a1, (a2, b2))
                } else if s == a2 {
                    (b2, (a1, b1))
                } else {
                    (a2, (a1, b1))
                };
                diag_info[s][di_len[s]] = (fi, partner, other);
                di_len[s] += 1;
                let pos = facet.iter().position(|&x| x == s).unwrap();
                let others = [
                    facet[(pos + 1) % 4],
                    facet[(pos + 2) % 4],
                    facet[(pos + 3) % 4],
                ];
                facet_members[s][fm_len[s]] = (fi, others);
                fm_len[s] += 1;
            }
        }
        assert!(di_len.iter().all(|&n| n == 3));
        SlotTables {
            diag_info,
            facet_members,
        }
    })
}

/// Initialize candidate sets for a hexahedron built on `base`, which must be
/// a front facet. `C1..C4` become the base corners; `C(4+i)` starts from
/// Allowed-Neighbors of the corner below it minus the base corners. The
/// remaining per-rule pruning runs in [`filter_candidates`].
pub fn initialize_candidates(adj: &AdjacencyState, base: &CanonicalQuad) -> CandidateSets {
    let mut sets = CandidateSets::new(adj.capacity());
    initialize_candidates_into(adj, base, &mut sets);
    sets
}

/// [`initialize_candidates`] into a reused buffer; the hot path of the
/// search allocates nothing per node.
pub fn initialize_candidates_into(
    adj: &AdjacencyState,
    base: &CanonicalQuad,
    sets: &mut CandidateSets,
) {
    debug_assert_eq!(sets.words, words_for(adj.capacity()).max(1));
    sets.fixed = [None; 8];
    let base_v = base.vertices();
    for (i, &corner) in base_v.iter().enumerate() {
        sets.fix(i, corner);
    }
    for i in 0..4 {
        let slot = 4 + i;
        let words = sets.words;
        let row = &mut sets.rows[slot * words..(slot + 1) * words];
        row.copy_from_slice(adj.allowed_row(base_v[i]));
        for b in base_v {
            bitset::clear_bit(row, b.0);
        }
    }
}

/// Interface to the facet use counts maintained by the search: 0 = unseen,
/// 1 = on the front, 2 = saturated.
pub trait FacetUse {
    fn use_count(&self, quad: &CanonicalQuad) -> u8;
}

pub enum FilterOutcome {
    /// Some candidate set became empty.
    Dead,
    /// All eight corners are fixed.
    Complete([VertexId; 8]),
    /// Branching is required on `slot` (minimal candidate view of size >= 2).
    Branch(usize),
}

/// Prune candidates against the fixed corners and the registered structure
/// until a fixpoint, auto-fixing every slot whose view narrows to a single
/// vertex. `next_fresh` advances when a fresh label is fixed.
pub fn filter_candidates<F: FacetUse>(
    adj: &AdjacencyState,
    facet_use: &F,
    sets: &mut CandidateSets,
    next_fresh: &mut u32,
    symmetry_breaking: bool,
) -> FilterOutcome {
    let tables = slot_tables();
    let capacity = adj.capacity();
    loop {
        let mut changed = false;
        for slot in 4..8 {
            if sets.fixed[slot].is_some() {
                continue;
            }
            changed |= prune_slot(adj, facet_use, sets, slot, tables);
            let limit = precedence_limit(*next_fresh, capacity, symmetry_breaking);
            let row = sets.row(slot);
            match bitset::count_ones_upto(row, limit) {
                0 => return FilterOutcome::Dead,
                1 => {
                    let v = bitset::first_one_upto(row, limit).unwrap();
                    fix_slot(sets, slot, VertexId(v), next_fresh);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(corners) = sets.all_fixed() {
        return FilterOutcome::Complete(corners);
    }
    // Min-domain branching: smallest view among unfixed slots, lowest slot
    // index on ties.
    let limit = precedence_limit(*next_fresh, capacity, symmetry_breaking);
    let mut best = None::<(u32, usize)>;
    for slot in 4..8 {
        if sets.fixed[slot].is_some() {
            continue;
        }
        let n = bitset::count_ones_upto(sets.row(slot), limit);
        debug_assert!(n >= 2);
        if best.is_none_or(|(bn, _)| n < bn) {
            best = Some((n, slot));
        }
    }
    FilterOutcome::Branch(best.expect("at least one unfixed slot").1)
}

/// Fix a slot to a chosen vertex, consuming a fresh label when `v` is one.
pub fn fix_slot(sets: &mut CandidateSets, slot: usize, v: VertexId, next_fresh: &mut u32) {
    debug_assert!(sets.fixed[slot].is_none());
    sets.fix(slot, v);
    if v.0 == *next_fresh {
        *next_fresh += 1;
    }
}

/// The slot picked for branching among views of size > 1; exposed separately
/// for the branching-rule tests.
pub fn pick_branch_slot(sizes: [u32; 4]) -> usize {
    let mut best = (u32::MAX, 0usize);
    for (i, &n) in sizes.iter().enumerate() {
        if n > 1 && n < best.0 {
            best = (n, 4 + i);
        }
    }
    best.1
}

/// One pruning pass for a single slot. Returns true when bits were removed.
fn prune_slot<F: FacetUse>(
    adj: &AdjacencyState,
    facet_use: &F,
    sets: &mut CandidateSets,
    slot: usize,
    tables: &SlotTables,
) -> bool {
    let words = sets.words;
    let mut changed = false;

    // Role masks against every fixed corner (rules 1-3 and 5).
    let mut scratch = vec![0u64; words];
    for other in 0..8 {
        if other == slot {
            continue;
        }
        let Some(w) = sets.fixed[other] else { continue };
        scratch.iter_mut().for_each(|x| *x = 0);
        bitset::set_bit(&mut scratch, w.0);
        match position_role(slot, other).expect("distinct corner positions") {
            PairRole::Edge => {
                bitset::or_assign(&mut scratch, adj.known_diagonals_row(w));
                bitset::or_assign(&mut scratch, adj.quad_diagonals_row(w));
            }
            PairRole::FacetDiagonal => {
                bitset::or_assign(&mut scratch, adj.known_neighbors_row(w));
                bitset::or_assign(&mut scratch, adj.known_diagonals_row(w));
            }
            PairRole::InteriorDiagonal => {
                bitset::or_assign(&mut scratch, adj.known_neighbors_row(w));
                bitset::or_assign(&mut scratch, adj.known_diagonals_row(w));
                bitset::or_assign(&mut scratch, adj.quad_diagonals_row(w));
            }
        }
        changed |= bitset::and_not_assign(sets.row_mut(slot), &scratch);
    }

    // Rule 4, viewed from this slot: for each facet through the slot, when
    // the cross diagonal is fixed and matches a registered quad diagonal,
    // this slot's diagonal must complete that quad's other diagonal.
    for &(_, partner_slot, (oa, ob)) in &tables.diag_info[slot] {
        let cross = match (sets.fixed[oa], sets.fixed[ob]) {
            (Some(x), Some(y)) => Some((x, y)),
            _ => None,
        };
        if let Some((x, y)) = cross {
            if let Some(owner) = adj.diagonal_owner(x, y) {
                // The other diagonal {slot, partner_slot} must equal the
                // owner's partner pair.
                scratch.iter_mut().for_each(|x| *x = 0);
                match owner.partner {
                    None => {}
                    Some((p, q)) => match sets.fixed[partner_slot] {
                        Some(w) => {
                            if w == p {
                                bitset::set_bit(&mut scratch, q.0);
                            } else if w == q {
                                bitset::set_bit(&mut scratch, p.0);
                            }
                        }
                        None => {
                            bitset::set_bit(&mut scratch, p.0);
                            bitset::set_bit(&mut scratch, q.0);
                        }
                    },
                }
                changed |= bitset::and_assign(sets.row_mut(slot), &scratch);
            }
        }
        // Converse direction: this slot's diagonal partner is fixed; any
        // candidate forming a registered quad diagonal with it constrains
        // the cross diagonal.
        if let Some(w) = sets.fixed[partner_slot] {
            let qd_row = adj.quad_diagonals_row(w);
            let mut to_check: Vec<u32> = Vec::new();
            {
                let row = sets.row(slot);
                for wi in 0..words {
                    let mut both = row[wi] & qd_row[wi];
                    while both != 0 {
                        to_check.push(wi as u32 * 64 + both.trailing_zeros());
                        both &= both - 1;
                    }
                }
            }
            for u in to_check {
                let u = VertexId(u);
                let owner = adj
                    .diagonal_owner(u, w)
                    .expect("bit set implies registered pair");
                let ok = match owner.partner {
                    None => false,
                    Some((p, q)) => {
                        let xa = sets.fixed[oa];
                        let xb = sets.fixed[ob];
                        match (xa, xb) {
                            (Some(x), Some(y)) => order_pair(x, y) == order_pair(p, q),
                            (Some(x), None) | (None, Some(x)) => x == p || x == q,
                            (None, None) => true,
                        }
                    }
                };
                if !ok {
                    changed |= bitset::clear_bit(sets.row_mut(slot), u.0);
                }
            }
        }
    }

    // Facet saturation: when the slot's three co-corners in a facet are
    // fixed, the completed facet must not already be used twice.
    for &(_, others) in &tables.facet_members[slot] {
        let trio = [
            sets.fixed[others[0]],
            sets.fixed[others[1]],
            sets.fixed[others[2]],
        ];
        let (Some(a), Some(b), Some(c)) = (trio[0], trio[1], trio[2]) else {
            continue;
        };
        let row = sets.row(slot);
        let candidates: Vec<u32> = bitset::iter_ones_upto(row, adj.capacity() - 1).collect();
        for u in candidates {
            let quad = canonicalize_quad_unchecked([VertexId(u), a, b, c]);
            if facet_use.use_count(&quad) >= 2 {
                changed |= bitset::clear_bit(sets.row_mut(slot), u);
            }
        }
    }

    changed
}
