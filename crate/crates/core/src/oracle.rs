//! Brute-force reference enumerator.
//!
//! Enumerates the same solution space as [`mod@crate::search`] by exhaustively
//! trying every ordered corner assignment for the hexahedron covering the
//! smallest exposed facet, with only first-principles pruning: facet use
//! counts, pairwise hex compatibility, and pair-role consistency against the
//! input boundary quads. None of the bit-set or candidate-filter machinery
//! is involved, so agreement between the two enumerators checks the filter
//! rules for both over- and under-pruning. Exponential; test scale only.

use std::collections::HashMap;

use crate::combinatorial::{
    hex_facets, tuple_facet_with_vertex_set, tuple_pair_role, tuples_compatible, CanonicalQuad,
    PairRole, QuadSurface, VertexId,
};
use crate::search::{SearchLimits, Solution};

/// Pair relation inside a quad: adjacent corners are edges, opposite corners
/// are the diagonal.
fn quad_pair_is_edge(quad: &CanonicalQuad, a: VertexId, b: VertexId) -> bool {
    let v = quad.vertices();
    let pa = v.iter().position(|&x| x == a).unwrap();
    let pb = v.iter().position(|&x| x == b).unwrap();
    (pa as i32 - pb as i32).rem_euclid(4) != 2
}

/// Can this hexahedron coexist with a quad that must appear as a facet of
/// some (present or future) hexahedron of the mesh?
pub fn hex_respects_quad(corners: &[VertexId; 8], quad: &CanonicalQuad) -> bool {
    let shared: Vec<VertexId> = quad
        .vertices()
        .into_iter()
        .filter(|v| corners.contains(v))
        .collect();
    if shared.len() == 4 {
        let mut set = [shared[0], shared[1], shared[2], shared[3]];
        set.sort_unstable();
        return tuple_facet_with_vertex_set(corners, &set) == Some(*quad);
    }
    for i in 0..shared.len() {
        for j in (i + 1)..shared.len() {
            let role_h = tuple_pair_role(corners, shared[i], shared[j]).unwrap();
            let edge_q = quad_pair_is_edge(quad, shared[i], shared[j]);
            // The only viable coexistence for a partial overlap is edge
            // against edge; any diagonal involvement forces an eventual
            // incompatible hex pair.
            if !(edge_q && role_h == PairRole::Edge) {
                return false;
            }
        }
    }
    true
}

struct Oracle<'a> {
    boundary: &'a QuadSurface,
    limits: SearchLimits,
    counts: HashMap<CanonicalQuad, u8>,
    hexes: Vec<[VertexId; 8]>,
    out: Vec<Solution>,
}

impl<'a> Oracle<'a> {
    fn exposed_facet(&self) -> Option<CanonicalQuad> {
        self.counts
            .iter()
            .filter(|&(_, &c)| c == 1)
            .map(|(q, _)| *q)
            .min()
    }

    fn recurse(&mut self) {
        let Some(base) = self.exposed_facet() else {
            self.out.push(Solution {
                hexes: self.hexes.clone(),
            });
            return;
        };
        if self.hexes.len() >= self.limits.max_hexes {
            return;
        }
        let bv = base.vertices();
        let alphabet: Vec<u32> = (0..self.limits.max_vertices)
            .filter(|&l| !bv.contains(&VertexId(l)))
            .collect();
        for &t0 in &alphabet {
            for &t1 in &alphabet {
                if t1 == t0 {
                    continue;
                }
                for &t2 in &alphabet {
                    if t2 == t0 || t2 == t1 {
                        continue;
                    }
                    for &t3 in &alphabet {
                        if t3 == t0 || t3 == t1 || t3 == t2 {
                            continue;
                        }
                        let corners = [
                            bv[0],
                            bv[1],
                            bv[2],
                            bv[3],
                            VertexId(t0),
                            VertexId(t1),
                            VertexId(t2),
                            VertexId(t3),
                        ];
                        self.try_hex(corners);
                    }
                }
            }
        }
    }

    fn try_hex(&mut self, corners: [VertexId; 8]) {
        let facets = hex_facets(&corners);
        for f in &facets {
            if *self.counts.get(f).unwrap_or(&0) >= 2 {
                return;
            }
        }
        if !self.hexes.iter().all(|h| tuples_compatible(h, &corners)) {
            return;
        }
        if !self
            .boundary
            .quads()
            .iter()
            .all(|q| hex_respects_quad(&corners, q))
        {
            return;
        }
        for f in &facets {
            *self.counts.entry(*f).or_insert(0) += 1;
        }
        self.hexes.push(corners);
        self.recurse();
        self.hexes.pop();
        for f in &facets {
            let c = self.counts.get_mut(f).unwrap();
            *c -= 1;
            if *c == 0 {
                self.counts.remove(f);
            }
        }
    }
}

/// Enumerate every conformal mesh within the limits, in all interior
/// labellings. Callers deduplicate with
/// [`crate::search::canonical_solution_key`].
pub fn enumerate_meshes(boundary: &QuadSurface, limits: SearchLimits) -> Vec<Solution> {
    let mut counts = HashMap::new();
    for q in boundary.quads() {
        counts.insert(*q, 1u8);
    }
    let mut oracle = Oracle {
        boundary,
        limits,
        counts,
        hexes: Vec::new(),
        out: Vec::new(),
    };
    oracle.recurse();
    oracle.out
}
