//! Helpers shared by the integration suites.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use hexmesh_core::combinatorial::canonicalize_quad;
use hexmesh_core::{canonical_solution_key, CanonicalHex, QuadSurface, Solution, VertexId};

pub fn relabel_surface(surface: &QuadSurface, rng: &mut ChaCha8Rng) -> QuadSurface {
    let n = surface.n_vertices();
    let mut perm: Vec<u32> = (0..n).collect();
    perm.shuffle(rng);
    let quads = surface
        .quads()
        .iter()
        .map(|q| {
            let v = q.vertices();
            canonicalize_quad(
                VertexId(perm[v[0].index()]),
                VertexId(perm[v[1].index()]),
                VertexId(perm[v[2].index()]),
                VertexId(perm[v[3].index()]),
            )
            .unwrap()
        })
        .collect();
    QuadSurface::new(quads).unwrap()
}

pub fn solution_keys(solutions: &[Solution], n_boundary: u32) -> BTreeSet<Vec<CanonicalHex>> {
    solutions
        .iter()
        .map(|s| canonical_solution_key(&s.hexes, n_boundary))
        .collect()
}
