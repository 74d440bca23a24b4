//! Differential validation of the search engine against the brute-force
//! oracle: identical canonical solution sets on randomized small boundaries,
//! boundary exactness, duplicate-freeness, and the symmetry-breaking hook.

mod common;

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{relabel_surface, solution_keys};
use hexmesh_core::combinatorial::HexComplex;
use hexmesh_core::io::{gen_cube_boundary, gen_grid_boundary, gen_spindle_boundary};
use hexmesh_core::search::collect_solutions;
use hexmesh_core::{
    canonicalize_hex, oracle, QuadSurface, SearchLimits, SearchOptions, SearchProblem,
};

/// Search and oracle must agree on the canonical solution set; the search
/// must emit no duplicates and only boundary-exact solutions.
fn assert_equivalence(surface: &QuadSurface, max_hexes: usize, max_vertices: u32) {
    let n_boundary = surface.n_vertices();
    let problem =
        SearchProblem::new(surface.clone(), SearchLimits::new(max_hexes, max_vertices)).unwrap();
    let (stats, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
    let search_keys = solution_keys(&sols, n_boundary);
    assert_eq!(
        search_keys.len() as u64,
        stats.solutions,
        "duplicate emissions on {surface:?} H<={max_hexes} V<={max_vertices}"
    );

    for s in &sols {
        assert!(s.hexes.len() <= max_hexes);
        let labels: BTreeSet<u32> = s.hexes.iter().flatten().map(|v| v.0).collect();
        assert!((labels.len() as u32) <= max_vertices || labels.is_empty());
        let complex = HexComplex::new(
            s.hexes
                .iter()
                .map(|t| canonicalize_hex(*t).unwrap())
                .collect(),
        )
        .expect("emitted solutions must be valid complexes");
        assert_eq!(
            complex.boundary_of().quads(),
            surface.quads(),
            "solution boundary must equal the input"
        );
    }

    let oracle_sols = oracle::enumerate_meshes(surface, SearchLimits::new(max_hexes, max_vertices));
    let oracle_keys = solution_keys(&oracle_sols, n_boundary);
    assert_eq!(
        search_keys, oracle_keys,
        "solution sets differ on {surface:?} H<={max_hexes} V<={max_vertices}"
    );
}

#[test]
fn cube_relabellings_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let base = gen_cube_boundary().to_quad_surface().unwrap();
    for i in 0..10 {
        let surface = relabel_surface(&base, &mut rng);
        let v_max = 9 + (i % 2) as u32; // 9 or 10
        assert_equivalence(&surface, 4, v_max);
    }
}

#[test]
fn spindle_relabellings_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let base = gen_spindle_boundary(0.25, 1.0).to_quad_surface().unwrap();
    for _ in 0..6 {
        let surface = relabel_surface(&base, &mut rng);
        assert_equivalence(&surface, 4, 10);
    }
}

#[test]
fn two_hex_boundaries_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAB);
    let base = gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap();
    for i in 0..6 {
        let surface = relabel_surface(&base, &mut rng);
        let v_max = 12 + (i % 3) as u32; // 12..14
        assert_equivalence(&surface, 3, v_max);
    }
}

#[test]
fn three_hex_chain_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xCD);
    let base = gen_grid_boundary(1, 1, 3).to_quad_surface().unwrap();
    for _ in 0..2 {
        let surface = relabel_surface(&base, &mut rng);
        assert_equivalence(&surface, 3, 17);
    }
}

#[test]
fn six_hex_solution_of_the_stack_is_found_by_both() {
    // The 1x1x2 boundary admits exactly two meshes within H<=6, V<=16: the
    // plain stack and a 6-hex mesh with 4 interior vertices. The oracle
    // additionally sees every interior labelling of the latter: 1 + 4! raw
    // solutions.
    let surface = gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap();
    let problem = SearchProblem::new(surface.clone(), SearchLimits::new(6, 16)).unwrap();
    let (stats, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
    assert_eq!(stats.solutions, 2);
    let mut sizes: Vec<usize> = sols.iter().map(|s| s.hexes.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![2, 6]);
    let six = sols.iter().find(|s| s.hexes.len() == 6).unwrap();
    let labels: BTreeSet<u32> = six.hexes.iter().flatten().map(|v| v.0).collect();
    assert_eq!(labels.len(), 16, "6-hex mesh uses 4 interior vertices");

    let oracle_sols = oracle::enumerate_meshes(&surface, SearchLimits::new(6, 16));
    assert_eq!(oracle_sols.len(), 25);
    assert_eq!(
        solution_keys(&sols, surface.n_vertices()),
        solution_keys(&oracle_sols, surface.n_vertices())
    );
}

#[test]
fn disabled_symmetry_breaking_yields_same_deduplicated_sets() {
    let surfaces = [
        gen_cube_boundary().to_quad_surface().unwrap(),
        gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap(),
    ];
    for surface in &surfaces {
        let n_boundary = surface.n_vertices();
        let limits = SearchLimits::new(3, n_boundary + 2);
        let problem = SearchProblem::new(surface.clone(), limits).unwrap();

        let on = SearchOptions::default();
        let (stats_on, sols_on) = collect_solutions(&problem, &on).unwrap();
        let keys_on = solution_keys(&sols_on, n_boundary);
        // With precedence on, the raw emission count equals the
        // deduplicated count: zero duplicates.
        assert_eq!(stats_on.solutions as usize, keys_on.len());

        let off = SearchOptions {
            symmetry_breaking: false,
            ..Default::default()
        };
        let (stats_off, sols_off) = collect_solutions(&problem, &off).unwrap();
        let keys_off = solution_keys(&sols_off, n_boundary);
        assert_eq!(keys_on, keys_off, "deduplicated sets must agree");
        // Unless no solution uses interior vertices, the raw count without
        // breaking is strictly larger.
        assert!(stats_off.solutions >= stats_on.solutions);
    }
}
