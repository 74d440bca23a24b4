//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measurements (run with `--nocapture` to see them as they happen).

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{relabel_surface, solution_keys};
use hexmesh_core::combinatorial::HexComplex;
use hexmesh_core::geometry::{untangle, validity, GeoMesh, UntangleConfig, REFERENCE_CORNERS};
use hexmesh_core::io::{
    gen_cube_boundary, gen_grid_boundary, gen_grid_mesh, gen_schneiders_boundary,
    gen_spindle_boundary,
};
use hexmesh_core::simplify::{simplify, SimplifyConfig};
use hexmesh_core::{
    canonicalize_hex, collect_solutions, count_solutions, oracle, parallel_search, CanonicalHex,
    QuadSurface, SearchLimits, SearchOptions, SearchProblem, VertexId,
};

fn pass(n: u32, what: &str, detail: &str) {
    println!("ACCEPTANCE {n} ({what}): PASS {detail}");
}

fn v(x: u32) -> VertexId {
    VertexId(x)
}

/// Criterion 1: on randomized small boundaries, the engine's canonical
/// solution set equals an independent brute-force enumeration.
#[test]
fn criterion_1_oracle_equivalence() {
    let t = Instant::now();
    let mut instances: Vec<(QuadSurface, usize, u32)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97);
    let cube = gen_cube_boundary().to_quad_surface().unwrap();
    for i in 0..10 {
        instances.push((relabel_surface(&cube, &mut rng), 4, 9 + (i % 2) as u32));
    }
    let spindle = gen_spindle_boundary(0.25, 1.0).to_quad_surface().unwrap();
    for _ in 0..6 {
        instances.push((relabel_surface(&spindle, &mut rng), 4, 10));
    }
    let stack = gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap();
    for i in 0..6 {
        instances.push((relabel_surface(&stack, &mut rng), 3, 12 + (i % 3) as u32));
    }
    assert!(instances.len() >= 20);

    for (surface, max_hexes, max_vertices) in &instances {
        let n_boundary = surface.n_vertices();
        let problem = SearchProblem::new(
            surface.clone(),
            SearchLimits::new(*max_hexes, *max_vertices),
        )
        .unwrap();
        let (stats, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
        let search_keys = solution_keys(&sols, n_boundary);
        assert_eq!(search_keys.len() as u64, stats.solutions, "duplicates");
        let oracle_sols =
            oracle::enumerate_meshes(surface, SearchLimits::new(*max_hexes, *max_vertices));
        assert_eq!(
            search_keys,
            solution_keys(&oracle_sols, n_boundary),
            "disagreement at H<={max_hexes} V<={max_vertices}"
        );
    }
    pass(
        1,
        "oracle equivalence",
        &format!(
            "{} randomized boundaries in {:.1}s",
            instances.len(),
            t.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 2: the cube boundary has exactly one mesh within H<=2, V<=8,
/// and the 1x1x2 boundary exactly one within H<=2.
#[test]
fn criterion_2_cube_and_stack_uniqueness() {
    let cube = gen_cube_boundary().to_quad_surface().unwrap();
    let problem = SearchProblem::new(cube, SearchLimits::new(2, 8)).unwrap();
    let (stats, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
    assert_eq!(stats.solutions, 1);
    assert_eq!(
        sols[0].canonical_hexes(),
        vec![canonicalize_hex([0, 1, 2, 3, 4, 5, 6, 7].map(v)).unwrap()]
    );

    let stack = gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap();
    let problem = SearchProblem::new(stack, SearchLimits::new(2, 12)).unwrap();
    let (stats, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
    assert_eq!(stats.solutions, 1);
    assert_eq!(sols[0].hexes.len(), 2);
    pass(2, "cube and 1x1x2 uniqueness", "1 solution each");
}

fn refutation_sweep(surface: QuadSurface, label: &str, criterion: u32) {
    let n_b = surface.n_vertices();
    let deadline = Instant::now() + Duration::from_secs(600);
    let mut detail = String::new();
    for k in 0..=5u32 {
        let problem =
            SearchProblem::new(surface.clone(), SearchLimits::new(usize::MAX, n_b + k)).unwrap();
        let options = SearchOptions {
            deadline: Some(deadline),
            ..Default::default()
        };
        let t = Instant::now();
        let stats = count_solutions(&problem, &options).unwrap();
        assert!(
            !stats.aborted,
            "{label}: 10-minute budget exhausted at interior-vertex limit {k}"
        );
        assert_eq!(
            stats.solutions, 0,
            "{label}: unexpected mesh with <= {k} interior vertices"
        );
        detail.push_str(&format!("k={k}:{:.2}s ", t.elapsed().as_secs_f64()));
    }
    pass(
        criterion,
        &format!("{label} UNSAT for interior vertices 0..=5"),
        &detail,
    );
}

/// Criterion 3: desk-scale refutation toward the pyramid's 18-vertex bound.
#[test]
fn criterion_3_schneiders_refutation() {
    let surface = gen_schneiders_boundary().to_quad_surface().unwrap();
    refutation_sweep(surface, "Schneiders' pyramid", 3);
}

/// Criterion 4: desk-scale refutation toward the spindle's 29-vertex bound.
#[test]
fn criterion_4_spindle_refutation() {
    let surface = gen_spindle_boundary(0.25, 1.0).to_quad_surface().unwrap();
    refutation_sweep(surface, "octagonal spindle", 4);
}

/// Criterion 5: parallel and sequential runs agree exactly; speedup is
/// asserted only on machines with at least 4 physical cores.
#[test]
fn criterion_5_parallel_count_preservation() {
    let boundaries = vec![
        (
            "cube",
            gen_cube_boundary().to_quad_surface().unwrap(),
            4,
            10,
        ),
        (
            "stack",
            gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap(),
            6,
            16,
        ),
        (
            "spindle",
            gen_spindle_boundary(0.25, 1.0).to_quad_surface().unwrap(),
            4,
            14,
        ),
    ];
    for (name, surface, h, vx) in &boundaries {
        let problem = SearchProblem::new(surface.clone(), SearchLimits::new(*h, *vx)).unwrap();
        let options = SearchOptions::default();
        let (seq, seq_sols) = collect_solutions(&problem, &options).unwrap();
        for threads in [2usize, 4] {
            let (par, par_sols) = parallel_search(&problem, &options, threads, 8, true).unwrap();
            assert_eq!(
                par.solutions, seq.solutions,
                "{name} with {threads} threads"
            );
            let nb = surface.n_vertices();
            assert_eq!(
                solution_keys(&seq_sols, nb),
                solution_keys(&par_sols, nb),
                "{name} solution sets"
            );
        }
    }

    // Speedup measurement on a refutation workload.
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let surface = gen_schneiders_boundary().to_quad_surface().unwrap();
    let problem = SearchProblem::new(surface, SearchLimits::new(usize::MAX, 18 + 4)).unwrap();
    let options = SearchOptions::default();
    let t = Instant::now();
    let seq = count_solutions(&problem, &options).unwrap();
    let seq_wall = t.elapsed();
    let threads = cores.clamp(2, 8);
    let t = Instant::now();
    let (par, _) = parallel_search(&problem, &options, threads, 64, false).unwrap();
    let par_wall = t.elapsed();
    assert_eq!(seq.solutions, par.solutions);
    let speedup = seq_wall.as_secs_f64() / par_wall.as_secs_f64();
    if cores >= 4 {
        assert!(
            speedup > 1.0,
            "expected speedup > 1 on {cores} cores, measured {speedup:.2}"
        );
    }
    pass(
        5,
        "parallel count preservation",
        &format!(
            "speedup {speedup:.2} with {threads} threads on {cores} cores (asserted only on >= 4)"
        ),
    );
}

/// Criterion 6: with precedence breaking disabled the deduplicated solution
/// sets match, and the enabled run emits zero duplicates.
#[test]
fn criterion_6_symmetry_breaking() {
    let surfaces = vec![
        gen_cube_boundary().to_quad_surface().unwrap(),
        gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap(),
    ];
    let mut detail = String::new();
    for surface in &surfaces {
        let nb = surface.n_vertices();
        // Limits chosen so solutions with interior vertices exist for the
        // stack (the 6-hex mesh).
        let limits = if nb == 12 {
            SearchLimits::new(6, 16)
        } else {
            SearchLimits::new(3, nb + 2)
        };
        let problem = SearchProblem::new(surface.clone(), limits).unwrap();
        let on = SearchOptions::default();
        let (stats_on, sols_on) = collect_solutions(&problem, &on).unwrap();
        let keys_on = solution_keys(&sols_on, nb);
        assert_eq!(
            stats_on.solutions as usize,
            keys_on.len(),
            "raw emission count must equal deduplicated count"
        );
        let off = SearchOptions {
            symmetry_breaking: false,
            ..Default::default()
        };
        let (stats_off, sols_off) = collect_solutions(&problem, &off).unwrap();
        assert_eq!(keys_on, solution_keys(&sols_off, nb));
        detail.push_str(&format!(
            "[{} quads: {} raw vs {} dedup] ",
            surface.len(),
            stats_off.solutions,
            stats_on.solutions
        ));
    }
    pass(6, "symmetry breaking", &detail);
}

/// Boundary coordinates realizing both meshes of the 1x1x2 boundary with
/// strictly positive sampled Jacobians; found by offline optimization and
/// verified here from scratch.
const ROUND_TRIP_COORDS: [[f64; 3]; 16] = [
    [
        1.557_996_961_518_308_4e-1,
        -7.195_361_510_027_005e-1,
        -2.315_238_978_244_413_3e-2,
    ],
    [
        -3.712_363_738_496_876e-1,
        -8.440_792_246_129_437e-1,
        1.943_621_764_109_039e-1,
    ],
    [
        -8.280_780_015_426_173e-1,
        -3.525_329_357_672_102_3e-1,
        -2.870_124_269_039_609_5e-1,
    ],
    [
        -1.862_449_420_665_504e-1,
        -1.031_102_075_511_259e-1,
        -5.859_097_789_860_575e-1,
    ],
    [
        1.466_766_904_017_121_2,
        2.906_350_638_472_343_7e-1,
        8.453_815_048_822_362e-1,
    ],
    [
        1.663_418_098_137_717,
        -5.946_069_337_250_455e-1,
        1.608_937_278_670_636_6e-1,
    ],
    [
        9.373_139_555_858_726e-3,
        3.248_771_248_643_143e-1,
        -3.501_464_293_313_722_4e-1,
    ],
    [
        -2.205_463_316_780_846_4,
        5.080_143_220_449_507e-2,
        7.423_903_595_555_222e-2,
    ],
    [
        3.758_691_680_122_060_5e-1,
        3.158_457_214_819_458e-1,
        2.737_399_281_606_529_6e-1,
    ],
    [
        1.048_116_844_367_169_8,
        -3.150_302_264_840_349e-2,
        3.668_200_059_796_184e-2,
    ],
    [
        1.190_932_912_895_723_6e-1,
        4.206_063_056_248_678e-1,
        -2.104_580_301_963_041_6e-1,
    ],
    [
        -7.421_902_455_594_495e-1,
        4.550_525_433_066_840_4e-1,
        2.312_113_670_099_125e-2,
    ],
    [
        2.450_366_379_138_415_6e-1,
        -1.874_014_760_367_261_3e-1,
        -6.024_364_828_887_428e-2,
    ],
    [
        -6.882_034_389_698_763e-2,
        -1.111_601_275_328_098_8e-1,
        4.172_285_488_525_06e-2,
    ],
    [
        -4.366_043_951_973_691_6e-1,
        2.436_590_146_197_986_6e-2,
        -1.110_237_925_702_818_3e-1,
    ],
    [
        -6.257_183_254_887_967e-2,
        4.300_628_576_806_151e-2,
        -2.415_752_944_501_455e-1,
    ],
];

const ROUND_TRIP_SIX: [[u32; 8]; 6] = [
    [0, 3, 2, 1, 12, 15, 14, 13],
    [0, 1, 4, 5, 12, 13, 8, 9],
    [0, 5, 6, 3, 12, 9, 10, 15],
    [1, 2, 7, 4, 13, 14, 11, 8],
    [2, 3, 6, 7, 14, 15, 10, 11],
    [8, 11, 10, 9, 13, 14, 15, 12],
];

/// Criterion 7: simplifying the 6-hex mesh of the 1x1x2 boundary (as its
/// own cavity) recovers a mesh no larger than the 2-hex stack, with the
/// boundary preserved exactly and validity passing.
#[test]
fn criterion_7_simplifier_round_trip() {
    let t = Instant::now();
    // Both meshes are enumerated live; the larger must match the frozen
    // combinatorial structure used by the coordinate certificate.
    let surface = gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap();
    let problem = SearchProblem::new(surface.clone(), SearchLimits::new(6, 16)).unwrap();
    let (_, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
    let small = sols.iter().find(|s| s.hexes.len() == 2).unwrap();
    let big = sols.iter().find(|s| s.hexes.len() == 6).unwrap();
    let frozen: BTreeSet<CanonicalHex> = ROUND_TRIP_SIX
        .iter()
        .map(|t| canonicalize_hex(t.map(v)).unwrap())
        .collect();
    let enumerated: BTreeSet<CanonicalHex> = big
        .hexes
        .iter()
        .map(|t| canonicalize_hex(*t).unwrap())
        .collect();
    assert_eq!(
        frozen, enumerated,
        "certificate matches the enumerated mesh"
    );

    // Embed the larger mesh with the certificate coordinates.
    let hexes: Vec<[VertexId; 8]> = ROUND_TRIP_SIX.iter().map(|t| t.map(v)).collect();
    let big_mesh = GeoMesh::new(hexes, ROUND_TRIP_COORDS.to_vec()).unwrap();
    let report = validity(&big_mesh, 3);
    assert!(
        report.is_valid(),
        "certificate coordinates must embed the 6-hex mesh (min J {:.3e})",
        report.min_jacobian
    );

    let config = SimplifyConfig {
        seed: 11,
        cavity_min: 6,
        cavity_max: 6,
        remesh_budget: Duration::from_secs(120),
        ..Default::default()
    };
    let (out, simplify_report) = simplify(&big_mesh, &config).unwrap();
    assert!(
        out.hexes.len() <= small.hexes.len(),
        "result has {} hexes, expected <= {}",
        out.hexes.len(),
        small.hexes.len()
    );
    // Identical boundary: same labelled facet set, same coordinates.
    assert_eq!(
        big_mesh.complex().boundary_of().quads(),
        out.complex().boundary_of().quads()
    );
    for b in big_mesh.complex().boundary_vertices() {
        assert_eq!(big_mesh.coords[b.index()], out.coords[b.index()]);
    }
    let out_report = validity(&out, 3);
    assert!(out_report.is_valid());
    assert!(!simplify_report.iterations.is_empty());
    pass(
        7,
        "simplifier round trip",
        &format!(
            "6 -> {} hexes in {:.1}s, min J {:.3e}",
            out.hexes.len(),
            t.elapsed().as_secs_f64(),
            out_report.min_jacobian
        ),
    );
}

/// Criterion 8: geometry invariants of validity and untangling.
#[test]
fn criterion_8_geometry_invariants() {
    // Inverted-element detection: swap two corners across a diagonal.
    let mut cube = GeoMesh::new(
        vec![[0, 1, 2, 3, 4, 5, 6, 7].map(v)],
        REFERENCE_CORNERS.to_vec(),
    )
    .unwrap();
    assert!(validity(&cube, 3).is_valid());
    cube.coords.swap(0, 6);
    let report = validity(&cube, 3);
    assert!(!report.is_valid());
    assert!(report.min_jacobian < 0.0);

    // Perturb-then-untangle on a 2x2x2 grid: the only interior vertex is
    // displaced far outside its kernel.
    let mut mesh = gen_grid_mesh(2, 2, 2).to_geo_mesh().unwrap();
    let interior: Vec<usize> = (0..mesh.n_vertices())
        .filter(|&i| !mesh.is_boundary[i])
        .collect();
    assert_eq!(interior.len(), 1);
    let boundary_before: Vec<[f64; 3]> = (0..mesh.n_vertices())
        .filter(|&i| mesh.is_boundary[i])
        .map(|i| mesh.coords[i])
        .collect();
    mesh.coords[interior[0]] = [7.0, -3.0, 9.0];
    assert!(!validity(&mesh, 3).is_valid());
    assert!(untangle(&mut mesh, &UntangleConfig::default()));
    let report = validity(&mesh, 3);
    assert!(report.is_valid() && report.min_jacobian > 0.0);
    let boundary_after: Vec<[f64; 3]> = (0..mesh.n_vertices())
        .filter(|&i| mesh.is_boundary[i])
        .map(|i| mesh.coords[i])
        .collect();
    assert_eq!(
        boundary_before, boundary_after,
        "fixed vertices must not move"
    );

    pass(
        8,
        "geometry invariants",
        &format!("recovered min J {:.3e}", report.min_jacobian),
    );
}

/// Criterion 9 (optional, non-gating): simplify an externally provided
/// 88-element mesh of Schneiders' pyramid by at least two hexes. Provide
/// the mesh as a hexm file via HEXMESH_PYRAMID88_MESH.
#[test]
#[ignore = "requires the externally downloaded 88-element mesh"]
fn criterion_9_external_88_element_mesh() {
    let Some(path) = std::env::var_os("HEXMESH_PYRAMID88_MESH") else {
        println!("ACCEPTANCE 9: SKIPPED (set HEXMESH_PYRAMID88_MESH to a hexm file)");
        return;
    };
    let data = hexmesh_core::io::read_hexm(std::path::Path::new(&path)).unwrap();
    let mesh = data.to_geo_mesh().unwrap();
    let before = mesh.hexes.len();
    let config = SimplifyConfig {
        seed: 2,
        cavity_min: 6,
        cavity_max: 12,
        remesh_budget: Duration::from_secs(30),
        ..Default::default()
    };
    let deadline = Instant::now() + Duration::from_secs(600);
    let mut current = mesh;
    while Instant::now() < deadline {
        let (next, report) = simplify(&current, &config).unwrap();
        let done = report.iterations.is_empty();
        current = next;
        if done || current.hexes.len() + 2 <= before {
            break;
        }
    }
    assert!(
        current.hexes.len() + 2 <= before,
        "no reduction within the budget"
    );
    pass(
        9,
        "external mesh simplification",
        &format!("{} -> {} hexes", before, current.hexes.len()),
    );
}

/// The boundary-exactness property across every emitted solution of a
/// moderately rich instance (complements criterion 1).
#[test]
fn solutions_are_boundary_exact_and_within_limits() {
    let surface = gen_grid_boundary(1, 1, 2).to_quad_surface().unwrap();
    let problem = SearchProblem::new(surface.clone(), SearchLimits::new(6, 16)).unwrap();
    let (_, sols) = collect_solutions(&problem, &SearchOptions::default()).unwrap();
    for s in &sols {
        assert!(s.hexes.len() <= 6);
        let labels: BTreeSet<u32> = s.hexes.iter().flatten().map(|x| x.0).collect();
        assert!(labels.len() <= 16);
        let complex = HexComplex::new(
            s.hexes
                .iter()
                .map(|t| canonicalize_hex(*t).unwrap())
                .collect(),
        )
        .unwrap();
        assert_eq!(complex.boundary_of().quads(), surface.quads());
    }
}
