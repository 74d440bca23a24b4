//! Local mesh simplification: pick a cavity, search for a smaller mesh of
//! its boundary that stays compatible with the rest of the host mesh, splice
//! it in, and keep the result only when untangling produces valid geometry.
//!
//! Replacements preserve the hex-count parity, so the search runs with a hex
//! limit of two below the cavity size and an interior-vertex limit of one
//! below the cavity's interior count.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::combinatorial::{
    canonicalize_quad_unchecked, hex_facets, CanonicalQuad, QuadSurface, VertexId,
};
use crate::error::{Error, Result};
use crate::geometry::{orient_consistently, untangle, validity, GeoMesh, UntangleConfig};
use crate::search::{collect_solutions, SearchLimits, SearchOptions, SearchProblem};

#[derive(Clone, Debug)]
pub struct SimplifyConfig {
    pub seed: u64,
    /// Cavity size schedule: start small, raise by two when a full pass of
    /// attempts yields no improvement.
    pub cavity_min: usize,
    pub cavity_max: usize,
    /// Wall-clock budget per cavity remeshing search.
    pub remesh_budget: Duration,
    /// Enumerate all replacements and take the smallest, instead of the
    /// first one found.
    pub exhaustive: bool,
    pub samples_per_axis: usize,
    /// Selection attempts per cavity size before the size is raised.
    pub attempts_per_size: usize,
}

impl Default for SimplifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            cavity_min: 6,
            cavity_max: 18,
            remesh_budget: Duration::from_secs(30),
            exhaustive: false,
            samples_per_axis: 3,
            attempts_per_size: 16,
        }
    }
}

/// A facet-connected group of host hexes selected for remeshing.
#[derive(Clone, Debug)]
pub struct Cavity {
    pub hex_ids: Vec<usize>,
    pub interior_vertices: Vec<VertexId>,
    pub boundary_facets: Vec<CanonicalQuad>,
}

const MIN_INTERIOR_VERTICES: usize = 4;
const SELECTION_RETRIES: usize = 32;

/// Greedy growth from a random seed hex to exactly `n` hexes, re-seeded up
/// to a retry cap until the interior-vertex minimum is met. Deterministic
/// for a given rng state.
pub fn select_cavity(mesh: &GeoMesh, n: usize, rng: &mut ChaCha8Rng) -> Option<Cavity> {
    if n < 1 || n > mesh.hexes.len() {
        return None;
    }
    // facet -> incident hex ids
    let mut by_facet: HashMap<CanonicalQuad, Vec<usize>> = HashMap::new();
    for (h, t) in mesh.hexes.iter().enumerate() {
        for f in hex_facets(t) {
            by_facet.entry(f).or_default().push(h);
        }
    }
    for _ in 0..SELECTION_RETRIES {
        let seed = rng.gen_range(0..mesh.hexes.len());
        let mut in_cavity = vec![false; mesh.hexes.len()];
        let mut ids = vec![seed];
        in_cavity[seed] = true;
        while ids.len() < n {
            // All hexes sharing a facet with the cavity.
            let mut frontier: Vec<usize> = Vec::new();
            for &h in &ids {
                for f in hex_facets(&mesh.hexes[h]) {
                    for &g in &by_facet[&f] {
                        if !in_cavity[g] {
                            frontier.push(g);
                        }
                    }
                }
            }
            frontier.sort_unstable();
            frontier.dedup();
            let Some(&pick) = frontier.choose(rng) else {
                break;
            };
            in_cavity[pick] = true;
            ids.push(pick);
        }
        if ids.len() != n {
            continue;
        }
        let cavity = finish_cavity(mesh, ids);
        if cavity.interior_vertices.len() >= MIN_INTERIOR_VERTICES {
            return Some(cavity);
        }
    }
    None
}

fn finish_cavity(mesh: &GeoMesh, mut hex_ids: Vec<usize>) -> Cavity {
    hex_ids.sort_unstable();
    let mut facet_count: HashMap<CanonicalQuad, u8> = HashMap::new();
    for &h in &hex_ids {
        for f in hex_facets(&mesh.hexes[h]) {
            *facet_count.entry(f).or_insert(0) += 1;
        }
    }
    let mut boundary_facets: Vec<CanonicalQuad> = facet_count
        .iter()
        .filter(|&(_, &c)| c == 1)
        .map(|(q, _)| *q)
        .collect();
    boundary_facets.sort_unstable();
    let mut on_boundary: Vec<bool> = vec![false; mesh.n_vertices()];
    for q in &boundary_facets {
        for v in q.vertices() {
            on_boundary[v.index()] = true;
        }
    }
    let mut interior_vertices: Vec<VertexId> = hex_ids
        .iter()
        .flat_map(|&h| mesh.hexes[h])
        .filter(|v| !on_boundary[v.index()])
        .collect();
    interior_vertices.sort_unstable();
    interior_vertices.dedup();
    Cavity {
        hex_ids,
        interior_vertices,
        boundary_facets,
    }
}

/// A replacement found for a cavity, in host-mesh label space; labels at or
/// beyond the host vertex count are new interior vertices.
#[derive(Clone, Debug)]
pub struct RemeshOutcome {
    pub replacement: Option<Vec<[VertexId; 8]>>,
    pub hex_delta: i64,
    pub interior_vertex_delta: i64,
    pub search_aborted: bool,
}

/// Enumerate meshes of the cavity boundary with the adjacency state seeded
/// from every host hex outside the cavity, so that replacements stay
/// compatible with the rest of the mesh.
pub fn remesh_cavity(
    mesh: &GeoMesh,
    cavity: &Cavity,
    budget: Duration,
    exhaustive: bool,
) -> Result<RemeshOutcome> {
    let none = RemeshOutcome {
        replacement: None,
        hex_delta: 0,
        interior_vertex_delta: 0,
        search_aborted: false,
    };
    if cavity.hex_ids.len() < 3 || cavity.interior_vertices.is_empty() {
        return Ok(none);
    }

    // Host -> search relabelling for the cavity boundary vertices, in label
    // order for determinism.
    let mut to_search: HashMap<u32, u32> = HashMap::new();
    let mut to_host: Vec<u32> = Vec::new();
    {
        let mut labels: Vec<u32> = cavity
            .boundary_facets
            .iter()
            .flat_map(|q| q.vertices())
            .map(|v| v.0)
            .collect();
        labels.sort_unstable();
        labels.dedup();
        for l in labels {
            to_search.insert(l, to_host.len() as u32);
            to_host.push(l);
        }
    }
    let n_b = to_host.len() as u32;
    let capacity = n_b + (cavity.interior_vertices.len() as u32 - 1);

    let boundary = {
        let quads: Vec<CanonicalQuad> = cavity
            .boundary_facets
            .iter()
            .map(|q| {
                let v = q.vertices();
                canonicalize_quad_unchecked([
                    VertexId(to_search[&v[0].0]),
                    VertexId(to_search[&v[1].0]),
                    VertexId(to_search[&v[2].0]),
                    VertexId(to_search[&v[3].0]),
                ])
            })
            .collect();
        match QuadSurface::new(quads) {
            Ok(b) => b,
            // Pinched cavities have non-manifold boundaries; skip them.
            Err(_) => return Ok(none),
        }
    };

    // Hexes outside the cavity, mapped into the search space; labels not on
    // the cavity boundary become out-of-universe sentinels.
    let in_cavity = {
        let mut m = vec![false; mesh.hexes.len()];
        for &h in &cavity.hex_ids {
            m[h] = true;
        }
        m
    };
    let external: Vec<[VertexId; 8]> = mesh
        .hexes
        .iter()
        .enumerate()
        .filter(|(h, _)| !in_cavity[*h])
        .map(|(_, t)| {
            t.map(|v| match to_search.get(&v.0) {
                Some(&s) => VertexId(s),
                None => VertexId(capacity + v.0),
            })
        })
        .collect();

    let limits = SearchLimits::new(cavity.hex_ids.len() - 2, capacity);
    let problem = SearchProblem::new(boundary, limits)?.with_external_hexes(external);
    let options = SearchOptions {
        deadline: Some(Instant::now() + budget),
        solution_limit: if exhaustive { None } else { Some(1) },
        ..Default::default()
    };
    let (stats, solutions) = collect_solutions(&problem, &options)?;

    let best = solutions
        .into_iter()
        .min_by_key(|s| (s.hexes.len(), s.hexes.iter().flatten().map(|v| v.0).max()));
    let Some(best) = best else {
        return Ok(RemeshOutcome {
            search_aborted: stats.aborted,
            ..none
        });
    };

    // Map back to host labels; fresh search labels get new host labels.
    let host_n = mesh.n_vertices() as u32;
    let replacement: Vec<[VertexId; 8]> = best
        .hexes
        .iter()
        .map(|t| {
            t.map(|v| {
                if v.0 < n_b {
                    VertexId(to_host[v.index()])
                } else {
                    VertexId(host_n + (v.0 - n_b))
                }
            })
        })
        .collect();
    let new_interior: i64 = replacement
        .iter()
        .flatten()
        .filter(|v| v.0 >= host_n)
        .map(|v| v.0)
        .collect::<std::collections::BTreeSet<_>>()
        .len() as i64;
    Ok(RemeshOutcome {
        hex_delta: best.hexes.len() as i64 - cavity.hex_ids.len() as i64,
        interior_vertex_delta: new_interior - cavity.interior_vertices.len() as i64,
        replacement: Some(replacement),
        search_aborted: stats.aborted,
    })
}

/// Splice a replacement into the host: drop the cavity hexes, orient the
/// newcomers against the locked host orientation, and place new interior
/// vertices at the cavity-boundary centroid.
///
/// Surviving host labels, in particular every mesh-boundary label, keep
/// their values; new interior vertices reuse the label slots vacated by the
/// removed cavity interior and only then extend the vertex list. A vacated
/// slot below a surviving label stays as an unreferenced hole rather than
/// forcing a rename; trailing holes are truncated, so boundary-first hosts
/// stay densely labelled.
///
/// Returns the new mesh and the indices of the replacement's interior
/// vertices.
fn splice(
    mesh: &GeoMesh,
    cavity: &Cavity,
    replacement: &[[VertexId; 8]],
) -> Result<(GeoMesh, Vec<usize>)> {
    let host_n = mesh.n_vertices() as u32;
    let in_cavity = {
        let mut m = vec![false; mesh.hexes.len()];
        for &h in &cavity.hex_ids {
            m[h] = true;
        }
        m
    };

    let mut hexes: Vec<[VertexId; 8]> = Vec::new();
    let mut locked: Vec<bool> = Vec::new();
    for (h, t) in mesh.hexes.iter().enumerate() {
        if !in_cavity[h] {
            hexes.push(*t);
            locked.push(true);
        }
    }
    for t in replacement {
        hexes.push(*t);
        locked.push(false);
    }
    if !orient_consistently(&mut hexes, &locked) {
        return Err(Error::InvalidComplex(
            "replacement admits no consistent orientation".into(),
        ));
    }
    // A whole-mesh cavity leaves no locked hex to anchor the handedness;
    // vote with the signed corner volumes over the host coordinates and
    // mirror everything when the majority is negative.
    if !locked.iter().any(|&l| l) {
        let vote: f64 = hexes
            .iter()
            .filter(|t| t.iter().all(|v| v.0 < host_n))
            .map(|t| {
                let c: [[f64; 3]; 8] = std::array::from_fn(|i| mesh.coords[t[i].index()]);
                crate::geometry::corner_jacobians(&c).iter().sum::<f64>()
            })
            .sum();
        if vote < 0.0 {
            for t in hexes.iter_mut() {
                *t = crate::geometry::mirrored(t);
            }
        }
    }

    let centroid = {
        let mut c = [0.0f64; 3];
        let mut count = 0.0;
        let mut seen = std::collections::BTreeSet::new();
        for q in &cavity.boundary_facets {
            for v in q.vertices() {
                if seen.insert(v) {
                    for (ck, &xk) in c.iter_mut().zip(&mesh.coords[v.index()]) {
                        *ck += xk;
                    }
                    count += 1.0;
                }
            }
        }
        [c[0] / count, c[1] / count, c[2] / count]
    };

    let referenced: std::collections::BTreeSet<u32> = hexes.iter().flatten().map(|v| v.0).collect();
    let vacated: Vec<u32> = (0..host_n).filter(|l| !referenced.contains(l)).collect();
    let fresh: Vec<u32> = referenced
        .iter()
        .copied()
        .filter(|&l| l >= host_n)
        .collect();

    let mut remap: HashMap<u32, u32> = HashMap::new();
    let mut coords = mesh.coords.clone();
    let mut new_vertices: Vec<usize> = Vec::new();
    let mut free = vacated.into_iter();
    for f in fresh {
        let slot = free.next().unwrap_or_else(|| {
            coords.push(centroid);
            coords.len() as u32 - 1
        });
        coords[slot as usize] = centroid;
        remap.insert(f, slot);
        new_vertices.push(slot as usize);
    }
    let hexes: Vec<[VertexId; 8]> = hexes
        .iter()
        .map(|t| t.map(|v| VertexId(*remap.get(&v.0).unwrap_or(&v.0))))
        .collect();
    let max_used = hexes.iter().flatten().map(|v| v.0).max().unwrap_or(0);
    coords.truncate((max_used as usize + 1).max(1));
    let mesh = GeoMesh::new(hexes, coords)?;
    Ok((mesh, new_vertices))
}

/// One accepted simplification step, mirroring the remeshing log columns:
/// cavity sizes, replacement sizes, and the resulting mesh size.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub cavity_hexes: usize,
    pub cavity_vertices: usize,
    pub cavity_boundary_facets: usize,
    pub replacement_hexes: usize,
    pub replacement_vertices: usize,
    pub mesh_hexes_after: usize,
    pub mesh_vertices_after: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SimplifyReport {
    pub iterations: Vec<IterationRecord>,
    pub cavities_tried: u64,
    pub searches_aborted: u64,
}

/// Iteratively shrink the mesh. The boundary (combinatorial and geometric)
/// is preserved exactly; the hex count never increases and each accepted
/// replacement reduces it by at least two.
pub fn simplify(mesh: &GeoMesh, config: &SimplifyConfig) -> Result<(GeoMesh, SimplifyReport)> {
    let report0 = validity(mesh, config.samples_per_axis);
    if !report0.is_valid() {
        return Err(Error::Input(format!(
            "input mesh is invalid (min Jacobian {:.3e}); untangle it first",
            report0.min_jacobian
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current = mesh.clone();
    let mut report = SimplifyReport::default();

    let mut size = config.cavity_min;
    loop {
        let size_now = size.min(current.hexes.len());
        let mut improved = false;
        for _ in 0..config.attempts_per_size {
            report.cavities_tried += 1;
            let Some(cavity) = select_cavity(&current, size_now, &mut rng) else {
                break;
            };
            let outcome =
                remesh_cavity(&current, &cavity, config.remesh_budget, config.exhaustive)?;
            if outcome.search_aborted {
                report.searches_aborted += 1;
            }
            let Some(replacement) = outcome.replacement else {
                continue;
            };
            let cavity_bd_vertex_count = {
                let mut s = std::collections::BTreeSet::new();
                for q in &cavity.boundary_facets {
                    s.extend(q.vertices());
                }
                s.len()
            };
            let Ok((mut candidate, new_vertex_ids)) = splice(&current, &cavity, &replacement)
            else {
                continue;
            };
            let cfg = UntangleConfig {
                samples_per_axis: config.samples_per_axis,
                ..Default::default()
            };
            let mut ok = untangle(&mut candidate, &cfg);
            if !ok {
                // Second initialization: averaged neighbors, then retry.
                crate::geometry::relax_vertices(&mut candidate, &new_vertex_ids, 8);
                ok = untangle(&mut candidate, &cfg);
            }
            if !ok {
                // Connectivity change is undone: `current` stays untouched.
                continue;
            }
            let rec = IterationRecord {
                cavity_hexes: cavity.hex_ids.len(),
                cavity_vertices: cavity_bd_vertex_count + cavity.interior_vertices.len(),
                cavity_boundary_facets: cavity.boundary_facets.len(),
                replacement_hexes: replacement.len(),
                replacement_vertices: cavity_bd_vertex_count
                    + (cavity.interior_vertices.len() as i64 + outcome.interior_vertex_delta)
                        as usize,
                mesh_hexes_after: candidate.hexes.len(),
                mesh_vertices_after: candidate.n_vertices(),
            };
            debug_assert!(candidate.hexes.len() + 2 <= current.hexes.len());
            current = candidate;
            report.iterations.push(rec);
            improved = true;
            break;
        }
        if improved {
            size = config.cavity_min;
            continue;
        }
        if size_now >= config.cavity_max.min(current.hexes.len()) {
            break;
        }
        size += 2;
    }
    // Boundary preservation: same labelled quads, same coordinates.
    debug_assert_eq!(
        mesh.complex().boundary_of().quads(),
        current.complex().boundary_of().quads()
    );
    debug_assert!(mesh
        .complex()
        .boundary_vertices()
        .iter()
        .all(|v| mesh.coords[v.index()] == current.coords[v.index()]));
    Ok((current, report))
}
