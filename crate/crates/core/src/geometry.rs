//! Geometric layer: vertex coordinates, hex validity via sampled trilinear
//! Jacobians, orientation bookkeeping, and an iterative untangler that
//! relocates interior vertices until every hexahedron is valid.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::combinatorial::{
    canonicalize_hex, canonicalize_hex_unchecked, hex_facets, CanonicalQuad, HexComplex, VertexId,
    FACET_POS,
};
use crate::error::{Error, Result};

type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Reference cube corners in the corner convention.
pub const REFERENCE_CORNERS: [Vec3; 8] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, 1.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 1.0],
    [1.0, 1.0, 1.0],
    [0.0, 1.0, 1.0],
];

/// A combinatorial hex mesh embedded in 3-space. Corner tuples keep their
/// stored orientation; the canonical complex is derived on demand.
#[derive(Clone, Debug)]
pub struct GeoMesh {
    pub hexes: Vec<[VertexId; 8]>,
    pub coords: Vec<Vec3>,
    pub is_boundary: Vec<bool>,
}

impl GeoMesh {
    /// Validate the combinatorial structure (corner distinctness, pairwise
    /// compatibility, facet use counts), check coordinates, and derive
    /// boundary-vertex flags.
    pub fn new(hexes: Vec<[VertexId; 8]>, coords: Vec<Vec3>) -> Result<Self> {
        let complex = HexComplex::new(
            hexes
                .iter()
                .map(|t| canonicalize_hex(*t))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let n = coords.len();
        for t in &hexes {
            for v in t {
                if v.index() >= n {
                    return Err(Error::Input(format!(
                        "hex references vertex {v} but only {n} vertices are declared"
                    )));
                }
            }
        }
        for (i, c) in coords.iter().enumerate() {
            if !c.iter().all(|x| x.is_finite()) {
                return Err(Error::Input(format!(
                    "non-finite coordinates at vertex {i}"
                )));
            }
        }
        let mut is_boundary = vec![false; n];
        for v in complex.boundary_vertices() {
            is_boundary[v.index()] = true;
        }
        Ok(Self {
            hexes,
            coords,
            is_boundary,
        })
    }

    pub fn complex(&self) -> HexComplex {
        HexComplex::new(
            self.hexes
                .iter()
                .map(|t| canonicalize_hex_unchecked(*t))
                .collect(),
        )
        .expect("validated at construction")
    }

    pub fn n_vertices(&self) -> usize {
        self.coords.len()
    }

    pub fn corner_coords(&self, hex: usize) -> [Vec3; 8] {
        std::array::from_fn(|i| self.coords[self.hexes[hex][i].index()])
    }
}

/// Trilinear map Jacobian determinant at reference point `(u, v, w)`.
pub fn jacobian_at(corners: &[Vec3; 8], u: f64, v: f64, w: f64) -> f64 {
    // Partial derivatives of the 8 trilinear shape functions.
    let mut du = [0.0; 3];
    let mut dv = [0.0; 3];
    let mut dw = [0.0; 3];
    for (i, r) in REFERENCE_CORNERS.iter().enumerate() {
        let su = if r[0] > 0.5 { u } else { 1.0 - u };
        let sv = if r[1] > 0.5 { v } else { 1.0 - v };
        let sw = if r[2] > 0.5 { w } else { 1.0 - w };
        let gu = if r[0] > 0.5 { 1.0 } else { -1.0 };
        let gv = if r[1] > 0.5 { 1.0 } else { -1.0 };
        let gw = if r[2] > 0.5 { 1.0 } else { -1.0 };
        for k in 0..3 {
            du[k] += gu * sv * sw * corners[i][k];
            dv[k] += su * gv * sw * corners[i][k];
            dw[k] += su * sv * gw * corners[i][k];
        }
    }
    dot(cross(du, dv), dw)
}

/// Jacobian determinants at the 8 corners.
pub fn corner_jacobians(corners: &[Vec3; 8]) -> [f64; 8] {
    std::array::from_fn(|i| {
        let r = REFERENCE_CORNERS[i];
        jacobian_at(corners, r[0], r[1], r[2])
    })
}

/// Minimum Jacobian over the corners and an `s^3` interior sample grid.
pub fn min_jacobian_sampled(corners: &[Vec3; 8], samples_per_axis: usize) -> f64 {
    let mut min = f64::INFINITY;
    for j in corner_jacobians(corners) {
        min = min.min(j);
    }
    let s = samples_per_axis;
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                let u = (i as f64 + 0.5) / s as f64;
                let v = (j as f64 + 0.5) / s as f64;
                let w = (k as f64 + 0.5) / s as f64;
                min = min.min(jacobian_at(corners, u, v, w));
            }
        }
    }
    min
}

#[derive(Clone, Debug)]
pub struct ValidityReport {
    /// Minimum Jacobian over all hexes, corners and samples.
    pub min_jacobian: f64,
    /// Indices of hexes with a non-positive minimum.
    pub invalid_hexes: Vec<usize>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.invalid_hexes.is_empty() && self.min_jacobian > 0.0
    }
}

/// Sampled-Jacobian validity proxy: the mesh is valid when every corner and
/// sampled Jacobian is strictly positive. Degenerate hexes are reported as
/// invalid, not as errors.
pub fn validity(mesh: &GeoMesh, samples_per_axis: usize) -> ValidityReport {
    let mut min_jacobian = f64::INFINITY;
    let mut invalid_hexes = Vec::new();
    for h in 0..mesh.hexes.len() {
        let corners = mesh.corner_coords(h);
        let m = min_jacobian_sampled(&corners, samples_per_axis);
        if m <= 0.0 {
            invalid_hexes.push(h);
        }
        min_jacobian = min_jacobian.min(m);
    }
    if mesh.hexes.is_empty() {
        min_jacobian = f64::INFINITY;
    }
    ValidityReport {
        min_jacobian,
        invalid_hexes,
    }
}

/// Index permutation mirroring a corner tuple (a cube reflection); applying
/// it flips the hex's orientation.
pub const MIRROR_PERM: [usize; 8] = [0, 3, 2, 1, 4, 7, 6, 5];

pub fn mirrored(t: &[VertexId; 8]) -> [VertexId; 8] {
    std::array::from_fn(|i| t[MIRROR_PERM[i]])
}

/// Whether the stored cycle of each facet points outward for a positively
/// oriented hex; computed from the reference cube once.
fn facet_outward_parity() -> &'static [bool; 6] {
    static PARITY: OnceLock<[bool; 6]> = OnceLock::new();
    PARITY.get_or_init(|| {
        std::array::from_fn(|fi| {
            let f = FACET_POS[fi];
            let p: [Vec3; 4] = std::array::from_fn(|i| REFERENCE_CORNERS[f[i]]);
            let n = cross(sub(p[1], p[0]), sub(p[2], p[0]));
            let centroid: Vec3 =
                std::array::from_fn(|k| (p[0][k] + p[1][k] + p[2][k] + p[3][k]) / 4.0);
            let outward = sub(centroid, [0.5, 0.5, 0.5]);
            dot(n, outward) > 0.0
        })
    })
}

/// The cyclic vertex order of facet `fi` as seen from outside the hex,
/// assuming the tuple is positively oriented.
fn outward_cycle(t: &[VertexId; 8], fi: usize) -> [VertexId; 4] {
    let f = FACET_POS[fi];
    let cyc: [VertexId; 4] = std::array::from_fn(|i| t[f[i]]);
    if facet_outward_parity()[fi] {
        cyc
    } else {
        [cyc[0], cyc[3], cyc[2], cyc[1]]
    }
}

fn cycles_are_reversed(a: &[VertexId; 4], b: &[VertexId; 4]) -> bool {
    let start = match b.iter().position(|&x| x == a[0]) {
        Some(p) => p,
        None => return false,
    };
    (0..4).all(|i| a[i] == b[(start + 4 - i) % 4])
}

/// Flip unlocked hexes so that every interior facet is traversed in
/// opposite directions by its two incident hexes. Locked hexes define the
/// orientation of their connected component; components without a locked
/// member are anchored at their lowest hex index. Returns false when no
/// consistent orientation exists.
pub fn orient_consistently(hexes: &mut [[VertexId; 8]], locked: &[bool]) -> bool {
    let n = hexes.len();
    // facet set -> incident (hex, facet index)
    let mut incidence: HashMap<CanonicalQuad, Vec<(usize, usize)>> = HashMap::new();
    for (h, t) in hexes.iter().enumerate() {
        for (fi, f) in hex_facets(t).iter().enumerate() {
            incidence.entry(*f).or_default().push((h, fi));
        }
    }
    let mut state: Vec<Option<bool>> = vec![None; n]; // Some(flip?)
    let mut stack: Vec<usize> = Vec::new();
    for h in 0..n {
        if locked[h] {
            state[h] = Some(false);
            stack.push(h);
        }
    }
    let mut seed = 0usize;
    loop {
        if stack.is_empty() {
            // Anchor the next unreached component arbitrarily.
            while seed < n && state[seed].is_some() {
                seed += 1;
            }
            if seed == n {
                break;
            }
            state[seed] = Some(false);
            stack.push(seed);
        }
        while let Some(h) = stack.pop() {
            let flip_h = state[h].unwrap();
            let th = if flip_h {
                mirrored(&hexes[h])
            } else {
                hexes[h]
            };
            for (fi, f) in hex_facets(&th).iter().enumerate() {
                let cyc_h = outward_cycle(&th, fi);
                for &(g, _) in &incidence[f] {
                    if g == h {
                        continue;
                    }
                    let want_flip = {
                        let tg = hexes[g];
                        let gfi = hex_facets(&tg)
                            .iter()
                            .position(|x| x == f)
                            .expect("incidence map");
                        let cyc_g = outward_cycle(&tg, gfi);
                        // Consistent when reversed as-is; otherwise g flips.
                        !cycles_are_reversed(&cyc_h, &cyc_g)
                    };
                    match state[g] {
                        None => {
                            state[g] = Some(want_flip);
                            stack.push(g);
                        }
                        Some(existing) => {
                            if existing != want_flip {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    for h in 0..n {
        if state[h] == Some(true) {
            let m = mirrored(&hexes[h]);
            hexes[h] = m;
        }
    }
    true
}

/// Orient a mesh consistently and pick the global handedness of each
/// component by the sign of the summed corner volumes over `coords`.
/// Returns false when no consistent orientation exists.
pub fn orient_positive(hexes: &mut [[VertexId; 8]], coords: &[Vec3]) -> bool {
    if !orient_consistently(hexes, &vec![false; hexes.len()]) {
        return false;
    }
    let vote: f64 = hexes
        .iter()
        .map(|t| {
            let c: [Vec3; 8] = std::array::from_fn(|i| coords[t[i].index()]);
            corner_jacobians(&c).iter().sum::<f64>()
        })
        .sum();
    if vote < 0.0 {
        for t in hexes.iter_mut() {
            *t = mirrored(t);
        }
    }
    true
}

/// Jacobi-style relaxation: repeatedly move each listed vertex to the
/// average of its edge neighbors. Spreads freshly inserted vertices into
/// distinct positions before untangling.
pub fn relax_vertices(mesh: &mut GeoMesh, targets: &[usize], rounds: usize) {
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_vertices()];
    for t in &mesh.hexes {
        for (a, b) in crate::combinatorial::hex_edges(t) {
            neighbors[a.index()].push(b.index());
            neighbors[b.index()].push(a.index());
        }
    }
    for l in neighbors.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    for _ in 0..rounds {
        for &v in targets {
            let ns = &neighbors[v];
            if ns.is_empty() {
                continue;
            }
            let mut c = [0.0f64; 3];
            for &u in ns {
                for (ck, &xk) in c.iter_mut().zip(&mesh.coords[u]) {
                    *ck += xk;
                }
            }
            let n = ns.len() as f64;
            mesh.coords[v] = [c[0] / n, c[1] / n, c[2] / n];
        }
    }
}

/// Embed an enumerated combinatorial mesh: boundary labels `0..n_b` take
/// the given coordinates, interior vertices are spread by neighbor
/// relaxation from the boundary centroid, hexes are oriented consistently
/// (trying both global orientations), and the untangler searches for valid
/// interior positions.
pub fn embed_with_boundary(
    hexes: &[[VertexId; 8]],
    boundary_coords: &[Vec3],
    config: &UntangleConfig,
) -> Result<GeoMesh> {
    let n_b = boundary_coords.len();
    let n = hexes
        .iter()
        .flatten()
        .map(|v| v.index() + 1)
        .max()
        .unwrap_or(n_b);
    let mut centroid = [0.0f64; 3];
    for c in boundary_coords {
        for k in 0..3 {
            centroid[k] += c[k] / n_b as f64;
        }
    }
    let mut coords = boundary_coords.to_vec();
    coords.resize(n, centroid);
    let interior: Vec<usize> = (n_b..n).collect();

    let mut oriented = hexes.to_vec();
    if !orient_consistently(&mut oriented, &vec![false; hexes.len()]) {
        return Err(Error::InvalidComplex(
            "mesh admits no consistent orientation".into(),
        ));
    }
    for attempt in 0..2 {
        let hexes_try: Vec<[VertexId; 8]> = if attempt == 0 {
            oriented.clone()
        } else {
            oriented.iter().map(mirrored).collect()
        };
        let mut mesh = GeoMesh::new(hexes_try, coords.clone())?;
        relax_vertices(&mut mesh, &interior, 16);
        if untangle(&mut mesh, config) {
            return Ok(mesh);
        }
    }
    Err(Error::InvalidComplex(
        "untangling failed for both global orientations".into(),
    ))
}

#[derive(Clone, Debug)]
pub struct UntangleConfig {
    pub max_sweeps: usize,
    pub samples_per_axis: usize,
}

impl Default for UntangleConfig {
    fn default() -> Self {
        Self {
            max_sweeps: 1000,
            samples_per_axis: 3,
        }
    }
}

/// Relocate non-fixed vertices until every sampled Jacobian is positive.
/// On success the coordinates stay; on failure they are restored exactly.
/// Fixed vertices (the boundary) never move.
pub fn untangle(mesh: &mut GeoMesh, config: &UntangleConfig) -> bool {
    if validity(mesh, config.samples_per_axis).is_valid() {
        return true;
    }
    let snapshot = mesh.coords.clone();
    let n = mesh.n_vertices();

    // Incidence and edge neighborhoods.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (h, t) in mesh.hexes.iter().enumerate() {
        for v in t {
            incident[v.index()].push(h);
        }
    }
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in &mesh.hexes {
        for (a, b) in crate::combinatorial::hex_edges(t) {
            neighbors[a.index()].push(b.index());
            neighbors[b.index()].push(a.index());
        }
    }
    for l in neighbors.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }

    let local_min = |mesh: &GeoMesh, v: usize| -> f64 {
        incident[v]
            .iter()
            .map(|&h| {
                let c = mesh.corner_coords(h);
                let mut m = f64::INFINITY;
                for j in corner_jacobians(&c) {
                    m = m.min(j);
                }
                m.min(jacobian_at(&c, 0.5, 0.5, 0.5))
            })
            .fold(f64::INFINITY, f64::min)
    };

    let mut scale = 0.0f64;
    for t in &mesh.hexes {
        for (a, b) in crate::combinatorial::hex_edges(t) {
            let d = sub(mesh.coords[a.index()], mesh.coords[b.index()]);
            scale = scale.max(dot(d, d).sqrt());
        }
    }
    if scale == 0.0 {
        scale = 1.0;
    }

    for _sweep in 0..config.max_sweeps {
        let mut improved = false;
        for v in 0..n {
            if mesh.is_boundary[v] || incident[v].is_empty() {
                continue;
            }
            let f0 = local_min(mesh, v);
            if f0 > 0.0 {
                continue;
            }
            let x0 = mesh.coords[v];
            let mut best = (f0, x0);

            // Candidate 1: pull toward the averaged neighborhood with a
            // backtracking step.
            let avg: Vec3 = {
                let ns = &neighbors[v];
                let mut a = [0.0; 3];
                for &u in ns {
                    for (ak, &xk) in a.iter_mut().zip(&mesh.coords[u]) {
                        *ak += xk;
                    }
                }
                let c = ns.len().max(1) as f64;
                [a[0] / c, a[1] / c, a[2] / c]
            };
            let mut t = 1.0;
            for _ in 0..6 {
                let x: Vec3 = std::array::from_fn(|k| x0[k] + t * (avg[k] - x0[k]));
                mesh.coords[v] = x;
                let f = local_min(mesh, v);
                if f > best.0 {
                    best = (f, x);
                }
                t *= 0.5;
            }

            // Candidate 2: axis-aligned pattern search around the better of
            // the two positions so far.
            let mut step = scale * 0.25;
            for _ in 0..8 {
                let center = best.1;
                let mut local_best = best;
                for dir in 0..6 {
                    let mut x = center;
                    x[dir / 2] += if dir % 2 == 0 { step } else { -step };
                    mesh.coords[v] = x;
                    let f = local_min(mesh, v);
                    if f > local_best.0 {
                        local_best = (f, x);
                    }
                }
                if local_best.0 > best.0 {
                    best = local_best;
                } else {
                    step *= 0.5;
                }
            }

            mesh.coords[v] = best.1;
            if best.0 > f0 + 1e-15 {
                improved = true;
            }
        }
        let report = validity(mesh, config.samples_per_axis);
        if report.is_valid() && report.min_jacobian > 1e-9 * scale.powi(3) {
            return true;
        }
        if !improved {
            break;
        }
    }
    let report = validity(mesh, config.samples_per_axis);
    if report.is_valid() {
        return true;
    }
    mesh.coords = snapshot;
    false
}
