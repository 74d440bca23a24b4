//! The `hexm` plain-text mesh format and the built-in generators.
//!
//! ```text
//! hexm 1
//! vertices N
//! x y z b          (N lines; b=1 marks boundary vertices)
//! quads M          (optional: a quad surface, e.g. an enumeration boundary)
//! a b c d
//! hexes K          (optional: a hex mesh in the corner convention)
//! v1 v2 v3 v4 v5 v6 v7 v8
//! ```
//!
//! Coordinates are printed with 17 significant digits so that write/read
//! round-trips reproduce `f64` values exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::combinatorial::{canonicalize_quad, CanonicalQuad, QuadSurface, VertexId};
use crate::error::{Error, Result};
use crate::geometry::GeoMesh;

/// Parsed contents of a `hexm` file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HexmData {
    pub vertices: Vec<[f64; 3]>,
    pub boundary_flags: Vec<bool>,
    pub quads: Vec<[u32; 4]>,
    pub hexes: Vec<[u32; 8]>,
}

impl HexmData {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Interpret the quad section as a closed enumeration boundary.
    pub fn to_quad_surface(&self) -> Result<QuadSurface> {
        if self.quads.is_empty() {
            return Err(Error::Input(
                "file carries no quads section; an enumeration boundary is required".into(),
            ));
        }
        let mut quads = Vec::with_capacity(self.quads.len());
        for q in &self.quads {
            quads.push(canonicalize_quad(
                VertexId(q[0]),
                VertexId(q[1]),
                VertexId(q[2]),
                VertexId(q[3]),
            )?);
        }
        QuadSurface::new(quads)
    }

    /// Interpret the hexes section as a geometric mesh.
    pub fn to_geo_mesh(&self) -> Result<GeoMesh> {
        if self.hexes.is_empty() {
            return Err(Error::Input(
                "file carries no hexes section; a mesh is required".into(),
            ));
        }
        let hexes: Vec<[VertexId; 8]> = self.hexes.iter().map(|t| t.map(VertexId)).collect();
        let mesh = GeoMesh::new(hexes, self.vertices.clone())?;
        // The stored flags must agree with the facet-derived ones.
        if mesh.is_boundary != self.boundary_flags {
            return Err(Error::Input(
                "boundary flags disagree with the facet structure".into(),
            ));
        }
        Ok(mesh)
    }

    pub fn from_geo_mesh(mesh: &GeoMesh) -> Self {
        Self {
            vertices: mesh.coords.clone(),
            boundary_flags: mesh.is_boundary.clone(),
            quads: Vec::new(),
            hexes: mesh.hexes.iter().map(|t| t.map(|v| v.0)).collect(),
        }
    }

    /// A boundary file: quads plus coordinates, all vertices flagged.
    pub fn from_boundary(quads: &[CanonicalQuad], coords: Vec<[f64; 3]>) -> Self {
        Self {
            boundary_flags: vec![true; coords.len()],
            vertices: coords,
            quads: quads.iter().map(|q| q.vertices().map(|v| v.0)).collect(),
            hexes: Vec::new(),
        }
    }
}

pub fn format_hexm(data: &HexmData) -> String {
    let mut out = String::new();
    out.push_str("hexm 1\n");
    writeln!(out, "vertices {}", data.vertices.len()).unwrap();
    for (c, &b) in data.vertices.iter().zip(&data.boundary_flags) {
        writeln!(
            out,
            "{:.16e} {:.16e} {:.16e} {}",
            c[0],
            c[1],
            c[2],
            if b { 1 } else { 0 }
        )
        .unwrap();
    }
    if !data.quads.is_empty() {
        writeln!(out, "quads {}", data.quads.len()).unwrap();
        for q in &data.quads {
            writeln!(out, "{} {} {} {}", q[0], q[1], q[2], q[3]).unwrap();
        }
    }
    if !data.hexes.is_empty() {
        writeln!(out, "hexes {}", data.hexes.len()).unwrap();
        for h in &data.hexes {
            writeln!(
                out,
                "{} {} {} {} {} {} {} {}",
                h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]
            )
            .unwrap();
        }
    }
    out
}

pub fn parse_hexm(text: &str) -> Result<HexmData> {
    let bad = |line: usize, msg: &str| Error::Input(format!("hexm line {}: {}", line + 1, msg));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (i, header) = lines
        .next()
        .ok_or_else(|| Error::Input("empty hexm file".into()))?;
    if header != "hexm 1" {
        return Err(bad(i, "expected header `hexm 1`"));
    }
    let mut data = HexmData::default();
    let mut section = lines.next();
    while let Some((i, line)) = section {
        let mut parts = line.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(i, "expected `<section> <count>`"))?;
        match kind {
            "vertices" => {
                for _ in 0..count {
                    let (j, l) = lines.next().ok_or_else(|| bad(i, "truncated vertices"))?;
                    let f: Vec<&str> = l.split_whitespace().collect();
                    if f.len() != 4 {
                        return Err(bad(j, "expected `x y z b`"));
                    }
                    let x: f64 = f[0].parse().map_err(|_| bad(j, "bad coordinate"))?;
                    let y: f64 = f[1].parse().map_err(|_| bad(j, "bad coordinate"))?;
                    let z: f64 = f[2].parse().map_err(|_| bad(j, "bad coordinate"))?;
                    let b = match f[3] {
                        "0" => false,
                        "1" => true,
                        _ => return Err(bad(j, "boundary flag must be 0 or 1")),
                    };
                    data.vertices.push([x, y, z]);
                    data.boundary_flags.push(b);
                }
            }
            "quads" => {
                for _ in 0..count {
                    let (j, l) = lines.next().ok_or_else(|| bad(i, "truncated quads"))?;
                    let f: Vec<u32> = l
                        .split_whitespace()
                        .map(|s| s.parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad(j, "bad quad label"))?;
                    if f.len() != 4 {
                        return Err(bad(j, "expected 4 labels"));
                    }
                    data.quads.push([f[0], f[1], f[2], f[3]]);
                }
            }
            "hexes" => {
                for _ in 0..count {
                    let (j, l) = lines.next().ok_or_else(|| bad(i, "truncated hexes"))?;
                    let f: Vec<u32> = l
                        .split_whitespace()
                        .map(|s| s.parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad(j, "bad hex label"))?;
                    if f.len() != 8 {
                        return Err(bad(j, "expected 8 labels"));
                    }
                    data.hexes
                        .push([f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]]);
                }
            }
            other => return Err(bad(i, &format!("unknown section `{other}`"))),
        }
        section = lines.next();
    }
    let n = data.vertices.len() as u32;
    for q in &data.quads {
        if q.iter().any(|&l| l >= n) {
            return Err(Error::Input("quad references an undeclared vertex".into()));
        }
    }
    for h in &data.hexes {
        if h.iter().any(|&l| l >= n) {
            return Err(Error::Input("hex references an undeclared vertex".into()));
        }
    }
    Ok(data)
}

pub fn read_hexm(path: &Path) -> Result<HexmData> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_hexm(&text)
}

pub fn write_hexm(path: &Path, data: &HexmData) -> Result<()> {
    std::fs::write(path, format_hexm(data))
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn quad(a: u32, b: u32, c: u32, d: u32) -> CanonicalQuad {
    canonicalize_quad(VertexId(a), VertexId(b), VertexId(c), VertexId(d))
        .expect("generator quads are valid")
}

/// Boundary of the unit cube: 8 vertices, 6 quads.
pub fn gen_cube_boundary() -> HexmData {
    let coords: Vec<[f64; 3]> = crate::geometry::REFERENCE_CORNERS.to_vec();
    let quads = vec![
        quad(0, 1, 2, 3),
        quad(4, 5, 6, 7),
        quad(0, 1, 5, 4),
        quad(1, 2, 6, 5),
        quad(2, 3, 7, 6),
        quad(3, 0, 4, 7),
    ];
    HexmData::from_boundary(&quads, coords)
}

/// Structured `a x b x c` block of unit cubes (a hex mesh).
pub fn gen_grid_mesh(a: u32, b: u32, c: u32) -> HexmData {
    assert!(a >= 1 && b >= 1 && c >= 1);
    let (nx, ny, nz) = (a + 1, b + 1, c + 1);
    let idx = |x: u32, y: u32, z: u32| x + nx * y + nx * ny * z;
    let mut vertices = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                vertices.push([x as f64, y as f64, z as f64]);
            }
        }
    }
    let mut hexes = Vec::new();
    for z in 0..c {
        for y in 0..b {
            for x in 0..a {
                hexes.push([
                    idx(x, y, z),
                    idx(x + 1, y, z),
                    idx(x + 1, y + 1, z),
                    idx(x, y + 1, z),
                    idx(x, y, z + 1),
                    idx(x + 1, y, z + 1),
                    idx(x + 1, y + 1, z + 1),
                    idx(x, y + 1, z + 1),
                ]);
            }
        }
    }
    let mut data = HexmData {
        vertices,
        boundary_flags: Vec::new(),
        quads: Vec::new(),
        hexes,
    };
    // Boundary flags derived from the facet structure.
    let mesh = GeoMesh::new(
        data.hexes.iter().map(|t| t.map(VertexId)).collect(),
        data.vertices.clone(),
    )
    .expect("grid meshes are valid");
    data.boundary_flags = mesh.is_boundary;
    data
}

/// The boundary of a structured grid, relabelled densely.
pub fn gen_grid_boundary(a: u32, b: u32, c: u32) -> HexmData {
    let mesh = gen_grid_mesh(a, b, c);
    let geo = mesh.to_geo_mesh().expect("grid meshes are valid");
    let complex = geo.complex();
    let boundary = complex.boundary_of();
    // Compact the labels: only boundary vertices survive.
    let mut remap: Vec<Option<u32>> = vec![None; mesh.n_vertices()];
    let mut coords = Vec::new();
    let mut next = 0u32;
    let mut quads = Vec::new();
    for q in boundary.quads() {
        let mapped: Vec<VertexId> = q
            .vertices()
            .iter()
            .map(|v| {
                let slot = &mut remap[v.index()];
                let label = *slot.get_or_insert_with(|| {
                    let l = next;
                    next += 1;
                    coords.push(geo.coords[v.index()]);
                    l
                });
                VertexId(label)
            })
            .collect();
        quads.push(
            canonicalize_quad(mapped[0], mapped[1], mapped[2], mapped[3])
                .expect("boundary quads are valid"),
        );
    }
    HexmData::from_boundary(&quads, coords)
}

/// Schneiders' pyramid boundary: a square pyramid with vertices added at
/// edge midpoints and face centroids, each triangular face split into three
/// quads and the base into four. 18 vertices, 16 quads.
pub fn gen_schneiders_boundary() -> HexmData {
    // Base corners 0..4, apex 4.
    let mut coords: Vec<[f64; 3]> = vec![
        [-1.0, -1.0, 0.0],
        [1.0, -1.0, 0.0],
        [1.0, 1.0, 0.0],
        [-1.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let mid = |p: [f64; 3], q: [f64; 3]| {
        [
            (p[0] + q[0]) / 2.0,
            (p[1] + q[1]) / 2.0,
            (p[2] + q[2]) / 2.0,
        ]
    };
    // Base edge midpoints 5..9: edge (i, i+1 mod 4) -> 5+i.
    for i in 0..4 {
        coords.push(mid(coords[i], coords[(i + 1) % 4]));
    }
    // Slant edge midpoints 9..13: edge (i, apex) -> 9+i.
    for i in 0..4 {
        coords.push(mid(coords[i], coords[4]));
    }
    // Triangular face centroids 13..17: face (i, i+1, apex) -> 13+i.
    for i in 0..4 {
        let j = (i + 1) % 4;
        coords.push([
            (coords[i][0] + coords[j][0] + coords[4][0]) / 3.0,
            (coords[i][1] + coords[j][1] + coords[4][1]) / 3.0,
            (coords[i][2] + coords[j][2] + coords[4][2]) / 3.0,
        ]);
    }
    // Base centroid 17.
    coords.push([0.0, 0.0, 0.0]);

    let mut quads = Vec::new();
    // Triangular face (i, j=i+1, apex): midpoints 5+i (base), 9+i, 9+j
    // (slants), centroid 13+i.
    for i in 0..4u32 {
        let j = (i + 1) % 4;
        let (corner_i, corner_j, apex) = (i, j, 4);
        let (m_base, m_i, m_j, g) = (5 + i, 9 + i, 9 + j, 13 + i);
        quads.push(quad(corner_i, m_base, g, m_i));
        quads.push(quad(corner_j, m_j, g, m_base));
        quads.push(quad(apex, m_i, g, m_j));
    }
    // Base face (3,2,1,0 seen from below): quads around centroid 17.
    for i in 0..4u32 {
        let j = (i + 1) % 4;
        quads.push(quad(i, 5 + i, 17, 5 + ((i + 3) % 4)));
        let _ = j;
    }
    HexmData::from_boundary(&quads, coords)
}

/// The octagonal spindle (tetragonal trapezohedron) boundary: two apexes and
/// an 8-vertex antiprismatic ring, 8 kite quads. `ring_height` is the +-z
/// offset of alternate ring vertices, `apex_height` the apex |z|.
pub fn gen_spindle_boundary(ring_height: f64, apex_height: f64) -> HexmData {
    let mut coords: Vec<[f64; 3]> = Vec::new();
    coords.push([0.0, 0.0, apex_height]); // 0: north
    coords.push([0.0, 0.0, -apex_height]); // 1: south
    for j in 0..8u32 {
        let ang = std::f64::consts::PI / 4.0 * j as f64;
        let z = if j % 2 == 0 {
            ring_height
        } else {
            -ring_height
        };
        coords.push([ang.cos(), ang.sin(), z]);
    }
    let ring = |j: u32| 2 + (j % 8);
    let mut quads = Vec::new();
    for k in 0..4u32 {
        // Top kites meet the north apex through the raised ring vertices.
        quads.push(quad(0, ring(2 * k), ring(2 * k + 1), ring(2 * k + 2)));
        // Bottom kites mirror them around the lowered ring vertices.
        quads.push(quad(1, ring(2 * k + 1), ring(2 * k + 2), ring(2 * k + 3)));
    }
    HexmData::from_boundary(&quads, coords)
}
