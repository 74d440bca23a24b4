//! Combinatorial quads, hexahedra and hex complexes.
//!
//! A combinatorial hexahedron is an 8-tuple of distinct vertex labels in the
//! corner convention: `(v0, v1, v2, v3)` is a facet and `v(4+i)` is adjacent
//! to `vi`. Two hexahedra are compatible when their vertex intersection is a
//! shared combinatorial face (empty, a corner, an edge, or a whole facet).
//! Identity of quads and hexes is taken up to their symmetry groups: the
//! dihedral group of order 8 for quads and the 48 automorphisms of the cube
//! for hexes.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Dense, 0-based vertex label. Boundary vertices of a problem instance are
/// labelled `0..n_boundary`; interior labels follow contiguously.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Position pairs that form the 12 edges of the reference cube.
pub const EDGE_POS: [(usize, usize); 12] = [
    (0, 1),
    (1, 2),
    (2, 3),
    (3, 0),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 4),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Position 4-tuples of the 6 facets, each in cyclic order.
pub const FACET_POS: [[usize; 4]; 6] = [
    [0, 1, 2, 3],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [3, 0, 4, 7],
];

/// The two diagonals of each facet in `FACET_POS`, as position pairs.
pub const FACET_DIAG_POS: [[(usize, usize); 2]; 6] = [
    [(0, 2), (1, 3)],
    [(4, 6), (5, 7)],
    [(0, 5), (1, 4)],
    [(1, 6), (2, 5)],
    [(2, 7), (3, 6)],
    [(3, 4), (0, 7)],
];

/// Position pairs of the 4 interior diagonals.
pub const INTERIOR_DIAG_POS: [(usize, usize); 4] = [(0, 6), (1, 7), (2, 4), (3, 5)];

/// Relation of two distinct corners inside one hexahedron. Every one of the
/// 28 corner pairs falls in exactly one class.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum PairRole {
    Edge,
    FacetDiagonal,
    InteriorDiagonal,
}

/// Lookup table position -> position -> role.
fn pos_role_table() -> &'static [[Option<PairRole>; 8]; 8] {
    static TABLE: OnceLock<[[Option<PairRole>; 8]; 8]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[None; 8]; 8];
        for &(a, b) in &EDGE_POS {
            t[a][b] = Some(PairRole::Edge);
            t[b][a] = Some(PairRole::Edge);
        }
        for diags in &FACET_DIAG_POS {
            for &(a, b) in diags {
                t[a][b] = Some(PairRole::FacetDiagonal);
                t[b][a] = Some(PairRole::FacetDiagonal);
            }
        }
        for &(a, b) in &INTERIOR_DIAG_POS {
            t[a][b] = Some(PairRole::InteriorDiagonal);
            t[b][a] = Some(PairRole::InteriorDiagonal);
        }
        t
    })
}

#[inline]
pub fn position_role(a: usize, b: usize) -> Option<PairRole> {
    pos_role_table()[a][b]
}

/// The 48 corner permutations that leave the cube's combinatorial structure
/// unchanged. Computed once by sieving all 8! permutations against the edge
/// table.
pub fn cube_automorphisms() -> &'static Vec<[u8; 8]> {
    static AUTOS: OnceLock<Vec<[u8; 8]>> = OnceLock::new();
    AUTOS.get_or_init(|| {
        let mut adjacent = [[false; 8]; 8];
        for &(a, b) in &EDGE_POS {
            adjacent[a][b] = true;
            adjacent[b][a] = true;
        }
        let mut autos = Vec::with_capacity(48);
        let mut perm: [u8; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
        heap_permutations(&mut perm, 8, &mut |p| {
            let preserves = EDGE_POS
                .iter()
                .all(|&(a, b)| adjacent[p[a] as usize][p[b] as usize]);
            if preserves {
                autos.push(*p);
            }
        });
        autos.sort_unstable();
        assert_eq!(autos.len(), 48, "cube automorphism group has order 48");
        autos
    })
}

fn heap_permutations(arr: &mut [u8; 8], k: usize, visit: &mut impl FnMut(&[u8; 8])) {
    if k == 1 {
        visit(arr);
        return;
    }
    for i in 0..k {
        heap_permutations(arr, k - 1, visit);
        if k.is_multiple_of(2) {
            arr.swap(i, k - 1);
        } else {
            arr.swap(0, k - 1);
        }
    }
}

/// A quadrilateral facet stored in canonical order: the 8 dihedral
/// representations (4 rotations x 2 orientations) collapse to the
/// lexicographically smallest one. Canonicalization preserves the two
/// diagonals `{v0, v2}` and `{v1, v3}`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalQuad([VertexId; 4]);

impl fmt::Debug for CanonicalQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Quad({},{},{},{})",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

/// Canonicalize 4 distinct labels given in cyclic order.
pub fn canonicalize_quad(
    a: VertexId,
    b: VertexId,
    c: VertexId,
    d: VertexId,
) -> Result<CanonicalQuad> {
    let v = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if v[i] == v[j] {
                return Err(Error::InvalidFacet(format!(
                    "duplicate label {} in ({},{},{},{})",
                    v[i], a, b, c, d
                )));
            }
        }
    }
    Ok(canonicalize_quad_unchecked(v))
}

#[inline]
pub(crate) fn canonicalize_quad_unchecked(v: [VertexId; 4]) -> CanonicalQuad {
    // Smallest label first; of its two cyclic neighbours the smaller comes
    // second. This fixes the representative among the 8 reorderings.
    let mut m = 0;
    for i in 1..4 {
        if v[i] < v[m] {
            m = i;
        }
    }
    let prev = v[(m + 3) % 4];
    let next = v[(m + 1) % 4];
    let out = if next <= prev {
        [v[m], next, v[(m + 2) % 4], prev]
    } else {
        [v[m], prev, v[(m + 2) % 4], next]
    };
    CanonicalQuad(out)
}

impl CanonicalQuad {
    pub fn vertices(&self) -> [VertexId; 4] {
        self.0
    }

    /// The 4 edges as unordered pairs.
    pub fn edges(&self) -> [(VertexId, VertexId); 4] {
        let v = self.0;
        [
            order_pair(v[0], v[1]),
            order_pair(v[1], v[2]),
            order_pair(v[2], v[3]),
            order_pair(v[3], v[0]),
        ]
    }

    /// The 2 diagonals as unordered pairs.
    pub fn diagonals(&self) -> [(VertexId, VertexId); 2] {
        let v = self.0;
        [order_pair(v[0], v[2]), order_pair(v[1], v[3])]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    pub fn vertex_set(&self) -> [VertexId; 4] {
        let mut s = self.0;
        s.sort_unstable();
        s
    }
}

#[inline]
pub fn order_pair(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A hexahedron stored as the lexicographically smallest image of its corner
/// tuple under the 48 cube automorphisms.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalHex([VertexId; 8]);

impl fmt::Debug for CanonicalHex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hex(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Canonicalize 8 distinct labels given in the corner convention.
pub fn canonicalize_hex(v: [VertexId; 8]) -> Result<CanonicalHex> {
    for i in 0..8 {
        for j in (i + 1)..8 {
            if v[i] == v[j] {
                return Err(Error::InvalidHex(format!(
                    "duplicate label {} in corner tuple",
                    v[i]
                )));
            }
        }
    }
    Ok(canonicalize_hex_unchecked(v))
}

#[inline]
pub(crate) fn canonicalize_hex_unchecked(v: [VertexId; 8]) -> CanonicalHex {
    let mut best = v;
    for perm in cube_automorphisms().iter().skip(1) {
        let mut img = [VertexId(0); 8];
        for i in 0..8 {
            img[i] = v[perm[i] as usize];
        }
        if img < best {
            best = img;
        }
    }
    CanonicalHex(best)
}

/// Derived structure of a corner tuple; valid for any orientation of the
/// tuple, not only the canonical one.
pub fn hex_edges(v: &[VertexId; 8]) -> [(VertexId, VertexId); 12] {
    EDGE_POS.map(|(a, b)| order_pair(v[a], v[b]))
}

pub fn hex_facets(v: &[VertexId; 8]) -> [CanonicalQuad; 6] {
    FACET_POS.map(|f| canonicalize_quad_unchecked([v[f[0]], v[f[1]], v[f[2]], v[f[3]]]))
}

/// The 12 facet diagonals, paired per facet: `[(d1, d2); 6]` where `d1` and
/// `d2` are the two diagonals of one facet.
pub fn hex_facet_diagonals(v: &[VertexId; 8]) -> [[(VertexId, VertexId); 2]; 6] {
    FACET_DIAG_POS.map(|[(a1, b1), (a2, b2)]| [order_pair(v[a1], v[b1]), order_pair(v[a2], v[b2])])
}

pub fn hex_interior_diagonals(v: &[VertexId; 8]) -> [(VertexId, VertexId); 4] {
    INTERIOR_DIAG_POS.map(|(a, b)| order_pair(v[a], v[b]))
}

impl CanonicalHex {
    pub fn corners(&self) -> [VertexId; 8] {
        self.0
    }

    pub fn edges(&self) -> [(VertexId, VertexId); 12] {
        hex_edges(&self.0)
    }

    pub fn facets(&self) -> [CanonicalQuad; 6] {
        hex_facets(&self.0)
    }

    pub fn facet_diagonals(&self) -> [[(VertexId, VertexId); 2]; 6] {
        hex_facet_diagonals(&self.0)
    }

    pub fn interior_diagonals(&self) -> [(VertexId, VertexId); 4] {
        hex_interior_diagonals(&self.0)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    /// Role of the unordered pair `(a, b)` inside this hex, if both are
    /// corners.
    pub fn pair_role(&self, a: VertexId, b: VertexId) -> Option<PairRole> {
        tuple_pair_role(&self.0, a, b)
    }

    /// The facet whose vertex set equals `set`, if any.
    pub fn facet_with_vertex_set(&self, set: &[VertexId; 4]) -> Option<CanonicalQuad> {
        tuple_facet_with_vertex_set(&self.0, set)
    }
}

/// Role of the unordered pair `(a, b)` inside a corner tuple, if both are
/// corners.
pub fn tuple_pair_role(corners: &[VertexId; 8], a: VertexId, b: VertexId) -> Option<PairRole> {
    let pa = corners.iter().position(|&x| x == a)?;
    let pb = corners.iter().position(|&x| x == b)?;
    position_role(pa, pb)
}

/// The facet of a corner tuple whose vertex set equals `set`, if any.
pub fn tuple_facet_with_vertex_set(
    corners: &[VertexId; 8],
    set: &[VertexId; 4],
) -> Option<CanonicalQuad> {
    hex_facets(corners)
        .into_iter()
        .find(|f| &f.vertex_set() == set)
}

/// Pairwise compatibility: the vertex intersection must be empty, a shared
/// corner, a shared edge of both, or a whole facet that is the same
/// combinatorial quad in both (same edges and diagonals). Orientation of the
/// corner tuples does not matter.
pub fn tuples_compatible(h1: &[VertexId; 8], h2: &[VertexId; 8]) -> bool {
    let mut shared = [VertexId(0); 8];
    let mut n = 0;
    for &v in h1 {
        if h2.contains(&v) {
            shared[n] = v;
            n += 1;
        }
    }
    match n {
        0 | 1 => true,
        2 => {
            tuple_pair_role(h1, shared[0], shared[1]) == Some(PairRole::Edge)
                && tuple_pair_role(h2, shared[0], shared[1]) == Some(PairRole::Edge)
        }
        4 => {
            let mut set = [shared[0], shared[1], shared[2], shared[3]];
            set.sort_unstable();
            match (
                tuple_facet_with_vertex_set(h1, &set),
                tuple_facet_with_vertex_set(h2, &set),
            ) {
                (Some(f1), Some(f2)) => f1 == f2,
                _ => false,
            }
        }
        _ => false,
    }
}

/// [`tuples_compatible`] for canonical hexes.
pub fn is_compatible(h1: &CanonicalHex, h2: &CanonicalHex) -> bool {
    tuples_compatible(&h1.0, &h2.0)
}

/// A combinatorial quad mesh of a closed surface: the input boundary of the
/// enumeration problem.
#[derive(Clone, Debug)]
pub struct QuadSurface {
    quads: Vec<CanonicalQuad>,
    n_vertices: u32,
}

impl QuadSurface {
    /// Build and validate a closed surface: labels dense from 0, every edge
    /// in exactly two quads, an even number of quads (a parity requirement
    /// for hex-meshability), all quads distinct.
    pub fn new(quads: Vec<CanonicalQuad>) -> Result<Self> {
        let surface = Self::from_quads(quads)?;
        surface.validate_closed()?;
        Ok(surface)
    }

    /// Build without the closed-surface checks. Used for boundaries extracted
    /// from partial complexes, which may reference sparse labels.
    pub fn from_quads(mut quads: Vec<CanonicalQuad>) -> Result<Self> {
        quads.sort_unstable();
        for w in quads.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidSurface(format!("duplicate quad {:?}", w[0])));
            }
        }
        let n_vertices = quads
            .iter()
            .flat_map(|q| q.vertices())
            .map(|v| v.0 + 1)
            .max()
            .unwrap_or(0);
        Ok(Self { quads, n_vertices })
    }

    fn validate_closed(&self) -> Result<()> {
        if !self.quads.len().is_multiple_of(2) {
            return Err(Error::InvalidSurface(format!(
                "odd number of quads ({}); no hexahedral mesh can exist",
                self.quads.len()
            )));
        }
        let mut seen = vec![false; self.n_vertices as usize];
        let mut edge_count: HashMap<(VertexId, VertexId), u32> = HashMap::new();
        for q in &self.quads {
            for v in q.vertices() {
                seen[v.index()] = true;
            }
            for e in q.edges() {
                *edge_count.entry(e).or_insert(0) += 1;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidSurface(format!(
                "labels are not dense: vertex {missing} unused"
            )));
        }
        for (e, c) in &edge_count {
            if *c != 2 {
                return Err(Error::InvalidSurface(format!(
                    "edge ({},{}) lies in {} quads, expected 2",
                    e.0, e.1, c
                )));
            }
        }
        Ok(())
    }

    pub fn quads(&self) -> &[CanonicalQuad] {
        &self.quads
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_vertices
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    pub fn len(&self) -> usize {
        self.quads.len()
    }
}

impl PartialEq for QuadSurface {
    fn eq(&self, other: &Self) -> bool {
        self.quads == other.quads
    }
}
impl Eq for QuadSurface {}

/// A pairwise-compatible set of hexahedra with per-facet use counts.
#[derive(Clone, Debug)]
pub struct HexComplex {
    hexes: Vec<CanonicalHex>,
    quad_use: HashMap<CanonicalQuad, u8>,
}

impl HexComplex {
    pub fn empty() -> Self {
        Self {
            hexes: Vec::new(),
            quad_use: HashMap::new(),
        }
    }

    /// Validate pairwise compatibility and the at-most-two-uses rule.
    pub fn new(hexes: Vec<CanonicalHex>) -> Result<Self> {
        let mut quad_use: HashMap<CanonicalQuad, u8> = HashMap::new();
        for (i, h) in hexes.iter().enumerate() {
            for g in &hexes[..i] {
                if !is_compatible(h, g) {
                    return Err(Error::InvalidComplex(format!(
                        "incompatible pair {:?} / {:?}",
                        g, h
                    )));
                }
            }
            for f in h.facets() {
                let c = quad_use.entry(f).or_insert(0);
                *c += 1;
                if *c > 2 {
                    return Err(Error::InvalidComplex(format!(
                        "facet {:?} used more than twice",
                        f
                    )));
                }
            }
        }
        Ok(Self { hexes, quad_use })
    }

    pub fn hexes(&self) -> &[CanonicalHex] {
        &self.hexes
    }

    pub fn len(&self) -> usize {
        self.hexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hexes.is_empty()
    }

    pub fn quad_use(&self) -> &HashMap<CanonicalQuad, u8> {
        &self.quad_use
    }

    /// The facets lying in exactly one hexahedron.
    pub fn boundary_of(&self) -> QuadSurface {
        let mut quads: Vec<CanonicalQuad> = self
            .quad_use
            .iter()
            .filter(|&(_, &c)| c == 1)
            .map(|(q, _)| *q)
            .collect();
        quads.sort_unstable();
        QuadSurface::from_quads(quads).expect("boundary quads are distinct by construction")
    }

    /// Vertices on facets with use count 1.
    pub fn boundary_vertices(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self
            .quad_use
            .iter()
            .filter(|&(_, &c)| c == 1)
            .flat_map(|(q, _)| q.vertices())
            .collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// All distinct vertices of the complex.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self.hexes.iter().flat_map(|h| h.corners()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: u32) -> VertexId {
        VertexId(x)
    }

    fn quad(a: u32, b: u32, c: u32, d: u32) -> CanonicalQuad {
        canonicalize_quad(v(a), v(b), v(c), v(d)).unwrap()
    }

    fn hex(t: [u32; 8]) -> CanonicalHex {
        canonicalize_hex(t.map(v)).unwrap()
    }

    /// Independent oracle: minimum over the 8 dihedral reorderings, listed
    /// explicitly.
    fn quad_canonical_brute(t: [u32; 4]) -> [u32; 4] {
        let mut best = None::<[u32; 4]>;
        let rots = [
            [t[0], t[1], t[2], t[3]],
            [t[1], t[2], t[3], t[0]],
            [t[2], t[3], t[0], t[1]],
            [t[3], t[0], t[1], t[2]],
        ];
        for r in rots {
            let rev = [r[0], r[3], r[2], r[1]];
            for cand in [r, rev] {
                // all 4 rotations of cand
                for s in 0..4 {
                    let rot = [
                        cand[s % 4],
                        cand[(s + 1) % 4],
                        cand[(s + 2) % 4],
                        cand[(s + 3) % 4],
                    ];
                    if best.is_none_or(|b| rot < b) {
                        best = Some(rot);
                    }
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn quad_canonical_examples() {
        assert_eq!(quad(3, 0, 1, 2).vertices().map(|x| x.0), [0, 1, 2, 3]);
        assert_eq!(quad(0, 3, 2, 1).vertices().map(|x| x.0), [0, 1, 2, 3]);
        // Frozen from the brute-force oracle below.
        assert_eq!(quad_canonical_brute([5, 9, 2, 7]), [2, 7, 5, 9]);
        assert_eq!(quad(5, 9, 2, 7).vertices().map(|x| x.0), [2, 7, 5, 9]);
    }

    #[test]
    fn quad_canonical_matches_brute_force() {
        let labels = [0u32, 1, 2, 3, 4, 7, 9, 12];
        for &a in &labels {
            for &b in &labels {
                for &c in &labels {
                    for &d in &labels {
                        let t = [a, b, c, d];
                        let mut u = t.to_vec();
                        u.sort_unstable();
                        u.dedup();
                        if u.len() < 4 {
                            assert!(canonicalize_quad(v(a), v(b), v(c), v(d)).is_err());
                            continue;
                        }
                        let got = quad(a, b, c, d).vertices().map(|x| x.0);
                        assert_eq!(got, quad_canonical_brute(t), "input {t:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn quad_canonical_preserves_diagonals() {
        let q = quad(5, 9, 2, 7);
        let mut diags: Vec<_> = q.diagonals().to_vec();
        diags.sort_unstable();
        assert_eq!(
            diags,
            vec![(v(2), v(5)), (v(7), v(9))],
            "diagonals {{5,2}} and {{9,7}} must survive canonicalization"
        );
    }

    #[test]
    fn quad_idempotent() {
        let q = quad(5, 9, 2, 7);
        let [a, b, c, d] = q.vertices();
        assert_eq!(canonicalize_quad(a, b, c, d).unwrap(), q);
    }

    #[test]
    fn automorphism_group_has_order_48() {
        assert_eq!(cube_automorphisms().len(), 48);
        // No permutation outside the group preserves the structure: re-count
        // independently over all 8! permutations using facet preservation.
        let mut count = 0usize;
        let mut perm: [u8; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
        let reference = hex([0, 1, 2, 3, 4, 5, 6, 7]);
        heap_permutations(&mut perm, 8, &mut |p| {
            let img: [VertexId; 8] = std::array::from_fn(|i| VertexId(p[i] as u32));
            let mut facets_img: Vec<_> = hex_facets(&img).to_vec();
            facets_img.sort_unstable();
            let mut facets_ref: Vec<_> = reference.facets().to_vec();
            facets_ref.sort_unstable();
            let mut idiag_img: Vec<_> = hex_interior_diagonals(&img).to_vec();
            idiag_img.sort_unstable();
            let mut idiag_ref: Vec<_> = reference.interior_diagonals().to_vec();
            idiag_ref.sort_unstable();
            if facets_img == facets_ref && idiag_img == idiag_ref {
                count += 1;
            }
        });
        assert_eq!(count, 48);
    }

    #[test]
    fn hex_canonical_examples() {
        let identity = hex([0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(identity.corners().map(|x| x.0), [0, 1, 2, 3, 4, 5, 6, 7]);
        // Top/bottom swap is an automorphism.
        assert_eq!(hex([4, 5, 6, 7, 0, 1, 2, 3]), identity);
        // All 48 automorphic images canonicalize to the identity tuple.
        for perm in cube_automorphisms() {
            let img: [VertexId; 8] = std::array::from_fn(|i| VertexId(perm[i] as u32));
            assert_eq!(canonicalize_hex(img).unwrap(), identity);
        }
    }

    #[test]
    fn hex_canonical_idempotent_on_random_tuples() {
        // Deterministic pseudo-random labels, no rand dependency needed here.
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..200 {
            let mut labels: Vec<u32> = (0..40).collect();
            for i in (1..labels.len()).rev() {
                let j = (next() % (i as u64 + 1)) as usize;
                labels.swap(i, j);
            }
            let t: [VertexId; 8] = std::array::from_fn(|i| VertexId(labels[i]));
            let h = canonicalize_hex(t).unwrap();
            assert_eq!(canonicalize_hex(h.corners()).unwrap(), h);
            // Every automorphic image shares the canonical form.
            for perm in cube_automorphisms().iter().step_by(7) {
                let img: [VertexId; 8] = std::array::from_fn(|i| t[perm[i] as usize]);
                assert_eq!(canonicalize_hex(img).unwrap(), h);
            }
        }
    }

    #[test]
    fn hex_classes_on_8_labels() {
        // 8!/48 = 840 distinct hexes on a fixed 8-label set.
        let mut classes = std::collections::HashSet::new();
        let mut perm: [u8; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
        heap_permutations(&mut perm, 8, &mut |p| {
            let t: [VertexId; 8] = std::array::from_fn(|i| VertexId(p[i] as u32));
            classes.insert(canonicalize_hex_unchecked(t));
        });
        assert_eq!(classes.len(), 840);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(canonicalize_quad(v(0), v(1), v(2), v(0)).is_err());
        assert!(canonicalize_hex([0, 1, 2, 3, 4, 5, 6, 0].map(v)).is_err());
    }

    #[test]
    fn compatibility_examples() {
        let h1 = hex([0, 1, 2, 3, 4, 5, 6, 7]);
        // Stacked: shares the whole top facet.
        let h2 = hex([4, 5, 6, 7, 8, 9, 10, 11]);
        assert!(is_compatible(&h1, &h2));
        // Identical: intersection is 8 vertices.
        assert!(!is_compatible(&h1, &h1.clone()));
        // Shares exactly {0,2}: an edge of h2 but a facet diagonal of h1.
        let h3 = hex([0, 2, 8, 9, 10, 11, 12, 13]);
        assert!(!is_compatible(&h1, &h3));
        // Shares exactly {0,1}: an edge of both.
        let h4 = hex([0, 1, 8, 9, 10, 11, 12, 13]);
        assert!(is_compatible(&h1, &h4));
        // Single shared corner.
        let h5 = hex([0, 8, 9, 10, 11, 12, 13, 14]);
        assert!(is_compatible(&h1, &h5));
        // Three shared vertices: never a face.
        let h6 = hex([0, 1, 2, 8, 9, 10, 11, 12]);
        assert!(!is_compatible(&h1, &h6));
        // Four shared vertices not forming a facet of h1.
        let h7 = hex([0, 1, 2, 4, 8, 9, 10, 11]);
        assert!(!is_compatible(&h1, &h7));
        // Same 4-vertex set but crossed diagonals: quads differ.
        let h8 = hex([0, 1, 3, 2, 8, 9, 10, 11]);
        assert!(!is_compatible(&h1, &h8));
    }

    #[test]
    fn compatibility_is_symmetric() {
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            seed
        };
        for _ in 0..500 {
            let mut labels: Vec<u32> = (0..14).collect();
            for i in (1..labels.len()).rev() {
                let j = (next() % (i as u64 + 1)) as usize;
                labels.swap(i, j);
            }
            let a = canonicalize_hex(std::array::from_fn(|i| VertexId(labels[i]))).unwrap();
            let b = canonicalize_hex(std::array::from_fn(|i| VertexId(labels[i + 4]))).unwrap();
            assert_eq!(is_compatible(&a, &b), is_compatible(&b, &a));
        }
    }

    #[test]
    fn boundary_of_single_hex() {
        let h = hex([0, 1, 2, 3, 4, 5, 6, 7]);
        let c = HexComplex::new(vec![h]).unwrap();
        let b = c.boundary_of();
        assert_eq!(b.len(), 6);
        let mut expected: Vec<_> = h.facets().to_vec();
        expected.sort_unstable();
        assert_eq!(b.quads(), &expected[..]);
    }

    #[test]
    fn boundary_of_two_stacked_hexes() {
        let c = HexComplex::new(vec![
            hex([0, 1, 2, 3, 4, 5, 6, 7]),
            hex([4, 5, 6, 7, 8, 9, 10, 11]),
        ])
        .unwrap();
        assert_eq!(c.boundary_of().len(), 10);
        // Facet-count conservation: sum of use counts = 6 * |hexes|.
        let total: u32 = c.quad_use().values().map(|&c| c as u32).sum();
        assert_eq!(total, 12);
    }

    #[test]
    fn boundary_of_empty_complex() {
        assert!(HexComplex::empty().boundary_of().is_empty());
    }

    #[test]
    fn complex_rejects_incompatible_pairs() {
        let a = hex([0, 1, 2, 3, 4, 5, 6, 7]);
        let b = hex([0, 2, 8, 9, 10, 11, 12, 13]);
        assert!(HexComplex::new(vec![a, b]).is_err());
    }

    #[test]
    fn surface_validation() {
        let h = hex([0, 1, 2, 3, 4, 5, 6, 7]);
        let quads = h.facets().to_vec();
        assert!(QuadSurface::new(quads.clone()).is_ok());
        // Remove one facet: edges of the hole now lie in a single quad.
        assert!(QuadSurface::new(quads[..5].to_vec()).is_err());
        // Duplicate facet.
        let mut dup = quads.clone();
        dup.push(quads[0]);
        assert!(QuadSurface::new(dup).is_err());
    }
}
