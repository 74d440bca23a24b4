//! Enumeration, refutation and simplification of combinatorial hexahedral
//! meshes with a prescribed quadrilateral boundary.
//!
//! The core object is an advancing-front backtracking search over corner
//! tuples: hexahedra are built one at a time on the smallest exposed facet,
//! candidate corners are pruned through per-vertex adjacency bit-sets, and
//! value precedence on fresh interior labels makes each mesh appear exactly
//! once up to relabelling and element order. On top of the search sit a
//! breadth-first tree splitter for parallel exploration, a cavity remesher
//! that shrinks geometric meshes while preserving their boundary, and a
//! sampled-Jacobian validity layer with an untangler.

pub mod adjacency;
pub mod bitset;
pub mod combinatorial;
pub mod error;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod parallel;
pub mod search;
pub mod simplify;

pub use combinatorial::{
    canonicalize_hex, canonicalize_quad, is_compatible, CanonicalHex, CanonicalQuad, HexComplex,
    QuadSurface, VertexId,
};
pub use error::{Error, Result};
pub use geometry::{untangle, validity, GeoMesh, UntangleConfig, ValidityReport};
pub use parallel::{parallel_search, split, WorkPlan, DEFAULT_SUBTREES_PER_THREAD};
pub use search::{
    canonical_solution_key, collect_solutions, count_solutions, search, SearchLimits,
    SearchOptions, SearchProblem, SearchStats, Solution,
};
pub use simplify::{
    remesh_cavity, select_cavity, simplify, Cavity, SimplifyConfig, SimplifyReport,
};
