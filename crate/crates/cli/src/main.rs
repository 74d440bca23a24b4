//! Command line interface: boundary/mesh generation, conformal mesh
//! enumeration, lower-bound refutation runs, mesh simplification, and
//! validity checking.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 budget
//! exceeded.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use hexmesh_core::geometry::{untangle, validity, UntangleConfig};
use hexmesh_core::io::{
    format_hexm, gen_cube_boundary, gen_grid_boundary, gen_grid_mesh, gen_schneiders_boundary,
    gen_spindle_boundary, parse_hexm, HexmData,
};
use hexmesh_core::simplify::{simplify, SimplifyConfig};
use hexmesh_core::{
    collect_solutions, count_solutions, parallel_search, QuadSurface, SearchLimits, SearchOptions,
    SearchProblem, Solution, DEFAULT_SUBTREES_PER_THREAD,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hexmesh",
    about = "Enumerate, refute, and simplify combinatorial hexahedral meshes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a built-in boundary or mesh.
    Gen(GenArgs),
    /// Enumerate all hex meshes conformal to a boundary.
    Enumerate(EnumerateArgs),
    /// Refutation runs with incrementing limits, printing SAT/UNSAT per step.
    Bound(BoundArgs),
    /// Shrink a mesh by cavity remeshing and untangling.
    Simplify(SimplifyArgs),
    /// Check mesh validity via sampled Jacobians.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Unit cube boundary (6 quads).
    Cube,
    /// Structured grid mesh (use --dims AxBxC).
    Grid,
    /// Boundary of a structured grid (use --dims AxBxC).
    GridBoundary,
    /// Schneiders' pyramid boundary (16 quads, 18 vertices).
    SchneidersBoundary,
    /// Octagonal spindle boundary (8 kites, 10 vertices).
    SpindleBoundary,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    /// Grid dimensions, e.g. 2x3x1.
    #[arg(long, default_value = "1x1x1")]
    dims: String,
    /// Ring-vertex height offset of the spindle.
    #[arg(long, default_value_t = 0.25)]
    ring_height: f64,
    /// Apex height of the spindle.
    #[arg(long, default_value_t = 1.0)]
    apex_height: f64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Boundary hexm file; `-` or omitted reads stdin.
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long)]
    max_hex: usize,
    #[arg(long)]
    max_vertices: u32,
    /// Worker threads; 0 = auto, 1 = plain sequential search.
    #[arg(long, env = "HEXMESH_THREADS", default_value_t = 1)]
    threads: usize,
    /// Subtrees attributed per thread when splitting.
    #[arg(long, default_value_t = DEFAULT_SUBTREES_PER_THREAD)]
    split_target: usize,
    /// Report the count only; solutions are not materialized.
    #[arg(long)]
    count_only: bool,
    /// Write each solution as a hexm file into this directory.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    timeout_secs: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundMode {
    InteriorVertices,
    Hexahedra,
}

#[derive(Args)]
struct BoundArgs {
    /// Boundary hexm file; `-` or omitted reads stdin.
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: BoundMode,
    #[arg(long)]
    from: u32,
    #[arg(long)]
    to: u32,
    #[arg(long, env = "HEXMESH_THREADS", default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = DEFAULT_SUBTREES_PER_THREAD)]
    split_target: usize,
    /// Cap on the complementary limit (hexes for vertex mode and vice
    /// versa); defaults to the structural implication of the swept limit.
    #[arg(long)]
    cap: Option<u64>,
    /// Wall-clock budget in seconds for the whole sweep.
    #[arg(long)]
    timeout_secs: Option<u64>,
}

#[derive(Args)]
struct SimplifyArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    cavity_min: usize,
    #[arg(long, default_value_t = 18)]
    cavity_max: usize,
    /// Budget per cavity remeshing search, in seconds.
    #[arg(long, default_value_t = 30)]
    budget_secs: u64,
    /// Enumerate every replacement and take the smallest.
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 3)]
    samples: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, default_value_t = 3)]
    samples: usize,
    /// Untangle interior vertices before judging validity.
    #[arg(long)]
    untangle: bool,
    /// Write the (possibly untangled) mesh here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Simplify(args) => cmd_simplify(args),
        Command::Validate(args) => cmd_validate(args),
    };
    ExitCode::from(code)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn read_boundary(path: &Option<PathBuf>) -> Result<(HexmData, QuadSurface), String> {
    let text = match path {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| format!("stdin: {e}"))?;
            s
        }
    };
    let data = parse_hexm(&text).map_err(|e| e.to_string())?;
    let surface = data.to_quad_surface().map_err(|e| e.to_string())?;
    Ok((data, surface))
}

fn write_output(out: &Option<PathBuf>, data: &HexmData) -> Result<(), String> {
    let text = format_hexm(data);
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    }
}

fn parse_dims(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("bad --dims `{s}`, expected AxBxC"));
    }
    let mut d = [0u32; 3];
    for (i, p) in parts.iter().enumerate() {
        d[i] = p
            .parse()
            .map_err(|_| format!("bad --dims component `{p}`"))?;
        if d[i] == 0 {
            return Err("grid dimensions must be positive".into());
        }
    }
    Ok((d[0], d[1], d[2]))
}

fn cmd_gen(args: GenArgs) -> u8 {
    let data = match args.kind {
        GenKind::Cube => gen_cube_boundary(),
        GenKind::Grid => match parse_dims(&args.dims) {
            Ok((a, b, c)) => gen_grid_mesh(a, b, c),
            Err(e) => return fail(EXIT_USAGE, e),
        },
        GenKind::GridBoundary => match parse_dims(&args.dims) {
            Ok((a, b, c)) => gen_grid_boundary(a, b, c),
            Err(e) => return fail(EXIT_USAGE, e),
        },
        GenKind::SchneidersBoundary => gen_schneiders_boundary(),
        GenKind::SpindleBoundary => gen_spindle_boundary(args.ring_height, args.apex_height),
    };
    match write_output(&args.out, &data) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(EXIT_INVALID_INPUT, e),
    }
}

fn run_search(
    surface: QuadSurface,
    limits: SearchLimits,
    options: &SearchOptions,
    threads: usize,
    split_target: usize,
    collect: bool,
) -> Result<(hexmesh_core::SearchStats, Vec<Solution>), String> {
    let problem = SearchProblem::new(surface, limits).map_err(|e| e.to_string())?;
    if threads == 1 {
        if collect {
            collect_solutions(&problem, options).map_err(|e| e.to_string())
        } else {
            count_solutions(&problem, options)
                .map(|s| (s, Vec::new()))
                .map_err(|e| e.to_string())
        }
    } else {
        parallel_search(&problem, options, threads, split_target, collect)
            .map_err(|e| e.to_string())
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> u8 {
    let (data, surface) = match read_boundary(&args.boundary) {
        Ok(x) => x,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    let limits = SearchLimits::new(args.max_hex, args.max_vertices);
    let options = SearchOptions {
        deadline: args
            .timeout_secs
            .map(|s| Instant::now() + Duration::from_secs(s)),
        ..Default::default()
    };
    let t = Instant::now();
    let collect = args.emit.is_some();
    let (stats, mut solutions) = match run_search(
        surface,
        limits,
        &options,
        args.threads,
        args.split_target,
        collect,
    ) {
        Ok(x) => x,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    eprintln!(
        "nodes={} backtracks={} threads={} wall={:.3}s",
        stats.nodes,
        stats.backtracks,
        args.threads,
        t.elapsed().as_secs_f64()
    );
    if stats.aborted {
        eprintln!("TIMEOUT: partial exploration only; counts are not exhaustive");
        return EXIT_BUDGET;
    }
    if let Some(dir) = &args.emit {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(EXIT_INVALID_INPUT, format!("{}: {e}", dir.display()));
        }
        // Deterministic emission order regardless of thread interleaving.
        solutions.sort_by(|a, b| a.hexes.cmp(&b.hexes));
        for (i, sol) in solutions.iter().enumerate() {
            let out = solution_to_hexm(&data, sol);
            let path = dir.join(format!("solution_{:05}.hexm", i + 1));
            if let Err(e) = std::fs::write(&path, format_hexm(&out)) {
                return fail(EXIT_INVALID_INPUT, format!("{}: {e}", path.display()));
            }
        }
    }
    println!("solutions: {}", stats.solutions);
    EXIT_OK
}

/// Solutions are combinatorial; emitted files carry the boundary coordinates
/// and place interior vertices at the boundary centroid, to be untangled by
/// `validate --untangle`. Corner tuples are reoriented consistently with a
/// positive majority volume, since construction order carries arbitrary
/// per-hex handedness.
fn solution_to_hexm(boundary: &HexmData, sol: &Solution) -> HexmData {
    let n_b = boundary.vertices.len();
    let n = sol
        .hexes
        .iter()
        .flatten()
        .map(|v| v.index() + 1)
        .max()
        .unwrap_or(n_b);
    let mut centroid = [0.0f64; 3];
    for c in &boundary.vertices {
        for k in 0..3 {
            centroid[k] += c[k] / n_b as f64;
        }
    }
    let mut vertices = boundary.vertices.clone();
    vertices.resize(n, centroid);
    let mut flags = vec![true; n_b];
    flags.resize(n, false);
    let mut hexes = sol.hexes.clone();
    hexmesh_core::geometry::orient_positive(&mut hexes, &vertices);
    HexmData {
        vertices,
        boundary_flags: flags,
        quads: Vec::new(),
        hexes: hexes.iter().map(|t| t.map(|v| v.0)).collect(),
    }
}

fn cmd_bound(args: BoundArgs) -> u8 {
    let (_, surface) = match read_boundary(&args.boundary) {
        Ok(x) => x,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    if args.from > args.to {
        return fail(EXIT_USAGE, "--from must not exceed --to");
    }
    let n_b = surface.n_vertices();
    let deadline = args
        .timeout_secs
        .map(|s| Instant::now() + Duration::from_secs(s));
    for k in args.from..=args.to {
        let limits = match args.mode {
            BoundMode::InteriorVertices => {
                // The finite vertex budget already makes the search tree
                // finite; an explicit cap shortens runs when desired.
                let max_hexes = args.cap.map(|c| c as usize).unwrap_or(usize::MAX);
                SearchLimits::new(max_hexes, n_b + k)
            }
            BoundMode::Hexahedra => {
                // Each hexahedron introduces at most 4 fresh vertices.
                let max_vertices = args
                    .cap
                    .map(|c| c as u32)
                    .unwrap_or_else(|| n_b.saturating_add(4 * k));
                SearchLimits::new(k as usize, max_vertices)
            }
        };
        let options = SearchOptions {
            deadline,
            solution_limit: Some(1),
            ..Default::default()
        };
        let t = Instant::now();
        let (stats, _) = match run_search(
            surface.clone(),
            limits,
            &options,
            args.threads,
            args.split_target,
            false,
        ) {
            Ok(x) => x,
            Err(e) => return fail(EXIT_INVALID_INPUT, e),
        };
        let label = match args.mode {
            BoundMode::InteriorVertices => format!("interior-vertices <= {k}"),
            BoundMode::Hexahedra => format!("hexahedra <= {k}"),
        };
        if stats.solutions > 0 {
            println!(
                "{label}: SAT ({:.3}s, {} nodes)",
                t.elapsed().as_secs_f64(),
                stats.nodes
            );
        } else if stats.aborted {
            println!(
                "{label}: TIMEOUT after {:.3}s ({} nodes); bound not established",
                t.elapsed().as_secs_f64(),
                stats.nodes
            );
            return EXIT_BUDGET;
        } else {
            println!(
                "{label}: UNSAT ({:.3}s, {} nodes)",
                t.elapsed().as_secs_f64(),
                stats.nodes
            );
        }
    }
    EXIT_OK
}

fn cmd_simplify(args: SimplifyArgs) -> u8 {
    let data = match hexmesh_core::io::read_hexm(&args.mesh) {
        Ok(d) => d,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    let mesh = match data.to_geo_mesh() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    let config = SimplifyConfig {
        seed: args.seed,
        cavity_min: args.cavity_min,
        cavity_max: args.cavity_max,
        remesh_budget: Duration::from_secs(args.budget_secs),
        exhaustive: args.exhaustive,
        samples_per_axis: args.samples,
        ..Default::default()
    };
    let t = Instant::now();
    let (out, report) = match simplify(&mesh, &config) {
        Ok(x) => x,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    for it in &report.iterations {
        println!(
            "cavity {} hexes / {} vertices / {} facets -> {} hexes / {} vertices; mesh now {} hexes",
            it.cavity_hexes,
            it.cavity_vertices,
            it.cavity_boundary_facets,
            it.replacement_hexes,
            it.replacement_vertices,
            it.mesh_hexes_after
        );
    }
    println!(
        "simplified {} -> {} hexes in {:.3}s ({} cavities tried, {} searches hit the budget)",
        mesh.hexes.len(),
        out.hexes.len(),
        t.elapsed().as_secs_f64(),
        report.cavities_tried,
        report.searches_aborted
    );
    match hexmesh_core::io::write_hexm(&args.out, &HexmData::from_geo_mesh(&out)) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(EXIT_INVALID_INPUT, e),
    }
}

fn cmd_validate(args: ValidateArgs) -> u8 {
    let data = match hexmesh_core::io::read_hexm(&args.mesh) {
        Ok(d) => d,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    let mut mesh = match data.to_geo_mesh() {
        Ok(m) => m,
        Err(e) => return fail(EXIT_INVALID_INPUT, e),
    };
    if args.untangle {
        let ok = untangle(
            &mut mesh,
            &UntangleConfig {
                samples_per_axis: args.samples,
                ..Default::default()
            },
        );
        if !ok {
            eprintln!("untangling failed; coordinates left unchanged");
        }
    }
    let report = validity(&mesh, args.samples);
    println!(
        "hexes={} min_jacobian={:.6e} invalid={}",
        mesh.hexes.len(),
        report.min_jacobian,
        report.invalid_hexes.len()
    );
    for h in report.invalid_hexes.iter().take(16) {
        println!("invalid hex {h}");
    }
    if let Some(out) = &args.out {
        if let Err(e) = hexmesh_core::io::write_hexm(out, &HexmData::from_geo_mesh(&mesh)) {
            return fail(EXIT_INVALID_INPUT, e);
        }
    }
    if report.is_valid() {
        EXIT_OK
    } else {
        EXIT_INVALID_INPUT
    }
}
