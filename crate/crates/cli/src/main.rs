//! `ivpp`: iterate maps, inspect period conditions, decompose varieties into
//! components and render tiling rasters.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ivpp_core::builtin;
use ivpp_core::decomp::{
    boundaries_analytic, boundaries_empirical, decompose, decompose_with, denominator_zero_curves, tiling_2d,
    ComponentDecomposition, Convention, DecompError, Method, RasterSpec, ScanSpec, SuccessorReport, TilingRaster,
    Window,
};
use ivpp_core::dsl::{format_map, parse_expr, parse_map, DslError};
use ivpp_core::exec::Execution;
use ivpp_core::ext::ExtendedComplex;
use ivpp_core::io as ser;
use ivpp_core::ivpp2d::{branches, gamma_poly, root, IvppBranch2D, IvppError};
use ivpp_core::lv::{self, LvError, Sign};
use ivpp_core::map::{Component, MapError, PointD, RationalMapSpec};
use ivpp_core::verify;

#[derive(Parser)]
#[command(name = "ivpp", version, about = "Invariant varieties of periodic points of rational maps")]
struct Cli {
    /// Worker threads for raster work (overrides IVPP_THREADS; 1 = sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterate a map from a starting point and print the orbit as JSON.
    Orbit(OrbitArgs),
    /// Print the period polynomial and branch levels.
    Ivpp(IvppArgs),
    /// Split a periodic variety into components (JSON).
    Decompose(DecomposeArgs),
    /// Compare closed-form and scanned component boundaries.
    Boundaries(BoundariesArgs),
    /// Render a tiling raster as PGM or CSV.
    Raster(RasterArgs),
    /// Render the loci where iterates first hit a pole.
    Denoms(DenomsArgs),
    /// Run the acceptance suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Parse a map file, print its normal form and check the round trip.
    Parse(ParseArgs),
}

#[derive(Args)]
struct MapArg {
    /// Built-in map (f2d, f3d, f2d-reduced, lv-recurrence) or a path to a map file.
    #[arg(long, default_value = "f2d")]
    map: String,
    /// Level r for f2d-reduced and f3d.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    map: MapArg,
    /// Starting point, comma separated; `inf` is the point at infinity.
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    #[arg(long, default_value_t = 1)]
    steps: usize,
}

#[derive(Args)]
struct IvppArgs {
    /// Period; all of 3..=6 when omitted.
    #[arg(long)]
    period: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Analytic,
    Empirical,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Left,
    Right,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    map: MapArg,
    #[arg(long)]
    period: u32,
    /// Branch index m, or `all`.
    #[arg(long, default_value = "1")]
    branch: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Analytic)]
    method: MethodArg,
    /// Angular samples for the boundary scan.
    #[arg(long, default_value_t = 2048)]
    samples: usize,
    /// Sheet for the three-dimensional map: `+` or `-`.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    sign: String,
    /// Parametrization of the curve for map files: one expression in `x`
    /// per coordinate, comma separated, e.g. `x,-3/x`.
    #[arg(long, allow_hyphen_values = true)]
    param: Option<String>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Left)]
    convention: ConventionArg,
}

#[derive(Args)]
struct BoundariesArgs {
    /// Period; all of 3..=6 when omitted.
    #[arg(long)]
    period: Option<u32>,
    /// Levels r of the three-dimensional map instead, e.g. `-5..5`.
    #[arg(long, allow_hyphen_values = true)]
    lv_levels: Option<String>,
    #[arg(long, default_value_t = 2048)]
    samples: usize,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Pgm,
    Csv,
}

#[derive(Args)]
struct GridArgs {
    /// `x_min,x_max,y_min,y_max`.
    #[arg(long, default_value = "-4,4,-4,4", allow_hyphen_values = true)]
    window: String,
    /// `WIDTHxHEIGHT` or a single side length.
    #[arg(long, default_value = "400")]
    size: String,
    /// Output format; inferred from the output extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RasterArgs {
    /// `f2d` for period tilings, `f3d` for level stripes of the period-2 surface.
    #[arg(long, default_value = "f2d")]
    map: String,
    #[arg(long, default_value_t = 3)]
    period: u32,
    /// Branch index m, or `all`.
    #[arg(long, default_value = "all")]
    branch: String,
    /// Integer levels for `f3d`, e.g. `-5..5`.
    #[arg(long, default_value = "-5..5", allow_hyphen_values = true)]
    levels: String,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct DenomsArgs {
    #[command(flatten)]
    map: MapArg,
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    /// Fixed z for three-dimensional maps.
    #[arg(long, allow_hyphen_values = true)]
    slice: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only these criteria (1-10).
    #[arg(long)]
    only: Vec<usize>,
}

#[derive(Args)]
struct ParseArgs {
    /// Map file, or `-` for standard input.
    file: PathBuf,
}

/// A command failure: exit 2 for bad input, 1 for failed checks.
enum Failure {
    Usage(String),
    Check(String),
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Usage(e.to_string())
            }
        }
    )*};
}

usage_from!(IvppError, DecompError, LvError, MapError, DslError, io::Error);

type Outcome = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = match cli.threads {
        Some(0) => Execution::Parallel,
        Some(1) => Execution::Sequential,
        Some(k) => Execution::ParallelThreads(k),
        None => Execution::from_env(),
    };
    let result = match cli.cmd {
        Cmd::Orbit(a) => orbit(a),
        Cmd::Ivpp(a) => ivpp(a),
        Cmd::Decompose(a) => decompose_cmd(a),
        Cmd::Boundaries(a) => boundaries(a),
        Cmd::Raster(a) => raster(a, exec),
        Cmd::Denoms(a) => denoms(a, exec),
        Cmd::Verify(a) => verify_cmd(a, exec),
        Cmd::Parse(a) => parse(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn load_map(arg: &MapArg) -> Result<RationalMapSpec, Failure> {
    if let Some(m) = builtin::by_name(&arg.map, arg.r) {
        return Ok(m);
    }
    let path = Path::new(&arg.map);
    if !path.exists() {
        return Err(usage(format!(
            "unknown map `{}`; use one of {} or a map file",
            arg.map,
            builtin::NAMES.join(", ")
        )));
    }
    let src = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_map(&src).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_coord(s: &str) -> Result<ExtendedComplex, Failure> {
    match s.trim() {
        "inf" | "-inf" | "∞" => Ok(ExtendedComplex::Infinity),
        t => t.parse::<f64>().map(ExtendedComplex::real).map_err(|_| usage(format!("bad coordinate `{t}`"))),
    }
}

fn emit(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn orbit(a: OrbitArgs) -> Outcome {
    let map = load_map(&a.map)?;
    let coords = a.start.split(',').map(parse_coord).collect::<Result<Vec<_>, _>>()?;
    if coords.len() != map.dim() {
        return Err(usage(format!("start has {} coordinates, the map has {}", coords.len(), map.dim())));
    }
    let trace = map.iterate(&PointD::new(coords), a.steps)?;
    emit(&ser::to_string(&ser::orbit_json(&trace)))
}

fn ivpp(a: IvppArgs) -> Outcome {
    let periods: Vec<u32> = a.period.map_or_else(|| (3..=6).collect(), |n| vec![n]);
    let mut docs = Vec::new();
    for n in periods {
        docs.push(ser::ivpp_json(&gamma_poly(n)?, &branches(n)?));
    }
    let v = if docs.len() == 1 { docs.remove(0) } else { serde_array(docs) };
    emit(&ser::to_string(&v))
}

fn serde_array(v: Vec<ser::Value>) -> ser::Value {
    ser::Value::Array(v)
}

fn select_branches(n: u32, sel: &str) -> Result<Vec<IvppBranch2D>, Failure> {
    let all = branches(n)?;
    if sel == "all" {
        return Ok(all);
    }
    let m: u32 = sel.parse().map_err(|_| usage(format!("bad branch `{sel}`; use an index m or `all`")))?;
    Ok(vec![IvppBranch2D::new(n, m)?])
}

fn parse_sign(s: &str) -> Result<Sign, Failure> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(usage(format!("bad sign `{s}`; use + or -"))),
    }
}

/// A parametrization `x ↦ (e_1(x), …, e_d(x))` read from comma separated
/// expressions.
fn parse_param(src: &str, dim: usize) -> Result<Vec<Component>, Failure> {
    let parts: Vec<&str> = src.split(',').collect();
    if parts.len() != dim {
        return Err(usage(format!("parametrization has {} coordinates, the map has {dim}", parts.len())));
    }
    parts
        .iter()
        .map(|p| parse_expr(p, 1).map(|e| Component::from_expr(&e)).map_err(|e| usage(format!("--param: {e}"))))
        .collect()
}

fn eval_param(comps: &[Component], x: f64) -> PointD {
    let arg = [ExtendedComplex::real(x)];
    PointD::new(comps.iter().map(|c| c.eval(&arg).unwrap_or(ExtendedComplex::Infinity)).collect())
}

fn decompose_cmd(a: DecomposeArgs) -> Outcome {
    let scan = ScanSpec { samples: a.samples, ..ScanSpec::default() };
    let docs: Vec<ComponentDecomposition> = match a.map.map.as_str() {
        "f2d" => {
            let method = match a.method {
                MethodArg::Analytic => Method::Analytic,
                MethodArg::Empirical => Method::Empirical(scan),
            };
            select_branches(a.period, &a.branch)?.iter().map(|b| decompose(b, method)).collect::<Result<_, _>>()?
        }
        "f3d" => {
            if a.period != 2 {
                return Err(usage("the three-dimensional map is decomposed at period 2 only"));
            }
            let r = a.map.r.ok_or_else(|| usage("--r is required for f3d"))?;
            vec![lv::lv_decompose_period2(r, parse_sign(&a.sign)?)?]
        }
        name => {
            let (map, comps, convention) = match name {
                "lv-recurrence" => {
                    // every real point is 2-periodic and the only cut is the pole at 1,
                    // so no two pieces are swapped
                    return Err(usage("lv-recurrence is an involution of the whole line and has no component cycle; decompose f3d instead"));
                }
                "f2d-reduced" => {
                    let r = a.map.r.unwrap_or_else(|| if a.period >= 3 { root(a.period, 1) } else { -3.0 });
                    (builtin::f2d_reduced(r), parse_param("x", 1)?, Convention::LeftClosed)
                }
                _ => {
                    let map = load_map(&a.map)?;
                    let src = a.param.as_deref().ok_or_else(|| usage("--param is required for map files"))?;
                    let comps = parse_param(src, map.dim())?;
                    let convention = match a.convention {
                        ConventionArg::Left => Convention::LeftClosed,
                        ConventionArg::Right => Convention::RightClosed,
                    };
                    (map, comps, convention)
                }
            };
            let param = |x: f64| eval_param(&comps, x);
            let bounds = boundaries_empirical(&map, &param, a.period, &scan)?;
            let cuts = bounds.into_iter().filter(|x| x.is_finite()).collect();
            vec![decompose_with(&map, &param, a.period, name.to_string(), a.map.r, convention, cuts)?]
        }
    };
    let mut values: Vec<ser::Value> = docs.iter().map(ser::decomposition_json).collect();
    let v = if values.len() == 1 { values.remove(0) } else { serde_array(values) };
    emit(&ser::to_string(&v))
}

fn fmt_bound(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.12}")
    }
}

fn parse_levels(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(format!("bad level range `{s}`; use e.g. -5..5"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lv::integer_levels(lo, hi))
}

fn boundaries(a: BoundariesArgs) -> Outcome {
    let mut out = String::new();
    if let Some(levels) = &a.lv_levels {
        out.push_str("r\tsign\tscanned\tmax |diff| from {0, 1, inf}\n");
        for r in parse_levels(levels)? {
            for sign in [Sign::Plus, Sign::Minus] {
                match lv::lv_boundaries_empirical(r, sign, a.samples) {
                    Ok(b) => {
                        let diff = if b.len() == 3 {
                            format!("{:.2e}", b[0].abs().max((b[1] - 1.0).abs()))
                        } else {
                            "different count".into()
                        };
                        let shown: Vec<String> = b.iter().map(|&x| fmt_bound(x)).collect();
                        out.push_str(&format!("{r}\t{}\t{}\t{diff}\n", sign.symbol(), shown.join(" ")));
                    }
                    Err(e) => out.push_str(&format!("{r}\t{}\t-\t{e}\n", sign.symbol())),
                }
            }
        }
        return emit(&out);
    }
    let map = builtin::f2d();
    let scan = ScanSpec { samples: a.samples, ..ScanSpec::default() };
    let periods: Vec<u32> = a.period.map_or_else(|| (3..=6).collect(), |n| vec![n]);
    out.push_str("n\tbranch\tanalytic\tempirical\t|diff|\n");
    for n in periods {
        for b in branches(n)? {
            let want = boundaries_analytic(&b)?;
            let got = boundaries_empirical(&map, &|x| b.point_real(x), n, &scan)?;
            for i in 0..want.len().max(got.len()) {
                let w = want.get(i).copied();
                let g = got.get(i).copied();
                let diff = match (w, g) {
                    (Some(w), Some(g)) if w.is_infinite() && g.is_infinite() => "0".into(),
                    (Some(w), Some(g)) => format!("{:.2e}", (w - g).abs()),
                    _ => "missing".into(),
                };
                out.push_str(&format!(
                    "{n}\t{}\t{}\t{}\t{diff}\n",
                    b.label(),
                    w.map_or("-".into(), fmt_bound),
                    g.map_or("-".into(), fmt_bound)
                ));
            }
        }
    }
    emit(&out)
}

struct Grid {
    window: Window,
    width: usize,
    height: usize,
    format: Format,
    out: Option<PathBuf>,
}

fn parse_grid(g: &GridArgs) -> Result<Grid, Failure> {
    let w: Vec<f64> = g
        .window
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("bad window `{}`", g.window)))?;
    if w.len() != 4 {
        return Err(usage("window needs x_min,x_max,y_min,y_max"));
    }
    let window = Window { x_min: w[0], x_max: w[1], y_min: w[2], y_max: w[3] };
    if !window.is_valid() {
        return Err(usage(format!("empty window `{}`", g.window)));
    }
    let bad = || usage(format!("bad size `{}`", g.size));
    let (width, height) = match g.size.split_once('x') {
        Some((a, b)) => (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?),
        None => {
            let s: usize = g.size.parse().map_err(|_| bad())?;
            (s, s)
        }
    };
    if width == 0 || height == 0 || width > RasterSpec::MAX_SIDE || height > RasterSpec::MAX_SIDE {
        return Err(usage(format!("size must be between 1 and {} per side", RasterSpec::MAX_SIDE)));
    }
    let from_ext = g.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()).and_then(|e| {
        match e.to_ascii_lowercase().as_str() {
            "pgm" => Some(Format::Pgm),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    });
    let format = g.format.or(from_ext).unwrap_or(Format::Pgm);
    Ok(Grid { window, width, height, format, out: g.out.clone() })
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Outcome {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().lock().write_all(bytes)?;
            Ok(())
        }
    }
}

fn raster(a: RasterArgs, exec: Execution) -> Outcome {
    let grid = parse_grid(&a.grid)?;
    if !(a.tol > 0.0) || a.n_max == 0 {
        return Err(usage("tolerance and n-max must be positive"));
    }
    let mut spec = RasterSpec::new(grid.window, grid.width, grid.height);
    spec.exec = exec;
    spec.n_max = a.n_max;
    spec.tol = a.tol;
    let (raster, report): (TilingRaster, SuccessorReport) = match a.map.as_str() {
        "f2d" => {
            let decomps = select_branches(a.period, &a.branch)?
                .into_iter()
                .map(|b| decompose(&b, Method::Analytic).map(|d| (b, d)))
                .collect::<Result<Vec<_>, _>>()?;
            tiling_2d(&builtin::f2d(), &decomps, &spec)
        }
        "f3d" => lv::lv_stripe_raster(&parse_levels(&a.levels)?, &spec)?,
        other => return Err(usage(format!("rasters are available for f2d and f3d, not `{other}`"))),
    };
    let mut bytes = Vec::new();
    match grid.format {
        Format::Pgm => ser::write_raster_pgm(&mut bytes, &raster)?,
        Format::Csv => ser::write_raster_csv(&mut bytes, &raster)?,
    }
    write_output(&grid.out, &bytes)?;
    eprintln!(
        "{} classified cells, {} component classes; successor property {}/{} ({:.4})",
        raster.classified(),
        raster.component_classes().len(),
        report.agreeing,
        report.checked,
        report.fraction()
    );
    Ok(())
}

fn denoms(a: DenomsArgs, exec: Execution) -> Outcome {
    let grid = parse_grid(&a.grid)?;
    let map = load_map(&a.map)?;
    if !(1..=6).contains(&a.k_max) {
        return Err(usage("k-max must be between 1 and 6"));
    }
    let set = denominator_zero_curves(&map, a.k_max, grid.window, grid.width, grid.height, a.slice, exec);
    let mut bytes = Vec::new();
    match grid.format {
        Format::Pgm => ser::write_layers_pgm(&mut bytes, &set)?,
        Format::Csv => ser::write_layers_csv(&mut bytes, &set)?,
    }
    write_output(&grid.out, &bytes)?;
    let counts: Vec<String> = set.counts().iter().enumerate().map(|(k, c)| format!("k={}: {c}", k + 1)).collect();
    eprintln!("cells per layer: {}", counts.join(", "));
    Ok(())
}

fn verify_cmd(a: VerifyArgs, exec: Execution) -> Outcome {
    if let Some(bad) = a.only.iter().find(|&&i| !(1..=verify::COUNT).contains(&i)) {
        return Err(usage(format!("criterion {bad} does not exist (1-{})", verify::COUNT)));
    }
    let ids: Vec<usize> = if a.only.is_empty() { (1..=verify::COUNT).collect() } else { a.only };
    let mut failed = 0;
    for id in ids {
        let r = verify::run(id, exec);
        println!("{r}");
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} criteria failed")));
    }
    Ok(())
}

fn parse(a: ParseArgs) -> Outcome {
    let src = if a.file.as_os_str() == "-" {
        io::read_to_string(io::stdin())?
    } else {
        fs::read_to_string(&a.file).map_err(|e| usage(format!("{}: {e}", a.file.display())))?
    };
    let spec = parse_map(&src)?;
    let text = format_map(&spec);
    let again = parse_map(&text).map_err(|e| Failure::Check(format!("normal form does not re-parse: {e}")))?;
    emit(&text)?;
    if again != spec {
        return Err(Failure::Check("round trip changed the map".into()));
    }
    Ok(())
}
