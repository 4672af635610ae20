//! CLI for guided DSM void filling: mask generation, filling,
//! evaluation, synthetic scenes and the benchmark grid.
//!
//! Exit codes: 0 ok, 2 usage error, 3 solver did not converge (output
//! is still written), 4 I/O or data error.

pub mod bench;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use voidfill_core::baselines::{
    idw_fill, spline_fill, tps_default_reg, IDW_DEFAULT_K, IDW_DEFAULT_POWER,
    TPS_DEFAULT_MAX_SAMPLES, TPS_DEFAULT_RING,
};
use voidfill_core::grid::{Grid, GuideImage, VoidMask};
use voidfill_core::guide::EdgeParams;
use voidfill_core::init::InitMode;
use voidfill_core::io::{
    read_ascii_grid, read_guide, read_mask, write_ascii_grid, write_guide, write_mask,
};
use voidfill_core::masks::{
    irregular_mask, mask_coverage, perlin_mask, rect_mask, sample_mask_with_coverage,
    PerlinParams, StrokeParams,
};
use voidfill_core::metrics::{evaluate, MetricsReport};
use voidfill_core::scene::{make_scene, SceneSpec};
use voidfill_core::solver::{build_tensor, fill, FillResult, Method, SolveConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_DATA: i32 = 4;

/// Command failure carrying its process exit code.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    NotConverged,
    Data(String),
}

impl CmdError {
    pub fn code(&self) -> i32 {
        match self {
            CmdError::Usage(_) => EXIT_USAGE,
            CmdError::NotConverged => EXIT_NOT_CONVERGED,
            CmdError::Data(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Usage(m) => write!(f, "usage error: {m}"),
            CmdError::NotConverged => write!(f, "solver did not converge (output written)"),
            CmdError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

/// Core errors map to the data exit code except for parameter
/// validation, which is a usage error.
fn core_err(e: voidfill_core::Error) -> CmdError {
    match e {
        voidfill_core::Error::InvalidParam(m) => CmdError::Usage(m),
        other => CmdError::Data(other.to_string()),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CmdError {
    CmdError::Data(format!("{}: {e}", path.display()))
}

type CmdResult<T> = Result<T, CmdError>;

#[derive(Parser, Debug)]
#[command(name = "voidfill", version, about = "Guided DSM void filling")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Generate a void mask (binary PGM, nonzero = void).
    Maskgen(MaskgenArgs),
    /// Fill voids in a DSM raster.
    Fill(FillArgs),
    /// Compare a filled raster against ground truth; prints one CSV row.
    Eval(EvalArgs),
    /// Run the benchmark grid over synthetic scenes.
    Bench(BenchArgs),
    /// Generate a synthetic ground-truth scene (DSM + guide image).
    Scene(SceneArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskKind {
    Perlin,
    Irregular,
    Rect,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FillMethod {
    Dfilled,
    Harmonic,
    Idw,
    Spline,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Explicit,
    Jacobi,
    Cg,
}

impl From<SolverKind> for Method {
    fn from(s: SolverKind) -> Method {
        match s {
            SolverKind::Explicit => Method::Explicit,
            SolverKind::Jacobi => Method::Jacobi,
            SolverKind::Cg => Method::Cg,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    Median,
    Pyramid,
}

impl From<InitKind> for InitMode {
    fn from(k: InitKind) -> InitMode {
        match k {
            InitKind::Median => InitMode::Median,
            InitKind::Pyramid => InitMode::Pyramid,
        }
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let lo: f64 = a.parse().map_err(|_| format!("bad number '{a}'"))?;
    let hi: f64 = b.parse().map_err(|_| format!("bad number '{b}'"))?;
    Ok((lo, hi))
}

fn parse_rect(s: &str) -> Result<(usize, usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected x0,y0,x1,y1, got '{s}'"));
    }
    let mut v = [0usize; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("bad integer '{p}'"))?;
    }
    Ok((v[0], v[1], v[2], v[3]))
}

#[derive(Args, Debug)]
pub struct MaskgenArgs {
    #[arg(long)]
    pub size: usize,
    #[arg(long, value_enum)]
    pub kind: MaskKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Target void coverage band lo:hi (perlin only).
    #[arg(long, value_parser = parse_pair)]
    pub coverage: Option<(f64, f64)>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub octaves: Option<u32>,
    #[arg(long)]
    pub persistence: Option<f64>,
    #[arg(long)]
    pub lacunarity: Option<f64>,
    /// Fixed noise threshold; omitted means drawn from the seed.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Rectangle x0,y0,x1,y1 inclusive (rect only).
    #[arg(long, value_parser = parse_rect)]
    pub rect: Option<(usize, usize, usize, usize)>,
}

#[derive(Args, Debug)]
pub struct FillArgs {
    #[arg(long)]
    pub dsm: PathBuf,
    /// Void mask PGM; without it, voids come from nodata cells.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Co-registered guide image (PGM/PPM), used by dfilled.
    #[arg(long)]
    pub guide: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub method: Option<FillMethod>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional key=value defaults file; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Clamp stencil corner weights for strict non-negativity.
    #[arg(long)]
    pub nonneg: bool,
    #[arg(long)]
    pub sigma_g: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub lambda_c: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub idw_k: Option<usize>,
    #[arg(long)]
    pub idw_power: Option<f64>,
    #[arg(long)]
    pub tps_samples: Option<usize>,
    #[arg(long)]
    pub tps_ring: Option<usize>,
    #[arg(long)]
    pub tps_reg: Option<f64>,
    /// Run-report path; default is OUT.report.txt.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write an iteration,residual CSV trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Dump the diffusion tensor as PREFIX.{dxx,dxy,dyy}.asc.
    #[arg(long)]
    pub dump_tensor: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub scenes: Option<usize>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV output path; omitted means standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SceneArgs {
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub buildings: usize,
    #[arg(long, default_value_t = 12.0)]
    pub relief: f64,
    #[arg(long, value_parser = parse_pair, default_value = "5:20")]
    pub height: (f64, f64),
    #[arg(long, default_value_t = 0.5)]
    pub cellsize: f64,
    #[arg(long)]
    pub out_dsm: PathBuf,
    #[arg(long)]
    pub out_guide: PathBuf,
}

/// key=value lines; '#' starts a comment, blank lines ignored.
fn load_config(path: &Path) -> CmdResult<HashMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CmdError::Usage(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Flag wins over config file wins over default.
fn resolve<T: std::str::FromStr>(
    flag: Option<T>,
    cfg: &HashMap<String, String>,
    key: &str,
    default: T,
) -> CmdResult<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match cfg.get(key) {
        Some(s) => s
            .parse()
            .map_err(|_| CmdError::Usage(format!("config key '{key}': bad value '{s}'"))),
        None => Ok(default),
    }
}

fn read_grid_file(path: &Path) -> CmdResult<Grid> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    read_ascii_grid(&text).map_err(|e| CmdError::Data(format!("{}: {e}", path.display())))
}

fn read_mask_file(path: &Path) -> CmdResult<VoidMask> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    read_mask(&bytes).map_err(|e| CmdError::Data(format!("{}: {e}", path.display())))
}

fn read_guide_file(path: &Path) -> CmdResult<GuideImage> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    read_guide(&bytes).map_err(|e| CmdError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult<()> {
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn cmd_maskgen(a: &MaskgenArgs) -> CmdResult<()> {
    if a.size == 0 {
        return Err(CmdError::Usage("--size must be positive".into()));
    }
    let mut sidecar = String::new();
    let _ = writeln!(sidecar, "kind={:?}", a.kind);
    let _ = writeln!(sidecar, "size={}", a.size);
    let _ = writeln!(sidecar, "seed={}", a.seed);

    let mask = match a.kind {
        MaskKind::Rect => {
            let (x0, y0, x1, y1) = a
                .rect
                .ok_or_else(|| CmdError::Usage("--kind rect requires --rect".into()))?;
            let _ = writeln!(sidecar, "rect={x0},{y0},{x1},{y1}");
            rect_mask(a.size, x0, y0, x1, y1).map_err(core_err)?
        }
        MaskKind::Irregular => {
            let s = StrokeParams {
                seed: a.seed,
                ..StrokeParams::default()
            };
            let _ = writeln!(sidecar, "strokes={}:{}", s.n_strokes.0, s.n_strokes.1);
            let _ = writeln!(sidecar, "brush={}:{}", s.brush_width.0, s.brush_width.1);
            irregular_mask(a.size, &s).map_err(core_err)?
        }
        MaskKind::Perlin => {
            let defaults = PerlinParams::default();
            let p = PerlinParams {
                scale: a.scale.unwrap_or(defaults.scale),
                octaves: a.octaves.unwrap_or(defaults.octaves),
                persistence: a.persistence.unwrap_or(defaults.persistence),
                lacunarity: a.lacunarity.unwrap_or(defaults.lacunarity),
                base: a.seed,
                threshold: a.threshold,
            };
            let _ = writeln!(sidecar, "scale={}", p.scale);
            let _ = writeln!(sidecar, "octaves={}", p.octaves);
            let _ = writeln!(sidecar, "persistence={}", p.persistence);
            let _ = writeln!(sidecar, "lacunarity={}", p.lacunarity);
            match a.coverage {
                Some(band) => {
                    let _ = writeln!(sidecar, "coverage={}:{}", band.0, band.1);
                    sample_mask_with_coverage(a.size, &p, band, 64).map_err(core_err)?
                }
                None => {
                    if let Some(t) = a.threshold {
                        let _ = writeln!(sidecar, "threshold={t}");
                    }
                    perlin_mask(a.size, &p, a.seed).map_err(core_err)?
                }
            }
        }
    };
    let _ = writeln!(sidecar, "achieved_coverage={}", mask_coverage(&mask));
    write_file(&a.out, &write_mask(&mask))?;
    let sidecar_path = sidecar_path(&a.out);
    write_file(&sidecar_path, sidecar.as_bytes())?;
    println!(
        "wrote {} ({}x{}, coverage {:.4}) and {}",
        a.out.display(),
        a.size,
        a.size,
        mask_coverage(&mask),
        sidecar_path.display()
    );
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".params");
    PathBuf::from(p)
}

struct FillOutcome {
    filled: Grid,
    iterations: usize,
    residual: f64,
    converged: bool,
    trace: Option<Vec<(usize, f64)>>,
}

impl From<FillResult> for FillOutcome {
    fn from(r: FillResult) -> Self {
        FillOutcome {
            filled: r.filled,
            iterations: r.iterations,
            residual: r.final_residual,
            converged: r.converged,
            trace: r.trace,
        }
    }
}

pub fn cmd_fill(a: &FillArgs) -> CmdResult<()> {
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => HashMap::new(),
    };
    let method = match a.method {
        Some(m) => m,
        None => match cfg.get("method").map(String::as_str) {
            None => FillMethod::Dfilled,
            Some("dfilled") => FillMethod::Dfilled,
            Some("harmonic") => FillMethod::Harmonic,
            Some("idw") => FillMethod::Idw,
            Some("spline") => FillMethod::Spline,
            Some(other) => return Err(CmdError::Usage(format!("config: unknown method '{other}'"))),
        },
    };
    let init = match a.init {
        Some(i) => i,
        None => match cfg.get("init").map(String::as_str) {
            None => InitKind::Pyramid,
            Some("median") => InitKind::Median,
            Some("pyramid") => InitKind::Pyramid,
            Some(other) => return Err(CmdError::Usage(format!("config: unknown init '{other}'"))),
        },
    };
    let solver = match a.solver {
        Some(s) => s,
        None => match cfg.get("solver").map(String::as_str) {
            None => SolverKind::Cg,
            Some("explicit") => SolverKind::Explicit,
            Some("jacobi") => SolverKind::Jacobi,
            Some("cg") => SolverKind::Cg,
            Some(other) => return Err(CmdError::Usage(format!("config: unknown solver '{other}'"))),
        },
    };
    let solve_defaults = SolveConfig::default();
    let edge_defaults = EdgeParams::default();
    let solve = SolveConfig {
        method: solver.into(),
        dt: resolve(a.dt, &cfg, "dt", solve_defaults.dt)?,
        tol: resolve(a.tol, &cfg, "tol", solve_defaults.tol)?,
        max_iters: resolve(a.max_iters, &cfg, "max_iters", solve_defaults.max_iters)?,
        nonneg_stencil: a.nonneg || cfg.get("nonneg").map(String::as_str) == Some("true"),
        record_trace: a.trace.is_some(),
    };
    let edge = EdgeParams {
        sigma_g: resolve(a.sigma_g, &cfg, "sigma_g", edge_defaults.sigma_g)?,
        rho: resolve(a.rho, &cfg, "rho", edge_defaults.rho)?,
        lambda_c: resolve(a.lambda_c, &cfg, "lambda_c", edge_defaults.lambda_c)?,
        alpha: resolve(a.alpha, &cfg, "alpha", edge_defaults.alpha)?,
    };
    let idw_k = resolve(a.idw_k, &cfg, "idw_k", IDW_DEFAULT_K)?;
    let idw_power = resolve(a.idw_power, &cfg, "idw_power", IDW_DEFAULT_POWER)?;
    let tps_samples = resolve(a.tps_samples, &cfg, "tps_samples", TPS_DEFAULT_MAX_SAMPLES)?;
    let tps_ring = resolve(a.tps_ring, &cfg, "tps_ring", TPS_DEFAULT_RING)?;
    let tps_reg = resolve(a.tps_reg, &cfg, "tps_reg", tps_default_reg(tps_samples))?;

    let dsm = read_grid_file(&a.dsm)?;
    let mask = match &a.mask {
        Some(p) => read_mask_file(p)?,
        None => VoidMask::new(dsm.width, dsm.height, false),
    };
    let guide = match &a.guide {
        Some(p) => Some(read_guide_file(p)?),
        None => None,
    };

    if let Some(prefix) = &a.dump_tensor {
        let tensor =
            build_tensor(dsm.width, dsm.height, guide.as_ref(), &edge).map_err(core_err)?;
        let (dxx, dxy, dyy) = tensor.to_grids();
        for (suffix, g) in [("dxx", &dxx), ("dxy", &dxy), ("dyy", &dyy)] {
            let mut p = prefix.as_os_str().to_owned();
            p.push(format!(".{suffix}.asc"));
            write_file(Path::new(&p), write_ascii_grid(g).as_bytes())?;
        }
    }

    let started = Instant::now();
    let outcome: FillOutcome = match method {
        FillMethod::Dfilled => fill(&dsm, &mask, guide.as_ref(), &edge, init.into(), &solve)
            .map_err(core_err)?
            .into(),
        FillMethod::Harmonic => fill(&dsm, &mask, None, &edge, InitMode::Median, &solve)
            .map_err(core_err)?
            .into(),
        FillMethod::Idw => FillOutcome {
            filled: idw_fill(&dsm, &mask, idw_power, idw_k).map_err(core_err)?,
            iterations: 0,
            residual: 0.0,
            converged: true,
            trace: None,
        },
        FillMethod::Spline => FillOutcome {
            filled: spline_fill(&dsm, &mask, tps_samples, tps_ring, tps_reg).map_err(core_err)?,
            iterations: 0,
            residual: 0.0,
            converged: true,
            trace: None,
        },
    };
    let wall = started.elapsed().as_secs_f64();

    write_file(&a.out, write_ascii_grid(&outcome.filled).as_bytes())?;

    if let (Some(path), Some(trace)) = (&a.trace, &outcome.trace) {
        let mut csv = String::from("iteration,residual\n");
        for (i, r) in trace {
            let _ = writeln!(csv, "{i},{r}");
        }
        write_file(path, csv.as_bytes())?;
    }

    let mut report = String::new();
    let _ = writeln!(report, "method: {method:?}");
    let _ = writeln!(report, "init: {init:?}");
    let _ = writeln!(report, "solver: {solver:?}");
    let _ = writeln!(report, "tol: {}", solve.tol);
    let _ = writeln!(report, "max_iters: {}", solve.max_iters);
    let _ = writeln!(report, "dt: {}", solve.dt);
    let _ = writeln!(report, "nonneg: {}", solve.nonneg_stencil);
    let _ = writeln!(
        report,
        "edge: sigma_g={} rho={} lambda_c={} alpha={}",
        edge.sigma_g, edge.rho, edge.lambda_c, edge.alpha
    );
    let _ = writeln!(report, "iterations: {}", outcome.iterations);
    let _ = writeln!(report, "residual: {}", outcome.residual);
    let _ = writeln!(report, "converged: {}", outcome.converged);
    let _ = writeln!(report, "wall_time_s: {wall:.6}");
    let report_path = a
        .report
        .clone()
        .unwrap_or_else(|| sidecar_report_path(&a.out));
    write_file(&report_path, report.as_bytes())?;

    println!(
        "wrote {} (iterations {}, residual {:.3e}, {:.3}s)",
        a.out.display(),
        outcome.iterations,
        outcome.residual,
        wall
    );
    if !outcome.converged {
        return Err(CmdError::NotConverged);
    }
    Ok(())
}

fn sidecar_report_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".report.txt");
    PathBuf::from(p)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn cmd_eval(a: &EvalArgs) -> CmdResult<()> {
    let pred = read_grid_file(&a.pred)?;
    let truth = read_grid_file(&a.truth)?;
    let mask = read_mask_file(&a.mask)?;
    let report = evaluate(&pred, &truth, &mask).map_err(|e| CmdError::Data(e.to_string()))?;
    println!("{}", MetricsReport::csv_header());
    println!(
        "{}",
        report.csv_row(&stem(&a.truth), &stem(&a.mask), &stem(&a.pred))
    );
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> CmdResult<()> {
    let cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => HashMap::new(),
    };
    let defaults = bench::BenchConfig::default();
    let bc = bench::BenchConfig {
        scenes: resolve(a.scenes, &cfg, "scenes", defaults.scenes)?,
        size: resolve(a.size, &cfg, "size", defaults.size)?,
        seed: resolve(a.seed, &cfg, "seed", defaults.seed)?,
    };
    if bc.scenes == 0 || bc.size < 16 {
        return Err(CmdError::Usage("--scenes must be >= 1 and --size >= 16".into()));
    }
    let rows = bench::run_bench(&bc).map_err(core_err)?;
    let mut csv = String::from(MetricsReport::csv_header());
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv());
        csv.push('\n');
    }
    match &a.out {
        Some(path) => {
            write_file(path, csv.as_bytes())?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
        }
        None => print!("{csv}"),
    }
    println!();
    print!("{}", bench::summarize(&rows));
    Ok(())
}

pub fn cmd_scene(a: &SceneArgs) -> CmdResult<()> {
    if a.height.0 > a.height.1 {
        return Err(CmdError::Usage("--height lo must be <= hi".into()));
    }
    let spec = SceneSpec {
        size: a.size,
        terrain_seed: a.seed,
        n_buildings: a.buildings,
        building_height: a.height,
        relief_amplitude: a.relief,
        cellsize: a.cellsize,
    };
    let (truth, guide) = make_scene(&spec).map_err(core_err)?;
    write_file(&a.out_dsm, write_ascii_grid(&truth).as_bytes())?;
    write_file(&a.out_guide, &write_guide(&guide))?;
    println!(
        "wrote {} and {}",
        a.out_dsm.display(),
        a.out_guide.display()
    );
    Ok(())
}

/// Dispatch a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.cmd {
        Cmd::Maskgen(a) => cmd_maskgen(a),
        Cmd::Fill(a) => cmd_fill(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Scene(a) => cmd_scene(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
