//! Benchmark orchestration: a fixed method grid over synthetic scenes
//! with small and large Perlin void suites, plus an ablation of the
//! guided fill into its initialization and diffusion stages.

use rayon::prelude::*;
use voidfill_core::baselines::{
    harmonic_fill, idw_fill, spline_fill, tps_default_reg, IDW_DEFAULT_K, IDW_DEFAULT_POWER,
    TPS_DEFAULT_MAX_SAMPLES, TPS_DEFAULT_RING,
};
use voidfill_core::grid::{apply_mask, Grid, VoidMask};
use voidfill_core::guide::EdgeParams;
use voidfill_core::init::{pyramid_init, InitMode};
use voidfill_core::masks::{sample_mask_with_coverage, Pcg32, PerlinParams};
use voidfill_core::metrics::{evaluate, MetricsReport};
use voidfill_core::scene::{make_scene, SceneSpec};
use voidfill_core::solver::{fill, Method, SolveConfig};
use voidfill_core::{Error, Result};

pub const SMALL_BAND: (f64, f64) = (0.05, 0.25);
pub const LARGE_BAND: (f64, f64) = (0.60, 0.80);

/// Iteration budget for the diffusion-only ablation arm. A fully
/// converged solve erases any trace of its starting point, so the arm
/// runs a fixed budget of explicit diffusion steps from the median
/// init — information then propagates only ~sqrt(2*dt*budget) pixels
/// into the void, leaving the median plateau visible in deep interiors.
/// The init+diffusion arm is the regular converged guided fill.
pub const ABLATION_BUDGET: usize = 100;

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub scenes: usize,
    pub size: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenes: 20,
            size: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub scene: String,
    pub mask: &'static str,
    pub method: &'static str,
    pub report: MetricsReport,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        self.report.csv_row(&self.scene, self.mask, self.method)
    }
}

/// Random-parameter Perlin mask with coverage in `band`, retrying with
/// fresh noise parameters if the band is unreachable for a draw.
pub fn bench_mask(size: usize, seed: u64, salt: u64, band: (f64, f64)) -> Result<VoidMask> {
    for attempt in 0..8u64 {
        let base = seed ^ salt ^ attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let mut rng = Pcg32::new(base);
        let p = PerlinParams::random(&mut rng, base);
        match sample_mask_with_coverage(size, &p, band, 64) {
            Ok(m) => return Ok(m),
            Err(Error::CoverageUnreachable(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::CoverageUnreachable(8))
}

fn eval_row(
    scene: &str,
    mask_name: &'static str,
    method: &'static str,
    pred: &Grid,
    truth: &Grid,
    mask: &VoidMask,
) -> Result<BenchRow> {
    Ok(BenchRow {
        scene: scene.to_string(),
        mask: mask_name,
        method,
        report: evaluate(pred, truth, mask)?,
    })
}

fn scene_rows(cfg: &BenchConfig, index: usize) -> Result<Vec<BenchRow>> {
    let scene_seed = cfg.seed + index as u64;
    let label = format!("scene{scene_seed:04}");
    let spec = SceneSpec {
        size: cfg.size,
        terrain_seed: scene_seed,
        ..SceneSpec::default()
    };
    let (truth, guide) = make_scene(&spec)?;
    let edge = EdgeParams::default();
    let solve = SolveConfig::default();

    let mut rows = Vec::with_capacity(10);
    for (mask_name, band, salt) in [
        ("small", SMALL_BAND, 0x0051u64),
        ("large", LARGE_BAND, 0x1a46u64),
    ] {
        let mask = bench_mask(cfg.size, scene_seed, salt, band)?;
        let spline = spline_fill(
            &truth,
            &mask,
            TPS_DEFAULT_MAX_SAMPLES,
            TPS_DEFAULT_RING,
            tps_default_reg(TPS_DEFAULT_MAX_SAMPLES),
        )?;
        rows.push(eval_row(&label, mask_name, "spline", &spline, &truth, &mask)?);

        let idw = idw_fill(&truth, &mask, IDW_DEFAULT_POWER, IDW_DEFAULT_K)?;
        rows.push(eval_row(&label, mask_name, "idw", &idw, &truth, &mask)?);

        let harmonic = harmonic_fill(&truth, &mask, &solve)?;
        rows.push(eval_row(&label, mask_name, "harmonic", &harmonic, &truth, &mask)?);

        // The converged guided fill doubles as the init+diffusion arm.
        let dfilled = fill(&truth, &mask, Some(&guide), &edge, InitMode::Pyramid, &solve)?;
        rows.push(eval_row(&label, mask_name, "dfilled", &dfilled.filled, &truth, &mask)?);

        if mask_name == "large" {
            let masked = apply_mask(&truth, &mask)?;
            let init_only = pyramid_init(&masked, &mask, &Default::default())?;
            rows.push(eval_row(&label, mask_name, "init-only", &init_only, &truth, &mask)?);

            let budget = SolveConfig {
                method: Method::Explicit,
                tol: 0.0,
                max_iters: ABLATION_BUDGET,
                ..SolveConfig::default()
            };
            let diff_only = fill(&truth, &mask, Some(&guide), &edge, InitMode::Median, &budget)?;
            rows.push(eval_row(
                &label,
                mask_name,
                "diffusion-only",
                &diff_only.filled,
                &truth,
                &mask,
            )?);
        }
    }
    Ok(rows)
}

/// Run the full bench grid. Scenes are processed in parallel and the
/// rows merged in scene order, so output is deterministic.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let per_scene: Vec<Result<Vec<BenchRow>>> = (0..cfg.scenes)
        .into_par_iter()
        .map(|i| scene_rows(cfg, i))
        .collect();
    let mut rows = Vec::with_capacity(cfg.scenes * 10);
    for r in per_scene {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Per (mask, method) mean and sample standard deviation of a metric.
pub fn cell_stats(rows: &[BenchRow], mask: &str, method: &str, pick: fn(&MetricsReport) -> f64) -> Option<(f64, f64, usize)> {
    let vals: Vec<f64> = rows
        .iter()
        .filter(|r| r.mask == mask && r.method == method)
        .map(|r| pick(&r.report))
        .collect();
    if vals.is_empty() {
        return None;
    }
    let n = vals.len();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Some((mean, var.sqrt(), n))
}

/// Human-readable per-cell summary table.
pub fn summarize(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "mask   method          n   rmse_void        nmad_void        medae_void\n",
    );
    for mask in ["small", "large"] {
        for method in ["spline", "idw", "harmonic", "dfilled", "init-only", "diffusion-only"] {
            let rmse = cell_stats(rows, mask, method, |r| r.rmse_void);
            let (Some((rm, rs, n)), Some((nm, ns, _)), Some((mm, ms, _))) = (
                rmse,
                cell_stats(rows, mask, method, |r| r.nmad_void),
                cell_stats(rows, mask, method, |r| r.medae_void),
            ) else {
                continue;
            };
            out.push_str(&format!(
                "{mask:<6} {method:<15} {n:<3} {rm:>7.4}±{rs:<7.4} {nm:>7.4}±{ns:<7.4} {mm:>7.4}±{ms:<7.4}\n"
            ));
        }
    }
    out
}
