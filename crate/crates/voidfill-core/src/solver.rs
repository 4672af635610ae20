//! Discretization of div(D grad u) and the Dirichlet-constrained
//! steady-state solve over void pixels.
//!
//! The stencil is a divergence-form finite-volume scheme on a unit
//! grid: face-averaged d_xx / d_yy axis fluxes and a symmetric
//! corner-averaged discretization of the mixed d_xy term. Rows sum to
//! zero, so constants are in the null space; without the optional
//! non-negativity clamp the assembled operator is exactly symmetric.
//! Neighbors outside the grid get zero weight (zero-flux outer
//! boundary).

use crate::error::{Error, Result};
use crate::grid::{extract_void_mask, Grid, GuideImage, NormMode, NormParams, VoidMask};
use crate::guide::{
    diffusion_tensor, gaussian_smooth, gradient, luminance, structure_tensor, EdgeParams,
    TensorField,
};
use crate::init::{median_init, pyramid_init, InitMode, PyramidConfig};
use crate::util::pairwise_l2;

/// Neighbor slots of the 3x3 stencil.
pub const N: usize = 0;
pub const S: usize = 1;
pub const E: usize = 2;
pub const W: usize = 3;
pub const NE: usize = 4;
pub const NW: usize = 5;
pub const SE: usize = 6;
pub const SW: usize = 7;
pub const C: usize = 8;

/// Per-pixel 3x3 weights of the discretized operator.
#[derive(Debug, Clone)]
pub struct StencilField {
    pub width: usize,
    pub height: usize,
    pub w: Vec<[f64; 9]>,
}

/// (row, col) offsets for each neighbor slot. North is row - 1.
pub const OFFSETS: [(isize, isize); 8] = [
    (-1, 0), // N
    (1, 0),  // S
    (0, 1),  // E
    (0, -1), // W
    (-1, 1), // NE
    (-1, -1),// NW
    (1, 1),  // SE
    (1, -1), // SW
];

impl StencilField {
    /// Apply the operator at one pixel. Out-of-grid neighbors carry
    /// zero weight, so indexing is safe to skip.
    #[inline]
    pub fn apply_at(&self, u: &[f64], row: usize, col: usize) -> f64 {
        let i = row * self.width + col;
        let w = &self.w[i];
        let mut acc = w[C] * u[i];
        for (k, &(dr, dc)) in OFFSETS.iter().enumerate() {
            if w[k] != 0.0 {
                let r = (row as isize + dr) as usize;
                let c = (col as isize + dc) as usize;
                acc += w[k] * u[r * self.width + c];
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Explicit,
    Jacobi,
    Cg,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Explicit => "explicit",
            Method::Jacobi => "jacobi",
            Method::Cg => "cg",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub method: Method,
    /// Explicit time step; stable up to 0.25 with tensor eigenvalues <= 1.
    pub dt: f64,
    /// Relative residual target; 0 means run exactly max_iters.
    pub tol: f64,
    pub max_iters: usize,
    pub nonneg_stencil: bool,
    /// Record (iteration, residual) pairs in the result.
    pub record_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: Method::Cg,
            dt: 0.24,
            tol: 1e-6,
            max_iters: 2000,
            nonneg_stencil: false,
            record_trace: false,
        }
    }
}

impl SolveConfig {
    pub fn explicit_default() -> Self {
        SolveConfig {
            method: Method::Explicit,
            max_iters: 10_000,
            ..SolveConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Explicit && (self.dt <= 0.0 || self.dt > 0.25) {
            return Err(Error::InvalidParam("dt must be in (0, 0.25] for explicit".into()));
        }
        if self.tol < 0.0 {
            return Err(Error::InvalidParam("tol must be >= 0".into()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParam("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FillResult {
    pub filled: Grid,
    pub iterations: usize,
    /// Relative L2 residual over void pixels.
    pub final_residual: f64,
    pub method: &'static str,
    pub converged: bool,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Assemble the 9-point stencil from a per-pixel SPD tensor. With
/// `nonneg`, corner magnitudes are limited to the smaller adjacent
/// axis weight; this trades exact symmetry for reduced overshoot.
pub fn assemble_stencil(d: &TensorField, nonneg: bool) -> Result<StencilField> {
    let (w, h) = (d.width, d.height);
    for i in 0..d.len() {
        if !d.is_spd_at(i) {
            return Err(Error::NotSpd {
                row: i / w,
                col: i % w,
            });
        }
    }
    let mut field = StencilField {
        width: w,
        height: h,
        w: vec![[0.0; 9]; w * h],
    };
    let at = |r: usize, c: usize| r * w + c;
    for r in 0..h {
        for c in 0..w {
            let i = at(r, c);
            let mut st = [0.0f64; 9];
            // Face-averaged axis fluxes.
            if c + 1 < w {
                st[E] = 0.5 * (d.dxx[i] + d.dxx[at(r, c + 1)]);
            }
            if c > 0 {
                st[W] = 0.5 * (d.dxx[i] + d.dxx[at(r, c - 1)]);
            }
            if r > 0 {
                st[N] = 0.5 * (d.dyy[i] + d.dyy[at(r - 1, c)]);
            }
            if r + 1 < h {
                st[S] = 0.5 * (d.dyy[i] + d.dyy[at(r + 1, c)]);
            }
            // Mixed term: +avg(d_xy)/2 on the (+,+)/(-,-) diagonal,
            // -avg(d_xy)/2 on the other (y increases with the row index).
            if r + 1 < h && c + 1 < w {
                st[SE] = 0.25 * (d.dxy[i] + d.dxy[at(r + 1, c + 1)]);
            }
            if r > 0 && c > 0 {
                st[NW] = 0.25 * (d.dxy[i] + d.dxy[at(r - 1, c - 1)]);
            }
            if r > 0 && c + 1 < w {
                st[NE] = -0.25 * (d.dxy[i] + d.dxy[at(r - 1, c + 1)]);
            }
            if r + 1 < h && c > 0 {
                st[SW] = -0.25 * (d.dxy[i] + d.dxy[at(r + 1, c - 1)]);
            }
            if nonneg {
                for (corner, a1, a2) in [(NE, N, E), (NW, N, W), (SE, S, E), (SW, S, W)] {
                    let limit = st[a1].min(st[a2]);
                    if st[corner].abs() > limit {
                        st[corner] = st[corner].signum() * limit;
                    }
                }
            }
            st[C] = -(st[N] + st[S] + st[E] + st[W] + st[NE] + st[NW] + st[SE] + st[SW]);
            field.w[i] = st;
        }
    }
    Ok(field)
}

fn residual_norm(s: &StencilField, u: &[f64], voids: &[(usize, usize)]) -> f64 {
    let vals: Vec<f64> = voids.iter().map(|&(r, c)| s.apply_at(u, r, c)).collect();
    pairwise_l2(&vals)
}

/// Solve Lu = 0 on void pixels with known pixels as Dirichlet data.
/// Known pixels are never modified. Returns the best iterate with a
/// convergence flag; it never fails on non-convergence.
pub fn solve_steady_state(
    init: &Grid,
    mask: &VoidMask,
    s: &StencilField,
    cfg: &SolveConfig,
) -> Result<FillResult> {
    cfg.validate()?;
    if init.width != mask.width || init.height != mask.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            init.width, init.height, mask.width, mask.height
        )));
    }
    if init.width != s.width || init.height != s.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs stencil {}x{}",
            init.width, init.height, s.width, s.height
        )));
    }
    if init.has_nodata() {
        return Err(Error::HasNodata);
    }
    let voids: Vec<(usize, usize)> = (0..init.height)
        .flat_map(|r| (0..init.width).map(move |c| (r, c)))
        .filter(|&(r, c)| mask.get(r, c))
        .collect();

    let mut trace = if cfg.record_trace { Some(Vec::new()) } else { None };
    if voids.is_empty() {
        return Ok(FillResult {
            filled: init.clone(),
            iterations: 0,
            final_residual: 0.0,
            method: cfg.method.label(),
            converged: true,
            trace,
        });
    }

    let base = residual_norm(s, &init.values, &voids) + 1e-30;
    let mut u = init.values.clone();

    // CG needs the symmetric (unclamped) stencil.
    let method = if cfg.method == Method::Cg && cfg.nonneg_stencil {
        Method::Jacobi
    } else {
        cfg.method
    };

    let (iterations, final_residual, converged) = match method {
        Method::Explicit | Method::Jacobi => {
            let mut lu = vec![0.0; voids.len()];
            let mut best = (f64::INFINITY, u.clone(), 0usize);
            let mut iters = 0usize;
            let mut res;
            loop {
                for (k, &(r, c)) in voids.iter().enumerate() {
                    lu[k] = s.apply_at(&u, r, c);
                }
                res = pairwise_l2(&lu) / base;
                if let Some(t) = trace.as_mut() {
                    t.push((iters, res));
                }
                if res < best.0 {
                    best = (res, u.clone(), iters);
                }
                if (cfg.tol > 0.0 && res <= cfg.tol) || iters >= cfg.max_iters {
                    break;
                }
                for (k, &(r, c)) in voids.iter().enumerate() {
                    let i = r * s.width + c;
                    match method {
                        Method::Explicit => u[i] += cfg.dt * lu[k],
                        Method::Jacobi => {
                            let wc = s.w[i][C];
                            if wc != 0.0 {
                                u[i] -= lu[k] / wc;
                            }
                        }
                        Method::Cg => unreachable!(),
                    }
                }
                iters += 1;
            }
            if res > best.0 {
                u = best.1;
                res = best.0;
            }
            (iters, res, cfg.tol > 0.0 && res <= cfg.tol)
        }
        Method::Cg => {
            let n = voids.len();
            let width = s.width;
            let mut index = vec![usize::MAX; u.len()];
            for (k, &(r, c)) in voids.iter().enumerate() {
                index[r * width + c] = k;
            }
            // A x = -L restricted to voids; b = known-neighbor fluxes.
            let apply_a = |x: &[f64], out: &mut [f64]| {
                for (k, &(r, c)) in voids.iter().enumerate() {
                    let i = r * width + c;
                    let w = &s.w[i];
                    let mut acc = -w[C] * x[k];
                    for (slot, &(dr, dc)) in OFFSETS.iter().enumerate() {
                        if w[slot] != 0.0 {
                            let j =
                                ((r as isize + dr) as usize) * width + (c as isize + dc) as usize;
                            if index[j] != usize::MAX {
                                acc -= w[slot] * x[index[j]];
                            }
                        }
                    }
                    out[k] = acc;
                }
            };
            let mut b = vec![0.0; n];
            for (k, &(r, c)) in voids.iter().enumerate() {
                let i = r * width + c;
                let w = &s.w[i];
                let mut acc = 0.0;
                for (slot, &(dr, dc)) in OFFSETS.iter().enumerate() {
                    if w[slot] != 0.0 {
                        let j = ((r as isize + dr) as usize) * width + (c as isize + dc) as usize;
                        if index[j] == usize::MAX {
                            acc += w[slot] * u[j];
                        }
                    }
                }
                b[k] = acc;
            }
            let mut x: Vec<f64> = voids.iter().map(|&(r, c)| u[r * width + c]).collect();
            let mut ax = vec![0.0; n];
            apply_a(&x, &mut ax);
            // r = b - A x equals Lu on void pixels.
            let mut r_vec: Vec<f64> = (0..n).map(|k| b[k] - ax[k]).collect();
            let mut p = r_vec.clone();
            let mut rs: f64 = r_vec.iter().map(|v| v * v).sum();
            let mut best = (pairwise_l2(&r_vec) / base, x.clone(), 0usize);
            let mut iters = 0usize;
            let mut res = best.0;
            if let Some(t) = trace.as_mut() {
                t.push((0, res));
            }
            while !(cfg.tol > 0.0 && res <= cfg.tol) && iters < cfg.max_iters && rs > 0.0 {
                let mut ap = vec![0.0; n];
                apply_a(&p, &mut ap);
                let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
                if pap <= 0.0 {
                    break; // loss of positive definiteness; keep best iterate
                }
                let alpha = rs / pap;
                for k in 0..n {
                    x[k] += alpha * p[k];
                    r_vec[k] -= alpha * ap[k];
                }
                let rs_new: f64 = r_vec.iter().map(|v| v * v).sum();
                let beta = rs_new / rs;
                for k in 0..n {
                    p[k] = r_vec[k] + beta * p[k];
                }
                rs = rs_new;
                iters += 1;
                res = pairwise_l2(&r_vec) / base;
                if let Some(t) = trace.as_mut() {
                    t.push((iters, res));
                }
                if res < best.0 {
                    best = (res, x.clone(), iters);
                }
            }
            if res > best.0 {
                x = best.1;
                res = best.0;
            }
            for (k, &(r, c)) in voids.iter().enumerate() {
                u[r * width + c] = x[k];
            }
            (iters, res, cfg.tol > 0.0 && res <= cfg.tol)
        }
    };

    let mut filled = init.clone();
    filled.values = u;
    Ok(FillResult {
        filled,
        iterations,
        final_residual,
        method: method.label(),
        converged: converged || (cfg.tol == 0.0),
        trace,
    })
}

/// Compute the guide-driven diffusion tensor, or the identity when no
/// guide is given.
pub fn build_tensor(
    width: usize,
    height: usize,
    guide: Option<&GuideImage>,
    edge: &EdgeParams,
) -> Result<TensorField> {
    edge.validate()?;
    match guide {
        None => Ok(TensorField::identity(width, height)),
        Some(img) => {
            if img.width != width || img.height != height {
                return Err(Error::DimensionMismatch(format!(
                    "guide {}x{} vs grid {}x{}",
                    img.width, img.height, width, height
                )));
            }
            let lum = luminance(img);
            let smoothed = gaussian_smooth(&lum, edge.sigma_g)?;
            let (gx, gy) = gradient(&smoothed)?;
            let j = structure_tensor(&gx, &gy, edge.rho)?;
            Ok(diffusion_tensor(&j, edge))
        }
    }
}

/// Full pipeline: coarse init, guide tensor (or identity), stencil
/// assembly, normalized steady-state solve, denormalization. Known
/// pixels of the output are bit-identical to the input.
pub fn fill(
    dsm: &Grid,
    mask: &VoidMask,
    guide: Option<&GuideImage>,
    edge: &EdgeParams,
    init_mode: InitMode,
    cfg: &SolveConfig,
) -> Result<FillResult> {
    if dsm.width != mask.width || dsm.height != mask.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            dsm.width, dsm.height, mask.width, mask.height
        )));
    }
    // Voids = explicit mask plus pre-existing nodata.
    let masked = crate::grid::apply_mask(dsm, mask)?;
    let eff_mask = extract_void_mask(&masked);
    if eff_mask.bits.iter().all(|&b| b) {
        return Err(Error::AllVoid);
    }

    let init = match init_mode {
        InitMode::Median => median_init(&masked, &eff_mask)?,
        InitMode::Pyramid => pyramid_init(&masked, &eff_mask, &PyramidConfig::default())?,
    };

    let params = NormParams::compute(&masked, NormMode::Unit)?;
    let norm_init = params.apply(&init);

    let tensor = build_tensor(dsm.width, dsm.height, guide, edge)?;
    let stencil = assemble_stencil(&tensor, cfg.nonneg_stencil)?;
    let result = solve_steady_state(&norm_init, &eff_mask, &stencil, cfg)?;

    let mut filled = params.invert(&result.filled);
    // Restore Dirichlet data bit-exactly.
    for i in 0..filled.values.len() {
        if !eff_mask.bits[i] {
            filled.values[i] = masked.values[i];
        }
    }
    Ok(FillResult { filled, ..result })
}
