//! Void initializers: global known-median fill and a known-pixel-aware
//! multiresolution pyramid. Both leave known pixels bit-identical and
//! produce outputs inside the known value range.

use crate::error::{Error, Result};
use crate::grid::{Grid, VoidMask};
use crate::util::median_inplace;

#[derive(Debug, Clone, Copy)]
pub struct PyramidConfig {
    pub max_levels: usize,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        PyramidConfig { max_levels: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Median,
    Pyramid,
}

fn effective_void(dsm: &Grid, mask: &VoidMask, i: usize) -> bool {
    mask.bits[i] || dsm.is_nodata(dsm.values[i])
}

/// Set every void (or nodata) cell to the median of the known cells.
pub fn median_init(dsm: &Grid, mask: &VoidMask) -> Result<Grid> {
    if dsm.width != mask.width || dsm.height != mask.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            dsm.width, dsm.height, mask.width, mask.height
        )));
    }
    let mut known: Vec<f64> = dsm
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| !effective_void(dsm, mask, *i))
        .map(|(_, &v)| v)
        .collect();
    if known.is_empty() {
        return Err(Error::NoKnownCells);
    }
    let med = median_inplace(&mut known);
    let mut out = dsm.clone();
    for i in 0..out.values.len() {
        if effective_void(dsm, mask, i) {
            out.values[i] = med;
        }
    }
    Ok(out)
}

struct Level {
    width: usize,
    height: usize,
    values: Vec<f64>,
    void: Vec<bool>,
}

fn downsample(l: &Level) -> Level {
    let cw = l.width.div_ceil(2);
    let ch = l.height.div_ceil(2);
    let mut values = vec![0.0; cw * ch];
    let mut void = vec![true; cw * ch];
    for cr in 0..ch {
        for cc in 0..cw {
            let mut sum = 0.0;
            let mut n = 0usize;
            for dr in 0..2 {
                for dc in 0..2 {
                    let r = 2 * cr + dr;
                    let c = 2 * cc + dc;
                    if r < l.height && c < l.width && !l.void[r * l.width + c] {
                        sum += l.values[r * l.width + c];
                        n += 1;
                    }
                }
            }
            if n > 0 {
                values[cr * cw + cc] = sum / n as f64;
                void[cr * cw + cc] = false;
            }
        }
    }
    Level {
        width: cw,
        height: ch,
        values,
        void,
    }
}

fn bilinear(l: &Level, fr: f64, fc: f64) -> f64 {
    let r = fr.clamp(0.0, l.height as f64 - 1.0);
    let c = fc.clamp(0.0, l.width as f64 - 1.0);
    let r0 = r.floor() as usize;
    let c0 = c.floor() as usize;
    let r1 = (r0 + 1).min(l.height - 1);
    let c1 = (c0 + 1).min(l.width - 1);
    let tr = r - r0 as f64;
    let tc = c - c0 as f64;
    let top = l.values[r0 * l.width + c0] * (1.0 - tc) + l.values[r0 * l.width + c1] * tc;
    let bot = l.values[r1 * l.width + c0] * (1.0 - tc) + l.values[r1 * l.width + c1] * tc;
    top * (1.0 - tr) + bot * tr
}

/// Known-aware pyramid fill: 2x mean downsampling of known children
/// (a coarse cell is void only when all four children are), median
/// fallback at the coarsest level, then bilinear upsampling into void
/// pixels on the way back down.
pub fn pyramid_init(dsm: &Grid, mask: &VoidMask, cfg: &PyramidConfig) -> Result<Grid> {
    if dsm.width != mask.width || dsm.height != mask.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            dsm.width, dsm.height, mask.width, mask.height
        )));
    }
    if cfg.max_levels < 1 {
        return Err(Error::InvalidParam("max_levels must be >= 1".into()));
    }
    let void0: Vec<bool> = (0..dsm.values.len())
        .map(|i| effective_void(dsm, mask, i))
        .collect();
    if void0.iter().all(|&v| v) {
        return Err(Error::NoKnownCells);
    }
    let mut levels = vec![Level {
        width: dsm.width,
        height: dsm.height,
        values: dsm.values.clone(),
        void: void0,
    }];
    while levels.last().unwrap().void.iter().any(|&v| v)
        && levels.len() < cfg.max_levels
        && levels.last().unwrap().width * levels.last().unwrap().height > 1
    {
        let next = downsample(levels.last().unwrap());
        levels.push(next);
    }

    // Median-fill any voids left at the coarsest level.
    {
        let top = levels.last_mut().unwrap();
        if top.void.iter().any(|&v| v) {
            let mut known: Vec<f64> = top
                .values
                .iter()
                .zip(&top.void)
                .filter(|(_, &v)| !v)
                .map(|(&x, _)| x)
                .collect();
            let med = median_inplace(&mut known);
            for (x, v) in top.values.iter_mut().zip(&top.void) {
                if *v {
                    *x = med;
                }
            }
        }
    }

    // Walk back down, filling voids only.
    for li in (0..levels.len() - 1).rev() {
        let (fine, coarse) = {
            let (a, b) = levels.split_at_mut(li + 1);
            (&mut a[li], &b[0])
        };
        for r in 0..fine.height {
            for c in 0..fine.width {
                if fine.void[r * fine.width + c] {
                    // Fine center r maps to coarse coordinate (r - 0.5) / 2.
                    let fr = (r as f64 - 0.5) / 2.0;
                    let fc = (c as f64 - 0.5) / 2.0;
                    fine.values[r * fine.width + c] = bilinear(coarse, fr, fc);
                }
            }
        }
    }

    let mut out = dsm.clone();
    out.values = levels.into_iter().next().unwrap().values;
    Ok(out)
}
