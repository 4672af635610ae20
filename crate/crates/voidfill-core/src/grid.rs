//! Raster containers and nodata semantics.
//!
//! Grids are stored row-major with row 0 as the northernmost row,
//! matching ESRI ASCII grid order. A cell is nodata iff its value is
//! bit-identical to the grid's nodata sentinel; NaN is never stored.

use crate::error::{Error, Result};
use crate::util::median_inplace;

pub const DEFAULT_NODATA: f64 = -9999.0;

/// Single-band floating-point raster with georeferencing header.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    /// Meters per pixel.
    pub cellsize: f64,
    /// Lower-left corner, meters.
    pub origin_x: f64,
    pub origin_y: f64,
    /// Nodata sentinel, compared by exact bit equality.
    pub nodata_value: f64,
    /// Row-major, top row first, length width*height.
    pub values: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, fill: f64) -> Grid {
        assert!(width >= 1 && height >= 1);
        Grid {
            width,
            height,
            cellsize: 1.0,
            origin_x: 0.0,
            origin_y: 0.0,
            nodata_value: DEFAULT_NODATA,
            values: vec![fill; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Grid {
        assert_eq!(values.len(), width * height);
        Grid {
            width,
            height,
            cellsize: 1.0,
            origin_x: 0.0,
            origin_y: 0.0,
            nodata_value: DEFAULT_NODATA,
            values,
        }
    }

    /// Build from a per-cell function of (row, col).
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Grid {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Grid::from_values(width, height, values)
    }

    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.width + col] = v;
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v.to_bits() == self.nodata_value.to_bits()
    }

    pub fn has_nodata(&self) -> bool {
        self.values.iter().any(|&v| self.is_nodata(v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values at cells that are neither nodata nor masked.
    pub fn known_values(&self, mask: Option<&VoidMask>) -> Vec<f64> {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, &v)| !self.is_nodata(v) && mask.map_or(true, |m| !m.bits[*i]))
            .map(|(_, &v)| v)
            .collect()
    }
}

/// Boolean raster marking void (missing) cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoidMask {
    pub width: usize,
    pub height: usize,
    /// Row-major; true = void.
    pub bits: Vec<bool>,
}

impl VoidMask {
    pub fn new(width: usize, height: usize, void: bool) -> VoidMask {
        VoidMask {
            width,
            height,
            bits: vec![void; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> VoidMask {
        assert_eq!(bits.len(), width * height);
        VoidMask {
            width,
            height,
            bits,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.bits[row * self.width + col] = v;
    }

    pub fn count_void(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn void_fraction(&self) -> f64 {
        self.count_void() as f64 / self.bits.len() as f64
    }
}

/// Co-registered 8-bit optical guide image, 1 or 3 channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuideImage {
    pub width: usize,
    pub height: usize,
    pub channels: u8,
    /// Row-major, interleaved.
    pub samples: Vec<u8>,
}

impl GuideImage {
    pub fn new(width: usize, height: usize, channels: u8, samples: Vec<u8>) -> GuideImage {
        assert!(channels == 1 || channels == 3);
        assert_eq!(samples.len(), width * height * channels as usize);
        GuideImage {
            width,
            height,
            channels,
            samples,
        }
    }
}

/// Mask of cells whose value equals the nodata sentinel.
pub fn extract_void_mask(g: &Grid) -> VoidMask {
    VoidMask {
        width: g.width,
        height: g.height,
        bits: g.values.iter().map(|&v| g.is_nodata(v)).collect(),
    }
}

/// Copy of `g` with masked cells set to the nodata sentinel.
pub fn apply_mask(g: &Grid, m: &VoidMask) -> Result<Grid> {
    if g.width != m.width || g.height != m.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            g.width, g.height, m.width, m.height
        )));
    }
    let mut out = g.clone();
    for (v, &b) in out.values.iter_mut().zip(&m.bits) {
        if b {
            *v = g.nodata_value;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    /// Map known min..max to [0, 1].
    Unit,
    /// Map known min..max to [-1, 1].
    Symmetric,
}

/// Affine normalization parameters; `degenerate` flags max == min.
#[derive(Debug, Clone, Copy)]
pub struct NormParams {
    pub min: f64,
    pub max: f64,
    pub mode: NormMode,
    pub degenerate: bool,
}

impl NormParams {
    /// Min/max over known (non-nodata) cells.
    pub fn compute(g: &Grid, mode: NormMode) -> Result<NormParams> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut any = false;
        for &v in &g.values {
            if !g.is_nodata(v) {
                any = true;
                min = min.min(v);
                max = max.max(v);
            }
        }
        if !any {
            return Err(Error::NoKnownCells);
        }
        Ok(NormParams {
            min,
            max,
            mode,
            degenerate: min == max,
        })
    }

    pub fn forward(&self, v: f64) -> f64 {
        if self.degenerate {
            return match self.mode {
                NormMode::Unit => 0.5,
                NormMode::Symmetric => 0.0,
            };
        }
        let t = (v - self.min) / (self.max - self.min);
        match self.mode {
            NormMode::Unit => t,
            NormMode::Symmetric => 2.0 * t - 1.0,
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        if self.degenerate {
            return self.min;
        }
        let t = match self.mode {
            NormMode::Unit => v,
            NormMode::Symmetric => 0.5 * (v + 1.0),
        };
        self.min + t * (self.max - self.min)
    }

    /// Apply `forward` to every non-nodata cell.
    pub fn apply(&self, g: &Grid) -> Grid {
        let mut out = g.clone();
        for v in out.values.iter_mut() {
            if !g.is_nodata(*v) {
                *v = self.forward(*v);
            }
        }
        out
    }

    /// Apply `inverse` to every non-nodata cell.
    pub fn invert(&self, g: &Grid) -> Grid {
        let mut out = g.clone();
        for v in out.values.iter_mut() {
            if !g.is_nodata(*v) {
                *v = self.inverse(*v);
            }
        }
        out
    }
}

/// Normalize known cells to [0,1] (unit) or [-1,1] (symmetric);
/// nodata cells are left unchanged.
pub fn normalize(g: &Grid, mode: NormMode) -> Result<(Grid, NormParams)> {
    let params = NormParams::compute(g, mode)?;
    Ok((params.apply(g), params))
}

pub fn denormalize(g: &Grid, params: &NormParams) -> Grid {
    params.invert(g)
}

/// Median over cells that are neither masked void nor nodata.
pub fn grid_median_known(g: &Grid, m: &VoidMask) -> Result<f64> {
    if g.width != m.width || g.height != m.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            g.width, g.height, m.width, m.height
        )));
    }
    let mut known = g.known_values(Some(m));
    if known.is_empty() {
        return Err(Error::NoKnownCells);
    }
    Ok(median_inplace(&mut known))
}
