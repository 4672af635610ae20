//! Synthetic void masks: thresholded fractal Perlin noise and
//! stroke/rectangle masks. Everything is a pure function of its seeds,
//! bit-identical across platforms.

use crate::error::{Error, Result};
use crate::grid::{Grid, VoidMask};

/// Minimal PCG32 (XSH-RR). The stream is derived from the seed so a
/// single 64-bit value pins the whole sequence.
#[derive(Debug, Clone)]
pub struct Pcg32 {
    state: u64,
    inc: u64,
}

const PCG_MULT: u64 = 6364136223846793005;

impl Pcg32 {
    pub fn new(seed: u64) -> Pcg32 {
        let mut rng = Pcg32 {
            state: 0,
            inc: (seed << 1) | 1,
        };
        rng.next_u32();
        rng.state = rng.state.wrapping_add(seed);
        rng.next_u32();
        rng
    }

    pub fn next_u32(&mut self) -> u32 {
        let old = self.state;
        self.state = old.wrapping_mul(PCG_MULT).wrapping_add(self.inc);
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        self.next_u32() as f64 / 4294967296.0
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next_u32() as usize) % n
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }

    /// Uniform float in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.next_f64() * (hi - lo)
    }
}

/// Parameters of the fractal Perlin noise field.
#[derive(Debug, Clone, Copy)]
pub struct PerlinParams {
    /// Pixels per noise unit.
    pub scale: f64,
    pub octaves: u32,
    /// Amplitude decay per octave, in (0, 1].
    pub persistence: f64,
    /// Frequency growth per octave, >= 1.
    pub lacunarity: f64,
    /// Permutation-table seed.
    pub base: u64,
    /// Fixed threshold; absent means drawn uniformly at mask time.
    pub threshold: Option<f64>,
}

impl Default for PerlinParams {
    fn default() -> Self {
        PerlinParams {
            scale: 48.0,
            octaves: 4,
            persistence: 0.5,
            lacunarity: 2.0,
            base: 0,
            threshold: None,
        }
    }
}

impl PerlinParams {
    pub fn validate(&self) -> Result<()> {
        if self.scale <= 0.0 {
            return Err(Error::InvalidParam("scale must be > 0".into()));
        }
        if self.octaves < 1 {
            return Err(Error::InvalidParam("octaves must be >= 1".into()));
        }
        if self.persistence <= 0.0 || self.persistence > 1.0 {
            return Err(Error::InvalidParam("persistence must be in (0, 1]".into()));
        }
        if self.lacunarity < 1.0 {
            return Err(Error::InvalidParam("lacunarity must be >= 1".into()));
        }
        Ok(())
    }

    /// Random parameter draw used when a caller wants a fresh mask
    /// family per seed: scale in [16, 128] px, octaves 1..4,
    /// persistence [0.4, 0.7], lacunarity [1.8, 2.2].
    pub fn random(rng: &mut Pcg32, base: u64) -> PerlinParams {
        PerlinParams {
            scale: rng.uniform(16.0, 128.0),
            octaves: rng.range_inclusive(1, 4) as u32,
            persistence: rng.uniform(0.4, 0.7),
            lacunarity: rng.uniform(1.8, 2.2),
            base,
            threshold: None,
        }
    }
}

/// 256-entry permutation table: identity shuffled by PCG32(base).
pub fn permutation_table(base: u64) -> [u8; 256] {
    let mut perm = [0u8; 256];
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i as u8;
    }
    let mut rng = Pcg32::new(base);
    for i in (1..256).rev() {
        let j = rng.below(i + 1);
        perm.swap(i, j);
    }
    perm
}

/// Quintic fade 6t^5 - 15t^4 + 10t^3.
#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
const GRADS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (SQRT_HALF, SQRT_HALF),
    (-SQRT_HALF, SQRT_HALF),
    (SQRT_HALF, -SQRT_HALF),
    (-SQRT_HALF, -SQRT_HALF),
];

#[inline]
fn corner_grad(perm: &[u8; 256], xi: i64, yi: i64) -> (f64, f64) {
    let xw = xi.rem_euclid(256) as usize;
    let yw = yi.rem_euclid(256) as usize;
    let h = perm[(perm[xw] as usize + yw) & 255];
    GRADS[(h & 7) as usize]
}

/// Classic 2-D gradient noise at a single point; zero at integer
/// lattice coordinates.
pub fn perlin2(perm: &[u8; 256], x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let xf = x - x0;
    let yf = y - y0;
    let (xi, yi) = (x0 as i64, y0 as i64);

    let mut dots = [0.0f64; 4];
    for (k, &(dx, dy)) in [(0i64, 0i64), (1, 0), (0, 1), (1, 1)].iter().enumerate() {
        let (gx, gy) = corner_grad(perm, xi + dx, yi + dy);
        dots[k] = gx * (xf - dx as f64) + gy * (yf - dy as f64);
    }
    let u = fade(xf);
    let v = fade(yf);
    let top = dots[0] + u * (dots[1] - dots[0]);
    let bot = dots[2] + u * (dots[3] - dots[2]);
    top + v * (bot - top)
}

/// Raw multi-octave noise, before normalization. Pixel (i, j) samples
/// octave k at (i, j) * lacunarity^k / scale with amplitude
/// persistence^k.
pub fn fbm_raw(size: usize, p: &PerlinParams) -> Grid {
    let perm = permutation_table(p.base);
    Grid::from_fn(size, size, |i, j| {
        let mut acc = 0.0;
        let mut freq = 1.0 / p.scale;
        let mut amp = 1.0;
        for _ in 0..p.octaves {
            acc += amp * perlin2(&perm, i as f64 * freq, j as f64 * freq);
            freq *= p.lacunarity;
            amp *= p.persistence;
        }
        acc
    })
}

/// Fractal Perlin noise min-max normalized to [0, 1]. The flag is true
/// when the raw field was constant (pathological scale >> size); the
/// grid is then all 0.5.
pub fn perlin_noise(size: usize, p: &PerlinParams) -> Result<(Grid, bool)> {
    p.validate()?;
    if size < 1 {
        return Err(Error::InvalidParam("size must be >= 1".into()));
    }
    let mut g = fbm_raw(size, p);
    let min = g.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        for v in g.values.iter_mut() {
            *v = 0.5;
        }
        return Ok((g, true));
    }
    for v in g.values.iter_mut() {
        *v = (*v - min) / (max - min);
    }
    Ok((g, false))
}

/// Threshold the normalized noise: void where noise > threshold. An
/// unset threshold is drawn Uniform(0,1) from PCG32(rng_seed).
pub fn perlin_mask(size: usize, p: &PerlinParams, rng_seed: u64) -> Result<VoidMask> {
    let (noise, _) = perlin_noise(size, p)?;
    let threshold = match p.threshold {
        Some(t) => t,
        None => Pcg32::new(rng_seed).next_f64(),
    };
    Ok(threshold_mask(&noise, threshold))
}

/// Strict '>' thresholding of a noise grid.
pub fn threshold_mask(noise: &Grid, threshold: f64) -> VoidMask {
    VoidMask::from_bits(
        noise.width,
        noise.height,
        noise.values.iter().map(|&v| v > threshold).collect(),
    )
}

/// Parameters for stroke + rectangle masks.
#[derive(Debug, Clone, Copy)]
pub struct StrokeParams {
    pub n_strokes: (usize, usize),
    pub brush_width: (f64, f64),
    pub n_vertices: (usize, usize),
    pub n_rects: (usize, usize),
    pub seed: u64,
}

impl Default for StrokeParams {
    fn default() -> Self {
        StrokeParams {
            n_strokes: (1, 4),
            brush_width: (4.0, 16.0),
            n_vertices: (2, 6),
            n_rects: (0, 2),
            seed: 0,
        }
    }
}

fn stamp_disc(bits: &mut [bool], w: usize, h: usize, cx: f64, cy: f64, radius: f64) {
    let r0 = ((cy - radius).floor().max(0.0)) as usize;
    let r1 = ((cy + radius).ceil().min(h as f64 - 1.0)) as usize;
    let c0 = ((cx - radius).floor().max(0.0)) as usize;
    let c1 = ((cx + radius).ceil().min(w as f64 - 1.0)) as usize;
    let r2 = radius * radius;
    for r in r0..=r1 {
        for c in c0..=c1 {
            let dy = r as f64 - cy;
            let dx = c as f64 - cx;
            if dx * dx + dy * dy <= r2 {
                bits[r * w + c] = true;
            }
        }
    }
}

/// Random polylines stamped as discs plus axis-aligned rectangles;
/// the union is the void set.
pub fn irregular_mask(size: usize, s: &StrokeParams) -> Result<VoidMask> {
    if s.n_strokes.0 > s.n_strokes.1
        || s.brush_width.0 > s.brush_width.1
        || s.n_vertices.0 > s.n_vertices.1
        || s.n_rects.0 > s.n_rects.1
        || s.brush_width.0 <= 0.0
        || s.n_vertices.0 < 2
    {
        return Err(Error::InvalidParam("invalid stroke ranges".into()));
    }
    let (w, h) = (size, size);
    let mut bits = vec![false; w * h];
    let mut rng = Pcg32::new(s.seed);

    let n_strokes = rng.range_inclusive(s.n_strokes.0, s.n_strokes.1);
    for _ in 0..n_strokes {
        let n_verts = rng.range_inclusive(s.n_vertices.0, s.n_vertices.1);
        let mut prev = (rng.uniform(0.0, w as f64), rng.uniform(0.0, h as f64));
        for _ in 1..n_verts {
            let next = (rng.uniform(0.0, w as f64), rng.uniform(0.0, h as f64));
            let width = rng.uniform(s.brush_width.0, s.brush_width.1);
            stamp_segment(&mut bits, w, h, prev, next, width / 2.0);
            prev = next;
        }
    }

    let n_rects = rng.range_inclusive(s.n_rects.0, s.n_rects.1);
    for _ in 0..n_rects {
        let x0 = rng.below(w);
        let y0 = rng.below(h);
        let x1 = rng.range_inclusive(x0, w - 1);
        let y1 = rng.range_inclusive(y0, h - 1);
        for r in y0..=y1 {
            for c in x0..=x1 {
                bits[r * w + c] = true;
            }
        }
    }
    Ok(VoidMask::from_bits(w, h, bits))
}

/// Stamp discs of the given radius along a segment at <= 1 px spacing.
pub fn stamp_segment(
    bits: &mut [bool],
    w: usize,
    h: usize,
    p0: (f64, f64),
    p1: (f64, f64),
    radius: f64,
) {
    let len = ((p1.0 - p0.0).powi(2) + (p1.1 - p0.1).powi(2)).sqrt();
    let steps = len.ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let cx = p0.0 + t * (p1.0 - p0.0);
        let cy = p0.1 + t * (p1.1 - p0.1);
        stamp_disc(bits, w, h, cx, cy, radius);
    }
}

/// Exact axis-aligned rectangular void block, corners inclusive.
pub fn rect_mask(size: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<VoidMask> {
    if x1 >= size || y1 >= size || x0 > x1 || y0 > y1 {
        return Err(Error::InvalidParam("rectangle out of bounds".into()));
    }
    let mut m = VoidMask::new(size, size, false);
    for r in y0..=y1 {
        for c in x0..=x1 {
            m.set(r, c, true);
        }
    }
    Ok(m)
}

/// Void fraction of a mask.
pub fn mask_coverage(m: &VoidMask) -> f64 {
    m.void_fraction()
}

/// Pick a threshold from the noise's empirical quantiles so that
/// coverage lands in [lo, hi]; bisect the quantile index if ties push
/// the coverage out of band.
pub fn sample_mask_with_coverage(
    size: usize,
    p: &PerlinParams,
    target: (f64, f64),
    max_tries: usize,
) -> Result<VoidMask> {
    let (lo, hi) = target;
    if !(0.0..1.0).contains(&lo) || hi > 1.0 || lo >= hi {
        return Err(Error::InvalidParam("coverage band must satisfy 0 <= lo < hi <= 1".into()));
    }
    let (noise, degenerate) = perlin_noise(size, p)?;
    if degenerate {
        return Err(Error::CoverageUnreachable(0));
    }
    let n = noise.values.len();
    let mut sorted = noise.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Threshold = sorted[n - 1 - k] yields coverage ~ k/n.
    let mut k_lo = (lo * n as f64).ceil() as usize;
    let mut k_hi = ((hi * n as f64).floor() as usize).min(n - 1);
    let mut k = ((lo + hi) * 0.5 * n as f64).round() as usize;
    for _ in 0..max_tries.max(1) {
        let k_clamped = k.min(n - 1);
        let t = sorted[n - 1 - k_clamped];
        let m = threshold_mask(&noise, t);
        let cov = m.void_fraction();
        if cov >= lo && cov <= hi {
            return Ok(m);
        }
        if cov < lo {
            k_lo = k_clamped + 1;
        } else {
            if k_clamped == 0 {
                break;
            }
            k_hi = k_clamped - 1;
        }
        if k_lo > k_hi {
            break;
        }
        k = (k_lo + k_hi) / 2;
    }
    Err(Error::CoverageUnreachable(max_tries))
}
