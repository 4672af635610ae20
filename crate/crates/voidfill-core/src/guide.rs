//! Diffusion tensor construction from the optical guide image.
//!
//! The pipeline is luminance → Gaussian pre-smoothing → gradient →
//! structure tensor (smoothed gradient outer products) → per-pixel
//! eigen remap. The resulting tensor has unit diffusivity along local
//! edges and a floored, exponentially reduced diffusivity across them,
//! so the steady-state solve propagates elevation along guide edges
//! but not through them.

use crate::error::{Error, Result};
use crate::grid::{Grid, GuideImage};

/// Per-pixel symmetric positive-definite 2x2 diffusivity field.
#[derive(Debug, Clone)]
pub struct TensorField {
    pub width: usize,
    pub height: usize,
    pub dxx: Vec<f64>,
    pub dxy: Vec<f64>,
    pub dyy: Vec<f64>,
}

impl TensorField {
    pub fn identity(width: usize, height: usize) -> TensorField {
        let n = width * height;
        TensorField {
            width,
            height,
            dxx: vec![1.0; n],
            dxy: vec![0.0; n],
            dyy: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.dxx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dxx.is_empty()
    }

    /// Strict SPD check at one pixel.
    pub fn is_spd_at(&self, i: usize) -> bool {
        self.dxx[i] > 0.0 && self.dyy[i] > 0.0 && self.dxx[i] * self.dyy[i] - self.dxy[i] * self.dxy[i] > 0.0
    }

    /// Eigenvalues at one pixel, (larger, smaller).
    pub fn eigenvalues_at(&self, i: usize) -> (f64, f64) {
        let half_tr = 0.5 * (self.dxx[i] + self.dyy[i]);
        let half_diff = 0.5 * (self.dxx[i] - self.dyy[i]);
        let disc = (half_diff * half_diff + self.dxy[i] * self.dxy[i]).sqrt();
        (half_tr + disc, half_tr - disc)
    }

    /// Debug dump of the three channels as grids (d_xx, d_xy, d_yy).
    pub fn to_grids(&self) -> (Grid, Grid, Grid) {
        (
            Grid::from_values(self.width, self.height, self.dxx.clone()),
            Grid::from_values(self.width, self.height, self.dxy.clone()),
            Grid::from_values(self.width, self.height, self.dyy.clone()),
        )
    }
}

/// Parameters of the edge-enhancing tensor.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParams {
    /// Pre-smoothing of the luminance before differentiation, pixels.
    pub sigma_g: f64,
    /// Structure-tensor smoothing, pixels.
    pub rho: f64,
    /// Contrast scale in luminance-gradient units.
    pub lambda_c: f64,
    /// Diffusivity floor in (0, 1]; keeps the operator strictly elliptic.
    pub alpha: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            sigma_g: 1.0,
            rho: 2.0,
            lambda_c: 0.02,
            alpha: 0.05,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_g < 0.0 || self.rho < 0.0 {
            return Err(Error::InvalidParam("sigma_g and rho must be >= 0".into()));
        }
        if self.lambda_c <= 0.0 {
            return Err(Error::InvalidParam("lambda_c must be > 0".into()));
        }
        if self.alpha <= 0.0 || self.alpha > 1.0 {
            return Err(Error::InvalidParam("alpha must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Rec.601 luminance scaled to [0,1].
pub fn luminance(img: &GuideImage) -> Grid {
    let n = img.width * img.height;
    let mut values = Vec::with_capacity(n);
    match img.channels {
        1 => values.extend(img.samples.iter().map(|&s| s as f64 / 255.0)),
        3 => {
            for px in img.samples.chunks_exact(3) {
                let y = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
                values.push(y / 255.0);
            }
        }
        _ => unreachable!(),
    }
    Grid::from_values(img.width, img.height, values)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = k.iter().sum();
    for w in k.iter_mut() {
        *w /= sum;
    }
    k
}

/// Separable Gaussian, kernel radius ceil(3*sigma), clamp-to-edge
/// borders. sigma = 0 is the identity.
pub fn gaussian_smooth(g: &Grid, sigma: f64) -> Result<Grid> {
    if g.has_nodata() {
        return Err(Error::HasNodata);
    }
    if sigma == 0.0 {
        return Ok(g.clone());
    }
    if sigma < 0.0 {
        return Err(Error::InvalidParam("sigma must be >= 0".into()));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = kernel.len() / 2;
    let (w, h) = (g.width, g.height);

    let mut tmp = vec![0.0f64; w * h];
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (k, &kw) in kernel.iter().enumerate() {
                let cc = (c as isize + k as isize - radius as isize).clamp(0, w as isize - 1) as usize;
                acc += kw * g.values[r * w + cc];
            }
            tmp[r * w + c] = acc;
        }
    }
    let mut out = g.clone();
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for (k, &kw) in kernel.iter().enumerate() {
                let rr = (r as isize + k as isize - radius as isize).clamp(0, h as isize - 1) as usize;
                acc += kw * tmp[rr * w + c];
            }
            out.values[r * w + c] = acc;
        }
    }
    Ok(out)
}

/// Central differences, unit pixel spacing, clamp-to-edge at borders.
/// x runs along columns, y along rows.
pub fn gradient(g: &Grid) -> Result<(Grid, Grid)> {
    if g.has_nodata() {
        return Err(Error::HasNodata);
    }
    let (w, h) = (g.width, g.height);
    let mut gx = g.clone();
    let mut gy = g.clone();
    for r in 0..h {
        for c in 0..w {
            let cl = c.saturating_sub(1);
            let cr = (c + 1).min(w - 1);
            let ru = r.saturating_sub(1);
            let rd = (r + 1).min(h - 1);
            gx.values[r * w + c] = 0.5 * (g.values[r * w + cr] - g.values[r * w + cl]);
            gy.values[r * w + c] = 0.5 * (g.values[rd * w + c] - g.values[ru * w + c]);
        }
    }
    Ok((gx, gy))
}

/// Smoothed outer product of the gradient: (gx^2, gx*gy, gy^2) with
/// per-channel Gaussian smoothing of width rho.
pub fn structure_tensor(gx: &Grid, gy: &Grid, rho: f64) -> Result<TensorField> {
    if gx.width != gy.width || gx.height != gy.height {
        return Err(Error::DimensionMismatch(format!(
            "gx {}x{} vs gy {}x{}",
            gx.width, gx.height, gy.width, gy.height
        )));
    }
    let (w, h) = (gx.width, gx.height);
    let mut jxx = gx.clone();
    let mut jxy = gx.clone();
    let mut jyy = gx.clone();
    for i in 0..w * h {
        let (a, b) = (gx.values[i], gy.values[i]);
        jxx.values[i] = a * a;
        jxy.values[i] = a * b;
        jyy.values[i] = b * b;
    }
    let jxx = gaussian_smooth(&jxx, rho)?;
    let jxy = gaussian_smooth(&jxy, rho)?;
    let jyy = gaussian_smooth(&jyy, rho)?;
    Ok(TensorField {
        width: w,
        height: h,
        dxx: jxx.values,
        dxy: jxy.values,
        dyy: jyy.values,
    })
}

/// Threshold below which a structure tensor pixel is treated as
/// perfectly isotropic and the output is exactly the identity.
pub const ISOTROPIC_EPS: f64 = 1e-12;

/// Remap the structure tensor into a diffusion tensor: unit
/// diffusivity along the local edge, floored exponential diffusivity
/// across it.
pub fn diffusion_tensor(j: &TensorField, p: &EdgeParams) -> TensorField {
    let mut out = TensorField::identity(j.width, j.height);
    let lc2 = p.lambda_c * p.lambda_c;
    for i in 0..j.len() {
        let (jxx, jxy, jyy) = (j.dxx[i], j.dxy[i], j.dyy[i]);
        let half_tr = 0.5 * (jxx + jyy);
        let half_diff = 0.5 * (jxx - jyy);
        let disc = (half_diff * half_diff + jxy * jxy).sqrt();
        let mu1 = half_tr + disc;
        if mu1 < ISOTROPIC_EPS {
            continue; // already identity
        }
        // Dominant eigenvector = across-edge direction. Two algebraic
        // forms; take the better conditioned one.
        let (mut vx, mut vy) = if (mu1 - jxx).abs() > (mu1 - jyy).abs() {
            (jxy, mu1 - jxx)
        } else {
            (mu1 - jyy, jxy)
        };
        let norm = (vx * vx + vy * vy).sqrt();
        if norm < 1e-300 {
            // mu1 == mu2 with zero off-diagonal: direction is arbitrary.
            vx = 1.0;
            vy = 0.0;
        } else {
            vx /= norm;
            vy /= norm;
        }
        let lam_across = p.alpha + (1.0 - p.alpha) * (-mu1 / lc2).exp();
        // D = lam_across * v1 v1^T + 1 * v2 v2^T with v2 = (-vy, vx).
        out.dxx[i] = lam_across * vx * vx + vy * vy;
        out.dyy[i] = lam_across * vy * vy + vx * vx;
        out.dxy[i] = (lam_across - 1.0) * vx * vy;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GuideImage;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn luminance_rgb_coefficients() {
        let img = GuideImage::new(2, 1, 3, vec![255, 255, 255, 255, 0, 0]);
        let g = luminance(&img);
        approx(g.values[0], 1.0, 1e-12);
        approx(g.values[1], 0.299, 1e-12);
    }

    #[test]
    fn luminance_gray() {
        let img = GuideImage::new(2, 1, 1, vec![0, 255]);
        let g = luminance(&img);
        assert_eq!(g.values, vec![0.0, 1.0]);
    }

    #[test]
    fn luminance_matches_formula_oracle() {
        let mut samples = Vec::new();
        for i in 0..48u32 {
            samples.push((i * 37 % 256) as u8);
        }
        let img = GuideImage::new(4, 4, 3, samples.clone());
        let g = luminance(&img);
        for (i, px) in samples.chunks_exact(3).enumerate() {
            let want =
                (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64) / 255.0;
            approx(g.values[i], want, 1e-15);
        }
    }

    #[test]
    fn gaussian_sigma_zero_identity() {
        let g = Grid::from_fn(5, 5, |r, c| (r * c) as f64);
        assert_eq!(gaussian_smooth(&g, 0.0).unwrap(), g);
    }

    #[test]
    fn gaussian_preserves_constants() {
        let g = Grid::new(9, 7, 3.5);
        let s = gaussian_smooth(&g, 2.3).unwrap();
        for &v in &s.values {
            approx(v, 3.5, 1e-12);
        }
    }

    #[test]
    fn gaussian_impulse_matches_dense_convolution() {
        let n = 15;
        let mut g = Grid::new(n, n, 0.0);
        g.set(7, 7, 1.0);
        let s = gaussian_smooth(&g, 1.0).unwrap();
        // Dense 2-D convolution oracle with the same clamped borders.
        let kernel = gaussian_kernel(1.0);
        let radius = kernel.len() as isize / 2;
        for r in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for (ki, &kw1) in kernel.iter().enumerate() {
                    for (kj, &kw2) in kernel.iter().enumerate() {
                        let rr = (r as isize + ki as isize - radius).clamp(0, n as isize - 1) as usize;
                        let cc = (c as isize + kj as isize - radius).clamp(0, n as isize - 1) as usize;
                        acc += kw1 * kw2 * g.get(rr, cc);
                    }
                }
                approx(s.get(r, c), acc, 1e-12);
            }
        }
    }

    #[test]
    fn gaussian_rejects_nodata() {
        let mut g = Grid::new(3, 3, 1.0);
        let nd = g.nodata_value;
        g.set(1, 1, nd);
        assert!(matches!(gaussian_smooth(&g, 1.0), Err(Error::HasNodata)));
    }

    #[test]
    fn gradient_of_ramp() {
        let g = Grid::from_fn(6, 6, |_, c| c as f64);
        let (gx, gy) = gradient(&g).unwrap();
        for r in 0..6 {
            for c in 1..5 {
                assert_eq!(gx.get(r, c), 1.0);
            }
            for c in 0..6 {
                assert_eq!(gy.get(r, c), 0.0);
            }
        }
    }

    #[test]
    fn gradient_of_affine() {
        let g = Grid::from_fn(8, 8, |r, c| (r + 2 * c) as f64);
        let (gx, gy) = gradient(&g).unwrap();
        for r in 1..7 {
            for c in 1..7 {
                assert_eq!(gx.get(r, c), 2.0);
                assert_eq!(gy.get(r, c), 1.0);
            }
        }
    }

    #[test]
    fn gradient_of_constant() {
        let g = Grid::new(4, 4, 9.0);
        let (gx, gy) = gradient(&g).unwrap();
        assert!(gx.values.iter().all(|&v| v == 0.0));
        assert!(gy.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn structure_tensor_zero_and_uniform() {
        let zero = Grid::new(8, 8, 0.0);
        let j = structure_tensor(&zero, &zero, 1.5).unwrap();
        assert!(j.dxx.iter().all(|&v| v == 0.0));

        let ones = Grid::new(8, 8, 1.0);
        let j = structure_tensor(&ones, &zero, 2.0).unwrap();
        for i in 0..j.len() {
            approx(j.dxx[i], 1.0, 1e-12);
            approx(j.dxy[i], 0.0, 1e-12);
            approx(j.dyy[i], 0.0, 1e-12);
        }
    }

    #[test]
    fn structure_tensor_rho_zero_raw_products() {
        let gx = Grid::from_fn(5, 4, |r, c| (r as f64 - 1.3) * (c as f64 + 0.7));
        let gy = Grid::from_fn(5, 4, |r, c| (c as f64 - 2.1) * 0.5 + r as f64);
        let j = structure_tensor(&gx, &gy, 0.0).unwrap();
        for i in 0..j.len() {
            assert_eq!(j.dxx[i], gx.values[i] * gx.values[i]);
            assert_eq!(j.dxy[i], gx.values[i] * gy.values[i]);
            assert_eq!(j.dyy[i], gy.values[i] * gy.values[i]);
        }
    }

    #[test]
    fn diffusion_tensor_flat_guide_is_identity() {
        let j = TensorField {
            width: 4,
            height: 4,
            dxx: vec![0.0; 16],
            dxy: vec![0.0; 16],
            dyy: vec![0.0; 16],
        };
        let d = diffusion_tensor(&j, &EdgeParams::default());
        assert_eq!(d.dxx, vec![1.0; 16]);
        assert_eq!(d.dxy, vec![0.0; 16]);
        assert_eq!(d.dyy, vec![1.0; 16]);
    }

    #[test]
    fn diffusion_tensor_vertical_edge_closed_form() {
        // Strong x-gradient: v1 = x-axis, mu1 >> lambda_c^2.
        let p = EdgeParams {
            alpha: 0.01,
            ..EdgeParams::default()
        };
        let mut j = TensorField::identity(3, 3);
        for i in 0..9 {
            j.dxx[i] = 10.0;
            j.dxy[i] = 0.0;
            j.dyy[i] = 0.0;
        }
        let d = diffusion_tensor(&j, &p);
        for i in 0..9 {
            approx(d.dxx[i], 0.01, 1e-9);
            approx(d.dyy[i], 1.0, 1e-12);
            approx(d.dxy[i], 0.0, 1e-12);
        }
    }

    #[test]
    fn diffusion_tensor_rotation_equivariance_axis_cases() {
        // Rotating the gradient field by 90 degrees swaps dxx and dyy.
        let p = EdgeParams::default();
        let mut jx = TensorField::identity(1, 1);
        jx.dxx[0] = 0.5;
        jx.dxy[0] = 0.0;
        jx.dyy[0] = 0.0;
        let mut jy = TensorField::identity(1, 1);
        jy.dxx[0] = 0.0;
        jy.dxy[0] = 0.0;
        jy.dyy[0] = 0.5;
        let dx = diffusion_tensor(&jx, &p);
        let dy = diffusion_tensor(&jy, &p);
        approx(dx.dxx[0], dy.dyy[0], 1e-14);
        approx(dx.dyy[0], dy.dxx[0], 1e-14);
    }

    #[test]
    fn diffusion_tensor_eigenvalues_in_range() {
        // Random PSD inputs via outer products; quadratic-formula oracle.
        let p = EdgeParams::default();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 64;
        let mut j = TensorField::identity(n, 1);
        for i in 0..n {
            let a = next() * 2.0 - 1.0;
            let b = next() * 2.0 - 1.0;
            let s = next() * 10.0;
            j.dxx[i] = s * a * a;
            j.dxy[i] = s * a * b;
            j.dyy[i] = s * b * b;
        }
        let d = diffusion_tensor(&j, &p);
        for i in 0..n {
            assert!(d.is_spd_at(i));
            let (l1, l2) = d.eigenvalues_at(i);
            assert!(l1 <= 1.0 + 1e-12, "l1={l1}");
            assert!(l2 >= p.alpha - 1e-12, "l2={l2}");
        }
    }
}
