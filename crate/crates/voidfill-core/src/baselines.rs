//! Classical reference methods: inverse-distance weighting, thin-plate
//! spline interpolation, and the guide-free harmonic fill.

use crate::error::{Error, Result};
use crate::grid::{Grid, VoidMask};
use crate::guide::EdgeParams;
use crate::init::InitMode;
use crate::solver::{fill, SolveConfig};
use nalgebra::{DMatrix, DVector};

pub const IDW_DEFAULT_POWER: f64 = 2.0;
pub const IDW_DEFAULT_K: usize = 16;
pub const TPS_DEFAULT_MAX_SAMPLES: usize = 800;
pub const TPS_DEFAULT_RING: usize = 16;

pub fn tps_default_reg(max_samples: usize) -> f64 {
    1e-8 * max_samples as f64
}

#[inline]
fn is_known(g: &Grid, m: &VoidMask, i: usize) -> bool {
    !m.bits[i] && !g.is_nodata(g.values[i])
}

/// Inverse-distance weighting over the k nearest known pixels,
/// found by exact square-ring expansion. Distance ties break by
/// row-major index.
pub fn idw_fill(dsm: &Grid, mask: &VoidMask, power: f64, k: usize) -> Result<Grid> {
    if dsm.width != mask.width || dsm.height != mask.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            dsm.width, dsm.height, mask.width, mask.height
        )));
    }
    if power <= 0.0 || k < 1 {
        return Err(Error::InvalidParam("power > 0 and k >= 1 required".into()));
    }
    let (w, h) = (dsm.width, dsm.height);
    if !(0..w * h).any(|i| is_known(dsm, mask, i)) {
        return Err(Error::NoKnownCells);
    }
    let mut out = dsm.clone();
    let max_ring = w.max(h);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if is_known(dsm, mask, i) {
                continue;
            }
            // (distance^2, row-major index, value) candidates.
            let mut cands: Vec<(f64, usize, f64)> = Vec::new();
            let mut kth_d2 = f64::INFINITY;
            for ring in 0..=max_ring {
                // Once the ring's nearest possible point is farther than
                // the current kth distance, no later ring can improve.
                if cands.len() >= k && (ring * ring) as f64 > kth_d2 {
                    break;
                }
                let r0 = r as isize - ring as isize;
                let r1 = r as isize + ring as isize;
                let c0 = c as isize - ring as isize;
                let c1 = c as isize + ring as isize;
                let visit = |rr: isize, cc: isize, cands: &mut Vec<(f64, usize, f64)>| {
                    if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                        return;
                    }
                    let j = rr as usize * w + cc as usize;
                    if is_known(dsm, mask, j) {
                        let dr = rr as f64 - r as f64;
                        let dc = cc as f64 - c as f64;
                        cands.push((dr * dr + dc * dc, j, dsm.values[j]));
                    }
                };
                if ring == 0 {
                    visit(r as isize, c as isize, &mut cands);
                } else {
                    for cc in c0..=c1 {
                        visit(r0, cc, &mut cands);
                        visit(r1, cc, &mut cands);
                    }
                    for rr in r0 + 1..r1 {
                        visit(rr, c0, &mut cands);
                        visit(rr, c1, &mut cands);
                    }
                }
                if cands.len() >= k {
                    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    cands.truncate(k);
                    kth_d2 = cands[k - 1].0;
                }
            }
            cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cands.truncate(k);
            let mut num = 0.0;
            let mut den = 0.0;
            for &(d2, _, z) in &cands {
                let wgt = d2.sqrt().powf(-power);
                num += wgt * z;
                den += wgt;
            }
            out.values[i] = num / den;
        }
    }
    Ok(out)
}

/// Thin-plate spline kernel r^2 log r with phi(0) = 0.
#[inline]
fn tps_phi(r2: f64) -> f64 {
    if r2 == 0.0 {
        0.0
    } else {
        0.5 * r2 * r2.ln() // r^2 log r = r^2 * ln(sqrt(r2))
    }
}

/// Chebyshev distance from every cell to the nearest void cell.
fn distance_to_void(mask: &[bool], w: usize, h: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; w * h];
    let mut queue = std::collections::VecDeque::new();
    for (i, &b) in mask.iter().enumerate() {
        if b {
            dist[i] = 0;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = (i / w, i % w);
        for dr in -1i32..=1 {
            for dc in -1i32..=1 {
                let (rr, cc) = (r as i32 + dr, c as i32 + dc);
                if rr < 0 || cc < 0 || rr >= h as i32 || cc >= w as i32 {
                    continue;
                }
                let j = rr as usize * w + cc as usize;
                if dist[j] == u32::MAX {
                    dist[j] = dist[i] + 1;
                    queue.push_back(j);
                }
            }
        }
    }
    dist
}

/// Farthest-point subsample: start at the lowest row-major candidate,
/// then greedily add the candidate maximizing its distance to the
/// selected set (ties by row-major index).
fn farthest_point_sample(points: &[(f64, f64)], count: usize) -> Vec<usize> {
    if points.len() <= count {
        return (0..points.len()).collect();
    }
    let mut selected = vec![0usize];
    let mut min_d2: Vec<f64> = points
        .iter()
        .map(|&(x, y)| (x - points[0].0).powi(2) + (y - points[0].1).powi(2))
        .collect();
    while selected.len() < count {
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (i, &d2) in min_d2.iter().enumerate() {
            if d2 > best.0 {
                best = (d2, i);
            }
        }
        let new = best.1;
        selected.push(new);
        for (i, &(x, y)) in points.iter().enumerate() {
            let d2 = (x - points[new].0).powi(2) + (y - points[new].1).powi(2);
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
        }
    }
    selected
}

/// Thin-plate spline fill: fit z = a0 + a1 x + a2 y + sum c_i phi(r_i)
/// to known samples near the voids, then evaluate at void pixels.
pub fn spline_fill(
    dsm: &Grid,
    mask: &VoidMask,
    max_samples: usize,
    ring: usize,
    reg: f64,
) -> Result<Grid> {
    if dsm.width != mask.width || dsm.height != mask.height {
        return Err(Error::DimensionMismatch(format!(
            "grid {}x{} vs mask {}x{}",
            dsm.width, dsm.height, mask.width, mask.height
        )));
    }
    let (w, h) = (dsm.width, dsm.height);
    let voids: Vec<usize> = (0..w * h).filter(|&i| !is_known(dsm, mask, i)).collect();
    if voids.is_empty() {
        return Ok(dsm.clone());
    }
    let all_known: Vec<usize> = (0..w * h).filter(|&i| is_known(dsm, mask, i)).collect();
    if all_known.len() < 3 {
        return Err(Error::NoKnownCells);
    }
    let void_bits: Vec<bool> = (0..w * h).map(|i| !is_known(dsm, mask, i)).collect();
    let dist = distance_to_void(&void_bits, w, h);
    let mut candidates: Vec<usize> = all_known
        .iter()
        .copied()
        .filter(|&i| dist[i] as usize <= ring)
        .collect();
    if candidates.len() < 3 {
        candidates = all_known.clone();
    }
    let points: Vec<(f64, f64)> = candidates
        .iter()
        .map(|&i| ((i % w) as f64, (i / w) as f64))
        .collect();
    let picked = farthest_point_sample(&points, max_samples);
    let samples: Vec<usize> = picked.iter().map(|&p| candidates[p]).collect();
    let xy: Vec<(f64, f64)> = picked.iter().map(|&p| points[p]).collect();
    let m = samples.len();

    // Collinear samples leave the affine part of the fit underdetermined
    // and the bordered system rank-deficient; LU can then return finite
    // garbage instead of failing, so reject the geometry up front. Test
    // via the smaller eigenvalue of the 2x2 point scatter matrix.
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / m as f64;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / m as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &xy {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let lam_min = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
    if lam_min <= 1e-9 * tr.max(1.0) {
        return Err(Error::DegenerateGeometry);
    }

    // [[K + reg I, P], [P^T, 0]] [c; a] = [z; 0]
    let dim = m + 3;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for i in 0..m {
        for j in 0..m {
            let dx = xy[i].0 - xy[j].0;
            let dy = xy[i].1 - xy[j].1;
            a[(i, j)] = tps_phi(dx * dx + dy * dy);
        }
        a[(i, i)] += reg;
        a[(i, m)] = 1.0;
        a[(i, m + 1)] = xy[i].0;
        a[(i, m + 2)] = xy[i].1;
        a[(m, i)] = 1.0;
        a[(m + 1, i)] = xy[i].0;
        a[(m + 2, i)] = xy[i].1;
        rhs[i] = dsm.values[samples[i]];
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateGeometry)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateGeometry);
    }

    let mut out = dsm.clone();
    for &i in &voids {
        let x = (i % w) as f64;
        let y = (i / w) as f64;
        let mut z = sol[m] + sol[m + 1] * x + sol[m + 2] * y;
        for j in 0..m {
            let dx = x - xy[j].0;
            let dy = y - xy[j].1;
            z += sol[j] * tps_phi(dx * dx + dy * dy);
        }
        out.values[i] = z;
    }
    Ok(out)
}

/// Guide-free ablation arm: diffusion fill with the identity tensor
/// and median initialization.
pub fn harmonic_fill(dsm: &Grid, mask: &VoidMask, cfg: &SolveConfig) -> Result<Grid> {
    let r = fill(dsm, mask, None, &EdgeParams::default(), InitMode::Median, cfg)?;
    Ok(r.filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VoidMask;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn idw_constant_neighbors() {
        let g = Grid::new(5, 5, 3.0);
        let mut m = VoidMask::new(5, 5, false);
        m.set(2, 2, true);
        let out = idw_fill(&g, &m, 2.0, 4).unwrap();
        approx(out.get(2, 2), 3.0, 1e-12);
    }

    #[test]
    fn idw_symmetric_pair() {
        // Void equidistant between known 0 and 10 with k = 2.
        let g = Grid::from_values(3, 1, vec![0.0, 5555.0, 10.0]);
        let mut m = VoidMask::new(3, 1, false);
        m.set(0, 1, true);
        for power in [0.5, 1.0, 2.0, 3.5] {
            let out = idw_fill(&g, &m, power, 2).unwrap();
            approx(out.get(0, 1), 5.0, 1e-12);
        }
    }

    #[test]
    fn idw_matches_bruteforce_oracle() {
        let g = Grid::from_fn(16, 16, |r, c| ((r * 37 + c * 19) % 53) as f64 * 0.71 - 3.0);
        let m = VoidMask::from_bits(16, 16, (0..256).map(|i| (i * 7) % 11 < 4).collect());
        let (k, power) = (8usize, 2.0);
        let out = idw_fill(&g, &m, power, k).unwrap();
        for r in 0..16 {
            for c in 0..16 {
                let i = r * 16 + c;
                if !m.bits[i] {
                    continue;
                }
                // Brute-force all-pairs kNN with row-major tie break.
                let mut cands: Vec<(f64, usize)> = (0..256)
                    .filter(|&j| !m.bits[j])
                    .map(|j| {
                        let dr = (j / 16) as f64 - r as f64;
                        let dc = (j % 16) as f64 - c as f64;
                        (dr * dr + dc * dc, j)
                    })
                    .collect();
                cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
                cands.truncate(k);
                let mut num = 0.0;
                let mut den = 0.0;
                for &(d2, j) in &cands {
                    let wgt = d2.sqrt().powf(-power);
                    num += wgt * g.values[j];
                    den += wgt;
                }
                approx(out.values[i], num / den, 1e-10);
            }
        }
    }

    #[test]
    fn idw_stays_in_range() {
        let g = Grid::from_fn(12, 12, |r, c| ((r + c * 3) % 9) as f64);
        let m = VoidMask::from_bits(12, 12, (0..144).map(|i| i % 4 == 0).collect());
        let out = idw_fill(&g, &m, 2.0, 16).unwrap();
        for &v in &out.values {
            assert!((0.0..=8.0).contains(&v));
        }
    }

    #[test]
    fn tps_reproduces_plane() {
        let g = Grid::from_fn(20, 20, |r, c| 2.0 * c as f64 - r as f64 + 3.0);
        let mut m = VoidMask::new(20, 20, false);
        for r in 6..14 {
            for c in 6..14 {
                m.set(r, c, true);
            }
        }
        let out = spline_fill(&g, &m, 200, 16, 0.0).unwrap();
        for i in 0..400 {
            approx(out.values[i], g.values[i], 1e-6);
        }
    }

    #[test]
    fn tps_constant_data() {
        let g = Grid::new(10, 10, 7.5);
        let mut m = VoidMask::new(10, 10, false);
        for c in 3..7 {
            m.set(5, c, true);
        }
        let out = spline_fill(&g, &m, 100, 8, tps_default_reg(100)).unwrap();
        for &v in &out.values {
            approx(v, 7.5, 1e-6);
        }
    }

    #[test]
    fn tps_three_point_interpolation() {
        let mut g = Grid::new(8, 8, 0.0);
        let nd = g.nodata_value;
        for v in g.values.iter_mut() {
            *v = nd;
        }
        g.set(1, 1, 2.0);
        g.set(2, 6, -1.0);
        g.set(6, 3, 4.0);
        let m = crate::grid::extract_void_mask(&g);
        let out = spline_fill(&g, &m, 10, 16, 0.0).unwrap();
        approx(out.get(1, 1), 2.0, 1e-8);
        approx(out.get(2, 6), -1.0, 1e-8);
        approx(out.get(6, 3), 4.0, 1e-8);
    }

    #[test]
    fn tps_collinear_rejected() {
        let mut g = Grid::new(8, 8, 0.0);
        let nd = g.nodata_value;
        for v in g.values.iter_mut() {
            *v = nd;
        }
        g.set(2, 1, 1.0);
        g.set(2, 3, 2.0);
        g.set(2, 6, 3.0);
        let m = crate::grid::extract_void_mask(&g);
        assert!(matches!(
            spline_fill(&g, &m, 10, 16, 0.0),
            Err(Error::DegenerateGeometry)
        ));
    }

    #[test]
    fn baselines_preserve_known_pixels() {
        let g = Grid::from_fn(14, 14, |r, c| ((r * 3 + c * 5) % 13) as f64 * 0.9);
        let m = VoidMask::from_bits(14, 14, (0..196).map(|i| i % 6 == 1).collect());
        let idw = idw_fill(&g, &m, 2.0, 8).unwrap();
        let tps = spline_fill(&g, &m, 150, 16, tps_default_reg(150)).unwrap();
        let harm = harmonic_fill(&g, &m, &SolveConfig::default()).unwrap();
        for i in 0..196 {
            if !m.bits[i] {
                assert_eq!(idw.values[i].to_bits(), g.values[i].to_bits());
                assert_eq!(tps.values[i].to_bits(), g.values[i].to_bits());
                assert_eq!(harm.values[i].to_bits(), g.values[i].to_bits());
            }
        }
    }

    #[test]
    fn harmonic_affine_exactness() {
        let g = Grid::from_fn(16, 16, |r, c| 0.5 * c as f64 + 1.5 * r as f64 - 2.0);
        let mut m = VoidMask::new(16, 16, false);
        for r in 4..12 {
            for c in 4..12 {
                m.set(r, c, true);
            }
        }
        let cfg = SolveConfig {
            tol: 1e-12,
            max_iters: 20_000,
            ..SolveConfig::default()
        };
        let out = harmonic_fill(&g, &m, &cfg).unwrap();
        for i in 0..256 {
            approx(out.values[i], g.values[i], 1e-6);
        }
    }
}
