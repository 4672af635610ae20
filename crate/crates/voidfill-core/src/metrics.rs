//! Per-pixel elevation accuracy metrics: RMSE, NMAD and MedAE over
//! the void region and the full patch.

use crate::error::{Error, Result};
use crate::grid::{Grid, VoidMask};
use crate::util::{median_inplace, pairwise_sum};

/// Gaussian-consistency constant relating MAD to standard deviation.
pub const NMAD_CONSTANT: f64 = 1.4826;

#[derive(Debug, Clone, Copy)]
pub struct MetricsReport {
    pub rmse_void: f64,
    pub nmad_void: f64,
    pub medae_void: f64,
    pub rmse_full: f64,
    pub nmad_full: f64,
    pub medae_full: f64,
    pub n_void: usize,
    pub n_full: usize,
}

impl MetricsReport {
    pub fn csv_header() -> &'static str {
        "scene,mask,method,n_void,rmse_void,nmad_void,medae_void,rmse_full,nmad_full,medae_full"
    }

    pub fn csv_row(&self, scene: &str, mask: &str, method: &str) -> String {
        format!(
            "{scene},{mask},{method},{},{},{},{},{},{},{}",
            self.n_void,
            self.rmse_void,
            self.nmad_void,
            self.medae_void,
            self.rmse_full,
            self.nmad_full,
            self.medae_full
        )
    }
}

/// pred - truth at region pixels, row-major order.
pub fn residuals(pred: &Grid, truth: &Grid, region: &VoidMask) -> Result<Vec<f64>> {
    if pred.width != truth.width
        || pred.height != truth.height
        || pred.width != region.width
        || pred.height != region.height
    {
        return Err(Error::DimensionMismatch(format!(
            "pred {}x{}, truth {}x{}, region {}x{}",
            pred.width, pred.height, truth.width, truth.height, region.width, region.height
        )));
    }
    let mut out = Vec::new();
    for i in 0..pred.values.len() {
        if region.bits[i] {
            if truth.is_nodata(truth.values[i]) {
                return Err(Error::TruthHasNodata);
            }
            out.push(pred.values[i] - truth.values[i]);
        }
    }
    Ok(out)
}

pub fn rmse(e: &[f64]) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let sq: Vec<f64> = e.iter().map(|x| x * x).collect();
    Ok((pairwise_sum(&sq) / e.len() as f64).sqrt())
}

pub fn medae(e: &[f64]) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut abs: Vec<f64> = e.iter().map(|x| x.abs()).collect();
    Ok(median_inplace(&mut abs))
}

/// 1.4826 * median(|e - median(e)|).
pub fn nmad(e: &[f64]) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut tmp = e.to_vec();
    let med = median_inplace(&mut tmp);
    let mut dev: Vec<f64> = e.iter().map(|x| (x - med).abs()).collect();
    Ok(NMAD_CONSTANT * median_inplace(&mut dev))
}

/// Metric triples over the void region and the full patch.
pub fn evaluate(pred: &Grid, truth: &Grid, void: &VoidMask) -> Result<MetricsReport> {
    let full = VoidMask::new(void.width, void.height, true);
    let e_void = residuals(pred, truth, void)?;
    let e_full = residuals(pred, truth, &full)?;
    if e_void.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(MetricsReport {
        rmse_void: rmse(&e_void)?,
        nmad_void: nmad(&e_void)?,
        medae_void: medae(&e_void)?,
        rmse_full: rmse(&e_full)?,
        nmad_full: nmad(&e_full)?,
        medae_full: medae(&e_full)?,
        n_void: e_void.len(),
        n_full: e_full.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn residual_basics() {
        let t = Grid::from_fn(4, 4, |r, c| (r + c) as f64);
        let region = VoidMask::new(4, 4, true);
        let e = residuals(&t, &t, &region).unwrap();
        assert!(e.iter().all(|&x| x == 0.0));

        let mut p = t.clone();
        for v in p.values.iter_mut() {
            *v += 2.0;
        }
        let e = residuals(&p, &t, &region).unwrap();
        assert!(e.iter().all(|&x| x == 2.0));
    }

    #[test]
    fn residual_truth_nodata_rejected() {
        let mut t = Grid::new(2, 2, 1.0);
        let nd = t.nodata_value;
        t.set(0, 0, nd);
        let region = VoidMask::new(2, 2, true);
        assert!(matches!(
            residuals(&t, &t, &region),
            Err(Error::TruthHasNodata)
        ));
    }

    #[test]
    fn metric_identities() {
        // Constant residual.
        let e = vec![-3.0; 7];
        approx(rmse(&e).unwrap(), 3.0, 1e-15);
        approx(medae(&e).unwrap(), 3.0, 1e-15);
        approx(nmad(&e).unwrap(), 0.0, 1e-15);
        // Hand computation for [-1, 1].
        let e = vec![-1.0, 1.0];
        approx(rmse(&e).unwrap(), 1.0, 1e-15);
        approx(medae(&e).unwrap(), 1.0, 1e-15);
        approx(nmad(&e).unwrap(), 1.4826, 1e-15);
        // Single zero.
        let e = vec![0.0];
        assert_eq!(rmse(&e).unwrap(), 0.0);
        assert_eq!(medae(&e).unwrap(), 0.0);
        assert_eq!(nmad(&e).unwrap(), 0.0);
    }

    #[test]
    fn empty_region_rejected() {
        assert!(matches!(rmse(&[]), Err(Error::EmptyRegion)));
        assert!(matches!(medae(&[]), Err(Error::EmptyRegion)));
        assert!(matches!(nmad(&[]), Err(Error::EmptyRegion)));
    }

    #[test]
    fn evaluate_offset_in_void_only() {
        let t = Grid::from_fn(10, 10, |r, c| (r * c) as f64 * 0.1);
        let mut void = VoidMask::new(10, 10, false);
        for i in 0..25 {
            void.bits[i * 4] = true;
        }
        let mut p = t.clone();
        for i in 0..100 {
            if void.bits[i] {
                p.values[i] += 2.0;
            }
        }
        let rep = evaluate(&p, &t, &void).unwrap();
        approx(rep.rmse_void, 2.0, 1e-12);
        approx(rep.rmse_full, 2.0 * (25.0f64 / 100.0).sqrt(), 1e-12);
        assert_eq!(rep.n_void, 25);
        assert_eq!(rep.n_full, 100);
    }

    #[test]
    fn translation_and_scale_invariances() {
        let e: Vec<f64> = (0..31).map(|i| ((i * 17) % 13) as f64 - 6.0).collect();
        let r0 = rmse(&e).unwrap();
        let m0 = medae(&e).unwrap();
        let n0 = nmad(&e).unwrap();
        // nmad is invariant to adding a constant to e.
        let shifted: Vec<f64> = e.iter().map(|x| x + 5.0).collect();
        approx(nmad(&shifted).unwrap(), n0, 1e-12);
        // All three scale linearly with |s|.
        let scaled: Vec<f64> = e.iter().map(|x| x * 3.0).collect();
        approx(rmse(&scaled).unwrap(), 3.0 * r0, 1e-12);
        approx(medae(&scaled).unwrap(), 3.0 * m0, 1e-12);
        approx(nmad(&scaled).unwrap(), 3.0 * n0, 1e-12);
    }

    #[test]
    fn csv_row_schema() {
        let rep = MetricsReport {
            rmse_void: 2.0,
            nmad_void: 0.0,
            medae_void: 2.0,
            rmse_full: 1.0,
            nmad_full: 0.0,
            medae_full: 1.0,
            n_void: 25,
            n_full: 100,
        };
        assert_eq!(
            rep.csv_row("s1", "m1", "idw"),
            "s1,m1,idw,25,2,0,2,1,0,1"
        );
        assert!(MetricsReport::csv_header().starts_with("scene,mask,method"));
    }
}
