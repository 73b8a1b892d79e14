use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::DepthMap;

/// Denominator of the relative errors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RelDenominator {
    /// Divide by the predicted depth.
    #[default]
    Pred,
    /// Divide by the ground-truth depth.
    Gt,
}

impl FromStr for RelDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pred" => Ok(RelDenominator::Pred),
            "gt" => Ok(RelDenominator::Gt),
            other => Err(Error::invalid(format!("unknown relative-error denominator '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthScores {
    pub rmse_lin: f64,
    pub rmse_log: f64,
    pub abs_rel: f64,
    pub sqr_rel: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_3: f64,
    /// Pixels valid in both maps.
    pub count: usize,
}

/// Depth errors over pixels positive and finite in both maps. Threshold
/// accuracies use `max(y / yhat, yhat / y) < 1.25^k`.
pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap, denom: RelDenominator) -> Result<DepthScores> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::shape("predicted and ground-truth depth differ in shape"));
    }
    let (mut sq, mut sq_log, mut abs_rel, mut sqr_rel) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut within = [0usize; 3];
    let mut n = 0usize;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if !DepthMap::is_valid(p) || !DepthMap::is_valid(g) {
            continue;
        }
        let (yh, y) = (f64::from(p), f64::from(g));
        let d = y - yh;
        let base = match denom {
            RelDenominator::Pred => yh,
            RelDenominator::Gt => y,
        };
        sq += d * d;
        sq_log += (y.ln() - yh.ln()).powi(2);
        abs_rel += d.abs() / base;
        sqr_rel += d * d / base;
        let ratio = (y / yh).max(yh / y);
        for (k, w) in within.iter_mut().enumerate() {
            if ratio < 1.25f64.powi(k as i32 + 1) {
                *w += 1;
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::invalid("no pixels with valid depth in both maps"));
    }
    let nf = n as f64;
    Ok(DepthScores {
        rmse_lin: (sq / nf).sqrt(),
        rmse_log: (sq_log / nf).sqrt(),
        abs_rel: abs_rel / nf,
        sqr_rel: sqr_rel / nf,
        delta_1: within[0] as f64 / nf,
        delta_2: within[1] as f64 / nf,
        delta_3: within[2] as f64 / nf,
        count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(d: &[f32]) -> DepthMap {
        DepthMap::new(d.len(), 1, d.to_vec()).unwrap()
    }

    #[test]
    fn identical_maps() {
        let g = dm(&[1.0, 2.5, 7.0]);
        let s = depth_metrics(&g, &g, RelDenominator::Pred).unwrap();
        assert_eq!((s.rmse_lin, s.rmse_log, s.abs_rel, s.sqr_rel), (0.0, 0.0, 0.0, 0.0));
        assert_eq!((s.delta_1, s.delta_2, s.delta_3), (1.0, 1.0, 1.0));
    }

    #[test]
    fn scaled_prediction() {
        let g = [0.5f32, 1.0, 2.0, 4.0];
        let p: Vec<f32> = g.iter().map(|v| v * 1.2).collect();
        let s = depth_metrics(&dm(&p), &dm(&g), RelDenominator::Pred).unwrap();
        assert_eq!(s.delta_1, 1.0);
        assert!((s.rmse_log - 1.2f64.ln()).abs() < 1e-6);
        assert!((s.abs_rel - 1.0 / 6.0).abs() < 1e-6);
        let conventional = depth_metrics(&dm(&p), &dm(&g), RelDenominator::Gt).unwrap();
        assert!((conventional.abs_rel - 0.2).abs() < 1e-6);
    }

    #[test]
    fn invalid_pixels_skipped() {
        let s = depth_metrics(&dm(&[1.0, 0.0, 2.0]), &dm(&[1.0, 3.0, f32::NAN]), RelDenominator::Pred).unwrap();
        assert_eq!(s.count, 1);
        assert!(depth_metrics(&dm(&[0.0]), &dm(&[1.0]), RelDenominator::Pred).is_err());
    }

    #[test]
    fn deltas_monotone() {
        let s = depth_metrics(&dm(&[1.0, 1.4, 1.7, 3.0]), &dm(&[1.0; 4]), RelDenominator::Pred).unwrap();
        assert_eq!((s.delta_1, s.delta_2, s.delta_3), (0.25, 0.5, 0.75));
    }
}
