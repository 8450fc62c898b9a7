use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mitigation::Z95;

/// CIs spreading by more than this factor switch a fit to inverse-variance
/// weights.
pub const WEIGHTING_RATIO: f64 = 3.0;

/// Sample mean and 95% half-width.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * (var / n as f64).sqrt())
}

/// NaN travels through JSON as `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    #[serde(with = "nan_as_null")]
    pub slope_stderr: f64,
    #[serde(with = "nan_as_null")]
    pub intercept_stderr: f64,
    /// Covariance of intercept and slope.
    #[serde(with = "nan_as_null")]
    pub covariance: f64,
    pub weighted: bool,
}

impl LineFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Abscissa where the line reaches `y`, with its delta-method stderr.
    pub fn solve(&self, y: f64) -> (f64, f64) {
        let x = (y - self.intercept) / self.slope;
        let var = self.intercept_stderr.powi(2)
            + x * x * self.slope_stderr.powi(2)
            + 2.0 * x * self.covariance;
        (x, var.max(0.0).sqrt() / self.slope.abs())
    }

    /// `|slope - value| <= k * stderr`.
    pub fn slope_within(&self, value: f64, k: f64) -> bool {
        (self.slope - value).abs() <= k * self.slope_stderr
    }
}

/// Ordinary least squares, or inverse-variance weighted when the one-sigma
/// errors `sigmas` differ by more than [`WEIGHTING_RATIO`]. The weighted fit
/// takes the sigmas as absolute; the unweighted one estimates the scatter
/// from the residuals, so two points give a NaN stderr.
pub fn linear_fit(xs: &[f64], ys: &[f64], sigmas: Option<&[f64]>) -> Result<LineFit> {
    if xs.len() != ys.len() || sigmas.is_some_and(|s| s.len() != xs.len()) {
        return Err(Error::SizeMismatch("fit inputs differ in length".into()));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(format!("fit needs 2 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("fit input is not finite".into()));
    }
    let weights = sigmas.and_then(|s| {
        let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = s.iter().cloned().fold(0.0, f64::max);
        (lo > 0.0 && hi / lo > WEIGHTING_RATIO).then(|| s.iter().map(|v| 1.0 / (v * v)).collect::<Vec<_>>())
    });
    let weighted = weights.is_some();
    let w = weights.unwrap_or_else(|| vec![1.0; xs.len()]);
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let my = w.iter().zip(ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += w[i] * (xs[i] - mx).powi(2);
        sxy += w[i] * (xs[i] - mx) * (ys[i] - my);
    }
    if sxx == 0.0 {
        return Err(Error::Singular("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let scale = if weighted {
        1.0
    } else if xs.len() > 2 {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        rss / (xs.len() - 2) as f64
    } else {
        f64::NAN
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: (scale / sxx).sqrt(),
        intercept_stderr: (scale * (1.0 / sw + mx * mx / sxx)).sqrt(),
        covariance: -mx * scale / sxx,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys, None).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 2.0).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-12);
        assert!(!f.weighted);
    }

    #[test]
    fn textbook_stderr() {
        // y = 1 + x with residuals +-0.1 alternating
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.1, 1.9, 3.1, 3.9];
        let f = linear_fit(&xs, &ys, None).unwrap();
        assert!((f.slope - 0.96).abs() < 1e-12);
        // rss = 0.032, s^2 = 0.016, sxx = 5
        assert!((f.slope_stderr - (0.016f64 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weighting_switch() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 1.0, 3.0];
        assert!(!linear_fit(&xs, &ys, Some(&[1.0, 2.0, 2.9])).unwrap().weighted);
        let f = linear_fit(&xs, &ys, Some(&[1.0, 1.0, 100.0])).unwrap();
        assert!(f.weighted);
        assert!((f.slope - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mean_interval() {
        let (m, h) = mean_ci(&[1.0, 1.0, 1.0]);
        assert_eq!((m, h), (1.0, 0.0));
        let (m, h) = mean_ci(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((h - 1.96 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate() {
        assert!(linear_fit(&[1.0], &[1.0], None).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0], None).is_err());
        assert!(linear_fit(&[1.0, 2.0], &[1.0, f64::NAN], None).is_err());
    }
}
