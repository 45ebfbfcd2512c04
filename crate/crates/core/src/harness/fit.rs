use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Least-squares line through `(ln T, ln mean)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval for the slope.
    pub ci: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretCurve {
    pub points: Vec<CurvePoint>,
    pub fit: Option<SlopeFit>,
    /// Why no fit was produced.
    pub fit_error: Option<String>,
}

impl RegretCurve {
    pub fn new(points: Vec<CurvePoint>) -> Self {
        let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.horizon as f64, p.mean)).collect();
        match fit_loglog(&xy) {
            Ok(fit) => RegretCurve { points, fit: Some(fit), fit_error: None },
            Err(e) => RegretCurve { points, fit: None, fit_error: Some(e.to_string()) },
        }
    }
}

/// Fit `ln y = a + b ln x`. Needs at least three points and positive values.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::SlopeFit(format!("{} points, need at least 3", points.len())));
    }
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::SlopeFit(format!("non-positive value at T = {x}: {y}")));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::SlopeFit("all horizons are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let df = n - 2.0;
    let se = (rss / df / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::SlopeFit(e.to_string()))?.inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, ci: (slope - t * se, slope + t * se) })
}
