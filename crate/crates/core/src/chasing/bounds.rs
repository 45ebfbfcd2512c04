use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    KdemandSqrt,
    GeneralPower,
    OjsConstant,
}

/// A chasing-regret guarantee `sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChasabilityBound {
    pub kind: BoundKind,
    pub sigma: f64,
}

impl ChasabilityBound {
    /// `2 sqrt(C W T)`.
    pub fn kdemand(c: u32, w: usize, horizon: usize) -> Self {
        let cw = f64::from(c) * w as f64;
        ChasabilityBound { kind: BoundKind::KdemandSqrt, sigma: 2.0 * (cw * horizon as f64).sqrt() }
    }

    /// `2 T^{CW/(CW+1)} (CW)^{1/(CW+1)}`.
    pub fn general(c: u32, w: usize, horizon: usize) -> Self {
        let cw = f64::from(c) * w as f64;
        let t = horizon as f64;
        ChasabilityBound {
            kind: BoundKind::GeneralPower,
            sigma: 2.0 * t.powf(cw / (cw + 1.0)) * cw.powf(1.0 / (cw + 1.0)),
        }
    }

    /// `2 C W`.
    pub fn ojs(c: u32, w: usize) -> Self {
        ChasabilityBound { kind: BoundKind::OjsConstant, sigma: 2.0 * f64::from(c) * w as f64 }
    }

    pub fn of_kind(kind: BoundKind, c: u32, w: usize, horizon: usize) -> Self {
        match kind {
            BoundKind::KdemandSqrt => Self::kdemand(c, w, horizon),
            BoundKind::GeneralPower => Self::general(c, w, horizon),
            BoundKind::OjsConstant => Self::ojs(c, w),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma > 0.0 && self.sigma.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("chasability bound {} must be positive", self.sigma)))
        }
    }
}

/// Exploration rate `sqrt(CW / T)`, clamped to `[0, 1]`.
pub fn kdemand_epsilon(cw: usize, horizon: usize) -> f64 {
    if horizon == 0 {
        return 1.0;
    }
    (cw as f64 / horizon as f64).sqrt().min(1.0)
}

/// Exploration rate `(T / CW)^{-1/(CW+1)}`, clamped to `[0, 1]`.
pub fn general_epsilon(cw: usize, horizon: usize) -> f64 {
    if cw == 0 {
        return 0.0;
    }
    if horizon == 0 {
        return 1.0;
    }
    let cw = cw as f64;
    (horizon as f64 / cw).powf(-1.0 / (cw + 1.0)).min(1.0)
}
