use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dracc::{DemandResult, DraccInstance, PriceVector, Resource, ResourceId, ResourceSchedule, Valuation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Left node alive for the right arrivals `ta..=te`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MdbgLeft {
    pub id: ResourceId,
    pub ta: usize,
    pub te: usize,
}

/// Right node with its edge weights to the live left nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct MdbgRight<R> {
    pub id: u32,
    pub weights: Vec<(ResourceId, R)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MdbgInstance<R> {
    left: Vec<MdbgLeft>,
    right: Vec<MdbgRight<R>>,
}

impl<R: Scalar> MdbgInstance<R> {
    /// Right nodes arrive in the given order; weights must sit on live left nodes.
    pub fn new(mut left: Vec<MdbgLeft>, right: Vec<MdbgRight<R>>) -> Result<Self> {
        let horizon = right.len();
        if horizon == 0 {
            return Err(Error::InvalidInstance("no right-side nodes".into()));
        }
        left.sort_by_key(|l| l.id);
        for w in left.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidInstance(format!("duplicate left node {}", w[0].id)));
            }
        }
        for l in &left {
            if !(1 <= l.ta && l.ta <= l.te && l.te <= horizon) {
                return Err(Error::InvalidInstance(format!("left node {} has an invalid lifetime", l.id)));
            }
        }
        let mut right = right;
        for (t, r) in right.iter_mut().enumerate() {
            r.weights.sort_by_key(|e| e.0);
            for (i, w) in &r.weights {
                let alive = left.binary_search_by_key(i, |l| l.id).ok().is_some_and(|k| left[k].ta <= t + 1 && t < left[k].te);
                if !alive {
                    return Err(Error::InvalidInstance(format!("right node {} weighs a left node {} that is not live", r.id, i)));
                }
                if *w < R::zero() || *w >= R::one() {
                    return Err(Error::InvalidInstance(format!("weight outside [0, 1) on right node {}", r.id)));
                }
            }
        }
        Ok(MdbgInstance { left, right })
    }

    pub fn left(&self) -> &[MdbgLeft] {
        &self.left
    }

    pub fn right(&self) -> &[MdbgRight<R>] {
        &self.right
    }

    /// Left nodes live when right node `t` (1-based position) arrives.
    pub fn live(&self, t: usize) -> Vec<ResourceId> {
        self.left.iter().filter(|l| l.ta <= t && t <= l.te).map(|l| l.id).collect()
    }
}

/// Best-margin left node (lowest id on ties), matched when its weight covers its price.
pub fn mdbg_demand<R: Scalar>(node: &MdbgRight<R>, prices: &PriceVector<R>) -> DemandResult<R> {
    let mut best: Option<(ResourceId, R)> = None;
    for (i, p) in &prices.0 {
        let w = node.weights.binary_search_by_key(i, |e| e.0).map(|k| node.weights[k].1.clone()).unwrap_or_else(|_| R::zero());
        let m = w - p.clone();
        if best.as_ref().is_none_or(|(_, bm)| m > *bm) {
            best = Some((*i, m));
        }
    }
    match best {
        Some((i, m)) if m >= R::zero() => DemandResult { chosen: vec![i], payment: prices.get(i).cloned().unwrap_or_else(R::zero) },
        _ => DemandResult::empty(),
    }
}

/// Left nodes become unit-capacity resources and right nodes unit-demand buyers.
pub fn mdbg_to_dracc<R: Scalar>(instance: &MdbgInstance<R>) -> Result<DraccInstance<R>> {
    let horizon = instance.right.len();
    let resources = instance.left.iter().map(|l| Resource { id: l.id, ta: l.ta, te: l.te, c: 1 }).collect();
    let schedule = ResourceSchedule::new(horizon, resources)?;
    let users = instance.right.iter().map(|r| Valuation::unit_demand(r.weights.clone())).collect::<Result<Vec<_>>>()?;
    let w = schedule.max_width();
    DraccInstance::with_bounds(schedule, users, 1, w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdbgLeftFile {
    pub id: ResourceId,
    pub ta: usize,
    pub te: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdbgRightFile {
    pub id: u32,
    pub w: BTreeMap<ResourceId, f64>,
}

/// JSON form: `{"left": [{"id","ta","te"}], "right": [{"id","w": {left: weight}}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdbgFile {
    pub left: Vec<MdbgLeftFile>,
    pub right: Vec<MdbgRightFile>,
}

impl MdbgFile {
    pub fn to_instance<R: Scalar>(&self) -> Result<MdbgInstance<R>> {
        let left = self.left.iter().map(|l| MdbgLeft { id: l.id, ta: l.ta, te: l.te }).collect();
        let right = self
            .right
            .iter()
            .map(|r| MdbgRight { id: r.id, weights: r.w.iter().map(|(i, w)| (*i, R::from_f64_lossy(*w))).collect() })
            .collect();
        MdbgInstance::new(left, right)
    }

    pub fn from_instance<R: Scalar>(instance: &MdbgInstance<R>) -> Self {
        MdbgFile {
            left: instance.left.iter().map(|l| MdbgLeftFile { id: l.id, ta: l.ta, te: l.te }).collect(),
            right: instance
                .right
                .iter()
                .map(|r| MdbgRightFile { id: r.id, w: r.weights.iter().map(|(i, w)| (*i, w.to_f64_lossy())).collect() })
                .collect(),
        }
    }
}
