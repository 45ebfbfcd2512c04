use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type ResourceId = u32;

/// A resource with its activity window `[ta, te]` and capacity `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resource {
    pub id: ResourceId,
    pub ta: usize,
    pub te: usize,
    pub c: u32,
}

/// Resources over a horizon, with the active sets `A_t` precomputed.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceSchedule {
    horizon: usize,
    resources: Vec<Resource>,
    active: Vec<Arc<[(ResourceId, u32)]>>,
}

impl ResourceSchedule {
    pub fn new(horizon: usize, mut resources: Vec<Resource>) -> Result<Self> {
        resources.sort_by_key(|r| r.id);
        for w in resources.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidInstance(format!("duplicate resource id {}", w[0].id)));
            }
        }
        for r in &resources {
            if r.ta < 1 || r.ta > r.te || r.te > horizon {
                return Err(Error::InvalidInstance(format!(
                    "resource {} has window [{}, {}] outside [1, {horizon}]",
                    r.id, r.ta, r.te
                )));
            }
        }
        let mut lists: Vec<Vec<(ResourceId, u32)>> = vec![Vec::new(); horizon];
        for r in &resources {
            for list in &mut lists[r.ta - 1..r.te] {
                list.push((r.id, r.c));
            }
        }
        let active = lists.into_iter().map(Arc::from).collect();
        Ok(ResourceSchedule { horizon, resources, active })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource(&self, id: ResourceId) -> Option<&Resource> {
        self.resources.binary_search_by_key(&id, |r| r.id).ok().map(|i| &self.resources[i])
    }

    /// `A_t` with capacities, sorted by id.
    pub fn active(&self, t: usize) -> &Arc<[(ResourceId, u32)]> {
        &self.active[t - 1]
    }

    /// `C = max c(i)` (0 without resources).
    pub fn max_capacity(&self) -> u32 {
        self.resources.iter().map(|r| r.c).max().unwrap_or(0)
    }

    /// `W = max_t |A_t|`, at least 1.
    pub fn max_width(&self) -> usize {
        self.active.iter().map(|a| a.len()).max().unwrap_or(0).max(1)
    }

    /// Full capacities over `A_t`.
    pub fn fresh_inventory(&self, t: usize) -> Inventory {
        if t == 0 || t > self.horizon {
            return Inventory::default();
        }
        Inventory(self.active(t).to_vec())
    }

    /// Whether `ta(i) <= ta(j)` implies `te(i) <= te(j)`; returns an offending pair otherwise.
    pub fn fifo_violation(&self) -> Option<(ResourceId, ResourceId)> {
        let mut by_arrival: Vec<&Resource> = self.resources.iter().collect();
        by_arrival.sort_by_key(|r| (r.ta, r.te));
        let mut worst: Option<&Resource> = None;
        for r in by_arrival {
            if let Some(w) = worst {
                if w.te > r.te {
                    return Some((w.id, r.id));
                }
            }
            if worst.is_none_or(|w| r.te >= w.te) {
                worst = Some(r);
            }
        }
        None
    }
}

/// Remaining units of every active resource, sorted by id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inventory(pub Vec<(ResourceId, u32)>);

impl Inventory {
    pub fn get(&self, id: ResourceId) -> Option<u32> {
        self.0.binary_search_by_key(&id, |e| e.0).ok().map(|i| self.0[i].1)
    }

    pub fn ids(&self) -> impl Iterator<Item = ResourceId> + '_ {
        self.0.iter().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|e| u64::from(e.1)).sum()
    }
}

/// Posted prices over the active resources, sorted by id.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceVector<R>(pub Vec<(ResourceId, R)>);

impl<R: Scalar> PriceVector<R> {
    /// Price 1 on every resource of `inventory`.
    pub fn all_ones(inventory: &Inventory) -> Self {
        PriceVector(inventory.ids().map(|i| (i, R::one())).collect())
    }

    pub fn get(&self, id: ResourceId) -> Option<&R> {
        self.0.binary_search_by_key(&id, |e| e.0).ok().map(|i| &self.0[i].1)
    }

    pub fn ids(&self) -> impl Iterator<Item = ResourceId> + '_ {
        self.0.iter().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First resource whose price breaks feasibility for `inventory`.
    pub fn infeasibility(&self, inventory: &Inventory) -> Option<ResourceId> {
        if self.0.len() != inventory.0.len() {
            return Some(
                inventory
                    .ids()
                    .find(|i| self.get(*i).is_none())
                    .or_else(|| self.ids().find(|i| inventory.get(*i).is_none()))
                    .unwrap_or(0),
            );
        }
        for ((id, p), (jd, units)) in self.0.iter().zip(&inventory.0) {
            if id != jd {
                return Some(*jd);
            }
            if *p <= R::zero() || *p > R::one() || (*units == 0 && *p != R::one()) {
                return Some(*id);
            }
        }
        None
    }

    pub fn is_feasible_for(&self, inventory: &Inventory) -> bool {
        self.infeasibility(inventory).is_none()
    }

    pub fn sum_over(&self, ids: &[ResourceId]) -> R {
        ids.iter().fold(R::zero(), |acc, i| acc + self.get(*i).cloned().unwrap_or_else(R::zero))
    }
}

/// Inventory after selling one unit of each resource in `sold`, carried over to
/// the next active set `next` (arrivals start at full capacity).
pub fn apply_sale(inventory: &Inventory, sold: &[ResourceId], next: &[(ResourceId, u32)]) -> Result<Inventory> {
    for id in sold {
        match inventory.get(*id) {
            Some(u) if u >= 1 => {}
            _ => return Err(Error::Oversell(*id)),
        }
    }
    let out = next
        .iter()
        .map(|&(id, cap)| match inventory.get(id) {
            Some(u) => (id, u - u32::from(sold.binary_search(&id).is_ok())),
            None => (id, cap),
        })
        .collect();
    Ok(Inventory(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn active_sets_and_bounds() {
        let s = ResourceSchedule::new(
            4,
            vec![Resource { id: 2, ta: 1, te: 2, c: 3 }, Resource { id: 1, ta: 2, te: 4, c: 1 }],
        )
        .unwrap();
        assert_eq!(&s.active(1)[..], &[(2, 3)]);
        assert_eq!(&s.active(2)[..], &[(1, 1), (2, 3)]);
        assert_eq!(s.max_capacity(), 3);
        assert_eq!(s.max_width(), 2);
        assert!(ResourceSchedule::new(2, vec![Resource { id: 1, ta: 2, te: 3, c: 1 }]).is_err());
    }

    #[test]
    fn sale_with_arrival() {
        let lam = Inventory(vec![(1, 2), (2, 1)]);
        let next = [(1, 2), (2, 1), (3, 4)];
        assert_eq!(apply_sale(&lam, &[2], &next).unwrap(), Inventory(vec![(1, 2), (2, 0), (3, 4)]));
        assert_eq!(apply_sale(&lam, &[], &next[..2]).unwrap(), lam);
        assert_eq!(apply_sale(&lam, &[], &[(2, 1)]).unwrap(), Inventory(vec![(2, 1)]));
        let empty = Inventory(vec![(1, 0)]);
        assert!(matches!(apply_sale(&empty, &[1], &[(1, 1)]), Err(Error::Oversell(1))));
    }

    #[test]
    fn feasibility_rule() {
        let lam = Inventory(vec![(1, 0), (2, 1)]);
        assert!(PriceVector(vec![(1, 1.0), (2, 0.3)]).is_feasible_for(&lam));
        assert!(!PriceVector(vec![(1, 0.9), (2, 0.3)]).is_feasible_for(&lam));
        assert!(!PriceVector(vec![(1, 1.0), (2, 0.0)]).is_feasible_for(&lam));
        assert!(!PriceVector(vec![(2, 0.3)]).is_feasible_for(&lam));
    }

    #[test]
    fn fifo_detection() {
        let ok = ResourceSchedule::new(
            5,
            vec![Resource { id: 1, ta: 1, te: 3, c: 1 }, Resource { id: 2, ta: 2, te: 4, c: 1 }],
        )
        .unwrap();
        assert_eq!(ok.fifo_violation(), None);
        let bad = ResourceSchedule::new(
            5,
            vec![Resource { id: 1, ta: 1, te: 5, c: 1 }, Resource { id: 2, ta: 2, te: 3, c: 1 }],
        )
        .unwrap();
        assert_eq!(bad.fifo_violation(), Some((1, 2)));
    }
}
