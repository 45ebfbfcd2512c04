use std::cmp::Ordering;

use super::matching::max_weight_matching;
use super::schedule::{PriceVector, ResourceId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest active set an explicit valuation may be evaluated on.
pub const EXPLICIT_LIMIT: usize = 20;

/// A buyer's valuation over subsets of the active resources.
#[derive(Clone, Debug, PartialEq)]
pub enum Valuation<R> {
    /// Value of a set is the sum of its `k` largest weights.
    KDemand { k: usize, weights: Vec<(ResourceId, R)> },
    /// Value table over subsets (sorted id lists); unlisted subsets are worth 0.
    Explicit { table: Vec<(Vec<ResourceId>, R)> },
    /// `value` for any superset of `bundle`, 0 otherwise.
    SingleMinded { bundle: Vec<ResourceId>, value: R },
    /// Each row is a unit-demand slot; value of a set is its best assignment to rows.
    Oxs { rows: Vec<Vec<(ResourceId, R)>> },
}

/// Utility-maximising set and its payment.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandResult<R> {
    pub chosen: Vec<ResourceId>,
    pub payment: R,
}

impl<R: Scalar> DemandResult<R> {
    pub fn empty() -> Self {
        DemandResult { chosen: Vec::new(), payment: R::zero() }
    }
}

/// Canonical preference between two sorted id lists: `Greater` means `a` is
/// preferred. At the first id where membership differs the set containing it
/// wins, so the empty set is the least preferred.
pub fn canonical_cmp(a: &[ResourceId], b: &[ResourceId]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    a.len().cmp(&b.len())
}

fn sorted<T>(mut v: Vec<(ResourceId, T)>) -> Vec<(ResourceId, T)> {
    v.sort_by_key(|e| e.0);
    v
}

fn lookup<R: Scalar>(list: &[(ResourceId, R)], id: ResourceId) -> R {
    list.binary_search_by_key(&id, |e| e.0).map(|i| list[i].1.clone()).unwrap_or_else(|_| R::zero())
}

fn check_value<R: Scalar>(v: &R) -> Result<()> {
    if *v < R::zero() || *v >= R::one() {
        return Err(Error::InvalidInstance(format!("value {v} outside [0, 1)")));
    }
    Ok(())
}

impl<R: Scalar> Valuation<R> {
    pub fn kdemand(k: usize, weights: Vec<(ResourceId, R)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("k must be at least 1".into()));
        }
        weights.iter().try_for_each(|w| check_value(&w.1))?;
        Ok(Valuation::KDemand { k, weights: sorted(weights) })
    }

    pub fn unit_demand(weights: Vec<(ResourceId, R)>) -> Result<Self> {
        Self::kdemand(1, weights)
    }

    pub fn explicit(table: Vec<(Vec<ResourceId>, R)>) -> Result<Self> {
        let mut out: Vec<(Vec<ResourceId>, R)> = Vec::with_capacity(table.len());
        for (mut set, v) in table {
            check_value(&v)?;
            set.sort_unstable();
            set.dedup();
            if set.is_empty() && v != R::zero() {
                return Err(Error::InvalidInstance("value of the empty set must be 0".into()));
            }
            if !set.is_empty() {
                out.push((set, v));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        if out.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidInstance("explicit table lists a subset twice".into()));
        }
        Ok(Valuation::Explicit { table: out })
    }

    pub fn single_minded(mut bundle: Vec<ResourceId>, value: R) -> Result<Self> {
        check_value(&value)?;
        bundle.sort_unstable();
        bundle.dedup();
        Ok(Valuation::SingleMinded { bundle, value })
    }

    pub fn oxs(rows: Vec<Vec<(ResourceId, R)>>) -> Result<Self> {
        for row in &rows {
            row.iter().try_for_each(|w| check_value(&w.1))?;
        }
        Ok(Valuation::Oxs { rows: rows.into_iter().map(sorted).collect() })
    }

    /// Whether the valuation belongs to the gross-substitutes-like family
    /// (k-demand, single-minded, OXS) used by the square-root oracle.
    pub fn in_exchange_family(&self) -> bool {
        !matches!(self, Valuation::Explicit { .. })
    }

    /// Value of a set of resources (sorted, duplicate-free).
    pub fn value(&self, set: &[ResourceId]) -> R {
        match self {
            Valuation::KDemand { k, weights } => {
                let mut ws: Vec<R> = set.iter().map(|i| lookup(weights, *i)).collect();
                ws.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
                R::sum_of(ws.iter().take(*k))
            }
            Valuation::Explicit { table } => table
                .binary_search_by(|e| e.0.as_slice().cmp(set))
                .map(|i| table[i].1.clone())
                .unwrap_or_else(|_| R::zero()),
            Valuation::SingleMinded { bundle, value } => {
                if bundle.iter().all(|b| set.binary_search(b).is_ok()) {
                    value.clone()
                } else {
                    R::zero()
                }
            }
            Valuation::Oxs { rows } => {
                let w: Vec<Vec<R>> = rows.iter().map(|row| set.iter().map(|i| lookup(row, *i)).collect()).collect();
                max_weight_matching(&w).0
            }
        }
    }

    /// Utility-maximising subset of the priced resources, ties broken by
    /// [`canonical_cmp`].
    pub fn demand(&self, prices: &PriceVector<R>) -> Result<DemandResult<R>> {
        if matches!(self, Valuation::Explicit { .. }) && prices.len() > EXPLICIT_LIMIT {
            return Err(Error::TooLargeExplicit(prices.len()));
        }
        Ok(self.demand_unchecked(prices))
    }

    /// As [`Valuation::demand`] without the explicit-size guard.
    pub fn demand_unchecked(&self, prices: &PriceVector<R>) -> DemandResult<R> {
        let chosen = match self {
            Valuation::KDemand { k, weights } => kdemand_choice(*k, weights, prices),
            Valuation::Explicit { table } => explicit_choice(table, prices),
            Valuation::SingleMinded { bundle, value } => {
                let available = bundle.iter().all(|b| prices.get(*b).is_some());
                if available && *value >= prices.sum_over(bundle) {
                    bundle.clone()
                } else {
                    Vec::new()
                }
            }
            Valuation::Oxs { rows } => oxs_choice(rows, prices),
        };
        let payment = prices.sum_over(&chosen);
        DemandResult { chosen, payment }
    }
}

fn kdemand_choice<R: Scalar>(k: usize, weights: &[(ResourceId, R)], prices: &PriceVector<R>) -> Vec<ResourceId> {
    let margins: Vec<(ResourceId, R)> = prices.0.iter().map(|(i, p)| (*i, lookup(weights, *i) - p.clone())).collect();
    let mut positive: Vec<&(ResourceId, R)> = margins.iter().filter(|m| m.1 > R::zero()).collect();
    let mut chosen: Vec<ResourceId> = if positive.len() >= k {
        positive.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        positive.iter().take(k).map(|m| m.0).collect()
    } else {
        let room = k - positive.len();
        let mut out: Vec<ResourceId> = positive.iter().map(|m| m.0).collect();
        out.extend(margins.iter().filter(|m| m.1 == R::zero()).map(|m| m.0).take(room));
        out
    };
    chosen.sort_unstable();
    chosen
}

fn explicit_choice<R: Scalar>(table: &[(Vec<ResourceId>, R)], prices: &PriceVector<R>) -> Vec<ResourceId> {
    let mut best: Vec<ResourceId> = Vec::new();
    let mut best_u = R::zero();
    for (set, v) in table {
        if set.iter().any(|i| prices.get(*i).is_none()) {
            continue;
        }
        let u = v.clone() - prices.sum_over(set);
        let better = match u.partial_cmp(&best_u) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Equal) => canonical_cmp(set, &best) == Ordering::Greater,
            _ => false,
        };
        if better {
            best = set.clone();
            best_u = u;
        }
    }
    best
}

fn oxs_choice<R: Scalar>(rows: &[Vec<(ResourceId, R)>], prices: &PriceVector<R>) -> Vec<ResourceId> {
    let items: Vec<(ResourceId, R)> = prices.0.clone();
    let n = items.len();
    if n == 0 || rows.is_empty() {
        return Vec::new();
    }
    let adjusted: Vec<Vec<R>> =
        rows.iter().map(|row| items.iter().map(|(i, p)| lookup(row, *i) - p.clone()).collect()).collect();
    let optimum = max_weight_matching(&adjusted).0;
    let bonus = R::from_count(2 * n + 2);
    let mut forced = vec![false; n];
    let mut excluded = vec![false; n];
    let mut count = 0usize;
    for j in 0..n {
        forced[j] = true;
        let w: Vec<Vec<R>> = adjusted
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(c, a)| {
                        if excluded[c] {
                            R::zero() - R::one()
                        } else if forced[c] {
                            a.clone() + bonus.clone()
                        } else {
                            a.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let target = optimum.clone() + bonus.clone() * R::from_count(count + 1);
        if R::near(&max_weight_matching(&w).0, &target) {
            count += 1;
        } else {
            forced[j] = false;
            excluded[j] = true;
        }
    }
    items.iter().zip(&forced).filter(|(_, f)| **f).map(|(i, _)| i.0).collect()
}

/// Demand set by exhaustive enumeration of all subsets of the priced resources.
pub fn demand_by_enumeration<R: Scalar>(v: &Valuation<R>, prices: &PriceVector<R>) -> Result<DemandResult<R>> {
    let ids: Vec<ResourceId> = prices.ids().collect();
    if ids.len() > EXPLICIT_LIMIT {
        return Err(Error::TooLargeExplicit(ids.len()));
    }
    let mut best: Vec<ResourceId> = Vec::new();
    let mut best_u = R::zero();
    for mask in 1u32..(1u32 << ids.len()) {
        let set: Vec<ResourceId> = (0..ids.len()).filter(|b| mask >> b & 1 == 1).map(|b| ids[b]).collect();
        let u = v.value(&set) - prices.sum_over(&set);
        let better = u > best_u || (u == best_u && canonical_cmp(&set, &best) == Ordering::Greater);
        if better {
            best = set;
            best_u = u;
        }
    }
    let payment = prices.sum_over(&best);
    Ok(DemandResult { chosen: best, payment })
}
