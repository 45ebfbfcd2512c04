use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::schedule::{Inventory, PriceVector, ResourceId, ResourceSchedule};
use crate::ddmdp::{Policy, PolicyCollection};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type PricingPolicy<R> = Policy<Inventory, PriceVector<R>>;
pub type PricingPolicies<R> = PolicyCollection<Inventory, PriceVector<R>>;

fn one() -> f64 {
    1.0
}

/// Price `base - slope * remaining / capacity`, clamped to `[floor, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub base: f64,
    pub slope: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    0.01
}

/// Parameterised families of inventory-driven pricing policies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyFamilySpec {
    /// A single policy with fixed per-resource prices.
    StaticPrices {
        prices: BTreeMap<ResourceId, f64>,
        #[serde(default = "one")]
        default: f64,
    },
    /// One static policy per level, pricing every resource at that level.
    Uniform { levels: Vec<f64> },
    /// One policy per rung.
    InventoryLadder { rungs: Vec<LadderRung> },
    /// Every assignment of `levels` to `resources` (others at `default`),
    /// truncated to the first `cap` assignments.
    Grid {
        levels: Vec<f64>,
        resources: Vec<ResourceId>,
        #[serde(default = "one")]
        default: f64,
        #[serde(default)]
        cap: Option<usize>,
    },
}

fn check_price(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("price {p} outside (0, 1]")))
    }
}

/// Policy from a per-resource price rule, with exhausted resources forced to 1.
pub fn pricing_policy<R: Scalar>(
    id: impl Into<String>,
    rule: impl Fn(ResourceId, u32) -> R + Send + Sync + 'static,
) -> PricingPolicy<R> {
    Policy::new(id, move |inv: &Inventory| {
        PriceVector(inv.0.iter().map(|&(i, u)| (i, if u == 0 { R::one() } else { rule(i, u) })).collect())
    })
}

/// Same price on every resource.
pub fn static_policy<R: Scalar>(id: impl Into<String>, price: R) -> PricingPolicy<R> {
    pricing_policy(id, move |_, _| price.clone())
}

fn label(x: f64) -> String {
    format!("{x}")
}

/// Build the policy collection described by `spec`.
pub fn make_policy_family<R: Scalar>(spec: &PolicyFamilySpec, schedule: &Arc<ResourceSchedule>) -> Result<PricingPolicies<R>> {
    let policies: Vec<PricingPolicy<R>> = match spec {
        PolicyFamilySpec::StaticPrices { prices, default } => {
            check_price(*default)?;
            prices.values().try_for_each(|p| check_price(*p))?;
            let table: Vec<(ResourceId, R)> = prices.iter().map(|(i, p)| (*i, R::from_f64_lossy(*p))).collect();
            let d = R::from_f64_lossy(*default);
            vec![pricing_policy("static", move |i, _| {
                table.binary_search_by_key(&i, |e| e.0).map(|k| table[k].1.clone()).unwrap_or_else(|_| d.clone())
            })]
        }
        PolicyFamilySpec::Uniform { levels } => {
            if levels.is_empty() {
                return Err(Error::EmptySpec);
            }
            levels
                .iter()
                .map(|&l| {
                    check_price(l)?;
                    Ok(static_policy(format!("uniform:{}", label(l)), R::from_f64_lossy(l)))
                })
                .collect::<Result<_>>()?
        }
        PolicyFamilySpec::InventoryLadder { rungs } => {
            if rungs.is_empty() {
                return Err(Error::EmptySpec);
            }
            rungs
                .iter()
                .map(|rung| {
                    check_price(rung.floor)?;
                    let sched = Arc::clone(schedule);
                    let r = rung.clone();
                    Ok(pricing_policy(
                        format!("ladder:{}-{}", label(rung.base), label(rung.slope)),
                        move |i, u| {
                            let c = sched.resource(i).map_or(u, |res| res.c.max(1));
                            let p = (r.base - r.slope * f64::from(u) / f64::from(c)).clamp(r.floor, 1.0);
                            R::from_f64_lossy(p)
                        },
                    ))
                })
                .collect::<Result<_>>()?
        }
        PolicyFamilySpec::Grid { levels, resources, default, cap } => {
            if levels.is_empty() {
                return Err(Error::EmptySpec);
            }
            levels.iter().try_for_each(|p| check_price(*p))?;
            check_price(*default)?;
            let mut ids = resources.clone();
            ids.sort_unstable();
            ids.dedup();
            let total = levels.len().checked_pow(ids.len() as u32).unwrap_or(usize::MAX);
            let count = cap.map_or(total, |c| c.min(total));
            if count == 0 {
                return Err(Error::EmptySpec);
            }
            (0..count)
                .map(|code| {
                    let mut rem = code;
                    let mut table = Vec::with_capacity(ids.len());
                    for &i in &ids {
                        table.push((i, levels[rem % levels.len()]));
                        rem /= levels.len();
                    }
                    let id = format!(
                        "grid:{}",
                        table.iter().map(|(i, p)| format!("{i}={}", label(*p))).collect::<Vec<_>>().join(",")
                    );
                    let table: Vec<(ResourceId, R)> = table.into_iter().map(|(i, p)| (i, R::from_f64_lossy(p))).collect();
                    let d = R::from_f64_lossy(*default);
                    pricing_policy(id, move |i, _| {
                        table.binary_search_by_key(&i, |e| e.0).map(|k| table[k].1.clone()).unwrap_or_else(|_| d.clone())
                    })
                })
                .collect()
        }
    };
    PolicyCollection::new(policies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dracc::Resource;

    fn sched() -> Arc<ResourceSchedule> {
        Arc::new(
            ResourceSchedule::new(
                3,
                vec![Resource { id: 1, ta: 1, te: 3, c: 2 }, Resource { id: 2, ta: 1, te: 3, c: 4 }],
            )
            .unwrap(),
        )
    }

    #[test]
    fn static_prices_are_patched_on_exhausted_resources() {
        let spec = PolicyFamilySpec::StaticPrices { prices: BTreeMap::new(), default: 0.5 };
        let fam = make_policy_family::<f64>(&spec, &sched()).unwrap();
        let p = fam.get(0).act(&Inventory(vec![(1, 0), (2, 3)]));
        assert_eq!(p, PriceVector(vec![(1, 1.0), (2, 0.5)]));
    }

    #[test]
    fn grid_cardinality() {
        let spec = PolicyFamilySpec::Grid { levels: vec![0.25, 0.5, 0.75], resources: vec![1], default: 1.0, cap: None };
        assert_eq!(make_policy_family::<f64>(&spec, &sched()).unwrap().len(), 3);
        let spec = PolicyFamilySpec::Grid { levels: vec![0.25, 0.5], resources: vec![1, 2], default: 1.0, cap: Some(3) };
        assert_eq!(make_policy_family::<f64>(&spec, &sched()).unwrap().len(), 3);
    }

    #[test]
    fn ladder_at_full_inventory() {
        let spec = PolicyFamilySpec::InventoryLadder { rungs: vec![LadderRung { base: 1.0, slope: 0.5, floor: 0.01 }] };
        let fam = make_policy_family::<f64>(&spec, &sched()).unwrap();
        let p = fam.get(0).act(&Inventory(vec![(1, 2), (2, 1)]));
        assert_eq!(p, PriceVector(vec![(1, 0.5), (2, 0.875)]));
    }

    #[test]
    fn empty_and_invalid_specs() {
        assert!(matches!(
            make_policy_family::<f64>(&PolicyFamilySpec::Uniform { levels: vec![] }, &sched()),
            Err(Error::EmptySpec)
        ));
        assert!(make_policy_family::<f64>(&PolicyFamilySpec::Uniform { levels: vec![0.0] }, &sched()).is_err());
    }
}
