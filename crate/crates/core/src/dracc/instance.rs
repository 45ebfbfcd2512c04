use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::policy::PolicyFamilySpec;
use super::schedule::{apply_sale, Inventory, PriceVector, Resource, ResourceId, ResourceSchedule};
use super::valuation::{DemandResult, Valuation, EXPLICIT_LIMIT};
use crate::ddmdp::{DdMdp, History, RoundDynamics, Transition};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Posted pricing with limited inventory as a Dd-MDP.
///
/// States are inventories over `A_t`, actions are feasible price vectors, and
/// the round reward is the buyer's payment divided by the width bound `W`.
#[derive(Clone, Debug)]
pub struct DraccInstance<R> {
    schedule: Arc<ResourceSchedule>,
    users: Arc<[Arc<Valuation<R>>]>,
    capacity_bound: u32,
    width_bound: usize,
    scale: R,
}

impl<R: Scalar> DraccInstance<R> {
    /// One valuation per round; bounds `C`, `W` are taken from the schedule.
    pub fn new(schedule: ResourceSchedule, users: Vec<Valuation<R>>) -> Result<Self> {
        let c = schedule.max_capacity();
        let w = schedule.max_width();
        Self::with_bounds(schedule, users, c, w)
    }

    /// As [`DraccInstance::new`] with declared bounds at least the realized ones.
    pub fn with_bounds(
        schedule: ResourceSchedule,
        users: Vec<Valuation<R>>,
        capacity_bound: u32,
        width_bound: usize,
    ) -> Result<Self> {
        if users.len() != schedule.horizon() {
            return Err(Error::InvalidInstance(format!(
                "{} users for a horizon of {}",
                users.len(),
                schedule.horizon()
            )));
        }
        if capacity_bound < schedule.max_capacity() || width_bound < schedule.max_width() {
            return Err(Error::InvalidInstance("declared C or W below the schedule's".into()));
        }
        for (i, u) in users.iter().enumerate() {
            let width = schedule.active(i + 1).len();
            if matches!(u, Valuation::Explicit { .. }) && width > EXPLICIT_LIMIT {
                return Err(Error::TooLargeExplicit(width));
            }
        }
        Ok(DraccInstance {
            schedule: Arc::new(schedule),
            users: users.into_iter().map(Arc::new).collect(),
            capacity_bound,
            width_bound,
            scale: R::from_count(width_bound),
        })
    }

    pub fn schedule(&self) -> &Arc<ResourceSchedule> {
        &self.schedule
    }

    pub fn user(&self, t: usize) -> &Valuation<R> {
        &self.users[t - 1]
    }

    /// `C`.
    pub fn capacity_bound(&self) -> u32 {
        self.capacity_bound
    }

    /// `W`.
    pub fn width_bound(&self) -> usize {
        self.width_bound
    }

    pub fn cw(&self) -> usize {
        self.capacity_bound as usize * self.width_bound
    }

    pub fn all_in_exchange_family(&self) -> bool {
        self.users.iter().all(|u| u.in_exchange_family())
    }

    /// Dynamics of round `t`.
    pub fn round_at(&self, t: usize) -> DraccRound<R> {
        let next = if t < self.schedule.horizon() {
            Arc::clone(self.schedule.active(t + 1))
        } else {
            Arc::clone(self.schedule.active(t))
        };
        DraccRound { t, next, valuation: Arc::clone(&self.users[t - 1]), scale: self.scale.clone() }
    }

    /// Instance with every valuation replaced through `f`.
    pub fn map_users(&self, f: impl Fn(usize, &Valuation<R>) -> Valuation<R>) -> Result<Self> {
        let users = self.users.iter().enumerate().map(|(i, u)| f(i + 1, u)).collect();
        Self::with_bounds((*self.schedule).clone(), users, self.capacity_bound, self.width_bound)
    }
}

impl<R: Scalar> DdMdp for DraccInstance<R> {
    type Scalar = R;
    type State = Inventory;
    type Action = PriceVector<R>;
    type Round = DraccRound<R>;

    fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    fn initial_state(&self) -> Inventory {
        self.schedule.fresh_inventory(1)
    }

    fn is_feasible(&self, s: &Inventory, x: &PriceVector<R>) -> bool {
        x.is_feasible_for(s)
    }

    fn round(&self, t: usize, _history: History<'_, Inventory, PriceVector<R>>) -> DraccRound<R> {
        self.round_at(t)
    }

    fn reward_scale(&self) -> R {
        self.scale.clone()
    }
}

/// One round of posted pricing: the buyer and the next active set.
#[derive(Clone, Debug)]
pub struct DraccRound<R> {
    pub t: usize,
    /// `A_{t+1}` with capacities (for the last round, `A_T` itself).
    pub next: Arc<[(ResourceId, u32)]>,
    pub valuation: Arc<Valuation<R>>,
    pub scale: R,
}

impl<R: Scalar> DraccRound<R> {
    pub fn demand(&self, prices: &PriceVector<R>) -> DemandResult<R> {
        self.valuation.demand_unchecked(prices)
    }
}

impl<R: Scalar> Transition<Inventory, PriceVector<R>> for DraccRound<R> {
    fn next_state(&self, s: &Inventory, x: &PriceVector<R>) -> Inventory {
        let d = self.demand(x);
        apply_sale(s, &d.chosen, &self.next).unwrap_or_else(|e| panic!("round {}: {e}", self.t))
    }
}

impl<R: Scalar> RoundDynamics<Inventory, PriceVector<R>, R> for DraccRound<R> {
    fn reward(&self, _s: &Inventory, x: &PriceVector<R>) -> R {
        self.demand(x).payment / self.scale.clone()
    }
}

/// JSON form of a pricing instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DraccFile {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub resources: Vec<Resource>,
    pub users: Vec<UserFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_family: Option<PolicyFamilySpec>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub capacity_bound: Option<u32>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub width_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UserFile {
    Kdemand { k: usize, w: BTreeMap<ResourceId, f64> },
    /// Keys are comma-separated resource ids.
    Explicit { table: BTreeMap<String, f64> },
    SingleMinded { bundle: Vec<ResourceId>, value: f64 },
    Oxs { rows: Vec<BTreeMap<ResourceId, f64>> },
}

impl UserFile {
    pub fn to_valuation<R: Scalar>(&self) -> Result<Valuation<R>> {
        let conv = |m: &BTreeMap<ResourceId, f64>| m.iter().map(|(i, w)| (*i, R::from_f64_lossy(*w))).collect();
        match self {
            UserFile::Kdemand { k, w } => Valuation::kdemand(*k, conv(w)),
            UserFile::Explicit { table } => {
                let mut entries = Vec::with_capacity(table.len());
                for (key, v) in table {
                    let set = key
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<ResourceId>().map_err(|_| Error::UnknownLabel(key.clone())))
                        .collect::<Result<Vec<_>>>()?;
                    entries.push((set, R::from_f64_lossy(*v)));
                }
                Valuation::explicit(entries)
            }
            UserFile::SingleMinded { bundle, value } => Valuation::single_minded(bundle.clone(), R::from_f64_lossy(*value)),
            UserFile::Oxs { rows } => Valuation::oxs(rows.iter().map(conv).collect()),
        }
    }

    pub fn from_valuation<R: Scalar>(v: &Valuation<R>) -> Self {
        let conv = |m: &[(ResourceId, R)]| m.iter().map(|(i, w)| (*i, w.to_f64_lossy())).collect();
        match v {
            Valuation::KDemand { k, weights } => UserFile::Kdemand { k: *k, w: conv(weights) },
            Valuation::Explicit { table } => UserFile::Explicit {
                table: table
                    .iter()
                    .map(|(s, v)| (s.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","), v.to_f64_lossy()))
                    .collect(),
            },
            Valuation::SingleMinded { bundle, value } => {
                UserFile::SingleMinded { bundle: bundle.clone(), value: value.to_f64_lossy() }
            }
            Valuation::Oxs { rows } => UserFile::Oxs { rows: rows.iter().map(|r| conv(r)).collect() },
        }
    }
}

impl DraccFile {
    pub fn to_instance<R: Scalar>(&self) -> Result<DraccInstance<R>> {
        let schedule = ResourceSchedule::new(self.horizon, self.resources.clone())?;
        let users = self.users.iter().map(UserFile::to_valuation).collect::<Result<Vec<_>>>()?;
        let c = self.capacity_bound.unwrap_or_else(|| schedule.max_capacity());
        let w = self.width_bound.unwrap_or_else(|| schedule.max_width());
        DraccInstance::with_bounds(schedule, users, c, w)
    }

    pub fn from_instance<R: Scalar>(instance: &DraccInstance<R>, policy_family: Option<PolicyFamilySpec>) -> Self {
        DraccFile {
            horizon: instance.horizon(),
            resources: instance.schedule().resources().to_vec(),
            users: instance.users.iter().map(|u| UserFile::from_valuation(u)).collect(),
            policy_family,
            capacity_bound: Some(instance.capacity_bound),
            width_bound: Some(instance.width_bound),
        }
    }
}

/// Embed a schedule and a valuation stream as a Dd-MDP.
pub fn to_ddmdp<R: Scalar>(schedule: ResourceSchedule, users: Vec<Valuation<R>>) -> Result<DraccInstance<R>> {
    DraccInstance::new(schedule, users)
}
