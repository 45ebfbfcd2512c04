use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::apps::{Job, MdbgInstance, MdbgLeft, MdbgRight, OjsInstance};
use crate::dracc::{DraccInstance, Resource, ResourceId, ResourceSchedule, Valuation};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};
use crate::scalar::Scalar;

/// Draws are rounded to multiples of `1 / QUANTUM` so that exact scalars stay small.
const QUANTUM: i64 = 1 << 20;

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

/// Piecewise-constant shift of the weight distribution: the horizon is cut into
/// `pieces` equal blocks and odd blocks are shifted by `shift`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub pieces: usize,
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ValuationGen {
    /// `k` uniform in the range, each active resource weighted with probability `density`.
    Kdemand {
        k: [usize; 2],
        weight: [f64; 2],
        #[serde(default = "one_f64")]
        density: f64,
    },
    UnitDemand {
        weight: [f64; 2],
    },
    /// A random nonempty bundle of at most `max_bundle` active resources.
    SingleMinded {
        value: [f64; 2],
        max_bundle: usize,
    },
    /// Independent values on each nonempty subset (listed with probability `density`).
    Explicit {
        value: [f64; 2],
        #[serde(default = "one_f64")]
        density: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DraccGenParams {
    pub horizon: usize,
    /// New resources per round.
    #[serde(default = "one_usize")]
    pub arrivals: usize,
    pub capacity: [u32; 2],
    pub lifetime: [usize; 2],
    pub valuation: ValuationGen,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftParams>,
    /// Declared `C`; defaults to the realized maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_bound: Option<u32>,
    /// Declared `W`; defaults to the realized maximum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width_bound: Option<usize>,
}

fn check_range<T: PartialOrd + std::fmt::Debug>(name: &str, r: &[T; 2]) -> Result<()> {
    if r[0] > r[1] {
        return Err(Error::InvalidParams(format!("{name} range {r:?} is empty")));
    }
    Ok(())
}

fn check_unit(name: &str, r: &[f64; 2]) -> Result<()> {
    check_range(name, r)?;
    if !(r[0] >= 0.0 && r[1] <= 1.0) {
        return Err(Error::InvalidParams(format!("{name} range {r:?} outside [0, 1]")));
    }
    Ok(())
}

fn draw_usize(rng: &mut StreamRng, r: [usize; 2]) -> usize {
    rng.random_range(r[0]..=r[1])
}

/// Uniform draw on `[lo, hi)`, shifted, clamped below 1 and quantized.
fn draw_value<R: Scalar>(rng: &mut StreamRng, r: [f64; 2], shift: f64) -> R {
    let x = if r[1] > r[0] { rng.random_range(r[0]..r[1]) } else { r[0] };
    let q = ((x + shift).clamp(0.0, 1.0) * QUANTUM as f64).floor() as i64;
    R::ratio(q.min(QUANTUM - 1), QUANTUM)
}

fn drift_at(drift: &Option<DriftParams>, t: usize, horizon: usize) -> f64 {
    match drift {
        Some(d) if d.pieces > 0 => {
            let block = ((t - 1) * d.pieces) / horizon.max(1);
            if block % 2 == 1 {
                d.shift
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Random pricing instance; resources get ids in arrival order.
pub fn random_dracc<R: Scalar>(params: &DraccGenParams, seed: u64) -> Result<DraccInstance<R>> {
    let p = params;
    if p.horizon == 0 || p.lifetime[0] == 0 {
        return Err(Error::InvalidParams("horizon and lifetimes must be positive".into()));
    }
    check_range("capacity", &p.capacity)?;
    check_range("lifetime", &p.lifetime)?;
    match &p.valuation {
        ValuationGen::Kdemand { k, weight, density } => {
            check_range("k", k)?;
            check_unit("weight", weight)?;
            if k[0] == 0 || !(0.0..=1.0).contains(density) {
                return Err(Error::InvalidParams("k must be positive and density in [0, 1]".into()));
            }
        }
        ValuationGen::UnitDemand { weight } => check_unit("weight", weight)?,
        ValuationGen::SingleMinded { value, max_bundle } => {
            check_unit("value", value)?;
            if *max_bundle == 0 {
                return Err(Error::InvalidParams("max_bundle must be positive".into()));
            }
        }
        ValuationGen::Explicit { value, .. } => check_unit("value", value)?,
    }
    let mut rng = substream(seed, 0, "random_dracc");
    let mut resources = Vec::new();
    let mut id: ResourceId = 1;
    for t in 1..=p.horizon {
        for _ in 0..p.arrivals {
            let life = draw_usize(&mut rng, p.lifetime);
            let c = rng.random_range(p.capacity[0]..=p.capacity[1]);
            resources.push(Resource { id, ta: t, te: (t + life - 1).min(p.horizon), c });
            id += 1;
        }
    }
    let schedule = ResourceSchedule::new(p.horizon, resources)?;
    let mut users = Vec::with_capacity(p.horizon);
    for t in 1..=p.horizon {
        let active: Vec<ResourceId> = schedule.active(t).iter().map(|e| e.0).collect();
        let shift = drift_at(&p.drift, t, p.horizon);
        let v = match &p.valuation {
            ValuationGen::Kdemand { k, weight, density } => {
                let k = draw_usize(&mut rng, *k);
                let mut ws = Vec::new();
                for &i in &active {
                    if rng.random::<f64>() < *density {
                        ws.push((i, draw_value::<R>(&mut rng, *weight, shift)));
                    }
                }
                Valuation::kdemand(k, ws)?
            }
            ValuationGen::UnitDemand { weight } => {
                Valuation::unit_demand(active.iter().map(|&i| (i, draw_value::<R>(&mut rng, *weight, shift))).collect())?
            }
            ValuationGen::SingleMinded { value, max_bundle } => {
                let mut bundle: Vec<ResourceId> = active.iter().copied().filter(|_| rng.random::<bool>()).collect();
                if bundle.is_empty() {
                    if let Some(&i) = active.first() {
                        bundle.push(i);
                    }
                }
                bundle.truncate(*max_bundle);
                let val = draw_value::<R>(&mut rng, *value, shift);
                if bundle.is_empty() {
                    Valuation::kdemand(1, Vec::new())?
                } else {
                    Valuation::single_minded(bundle, val)?
                }
            }
            ValuationGen::Explicit { value, density } => {
                if active.len() > 12 {
                    return Err(Error::TooLargeExplicit(active.len()));
                }
                let mut table = Vec::new();
                for mask in 1u32..(1 << active.len()) {
                    if rng.random::<f64>() < *density {
                        let set = (0..active.len()).filter(|b| mask >> b & 1 == 1).map(|b| active[b]).collect();
                        table.push((set, draw_value::<R>(&mut rng, *value, shift)));
                    }
                }
                Valuation::explicit(table)?
            }
        };
        users.push(v);
    }
    let c = p.capacity_bound.unwrap_or_else(|| schedule.max_capacity());
    let w = p.width_bound.unwrap_or_else(|| schedule.max_width());
    DraccInstance::with_bounds(schedule, users, c, w)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OjsGenParams {
    pub jobs: usize,
    /// Jobs sharing each arrival slot.
    #[serde(default = "one_usize")]
    pub jobs_per_slot: usize,
    pub bandwidth: [u32; 2],
    /// Range of `d - a + 1`.
    pub span: [usize; 2],
    pub length: [usize; 2],
    pub value: [f64; 2],
}

/// Random scheduling instance with arrival slots advancing every `jobs_per_slot` jobs.
pub fn random_ojs<R: Scalar>(params: &OjsGenParams, seed: u64) -> Result<OjsInstance<R>> {
    let p = params;
    if p.jobs == 0 || p.jobs_per_slot == 0 || p.span[0] == 0 || p.length[0] == 0 {
        return Err(Error::InvalidParams("jobs, jobs_per_slot, spans and lengths must be positive".into()));
    }
    check_range("bandwidth", &p.bandwidth)?;
    check_range("span", &p.span)?;
    check_range("length", &p.length)?;
    check_unit("value", &p.value)?;
    let mut rng = substream(seed, 0, "random_ojs");
    let slots = p.jobs.div_ceil(p.jobs_per_slot) + p.span[1] - 1;
    let bandwidth = (0..slots).map(|_| rng.random_range(p.bandwidth[0]..=p.bandwidth[1])).collect();
    let mut jobs = Vec::with_capacity(p.jobs);
    for t in 0..p.jobs {
        let a = 1 + t / p.jobs_per_slot;
        let span = draw_usize(&mut rng, p.span);
        let d = (a + span - 1).min(slots);
        let l = draw_usize(&mut rng, [p.length[0].min(d - a + 1), p.length[1].min(d - a + 1)]);
        jobs.push(Job { a, d, l, v: draw_value::<R>(&mut rng, p.value, 0.0) });
    }
    OjsInstance::new(slots, bandwidth, jobs, Some(p.span[1]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdbgGenParams {
    /// Number of right-side arrivals.
    pub right: usize,
    /// New left nodes per right arrival.
    #[serde(default = "one_usize")]
    pub left_per_round: usize,
    pub lifetime: [usize; 2],
    pub weight: [f64; 2],
    #[serde(default = "one_f64")]
    pub density: f64,
}

pub fn random_mdbg<R: Scalar>(params: &MdbgGenParams, seed: u64) -> Result<MdbgInstance<R>> {
    let p = params;
    if p.right == 0 || p.lifetime[0] == 0 {
        return Err(Error::InvalidParams("right count and lifetimes must be positive".into()));
    }
    check_range("lifetime", &p.lifetime)?;
    check_unit("weight", &p.weight)?;
    let mut rng = substream(seed, 0, "random_mdbg");
    let mut left = Vec::new();
    let mut id: ResourceId = 1;
    for t in 1..=p.right {
        for _ in 0..p.left_per_round {
            let life = draw_usize(&mut rng, p.lifetime);
            left.push(MdbgLeft { id, ta: t, te: (t + life - 1).min(p.right) });
            id += 1;
        }
    }
    let mut right = Vec::with_capacity(p.right);
    for t in 1..=p.right {
        let mut weights = Vec::new();
        for l in left.iter().filter(|l| l.ta <= t && t <= l.te) {
            if rng.random::<f64>() < p.density {
                weights.push((l.id, draw_value::<R>(&mut rng, p.weight, 0.0)));
            }
        }
        right.push(MdbgRight { id: t as u32, weights });
    }
    MdbgInstance::new(left, right)
}
