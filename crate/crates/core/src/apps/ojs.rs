use serde::{Deserialize, Serialize};

use crate::dracc::{DemandResult, DraccInstance, PriceVector, Resource, ResourceId, ResourceSchedule, Valuation};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A job asking for `l` contiguous slots inside `[a, d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Job<R> {
    pub a: usize,
    pub d: usize,
    pub l: usize,
    pub v: R,
}

impl<R> Job<R> {
    /// Start slots of the candidate intervals.
    pub fn starts(&self) -> std::ops::RangeInclusive<usize> {
        self.a..=(self.d + 1 - self.l)
    }

    pub fn interval(&self, start: usize) -> Vec<ResourceId> {
        (start..start + self.l).map(|i| i as ResourceId).collect()
    }
}

/// Jobs arrive in order of their arrival slot; job `t` is offered the window
/// `[a_t, a_t + W - 1]` (cut at `N`).
#[derive(Clone, Debug, PartialEq)]
pub struct OjsInstance<R> {
    slots: usize,
    bandwidth: Vec<u32>,
    jobs: Vec<Job<R>>,
    width: usize,
}

impl<R: Scalar> OjsInstance<R> {
    /// `width` defaults to the longest job span.
    pub fn new(slots: usize, bandwidth: Vec<u32>, jobs: Vec<Job<R>>, width: Option<usize>) -> Result<Self> {
        if bandwidth.len() != slots {
            return Err(Error::LengthMismatch(bandwidth.len(), slots));
        }
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("no jobs".into()));
        }
        for (t, j) in jobs.iter().enumerate() {
            if !(1 <= j.a && j.a <= j.d && j.d <= slots && 1 <= j.l && j.l <= j.d - j.a + 1) {
                return Err(Error::InvalidInstance(format!("job {} has an invalid window", t + 1)));
            }
            if j.v < R::zero() || j.v >= R::one() {
                return Err(Error::InvalidInstance(format!("job {} value outside [0, 1)", t + 1)));
            }
            if t > 0 && j.a < jobs[t - 1].a {
                return Err(Error::InvalidInstance(format!("job {} arrives before its predecessor", t + 1)));
            }
        }
        let span = jobs.iter().map(|j| j.d - j.a + 1).max().unwrap_or(1);
        let width = width.unwrap_or(span);
        if width < span {
            return Err(Error::InvalidInstance(format!("window {width} shorter than a job span {span}")));
        }
        Ok(OjsInstance { slots, bandwidth, jobs, width })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn bandwidth(&self, slot: usize) -> u32 {
        self.bandwidth[slot - 1]
    }

    pub fn jobs(&self) -> &[Job<R>] {
        &self.jobs
    }

    pub fn job(&self, t: usize) -> &Job<R> {
        &self.jobs[t - 1]
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Window `A_t` as slot ids.
    pub fn window(&self, t: usize) -> Vec<ResourceId> {
        let a = self.jobs[t - 1].a;
        (a..=(a + self.width - 1).min(self.slots)).map(|i| i as ResourceId).collect()
    }

    pub fn capacity_bound(&self) -> u32 {
        self.bandwidth.iter().copied().max().unwrap_or(0)
    }
}

/// Cheapest candidate interval, earliest start on ties, bought when its price
/// does not exceed the job's value.
pub fn ojs_demand<R: Scalar>(job: &Job<R>, prices: &PriceVector<R>) -> DemandResult<R> {
    let mut best: Option<(usize, R)> = None;
    for s in job.starts() {
        let interval = job.interval(s);
        if interval.iter().any(|i| prices.get(*i).is_none()) {
            continue;
        }
        let cost = prices.sum_over(&interval);
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((s, cost));
        }
    }
    match best {
        Some((s, cost)) if cost <= job.v => DemandResult { chosen: job.interval(s), payment: cost },
        _ => DemandResult::empty(),
    }
}

/// Slots become resources alive while they lie in some job's window; each job
/// values exactly its candidate intervals.
pub fn ojs_to_dracc<R: Scalar>(instance: &OjsInstance<R>) -> Result<DraccInstance<R>> {
    let horizon = instance.jobs.len();
    let mut span: Vec<Option<(usize, usize)>> = vec![None; instance.slots + 1];
    for t in 1..=horizon {
        for i in instance.window(t) {
            let e = &mut span[i as usize];
            *e = Some(match *e {
                None => (t, t),
                Some((ta, _)) => (ta, t),
            });
        }
    }
    let resources = span
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|(ta, te)| Resource { id: i as ResourceId, ta, te, c: instance.bandwidth(i) }))
        .collect();
    let schedule = ResourceSchedule::new(horizon, resources)?;
    let users = instance
        .jobs
        .iter()
        .map(|j| Valuation::explicit(j.starts().map(|s| (j.interval(s), j.v.clone())).collect()))
        .collect::<Result<Vec<_>>>()?;
    let c = schedule.max_capacity().max(instance.capacity_bound());
    DraccInstance::with_bounds(schedule, users, c, instance.width)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobFile {
    pub a: usize,
    pub d: usize,
    pub l: usize,
    pub v: f64,
}

/// JSON form: `{"N": .., "c": [..], "jobs": [{"a","d","l","v"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OjsFile {
    #[serde(rename = "N")]
    pub slots: usize,
    pub c: Vec<u32>,
    pub jobs: Vec<JobFile>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
}

impl OjsFile {
    pub fn to_instance<R: Scalar>(&self) -> Result<OjsInstance<R>> {
        let jobs = self.jobs.iter().map(|j| Job { a: j.a, d: j.d, l: j.l, v: R::from_f64_lossy(j.v) }).collect();
        OjsInstance::new(self.slots, self.c.clone(), jobs, self.width)
    }

    pub fn from_instance<R: Scalar>(instance: &OjsInstance<R>) -> Self {
        OjsFile {
            slots: instance.slots,
            c: instance.bandwidth.clone(),
            jobs: instance.jobs.iter().map(|j| JobFile { a: j.a, d: j.d, l: j.l, v: j.v.to_f64_lossy() }).collect(),
            width: Some(instance.width),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddmdp::DdMdp;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn cheapest_interval_is_bought() {
        let job = Job { a: 1, d: 4, l: 2, v: r(1, 2) };
        let p = PriceVector(vec![(1, r(2, 10)), (2, r(5, 10)), (3, r(1, 10)), (4, r(3, 10))]);
        let d = ojs_demand(&job, &p);
        assert_eq!(d.chosen, vec![3, 4]);
        assert_eq!(d.payment, r(2, 5));
    }

    #[test]
    fn worthless_job_buys_nothing() {
        let job = Job { a: 1, d: 2, l: 1, v: r(0, 1) };
        let p = PriceVector(vec![(1, r(1, 10)), (2, r(1, 5))]);
        assert_eq!(ojs_demand(&job, &p), DemandResult::empty());
    }

    #[test]
    fn ties_go_to_the_earliest_start() {
        let job = Job { a: 1, d: 3, l: 1, v: r(9, 10) };
        let p = PriceVector(vec![(1, r(1, 2)), (2, r(1, 4)), (3, r(1, 4))]);
        assert_eq!(ojs_demand(&job, &p).chosen, vec![2]);
    }

    #[test]
    fn reduced_instance_agrees_on_the_worked_example() {
        let inst = OjsInstance::new(4, vec![1; 4], vec![Job { a: 1, d: 4, l: 2, v: r(1, 2) }], None).unwrap();
        let dr = ojs_to_dracc(&inst).unwrap();
        let p = PriceVector(vec![(1, r(2, 10)), (2, r(5, 10)), (3, r(1, 10)), (4, r(3, 10))]);
        assert_eq!(dr.user(1).demand(&p).unwrap(), ojs_demand(inst.job(1), &p));
        assert_eq!(dr.horizon(), 1);
    }

    #[test]
    fn single_interval_job_is_single_minded() {
        let inst = OjsInstance::new(3, vec![2; 3], vec![Job { a: 2, d: 3, l: 2, v: r(1, 2) }], None).unwrap();
        let dr = ojs_to_dracc(&inst).unwrap();
        match dr.user(1) {
            Valuation::Explicit { table } => assert_eq!(table, &vec![(vec![2, 3], r(1, 2))]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn slot_activity_is_first_in_first_out() {
        let jobs = vec![
            Job { a: 1, d: 2, l: 1, v: 0.5 },
            Job { a: 2, d: 3, l: 2, v: 0.5 },
            Job { a: 4, d: 5, l: 1, v: 0.5 },
        ];
        let inst = OjsInstance::new(5, vec![1; 5], jobs, None).unwrap();
        let dr = ojs_to_dracc(&inst).unwrap();
        assert_eq!(dr.schedule().fifo_violation(), None);
    }
}
