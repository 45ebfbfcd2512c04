use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CsOracle, ExperimentConfig, InstanceSource, LearnerSpec, PoliciesSpec, TableFamily};
use super::fit::{CurvePoint, RegretCurve};
use crate::adversaries::{random_dracc, random_mdbg, random_ojs};
use crate::apps::{mdbg_to_dracc, ojs_to_dracc, MdbgFile, OjsFile};
use crate::chasing::{ChasabilityBound, ExploringChaser, OjsChaser, PolicyFollower};
use crate::ddmdp::{run_learner, DdMdp, ExplicitDdMdp, ExplicitFile, FixedPolicyLearner, PolicyCollection, TrialReport};
use crate::dracc::{make_policy_family, DraccFile, DraccInstance, PolicyFamilySpec, PricingPolicies};
use crate::error::{Error, Result};
use crate::meta::{cs_run, flp_run, lbpp_run, CsConfig, FlpConfig};
use crate::rng::derive_seed;
use crate::stats;

pub const TRIAL_COLUMNS: [&str; 9] =
    ["trial_id", "seed", "T", "learner", "regret", "external_regret", "switches", "episodes", "wall_ms"];
pub const CURVE_COLUMNS: [&str; 4] = ["T", "mean", "stderr", "n"];

/// One row of `trials.csv`. Regrets are in native units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_id: usize,
    pub seed: u64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub learner: String,
    pub regret: f64,
    pub external_regret: f64,
    pub switches: usize,
    pub episodes: usize,
    pub wall_ms: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<TrialRow>,
    pub curve: RegretCurve,
    /// Invariant violations seen during the runs, as `trial id: message`.
    pub failures: Vec<String>,
    /// Per-round CSVs by trial id, when requested.
    pub per_round: Vec<(usize, String)>,
    pub name: String,
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    trials: usize,
    slope: Option<f64>,
    intercept: Option<f64>,
    ci: Option<(f64, f64)>,
    fit_error: Option<&'a str>,
    invariant_failures: usize,
    failures: &'a [String],
    points: &'a [CurvePoint],
}

impl RunOutcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(TRIAL_COLUMNS)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        finish(w)
    }

    pub fn curve_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.curve.points.is_empty() {
            w.write_record(CURVE_COLUMNS)?;
        }
        for p in &self.curve.points {
            w.serialize(p)?;
        }
        finish(w)
    }

    pub fn summary_json(&self) -> Result<String> {
        let fit = self.curve.fit.as_ref();
        let s = Summary {
            name: &self.name,
            trials: self.rows.len(),
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            ci: fit.map(|f| f.ci),
            fit_error: self.curve.fit_error.as_deref(),
            invariant_failures: self.failures.len(),
            failures: &self.failures,
            points: &self.curve.points,
        };
        Ok(serde_json::to_string_pretty(&s)? + "\n")
    }

    /// Write `trials.csv`, `curve.csv`, `summary.json` and per-round files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trials.csv"), self.trials_csv()?)?;
        std::fs::write(dir.join("curve.csv"), self.curve_csv()?)?;
        std::fs::write(dir.join("summary.json"), self.summary_json()?)?;
        if !self.per_round.is_empty() {
            let rounds = dir.join("rounds");
            std::fs::create_dir_all(&rounds)?;
            for (id, text) in &self.per_round {
                std::fs::write(rounds.join(format!("trial_{id}.csv")), text)?;
            }
        }
        Ok(())
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Worker count: `CHASE_LAB_THREADS` if set and positive, else rayon's default.
pub fn thread_count() -> usize {
    std::env::var("CHASE_LAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// An instance read from disk.
pub enum Loaded {
    Pricing(DraccInstance<f64>, Option<PolicyFamilySpec>),
    Table(ExplicitDdMdp<f64>),
}

/// Read a file-backed source; `None` for generator sources.
pub fn load_file(source: &InstanceSource) -> Result<Option<Loaded>> {
    let read = |p: &Path| -> Result<String> { Ok(std::fs::read_to_string(p)?) };
    Ok(Some(match source {
        InstanceSource::DraccFile { path } => {
            let f: DraccFile = serde_json::from_str(&read(path)?)?;
            let family = f.policy_family.clone();
            Loaded::Pricing(f.to_instance()?, family)
        }
        InstanceSource::OjsFile { path } => {
            let f: OjsFile = serde_json::from_str(&read(path)?)?;
            Loaded::Pricing(ojs_to_dracc(&f.to_instance::<f64>()?)?, None)
        }
        InstanceSource::MdbgFile { path } => {
            let f: MdbgFile = serde_json::from_str(&read(path)?)?;
            Loaded::Pricing(mdbg_to_dracc(&f.to_instance::<f64>()?)?, None)
        }
        InstanceSource::ExplicitFile { path } => {
            let f: ExplicitFile = serde_json::from_str(&read(path)?)?;
            Loaded::Table(ExplicitDdMdp::from_file(&f)?)
        }
        _ => return Ok(None),
    }))
}

fn generate(source: &InstanceSource, horizon: usize, seed: u64) -> Result<DraccInstance<f64>> {
    match source {
        InstanceSource::Dracc { params } => {
            let mut p = params.clone();
            p.horizon = horizon;
            random_dracc(&p, seed)
        }
        InstanceSource::Ojs { params } => {
            let mut p = params.clone();
            p.jobs = horizon;
            ojs_to_dracc(&random_ojs::<f64>(&p, seed)?)
        }
        InstanceSource::Mdbg { params } => {
            let mut p = params.clone();
            p.right = horizon;
            mdbg_to_dracc(&random_mdbg::<f64>(&p, seed)?)
        }
        _ => unreachable!("file sources are loaded once"),
    }
}

/// Regret, switches and invariant status of one finished trial.
fn summarize<S: std::fmt::Debug, A: std::fmt::Debug>(
    report: &TrialReport<S, A, f64>,
    trial_id: usize,
    seed: u64,
    wall_ms: u64,
    per_round: bool,
) -> Result<(TrialRow, Option<String>, Option<String>)> {
    let row = TrialRow {
        trial_id,
        seed,
        horizon: report.horizon(),
        learner: report.learner.clone(),
        regret: report.native_policy_regret(),
        external_regret: report.native_external_regret(),
        switches: report.switch_count,
        episodes: report.episodes,
        wall_ms,
    };
    let failure = report.check_invariants().err().map(|e| format!("trial {trial_id}: {e}"));
    let csv = if per_round { Some(report.per_round_csv()?) } else { None };
    Ok((row, failure, csv))
}

fn pricing_trial(
    learner: &LearnerSpec,
    inst: &DraccInstance<f64>,
    policies: &PricingPolicies<f64>,
    seed: u64,
) -> Result<TrialReport<crate::dracc::Inventory, crate::dracc::PriceVector<f64>, f64>> {
    let (c, w, horizon, cw) = (inst.capacity_bound(), inst.width_bound(), inst.horizon(), inst.cw());
    let cs = |sigma: f64| CsConfig { policies: policies.clone(), sigma };
    match learner {
        LearnerSpec::Lbpp { oracle } => lbpp_run(inst, policies, *oracle, seed),
        LearnerSpec::Cs { oracle, sigma } => match oracle {
            CsOracle::Kdemand => {
                let s = sigma.unwrap_or_else(|| ChasabilityBound::kdemand(c, w, horizon).sigma);
                cs_run(inst, cs(s), ExploringChaser::kdemand(cw, horizon), seed)
            }
            CsOracle::General => {
                let s = sigma.unwrap_or_else(|| ChasabilityBound::general(c, w, horizon).sigma);
                cs_run(inst, cs(s), ExploringChaser::general(cw, horizon), seed)
            }
            CsOracle::Ojs => {
                let s = sigma.unwrap_or_else(|| ChasabilityBound::ojs(c, w).sigma);
                cs_run(inst, cs(s), OjsChaser::new(inst.schedule().clone())?, seed)
            }
            CsOracle::Follower => cs_run(inst, cs(sigma.unwrap_or(1.0)), PolicyFollower::new(), seed),
        },
        LearnerSpec::Flp { tau, mbp } => {
            let cfg = FlpConfig { policies: policies.clone(), tau: *tau, mbp: *mbp, sigma: Some(ChasabilityBound::ojs(c, w).sigma) };
            flp_run(inst, cfg, OjsChaser::new(inst.schedule().clone())?, seed)
        }
        LearnerSpec::FixedPolicy { policy } => fixed(policies, policy, inst, seed),
        LearnerSpec::OlscOnly => cs_run(inst, cs(1.0), PolicyFollower::new(), seed),
    }
}

fn fixed<M: DdMdp>(
    policies: &PolicyCollection<M::State, M::Action>,
    id: &str,
    inst: &M,
    seed: u64,
) -> Result<TrialReport<M::State, M::Action, M::Scalar>> {
    let k = policies.position(id).ok_or_else(|| Error::UnknownLabel(id.to_string()))?;
    run_learner(inst, &mut FixedPolicyLearner::new(policies.get(k).clone()), policies, seed)
}

fn table_trial(
    learner: &LearnerSpec,
    inst: &ExplicitDdMdp<f64>,
    policies: &PolicyCollection<usize, usize>,
    seed: u64,
) -> Result<TrialReport<usize, usize, f64>> {
    match learner {
        LearnerSpec::Cs { sigma, .. } => {
            cs_run(inst, CsConfig { policies: policies.clone(), sigma: sigma.unwrap_or(1.0) }, PolicyFollower::new(), seed)
        }
        LearnerSpec::OlscOnly => cs_run(inst, CsConfig { policies: policies.clone(), sigma: 1.0 }, PolicyFollower::new(), seed),
        LearnerSpec::FixedPolicy { policy } => fixed(policies, policy, inst, seed),
        _ => Err(Error::InvalidParams("learner not available on explicit instances".into())),
    }
}

fn pricing_family(cfg: &ExperimentConfig, from_file: Option<&PolicyFamilySpec>) -> Result<PolicyFamilySpec> {
    match (&cfg.policies, from_file) {
        (Some(PoliciesSpec::Pricing(spec)), _) => Ok(spec.clone()),
        (None, Some(spec)) => Ok(spec.clone()),
        _ => Err(Error::EmptySpec),
    }
}

/// Run every `(horizon, seed)` trial of `cfg` and aggregate the regret curve.
///
/// Instance seed `k` is shared across horizons; learner seeds are derived from
/// `(master_seed, k)`. Results do not depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let loaded = load_file(&cfg.instance)?;
    let horizons: Vec<usize> = match &loaded {
        None => cfg.horizons.clone(),
        Some(l) => {
            let t = match l {
                Loaded::Pricing(i, _) => i.horizon(),
                Loaded::Table(i) => i.horizon(),
            };
            if !cfg.horizons.is_empty() && cfg.horizons != [t] {
                return Err(Error::InvalidParams(format!("file instance has horizon {t}; set horizons to [{t}] or omit it")));
            }
            vec![t]
        }
    };
    let tasks: Vec<(usize, usize, usize)> = horizons
        .iter()
        .enumerate()
        .flat_map(|(h, &t)| (0..cfg.seeds).map(move |k| (h * cfg.seeds + k, t, k)))
        .collect();
    let run_one = |&(trial_id, horizon, k): &(usize, usize, usize)| -> Result<(TrialRow, Option<String>, Option<String>)> {
        let seed = derive_seed(cfg.master_seed, k as u64, "learner");
        let clock = Instant::now();
        let wall = |c: Instant| if cfg.record_wall_time { c.elapsed().as_millis() as u64 } else { 0 };
        match &loaded {
            Some(Loaded::Table(inst)) => {
                let policies = match cfg.policies {
                    Some(PoliciesSpec::Table(TableFamily::AllStationary)) => inst.all_policies(),
                    _ => PolicyCollection::new((0..inst.num_actions()).map(|x| inst.constant_policy(x)).collect())?,
                };
                let report = table_trial(&cfg.learner, inst, &policies, seed)?;
                summarize(&report, trial_id, seed, wall(clock), cfg.per_round)
            }
            Some(Loaded::Pricing(inst, family)) => {
                let policies = make_policy_family(&pricing_family(cfg, family.as_ref())?, inst.schedule())?;
                let report = pricing_trial(&cfg.learner, inst, &policies, seed)?;
                summarize(&report, trial_id, seed, wall(clock), cfg.per_round)
            }
            None => {
                let inst = generate(&cfg.instance, horizon, derive_seed(cfg.master_seed, k as u64, "instance"))?;
                let policies = make_policy_family(&pricing_family(cfg, None)?, inst.schedule())?;
                let report = pricing_trial(&cfg.learner, &inst, &policies, seed)?;
                summarize(&report, trial_id, seed, wall(clock), cfg.per_round)
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| tasks.par_iter().map(run_one).collect::<Result<Vec<_>>>())?;

    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut per_round = Vec::new();
    for (row, failure, csv) in results {
        if let Some(f) = failure {
            log::error!("{f}");
            failures.push(f);
        }
        if let Some(text) = csv {
            per_round.push((row.trial_id, text));
        }
        rows.push(row);
    }
    let points = horizons
        .iter()
        .map(|&t| {
            let values: Vec<f64> = rows.iter().filter(|r| r.horizon == t).map(|r| r.regret).collect();
            let (mean, stderr) = stats::mean_stderr(&values);
            CurvePoint { horizon: t, mean, stderr, n: values.len() }
        })
        .collect();
    Ok(RunOutcome { rows, curve: RegretCurve::new(points), failures, per_round, name: cfg.name.clone() })
}
