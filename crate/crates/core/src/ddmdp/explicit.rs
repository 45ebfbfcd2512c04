use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{DdMdp, History, Policy, PolicyCollection, RoundDynamics, Transition};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense transition and reward tables of one round, indexed `[state][action]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitTables<R> {
    pub next: Vec<Vec<usize>>,
    pub reward: Vec<Vec<R>>,
}

/// Shared handle to one round's tables.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitRound<R>(pub Arc<ExplicitTables<R>>);

impl<R> Transition<usize, usize> for ExplicitRound<R> {
    fn next_state(&self, s: &usize, x: &usize) -> usize {
        self.0.next[*s][*x]
    }
}

impl<R: Scalar> RoundDynamics<usize, usize, R> for ExplicitRound<R> {
    fn reward(&self, s: &usize, x: &usize) -> R {
        self.0.reward[*s][*x].clone()
    }
}

/// Finite Dd-MDP with enumerated states and actions.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitDdMdp<R> {
    states: Vec<String>,
    actions: Vec<String>,
    feasible: Vec<Vec<usize>>,
    initial: usize,
    rounds: Vec<ExplicitRound<R>>,
}

impl<R: Scalar> ExplicitDdMdp<R> {
    /// `feasible[s]` lists the actions allowed in state `s`.
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        feasible: Vec<Vec<usize>>,
        initial: usize,
        rounds: Vec<ExplicitRound<R>>,
    ) -> Result<Self> {
        let (ns, na) = (states.len(), actions.len());
        if ns == 0 || na == 0 {
            return Err(Error::InvalidInstance("state and action sets must be nonempty".into()));
        }
        if initial >= ns || feasible.len() != ns {
            return Err(Error::InvalidInstance("initial state or feasibility table out of range".into()));
        }
        let mut feasible = feasible;
        for (s, acts) in feasible.iter_mut().enumerate() {
            acts.sort_unstable();
            acts.dedup();
            if acts.is_empty() || acts.iter().any(|&x| x >= na) {
                return Err(Error::InvalidInstance(format!("state {} has an empty or invalid action set", states[s])));
            }
        }
        for (t, round) in rounds.iter().enumerate() {
            let tab = &round.0;
            if tab.next.len() != ns || tab.reward.len() != ns {
                return Err(Error::InvalidInstance(format!("round {} tables have wrong shape", t + 1)));
            }
            for s in 0..ns {
                if tab.next[s].len() != na || tab.reward[s].len() != na {
                    return Err(Error::InvalidInstance(format!("round {} tables have wrong shape", t + 1)));
                }
                for &x in &feasible[s] {
                    let r = &tab.reward[s][x];
                    if tab.next[s][x] >= ns || *r < R::zero() || *r > R::one() {
                        return Err(Error::InvalidInstance(format!(
                            "round {}: entry ({}, {}) out of range",
                            t + 1,
                            states[s],
                            actions[x]
                        )));
                    }
                }
            }
        }
        Ok(ExplicitDdMdp { states, actions, feasible, initial, rounds })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn state_label(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn action_label(&self, x: usize) -> &str {
        &self.actions[x]
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        self.actions.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn feasible_actions(&self, s: usize) -> &[usize] {
        &self.feasible[s]
    }

    pub fn tables(&self, t: usize) -> &ExplicitTables<R> {
        &self.rounds[t - 1].0
    }

    /// Policy that plays `action` everywhere (must be feasible everywhere).
    pub fn constant_policy(&self, action: usize) -> Policy<usize, usize> {
        Policy::new(format!("const:{}", self.actions[action]), move |_| action)
    }

    /// Every deterministic stationary policy, in mixed-radix order over states.
    pub fn all_policies(&self) -> PolicyCollection<usize, usize> {
        let radices: Vec<usize> = self.feasible.iter().map(Vec::len).collect();
        let total: usize = radices.iter().product();
        let mut out = Vec::with_capacity(total);
        for code in 0..total {
            let mut rem = code;
            let table: Vec<usize> = radices
                .iter()
                .enumerate()
                .map(|(s, &r)| {
                    let x = self.feasible[s][rem % r];
                    rem /= r;
                    x
                })
                .collect();
            let id = table.iter().map(|&x| self.actions[x].as_str()).collect::<Vec<_>>().join(",");
            out.push(Policy::new(format!("[{id}]"), move |s: &usize| table[*s]));
        }
        PolicyCollection::new(out).expect("policy table labels are distinct")
    }

    /// Parse the JSON exchange format.
    pub fn from_file(file: &ExplicitFile) -> Result<Self> {
        let states = file.states.clone();
        let actions = file.actions.clone();
        let si = |l: &str| states.iter().position(|x| x == l).ok_or_else(|| Error::UnknownLabel(l.into()));
        let ai = |l: &str| actions.iter().position(|x| x == l).ok_or_else(|| Error::UnknownLabel(l.into()));
        let mut feasible = vec![Vec::new(); states.len()];
        for (s, acts) in &file.feasible {
            let s = si(s)?;
            for a in acts {
                feasible[s].push(ai(a)?);
            }
        }
        if file.rounds.len() != file.horizon {
            return Err(Error::InvalidInstance(format!(
                "T = {} but {} rounds are listed",
                file.horizon,
                file.rounds.len()
            )));
        }
        let mut rounds = Vec::with_capacity(file.horizon);
        for rf in &file.rounds {
            let mut next: Vec<Vec<usize>> = (0..states.len()).map(|s| vec![s; actions.len()]).collect();
            let mut reward = vec![vec![R::zero(); actions.len()]; states.len()];
            for (s, row) in &rf.g {
                let s = si(s)?;
                for (a, to) in row {
                    next[s][ai(a)?] = si(to)?;
                }
            }
            for (s, row) in &rf.f {
                let s = si(s)?;
                for (a, v) in row {
                    reward[s][ai(a)?] = R::from_f64_lossy(*v);
                }
            }
            rounds.push(ExplicitRound(Arc::new(ExplicitTables { next, reward })));
        }
        let initial = si(&file.initial)?;
        ExplicitDdMdp::new(states, actions, feasible, initial, rounds)
    }

    pub fn to_file(&self) -> ExplicitFile {
        let mut feasible = BTreeMap::new();
        for (s, acts) in self.feasible.iter().enumerate() {
            feasible.insert(self.states[s].clone(), acts.iter().map(|&x| self.actions[x].clone()).collect());
        }
        let rounds = self
            .rounds
            .iter()
            .map(|r| {
                let mut g = BTreeMap::new();
                let mut f = BTreeMap::new();
                for (s, acts) in self.feasible.iter().enumerate() {
                    let mut grow = BTreeMap::new();
                    let mut frow = BTreeMap::new();
                    for &x in acts {
                        grow.insert(self.actions[x].clone(), self.states[r.0.next[s][x]].clone());
                        frow.insert(self.actions[x].clone(), r.0.reward[s][x].to_f64_lossy());
                    }
                    g.insert(self.states[s].clone(), grow);
                    f.insert(self.states[s].clone(), frow);
                }
                ExplicitRoundFile { g, f }
            })
            .collect();
        ExplicitFile {
            horizon: self.rounds.len(),
            states: self.states.clone(),
            actions: self.actions.clone(),
            feasible,
            initial: self.states[self.initial].clone(),
            rounds,
        }
    }
}

impl<R: Scalar> DdMdp for ExplicitDdMdp<R> {
    type Scalar = R;
    type State = usize;
    type Action = usize;
    type Round = ExplicitRound<R>;

    fn horizon(&self) -> usize {
        self.rounds.len()
    }

    fn initial_state(&self) -> usize {
        self.initial
    }

    fn is_feasible(&self, s: &usize, x: &usize) -> bool {
        self.feasible.get(*s).is_some_and(|a| a.binary_search(x).is_ok())
    }

    fn round(&self, t: usize, _history: History<'_, usize, usize>) -> ExplicitRound<R> {
        self.rounds[t - 1].clone()
    }
}

/// JSON form of an explicit instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitFile {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub feasible: BTreeMap<String, Vec<String>>,
    pub initial: String,
    pub rounds: Vec<ExplicitRoundFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitRoundFile {
    pub g: BTreeMap<String, BTreeMap<String, String>>,
    pub f: BTreeMap<String, BTreeMap<String, f64>>,
}
