//! Policies and algorithms over deterministic MDPs with linear Q-functions.
//!
//! [`LinearRlOracle`] is the access model every algorithm here uses: an
//! initial state, deterministic transitions, sampled rewards and features.
//! It is implemented for the SAT-derived [`OracleSession`], for the
//! reduction's budgeted [`SatOracle`] and for the hand-built
//! [`toy::ToySession`] fixtures.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{MdpError, MdpState, OracleSession, NUM_ACTIONS};

mod asat;
mod dp;
mod enet;
mod hsplit;
pub mod linalg;
pub mod toy;

pub use asat::{a_sat, verify_witness, Answer, AsatReport, GreedyLearner, RandomLearner, SatLearner, SatOracle};
pub use dp::{exact_value_dp, greedy_action, greedy_value, sweep_tree, SweepReport};
pub use enet::{cover_radius, cover_spacing, epsilon_net_search, lattice_count, lattice_cover, EnetConfig, EnetResult};
pub use hsplit::{horizon_split_policy, horizon_split_q, HsplitConfig, HsplitStats};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error("action {action} is illegal: the oracle has {k} actions")]
    IllegalAction { action: usize, k: usize },
    #[error("state is terminal")]
    Terminal,
    #[error("policy action list is empty")]
    EmptyPolicy,
    #[error("policy action list ran out after {0} steps at a non-terminal state")]
    PolicyExhausted(usize),
    #[error("no Q estimate for state {0}")]
    MissingEstimate(String),
    #[error("Q estimate for state {0} is not finite or has the wrong length")]
    BadEstimate(String),
    #[error("query budget of {0} exhausted")]
    BudgetExhausted(u64),
    #[error("simulation halted at a gap-satisfying assignment")]
    Halted,
    #[error("refused: {0}")]
    Refused(String),
    #[error("basis expansion failed: {0}")]
    Expansion(String),
}

/// Random access to a deterministic, finite-horizon MDP with features.
pub trait LinearRlOracle {
    type State: Clone;

    fn initial_state(&mut self) -> Result<Self::State, OracleError>;
    fn num_actions(&self) -> usize;
    fn horizon(&self) -> usize;
    fn feature_dim(&self) -> usize;
    fn is_terminal(&self, s: &Self::State) -> bool;
    fn transition(&mut self, s: &Self::State, a: usize) -> Result<Self::State, OracleError>;
    fn reward_sample(&mut self, s: &Self::State, a: usize) -> Result<f64, OracleError>;
    fn features_state(&mut self, s: &Self::State) -> Result<Vec<f64>, OracleError>;
    fn features_state_action(&mut self, s: &Self::State, a: usize) -> Result<Vec<f64>, OracleError>;
    /// Stable identifier of a state, used to key [`QEstimate`]s.
    fn digest(&self, s: &Self::State) -> String;
    /// Every episode return lies in `[0, max_return]`.
    fn max_return(&self) -> f64 {
        1.0
    }
}

impl LinearRlOracle for OracleSession<'_> {
    type State = MdpState;

    fn initial_state(&mut self) -> Result<MdpState, OracleError> {
        Ok(self.instance().initial_state())
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn horizon(&self) -> usize {
        self.instance().params().horizon
    }

    fn feature_dim(&self) -> usize {
        usize::try_from(self.instance().feature_dim()).unwrap_or(usize::MAX)
    }

    fn is_terminal(&self, s: &MdpState) -> bool {
        s.is_terminal()
    }

    fn transition(&mut self, s: &MdpState, a: usize) -> Result<MdpState, OracleError> {
        Ok(OracleSession::transition(self, s, a)?)
    }

    fn reward_sample(&mut self, s: &MdpState, a: usize) -> Result<f64, OracleError> {
        Ok(f64::from(self.sample_reward(s, a)?))
    }

    fn features_state(&mut self, s: &MdpState) -> Result<Vec<f64>, OracleError> {
        Ok(OracleSession::features_state(self, s)?)
    }

    fn features_state_action(&mut self, s: &MdpState, a: usize) -> Result<Vec<f64>, OracleError> {
        Ok(OracleSession::features_state_action(self, s, a)?)
    }

    fn digest(&self, s: &MdpState) -> String {
        s.digest()
    }
}

/// Q-value estimates keyed by state digest, one entry per action.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QEstimate {
    pub values: BTreeMap<String, Vec<f64>>,
}

impl QEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, digest: String, q: Vec<f64>) {
        self.values.insert(digest, q);
    }

    pub fn get(&self, digest: &str) -> Option<&[f64]> {
        self.values.get(digest).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in values.iter().enumerate().skip(1) {
        if x > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Root-to-leaf action list; valid because the MDPs are trees.
    Actions { actions: Vec<usize> },
    /// `argmax_a q(s, a)` over stored estimates.
    Argmax { q: QEstimate },
    /// `argmax_a <theta, psi(s, a)>`.
    Linear { theta: Vec<f64> },
}

impl Policy {
    pub fn actions(actions: Vec<usize>) -> Self {
        Policy::Actions { actions }
    }
}

/// Argmax policy over `q`, ties to the lowest action.
pub fn greedy_on_q(q: QEstimate) -> Policy {
    Policy::Argmax { q }
}

/// Anything that picks actions during a rollout.
pub trait ActionSource<O: LinearRlOracle + ?Sized> {
    fn choose(&mut self, oracle: &mut O, s: &O::State, step: usize) -> Result<usize, OracleError>;

    /// Checked once before the first step.
    fn check(&self) -> Result<(), OracleError> {
        Ok(())
    }
}

impl<O: LinearRlOracle + ?Sized> ActionSource<O> for Policy {
    fn choose(&mut self, oracle: &mut O, s: &O::State, step: usize) -> Result<usize, OracleError> {
        match self {
            Policy::Actions { actions } => actions.get(step).copied().ok_or(OracleError::PolicyExhausted(step)),
            Policy::Argmax { q } => {
                let digest = oracle.digest(s);
                let row = q.get(&digest).ok_or_else(|| OracleError::MissingEstimate(digest.clone()))?;
                if row.len() != oracle.num_actions() || row.iter().any(|x| !x.is_finite()) {
                    return Err(OracleError::BadEstimate(digest));
                }
                Ok(argmax(row))
            }
            Policy::Linear { theta } => {
                let scores = (0..oracle.num_actions())
                    .map(|a| Ok(dot(theta, &oracle.features_state_action(s, a)?)))
                    .collect::<Result<Vec<f64>, OracleError>>()?;
                Ok(argmax(&scores))
            }
        }
    }

    fn check(&self) -> Result<(), OracleError> {
        match self {
            Policy::Actions { actions } if actions.is_empty() => Err(OracleError::EmptyPolicy),
            _ => Ok(()),
        }
    }
}

impl<O, F> ActionSource<O> for F
where
    O: LinearRlOracle + ?Sized,
    F: FnMut(&mut O, &O::State, usize) -> Result<usize, OracleError>,
{
    fn choose(&mut self, oracle: &mut O, s: &O::State, step: usize) -> Result<usize, OracleError> {
        self(oracle, s, step)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub state_digest: String,
    pub action: usize,
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub records: Vec<StepRecord>,
    /// Visited states, starting state first; one more than `records`.
    pub states: Vec<S>,
    pub total_reward: f64,
}

impl<S> Trajectory<S> {
    pub fn actions(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.action).collect()
    }

    pub fn last_state(&self) -> &S {
        self.states.last().expect("trajectory holds its start state")
    }
}

pub fn rollout<O, P>(oracle: &mut O, policy: &mut P) -> Result<Trajectory<O::State>, OracleError>
where
    O: LinearRlOracle + ?Sized,
    P: ActionSource<O> + ?Sized,
{
    let s = oracle.initial_state()?;
    rollout_from(oracle, s, policy)
}

/// Run `policy` from `start` until a terminal state. Step numbers restart
/// at zero.
pub fn rollout_from<O, P>(oracle: &mut O, start: O::State, policy: &mut P) -> Result<Trajectory<O::State>, OracleError>
where
    O: LinearRlOracle + ?Sized,
    P: ActionSource<O> + ?Sized,
{
    policy.check()?;
    let k = oracle.num_actions();
    let horizon = oracle.horizon();
    let mut traj = Trajectory {
        records: Vec::new(),
        states: alloc::vec![start],
        total_reward: 0.0,
    };
    let mut step = 0;
    loop {
        let s = traj.last_state().clone();
        if oracle.is_terminal(&s) {
            return Ok(traj);
        }
        if step >= horizon {
            return Err(OracleError::Refused(alloc::format!("no terminal state within the horizon {horizon}")));
        }
        let a = policy.choose(oracle, &s, step)?;
        if a >= k {
            return Err(OracleError::IllegalAction { action: a, k });
        }
        let reward = oracle.reward_sample(&s, a)?;
        let t = oracle.transition(&s, a)?;
        traj.records.push(StepRecord {
            step,
            state_digest: oracle.digest(&s),
            action: a,
            reward,
        });
        traj.total_reward += reward;
        traj.states.push(t);
        step += 1;
    }
}
