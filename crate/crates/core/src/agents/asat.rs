//! The RL-to-SAT reduction driver.
//!
//! A learner interacts with the simulator MDP of a formula through a
//! budgeted oracle. The first time a transition lands on a gap-satisfying
//! assignment the assignment is re-checked against the formula from scratch
//! and the run stops with YES; every other outcome is NO.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{greedy_action, rollout, LinearRlOracle, OracleError, Policy};
use crate::cnf::{self, Assignment, Formula};
use crate::gapsat;
use crate::mdp::{InstanceOptions, MdpError, MdpInstance, MdpState, Mode, OracleSession, QueryCounters, TerminalKind, NUM_ACTIONS};
use crate::reward::RewardParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsatReport {
    pub answer: Answer,
    /// Re-verified assignment behind a YES.
    pub witness: Option<Assignment>,
    pub queries: u64,
    pub counters: QueryCounters,
    pub budget_exhausted: bool,
    pub learner: String,
}

/// `satisfied_count(f, w)` recomputed from the clauses exceeds
/// `(1 - epsilon) m`.
pub fn verify_witness(f: &Formula, w: &Assignment, epsilon: f64) -> bool {
    w.len() == f.num_vars() && gapsat::is_gap_satisfied(cnf::satisfied_count(f, w), f.num_clauses(), epsilon)
}

/// Simulator-mode oracle with a query budget that halts at the first
/// verified gap-satisfying state.
pub struct SatOracle<'a> {
    session: OracleSession<'a>,
    budget: u64,
    used: u64,
    witness: Option<Assignment>,
}

impl<'a> SatOracle<'a> {
    pub fn new(inst: &'a MdpInstance, budget: u64, seed: u64) -> Self {
        Self {
            session: OracleSession::new(inst, seed),
            budget,
            used: 0,
            witness: None,
        }
    }

    pub fn instance(&self) -> &'a MdpInstance {
        self.session.instance()
    }

    pub fn witness(&self) -> Option<&Assignment> {
        self.witness.as_ref()
    }

    pub fn queries(&self) -> u64 {
        self.used
    }

    pub fn counters(&self) -> QueryCounters {
        self.session.counters
    }

    fn charge(&mut self) -> Result<(), OracleError> {
        if self.witness.is_some() {
            return Err(OracleError::Halted);
        }
        if self.used >= self.budget {
            return Err(OracleError::BudgetExhausted(self.budget));
        }
        self.used += 1;
        Ok(())
    }

    fn watch(&mut self, t: &MdpState) -> Result<(), OracleError> {
        if t.terminal_kind() != Some(TerminalKind::GapSatisfied) {
            return Ok(());
        }
        let inst = self.session.instance();
        if !verify_witness(inst.formula(), &t.w, inst.params().epsilon) {
            return Err(OracleError::Mdp(MdpError::Invalid(String::from(
                "state marked gap-satisfied fails independent verification",
            ))));
        }
        self.witness = Some(t.w.clone());
        Err(OracleError::Halted)
    }
}

impl LinearRlOracle for SatOracle<'_> {
    type State = MdpState;

    fn initial_state(&mut self) -> Result<MdpState, OracleError> {
        let s = self.session.instance().initial_state();
        self.watch(&s)?;
        Ok(s)
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn horizon(&self) -> usize {
        self.session.instance().params().horizon
    }

    fn feature_dim(&self) -> usize {
        LinearRlOracle::feature_dim(&self.session)
    }

    fn is_terminal(&self, s: &MdpState) -> bool {
        s.is_terminal()
    }

    fn transition(&mut self, s: &MdpState, a: usize) -> Result<MdpState, OracleError> {
        self.charge()?;
        let t = self.session.transition(s, a)?;
        self.watch(&t)?;
        Ok(t)
    }

    fn reward_sample(&mut self, s: &MdpState, a: usize) -> Result<f64, OracleError> {
        self.charge()?;
        Ok(f64::from(self.session.sample_reward(s, a)?))
    }

    fn features_state(&mut self, s: &MdpState) -> Result<Vec<f64>, OracleError> {
        self.charge()?;
        Ok(self.session.features_state(s)?)
    }

    fn features_state_action(&mut self, s: &MdpState, a: usize) -> Result<Vec<f64>, OracleError> {
        self.charge()?;
        Ok(self.session.features_state_action(s, a)?)
    }

    fn digest(&self, s: &MdpState) -> String {
        s.digest()
    }
}

/// An RL algorithm run inside the reduction.
pub trait SatLearner {
    fn name(&self) -> String;
    fn run(&mut self, oracle: &mut SatOracle<'_>) -> Result<Policy, OracleError>;
}

/// Follows the greedy policy toward a known assignment; without one it
/// always takes action 0.
#[derive(Clone, Debug)]
pub struct GreedyLearner {
    pub wstar: Option<Assignment>,
}

impl GreedyLearner {
    /// Learner aimed at the lexicographically smallest satisfying assignment,
    /// found exhaustively.
    pub fn exhaustive(f: &Formula, limit: usize) -> Result<Self, MdpError> {
        Ok(Self {
            wstar: cnf::brute_force_sat(f, limit)?,
        })
    }
}

impl SatLearner for GreedyLearner {
    fn name(&self) -> String {
        String::from("greedy")
    }

    fn run(&mut self, oracle: &mut SatOracle<'_>) -> Result<Policy, OracleError> {
        let inst = oracle.instance();
        let mut actions = Vec::new();
        let mut s = oracle.initial_state()?;
        while !s.is_terminal() {
            let a = match &self.wstar {
                Some(w) => greedy_action(inst, &s, w)?,
                None => 0,
            };
            actions.push(a);
            s = oracle.transition(&s, a)?;
        }
        Ok(Policy::actions(actions))
    }
}

/// Uniformly random actions for a fixed number of episodes.
#[derive(Clone, Debug)]
pub struct RandomLearner {
    rng: ChaCha8Rng,
    pub episodes: usize,
}

impl RandomLearner {
    pub fn new(seed: u64, episodes: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            episodes: episodes.max(1),
        }
    }
}

impl SatLearner for RandomLearner {
    fn name(&self) -> String {
        String::from("random")
    }

    fn run(&mut self, oracle: &mut SatOracle<'_>) -> Result<Policy, OracleError> {
        let mut last = Vec::new();
        for _ in 0..self.episodes {
            let rng = &mut self.rng;
            let mut pick = |o: &mut SatOracle<'_>, _: &MdpState, _: usize| Ok(rng.gen_range(0..o.num_actions()));
            let traj = rollout(oracle, &mut pick)?;
            last = traj.actions();
        }
        Ok(Policy::actions(last))
    }
}

/// Decide the gap promise problem for `f` by running `learner` on its
/// simulator MDP with at most `budget` oracle queries.
///
/// YES is returned only with a witness that passed [`verify_witness`]; the
/// learner's returned policy is also rolled out once, within the same budget.
pub fn a_sat(
    f: &Formula,
    params: &RewardParams,
    learner: &mut dyn SatLearner,
    budget: u64,
    seed: u64,
) -> Result<AsatReport, OracleError> {
    gapsat::GapInstance::new(f.clone(), params.b, params.epsilon)
        .map_err(|e| OracleError::Mdp(MdpError::Invalid(format!("{e}"))))?;
    let inst = MdpInstance::build_with(
        f.clone(),
        params.clone(),
        InstanceOptions {
            mode: Mode::Simulator,
            wstar: None,
            ..InstanceOptions::default()
        },
    )?;
    let mut oracle = SatOracle::new(&inst, budget, seed);
    let mut outcome = learner.run(&mut oracle);
    if let Ok(mut policy) = outcome {
        outcome = rollout(&mut oracle, &mut policy).map(|_| policy);
    }
    let budget_exhausted = match outcome {
        Ok(_) | Err(OracleError::Halted) => false,
        Err(OracleError::BudgetExhausted(_)) => true,
        Err(e) => return Err(e),
    };
    let witness = oracle.witness().cloned();
    // The oracle already checked the witness; check again at the boundary.
    let answer = match &witness {
        Some(w) if verify_witness(f, w, params.epsilon) => Answer::Yes,
        _ => Answer::No,
    };
    Ok(AsatReport {
        answer,
        witness: if answer == Answer::Yes { witness } else { None },
        queries: oracle.queries(),
        counters: oracle.counters(),
        budget_exhausted,
        learner: learner.name(),
    })
}
