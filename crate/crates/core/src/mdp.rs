//! The round-based MDP built from a 3-CNF formula.
//!
//! Each round has `v` steps. Stage One offers the lowest-index unsatisfied
//! clause whose variables are all free and the agent flips one of its three
//! variables. Once no such clause remains, Stage Two offers the remaining
//! free variables one at a time. The episode ends as soon as more than a
//! `(1 - epsilon)` fraction of clauses is satisfied, or after round `h`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::VarSet;
use crate::cnf::{self, Assignment, CnfError, Formula};
use crate::gapsat;
use crate::polyfeat::{self, FeatureVector, PolyError, SubsetIndex};
use crate::reward::{self, RewardError, RewardParams};

pub const NUM_ACTIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdpError {
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("state is terminal")]
    Terminal,
    #[error("state is not terminal")]
    NotTerminal,
    #[error("action {0} is not in [0, 3)")]
    Action(usize),
    #[error("exact rewards need full mode with a planted assignment")]
    NoExactReward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Simulator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalKind {
    GapSatisfied,
    LastLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    One { clause: usize },
    Two { var: usize },
    Terminal(TerminalKind),
}

#[derive(Clone, Debug)]
pub struct InstanceOptions {
    pub mode: Mode,
    pub wstar: Option<Assignment>,
    pub start: Option<Assignment>,
    pub exhaustive_limit: usize,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            wstar: None,
            start: None,
            exhaustive_limit: cnf::DEFAULT_EXHAUSTIVE_LIMIT,
        }
    }
}

/// Immutable description of one MDP.
#[derive(Clone, Debug)]
pub struct MdpInstance {
    formula: Formula,
    params: RewardParams,
    wstar: Option<Assignment>,
    mode: Mode,
    start: Assignment,
    threshold: usize,
    index: Option<SubsetIndex>,
    d: u128,
}

impl MdpInstance {
    /// Build with the all-false start. In full mode a missing `wstar` is
    /// found by exhaustive search when `v` is within the default limit.
    pub fn build(f: Formula, params: RewardParams, wstar: Option<Assignment>, mode: Mode) -> Result<Self, MdpError> {
        Self::build_with(
            f,
            params,
            InstanceOptions {
                mode,
                wstar,
                ..InstanceOptions::default()
            },
        )
    }

    pub fn build_with(f: Formula, params: RewardParams, opts: InstanceOptions) -> Result<Self, MdpError> {
        params.validate()?;
        f.check_strict()?;
        let (v, m) = (f.num_vars(), f.num_clauses());
        if params.v != v {
            return Err(MdpError::Invalid(format!("params.v = {} but formula has {v} variables", params.v)));
        }
        if m < v {
            return Err(MdpError::Invalid(format!("{m} clauses < {v} variables")));
        }
        let occ = cnf::occurrence_bound(&f);
        if occ > params.b {
            return Err(MdpError::Invalid(format!("occurrence bound {occ} exceeds b = {}", params.b)));
        }
        let start = opts.start.unwrap_or_else(|| Assignment::all_false(v));
        if start.len() != v {
            return Err(MdpError::Invalid(String::from("start assignment has wrong length")));
        }
        let wstar = match opts.wstar {
            Some(w) => {
                if w.len() != v || cnf::satisfied_count(&f, &w) != m {
                    return Err(MdpError::Invalid(String::from("wstar does not satisfy the formula")));
                }
                Some(w)
            }
            None if opts.mode == Mode::Full => {
                if v > opts.exhaustive_limit {
                    return Err(MdpError::Refused(format!(
                        "no planted assignment and v = {v} exceeds the exhaustive limit {}",
                        opts.exhaustive_limit
                    )));
                }
                cnf::brute_force_sat(&f, opts.exhaustive_limit)?
            }
            None => None,
        };
        let d = polyfeat::feature_dim(v, params.p);
        let index = SubsetIndex::for_params(v, params.p).ok();
        Ok(Self {
            threshold: gapsat::gap_threshold(params.epsilon, m),
            formula: f,
            params,
            wstar,
            mode: opts.mode,
            start,
            index,
            d,
        })
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn params(&self) -> &RewardParams {
        &self.params
    }

    pub fn wstar(&self) -> Option<&Assignment> {
        self.wstar.as_ref()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn start(&self) -> &Assignment {
        &self.start
    }

    /// Feature dimension `sum_{i <= 2p} C(v, i)`.
    pub fn feature_dim(&self) -> u128 {
        self.d
    }

    pub fn subset_index(&self) -> Result<&SubsetIndex, MdpError> {
        self.index
            .as_ref()
            .ok_or_else(|| MdpError::Refused(format!("feature dimension {} is too large to materialize", self.d)))
    }

    /// Rewards are identically zero (no satisfying assignment is known).
    pub fn is_zero_reward(&self) -> bool {
        self.wstar.is_none()
    }

    /// Least number of unsatisfied clauses that blocks termination.
    pub fn gap_threshold(&self) -> usize {
        self.threshold
    }

    pub fn is_gap_satisfied(&self, satisfied: usize) -> bool {
        self.formula.num_clauses() - satisfied < self.threshold
    }

    /// Same instance in another mode; `wstar` is kept.
    pub fn with_mode(&self, mode: Mode) -> Self {
        let mut out = self.clone();
        out.mode = mode;
        out
    }

    /// `ceil(epsilon m / b)`, the guaranteed Stage One length of a round
    /// that starts from `round_start`.
    pub fn stage_one_floor(&self, round_start: &Assignment) -> Result<usize, MdpError> {
        if self.is_gap_satisfied(cnf::satisfied_count(&self.formula, round_start)) {
            return Err(MdpError::Invalid(String::from(
                "round start already satisfies more than a (1 - epsilon) fraction",
            )));
        }
        Ok(gapsat::gap_threshold(
            self.params.epsilon / self.params.b as f64,
            self.formula.num_clauses(),
        ))
    }

    pub fn initial_state(&self) -> MdpState {
        let v = self.formula.num_vars();
        let mut s = MdpState {
            n: 1,
            stage: Stage::Two { var: 0 },
            w: self.start.clone(),
            w_round: self.start.clone(),
            free: VarSet::full(v),
            round_dists: Vec::new(),
            step: 0,
            sat_lits: Vec::new(),
            num_satisfied: 0,
        };
        s.recount(&self.formula);
        if self.is_gap_satisfied(s.num_satisfied) {
            s.stage = Stage::Terminal(TerminalKind::GapSatisfied);
        } else {
            s.stage = self.next_stage(&s);
        }
        s
    }

    fn next_stage(&self, s: &MdpState) -> Stage {
        let f = &self.formula;
        let eligible = (0..f.num_clauses()).find(|&ci| {
            s.sat_lits[ci] == 0 && f.clause(ci).literals().iter().all(|l| s.free.contains(l.var))
        });
        match eligible {
            Some(clause) => Stage::One { clause },
            None => Stage::Two {
                var: s.free.first().expect("round not complete"),
            },
        }
    }

    /// Variable flipped or offered by action `a`, and whether it is flipped.
    pub fn action_effect(&self, s: &MdpState, a: usize) -> Result<(usize, bool), MdpError> {
        if a >= NUM_ACTIONS {
            return Err(MdpError::Action(a));
        }
        match s.stage {
            Stage::Terminal(_) => Err(MdpError::Terminal),
            Stage::One { clause } => Ok((self.formula.clause(clause).sorted_vars()[a], true)),
            Stage::Two { var } => Ok((var, a == 1)),
        }
    }

    pub fn transition(&self, s: &MdpState, a: usize) -> Result<MdpState, MdpError> {
        let (var, flip) = self.action_effect(s, a)?;
        let mut t = s.clone();
        if flip {
            t.flip(&self.formula, var);
        }
        t.free.remove(var);
        t.step += 1;
        if self.is_gap_satisfied(t.num_satisfied) {
            t.stage = Stage::Terminal(TerminalKind::GapSatisfied);
            return Ok(t);
        }
        if t.free.is_empty() {
            if t.n == self.params.h {
                t.stage = Stage::Terminal(TerminalKind::LastLevel);
                return Ok(t);
            }
            t.round_dists.push(t.w_round.dist(&t.w));
            t.w_round = t.w.clone();
            t.n += 1;
            t.free = VarSet::full(self.formula.num_vars());
        }
        t.stage = self.next_stage(&t);
        Ok(t)
    }

    /// Mean of the terminal Bernoulli reward computed through `ext(w, S)`.
    /// Needs full mode and a planted assignment.
    pub fn exact_expected_reward(&self, s: &MdpState) -> Result<f64, MdpError> {
        if !s.is_terminal() {
            return Err(MdpError::NotTerminal);
        }
        let wstar = match (&self.wstar, self.mode) {
            (Some(w), Mode::Full) => w,
            _ => return Err(MdpError::NoExactReward),
        };
        Ok(self.reward_formula(s, wstar)?)
    }

    fn reward_formula(&self, s: &MdpState, wstar: &Assignment) -> Result<f64, RewardError> {
        let used = s.free.complement();
        reward::expected_reward(
            &s.round_dists,
            s.n,
            s.w_round.dist(&s.w),
            s.w.dist_on(wstar, &s.free),
            s.w.dist_on(wstar, &used),
            &self.params,
        )
    }

    /// Mean reward of the step `(s, a)` as the oracle pays it: zero unless the
    /// step terminates; zero in simulator mode at the last level; zero when
    /// no satisfying assignment is known.
    pub fn reward_mean(&self, s: &MdpState, a: usize) -> Result<f64, MdpError> {
        let t = self.transition(s, a)?;
        self.terminal_mean(&t)
    }

    /// Bernoulli mean paid on arrival at `t` (zero when `t` is not terminal).
    pub fn terminal_mean(&self, t: &MdpState) -> Result<f64, MdpError> {
        let kind = match t.stage {
            Stage::Terminal(kind) => kind,
            _ => return Ok(0.0),
        };
        match (&self.wstar, self.mode, kind) {
            (None, _, _) => Ok(0.0),
            (Some(_), Mode::Simulator, TerminalKind::LastLevel) => Ok(0.0),
            (Some(w), _, _) => Ok(self.reward_formula(t, w)?),
        }
    }

    /// `psi(s)`: coefficients of the greedy value polynomial; zero at terminal
    /// states.
    pub fn features_state(&self, s: &MdpState) -> Result<FeatureVector, MdpError> {
        let index = self.subset_index()?;
        if s.is_terminal() {
            return Ok(vec![0.0; index.dim()]);
        }
        Ok(polyfeat::to_feature_vector(
            &polyfeat::greedy_value_poly(s, &self.params)?,
            index,
        )?)
    }

    /// `psi(s, a)`: coefficients of the greedy value polynomial of `P(s, a)`.
    /// When `P(s, a)` is terminal this is the terminal reward polynomial, so
    /// `Q(s, a) = <theta, psi(s, a)>` holds for every action.
    pub fn features_state_action(&self, s: &MdpState, a: usize) -> Result<FeatureVector, MdpError> {
        let index = self.subset_index()?;
        let t = self.transition(s, a)?;
        Ok(polyfeat::to_feature_vector(
            &polyfeat::greedy_value_poly(&t, &self.params)?,
            index,
        )?)
    }
}

/// One node of the MDP tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MdpState {
    /// Current round, 1-based.
    pub n: usize,
    pub stage: Stage,
    pub w: Assignment,
    /// Assignment at the start of the current round.
    pub w_round: Assignment,
    pub free: VarSet,
    /// `dist(w^(i), w^(i+1))` for completed rounds.
    pub round_dists: Vec<usize>,
    pub step: usize,
    sat_lits: Vec<u8>,
    num_satisfied: usize,
}

impl MdpState {
    pub fn is_terminal(&self) -> bool {
        matches!(self.stage, Stage::Terminal(_))
    }

    pub fn terminal_kind(&self) -> Option<TerminalKind> {
        match self.stage {
            Stage::Terminal(k) => Some(k),
            _ => None,
        }
    }

    pub fn num_satisfied(&self) -> usize {
        self.num_satisfied
    }

    fn recount(&mut self, f: &Formula) {
        self.sat_lits = f
            .clauses()
            .iter()
            .map(|c| c.literals().iter().filter(|l| l.is_true(&self.w)).count() as u8)
            .collect();
        self.num_satisfied = self.sat_lits.iter().filter(|&&k| k > 0).count();
    }

    fn flip(&mut self, f: &Formula, var: usize) {
        self.w.flip(var);
        for &ci in f.occurrences(var) {
            let before = self.sat_lits[ci] > 0;
            let now = f.clause(ci).literals().iter().filter(|l| l.is_true(&self.w)).count() as u8;
            self.sat_lits[ci] = now;
            match (before, now > 0) {
                (false, true) => self.num_satisfied += 1,
                (true, false) => self.num_satisfied -= 1,
                _ => {}
            }
        }
    }

    /// Fixed-order encoding: `n`, stage tag and cursor, `w`, free set,
    /// `w_round`, then the round distances. Equal bytes mean equal states.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        let (tag, cursor) = match self.stage {
            Stage::One { clause } => (1u8, clause as u32),
            Stage::Two { var } => (2u8, var as u32),
            Stage::Terminal(TerminalKind::GapSatisfied) => (3u8, 0),
            Stage::Terminal(TerminalKind::LastLevel) => (4u8, 0),
        };
        out.push(tag);
        out.extend_from_slice(&cursor.to_le_bytes());
        out.extend_from_slice(&self.w.to_bytes());
        out.extend_from_slice(&self.free.to_bytes());
        out.extend_from_slice(&self.w_round.to_bytes());
        out.extend_from_slice(&(self.round_dists.len() as u32).to_le_bytes());
        for &d in &self.round_dists {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(self.canonical_bytes())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounters {
    pub transitions: u64,
    pub rewards: u64,
    pub features: u64,
}

/// Single-owner handle for interacting with an instance: counts queries and
/// draws Bernoulli rewards from a seeded generator.
#[derive(Clone, Debug)]
pub struct OracleSession<'a> {
    inst: &'a MdpInstance,
    rng: ChaCha8Rng,
    pub counters: QueryCounters,
}

impl<'a> OracleSession<'a> {
    pub fn new(inst: &'a MdpInstance, seed: u64) -> Self {
        Self {
            inst,
            rng: ChaCha8Rng::seed_from_u64(seed),
            counters: QueryCounters::default(),
        }
    }

    pub fn instance(&self) -> &'a MdpInstance {
        self.inst
    }

    pub fn transition(&mut self, s: &MdpState, a: usize) -> Result<MdpState, MdpError> {
        self.counters.transitions += 1;
        self.inst.transition(s, a)
    }

    /// Bernoulli reward of the step `(s, a)`. A draw is consumed only on
    /// terminating steps.
    pub fn sample_reward(&mut self, s: &MdpState, a: usize) -> Result<u8, MdpError> {
        self.counters.rewards += 1;
        let t = self.inst.transition(s, a)?;
        if !t.is_terminal() {
            return Ok(0);
        }
        let mean = self.inst.terminal_mean(&t)?;
        Ok((self.rng.gen::<f64>() < mean) as u8)
    }

    pub fn features_state(&mut self, s: &MdpState) -> Result<FeatureVector, MdpError> {
        self.counters.features += 1;
        self.inst.features_state(s)
    }

    pub fn features_state_action(&mut self, s: &MdpState, a: usize) -> Result<FeatureVector, MdpError> {
        self.counters.features += 1;
        self.inst.features_state_action(s, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, ParseMode};
    use crate::polyfeat::{inner_product, theta_vector};

    const EXAMPLE: &str = "p cnf 5 5\n1 -2 3 0\n3 4 5 0\n1 4 5 0\n1 -2 -3 0\n1 -2 -5 0\n";

    fn bits(s: &str) -> Assignment {
        Assignment::from_bit_string(s).unwrap()
    }

    fn example_instance(eps: f64, start: &str) -> MdpInstance {
        example_instance_rounds(eps, start, 2)
    }

    fn example_instance_rounds(eps: f64, start: &str, h: usize) -> MdpInstance {
        let f = parse_dimacs(EXAMPLE, ParseMode::Strict).unwrap();
        let params = RewardParams::new(2, 2, 0.5, 5, eps, 6).unwrap().with_rounds(h).unwrap();
        MdpInstance::build_with(
            f,
            params,
            InstanceOptions {
                wstar: Some(bits("00101")),
                start: Some(bits(start)),
                ..InstanceOptions::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn example_formula_dimensions() {
        let inst = example_instance(0.1, "00000");
        assert_eq!(inst.params().horizon, 10);
        assert_eq!(inst.feature_dim(), 31);
    }

    #[test]
    fn example_formula_path() {
        let inst = example_instance_rounds(0.1, "01000", 1);
        let s0 = inst.initial_state();
        assert_eq!(s0.stage, Stage::One { clause: 0 });
        // clause (a | ~b | c): actions index a, b, c
        let s1 = inst.transition(&s0, 2).unwrap();
        assert_eq!(s1.w, bits("01100"));
        assert_eq!(s1.stage, Stage::One { clause: 2 });
        // clause (a | d | e): flip e
        let s2 = inst.transition(&s1, 2).unwrap();
        assert_eq!(s2.w, bits("01101"));
        assert_eq!(s2.stage, Stage::Two { var: 0 });
        let s3 = inst.transition(&s2, 0).unwrap();
        assert_eq!(s3.stage, Stage::Two { var: 1 });
        // b = 0 satisfies every clause: termination A
        let a = inst.transition(&s3, 1).unwrap();
        assert_eq!(a.w, bits("00101"));
        assert_eq!(a.stage, Stage::Terminal(TerminalKind::GapSatisfied));
        // b = 1 keeps it; then d = 1 ends the round at w^(i+1): termination B
        let s4 = inst.transition(&s3, 0).unwrap();
        assert_eq!(s4.stage, Stage::Two { var: 3 });
        let s5 = inst.transition(&s4, 1).unwrap();
        assert_eq!(s5.w, bits("01111"));
        assert_eq!(s5.stage, Stage::Terminal(TerminalKind::LastLevel));
        assert_eq!(s5.step, 5);
    }

    #[test]
    fn last_level_after_h_rounds() {
        let inst = example_instance(0.1, "00000");
        let mut s = inst.initial_state();
        // Always pick action 0 in Stage One and keep in Stage Two until the end.
        let mut steps = 0;
        while !s.is_terminal() {
            s = inst.transition(&s, 0).unwrap();
            steps += 1;
        }
        assert!(steps <= 10);
        if s.terminal_kind() == Some(TerminalKind::LastLevel) {
            assert_eq!(steps, 10);
            assert_eq!(s.n, 2);
        }
        assert!(inst.transition(&s, 0).is_err());
    }

    #[test]
    fn start_satisfying_terminates_at_once() {
        let inst = example_instance(0.25, "00101");
        assert_eq!(
            inst.initial_state().stage,
            Stage::Terminal(TerminalKind::GapSatisfied)
        );
    }

    #[test]
    fn stage_one_floor_values() {
        let inst = example_instance(0.25, "00000");
        // ceil(0.25 * 5 / 6) = 1
        assert_eq!(inst.stage_one_floor(&bits("00000")).unwrap(), 1);
        assert!(inst.stage_one_floor(&bits("00101")).is_err());
    }

    #[test]
    fn ext_fills_free_coordinates() {
        let f = Formula::from_dimacs_clauses(3, &[&[1, 2, 3], &[1, -2, 3], &[-1, 2, 3]]).unwrap();
        let params = RewardParams::new(2, 2, 1.0, 3, 0.3, 6).unwrap().with_rounds(1).unwrap();
        let inst = MdpInstance::build(f, params.clone(), Some(bits("111")), Mode::Full).unwrap();
        let mut s = inst.initial_state();
        s.free = VarSet::from_indices(3, [1]);
        s.stage = Stage::Terminal(TerminalKind::GapSatisfied);
        // ext = (F, T, F): within = 0, free distance 1, used distance 2
        let r = inst.exact_expected_reward(&s).unwrap();
        assert_eq!(r, params.g_unchecked(1, 1.0) * params.g_unchecked(2, 2.0));
    }

    #[test]
    fn terminal_features_are_zero_and_q_is_linear() {
        let inst = example_instance(0.1, "01000");
        let theta = theta_vector(inst.wstar().unwrap(), inst.subset_index().unwrap()).unwrap();
        let s0 = inst.initial_state();
        for a in 0..3 {
            let t = inst.transition(&s0, a).unwrap();
            let q = inner_product(&inst.features_state_action(&s0, a).unwrap(), &theta).unwrap();
            let v_next = inner_product(&inst.features_state(&t).unwrap(), &theta).unwrap();
            assert!((q - (inst.reward_mean(&s0, a).unwrap() + v_next)).abs() < 1e-12);
        }
        let mut s = s0;
        for a in [2, 2, 0, 1] {
            s = inst.transition(&s, a).unwrap();
        }
        assert!(inst.features_state(&s).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn zero_reward_for_unsatisfiable() {
        let rows: Vec<Vec<i64>> = (0..8)
            .map(|p| (0..3).map(|j| if (p >> j) & 1 == 1 { -(j + 1) } else { j + 1 }).collect())
            .collect();
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let f = Formula::from_dimacs_clauses(3, &refs).unwrap();
        let params = RewardParams::new(2, 2, 1.0, 3, 0.1, 8).unwrap();
        let inst = MdpInstance::build(f, params, None, Mode::Full).unwrap();
        assert!(inst.is_zero_reward());
        let mut session = OracleSession::new(&inst, 1);
        let mut s = inst.initial_state();
        while !s.is_terminal() {
            assert_eq!(session.sample_reward(&s, 1).unwrap(), 0);
            s = session.transition(&s, 1).unwrap();
        }
        assert!(inst.exact_expected_reward(&s).is_err());
    }

    #[test]
    fn refuses_large_unplanted_full_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = crate::random::random_assignment(&mut rng, 30);
        let f = crate::random::planted_3cnf(&mut rng, &w, 30, 6).unwrap();
        let params = RewardParams::defaults(30).unwrap();
        assert!(matches!(
            MdpInstance::build(f.clone(), params.clone(), None, Mode::Full),
            Err(MdpError::Refused(_))
        ));
        assert!(MdpInstance::build(f, params, None, Mode::Simulator).is_ok());
    }

    #[test]
    fn digest_is_hex_of_bytes() {
        let inst = example_instance(0.1, "01000");
        let s = inst.initial_state();
        let d = s.digest();
        assert_eq!(d.len(), 2 * s.canonical_bytes().len());
        assert_ne!(d, inst.transition(&s, 0).unwrap().digest());
    }
}
