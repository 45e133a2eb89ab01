//! Small explicit tree MDPs with a planted linear `Q*`, used to exercise the
//! search algorithms at feature dimensions where they are feasible.
//!
//! Nodes are numbered in level order of a complete `k`-ary tree of depth
//! `horizon`; the children of node `u` are `u k + a + 1`. Rewards are paid
//! on every step: small deterministic amounts before the last step and a
//! (possibly Bernoulli) reward on the last step. Features are built
//! backwards so that `Q*(s, a) = <theta*, psi(s, a)>` with `|psi| <= 1`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax, LinearRlOracle, OracleError, QEstimate};
use crate::mdp::QueryCounters;

/// Largest mean of the last-step reward.
pub const LAST_STEP_MAX: f64 = 0.7;
/// Largest total of the deterministic rewards before the last step.
pub const PATH_MAX: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToyRewards {
    Zero,
    /// Every reward sample equals its mean.
    Deterministic,
    /// The last-step reward is a Bernoulli draw.
    Bernoulli,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub d: usize,
    pub k: usize,
    pub horizon: usize,
    pub rewards: ToyRewards,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ToyState {
    pub node: usize,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct ToyMdp {
    spec: ToySpec,
    theta: Vec<f64>,
    internal: usize,
    depth: Vec<usize>,
    mean: Vec<f64>,
    psi: Vec<Vec<f64>>,
    q: Vec<f64>,
    v: Vec<f64>,
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
        if n > 1e-3 && n <= 1.0 {
            return x.iter().map(|v| v / n).collect();
        }
    }
}

impl ToyMdp {
    pub fn new(spec: ToySpec) -> Result<Self, OracleError> {
        let ToySpec { d, k, horizon, .. } = spec;
        if d == 0 || k < 2 || horizon == 0 {
            return Err(OracleError::Refused(String::from("toy MDPs need d >= 1, k >= 2, horizon >= 1")));
        }
        let internal = (0..horizon)
            .try_fold(0usize, |acc, t| k.checked_pow(t as u32).and_then(|n| acc.checked_add(n)))
            .filter(|&n| n <= 1 << 20)
            .ok_or_else(|| OracleError::Refused(format!("toy tree with k = {k}, horizon = {horizon} is too large")))?;
        let total = internal * k + 1;
        let mut depth = vec![0usize; total];
        for u in 0..internal {
            for a in 0..k {
                depth[u * k + a + 1] = depth[u] + 1;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let theta = unit_vector(&mut rng, d);
        let mut mean = vec![0.0; internal * k];
        let mut psi = vec![Vec::new(); internal * k];
        let mut q = vec![0.0; internal * k];
        let mut v = vec![0.0; total];
        let step_max = if horizon > 1 { PATH_MAX / (horizon - 1) as f64 } else { 0.0 };
        for u in (0..internal).rev() {
            for a in 0..k {
                let i = u * k + a;
                mean[i] = match spec.rewards {
                    ToyRewards::Zero => 0.0,
                    _ if depth[u] + 1 == horizon => rng.gen_range(0.0..LAST_STEP_MAX),
                    _ => rng.gen_range(0.0..step_max),
                };
                q[i] = mean[i] + v[i + 1];
                // psi = Q theta + (orthogonal part with norm below sqrt(1 - Q^2))
                let mut orth = unit_vector(&mut rng, d);
                let c: f64 = orth.iter().zip(&theta).map(|(x, t)| x * t).sum();
                for (o, t) in orth.iter_mut().zip(&theta) {
                    *o -= c * t;
                }
                let on = libm::sqrt(orth.iter().map(|x| x * x).sum::<f64>());
                let room = libm::sqrt((1.0 - q[i] * q[i]).max(0.0));
                let scale = if on > 1e-9 { rng.gen_range(0.0..0.9) * room / on } else { 0.0 };
                psi[i] = theta.iter().zip(&orth).map(|(t, o)| q[i] * t + scale * o).collect();
            }
            let row = &q[u * k..(u + 1) * k];
            v[u] = row[argmax(row)];
        }
        Ok(Self {
            spec,
            theta,
            internal,
            depth,
            mean,
            psi,
            q,
            v,
        })
    }

    pub fn spec(&self) -> &ToySpec {
        &self.spec
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn root(&self) -> ToyState {
        ToyState { node: 0, depth: 0 }
    }

    pub fn is_terminal(&self, s: &ToyState) -> bool {
        s.depth >= self.spec.horizon
    }

    pub fn child(&self, s: &ToyState, a: usize) -> Result<ToyState, OracleError> {
        if self.is_terminal(s) {
            return Err(OracleError::Terminal);
        }
        if a >= self.spec.k {
            return Err(OracleError::IllegalAction { action: a, k: self.spec.k });
        }
        Ok(ToyState {
            node: s.node * self.spec.k + a + 1,
            depth: s.depth + 1,
        })
    }

    pub fn mean_reward(&self, s: &ToyState, a: usize) -> Result<f64, OracleError> {
        self.child(s, a)?;
        Ok(self.mean[s.node * self.spec.k + a])
    }

    /// Internal (non-terminal) states in level order.
    pub fn internal_states(&self) -> impl Iterator<Item = ToyState> + '_ {
        (0..self.internal).map(|u| ToyState {
            node: u,
            depth: self.depth[u],
        })
    }

    pub fn digest_of(s: &ToyState) -> String {
        format!("{}:{}", s.depth, s.node)
    }

    /// `Q*(s, a)` by backward induction over mean rewards.
    pub fn q_star(&self, s: &ToyState, a: usize) -> Result<f64, OracleError> {
        self.child(s, a)?;
        Ok(self.q[s.node * self.spec.k + a])
    }

    pub fn v_star(&self, s: &ToyState) -> f64 {
        if self.is_terminal(s) {
            0.0
        } else {
            self.v[s.node]
        }
    }

    pub fn optimal_value(&self) -> f64 {
        self.v[0]
    }

    /// Exact `Q*` on every internal state.
    pub fn exact_q(&self) -> QEstimate {
        let k = self.spec.k;
        let mut out = QEstimate::new();
        for s in self.internal_states() {
            out.insert(Self::digest_of(&s), self.q[s.node * k..(s.node + 1) * k].to_vec());
        }
        out
    }

    /// Sum of mean rewards along `actions` from the root; stops at the leaf.
    pub fn value_of_actions(&self, actions: &[usize]) -> Result<f64, OracleError> {
        let mut s = self.root();
        let mut total = 0.0;
        for &a in actions {
            if self.is_terminal(&s) {
                break;
            }
            total += self.mean_reward(&s, a)?;
            s = self.child(&s, a)?;
        }
        Ok(total)
    }

    pub fn psi(&self, s: &ToyState, a: usize) -> Result<&[f64], OracleError> {
        self.child(s, a)?;
        Ok(&self.psi[s.node * self.spec.k + a])
    }

    pub fn session(&self, seed: u64) -> ToySession<'_> {
        ToySession {
            mdp: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
            counters: QueryCounters::default(),
        }
    }
}

/// Seeded, query-counting access to a [`ToyMdp`].
#[derive(Clone, Debug)]
pub struct ToySession<'a> {
    mdp: &'a ToyMdp,
    rng: ChaCha8Rng,
    pub counters: QueryCounters,
}

impl ToySession<'_> {
    pub fn mdp(&self) -> &ToyMdp {
        self.mdp
    }
}

impl LinearRlOracle for ToySession<'_> {
    type State = ToyState;

    fn initial_state(&mut self) -> Result<ToyState, OracleError> {
        Ok(self.mdp.root())
    }

    fn num_actions(&self) -> usize {
        self.mdp.spec.k
    }

    fn horizon(&self) -> usize {
        self.mdp.spec.horizon
    }

    fn feature_dim(&self) -> usize {
        self.mdp.spec.d
    }

    fn is_terminal(&self, s: &ToyState) -> bool {
        self.mdp.is_terminal(s)
    }

    fn transition(&mut self, s: &ToyState, a: usize) -> Result<ToyState, OracleError> {
        self.counters.transitions += 1;
        self.mdp.child(s, a)
    }

    fn reward_sample(&mut self, s: &ToyState, a: usize) -> Result<f64, OracleError> {
        self.counters.rewards += 1;
        let mean = self.mdp.mean_reward(s, a)?;
        if self.mdp.spec.rewards == ToyRewards::Bernoulli && s.depth + 1 == self.mdp.spec.horizon {
            return Ok(if self.rng.gen::<f64>() < mean { 1.0 } else { 0.0 });
        }
        Ok(mean)
    }

    fn features_state(&mut self, s: &ToyState) -> Result<Vec<f64>, OracleError> {
        self.counters.features += 1;
        if self.mdp.is_terminal(s) {
            return Ok(vec![0.0; self.mdp.spec.d]);
        }
        let k = self.mdp.spec.k;
        let best = argmax(&self.mdp.q[s.node * k..(s.node + 1) * k]);
        Ok(self.mdp.psi[s.node * k + best].clone())
    }

    fn features_state_action(&mut self, s: &ToyState, a: usize) -> Result<Vec<f64>, OracleError> {
        self.counters.features += 1;
        Ok(self.mdp.psi(s, a)?.to_vec())
    }

    fn digest(&self, s: &ToyState) -> String {
        ToyMdp::digest_of(s)
    }

    fn max_return(&self) -> f64 {
        match self.mdp.spec.rewards {
            ToyRewards::Bernoulli => PATH_MAX + 1.0,
            _ => PATH_MAX + LAST_STEP_MAX,
        }
    }
}
