//! Horizon-split Q estimation: the horizon is cut into segments of `L =
//! sqrt(H)` steps, all `|A|^L` continuations of each segment are enumerated,
//! and `Q*` at a segment boundary is expressed through a basis of at most
//! `d` feature vectors at the next boundary.
//!
//! Reachable states are indexed by the action strings that reach them, so
//! no deduplication of states is attempted.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::{l2_norm, select_independent, INDEPENDENCE_TOL};
use super::{argmax, greedy_on_q, LinearRlOracle, OracleError, Policy, QEstimate};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsplitConfig {
    pub eps: f64,
    pub delta: f64,
    /// Most reward samples drawn per path; the Hoeffding count is used when
    /// it is smaller.
    pub sample_cap: u64,
    /// Refuse when a single estimate would enumerate more paths.
    pub max_paths: usize,
    pub independence_tol: f64,
    pub residual_tol: f64,
}

impl Default for HsplitConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            delta: 0.1,
            sample_cap: 4000,
            max_paths: 100_000,
            independence_tol: INDEPENDENCE_TOL,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HsplitStats {
    pub segment_len: usize,
    /// `|B_j|` for each boundary after the first.
    pub basis_sizes: Vec<usize>,
    pub max_residual: f64,
    /// Largest `|alpha|_2` of any expansion.
    pub max_alpha_norm: f64,
    pub paths: u64,
    pub samples_per_path: Vec<u64>,
    /// Some Hoeffding count was larger than `sample_cap`.
    pub capped: bool,
    /// Sample counts met their bounds and every `|alpha|_2 <= sqrt(d)`, so
    /// the accuracy statement applies.
    pub guaranteed: bool,
}

struct PathRec<S> {
    pair: usize,
    steps: Vec<(S, usize)>,
    end: S,
    end_terminal: bool,
    kappa: f64,
}

struct Level<S> {
    /// Basis pairs `(s, a)` at this boundary.
    pairs: Vec<(S, usize)>,
    paths: Vec<PathRec<S>>,
    /// For each path with a non-terminal end, the expansion of
    /// `psi(end, a')` for each `a'` in the next level's basis.
    expansions: Vec<Option<Vec<Vec<f64>>>>,
}

fn integer_sqrt(h: usize) -> Option<usize> {
    let r = libm::round(libm::sqrt(h as f64)) as usize;
    (r * r == h).then_some(r)
}

fn enumerate_paths<O: LinearRlOracle + ?Sized>(
    oracle: &mut O,
    pair: usize,
    start: &O::State,
    first: usize,
    len: usize,
    out: &mut Vec<PathRec<O::State>>,
    max_paths: usize,
) -> Result<(), OracleError> {
    fn rec<O: LinearRlOracle + ?Sized>(
        oracle: &mut O,
        pair: usize,
        steps: &mut Vec<(O::State, usize)>,
        s: O::State,
        len: usize,
        out: &mut Vec<PathRec<O::State>>,
        max_paths: usize,
    ) -> Result<(), OracleError> {
        let terminal = oracle.is_terminal(&s);
        if terminal || steps.len() == len {
            if out.len() >= max_paths {
                return Err(OracleError::Refused(format!("more than {max_paths} paths to enumerate")));
            }
            out.push(PathRec {
                pair,
                steps: steps.clone(),
                end: s,
                end_terminal: terminal,
                kappa: 0.0,
            });
            return Ok(());
        }
        for a in 0..oracle.num_actions() {
            let t = oracle.transition(&s, a)?;
            steps.push((s.clone(), a));
            rec(oracle, pair, steps, t, len, out, max_paths)?;
            steps.pop();
        }
        Ok(())
    }
    let t = oracle.transition(start, first)?;
    let mut steps = vec![(start.clone(), first)];
    rec(oracle, pair, &mut steps, t, len, out, max_paths)
}

/// Estimates of `Q*(s, a)` for every action at `s`.
pub fn horizon_split_q<O>(oracle: &mut O, s: &O::State, cfg: &HsplitConfig) -> Result<(Vec<f64>, HsplitStats), OracleError>
where
    O: LinearRlOracle + ?Sized,
{
    let horizon = oracle.horizon();
    let seg = integer_sqrt(horizon)
        .ok_or_else(|| OracleError::Refused(format!("horizon {horizon} is not a perfect square")))?;
    if oracle.is_terminal(s) {
        return Err(OracleError::Terminal);
    }
    let k = oracle.num_actions();
    let d = oracle.feature_dim();
    let mut stats = HsplitStats {
        segment_len: seg,
        ..HsplitStats::default()
    };

    // Forward pass: paths and bases.
    let mut levels: Vec<Level<O::State>> = Vec::new();
    let mut pairs: Vec<(O::State, usize)> = (0..k).map(|a| (s.clone(), a)).collect();
    let mut total_paths = 0usize;
    loop {
        let mut paths = Vec::new();
        for (i, (ps, pa)) in pairs.iter().enumerate() {
            enumerate_paths(oracle, i, ps, *pa, seg, &mut paths, cfg.max_paths - total_paths)?;
        }
        total_paths += paths.len();
        let mut cand_states = Vec::new();
        let mut cand_feats = Vec::new();
        for p in paths.iter().filter(|p| !p.end_terminal) {
            for a in 0..k {
                cand_states.push((p.end.clone(), a));
                cand_feats.push(oracle.features_state_action(&p.end, a)?);
            }
        }
        if cand_feats.is_empty() {
            let n = paths.len();
            levels.push(Level {
                pairs,
                paths,
                expansions: (0..n).map(|_| None).collect(),
            });
            break;
        }
        let (basis, picked) = select_independent(&cand_feats, cfg.independence_tol);
        if basis.len() > d {
            return Err(OracleError::Expansion(format!("basis of size {} exceeds d = {d}", basis.len())));
        }
        stats.basis_sizes.push(basis.len());
        let mut expansions = Vec::with_capacity(paths.len());
        let mut c = 0;
        for p in &paths {
            if p.end_terminal {
                expansions.push(None);
                continue;
            }
            let mut per_action = Vec::with_capacity(k);
            for _ in 0..k {
                let (alpha, resid) = basis.expand(&cand_feats[c]);
                if resid.is_nan() || resid > cfg.residual_tol {
                    return Err(OracleError::Expansion(format!("residual {resid:e} above {:e}", cfg.residual_tol)));
                }
                stats.max_residual = stats.max_residual.max(resid);
                stats.max_alpha_norm = stats.max_alpha_norm.max(l2_norm(&alpha));
                per_action.push(alpha);
                c += 1;
            }
            expansions.push(Some(per_action));
        }
        levels.push(Level {
            pairs,
            paths,
            expansions,
        });
        pairs = picked.into_iter().map(|i| cand_states[i].clone()).collect();
    }
    stats.paths = total_paths as u64;

    // Path rewards. Level j needs accuracy tau_j / 2 with
    // tau_j = eps / (2H) / (2d)^j.
    let range = oracle.max_return();
    let log_term = libm::log(2.0 * total_paths.max(1) as f64 / cfg.delta);
    let tau0 = cfg.eps / (2.0 * horizon as f64);
    for (j, level) in levels.iter_mut().enumerate() {
        let tau = tau0 / libm::pow(2.0 * d as f64, j as f64);
        let need = libm::ceil(range * range * log_term / (2.0 * (tau / 2.0) * (tau / 2.0)));
        let n = if need > cfg.sample_cap as f64 {
            stats.capped = true;
            cfg.sample_cap
        } else {
            (need as u64).max(1)
        };
        stats.samples_per_path.push(n);
        for p in &mut level.paths {
            let mut total = 0.0;
            for _ in 0..n {
                for (st, a) in &p.steps {
                    total += oracle.reward_sample(st, *a)?;
                }
            }
            p.kappa = total / n as f64;
        }
    }

    // Backward pass.
    let mut next_q: Vec<f64> = Vec::new();
    for level in levels.iter().rev() {
        let mut q = vec![f64::NEG_INFINITY; level.pairs.len()];
        for (p, exp) in level.paths.iter().zip(&level.expansions) {
            let tail = match exp {
                None => 0.0,
                Some(per_action) => per_action
                    .iter()
                    .map(|alpha| alpha.iter().zip(&next_q).map(|(x, y)| x * y).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max),
            };
            q[p.pair] = q[p.pair].max(p.kappa + tail);
        }
        next_q = q;
    }
    stats.guaranteed = !stats.capped && stats.max_alpha_norm <= libm::sqrt(d as f64) + 1e-12;
    Ok((next_q, stats))
}

/// Follow `argmax Q~` from the initial state, estimating `Q~` afresh at each
/// visited state with confidence `delta / H`. Returns the argmax policy over
/// the collected estimates.
pub fn horizon_split_policy<O>(oracle: &mut O, cfg: &HsplitConfig) -> Result<(Policy, Vec<HsplitStats>), OracleError>
where
    O: LinearRlOracle + ?Sized,
{
    let horizon = oracle.horizon();
    let per_state = HsplitConfig {
        delta: cfg.delta / horizon.max(1) as f64,
        ..cfg.clone()
    };
    let mut q = QEstimate::new();
    let mut all = Vec::new();
    let mut s = oracle.initial_state()?;
    while !oracle.is_terminal(&s) {
        let (row, stats) = horizon_split_q(oracle, &s, &per_state)?;
        let a = argmax(&row);
        q.insert(oracle.digest(&s), row);
        all.push(stats);
        s = oracle.transition(&s, a)?;
    }
    Ok((greedy_on_q(q), all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::rollout;
    use crate::agents::toy::{ToyMdp, ToyRewards, ToySpec};

    fn toy(d: usize, k: usize, horizon: usize, rewards: ToyRewards, seed: u64) -> ToyMdp {
        ToyMdp::new(ToySpec {
            d,
            k,
            horizon,
            rewards,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn deterministic_rewards_give_exact_q() {
        for seed in 0..5 {
            let mdp = toy(3, 2, 4, ToyRewards::Deterministic, seed);
            let mut sess = mdp.session(seed);
            let root = mdp.root();
            let (q, stats) = horizon_split_q(&mut sess, &root, &HsplitConfig::default()).unwrap();
            for a in 0..2 {
                assert!((q[a] - mdp.q_star(&root, a).unwrap()).abs() < 1e-9, "{q:?}");
            }
            assert!(stats.basis_sizes.iter().all(|&b| b <= 3));
            assert!(stats.max_residual <= 1e-8);
        }
    }

    #[test]
    fn rejects_non_square_horizon() {
        let mdp = toy(2, 2, 3, ToyRewards::Zero, 0);
        let mut sess = mdp.session(0);
        let root = mdp.root();
        assert!(matches!(
            horizon_split_q(&mut sess, &root, &HsplitConfig::default()),
            Err(OracleError::Refused(_))
        ));
    }

    #[test]
    fn policy_is_near_optimal_on_a_small_toy() {
        let mdp = toy(2, 2, 4, ToyRewards::Bernoulli, 3);
        let mut sess = mdp.session(1);
        let (mut policy, _) = horizon_split_policy(&mut sess, &HsplitConfig::default()).unwrap();
        let traj = rollout(&mut sess, &mut policy).unwrap();
        let v = mdp.value_of_actions(&traj.actions()).unwrap();
        assert!(v >= mdp.optimal_value() - 0.1);
    }
}
