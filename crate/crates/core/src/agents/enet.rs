//! Policy search over a lattice cover of the parameter ball.
//!
//! Every `theta` in the cover induces the policy `argmax_a <theta, psi(s, a)>`.
//! On a deterministic tree MDP that policy is a single root-to-leaf path, so
//! the cover is first walked to collect the distinct paths and each path is
//! then sampled enough times for a Hoeffding bound with `delta / |cover|`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{dot, LinearRlOracle, OracleError, Policy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnetConfig {
    pub eps: f64,
    pub delta: f64,
    /// Refuse when the cover has more points than this.
    pub max_cover: u64,
    /// Refuse when more than this many distinct states would be cached.
    pub max_states: usize,
}

impl Default for EnetConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            delta: 0.1,
            max_cover: 100_000_000,
            max_states: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnetResult {
    pub theta: Vec<f64>,
    pub actions: Vec<usize>,
    pub estimate: f64,
    pub cover_size: u64,
    pub spacing: f64,
    pub distinct_paths: usize,
    pub samples_per_path: u64,
}

/// `eps / (2 H sqrt(d))`: distance from `theta*` that keeps every
/// `<theta, psi>` within `eps / (2H)` of `Q*`.
pub fn cover_radius(eps: f64, horizon: usize, d: usize) -> f64 {
    eps / (2.0 * horizon as f64 * libm::sqrt(d as f64))
}

/// Lattice spacing whose nearest-point distance is at most half the radius.
pub fn cover_spacing(eps: f64, horizon: usize, d: usize) -> f64 {
    cover_radius(eps, horizon, d) / libm::sqrt(d as f64)
}

/// Norm bound of kept lattice points: any point of the unit ball rounds to
/// a lattice point inside it.
fn ball_bound(spacing: f64, d: usize) -> f64 {
    1.0 + spacing * libm::sqrt(d as f64) / 2.0
}

fn max_index(r2: f64, spacing: f64) -> i64 {
    libm::floor(libm::sqrt(r2.max(0.0)) / spacing + 1e-9) as i64
}

/// Number of points `z spacing` (integer `z`) with norm at most the bound.
pub fn lattice_count(d: usize, spacing: f64) -> u64 {
    fn rec(left: usize, r2: f64, spacing: f64) -> u64 {
        let m = max_index(r2, spacing);
        if left == 1 {
            return (2 * m + 1) as u64;
        }
        (-m..=m)
            .map(|z| {
                let x = z as f64 * spacing;
                rec(left - 1, r2 - x * x, spacing)
            })
            .sum()
    }
    let r = ball_bound(spacing, d);
    rec(d, r * r, spacing)
}

/// Call `f` on every lattice point of the cover, in lexicographic order of
/// the integer coordinates.
pub fn lattice_cover(d: usize, spacing: f64, f: &mut dyn FnMut(&[f64])) {
    fn rec(theta: &mut [f64], j: usize, r2: f64, spacing: f64, f: &mut dyn FnMut(&[f64])) {
        let m = max_index(r2, spacing);
        for z in -m..=m {
            let x = z as f64 * spacing;
            theta[j] = x;
            if j + 1 == theta.len() {
                f(theta);
            } else {
                rec(theta, j + 1, r2 - x * x, spacing, f);
            }
        }
    }
    let r = ball_bound(spacing, d);
    let mut theta = vec![0.0; d];
    rec(&mut theta, 0, r * r, spacing, f);
}

struct Node<S> {
    state: S,
    terminal: bool,
    /// `psi(s, a)` for all actions, row-major; empty until expanded.
    feats: Vec<f64>,
    children: Vec<Option<usize>>,
    parent: Option<(usize, usize)>,
}

struct Arena<'o, O: LinearRlOracle + ?Sized> {
    oracle: &'o mut O,
    nodes: Vec<Node<O::State>>,
    index: BTreeMap<String, usize>,
    max_states: usize,
}

impl<O: LinearRlOracle + ?Sized> Arena<'_, O> {
    fn add(&mut self, state: O::State, parent: Option<(usize, usize)>) -> Result<usize, OracleError> {
        let digest = self.oracle.digest(&state);
        if let Some(&i) = self.index.get(&digest) {
            return Ok(i);
        }
        if self.nodes.len() >= self.max_states {
            return Err(OracleError::Refused(format!("more than {} distinct states", self.max_states)));
        }
        let terminal = self.oracle.is_terminal(&state);
        let k = self.oracle.num_actions();
        self.nodes.push(Node {
            state,
            terminal,
            feats: Vec::new(),
            children: vec![None; k],
            parent,
        });
        self.index.insert(digest, self.nodes.len() - 1);
        Ok(self.nodes.len() - 1)
    }

    fn expand(&mut self, u: usize) -> Result<(), OracleError> {
        if !self.nodes[u].feats.is_empty() {
            return Ok(());
        }
        let k = self.oracle.num_actions();
        let d = self.oracle.feature_dim();
        let mut feats = Vec::with_capacity(k * d);
        for a in 0..k {
            let psi = self.oracle.features_state_action(&self.nodes[u].state, a)?;
            if psi.len() != d {
                return Err(OracleError::Refused(format!("feature length {} != {d}", psi.len())));
            }
            feats.extend_from_slice(&psi);
        }
        self.nodes[u].feats = feats;
        Ok(())
    }

    fn child(&mut self, u: usize, a: usize) -> Result<usize, OracleError> {
        if let Some(c) = self.nodes[u].children[a] {
            return Ok(c);
        }
        let t = self.oracle.transition(&self.nodes[u].state, a)?;
        let c = self.add(t, Some((u, a)))?;
        self.nodes[u].children[a] = Some(c);
        Ok(c)
    }

    /// Endpoint of the policy induced by `theta`.
    fn walk(&mut self, theta: &[f64]) -> Result<usize, OracleError> {
        let k = self.oracle.num_actions();
        let d = theta.len();
        let mut u = 0;
        while !self.nodes[u].terminal {
            self.expand(u)?;
            let feats = &self.nodes[u].feats;
            let mut best = 0;
            let mut best_score = dot(theta, &feats[..d]);
            for a in 1..k {
                let score = dot(theta, &feats[a * d..(a + 1) * d]);
                if score > best_score {
                    best = a;
                    best_score = score;
                }
            }
            u = self.child(u, best)?;
        }
        Ok(u)
    }

    fn path_to(&self, mut u: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        while let Some((p, a)) = self.nodes[u].parent {
            out.push((p, a));
            u = p;
        }
        out.reverse();
        out
    }
}

/// Search the cover for the empirically best induced policy. With
/// probability at least `1 - delta` the result is within `2 eps` of optimal.
pub fn epsilon_net_search<O>(oracle: &mut O, cfg: &EnetConfig) -> Result<(Policy, EnetResult), OracleError>
where
    O: LinearRlOracle + ?Sized,
{
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(OracleError::Refused(String::from("eps and delta must lie in (0, 1)")));
    }
    let d = oracle.feature_dim();
    let horizon = oracle.horizon();
    let spacing = cover_spacing(cfg.eps, horizon, d);
    // Cheap upper bound before the exact count.
    let per_axis = 2.0 * libm::floor(ball_bound(spacing, d) / spacing) + 1.0;
    if libm::pow(per_axis, d as f64) > 64.0 * cfg.max_cover as f64 {
        return Err(OracleError::Refused(format!(
            "cover needs about {per_axis:.0}^{d} lattice points, over the limit {}",
            cfg.max_cover
        )));
    }
    let cover_size = lattice_count(d, spacing);
    if cover_size > cfg.max_cover {
        return Err(OracleError::Refused(format!(
            "cover has {cover_size} points, over the limit {}",
            cfg.max_cover
        )));
    }
    let range = oracle.max_return();
    let root = oracle.initial_state()?;
    let mut arena = Arena {
        oracle,
        nodes: Vec::new(),
        index: BTreeMap::new(),
        max_states: cfg.max_states,
    };
    arena.add(root, None)?;

    // endpoint -> first theta reaching it
    let mut endpoints: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut failure: Option<OracleError> = None;
    lattice_cover(d, spacing, &mut |theta| {
        if failure.is_some() {
            return;
        }
        match arena.walk(theta) {
            Ok(u) => {
                endpoints.entry(u).or_insert_with(|| theta.to_vec());
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let delta_each = cfg.delta / cover_size as f64;
    let samples = libm::ceil(range * range * libm::log(2.0 / delta_each) / (2.0 * cfg.eps * cfg.eps)).max(1.0) as u64;
    let mut best: Option<(f64, usize)> = None;
    for &end in endpoints.keys() {
        let path = arena.path_to(end);
        let mut total = 0.0;
        for _ in 0..samples {
            for &(u, a) in &path {
                total += arena.oracle.reward_sample(&arena.nodes[u].state, a)?;
            }
        }
        let estimate = total / samples as f64;
        if best.is_none_or(|(b, _)| estimate > b) {
            best = Some((estimate, end));
        }
    }
    let (estimate, end) = best.expect("the cover contains the origin");
    let actions: Vec<usize> = arena.path_to(end).into_iter().map(|(_, a)| a).collect();
    let theta = endpoints[&end].clone();
    let result = EnetResult {
        theta: theta.clone(),
        actions,
        estimate,
        cover_size,
        spacing,
        distinct_paths: endpoints.len(),
        samples_per_path: samples,
    };
    Ok((Policy::Linear { theta }, result))
}
