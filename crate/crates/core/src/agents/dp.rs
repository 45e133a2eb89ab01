//! Greedy policy and exhaustive value oracles for the SAT-derived MDP.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;

use serde::{Deserialize, Serialize};

use crate::cnf::Assignment;
use crate::mdp::{MdpError, MdpInstance, MdpState, Stage, NUM_ACTIONS};
use crate::polyfeat::{self, MAX_FEATURE_VARS};

/// The action that moves `w` toward `wstar`: in Stage One the lowest clause
/// position whose variable disagrees with `wstar`, in Stage Two a flip iff
/// the offered variable disagrees.
pub fn greedy_action(inst: &MdpInstance, s: &MdpState, wstar: &Assignment) -> Result<usize, MdpError> {
    match s.stage {
        Stage::Terminal(_) => Err(MdpError::Terminal),
        Stage::One { clause } => {
            let vars = inst.formula().clause(clause).sorted_vars();
            vars.iter().position(|&x| s.w.get(x) != wstar.get(x)).ok_or_else(|| {
                MdpError::Invalid(format!(
                    "invariant violated: clause {clause} is unsatisfied yet agrees with wstar on all its variables"
                ))
            })
        }
        Stage::Two { var } => Ok(usize::from(s.w.get(var) != wstar.get(var))),
    }
}

/// Mean return of the greedy policy from `s`, using the instance's exact
/// terminal means.
pub fn greedy_value(inst: &MdpInstance, s: &MdpState, wstar: &Assignment) -> Result<f64, MdpError> {
    let mut s = s.clone();
    while !s.is_terminal() {
        s = inst.transition(&s, greedy_action(inst, &s, wstar)?)?;
    }
    inst.terminal_mean(&s)
}

struct DpFrame {
    state: MdpState,
    next: usize,
    best: f64,
}

/// `V*(s)` by exhaustive max-over-actions recursion (explicit stack). Refuses
/// once more than `node_budget` non-terminal states have been expanded.
pub fn exact_value_dp(inst: &MdpInstance, s: &MdpState, node_budget: u64) -> Result<f64, MdpError> {
    if s.is_terminal() {
        return Ok(0.0);
    }
    let mut stack = vec![DpFrame {
        state: s.clone(),
        next: 0,
        best: f64::NEG_INFINITY,
    }];
    let mut expanded = 1u64;
    let mut returned: Option<f64> = None;
    loop {
        let top = stack.last_mut().expect("stack is non-empty inside the loop");
        if let Some(v) = returned.take() {
            top.best = top.best.max(v);
        }
        if top.next == NUM_ACTIONS {
            let v = top.best;
            stack.pop();
            if stack.is_empty() {
                return Ok(v);
            }
            returned = Some(v);
            continue;
        }
        let a = top.next;
        top.next += 1;
        let t = inst.transition(&top.state, a)?;
        if t.is_terminal() {
            let r = inst.terminal_mean(&t)?;
            top.best = top.best.max(r);
            continue;
        }
        expanded += 1;
        if expanded > node_budget {
            return Err(MdpError::Refused(format!("exact DP exceeds the node budget {node_budget}")));
        }
        stack.push(DpFrame {
            state: t,
            next: 0,
            best: f64::NEG_INFINITY,
        });
    }
}

/// Results of [`sweep_tree`] over every reachable non-terminal state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub states: u64,
    pub terminals: u64,
    /// `max |<psi(s), theta(w*)> - V_greedy(s)|`.
    pub max_linearity_error: f64,
    /// `max |V*(s) - V_greedy(s)|`.
    pub max_optimality_gap: f64,
    pub root_optimal: f64,
    pub root_greedy: f64,
}

struct SweepFrame {
    state: MdpState,
    actions: &'static [usize],
    next: usize,
    q_opt: [f64; NUM_ACTIONS],
    q_greedy: [f64; NUM_ACTIONS],
    greedy: usize,
}

const ALL_ACTIONS: [usize; 3] = [0, 1, 2];
// In Stage Two actions 0 and 2 lead to the same child.
const STAGE_TWO_ACTIONS: [usize; 2] = [0, 1];

fn mask(bits: impl Iterator<Item = bool>) -> u64 {
    bits.enumerate().fold(0, |m, (i, b)| if b { m | (1 << i) } else { m })
}

/// Post-order walk of the whole tree below the initial state, computing
/// `V*` and the greedy value at every state and comparing the greedy value
/// with `<psi(s), theta(w*)>`.
///
/// `psi(s)` is `G * tail(s)` where the tail polynomial depends only on
/// `(n, within-round distance, w, free)`; its inner product with `theta` is
/// cached on that key.
pub fn sweep_tree(inst: &MdpInstance, node_budget: u64) -> Result<SweepReport, MdpError> {
    let wstar = match (inst.wstar(), inst.mode()) {
        (Some(w), crate::mdp::Mode::Full) => w.clone(),
        _ => return Err(MdpError::NoExactReward),
    };
    let v = inst.formula().num_vars();
    if v > MAX_FEATURE_VARS {
        return Err(MdpError::Refused(format!("sweep needs v <= {MAX_FEATURE_VARS}")));
    }
    let index = inst.subset_index()?;
    let theta = polyfeat::theta_vector(&wstar, index)?;
    let params = inst.params();
    let mut tail_cache: BTreeMap<(usize, usize, u64, u64), f64> = BTreeMap::new();
    let mut linear_value = |s: &MdpState| -> Result<f64, MdpError> {
        let within = s.w_round.dist(&s.w);
        let key = (
            s.n,
            within,
            mask((0..v).map(|x| s.w.get(x))),
            mask((0..v).map(|x| s.free.contains(x))),
        );
        let tail = match tail_cache.get(&key) {
            Some(&t) => t,
            None => {
                let poly = polyfeat::greedy_tail_poly(params, s.n, within, &s.w, &s.free)?;
                let t = polyfeat::inner_product(&polyfeat::to_feature_vector(&poly, index)?, &theta)?;
                tail_cache.insert(key, t);
                t
            }
        };
        Ok(polyfeat::history_factor(params, &s.round_dists) * tail)
    };

    let mut report = SweepReport::default();
    let root = inst.initial_state();
    if root.is_terminal() {
        return Ok(report);
    }
    let frame = |state: MdpState| -> Result<SweepFrame, MdpError> {
        let actions: &'static [usize] = match state.stage {
            Stage::Two { .. } => &STAGE_TWO_ACTIONS,
            _ => &ALL_ACTIONS,
        };
        let greedy = greedy_action(inst, &state, &wstar)?;
        Ok(SweepFrame {
            state,
            actions,
            next: 0,
            q_opt: [f64::NEG_INFINITY; NUM_ACTIONS],
            q_greedy: [f64::NEG_INFINITY; NUM_ACTIONS],
            greedy,
        })
    };
    let mut stack = vec![frame(root)?];
    report.states = 1;
    let mut returned: Option<(f64, f64)> = None;
    loop {
        let top = stack.last_mut().expect("stack is non-empty inside the loop");
        if let Some((opt, gr)) = returned.take() {
            let a = top.actions[top.next - 1];
            top.q_opt[a] = opt;
            top.q_greedy[a] = gr;
        }
        if top.next == top.actions.len() {
            let opt = top.actions.iter().map(|&a| top.q_opt[a]).fold(f64::NEG_INFINITY, f64::max);
            let gr = top.q_greedy[top.greedy];
            let lin = linear_value(&top.state)?;
            report.max_linearity_error = report.max_linearity_error.max((lin - gr).abs());
            report.max_optimality_gap = report.max_optimality_gap.max((opt - gr).abs());
            stack.pop();
            if stack.is_empty() {
                report.root_optimal = opt;
                report.root_greedy = gr;
                return Ok(report);
            }
            returned = Some((opt, gr));
            continue;
        }
        let a = top.actions[top.next];
        top.next += 1;
        let t = inst.transition(&top.state, a)?;
        if t.is_terminal() {
            let r = inst.terminal_mean(&t)?;
            top.q_opt[a] = r;
            top.q_greedy[a] = r;
            report.terminals += 1;
            continue;
        }
        report.states += 1;
        if report.states > node_budget {
            return Err(MdpError::Refused(format!("sweep exceeds the node budget {node_budget}")));
        }
        let child = frame(t)?;
        stack.push(child);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_dimacs, ParseMode};
    use crate::mdp::{InstanceOptions, Mode};
    use crate::random::{gap_unsat_blocks, planted_3cnf, random_assignment};
    use crate::reward::RewardParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EXAMPLE: &str = "p cnf 5 5\n1 -2 3 0\n3 4 5 0\n1 4 5 0\n1 -2 -3 0\n1 -2 -5 0\n";

    fn bits(s: &str) -> Assignment {
        Assignment::from_bit_string(s).unwrap()
    }

    /// Planted instance whose all-false start does not terminate at once.
    fn tiny(seed: u64, v: usize, h: usize) -> MdpInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let w = random_assignment(&mut rng, v);
            let f = planted_3cnf(&mut rng, &w, v + 2, 6).unwrap();
            let params = RewardParams::new(2, 4, 1.0 / 16.0, v, 0.1, 6).unwrap().with_rounds(h).unwrap();
            let inst = MdpInstance::build(f, params, Some(w), Mode::Full).unwrap();
            if !inst.initial_state().is_terminal() {
                return inst;
            }
        }
    }

    #[test]
    fn greedy_flips_c_at_example_formula_root() {
        let f = parse_dimacs(EXAMPLE, ParseMode::Strict).unwrap();
        let params = RewardParams::new(2, 2, 0.5, 5, 0.1, 6).unwrap();
        let inst = MdpInstance::build_with(
            f,
            params,
            InstanceOptions {
                wstar: Some(bits("00101")),
                start: Some(bits("01000")),
                ..InstanceOptions::default()
            },
        )
        .unwrap();
        let s = inst.initial_state();
        // clause (a | ~b | c) with wstar = 00101: b and c disagree, b comes first
        assert_eq!(greedy_action(&inst, &s, &bits("00101")).unwrap(), 1);
        // against the round-end assignment 01111 only c disagrees
        assert_eq!(greedy_action(&inst, &s, &bits("01111")).unwrap(), 2);
    }

    #[test]
    fn greedy_keeps_agreeing_variable() {
        let inst = tiny(3, 5, 2);
        let w = inst.wstar().unwrap().clone();
        let mut s = inst.initial_state();
        while !s.is_terminal() {
            if let Stage::Two { var } = s.stage {
                let a = greedy_action(&inst, &s, &w).unwrap();
                assert_eq!(a == 1, s.w.get(var) != w.get(var));
            }
            s = inst.transition(&s, greedy_action(&inst, &s, &w).unwrap()).unwrap();
        }
    }

    #[test]
    fn greedy_reaches_wstar_within_one_round() {
        for seed in 0..20 {
            let inst = tiny(seed, 6, 2);
            let w = inst.wstar().unwrap().clone();
            let mut s = inst.initial_state();
            while !s.is_terminal() {
                s = inst.transition(&s, greedy_action(&inst, &s, &w).unwrap()).unwrap();
            }
            assert_eq!(s.n, 1);
            assert!(s.step <= 6);
        }
    }

    #[test]
    fn dp_is_zero_on_unsatisfiable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = gap_unsat_blocks(&mut rng, 1);
        let params = RewardParams::new(2, 2, 1.0, 3, 0.1, 8).unwrap();
        let inst = MdpInstance::build(f, params, None, Mode::Full).unwrap();
        assert_eq!(exact_value_dp(&inst, &inst.initial_state(), 1_000_000).unwrap(), 0.0);
    }

    #[test]
    fn dp_at_root_is_first_round_reward() {
        let inst = tiny(7, 5, 2);
        let s = inst.initial_state();
        let d = s.w.dist(inst.wstar().unwrap()) as f64;
        let v = exact_value_dp(&inst, &s, 10_000_000).unwrap();
        assert!((v - inst.params().g(1, d).unwrap()).abs() < 1e-12, "{v}");
        assert!(v >= 0.25);
    }

    #[test]
    fn dp_refuses_over_budget() {
        let inst = tiny(7, 6, 2);
        assert!(matches!(
            exact_value_dp(&inst, &inst.initial_state(), 10),
            Err(MdpError::Refused(_))
        ));
    }

    #[test]
    fn sweep_agrees_with_naive_dp() {
        let inst = tiny(11, 5, 2);
        let report = sweep_tree(&inst, 10_000_000).unwrap();
        let naive = exact_value_dp(&inst, &inst.initial_state(), 10_000_000).unwrap();
        assert_eq!(report.root_optimal, naive);
        assert!(report.max_linearity_error < 1e-10);
        assert!(report.max_optimality_gap < 1e-12);
        let w = inst.wstar().unwrap();
        assert_eq!(report.root_greedy, greedy_value(&inst, &inst.initial_state(), w).unwrap());
    }
}
