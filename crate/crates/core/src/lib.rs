//! Hard instances for reinforcement learning with linear value functions.
//!
//! A 3-CNF formula is compiled into a deterministic, tree-shaped, 3-action
//! MDP whose optimal value function is linear in low-dimensional features,
//! yet where finding a near-optimal policy is as hard as deciding the
//! formula. The crate provides:
//!
//! * [`cnf`]: formulas, DIMACS parsing and exhaustive SAT / Max-SAT oracles.
//! * [`gapsat`]: the bounded-occurrence transformation and gap-promise checks.
//! * [`reward`]: Taylor-truncated reward polynomials and their grid verifiers.
//! * [`polyfeat`]: multilinear polynomial arithmetic and feature vectors.
//! * [`mdp`]: the round-based MDP engine and its oracle sessions.
//! * [`agents`]: greedy and exact-DP oracles, the RL-to-SAT reduction and
//!   the two exhaustive-search RL algorithms over an abstract linear oracle.
//!
//! The crate is `no_std` (with `alloc`); file IO and the command line live
//! in the companion `hardlinrl` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod agents;
pub mod bitset;
pub mod cnf;
pub mod gapsat;
pub mod mdp;
pub mod polyfeat;
pub mod random;
pub mod reward;

pub use bitset::VarSet;
pub use cnf::{Assignment, Clause, Formula, Literal};
pub use mdp::{MdpInstance, MdpState, Mode, OracleSession};
pub use reward::RewardParams;
