//! Bounded-occurrence transformation and gap-promise checks.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{self, Assignment, Clause, CnfError, Formula, Literal};

/// Smallest occurrence bound the cycle gadget can meet: each copy sits in one
/// original clause plus two padded links (four clauses).
pub const MIN_OCCURRENCE_BOUND: usize = 5;

/// Worst-case size ratio of the transform (all-unit input).
pub const SIZE_CONSTANT_LENIENT: usize = 12;
/// Worst-case size ratio for strict 3-CNF input.
pub const SIZE_CONSTANT_STRICT: usize = 7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GapError {
    #[error("occurrence bound {b} is below the supported minimum {MIN_OCCURRENCE_BOUND}")]
    BoundTooSmall { b: usize },
    #[error("epsilon {0} is not in (0, 1)")]
    Epsilon(f64),
    #[error("formula has {m} clauses but {v} variables; at least v clauses are required")]
    TooFewClauses { v: usize, m: usize },
    #[error("variable occurs in {occ} clauses, above the bound {b}")]
    OccurrenceBound { occ: usize, b: usize },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Smallest integer number of unsatisfied clauses that counts as an
/// `epsilon` fraction of `m`. Products within 1e-9 of an integer snap to it,
/// so `0.25 * 8` is exactly 2.
pub fn gap_threshold(epsilon: f64, m: usize) -> usize {
    let x = epsilon * m as f64;
    let r = libm::round(x);
    if libm::fabs(x - r) < 1e-9 {
        r as usize
    } else {
        libm::ceil(x) as usize
    }
}

/// `true` when `satisfied` is more than a `(1 - epsilon)` fraction of `m`.
pub fn is_gap_satisfied(satisfied: usize, m: usize, epsilon: f64) -> bool {
    m - satisfied < gap_threshold(epsilon, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "max_sat", rename_all = "snake_case")]
pub enum PromiseStatus {
    Satisfiable,
    GapUnsatisfiable,
    PromiseViolated(usize),
}

/// Classify `f` under the `epsilon`-gap promise by exhaustive Max-SAT.
/// The unsatisfiable side is inclusive: `max_sat <= (1 - epsilon) * m`.
pub fn check_gap_promise(f: &Formula, epsilon: f64, limit: usize) -> Result<PromiseStatus, GapError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GapError::Epsilon(epsilon));
    }
    let (best, _) = cnf::brute_force_max_sat(f, limit)?;
    let m = f.num_clauses();
    Ok(if best == m {
        PromiseStatus::Satisfiable
    } else if m - best >= gap_threshold(epsilon, m) {
        PromiseStatus::GapUnsatisfiable
    } else {
        PromiseStatus::PromiseViolated(best)
    })
}

/// A formula that meets the structural side of the gap problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapInstance {
    pub formula: Formula,
    pub b: usize,
    pub epsilon: f64,
}

impl GapInstance {
    pub fn new(formula: Formula, b: usize, epsilon: f64) -> Result<Self, GapError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GapError::Epsilon(epsilon));
        }
        formula.check_strict()?;
        let (v, m) = (formula.num_vars(), formula.num_clauses());
        if m < v {
            return Err(GapError::TooFewClauses { v, m });
        }
        let occ = cnf::occurrence_bound(&formula);
        if occ > b {
            return Err(GapError::OccurrenceBound { occ, b });
        }
        Ok(Self { formula, b, epsilon })
    }
}

/// Output of [`bounded_occurrence_transform`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transformed {
    pub formula: Formula,
    /// For each input variable, the output variables standing for it. The
    /// first entry is always the input index itself.
    pub copies: Vec<Vec<usize>>,
    /// Proven upper bound on `|out| / |in|` for this kind of input.
    pub size_constant: usize,
}

impl Transformed {
    /// Output assignment that copies `a` onto every copy and sets auxiliary
    /// variables to false. Satisfies the output whenever `a` satisfies the
    /// input.
    pub fn lift(&self, a: &Assignment) -> Assignment {
        let mut out = Assignment::all_false(self.formula.num_vars());
        for (x, cs) in self.copies.iter().enumerate() {
            for &c in cs {
                out.set(c, a.get(x));
            }
        }
        out
    }

    /// Input assignment read off the first copy of each variable.
    pub fn project(&self, a: &Assignment) -> Assignment {
        let bools: Vec<bool> = self.copies.iter().map(|cs| a.get(cs[0])).collect();
        Assignment::from_bools(&bools)
    }

    pub fn size_ratio(&self, input: &Formula) -> f64 {
        self.formula.num_clauses() as f64 / input.num_clauses() as f64
    }
}

struct Builder {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }
}

/// Rewrite `f` as a strict 3-CNF in which every variable occurs in at most
/// `b` clauses.
///
/// Short clauses are padded with fresh variables so that each padded group
/// loses exactly one clause whenever the original clause is false.
/// Tautologies become a clause over three fresh variables. A variable with
/// more than `b` occurrences is split into one copy per occurrence, and the
/// copies are chained by the implication cycle `!c_i | c_{i+1}`, each link
/// padded into two clauses with a fresh variable. Satisfiability is preserved
/// in both directions.
pub fn bounded_occurrence_transform(f: &Formula, b: usize) -> Result<Transformed, GapError> {
    if b < MIN_OCCURRENCE_BOUND {
        return Err(GapError::BoundTooSmall { b });
    }
    let v = f.num_vars();
    let identity_copies = || (0..v).map(|x| vec![x]).collect::<Vec<_>>();
    let size_constant = if f.is_strict() {
        SIZE_CONSTANT_STRICT
    } else {
        SIZE_CONSTANT_LENIENT
    };
    if f.is_strict() && cnf::occurrence_bound(f) <= b {
        return Ok(Transformed {
            formula: f.clone(),
            copies: identity_copies(),
            size_constant,
        });
    }

    // Normalize to strict 3-CNF.
    let mut bld = Builder {
        num_vars: v,
        clauses: Vec::with_capacity(f.num_clauses()),
    };
    for c in f.clauses() {
        let mut lits: Vec<Literal> = c.literals().to_vec();
        lits.sort();
        lits.dedup();
        let tautology = lits.windows(2).any(|w| w[0].var == w[1].var);
        if tautology {
            let t: Vec<Literal> = (0..3).map(|_| Literal::neg(bld.fresh())).collect();
            bld.clauses.push(Clause::new(t));
            continue;
        }
        match lits.len() {
            3 => bld.clauses.push(Clause::new(lits)),
            2 => {
                let z = bld.fresh();
                for neg in [false, true] {
                    bld.clauses.push(Clause::three(lits[0], lits[1], Literal { var: z, negated: neg }));
                }
            }
            1 => {
                let (y, z) = (bld.fresh(), bld.fresh());
                for (ny, nz) in [(false, false), (false, true), (true, false), (true, true)] {
                    bld.clauses.push(Clause::three(
                        lits[0],
                        Literal { var: y, negated: ny },
                        Literal { var: z, negated: nz },
                    ));
                }
            }
            _ => unreachable!("formula clauses hold 1 to 3 literals"),
        }
    }

    // Split over-used variables.
    let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); bld.num_vars];
    for (ci, c) in bld.clauses.iter().enumerate() {
        for (li, l) in c.literals().iter().enumerate() {
            occ[l.var].push((ci, li));
        }
    }
    let mut copies = identity_copies();
    let mut links = Vec::new();
    for (x, places) in occ.iter().enumerate() {
        if places.len() <= b {
            continue;
        }
        let k = places.len();
        let mut cs = Vec::with_capacity(k);
        cs.push(x);
        for _ in 1..k {
            cs.push(bld.fresh());
        }
        for (j, &(ci, li)) in places.iter().enumerate() {
            let mut lits = bld.clauses[ci].literals().to_vec();
            lits[li].var = cs[j];
            bld.clauses[ci] = Clause::new(lits);
        }
        for j in 0..k {
            let z = bld.fresh();
            for neg in [false, true] {
                links.push(Clause::three(
                    Literal::neg(cs[j]),
                    Literal::pos(cs[(j + 1) % k]),
                    Literal { var: z, negated: neg },
                ));
            }
        }
        if x < v {
            copies[x] = cs;
        }
    }
    bld.clauses.extend(links);
    let formula = Formula::new(bld.num_vars, bld.clauses)?;
    debug_assert!(formula.is_strict());
    debug_assert!(cnf::occurrence_bound(&formula) <= b);
    Ok(Transformed {
        formula,
        copies,
        size_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{branch_and_bound_max_sat, brute_force_max_sat, brute_force_sat, occurrence_bound, satisfied_count};

    fn contradiction() -> Formula {
        Formula::from_dimacs_clauses(1, &[&[1], &[-1]]).unwrap()
    }

    #[test]
    fn threshold_snaps_to_integers() {
        assert_eq!(gap_threshold(0.25, 8), 2);
        assert_eq!(gap_threshold(1.0 / 3.0, 3), 1);
        assert_eq!(gap_threshold(0.1, 30), 3);
        assert_eq!(gap_threshold(0.25, 9), 3);
        assert!(is_gap_satisfied(7, 8, 0.25));
        assert!(!is_gap_satisfied(6, 8, 0.25));
    }

    #[test]
    fn bounded_strict_formula_is_unchanged() {
        let f = Formula::from_dimacs_clauses(5, &[&[1, -2, 3], &[3, 4, 5], &[1, 4, 5]]).unwrap();
        let t = bounded_occurrence_transform(&f, 6).unwrap();
        assert_eq!(t.formula, f);
    }

    #[test]
    fn rejects_small_bound() {
        assert_eq!(
            bounded_occurrence_transform(&contradiction(), 3),
            Err(GapError::BoundTooSmall { b: 3 })
        );
    }

    #[test]
    fn contradiction_stays_unsatisfiable() {
        let f = contradiction();
        let t = bounded_occurrence_transform(&f, 5).unwrap();
        let psi = &t.formula;
        assert!(psi.is_strict());
        assert!(occurrence_bound(psi) <= 5);
        assert_eq!(brute_force_sat(psi, 24).unwrap(), None);
        let (mo, _) = brute_force_max_sat(psi, 24).unwrap();
        // max(phi) = 1
        assert!(mo <= 1 + psi.num_clauses() - f.num_clauses());
        assert!(t.size_ratio(&f) <= t.size_constant as f64);
    }

    #[test]
    fn splitting_preserves_satisfiability() {
        // x1 occurs seven times positively and once negatively.
        let f = Formula::from_dimacs_clauses(
            4,
            &[
                &[1, 2, 3], &[1, -2, 3], &[1, 2, -3], &[1, -2, -3],
                &[1, 2, 4], &[1, -2, 4], &[1, 3, -4], &[-1, 2, 3],
            ],
        )
        .unwrap();
        let t = bounded_occurrence_transform(&f, 5).unwrap();
        assert_eq!(t.copies[0].len(), 8);
        assert!(occurrence_bound(&t.formula) <= 5);
        let w = brute_force_sat(&f, 24).unwrap().unwrap();
        assert_eq!(satisfied_count(&t.formula, &t.lift(&w)), t.formula.num_clauses());
    }

    #[test]
    fn projection_of_satisfying_output_satisfies_input() {
        let f = Formula::from_dimacs_clauses(3, &[&[1], &[1, 2], &[-2, 3], &[1, -1, 2], &[1, 3]]).unwrap();
        let t = bounded_occurrence_transform(&f, 5).unwrap();
        let (best, y) = branch_and_bound_max_sat(&t.formula, 10_000_000).unwrap();
        assert_eq!(best, t.formula.num_clauses());
        assert_eq!(satisfied_count(&f, &t.project(&y)), f.num_clauses());
    }

    #[test]
    fn gap_promise_cases() {
        let sat = Formula::from_dimacs_clauses(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(check_gap_promise(&sat, 0.5, 24).unwrap(), PromiseStatus::Satisfiable);
        // m = 3, one clause always false: max-sat 2 = (1 - 1/3) * 3
        let tri = Formula::from_dimacs_clauses(1, &[&[1, 1, 1], &[-1, -1, -1], &[1, -1, 1]]).unwrap();
        assert_eq!(
            check_gap_promise(&tri, 1.0 / 3.0, 24).unwrap(),
            PromiseStatus::GapUnsatisfiable
        );
        // 8 sign patterns plus 12 satisfiable clauses: max-sat = m - 1
        let mut rows: Vec<Vec<i64>> = (0..8)
            .map(|p| (0..3).map(|j| if (p >> j) & 1 == 1 { -(j + 1) } else { j + 1 }).collect())
            .collect();
        for _ in 0..12 {
            rows.push(vec![4, 5, 6]);
        }
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let f = Formula::from_dimacs_clauses(6, &refs).unwrap();
        assert_eq!(
            check_gap_promise(&f, 0.25, 24).unwrap(),
            PromiseStatus::PromiseViolated(19)
        );
        assert!(check_gap_promise(&f, 1.5, 24).is_err());
    }

    #[test]
    fn gap_instance_validation() {
        let f = Formula::from_dimacs_clauses(3, &[&[1, 2, 3]]).unwrap();
        assert!(matches!(
            GapInstance::new(f, 6, 0.25),
            Err(GapError::TooFewClauses { v: 3, m: 1 })
        ));
    }
}
