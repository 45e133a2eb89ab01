//! Seeded random formula generators used by tests, the acceptance suite and
//! the `gen` command.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cnf::{Assignment, Clause, Formula, Literal};

pub fn random_assignment<R: Rng + ?Sized>(rng: &mut R, v: usize) -> Assignment {
    let bools: Vec<bool> = (0..v).map(|_| rng.gen()).collect();
    Assignment::from_bools(&bools)
}

fn three_distinct<R: Rng + ?Sized>(rng: &mut R, pool: &[usize]) -> [usize; 3] {
    let picked: Vec<usize> = pool.choose_multiple(rng, 3).copied().collect();
    [picked[0], picked[1], picked[2]]
}

/// Uniform random strict 3-CNF with `m` clauses over `v >= 3` variables.
pub fn random_3cnf<R: Rng + ?Sized>(rng: &mut R, v: usize, m: usize) -> Formula {
    assert!(v >= 3 && m >= 1);
    let pool: Vec<usize> = (0..v).collect();
    let clauses = (0..m)
        .map(|_| {
            let vars = three_distinct(rng, &pool);
            Clause::new(
                vars.iter()
                    .map(|&x| Literal {
                        var: x,
                        negated: rng.gen(),
                    })
                    .collect(),
            )
        })
        .collect();
    Formula::new(v, clauses).expect("valid by construction")
}

/// Random strict 3-CNF satisfied by `wstar`, with every variable in at most
/// `max_occ` clauses. Returns `None` if the occurrence cap leaves fewer than
/// three usable variables before `m` clauses are placed.
pub fn planted_3cnf<R: Rng + ?Sized>(
    rng: &mut R,
    wstar: &Assignment,
    m: usize,
    max_occ: usize,
) -> Option<Formula> {
    let v = wstar.len();
    if v < 3 || m == 0 {
        return None;
    }
    let mut occ = vec![0usize; v];
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        // Prefer the least-used variables so the cap is rarely hit.
        let min_occ = *occ.iter().min().expect("v >= 3");
        let mut pool: Vec<usize> = (0..v).filter(|&x| occ[x] <= min_occ + 1 && occ[x] < max_occ).collect();
        if pool.len() < 3 {
            pool = (0..v).filter(|&x| occ[x] < max_occ).collect();
        }
        if pool.len() < 3 {
            return None;
        }
        let vars = three_distinct(rng, &pool);
        let lits = loop {
            let lits: Vec<Literal> = vars
                .iter()
                .map(|&x| Literal {
                    var: x,
                    negated: rng.gen(),
                })
                .collect();
            if lits.iter().any(|l| l.is_true(wstar)) {
                break lits;
            }
        };
        for &x in &vars {
            occ[x] += 1;
        }
        clauses.push(Clause::new(lits));
    }
    Formula::new(v, clauses).ok()
}

/// `blocks` disjoint copies of the eight sign patterns over three variables,
/// with variables relabelled and clauses shuffled. Every assignment falsifies
/// exactly one clause per block, so the unsatisfied fraction is always 1/8.
pub fn gap_unsat_blocks<R: Rng + ?Sized>(rng: &mut R, blocks: usize) -> Formula {
    assert!(blocks >= 1);
    let v = 3 * blocks;
    let mut relabel: Vec<usize> = (0..v).collect();
    relabel.shuffle(rng);
    let mut clauses = Vec::with_capacity(8 * blocks);
    for b in 0..blocks {
        for pattern in 0..8u8 {
            clauses.push(Clause::new(
                (0..3)
                    .map(|j| Literal {
                        var: relabel[3 * b + j],
                        negated: (pattern >> j) & 1 == 1,
                    })
                    .collect(),
            ));
        }
    }
    clauses.shuffle(rng);
    Formula::new(v, clauses).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{brute_force_max_sat, occurrence_bound, satisfied_count};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planted_formulas_are_satisfied_and_capped() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let w = random_assignment(&mut rng, 7);
            let f = planted_3cnf(&mut rng, &w, 10, 5).unwrap();
            assert!(f.is_strict());
            assert_eq!(satisfied_count(&f, &w), 10);
            assert!(occurrence_bound(&f) <= 5);
        }
    }

    #[test]
    fn planted_reports_impossible_caps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = random_assignment(&mut rng, 3);
        assert!(planted_3cnf(&mut rng, &w, 3, 2).is_none());
    }

    #[test]
    fn blocks_have_exact_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = gap_unsat_blocks(&mut rng, 2);
        assert_eq!(f.num_clauses(), 16);
        assert_eq!(occurrence_bound(&f), 8);
        assert_eq!(brute_force_max_sat(&f, 24).unwrap().0, 14);
    }
}
