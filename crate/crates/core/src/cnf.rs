//! 3-CNF formulas, DIMACS parsing and exhaustive satisfiability oracles.
//!
//! Assignments are vectors over {-1, +1} with -1 meaning false and +1 meaning
//! true. A positive DIMACS literal is satisfied by +1.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::VarSet;

/// Largest variable count the exhaustive oracles accept by default.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("variable {var} out of range (formula has {v} variables)")]
    VariableOutOfRange { var: usize, v: usize },
    #[error("formula has no clauses")]
    Empty,
    #[error("clause {index} has {len} literals; expected 1 to 3")]
    ClauseWidth { index: usize, len: usize },
    #[error("clause {index} does not have 3 distinct variables")]
    NotStrict { index: usize },
    #[error("{v} variables exceeds the exhaustive-search limit of {limit}")]
    TooManyVariables { v: usize, limit: usize },
    #[error("assignment has length {got}, formula has {expected} variables")]
    AssignmentLength { got: usize, expected: usize },
    #[error("search exceeded its budget of {budget} nodes")]
    BudgetExceeded { budget: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, negated: false }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, negated: true }
    }

    /// DIMACS integer: 1-based, negative when negated.
    pub fn to_dimacs(self) -> i64 {
        let x = self.var as i64 + 1;
        if self.negated {
            -x
        } else {
            x
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        Some(Self {
            var: (x.unsigned_abs() - 1) as usize,
            negated: x < 0,
        })
    }

    #[inline]
    pub fn negate(self) -> Self {
        Self {
            var: self.var,
            negated: !self.negated,
        }
    }

    #[inline]
    pub fn is_true(self, a: &Assignment) -> bool {
        a.get(self.var) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of one to three literals. Clauses used to build an MDP hold
/// exactly three literals over three distinct variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Self { literals }
    }

    pub fn three(a: Literal, b: Literal, c: Literal) -> Self {
        Self::new(vec![a, b, c])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Exactly three literals over pairwise distinct variables.
    pub fn is_strict(&self) -> bool {
        let l = &self.literals;
        l.len() == 3 && l[0].var != l[1].var && l[0].var != l[2].var && l[1].var != l[2].var
    }

    #[inline]
    pub fn is_satisfied(&self, a: &Assignment) -> bool {
        self.literals.iter().any(|l| l.is_true(a))
    }

    /// Variables of the clause in ascending index order (duplicates removed).
    pub fn sorted_vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }
}

/// Indexed CNF formula with per-variable occurrence lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    occ: Vec<Vec<usize>>,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if clauses.is_empty() {
            return Err(CnfError::Empty);
        }
        let mut occ = vec![Vec::new(); num_vars];
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() || clause.len() > 3 {
                return Err(CnfError::ClauseWidth {
                    index,
                    len: clause.len(),
                });
            }
            for lit in clause.literals() {
                if lit.var >= num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        var: lit.var + 1,
                        v: num_vars,
                    });
                }
                // A clause mentioning a variable twice still counts once.
                if occ[lit.var].last() != Some(&index) {
                    occ[lit.var].push(index);
                }
            }
        }
        Ok(Self {
            num_vars,
            clauses,
            occ,
        })
    }

    /// Convenience constructor from DIMACS-style signed integers.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| Clause::new(c.iter().filter_map(|&x| Literal::from_dimacs(x)).collect()))
            .collect();
        Self::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, i: usize) -> &Clause {
        &self.clauses[i]
    }

    /// Clause indices in which variable `var` occurs.
    pub fn occurrences(&self, var: usize) -> &[usize] {
        &self.occ[var]
    }

    /// Every clause has three distinct variables.
    pub fn is_strict(&self) -> bool {
        self.clauses.iter().all(Clause::is_strict)
    }

    pub fn check_strict(&self) -> Result<(), CnfError> {
        match self.clauses.iter().position(|c| !c.is_strict()) {
            Some(index) => Err(CnfError::NotStrict { index }),
            None => Ok(()),
        }
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c.literals() {
                out.push_str(&format!("{} ", l.to_dimacs()));
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Truth assignment as a vector over {-1, +1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    bits: Vec<i8>,
}

impl Assignment {
    pub fn all_false(v: usize) -> Self {
        Self { bits: vec![-1; v] }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        Self {
            bits: values.iter().map(|&b| if b { 1 } else { -1 }).collect(),
        }
    }

    /// From ±1 entries; any other value is rejected.
    pub fn from_signs(signs: &[i8]) -> Option<Self> {
        signs
            .iter()
            .all(|&s| s == 1 || s == -1)
            .then(|| Self {
                bits: signs.to_vec(),
            })
    }

    /// From a string of '0'/'1' characters, variable 0 first.
    pub fn from_bit_string(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<bool>>>()
            .map(|b| Self::from_bools(&b))
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b > 0 { '1' } else { '0' }).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i] > 0
    }

    #[inline]
    pub fn sign(&self, i: usize) -> i8 {
        self.bits[i]
    }

    pub fn signs(&self) -> &[i8] {
        &self.bits
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = if value { 1 } else { -1 };
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.bits[i] = -self.bits[i];
    }

    /// Hamming distance.
    pub fn dist(&self, other: &Assignment) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Hamming distance restricted to the variables in `set`.
    pub fn dist_on(&self, other: &Assignment, set: &VarSet) -> usize {
        set.iter().filter(|&i| self.bits[i] != other.bits[i]).count()
    }

    /// Packed bits, variable `i` at bit `i % 8` of byte `i / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, &b) in self.bits.iter().enumerate() {
            if b > 0 {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseMode {
    /// Exactly three literals over distinct variables per clause.
    Strict,
    /// One to three literals per clause, repeats allowed.
    Lenient,
}

/// Parse DIMACS CNF text.
pub fn parse_dimacs(text: &str, mode: ParseMode) -> Result<Formula, CnfError> {
    let perr = |line: usize, msg: String| CnfError::Parse { line, msg };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_line = 0;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        last_line = line_no;
        if line.starts_with('p') {
            if header.is_some() {
                return Err(perr(line_no, "duplicate header".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(perr(line_no, format!("malformed header `{line}`")));
            }
            let v = parts[2]
                .parse::<usize>()
                .map_err(|_| perr(line_no, format!("bad variable count `{}`", parts[2])))?;
            let m = parts[3]
                .parse::<usize>()
                .map_err(|_| perr(line_no, format!("bad clause count `{}`", parts[3])))?;
            header = Some((v, m));
            continue;
        }
        let (v, _) = header.ok_or_else(|| perr(line_no, "clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x = tok
                .parse::<i64>()
                .map_err(|_| perr(line_no, format!("bad literal `{tok}`")))?;
            if x == 0 {
                let lits = core::mem::take(&mut current);
                check_clause(&lits, mode, current_line.max(line_no).min(line_no), clauses.len())?;
                clauses.push(Clause::new(lits));
                continue;
            }
            if current.is_empty() {
                current_line = line_no;
            }
            if x.unsigned_abs() as usize > v {
                return Err(perr(
                    line_no,
                    format!("variable out of range: {} > {v}", x.unsigned_abs()),
                ));
            }
            current.push(Literal::from_dimacs(x).expect("nonzero"));
            if current.len() > 3 {
                return Err(perr(line_no, "clause longer than 3 literals".into()));
            }
        }
    }
    let (v, m) = header.ok_or_else(|| perr(last_line.max(1), "missing `p cnf` header".into()))?;
    if !current.is_empty() {
        return Err(perr(last_line, "last clause not terminated by 0".into()));
    }
    if clauses.len() != m {
        return Err(perr(
            last_line,
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    Formula::new(v, clauses).map_err(|e| match e {
        CnfError::Empty => perr(last_line, "formula has no clauses".into()),
        other => other,
    })
}

fn check_clause(lits: &[Literal], mode: ParseMode, line: usize, index: usize) -> Result<(), CnfError> {
    if lits.is_empty() {
        return Err(CnfError::Parse {
            line,
            msg: format!("clause {} is empty", index + 1),
        });
    }
    if mode == ParseMode::Strict && !Clause::new(lits.to_vec()).is_strict() {
        return Err(CnfError::Parse {
            line,
            msg: format!(
                "clause {} must have exactly 3 distinct variables in strict mode",
                index + 1
            ),
        });
    }
    Ok(())
}

/// Error unless `a` has one entry per variable of `f`.
pub fn check_assignment(f: &Formula, a: &Assignment) -> Result<(), CnfError> {
    if a.len() != f.num_vars() {
        return Err(CnfError::AssignmentLength {
            got: a.len(),
            expected: f.num_vars(),
        });
    }
    Ok(())
}

/// Number of clauses with at least one true literal.
pub fn satisfied_count(f: &Formula, a: &Assignment) -> usize {
    assert_eq!(a.len(), f.num_vars(), "assignment length mismatch");
    f.clauses().iter().filter(|c| c.is_satisfied(a)).count()
}

/// Lowest-index clause that is unsatisfied under `a` and whose variables are
/// all in `free`.
pub fn first_eligible_clause(f: &Formula, a: &Assignment, free: &VarSet) -> Option<usize> {
    f.clauses()
        .iter()
        .position(|c| !c.is_satisfied(a) && c.literals().iter().all(|l| free.contains(l.var)))
}

/// Largest number of clauses any variable occurs in.
pub fn occurrence_bound(f: &Formula) -> usize {
    (0..f.num_vars())
        .map(|x| f.occurrences(x).len())
        .max()
        .unwrap_or(0)
}

/// Clauses as bit masks over an enumeration counter in which variable 0 is
/// the most significant bit, so counting upward visits assignments in
/// lexicographic order (false before true).
fn clause_masks(f: &Formula) -> Vec<(u32, u32)> {
    let v = f.num_vars();
    f.clauses()
        .iter()
        .map(|c| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for l in c.literals() {
                let bit = 1u32 << (v - 1 - l.var);
                if l.negated {
                    neg |= bit;
                } else {
                    pos |= bit;
                }
            }
            (pos, neg)
        })
        .collect()
}

fn counter_to_assignment(k: u32, v: usize) -> Assignment {
    let bools: Vec<bool> = (0..v).map(|i| (k >> (v - 1 - i)) & 1 == 1).collect();
    Assignment::from_bools(&bools)
}

fn check_limit(f: &Formula, limit: usize) -> Result<(), CnfError> {
    let limit = limit.min(31);
    if f.num_vars() > limit {
        return Err(CnfError::TooManyVariables {
            v: f.num_vars(),
            limit,
        });
    }
    Ok(())
}

/// Lexicographically smallest satisfying assignment by exhaustive search.
pub fn brute_force_sat(f: &Formula, limit: usize) -> Result<Option<Assignment>, CnfError> {
    check_limit(f, limit)?;
    let v = f.num_vars();
    let masks = clause_masks(f);
    let full = if v == 0 { 0 } else { (1u32 << v) - 1 };
    for k in 0..=full {
        let nk = !k & full;
        if masks.iter().all(|&(p, n)| (k & p) != 0 || (nk & n) != 0) {
            return Ok(Some(counter_to_assignment(k, v)));
        }
    }
    Ok(None)
}

/// Maximum number of simultaneously satisfiable clauses, with the
/// lexicographically smallest witness, by exhaustive search.
pub fn brute_force_max_sat(f: &Formula, limit: usize) -> Result<(usize, Assignment), CnfError> {
    check_limit(f, limit)?;
    let v = f.num_vars();
    let m = f.num_clauses();
    let masks = clause_masks(f);
    let full = if v == 0 { 0 } else { (1u32 << v) - 1 };
    let mut best = 0;
    let mut witness = 0;
    for k in 0..=full {
        let nk = !k & full;
        let sat = masks
            .iter()
            .filter(|&&(p, n)| (k & p) != 0 || (nk & n) != 0)
            .count();
        if sat > best || k == 0 {
            best = sat;
            witness = k;
            if best == m {
                break;
            }
        }
    }
    Ok((best, counter_to_assignment(witness, v)))
}

/// Exact Max-SAT by depth-first branch and bound, for formulas too wide for
/// [`brute_force_max_sat`]. Unit propagation runs whenever a single further
/// falsified clause would already tie the incumbent.
pub fn branch_and_bound_max_sat(f: &Formula, node_budget: u64) -> Result<(usize, Assignment), CnfError> {
    let mut s = BnbSearch::new(f, node_budget);
    s.search(0)?;
    Ok((f.num_clauses() - s.best_unsat, s.best_witness))
}

/// An assignment satisfying more than `target` clauses, if one exists. The
/// same search as [`branch_and_bound_max_sat`] started from the bound
/// instead of an incumbent, so refutations prune from the first node.
pub fn max_sat_exceeds(f: &Formula, target: usize, node_budget: u64) -> Result<Option<Assignment>, CnfError> {
    let m = f.num_clauses();
    if target >= m {
        return Ok(None);
    }
    let mut s = BnbSearch::new(f, node_budget);
    let start = s.best_unsat;
    if start < m - target {
        return Ok(Some(s.best_witness));
    }
    s.best_unsat = m - target;
    s.search(0)?;
    Ok((s.best_unsat < m - target).then_some(s.best_witness))
}

const UNASSIGNED: i8 = 0;

struct BnbSearch<'f> {
    f: &'f Formula,
    order: Vec<usize>,
    occ: Vec<Vec<(usize, bool)>>,
    value: Vec<i8>,
    unassigned: Vec<u8>,
    satisfied: Vec<u8>,
    falsified: usize,
    trail: Vec<usize>,
    best_unsat: usize,
    best_witness: Assignment,
    nodes: u64,
    budget: u64,
}

impl<'f> BnbSearch<'f> {
    fn new(f: &'f Formula, budget: u64) -> Self {
        let v = f.num_vars();
        let mut occ = vec![Vec::new(); v];
        let mut order = Vec::with_capacity(v);
        let mut seen = vec![false; v];
        for (ci, c) in f.clauses().iter().enumerate() {
            for l in c.literals() {
                occ[l.var].push((ci, l.negated));
                if !seen[l.var] {
                    seen[l.var] = true;
                    order.push(l.var);
                }
            }
        }
        order.extend((0..v).filter(|&x| !seen[x]));
        let start = Assignment::all_false(v);
        let best_unsat = f.num_clauses() - satisfied_count(f, &start);
        Self {
            f,
            order,
            occ,
            value: vec![UNASSIGNED; v],
            unassigned: f.clauses().iter().map(|c| c.len() as u8).collect(),
            satisfied: vec![0; f.num_clauses()],
            falsified: 0,
            trail: Vec::new(),
            best_unsat,
            best_witness: start,
            nodes: 0,
            budget,
        }
    }

    fn assign(&mut self, var: usize, val: i8) {
        self.value[var] = val;
        self.trail.push(var);
        for &(ci, negated) in &self.occ[var] {
            self.unassigned[ci] -= 1;
            if (val > 0) != negated {
                self.satisfied[ci] += 1;
            } else if self.satisfied[ci] == 0 && self.unassigned[ci] == 0 {
                self.falsified += 1;
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().expect("trail");
            let val = self.value[var];
            for &(ci, negated) in &self.occ[var] {
                if (val > 0) != negated {
                    self.satisfied[ci] -= 1;
                } else if self.satisfied[ci] == 0 && self.unassigned[ci] == 0 {
                    self.falsified -= 1;
                }
                self.unassigned[ci] += 1;
            }
            self.value[var] = UNASSIGNED;
        }
    }

    /// Propagate units from trail position `from`; false on conflict.
    fn propagate(&mut self, from: usize) -> bool {
        let mut head = from;
        while head < self.trail.len() {
            let var = self.trail[head];
            head += 1;
            for k in 0..self.occ[var].len() {
                let ci = self.occ[var][k].0;
                if self.satisfied[ci] == 0 && self.unassigned[ci] == 1 {
                    let lit = self.f.clause(ci).literals().iter().copied().find(|l| self.value[l.var] == UNASSIGNED);
                    if let Some(l) = lit {
                        self.assign(l.var, if l.negated { -1 } else { 1 });
                        if self.falsified >= self.best_unsat {
                            return false;
                        }
                    }
                }
            }
        }
        self.falsified < self.best_unsat
    }

    fn search(&mut self, depth: usize) -> Result<(), CnfError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(CnfError::BudgetExceeded {
                budget: self.budget,
            });
        }
        if self.falsified >= self.best_unsat {
            return Ok(());
        }
        if depth == self.order.len() {
            self.best_unsat = self.falsified;
            let signs: Vec<i8> = self.value.iter().map(|&x| if x == 0 { -1 } else { x }).collect();
            self.best_witness = Assignment::from_signs(&signs).expect("signs");
            return Ok(());
        }
        let var = self.order[depth];
        if self.value[var] != UNASSIGNED {
            return self.search(depth + 1);
        }
        let pos = self.occ[var].iter().filter(|(_, n)| !n).count();
        let first: i8 = if 2 * pos >= self.occ[var].len() { 1 } else { -1 };
        for val in [first, -first] {
            let mark = self.trail.len();
            self.assign(var, val);
            let ok = if self.falsified + 1 >= self.best_unsat {
                self.propagate(mark)
            } else {
                self.falsified < self.best_unsat
            };
            if ok {
                self.search(depth + 1)?;
            }
            self.undo_to(mark);
        }
        Ok(())
    }
}
