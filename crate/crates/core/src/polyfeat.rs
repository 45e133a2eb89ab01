//! Multilinear polynomials over {-1, +1} variables and the feature vectors
//! built from them.
//!
//! Monomials are subsets of variable indices stored as `u64` bit masks, so
//! feature mode supports at most 64 variables. Products use `x_i^2 = 1`,
//! which turns monomial multiplication into symmetric difference.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::bitset::VarSet;
use crate::cnf::Assignment;
use crate::mdp::MdpState;
use crate::reward::RewardParams;

/// Largest variable count supported by the bit-mask monomials.
pub const MAX_FEATURE_VARS: usize = 64;
/// Largest feature dimension a dense vector is built for.
pub const MAX_FEATURE_DIM: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("product degree {degree} exceeds cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{v} variables exceeds the feature limit of {MAX_FEATURE_VARS}")]
    TooManyVars { v: usize },
    #[error("feature dimension {d} exceeds the limit {MAX_FEATURE_DIM}")]
    TooLarge { d: u128 },
    #[error("monomial {mask:#x} lies outside the basis for v = {v}, degree {max}")]
    OutsideBasis { mask: u64, v: usize, max: usize },
}

pub type FeatureVector = Vec<f64>;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultilinearPoly {
    terms: BTreeMap<u64, f64>,
}

impl MultilinearPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(0, c);
        p
    }

    /// The indeterminate `x_i`.
    pub fn var(i: usize) -> Self {
        assert!(i < MAX_FEATURE_VARS);
        let mut p = Self::zero();
        p.add_term(1 << i, 1.0);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u64, f64)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Monomial masks with their coefficients, masks ascending.
    pub fn terms(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, mask: u64) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    fn add_term(&mut self, mask: u64, c: f64) {
        if c == 0.0 {
            return;
        }
        let e = self.terms.entry(mask).or_insert(0.0);
        *e += c;
        if *e == 0.0 {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(&m, &x)| (m, x * c)).filter(|&(_, x)| x != 0.0).collect(),
        }
    }

    /// Product with `x_i^2 = 1`; fails if any resulting monomial has more
    /// than `cap` variables.
    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self, PolyError> {
        let mut out = Self::zero();
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                let m = ma ^ mb;
                let degree = m.count_ones() as usize;
                if degree > cap {
                    return Err(PolyError::DegreeCap { degree, cap });
                }
                out.add_term(m, ca * cb);
            }
        }
        Ok(out)
    }

    /// Value at `x = a` (entries of `a` read as ±1).
    pub fn eval(&self, a: &Assignment) -> f64 {
        self.terms
            .iter()
            .map(|(&m, &c)| {
                let mut sign = 1i32;
                let mut rest = m;
                while rest != 0 {
                    let i = rest.trailing_zeros() as usize;
                    sign *= a.sign(i) as i32;
                    rest &= rest - 1;
                }
                c * sign as f64
            })
            .sum()
    }
}

/// `(|S| - sum_{i in S} w_i x_i) / 2`: the Hamming distance between `w` and
/// `x` restricted to `S`, as a polynomial in `x`.
pub fn restricted_dist_poly(w: &Assignment, set: &VarSet) -> MultilinearPoly {
    let mut p = MultilinearPoly::constant(set.len() as f64 / 2.0);
    for i in set.iter() {
        p.add_term(1 << i, -(w.sign(i) as f64) / 2.0);
    }
    p
}

/// Distance to `x` over the free variables `S`.
pub fn dist_free_poly(w: &Assignment, free: &VarSet) -> MultilinearPoly {
    restricted_dist_poly(w, free)
}

/// Distance to `x` over the used variables (complement of `S`).
pub fn dist_used_poly(w: &Assignment, free: &VarSet) -> MultilinearPoly {
    restricted_dist_poly(w, &free.complement())
}

/// `g_i(offset + lin(x))` expanded as a polynomial.
pub fn compose_g(params: &RewardParams, i: usize, offset: f64, lin: &MultilinearPoly) -> Result<MultilinearPoly, PolyError> {
    let c = params.rate(i);
    let u = lin.add(&MultilinearPoly::constant(offset)).scale(-c);
    let cap = 2 * params.p as usize;
    let mut acc = MultilinearPoly::constant(1.0);
    for k in (1..=params.p).rev() {
        acc = acc.mul(&u, cap)?.scale(1.0 / k as f64).add(&MultilinearPoly::constant(1.0));
    }
    Ok(acc)
}

/// `g_n(within + Dfree(x)) * g_{n+1}(Dused(x))`: the greedy value divided by
/// the history product `G`.
pub fn greedy_tail_poly(
    params: &RewardParams,
    n: usize,
    within_round: usize,
    w: &Assignment,
    free: &VarSet,
) -> Result<MultilinearPoly, PolyError> {
    if w.len() > MAX_FEATURE_VARS {
        return Err(PolyError::TooManyVars { v: w.len() });
    }
    let gn = compose_g(params, n, within_round as f64, &dist_free_poly(w, free))?;
    let gn1 = compose_g(params, n + 1, 0.0, &dist_used_poly(w, free))?;
    gn.mul(&gn1, 2 * params.p as usize)
}

/// `G = prod_{i<n} g_i(round_dists[i-1])`.
pub fn history_factor(params: &RewardParams, round_dists: &[usize]) -> f64 {
    round_dists
        .iter()
        .enumerate()
        .map(|(k, &d)| params.g_unchecked(k + 1, d as f64))
        .product()
}

/// Value of the greedy policy from `state` as a polynomial in `w*`. Only
/// the state is read; `w*` never enters.
pub fn greedy_value_poly(state: &MdpState, params: &RewardParams) -> Result<MultilinearPoly, PolyError> {
    let tail = greedy_tail_poly(params, state.n, state.w_round.dist(&state.w), &state.w, &state.free)?;
    Ok(tail.scale(history_factor(params, &state.round_dists)))
}

/// Canonical enumeration of subsets of `[0, v)` with at most `max` elements:
/// sizes ascending, lexicographic within a size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetIndex {
    v: usize,
    max: usize,
    binom: Vec<Vec<u64>>,
    offsets: Vec<usize>,
    dim: usize,
}

/// `sum_{i <= max} C(v, i)` computed without overflow.
pub fn subset_count(v: usize, max: usize) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for i in 0..=max.min(v) {
        total += c;
        c = c * (v - i) as u128 / (i + 1) as u128;
    }
    total
}

/// Feature dimension for `v` variables and Taylor degree `p`.
pub fn feature_dim(v: usize, p: u32) -> u128 {
    subset_count(v, 2 * p as usize)
}

impl SubsetIndex {
    pub fn new(v: usize, max: usize) -> Result<Self, PolyError> {
        if v > MAX_FEATURE_VARS {
            return Err(PolyError::TooManyVars { v });
        }
        let d = subset_count(v, max);
        if d > MAX_FEATURE_DIM as u128 {
            return Err(PolyError::TooLarge { d });
        }
        let max = max.min(v);
        let mut binom = vec![vec![0u64; max + 1]; v + 1];
        for n in 0..=v {
            binom[n][0] = 1;
            for r in 1..=max.min(n) {
                binom[n][r] = binom[n - 1][r - 1] + if r < n { binom[n - 1][r] } else { 0 };
            }
        }
        let mut offsets = Vec::with_capacity(max + 2);
        let mut acc = 0usize;
        for &count in &binom[v][..=max] {
            offsets.push(acc);
            acc += count as usize;
        }
        Ok(Self {
            v,
            max,
            binom,
            offsets,
            dim: acc,
        })
    }

    pub fn for_params(v: usize, p: u32) -> Result<Self, PolyError> {
        Self::new(v, 2 * p as usize)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vars(&self) -> usize {
        self.v
    }

    pub fn max_size(&self) -> usize {
        self.max
    }

    fn c(&self, n: usize, r: usize) -> usize {
        if r > n {
            0
        } else {
            self.binom[n][r] as usize
        }
    }

    /// Position of `mask` in the canonical order.
    pub fn rank(&self, mask: u64) -> Result<usize, PolyError> {
        let s = mask.count_ones() as usize;
        if s > self.max || (self.v < 64 && mask >> self.v != 0) {
            return Err(PolyError::OutsideBasis {
                mask,
                v: self.v,
                max: self.max,
            });
        }
        let mut r = 0;
        let mut next = 0usize;
        let mut rest = mask;
        let mut j = 0;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            for t in next..c {
                r += self.c(self.v - 1 - t, s - 1 - j);
            }
            next = c + 1;
            j += 1;
            rest &= rest - 1;
        }
        Ok(self.offsets[s] + r)
    }

    /// Subsets in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.max).flat_map(move |s| Combinations::new(self.v, s))
    }
}

/// Lexicographic `s`-subsets of `[0, v)` as bit masks.
struct Combinations {
    v: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(v: usize, s: usize) -> Self {
        Self {
            v,
            idx: (0..s).collect(),
            done: s > v,
        }
    }
}

impl Iterator for Combinations {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        let mask = self.idx.iter().fold(0u64, |m, &i| m | 1 << i);
        let s = self.idx.len();
        let mut j = s;
        loop {
            if j == 0 {
                self.done = true;
                break;
            }
            j -= 1;
            if self.idx[j] < self.v - s + j {
                self.idx[j] += 1;
                for k in j + 1..s {
                    self.idx[k] = self.idx[k - 1] + 1;
                }
                break;
            }
        }
        Some(mask)
    }
}

pub fn to_feature_vector(poly: &MultilinearPoly, index: &SubsetIndex) -> Result<FeatureVector, PolyError> {
    let mut out = vec![0.0; index.dim()];
    for (m, c) in poly.terms() {
        out[index.rank(m)?] = c;
    }
    Ok(out)
}

/// `theta_S = prod_{i in S} w*_i` in canonical order.
pub fn theta_vector(wstar: &Assignment, index: &SubsetIndex) -> Result<FeatureVector, PolyError> {
    if wstar.len() != index.num_vars() {
        return Err(PolyError::Dimension {
            expected: index.num_vars(),
            got: wstar.len(),
        });
    }
    Ok(index
        .iter()
        .map(|m| {
            let mut sign = 1.0;
            let mut rest = m;
            while rest != 0 {
                sign *= wstar.sign(rest.trailing_zeros() as usize) as f64;
                rest &= rest - 1;
            }
            sign
        })
        .collect())
}

pub fn inner_product(a: &[f64], b: &[f64]) -> Result<f64, PolyError> {
    if a.len() != b.len() {
        return Err(PolyError::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> MultilinearPoly {
        MultilinearPoly::var(i)
    }

    fn one() -> MultilinearPoly {
        MultilinearPoly::constant(1.0)
    }

    #[test]
    fn add_and_scale() {
        let a = MultilinearPoly::from_terms([(0, 1.0), (1, 2.0)]);
        assert_eq!(a.add(&MultilinearPoly::zero()), a);
        assert!(a.scale(0.0).is_zero());
        let b = MultilinearPoly::from_terms([(1, -2.0)]);
        assert_eq!(a.add(&b), one());
    }

    #[test]
    fn products_use_involution() {
        assert_eq!(x(0).mul(&x(0), 4).unwrap(), one());
        let p = one().add(&x(0)).mul(&one().add(&x(0).scale(-1.0)), 4).unwrap();
        assert!(p.is_zero());
        let q = x(0).add(&x(1)).mul(&x(1), 4).unwrap();
        assert_eq!(q, MultilinearPoly::from_terms([(0b11, 1.0), (0, 1.0)]));
        assert_eq!(
            x(0).mul(&x(1), 1),
            Err(PolyError::DegreeCap { degree: 2, cap: 1 })
        );
    }

    #[test]
    fn dist_free_expansion() {
        let w = Assignment::from_bools(&[true, true]);
        let p = dist_free_poly(&w, &VarSet::full(2));
        assert_eq!(p, MultilinearPoly::from_terms([(0, 1.0), (1, -0.5), (2, -0.5)]));
        assert!(dist_free_poly(&w, &VarSet::empty(2)).is_zero());
        assert_eq!(dist_used_poly(&w, &VarSet::full(2)), MultilinearPoly::zero());
    }

    #[test]
    fn dimension_for_v5_p2() {
        assert_eq!(feature_dim(5, 2), 31);
        assert_eq!(SubsetIndex::for_params(5, 2).unwrap().dim(), 31);
        for v in 2..20usize {
            assert!(feature_dim(v, 2) <= 2 * (v as u128).pow(4));
        }
    }

    #[test]
    fn rank_matches_enumeration_order() {
        for (v, max) in [(5, 4), (7, 4), (9, 3), (4, 8)] {
            let idx = SubsetIndex::new(v, max).unwrap();
            let masks: Vec<u64> = idx.iter().collect();
            assert_eq!(masks.len(), idx.dim());
            for (pos, &m) in masks.iter().enumerate() {
                assert_eq!(idx.rank(m).unwrap(), pos);
            }
            // sizes ascending, lexicographic within size
            for w in masks.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (sa, sb) = (a.count_ones(), b.count_ones());
                assert!(sa < sb || (sa == sb && lex_less(a, b)), "{a:b} {b:b}");
            }
        }
    }

    fn lex_less(a: u64, b: u64) -> bool {
        let ea: Vec<u32> = (0..64).filter(|i| a >> i & 1 == 1).collect();
        let eb: Vec<u32> = (0..64).filter(|i| b >> i & 1 == 1).collect();
        ea < eb
    }

    #[test]
    fn theta_entries() {
        let w = Assignment::from_bools(&[true, false, false]);
        let idx = SubsetIndex::new(3, 2).unwrap();
        let t = theta_vector(&w, &idx).unwrap();
        assert_eq!(t[0], 1.0);
        assert!(t.iter().all(|&x| x == 1.0 || x == -1.0));
        // {1,2} is last: (-1)(-1)
        assert_eq!(*t.last().unwrap(), 1.0);
        assert_eq!(t[1], 1.0);
        assert_eq!(t[2], -1.0);
    }

    #[test]
    fn composed_g_matches_scalar() {
        let params = RewardParams::new(3, 2, 1.0, 4, 0.25, 6).unwrap();
        let w = Assignment::from_bools(&[true, false, true, false]);
        let free = VarSet::from_indices(4, [1, 3]);
        let poly = compose_g(&params, 2, 1.0, &dist_free_poly(&w, &free)).unwrap();
        assert!(poly.degree() <= 3);
        for k in 0..16u32 {
            let ws = Assignment::from_bools(&(0..4).map(|i| k >> i & 1 == 1).collect::<Vec<_>>());
            let direct = params.g_unchecked(2, 1.0 + w.dist_on(&ws, &free) as f64);
            assert!((poly.eval(&ws) - direct).abs() < 1e-12);
        }
    }
}
