//! Taylor-truncated reward polynomials and grid verifiers for their two
//! structural properties (bounded range, monotone step).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_P: u32 = 2;
pub const DEFAULT_Q: u32 = 4;
pub const DEFAULT_ALPHA: f64 = 1.0 / 16.0;
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_B: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("round index {i} outside [1, {max}]")]
    Round { i: usize, max: usize },
    #[error("distance {0} outside [0, v]")]
    Distance(usize),
}

fn param_err(msg: &str) -> RewardError {
    RewardError::Param(String::from(msg))
}

/// Reward and horizon parameters of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Taylor degree.
    pub p: u32,
    /// Horizon exponent.
    pub q: u32,
    pub alpha: f64,
    pub v: usize,
    /// Number of rounds.
    pub h: usize,
    /// `h * v`.
    pub horizon: usize,
    pub epsilon: f64,
    pub b: usize,
}

impl RewardParams {
    /// Parameters with `h = max(1, floor(alpha * v^(q-1)))`.
    pub fn new(p: u32, q: u32, alpha: f64, v: usize, epsilon: f64, b: usize) -> Result<Self, RewardError> {
        if v == 0 {
            return Err(param_err("v must be positive"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(param_err("alpha must lie in (0, 1]"));
        }
        let rounds = libm::floor(alpha * libm::pow(v as f64, q as f64 - 1.0) + 1e-9);
        if rounds.is_nan() || rounds >= 1e15 {
            return Err(param_err("round count overflows"));
        }
        let h = (rounds as usize).max(1);
        let params = Self {
            p,
            q,
            alpha,
            v,
            h,
            horizon: h * v,
            epsilon,
            b,
        };
        params.validate()?;
        Ok(params)
    }

    /// Defaults (`p = 2, q = 4, alpha = 1/16, epsilon = 1/4, b = 6`) for `v`.
    pub fn defaults(v: usize) -> Result<Self, RewardError> {
        Self::new(DEFAULT_P, DEFAULT_Q, DEFAULT_ALPHA, v, DEFAULT_EPSILON, DEFAULT_B)
    }

    /// Same parameters with an explicit round count.
    pub fn with_rounds(mut self, h: usize) -> Result<Self, RewardError> {
        if h == 0 {
            return Err(param_err("h must be at least 1"));
        }
        self.h = h;
        self.horizon = h * self.v;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        if self.p < 2 {
            return Err(param_err("p must be at least 2"));
        }
        if self.q < 2 {
            return Err(param_err("q must be at least 2"));
        }
        if self.v == 0 || self.h == 0 || self.horizon != self.h * self.v {
            return Err(param_err("need v >= 1, h >= 1 and H = h * v"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(param_err("epsilon must lie in (0, 1)"));
        }
        if self.b == 0 {
            return Err(param_err("b must be positive"));
        }
        Ok(())
    }

    /// Degree `2 * ceil(log2 v)`, at least 2.
    pub fn log_degree(v: usize) -> u32 {
        let bits = if v <= 1 { 0 } else { usize::BITS - (v - 1).leading_zeros() };
        (2 * bits).max(2)
    }

    /// `v^(q-1)`.
    pub fn scale(&self) -> f64 {
        libm::pow(self.v as f64, self.q as f64 - 1.0)
    }

    /// Coefficient `c_i` with `g_i(x) = T_p(-c_i x)`.
    pub fn rate(&self, i: usize) -> f64 {
        1.0 / (self.scale() * (3.0 - i as f64 / self.h as f64))
    }

    pub fn g(&self, i: usize, x: f64) -> Result<f64, RewardError> {
        if i == 0 || i > self.h + 1 {
            return Err(RewardError::Round { i, max: self.h + 1 });
        }
        Ok(self.g_unchecked(i, x))
    }

    #[inline]
    pub fn g_unchecked(&self, i: usize, x: f64) -> f64 {
        taylor_exp(self.p, -x * self.rate(i))
    }

    /// `1 - epsilon / (6 b v^(q-2))`.
    pub fn upper_bound(&self) -> f64 {
        1.0 - self.epsilon / (6.0 * self.b as f64 * libm::pow(self.v as f64, self.q as f64 - 2.0))
    }

    /// `ceil(epsilon v / b)`: the least distance the range bound covers.
    pub fn range_floor(&self) -> usize {
        let x = self.epsilon * self.v as f64 / self.b as f64;
        let r = libm::round(x);
        if libm::fabs(x - r) < 1e-9 {
            r as usize
        } else {
            libm::ceil(x) as usize
        }
    }

    /// `upper_bound()^h`: the cap on the terminal mean after `h` full rounds
    /// that each moved at least `range_floor()` variables.
    pub fn decay_bound(&self) -> f64 {
        libm::pow(self.upper_bound(), self.h as f64)
    }
}

/// `sum_{k=0}^{p} x^k / k!` by Horner's scheme.
pub fn taylor_exp(p: u32, x: f64) -> f64 {
    let mut acc = 1.0;
    for k in (1..=p).rev() {
        acc = 1.0 + acc * x * (1.0 / k as f64);
    }
    acc
}

/// Terminal mean `prod_{i<n} g_i(round_dists[i-1]) * g_n(within + free) * g_{n+1}(used)`.
pub fn expected_reward(
    round_dists: &[usize],
    n: usize,
    within_round: usize,
    free_dist: usize,
    used_dist: usize,
    params: &RewardParams,
) -> Result<f64, RewardError> {
    if n == 0 || n > params.h {
        return Err(RewardError::Round { i: n, max: params.h });
    }
    if round_dists.len() != n - 1 {
        return Err(param_err("round_dists must have n - 1 entries"));
    }
    for &d in round_dists.iter().chain([within_round, free_dist, used_dist].iter()) {
        if d > params.v {
            return Err(RewardError::Distance(d));
        }
    }
    let mut r = 1.0;
    for (k, &d) in round_dists.iter().enumerate() {
        r *= params.g_unchecked(k + 1, d as f64);
    }
    r *= params.g_unchecked(n, (within_round + free_dist) as f64);
    r *= params.g_unchecked(n + 1, used_dist as f64);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeViolation {
    BelowQuarter,
    AboveUpperBound,
    NotDecreasing,
    OutsideUnitInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample {
    Range {
        i: usize,
        x: usize,
        value: f64,
        violation: RangeViolation,
    },
    MonotoneStep {
        i: usize,
        c: usize,
        d: usize,
        x: usize,
        lhs: f64,
        rhs: f64,
    },
}

/// Bounds outside the asserted window `x in (v, 2v]`, reported only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeyondV {
    pub violations: u64,
    /// Largest `X <= 2v` such that both bounds hold on `[floor, X]` for every round.
    pub bounds_hold_up_to: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim: String,
    pub params: RewardParams,
    pub pass: bool,
    pub checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beyond_v: Option<BeyondV>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_min: Option<usize>,
}

/// Evaluate `T_P(-c x)` for `x = 0..xs.len()` into `out`.
fn fill_row<const P: usize>(c: f64, xs: &[f64], inv: &[f64], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(xs) {
        let z = -c * x;
        let mut acc = 1.0;
        for k in (1..=P).rev() {
            acc = 1.0 + acc * z * inv[k];
        }
        *o = acc;
    }
}

fn fill_row_dyn(p: u32, c: f64, xs: &[f64], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(xs) {
        *o = taylor_exp(p, -c * x);
    }
}

struct RowEval {
    p: u32,
    xs: Vec<f64>,
    inv: Vec<f64>,
}

impl RowEval {
    fn new(p: u32, len: usize) -> Self {
        Self {
            p,
            xs: (0..len).map(|x| x as f64).collect(),
            inv: (0..=p.max(1) as usize).map(|k| if k == 0 { 1.0 } else { 1.0 / k as f64 }).collect(),
        }
    }

    /// Same operation order as [`taylor_exp`], so rows match it bit for bit.
    fn fill(&self, c: f64, out: &mut [f64]) {
        match self.p {
            2 => fill_row::<2>(c, &self.xs, &self.inv, out),
            3 => fill_row::<3>(c, &self.xs, &self.inv, out),
            4 => fill_row::<4>(c, &self.xs, &self.inv, out),
            p => fill_row_dyn(p, c, &self.xs, out),
        }
    }
}

/// Grid check of the range claim over `i in [1, h+1]`, `x in [0, 2v]`:
/// bounds on `[ceil(eps v / b), v]`, strict decrease on the whole row and
/// membership in `(0, 1]`.
pub fn verify_claim_range(params: &RewardParams) -> ClaimReport {
    let v = params.v;
    let len = 2 * v + 1;
    let lo = params.range_floor().min(v + 1);
    let ub = params.upper_bound();
    let eval = RowEval::new(params.p, len);
    let mut row = vec![0.0f64; len];
    let mut counterexample = None;
    let mut beyond_violations = 0u64;
    let mut hold_up_to = 2 * v;
    let mut checked = 0u64;

    for i in 1..=params.h + 1 {
        eval.fill(params.rate(i), &mut row);
        checked += len as u64;
        let (bad, beyond) = if max_step(&row) < 0.0 {
            decreasing_row_failures(&row, lo, v, ub)
        } else {
            count_range_failures(&row, lo, v, ub)
        };
        if bad > 0 && counterexample.is_none() {
            counterexample = first_range_violation(i, &row, lo, v, ub);
        }
        if beyond > 0 {
            beyond_violations += u64::from(beyond);
            if let Some(x) = (v + 1..len).find(|&x| !in_bounds(row[x], ub)) {
                hold_up_to = hold_up_to.min(x - 1);
            }
        }
    }
    ClaimReport {
        claim: String::from("range"),
        params: params.clone(),
        pass: counterexample.is_none(),
        checked,
        counterexample,
        beyond_v: Some(BeyondV {
            violations: beyond_violations,
            bounds_hold_up_to: hold_up_to.max(v),
        }),
        v_min: None,
    }
}

#[inline(always)]
fn in_bounds(g: f64, ub: f64) -> bool {
    (g >= 0.25) & (g <= ub)
}

/// `max_x row[x] - row[x-1]`, NaN if any entry is NaN. Four independent
/// lanes keep the loop vectorizable.
fn max_step(row: &[f64]) -> f64 {
    let n = row.len().saturating_sub(1);
    let (next, prev) = (&row[1..], &row[..n]);
    let mut lanes = [f64::NEG_INFINITY; 4];
    let mut sums = [0.0f64; 4];
    let body = n / 4 * 4;
    for j in (0..body).step_by(4) {
        for l in 0..4 {
            let d = next[j + l] - prev[j + l];
            lanes[l] = if d > lanes[l] { d } else { lanes[l] };
            sums[l] += d;
        }
    }
    let mut m = lanes[0].max(lanes[1]).max(lanes[2]).max(lanes[3]);
    for j in body..n {
        let d = next[j] - prev[j];
        m = m.max(d);
        sums[0] += d;
    }
    if sums.iter().any(|x| x.is_nan()) || row.iter().take(1).any(|x| x.is_nan()) {
        f64::NAN
    } else {
        m
    }
}

/// Same counts as [`count_range_failures`] for a row already known to be
/// strictly decreasing. On any interval of such a row the points above an
/// upper bound form a prefix and the points below a lower bound a suffix.
fn decreasing_row_failures(row: &[f64], lo: usize, v: usize, ub: f64) -> (u32, u32) {
    // Points outside [low, high] (or (low, high] when `open_low`).
    fn outside(seg: &[f64], low: f64, open_low: bool, high: f64) -> usize {
        let above = seg.partition_point(|&g| g > high);
        let keep = if open_low {
            seg.partition_point(|&g| g > low)
        } else {
            seg.partition_point(|&g| g >= low)
        };
        above + (seg.len() - keep.max(above))
    }
    let mut bad = outside(row, 0.0, true, 1.0);
    if lo <= v {
        bad += outside(&row[lo..=v], 0.25, false, ub);
    }
    let beyond = outside(&row[v + 1..], 0.25, false, ub);
    (bad as u32, beyond as u32)
}

/// Branch-free failure counts for one row: strict decrease and `(0, 1]`
/// membership everywhere plus the bounds on `[lo, v]`, and separately the
/// bounds on `(v, 2v]`. NaN counts as a failure.
fn count_range_failures(row: &[f64], lo: usize, v: usize, ub: f64) -> (u32, u32) {
    let mut bad = u32::from(!((row[0] > 0.0) & (row[0] <= 1.0)));
    for (&g, &prev) in row[1..].iter().zip(row) {
        bad += u32::from(!((g < prev) & (g > 0.0) & (g <= 1.0)));
    }
    if lo <= v {
        for &g in &row[lo..=v] {
            bad += u32::from(!in_bounds(g, ub));
        }
    }
    let mut beyond = 0u32;
    for &g in &row[v + 1..] {
        beyond += u32::from(!in_bounds(g, ub));
    }
    (bad, beyond)
}

fn first_range_violation(i: usize, row: &[f64], lo: usize, v: usize, ub: f64) -> Option<Counterexample> {
    let mk = |x: usize, violation| Counterexample::Range {
        i,
        x,
        value: row[x],
        violation,
    };
    for (x, &g) in row.iter().enumerate() {
        if x > 0 && g >= row[x - 1] {
            return Some(mk(x, RangeViolation::NotDecreasing));
        }
        if g <= 0.0 || g > 1.0 {
            return Some(mk(x, RangeViolation::OutsideUnitInterval));
        }
        if x >= lo && x <= v {
            if g < 0.25 {
                return Some(mk(x, RangeViolation::BelowQuarter));
            }
            if g > ub {
                return Some(mk(x, RangeViolation::AboveUpperBound));
            }
        }
    }
    None
}

/// Exhaustive check of `g_i(c+x) g_{i+1}(d-x) >= g_i(c+x-1) g_{i+1}(d-x+1)`
/// for `i in [1, h]`, `c, d in [0, v]`, `x in [1, d]`.
///
/// Each inequality depends only on `(y, t) = (c + x, d - x)`, so the grid is
/// walked over distinct pairs; a failing pair is mapped back to one witness.
pub fn verify_claim_monotone_step(params: &RewardParams) -> ClaimReport {
    let v = params.v;
    let mut gi = vec![0.0f64; 2 * v + 1];
    let mut gn = vec![0.0f64; 2 * v + 1];
    let mut checked = 0u64;
    let mut counterexample = None;
    let fill = |i: usize, out: &mut [f64]| {
        let c = params.rate(i);
        for (x, o) in out.iter_mut().enumerate() {
            *o = taylor_exp(params.p, -c * x as f64);
        }
    };
    if params.h >= 1 {
        fill(1, &mut gi);
    }
    'rounds: for i in 1..=params.h {
        fill(i + 1, &mut gn);
        for y in 1..=2 * v {
            let (a1, a0) = (gi[y], gi[y - 1]);
            // t in [0, v-1] with y + t <= 2v
            let t_max = (v - 1).min(2 * v - y);
            let mut bad = 0u32;
            for t in 0..=t_max {
                bad += (a1 * gn[t] < a0 * gn[t + 1]) as u32;
            }
            checked += t_max as u64 + 1;
            if bad > 0 {
                let t = (0..=t_max).find(|&t| a1 * gn[t] < a0 * gn[t + 1]).expect("bad > 0");
                let x = 1.max(y.saturating_sub(v));
                counterexample = Some(Counterexample::MonotoneStep {
                    i,
                    c: y - x,
                    d: t + x,
                    x,
                    lhs: a1 * gn[t],
                    rhs: a0 * gn[t + 1],
                });
                break 'rounds;
            }
        }
        core::mem::swap(&mut gi, &mut gn);
    }
    ClaimReport {
        claim: String::from("monotone_step"),
        params: params.clone(),
        pass: counterexample.is_none(),
        checked,
        counterexample,
        beyond_v: None,
        v_min: None,
    }
}

/// Doubling search `v = 1, 2, 4, ..., v_cap` for the smallest `v` from which
/// every tested doubling passes the monotone-step grid. `make` builds the
/// parameters for a given `v`. Returns the per-`v` reports and `v_min`.
pub fn monotone_step_v_min<F>(v_cap: usize, mut make: F) -> (Vec<ClaimReport>, Option<usize>)
where
    F: FnMut(usize) -> RewardParams,
{
    let mut reports = Vec::new();
    let mut v = 1;
    while v <= v_cap {
        reports.push(verify_claim_monotone_step(&make(v)));
        v *= 2;
    }
    let mut v_min = None;
    for r in reports.iter().rev() {
        if !r.pass {
            break;
        }
        v_min = Some(r.params.v);
    }
    (reports, v_min)
}
