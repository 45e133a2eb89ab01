//! Small dense linear algebra for basis selection and expansion.

use alloc::vec;
use alloc::vec::Vec;

/// Pivot tolerance for declaring a vector dependent on a basis.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

fn norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

/// Incremental modified Gram-Schmidt: `q` is orthonormal and spans the
/// accepted vectors; `r` is the upper-triangular factor, stored by column.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    q: Vec<Vec<f64>>,
    r: Vec<Vec<f64>>,
    members: Vec<Vec<f64>>,
    tol: f64,
}

impl Basis {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    /// Orthogonalize `x` against the basis twice; returns the coefficients
    /// on `q` and the remainder.
    fn project(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut rem = x.to_vec();
        let mut coeffs = vec![0.0; self.q.len()];
        for _ in 0..2 {
            for (j, qj) in self.q.iter().enumerate() {
                let c: f64 = qj.iter().zip(&rem).map(|(a, b)| a * b).sum();
                coeffs[j] += c;
                for (r, q) in rem.iter_mut().zip(qj) {
                    *r -= c * q;
                }
            }
        }
        (coeffs, rem)
    }

    /// Add `x` if its distance to the current span exceeds the tolerance.
    pub fn try_insert(&mut self, x: &[f64]) -> bool {
        let (mut coeffs, rem) = self.project(x);
        let nr = norm(&rem);
        if nr <= self.tol {
            return false;
        }
        self.q.push(rem.iter().map(|v| v / nr).collect());
        coeffs.push(nr);
        self.r.push(coeffs);
        self.members.push(x.to_vec());
        true
    }

    /// Least-squares coefficients `alpha` with `x ~ sum alpha_i members_i`,
    /// together with the residual norm `|x - sum alpha_i members_i|`
    /// recomputed from the members themselves.
    pub fn expand(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let k = self.q.len();
        let (c, _) = self.project(x);
        // Back substitution on R alpha = c; column j of R is self.r[j].
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = c[i];
            for (rj, aj) in self.r[i + 1..k].iter().zip(&alpha[i + 1..k]) {
                acc -= rj[i] * aj;
            }
            alpha[i] = acc / self.r[i][i];
        }
        let mut resid = x.to_vec();
        for (a, m) in alpha.iter().zip(&self.members) {
            for (r, v) in resid.iter_mut().zip(m) {
                *r -= a * v;
            }
        }
        (alpha, norm(&resid))
    }
}

/// Indices of a maximal independent subset of `vectors`, chosen greedily in
/// order.
pub fn select_independent(vectors: &[Vec<f64>], tol: f64) -> (Basis, Vec<usize>) {
    let mut basis = Basis::new(tol);
    let mut picked = Vec::new();
    for (i, x) in vectors.iter().enumerate() {
        if basis.try_insert(x) {
            picked.push(i);
        }
    }
    (basis, picked)
}

pub fn l2_norm(x: &[f64]) -> f64 {
    norm(x)
}
