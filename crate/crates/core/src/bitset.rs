use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Fixed-universe set of variable indices backed by 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarSet {
    words: Vec<u64>,
    universe: usize,
}

impl VarSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.universe {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            core::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let bit = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(k * 64 + bit)
                }
            })
        })
    }

    /// Complement within the universe.
    pub fn complement(&self) -> Self {
        let mut out = Self::empty(self.universe);
        for i in 0..self.universe {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    /// Little-endian packed bytes, `ceil(universe / 8)` long.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.universe.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push((self.words[k / 8] >> ((k % 8) * 8)) as u8);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_remove_iter() {
        let mut s = VarSet::empty(130);
        for i in [0, 5, 64, 129] {
            s.insert(i);
        }
        assert_eq!(s.len(), 4);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 5, 64, 129]);
        s.remove(5);
        assert!(!s.contains(5));
        assert_eq!(s.first(), Some(0));
        assert_eq!(s.complement().len(), 127);
    }

    #[test]
    fn full_and_bytes() {
        let s = VarSet::full(10);
        assert_eq!(s.len(), 10);
        assert_eq!(s.to_bytes(), vec![0xff, 0x03]);
        assert!(VarSet::empty(0).is_empty());
    }
}
