use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of variable indices in canonical (strictly increasing) form.
///
/// Ordered by size first and lexicographically within a size, which fixes the
/// row/column order of every moment matrix built from these keys.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetKey(Vec<u32>);

impl SubsetKey {
    pub fn empty() -> Self {
        SubsetKey(Vec::new())
    }

    pub fn singleton(v: u32) -> Self {
        SubsetKey(vec![v])
    }

    /// Builds a key from indices that are already strictly increasing.
    pub fn from_sorted(vars: Vec<u32>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        SubsetKey(vars)
    }

    /// Sorts and deduplicates without a range check.
    pub fn from_unsorted<I: IntoIterator<Item = u32>>(vars: I) -> Self {
        let mut v: Vec<u32> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SubsetKey(v)
    }

    pub fn vars(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn union(&self, other: &SubsetKey) -> SubsetKey {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SubsetKey(out)
    }

    pub fn with(&self, v: u32) -> SubsetKey {
        match self.0.binary_search(&v) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut out = self.0.clone();
                out.insert(pos, v);
                SubsetKey(out)
            }
        }
    }

    pub fn is_subset_of(&self, other: &SubsetKey) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    /// All subsets of this key (including the empty set and the key itself).
    pub fn subsets(&self) -> impl Iterator<Item = SubsetKey> + '_ {
        let k = self.0.len();
        assert!(k < 32, "subset enumeration limited to 31 elements");
        (0u32..(1u32 << k)).map(move |mask| {
            SubsetKey(
                (0..k)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| self.0[b])
                    .collect(),
            )
        })
    }
}

impl Ord for SubsetKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Canonicalizes a list of variable indices: sorts, deduplicates and checks
/// every index is below `n`.
pub fn canonical_key(vars: &[usize], n: usize) -> Result<SubsetKey> {
    if let Some(&bad) = vars.iter().find(|&&v| v >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    Ok(SubsetKey::from_unsorted(vars.iter().map(|&v| v as u32)))
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of subsets of `[n]` with size at most `k`.
pub fn count_subsets(n: usize, k: usize) -> usize {
    (0..=k.min(n)).map(|i| binomial(n, i)).sum()
}

/// All subsets of `[n]` of size at most `k`, ordered by size then lexicographically.
pub fn enumerate_subsets(n: usize, k: usize) -> impl Iterator<Item = SubsetKey> {
    let k = k.min(n);
    (0..=k).flat_map(move |size| Combinations::new(n, size))
}

struct Combinations {
    n: usize,
    current: Option<Vec<u32>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        let current = if k <= n {
            Some((0..k as u32).collect())
        } else {
            None
        };
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = SubsetKey;

    fn next(&mut self) -> Option<SubsetKey> {
        let cur = self.current.take()?;
        let out = SubsetKey(cur.clone());
        let k = cur.len();
        let mut next = cur;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if (next[i] as usize) < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(n: usize, k: usize) -> Vec<Vec<u32>> {
        enumerate_subsets(n, k).map(|s| s.vars().to_vec()).collect()
    }

    #[test]
    fn canonical_key_sorts_and_dedups() {
        assert_eq!(canonical_key(&[2, 0, 2], 3).unwrap().vars(), &[0, 2]);
        assert!(canonical_key(&[], 3).unwrap().is_empty());
        assert_eq!(canonical_key(&[5, 1, 3], 6).unwrap().vars(), &[1, 3, 5]);
        let again = canonical_key(&[1, 3, 5], 6).unwrap();
        assert_eq!(again, canonical_key(&[5, 1, 3], 6).unwrap());
        assert!(matches!(
            canonical_key(&[3], 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn enumeration_order_and_counts() {
        assert_eq!(keys(3, 1), vec![vec![], vec![0], vec![1], vec![2]]);
        assert_eq!(enumerate_subsets(4, 2).count(), 11);
        assert_eq!(keys(2, 2), vec![vec![], vec![0], vec![1], vec![0, 1]]);
        assert_eq!(enumerate_subsets(0, 0).count(), 1);
        for n in 0..8 {
            for k in 0..=n {
                let all: Vec<SubsetKey> = enumerate_subsets(n, k).collect();
                assert_eq!(all.len(), count_subsets(n, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn union_and_subsets() {
        let a = SubsetKey::from_unsorted([1, 4]);
        let b = SubsetKey::from_unsorted([0, 4, 7]);
        assert_eq!(a.union(&b).vars(), &[0, 1, 4, 7]);
        assert_eq!(a.with(2).vars(), &[1, 2, 4]);
        assert_eq!(b.subsets().count(), 8);
        assert!(a.is_subset_of(&a.union(&b)));
    }
}
