//! Canonical subsets of the ground set `{0, .., n-1}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// Element identifier.
pub type Element = usize;

/// A set of element ids kept in ascending order without duplicates.
///
/// The canonical order is what the noise layer hashes, so two `Subset`s that
/// compare equal always receive the same noise multiplier.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(Vec<Element>);

impl Subset {
    pub fn empty() -> Self {
        Subset(Vec::new())
    }

    /// Builds a subset from arbitrary ids, sorting and dropping duplicates.
    pub fn new(ids: impl IntoIterator<Item = Element>) -> Self {
        let mut v: Vec<Element> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Subset(v)
    }

    /// Like [`Subset::new`] but rejects duplicates and ids `>= n`.
    pub fn try_new(ids: impl IntoIterator<Item = Element>, n: usize) -> Result<Self> {
        let mut v: Vec<Element> = ids.into_iter().collect();
        let len = v.len();
        v.sort_unstable();
        v.dedup();
        if v.len() != len {
            return Err(input("duplicate element id in subset"));
        }
        let s = Subset(v);
        s.check_range(n)?;
        Ok(s)
    }

    /// The full ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        Subset((0..n).collect())
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= n => Err(input(format!(
                "element id {max} out of range for ground set of size {n}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Element] {
        &self.0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = Element> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, x: Element) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// `S + x`. Adding a member returns an unchanged copy.
    pub fn with(&self, x: Element) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&x) {
            v.insert(pos, x);
        }
        Subset(v)
    }

    /// `S - x`. Removing a non-member returns an unchanged copy.
    pub fn without(&self, x: Element) -> Self {
        let mut v = self.0.clone();
        if let Ok(pos) = v.binary_search(&x) {
            v.remove(pos);
        }
        Subset(v)
    }

    /// `S - x + y`.
    pub fn swap(&self, x: Element, y: Element) -> Self {
        self.without(x).with(y)
    }

    pub fn union(&self, other: &Subset) -> Self {
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    v.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    v.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    v.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        v.extend_from_slice(&a[i..]);
        v.extend_from_slice(&b[j..]);
        Subset(v)
    }

    pub fn difference(&self, other: &Subset) -> Self {
        Subset(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn intersection(&self, other: &Subset) -> Self {
        Subset(self.0.iter().copied().filter(|&x| other.contains(x)).collect())
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.0.iter().all(|&x| !other.contains(x))
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    /// Fixed-width little-endian encoding of the ascending ids.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * self.0.len());
        for &x in &self.0 {
            out.extend_from_slice(&(x as u64).to_le_bytes());
        }
        out
    }

    /// Subset of `self` selected by the bits of `mask` (bit `i` = `i`-th smallest member).
    pub fn select_mask(&self, mask: u64) -> Self {
        Subset(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect(),
        )
    }

    pub fn into_vec(self) -> Vec<Element> {
        self.0
    }
}

impl FromIterator<Element> for Subset {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        Subset::new(iter)
    }
}

impl From<Vec<Element>> for Subset {
    fn from(v: Vec<Element>) -> Self {
        Subset::new(v)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let s = Subset::new([5, 1, 3, 1]);
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        assert_eq!(s, Subset::new([3, 5, 1]));
    }

    #[test]
    fn try_new_rejects_bad_ids() {
        assert!(Subset::try_new([0, 0], 3).is_err());
        assert!(Subset::try_new([0, 3], 3).is_err());
        assert!(Subset::try_new([2, 0], 3).is_ok());
    }

    #[test]
    fn set_algebra() {
        let a = Subset::new([1, 4, 6]);
        let b = Subset::new([2, 4]);
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 4, 6]);
        assert_eq!(a.difference(&b).as_slice(), &[1, 6]);
        assert_eq!(a.intersection(&b).as_slice(), &[4]);
        assert_eq!(a.swap(4, 0).as_slice(), &[0, 1, 6]);
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.select_mask(0b101).as_slice(), &[1, 6]);
        assert_eq!(a.to_string(), "{1,4,6}");
    }

    #[test]
    fn encoding_is_fixed_width() {
        let s = Subset::new([1, 256]);
        let e = s.encode();
        assert_eq!(e.len(), 16);
        assert_eq!(&e[..8], &1u64.to_le_bytes());
        assert_eq!(&e[8..], &256u64.to_le_bytes());
    }
}
