//! Independence oracles for uniform, partition, contracted, and truncated
//! matroids, plus small exhaustive exchange utilities.

use std::collections::HashSet;

use crate::error::{input, Error, Result};
use crate::subset::{Element, Subset};

/// A partition matroid: at most `caps[i]` elements from block `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMatroid {
    block_of: Vec<usize>,
    caps: Vec<usize>,
}

impl PartitionMatroid {
    /// `blocks` must partition `{0, .., n-1}`.
    pub fn new(n: usize, blocks: &[Vec<Element>], caps: &[usize]) -> Result<Self> {
        if blocks.len() != caps.len() {
            return Err(input("partition needs exactly one cap per block"));
        }
        let mut block_of = vec![usize::MAX; n];
        for (i, block) in blocks.iter().enumerate() {
            for &e in block {
                if e >= n {
                    return Err(input(format!("block element {e} out of range for n = {n}")));
                }
                if block_of[e] != usize::MAX {
                    return Err(input(format!("element {e} appears in two blocks")));
                }
                block_of[e] = i;
            }
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(input(format!("element {e} belongs to no block")));
        }
        Ok(PartitionMatroid {
            block_of,
            caps: caps.to_vec(),
        })
    }

    pub fn block_of(&self, e: Element) -> usize {
        self.block_of[e]
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }

    pub fn block_count(&self) -> usize {
        self.caps.len()
    }

    fn block_counts(&self, s: &Subset) -> Vec<usize> {
        let mut counts = vec![0; self.caps.len()];
        for e in s.iter() {
            counts[self.block_of[e]] += 1;
        }
        counts
    }
}

/// Test matroid given by its list of independent sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitMatroid {
    n: usize,
    independent: HashSet<Subset>,
}

impl ExplicitMatroid {
    /// Independent sets are all subsets of the given bases.
    pub fn from_bases(n: usize, bases: &[Subset]) -> Result<Self> {
        let mut independent = HashSet::new();
        independent.insert(Subset::empty());
        for b in bases {
            b.check_range(n)?;
            if b.len() > 20 {
                return Err(Error::TooLarge("explicit bases limited to 20 elements".into()));
            }
            for mask in 0..1u64 << b.len() {
                independent.insert(b.select_mask(mask));
            }
        }
        Ok(ExplicitMatroid { n, independent })
    }

    pub fn independent_sets(&self) -> impl Iterator<Item = &Subset> {
        self.independent.iter()
    }
}

/// A feasibility oracle over the ground set `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    /// `|S| <= rank`.
    Uniform { n: usize, rank: usize },
    Partition(PartitionMatroid),
    /// Sets `S ⊆ N \ H` with `S ∪ H` independent in `base`.
    Contraction { base: Box<Constraint>, pinned: Subset },
    /// Independent in `base` and of size at most `cap`.
    Truncation { base: Box<Constraint>, cap: usize },
    Explicit(ExplicitMatroid),
}

impl Constraint {
    pub fn uniform(n: usize, rank: usize) -> Self {
        Constraint::Uniform { n, rank }
    }

    pub fn partition(n: usize, blocks: &[Vec<Element>], caps: &[usize]) -> Result<Self> {
        Ok(Constraint::Partition(PartitionMatroid::new(n, blocks, caps)?))
    }

    /// `I_H(M)`. `pinned` must itself be independent.
    pub fn contract(self, pinned: Subset) -> Result<Self> {
        pinned.check_range(self.ground_size())?;
        if !self.is_independent(&pinned) {
            return Err(input(format!("cannot contract by dependent set {pinned}")));
        }
        Ok(Constraint::Contraction {
            base: Box::new(self),
            pinned,
        })
    }

    /// `I(cap) ∩ I(M)`.
    pub fn truncate(self, cap: usize) -> Self {
        Constraint::Truncation {
            base: Box::new(self),
            cap,
        }
    }

    pub fn ground_size(&self) -> usize {
        match self {
            Constraint::Uniform { n, .. } => *n,
            Constraint::Partition(p) => p.block_of.len(),
            Constraint::Contraction { base, .. } | Constraint::Truncation { base, .. } => {
                base.ground_size()
            }
            Constraint::Explicit(e) => e.n,
        }
    }

    /// Elements that may appear in an independent set of this constraint.
    pub fn is_available(&self, e: Element) -> bool {
        match self {
            Constraint::Contraction { base, pinned } => !pinned.contains(e) && base.is_available(e),
            Constraint::Truncation { base, .. } => base.is_available(e),
            _ => e < self.ground_size(),
        }
    }

    pub fn is_independent(&self, s: &Subset) -> bool {
        match self {
            Constraint::Uniform { rank, .. } => s.len() <= *rank,
            Constraint::Partition(p) => p
                .block_counts(s)
                .iter()
                .zip(&p.caps)
                .all(|(c, cap)| c <= cap),
            Constraint::Contraction { base, pinned } => {
                s.is_disjoint(pinned) && base.is_independent(&s.union(pinned))
            }
            Constraint::Truncation { base, cap } => s.len() <= *cap && base.is_independent(s),
            Constraint::Explicit(e) => e.independent.contains(s),
        }
    }

    /// Greedily extends an independent `s` to a base, trying elements in
    /// ascending id order.
    pub fn extend_to_base(&self, s: &Subset) -> Result<Subset> {
        s.check_range(self.ground_size())?;
        if !self.is_independent(s) {
            return Err(input(format!("{s} is not independent")));
        }
        let mut current = s.clone();
        for e in 0..self.ground_size() {
            if current.contains(e) || !self.is_available(e) {
                continue;
            }
            let next = current.with(e);
            if self.is_independent(&next) {
                current = next;
            }
        }
        Ok(current)
    }

    /// Size of a maximum independent set.
    pub fn rank(&self) -> usize {
        self.extend_to_base(&Subset::empty())
            .map(|b| b.len())
            .unwrap_or(0)
    }

    pub fn is_base(&self, s: &Subset) -> bool {
        self.is_independent(s) && s.len() == self.rank()
    }

    /// Every single element is feasible on its own.
    pub fn check_singletons_feasible(&self) -> Result<()> {
        for e in 0..self.ground_size() {
            if !self.is_independent(&Subset::new([e])) {
                return Err(input(format!("single element {e} is infeasible")));
            }
        }
        Ok(())
    }

    pub fn as_partition(&self) -> Option<&PartitionMatroid> {
        match self {
            Constraint::Partition(p) => Some(p),
            _ => None,
        }
    }
}

/// Largest ground set for the exhaustive exchange utilities.
pub const MAX_EXCHANGE_N: usize = 12;

/// Brualdi bijection `π: A → B` with `A - a + π(a)` a base for every `a`
/// and `π` the identity on `A ∩ B`, found by exhaustive search. Returns the
/// lexicographically least such map as `(a, π(a))` pairs.
pub fn brualdi_bijection_bruteforce(
    c: &Constraint,
    a: &Subset,
    b: &Subset,
) -> Result<Vec<(Element, Element)>> {
    if c.ground_size() > MAX_EXCHANGE_N {
        return Err(Error::TooLarge(format!(
            "exhaustive bijection search limited to n <= {MAX_EXCHANGE_N}"
        )));
    }
    if !c.is_base(a) || !c.is_base(b) {
        return Err(input("both arguments must be bases"));
    }
    let a_ids: Vec<Element> = a.iter().collect();
    let b_ids: Vec<Element> = b.iter().collect();
    let mut used = vec![false; b_ids.len()];
    let mut assignment = Vec::with_capacity(a_ids.len());

    fn search(
        c: &Constraint,
        a: &Subset,
        b: &Subset,
        a_ids: &[Element],
        b_ids: &[Element],
        used: &mut [bool],
        assignment: &mut Vec<(Element, Element)>,
    ) -> bool {
        let k = assignment.len();
        if k == a_ids.len() {
            return true;
        }
        let x = a_ids[k];
        for (j, &y) in b_ids.iter().enumerate() {
            if used[j] {
                continue;
            }
            let allowed = if b.contains(x) {
                y == x
            } else {
                !a.contains(y) && c.is_base(&a.swap(x, y))
            };
            if allowed {
                used[j] = true;
                assignment.push((x, y));
                if search(c, a, b, a_ids, b_ids, used, assignment) {
                    return true;
                }
                assignment.pop();
                used[j] = false;
            }
        }
        false
    }

    if search(c, a, b, &a_ids, &b_ids, &mut used, &mut assignment) {
        Ok(assignment)
    } else {
        Err(Error::Numeric(
            "no exchange bijection exists: the oracle is not a matroid".into(),
        ))
    }
}

/// Strong base-order bijection for a partition matroid: identity on
/// `B1 ∩ B2`, and within each block the remaining elements of `B1` are
/// paired in ascending order with those of `B2`.
pub fn sbo_bijection_partition(
    c: &Constraint,
    b1: &Subset,
    b2: &Subset,
) -> Result<Vec<(Element, Element)>> {
    let p = c.as_partition().ok_or_else(|| {
        Error::Unsupported("strong base-order bijection needs a partition matroid".into())
    })?;
    if !c.is_base(b1) || !c.is_base(b2) {
        return Err(input("both arguments must be bases"));
    }
    let mut left: Vec<Vec<Element>> = vec![Vec::new(); p.block_count()];
    let mut right: Vec<Vec<Element>> = vec![Vec::new(); p.block_count()];
    let mut map = Vec::with_capacity(b1.len());
    for x in b1.iter() {
        if b2.contains(x) {
            map.push((x, x));
        } else {
            left[p.block_of(x)].push(x);
        }
    }
    for y in b2.iter().filter(|&y| !b1.contains(y)) {
        right[p.block_of(y)].push(y);
    }
    for (l, r) in left.iter().zip(&right) {
        debug_assert_eq!(l.len(), r.len(), "bases have equal block counts");
        map.extend(l.iter().copied().zip(r.iter().copied()));
    }
    map.sort_unstable();
    Ok(map)
}

/// Checks the strong exchange property of `σ` for every `X ⊆ B1`:
/// `(B1 \ X) ∪ σ(X)` and `(B2 \ σ(X)) ∪ X` are both bases.
pub fn strong_exchange_holds(
    c: &Constraint,
    b1: &Subset,
    b2: &Subset,
    sigma: &[(Element, Element)],
) -> Result<bool> {
    if b1.len() > MAX_EXCHANGE_N {
        return Err(Error::TooLarge("swap check limited to 12-element bases".into()));
    }
    for mask in 0..1u64 << sigma.len() {
        let x: Subset = (0..sigma.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| sigma[i].0)
            .collect();
        let sx: Subset = (0..sigma.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| sigma[i].1)
            .collect();
        if !c.is_base(&b1.difference(&x).union(&sx)) || !c.is_base(&b2.difference(&sx).union(&x)) {
            return Ok(false);
        }
    }
    Ok(true)
}
