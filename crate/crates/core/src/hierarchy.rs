//! Flat indexing of the auxiliary density operator hierarchy.
//!
//! Multi-indices n = (n₁, …, n_N) with Σ n_j ≤ K are stored in graded
//! order: by depth first, and within one depth in descending lexicographic
//! order, so position 1..=N holds the unit vectors e₁..e_N. Neighbour
//! lookups (n ± e_j) are precomputed into raise/lower tables.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, C64};

const NONE: u32 = u32::MAX;

/// Copies of the ADO pool alive during one RK4 step (state, stage input,
/// stage derivative, accumulator).
pub const WORKING_COPIES: usize = 4;

/// Upper bound on the memory a propagation may allocate for its ADO pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryBudget {
    pub bytes: usize,
}

impl MemoryBudget {
    pub const DEFAULT: MemoryBudget = MemoryBudget { bytes: 2 << 30 };

    pub const fn unlimited() -> Self {
        MemoryBudget { bytes: usize::MAX }
    }
}

impl Default for MemoryBudget {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// One multi-index of the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyIndex<'a> {
    occupations: &'a [u32],
}

impl<'a> HierarchyIndex<'a> {
    pub fn occupations(&self) -> &'a [u32] {
        self.occupations
    }

    pub fn depth(&self) -> u32 {
        self.occupations.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyLayout {
    n_sites: usize,
    depth: usize,
    /// Row-major `count × n_sites` occupation numbers.
    occupations: Vec<u32>,
    raise: Vec<u32>,
    lower: Vec<u32>,
}

/// binomial(n, k), or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Number of ADOs with Σ n_j ≤ `depth` over `n_sites` sites.
pub fn ado_count(n_sites: usize, depth: usize) -> Option<usize> {
    binomial(depth.checked_add(n_sites)?, n_sites)
}

/// Bytes needed to propagate a hierarchy of the given shape.
pub fn required_bytes(n_sites: usize, depth: usize) -> Option<usize> {
    let count = ado_count(n_sites, depth)?;
    let pool = count
        .checked_mul(n_sites * n_sites)?
        .checked_mul(core::mem::size_of::<C64>())?
        .checked_mul(WORKING_COPIES)?;
    let tables = count.checked_mul(n_sites)?.checked_mul(3 * 4)?;
    pool.checked_add(tables)
}

/// Enumerates the hierarchy under the default memory budget.
pub fn enumerate_hierarchy(n_sites: usize, depth: usize) -> Result<HierarchyLayout> {
    HierarchyLayout::with_budget(n_sites, depth, MemoryBudget::DEFAULT)
}

impl HierarchyLayout {
    pub fn with_budget(n_sites: usize, depth: usize, budget: MemoryBudget) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidArgument("hierarchy needs at least one site".into()));
        }
        let count = ado_count(n_sites, depth).unwrap_or(usize::MAX);
        let required = required_bytes(n_sites, depth).unwrap_or(usize::MAX);
        if required > budget.bytes || count >= NONE as usize {
            return Err(Error::Capacity {
                count,
                required_bytes: required,
                budget_bytes: budget.bytes,
            });
        }

        let mut occupations = Vec::with_capacity(count * n_sites);
        let mut current = vec![0u32; n_sites];
        for d in 0..=depth {
            push_compositions(&mut occupations, &mut current, 0, d as u32);
        }
        debug_assert_eq!(occupations.len(), count * n_sites);

        let mut layout = Self {
            n_sites,
            depth,
            occupations,
            raise: vec![NONE; count * n_sites],
            lower: vec![NONE; count * n_sites],
        };
        let mut scratch = vec![0u32; n_sites];
        for i in 0..count {
            let d = layout.index(i).depth() as usize;
            for j in 0..n_sites {
                scratch.copy_from_slice(layout.index(i).occupations());
                if d < depth {
                    scratch[j] += 1;
                    layout.raise[i * n_sites + j] = layout.rank(&scratch) as u32;
                    scratch[j] -= 1;
                }
                if scratch[j] > 0 {
                    scratch[j] -= 1;
                    layout.lower[i * n_sites + j] = layout.rank(&scratch) as u32;
                }
            }
        }
        Ok(layout)
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Truncation depth K.
    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.occupations.len() / self.n_sites
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize) -> HierarchyIndex<'_> {
        HierarchyIndex {
            occupations: &self.occupations[i * self.n_sites..(i + 1) * self.n_sites],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = HierarchyIndex<'_>> + '_ {
        self.occupations
            .chunks_exact(self.n_sites)
            .map(|occupations| HierarchyIndex { occupations })
    }

    /// Position of n + e_j, absent at the truncation boundary.
    #[inline]
    pub fn raised(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.raise[i * self.n_sites + j];
        (r != NONE).then_some(r as usize)
    }

    /// Position of n − e_j, absent when n_j = 0.
    #[inline]
    pub fn lowered(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.lower[i * self.n_sites + j];
        (r != NONE).then_some(r as usize)
    }

    /// Position of a multi-index, or `None` if it is not in the layout.
    pub fn position(&self, occupations: &[u32]) -> Option<usize> {
        if occupations.len() != self.n_sites
            || occupations.iter().sum::<u32>() as usize > self.depth
        {
            return None;
        }
        Some(self.rank(occupations))
    }

    fn rank(&self, occ: &[u32]) -> usize {
        let n = self.n_sites;
        let d: usize = occ.iter().map(|&x| x as usize).sum();
        // Indices of smaller depth come first.
        let mut r = if d == 0 { 0 } else { binomial(d - 1 + n, n).unwrap() };
        let mut rem = d;
        for (i, &a) in occ.iter().enumerate().take(n - 1) {
            let a = a as usize;
            let parts_after = n - i - 1;
            // Compositions with a larger entry at position i precede this one.
            if rem > a {
                r += binomial(rem - a - 1 + parts_after, parts_after).unwrap();
            }
            rem -= a;
        }
        r
    }
}

fn push_compositions(out: &mut Vec<u32>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        push_compositions(out, current, pos + 1, remaining - v);
    }
    current[pos] = 0;
}
