//! Multi-index bookkeeping for the auxiliary density operators.

use std::collections::HashMap;
use std::fmt;

/// Occupation vector n = (n_1, …, n_N) labelling one auxiliary density operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HierarchyIndex(Vec<u32>);

impl HierarchyIndex {
    pub fn zero(n_sites: usize) -> Self {
        Self(vec![0; n_sites])
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> u32 {
        self.0.iter().sum()
    }

    /// n with n_site raised by one.
    pub fn raised(&self, site: usize) -> Self {
        let mut v = self.0.clone();
        v[site] += 1;
        Self(v)
    }

    /// n with n_site lowered by one, or `None` when n_site is already 0.
    pub fn lowered(&self, site: usize) -> Option<Self> {
        let mut v = self.0.clone();
        v[site] = v[site].checked_sub(1)?;
        Some(Self(v))
    }
}

impl From<Vec<u32>> for HierarchyIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for HierarchyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of `n_sites` components with sum ≤ `depth`, graded
/// by total depth and, within a tier, in descending lexicographic order
/// (so (1,0) precedes (0,1)).
pub fn enumerate_hierarchy(n_sites: usize, depth: u32) -> Vec<HierarchyIndex> {
    let mut out = Vec::new();
    let mut scratch = vec![0u32; n_sites];
    for d in 0..=depth {
        compositions(&mut scratch, 0, d, &mut out);
    }
    out
}

fn compositions(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<HierarchyIndex>) {
    if buf.is_empty() {
        if remaining == 0 {
            out.push(HierarchyIndex(Vec::new()));
        }
        return;
    }
    if pos == buf.len() - 1 {
        buf[pos] = remaining;
        out.push(HierarchyIndex(buf.to_vec()));
        return;
    }
    for k in (0..=remaining).rev() {
        buf[pos] = k;
        compositions(buf, pos + 1, remaining - k, out);
    }
}

/// C(n, k) in u128; enough for every hierarchy size that fits in memory.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Truncated hierarchy with a precomputed neighbour table.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    n_sites: usize,
    depth: u32,
    indices: Vec<HierarchyIndex>,
    /// `raised[pos * n_sites + j]` is the position of n_{j+}, if it is inside the truncation.
    raised: Vec<Option<usize>>,
    lowered: Vec<Option<usize>>,
}

impl Hierarchy {
    pub fn new(n_sites: usize, depth: u32) -> Self {
        let indices = enumerate_hierarchy(n_sites, depth);
        let lookup: HashMap<&HierarchyIndex, usize> =
            indices.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut raised = Vec::with_capacity(indices.len() * n_sites);
        let mut lowered = Vec::with_capacity(indices.len() * n_sites);
        for n in &indices {
            for j in 0..n_sites {
                raised.push(lookup.get(&n.raised(j)).copied());
                lowered.push(n.lowered(j).and_then(|m| lookup.get(&m).copied()));
            }
        }
        Self {
            n_sites,
            depth,
            indices,
            raised,
            lowered,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[HierarchyIndex] {
        &self.indices
    }

    pub fn position(&self, index: &HierarchyIndex) -> Option<usize> {
        self.indices.iter().position(|n| n == index)
    }

    #[inline]
    pub fn raised(&self, pos: usize, site: usize) -> Option<usize> {
        self.raised[pos * self.n_sites + site]
    }

    #[inline]
    pub fn lowered(&self, pos: usize, site: usize) -> Option<usize> {
        self.lowered[pos * self.n_sites + site]
    }
}
