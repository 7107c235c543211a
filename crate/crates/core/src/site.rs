//! Site bookkeeping for registers of both parties.
//!
//! A site is addressed by `(party, role, index)`. The local dimension travels
//! with the [`SiteId`] but is not part of its identity; two ids with the same
//! key and different dimensions are a [`crate::Error::DimensionMismatch`]
//! wherever they meet.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => f.write_str("A"),
            Party::B => f.write_str("B"),
        }
    }
}

/// Register pools. Catalyst and ancilla pools carry a pool number so that
/// several independent tails can coexist (one per catalyst member, one per
/// conversion layer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Catalyst(u32),
    Ancilla(u32),
    Output,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Catalyst(p) => write!(f, "cat{p}"),
            Role::Ancilla(p) => write!(f, "anc{p}"),
            Role::Output => f.write_str("out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteKey {
    pub party: Party,
    pub role: Role,
    pub index: u32,
}

impl SiteKey {
    pub const fn new(party: Party, role: Role, index: u32) -> Self {
        SiteKey { party, role, index }
    }

    pub fn with_dim(self, dim: u32) -> SiteId {
        SiteId { party: self.party, role: self.role, index: self.index, dim }
    }
}

impl fmt::Display for SiteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.party, self.role, self.index)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SiteId {
    pub party: Party,
    pub role: Role,
    pub index: u32,
    pub dim: u32,
}

impl SiteId {
    pub const fn new(party: Party, role: Role, index: u32, dim: u32) -> Self {
        SiteId { party, role, index, dim }
    }

    pub fn catalyst(party: Party, pool: u32, index: u32, dim: u32) -> Self {
        SiteId::new(party, Role::Catalyst(pool), index, dim)
    }

    pub fn ancilla(party: Party, layer: u32, index: u32, dim: u32) -> Self {
        SiteId::new(party, Role::Ancilla(layer), index, dim)
    }

    pub fn output(party: Party, index: u32, dim: u32) -> Self {
        SiteId::new(party, Role::Output, index, dim)
    }

    pub fn key(&self) -> SiteKey {
        SiteKey { party: self.party, role: self.role, index: self.index }
    }

    /// Same site with a different index in the same pool.
    pub fn at(&self, index: u32) -> SiteId {
        SiteId { index, ..*self }
    }
}

impl PartialEq for SiteId {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for SiteId {}

impl PartialOrd for SiteId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SiteId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for SiteId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[d={}]", self.key(), self.dim)
    }
}

/// Product of local dimensions. Saturates instead of overflowing.
pub fn total_dim(sites: &[SiteId]) -> usize {
    sites
        .iter()
        .fold(1usize, |acc, s| acc.saturating_mul(s.dim as usize))
}

/// Flat index of a multi-index in row-major order over `dims`.
pub(crate) fn flatten(labels: impl IntoIterator<Item = u32>, dims: &[u32]) -> usize {
    labels
        .into_iter()
        .zip(dims)
        .fold(0usize, |acc, (l, &d)| acc * d as usize + l as usize)
}

/// Inverse of [`flatten`].
pub(crate) fn unflatten(mut flat: usize, dims: &[u32]) -> Vec<u32> {
    let mut out = vec![0u32; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = (flat % d as usize) as u32;
        flat /= d as usize;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_party_role_index() {
        let a = SiteId::catalyst(Party::A, 0, 5, 2);
        let b = SiteId::output(Party::A, 0, 2);
        let c = SiteId::catalyst(Party::B, 0, 0, 2);
        let mut v = vec![c, b, a];
        v.sort();
        assert_eq!(v, vec![a, b, c]);
        assert!(SiteId::ancilla(Party::A, 3, 0, 2) < SiteId::output(Party::A, 0, 2));
    }

    #[test]
    fn identity_ignores_dimension() {
        let a = SiteId::catalyst(Party::A, 0, 1, 2);
        let b = SiteId::catalyst(Party::A, 0, 1, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn flatten_roundtrip() {
        let dims = [2, 3, 4];
        for flat in 0..24 {
            assert_eq!(flatten(unflatten(flat, &dims), &dims), flat);
        }
        assert_eq!(flatten([1, 2, 3], &dims), 12 + 8 + 3);
    }
}
