//! Site relabelings: a finite move table plus uniform shifts of pool tails.
//!
//! Pool shifts address infinitely many sites at once (`index ≥ start` moves
//! by `delta`), which is what makes pull-out, push-in and the hotel shift
//! exact under the lazy-tail representation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::site::{Party, Role, SiteKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolShift {
    pub party: Party,
    pub role: Role,
    pub start: u32,
    pub delta: i32,
}

impl PoolShift {
    pub fn covers(&self, key: SiteKey) -> bool {
        key.party == self.party && key.role == self.role && key.index >= self.start
    }

    /// Start of the shifted image.
    pub fn image_start(&self) -> u32 {
        (self.start as i64 + self.delta as i64) as u32
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Relabeling {
    moves: BTreeMap<SiteKey, SiteKey>,
    shifts: Vec<PoolShift>,
    cross_party: bool,
}

impl Relabeling {
    pub fn identity() -> Self {
        Relabeling::default()
    }

    /// Builds and validates a relabeling.
    ///
    /// Moves take precedence over shifts. A downward shift must vacate its
    /// landing zone through moves, and move targets must be distinct.
    pub fn new(
        moves: impl IntoIterator<Item = (SiteKey, SiteKey)>,
        shifts: Vec<PoolShift>,
        cross_party: bool,
    ) -> Result<Self> {
        let moves: BTreeMap<SiteKey, SiteKey> = moves.into_iter().collect();
        let mut seen = std::collections::BTreeSet::new();
        for (&from, &to) in &moves {
            if !seen.insert(to) {
                return Err(Error::DomainViolation(format!("two sites move onto {to}")));
            }
            if !cross_party && from.party != to.party {
                return Err(Error::PartyViolation { from, to });
            }
        }
        for (i, s) in shifts.iter().enumerate() {
            if (s.start as i64) + (s.delta as i64) < 0 {
                return Err(Error::DomainViolation(format!(
                    "shift of {}{} below index zero",
                    s.party, s.role
                )));
            }
            if shifts[..i].iter().any(|t| t.party == s.party && t.role == s.role) {
                return Err(Error::DomainViolation(format!(
                    "pool {}{} shifted twice in one relabeling",
                    s.party, s.role
                )));
            }
            if s.delta < 0 {
                for idx in s.image_start()..s.start {
                    let k = SiteKey::new(s.party, s.role, idx);
                    if !moves.contains_key(&k) {
                        return Err(Error::DomainViolation(format!(
                            "shift lands on {k} which is not vacated"
                        )));
                    }
                }
            }
            for &to in moves.values() {
                if to.party != s.party || to.role != s.role || to.index < s.image_start() {
                    continue;
                }
                let from = SiteKey { index: (to.index as i64 - s.delta as i64) as u32, ..to };
                if from.index >= s.start && !moves.contains_key(&from) {
                    return Err(Error::DomainViolation(format!(
                        "{to} is both a move target and the shifted image of {from}"
                    )));
                }
            }
        }
        Ok(Relabeling { moves, shifts, cross_party })
    }

    pub fn swap(a: SiteKey, b: SiteKey, cross_party: bool) -> Result<Self> {
        Relabeling::new([(a, b), (b, a)], Vec::new(), cross_party)
    }

    pub fn moves(&self) -> &BTreeMap<SiteKey, SiteKey> {
        &self.moves
    }

    pub fn shifts(&self) -> &[PoolShift] {
        &self.shifts
    }

    pub fn is_cross_party(&self) -> bool {
        self.cross_party
    }

    pub fn is_identity(&self) -> bool {
        self.moves.iter().all(|(a, b)| a == b) && self.shifts.iter().all(|s| s.delta == 0)
    }

    pub fn shift_for(&self, party: Party, role: Role) -> Option<&PoolShift> {
        self.shifts.iter().find(|s| s.party == party && s.role == role)
    }

    /// Forward image of a site.
    pub fn map_key(&self, key: SiteKey) -> SiteKey {
        if let Some(&to) = self.moves.get(&key) {
            return to;
        }
        match self.shifts.iter().find(|s| s.covers(key)) {
            Some(s) => SiteKey { index: (key.index as i64 + s.delta as i64) as u32, ..key },
            None => key,
        }
    }

    /// Unique site mapped onto `key`, or `None` when `key` is left vacant.
    pub fn preimage(&self, key: SiteKey) -> Option<SiteKey> {
        if let Some((&from, _)) = self.moves.iter().find(|(_, &to)| to == key) {
            return Some(from);
        }
        if let Some(s) = self.shifts.iter().find(|s| s.party == key.party && s.role == key.role) {
            let p = key.index as i64 - s.delta as i64;
            if p >= s.start as i64 {
                let cand = SiteKey { index: p as u32, ..key };
                if !self.moves.contains_key(&cand) {
                    return Some(cand);
                }
            }
            if key.index >= s.start {
                return None;
            }
        }
        if self.moves.contains_key(&key) {
            None
        } else {
            Some(key)
        }
    }

    /// Inverse relabeling. Sites vacated by `self` become unconstrained.
    pub fn inverse(&self) -> Relabeling {
        let moves = self.moves.iter().map(|(&a, &b)| (b, a)).collect();
        let shifts = self
            .shifts
            .iter()
            .map(|s| PoolShift { start: s.image_start(), delta: -s.delta, ..*s })
            .collect();
        Relabeling { moves, shifts, cross_party: self.cross_party }
    }

    /// Sites named explicitly by the move table (both ends).
    pub fn named_sites(&self) -> impl Iterator<Item = SiteKey> + '_ {
        self.moves.iter().flat_map(|(&a, &b)| [a, b])
    }

    /// Every party that the relabeling can affect.
    pub fn parties(&self) -> Vec<Party> {
        let mut ps: Vec<Party> = self
            .named_sites()
            .map(|k| k.party)
            .chain(self.shifts.iter().map(|s| s.party))
            .collect();
        ps.sort();
        ps.dedup();
        ps
    }
}
