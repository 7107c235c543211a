//! Spatially implemented isometries: products of site relabelings and
//! finitely supported operator cores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SiteOperator;
use crate::par;
use crate::relabel::{PoolShift, Relabeling};
use crate::site::{Party, Role, SiteId, SiteKey};
use crate::state::LazyProductState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Relabel(Relabeling),
    Core(SiteOperator),
}

/// Steps are applied in order, first step first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuredIsometry {
    steps: Vec<Step>,
}

impl StructuredIsometry {
    pub fn identity() -> Self {
        StructuredIsometry::default()
    }

    pub fn relabel(r: Relabeling) -> Self {
        StructuredIsometry { steps: vec![Step::Relabel(r)] }
    }

    pub fn core(op: SiteOperator) -> Self {
        StructuredIsometry { steps: vec![Step::Core(op)] }
    }

    pub fn from_steps(steps: Vec<Step>) -> Result<Self> {
        let v = StructuredIsometry { steps };
        v.site_dims()?;
        Ok(v)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Moves site 0 of `pool` into `register` and shifts the rest of the
    /// pool down by one.
    pub fn pull_out(party: Party, pool: Role, register: SiteKey) -> Result<Self> {
        if register.party != party {
            return Err(Error::PartyViolation { from: SiteKey::new(party, pool, 0), to: register });
        }
        let r = Relabeling::new(
            [(SiteKey::new(party, pool, 0), register)],
            vec![PoolShift { party, role: pool, start: 1, delta: -1 }],
            false,
        )?;
        Ok(StructuredIsometry::relabel(r))
    }

    /// Shifts `pool` up by one and moves `register` into the freed site 0.
    pub fn push_in(party: Party, register: SiteKey, pool: Role) -> Result<Self> {
        if register.party != party {
            return Err(Error::PartyViolation { from: register, to: SiteKey::new(party, pool, 0) });
        }
        let r = Relabeling::new(
            [(register, SiteKey::new(party, pool, 0))],
            vec![PoolShift { party, role: pool, start: 0, delta: 1 }],
            false,
        )?;
        Ok(StructuredIsometry::relabel(r))
    }

    /// Exchanges two registers. Crossing the A|B cut needs `cross_party`.
    pub fn swap(r1: SiteId, r2: SiteId, cross_party: bool) -> Result<Self> {
        if r1.dim != r2.dim {
            return Err(Error::DimensionMismatch { site: r2.key(), expected: r1.dim, found: r2.dim });
        }
        Ok(StructuredIsometry::relabel(Relabeling::swap(r1.key(), r2.key(), cross_party)?))
    }

    /// `v1 ∘ v2`: `v2` acts first.
    pub fn compose(v1: &StructuredIsometry, v2: &StructuredIsometry) -> Result<Self> {
        let mut steps = v2.steps.clone();
        steps.extend(v1.steps.iter().cloned());
        StructuredIsometry::from_steps(steps)
    }

    /// Chains several isometries, first element acting first.
    pub fn chain(parts: &[StructuredIsometry]) -> Result<Self> {
        StructuredIsometry::from_steps(parts.iter().flat_map(|p| p.steps.iter().cloned()).collect())
    }

    /// Local dimension of every site addressed by a core. Conflicting
    /// dimensions for one key are a site-space mismatch.
    pub fn site_dims(&self) -> Result<BTreeMap<SiteKey, u32>> {
        let mut dims = BTreeMap::new();
        for step in &self.steps {
            if let Step::Core(op) = step {
                for s in op.support() {
                    if let Some(&d) = dims.get(&s.key()) {
                        if d != s.dim {
                            return Err(Error::SiteSpaceMismatch {
                                site: s.key(),
                                detail: format!("local dimension {d} versus {}", s.dim),
                            });
                        }
                    }
                    dims.insert(s.key(), s.dim);
                }
            }
        }
        Ok(dims)
    }

    pub fn is_relabel_only(&self) -> bool {
        self.steps.iter().all(|s| matches!(s, Step::Relabel(_)))
    }

    /// Every site named by a move or a core support.
    pub fn named_sites(&self) -> Vec<SiteKey> {
        let mut out: Vec<SiteKey> = Vec::new();
        for step in &self.steps {
            match step {
                Step::Relabel(r) => out.extend(r.named_sites()),
                Step::Core(op) => out.extend(op.support().iter().map(|s| s.key())),
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Every pool (party, role) that a shift touches.
    pub fn shifted_pools(&self) -> Vec<(Party, Role)> {
        let mut out: Vec<(Party, Role)> = self
            .steps
            .iter()
            .filter_map(|s| match s {
                Step::Relabel(r) => Some(r.shifts().iter().map(|sh| (sh.party, sh.role))),
                Step::Core(_) => None,
            })
            .flatten()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// First site (if any) that belongs to the other party.
    pub fn foreign_site(&self, party: Party) -> Option<SiteKey> {
        if let Some(k) = self.named_sites().into_iter().find(|k| k.party != party) {
            return Some(k);
        }
        self.shifted_pools()
            .into_iter()
            .find(|(p, _)| *p != party)
            .map(|(p, role)| SiteKey::new(p, role, 0))
    }

    /// Schrödinger action on a state.
    pub fn apply(&self, state: &LazyProductState) -> Result<LazyProductState> {
        let mut cur = state.clone();
        for step in &self.steps {
            cur = match step {
                Step::Relabel(r) => cur.permute(r)?,
                Step::Core(op) => cur.apply_operator(op)?,
            };
        }
        Ok(cur)
    }

    /// Heisenberg action `V† X V`. Sites that `V` leaves vacant are in `|0⟩`
    /// on the image, so `X` is compressed to its `⟨0|·|0⟩` block there.
    pub fn conjugate(&self, x: &SiteOperator) -> Result<SiteOperator> {
        let mut cur = x.clone();
        for step in self.steps.iter().rev() {
            cur = match step {
                Step::Core(u) => u.adjoint().mul(&cur)?.mul(u)?,
                Step::Relabel(r) => {
                    let mut y = cur.clone();
                    for s in cur.support() {
                        if r.preimage(s.key()).is_none() {
                            y = y.compress_vacant(s.key())?;
                        }
                    }
                    y.map_sites(|k| r.preimage(k).expect("vacant sites compressed"))?
                }
            };
        }
        Ok(cur)
    }

    /// Inverse of a relabel-only isometry.
    pub fn inverse_relabeling(&self) -> Option<StructuredIsometry> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in self.steps.iter().rev() {
            match step {
                Step::Relabel(r) => steps.push(Step::Relabel(r.inverse())),
                Step::Core(_) => return None,
            }
        }
        Some(StructuredIsometry { steps })
    }
}

/// `max |⟨Vx, Vy⟩ − ⟨x, y⟩|` over all probe pairs, diagonal included.
pub fn verify_isometry(v: &StructuredIsometry, probes: &[LazyProductState]) -> Result<f64> {
    let images = par::try_map(probes, |p| v.apply(p))?;
    let n = probes.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let devs = par::try_map(&pairs, |&(i, j)| -> Result<f64> {
        let before = probes[i].inner_product(&probes[j])?;
        let after = images[i].inner_product(&images[j])?;
        Ok((after - before).norm())
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}
