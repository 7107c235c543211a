//! Embezzlement protocols in standard and no-input form.
//!
//! A standard protocol acts with local unitaries on catalyst plus a `|00⟩`
//! input register pair; a no-input protocol acts with local isometries on the
//! catalyst alone and creates the output registers.

mod convert;
mod hotel;
mod vdh;

pub use convert::{noinput_to_standard, round_trip_deviation, standard_to_noinput};
pub use hotel::{
    build_hotel_catalyst, copy_count, hotel_noinput_bundle, hotel_shift, hotel_standard_bundle,
    hotel_step, HOTEL_POOL,
};
pub use vdh::{
    build_vdh_catalyst, vdh_coefficients, vdh_embezzle_fidelity, vdh_standard_bundle,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::StructuredIsometry;
use crate::par;
use crate::probes::{basis_battery, random_battery};
use crate::site::{total_dim, Party, Role, SiteId, SiteKey};
use crate::state::{tensor_states, LazyProductState};
use crate::target::TargetState;

/// Largest probe space that is checked on a full basis; larger spaces use
/// [`RANDOM_PROBES`] seeded random vectors.
pub const BASIS_PROBE_LIMIT: usize = 4096;
pub const RANDOM_PROBES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Standard,
    NoInput,
}

/// Local maps plus catalyst. `registers` are the input/output register pair
/// for the standard form and the created output pair for the no-input form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolBundle {
    pub form: Form,
    pub alice: StructuredIsometry,
    pub bob: StructuredIsometry,
    pub catalyst: LazyProductState,
    pub target: TargetState,
    pub registers: (SiteId, SiteId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub embezzle_dev: f64,
    pub commute_dev: f64,
}

impl ProtocolBundle {
    pub fn new(
        form: Form,
        alice: StructuredIsometry,
        bob: StructuredIsometry,
        catalyst: LazyProductState,
        target: TargetState,
        registers: (SiteId, SiteId),
    ) -> Result<Self> {
        let p = ProtocolBundle { form, alice, bob, catalyst, target, registers };
        p.check_locality()?;
        for r in [p.registers.0, p.registers.1] {
            if r.dim != p.target.local_dim() {
                return Err(Error::DimensionMismatch {
                    site: r.key(),
                    expected: p.target.local_dim(),
                    found: r.dim,
                });
            }
        }
        Ok(p)
    }

    pub fn check_locality(&self) -> Result<()> {
        for (party, v) in [(Party::A, &self.alice), (Party::B, &self.bob)] {
            if let Some(site) = v.foreign_site(party) {
                return Err(Error::LocalityViolation { party, site });
            }
        }
        if self.registers.0.party != Party::A || self.registers.1.party != Party::B {
            return Err(Error::LocalityViolation { party: Party::A, site: self.registers.0.key() });
        }
        Ok(())
    }

    /// `(Alice ⊗ 1)(1 ⊗ Bob) x`.
    pub fn run(&self, x: &LazyProductState) -> Result<LazyProductState> {
        self.alice.apply(&self.bob.apply(x)?)
    }

    /// Same maps in the opposite order.
    pub fn run_reversed(&self, x: &LazyProductState) -> Result<LazyProductState> {
        self.bob.apply(&self.alice.apply(x)?)
    }

    /// Catalyst tensored with the target on the register pair.
    pub fn expected_output(&self) -> Result<LazyProductState> {
        let (a, b) = self.registers;
        tensor_states(&self.catalyst, &self.target.pair_state(a, b)?)
    }

    pub fn embezzle_deviation(&self) -> Result<f64> {
        self.run(&self.catalyst)?.distance(&self.expected_output()?)
    }

    /// `|⟨catalyst ⊗ target | protocol output⟩|`.
    pub fn output_fidelity(&self) -> Result<f64> {
        Ok(self.expected_output()?.inner_product(&self.run(&self.catalyst)?)?.norm())
    }

    fn site_dim(&self, key: SiteKey) -> Result<u32> {
        if let Some(s) = self.catalyst.site(key) {
            return Ok(s.dim);
        }
        for v in [&self.alice, &self.bob] {
            if let Some(&d) = v.site_dims()?.get(&key) {
                return Ok(d);
            }
        }
        if let Some(res) = self.catalyst.reservoir() {
            if key.role == res.role() {
                return Ok(res.pair.local_dim());
            }
        }
        Ok(self.target.local_dim())
    }

    /// Input space for probing: explicit catalyst sites, pool sites named by
    /// either map, and for the standard form the input registers. Other
    /// output registers are outside the domain.
    pub fn probe_sites(&self) -> Result<Vec<SiteId>> {
        let mut keys: Vec<SiteKey> = self.catalyst.sites().iter().map(|s| s.key()).collect();
        for v in [&self.alice, &self.bob] {
            keys.extend(v.named_sites().into_iter().filter(|k| {
                k.role != Role::Output && !self.catalyst.in_reservoir(*k)
            }));
        }
        if self.form == Form::Standard {
            keys.push(self.registers.0.key());
            keys.push(self.registers.1.key());
        }
        keys.sort();
        keys.dedup();
        keys.into_iter().map(|k| Ok(k.with_dim(self.site_dim(k)?))).collect()
    }

    /// Full basis of the probe space when small enough, otherwise seeded
    /// random vectors. Every probe carries the catalyst's reservoir tail.
    pub fn spanning_probes(&self, seed: u64) -> Result<Vec<LazyProductState>> {
        let sites = self.probe_sites()?;
        let raw = if total_dim(&sites) <= BASIS_PROBE_LIMIT {
            basis_battery(&sites)?
        } else {
            random_battery(&sites, RANDOM_PROBES, seed)?
        };
        self.with_tail(raw)
    }

    /// `count` random probes on the explicit catalyst sites.
    pub fn catalyst_probes(&self, count: usize, seed: u64) -> Result<Vec<LazyProductState>> {
        self.with_tail(random_battery(self.catalyst.sites(), count, seed)?)
    }

    fn with_tail(&self, raw: Vec<LazyProductState>) -> Result<Vec<LazyProductState>> {
        match self.catalyst.reservoir() {
            Some(res) => raw.into_iter().map(|p| p.with_reservoir(res.clone())).collect(),
            None => Ok(raw),
        }
    }

    /// `max ‖Alice·Bob x − Bob·Alice x‖` over the probes.
    pub fn commute_deviation(&self, probes: &[LazyProductState]) -> Result<f64> {
        let devs = par::try_map(probes, |x| self.run(x)?.distance(&self.run_reversed(x)?))?;
        Ok(devs.into_iter().fold(0.0, f64::max))
    }

    pub fn relation_report(&self, seed: u64) -> Result<RelationReport> {
        Ok(RelationReport {
            embezzle_dev: self.embezzle_deviation()?,
            commute_dev: self.commute_deviation(&self.spanning_probes(seed)?)?,
        })
    }

    pub(crate) fn fresh_output_index(&self) -> u32 {
        let mut keys: Vec<SiteKey> = self.catalyst.sites().iter().map(|s| s.key()).collect();
        keys.push(self.registers.0.key());
        keys.push(self.registers.1.key());
        keys.extend(self.alice.named_sites());
        keys.extend(self.bob.named_sites());
        keys.iter()
            .filter(|k| k.role == Role::Output)
            .map(|k| k.index + 1)
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn fresh_ancilla_layer(&self) -> u32 {
        let mut roles: Vec<Role> = self.catalyst.sites().iter().map(|s| s.role).collect();
        for v in [&self.alice, &self.bob] {
            roles.extend(v.named_sites().iter().map(|k| k.role));
            roles.extend(v.shifted_pools().iter().map(|p| p.1));
        }
        roles
            .iter()
            .filter_map(|r| match r {
                Role::Ancilla(l) => Some(l + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Defining relation of the no-input form: `(V_A ⊗ 1) V_B |φ⟩ = |φ⟩ ⊗ |g⟩`
/// and `V_A V_B = V_B V_A` on probes. Output registers are named, so the
/// canonical output swap is the identity relabeling here.
pub fn check_noinput_relation(p: &ProtocolBundle, seed: u64) -> Result<RelationReport> {
    if p.form != Form::NoInput {
        return Err(Error::InvalidState("expected a no-input bundle".into()));
    }
    p.relation_report(seed)
}

/// Defining relation of the standard form:
/// `(U_A ⊗ U_B)(|ψ⟩ ⊗ |00⟩) = |ψ⟩ ⊗ |g⟩` and `[U_A, U_B] = 0` on probes.
pub fn check_standard_relation(p: &ProtocolBundle, seed: u64) -> Result<RelationReport> {
    if p.form != Form::Standard {
        return Err(Error::InvalidState("expected a standard bundle".into()));
    }
    p.relation_report(seed)
}

/// The do-nothing standard bundle for a product target.
pub fn identity_standard_bundle(local_dim: u32) -> Result<ProtocolBundle> {
    ProtocolBundle::new(
        Form::Standard,
        StructuredIsometry::identity(),
        StructuredIsometry::identity(),
        LazyProductState::vacuum(),
        TargetState::product(local_dim),
        (SiteId::output(Party::A, 0, local_dim), SiteId::output(Party::B, 0, local_dim)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SiteOperator;
    use crate::relabel::{PoolShift, Relabeling};

    #[test]
    fn identity_bundle_has_zero_deviations() {
        let p = identity_standard_bundle(2).unwrap();
        let r = check_standard_relation(&p, 1).unwrap();
        assert_eq!(r.embezzle_dev, 0.0);
        assert_eq!(r.commute_dev, 0.0);
    }

    #[test]
    fn foreign_site_is_a_locality_violation() {
        let p = identity_standard_bundle(2).unwrap();
        let bad = StructuredIsometry::core(
            SiteOperator::identity(vec![SiteId::output(Party::B, 0, 2)]).unwrap(),
        );
        let err = ProtocolBundle::new(
            Form::Standard,
            bad,
            p.bob.clone(),
            p.catalyst.clone(),
            p.target.clone(),
            p.registers,
        );
        assert!(matches!(err, Err(Error::LocalityViolation { party: Party::A, .. })));
    }

    #[test]
    fn wrong_shift_breaks_noinput_relation() {
        let g = TargetState::bell();
        let good = hotel_noinput_bundle(&g, 3).unwrap();
        let pool = Role::Catalyst(HOTEL_POOL);
        let wrong = Relabeling::new(
            [(SiteKey::new(Party::B, pool, 2), good.registers.1.key())],
            vec![PoolShift { party: Party::B, role: pool, start: 3, delta: -1 }],
            false,
        )
        .unwrap();
        let bad = ProtocolBundle { bob: StructuredIsometry::relabel(wrong), ..good };
        let r = check_noinput_relation(&bad, 1).unwrap();
        assert!(r.embezzle_dev > 0.5);
    }
}
