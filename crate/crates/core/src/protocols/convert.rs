//! Conversions between standard and no-input embezzlement.
//!
//! Standard to no-input: `V_X = S_X U_X W_X` where `W_X` pulls a fresh
//! `|0⟩` out of a new ancilla pool into the register, `U_X` acts, and `S_X`
//! swaps the result into a new output register. The catalyst is unchanged
//! because the extra `|00…⟩` of the new pool is the reference tail.
//!
//! No-input to standard: `U_X = S_X V_X W_X` where `W_X` pushes the input
//! register into a new ancilla pool, `V_X` creates its output, and `S_X`
//! swaps that output into the input register.

use crate::error::{Error, Result};
use crate::isometry::StructuredIsometry;
use crate::par;
use crate::site::{Party, Role, SiteId};

use super::{check_noinput_relation, Form, ProtocolBundle};

/// Commutation deviation above which a no-input bundle is refused.
pub const COMMUTATION_GATE: f64 = 1e-9;

pub fn standard_to_noinput(p: &ProtocolBundle) -> Result<ProtocolBundle> {
    if p.form != Form::Standard {
        return Err(Error::InvalidState("expected a standard bundle".into()));
    }
    p.check_locality()?;
    let n = p.target.local_dim();
    let out = p.fresh_output_index();
    let pool = Role::Ancilla(p.fresh_ancilla_layer());
    let convert = |party: Party, reg: SiteId, u: &StructuredIsometry| -> Result<StructuredIsometry> {
        let w = StructuredIsometry::pull_out(party, pool, reg.key())?;
        let s = StructuredIsometry::swap(reg, SiteId::output(party, out, n), false)?;
        StructuredIsometry::chain(&[w, u.clone(), s])
    };
    ProtocolBundle::new(
        Form::NoInput,
        convert(Party::A, p.registers.0, &p.alice)?,
        convert(Party::B, p.registers.1, &p.bob)?,
        p.catalyst.clone(),
        p.target.clone(),
        (SiteId::output(Party::A, out, n), SiteId::output(Party::B, out, n)),
    )
}

pub fn noinput_to_standard(p: &ProtocolBundle, seed: u64) -> Result<ProtocolBundle> {
    let report = check_noinput_relation(p, seed)?;
    if report.commute_dev > COMMUTATION_GATE {
        return Err(Error::CommutationViolation {
            deviation: report.commute_dev,
            tolerance: COMMUTATION_GATE,
        });
    }
    let n = p.target.local_dim();
    let reg = p.fresh_output_index();
    let pool = Role::Ancilla(p.fresh_ancilla_layer());
    let convert = |party: Party, output: SiteId, v: &StructuredIsometry| -> Result<StructuredIsometry> {
        let r = SiteId::output(party, reg, n);
        let w = StructuredIsometry::push_in(party, r.key(), pool)?;
        let s = StructuredIsometry::swap(output, r, false)?;
        StructuredIsometry::chain(&[w, v.clone(), s])
    };
    ProtocolBundle::new(
        Form::Standard,
        convert(Party::A, p.registers.0, &p.alice)?,
        convert(Party::B, p.registers.1, &p.bob)?,
        p.catalyst.clone(),
        p.target.clone(),
        (SiteId::output(Party::A, reg, n), SiteId::output(Party::B, reg, n)),
    )
}

/// Converts a standard bundle to no-input form and back, then compares both
/// standard bundles on `count` seeded catalyst probes with `|00⟩` registers.
/// Returns the largest distance between outputs, after renaming the new
/// register pair onto the original one.
pub fn round_trip_deviation(p: &ProtocolBundle, count: usize, seed: u64) -> Result<f64> {
    let back = noinput_to_standard(&standard_to_noinput(p)?, seed)?;
    let rename_a = StructuredIsometry::swap(back.registers.0, p.registers.0, false)?;
    let rename_b = StructuredIsometry::swap(back.registers.1, p.registers.1, false)?;
    let rename = StructuredIsometry::chain(&[rename_a, rename_b])?;
    let probes = p.catalyst_probes(count, seed)?;
    let devs = par::try_map(&probes, |x| {
        let direct = p.run(x)?;
        let trip = rename.apply(&back.run(x)?)?;
        direct.distance(&trip)
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}
