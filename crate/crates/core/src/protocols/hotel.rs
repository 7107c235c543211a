//! Hilbert-hotel embezzler: infinitely many copies of the target, one of
//! which is pulled out per run while the rest shift down by one place.

use crate::error::{Error, Result};
use crate::isometry::StructuredIsometry;
use crate::relabel::{PoolShift, Relabeling};
use crate::site::{Party, Role, SiteId, SiteKey};
use crate::state::{tensor_states, LazyProductState, Reservoir};
use crate::target::TargetState;

use super::{Form, ProtocolBundle};

/// Catalyst pool holding the hotel copies; copy `k ≥ 1` sits at index `k`.
pub const HOTEL_POOL: u32 = 0;

fn copy_site(party: Party, k: u32, dim: u32) -> SiteId {
    SiteId::catalyst(party, HOTEL_POOL, k, dim)
}

/// `g^{⊗copies}` on explicit copies `1..=copies`, followed by a reservoir of
/// further copies of `g`.
pub fn build_hotel_catalyst(g: &TargetState, copies: u32) -> Result<LazyProductState> {
    if copies == 0 {
        return Err(Error::CatalystShape("at least one explicit copy is required".into()));
    }
    let n = g.local_dim();
    let mut state = LazyProductState::vacuum();
    for k in 1..=copies {
        let pair = g.pair_state(copy_site(Party::A, k, n), copy_site(Party::B, k, n))?;
        state = tensor_states(&state, &pair)?;
    }
    state.with_reservoir(Reservoir {
        pool: HOTEL_POOL,
        next_a: copies + 1,
        next_b: copies + 1,
        pair: g.clone(),
    })
}

/// Number of consecutive explicit copies `1, 2, …` present on both sides.
pub fn copy_count(f: &LazyProductState) -> u32 {
    let mut k = 0;
    while [Party::A, Party::B]
        .iter()
        .all(|&p| f.site(SiteKey::new(p, Role::Catalyst(HOTEL_POOL), k + 1)).is_some())
    {
        k += 1;
    }
    k
}

/// One party's hotel isometry: copy 1 moves to `output`, copies `k ≥ 2`
/// move to `k − 1`.
pub fn hotel_shift(party: Party, output: SiteKey) -> Result<StructuredIsometry> {
    let pool = Role::Catalyst(HOTEL_POOL);
    let r = Relabeling::new(
        [(SiteKey::new(party, pool, 1), output)],
        vec![PoolShift { party, role: pool, start: 2, delta: -1 }],
        false,
    )?;
    Ok(StructuredIsometry::relabel(r))
}

fn fresh_output(f: &LazyProductState) -> u32 {
    f.sites()
        .iter()
        .filter(|s| s.role == Role::Output)
        .map(|s| s.index + 1)
        .max()
        .unwrap_or(0)
}

/// Runs the hotel shift on both parties. The result equals `f ⊗ g` with `g`
/// on the returned output pair, and holds as many explicit copies as `f`.
pub fn hotel_step(f: &LazyProductState, g: &TargetState) -> Result<(LazyProductState, (SiteId, SiteId))> {
    let n = g.local_dim();
    let copies = copy_count(f);
    if copies == 0 {
        return Err(Error::CatalystShape("copy sites 1 are missing".into()));
    }
    for k in 1..=copies {
        for p in [Party::A, Party::B] {
            let s = f.site(SiteKey::new(p, Role::Catalyst(HOTEL_POOL), k)).expect("counted");
            if s.dim != n {
                return Err(Error::DimensionMismatch { site: s.key(), expected: n, found: s.dim });
            }
        }
    }
    match f.reservoir() {
        Some(res) if res.pool == HOTEL_POOL => {
            if res.pair != *g || res.next_a != copies + 1 || res.next_b != copies + 1 {
                return Err(Error::CatalystShape(format!(
                    "reservoir does not continue the {copies} explicit copies of the target"
                )));
            }
        }
        Some(_) => return Err(Error::CatalystShape("reservoir sits on another pool".into())),
        None if g.is_entangled() => {
            return Err(Error::CatalystShape("no reservoir of further copies".into()))
        }
        None => {}
    }
    let j = fresh_output(f);
    let (oa, ob) = (SiteId::output(Party::A, j, n), SiteId::output(Party::B, j, n));
    let vb = hotel_shift(Party::B, ob.key())?;
    let va = hotel_shift(Party::A, oa.key())?;
    let shifted = va.apply(&vb.apply(f)?)?;
    let restored = shifted.materialize(&[copy_site(Party::A, copies, n), copy_site(Party::B, copies, n)])?;
    Ok((restored, (oa, ob)))
}

/// Standard-form hotel: `U_X` moves copy 1 into the register, the register
/// content into ancilla pool 0 (shifting that pool up), and copies `k ≥ 2`
/// down by one.
pub fn hotel_standard_bundle(g: &TargetState, copies: u32) -> Result<ProtocolBundle> {
    let n = g.local_dim();
    let cat = Role::Catalyst(HOTEL_POOL);
    let anc = Role::Ancilla(0);
    let unitary = |party: Party, reg: SiteKey| -> Result<StructuredIsometry> {
        let r = Relabeling::new(
            [(SiteKey::new(party, cat, 1), reg), (reg, SiteKey::new(party, anc, 0))],
            vec![
                PoolShift { party, role: cat, start: 2, delta: -1 },
                PoolShift { party, role: anc, start: 0, delta: 1 },
            ],
            false,
        )?;
        Ok(StructuredIsometry::relabel(r))
    };
    let (ra, rb) = (SiteId::output(Party::A, 0, n), SiteId::output(Party::B, 0, n));
    ProtocolBundle::new(
        Form::Standard,
        unitary(Party::A, ra.key())?,
        unitary(Party::B, rb.key())?,
        build_hotel_catalyst(g, copies)?,
        g.clone(),
        (ra, rb),
    )
}

pub fn hotel_noinput_bundle(g: &TargetState, copies: u32) -> Result<ProtocolBundle> {
    let n = g.local_dim();
    let (oa, ob) = (SiteId::output(Party::A, 0, n), SiteId::output(Party::B, 0, n));
    ProtocolBundle::new(
        Form::NoInput,
        hotel_shift(Party::A, oa.key())?,
        hotel_shift(Party::B, ob.key())?,
        build_hotel_catalyst(g, copies)?,
        g.clone(),
        (oa, ob),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{check_noinput_relation, check_standard_relation};
    use crate::schmidt::schmidt_spectrum;
    use num_complex::Complex64;

    #[test]
    fn bell_catalyst_amplitudes() {
        let g = TargetState::bell();
        let one = build_hotel_catalyst(&g, 1).unwrap();
        assert_eq!(one.nnz(), 2);
        let three = build_hotel_catalyst(&g, 3).unwrap();
        assert_eq!(three.nnz(), 8);
        let a = std::f64::consts::FRAC_1_SQRT_2.powi(3);
        assert!(three.amplitudes().all(|(_, v)| (v - Complex64::new(a, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn pythagorean_catalyst_amplitudes() {
        let g = TargetState::new(vec![0.6, 0.8], 2).unwrap();
        let f = build_hotel_catalyst(&g, 2).unwrap();
        let mut amps: Vec<f64> = f.amplitudes().map(|(_, v)| v.re).collect();
        amps.sort_by(f64::total_cmp);
        let expect = [9.0, 12.0, 12.0, 16.0].map(|x| x / 25.0);
        for (a, e) in amps.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
    }

    #[test]
    fn hotel_step_is_exact_for_bell() {
        let g = TargetState::bell();
        let f = build_hotel_catalyst(&g, 3).unwrap();
        let (out, (a, b)) = hotel_step(&f, &g).unwrap();
        let expect = tensor_states(&f, &g.pair_state(a, b).unwrap()).unwrap();
        assert!((expect.inner_product(&out).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let (pair, rest) = out.split_product(&[a.key(), b.key()]).unwrap();
        let sp = schmidt_spectrum(&pair);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(sp.coefficients.iter().all(|c| (c - h).abs() < 1e-12));
        assert!(schmidt_spectrum(&rest).max_deviation(&schmidt_spectrum(&f)) < 1e-10);
        assert_eq!(copy_count(&rest), 3);
    }

    #[test]
    fn product_target_leaves_catalyst_unchanged() {
        let g = TargetState::product(2);
        let f = build_hotel_catalyst(&g, 2).unwrap();
        let (out, (a, b)) = hotel_step(&f, &g).unwrap();
        let (pair, rest) = out.split_product(&[a.key(), b.key()]).unwrap();
        assert_eq!(rest, f);
        assert_eq!(schmidt_spectrum(&pair).coefficients, vec![1.0]);
    }

    #[test]
    fn two_steps_give_two_independent_copies() {
        let g = TargetState::new(vec![0.6, 0.8], 2).unwrap();
        let f = build_hotel_catalyst(&g, 2).unwrap();
        let (f1, (a1, b1)) = hotel_step(&f, &g).unwrap();
        let (f2, (a2, b2)) = hotel_step(&f1, &g).unwrap();
        assert_ne!(a1, a2);
        let expect = tensor_states(
            &tensor_states(&f, &g.pair_state(a1, b1).unwrap()).unwrap(),
            &g.pair_state(a2, b2).unwrap(),
        )
        .unwrap();
        assert!(f2.distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn missing_copies_are_a_shape_error() {
        let g = TargetState::bell();
        assert!(matches!(
            hotel_step(&LazyProductState::vacuum(), &g),
            Err(Error::CatalystShape(_))
        ));
        let other = build_hotel_catalyst(&TargetState::new(vec![0.6, 0.8], 2).unwrap(), 2).unwrap();
        assert!(matches!(hotel_step(&other, &g), Err(Error::CatalystShape(_))));
    }

    #[test]
    fn hotel_bundles_satisfy_their_relations() {
        let g = TargetState::bell();
        let std = check_standard_relation(&hotel_standard_bundle(&g, 2).unwrap(), 5).unwrap();
        assert!(std.embezzle_dev <= 1e-12 && std.commute_dev <= 1e-12);
        let noi = check_noinput_relation(&hotel_noinput_bundle(&g, 2).unwrap(), 5).unwrap();
        assert!(noi.embezzle_dev <= 1e-12 && noi.commute_dev <= 1e-12);
    }
}
