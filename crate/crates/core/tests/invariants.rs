//! Property tests for structural invariants of states, operators and
//! protocols.

use embezzle_core::certify::{generator_basis, homomorphism_defect, AlgebraMorphism};
use embezzle_core::probes::random_battery;
use embezzle_core::protocols::{build_hotel_catalyst, hotel_step, vdh_embezzle_fidelity};
use embezzle_core::universal::enumerate_rational_family;
use embezzle_core::{
    schmidt_spectrum, tensor_states, LazyProductState, Party, PoolShift, Relabeling, Role, SiteId,
    SiteOperator, TargetState,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn a(i: u32, d: u32) -> SiteId {
    SiteId::catalyst(Party::A, 0, i, d)
}

fn b(i: u32, d: u32) -> SiteId {
    SiteId::catalyst(Party::B, 0, i, d)
}

/// Unitary from the QR factor of a complex Gaussian matrix.
fn random_unitary(n: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    m.qr().q()
}

fn target() -> impl Strategy<Value = TargetState> {
    (2u32..=3, prop::collection::vec(0.05f64..1.0, 3)).prop_map(|(n, w)| {
        TargetState::normalized(&w[..n as usize]).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn vacant_sites_are_neutral(seed in 0u64..1000, extra in 1u32..4) {
        let sites = [a(1, 2), b(1, 3)];
        let ps = random_battery(&sites, 2, seed).unwrap();
        let pad: Vec<SiteId> = (0..extra).map(|i| SiteId::ancilla(Party::A, 1, i, 2)).collect();
        let zero = LazyProductState::basis(pad.clone(), vec![0; pad.len()]).unwrap();
        let x = tensor_states(&ps[0], &zero).unwrap();
        let ip = x.inner_product(&ps[1]).unwrap() - ps[0].inner_product(&ps[1]).unwrap();
        prop_assert!(ip.norm() < 1e-14);
        prop_assert!(x.distance(&ps[0]).unwrap() < 1e-14);
        let op = SiteOperator::on_site(pad[0], &embezzle_core::operator::pauli::z()).unwrap();
        prop_assert!((ps[0].expectation(&op).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn tensor_inner_products_factor(seed in 0u64..1000) {
        let left = random_battery(&[a(1, 2), b(1, 2)], 2, seed).unwrap();
        let right = random_battery(&[a(2, 3)], 2, seed + 1).unwrap();
        let x = tensor_states(&left[0], &right[0]).unwrap();
        let y = tensor_states(&left[1], &right[1]).unwrap();
        let whole = x.inner_product(&y).unwrap();
        let parts = left[0].inner_product(&left[1]).unwrap() * right[0].inner_product(&right[1]).unwrap();
        prop_assert!((whole - parts).norm() < 1e-13);
    }

    #[test]
    fn local_unitaries_keep_schmidt_spectrum(seed in 0u64..1000) {
        let f = random_battery(&[a(1, 2), a(2, 2), b(1, 3)], 1, seed).unwrap().remove(0);
        let ua = SiteOperator::from_dense(vec![a(1, 2), a(2, 2)], &random_unitary(4, seed)).unwrap();
        let ub = SiteOperator::from_dense(vec![b(1, 3)], &random_unitary(3, seed + 7)).unwrap();
        let g = f.apply_operator(&ua).unwrap().apply_operator(&ub).unwrap();
        prop_assert!(schmidt_spectrum(&f).max_deviation(&schmidt_spectrum(&g)) < 1e-12);
        prop_assert!((schmidt_spectrum(&g).squared_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relabeling_round_trip(seed in 0u64..1000, delta in 1i32..4) {
        let sites: Vec<SiteId> = (1..4).map(|i| a(i, 2)).collect();
        let f = random_battery(&sites, 1, seed).unwrap().remove(0);
        let r = Relabeling::new(
            [],
            vec![PoolShift { party: Party::A, role: Role::Catalyst(0), start: 1, delta }],
            false,
        ).unwrap();
        let moved = f.permute(&r).unwrap();
        prop_assert!((moved.norm() - f.norm()).abs() < 1e-14);
        prop_assert_eq!(moved.permute(&r.inverse()).unwrap(), f);
    }

    #[test]
    fn hotel_placement_is_a_homomorphism(seed in 0u64..1000, n in 2u32..4) {
        let reg = SiteId::output(Party::B, 0, n);
        let phi = AlgebraMorphism::shift_place(Party::B, 0, reg).unwrap();
        let u = SiteOperator::from_dense(vec![reg], &random_unitary(n as usize, seed)).unwrap();
        let mut ops = generator_basis(reg).unwrap();
        ops.truncate(4);
        ops.push(u);
        ops.push(SiteOperator::on_site(b(2, n), &random_unitary(n as usize, seed + 1)).unwrap());
        let (defect, ratio) = homomorphism_defect(&phi, &ops).unwrap();
        prop_assert!(defect < 1e-13);
        prop_assert!((ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hotel_step_is_exact_for_any_target(g in target(), copies in 1u32..5) {
        let f = build_hotel_catalyst(&g, copies).unwrap();
        let (out, (oa, ob)) = hotel_step(&f, &g).unwrap();
        let expected = tensor_states(&f, &g.pair_state(oa, ob).unwrap()).unwrap();
        prop_assert!(out.distance(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn vdh_fidelity_is_bounded_and_monotone(m in 2u32..300, step in 1u32..50) {
        let bell = TargetState::bell();
        let lo = vdh_embezzle_fidelity(m, &bell).unwrap();
        let hi = vdh_embezzle_fidelity(m + step, &bell).unwrap();
        prop_assert!(lo < 1.0 && hi < 1.0);
        prop_assert!(hi > lo);
    }

    #[test]
    fn state_json_round_trip(seed in 0u64..1000) {
        let f = random_battery(&[a(1, 2), b(1, 2)], 1, seed).unwrap().remove(0);
        let text = serde_json::to_string(&f).unwrap();
        let back: LazyProductState = serde_json::from_str(&text).unwrap();
        prop_assert!(back.distance(&f).unwrap() < 1e-15);
    }
}

#[test]
fn enumerated_members_are_exactly_normalized() {
    let fam = enumerate_rational_family(4, 15).unwrap();
    assert!(fam.len() > 5);
    for m in &fam.members {
        let v = m.exact.as_ref().unwrap();
        let sum = v.iter().fold(Ratio::new(0i64, 1), |acc, x| acc + x * x);
        assert_eq!(sum, Ratio::from(1));
        assert!(v.windows(2).all(|w| w[0] >= w[1]));
    }
}
