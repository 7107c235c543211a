//! Finite-depth certification that a catalyst locally contains commuting
//! copies of a target state.
//!
//! Generators of the target's local algebras are lifted into the catalyst
//! algebra by repeated application of party-local morphisms. Level `n` of
//! the lift should reproduce the target's statistics under the catalyst
//! state, and distinct levels should commute and be uncorrelated.

pub mod generators;
pub mod morphism;

pub use generators::{generator_basis, generator_matrices, BASIS_NAME};
pub use morphism::{homomorphism_defect, AlgebraMorphism, MorphismKind};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SiteOperator;
use crate::par;
use crate::site::{Party, SiteId};
use crate::state::LazyProductState;
use crate::target::TargetState;

/// Lifted generators at one level, index-aligned with
/// [`generator_matrices`] of the target's local dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableFamily {
    pub level: u32,
    pub local_dim: u32,
    pub alice_ops: Vec<SiteOperator>,
    pub bob_ops: Vec<SiteOperator>,
}

impl ObservableFamily {
    pub fn new(level: u32, local_dim: u32, alice_ops: Vec<SiteOperator>, bob_ops: Vec<SiteOperator>) -> Result<Self> {
        for (party, ops) in [(Party::A, &alice_ops), (Party::B, &bob_ops)] {
            for op in ops {
                if let Some(s) = op.support().iter().find(|s| s.party != party) {
                    return Err(Error::LocalityViolation { party, site: s.key() });
                }
            }
        }
        Ok(ObservableFamily { level, local_dim, alice_ops, bob_ops })
    }

    fn all_ops(&self) -> impl Iterator<Item = &SiteOperator> {
        self.alice_ops.iter().chain(&self.bob_ops)
    }
}

fn lift_once(phi: &AlgebraMorphism, ops: &[SiteOperator]) -> Result<Vec<SiteOperator>> {
    par::try_map(ops, |op| phi.apply(op))
}

fn base_generators(phi: &AlgebraMorphism, g: &TargetState) -> Result<Vec<SiteOperator>> {
    let reg = phi
        .register()
        .ok_or_else(|| Error::MorphismType("morphism has no register".into()))?;
    if reg.dim != g.local_dim() {
        return Err(Error::MorphismType(format!(
            "register {} has dimension {}, target needs {}",
            reg.key(),
            reg.dim,
            g.local_dim()
        )));
    }
    generator_basis(reg)
}

/// Levels `1..=depth`: level 1 is `Φ(1 ⊗ M)`, level `k` is `Φ(M_{k−1} ⊗ 1)`.
pub fn lift_levels(
    phi_a: &AlgebraMorphism,
    phi_b: &AlgebraMorphism,
    g: &TargetState,
    depth: u32,
) -> Result<Vec<ObservableFamily>> {
    if phi_a.party != Party::A || phi_b.party != Party::B {
        return Err(Error::MorphismType("morphisms must be ordered (A, B)".into()));
    }
    let mut a = base_generators(phi_a, g)?;
    let mut b = base_generators(phi_b, g)?;
    let mut out = Vec::with_capacity(depth as usize);
    for level in 1..=depth {
        a = lift_once(phi_a, &a)?;
        b = lift_once(phi_b, &b)?;
        out.push(ObservableFamily::new(level, g.local_dim(), a.clone(), b.clone())?);
    }
    Ok(out)
}

/// The family at level `n` alone.
pub fn lift_observables(
    phi_a: &AlgebraMorphism,
    phi_b: &AlgebraMorphism,
    g: &TargetState,
    n: u32,
) -> Result<ObservableFamily> {
    if n == 0 {
        return Err(Error::MorphismType("levels start at 1".into()));
    }
    Ok(lift_levels(phi_a, phi_b, g, n)?.pop().expect("n ≥ 1"))
}

fn disjoint(x: &SiteOperator, y: &SiteOperator) -> bool {
    !x.support().iter().any(|s| y.support().iter().any(|t| t.key() == s.key()))
}

/// `max ‖[O, P]‖` over operators from distinct families.
pub fn check_mutual_commutativity(families: &[ObservableFamily]) -> Result<f64> {
    let mut pairs = Vec::new();
    for (i, f1) in families.iter().enumerate() {
        for f2 in &families[i + 1..] {
            for x in f1.all_ops() {
                for y in f2.all_ops() {
                    if !disjoint(x, y) {
                        pairs.push((x, y));
                    }
                }
            }
        }
    }
    let norms = par::try_map(&pairs, |(x, y)| Ok::<_, Error>(x.commutator(y)?.norm()))?;
    Ok(norms.into_iter().fold(0.0, f64::max))
}

fn apply_all(f: &LazyProductState, ops: &[SiteOperator], adjoint: bool) -> Result<Vec<LazyProductState>> {
    par::try_map(ops, |op| {
        if adjoint {
            f.apply_operator(&op.adjoint())
        } else {
            f.apply_operator(op)
        }
    })
}

fn target_table(g: &TargetState, gens: &[DMatrix<Complex64>]) -> Vec<Complex64> {
    let n = gens.len();
    let mut t = Vec::with_capacity(n * n);
    for a in gens {
        for b in gens {
            t.push(g.expectation(a, b));
        }
    }
    t
}

/// `max_{ij} |⟨f| A_i B_j |f⟩ − ⟨g| G_i ⊗ G_j |g⟩|` over the full
/// generator-product battery.
pub fn check_certification(f: &LazyProductState, family: &ObservableFamily, g: &TargetState) -> Result<f64> {
    let gens = generator_matrices(g.local_dim() as usize)?;
    if family.alice_ops.len() != gens.len() || family.bob_ops.len() != gens.len() {
        return Err(Error::MorphismType("family does not match the target's generator basis".into()));
    }
    let left = apply_all(f, &family.alice_ops, true)?;
    let right = apply_all(f, &family.bob_ops, false)?;
    let expect = target_table(g, &gens);
    let n = gens.len();
    let devs = par::try_map_range(n * n, |k| -> Result<f64> {
        let (i, j) = (k / n, k % n);
        Ok((left[i].inner_product(&right[j])? - expect[k]).norm())
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Vectors `(A_i B_j) f` for all generator pairs, or their adjoint action.
fn product_vectors(f: &LazyProductState, fam: &ObservableFamily, adjoint: bool) -> Result<Vec<LazyProductState>> {
    let n = fam.alice_ops.len();
    par::try_map_range(n * n, |k| {
        let (a, b) = (&fam.alice_ops[k / n], &fam.bob_ops[k % n]);
        if adjoint {
            // (A B)† f = B† A† f; A and B act on different parties
            f.apply_operator(&a.adjoint())?.apply_operator(&b.adjoint())
        } else {
            f.apply_operator(b)?.apply_operator(a)
        }
    })
}

/// `max |⟨f| O₁ O₂ |f⟩ − g₁(a₁) g₂(a₂)|` with `O_k` running over the
/// generator products `A_i B_j` of each family.
pub fn check_joint_structure(
    f: &LazyProductState,
    first: (&ObservableFamily, &TargetState),
    second: (&ObservableFamily, &TargetState),
) -> Result<f64> {
    let t1 = target_table(first.1, &generator_matrices(first.1.local_dim() as usize)?);
    let t2 = target_table(second.1, &generator_matrices(second.1.local_dim() as usize)?);
    let left = product_vectors(f, first.0, true)?;
    let right = product_vectors(f, second.0, false)?;
    if left.len() != t1.len() || right.len() != t2.len() {
        return Err(Error::MorphismType("family does not match the target's generator basis".into()));
    }
    let m = right.len();
    let devs = par::try_map_range(left.len() * m, |k| -> Result<f64> {
        let (p, q) = (k / m, k % m);
        Ok((left[p].inner_product(&right[q])? - t1[p] * t2[q]).norm())
    })?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Product-structure witness for two levels lifted from the same target.
pub fn check_product_structure(
    f: &LazyProductState,
    fam1: &ObservableFamily,
    fam2: &ObservableFamily,
    g: &TargetState,
) -> Result<f64> {
    check_joint_structure(f, (fam1, g), (fam2, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    pub deviation: f64,
}

/// Local containment of `g` in `f` through `(π_A, π_B)`, on the generator
/// battery.
pub fn contains_state(
    f: &LazyProductState,
    pi_a: &AlgebraMorphism,
    pi_b: &AlgebraMorphism,
    g: &TargetState,
    tolerance: f64,
) -> Result<Containment> {
    let a = lift_once(pi_a, &base_generators(pi_a, g)?)?;
    let b = lift_once(pi_b, &base_generators(pi_b, g)?)?;
    let fam = ObservableFamily::new(1, g.local_dim(), a, b)?;
    let deviation = check_certification(f, &fam, g)?;
    Ok(Containment { contained: deviation <= tolerance, deviation })
}

/// Placement of one register pair onto hotel-style copy sites `copies` of
/// `pool`, registers spreading over the copies in order.
pub fn copy_embedding(pool: u32, copies: &[u32], g: &TargetState) -> Result<(AlgebraMorphism, AlgebraMorphism)> {
    let n = g.local_dim();
    let total = n
        .checked_pow(copies.len() as u32)
        .ok_or_else(|| Error::Dimension("register dimension overflows".into()))?;
    let make = |party: Party| {
        let targets = copies.iter().map(|&k| SiteId::catalyst(party, pool, k, n)).collect();
        AlgebraMorphism::placement(party, vec![(SiteId::output(party, 0, total), targets)])
    };
    Ok((make(Party::A)?, make(Party::B)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub label: String,
    pub levels: Vec<u32>,
    pub max_commutator: f64,
    pub max_expectation_dev: f64,
    /// Entry `k`: largest commutator between level `k + 1` and any lower level.
    pub commutator_by_level: Vec<f64>,
    pub expectation_dev_by_level: Vec<f64>,
    pub basis: String,
    pub surjectivity: String,
    pub tolerance: f64,
    pub pass: bool,
}

impl CertificationReport {
    pub fn finish(
        label: impl Into<String>,
        levels: Vec<u32>,
        commutator_by_level: Vec<f64>,
        expectation_dev_by_level: Vec<f64>,
        basis: String,
        surjectivity: &str,
        tolerance: f64,
    ) -> Self {
        let max_commutator = commutator_by_level.iter().copied().fold(0.0, f64::max);
        let max_expectation_dev = expectation_dev_by_level.iter().copied().fold(0.0, f64::max);
        CertificationReport {
            label: label.into(),
            levels,
            max_commutator,
            max_expectation_dev,
            commutator_by_level,
            expectation_dev_by_level,
            basis,
            surjectivity: surjectivity.to_string(),
            tolerance,
            pass: max_commutator <= tolerance && max_expectation_dev <= tolerance,
        }
    }
}

/// Commutativity across every pair of levels `m < n ≤ depth`, and the
/// certification deviation at every level.
pub fn certify_levels(
    label: impl Into<String>,
    f: &LazyProductState,
    phi_a: &AlgebraMorphism,
    phi_b: &AlgebraMorphism,
    g: &TargetState,
    depth: u32,
    tolerance: f64,
) -> Result<CertificationReport> {
    let fams = lift_levels(phi_a, phi_b, g, depth)?;
    let commutators = par::try_map_range(fams.len(), |k| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for lower in &fams[..k] {
            worst = worst.max(check_mutual_commutativity(&[lower.clone(), fams[k].clone()])?);
        }
        Ok(worst)
    })?;
    let devs = par::try_map(&fams, |fam| check_certification(f, fam, g))?;
    let surj = if phi_a.is_structural() && phi_b.is_structural() { "structural" } else { "generator-verified" };
    Ok(CertificationReport::finish(
        label,
        (1..=depth).collect(),
        commutators,
        devs,
        format!("{BASIS_NAME}({})", g.local_dim()),
        surj,
        tolerance,
    ))
}

/// Hotel morphisms `(Φ_A, Φ_B)` for target dimension `n` on catalyst pool
/// `pool`, with the target registers at output index 0.
pub fn hotel_morphisms(pool: u32, n: u32) -> Result<(AlgebraMorphism, AlgebraMorphism)> {
    Ok((
        AlgebraMorphism::shift_place(Party::A, pool, SiteId::output(Party::A, 0, n))?,
        AlgebraMorphism::shift_place(Party::B, pool, SiteId::output(Party::B, 0, n))?,
    ))
}
