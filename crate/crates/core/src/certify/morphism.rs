//! Structural *-homomorphisms `𝒜_f ⊗ 𝒜_g → 𝒜_f` acting on finitely
//! supported operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::StructuredIsometry;
use crate::operator::SiteOperator;
use crate::relabel::PoolShift;
use crate::site::{Party, Role, SiteId, SiteKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorphismKind {
    /// Each register is spread over its target sites (first target most
    /// significant); catalyst sites covered by a shift move along with it.
    Placement {
        placements: Vec<(SiteId, Vec<SiteId>)>,
        shifts: Vec<PoolShift>,
    },
    /// `X ↦ V† X V`, where `register` is the output site of `V` that
    /// carries the target algebra.
    Conjugation {
        isometry: StructuredIsometry,
        register: SiteId,
    },
    /// Applied in order, first element first.
    Composite(Vec<AlgebraMorphism>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraMorphism {
    pub party: Party,
    pub kind: MorphismKind,
}

impl AlgebraMorphism {
    /// Hotel-type embedding: the register lands on site 1 of `pool` while
    /// catalyst sites `k ≥ 1` of that pool move to `k + 1`.
    pub fn shift_place(party: Party, pool: u32, register: SiteId) -> Result<Self> {
        if register.party != party {
            return Err(Error::MorphismType(format!("register {} belongs to the other party", register.key())));
        }
        Ok(AlgebraMorphism {
            party,
            kind: MorphismKind::Placement {
                placements: vec![(register, vec![SiteId::catalyst(party, pool, 1, register.dim)])],
                shifts: vec![PoolShift { party, role: Role::Catalyst(pool), start: 1, delta: 1 }],
            },
        })
    }

    /// Plain placement of registers onto catalyst sites, no shift.
    pub fn placement(party: Party, placements: Vec<(SiteId, Vec<SiteId>)>) -> Result<Self> {
        for (reg, targets) in &placements {
            let product: u64 = targets.iter().map(|t| t.dim as u64).product();
            if reg.party != party || targets.iter().any(|t| t.party != party) {
                return Err(Error::MorphismType(format!("placement of {} leaves party {party}", reg.key())));
            }
            if product != reg.dim as u64 {
                return Err(Error::MorphismType(format!(
                    "register {} of dimension {} cannot spread over dimension {product}",
                    reg.key(),
                    reg.dim
                )));
            }
        }
        Ok(AlgebraMorphism { party, kind: MorphismKind::Placement { placements, shifts: Vec::new() } })
    }

    pub fn conjugation(party: Party, isometry: StructuredIsometry, register: SiteId) -> Result<Self> {
        if let Some(site) = isometry.foreign_site(party) {
            return Err(Error::LocalityViolation { party, site });
        }
        Ok(AlgebraMorphism { party, kind: MorphismKind::Conjugation { isometry, register } })
    }

    pub fn composite(party: Party, parts: Vec<AlgebraMorphism>) -> Result<Self> {
        if parts.iter().any(|p| p.party != party) {
            return Err(Error::MorphismType("composite mixes parties".into()));
        }
        Ok(AlgebraMorphism { party, kind: MorphismKind::Composite(parts) })
    }

    /// Site on which the target algebra enters.
    pub fn register(&self) -> Option<SiteId> {
        match &self.kind {
            MorphismKind::Placement { placements, .. } => placements.first().map(|p| p.0),
            MorphismKind::Conjugation { register, .. } => Some(*register),
            MorphismKind::Composite(parts) => parts.first().and_then(|p| p.register()),
        }
    }

    /// Whether every piece is a relabeling, so that the image of the
    /// generators generates the whole image algebra by construction.
    pub fn is_structural(&self) -> bool {
        match &self.kind {
            MorphismKind::Placement { .. } => true,
            MorphismKind::Conjugation { isometry, .. } => isometry.is_relabel_only(),
            MorphismKind::Composite(parts) => parts.iter().all(|p| p.is_structural()),
        }
    }

    pub fn apply(&self, op: &SiteOperator) -> Result<SiteOperator> {
        if let Some(s) = op.support().iter().find(|s| s.party != self.party) {
            return Err(Error::MorphismType(format!(
                "operator touches {} but the morphism acts on party {}",
                s.key(),
                self.party
            )));
        }
        match &self.kind {
            MorphismKind::Placement { placements, shifts } => {
                let mut cur = op.clone();
                let mut spread = Vec::new();
                for (reg, targets) in placements {
                    if let Some(s) = op.support().iter().find(|s| s.key() == reg.key()) {
                        if s.dim != reg.dim {
                            return Err(Error::MorphismType(format!(
                                "register {} has dimension {}, operator uses {}",
                                reg.key(),
                                reg.dim,
                                s.dim
                            )));
                        }
                        spread.push((reg.key(), targets.clone()));
                    }
                }
                // shift catalyst sites first so that targets never collide
                // with sites still waiting to move
                cur = cur
                    .map_sites(|k| shift_key(shifts, k))
                    .map_err(|e| Error::MorphismType(e.to_string()))?;
                for (reg, targets) in spread {
                    let moved = shift_key(shifts, reg);
                    cur = cur
                        .split_site(moved, &targets)
                        .map_err(|e| Error::MorphismType(e.to_string()))?;
                }
                Ok(cur)
            }
            MorphismKind::Conjugation { isometry, register } => {
                if let Some(s) = op
                    .support()
                    .iter()
                    .find(|s| s.role == Role::Output && s.key() != register.key())
                {
                    return Err(Error::MorphismType(format!("unknown output site {}", s.key())));
                }
                isometry.conjugate(op)
            }
            MorphismKind::Composite(parts) => {
                parts.iter().try_fold(op.clone(), |acc, p| p.apply(&acc))
            }
        }
    }
}

fn shift_key(shifts: &[PoolShift], k: SiteKey) -> SiteKey {
    match shifts.iter().find(|s| s.covers(k)) {
        Some(s) => SiteKey { index: (k.index as i64 + s.delta as i64) as u32, ..k },
        None => k,
    }
}

/// Largest violation of `Φ(XY) = Φ(X)Φ(Y)`, `Φ(X†) = Φ(X)†` and
/// `Φ(1) = 1` over all ordered pairs from `ops`, together with the smallest
/// ratio `‖Φ(X)‖ / ‖X‖` (an injectivity witness).
pub fn homomorphism_defect(phi: &AlgebraMorphism, ops: &[SiteOperator]) -> Result<(f64, f64)> {
    let images = ops.iter().map(|x| phi.apply(x)).collect::<Result<Vec<_>>>()?;
    let mut defect: f64 = 0.0;
    let mut ratio = f64::INFINITY;
    for (x, fx) in ops.iter().zip(&images) {
        defect = defect.max(phi.apply(&x.adjoint())?.max_abs_diff(&fx.adjoint())?);
        let nx = x.norm();
        if nx > 0.0 {
            ratio = ratio.min(fx.norm() / nx);
        }
        for (y, fy) in ops.iter().zip(&images) {
            let lhs = phi.apply(&x.mul(y)?)?;
            defect = defect.max(lhs.max_abs_diff(&fx.mul(fy)?)?);
        }
    }
    if let Some(reg) = phi.register() {
        let one = SiteOperator::identity(vec![reg])?;
        let image = phi.apply(&one)?;
        defect = defect.max(image.max_abs_diff(&SiteOperator::identity(image.support().to_vec())?)?);
    }
    Ok((defect, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::generators::generator_basis;

    fn reg(party: Party) -> SiteId {
        SiteId::output(party, 0, 2)
    }

    #[test]
    fn shift_place_moves_register_to_copy_one() {
        let phi = AlgebraMorphism::shift_place(Party::A, 0, reg(Party::A)).unwrap();
        let gens = generator_basis(reg(Party::A)).unwrap();
        let img = phi.apply(&gens[1]).unwrap();
        assert_eq!(img.support(), &[SiteId::catalyst(Party::A, 0, 1, 2)]);
        let again = phi.apply(&img).unwrap();
        assert_eq!(again.support(), &[SiteId::catalyst(Party::A, 0, 2, 2)]);
    }

    #[test]
    fn wrong_party_is_a_type_error() {
        let phi = AlgebraMorphism::shift_place(Party::A, 0, reg(Party::A)).unwrap();
        let gens = generator_basis(reg(Party::B)).unwrap();
        assert!(matches!(phi.apply(&gens[1]), Err(Error::MorphismType(_))));
    }

    #[test]
    fn wrong_register_dimension_is_a_type_error() {
        let phi = AlgebraMorphism::shift_place(Party::A, 0, reg(Party::A)).unwrap();
        let gens = generator_basis(SiteId::output(Party::A, 0, 3)).unwrap();
        assert!(matches!(phi.apply(&gens[1]), Err(Error::MorphismType(_))));
    }

    #[test]
    fn placement_is_a_homomorphism() {
        let phi = AlgebraMorphism::shift_place(Party::A, 0, reg(Party::A)).unwrap();
        let mut ops = generator_basis(reg(Party::A)).unwrap();
        ops.extend(generator_basis(SiteId::catalyst(Party::A, 0, 1, 2)).unwrap());
        let (defect, ratio) = homomorphism_defect(&phi, &ops).unwrap();
        assert_eq!(defect, 0.0);
        assert!(ratio >= 1.0 - 1e-12);
    }

    #[test]
    fn conjugation_by_hotel_shift_matches_placement() {
        let v = crate::protocols::hotel_shift(Party::A, reg(Party::A).key()).unwrap();
        let conj = AlgebraMorphism::conjugation(Party::A, v, reg(Party::A)).unwrap();
        let place = AlgebraMorphism::shift_place(Party::A, 0, reg(Party::A)).unwrap();
        let mut ops = generator_basis(reg(Party::A)).unwrap();
        ops.extend(generator_basis(SiteId::catalyst(Party::A, 0, 3, 2)).unwrap());
        for x in &ops {
            let a = conj.apply(x).unwrap();
            let b = place.apply(x).unwrap();
            assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
        }
    }

    #[test]
    fn register_split_over_two_copies() {
        let big = SiteId::output(Party::A, 0, 4);
        let targets = vec![SiteId::catalyst(Party::A, 0, 1, 2), SiteId::catalyst(Party::A, 0, 2, 2)];
        let phi = AlgebraMorphism::placement(Party::A, vec![(big, targets)]).unwrap();
        let zx = crate::operator::pauli::z().kronecker(&crate::operator::pauli::x());
        let img = phi.apply(&SiteOperator::on_site(big, &zx).unwrap()).unwrap();
        assert_eq!(img.support().len(), 2);
        assert_eq!(img.to_dense(), zx);
    }
}
