//! van Dam-Hayden approximate embezzler: one `m`-level pair with Schmidt
//! coefficients proportional to `1/√j`.

use crate::error::{Error, Result};
use crate::isometry::StructuredIsometry;
use crate::operator::SiteOperator;
use crate::site::{Party, SiteId};
use crate::state::LazyProductState;
use crate::target::TargetState;

use super::{Form, ProtocolBundle};

/// `c_j = 1/√(j H_m)` for `j = 1..=m`, descending.
pub fn vdh_coefficients(m: u32) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Dimension("catalyst dimension must be positive".into()));
    }
    // smallest terms first
    let h: f64 = (1..=m).rev().map(|j| 1.0 / j as f64).sum();
    Ok((1..=m).map(|j| 1.0 / (j as f64 * h).sqrt()).collect())
}

fn catalyst_site(party: Party, m: u32) -> SiteId {
    SiteId::catalyst(party, 0, 0, m)
}

pub fn build_vdh_catalyst(m: u32) -> Result<LazyProductState> {
    let g = TargetState::new(vdh_coefficients(m)?, m)?;
    g.pair_state(catalyst_site(Party::A, m), catalyst_site(Party::B, m))
}

/// Products `c_j x_i` with their flat index `j·n + i`, sorted descending;
/// ties keep index order.
fn ranked_products(c: &[f64], g: &TargetState) -> Vec<(f64, usize)> {
    let n = g.local_dim() as usize;
    let mut prods: Vec<(f64, usize)> = c
        .iter()
        .enumerate()
        .flat_map(|(j, cj)| (0..n).map(move |i| (j, i, *cj)))
        .map(|(j, i, cj)| (cj * g.amplitude(i), j * n + i))
        .collect();
    prods.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    prods
}

/// Best overlap reachable by rearranging Schmidt coefficients: the `k`-th
/// largest catalyst coefficient is matched with the `k`-th largest
/// coefficient of catalyst ⊗ target.
pub fn vdh_embezzle_fidelity(m: u32, g: &TargetState) -> Result<f64> {
    if m < g.local_dim() {
        return Err(Error::Dimension(format!(
            "catalyst dimension {m} is below target dimension {}",
            g.local_dim()
        )));
    }
    let c = vdh_coefficients(m)?;
    let ranked = ranked_products(&c, g);
    Ok(c.iter().zip(&ranked).map(|(a, (p, _))| a * p).sum())
}

/// Standard-form bundle: the same permutation on both sides sends
/// `|j⟩|0⟩` to the `j`-th ranked product basis state.
pub fn vdh_standard_bundle(m: u32, g: &TargetState) -> Result<ProtocolBundle> {
    if m < g.local_dim() {
        return Err(Error::Dimension(format!(
            "catalyst dimension {m} is below target dimension {}",
            g.local_dim()
        )));
    }
    let n = g.local_dim() as usize;
    let c = vdh_coefficients(m)?;
    let ranked = ranked_products(&c, g);
    let dim = m as usize * n;
    let mut image = vec![usize::MAX; dim];
    let mut used = vec![false; dim];
    for (j, (_, target)) in ranked.iter().take(m as usize).enumerate() {
        image[j * n] = *target;
        used[*target] = true;
    }
    let mut free = (0..dim).filter(|t| !used[*t]);
    for (src, slot) in image.iter_mut().enumerate() {
        if src % n != 0 {
            *slot = free.next().expect("counts match");
        }
    }
    let core = |party: Party| -> Result<StructuredIsometry> {
        let support = vec![catalyst_site(party, m), SiteId::output(party, 0, n as u32)];
        let entries = image.iter().enumerate().map(|(c, &r)| (r, c, num_complex::Complex64::new(1.0, 0.0)));
        Ok(StructuredIsometry::core(SiteOperator::from_entries(support, entries)?))
    };
    ProtocolBundle::new(
        Form::Standard,
        core(Party::A)?,
        core(Party::B)?,
        build_vdh_catalyst(m)?,
        g.clone(),
        (SiteId::output(Party::A, 0, n as u32), SiteId::output(Party::B, 0, n as u32)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schmidt::schmidt_spectrum;

    #[test]
    fn small_catalysts() {
        assert_eq!(vdh_coefficients(1).unwrap(), vec![1.0]);
        let c2 = vdh_coefficients(2).unwrap();
        assert!((c2[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((c2[1] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let c4 = vdh_coefficients(4).unwrap();
        for (j, cj) in c4.iter().enumerate() {
            let expect = (12.0 / 25.0) / (j as f64 + 1.0);
            assert!((cj * cj - expect).abs() < 1e-15);
        }
        let sp = schmidt_spectrum(&build_vdh_catalyst(4).unwrap());
        assert!(sp.max_deviation(&crate::SchmidtSpectrum::new(c4, "A|B")) < 1e-15);
    }

    #[test]
    fn separable_target_is_free() {
        let g = TargetState::product(2);
        for m in [2, 5, 64] {
            assert!((vdh_embezzle_fidelity(m, &g).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_at_1024_beats_bound() {
        let f = vdh_embezzle_fidelity(1024, &TargetState::bell()).unwrap();
        assert!(f >= 0.9);
        assert!(f >= 1.0 - 1.0 / 10.0);
    }

    #[test]
    fn too_small_catalyst_is_rejected() {
        let g = TargetState::new(vec![0.6, 0.8], 2).unwrap();
        assert!(matches!(vdh_embezzle_fidelity(1, &g), Err(Error::Dimension(_))));
    }

    #[test]
    fn bundle_reaches_the_ranked_overlap() {
        let g = TargetState::bell();
        for m in [2, 4, 16] {
            let p = vdh_standard_bundle(m, &g).unwrap();
            let simulated = p.output_fidelity().unwrap();
            let ranked = vdh_embezzle_fidelity(m, &g).unwrap();
            assert!((simulated - ranked).abs() < 1e-12, "m={m}: {simulated} vs {ranked}");
        }
    }
}
