//! Composite catalysts holding copies of several targets at once, for
//! families of targets with rational Schmidt coefficients.
//!
//! Member `i`, copy `n ≥ 1` lives on sites `(X, cat i, n)`. The interleaved
//! layout swaps pool and index, `(X, cat n, i)`.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::certify::{
    certify_levels, check_joint_structure, check_mutual_commutativity, hotel_morphisms, lift_levels,
    CertificationReport, BASIS_NAME,
};
use crate::error::{Error, Result};
use crate::par;
use crate::relabel::Relabeling;
use crate::site::{Party, Role, SiteKey};
use crate::state::{tensor_states, LazyProductState};
use crate::target::TargetState;

/// Default cap on the number of nonzero amplitudes of a composite catalyst.
pub const DEFAULT_AMPLITUDE_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub target: TargetState,
    /// Exact coefficients when the member is rational.
    pub exact: Option<Vec<Ratio<i64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalSchmidtFamily {
    pub members: Vec<FamilyMember>,
    pub max_dim: u32,
    pub max_denominator: i64,
}

impl RationalSchmidtFamily {
    /// Members with exact rational coefficients, checked exactly.
    pub fn from_rationals(vectors: &[Vec<Ratio<i64>>]) -> Result<Self> {
        let members = vectors
            .iter()
            .map(|v| {
                Ok(FamilyMember { target: TargetState::from_rationals(v)?, exact: Some(v.clone()) })
            })
            .collect::<Result<Vec<_>>>()?;
        RationalSchmidtFamily::from_members(members)
    }

    /// Arbitrary members, e.g. a Bell pair next to rational targets. Members
    /// must differ as sorted spectra.
    pub fn from_members(members: Vec<FamilyMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidTarget("empty family".into()));
        }
        for (i, a) in members.iter().enumerate() {
            for b in &members[..i] {
                let (sa, sb) = (a.target.spectrum(), b.target.spectrum());
                if sa.coefficients.len() == sb.coefficients.len() && sa.max_deviation(&sb) <= crate::TOL {
                    return Err(Error::InvalidTarget(format!("duplicate member {}", a.target)));
                }
            }
        }
        let max_dim = members.iter().map(|m| m.target.local_dim()).max().unwrap_or(0);
        let max_denominator = members
            .iter()
            .filter_map(|m| m.exact.as_ref())
            .flat_map(|v| v.iter().map(|r| *r.denom()))
            .max()
            .unwrap_or(0);
        Ok(RationalSchmidtFamily { members, max_dim, max_denominator })
    }

    pub fn targets(&self) -> Vec<TargetState> {
        self.members.iter().map(|m| m.target.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// All descending tuples `a_1 ≥ … ≥ a_d ≥ 1` with `Σ a_i² = c²`.
fn tuples(d: usize, c: i64) -> Vec<Vec<i64>> {
    fn go(left: usize, rem: i64, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if left == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // the remaining `left` entries are each ≥ 1 and ≤ a
        let mut a = cap.min((rem as f64).sqrt() as i64 + 1);
        while a >= 1 {
            let r = rem - a * a;
            if r >= left as i64 - 1 && r <= (left as i64 - 1) * a * a {
                cur.push(a);
                go(left - 1, r, a, cur, out);
                cur.pop();
            }
            a -= 1;
        }
    }
    let mut out = Vec::new();
    go(d, c * c, c, &mut Vec::new(), &mut out);
    out
}

/// Every normalized vector of positive rationals with `2 ≤ dim ≤ max_dim`
/// and common denominator at most `max_denominator`, coefficients in
/// descending order, reduced so that each spectrum appears once. Ordered by
/// dimension, then lexicographically by coefficients.
pub fn enumerate_rational_family(max_dim: u32, max_denominator: i64) -> Result<RationalSchmidtFamily> {
    if max_dim < 2 || max_denominator < 2 {
        return Err(Error::InvalidTarget("bounds must be at least 2".into()));
    }
    let mut found: BTreeSet<(usize, Vec<Ratio<i64>>)> = BTreeSet::new();
    for d in 2..=max_dim as usize {
        for c in 1..=max_denominator {
            for t in tuples(d, c) {
                let g = t.iter().fold(c, |acc, a| acc.gcd(a));
                if g != 1 {
                    continue;
                }
                found.insert((d, t.iter().map(|&a| Ratio::new(a, c)).collect()));
            }
        }
    }
    let members = found
        .into_iter()
        .map(|(_, v)| Ok(FamilyMember { target: TargetState::from_rationals(&v)?, exact: Some(v) }))
        .collect::<Result<Vec<_>>>()?;
    if members.is_empty() {
        return Ok(RationalSchmidtFamily { members, max_dim, max_denominator });
    }
    let mut fam = RationalSchmidtFamily::from_members(members)?;
    fam.max_dim = max_dim;
    fam.max_denominator = max_denominator;
    Ok(fam)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeCatalyst {
    pub family: RationalSchmidtFamily,
    pub copies: u32,
    pub state: LazyProductState,
    pub interleaved: bool,
}

fn member_state(targets: &[TargetState], copies: u32) -> Result<LazyProductState> {
    let mut state = LazyProductState::vacuum();
    for (i, g) in targets.iter().enumerate() {
        let n = g.local_dim();
        for k in 1..=copies {
            let a = crate::SiteId::catalyst(Party::A, i as u32, k, n);
            let b = crate::SiteId::catalyst(Party::B, i as u32, k, n);
            state = tensor_states(&state, &g.pair_state(a, b)?)?;
        }
    }
    Ok(state)
}

/// Predicted amplitude count `Π_i r_i^copies`, `r_i` the Schmidt rank.
pub fn predicted_amplitudes(targets: &[TargetState], copies: u32) -> u128 {
    targets.iter().fold(1u128, |acc, g| {
        let r = g.spectrum().coefficients.len() as u128;
        acc.saturating_mul(r.saturating_pow(copies))
    })
}

/// `⊗_i g_i^{⊗copies}` on member-major sites.
pub fn build_composite_catalyst(
    family: &RationalSchmidtFamily,
    copies: u32,
    budget: usize,
) -> Result<CompositeCatalyst> {
    if copies == 0 || family.is_empty() {
        return Err(Error::CatalystShape("need at least one member and one copy".into()));
    }
    let targets = family.targets();
    let required = predicted_amplitudes(&targets, copies);
    if required > budget as u128 {
        return Err(Error::SizeBudgetExceeded { required, budget });
    }
    Ok(CompositeCatalyst {
        family: family.clone(),
        copies,
        state: member_state(&targets, copies)?,
        interleaved: false,
    })
}

impl CompositeCatalyst {
    /// A catalyst whose state was built from `actual` targets while the
    /// family claims its own members; used to probe failure isolation.
    pub fn from_parts(family: RationalSchmidtFamily, copies: u32, actual: &[TargetState]) -> Result<Self> {
        if actual.len() != family.len() {
            return Err(Error::CatalystShape("one state per member is required".into()));
        }
        Ok(CompositeCatalyst { state: member_state(actual, copies)?, family, copies, interleaved: false })
    }

    /// Per-party relabelings `(X, cat p, q) ↦ (X, cat q, p)` over the explicit
    /// sites; the composition of both is the interleaving map.
    pub fn interleave_relabelings(&self) -> Result<(Relabeling, Relabeling)> {
        let make = |party: Party| {
            let moves = self
                .state
                .sites()
                .iter()
                .filter(|s| s.party == party)
                .filter_map(|s| match s.role {
                    Role::Catalyst(p) => Some((s.key(), SiteKey::new(party, Role::Catalyst(s.index), p))),
                    _ => None,
                })
                .collect::<Vec<_>>();
            Relabeling::new(moves, Vec::new(), false)
        };
        Ok((make(Party::A)?, make(Party::B)?))
    }

    /// Swaps member and copy coordinates; applying it twice restores the
    /// original layout.
    pub fn interleave_reindex(&self) -> Result<CompositeCatalyst> {
        let (ra, rb) = self.interleave_relabelings()?;
        let state = self.state.permute(&ra)?.permute(&rb)?;
        Ok(CompositeCatalyst { state, interleaved: !self.interleaved, ..self.clone() })
    }

    fn member_major(&self) -> Result<LazyProductState> {
        if self.interleaved {
            Ok(self.interleave_reindex()?.state)
        } else {
            Ok(self.state.clone())
        }
    }
}

/// One report per member (levels `1..=depth` on that member's pool), and a
/// final cross-member report: commutators between families of different
/// members at all levels, and joint-expectation factorization for every
/// pair of members at every level.
pub fn check_simultaneous_containment(
    c: &CompositeCatalyst,
    depth: u32,
    tolerance: f64,
) -> Result<Vec<CertificationReport>> {
    if depth == 0 || depth > c.copies {
        return Err(Error::CatalystShape(format!("depth {depth} outside 1..={}", c.copies)));
    }
    let f = c.member_major()?;
    let targets = c.family.targets();
    let morphisms = targets
        .iter()
        .enumerate()
        .map(|(i, g)| hotel_morphisms(i as u32, g.local_dim()))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = par::try_map_range(targets.len(), |i| {
        let (pa, pb) = &morphisms[i];
        certify_levels(format!("member {i}: {}", targets[i]), &f, pa, pb, &targets[i], depth, tolerance)
    })?;
    let families = targets
        .iter()
        .zip(&morphisms)
        .map(|(g, (pa, pb))| lift_levels(pa, pb, g, depth))
        .collect::<Result<Vec<_>>>()?;
    let mut commutators = vec![0.0f64; depth as usize];
    let mut joint = vec![0.0f64; depth as usize];
    for level in 0..depth as usize {
        for i in 0..targets.len() {
            for j in i + 1..targets.len() {
                for other in 0..=level {
                    let pair = [families[i][level].clone(), families[j][other].clone()];
                    let swapped = [families[i][other].clone(), families[j][level].clone()];
                    commutators[level] = commutators[level]
                        .max(check_mutual_commutativity(&pair)?)
                        .max(check_mutual_commutativity(&swapped)?);
                }
                let dev = check_joint_structure(
                    &f,
                    (&families[i][level], &targets[i]),
                    (&families[j][level], &targets[j]),
                )?;
                joint[level] = joint[level].max(dev);
            }
        }
    }
    let dims: Vec<String> = targets.iter().map(|g| g.local_dim().to_string()).collect();
    reports.push(CertificationReport::finish(
        "cross-member",
        (1..=depth).collect(),
        commutators,
        joint,
        format!("{BASIS_NAME}({})", dims.join(",")),
        "structural",
        tolerance,
    ));
    Ok(reports)
}

/// Member × level matrix of expectation deviations, one row per member
/// report; the cross-member report is skipped.
pub fn deviation_csv(reports: &[CertificationReport]) -> String {
    let members: Vec<&CertificationReport> = reports.iter().filter(|r| r.label != "cross-member").collect();
    let depth = members.iter().map(|r| r.levels.len()).max().unwrap_or(0);
    let mut out = String::from("member");
    for l in 1..=depth {
        out.push_str(&format!(",level_{l}"));
    }
    out.push('\n');
    for (i, r) in members.iter().enumerate() {
        out.push_str(&i.to_string());
        for d in &r.expectation_dev_by_level {
            out.push_str(&format!(",{d:e}"));
        }
        out.push('\n');
    }
    out
}
