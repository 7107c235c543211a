//! Sparse vectors in an infinite tensor product with reference vector `|0⟩`.
//!
//! A [`LazyProductState`] stores amplitudes over finitely many explicit
//! sites; every other site carries label 0. Optionally a [`Reservoir`]
//! declares that a whole catalyst pool tail holds infinitely many copies of a
//! two-site pair state instead. Copies are materialized from the reservoir on
//! demand, so the representation stays exact while pool shifts move
//! infinitely many copies at once.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::SiteOperator;
use crate::relabel::Relabeling;
use crate::site::{flatten, total_dim, unflatten, Party, Role, SiteId, SiteKey};
use crate::target::TargetState;
use crate::{PRUNE_TOL, TOL};

/// Infinitely many copies of `pair` on catalyst pool `pool`: copy `j ≥ 0`
/// sits on `(A, pool, next_a + j)` and `(B, pool, next_b + j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub pool: u32,
    pub next_a: u32,
    pub next_b: u32,
    pub pair: TargetState,
}

impl Reservoir {
    pub fn role(&self) -> Role {
        Role::Catalyst(self.pool)
    }

    pub fn next(&self, party: Party) -> u32 {
        match party {
            Party::A => self.next_a,
            Party::B => self.next_b,
        }
    }

    pub fn contains(&self, key: SiteKey) -> bool {
        key.role == self.role() && key.index >= self.next(key.party)
    }

    fn offset(&self) -> i64 {
        self.next_a as i64 - self.next_b as i64
    }

    /// Both describe the same infinite tail up to how far it was materialized.
    pub fn equivalent(&self, other: &Reservoir) -> bool {
        self.pool == other.pool && self.pair == other.pair && self.offset() == other.offset()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRepr", try_from = "StateRepr")]
pub struct LazyProductState {
    sites: Vec<SiteId>,
    amps: BTreeMap<Vec<u32>, Complex64>,
    reservoir: Option<Reservoir>,
}

/// Canonical serialized form: site list, then `[labels, [re, im]]` pairs in
/// key order.
#[derive(Serialize, Deserialize)]
struct StateRepr {
    sites: Vec<SiteId>,
    amplitudes: Vec<(Vec<u32>, [f64; 2])>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reservoir: Option<Reservoir>,
}

impl From<LazyProductState> for StateRepr {
    fn from(s: LazyProductState) -> Self {
        StateRepr {
            amplitudes: s.amps.into_iter().map(|(k, v)| (k, [v.re, v.im])).collect(),
            sites: s.sites,
            reservoir: s.reservoir,
        }
    }
}

impl TryFrom<StateRepr> for LazyProductState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        let terms = r.amplitudes.into_iter().map(|(k, [re, im])| (k, Complex64::new(re, im)));
        let s = LazyProductState::from_terms(r.sites, terms)?;
        match r.reservoir {
            Some(res) => s.with_reservoir(res),
            None => Ok(s),
        }
    }
}

impl LazyProductState {
    /// The all-`|0⟩` vector.
    pub fn vacuum() -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(Vec::new(), Complex64::new(1.0, 0.0));
        LazyProductState { sites: Vec::new(), amps, reservoir: None }
    }

    /// Builds from `(labels, amplitude)` terms, labels given in the order of
    /// `sites`. Repeated keys add up; the result is not renormalized.
    pub fn from_terms(
        sites: Vec<SiteId>,
        terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &sites {
            if !seen.insert(s.key()) {
                return Err(Error::SiteCollision(s.key()));
            }
            if s.dim == 0 {
                return Err(Error::Dimension(format!("site {} has dimension 0", s.key())));
            }
        }
        let mut order: Vec<usize> = (0..sites.len()).collect();
        order.sort_by_key(|&i| sites[i].key());
        let sorted: Vec<SiteId> = order.iter().map(|&i| sites[i]).collect();
        let mut amps: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (labels, amp) in terms {
            if labels.len() != sites.len() {
                return Err(Error::InvalidState(format!(
                    "key has {} labels for {} sites",
                    labels.len(),
                    sites.len()
                )));
            }
            if let Some((s, l)) = sites.iter().zip(&labels).find(|(s, l)| **l >= s.dim) {
                return Err(Error::InvalidState(format!("label {l} out of range on {s}")));
            }
            let key: Vec<u32> = order.iter().map(|&i| labels[i]).collect();
            *amps.entry(key).or_insert_with(Complex64::zero) += amp;
        }
        amps.retain(|_, v| v.norm() > PRUNE_TOL);
        Ok(LazyProductState { sites: sorted, amps, reservoir: None })
    }

    /// A single computational basis vector.
    pub fn basis(sites: Vec<SiteId>, labels: Vec<u32>) -> Result<Self> {
        LazyProductState::from_terms(sites, [(labels, Complex64::new(1.0, 0.0))])
    }

    /// Attaches a reservoir tail. A product pair is the reference tail and is
    /// dropped.
    pub fn with_reservoir(mut self, res: Reservoir) -> Result<Self> {
        if !res.pair.is_entangled() && res.pair.amplitude(0) == 1.0 {
            return Ok(self);
        }
        if self.reservoir.is_some() {
            return Err(Error::InvalidState("state already carries a reservoir".into()));
        }
        if let Some(s) = self.sites.iter().find(|s| res.contains(s.key())) {
            return Err(Error::SiteCollision(s.key()));
        }
        for p in [Party::A, Party::B] {
            let k = SiteKey::new(p, res.role(), res.next(p));
            if let Some(s) = self.sites.iter().find(|s| s.key().party == p && s.key().role == res.role()) {
                if s.dim != res.pair.local_dim() {
                    return Err(Error::DimensionMismatch { site: k, expected: res.pair.local_dim(), found: s.dim });
                }
            }
        }
        self.reservoir = Some(res);
        Ok(self)
    }

    pub fn sites(&self) -> &[SiteId] {
        &self.sites
    }

    pub fn site(&self, key: SiteKey) -> Option<SiteId> {
        self.position(key).map(|i| self.sites[i])
    }

    fn position(&self, key: SiteKey) -> Option<usize> {
        self.sites.binary_search_by(|s| s.key().cmp(&key)).ok()
    }

    pub fn reservoir(&self) -> Option<&Reservoir> {
        self.reservoir.as_ref()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (&[u32], Complex64)> {
        self.amps.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    /// Amplitude of a key given in canonical site order.
    pub fn amplitude(&self, labels: &[u32]) -> Complex64 {
        self.amps.get(labels).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn nnz(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_nan() || n <= PRUNE_TOL {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.amps.values_mut() {
            *v *= c;
        }
        out.amps.retain(|_, v| v.norm() > PRUNE_TOL);
        out
    }

    /// Whether `key` currently lies in the reservoir region.
    pub fn in_reservoir(&self, key: SiteKey) -> bool {
        self.reservoir.as_ref().is_some_and(|r| r.contains(key))
    }

    /// Inserts fresh sites carrying label 0. Sites already explicit are
    /// checked for dimension; reservoir sites are materialized from the pair.
    pub fn materialize(&self, sites: &[SiteId]) -> Result<Self> {
        let mut out = Cow::Borrowed(self);
        if let Some(res) = &self.reservoir {
            let mut need = 0u32;
            for s in sites {
                if res.contains(s.key()) {
                    need = need.max(s.index - res.next(s.party) + 1);
                }
            }
            if need > 0 {
                out = Cow::Owned(self.materialize_pairs(need)?);
            }
        }
        let mut fresh = Vec::new();
        for s in sites {
            match out.site(s.key()) {
                Some(e) if e.dim != s.dim => {
                    return Err(Error::DimensionMismatch { site: s.key(), expected: e.dim, found: s.dim })
                }
                Some(_) => {}
                None => {
                    if !fresh.contains(s) {
                        fresh.push(*s);
                    }
                }
            }
        }
        if fresh.is_empty() {
            return Ok(out.into_owned());
        }
        let zeros = LazyProductState::basis(fresh.clone(), vec![0; fresh.len()])?;
        let mut joined = tensor_explicit(&out, &zeros);
        joined.reservoir = out.reservoir.clone();
        Ok(joined)
    }

    /// Moves `count` copies out of the reservoir into explicit sites.
    pub fn materialize_pairs(&self, count: u32) -> Result<Self> {
        let Some(res) = &self.reservoir else {
            return Ok(self.clone());
        };
        let mut out = self.clone();
        let d = res.pair.local_dim();
        for j in 0..count {
            let a = SiteId::catalyst(Party::A, res.pool, res.next_a + j, d);
            let b = SiteId::catalyst(Party::B, res.pool, res.next_b + j, d);
            let pair = res.pair.pair_state(a, b)?;
            out = tensor_explicit(&out, &pair);
        }
        let mut res = res.clone();
        res.next_a += count;
        res.next_b += count;
        out.reservoir = Some(res);
        Ok(out)
    }

    /// Brings two states onto the same explicit site list. Returns `None`
    /// when their reservoirs describe orthogonal infinite tails.
    fn aligned<'a>(a: &'a Self, b: &'a Self) -> Result<Option<(Cow<'a, Self>, Cow<'a, Self>)>> {
        let (mut a, mut b) = (Cow::Borrowed(a), Cow::Borrowed(b));
        match (&a.reservoir, &b.reservoir) {
            (None, None) => {}
            (Some(ra), Some(rb)) if ra.equivalent(rb) => {
                if ra.next_a < rb.next_a {
                    a = Cow::Owned(a.materialize_pairs(rb.next_a - ra.next_a)?);
                } else if rb.next_a < ra.next_a {
                    b = Cow::Owned(b.materialize_pairs(ra.next_a - rb.next_a)?);
                }
            }
            _ => return Ok(None),
        }
        if a.sites.len() != b.sites.len() || a.sites.iter().zip(&b.sites).any(|(x, y)| x.key() != y.key()) {
            let a2 = a.materialize(&b.sites)?;
            let b2 = b.materialize(&a.sites)?;
            a = Cow::Owned(a2);
            b = Cow::Owned(b2);
        }
        for (x, y) in a.sites.iter().zip(&b.sites) {
            if x.dim != y.dim {
                return Err(Error::DimensionMismatch { site: x.key(), expected: x.dim, found: y.dim });
            }
        }
        Ok(Some((a, b)))
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        let Some((a, b)) = LazyProductState::aligned(self, other)? else {
            return Ok(Complex64::zero());
        };
        let (small, large, flip) =
            if a.amps.len() <= b.amps.len() { (&a, &b, false) } else { (&b, &a, true) };
        let mut acc = Complex64::zero();
        for (k, v) in &small.amps {
            if let Some(w) = large.amps.get(k) {
                acc += if flip { w.conj() * v } else { v.conj() * w };
            }
        }
        Ok(acc)
    }

    /// `‖self − other‖`, computed entrywise to keep full precision near zero.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        let Some((a, b)) = LazyProductState::aligned(self, other)? else {
            return Ok((self.norm_sqr() + other.norm_sqr()).sqrt());
        };
        let mut acc = 0.0;
        for (k, v) in &a.amps {
            let w = b.amps.get(k).copied().unwrap_or_else(Complex64::zero);
            acc += (v - w).norm_sqr();
        }
        for (k, w) in &b.amps {
            if !a.amps.contains_key(k) {
                acc += w.norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// `(op ⊗ 1)|self⟩`, without renormalization.
    pub fn apply_operator(&self, op: &SiteOperator) -> Result<Self> {
        let s = self.materialize(op.support())?;
        let pos: Vec<usize> = op
            .support()
            .iter()
            .map(|t| s.position(t.key()).expect("materialized"))
            .collect();
        let dims: Vec<u32> = op.support().iter().map(|t| t.dim).collect();
        let mut amps: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (key, &amp) in &s.amps {
            let c = flatten(pos.iter().map(|&p| key[p]), &dims);
            for &(r, v) in op.column(c) {
                let mut out = key.clone();
                for (&p, l) in pos.iter().zip(unflatten(r as usize, &dims)) {
                    out[p] = l;
                }
                *amps.entry(out).or_insert_with(Complex64::zero) += v * amp;
            }
        }
        amps.retain(|_, v| v.norm() > PRUNE_TOL);
        Ok(LazyProductState { sites: s.sites, amps, reservoir: s.reservoir })
    }

    /// `⟨self| op |self⟩`.
    pub fn expectation(&self, op: &SiteOperator) -> Result<Complex64> {
        self.inner_product(&self.apply_operator(op)?)
    }

    /// Applies a site relabeling in the Schrödinger picture.
    ///
    /// An explicit site whose image is claimed by another site lies outside
    /// the relabeling's domain; it is absorbed into the tail when it carries
    /// label 0 throughout, otherwise the state is rejected.
    pub fn permute(&self, relabel: &Relabeling) -> Result<Self> {
        if relabel.is_identity() {
            return Ok(self.clone());
        }
        let mut s = Cow::Borrowed(self);
        if let Some(res) = &self.reservoir {
            let role = res.role();
            let critical = |party: Party| {
                let mut c = relabel.shift_for(party, role).map_or(0, |sh| sh.start);
                for k in relabel.named_sites().filter(|k| k.party == party && k.role == role) {
                    c = c.max(k.index + 1);
                }
                c
            };
            let need = critical(Party::A)
                .saturating_sub(res.next_a)
                .max(critical(Party::B).saturating_sub(res.next_b));
            if need > 0 {
                s = Cow::Owned(self.materialize_pairs(need)?);
            }
        }
        let mut keep = Vec::new();
        let mut drop = Vec::new();
        for (i, site) in s.sites.iter().enumerate() {
            let to = relabel.map_key(site.key());
            if relabel.preimage(to) == Some(site.key()) {
                keep.push((i, to.with_dim(site.dim)));
            } else if s.amps.keys().all(|k| k[i] == 0) {
                drop.push(i);
            } else {
                return Err(Error::DomainViolation(format!(
                    "site {} is overwritten by the relabeling but is not in |0⟩",
                    site.key()
                )));
            }
        }
        let mut order: Vec<usize> = (0..keep.len()).collect();
        order.sort_by_key(|&j| keep[j].1.key());
        let sites: Vec<SiteId> = order.iter().map(|&j| keep[j].1).collect();
        let mut amps = BTreeMap::new();
        for (k, v) in &s.amps {
            let key: Vec<u32> = order.iter().map(|&j| k[keep[j].0]).collect();
            *amps.entry(key).or_insert_with(Complex64::zero) += v;
        }
        let reservoir = s.reservoir.clone().map(|mut res| {
            let role = res.role();
            if let Some(sh) = relabel.shift_for(Party::A, role) {
                res.next_a = (res.next_a as i64 + sh.delta as i64) as u32;
            }
            if let Some(sh) = relabel.shift_for(Party::B, role) {
                res.next_b = (res.next_b as i64 + sh.delta as i64) as u32;
            }
            res
        });
        if let Some(res) = &reservoir {
            if let Some(site) = sites.iter().find(|t| res.contains(t.key())) {
                return Err(Error::SiteCollision(site.key()));
            }
        }
        Ok(LazyProductState { sites, amps, reservoir })
    }

    /// Factors `self = left ⊗ right` where `left` lives on `keys`. `left` is
    /// normalized; norm and global phase go to `right`.
    pub fn split_product(&self, keys: &[SiteKey]) -> Result<(Self, Self)> {
        let idx: Vec<usize> = keys
            .iter()
            .map(|k| self.position(*k).ok_or(Error::NotProduct))
            .collect::<Result<_>>()?;
        let rest: Vec<usize> = (0..self.sites.len()).filter(|i| !idx.contains(i)).collect();
        let part = |k: &[u32], ix: &[usize]| ix.iter().map(|&i| k[i]).collect::<Vec<u32>>();
        let (pivot_key, pivot) = self
            .amps
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, v)| (k.clone(), *v))
            .ok_or(Error::NotProduct)?;
        let (pl, pr) = (part(&pivot_key, &idx), part(&pivot_key, &rest));
        let mut left: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        let mut right: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (k, v) in &self.amps {
            let (l, r) = (part(k, &idx), part(k, &rest));
            if r == pr {
                left.insert(l.clone(), *v);
            }
            if l == pl {
                right.insert(r, *v / pivot);
            }
        }
        if left.len() * right.len() != self.amps.len() {
            return Err(Error::NotProduct);
        }
        let scale = pivot.norm().max(1.0);
        for (k, v) in &self.amps {
            let (l, r) = (part(k, &idx), part(k, &rest));
            let predicted = left.get(&l).zip(right.get(&r)).map(|(a, b)| a * b);
            match predicted {
                Some(p) if (p - v).norm() <= TOL * scale => {}
                _ => return Err(Error::NotProduct),
            }
        }
        let ln = left.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let lsites: Vec<SiteId> = idx.iter().map(|&i| self.sites[i]).collect();
        let rsites: Vec<SiteId> = rest.iter().map(|&i| self.sites[i]).collect();
        let l = LazyProductState {
            sites: lsites,
            amps: left.into_iter().map(|(k, v)| (k, v / ln)).collect(),
            reservoir: None,
        };
        let r = LazyProductState {
            sites: rsites,
            amps: right.into_iter().map(|(k, v)| (k, v * ln)).collect(),
            reservoir: self.reservoir.clone(),
        };
        Ok((l, r))
    }

    /// Total dimension of the explicit sites.
    pub fn explicit_dim(&self) -> usize {
        total_dim(&self.sites)
    }

    /// Sites of one party, in canonical order.
    pub fn party_sites(&self, party: Party) -> impl Iterator<Item = &SiteId> {
        self.sites.iter().filter(move |s| s.party == party)
    }
}

/// Tensor product on disjoint explicit site sets; reservoirs are ignored.
fn tensor_explicit(a: &LazyProductState, b: &LazyProductState) -> LazyProductState {
    // merge plan: for each output slot, (from_a, index)
    let mut plan = Vec::with_capacity(a.sites.len() + b.sites.len());
    let (mut i, mut j) = (0, 0);
    while i < a.sites.len() || j < b.sites.len() {
        let take_a = j >= b.sites.len() || (i < a.sites.len() && a.sites[i].key() < b.sites[j].key());
        if take_a {
            plan.push((true, i));
            i += 1;
        } else {
            plan.push((false, j));
            j += 1;
        }
    }
    let sites = plan
        .iter()
        .map(|&(fa, k)| if fa { a.sites[k] } else { b.sites[k] })
        .collect();
    let mut amps = BTreeMap::new();
    for (ka, va) in &a.amps {
        for (kb, vb) in &b.amps {
            let key = plan.iter().map(|&(fa, k)| if fa { ka[k] } else { kb[k] }).collect();
            let v = va * vb;
            if v.norm() > PRUNE_TOL {
                amps.insert(key, v);
            }
        }
    }
    LazyProductState { sites, amps, reservoir: None }
}

/// `s1 ⊗ s2` on disjoint site sets.
pub fn tensor_states(s1: &LazyProductState, s2: &LazyProductState) -> Result<LazyProductState> {
    if let Some(s) = s1.sites.iter().find(|s| s2.site(s.key()).is_some()) {
        return Err(Error::SiteCollision(s.key()));
    }
    let reservoir = match (&s1.reservoir, &s2.reservoir) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidState("both factors carry a reservoir tail".into()))
        }
        (Some(r), None) => {
            if let Some(s) = s2.sites.iter().find(|s| r.contains(s.key())) {
                return Err(Error::SiteCollision(s.key()));
            }
            Some(r.clone())
        }
        (None, Some(r)) => {
            if let Some(s) = s1.sites.iter().find(|s| r.contains(s.key())) {
                return Err(Error::SiteCollision(s.key()));
            }
            Some(r.clone())
        }
        (None, None) => None,
    };
    let mut out = tensor_explicit(s1, s2);
    out.reservoir = reservoir;
    Ok(out)
}
