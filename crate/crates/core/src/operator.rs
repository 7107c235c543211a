//! Operators with finite support on named sites, identity elsewhere.
//!
//! Matrices are stored column-compressed over the product basis of the
//! support, with the support kept in canonical [`SiteId`] order and the
//! multi-index flattened row-major (first support site is most significant).

use std::collections::BTreeSet;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relabel::Relabeling;
use crate::site::{flatten, total_dim, unflatten, Party, SiteId, SiteKey};
use crate::{PRUNE_TOL, TOL};

/// Largest support dimension we are willing to densify.
pub const MAX_OPERATOR_DIM: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorKind {
    pub hermitian: bool,
    pub unitary: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "OperatorRepr", try_from = "OperatorRepr")]
pub struct SiteOperator {
    support: Vec<SiteId>,
    dims: Vec<u32>,
    cols: Vec<Vec<(u32, Complex64)>>,
    kind: OnceLock<OperatorKind>,
}

/// Serialized form: support, then `[row, col, [re, im]]` in column order.
#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    support: Vec<SiteId>,
    entries: Vec<(u32, u32, [f64; 2])>,
}

impl From<SiteOperator> for OperatorRepr {
    fn from(op: SiteOperator) -> Self {
        let entries = op
            .entries()
            .map(|(r, c, v)| (r as u32, c as u32, [v.re, v.im]))
            .collect();
        OperatorRepr { support: op.support, entries }
    }
}

impl TryFrom<OperatorRepr> for SiteOperator {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let entries = r
            .entries
            .into_iter()
            .map(|(row, col, [re, im])| (row as usize, col as usize, Complex64::new(re, im)));
        SiteOperator::from_entries(r.support, entries)
    }
}

impl PartialEq for SiteOperator {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && self.dims == other.dims && self.cols == other.cols
    }
}

impl SiteOperator {
    fn check_support(support: &[SiteId]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in support {
            if !seen.insert(s.key()) {
                return Err(Error::SiteCollision(s.key()));
            }
            if s.dim == 0 {
                return Err(Error::Dimension(format!("site {} has dimension 0", s.key())));
            }
        }
        if total_dim(support) > MAX_OPERATOR_DIM {
            return Err(Error::Dimension(format!(
                "operator support dimension {} exceeds {MAX_OPERATOR_DIM}",
                total_dim(support)
            )));
        }
        Ok(())
    }

    /// Builds from `(row, col, value)` triples over the product basis of
    /// `support` in the order given; the support is then canonicalized.
    pub fn from_entries(
        support: Vec<SiteId>,
        entries: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self> {
        Self::check_support(&support)?;
        let dim = total_dim(&support);
        let mut cols: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); dim];
        for (r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(Error::Dimension(format!("entry ({r},{c}) outside {dim}x{dim}")));
            }
            if v.norm() > PRUNE_TOL {
                cols[c].push((r as u32, v));
            }
        }
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
            merge_duplicates(col);
        }
        let dims = support.iter().map(|s| s.dim).collect();
        Ok(SiteOperator::raw(support, dims, cols).canonicalized())
    }

    pub fn from_dense(support: Vec<SiteId>, matrix: &DMatrix<Complex64>) -> Result<Self> {
        let dim = total_dim(&support);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, support needs {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let entries = (0..dim)
            .flat_map(|c| (0..dim).map(move |r| (r, c)))
            .map(|(r, c)| (r, c, matrix[(r, c)]));
        SiteOperator::from_entries(support, entries)
    }

    pub fn on_site(site: SiteId, matrix: &DMatrix<Complex64>) -> Result<Self> {
        SiteOperator::from_dense(vec![site], matrix)
    }

    pub fn identity(support: Vec<SiteId>) -> Result<Self> {
        let dim = total_dim(&support);
        SiteOperator::from_entries(support, (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    /// The scalar `c` times identity, with empty support.
    pub fn scalar(c: Complex64) -> Self {
        let cols = if c.norm() > PRUNE_TOL { vec![vec![(0, c)]] } else { vec![Vec::new()] };
        SiteOperator::raw(Vec::new(), Vec::new(), cols)
    }

    fn raw(support: Vec<SiteId>, dims: Vec<u32>, cols: Vec<Vec<(u32, Complex64)>>) -> Self {
        SiteOperator { support, dims, cols, kind: OnceLock::new() }
    }

    fn canonicalized(self) -> Self {
        let mut order: Vec<usize> = (0..self.support.len()).collect();
        order.sort_by_key(|&i| self.support[i].key());
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return self;
        }
        let new_support: Vec<SiteId> = order.iter().map(|&i| self.support[i]).collect();
        let new_dims: Vec<u32> = order.iter().map(|&i| self.dims[i]).collect();
        let remap = |flat: usize| -> usize {
            let labels = unflatten(flat, &self.dims);
            flatten(order.iter().map(|&i| labels[i]), &new_dims)
        };
        let dim = self.cols.len();
        let mut cols = vec![Vec::new(); dim];
        for (c, col) in self.cols.into_iter().enumerate() {
            let mut mapped: Vec<(u32, Complex64)> =
                col.into_iter().map(|(r, v)| (remap(r as usize) as u32, v)).collect();
            mapped.sort_by_key(|e| e.0);
            cols[remap(c)] = mapped;
        }
        SiteOperator::raw(new_support, new_dims, cols)
    }

    pub fn support(&self) -> &[SiteId] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Nonzeros of column `c` as `(row, value)`.
    pub fn column(&self, c: usize) -> &[(u32, Complex64)] {
        &self.cols[c]
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.cols[c]
            .binary_search_by_key(&(r as u32), |e| e.0)
            .map(|i| self.cols[c][i].1)
            .unwrap_or_else(|_| Complex64::zero())
    }

    pub fn parties(&self) -> Vec<Party> {
        let mut ps: Vec<Party> = self.support.iter().map(|s| s.party).collect();
        ps.dedup();
        ps
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r as usize, c)] = v;
            }
        }
        m
    }

    pub fn adjoint(&self) -> SiteOperator {
        let n = self.dim();
        let mut cols = vec![Vec::new(); n];
        for (c, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                cols[r as usize].push((c as u32, v.conj()));
            }
        }
        SiteOperator::raw(self.support.clone(), self.dims.clone(), cols)
    }

    pub fn scale(&self, s: Complex64) -> SiteOperator {
        let cols = self
            .cols
            .iter()
            .map(|col| col.iter().map(|&(r, v)| (r, v * s)).filter(|e| e.1.norm() > PRUNE_TOL).collect())
            .collect();
        SiteOperator::raw(self.support.clone(), self.dims.clone(), cols)
    }

    fn union_support(&self, other: &SiteOperator) -> Result<Vec<SiteId>> {
        let mut all: Vec<SiteId> = self.support.clone();
        for s in &other.support {
            match all.iter().find(|t| t.key() == s.key()) {
                Some(t) if t.dim != s.dim => {
                    return Err(Error::DimensionMismatch { site: s.key(), expected: t.dim, found: s.dim })
                }
                Some(_) => {}
                None => all.push(*s),
            }
        }
        all.sort();
        Ok(all)
    }

    /// `self ⊗ 1` on a superset of the support.
    pub fn embed(&self, support: &[SiteId]) -> Result<SiteOperator> {
        if support.len() == self.support.len()
            && support.iter().zip(&self.support).all(|(a, b)| a.key() == b.key())
        {
            return Ok(self.clone());
        }
        Self::check_support(support)?;
        let mut sorted = support.to_vec();
        sorted.sort();
        let mut pos = Vec::with_capacity(self.support.len());
        for s in &self.support {
            let p = sorted
                .iter()
                .position(|t| t.key() == s.key())
                .ok_or_else(|| Error::SiteSpaceMismatch {
                    site: s.key(),
                    detail: "embedding support does not contain the operator support".into(),
                })?;
            if sorted[p].dim != s.dim {
                return Err(Error::DimensionMismatch { site: s.key(), expected: s.dim, found: sorted[p].dim });
            }
            pos.push(p);
        }
        let big_dims: Vec<u32> = sorted.iter().map(|s| s.dim).collect();
        let dim = total_dim(&sorted);
        let mut cols = Vec::with_capacity(dim);
        for c in 0..dim {
            let labels = unflatten(c, &big_dims);
            let local_c = flatten(pos.iter().map(|&p| labels[p]), &self.dims);
            let mut col: Vec<(u32, Complex64)> = self.cols[local_c]
                .iter()
                .map(|&(r, v)| {
                    let local_r = unflatten(r as usize, &self.dims);
                    let mut out = labels.clone();
                    for (&p, &l) in pos.iter().zip(&local_r) {
                        out[p] = l;
                    }
                    (flatten(out, &big_dims) as u32, v)
                })
                .collect();
            col.sort_by_key(|e| e.0);
            cols.push(col);
        }
        Ok(SiteOperator::raw(sorted, big_dims, cols))
    }

    /// Operator product `self · rhs` on the union support.
    pub fn mul(&self, rhs: &SiteOperator) -> Result<SiteOperator> {
        let support = self.union_support(rhs)?;
        let a = self.embed(&support)?;
        let b = rhs.embed(&support)?;
        let n = a.dim();
        let mut acc = vec![Complex64::zero(); n];
        let mut touched: Vec<u32> = Vec::new();
        let mut cols = Vec::with_capacity(n);
        for bcol in &b.cols {
            for &(k, bv) in bcol {
                for &(i, av) in &a.cols[k as usize] {
                    if acc[i as usize] == Complex64::zero() {
                        touched.push(i);
                    }
                    acc[i as usize] += av * bv;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut col = Vec::with_capacity(touched.len());
            for &i in &touched {
                let v = std::mem::replace(&mut acc[i as usize], Complex64::zero());
                if v.norm() > PRUNE_TOL {
                    col.push((i, v));
                }
            }
            touched.clear();
            cols.push(col);
        }
        Ok(SiteOperator::raw(a.support, a.dims, cols))
    }

    pub fn add(&self, rhs: &SiteOperator) -> Result<SiteOperator> {
        self.combine(rhs, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, rhs: &SiteOperator) -> Result<SiteOperator> {
        self.combine(rhs, Complex64::new(-1.0, 0.0))
    }

    fn combine(&self, rhs: &SiteOperator, s: Complex64) -> Result<SiteOperator> {
        let support = self.union_support(rhs)?;
        let a = self.embed(&support)?;
        let b = rhs.embed(&support)?;
        let cols = a
            .cols
            .iter()
            .zip(&b.cols)
            .map(|(ca, cb)| {
                let mut merged: Vec<(u32, Complex64)> =
                    ca.iter().copied().chain(cb.iter().map(|&(r, v)| (r, v * s))).collect();
                merged.sort_by_key(|e| e.0);
                merge_duplicates(&mut merged);
                merged
            })
            .collect();
        Ok(SiteOperator::raw(a.support, a.dims, cols))
    }

    /// Tensor product of operators on disjoint supports.
    pub fn kron(&self, rhs: &SiteOperator) -> Result<SiteOperator> {
        if let Some(s) = self.support.iter().find(|s| rhs.support.iter().any(|t| t.key() == s.key())) {
            return Err(Error::SiteCollision(s.key()));
        }
        self.mul(rhs)
    }

    pub fn commutator(&self, rhs: &SiteOperator) -> Result<SiteOperator> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// Operator norm (largest singular value).
    pub fn norm(&self) -> f64 {
        if self.nnz() == 0 {
            return 0.0;
        }
        if self.cols.iter().all(|c| c.len() <= 1) {
            // monomial matrices: the norm is the largest entry modulus when
            // every row holds at most one entry as well
            let mut rows = vec![0u8; self.dim()];
            let mut monomial = true;
            for col in &self.cols {
                for &(r, _) in col {
                    rows[r as usize] += 1;
                    monomial &= rows[r as usize] == 1;
                }
            }
            if monomial {
                return self.cols.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max);
            }
        }
        let svd = self.to_dense().svd(false, false);
        svd.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest entrywise difference after embedding both on the union support.
    pub fn max_abs_diff(&self, other: &SiteOperator) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.cols.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max))
    }

    pub fn kind(&self) -> OperatorKind {
        *self.kind.get_or_init(|| {
            let hermitian = self
                .max_abs_diff(&self.adjoint())
                .map(|d| d <= TOL)
                .unwrap_or(false);
            let unitary = self
                .adjoint()
                .mul(self)
                .and_then(|p| p.max_abs_diff(&SiteOperator::identity(self.support.clone())?))
                .map(|d| d <= TOL)
                .unwrap_or(false);
            OperatorKind { hermitian, unitary }
        })
    }

    /// Relabels the support through `f`. The image must be injective.
    pub fn map_sites(&self, f: impl Fn(SiteKey) -> SiteKey) -> Result<SiteOperator> {
        let support: Vec<SiteId> = self
            .support
            .iter()
            .map(|s| {
                let k = f(s.key());
                SiteId::new(k.party, k.role, k.index, s.dim)
            })
            .collect();
        Self::check_support(&support)?;
        Ok(SiteOperator::raw(support, self.dims.clone(), self.cols.clone()).canonicalized())
    }

    /// Locality-preserving relabeling of the support (forward direction).
    pub fn permute(&self, relabel: &Relabeling) -> Result<SiteOperator> {
        for s in &self.support {
            let to = relabel.map_key(s.key());
            if to.party != s.party && !relabel.is_cross_party() {
                return Err(Error::PartyViolation { from: s.key(), to });
            }
        }
        self.map_sites(|k| relabel.map_key(k))
    }

    /// Compresses `site` to its `⟨0|·|0⟩` block and drops it from the support.
    pub fn compress_vacant(&self, site: SiteKey) -> Result<SiteOperator> {
        let Some(p) = self.support.iter().position(|s| s.key() == site) else {
            return Ok(self.clone());
        };
        let mut support = self.support.clone();
        support.remove(p);
        let mut dims = self.dims.clone();
        dims.remove(p);
        let dim = total_dim(&support);
        let mut cols = vec![Vec::new(); dim];
        for (c, col) in self.cols.iter().enumerate() {
            let lc = unflatten(c, &self.dims);
            if lc[p] != 0 {
                continue;
            }
            let small_c = flatten(lc.iter().enumerate().filter(|(i, _)| *i != p).map(|(_, &l)| l), &dims);
            for &(r, v) in col {
                let lr = unflatten(r as usize, &self.dims);
                if lr[p] != 0 {
                    continue;
                }
                let small_r =
                    flatten(lr.iter().enumerate().filter(|(i, _)| *i != p).map(|(_, &l)| l), &dims);
                cols[small_c].push((small_r as u32, v));
            }
        }
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
        }
        Ok(SiteOperator::raw(support, dims, cols))
    }

    /// Replaces one support site by a sequence of sites whose dimensions
    /// multiply to its dimension. Flat indices are unchanged, so the first
    /// replacement site is the most significant digit.
    pub fn split_site(&self, site: SiteKey, into: &[SiteId]) -> Result<SiteOperator> {
        let Some(p) = self.support.iter().position(|s| s.key() == site) else {
            return Ok(self.clone());
        };
        let product: u64 = into.iter().map(|s| s.dim as u64).product();
        if product != self.dims[p] as u64 {
            return Err(Error::DimensionMismatch {
                site,
                expected: self.dims[p],
                found: product.min(u32::MAX as u64) as u32,
            });
        }
        let mut support = self.support.clone();
        support.splice(p..=p, into.iter().copied());
        Self::check_support(&support)?;
        let dims = support.iter().map(|s| s.dim).collect();
        Ok(SiteOperator::raw(support, dims, self.cols.clone()).canonicalized())
    }

    /// Entries as `(row, col, value)`, column-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r as usize, c, v)))
    }
}

fn merge_duplicates(col: &mut Vec<(u32, Complex64)>) {
    let mut out: Vec<(u32, Complex64)> = Vec::with_capacity(col.len());
    for &(r, v) in col.iter() {
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
    }
    out.retain(|e| e.1.norm() > PRUNE_TOL);
    *col = out;
}

/// Standard single-qubit matrices.
pub mod pauli {
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn m(entries: [(f64, f64); 4]) -> DMatrix<Complex64> {
        DMatrix::from_row_iterator(2, 2, entries.into_iter().map(|(re, im)| Complex64::new(re, im)))
    }

    pub fn x() -> DMatrix<Complex64> {
        m([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
    }

    pub fn y() -> DMatrix<Complex64> {
        m([(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)])
    }

    pub fn z() -> DMatrix<Complex64> {
        m([(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)])
    }
}
