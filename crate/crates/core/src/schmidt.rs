//! Schmidt coefficients across the A|B cut of the explicit sites.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use petgraph::unionfind::UnionFind;

use crate::site::Party;
use crate::state::LazyProductState;
use crate::target::SchmidtSpectrum;

/// Singular values of the A-versus-B coefficient matrix of the explicit part.
///
/// The matrix is split into connected blocks (rows and columns linked by a
/// nonzero amplitude) and each block is decomposed densely, so sparse states
/// with many copies stay cheap. A reservoir tail is not included.
pub fn schmidt_spectrum(state: &LazyProductState) -> SchmidtSpectrum {
    let a_pos: Vec<usize> = positions(state, Party::A);
    let b_pos: Vec<usize> = positions(state, Party::B);
    let mut rows: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut cols: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut entries = Vec::with_capacity(state.nnz());
    for (key, amp) in state.amplitudes() {
        let rk: Vec<u32> = a_pos.iter().map(|&p| key[p]).collect();
        let ck: Vec<u32> = b_pos.iter().map(|&p| key[p]).collect();
        let n = rows.len();
        let r = *rows.entry(rk).or_insert(n);
        let n = cols.len();
        let c = *cols.entry(ck).or_insert(n);
        entries.push((r, c, amp));
    }
    let (nr, nc) = (rows.len(), cols.len());
    let mut uf = UnionFind::<usize>::new(nr + nc);
    for &(r, c, _) in &entries {
        uf.union(r, nr + c);
    }
    let mut blocks: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for r in 0..nr {
        blocks.entry(uf.find(r)).or_default().0.push(r);
    }
    for c in 0..nc {
        blocks.entry(uf.find(nr + c)).or_default().1.push(c);
    }
    let mut local = vec![0usize; nr + nc];
    for (rs, cs) in blocks.values() {
        for (i, &r) in rs.iter().enumerate() {
            local[r] = i;
        }
        for (j, &c) in cs.iter().enumerate() {
            local[nr + c] = j;
        }
    }
    let mut mats: BTreeMap<usize, DMatrix<Complex64>> = blocks
        .iter()
        .map(|(&root, (rs, cs))| (root, DMatrix::zeros(rs.len(), cs.len())))
        .collect();
    for &(r, c, amp) in &entries {
        let m = mats.get_mut(&uf.find(r)).expect("block exists");
        m[(local[r], local[nr + c])] = amp;
    }
    let mut coeffs = Vec::new();
    for m in mats.values() {
        if m.nrows() == 1 || m.ncols() == 1 {
            coeffs.push(m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt());
        } else {
            coeffs.extend(m.singular_values().iter().copied().filter(|&s| s > 0.0));
        }
    }
    if coeffs.is_empty() {
        coeffs.push(0.0);
    }
    SchmidtSpectrum::new(coeffs, "A|B")
}

fn positions(state: &LazyProductState, party: Party) -> Vec<usize> {
    state
        .sites()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.party == party)
        .map(|(i, _)| i)
        .collect()
}
