//! Hermitian spanning sets of the full matrix algebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::SiteOperator;
use crate::site::SiteId;

pub const BASIS_NAME: &str = "hermitian-matrix-units";

/// `n²` Hermitian matrices of unit operator norm, pairwise orthogonal in the
/// Hilbert-Schmidt inner product: the identity, `E_jk + E_kj` and
/// `−iE_jk + iE_kj` for `j < k`, and `diag(1, …, 1, −l, 0, …)/l` with `l`
/// ones for `l = 1..n`. For `n = 2` this is `I, X, Y, Z`.
pub fn generator_matrices(n: usize) -> Result<Vec<DMatrix<Complex64>>> {
    if n == 0 {
        return Err(Error::Dimension("generator basis needs a positive dimension".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut out = Vec::with_capacity(n * n);
    out.push(DMatrix::identity(n, n));
    for j in 0..n {
        for k in j + 1..n {
            let mut x = DMatrix::zeros(n, n);
            x[(j, k)] = one;
            x[(k, j)] = one;
            out.push(x);
            let mut y = DMatrix::zeros(n, n);
            y[(j, k)] = -i;
            y[(k, j)] = i;
            out.push(y);
        }
    }
    for l in 1..n {
        let mut d = DMatrix::zeros(n, n);
        for t in 0..l {
            d[(t, t)] = Complex64::new(1.0 / l as f64, 0.0);
        }
        d[(l, l)] = Complex64::new(-1.0, 0.0);
        out.push(d);
    }
    Ok(out)
}

/// The generator matrices placed on `site`.
pub fn generator_basis(site: SiteId) -> Result<Vec<SiteOperator>> {
    generator_matrices(site.dim as usize)?
        .iter()
        .map(|m| SiteOperator::on_site(site, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use crate::site::Party;
    use nalgebra::DVector;

    fn hs(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
        (a.adjoint() * b).trace()
    }

    #[test]
    fn qubit_basis_is_pauli() {
        let g = generator_matrices(2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[1], pauli::x());
        assert_eq!(g[2], pauli::y());
        assert_eq!(g[3], pauli::z());
    }

    #[test]
    fn qutrit_gram_matrix_is_diagonal() {
        let g = generator_matrices(3).unwrap();
        assert_eq!(g.len(), 9);
        for (a, x) in g.iter().enumerate() {
            assert!((x - x.adjoint()).norm() < 1e-15);
            let norm = x.clone().svd(false, false).singular_values.max();
            assert!((norm - 1.0).abs() < 1e-12);
            for (b, y) in g.iter().enumerate() {
                if a != b {
                    assert!(hs(x, y).norm() < 1e-15, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn least_squares_reconstructs_random_matrix() {
        let target = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.3, -1.2),
                Complex64::new(2.0, 0.5),
                Complex64::new(-0.7, 0.1),
                Complex64::new(1.1, 0.9),
            ],
        );
        let g = generator_matrices(2).unwrap();
        // columns are vectorized generators; solve min ‖G c − vec(target)‖
        let cols: Vec<DVector<Complex64>> =
            g.iter().map(|m| DVector::from_iterator(4, m.iter().copied())).collect();
        let gm = DMatrix::from_columns(&cols);
        let rhs = DVector::from_iterator(4, target.iter().copied());
        let coeffs = gm.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();
        let rebuilt = gm * coeffs;
        assert!((rebuilt - rhs).norm() < 1e-12);
    }

    #[test]
    fn operators_live_on_the_site() {
        let site = SiteId::output(Party::A, 0, 3);
        let ops = generator_basis(site).unwrap();
        assert!(ops.iter().all(|o| o.support() == [site]));
    }
}
