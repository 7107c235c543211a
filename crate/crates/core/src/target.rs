//! Bipartite pure targets in Schmidt form and their spectra.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::site::{Party, SiteId};
use crate::state::LazyProductState;
use crate::NORM_TOL;

/// Descending non-negative Schmidt coefficients across a named cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub coefficients: Vec<f64>,
    pub cut: String,
}

impl SchmidtSpectrum {
    pub fn new(mut coefficients: Vec<f64>, cut: impl Into<String>) -> Self {
        coefficients.sort_by(|a, b| b.total_cmp(a));
        SchmidtSpectrum { coefficients, cut: cut.into() }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > tol).count()
    }

    pub fn squared_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Largest entrywise gap, padding the shorter spectrum with zeros.
    pub fn max_deviation(&self, other: &SchmidtSpectrum) -> f64 {
        let n = self.coefficients.len().max(other.coefficients.len());
        (0..n)
            .map(|i| {
                let a = self.coefficients.get(i).copied().unwrap_or(0.0);
                let b = other.coefficients.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn tensor(&self, other: &SchmidtSpectrum) -> SchmidtSpectrum {
        let coeffs = self
            .coefficients
            .iter()
            .flat_map(|a| other.coefficients.iter().map(move |b| a * b))
            .collect();
        SchmidtSpectrum::new(coeffs, self.cut.clone())
    }
}

/// `Σ_i x_i |i⟩_A |i⟩_B` with strictly positive `x_i`, on `local_dim`-level
/// registers. Coefficients are kept in basis order; [`TargetState::spectrum`]
/// gives the sorted view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    coefficients: Vec<f64>,
    local_dim: u32,
}

impl TargetState {
    pub fn new(coefficients: Vec<f64>, local_dim: u32) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidTarget("no Schmidt coefficients".into()));
        }
        if coefficients.len() > local_dim as usize {
            return Err(Error::InvalidTarget(format!(
                "{} coefficients do not fit local dimension {local_dim}",
                coefficients.len()
            )));
        }
        if let Some(bad) = coefficients.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidTarget(format!("coefficient {bad} is not strictly positive")));
        }
        let sum: f64 = coefficients.iter().map(|c| c * c).sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidTarget(format!("squared coefficients sum to {sum}")));
        }
        Ok(TargetState { coefficients, local_dim })
    }

    /// Rescales arbitrary positive weights to unit norm; local dimension is
    /// the number of coefficients.
    pub fn normalized(weights: &[f64]) -> Result<Self> {
        let norm = weights.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidTarget("zero weight vector".into()));
        }
        TargetState::new(weights.iter().map(|w| w / norm).collect(), weights.len() as u32)
    }

    /// Exact construction from positive rationals whose squares sum to one.
    pub fn from_rationals(coefficients: &[Ratio<i64>]) -> Result<Self> {
        if coefficients.iter().any(|c| *c <= Ratio::zero()) {
            return Err(Error::InvalidTarget("rational coefficients must be positive".into()));
        }
        let sum = coefficients
            .iter()
            .fold(Ratio::<i64>::zero(), |acc, c| acc + c * c);
        if !sum.is_one() {
            return Err(Error::InvalidTarget(format!("squared rationals sum to {sum}, not 1")));
        }
        let floats = coefficients
            .iter()
            .map(|c| c.to_f64().expect("finite rational"))
            .collect::<Vec<_>>();
        TargetState::new(floats, coefficients.len() as u32)
    }

    pub fn bell() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        TargetState { coefficients: vec![h, h], local_dim: 2 }
    }

    /// `|00⟩` on `local_dim`-level registers.
    pub fn product(local_dim: u32) -> Self {
        TargetState { coefficients: vec![1.0], local_dim: local_dim.max(1) }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn local_dim(&self) -> u32 {
        self.local_dim
    }

    pub fn is_entangled(&self) -> bool {
        self.coefficients.iter().filter(|&&c| c > 0.0).count() >= 2
    }

    pub fn spectrum(&self) -> SchmidtSpectrum {
        let nonzero = self.coefficients.iter().copied().filter(|&c| c > 0.0).collect();
        SchmidtSpectrum::new(nonzero, "A|B")
    }

    /// Same state up to coefficient noise.
    pub fn approx_eq(&self, other: &TargetState, tol: f64) -> bool {
        self.local_dim == other.local_dim
            && self.coefficients.len() == other.coefficients.len()
            && self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .all(|(a, b)| (a - b).abs() <= tol)
    }

    /// `g^{⊗k}` as a single target on `n^k`-level registers, basis order
    /// lexicographic in the copy labels.
    pub fn tensor_power(&self, k: u32) -> TargetState {
        let n = self.local_dim as usize;
        let mut coeffs = vec![1.0f64];
        for _ in 0..k {
            let mut next = vec![0.0; coeffs.len() * n];
            for (i, c) in coeffs.iter().enumerate() {
                for (j, x) in self.coefficients.iter().enumerate() {
                    next[i * n + j] = c * x;
                }
            }
            coeffs = next;
        }
        // zeros mark unused levels when a copy has fewer coefficients than levels
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        TargetState { coefficients: coeffs, local_dim: self.local_dim.pow(k) }
    }

    /// Amplitude of `|i⟩|i⟩`.
    pub fn amplitude(&self, level: usize) -> f64 {
        self.coefficients.get(level).copied().unwrap_or(0.0)
    }

    /// Two-site state on the given registers.
    pub fn pair_state(&self, a: SiteId, b: SiteId) -> Result<LazyProductState> {
        debug_assert_eq!(a.party, Party::A);
        debug_assert_eq!(b.party, Party::B);
        for s in [a, b] {
            if s.dim != self.local_dim {
                return Err(Error::DimensionMismatch {
                    site: s.key(),
                    expected: self.local_dim,
                    found: s.dim,
                });
            }
        }
        let terms = self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, x)| (vec![i as u32, i as u32], Complex64::new(*x, 0.0)));
        LazyProductState::from_terms(vec![a, b], terms)
    }

    /// `⟨g| A ⊗ B |g⟩ = Σ_{ij} x_i x_j A_ij B_ij`, read straight off the
    /// Schmidt form.
    pub fn expectation(&self, a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
        let mut acc = Complex64::zero();
        for (i, xi) in self.coefficients.iter().enumerate() {
            for (j, xj) in self.coefficients.iter().enumerate() {
                acc += a[(i, j)] * b[(i, j)] * (xi * xj);
            }
        }
        acc
    }
}

impl fmt::Display for TargetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coefficients.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.6}")?;
        }
        write!(f, ")")
    }
}
