//! Dense Hermitian operators and their spectral primitives.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Max-entry tolerance for `A = A†`.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Spectral tolerance, relative to the largest absolute entry.
pub const SPECTRAL_TOL: f64 = 1e-8;

/// Largest absolute entry of `A - A†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// A dense complex Hermitian matrix.
///
/// Construction checks hermiticity to [`HERMITICITY_TOL`] and then stores the
/// exactly symmetrised matrix `(A + A†)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lam);
        }
        scaled * v.adjoint()
    }

    /// Eigenvalues with everything inside `±tol` set to zero.
    pub fn clamped(&self, tol: f64) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&l| if l.abs() <= tol { 0.0 } else { l })
            .collect()
    }
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be at least 1".into()));
        }
        let deviation = hermiticity_deviation(&m);
        if deviation > HERMITICITY_TOL {
            return Err(Error::NonHermitianInput { deviation });
        }
        Ok(Self::symmetrised(m))
    }

    /// Symmetrise without checking; callers must know the input is Hermitian up to rounding.
    pub(crate) fn symmetrised(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self { m: (m + adj).scale(0.5) }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    /// The rank-one operator `v v†` (not normalised).
    pub fn projector(v: &CVector) -> Self {
        Self { m: v * v.adjoint() }
    }

    /// Matrix unit difference `E_ii - E_jj`.
    pub fn diagonal_difference(dim: usize, i: usize, j: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, i)] += C64::new(1.0, 0.0);
        m[(j, j)] -= C64::new(1.0, 0.0);
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Eigensolve with eigenvalues sorted ascending.
    pub fn spectral(&self) -> SpectralDecomposition {
        let n = self.dim();
        let mut pairs: Vec<(f64, CVector)> = Vec::with_capacity(n);
        for block in self.blocks() {
            let eig = SymmetricEigen::new(self.m.select_rows(block.iter()).select_columns(block.iter()));
            for (j, &lam) in eig.eigenvalues.iter().enumerate() {
                let mut v = CVector::zeros(n);
                for (r, &i) in block.iter().enumerate() {
                    v[i] = eig.eigenvectors[(r, j)];
                }
                pairs.push((lam, v));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let eigenvalues = pairs.iter().map(|p| p.0).collect();
        let mut eigenvectors = CMatrix::zeros(n, n);
        for (j, (_, v)) in pairs.iter().enumerate() {
            eigenvectors.set_column(j, v);
        }
        SpectralDecomposition { eigenvalues, eigenvectors }
    }

    /// Ascending eigenvalues only.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev = Vec::with_capacity(self.dim());
        for block in self.blocks() {
            if let [i] = block[..] {
                ev.push(self.m[(i, i)].re);
                continue;
            }
            let sub = self.m.select_rows(block.iter()).select_columns(block.iter());
            ev.extend(SymmetricEigen::new(sub).eigenvalues.iter().copied());
        }
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Absolute clamp threshold `SPECTRAL_TOL · max|entry|`.
    pub fn spectral_tolerance(&self) -> f64 {
        SPECTRAL_TOL * self.max_abs()
    }

    /// `λ_min ≥ -tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Sum of absolute eigenvalues.
    ///
    /// Rows that are exactly zero are dropped first, so block-embedded witnesses
    /// only pay for the block they occupy.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    /// Index sets of the connected components of the nonzero pattern.
    ///
    /// Each component is diagonalised on its own. Besides being cheaper for the
    /// sparse Choi matrices and embedded witnesses used here, this sidesteps
    /// NaNs the dense eigensolver produces on large reducible inputs.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let zero = C64::new(0.0, 0.0);
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut block = vec![root];
            let mut k = 0;
            while k < block.len() {
                let i = block[k];
                k += 1;
                for (j, s) in seen.iter_mut().enumerate() {
                    if !*s && (self.m[(i, j)] != zero || self.m[(j, i)] != zero) {
                        *s = true;
                        block.push(j);
                    }
                }
            }
            block.sort_unstable();
            out.push(block);
        }
        out
    }

    /// Jordan decomposition `H = H⁺ − H⁻` with `H⁺, H⁻ ⪰ 0` and `H⁺H⁻ = 0`.
    ///
    /// Eigenvalues within the spectral tolerance of zero go to neither part.
    pub fn jordan_split(&self) -> (Self, Self) {
        let sd = self.spectral();
        let lam = sd.clamped(self.spectral_tolerance());
        let v = &sd.eigenvectors;
        let part = |keep: &dyn Fn(f64) -> f64| {
            let mut scaled = v.clone();
            for (j, &l) in lam.iter().enumerate() {
                scaled.column_mut(j).scale_mut(keep(l));
            }
            Self::symmetrised(scaled * v.adjoint())
        };
        (part(&|l| l.max(0.0)), part(&|l| (-l).max(0.0)))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self { m: self.m.kronecker(&other.m) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m.scale(s) }
    }

    /// Conjugation `U H U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.ncols() });
        }
        Ok(Self::symmetrised(u * &self.m * u.adjoint()))
    }

    /// Pad with zeros into the top-left corner of a `dim × dim` operator.
    pub fn embed_top_left(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        let mut m = CMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.m);
        Ok(Self { m })
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { m: &self.m - &rhs.m }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// Trace norm of a raw matrix, checking hermiticity first.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(HermitianOperator::new(m.clone())?.trace_norm())
}

/// Jordan split of a raw matrix, checking hermiticity first.
pub fn jordan_split(m: &CMatrix) -> Result<(HermitianOperator, HermitianOperator)> {
    Ok(HermitianOperator::new(m.clone())?.jordan_split())
}

pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    a.kron(b)
}

/// Matrix unit `E_ij` of size `rows × cols`.
pub fn matrix_unit(rows: usize, cols: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use proptest::prelude::*;

    fn singular_value_sum(m: &CMatrix) -> f64 {
        m.clone().singular_values().iter().sum()
    }

    #[test]
    fn eigenvalues_of_sparse_degenerate_matrix_are_finite() {
        // Diagonal-superoperator Choi pattern: nonzero only on the (ii, jj) entries.
        let n = 14;
        let mut m = CMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                let v = if i == j { 1.0 } else if i.abs_diff(j) == 1 { 0.4 } else { 0.0 };
                m[(i * n + i, j * n + j)] = C64::new(v, 0.0);
            }
        }
        let ev = HermitianOperator::new(m).unwrap().eigenvalues();
        assert!(ev.iter().all(|l| l.is_finite()));
        assert!(ev[0] > -1e-12);
    }

    #[test]
    fn trace_norm_of_embedded_block() {
        let mut rng = crate::random::rng(2);
        let x = crate::random::hermitian(&mut rng, 3);
        let big = x.embed_top_left(9).unwrap();
        assert!((big.trace_norm() - x.trace_norm()).abs() < 1e-12);
        assert_eq!(HermitianOperator::zeros(4).trace_norm(), 0.0);
    }

    #[test]
    fn trace_norm_of_signed_diagonal() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        assert!((h.trace_norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trace_norm_rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(trace_norm(&m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn trace_norm_of_scaled_tridiagonal_witness() {
        // t·X₁ with X₁ the n = 4 path adjacency; eigenvalues 2t cos(kπ/5).
        let t = 0.3;
        let n = 4;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for j in 0..n - 1 {
            m[(j, j + 1)] = t;
            m[(j + 1, j)] = t;
        }
        let h = HermitianOperator::from_real(&m).unwrap();
        let cos_sum: f64 = (1..=n)
            .map(|k| (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos().abs())
            .sum();
        assert!((cos_sum - 5f64.sqrt()).abs() < 1e-14);
        assert!((h.trace_norm() - 2.0 * t * 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_matches_singular_values() {
        let mut rng = random::rng(7);
        let h = random::hermitian(&mut rng, 6);
        let oracle = singular_value_sum(h.matrix());
        assert!((h.trace_norm() - oracle).abs() < 1e-10);
    }

    #[test]
    fn jordan_split_diagonal_and_positive() {
        let (p, m) = HermitianOperator::from_real_diagonal(&[2.0, -3.0]).jordan_split();
        assert!(max_abs_diff(p.matrix(), HermitianOperator::from_real_diagonal(&[2.0, 0.0]).matrix()) < 1e-12);
        assert!(max_abs_diff(m.matrix(), HermitianOperator::from_real_diagonal(&[0.0, 3.0]).matrix()) < 1e-12);

        let mut rng = random::rng(3);
        let g = random::hermitian(&mut rng, 4);
        let psd = HermitianOperator::symmetrised(g.matrix() * g.matrix());
        let (p, m) = psd.jordan_split();
        assert!(max_abs_diff(p.matrix(), psd.matrix()) < 1e-8);
        assert!(m.max_abs() < 1e-8);
    }

    #[test]
    fn spectral_decomposition_reconstructs() {
        let mut rng = random::rng(11);
        let h = random::hermitian(&mut rng, 7);
        let sd = h.spectral();
        assert!(max_abs_diff(&sd.reconstruct(), h.matrix()) < 1e-8);
        let v = &sd.eigenvectors;
        assert!(max_abs_diff(&(v.adjoint() * v), &CMatrix::identity(7, 7)) < 1e-8);
        assert!(sd.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn kron_examples() {
        let i2 = HermitianOperator::identity(2);
        assert_eq!(i2.kron(&i2), HermitianOperator::identity(4));
        let z = HermitianOperator::from_real_diagonal(&[1.0, -1.0]);
        let got = z.kron(&i2);
        assert_eq!(got, HermitianOperator::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_spectrum_is_product_of_spectra() {
        let mut rng = random::rng(5);
        let a = random::hermitian(&mut rng, 3);
        let b = random::hermitian(&mut rng, 4);
        let mut expected: Vec<f64> = a
            .eigenvalues()
            .iter()
            .flat_map(|x| b.eigenvalues().into_iter().map(move |y| x * y))
            .collect();
        expected.sort_by(f64::total_cmp);
        let got = a.kron(&b).eigenvalues();
        for (x, y) in got.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn psd_trace_norm_equals_trace() {
        let mut rng = random::rng(21);
        for _ in 0..20 {
            let g = random::hermitian(&mut rng, 5);
            let psd = HermitianOperator::symmetrised(g.matrix() * g.matrix());
            assert!((psd.trace_norm() - psd.trace()).abs() < 1e-9);
        }
    }

    #[test]
    fn jordan_split_roundtrip_hundred_instances() {
        let mut rng = random::rng(99);
        for _ in 0..100 {
            let h = random::hermitian(&mut rng, 5);
            let (p, m) = h.jordan_split();
            assert!(max_abs_diff((&p - &m).matrix(), h.matrix()) < 1e-8);
            assert!(p.min_eigenvalue() >= -1e-8 && m.min_eigenvalue() >= -1e-8);
            assert!(max_abs(&(p.matrix() * m.matrix())) < 1e-8);
        }
    }

    proptest! {
        #[test]
        fn trace_norm_is_unitarily_invariant(seed in 0u64..10_000, d in 2usize..7) {
            let mut rng = random::rng(seed);
            let h = random::hermitian(&mut rng, d);
            let u = random::unitary(&mut rng, d);
            let rotated = h.conjugate_by(&u).unwrap();
            prop_assert!((rotated.trace_norm() - h.trace_norm()).abs() < 1e-9);
        }
    }
}
