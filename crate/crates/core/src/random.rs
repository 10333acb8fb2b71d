//! Seeded samplers for Hermitian operators, pure states, unitaries and channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::operator::{CMatrix, CVector, HermitianOperator, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `(G + G†)/2` for a Ginibre `G`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::symmetrised(g)
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// `ψψ† − φφ†` for independent random unit vectors.
pub fn projector_difference<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let psi = pure_state(rng, dim);
    let phi = pure_state(rng, dim);
    &HermitianOperator::projector(&psi) - &HermitianOperator::projector(&phi)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    isometry(rng, dim, dim)
}

/// Random isometry `rows × cols` (`rows ≥ cols`) with orthonormal columns.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let qr = ginibre(rng, rows, cols).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..rows {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random CPTP channel on `C^dim` with `rank` Kraus operators, from a Stinespring isometry.
pub fn cptp_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Channel {
    let v = isometry(rng, dim * rank, dim);
    let kraus = (0..rank)
        .map(|j| v.rows(j * dim, dim).into_owned())
        .collect();
    Channel::from_kraus(kraus).expect("isometry blocks have equal shapes")
}
