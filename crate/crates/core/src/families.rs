//! Reference dynamical families used as fixtures and CLI presets.

use crate::channel::Channel;
use crate::divisibility::DynamicalFamily;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, CVector, HermitianOperator, C64};
use crate::random;

/// `U_t = exp(−i t H)` from the eigendecomposition of `H`.
pub fn unitary_propagator(h: &HermitianOperator, t: f64) -> CMatrix {
    let sd = h.spectral();
    let v = &sd.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lam) in sd.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lam * t);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * v.adjoint()
}

/// `Λ_t = Ad_{U_t}` for a fixed Hamiltonian.
pub fn unitary_family_from(h: HermitianOperator, t_domain: (f64, f64)) -> Result<DynamicalFamily> {
    let dim = h.dim();
    DynamicalFamily::new("unitary", dim, t_domain, move |t| {
        Channel::unitary(unitary_propagator(&h, t)).expect("square propagator")
    })
}

/// Unitary family on `[0, 1]` with a seeded random Hamiltonian.
pub fn unitary_family(dim: usize, seed: u64) -> Result<DynamicalFamily> {
    let mut rng = random::rng(seed);
    unitary_family_from(random::hermitian(&mut rng, dim), (0.0, 1.0))
}

/// Kraus operators of the swap/Hadamard-type family; the top 2×2 block carries
/// the action and the rest of the truncation is the identity.
pub fn swap_hadamard_kraus(dim: usize) -> Result<[CMatrix; 3]> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("truncation must be at least 2, got {dim}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut e1 = CMatrix::identity(dim, dim);
    let mut e2 = CMatrix::identity(dim, dim);
    let mut e3 = CMatrix::identity(dim, dim);
    for i in 0..2 {
        for j in 0..2 {
            e1[(i, j)] = C64::new(if i != j { 1.0 } else { 0.0 }, 0.0);
            e2[(i, j)] = C64::new(s, 0.0);
            let sign = if (i + j) % 2 == 0 { -1.0 } else { 1.0 };
            e3[(i, j)] = C64::new(sign * s, 0.0);
        }
    }
    Ok([e1, e2, e3])
}

/// `η E₁XE₁† + (κ/2)(E₂XE₂† + E₃XE₃†)` with `κ = 1 − η`.
pub fn swap_hadamard_channel(dim: usize, eta: f64) -> Result<Channel> {
    let [e1, e2, e3] = swap_hadamard_kraus(dim)?;
    let kappa = 1.0 - eta;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("weight eta={eta} outside [0, 1]")));
    }
    let w = |c: f64| C64::new(c.sqrt(), 0.0);
    Channel::from_kraus(vec![e1 * w(eta), e2 * w(kappa / 2.0), e3 * w(kappa / 2.0)])
}

/// The swap/Hadamard family with `η_t = t` on `[0, 1]`; not CP-divisible.
pub fn generic_noncp_family(dim: usize) -> Result<DynamicalFamily> {
    swap_hadamard_kraus(dim)?;
    DynamicalFamily::new("generic-noncp", dim, (0.0, 1.0), move |t| {
        swap_hadamard_channel(dim, t).expect("validated truncation")
    })
}

/// `ψψ† − φφ†` on `C^d ⊗ C^d` with `ψ = |00⟩ + |11⟩`, `φ = |01⟩ + |10⟩`.
pub fn bell_difference_witness(dim: usize) -> Result<HermitianOperator> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("truncation must be at least 2, got {dim}")));
    }
    let idx = |a: usize, b: usize| a * dim + b;
    let mut psi = CVector::zeros(dim * dim);
    let mut phi = CVector::zeros(dim * dim);
    psi[idx(0, 0)] = C64::new(1.0, 0.0);
    psi[idx(1, 1)] = C64::new(1.0, 0.0);
    phi[idx(0, 1)] = C64::new(1.0, 0.0);
    phi[idx(1, 0)] = C64::new(1.0, 0.0);
    Ok(&HermitianOperator::projector(&psi) - &HermitianOperator::projector(&phi))
}

/// Completely depolarising channel `X ↦ tr(X) I/d`.
pub fn depolarising(dim: usize) -> Channel {
    Channel::from_unit_images(dim, dim, |i, j| {
        if i == j {
            CMatrix::identity(dim, dim).scale(1.0 / dim as f64)
        } else {
            CMatrix::zeros(dim, dim)
        }
    })
}

/// `(1 − m) id + m D`.
pub fn depolarising_mixture(dim: usize, m: f64) -> Channel {
    let id = Channel::identity(dim);
    let dep = depolarising(dim);
    Channel::linear_combination(&[(1.0 - m, &id), (m, &dep)]).expect("equal shapes")
}

/// Mixing weight `min(t, 1)` on `[0, 2]`: the rank collapses at `t = 1` and stays collapsed.
pub fn rank_collapse_family(dim: usize) -> Result<DynamicalFamily> {
    DynamicalFamily::new("rank-collapse", dim, (0.0, 2.0), move |t| depolarising_mixture(dim, t.min(1.0)))
}

/// Mixing weight `1 − |1 − t|` on `[0, 2]`: collapses at `t = 1`, then the
/// identity component returns.
pub fn resurrecting_family(dim: usize) -> Result<DynamicalFamily> {
    DynamicalFamily::new("resurrecting", dim, (0.0, 2.0), move |t| {
        depolarising_mixture(dim, 1.0 - (1.0 - t).abs())
    })
}

/// `exp(rate · t (Φ − id)) = Σ_n e^{−rt} (rt)ⁿ/n! Φⁿ`, a CP semigroup built by
/// repeated composition of `Φ`.
pub fn poisson_semigroup(base: Channel, rate: f64, t_domain: (f64, f64)) -> Result<DynamicalFamily> {
    let dim = base.dim_in();
    let powers = channel_powers(&base, poisson_cutoff(rate * t_domain.1.max(0.0)));
    DynamicalFamily::new("poisson-semigroup", dim, t_domain, move |t| {
        let x = rate * t;
        let mut weight = (-x).exp();
        let mut terms = Vec::with_capacity(powers.len());
        for n in 0..powers.len() {
            if n > 0 {
                weight *= x / n as f64;
            }
            terms.push(weight);
        }
        let refs: Vec<(f64, &Channel)> = terms.into_iter().zip(powers.iter()).collect();
        Channel::linear_combination(&refs).expect("equal shapes")
    })
}

fn poisson_cutoff(x: f64) -> usize {
    // Tail of the Poisson series below 1e-17 well before this.
    (x + 12.0 * x.sqrt() + 40.0).ceil() as usize
}

fn channel_powers(base: &Channel, count: usize) -> Vec<Channel> {
    // Superoperator-only copies, so composition does not multiply Kraus lists.
    let d = base.dim_in();
    let bare = |c: &Channel| Channel::from_superoperator(c.superoperator().clone(), d, d).expect("same shape");
    let base = bare(base);
    let mut powers = vec![bare(&Channel::identity(d))];
    for _ in 1..count {
        let next = base.compose(powers.last().expect("nonempty")).expect("square channel");
        powers.push(next);
    }
    powers
}
