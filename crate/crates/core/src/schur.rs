//! Schur-multiplier family `Λ_t(X) = A_t ∘ X` with `A_t = I + t·(shift + shift†)`.
//!
//! `A_t` is PSD with unit diagonal for `t ∈ [0, 1/2]`, so every `Λ_t` is CPTP there,
//! yet the tridiagonal witness grows linearly in `t`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::Channel;
use crate::divisibility::DynamicalFamily;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator, C64};

/// Upper end of the window where `A_t` is PSD for every truncation.
pub const T_MAX: f64 = 0.5;

/// Tridiagonal Toeplitz matrix with ones on the diagonal and `t` beside it.
pub fn toeplitz_a(n: usize, t: f64) -> Result<HermitianOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("off-diagonal weight must be nonnegative, got {t}")));
    }
    let mut m = CMatrix::identity(n, n);
    for j in 0..n.saturating_sub(1) {
        m[(j, j + 1)] = C64::new(t, 0.0);
        m[(j + 1, j)] = C64::new(t, 0.0);
    }
    HermitianOperator::new(m)
}

/// `1 + 2t cos(jπ/(n+1))`, `j = 1..n`, ascending.
pub fn toeplitz_spectrum(n: usize, t: f64) -> Vec<f64> {
    let mut ev: Vec<f64> = (1..=n)
        .map(|j| 1.0 + 2.0 * t * (j as f64 * PI / (n as f64 + 1.0)).cos())
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `2 Σ_{j=1..n} |cos(jπ/(n+1))|`, the slope of the witness norm.
pub fn witness_slope(n: usize) -> f64 {
    2.0 * (1..=n)
        .map(|j| (j as f64 * PI / (n as f64 + 1.0)).cos().abs())
        .sum::<f64>()
}

fn check_window(t: f64) -> Result<()> {
    if !(0.0..=T_MAX).contains(&t) {
        return Err(Error::OutsideValidityWindow { t });
    }
    Ok(())
}

/// `X ↦ A_t ∘ X`, stored as a diagonal superoperator.
pub fn schur_channel(n: usize, t: f64) -> Result<Channel> {
    check_window(t)?;
    let a = toeplitz_a(n, t)?;
    let diag: Vec<C64> = a.matrix().as_slice().to_vec();
    let superop = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
    Channel::from_superoperator(superop, n, n)
}

/// Entrywise product `A ∘ X`.
pub fn schur_apply(a: &HermitianOperator, x: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: x.dim() });
    }
    HermitianOperator::new(a.matrix().component_mul(x.matrix()))
}

/// `X₁ = shift + shift†` on `C^block`, zero-padded to `C^n_trunc`.
pub fn witness(block: usize, n_trunc: usize) -> Result<HermitianOperator> {
    if block < 2 {
        return Err(Error::InvalidArgument(format!("witness block must be at least 2, got {block}")));
    }
    let mut x1 = toeplitz_a(block, 1.0)?.into_matrix();
    x1.fill_diagonal(C64::new(0.0, 0.0));
    HermitianOperator::new(x1)?.embed_top_left(n_trunc)
}

/// The witness placed in the top-left block of `C^n_trunc ⊗ C^n_trunc`, i.e. `E_00 ⊗ X`.
pub fn cp_witness(block: usize, n_trunc: usize) -> Result<HermitianOperator> {
    witness(block, n_trunc)?.embed_top_left(n_trunc * n_trunc)
}

/// Truncation size and time window of the family.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SchurFamilyConfig {
    pub n_trunc: usize,
    pub t_domain: (f64, f64),
}

impl SchurFamilyConfig {
    pub fn new(n_trunc: usize, t_domain: (f64, f64)) -> Result<Self> {
        if n_trunc < 2 {
            return Err(Error::InvalidArgument(format!("truncation must be at least 2, got {n_trunc}")));
        }
        check_window(t_domain.0)?;
        check_window(t_domain.1)?;
        Ok(Self { n_trunc, t_domain })
    }
}

pub fn schur_family(config: &SchurFamilyConfig) -> Result<DynamicalFamily> {
    let n = config.n_trunc;
    DynamicalFamily::new("schur", n, config.t_domain, move |t| {
        schur_channel(n, t.clamp(0.0, T_MAX)).expect("validated window")
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub t: f64,
    pub trace_norm: f64,
    pub derivative: f64,
    pub closed_form_norm: f64,
    pub n: usize,
}

/// `‖Λ_t(X)‖₁` and its central difference for the `n × n` witness.
pub fn witness_growth(n: usize, grid: &[f64], h: f64) -> Result<Vec<GrowthRow>> {
    let x = witness(n, n)?;
    let norm_at = |t: f64| -> Result<f64> {
        check_window(t)?;
        Ok(schur_apply(&toeplitz_a(n, t)?, &x)?.trace_norm())
    };
    let slope = witness_slope(n);
    grid.iter()
        .map(|&t| {
            if t - h < 0.0 || t + h > T_MAX {
                return Err(Error::DomainExceeded { t, h, t_min: 0.0, t_max: T_MAX });
            }
            Ok(GrowthRow {
                t,
                trace_norm: norm_at(t)?,
                derivative: (norm_at(t + h)? - norm_at(t - h)?) / (2.0 * h),
                closed_form_norm: slope * t,
                n,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisibility::{self, ScanOptions, Verdict};
    use crate::operator::max_abs_diff;

    #[test]
    fn toeplitz_small_cases() {
        let ev = toeplitz_a(2, 0.25).unwrap().eigenvalues();
        assert!((ev[0] - 0.75).abs() < 1e-14 && (ev[1] - 1.25).abs() < 1e-14);
        let id = toeplitz_a(5, 0.0).unwrap();
        assert!(id.eigenvalues().iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert!(toeplitz_a(3, -0.1).is_err());
    }

    #[test]
    fn toeplitz_min_eigenvalue_near_window_edge() {
        let ev = toeplitz_a(50, 0.49).unwrap().eigenvalues();
        let formula = 1.0 + 0.98 * (50.0 * PI / 51.0).cos();
        assert!(formula > 0.0);
        assert!((ev[0] - formula).abs() < 1e-10);
    }

    #[test]
    fn spectrum_formula_matches_eigensolve() {
        for n in [1, 2, 3, 10, 37, 100] {
            let dense = toeplitz_a(n, 0.3).unwrap().eigenvalues();
            let formula = toeplitz_spectrum(n, 0.3);
            let err = dense.iter().zip(&formula).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "n={n}: {err}");
        }
    }

    #[test]
    fn slope_values() {
        assert!((witness_slope(2) - 2.0).abs() < 1e-14);
        assert!((witness_slope(4) - 2.0 * 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn slope_grows_with_truncation() {
        let slopes: Vec<f64> = (2..40).map(witness_slope).collect();
        assert!(slopes.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn channel_at_zero_dephases_and_is_cp_inside_window() {
        // A_0 = I keeps only the diagonal.
        let x = toeplitz_a(4, 0.3).unwrap();
        let y = schur_channel(4, 0.0).unwrap().apply(&x).unwrap();
        assert!(max_abs_diff(y.matrix(), &CMatrix::identity(4, 4)) < 1e-15);
        let ch = schur_channel(6, 0.3).unwrap();
        assert!(ch.is_trace_preserving() && ch.is_cp(1e-10));
        assert!(matches!(schur_channel(4, 0.6), Err(Error::OutsideValidityWindow { .. })));
    }

    #[test]
    fn witness_image_is_scaled_block() {
        let x = witness(4, 7).unwrap();
        let y = schur_channel(7, 0.2).unwrap().apply(&x).unwrap();
        assert!(max_abs_diff(y.matrix(), &x.matrix().scale(0.2)) < 1e-15);
    }

    #[test]
    fn growth_matches_closed_form() {
        let rows = witness_growth(4, &[0.1, 0.25, 0.4], 1e-4).unwrap();
        for r in rows {
            assert!((r.trace_norm - r.closed_form_norm).abs() < 1e-12);
            assert!((r.derivative - 2.0 * 5f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn family_is_valid_but_not_p_divisible() {
        let fam = schur_family(&SchurFamilyConfig::new(4, (0.0, 0.5)).unwrap()).unwrap();
        let grid = divisibility::linspace(0.05, 0.45, 5);
        let rep = divisibility::p_divisibility_scan(&fam, &[witness(4, 4).unwrap()], &grid, &ScanOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::NotPDivisible);
        assert!((rep.max_derivative - witness_slope(4)).abs() < 1e-6);
        let rep = divisibility::cp_divisibility_scan(&fam, &[cp_witness(4, 4).unwrap()], &grid, &ScanOptions::default())
            .unwrap();
        assert_eq!(rep.verdict, Verdict::NotCpDivisible);
        assert!((rep.max_derivative - witness_slope(4)).abs() < 1e-6);
    }

    #[test]
    fn verdict_survives_larger_truncation() {
        for n in [2, 4] {
            let fam = schur_family(&SchurFamilyConfig::new(n + 10, (0.0, 0.5)).unwrap()).unwrap();
            let rep = divisibility::p_divisibility_scan(
                &fam,
                &[witness(n, n + 10).unwrap()],
                &[0.2, 0.3],
                &ScanOptions::default(),
            )
            .unwrap();
            assert_eq!(rep.verdict, Verdict::NotPDivisible);
            assert!((rep.max_derivative - witness_slope(n)).abs() < 1e-6);
        }
    }

    #[test]
    fn config_rejects_window_outside_half() {
        assert!(SchurFamilyConfig::new(4, (0.0, 0.6)).is_err());
        assert!(SchurFamilyConfig::new(1, (0.0, 0.5)).is_err());
    }
}
