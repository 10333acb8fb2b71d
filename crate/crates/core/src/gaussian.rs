//! Covariance-level Gaussian channels `S ↦ XSXᵀ + ½Y` on `m` modes.
//!
//! Phase-space vectors are ordered `(q₁..q_m, p₁..p_m)`, so the symplectic form is
//! `J = [[0, I], [−I, 0]]` and the vacuum covariance is `½I`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divisibility::TAU_SLOPE;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator, C64};
use crate::random;

pub type RMatrix = DMatrix<f64>;

/// Max-entry tolerance for `RJRᵀ = J`.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// Eigenvalue slack for channel and state validity.
pub const VALIDITY_TOL: f64 = 1e-9;

/// `|det X_t|` at or below this is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

const VALIDATION_POINTS: usize = 11;

pub fn symplectic_form(m: usize) -> RMatrix {
    let mut j = RMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = 1.0;
        j[(m + i, i)] = -1.0;
    }
    j
}

/// `max |RJRᵀ − J|`, or `None` when `R` is not square of even size.
pub fn symplectic_deviation(r: &RMatrix) -> Option<f64> {
    if r.nrows() != r.ncols() || !r.nrows().is_multiple_of(2) || r.nrows() == 0 {
        return None;
    }
    let j = symplectic_form(r.nrows() / 2);
    Some((r * &j * r.transpose() - &j).amax())
}

pub fn is_symplectic(r: &RMatrix) -> bool {
    symplectic_deviation(r).is_some_and(|d| d <= SYMPLECTIC_TOL)
}

/// `[[Re U, Im U], [−Im U, Re U]]`, symplectic and orthogonal when `U` is unitary.
pub fn passive_symplectic(u: &CMatrix) -> RMatrix {
    let m = u.nrows();
    let mut r = RMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = u[(i, j)];
            r[(i, j)] = z.re;
            r[(i, m + j)] = z.im;
            r[(m + i, j)] = -z.im;
            r[(m + i, m + j)] = z.re;
        }
    }
    r
}

/// `diag(s₁..s_m, 1/s₁..1/s_m)`.
pub fn squeezer(s: &[f64]) -> RMatrix {
    let diag: Vec<f64> = s.iter().copied().chain(s.iter().map(|x| 1.0 / x)).collect();
    RMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Passive · squeezer · passive, with log-normal squeezing factors.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, m: usize) -> RMatrix {
    let u1 = passive_symplectic(&random::unitary(rng, m));
    let u2 = passive_symplectic(&random::unitary(rng, m));
    let s: Vec<f64> = (0..m)
        .map(|_| {
            let g: f64 = rng.sample(StandardNormal);
            (0.5 * g).exp()
        })
        .collect();
    u1 * squeezer(&s) * u2
}

/// Smallest eigenvalue of the Hermitian matrix `re + i·im`.
fn hermitian_min_eigenvalue(re: &RMatrix, im: &RMatrix) -> f64 {
    let m = CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]));
    HermitianOperator::symmetrised(m).min_eigenvalue()
}

fn validity_slack(scale: f64) -> f64 {
    VALIDITY_TOL * scale.max(1.0)
}

fn modes_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("phase-space dimension must be even and positive, got {dim}")));
    }
    Ok(dim / 2)
}

/// Real symmetric `2m × 2m` covariance matrix with `2S + iJ ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    s: RMatrix,
}

impl CovarianceMatrix {
    pub fn new(s: RMatrix) -> Result<Self> {
        if s.nrows() != s.ncols() {
            return Err(Error::DimensionMismatch { expected: s.nrows(), found: s.ncols() });
        }
        let m = modes_of(s.nrows())?;
        let asym = (&s - s.transpose()).amax();
        if asym > VALIDITY_TOL {
            return Err(Error::InvalidArgument(format!("covariance matrix is not symmetric (max deviation {asym:.3e})")));
        }
        let lam = hermitian_min_eigenvalue(&s.scale(2.0), &symplectic_form(m));
        if lam < -validity_slack(s.amax()) {
            return Err(Error::InvalidState { min_eigenvalue: lam });
        }
        Ok(Self { s })
    }

    /// `½I`.
    pub fn vacuum(m: usize) -> Self {
        Self { s: RMatrix::identity(2 * m, 2 * m).scale(0.5) }
    }

    pub fn modes(&self) -> usize {
        self.s.nrows() / 2
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.s
    }

    /// Smallest eigenvalue of `2S + iJ`.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_min_eigenvalue(&self.s.scale(2.0), &symplectic_form(self.modes()))
    }
}

/// A Gaussian channel `(X, Y)` with `Y − i(J − XJXᵀ) ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPair {
    m: usize,
    x: RMatrix,
    y: RMatrix,
}

impl GaussianPair {
    pub fn new(x: RMatrix, y: RMatrix) -> Result<Self> {
        let pair = Self::unchecked(x, y)?;
        let lam = pair.validity_min_eigenvalue();
        if lam < -validity_slack(pair.x.amax().powi(2).max(pair.y.amax())) {
            return Err(Error::InvalidChannel { min_eigenvalue: lam });
        }
        Ok(pair)
    }

    /// Shape and symmetry checks only.
    fn unchecked(x: RMatrix, y: RMatrix) -> Result<Self> {
        if x.nrows() != x.ncols() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: x.ncols() });
        }
        if y.shape() != x.shape() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.nrows() });
        }
        let m = modes_of(x.nrows())?;
        let asym = (&y - y.transpose()).amax();
        if asym > VALIDITY_TOL * y.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!("Y is not symmetric (max deviation {asym:.3e})")));
        }
        let y = (&y + y.transpose()).scale(0.5);
        Ok(Self { m, x, y })
    }

    pub fn identity(m: usize) -> Self {
        Self { m, x: RMatrix::identity(2 * m, 2 * m), y: RMatrix::zeros(2 * m, 2 * m) }
    }

    /// Gaussian unitary `S ↦ RSRᵀ`.
    pub fn unitary(r: RMatrix) -> Result<Self> {
        let dev = symplectic_deviation(&r)
            .ok_or_else(|| Error::InvalidArgument("symplectic matrix must be square of even size".into()))?;
        if dev > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { factor: "R".into(), deviation: dev });
        }
        let m = r.nrows() / 2;
        Ok(Self { m, x: r, y: RMatrix::zeros(2 * m, 2 * m) })
    }

    /// Pure loss with transmissivity `eta ∈ [0, 1]`.
    pub fn attenuator(m: usize, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidArgument(format!("transmissivity {eta} outside [0, 1]")));
        }
        let id = RMatrix::identity(2 * m, 2 * m);
        Ok(Self { m, x: id.scale(eta.sqrt()), y: id.scale(1.0 - eta) })
    }

    /// Phase-insensitive amplifier with gain `g ≥ 1`.
    pub fn amplifier(m: usize, gain: f64) -> Result<Self> {
        if gain < 1.0 {
            return Err(Error::InvalidArgument(format!("gain {gain} below 1")));
        }
        let id = RMatrix::identity(2 * m, 2 * m);
        Ok(Self { m, x: id.scale(gain.sqrt()), y: id.scale(gain - 1.0) })
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn x(&self) -> &RMatrix {
        &self.x
    }

    pub fn y(&self) -> &RMatrix {
        &self.y
    }

    pub fn det_x(&self) -> f64 {
        self.x.determinant()
    }

    /// Smallest eigenvalue of `Y − i(J − XJXᵀ)`.
    pub fn validity_min_eigenvalue(&self) -> f64 {
        let j = symplectic_form(self.m);
        let defect = &j - &self.x * &j * self.x.transpose();
        hermitian_min_eigenvalue(&self.y, &(-defect))
    }

    /// `self ∘ inner`: `(X₂X₁, X₂Y₁X₂ᵀ + Y₂)`.
    pub fn compose(&self, inner: &GaussianPair) -> Result<GaussianPair> {
        if self.m != inner.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: inner.m });
        }
        let x = &self.x * &inner.x;
        let y = &self.x * &inner.y * self.x.transpose() + &self.y;
        Self::unchecked(x, y)
    }

    pub fn apply(&self, s: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        apply_to_covariance(self, s)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PairFile { m: self.m, x: rows(&self.x), y: rows(&self.y) };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Reads `{m, X, Y}` and checks validity.
    pub fn from_json(s: &str) -> Result<Self> {
        let file: PairFile = serde_json::from_str(s)?;
        let x = from_rows(&file.x)?;
        let y = from_rows(&file.y)?;
        if x.nrows() != 2 * file.m {
            return Err(Error::DimensionMismatch { expected: 2 * file.m, found: x.nrows() });
        }
        Self::new(x, y)
    }
}

#[derive(Serialize, Deserialize)]
struct PairFile {
    m: usize,
    #[serde(rename = "X")]
    x: Vec<Vec<f64>>,
    #[serde(rename = "Y")]
    y: Vec<Vec<f64>>,
}

pub fn rows(m: &RMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> Result<RMatrix> {
    let n = r.len();
    let cols = r.first().map_or(0, Vec::len);
    if let Some(bad) = r.iter().find(|row| row.len() != cols) {
        return Err(Error::DimensionMismatch { expected: cols, found: bad.len() });
    }
    Ok(RMatrix::from_fn(n, cols, |i, j| r[i][j]))
}

/// `S ↦ XSXᵀ + ½Y`, with both inputs re-validated.
pub fn apply_to_covariance(ch: &GaussianPair, s: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if ch.m != s.modes() {
        return Err(Error::DimensionMismatch { expected: ch.m, found: s.modes() });
    }
    let lam = ch.validity_min_eigenvalue();
    if lam < -validity_slack(ch.x.amax().powi(2).max(ch.y.amax())) {
        return Err(Error::InvalidChannel { min_eigenvalue: lam });
    }
    let lam = s.min_eigenvalue();
    if lam < -validity_slack(s.s.amax()) {
        return Err(Error::InvalidState { min_eigenvalue: lam });
    }
    let out = &ch.x * &s.s * ch.x.transpose() + ch.y.scale(0.5);
    Ok(CovarianceMatrix { s: (&out + out.transpose()).scale(0.5) })
}

/// Reorders `(q₁..q_M, p₁..p_M)` to `(q₁, p₁, .., q_M, p_M)` on both sides.
pub fn interleave_modes(l: &RMatrix) -> RMatrix {
    let n = l.nrows();
    let m = n / 2;
    let src = |k: usize| if k.is_multiple_of(2) { k / 2 } else { m + k / 2 };
    RMatrix::from_fn(n, n, |i, j| l[(src(i), src(j))])
}

fn kept_indices(big_m: usize, m_keep: usize) -> (Vec<usize>, Vec<usize>) {
    let kept: Vec<usize> = (0..m_keep).chain(big_m..big_m + m_keep).collect();
    let env: Vec<usize> = (m_keep..big_m).chain(big_m + m_keep..2 * big_m).collect();
    (kept, env)
}

/// `(L₁₁, L₁₂)`: rows of the first `m_keep` modes, split into system and environment columns.
pub fn dilation_blocks(l: &RMatrix, m_keep: usize) -> Result<(RMatrix, RMatrix)> {
    let big_m = modes_of(l.nrows())?;
    if m_keep == 0 || m_keep > big_m {
        return Err(Error::InvalidArgument(format!("cannot keep {m_keep} of {big_m} modes")));
    }
    let (kept, env) = kept_indices(big_m, m_keep);
    let rows = l.select_rows(kept.iter());
    Ok((rows.select_columns(kept.iter()), rows.select_columns(env.iter())))
}

/// Symplecticity of one dilation factor.
#[derive(Clone, Debug, Serialize)]
pub struct FactorCheck {
    pub factor: String,
    pub deviation: f64,
    pub symplectic: bool,
}

pub fn check_factors(r1: &RMatrix, t: &RMatrix, r2: &RMatrix) -> Vec<FactorCheck> {
    [("R1", r1), ("T", t), ("R2", r2)]
        .into_iter()
        .map(|(name, r)| {
            let deviation = symplectic_deviation(r).unwrap_or(f64::INFINITY);
            FactorCheck { factor: name.into(), deviation, symplectic: deviation <= SYMPLECTIC_TOL }
        })
        .collect()
}

/// Channel on the first `m_keep` modes obtained from `L = R₁TR₂` with the
/// environment in vacuum: `X = L₁₁`, `Y = L₁₂L₁₂ᵀ`.
pub fn dilation_channel(r1: &RMatrix, t: &RMatrix, r2: &RMatrix, m_keep: usize) -> Result<GaussianPair> {
    if r1.shape() != t.shape() || t.shape() != r2.shape() {
        return Err(Error::DimensionMismatch { expected: r1.nrows(), found: if r1.shape() != t.shape() { t.nrows() } else { r2.nrows() } });
    }
    if let Some(bad) = check_factors(r1, t, r2).into_iter().find(|c| !c.symplectic) {
        return Err(Error::NotSymplectic { factor: bad.factor, deviation: bad.deviation });
    }
    let l = r1 * t * r2;
    let (x, l12) = dilation_blocks(&l, m_keep)?;
    let y = &l12 * l12.transpose();
    GaussianPair::new(x, y).map_err(|e| match e {
        Error::InvalidChannel { min_eigenvalue } => Error::InvalidDilation { min_eigenvalue },
        other => other,
    })
}

type PairGenerator = dyn Fn(f64) -> Result<GaussianPair> + Send + Sync;

/// `t ↦ (X_t, Y_t)` on a closed time interval.
#[derive(Clone)]
pub struct GaussianFamily {
    label: String,
    m: usize,
    t_min: f64,
    t_max: f64,
    generator: Arc<PairGenerator>,
}

impl std::fmt::Debug for GaussianFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaussianFamily")
            .field("label", &self.label)
            .field("m", &self.m)
            .field("t_domain", &(self.t_min, self.t_max))
            .finish()
    }
}

impl GaussianFamily {
    /// Checks the mode count and validity at evenly spaced points; generator errors pass through.
    pub fn new(
        label: impl Into<String>,
        m: usize,
        t_domain: (f64, f64),
        generator: impl Fn(f64) -> Result<GaussianPair> + Send + Sync + 'static,
    ) -> Result<Self> {
        let (t_min, t_max) = t_domain;
        if !(t_min < t_max) {
            return Err(Error::InvalidArgument(format!("empty time domain [{t_min}, {t_max}]")));
        }
        let fam = Self { label: label.into(), m, t_min, t_max, generator: Arc::new(generator) };
        for i in 0..VALIDATION_POINTS {
            let t = t_min + (t_max - t_min) * i as f64 / (VALIDATION_POINTS - 1) as f64;
            let pair = fam.at(t)?;
            if pair.modes() != m {
                return Err(Error::InvalidFamily { t, reason: format!("{} modes, expected {m}", pair.modes()) });
            }
        }
        Ok(fam)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn modes(&self) -> usize {
        self.m
    }

    pub fn t_domain(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn at(&self, t: f64) -> Result<GaussianPair> {
        (self.generator)(t)
    }

    pub fn default_step(&self) -> f64 {
        1e-4 * (self.t_max - self.t_min)
    }

    fn det_at(&self, t: f64) -> Result<f64> {
        let det = self.at(t)?.det_x();
        if det.abs() <= SINGULAR_DET {
            return Err(Error::SingularX { t, det });
        }
        Ok(det)
    }

    /// Central difference of `det X_t`.
    pub fn det_derivative(&self, t: f64, h: f64) -> Result<f64> {
        let slack = 1e-12 * (self.t_max - self.t_min);
        if t - h < self.t_min - slack || t + h > self.t_max + slack {
            return Err(Error::DomainExceeded { t, h, t_min: self.t_min, t_max: self.t_max });
        }
        Ok((self.det_at(t + h)? - self.det_at(t - h)?) / (2.0 * h))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DetRow {
    pub t: f64,
    pub det: f64,
    pub ddet: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DetScanReport {
    pub label: String,
    pub violation: bool,
    pub first_violation: Option<f64>,
    pub h: f64,
    pub tau_slope: f64,
    pub rows: Vec<DetRow>,
}

/// Flags every grid point where `d/dt det X_t > tau_slope`; any flag rules out P-divisibility.
pub fn det_criterion_scan(fam: &GaussianFamily, grid: &[f64], h: Option<f64>, tau_slope: f64) -> Result<DetScanReport> {
    let h = h.unwrap_or_else(|| fam.default_step());
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h must be positive, got {h}")));
    }
    let rows: Vec<DetRow> = grid
        .par_iter()
        .map(|&t| {
            let det = fam.det_at(t)?;
            let ddet = fam.det_derivative(t, h)?;
            Ok(DetRow { t, det, ddet, violation: ddet > tau_slope })
        })
        .collect::<Result<_>>()?;
    let first_violation = rows.iter().find(|r| r.violation).map(|r| r.t);
    Ok(DetScanReport {
        label: fam.label.clone(),
        violation: first_violation.is_some(),
        first_violation,
        h,
        tau_slope,
        rows,
    })
}

pub fn default_det_scan(fam: &GaussianFamily, grid: &[f64]) -> Result<DetScanReport> {
    det_criterion_scan(fam, grid, None, TAU_SLOPE)
}

/// Bisects on the sign of `d/dt det X_t`; the endpoints must bracket a sign change.
pub fn derivative_sign_change(fam: &GaussianFamily, lo: f64, hi: f64, h: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = fam.det_derivative(lo, h)?;
    let f_hi = fam.det_derivative(hi, h)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidArgument(format!(
            "derivative has the same sign at {lo} ({f_lo:.3e}) and {hi} ({f_hi:.3e})"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = fam.det_derivative(mid, h)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `‖Φ_t(W(φ))‖₁ = φ(0,0) · det X_t` for a positive Weyl-type input.
pub fn weyl_trace_norm(fam: &GaussianFamily, t: f64, phi0: f64) -> Result<f64> {
    if !(phi0 > 0.0) {
        return Err(Error::InvalidArgument(format!("kernel value at the origin must be positive, got {phi0}")));
    }
    Ok(phi0 * fam.at(t)?.det_x())
}

/// Ancilla-extended form: `det X_t · Σ φ_i(0,0) tr B_i` over `(φ_i(0,0), tr B_i)` pairs.
pub fn weyl_trace_norm_extended(fam: &GaussianFamily, t: f64, terms: &[(f64, f64)]) -> Result<f64> {
    if let Some(&(phi, tr)) = terms.iter().find(|(phi, tr)| !(*phi > 0.0) || *tr < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need positive kernel values and nonnegative traces, got ({phi}, {tr})"
        )));
    }
    let weight: f64 = terms.iter().map(|(phi, tr)| phi * tr).sum();
    Ok(weight * fam.at(t)?.det_x())
}

fn block_factor(x: &RMatrix, y: &RMatrix) -> RMatrix {
    let m = x.nrows();
    let mut r = RMatrix::zeros(2 * m, 2 * m);
    r.view_mut((0, 0), (m, m)).copy_from(x);
    r.view_mut((0, m), (m, m)).copy_from(y);
    r.view_mut((m, 0), (m, m)).copy_from(&(-y));
    r.view_mut((m, m), (m, m)).copy_from(x);
    r
}

/// Factors `(R₁, T, R₂)` of the one-mode-from-two dilation, `T = diag(1, t, 1, 1/t)`.
///
/// The printed `R₁` has a singular `X₁ + iY₁`; `repaired` flips the sign of
/// `Y₁[1,0]`, which makes it a beam splitter without touching the kept rows.
pub fn two_mode_factors(t: f64, repaired: bool) -> (RMatrix, RMatrix, RMatrix) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x1 = RMatrix::identity(2, 2).scale(s);
    let lower = if repaired { 1.0 } else { -1.0 };
    let y1 = RMatrix::from_row_slice(2, 2, &[0.0, s, lower * s, 0.0]);
    let x2 = RMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
    let y2 = RMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
    (block_factor(&x1, &y1), squeezer(&[1.0, t]), block_factor(&x2, &y2))
}

/// Factors `(R₁, T, R₂)` of the two-mode-from-three dilation, `T = diag(1, t, t², 1, 1/t, 1/t²)`.
pub fn three_mode_factors(t: f64) -> (RMatrix, RMatrix, RMatrix) {
    let r3 = 3f64.sqrt();
    let h = r3 / 2.0;
    let x1 = RMatrix::from_row_slice(3, 3, &[1.0, 1.0, 1.0, 1.0, -h, -h, 1.0, -h, -h]).scale(1.0 / r3);
    let y1 = RMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.5, -0.5, 0.0, -0.5, 0.5]).scale(1.0 / r3);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x2 = RMatrix::from_row_slice(3, 3, &[s, s, 0.0, s, s, 0.0, 0.0, 0.0, 1.0]);
    let y2 = RMatrix::from_row_slice(3, 3, &[s, -s, 0.0, -s, s, 0.0, 0.0, 0.0, 0.0]);
    (block_factor(&x1, &y1), squeezer(&[1.0, t, t * t]), block_factor(&x2, &y2))
}

/// `det X_t = (1+t)(1+1/t)/4` for the repaired two-mode dilation.
pub fn two_mode_det(t: f64) -> f64 {
    (1.0 + t) * (1.0 + 1.0 / t) / 4.0
}

pub const PRESETS: [&str; 5] = ["example-4.1", "example-4.1-printed", "example-4.2", "attenuator", "amplifier"];

/// Default grid window for each preset.
pub fn preset_domain(name: &str) -> Option<(f64, f64)> {
    match name {
        "example-4.1" | "example-4.1-printed" | "example-4.2" => Some((0.05, 10.0)),
        "attenuator" | "amplifier" => Some((0.0, 5.0)),
        _ => None,
    }
}

/// Dilation factors at `t` for the dilation presets.
pub fn preset_factors(name: &str, t: f64) -> Option<(RMatrix, RMatrix, RMatrix)> {
    match name {
        "example-4.1" => Some(two_mode_factors(t, true)),
        "example-4.1-printed" => Some(two_mode_factors(t, false)),
        "example-4.2" => Some(three_mode_factors(t)),
        _ => None,
    }
}

pub fn preset(name: &str) -> Result<GaussianFamily> {
    let domain = preset_domain(name).ok_or_else(|| {
        Error::InvalidArgument(format!("unknown Gaussian preset {name:?}; expected one of {}", PRESETS.join(", ")))
    })?;
    match name {
        "attenuator" => GaussianFamily::new(name, 1, domain, |t| GaussianPair::attenuator(1, (-t).exp())),
        "amplifier" => GaussianFamily::new(name, 1, domain, |t| GaussianPair::amplifier(1, t.exp())),
        _ => {
            let keep = if name == "example-4.2" { 2 } else { 1 };
            let key = name.to_string();
            GaussianFamily::new(name, keep, domain, move |t| {
                let (r1, tm, r2) = preset_factors(&key, t).expect("dilation preset");
                dilation_channel(&r1, &tm, &r2, keep)
            })
        }
    }
}
