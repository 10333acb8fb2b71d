//! Time-parameterised families and trace-norm monotonicity scans.
//!
//! A family is P-divisible when `t ↦ ‖Λ_t(X)‖₁` never increases for Hermitian `X`,
//! and CP-divisible when the same holds for `(I ⊗ Λ_t)(Y)`. The scans below look
//! for a witness with a positive central-difference slope. Finding none is only
//! evidence: the converse needs surjectivity, for which invertibility of the
//! truncated superoperator is used as a stand-in.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::channel::{self, Channel, ContractivityOptions, ContractivityReport, DEFAULT_RCOND};
use crate::error::{Error, Result};
use crate::operator::{self, CMatrix, CVector, HermitianOperator, C64};
use crate::random;

/// Default slope threshold separating growth from finite-difference noise.
pub const TAU_SLOPE: f64 = 1e-6;

/// Residual tolerance for kernel vectors, relative to `max(1, ‖Λ_t‖_F)`.
pub const KERNEL_TOL: f64 = 1e-8;

/// Grid points used to validate a family on construction.
const VALIDATION_POINTS: usize = 11;

const EVIDENCE_NOTE: &str = "no witness found on the grid; this is evidence, not proof \
(invertibility at truncation stands in for surjectivity)";

pub type Generator = Arc<dyn Fn(f64) -> Channel + Send + Sync>;

/// `t ↦ Λ_t` on a closed interval, validated as CP and TP on a grid.
#[derive(Clone)]
pub struct DynamicalFamily {
    label: String,
    dim: usize,
    t_min: f64,
    t_max: f64,
    generator: Generator,
}

impl fmt::Debug for DynamicalFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicalFamily")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("t_domain", &(self.t_min, self.t_max))
            .finish()
    }
}

impl DynamicalFamily {
    pub fn new<F>(label: impl Into<String>, dim: usize, t_domain: (f64, f64), generator: F) -> Result<Self>
    where
        F: Fn(f64) -> Channel + Send + Sync + 'static,
    {
        let (t_min, t_max) = t_domain;
        if !(t_min < t_max) {
            return Err(Error::InvalidArgument(format!("empty time domain [{t_min}, {t_max}]")));
        }
        let fam = Self { label: label.into(), dim, t_min, t_max, generator: Arc::new(generator) };
        for i in 0..VALIDATION_POINTS {
            let t = t_min + (t_max - t_min) * i as f64 / (VALIDATION_POINTS - 1) as f64;
            fam.validate_at(t)?;
        }
        Ok(fam)
    }

    fn validate_at(&self, t: f64) -> Result<()> {
        let ch = self.at(t);
        if ch.dim_in() != self.dim || ch.dim_out() != self.dim {
            return Err(Error::InvalidFamily { t, reason: format!("channel dimension {} != {}", ch.dim_in(), self.dim) });
        }
        if !ch.is_trace_preserving() {
            return Err(Error::InvalidFamily {
                t,
                reason: format!("not trace preserving (error {:.3e})", ch.trace_preservation_error()),
            });
        }
        let choi = ch.choi().map_err(|e| Error::InvalidFamily { t, reason: e.to_string() })?;
        let tol = choi.operator().spectral_tolerance().max(operator::SPECTRAL_TOL);
        let lam = choi.min_eigenvalue();
        if lam < -tol {
            return Err(Error::InvalidFamily { t, reason: format!("not completely positive (Choi eigenvalue {lam:.3e})") });
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_domain(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn at(&self, t: f64) -> Channel {
        (self.generator)(t)
    }

    /// Default step `1e-4 · (t_max − t_min)`.
    pub fn default_step(&self) -> f64 {
        1e-4 * (self.t_max - self.t_min)
    }

    fn check_stencil(&self, t: f64, h: f64) -> Result<()> {
        let slack = 1e-12 * (self.t_max - self.t_min);
        if t - h < self.t_min - slack || t + h > self.t_max + slack {
            return Err(Error::DomainExceeded { t, h, t_min: self.t_min, t_max: self.t_max });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    NotPDivisible,
    NotCpDivisible,
    PEvidence,
    CpEvidence,
    DivisibleKernelOk,
    NotDivisible,
}

impl Verdict {
    /// Verdicts that certify a failure of divisibility.
    pub fn is_violation(self) -> bool {
        matches!(self, Verdict::NotPDivisible | Verdict::NotCpDivisible | Verdict::NotDivisible)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotPDivisible => "NOT_P_DIVISIBLE",
            Verdict::NotCpDivisible => "NOT_CP_DIVISIBLE",
            Verdict::PEvidence => "P_EVIDENCE",
            Verdict::CpEvidence => "CP_EVIDENCE",
            Verdict::DivisibleKernelOk => "DIVISIBLE_KERNEL_OK",
            Verdict::NotDivisible => "NOT_DIVISIBLE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    /// Central-difference step; `None` means [`DynamicalFamily::default_step`].
    pub h: Option<f64>,
    pub tau_slope: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { h: None, tau_slope: TAU_SLOPE }
    }
}

/// One (grid point, witness) evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub witness_id: usize,
    pub trace_norm: f64,
    pub derivative: f64,
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub t: f64,
    pub witness_id: usize,
    pub operator: HermitianOperator,
    pub derivative: f64,
}

#[derive(Clone, Debug)]
pub struct DivisibilityReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub grid: Vec<f64>,
    pub h: f64,
    pub tau_slope: f64,
    pub rows: Vec<ScanRow>,
    /// Largest derivative over all rows.
    pub max_derivative: f64,
    pub note: String,
}

impl DivisibilityReport {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict,
            "witness_t": self.witness.as_ref().map(|w| w.t),
            "derivative": self.witness.as_ref().map_or(self.max_derivative, |w| w.derivative),
            "witness_matrix": self.witness.as_ref().map(|w| matrix_rows(w.operator.matrix())),
            "witness_id": self.witness.as_ref().map(|w| w.witness_id),
            "max_derivative": self.max_derivative,
            "h": self.h,
            "tau_slope": self.tau_slope,
            "grid": self.grid,
            "note": self.note,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_value())?)
    }
}

/// Matrix as rows of `[re, im]` pairs.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Level {
    Positive,
    CompletelyPositive,
}

fn evaluate(ch: &Channel, x: &HermitianOperator, level: Level) -> Result<f64> {
    let y = match level {
        Level::Positive => ch.apply(x)?,
        Level::CompletelyPositive => ch.apply_extended(x)?,
    };
    Ok(y.trace_norm())
}

/// `‖Λ_t(X)‖₁` (or `‖(I ⊗ Λ_t)(X)‖₁` when `extended`) at a single time.
pub fn witness_norm(fam: &DynamicalFamily, x: &HermitianOperator, t: f64, extended: bool) -> Result<f64> {
    let level = if extended { Level::CompletelyPositive } else { Level::Positive };
    evaluate(&fam.at(t), x, level)
}

/// Central difference of the witness norm at `t`.
pub fn witness_derivative(fam: &DynamicalFamily, x: &HermitianOperator, t: f64, h: f64, extended: bool) -> Result<f64> {
    fam.check_stencil(t, h)?;
    let plus = witness_norm(fam, x, t + h, extended)?;
    let minus = witness_norm(fam, x, t - h, extended)?;
    Ok((plus - minus) / (2.0 * h))
}

fn scan(
    fam: &DynamicalFamily,
    witnesses: &[HermitianOperator],
    grid: &[f64],
    opts: &ScanOptions,
    level: Level,
) -> Result<DivisibilityReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if witnesses.is_empty() {
        return Err(Error::InvalidArgument("no witnesses supplied".into()));
    }
    let h = opts.h.unwrap_or_else(|| fam.default_step());
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h must be positive, got {h}")));
    }
    let expected = match level {
        Level::Positive => fam.dim(),
        Level::CompletelyPositive => fam.dim() * fam.dim(),
    };
    if let Some(w) = witnesses.iter().find(|w| w.dim() != expected) {
        return Err(Error::DimensionMismatch { expected, found: w.dim() });
    }
    for &t in grid {
        fam.check_stencil(t, h)?;
    }

    let per_point: Vec<Vec<ScanRow>> = grid
        .par_iter()
        .map(|&t| -> Result<Vec<ScanRow>> {
            let (lo, mid, hi) = (fam.at(t - h), fam.at(t), fam.at(t + h));
            witnesses
                .iter()
                .enumerate()
                .map(|(id, x)| {
                    let norm_hi = evaluate(&hi, x, level)?;
                    let norm_lo = evaluate(&lo, x, level)?;
                    Ok(ScanRow {
                        t,
                        witness_id: id,
                        trace_norm: evaluate(&mid, x, level)?,
                        derivative: (norm_hi - norm_lo) / (2.0 * h),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ScanRow> = per_point.into_iter().flatten().collect();

    let best = rows
        .iter()
        .max_by(|a, b| a.derivative.total_cmp(&b.derivative))
        .expect("nonempty scan");
    let max_derivative = best.derivative;
    let (verdict, witness, note) = if max_derivative > opts.tau_slope {
        let verdict = match level {
            Level::Positive => Verdict::NotPDivisible,
            Level::CompletelyPositive => Verdict::NotCpDivisible,
        };
        let witness = Witness {
            t: best.t,
            witness_id: best.witness_id,
            operator: witnesses[best.witness_id].clone(),
            derivative: best.derivative,
        };
        (verdict, Some(witness), "trace norm of the witness increases".to_string())
    } else {
        let verdict = match level {
            Level::Positive => Verdict::PEvidence,
            Level::CompletelyPositive => Verdict::CpEvidence,
        };
        (verdict, None, EVIDENCE_NOTE.to_string())
    };
    Ok(DivisibilityReport {
        verdict,
        witness,
        grid: grid.to_vec(),
        h,
        tau_slope: opts.tau_slope,
        rows,
        max_derivative,
        note,
    })
}

/// Searches for `X` and `t` with `d/dt ‖Λ_t(X)‖₁ > τ_slope`.
pub fn p_divisibility_scan(
    fam: &DynamicalFamily,
    witnesses: &[HermitianOperator],
    grid: &[f64],
    opts: &ScanOptions,
) -> Result<DivisibilityReport> {
    scan(fam, witnesses, grid, opts, Level::Positive)
}

/// Searches for `Y` on `H ⊗ H` and `t` with `d/dt ‖(I ⊗ Λ_t)(Y)‖₁ > τ_slope`.
pub fn cp_divisibility_scan(
    fam: &DynamicalFamily,
    witnesses: &[HermitianOperator],
    grid: &[f64],
    opts: &ScanOptions,
) -> Result<DivisibilityReport> {
    scan(fam, witnesses, grid, opts, Level::CompletelyPositive)
}

/// Evenly spaced grid including both ends.
pub fn linspace(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => (0..points)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// All `E_ii − E_jj`, 20 random projector differences and 20 random Hermitians.
pub fn default_witnesses(dim: usize, seed: u64) -> Vec<HermitianOperator> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push(HermitianOperator::diagonal_difference(dim, i, j));
        }
    }
    let mut rng = random::rng(seed);
    for _ in 0..20 {
        out.push(random::projector_difference(&mut rng, dim));
    }
    for _ in 0..20 {
        out.push(random::hermitian(&mut rng, dim));
    }
    out
}

/// Witnesses on `H ⊗ H`: the default library on `dim²` plus the difference of
/// the two maximally correlated projectors `ψψ† − φφ†`, `ψ = Σ|ii⟩`, `φ = Σ|i,i+1⟩`.
pub fn default_cp_witnesses(dim: usize, seed: u64) -> Vec<HermitianOperator> {
    let big = dim * dim;
    let mut psi = CVector::zeros(big);
    let mut phi = CVector::zeros(big);
    for i in 0..dim {
        psi[i * dim + i] = C64::new(1.0, 0.0);
        phi[i * dim + (i + 1) % dim] = C64::new(1.0, 0.0);
    }
    let mut out = vec![&HermitianOperator::projector(&psi) - &HermitianOperator::projector(&phi)];
    out.extend(default_witnesses(big, seed));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelInclusion {
    pub included: bool,
    /// Dimension of the numerical kernel of `Λ_s`.
    pub kernel_dim: usize,
    /// Largest `‖Λ_t v‖` over unit kernel vectors `v` of `Λ_s`.
    pub max_residual: f64,
    pub tolerance: f64,
    pub rcond: f64,
}

/// Singular values and right singular vectors, with `σ` sorted descending.
fn svd_kernel(m: &CMatrix, rcond: f64) -> (Vec<f64>, Vec<CVector>) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().cloned().fold(0.0, f64::max);
    let n = m.ncols();
    let mut kernel = Vec::new();
    for (r, &s) in sigma.iter().enumerate() {
        if s <= rcond * sigma_max {
            kernel.push(v_t.row(r).adjoint());
        }
    }
    // A wide matrix has extra kernel directions beyond the returned rows.
    if v_t.nrows() < n {
        return (sigma, complete_kernel(&v_t, kernel));
    }
    (sigma, kernel)
}

fn complete_kernel(v_t: &CMatrix, mut kernel: Vec<CVector>) -> Vec<CVector> {
    let n = v_t.ncols();
    let proj = v_t.adjoint() * v_t;
    let complement = CMatrix::identity(n, n) - proj;
    let h = HermitianOperator::new(complement).expect("projector is Hermitian");
    let sd = h.spectral();
    for (j, &l) in sd.eigenvalues.iter().enumerate() {
        if l > 0.5 {
            kernel.push(sd.eigenvectors.column(j).into_owned());
        }
    }
    kernel
}

/// Numerical rank of a matrix at relative threshold `rcond`.
pub fn numerical_rank(m: &CMatrix, rcond: f64) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rcond * max).count()
}

/// Tests `Ker Λ_s ⊆ Ker Λ_t`, the condition for some linear `Φ` with `Λ_t = Φ Λ_s`.
pub fn kernel_inclusion(fam: &DynamicalFamily, s: f64, t: f64, rcond: f64) -> Result<KernelInclusion> {
    if !(s < t) {
        return Err(Error::InvalidArgument(format!("kernel inclusion needs s < t, got s={s}, t={t}")));
    }
    let (t_min, t_max) = fam.t_domain();
    for x in [s, t] {
        if x < t_min || x > t_max {
            return Err(Error::DomainExceeded { t: x, h: 0.0, t_min, t_max });
        }
    }
    let lam_s = fam.at(s);
    let lam_t = fam.at(t);
    let (_, kernel) = svd_kernel(lam_s.superoperator(), rcond);
    let tolerance = KERNEL_TOL * lam_t.superoperator().norm().max(1.0);
    let max_residual = kernel
        .iter()
        .map(|v| (lam_t.superoperator() * v).norm())
        .fold(0.0, f64::max);
    Ok(KernelInclusion { included: max_residual <= tolerance, kernel_dim: kernel.len(), max_residual, tolerance, rcond })
}

/// [`kernel_inclusion`] at the default `rcond`.
pub fn kernel_inclusion_divisible(fam: &DynamicalFamily, s: f64, t: f64) -> Result<bool> {
    Ok(kernel_inclusion(fam, s, t, DEFAULT_RCOND)?.included)
}

/// `Φ_{t,s} = Λ_t Λ_s⁻¹` with its positivity evidence and CP status.
#[derive(Clone, Debug)]
pub struct IntermediateMap {
    pub map: Channel,
    /// Contractivity sampling found no witness.
    pub positive_evidence: bool,
    pub cp: bool,
    pub min_choi_eigenvalue: f64,
    pub trace_preservation_error: f64,
    pub contractivity: ContractivityReport,
}

impl IntermediateMap {
    pub fn to_json_value(&self, s: f64, t: f64) -> serde_json::Value {
        json!({
            "s": s,
            "t": t,
            "p_evidence": self.positive_evidence,
            "p_label": self.contractivity.label(),
            "cp": self.cp,
            "min_choi_eigenvalue": self.min_choi_eigenvalue,
            "trace_preservation_error": self.trace_preservation_error,
            "contractivity_witness": self.contractivity.witness.as_ref().map(|w| matrix_rows(w.matrix())),
            "candidates_tested": self.contractivity.candidates_tested,
            "note": EVIDENCE_NOTE,
        })
    }
}

/// Tolerance for the trace-preservation check on `Φ_{t,s}`.
pub const INTERMEDIATE_TP_TOL: f64 = 1e-8;

pub fn intermediate_map(fam: &DynamicalFamily, s: f64, t: f64, rcond: f64) -> Result<IntermediateMap> {
    intermediate_map_with(fam, s, t, rcond, &ContractivityOptions::default())
}

pub fn intermediate_map_with(
    fam: &DynamicalFamily,
    s: f64,
    t: f64,
    rcond: f64,
    opts: &ContractivityOptions,
) -> Result<IntermediateMap> {
    if s > t {
        return Err(Error::InvalidArgument(format!("intermediate map needs s <= t, got s={s}, t={t}")));
    }
    let lam_s = fam.at(s);
    let lam_t = fam.at(t);
    let map = lam_t.compose(&lam_s.inverse(rcond)?)?;
    let tp_err = map.trace_preservation_error();
    if tp_err > INTERMEDIATE_TP_TOL {
        return Err(Error::HypothesisViolated(format!("intermediate map not trace preserving (error {tp_err:.3e})")));
    }
    let min_choi_eigenvalue = map.choi().map_or(f64::NEG_INFINITY, |c| c.min_eigenvalue());
    let cp_tol = operator::SPECTRAL_TOL * operator::max_abs(map.superoperator()).max(1.0);
    let cp = min_choi_eigenvalue >= -cp_tol;
    let contractivity = channel::positivity_by_contractivity_with(
        &map,
        &ContractivityOptions { hypothesis_tol: INTERMEDIATE_TP_TOL, ..opts.clone() },
    )?;
    Ok(IntermediateMap {
        positive_evidence: contractivity.verdict,
        cp,
        min_choi_eigenvalue,
        trace_preservation_error: tp_err,
        contractivity,
        map,
    })
}
