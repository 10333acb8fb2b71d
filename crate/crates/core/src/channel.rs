//! Linear maps on operators, stored as superoperator matrices.
//!
//! Vectorisation is column stacking, so `vec(X)[i + j·d] = X[i, j]` and the map
//! `X ↦ A X B` has superoperator `Bᵀ ⊗ A`. A Kraus operator `K` contributes
//! `K̄ ⊗ K`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SingularValueReport};
use crate::operator::{self, CMatrix, CVector, HermitianOperator, C64};
use crate::random;

/// Tolerance for the cached trace-preservation and hermiticity flags,
/// scaled by `max(1, max|superoperator entry|)`.
pub const FLAG_TOL: f64 = 1e-10;

/// Default relative condition threshold for [`Channel::inverse`].
pub const DEFAULT_RCOND: f64 = 1e-10;

#[inline]
fn vec_index(i: usize, j: usize, rows: usize) -> usize {
    i + j * rows
}

#[derive(Clone, Debug)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    superop: CMatrix,
    kraus: Option<Vec<CMatrix>>,
    trace_preserving: bool,
    hermiticity_preserving: bool,
}

impl Channel {
    fn assemble(dim_in: usize, dim_out: usize, superop: CMatrix, kraus: Option<Vec<CMatrix>>) -> Self {
        let mut ch = Self {
            dim_in,
            dim_out,
            superop,
            kraus,
            trace_preserving: false,
            hermiticity_preserving: false,
        };
        let scale = ch.flag_scale();
        ch.trace_preserving = ch.trace_preservation_error() <= FLAG_TOL * scale;
        ch.hermiticity_preserving = ch.hermiticity_error() <= FLAG_TOL * scale;
        ch
    }

    fn flag_scale(&self) -> f64 {
        operator::max_abs(&self.superop).max(1.0)
    }

    pub fn from_superoperator(superop: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidArgument("channel dimensions must be positive".into()));
        }
        if superop.ncols() != dim_in * dim_in {
            return Err(Error::DimensionMismatch { expected: dim_in * dim_in, found: superop.ncols() });
        }
        if superop.nrows() != dim_out * dim_out {
            return Err(Error::DimensionMismatch { expected: dim_out * dim_out, found: superop.nrows() });
        }
        Ok(Self::assemble(dim_in, dim_out, superop, None))
    }

    /// `X ↦ Σ K X K†`.
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus list".into()))?;
        let (dim_out, dim_in) = first.shape();
        let mut superop = CMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for k in &kraus {
            if k.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch { expected: dim_out * dim_in, found: k.nrows() * k.ncols() });
            }
            superop += k.conjugate().kronecker(k);
        }
        Ok(Self::assemble(dim_in, dim_out, superop, Some(kraus)))
    }

    /// Builds the superoperator column by column from the images `Λ(E_ij)`.
    pub fn from_unit_images<F>(dim_in: usize, dim_out: usize, image: F) -> Self
    where
        F: Fn(usize, usize) -> CMatrix,
    {
        let mut superop = CMatrix::zeros(dim_out * dim_out, dim_in * dim_in);
        for j in 0..dim_in {
            for i in 0..dim_in {
                let img = image(i, j);
                debug_assert_eq!(img.shape(), (dim_out, dim_out));
                superop
                    .column_mut(vec_index(i, j, dim_in))
                    .copy_from_slice(img.as_slice());
            }
        }
        Self::assemble(dim_in, dim_out, superop, None)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(vec![CMatrix::identity(dim, dim)]).expect("identity Kraus operator")
    }

    /// `Ad_U : X ↦ U X U†`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
        }
        Self::from_kraus(vec![u])
    }

    /// The transpose map, positive but not completely positive.
    pub fn transpose(dim: usize) -> Self {
        Self::from_unit_images(dim, dim, |i, j| operator::matrix_unit(dim, dim, j, i))
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn is_hermiticity_preserving(&self) -> bool {
        self.hermiticity_preserving
    }

    /// `Λ(E_ij)`.
    pub fn unit_image(&self, i: usize, j: usize) -> CMatrix {
        let col = self.superop.column(vec_index(i, j, self.dim_in));
        CMatrix::from_column_slice(self.dim_out, self.dim_out, col.as_slice())
    }

    /// `max_ij |tr Λ(E_ij) − δ_ij|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut err = 0.0_f64;
        for j in 0..self.dim_in {
            for i in 0..self.dim_in {
                let col = self.superop.column(vec_index(i, j, self.dim_in));
                let tr: C64 = (0..self.dim_out).map(|k| col[vec_index(k, k, self.dim_out)]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((tr - target).norm());
            }
        }
        err
    }

    /// `max |Λ(E_ji) − Λ(E_ij)†|`; zero exactly when Hermitian inputs map to Hermitian outputs.
    pub fn hermiticity_error(&self) -> f64 {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut err = 0.0_f64;
        for j in 0..din {
            for i in 0..=j {
                let a = self.superop.column(vec_index(i, j, din));
                let b = self.superop.column(vec_index(j, i, din));
                for l in 0..dout {
                    for k in 0..dout {
                        let d = b[vec_index(k, l, dout)] - a[vec_index(l, k, dout)].conj();
                        err = err.max(d.norm());
                    }
                }
            }
        }
        err
    }

    /// `Λ(X)` for an arbitrary square matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: x.nrows() });
        }
        let v = DVector::from_column_slice(x.as_slice());
        let y = &self.superop * v;
        Ok(CMatrix::from_column_slice(self.dim_out, self.dim_out, y.as_slice()))
    }

    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        let y = self.apply_matrix(x.matrix())?;
        hermitian_image(y)
    }

    /// `Σ K X K†` using the stored Kraus list, if any.
    pub fn apply_kraus(&self, x: &CMatrix) -> Option<Result<CMatrix>> {
        let kraus = self.kraus.as_ref()?;
        if x.shape() != (self.dim_in, self.dim_in) {
            return Some(Err(Error::DimensionMismatch { expected: self.dim_in, found: x.nrows() }));
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in kraus {
            out += k * x * k.adjoint();
        }
        Some(Ok(out))
    }

    /// `(I_a ⊗ Λ)(Y)` applied block by block; the ancilla dimension is `dim(Y) / dim_in`.
    pub fn apply_extended(&self, y: &HermitianOperator) -> Result<HermitianOperator> {
        let din = self.dim_in;
        let anc = y.dim() / din;
        if anc * din != y.dim() || anc == 0 {
            return Err(Error::DimensionMismatch { expected: din, found: y.dim() });
        }
        let dout = self.dim_out;
        let ym = y.matrix();
        let mut out = CMatrix::zeros(anc * dout, anc * dout);
        for bj in 0..anc {
            for bi in 0..anc {
                let block = ym.view((bi * din, bj * din), (din, din)).into_owned();
                if block.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    continue;
                }
                let img = self.apply_matrix(&block)?;
                out.view_mut((bi * dout, bj * dout), (dout, dout)).copy_from(&img);
            }
        }
        hermitian_image(out)
    }

    /// `self ⊗ other` acting on the tensor product space.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let (a_in, b_in) = (self.dim_in, other.dim_in);
        let dim_in = a_in * b_in;
        let dim_out = self.dim_out * other.dim_out;
        let images_a: Vec<CMatrix> = (0..a_in * a_in)
            .map(|c| self.unit_image(c % a_in, c / a_in))
            .collect();
        let images_b: Vec<CMatrix> = (0..b_in * b_in)
            .map(|c| other.unit_image(c % b_in, c / b_in))
            .collect();
        let mut ch = Self::from_unit_images(dim_in, dim_out, |i, j| {
            let (a, b) = (i / b_in, i % b_in);
            let (ap, bp) = (j / b_in, j % b_in);
            images_a[vec_index(a, ap, a_in)].kronecker(&images_b[vec_index(b, bp, b_in)])
        });
        if let (Some(ka), Some(kb)) = (&self.kraus, &other.kraus) {
            ch.kraus = Some(ka.iter().flat_map(|x| kb.iter().map(move |y| x.kronecker(y))).collect());
        }
        ch
    }

    /// `I_ancilla ⊗ self` as an explicit superoperator.
    pub fn extend_with_identity(&self, ancilla: usize) -> Channel {
        Channel::identity(ancilla).tensor(self)
    }

    /// `Σ c_i Λ_i` over channels of equal shape.
    pub fn linear_combination(terms: &[(f64, &Channel)]) -> Result<Channel> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let mut superop = CMatrix::zeros(first.superop.nrows(), first.superop.ncols());
        for (c, ch) in terms {
            if ch.superop.shape() != superop.shape() {
                return Err(Error::DimensionMismatch { expected: first.dim_in, found: ch.dim_in });
            }
            superop += ch.superop.scale(*c);
        }
        Ok(Self::assemble(first.dim_in, first.dim_out, superop, None))
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        if inner.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: inner.dim_out });
        }
        let superop = &self.superop * &inner.superop;
        let kraus = match (&self.kraus, &inner.kraus) {
            (Some(outer), Some(first)) => {
                Some(outer.iter().flat_map(|a| first.iter().map(move |b| a * b)).collect())
            }
            _ => None,
        };
        Ok(Self::assemble(inner.dim_in, self.dim_out, superop, kraus))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.superop.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Exact superoperator inverse, refused when `σ_min < rcond · σ_max`.
    pub fn inverse(&self, rcond: f64) -> Result<Channel> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: self.dim_out });
        }
        let sv = self.singular_values();
        let sigma_max = sv[0];
        let sigma_min = *sv.last().expect("nonempty superoperator");
        if !(sigma_min >= rcond * sigma_max) || sigma_max == 0.0 {
            let numerical_rank = sv.iter().filter(|&&s| s > rcond * sigma_max).count();
            return Err(Error::SingularChannel(SingularValueReport {
                sigma_min,
                sigma_max,
                rcond,
                numerical_rank,
                size: sv.len(),
            }));
        }
        let inv = self.superop.clone().try_inverse().ok_or(Error::SingularChannel(SingularValueReport {
            sigma_min,
            sigma_max,
            rcond,
            numerical_rank: sv.len(),
            size: sv.len(),
        }))?;
        Ok(Self::assemble(self.dim_in, self.dim_out, inv, None))
    }

    /// `Σ_ij E_ij ⊗ Λ(E_ij)` for any shape; not necessarily Hermitian.
    fn choi_raw(&self) -> CMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let mut c = CMatrix::zeros(din * dout, din * dout);
        for j in 0..din {
            for i in 0..din {
                let img = self.unit_image(i, j);
                c.view_mut((i * dout, j * dout), (dout, dout)).copy_from(&img);
            }
        }
        c
    }

    /// Choi matrix with respect to the unnormalised vector `Σ_i |ii⟩`.
    pub fn choi(&self) -> Result<ChoiMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: self.dim_out });
        }
        if !self.hermiticity_preserving {
            return Err(Error::NonHermitianInput { deviation: self.hermiticity_error() });
        }
        Ok(ChoiMatrix {
            op: HermitianOperator::symmetrised(self.choi_raw()),
            dim_in: self.dim_in,
            dim_out: self.dim_out,
        })
    }

    /// `λ_min(C_Λ) ≥ −tol`.
    pub fn is_cp(&self, tol: f64) -> bool {
        if !self.hermiticity_preserving {
            return false;
        }
        HermitianOperator::symmetrised(self.choi_raw()).min_eigenvalue() >= -tol
    }

    /// Largest absolute difference between superoperator entries.
    pub fn distance(&self, other: &Channel) -> f64 {
        if self.superop.shape() != other.superop.shape() {
            return f64::INFINITY;
        }
        operator::max_abs_diff(&self.superop, &other.superop)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ChannelFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Channel> {
        let file: ChannelFile = serde_json::from_str(s)?;
        file.into_channel()
    }
}

/// Accepts a map output as Hermitian up to rounding relative to its size.
pub(crate) fn hermitian_image(m: CMatrix) -> Result<HermitianOperator> {
    let deviation = operator::hermiticity_deviation(&m);
    if deviation > operator::HERMITICITY_TOL * operator::max_abs(&m).max(1.0) {
        return Err(Error::NonHermitianInput { deviation });
    }
    Ok(HermitianOperator::symmetrised(m))
}

/// Choi matrix of a Hermiticity-preserving square channel.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    op: HermitianOperator,
    dim_in: usize,
    dim_out: usize,
}

impl ChoiMatrix {
    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectrum(&self) -> Vec<f64> {
        self.op.eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.op.min_eigenvalue()
    }

    /// Trace over the output factor; the identity for trace-preserving maps.
    pub fn output_partial_trace(&self) -> CMatrix {
        let m = self.op.matrix();
        CMatrix::from_fn(self.dim_in, self.dim_in, |i, j| {
            (0..self.dim_out).map(|k| m[(i * self.dim_out + k, j * self.dim_out + k)]).sum()
        })
    }
}

/// Evidence-only test of positivity via trace-norm contractivity.
#[derive(Clone, Debug)]
pub struct ContractivityOptions {
    /// Number of random candidates after the deterministic sweep.
    pub samples: usize,
    pub seed: u64,
    /// A candidate is a witness when `‖Λ(X)‖₁ − ‖X‖₁ > tol · max(1, ‖X‖₁)`.
    pub tol: f64,
    /// Tolerance for the trace-preserving and Hermiticity-preserving hypotheses.
    pub hypothesis_tol: f64,
}

impl Default for ContractivityOptions {
    fn default() -> Self {
        Self { samples: 200, seed: 0, tol: 1e-9, hypothesis_tol: FLAG_TOL }
    }
}

#[derive(Clone, Debug)]
pub struct ContractivityReport {
    /// `true` means no witness was found; it is evidence of positivity, not a proof.
    pub verdict: bool,
    pub witness: Option<HermitianOperator>,
    pub witness_label: Option<String>,
    /// Largest `‖Λ(X)‖₁ − ‖X‖₁` seen.
    pub max_excess: f64,
    pub candidates_tested: usize,
}

impl ContractivityReport {
    pub fn label(&self) -> &'static str {
        if self.verdict {
            "no witness found"
        } else {
            "not positive"
        }
    }
}

/// Deterministic candidates: rank-one diagonal projectors, `E_ii − E_jj`, and
/// projector differences onto `(e_i ± e_j)/√2` and `(e_i ± i e_j)/√2`.
pub fn structured_candidates(dim: usize) -> Vec<(String, HermitianOperator)> {
    let mut out = Vec::new();
    let basis = |i: usize| {
        let mut v = CVector::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        v
    };
    for i in 0..dim {
        out.push((format!("P_{i}"), HermitianOperator::projector(&basis(i))));
    }
    for i in 0..dim {
        for j in i + 1..dim {
            out.push((format!("E_{i}{i}-E_{j}{j}"), HermitianOperator::diagonal_difference(dim, i, j)));
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            for (name, phase) in [("x", C64::new(1.0, 0.0)), ("y", C64::new(0.0, 1.0))] {
                let plus = (basis(i) + basis(j) * phase) * C64::new(s, 0.0);
                let minus = (basis(i) - basis(j) * phase) * C64::new(s, 0.0);
                out.push((
                    format!("{name}_{i}{j}"),
                    &HermitianOperator::projector(&plus) - &HermitianOperator::projector(&minus),
                ));
            }
        }
    }
    out
}

pub fn positivity_by_contractivity(ch: &Channel, samples: usize, seed: u64) -> Result<ContractivityReport> {
    positivity_by_contractivity_with(ch, &ContractivityOptions { samples, seed, ..Default::default() })
}

pub fn positivity_by_contractivity_with(ch: &Channel, opts: &ContractivityOptions) -> Result<ContractivityReport> {
    if !ch.is_square() {
        return Err(Error::HypothesisViolated("channel must act on a single space".into()));
    }
    let scale = ch.flag_scale();
    let tp_err = ch.trace_preservation_error();
    if tp_err > opts.hypothesis_tol * scale {
        return Err(Error::HypothesisViolated(format!("not trace preserving (error {tp_err:.3e})")));
    }
    let herm_err = ch.hermiticity_error();
    if herm_err > opts.hypothesis_tol * scale {
        return Err(Error::HypothesisViolated(format!(
            "not Hermiticity preserving (error {herm_err:.3e})"
        )));
    }

    let dim = ch.dim_in();
    let mut rng = random::rng(opts.seed);
    let structured = structured_candidates(dim);
    let random_candidates = (0..opts.samples).map(|s| {
        if s % 2 == 0 {
            (format!("rand_proj_{s}"), random::projector_difference(&mut rng, dim))
        } else {
            (format!("rand_herm_{s}"), random::hermitian(&mut rng, dim))
        }
    });

    let mut max_excess = f64::NEG_INFINITY;
    let mut tested = 0;
    for (label, x) in structured.into_iter().chain(random_candidates) {
        tested += 1;
        let norm_in = x.trace_norm();
        let norm_out = ch.apply(&x)?.trace_norm();
        let excess = norm_out - norm_in;
        max_excess = max_excess.max(excess);
        if excess > opts.tol * norm_in.max(1.0) {
            return Ok(ContractivityReport {
                verdict: false,
                witness: Some(x),
                witness_label: Some(label),
                max_excess,
                candidates_tested: tested,
            });
        }
    }
    Ok(ContractivityReport { verdict: true, witness: None, witness_label: None, max_excess, candidates_tested: tested })
}

type MatrixRows = Vec<Vec<[f64; 2]>>;

fn to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_rows(rows: &MatrixRows, nrows: usize, ncols: usize) -> Result<CMatrix> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Serialization(format!("expected a {nrows}x{ncols} matrix")));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

/// JSON form: `{dim_in, dim_out, kraus: [...]}` or `{dim_in, dim_out, super: [...]}`,
/// matrices as rows of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixRows>>,
    #[serde(rename = "super", default, skip_serializing_if = "Option::is_none")]
    pub superop: Option<MatrixRows>,
}

impl From<&Channel> for ChannelFile {
    fn from(ch: &Channel) -> Self {
        match &ch.kraus {
            Some(k) => Self {
                dim_in: ch.dim_in,
                dim_out: ch.dim_out,
                kraus: Some(k.iter().map(to_rows).collect()),
                superop: None,
            },
            None => Self { dim_in: ch.dim_in, dim_out: ch.dim_out, kraus: None, superop: Some(to_rows(&ch.superop)) },
        }
    }
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<Channel> {
        match (self.kraus, self.superop) {
            (Some(kraus), _) => {
                let ks = kraus
                    .iter()
                    .map(|k| from_rows(k, self.dim_out, self.dim_in))
                    .collect::<Result<Vec<_>>>()?;
                Channel::from_kraus(ks)
            }
            (None, Some(s)) => {
                let m = from_rows(&s, self.dim_out * self.dim_out, self.dim_in * self.dim_in)?;
                Channel::from_superoperator(m, self.dim_in, self.dim_out)
            }
            (None, None) => Err(Error::Serialization("channel needs either `kraus` or `super`".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs_diff;
    use proptest::prelude::*;

    #[test]
    fn identity_apply_is_identity() {
        let mut rng = random::rng(1);
        let x = random::hermitian(&mut rng, 4);
        let y = Channel::identity(4).apply(&x).unwrap();
        assert!(max_abs_diff(x.matrix(), y.matrix()) < 1e-14);
    }

    #[test]
    fn unitary_conjugation_preserves_trace_norm() {
        let mut rng = random::rng(2);
        let u = random::unitary(&mut rng, 3);
        let x = random::hermitian(&mut rng, 3);
        let ch = Channel::unitary(u.clone()).unwrap();
        let y = ch.apply(&x).unwrap();
        assert!(max_abs_diff(y.matrix(), &(&u * x.matrix() * u.adjoint())) < 1e-12);
        assert!((y.trace_norm() - x.trace_norm()).abs() < 1e-10);
    }

    #[test]
    fn superoperator_convention_for_sandwich() {
        // X ↦ A X B has superoperator Bᵀ ⊗ A.
        let mut rng = random::rng(4);
        let a = random::ginibre(&mut rng, 3, 3);
        let b = random::ginibre(&mut rng, 3, 3);
        let s = b.transpose().kronecker(&a);
        let ch = Channel::from_superoperator(s, 3, 3).unwrap();
        let x = random::ginibre(&mut rng, 3, 3);
        assert!(max_abs_diff(&ch.apply_matrix(&x).unwrap(), &(&a * &x * &b)) < 1e-12);
    }

    #[test]
    fn rejects_mismatched_input() {
        let ch = Channel::identity(3);
        let x = HermitianOperator::identity(2);
        assert!(matches!(ch.apply(&x), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(Channel::transpose(2).choi().map(|_| ()), Ok(())));
        let rect = Channel::from_kraus(vec![CMatrix::zeros(2, 3)]).unwrap();
        assert!(matches!(rect.choi(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn transpose_is_not_cp_but_contractive() {
        let t = Channel::transpose(2);
        let choi = t.choi().unwrap();
        // The Choi matrix of the transpose is the swap, with eigenvalue −1.
        assert!((choi.min_eigenvalue() + 1.0).abs() < 1e-12);
        assert!(!t.is_cp(1e-9));
        let rep = positivity_by_contractivity(&t, 100, 3).unwrap();
        assert!(rep.verdict);
    }

    #[test]
    fn identity_choi_spectrum() {
        let d = 4;
        let spec = Channel::identity(d).choi().unwrap().spectrum();
        assert!((spec[d * d - 1] - d as f64).abs() < 1e-12);
        assert!(spec[..d * d - 1].iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn compose_with_identity_and_unitary_inverse() {
        let mut rng = random::rng(8);
        let ch = random::cptp_channel(&mut rng, 3, 2);
        let c = Channel::identity(3).compose(&ch).unwrap();
        assert!(c.distance(&ch) < 1e-14);

        let u = random::unitary(&mut rng, 3);
        let ad = Channel::unitary(u.clone()).unwrap();
        let inv = ad.inverse(DEFAULT_RCOND).unwrap();
        let ad_dag = Channel::unitary(u.adjoint()).unwrap();
        assert!(inv.distance(&ad_dag) < 1e-10);
    }

    #[test]
    fn inverse_of_singular_channel_reports_singular_values() {
        let d = 3;
        let depolarise = Channel::from_unit_images(d, d, |i, j| {
            if i == j {
                CMatrix::identity(d, d).scale(1.0 / d as f64)
            } else {
                CMatrix::zeros(d, d)
            }
        });
        match depolarise.inverse(DEFAULT_RCOND) {
            Err(Error::SingularChannel(rep)) => {
                assert_eq!(rep.numerical_rank, 1);
                assert_eq!(rep.size, d * d);
                assert!(rep.sigma_min < 1e-12);
            }
            other => panic!("expected SingularChannel, got {other:?}"),
        }
    }

    #[test]
    fn positivity_hypothesis_is_checked() {
        let not_tp = Channel::linear_combination(&[(0.5, &Channel::identity(2))]).unwrap();
        assert!(matches!(positivity_by_contractivity(&not_tp, 10, 0), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn unitary_is_contractive_with_equal_norms() {
        let mut rng = random::rng(12);
        let ch = Channel::unitary(random::unitary(&mut rng, 4)).unwrap();
        let rep = positivity_by_contractivity(&ch, 200, 5).unwrap();
        assert!(rep.verdict && rep.witness.is_none());
        assert!(rep.max_excess.abs() < 1e-9);
    }

    #[test]
    fn tp_choi_partial_trace_is_identity() {
        let mut rng = random::rng(13);
        let ch = random::cptp_channel(&mut rng, 3, 3);
        let pt = ch.choi().unwrap().output_partial_trace();
        assert!(max_abs_diff(&pt, &CMatrix::identity(3, 3)) < 1e-9);
    }

    #[test]
    fn extended_application_matches_kron_superoperator() {
        let mut rng = random::rng(14);
        let ch = random::cptp_channel(&mut rng, 2, 2);
        let y = random::hermitian(&mut rng, 6);
        let block = ch.apply_extended(&y).unwrap();
        let ext = ch.extend_with_identity(3);
        let dense = ext.apply(&y).unwrap();
        assert!(max_abs_diff(block.matrix(), dense.matrix()) < 1e-12);
        assert!(ext.is_trace_preserving() && ext.kraus().is_some());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = random::rng(15);
        let ch = random::cptp_channel(&mut rng, 2, 3);
        let back = Channel::from_json(&ch.to_json().unwrap()).unwrap();
        assert!(back.distance(&ch) < 1e-12);
        let super_only = Channel::transpose(3);
        let back = Channel::from_json(&super_only.to_json().unwrap()).unwrap();
        assert!(back.distance(&super_only) < 1e-12);
        assert!(Channel::from_json(r#"{"dim_in":2,"dim_out":2}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn kraus_channels_are_cp_and_consistent(seed in 0u64..100_000, d in 2usize..5, r in 1usize..4) {
            let mut rng = random::rng(seed);
            let ch = random::cptp_channel(&mut rng, d, r);
            prop_assert!(ch.is_trace_preserving() && ch.is_hermiticity_preserving());
            prop_assert!(ch.choi().unwrap().min_eigenvalue() >= -1e-9);
            let x = random::ginibre(&mut rng, d, d);
            let via_kraus = ch.apply_kraus(&x).unwrap().unwrap();
            let via_super = ch.apply_matrix(&x).unwrap();
            prop_assert!(max_abs_diff(&via_kraus, &via_super) < 1e-10);
        }
    }
}
