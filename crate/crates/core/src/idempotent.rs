//! Combinations of the four idempotent channels on `C^{nk} = ⊕_{i<n} C^k`.
//!
//! Flat index of basis vector `j` in block `i` is `i·k + j`. The channels are
//!
//! - `I`, the identity;
//! - `E(X) = Σ_i P_i X P_i`, the conditional expectation onto block-diagonal matrices;
//! - `B(X) = Σ_i (1/k) tr(P_i X) P_i`, dephasing inside each block;
//! - `D(X) = tr(X)/(nk) · I`, full dephasing;
//!
//! where `P_i` projects onto block `i`. All four are trace preserving and satisfy
//! `p_i p_j = p_max(i,j)` in the order `(I, E, B, D)`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Num;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{self, Channel, ContractivityOptions};
use crate::divisibility::DynamicalFamily;
use crate::error::{Error, Result};
use crate::operator::{CMatrix, C64};

/// Tolerance for the closed-form inequalities.
pub const CONDITION_TOL: f64 = 1e-12;

#[derive(Debug)]
pub struct IdempotentBasis {
    pub n: usize,
    pub k: usize,
    pub identity: Channel,
    pub conditional_expectation: Channel,
    pub block_dephasing: Channel,
    pub dephasing: Channel,
}

impl IdempotentBasis {
    /// `[I, E, B, D]`.
    pub fn channels(&self) -> [&Channel; 4] {
        [&self.identity, &self.conditional_expectation, &self.block_dephasing, &self.dephasing]
    }

    pub fn dim(&self) -> usize {
        self.n * self.k
    }
}

fn construct_basis(n: usize, k: usize) -> IdempotentBasis {
    let d = n * k;
    let block = |idx: usize| idx / k;
    let block_projector = |b: usize| {
        let mut p = CMatrix::zeros(d, d);
        for j in 0..k {
            p[(b * k + j, b * k + j)] = C64::new(1.0, 0.0);
        }
        p
    };
    let unit = |i: usize, j: usize| crate::operator::matrix_unit(d, d, i, j);
    let conditional_expectation = Channel::from_unit_images(d, d, |i, j| {
        if block(i) == block(j) {
            unit(i, j)
        } else {
            CMatrix::zeros(d, d)
        }
    });
    let block_dephasing = Channel::from_unit_images(d, d, |i, j| {
        if i == j {
            block_projector(block(i)).scale(1.0 / k as f64)
        } else {
            CMatrix::zeros(d, d)
        }
    });
    let dephasing = Channel::from_unit_images(d, d, |i, j| {
        if i == j {
            CMatrix::identity(d, d).scale(1.0 / d as f64)
        } else {
            CMatrix::zeros(d, d)
        }
    });
    IdempotentBasis {
        n,
        k,
        identity: Channel::from_unit_images(d, d, unit),
        conditional_expectation,
        block_dephasing,
        dephasing,
    }
}

type BasisCache = Mutex<HashMap<(usize, usize), Arc<IdempotentBasis>>>;

/// The four basis channels for `(n, k)`, built once and shared.
pub fn build_basis(n: usize, k: usize) -> Result<Arc<IdempotentBasis>> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!("n and k must be positive, got n={n}, k={k}")));
    }
    static CACHE: OnceLock<BasisCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().expect("basis cache poisoned").get(&(n, k)) {
        return Ok(Arc::clone(b));
    }
    let basis = Arc::new(construct_basis(n, k));
    let mut guard = cache.lock().expect("basis cache poisoned");
    Ok(Arc::clone(guard.entry((n, k)).or_insert(basis)))
}

/// `(n, k)` together with the weights of `a I + b E + c B + d D`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdempotentParams {
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl IdempotentParams {
    pub fn new(n: usize, k: usize, [a, b, c, d]: [f64; 4]) -> Self {
        Self { n, k, a, b, c, d }
    }

    pub fn coeffs(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn with_coeffs(&self, coeffs: [f64; 4]) -> Self {
        Self::new(self.n, self.k, coeffs)
    }

    fn nk(&self) -> f64 {
        (self.n * self.k) as f64
    }
}

pub fn phi(params: &IdempotentParams) -> Result<Channel> {
    let basis = build_basis(params.n, params.k)?;
    let [i, e, b, d] = basis.channels();
    Channel::linear_combination(&[(params.a, i), (params.b, e), (params.c, b), (params.d, d)])
}

/// `(eigenvalue, multiplicity)` of the Choi matrix, in the order
/// `nka + kb + c/k + d/nk`, `kb + c/k + d/nk`, `c/k + d/nk`, `d/nk`.
/// Multiplicities may be zero when `n = 1` or `k = 1`.
pub fn choi_spectrum_closed_form(p: &IdempotentParams) -> [(f64, usize); 4] {
    let (n, k) = (p.n, p.k);
    let kf = k as f64;
    let tail = p.c / kf + p.d / p.nk();
    [
        (p.nk() * p.a + kf * p.b + tail, 1),
        (kf * p.b + tail, n - 1),
        (tail, n * (k * k - 1)),
        (p.d / p.nk(), n * k * k * (n - 1)),
    ]
}

/// The closed-form spectrum expanded into a sorted list of eigenvalues.
pub fn choi_spectrum_multiset(p: &IdempotentParams) -> Vec<f64> {
    let mut out: Vec<f64> = choi_spectrum_closed_form(p)
        .iter()
        .flat_map(|&(v, m)| std::iter::repeat_n(v, m))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Complete positivity: every Choi eigenvalue that actually occurs is nonnegative.
pub fn cp_condition(p: &IdempotentParams) -> bool {
    choi_spectrum_closed_form(p)
        .iter()
        .all(|&(v, m)| m == 0 || v >= -CONDITION_TOL)
}

/// Necessary conditions for 2-positivity, read off `(I₂ ⊗ Φ)(ψψ†)` with
/// `ψ = |00⟩ + |11⟩` on the first two basis vectors.
pub fn two_positive_necessary(p: &IdempotentParams) -> bool {
    let (kf, nk) = (p.k as f64, p.nk());
    let tol = CONDITION_TOL;
    if p.k >= 2 {
        // Both basis vectors sit in the same block.
        let tail = p.c / kf + p.d / nk;
        2.0 * p.a + 2.0 * p.b + tail >= -tol && tail >= -tol && p.d >= -tol
    } else {
        // k = 1: E and B both act as the diagonal projection.
        let diag = p.b + p.c + p.d / nk;
        let mut ok = 2.0 * p.a + diag >= -tol && diag >= -tol;
        if p.n >= 3 {
            ok &= p.d >= -tol;
        }
        ok
    }
}

/// The l-positivity inequality `b·‖C_E‖_{S(l)} + d + c + a·l ≥ 0`, valid for `a, b ≤ 0`.
///
/// `norm_ce` defaults to `k` when `l = 1` and must be supplied otherwise.
pub fn l_positive_condition(p: &IdempotentParams, l: usize, norm_ce: Option<f64>) -> Result<bool> {
    if p.a > 0.0 || p.b > 0.0 {
        return Err(Error::HypothesisViolated(format!(
            "l-positivity inequality needs a <= 0 and b <= 0, got a={}, b={}",
            p.a, p.b
        )));
    }
    if l == 0 || l > p.n * p.k {
        return Err(Error::InvalidArgument(format!("l must lie in 1..={}, got {l}", p.n * p.k)));
    }
    let norm = match (norm_ce, l) {
        (Some(v), _) => v,
        (None, 1) => p.k as f64,
        (None, _) => {
            return Err(Error::InvalidArgument(format!("the S({l}) norm of C_E must be supplied for l >= 2")))
        }
    };
    Ok(p.b * norm + p.d + p.c + p.a * l as f64 >= -CONDITION_TOL)
}

fn require_nonzero<T: Num>(value: &T, name: &str) -> Result<()> {
    if value.is_zero() {
        return Err(Error::DegenerateDenominator(format!("{name} vanishes")));
    }
    Ok(())
}

/// Weights `(α, β, γ, δ)` of the divisor with `Λ_t = Φ(α, β, γ, δ) Λ_s`.
pub fn divisor_coeffs<T: Num + Clone>(s: [T; 4], t: [T; 4]) -> Result<[T; 4]> {
    let [a_s, b_s, c_s, d_s] = s;
    let [a_t, b_t, c_t, d_t] = t;
    let s1 = a_s.clone();
    let s2 = s1.clone() + b_s.clone();
    let s3 = s2.clone() + c_s.clone();
    let s4 = s3.clone() + d_s.clone();
    require_nonzero(&s1, "a_s")?;
    require_nonzero(&s2, "a_s + b_s")?;
    require_nonzero(&s3, "a_s + b_s + c_s")?;
    require_nonzero(&s4, "a_s + b_s + c_s + d_s")?;
    let alpha = a_t.clone() / s1.clone();
    let beta = (a_s.clone() * b_t.clone() - b_s * a_t.clone()) / (s1 * s2.clone());
    let gamma = (s2.clone() * c_t.clone() - c_s * (a_t.clone() + b_t.clone())) / (s2 * s3.clone());
    let delta = (s3.clone() * d_t - d_s * (a_t + b_t + c_t)) / (s3 * s4);
    Ok([alpha, beta, gamma, delta])
}

/// Weights over a decreasing family of idempotents `p_1, …, p_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffVector<T = f64> {
    pub x: Vec<T>,
}

impl<T> CoeffVector<T> {
    pub fn new(x: Vec<T>) -> Self {
        Self { x }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

impl<T> From<Vec<T>> for CoeffVector<T> {
    fn from(x: Vec<T>) -> Self {
        Self { x }
    }
}

/// Weights of `p(x) p(y)`.
pub fn idempotent_product<T: Num + Clone>(x: &CoeffVector<T>, y: &CoeffVector<T>) -> Result<CoeffVector<T>> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let m = x.len();
    let mut z = Vec::with_capacity(m);
    let mut x_prefix = T::zero();
    let mut y_prefix = T::zero();
    for i in 0..m {
        let (xi, yi) = (x.x[i].clone(), y.x[i].clone());
        z.push(x_prefix.clone() * yi.clone() + xi.clone() * yi.clone() + xi.clone() * y_prefix.clone());
        x_prefix = x_prefix + xi;
        y_prefix = y_prefix + yi;
    }
    Ok(CoeffVector::new(z))
}

/// The `y` with `p(y) p(x) = p(z)`; needs every prefix sum of `x` nonzero.
pub fn solve_left_divisor<T: Num + Clone>(x: &CoeffVector<T>, z: &CoeffVector<T>) -> Result<CoeffVector<T>> {
    if x.len() != z.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: z.len() });
    }
    let mut y = Vec::with_capacity(x.len());
    let mut x_prev = T::zero();
    let mut z_prev = T::zero();
    for i in 0..x.len() {
        let x_cur = x_prev.clone() + x.x[i].clone();
        require_nonzero(&x_cur, &format!("prefix sum x_1 + .. + x_{}", i + 1))?;
        let yi = if i == 0 {
            z.x[0].clone() / x.x[0].clone()
        } else {
            z.x[i].clone() / x_cur.clone()
                - x.x[i].clone() * z_prev.clone() / (x_prev.clone() * x_cur.clone())
        };
        y.push(yi);
        x_prev = x_cur;
        z_prev = z_prev + z.x[i].clone();
    }
    Ok(CoeffVector::new(y))
}

pub type CoeffFn = Arc<dyn Fn(f64) -> [f64; 4] + Send + Sync>;

/// `Λ_t = a_t I + b_t E + c_t B + d_t D` with its coefficient functions kept around.
#[derive(Clone)]
pub struct IdempotentFamily {
    pub n: usize,
    pub k: usize,
    coeffs: CoeffFn,
    family: DynamicalFamily,
}

impl fmt::Debug for IdempotentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdempotentFamily")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("family", &self.family)
            .finish()
    }
}

impl IdempotentFamily {
    pub fn params_at(&self, t: f64) -> IdempotentParams {
        IdempotentParams::new(self.n, self.k, (self.coeffs)(t))
    }

    pub fn family(&self) -> &DynamicalFamily {
        &self.family
    }

    pub fn into_family(self) -> DynamicalFamily {
        self.family
    }
}

const FAMILY_CHECK_POINTS: usize = 11;

/// Builds the family after checking complete positivity and trace preservation of
/// the coefficients on a grid.
pub fn make_family<F>(label: &str, coeff_fn: F, n: usize, k: usize, t_domain: (f64, f64)) -> Result<IdempotentFamily>
where
    F: Fn(f64) -> [f64; 4] + Send + Sync + 'static,
{
    let basis = build_basis(n, k)?;
    let coeffs: CoeffFn = Arc::new(coeff_fn);
    let (t_min, t_max) = t_domain;
    for i in 0..FAMILY_CHECK_POINTS {
        let t = t_min + (t_max - t_min) * i as f64 / (FAMILY_CHECK_POINTS - 1) as f64;
        let p = IdempotentParams::new(n, k, coeffs(t));
        let sum: f64 = p.coeffs().iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidFamily { t, reason: format!("coefficients sum to {sum}, not 1") });
        }
        if !cp_condition(&p) {
            return Err(Error::InvalidFamily { t, reason: "closed-form Choi spectrum has a negative eigenvalue".into() });
        }
    }
    let gen_coeffs = Arc::clone(&coeffs);
    let family = DynamicalFamily::new(label, n * k, t_domain, move |t| {
        let [a, b, c, d] = gen_coeffs(t);
        let [ci, ce, cb, cd] = basis.channels();
        Channel::linear_combination(&[(a, ci), (b, ce), (c, cb), (d, cd)]).expect("equal shapes")
    })?;
    Ok(IdempotentFamily { n, k, coeffs, family })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    CpDivisible,
    PNotCp,
    NotP,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::CpDivisible => "CP_DIVISIBLE",
            Regime::PNotCp => "P_NOT_CP",
            Regime::NotP => "NOT_P",
        })
    }
}

/// How a single divisor `Φ(α, β, γ, δ)` was classified.
#[derive(Clone, Debug, Serialize)]
pub struct DivisorClassification {
    pub coeffs: [f64; 4],
    pub regime: Regime,
    pub cp: bool,
    /// The `l = 1` inequality with `‖C_E‖ = k`, when `α, β ≤ 0`.
    pub l1_condition: Option<bool>,
    /// Contractivity sampling found no witness.
    pub sampled_positive: bool,
    /// The `l = 1` inequality and sampling disagree.
    pub discrepancy: bool,
}

pub fn classify_divisor(n: usize, k: usize, coeffs: [f64; 4], opts: &ContractivityOptions) -> Result<DivisorClassification> {
    let p = IdempotentParams::new(n, k, coeffs);
    let cp = cp_condition(&p);
    let l1_condition = if p.a <= 0.0 && p.b <= 0.0 { Some(l_positive_condition(&p, 1, None)?) } else { None };
    let sampled_positive = channel::positivity_by_contractivity_with(&phi(&p)?, opts)?.verdict;
    let positive = if cp {
        true
    } else {
        l1_condition.unwrap_or(sampled_positive)
    };
    let regime = match (cp, positive) {
        (true, _) => Regime::CpDivisible,
        (false, true) => Regime::PNotCp,
        (false, false) => Regime::NotP,
    };
    let discrepancy = l1_condition.is_some_and(|c| c != sampled_positive) || (cp && !sampled_positive);
    Ok(DivisorClassification { coeffs, regime, cp, l1_condition, sampled_positive, discrepancy })
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisorRow {
    pub s: f64,
    pub t: f64,
    #[serde(flatten)]
    pub classification: DivisorClassification,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyClassification {
    pub n: usize,
    pub k: usize,
    pub regime: Regime,
    pub any_discrepancy: bool,
    pub rows: Vec<DivisorRow>,
    /// Pairs skipped because a prefix sum of the `s` coefficients vanished.
    pub degenerate_pairs: usize,
}

/// Classifies every divisor `Φ_{t,s}` for `s < t` on the grid; the family regime
/// is the worst one seen.
pub fn classify_family(fam: &IdempotentFamily, grid: &[f64], opts: &ContractivityOptions) -> Result<FamilyClassification> {
    let pairs: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| grid[i + 1..].iter().map(move |&t| (s, t)))
        .collect();
    let results: Vec<Option<DivisorRow>> = pairs
        .par_iter()
        .map(|&(s, t)| -> Result<Option<DivisorRow>> {
            let coeffs = match divisor_coeffs(fam.params_at(s).coeffs(), fam.params_at(t).coeffs()) {
                Ok(c) => c,
                Err(Error::DegenerateDenominator(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let classification = classify_divisor(fam.n, fam.k, coeffs, opts)?;
            Ok(Some(DivisorRow { s, t, classification }))
        })
        .collect::<Result<_>>()?;
    let degenerate_pairs = results.iter().filter(|r| r.is_none()).count();
    let rows: Vec<DivisorRow> = results.into_iter().flatten().collect();
    let regime = rows.iter().map(|r| r.classification.regime).max().unwrap_or(Regime::CpDivisible);
    let any_discrepancy = rows.iter().any(|r| r.classification.discrepancy);
    Ok(FamilyClassification { n: fam.n, k: fam.k, regime, any_discrepancy, rows, degenerate_pairs })
}

/// Closed-form conditions of a fixed divisor as the number of blocks grows.
#[derive(Clone, Debug, Serialize)]
pub struct TruncationRow {
    pub n: usize,
    pub spectrum: Vec<(f64, usize)>,
    pub cp: bool,
    pub l1_condition: Option<bool>,
    pub min_eigenvalue: f64,
}

pub fn truncation_report(coeffs: [f64; 4], k: usize, blocks: &[usize]) -> Vec<TruncationRow> {
    blocks
        .iter()
        .map(|&n| {
            let p = IdempotentParams::new(n, k, coeffs);
            let spectrum = choi_spectrum_closed_form(&p).to_vec();
            let min_eigenvalue = spectrum
                .iter()
                .filter(|(_, m)| *m > 0)
                .map(|(v, _)| *v)
                .fold(f64::INFINITY, f64::min);
            TruncationRow {
                n,
                spectrum,
                cp: cp_condition(&p),
                l1_condition: l_positive_condition(&p, 1, None).ok(),
                min_eigenvalue,
            }
        })
        .collect()
}

pub const PRESETS: [&str; 3] = ["idempotent-cp", "idempotent-p-not-cp", "idempotent-not-p"];

/// Named families covering the three divisor regimes.
///
/// - `idempotent-cp`: prefix sums `e^{-3t}, e^{-2t}, e^{-t}, 1` on `C^4`; every divisor has
///   nonnegative weights.
/// - `idempotent-p-not-cp`: `n = 2, k = 1`, `a_t = ((1 + e^{-2t})/2)²`, `a_t + b_t = e^{-4t}`;
///   the divisors are positive but `2α > 1 + α + β` for short intervals.
/// - `idempotent-not-p`: `a_t = cos 2πt`, `b_t = 1 − a_t` on `C^4`; `|a_t|` grows on parts of
///   the domain, which breaks positivity of the divisor.
pub fn preset(name: &str) -> Result<IdempotentFamily> {
    preset_sized(name, None, None)
}

/// [`preset`] with the block count and block size overridden where given.
pub fn preset_sized(name: &str, n: Option<usize>, k: Option<usize>) -> Result<IdempotentFamily> {
    let (n0, k0) = match name {
        "idempotent-p-not-cp" => (2, 1),
        _ => (2, 2),
    };
    let (n, k) = (n.unwrap_or(n0), k.unwrap_or(k0));
    match name {
        "idempotent-cp" => make_family(
            name,
            |t: f64| {
                let (e1, e2, e3) = ((-t).exp(), (-2.0 * t).exp(), (-3.0 * t).exp());
                [e3, e2 - e3, e1 - e2, 1.0 - e1]
            },
            n,
            k,
            (0.0, 3.0),
        ),
        "idempotent-p-not-cp" => make_family(
            name,
            |t: f64| {
                let e = (-2.0 * t).exp();
                let a = ((1.0 + e) / 2.0).powi(2);
                [a, e * e - a, 0.0, 1.0 - e * e]
            },
            n,
            k,
            (0.0, 2.0),
        ),
        "idempotent-not-p" => make_family(
            name,
            |t: f64| {
                let a = (2.0 * std::f64::consts::PI * t).cos();
                [a, 1.0 - a, 0.0, 0.0]
            },
            n,
            k,
            (0.0, 1.0),
        ),
        other => Err(Error::InvalidArgument(format!("unknown idempotent preset `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_abs_diff, HermitianOperator};
    use crate::random;
    use num_rational::Rational64;
    use proptest::prelude::*;
    use rand::Rng;

    fn dense_spectrum(p: &IdempotentParams) -> Vec<f64> {
        phi(p).unwrap().choi().unwrap().spectrum()
    }

    #[test]
    fn basis_channels_are_tp_cp_idempotent_and_ordered() {
        for (n, k) in [(2, 2), (3, 2), (2, 3), (1, 3), (3, 1)] {
            let basis = build_basis(n, k).unwrap();
            let chans = basis.channels();
            for ch in chans {
                assert!(ch.is_trace_preserving());
                assert!(ch.is_cp(1e-10));
                assert!(ch.compose(ch).unwrap().distance(ch) < 1e-10);
            }
            for i in 0..4 {
                for j in 0..4 {
                    let prod = chans[i].compose(chans[j]).unwrap();
                    assert!(prod.distance(chans[i.max(j)]) < 1e-10, "({n},{k}) p{i} p{j}");
                }
            }
        }
    }

    #[test]
    fn basis_is_memoised() {
        let a = build_basis(2, 3).unwrap();
        let b = build_basis(2, 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn dephasing_normalisation() {
        let basis = build_basis(2, 2).unwrap();
        let x = HermitianOperator::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let y = basis.dephasing.apply(&x).unwrap();
        assert!(max_abs_diff(y.matrix(), &CMatrix::identity(4, 4).scale(0.25)) < 1e-15);
        let i4 = HermitianOperator::identity(4);
        assert!(max_abs_diff(basis.dephasing.apply(&i4).unwrap().matrix(), i4.matrix()) < 1e-15);
    }

    #[test]
    fn conditional_expectation_fixes_block_diagonal() {
        let basis = build_basis(2, 2).unwrap();
        let mut rng = random::rng(9);
        let a = random::hermitian(&mut rng, 2).into_matrix();
        let b = random::hermitian(&mut rng, 2).into_matrix();
        let mut x = CMatrix::zeros(4, 4);
        x.view_mut((0, 0), (2, 2)).copy_from(&a);
        x.view_mut((2, 2), (2, 2)).copy_from(&b);
        let x = HermitianOperator::new(x).unwrap();
        let y = basis.conditional_expectation.apply(&x).unwrap();
        assert!(max_abs_diff(y.matrix(), x.matrix()) < 1e-15);
    }

    #[test]
    fn phi_corners() {
        let basis = build_basis(2, 2).unwrap();
        let id = phi(&IdempotentParams::new(2, 2, [1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(id.distance(&basis.identity) < 1e-15);
        let dep = phi(&IdempotentParams::new(2, 2, [0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(dep.distance(&basis.dephasing) < 1e-15);
    }

    #[test]
    fn uniform_weights_are_cp_by_both_routes() {
        let p = IdempotentParams::new(2, 2, [0.25; 4]);
        assert!(phi(&p).unwrap().is_trace_preserving());
        assert!(choi_spectrum_closed_form(&p).iter().all(|&(v, _)| v > 0.0));
        assert!(cp_condition(&p));
        assert!(dense_spectrum(&p)[0] > 0.0);
    }

    #[test]
    fn closed_form_for_identity_and_conditional_expectation() {
        let id = choi_spectrum_multiset(&IdempotentParams::new(2, 2, [1.0, 0.0, 0.0, 0.0]));
        assert_eq!(id.len(), 16);
        assert_eq!(id[15], 4.0);
        assert!(id[..15].iter().all(|&v| v == 0.0));
        let e = choi_spectrum_multiset(&IdempotentParams::new(2, 2, [0.0, 1.0, 0.0, 0.0]));
        assert_eq!(&e[14..], &[2.0, 2.0]);
        assert!(e[..14].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closed_form_matches_dense_for_small_blocks() {
        let mut rng = random::rng(21);
        for (n, k) in [(2, 3), (3, 2), (1, 1), (1, 3), (3, 1)] {
            for _ in 0..5 {
                let coeffs = [(); 4].map(|_| rng.random_range(-1.0..1.0));
                let p = IdempotentParams::new(n, k, coeffs);
                let closed = choi_spectrum_multiset(&p);
                let dense = dense_spectrum(&p);
                for (x, y) in closed.iter().zip(&dense) {
                    assert!((x - y).abs() < 1e-9, "({n},{k}) {coeffs:?}");
                }
            }
        }
    }

    #[test]
    fn negative_dephasing_weight_is_not_cp() {
        let p = IdempotentParams::new(2, 2, [0.3, 0.3, 0.41, -0.01]);
        assert!(!cp_condition(&p));
        assert!(!phi(&p).unwrap().is_cp(1e-12));
    }

    #[test]
    fn l_positive_inequality_example_and_hypothesis() {
        let p = IdempotentParams::new(2, 2, [-0.1, -0.1, 0.6, 0.6]);
        // b k + a + c + d = -0.2 - 0.1 + 1.2
        assert!(l_positive_condition(&p, 1, None).unwrap());
        let q = IdempotentParams::new(2, 2, [0.1, -0.1, 0.5, 0.5]);
        assert!(matches!(l_positive_condition(&q, 1, None), Err(Error::HypothesisViolated(_))));
        assert!(l_positive_condition(&p, 2, None).is_err());
        assert!(l_positive_condition(&p, 2, Some(2.0)).unwrap());
    }

    /// `(I₂ ⊗ Φ)(ψψ†)` on the first two basis vectors.
    fn two_positivity_probe(p: &IdempotentParams) -> HermitianOperator {
        let ch = phi(p).unwrap();
        let d = p.n * p.k;
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        for a in 0..2 {
            for b in 0..2 {
                m.view_mut((a * d, b * d), (d, d)).copy_from(&ch.unit_image(a, b));
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn two_positive_conditions_are_necessary() {
        let mut rng = random::rng(33);
        let mut psd_cases = 0;
        for (n, k) in [(2, 2), (3, 2), (2, 3), (3, 1), (2, 1)] {
            for _ in 0..60 {
                let coeffs = [(); 4].map(|_| rng.random_range(-0.6..1.0));
                let p = IdempotentParams::new(n, k, coeffs);
                if two_positivity_probe(&p).min_eigenvalue() >= -1e-12 {
                    psd_cases += 1;
                    assert!(two_positive_necessary(&p), "({n},{k}) {coeffs:?}");
                }
            }
        }
        assert!(psd_cases > 20);
    }

    #[test]
    fn divisor_identity_and_degenerate_denominators() {
        let s: [f64; 4] = [0.4, 0.2, 0.3, 0.1];
        let d = divisor_coeffs(s, s).unwrap();
        for (x, y) in d.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        match divisor_coeffs([0.5, -0.5, 0.5, 0.5], s) {
            Err(Error::DegenerateDenominator(msg)) => assert!(msg.contains("a_s + b_s")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn divisor_composes_to_later_map() {
        let s = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        let t = [0.25; 4];
        let coeffs = divisor_coeffs(s, t).unwrap();
        for (n, k) in [(2, 2), (3, 2)] {
            let div = phi(&IdempotentParams::new(n, k, coeffs)).unwrap();
            let lam_s = phi(&IdempotentParams::new(n, k, s)).unwrap();
            let lam_t = phi(&IdempotentParams::new(n, k, t)).unwrap();
            assert!(div.compose(&lam_s).unwrap().distance(&lam_t) < 1e-12);
        }
    }

    #[test]
    fn divisor_formulas_equal_lemma_in_exact_arithmetic() {
        let r = |a: i64, b: i64| Rational64::new(a, b);
        let s = [r(1, 2), r(1, 6), r(1, 6), r(1, 6)];
        let t = [r(1, 4), r(1, 3), r(-1, 7), r(31, 84)];
        let thm = divisor_coeffs(s, t).unwrap();
        let lemma = solve_left_divisor(&CoeffVector::new(s.to_vec()), &CoeffVector::new(t.to_vec())).unwrap();
        assert_eq!(lemma.x, thm.to_vec());
        let back = idempotent_product(&lemma, &CoeffVector::new(s.to_vec())).unwrap();
        assert_eq!(back.x, t.to_vec());
    }

    #[test]
    fn product_with_leading_unit_is_identity() {
        let e1 = CoeffVector::new(vec![1.0, 0.0, 0.0, 0.0]);
        let y = CoeffVector::new(vec![0.3, -1.2, 2.0, 0.5]);
        assert_eq!(idempotent_product(&e1, &y).unwrap(), y);
    }

    #[test]
    fn lemma_prefix_sums_on_ones() {
        // x = (1,1,1,1), z = (1,3,5,7): prefix sums of y are Z_i / X_i.
        let r = |a: i64| Rational64::from_integer(a);
        let x = CoeffVector::new(vec![r(1), r(1), r(1), r(1)]);
        let z = CoeffVector::new(vec![r(1), r(3), r(5), r(7)]);
        let y = solve_left_divisor(&x, &z).unwrap();
        let mut acc = r(0);
        let z_prefix = [r(1), r(4), r(9), r(16)];
        for (i, yi) in y.x.iter().enumerate() {
            acc += *yi;
            assert_eq!(acc, z_prefix[i] / r(i as i64 + 1));
        }
        // Forward substitution on z_i = x_i·(y_1 + .. + y_{i-1}) + y_i·(x_1 + .. + x_i).
        let mut brute = Vec::new();
        let (mut y_prefix, mut x_prefix) = (r(0), r(0));
        for i in 0..4 {
            x_prefix += x.x[i];
            let yi = (z.x[i] - x.x[i] * y_prefix) / x_prefix;
            y_prefix += yi;
            brute.push(yi);
        }
        assert_eq!(y.x, brute);
        assert_eq!(idempotent_product(&y, &x).unwrap(), z);
    }

    #[test]
    fn product_matches_superoperator_composition() {
        let mut rng = random::rng(44);
        let x = [(); 4].map(|_| rng.random_range(-1.0..1.0));
        let y = [(); 4].map(|_| rng.random_range(-1.0..1.0));
        let z = idempotent_product(&CoeffVector::new(x.to_vec()), &CoeffVector::new(y.to_vec())).unwrap();
        let px = phi(&IdempotentParams::new(2, 3, x)).unwrap();
        let py = phi(&IdempotentParams::new(2, 3, y)).unwrap();
        let pz = phi(&IdempotentParams::new(2, 3, [z.x[0], z.x[1], z.x[2], z.x[3]])).unwrap();
        assert!(px.compose(&py).unwrap().distance(&pz) < 1e-12);
    }

    #[test]
    fn make_family_reports_first_bad_time() {
        let coeffs = |t: f64| if t > 0.5 { [1.0 - t, 0.0, 0.0, t + 0.1] } else { [1.0 - t, 0.0, 0.0, t] };
        let err = make_family("bad", coeffs, 2, 2, (0.0, 1.0)).unwrap_err();
        match err {
            Error::InvalidFamily { t, .. } => assert!((t - 0.6).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_family_has_identity_divisors() {
        let fam = make_family("const", |_| [0.4, 0.3, 0.2, 0.1], 2, 2, (0.0, 1.0)).unwrap();
        let cls = classify_family(&fam, &[0.0, 0.5, 1.0], &ContractivityOptions::default()).unwrap();
        assert_eq!(cls.regime, Regime::CpDivisible);
        for row in &cls.rows {
            let c = row.classification.coeffs;
            assert!((c[0] - 1.0).abs() < 1e-12 && c[1..].iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn regime_examples() {
        let opts = ContractivityOptions::default();
        // α = 0, β < 0, kβ + γ + δ ≥ 0 with a negative Choi eigenvalue.
        let p_not_cp = classify_divisor(2, 2, [0.0, -0.3, 0.7, 0.6], &opts).unwrap();
        assert_eq!(p_not_cp.regime, Regime::PNotCp);
        assert!(!p_not_cp.discrepancy);
        // kβ + γ + δ + α < 0.
        let not_p = classify_divisor(2, 2, [-0.1, -1.2, 1.2, 1.1], &opts).unwrap();
        assert_eq!(not_p.regime, Regime::NotP);
        assert!(!not_p.sampled_positive);
        let cp = classify_divisor(2, 2, [0.25; 4], &opts).unwrap();
        assert_eq!(cp.regime, Regime::CpDivisible);
    }

    #[test]
    fn presets_land_in_their_regimes() {
        let opts = ContractivityOptions { samples: 60, ..Default::default() };
        let grid = |fam: &IdempotentFamily| {
            let (a, b) = fam.family().t_domain();
            crate::divisibility::linspace(a, b, 7)
        };
        let expect = [
            ("idempotent-cp", Regime::CpDivisible),
            ("idempotent-p-not-cp", Regime::PNotCp),
            ("idempotent-not-p", Regime::NotP),
        ];
        for (name, regime) in expect {
            let fam = preset(name).unwrap();
            let cls = classify_family(&fam, &grid(&fam), &opts).unwrap();
            assert_eq!(cls.regime, regime, "{name}");
        }
    }

    #[test]
    fn truncation_report_is_stable_in_n() {
        let rows = truncation_report([0.0, -0.3, 0.7, 0.6], 2, &[1, 2, 4, 8, 16]);
        assert!(rows.iter().all(|r| r.l1_condition == Some(true)));
        assert!(rows.iter().skip(1).all(|r| !r.cp));
        assert_eq!(rows.len(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn left_divisor_roundtrip(
            x in prop::array::uniform4(0.2f64..2.0),
            y in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let x = CoeffVector::new(x.to_vec());
            let y = CoeffVector::new(y.to_vec());
            let z = idempotent_product(&y, &x).unwrap();
            let back = solve_left_divisor(&x, &z).unwrap();
            for (a, b) in back.x.iter().zip(&y.x) {
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()) * 10.0);
            }
        }

        #[test]
        fn divisor_coeffs_agree_with_lemma(
            s in prop::array::uniform4(0.1f64..1.0),
            t in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let thm = divisor_coeffs(s, t).unwrap();
            let lemma = solve_left_divisor(&CoeffVector::new(s.to_vec()), &CoeffVector::new(t.to_vec())).unwrap();
            for (a, b) in thm.iter().zip(&lemma.x) {
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
            }
        }
    }
}
