//! Purity of multiplication operators at finite truncation.
//!
//! A finite matrix is pure exactly when its spectral radius is below one;
//! here "pure" means `ρ < 1 - tol`. For a polynomial symbol the adjoint
//! compression to `V_D` is exact, and its spectrum is compared with that of
//! `Φ(0)` at every degree up to `D_max`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec1D;
use crate::linalg;
use crate::operators::matrix::{adjoint_compression, multiplier_matrix, OperatorMatrix};
use crate::operators::symbol::{slice_symbol, MultiplierSymbol};
use crate::spaces::{Domain, MultiIndex, SpaceVector, TruncatedBasis};
use crate::C64;

/// Default purity tolerance.
pub const PURITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pure,
    NotPure,
    /// Compression spectra and `Φ(0)` disagree. Never expected.
    Inconsistent,
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    /// Spectral radius of the adjoint compression to `V_D`, keyed by `D`.
    pub per_degree_rho: BTreeMap<usize, f64>,
    pub phi0_rho: f64,
    pub verdict: Verdict,
    /// Some spectral radius lies in `[1 - 10 tol, 1 - tol)`: classified, but
    /// close enough to the unit circle that the tolerance matters.
    pub near_boundary: bool,
    /// Norm of the multiplier matrix used as the contractivity check.
    pub contractivity_norm: f64,
    /// Degree of the truncation on which contractivity was checked.
    pub contractivity_degree: usize,
    pub label: String,
}

pub fn classify(per_degree: &BTreeMap<usize, f64>, phi0_rho: f64, tol: f64) -> (Verdict, bool) {
    let threshold = 1.0 - tol;
    let all_below = per_degree.values().all(|&r| r < threshold);
    let some_above = per_degree.values().any(|&r| r >= threshold);
    let verdict = if all_below && phi0_rho < threshold {
        Verdict::Pure
    } else if phi0_rho >= threshold && some_above {
        Verdict::NotPure
    } else {
        Verdict::Inconsistent
    };
    let near = |r: f64| r >= 1.0 - 10.0 * tol && r < threshold;
    let near_boundary = near(phi0_rho) || per_degree.values().any(|&r| near(r));
    (verdict, near_boundary)
}

/// Verdict from the compressions on `basis` (degrees `0..=basis.degree_cap()`),
/// after a contractivity check already carried out by the caller.
fn verdict_on(
    phi: &MultiplierSymbol,
    basis: &Arc<TruncatedBasis>,
    tol: f64,
    contractivity_norm: f64,
    contractivity_degree: usize,
    label: String,
) -> Result<PurityReport> {
    let t = adjoint_compression(basis, phi)?;
    let mut per_degree_rho = BTreeMap::new();
    for d in 0..=basis.degree_cap() {
        // V_d is a leading block and is invariant under M_Φ*, so the leading
        // principal block is the compression at degree d.
        let k = basis.prefix_dim(d);
        let block = t.data.view((0, 0), (k, k)).into_owned();
        per_degree_rho.insert(d, linalg::spectral_radius(&block)?);
    }
    let phi0_rho = linalg::spectral_radius(&phi.phi0())?;
    let (verdict, near_boundary) = classify(&per_degree_rho, phi0_rho, tol);
    Ok(PurityReport {
        per_degree_rho,
        phi0_rho,
        verdict,
        near_boundary,
        contractivity_norm,
        contractivity_degree,
        label,
    })
}

/// Norm of the multiplier matrix on a truncation padded by the symbol degree.
pub fn padded_multiplier_norm(phi: &MultiplierSymbol, domain: &Domain, d_max: usize) -> Result<f64> {
    let padded = Arc::new(TruncatedBasis::new(domain.clone(), d_max + phi.degree(), phi.coeff_dim())?);
    Ok(multiplier_matrix(&padded, phi)?.norm())
}

pub fn multiplier_purity_verdict(
    phi: &MultiplierSymbol,
    domain: &Domain,
    d_max: usize,
    tol: f64,
) -> Result<PurityReport> {
    let norm = padded_multiplier_norm(phi, domain, d_max)?;
    if norm > 1.0 + tol {
        return Err(Error::NonContractive { norm });
    }
    let basis = Arc::new(TruncatedBasis::new(domain.clone(), d_max, phi.coeff_dim())?);
    verdict_on(phi, &basis, tol, norm, d_max + phi.degree(), format!("certified on V_D for D <= {d_max}"))
}

/// Purity verdict for a degree-`D` Taylor jet of a rational symbol. The jet
/// has the same compression to `V_D` as the symbol itself, so contractivity
/// is checked there rather than on a padded truncation.
pub fn jet_purity_verdict(jet: &MultiplierSymbol, domain: &Domain, d: usize, tol: f64) -> Result<PurityReport> {
    let basis = Arc::new(TruncatedBasis::new(domain.clone(), d, jet.coeff_dim())?);
    let norm = multiplier_matrix(&basis, jet)?.norm();
    if norm > 1.0 + tol {
        return Err(Error::NonContractive { norm });
    }
    verdict_on(jet, &basis, tol, norm, d, format!("jet-certified to degree {d}"))
}

/// `(‖T^m h‖)` for `m = 0..=m_max`.
pub fn decay_curve(t: &OperatorMatrix, h: &SpaceVector, m_max: usize) -> Result<Vec<f64>> {
    if !t.is_square() || t.domain() != &h.basis {
        return Err(Error::DimensionMismatch("decay curve needs a square operator on the vector's space".into()));
    }
    let norm = t.norm();
    if norm > 1.0 + 1e-10 {
        return Err(Error::NonContractive { norm });
    }
    let mut v = h.coords.clone();
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(v.norm());
    for _ in 0..m_max {
        v = &t.data * v;
        out.push(v.norm());
    }
    Ok(out)
}

/// `T^m T^{*m}`.
#[derive(Clone, Debug)]
pub struct ATEstimate {
    pub m: usize,
    pub matrix: DMatrix<C64>,
}

pub fn a_operator_estimate(t: &DMatrix<C64>, m: usize) -> Result<ATEstimate> {
    let norm = linalg::spectral_norm(t);
    if norm > 1.0 + 1e-10 {
        return Err(Error::NonContractive { norm });
    }
    let mut power = linalg::identity(t.nrows());
    for _ in 0..m {
        power = t * power;
    }
    Ok(ATEstimate { m, matrix: &power * power.adjoint() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ATMonotonicity {
    /// Smallest eigenvalue of `A(m) - A(m+1)` over `m < m_max`.
    pub min_gap_eigenvalue: f64,
    pub monotone: bool,
}

/// Checks that `T^m T^{*m}` decreases in the Loewner order for `m <= m_max`.
pub fn a_operator_monotonicity(t: &DMatrix<C64>, m_max: usize) -> Result<ATMonotonicity> {
    let mut prev = a_operator_estimate(t, 0)?.matrix;
    let mut power = linalg::identity(t.nrows());
    let mut min_gap = f64::INFINITY;
    for _ in 0..m_max {
        power = t * power;
        let next = &power * power.adjoint();
        min_gap = min_gap.min(linalg::min_hermitian_eigenvalue(&(&prev - &next)));
        prev = next;
    }
    Ok(ATMonotonicity { min_gap_eigenvalue: min_gap, monotone: !(min_gap < -1e-10) })
}

/// `‖A* h‖ >= σ_min(A) ‖h‖` for `h` in the range of a left-invertible `A`.
/// Returns `σ_min` of the exact block.
pub fn range_lower_bound(a: &OperatorMatrix) -> Result<f64> {
    Ok(linalg::sigma_min(&a.exact_block()?.data))
}

#[derive(Clone, Debug)]
pub struct NagyFoiasSplit {
    /// Orthonormal basis of the unitary part.
    pub e0: DMatrix<C64>,
    /// Orthonormal basis of its complement.
    pub e1: DMatrix<C64>,
    pub commutator_residual: f64,
    pub unitary_residual: f64,
    pub rho_e1: f64,
}

impl NagyFoiasSplit {
    pub fn is_pure(&self) -> bool {
        self.e0.ncols() == 0
    }
}

/// Splits a contraction into its unitary part (eigenvalues on the circle)
/// and the rest, and certifies the split.
pub fn nagy_foias_split(t: &DMatrix<C64>, tol: f64) -> Result<NagyFoiasSplit> {
    let n = t.nrows();
    if t.ncols() != n {
        return Err(Error::DimensionMismatch("Nagy-Foias split of a non-square matrix".into()));
    }
    let norm = linalg::spectral_norm(t);
    if norm > 1.0 + tol {
        return Err(Error::NonContractive { norm });
    }
    let eig = linalg::eigenvalues(t)?;
    let boundary: Vec<C64> = eig.iter().copied().filter(|z| z.norm() >= 1.0 - tol).collect();
    let mut vectors: Vec<DMatrix<C64>> = Vec::new();
    let mut seen: Vec<C64> = Vec::new();
    for &lambda in &boundary {
        if seen.iter().any(|s| (s - lambda).norm() <= tol) {
            continue;
        }
        seen.push(lambda);
        let shifted = t - linalg::identity(n) * lambda;
        vectors.push(linalg::null_space(&shifted, tol.max(1e-10)));
    }
    let total: usize = vectors.iter().map(DMatrix::ncols).sum();
    let mut stacked = DMatrix::zeros(n, total);
    let mut c = 0;
    for v in &vectors {
        stacked.columns_mut(c, v.ncols()).copy_from(v);
        c += v.ncols();
    }
    let e0 = linalg::orthonormal_range(&stacked, 1e-10);
    let fail = |lambda: C64, reason: String| Error::CertificationFailed { re: lambda.re, im: lambda.im, reason };
    if e0.ncols() != boundary.len() {
        let lambda = boundary.first().copied().unwrap_or_default();
        return Err(fail(
            lambda,
            format!("{} eigenvalues near the circle but {} eigenvectors", boundary.len(), e0.ncols()),
        ));
    }
    let e1 = linalg::null_space(&e0.adjoint(), 1e-10);
    let p = linalg::projector(&e0);
    let commutator_residual = linalg::spectral_norm(&(t * &p - &p * t));
    let restricted = e0.adjoint() * t * &e0;
    let unitary_residual = if e0.ncols() == 0 { 0.0 } else { linalg::unitarity_residual(&restricted) };
    let rest = e1.adjoint() * t * &e1;
    let rest_eig = if e1.ncols() == 0 { Vec::new() } else { linalg::eigenvalues(&rest)? };
    let worst = rest_eig.iter().copied().fold(C64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    let rho_e1 = worst.norm();
    if commutator_residual > tol {
        return Err(fail(seen.first().copied().unwrap_or_default(), format!("[T, P] = {commutator_residual:e}")));
    }
    if unitary_residual > tol {
        return Err(fail(seen.first().copied().unwrap_or_default(), format!("unitary residual {unitary_residual:e}")));
    }
    if rho_e1 >= 1.0 - tol {
        return Err(fail(worst, format!("complement has spectral radius {rho_e1}")));
    }
    Ok(NagyFoiasSplit { e0, e1, commutator_residual, unitary_residual, rho_e1 })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantRestrictionReport {
    /// `‖P_S M_φ^{*m} P_S ξ‖` for `m = 0..=m_max`.
    pub samples: Vec<f64>,
    pub phi0_abs: f64,
    /// Largest relative deviation of `s_{m+1}` from `|φ(0)| s_m`.
    pub max_ratio_error: f64,
    /// `‖Θ(0)* ξ‖`, the value of `s_0` predicted by the closed form.
    pub predicted_constant: f64,
    pub measured_constant: f64,
    pub innerness_residual: f64,
    /// Largest `m` for which the computation is exact.
    pub certified_m: usize,
    pub pass: bool,
}

/// For an inner `Θ` with `Θ(0) ≠ 0` and `S = Θ H`, the sequence
/// `‖P_S M_φ^{*m} P_S ξ‖` on the Hardy space is `|φ(0)|^m ‖Θ(0)* ξ‖`.
/// `ξ` is the constant basis vector maximizing `‖Θ(0)* ξ‖`.
pub fn invariant_restriction_test(
    phi: &MultiplierSymbol,
    theta: &MultiplierSymbol,
    d: usize,
    m_max: usize,
    tol: f64,
) -> Result<InvariantRestrictionReport> {
    if phi.coeff_dim() != 1 || phi.n() != theta.n() {
        return Err(Error::InvalidInput("φ must be a scalar symbol in the same variables as θ".into()));
    }
    let k = theta.coeff_dim();
    let theta0 = theta.phi0();
    if theta0.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::Precondition("θ(0) = 0".into()));
    }
    let needed = 2 * theta.degree();
    if d < needed {
        return Err(Error::ExactnessBudget { needed, available: d });
    }
    let basis = Arc::new(TruncatedBasis::polydisc(KernelSpec1D::Hardy, theta.n(), d, k)?);
    let m_theta = multiplier_matrix(&basis, theta)?;
    let exact_cols = basis.prefix_dim(d - theta.degree());
    let cols = m_theta.data.columns(0, exact_cols).into_owned();
    let innerness_residual = linalg::isometry_residual(&cols);
    if innerness_residual > 1e-10 {
        return Err(Error::Precondition(format!("θ is not inner on its exact block: {innerness_residual:e}")));
    }
    let mut lifted = MultiplierSymbol::zero(phi.n(), k);
    for (alpha, c) in phi.terms() {
        lifted.add_term(alpha.clone(), linalg::identity(k) * c[(0, 0)])?;
    }
    let phi_adj = adjoint_compression(&basis, &lifted)?.data;
    // P_S = M_Θ M_Θ* is exact on V_{D - deg Θ}, which contains every vector
    // it is applied to below (all of degree <= deg Θ).
    let p_s = &m_theta.data * m_theta.data.adjoint();

    let (j, predicted_constant) = (0..k)
        .map(|j| (j, theta0.row(j).norm()))
        .fold((0, -1.0), |best, x| if x.1 > best.1 { x } else { best });
    let mut xi = nalgebra::DVector::<C64>::zeros(basis.dim());
    xi[j] = C64::new(1.0, 0.0);

    let start = &p_s * xi;
    let mut v = start.clone();
    let mut samples = Vec::with_capacity(m_max + 1);
    samples.push((&p_s * &v).norm());
    for _ in 0..m_max {
        v = &phi_adj * v;
        samples.push((&p_s * &v).norm());
    }
    let phi0_abs = phi.phi0()[(0, 0)].norm();
    let floor = 1e-12 * samples[0];
    let mut max_ratio_error = 0.0_f64;
    let mut pass = true;
    for w in samples.windows(2) {
        if w[0] <= floor {
            pass &= w[1] <= floor;
            continue;
        }
        let err = (w[1] - phi0_abs * w[0]).abs() / w[0];
        max_ratio_error = max_ratio_error.max(err);
        pass &= err <= tol;
    }
    Ok(InvariantRestrictionReport {
        measured_constant: samples[0],
        samples,
        phi0_abs,
        max_ratio_error,
        predicted_constant,
        innerness_residual,
        certified_m: m_max,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceConsistencyReport {
    pub verdict: Verdict,
    /// Verdict of the symbol with `z_i = 0`, by axis.
    pub slice_verdicts: Vec<Verdict>,
    pub pass: bool,
}

/// Purity of `M_Φ` on the Hardy polydisc agrees with purity of every slice
/// `Φ|_{z_i = 0}` on the polydisc of one dimension less.
pub fn slice_purity_consistency(phi: &MultiplierSymbol, d_max: usize, tol: f64) -> Result<SliceConsistencyReport> {
    if phi.n() < 2 {
        return Err(Error::InvalidInput("slicing needs at least two variables".into()));
    }
    let full = multiplier_purity_verdict(phi, &Domain::polydisc(KernelSpec1D::Hardy, phi.n()), d_max, tol)?;
    let mut slice_verdicts = Vec::with_capacity(phi.n());
    for axis in 0..phi.n() {
        let sliced = slice_symbol(phi, axis)?;
        let domain = Domain::polydisc(KernelSpec1D::Hardy, phi.n() - 1);
        slice_verdicts.push(multiplier_purity_verdict(&sliced, &domain, d_max, tol)?.verdict);
    }
    let pass = full.verdict != Verdict::Inconsistent && slice_verdicts.iter().all(|v| *v == full.verdict);
    Ok(SliceConsistencyReport { verdict: full.verdict, slice_verdicts, pass })
}

/// The constant term `1` as a scalar symbol in `n` variables.
pub fn scalar_constant(n: usize, c: C64) -> MultiplierSymbol {
    MultiplierSymbol::scalar(n, &[(MultiIndex::zero(n), c)]).expect("scalar term")
}
