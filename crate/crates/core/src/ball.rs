//! Defect identities for shift tuples on unitarily invariant spaces of the
//! ball, and the wandering subspace of a shift-invariant subspace.
//!
//! All sums are assembled on `V_D` in the normalized monomial basis. Each
//! `M^β M^{*β}` is exact there: `M^{*β}` lowers degree and `M^β` raises it
//! back to at most `D`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{chen_coeffs, BallFamily};
use crate::linalg;
use crate::operators::matrix::shift_tuple;
use crate::operators::projections::{SubspaceFrame, NULL_THRESHOLD};
use crate::spaces::{homogeneous_indices, Domain, MultiIndex, TruncatedBasis};
use crate::C64;

/// `γ_α = |α|! / α!` for `|α| <= m`.
#[derive(Clone, Debug)]
pub struct GammaTable {
    pub n: usize,
    pub m: usize,
    pub values: BTreeMap<MultiIndex, u64>,
}

pub fn gamma_coeffs(n: usize, m: usize) -> Result<GammaTable> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("gamma table needs n >= 1 and m >= 1".into()));
    }
    let mut values = BTreeMap::new();
    for d in 0..=m {
        for alpha in homogeneous_indices(n, d) {
            let g = alpha.multinomial().ok_or(Error::OutOfRange {
                what: "multinomial degree",
                value: d,
                cap: d.saturating_sub(1),
            })?;
            values.insert(alpha, g);
        }
    }
    Ok(GammaTable { n, m, values })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub residual_norm: f64,
    /// Degree of the truncation on which the residual is exact.
    pub certified_block: usize,
    /// Number of `M^β M^{*β}` terms assembled.
    pub term_count: usize,
}

/// Matrices `M^β` for every `β` with `|β| <= d`, keyed by `β`.
fn shift_powers(basis: &Arc<TruncatedBasis>, d: usize) -> Result<BTreeMap<MultiIndex, DMatrix<C64>>> {
    let shifts = shift_tuple(basis)?;
    let n = basis.n();
    let mut powers: BTreeMap<MultiIndex, DMatrix<C64>> = BTreeMap::new();
    for deg in 0..=d {
        for beta in homogeneous_indices(n, deg) {
            let m = match beta.entries().iter().position(|&a| a > 0) {
                None => linalg::identity(basis.dim()),
                Some(i) => {
                    let prev = beta.checked_sub(&MultiIndex::unit(n, i)).expect("positive entry");
                    &shifts[i].data * &powers[&prev]
                }
            };
            powers.insert(beta, m);
        }
    }
    Ok(powers)
}

fn constant_projection(basis: &TruncatedBasis) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(basis.dim(), basis.dim());
    for j in 0..basis.coeff_dim() {
        p[(j, j)] = C64::new(1.0, 0.0);
    }
    p
}

fn ball_basis_parameter(basis: &TruncatedBasis) -> Result<u32> {
    match basis.domain() {
        Domain::Ball { kernel } => match kernel.family {
            BallFamily::Hm { m } => Ok(m),
            BallFamily::UnitarilyInvariant { .. } => {
                Err(Error::FamilyMismatch("defect identity needs an H_m(B_n) kernel".into()))
            }
        },
        Domain::Polydisc { .. } => Err(Error::FamilyMismatch("defect identity needs a ball space".into())),
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + 1 - i) as f64 / i as f64)
}

/// Residual of
/// `I - Σ_{j=0}^{m-1} (-1)^j C(m, j+1) Σ_{|α|=j+1} γ_α M^α M^{*α} = P_E`
/// on `V_D` of `H_m(B_n) ⊗ E`.
pub fn defect_identity_residual(basis: &Arc<TruncatedBasis>) -> Result<IdentityResidual> {
    let m = ball_basis_parameter(basis)? as usize;
    let gamma = gamma_coeffs(basis.n(), m)?;
    let top = m.min(basis.degree_cap());
    let powers = shift_powers(basis, top)?;
    let mut sum = linalg::identity(basis.dim());
    let mut term_count = 0;
    for j in 0..m {
        let deg = j + 1;
        if deg > basis.degree_cap() {
            // M^{*α} vanishes on V_D for |α| > D.
            break;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let outer = sign * binomial(m as u64, deg as u64);
        for alpha in homogeneous_indices(basis.n(), deg) {
            let g = gamma.values[&alpha] as f64;
            let p = &powers[&alpha];
            sum -= p * p.adjoint() * C64::new(outer * g, 0.0);
            term_count += 1;
        }
    }
    let residual_norm = linalg::spectral_norm(&(sum - constant_projection(basis)));
    Ok(IdentityResidual { residual_norm, certified_block: basis.degree_cap(), term_count })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChenIdentityReport {
    pub residual: IdentityResidual,
    /// `c_j` of `1/k`, `j = 0..=D`.
    pub coefficients: Vec<f64>,
    /// `⟨Σ_{1<=|β|<=N} c_{|β|} γ_β M^β M^{*β} h, h⟩` for `N = 0..=D` on the
    /// all-ones probe vector.
    pub partial_sums: Vec<f64>,
    /// Largest increase between consecutive partial sums.
    pub max_increase: f64,
    /// Largest eigenvalue of a single degree-`N` term.
    pub max_term_eigenvalue: f64,
    pub monotone: bool,
}

/// Residual of `Σ_{|β|<=D} c_{|β|} (|β|!/β!) M^β M^{*β} = P_E` on `V_D`,
/// with `c` the coefficients of `1/k`. Refuses kernels whose `c_j`, `j >= 1`,
/// are not all nonpositive to order `D`.
pub fn chen_identity_residual(basis: &Arc<TruncatedBasis>, tol: f64) -> Result<ChenIdentityReport> {
    let kernel = match basis.domain() {
        Domain::Ball { kernel } => kernel,
        Domain::Polydisc { .. } => {
            return Err(Error::FamilyMismatch("Chen identity needs a ball space".into()));
        }
    };
    let d = basis.degree_cap();
    let chen = chen_coeffs(kernel, d, tol)?;
    if !chen.signs_ok {
        let (index, value) = chen
            .c
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, &x)| x > tol)
            .map(|(i, &x)| (i, x))
            .expect("a sign violation exists");
        return Err(Error::NotCnp { index, value });
    }
    let powers = shift_powers(basis, d)?;
    let dim = basis.dim();
    let probe = nalgebra::DVector::from_element(dim, C64::new(1.0, 0.0));
    let mut sum = DMatrix::zeros(dim, dim);
    let mut partial = DMatrix::<C64>::zeros(dim, dim);
    let mut partial_sums = vec![0.0];
    let mut max_term_eigenvalue = f64::NEG_INFINITY;
    let mut term_count = 0;
    for deg in 0..=d {
        let mut level = DMatrix::<C64>::zeros(dim, dim);
        for beta in homogeneous_indices(basis.n(), deg) {
            let g = beta.multinomial().ok_or(Error::OutOfRange { what: "multinomial degree", value: deg, cap: d })?;
            let p = &powers[&beta];
            level += p * p.adjoint() * C64::new(chen.c.coeffs[deg] * g as f64, 0.0);
            term_count += 1;
        }
        sum += &level;
        if deg >= 1 {
            max_term_eigenvalue = max_term_eigenvalue.max(linalg::max_hermitian_eigenvalue(&level));
            partial += &level;
            partial_sums.push(probe.dotc(&(&partial * &probe)).re);
        }
    }
    let residual_norm = linalg::spectral_norm(&(sum - constant_projection(basis)));
    let max_increase = partial_sums.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let max_term_eigenvalue = if d == 0 { 0.0 } else { max_term_eigenvalue };
    let monotone = !(max_increase > 1e-12) && !(max_term_eigenvalue > 1e-12);
    Ok(ChenIdentityReport {
        residual: IdentityResidual { residual_norm, certified_block: d, term_count },
        coefficients: chen.c.coeffs,
        partial_sums,
        max_increase,
        max_term_eigenvalue,
        monotone,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularWanderingReport {
    pub subspace_dim: usize,
    pub wandering_dim: usize,
    pub invariance_residual: f64,
    /// `dim M > 0` exactly when `dim W(M_z|_M) > 0`.
    pub consistent: bool,
}

/// Wandering subspace of the shift tuple restricted to an invariant `M`:
/// the joint kernel of the compressions `P_M M_{z_i}* |_M`.
pub fn regular_wandering_check(
    basis: &Arc<TruncatedBasis>,
    m: &SubspaceFrame,
    tol: f64,
) -> Result<(RegularWanderingReport, SubspaceFrame)> {
    if m.basis() != basis {
        return Err(Error::DimensionMismatch("subspace lives on another basis".into()));
    }
    let shifts = shift_tuple(basis)?;
    let q = m.columns();
    let p = m.projector();
    let mut invariance_residual = 0.0_f64;
    let mut blocks = Vec::with_capacity(shifts.len());
    for s in &shifts {
        let sq = &s.data * q;
        invariance_residual = invariance_residual.max(linalg::spectral_norm(&(&sq - &p * &sq)));
        blocks.push(q.adjoint() * s.data.adjoint() * q);
    }
    if invariance_residual > tol {
        return Err(Error::Precondition(format!("subspace is not shift invariant: {invariance_residual:e}")));
    }
    let k = m.dim();
    let wandering = if k == 0 {
        SubspaceFrame::zero(Arc::clone(basis))
    } else {
        let mut stacked = DMatrix::zeros(k * blocks.len(), k);
        for (i, b) in blocks.iter().enumerate() {
            stacked.rows_mut(i * k, k).copy_from(b);
        }
        let coeffs = linalg::null_space(&stacked, NULL_THRESHOLD);
        SubspaceFrame::span(Arc::clone(basis), &(q * coeffs))?
    };
    let report = RegularWanderingReport {
        subspace_dim: k,
        wandering_dim: wandering.dim(),
        invariance_residual,
        consistent: (k > 0) == (wandering.dim() > 0),
    };
    Ok((report, wandering))
}
