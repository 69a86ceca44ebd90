//! BCL pairs `Φ_p = (P + z_p P^⊥) U*`, `Φ_q = U (P^⊥ + z_p P)` and the
//! commuting isometric tuple they generate on the Hardy polydisc space.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec1D;
use crate::linalg;
use crate::operators::matrix::{multiplier_matrix, shift_matrix, OperatorMatrix};
use crate::operators::symbol::MultiplierSymbol;
use crate::purity::{multiplier_purity_verdict, PurityReport, Verdict};
use crate::spaces::{Domain, MultiIndex, TruncatedBasis};
use crate::{wire, C64};

use super::UNITARY_TOL;

pub const PROJECTION_TOL: f64 = 1e-12;

/// `(E, U, P)` with an axis `p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawTriple", into = "RawTriple")]
pub struct BCLTriple {
    u: DMatrix<C64>,
    p: DMatrix<C64>,
    axis: usize,
}

#[derive(Serialize, Deserialize)]
struct RawTriple {
    e_dim: usize,
    #[serde(with = "wire::matrix")]
    u: DMatrix<C64>,
    #[serde(with = "wire::matrix")]
    p: DMatrix<C64>,
    axis: usize,
}

impl TryFrom<RawTriple> for BCLTriple {
    type Error = Error;

    fn try_from(raw: RawTriple) -> Result<Self> {
        if raw.u.nrows() != raw.e_dim {
            return Err(Error::DimensionMismatch(format!(
                "e_dim is {} but U has {} rows",
                raw.e_dim,
                raw.u.nrows()
            )));
        }
        BCLTriple::new(raw.u, raw.p, raw.axis)
    }
}

impl From<BCLTriple> for RawTriple {
    fn from(t: BCLTriple) -> Self {
        RawTriple { e_dim: t.e_dim(), u: t.u, p: t.p, axis: t.axis }
    }
}

impl BCLTriple {
    pub fn new(u: DMatrix<C64>, p: DMatrix<C64>, axis: usize) -> Result<Self> {
        let t = BCLTriple { u, p, axis };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let e = self.u.nrows();
        if e == 0 || !self.u.is_square() || self.p.nrows() != e || self.p.ncols() != e {
            return Err(Error::DimensionMismatch(format!(
                "U is {}x{}, P is {}x{}",
                self.u.nrows(),
                self.u.ncols(),
                self.p.nrows(),
                self.p.ncols()
            )));
        }
        let residual = linalg::unitarity_residual(&self.u);
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        let residual = linalg::projection_residual(&self.p);
        if residual > PROJECTION_TOL {
            return Err(Error::NotProjection { residual });
        }
        Ok(())
    }

    pub fn e_dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &DMatrix<C64> {
        &self.u
    }

    pub fn p(&self) -> &DMatrix<C64> {
        &self.p
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    fn p_perp(&self) -> DMatrix<C64> {
        linalg::identity(self.e_dim()) - &self.p
    }
}

/// `(Φ_p, Φ_q)` as symbols in `num_vars` variables, linear in `z_p`.
pub fn bcl_pair(t: &BCLTriple, num_vars: usize) -> Result<(MultiplierSymbol, MultiplierSymbol)> {
    t.validate()?;
    if t.axis >= num_vars {
        return Err(Error::AxisOutOfRange { axis: t.axis, n: num_vars });
    }
    let zero = MultiIndex::zero(num_vars);
    let zp = MultiIndex::unit(num_vars, t.axis);
    let u_star = t.u.adjoint();
    let p_perp = t.p_perp();
    let mut phi_p = MultiplierSymbol::zero(num_vars, t.e_dim());
    phi_p.add_term(zero.clone(), &t.p * &u_star)?;
    phi_p.add_term(zp.clone(), &p_perp * &u_star)?;
    let mut phi_q = MultiplierSymbol::zero(num_vars, t.e_dim());
    phi_q.add_term(zero, &t.u * &p_perp)?;
    phi_q.add_term(zp, &t.u * &t.p)?;
    Ok((phi_p, phi_q))
}

/// Tolerances used by [`bcl_dilation_certify`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BCLTolerances {
    /// Coefficient error of `Φ_p Φ_q = Φ_q Φ_p = z_p I`.
    pub identity: f64,
    /// Commutator and isometry residuals on exactness blocks.
    pub residual: f64,
    pub purity: f64,
}

impl Default for BCLTolerances {
    fn default() -> Self {
        BCLTolerances { identity: 1e-12, residual: 1e-10, purity: crate::purity::PURITY_TOL }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BCLReport {
    pub identity_error: f64,
    /// Largest pairwise commutator norm on the common exactness block.
    pub commutator_residual: f64,
    pub commutator_degree: usize,
    /// Largest `‖T*T - I‖` over the tuple, on exactness blocks.
    pub isometry_residual: f64,
    pub isometry_degree: usize,
    pub phi_p: PurityReport,
    pub phi_q: PurityReport,
    /// `ρ(P U*) = ρ(Φ_p(0))`.
    pub rho_pu: f64,
    /// `ρ(U P^⊥) = ρ(Φ_q(0))`.
    pub rho_up_perp: f64,
    pub phi_p_agrees: bool,
    pub phi_q_agrees: bool,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Builds `(M_{z_i})_{i != p}, M_{Φ_p}, M_{Φ_q}` on `H²(D^{n-1}) ⊗ E`
/// truncated at degree `d` and checks it on exactness blocks.
pub fn bcl_dilation_certify(t: &BCLTriple, n: usize, d: usize, tol: &BCLTolerances) -> Result<BCLReport> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("tuple length {n} < 2")));
    }
    if d < 2 {
        return Err(Error::ExactnessBudget { needed: 2, available: d });
    }
    let num_vars = n - 1;
    let (phi_p, phi_q) = bcl_pair(t, num_vars)?;
    let mut failures = Vec::new();

    let zp = MultiplierSymbol::variable(num_vars, t.e_dim(), t.axis)?;
    let pq = phi_p.mul(&phi_q)?;
    let qp = phi_q.mul(&phi_p)?;
    let identity_error = pq.max_coeff_diff(&zp)?.max(qp.max_coeff_diff(&zp)?);
    if identity_error > tol.identity {
        failures.push(format!("BCL identity error {identity_error:.3e} > {:.1e}", tol.identity));
    }

    let domain = Domain::polydisc(KernelSpec1D::Hardy, num_vars);
    let basis = Arc::new(TruncatedBasis::new(domain.clone(), d, t.e_dim())?);
    let mut tuple: Vec<OperatorMatrix> = (0..num_vars)
        .filter(|&i| i != t.axis)
        .map(|i| shift_matrix(&basis, i))
        .collect::<Result<_>>()?;
    tuple.push(multiplier_matrix(&basis, &phi_p)?);
    tuple.push(multiplier_matrix(&basis, &phi_q)?);

    let mut commutator_residual = 0.0_f64;
    let mut commutator_degree = d;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let ab = tuple[i].compose(&tuple[j])?;
            let ba = tuple[j].compose(&tuple[i])?;
            let diff = ab.add_scaled(C64::new(-1.0, 0.0), &ba)?;
            let block = diff.exact_block()?;
            commutator_degree = commutator_degree.min(diff.exactness.degree.unwrap_or(0));
            commutator_residual = commutator_residual.max(block.norm());
        }
    }
    if commutator_residual > tol.residual {
        failures.push(format!("commutator residual {commutator_residual:.3e} > {:.1e}", tol.residual));
    }

    let mut isometry_residual = 0.0_f64;
    let mut isometry_degree = d;
    for op in &tuple {
        let block = op.exact_block()?;
        isometry_degree = isometry_degree.min(op.exactness.degree.unwrap_or(0));
        isometry_residual = isometry_residual.max(linalg::isometry_residual(&block.data));
    }
    if isometry_residual > tol.residual {
        failures.push(format!("isometry residual {isometry_residual:.3e} > {:.1e}", tol.residual));
    }

    let rho_pu = linalg::spectral_radius(&(&t.p * t.u.adjoint()))?;
    let rho_up_perp = linalg::spectral_radius(&(&t.u * t.p_perp()))?;
    let phi_p_report = multiplier_purity_verdict(&phi_p, &domain, d, tol.purity)?;
    let phi_q_report = multiplier_purity_verdict(&phi_q, &domain, d, tol.purity)?;
    let threshold = 1.0 - tol.purity;
    let agrees = |report: &PurityReport, rho: f64| match report.verdict {
        Verdict::Pure => rho < threshold,
        Verdict::NotPure => rho >= threshold,
        Verdict::Inconsistent => false,
    };
    let phi_p_agrees = agrees(&phi_p_report, rho_pu);
    let phi_q_agrees = agrees(&phi_q_report, rho_up_perp);
    if !phi_p_agrees {
        failures.push(format!("M_Φp verdict {:?} disagrees with ρ(PU*) = {rho_pu}", phi_p_report.verdict));
    }
    if !phi_q_agrees {
        failures.push(format!("M_Φq verdict {:?} disagrees with ρ(UP^⊥) = {rho_up_perp}", phi_q_report.verdict));
    }

    Ok(BCLReport {
        identity_error,
        commutator_residual,
        commutator_degree,
        isometry_residual,
        isometry_degree,
        phi_p: phi_p_report,
        phi_q: phi_q_report,
        rho_pu,
        rho_up_perp,
        phi_p_agrees,
        phi_q_agrees,
        pass: failures.is_empty(),
        failures,
    })
}
