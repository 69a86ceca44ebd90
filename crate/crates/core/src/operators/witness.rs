//! Search for a vector `η ∈ M` with `X_i* η ⊥ M` for every `i`, for a proper
//! invariant subspace `M` with `W(X) ⊥ M`.
//!
//! For each `h` in the wandering subspace (frame order) the search looks at
//! the dual orbit `X'^m h`, `|m| <= budget`, and takes the lexicographically
//! least `m` whose orbit vector is not orthogonal to `M`, minimizing `m_1`
//! first, then `m_2`, and so on. Then `η = P_M X'^m h`. The choice is a
//! convention; any lexicographic minimum works because `X_i* X'^m h` is
//! either zero or `X'^(m - e_i) h`, which is orthogonal to `M`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::matrix::{shift_tuple, OperatorMatrix};
use crate::operators::projections::{wandering_subspace, SubspaceFrame, LEFT_INVERTIBLE_TOL, NULL_THRESHOLD};
use crate::operators::wandering::{dual_tuple, orbit_vectors};
use crate::spaces::{MultiIndex, SpaceVector, TruncatedBasis};
use crate::C64;

#[derive(Clone, Debug)]
pub struct Witness {
    pub eta: SpaceVector,
    /// Position of `h` in the wandering-subspace frame.
    pub h_index: usize,
    pub multi_index: MultiIndex,
    /// `‖P_M X_i* η‖` for each `i`.
    pub residuals: Vec<f64>,
}

impl Witness {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub enum WitnessOutcome {
    Found(Witness),
    /// No orbit vector up to the budget meets `M`; the truncation is too small.
    BudgetExhausted { budget: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessPreconditions {
    pub invariance_residual: f64,
    /// `‖P_M P_W‖`, zero when `W(X) ⊥ M`.
    pub wandering_overlap: f64,
    pub subspace_dim: usize,
    pub space_dim: usize,
}

pub fn witness_preconditions(
    tuple: &[OperatorMatrix],
    m: &SubspaceFrame,
    tol: f64,
) -> Result<WitnessPreconditions> {
    let basis = Arc::clone(m.basis());
    if m.dim() == 0 || m.dim() == basis.dim() {
        return Err(Error::Precondition(format!(
            "subspace of dimension {} in a space of dimension {} is not proper",
            m.dim(),
            basis.dim()
        )));
    }
    let q = m.columns();
    let p = m.projector();
    let mut invariance_residual = 0.0_f64;
    for x in tuple {
        if !x.is_square() || x.domain() != &basis {
            return Err(Error::DimensionMismatch("tuple must be square on the subspace's space".into()));
        }
        let xq = &x.data * q;
        invariance_residual = invariance_residual.max(linalg::spectral_norm(&(&xq - &p * &xq)));
    }
    let w = wandering_subspace(tuple, NULL_THRESHOLD)?;
    let wandering_overlap = linalg::spectral_norm(&(q.adjoint() * w.columns()));
    let report = WitnessPreconditions {
        invariance_residual,
        wandering_overlap,
        subspace_dim: m.dim(),
        space_dim: basis.dim(),
    };
    if invariance_residual > tol {
        return Err(Error::Precondition(format!("subspace is not invariant: residual {invariance_residual:e}")));
    }
    if wandering_overlap > tol {
        return Err(Error::Precondition(format!(
            "wandering subspace is not orthogonal to the subspace: overlap {wandering_overlap:e}"
        )));
    }
    Ok(report)
}

/// Lexicographic minimum obtained one coordinate at a time.
fn coordinatewise_min(candidates: &[MultiIndex]) -> Option<MultiIndex> {
    let n = candidates.first()?.n();
    let mut pool: Vec<&MultiIndex> = candidates.iter().collect();
    for i in 0..n {
        let least = pool.iter().map(|m| m.entries()[i]).min()?;
        pool.retain(|m| m.entries()[i] == least);
    }
    pool.first().map(|m| (*m).clone())
}

pub fn wandering_witness(
    tuple: &[OperatorMatrix],
    m: &SubspaceFrame,
    budget: usize,
    tol: f64,
) -> Result<WitnessOutcome> {
    witness_preconditions(tuple, m, tol)?;
    let basis = Arc::clone(m.basis());
    let budget = budget.min(basis.degree_cap());
    let duals = dual_tuple(tuple, LEFT_INVERTIBLE_TOL)?;
    let w = wandering_subspace(tuple, NULL_THRESHOLD)?;
    let q = m.columns();
    let p = m.projector();
    for h_index in 0..w.dim() {
        let h = w.columns().columns(h_index, 1).into_owned();
        let orbit = orbit_vectors(&duals, &h, budget)?;
        let hits: Vec<MultiIndex> = orbit
            .iter()
            .filter(|(_, v)| linalg::spectral_norm(&(q.adjoint() * v)) > tol)
            .map(|(idx, _)| idx.clone())
            .collect();
        let Some(best) = coordinatewise_min(&hits) else { continue };
        let v = &orbit.iter().find(|(idx, _)| *idx == best).expect("hit is in the orbit").1;
        let eta = &p * v;
        let residuals = tuple
            .iter()
            .map(|x| linalg::spectral_norm(&(&p * (x.data.adjoint() * &eta))))
            .collect();
        let eta = SpaceVector::new(Arc::clone(&basis), eta.column(0).into_owned())?;
        return Ok(WitnessOutcome::Found(Witness { eta, h_index, multi_index: best, residuals }));
    }
    Ok(WitnessOutcome::BudgetExhausted { budget })
}

/// Smallest subspace containing the columns of `generators` and invariant
/// under the coordinate shifts of `basis`. Each generator must be supported
/// on a single degree block of degree at least one, so that the truncated
/// shifts map the span into itself.
pub fn generated_invariant_subspace(basis: &Arc<TruncatedBasis>, generators: &DMatrix<C64>) -> Result<SubspaceFrame> {
    if generators.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows for a basis of dimension {}",
            generators.nrows(),
            basis.dim()
        )));
    }
    for (c, g) in generators.column_iter().enumerate() {
        let degrees: Vec<usize> = (0..=basis.degree_cap())
            .filter(|&d| basis.degree_block(d).any(|r| g[r].norm() > 0.0))
            .collect();
        if degrees.len() != 1 || degrees[0] == 0 {
            return Err(Error::Precondition(format!(
                "generator {c} must be homogeneous of positive degree, has degrees {degrees:?}"
            )));
        }
    }
    let shifts = shift_tuple(basis)?;
    let orbit = orbit_vectors(&shifts, generators, basis.degree_cap())?;
    let total: usize = orbit.iter().map(|(_, v)| v.ncols()).sum();
    let mut stacked = DMatrix::zeros(basis.dim(), total);
    let mut c = 0;
    for (_, v) in &orbit {
        stacked.columns_mut(c, v.ncols()).copy_from(v);
        c += v.ncols();
    }
    SubspaceFrame::span(Arc::clone(basis), &stacked)
}
