//! Wandering-subspace structure of shift-like tuples at a finite truncation.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::matrix::{shift_tuple, OperatorMatrix};
use crate::operators::projections::{
    cauchy_dual, range_projection, union_projection, wandering_subspace, SubspaceFrame, NULL_THRESHOLD,
};
use crate::spaces::{enumerate_indices, MultiIndex};
use crate::C64;

/// Cauchy duals of a tuple, zero-extended back to square matrices on the
/// common space so they can be iterated.
pub fn dual_tuple(tuple: &[OperatorMatrix], tol: f64) -> Result<Vec<OperatorMatrix>> {
    tuple
        .iter()
        .map(|x| cauchy_dual(x, tol)?.extend_domain(Arc::clone(x.codomain())))
        .collect()
}

/// Vectors `X^m w` for every frame column `w` and every `|m| <= max_degree`,
/// keyed by `m`. `X` must be square on one space.
pub fn orbit_vectors(
    tuple: &[OperatorMatrix],
    start: &DMatrix<C64>,
    max_degree: usize,
) -> Result<Vec<(MultiIndex, DMatrix<C64>)>> {
    let n = tuple.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty operator tuple".into()));
    }
    if tuple.iter().any(|x| !x.is_square() || x.data.nrows() != start.nrows()) {
        return Err(Error::DimensionMismatch("tuple must be square on the space of the start vectors".into()));
    }
    let indices = enumerate_indices(n, max_degree);
    let mut cache: HashMap<MultiIndex, DMatrix<C64>> = HashMap::new();
    let mut out = Vec::with_capacity(indices.len());
    for m in indices {
        let v = match m.entries().iter().position(|&a| a > 0) {
            None => start.clone(),
            Some(i) => {
                let prev = m.checked_sub(&MultiIndex::unit(n, i)).expect("entry is positive");
                &tuple[i].data * &cache[&prev]
            }
        };
        cache.insert(m.clone(), v.clone());
        out.push((m, v));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct WanderingPropertyReport {
    pub space_dim: usize,
    pub wandering_dim: usize,
    /// Rank of `{X^m W : |m| <= D}`.
    pub orbit_rank: usize,
    pub pass: bool,
}

/// Checks that `{X^m W(X) : |m| <= D}` spans the whole truncation.
pub fn wandering_property_check(tuple: &[OperatorMatrix], tol: f64) -> Result<WanderingPropertyReport> {
    let w = wandering_subspace(tuple, tol)?;
    let basis = w.basis();
    let orbit = orbit_vectors(tuple, w.columns(), basis.degree_cap())?;
    let total: usize = orbit.iter().map(|(_, v)| v.ncols()).sum();
    let mut stacked = DMatrix::zeros(basis.dim(), total);
    let mut c = 0;
    for (_, v) in &orbit {
        stacked.columns_mut(c, v.ncols()).copy_from(v);
        c += v.ncols();
    }
    let orbit_rank = linalg::rank(&stacked, NULL_THRESHOLD);
    Ok(WanderingPropertyReport {
        space_dim: basis.dim(),
        wandering_dim: w.dim(),
        orbit_rank,
        pass: orbit_rank == basis.dim(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    /// `‖(I - Π(I - P_i)) - (I - P_W)‖` with `P_i` the range projections.
    pub residual: f64,
    pub wandering_dim: usize,
}

/// The range of `Σ X_i` is the orthogonal complement of `W(X)`: compares the
/// union of the range projections of the `X_i` with `I - P_{W(X)}`.
pub fn wandering_decomposition_check(tuple: &[OperatorMatrix], tol: f64) -> Result<DecompositionReport> {
    let projections = tuple.iter().map(|x| range_projection(x, tol)).collect::<Result<Vec<_>>>()?;
    let union = union_projection(&projections, tol.max(1e-10))?;
    let w = wandering_subspace(tuple, NULL_THRESHOLD)?;
    let expected = linalg::identity(w.basis().dim()) - w.projector();
    Ok(DecompositionReport {
        residual: linalg::spectral_norm(&(union.data - expected)),
        wandering_dim: w.dim(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialIsometryWanderingReport {
    /// Degree of the exact block of `Π` used.
    pub certified_degree: usize,
    pub partial_isometry_residual: f64,
    /// `dim (S ⊖ Σ_i z_i S)` with `S = Π V_d`.
    pub lhs_dim: usize,
    /// `dim Π((ker Π)^⊥ ∩ W(M_z))`.
    pub rhs_dim: usize,
    pub max_angle: f64,
}

/// For a partially isometric multiplier `Π` commuting with the shifts, the
/// wandering subspace of the shifts restricted to `S = ran Π` is the image
/// under `Π` of `(ker Π)^⊥ ∩ W(M_z)`. Both sides are built on the exact block
/// `V_d` of `Π`.
pub fn partial_isometry_wandering_check(pi: &OperatorMatrix, tol: f64) -> Result<PartialIsometryWanderingReport> {
    let block = pi.exact_block()?;
    let d = block.domain().degree_cap();
    if d == 0 {
        return Err(Error::ExactnessBudget { needed: 1, available: 0 });
    }
    let gram = block.data.adjoint() * &block.data;
    let partial_isometry_residual = linalg::projection_residual(&gram);
    if partial_isometry_residual > tol {
        return Err(Error::Precondition(format!(
            "operator is not a partial isometry on its exact block: {partial_isometry_residual:e}"
        )));
    }
    let codomain = Arc::clone(block.codomain());
    let domain = Arc::clone(block.domain());

    let s = SubspaceFrame::span(Arc::clone(&codomain), &block.data)?;
    let shifts = shift_tuple(&domain)?;
    let mut images = Vec::new();
    for x in &shifts {
        let raised = x.exact_block()?;
        images.push(&block.data * &raised.data);
    }
    let cols: usize = images.iter().map(DMatrix::ncols).sum();
    let mut stacked = DMatrix::zeros(codomain.dim(), cols);
    let mut c = 0;
    for im in &images {
        stacked.columns_mut(c, im.ncols()).copy_from(im);
        c += im.ncols();
    }
    let shifted = SubspaceFrame::span(Arc::clone(&codomain), &stacked)?;
    let inside = linalg::null_space(&(shifted.columns().adjoint() * s.columns()), NULL_THRESHOLD);
    let lhs = SubspaceFrame::span(Arc::clone(&codomain), &(s.columns() * inside))?;

    let support = SubspaceFrame::span(Arc::clone(&domain), &gram)?;
    let w = wandering_subspace(&shifts, NULL_THRESHOLD)?;
    let meet = support.intersect(&w);
    let rhs = SubspaceFrame::span(codomain, &(&block.data * meet.columns()))?;

    Ok(PartialIsometryWanderingReport {
        certified_degree: d,
        partial_isometry_residual,
        lhs_dim: lhs.dim(),
        rhs_dim: rhs.dim(),
        max_angle: lhs.max_angle(&rhs),
    })
}
