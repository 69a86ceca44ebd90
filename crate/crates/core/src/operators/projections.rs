//! Subspace frames, Cauchy duals, range projections and wandering subspaces.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::matrix::{Exactness, OperatorMatrix};
use crate::spaces::TruncatedBasis;
use crate::C64;

/// Singular-value threshold for null spaces and ranks.
pub const NULL_THRESHOLD: f64 = 1e-10;
/// Default lower bound on `σ_min` for left-invertibility.
pub const LEFT_INVERTIBLE_TOL: f64 = 1e-8;

/// Orthonormal frame of a subspace of `V_D ⊗ E`.
#[derive(Clone, Debug)]
pub struct SubspaceFrame {
    basis: Arc<TruncatedBasis>,
    columns: DMatrix<C64>,
}

impl SubspaceFrame {
    /// Wraps columns that are already orthonormal (to 1e-12).
    pub fn new(basis: Arc<TruncatedBasis>, columns: DMatrix<C64>) -> Result<Self> {
        if columns.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "frame with {} rows for a basis of dimension {}",
                columns.nrows(),
                basis.dim()
            )));
        }
        let residual = linalg::isometry_residual(&columns);
        if residual > 1e-12 {
            return Err(Error::InvalidInput(format!("frame columns are not orthonormal: {residual:e}")));
        }
        Ok(SubspaceFrame { basis, columns })
    }

    /// Orthonormal frame of the column span of `vectors`.
    pub fn span(basis: Arc<TruncatedBasis>, vectors: &DMatrix<C64>) -> Result<Self> {
        if vectors.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows for a basis of dimension {}",
                vectors.nrows(),
                basis.dim()
            )));
        }
        let columns = linalg::orthonormal_range(vectors, NULL_THRESHOLD);
        Ok(SubspaceFrame { basis, columns })
    }

    pub fn zero(basis: Arc<TruncatedBasis>) -> Self {
        let rows = basis.dim();
        SubspaceFrame { basis, columns: DMatrix::zeros(rows, 0) }
    }

    pub fn full(basis: Arc<TruncatedBasis>) -> Self {
        let columns = linalg::identity(basis.dim());
        SubspaceFrame { basis, columns }
    }

    pub fn basis(&self) -> &Arc<TruncatedBasis> {
        &self.basis
    }

    pub fn columns(&self) -> &DMatrix<C64> {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn projector(&self) -> DMatrix<C64> {
        linalg::projector(&self.columns)
    }

    /// Frame of the orthogonal complement.
    pub fn complement(&self) -> SubspaceFrame {
        let columns = linalg::null_space(&self.columns.adjoint(), NULL_THRESHOLD);
        SubspaceFrame { basis: Arc::clone(&self.basis), columns }
    }

    /// Largest principal angle to another frame (`π/2` if dimensions differ).
    pub fn max_angle(&self, other: &SubspaceFrame) -> f64 {
        linalg::max_principal_angle(&self.columns, &other.columns)
    }

    /// Frame of `self ∩ other`.
    pub fn intersect(&self, other: &SubspaceFrame) -> SubspaceFrame {
        // x = Q_a y lies in `other` iff (I - P_b) Q_a y = 0.
        let residual = &self.columns - other.projector() * &self.columns;
        let coeffs = linalg::null_space(&residual, NULL_THRESHOLD);
        let columns = linalg::orthonormal_range(&(&self.columns * coeffs), NULL_THRESHOLD);
        SubspaceFrame { basis: Arc::clone(&self.basis), columns }
    }
}

fn left_invertible_block(t: &OperatorMatrix, tol: f64) -> Result<(OperatorMatrix, DMatrix<C64>)> {
    let block = t.exact_block()?;
    let sigma_min = linalg::sigma_min(&block.data);
    if !(sigma_min > tol) {
        return Err(Error::NotBoundedBelow { sigma_min });
    }
    let gram = block.data.adjoint() * &block.data;
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Numerical("Gram matrix is singular".into()))?;
    Ok((block, inv))
}

/// Cauchy dual `T' = T (T*T)^{-1}`, computed on the exact block of `T`.
///
/// The result maps `V_{d*}` into the codomain of `T`. It stays exact when
/// `T` is graded, since then `T*T` preserves each `V_d`.
pub fn cauchy_dual(t: &OperatorMatrix, tol: f64) -> Result<OperatorMatrix> {
    let (block, inv) = left_invertible_block(t, tol)?;
    let data = &block.data * inv;
    let graded = block.grading.is_some();
    let d = block.domain().degree_cap();
    let exactness = if graded { Exactness::exact(d, block.exactness.lift) } else { Exactness::unknown(block.exactness.lift) };
    let adjoint_exactness = if graded { block.adjoint_exactness } else { Exactness::unknown(block.adjoint_exactness.lift) };
    OperatorMatrix::new(
        data,
        Arc::clone(block.domain()),
        Arc::clone(block.codomain()),
        exactness,
        adjoint_exactness,
        block.grading,
    )
}

/// Orthogonal projection `T (T*T)^{-1} T*` onto the range of the exact block.
pub fn range_projection(t: &OperatorMatrix, tol: f64) -> Result<OperatorMatrix> {
    let (block, inv) = left_invertible_block(t, tol)?;
    let data = &block.data * inv * block.data.adjoint();
    let codomain = Arc::clone(block.codomain());
    let (exactness, grading) = if block.grading.is_some() {
        (Exactness::exact(codomain.degree_cap(), 0), Some(0))
    } else {
        (Exactness::unknown(0), None)
    };
    OperatorMatrix::new(data, Arc::clone(&codomain), codomain, exactness, exactness, grading)
}

/// Projection onto the closed span of the ranges of commuting projections:
/// `I - Π_i (I - P_i)`.
pub fn union_projection(projections: &[OperatorMatrix], tol: f64) -> Result<OperatorMatrix> {
    let first = projections
        .first()
        .ok_or_else(|| Error::InvalidInput("empty projection family".into()))?;
    let basis = Arc::clone(first.domain());
    for p in projections {
        if !p.is_square() || p.domain() != &basis {
            return Err(Error::DimensionMismatch("projections on different spaces".into()));
        }
        let residual = linalg::projection_residual(&p.data);
        if residual > tol {
            return Err(Error::NotProjection { residual });
        }
    }
    for (i, p) in projections.iter().enumerate() {
        for q in &projections[i + 1..] {
            let residual = linalg::spectral_norm(&(&p.data * &q.data - &q.data * &p.data));
            if residual > tol {
                return Err(Error::NonCommuting { residual });
            }
        }
    }
    let id = OperatorMatrix::identity(Arc::clone(&basis));
    let mut complement = id.clone();
    for p in projections {
        let q = id.add_scaled(C64::new(-1.0, 0.0), p)?;
        complement = complement.compose(&q)?;
    }
    id.add_scaled(C64::new(-1.0, 0.0), &complement)
}

/// Joint kernel `∩_i ker X_i*` of a tuple with a common codomain.
pub fn wandering_subspace(tuple: &[OperatorMatrix], tol: f64) -> Result<SubspaceFrame> {
    let first = tuple.first().ok_or_else(|| Error::InvalidInput("empty operator tuple".into()))?;
    let basis = Arc::clone(first.codomain());
    let mut rows = 0;
    for x in tuple {
        if x.codomain() != &basis {
            return Err(Error::DimensionMismatch("tuple members have different codomains".into()));
        }
        rows += x.domain().dim();
    }
    let mut stacked = DMatrix::zeros(rows, basis.dim());
    let mut r = 0;
    for x in tuple {
        let adj = x.data.adjoint();
        stacked.rows_mut(r, adj.nrows()).copy_from(&adj);
        r += adj.nrows();
    }
    let columns = linalg::null_space(&stacked, tol);
    Ok(SubspaceFrame { basis, columns })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublyCommutingReport {
    /// Degree of the domain block on which all products are exact.
    pub certified_degree: usize,
    /// `max_{i≠j} ‖X_i X_j - X_j X_i‖` on that block.
    pub commutator: f64,
    /// `max_{i≠j} ‖X_i* X_j - X_j X_i*‖` on that block.
    pub cross_commutator: f64,
    pub pass: bool,
}

/// Checks `[X_i, X_j] = 0` and `[X_i*, X_j] = 0` for `i ≠ j` on the largest
/// domain block where every product involved is exact.
pub fn doubly_commuting_check(tuple: &[OperatorMatrix], tol: f64) -> Result<DoublyCommutingReport> {
    let mut products = Vec::new();
    for i in 0..tuple.len() {
        for j in 0..tuple.len() {
            if i == j {
                continue;
            }
            let xi = &tuple[i];
            let xj = &tuple[j];
            if !xi.is_square() || !xj.is_square() || xi.domain() != xj.domain() {
                return Err(Error::DimensionMismatch("tuple members must be square on one space".into()));
            }
            let a = xi.compose(xj)?;
            let b = xj.compose(xi)?;
            let c = xi.adjoint().compose(xj)?;
            let d = xj.compose(&xi.adjoint())?;
            products.push((a, b, c, d));
        }
    }
    let mut budget: Option<usize> = tuple.first().map(|x| x.domain().degree_cap());
    for (a, b, c, d) in &products {
        for p in [a, b, c, d] {
            budget = match (budget, p.exactness.degree) {
                (Some(x), Some(y)) => Some(x.min(y)),
                _ => None,
            };
        }
    }
    let Some(budget) = budget else {
        let available = tuple.first().map(|x| x.domain().degree_cap()).unwrap_or(0);
        return Err(Error::ExactnessBudget { needed: 2, available });
    };
    let mut commutator = 0.0_f64;
    let mut cross = 0.0_f64;
    for (a, b, c, d) in &products {
        let cols = a.domain().prefix_dim(budget);
        commutator = commutator.max(linalg::spectral_norm(&(&a.data - &b.data).columns(0, cols).into_owned()));
        cross = cross.max(linalg::spectral_norm(&(&c.data - &d.data).columns(0, cols).into_owned()));
    }
    Ok(DoublyCommutingReport {
        certified_degree: budget,
        commutator,
        cross_commutator: cross,
        pass: commutator <= tol && cross <= tol,
    })
}
