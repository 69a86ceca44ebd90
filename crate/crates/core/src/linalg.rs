//! Dense complex linear-algebra helpers shared by every module.
//!
//! Null spaces, ranges and principal angles all go through the singular value
//! decomposition. Eigenvalues go through a permutation to block-triangular form
//! (strongly connected components of the sparsity pattern) before the Schur
//! step, so that exactly reducible matrices such as graded adjoint compressions
//! do not suffer the `eps^(1/k)` perturbation of large Jordan clusters.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::C64;

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Smallest singular value of a tall or square matrix (zero if it has more
/// columns than rows).
pub fn sigma_min(m: &DMatrix<C64>) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.ncols() > m.nrows() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |acc, &s| acc.min(s))
}

/// Orthonormal basis (as columns) of the null space of `a`, using an absolute
/// singular-value threshold.
pub fn null_space(a: &DMatrix<C64>, threshold: f64) -> DMatrix<C64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return identity(n);
    }
    // Pad to at least square so the SVD returns a full set of right vectors.
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= threshold)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        for r in 0..n {
            out[(r, c)] = v_t[(i, r)].conj();
        }
    }
    out
}

/// Orthonormal basis of the column span of `a`.
pub fn orthonormal_range(a: &DMatrix<C64>, threshold: f64) -> DMatrix<C64> {
    let rows = a.nrows();
    if a.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = SVD::new(a.clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > threshold)
        .map(|(i, _)| i)
        .collect();
    let mut out = DMatrix::zeros(rows, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

pub fn rank(a: &DMatrix<C64>, threshold: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}

/// Orthogonal projector `Q Q*` onto the span of orthonormal columns.
pub fn projector(q: &DMatrix<C64>) -> DMatrix<C64> {
    q * q.adjoint()
}

/// Largest principal angle between the column spans of two orthonormal
/// frames. Computed from the sine side so it resolves angles near zero.
pub fn max_principal_angle(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual = a - b * (b.adjoint() * a);
    spectral_norm(&residual).min(1.0).asin()
}

/// `max(||U*U - I||, ||UU* - I||)`.
pub fn unitarity_residual(u: &DMatrix<C64>) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let id = identity(u.nrows());
    spectral_norm(&(u.adjoint() * u - &id)).max(spectral_norm(&(u * u.adjoint() - &id)))
}

/// `||B*B - I||` for a matrix whose columns should be orthonormal.
pub fn isometry_residual(b: &DMatrix<C64>) -> f64 {
    spectral_norm(&(b.adjoint() * b - identity(b.ncols())))
}

/// `max(||P^2 - P||, ||P - P*||)`.
pub fn projection_residual(p: &DMatrix<C64>) -> f64 {
    spectral_norm(&(p * p - p)).max(spectral_norm(&(p - p.adjoint())))
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching orthonormal eigenvectors.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let herm = (m + m.adjoint()) * real(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

pub fn max_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigen(m).0.last().copied().unwrap_or(0.0)
}

/// Square root of a positive semidefinite matrix. Eigenvalues below `-tol`
/// are an error; the rest are clamped at zero.
pub fn psd_sqrt(m: &DMatrix<C64>, tol: f64) -> Result<DMatrix<C64>> {
    let (values, vectors) = hermitian_eigen(m);
    if let Some(&lowest) = values.first() {
        if lowest < -tol {
            return Err(Error::Precondition(format!(
                "matrix is not positive semidefinite: eigenvalue {lowest:e}"
            )));
        }
    }
    let roots = DVector::from_iterator(values.len(), values.iter().map(|&v| real(v.max(0.0).sqrt())));
    Ok(&vectors * DMatrix::from_diagonal(&roots) * vectors.adjoint())
}

/// Eigenvalues of a square matrix. The matrix is first split into the
/// strongly connected components of its nonzero pattern; each diagonal block
/// is then reduced with a complex Schur decomposition.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] != C64::new(0.0, 0.0) {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for component in tarjan_scc(&graph) {
        let idx: Vec<usize> = component.iter().map(|v| v.index()).collect();
        if idx.len() == 1 {
            out.push(m[(idx[0], idx[0])]);
            continue;
        }
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        let schur = Schur::try_new(block, f64::EPSILON, 10_000 * idx.len())
            .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
        let (_, t) = schur.unpack();
        out.extend((0..idx.len()).map(|k| t[(k, k)]));
    }
    Ok(out)
}

pub fn spectral_radius(m: &DMatrix<C64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())))
}
