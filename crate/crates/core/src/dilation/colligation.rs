//! Unitary colligations assembled from the defect data of a commuting tuple.
//!
//! For commuting `X = (X_1, ..., X_n)` with `I - X_n X_n* = Σ G_i`, put
//! `D² = Π_{j<n} (I - C_{X_j})(I)` and `F_i² = Π_{j≠i, j<n} (I - C_{X_j})(G_i)`,
//! where `C_T(A) = T A T*`. Then
//! `‖Dh‖² + Σ ‖F_i X_i* h‖² = ‖D X_n* h‖² + Σ ‖F_i h‖²`, so
//! `(D X_n* h, F_i h) ↦ (D h, F_i X_i* h)` is isometric on its domain and
//! extends to a unitary on `E ⊕ H_1 ⊕ ... ⊕ H_{n-1}` whenever the
//! orthocomplements have equal dimension. The transfer function `Φ` of that
//! unitary satisfies `Π X_n* = M_Φ* Π` for the map
//! `Π h = Σ_α z^α D X^{*α} h` into `H²(D^{n-1}) ⊗ E`.

use nalgebra::{DMatrix, SVD};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::projections::NULL_THRESHOLD;
use crate::spaces::{enumerate_indices, MultiIndex};
use crate::C64;

use super::Colligation;

/// The colligation together with the defect operators it was built from.
#[derive(Clone, Debug)]
pub struct ColligationModel {
    pub colligation: Colligation,
    /// `D` as an operator on `H`.
    pub defect: DMatrix<C64>,
    /// Orthonormal frame of `range D`; `E` is identified with it.
    pub defect_range: DMatrix<C64>,
    /// `F_i` on `H`.
    pub f: Vec<DMatrix<C64>>,
    /// Orthonormal frames of `range F_i`.
    pub f_ranges: Vec<DMatrix<C64>>,
    /// `‖L*L - R*R‖` for the two sides of the graph map.
    pub graph_residual: f64,
    tuple: Vec<DMatrix<C64>>,
}

impl ColligationModel {
    /// Matrix of `Π` from `H` into `V_d ⊗ E` on the Hardy polydisc in
    /// `n - 1` variables, coordinates ordered as in `TruncatedBasis`.
    pub fn dilation_map(&self, d: usize) -> DMatrix<C64> {
        let vars = self.tuple.len() - 1;
        let h = self.defect.nrows();
        let e = self.colligation.e_dim;
        let indices = enumerate_indices(vars, d);
        let base = self.defect_range.adjoint() * &self.defect;
        let mut powers: std::collections::HashMap<MultiIndex, DMatrix<C64>> = std::collections::HashMap::new();
        let mut out = DMatrix::zeros(indices.len() * e, h);
        for (pos, alpha) in indices.iter().enumerate() {
            let power = match alpha.entries().iter().position(|&a| a > 0) {
                None => linalg::identity(h),
                Some(i) => {
                    let prev = alpha.checked_sub(&MultiIndex::unit(vars, i)).expect("positive entry");
                    self.tuple[i].adjoint() * &powers[&prev]
                }
            };
            out.view_mut((pos * e, 0), (e, h)).copy_from(&(&base * &power));
            powers.insert(alpha.clone(), power);
        }
        out
    }
}

/// `(I - C_{X_j})(A) = A - X_j A X_j*`.
fn defect_step(x: &DMatrix<C64>, a: &DMatrix<C64>) -> DMatrix<C64> {
    a - x * a * x.adjoint()
}

fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Stacks blocks `[top; rest...]` vertically.
fn stack(blocks: &[DMatrix<C64>]) -> DMatrix<C64> {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

pub fn colligation_from_defects(x: &[DMatrix<C64>], g: &[DMatrix<C64>], tol: f64) -> Result<ColligationModel> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("tuple length {n} < 2")));
    }
    if g.len() != n - 1 {
        return Err(Error::LengthMismatch { left: g.len(), right: n - 1 });
    }
    let h = x[0].nrows();
    if x.iter().chain(g).any(|m| m.nrows() != h || m.ncols() != h) {
        return Err(Error::DimensionMismatch("operators of unequal size".into()));
    }
    if h == 0 {
        return Err(Error::InvalidInput("zero-dimensional space".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            let residual = (&x[i] * &x[j] - &x[j] * &x[i]).norm();
            if residual > tol {
                return Err(Error::NonCommuting { residual });
            }
        }
    }
    let eye = linalg::identity(h);
    let xn = &x[n - 1];
    let mut split = &eye - xn * xn.adjoint();
    for gi in g {
        if (gi - gi.adjoint()).norm() > tol {
            return Err(Error::Precondition("G_i is not self-adjoint".into()));
        }
        split -= gi;
    }
    let split_residual = linalg::spectral_norm(&split);
    if split_residual > tol {
        return Err(Error::Precondition(format!(
            "I - X_n X_n* differs from the sum of G_i by {split_residual:e}"
        )));
    }

    let mut d2 = eye.clone();
    for xj in &x[..n - 1] {
        d2 = defect_step(xj, &d2);
    }
    let defect = linalg::psd_sqrt(&hermitian_part(&d2), tol)?;
    let mut f = Vec::with_capacity(n - 1);
    for (i, gi) in g.iter().enumerate() {
        let mut fi2 = gi.clone();
        for (j, xj) in x[..n - 1].iter().enumerate() {
            if j != i {
                fi2 = defect_step(xj, &fi2);
            }
        }
        f.push(linalg::psd_sqrt(&hermitian_part(&fi2), tol)?);
    }

    let defect_range = linalg::orthonormal_range(&defect, NULL_THRESHOLD);
    let f_ranges: Vec<DMatrix<C64>> = f.iter().map(|fi| linalg::orthonormal_range(fi, NULL_THRESHOLD)).collect();
    let e_dim = defect_range.ncols();
    if e_dim == 0 {
        return Err(Error::Precondition("defect operator D vanishes".into()));
    }

    // Graph map in range coordinates: L h = (D h, F_i X_i* h), R h = (D X_n* h, F_i h).
    let qd = defect_range.adjoint();
    let mut left = vec![&qd * &defect];
    let mut right = vec![&qd * &defect * xn.adjoint()];
    for i in 0..n - 1 {
        let qf = f_ranges[i].adjoint();
        left.push(&qf * &f[i] * x[i].adjoint());
        right.push(&qf * &f[i]);
    }
    let left = stack(&left);
    let right = stack(&right);
    let graph_residual = linalg::spectral_norm(&(left.adjoint() * &left - right.adjoint() * &right));
    if graph_residual > tol {
        return Err(Error::GraphNotIsometric { residual: graph_residual });
    }

    // R = V Σ W*, so the map sends V_r ↦ L W Σ⁻¹ on the range of R.
    let total = left.nrows();
    let svd = SVD::new(right.clone(), true, true);
    let (u_r, s, v_t) = (svd.u.expect("requested"), svd.singular_values, svd.v_t.expect("requested"));
    let kept: Vec<usize> = (0..s.len()).filter(|&i| s[i] > NULL_THRESHOLD).collect();
    let mut from = DMatrix::zeros(total, kept.len());
    let mut to = DMatrix::zeros(total, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        from.set_column(c, &u_r.column(i));
        let w = v_t.row(i).adjoint();
        to.set_column(c, &(&left * w / C64::new(s[i], 0.0)));
    }
    let from_perp = linalg::null_space(&right.adjoint(), NULL_THRESHOLD);
    let to_perp = linalg::null_space(&left.adjoint(), NULL_THRESHOLD);
    if from_perp.ncols() + kept.len() != total || to_perp.ncols() + kept.len() != total {
        return Err(Error::NoUnitaryExtension {
            left: to_perp.ncols(),
            right: from_perp.ncols(),
        });
    }
    let mut source = DMatrix::zeros(total, total);
    source.columns_mut(0, kept.len()).copy_from(&from);
    source.columns_mut(kept.len(), total - kept.len()).copy_from(&from_perp);
    let mut target = DMatrix::zeros(total, total);
    target.columns_mut(0, kept.len()).copy_from(&to);
    target.columns_mut(kept.len(), total - kept.len()).copy_from(&to_perp);
    let unitary = target * source.adjoint();

    let h_dims = f_ranges.iter().map(|q| q.ncols()).collect();
    let colligation = Colligation::from_unitary(&unitary, e_dim, h_dims)?;
    Ok(ColligationModel {
        colligation,
        defect,
        defect_range,
        f,
        f_ranges,
        graph_residual,
        tuple: x.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_pair_with_identity_defect() {
        let z = DMatrix::zeros(2, 2);
        let model = colligation_from_defects(&[z.clone(), z], &[linalg::identity(2)], 1e-10).unwrap();
        assert_eq!(model.colligation.e_dim, 2);
        assert_eq!(model.colligation.h_dims, vec![2]);
    }

    #[test]
    fn scalar_pair() {
        let (x1, x2) = (C64::new(0.3, 0.4), C64::new(-0.5, 0.1));
        let x = [DMatrix::from_element(1, 1, x1), DMatrix::from_element(1, 1, x2)];
        let g = [DMatrix::from_element(1, 1, c(1.0 - x2.norm_sqr()))];
        let model = colligation_from_defects(&x, &g, 1e-10).unwrap();
        // Π h is a multiple of the Szegő kernel at x1, so Φ(x1) = x2.
        let phi = super::super::transfer_eval(&model.colligation, &[x1]).unwrap();
        assert!((phi[(0, 0)] - x2).norm() < 1e-12);
    }

    #[test]
    fn broken_split_is_rejected() {
        let z = DMatrix::zeros(1, 1);
        let g = [DMatrix::from_element(1, 1, c(0.5))];
        assert!(matches!(colligation_from_defects(&[z.clone(), z], &g, 1e-10), Err(Error::Precondition(_))));
    }
}
