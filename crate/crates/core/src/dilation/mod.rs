//! Schur-Agler transfer functions, BCL pairs and colligations built from
//! defect data.

pub mod bcl;
pub mod colligation;

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec1D;
use crate::linalg;
use crate::operators::symbol::MultiplierSymbol;
use crate::purity::{jet_purity_verdict, PurityReport};
use crate::spaces::{enumerate_indices, Domain, MultiIndex};
use crate::{wire, C64};

pub use bcl::{bcl_dilation_certify, bcl_pair, BCLReport, BCLTolerances, BCLTriple};
pub use colligation::{colligation_from_defects, ColligationModel};

/// Unitarity tolerance for colligations.
pub const UNITARY_TOL: f64 = 1e-10;

/// Block unitary `U = [[A, B], [C, D]]` on `E ⊕ H_1 ⊕ ... ⊕ H_{n-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Colligation {
    #[serde(with = "wire::matrix")]
    pub a: DMatrix<C64>,
    #[serde(with = "wire::matrix")]
    pub b: DMatrix<C64>,
    #[serde(with = "wire::matrix")]
    pub c: DMatrix<C64>,
    #[serde(with = "wire::matrix")]
    pub d: DMatrix<C64>,
    pub h_dims: Vec<usize>,
    pub e_dim: usize,
}

impl Colligation {
    pub fn new(
        a: DMatrix<C64>,
        b: DMatrix<C64>,
        c: DMatrix<C64>,
        d: DMatrix<C64>,
        h_dims: Vec<usize>,
    ) -> Result<Self> {
        let col = Colligation { e_dim: a.nrows(), a, b, c, d, h_dims };
        col.validate()?;
        Ok(col)
    }

    /// Splits a unitary on `E ⊕ H` into blocks.
    pub fn from_unitary(u: &DMatrix<C64>, e_dim: usize, h_dims: Vec<usize>) -> Result<Self> {
        let h: usize = h_dims.iter().sum();
        if u.nrows() != e_dim + h || u.ncols() != e_dim + h {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} unitary for block sizes {e_dim} + {h}",
                u.nrows(),
                u.ncols()
            )));
        }
        Self::new(
            u.view((0, 0), (e_dim, e_dim)).into_owned(),
            u.view((0, e_dim), (e_dim, h)).into_owned(),
            u.view((e_dim, 0), (h, e_dim)).into_owned(),
            u.view((e_dim, e_dim), (h, h)).into_owned(),
            h_dims,
        )
    }

    pub fn h_dim(&self) -> usize {
        self.h_dims.iter().sum()
    }

    /// Number of variables `n - 1`.
    pub fn num_vars(&self) -> usize {
        self.h_dims.len()
    }

    pub fn unitary(&self) -> DMatrix<C64> {
        let (e, h) = (self.e_dim, self.h_dim());
        let mut u = DMatrix::zeros(e + h, e + h);
        u.view_mut((0, 0), (e, e)).copy_from(&self.a);
        u.view_mut((0, e), (e, h)).copy_from(&self.b);
        u.view_mut((e, 0), (h, e)).copy_from(&self.c);
        u.view_mut((e, e), (h, h)).copy_from(&self.d);
        u
    }

    pub fn validate(&self) -> Result<()> {
        let (e, h) = (self.e_dim, self.h_dim());
        let shapes = [
            (&self.a, e, e, "A"),
            (&self.b, e, h, "B"),
            (&self.c, h, e, "C"),
            (&self.d, h, h, "D"),
        ];
        for (m, r, c, name) in shapes {
            if m.nrows() != r || m.ncols() != c {
                return Err(Error::DimensionMismatch(format!(
                    "block {name} is {}x{}, expected {r}x{c}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if e == 0 {
            return Err(Error::InvalidInput("coefficient space is zero-dimensional".into()));
        }
        let residual = linalg::unitarity_residual(&self.unitary());
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(())
    }

    /// Projection onto the block `H_i` inside `H`.
    fn block_projection(&self, i: usize) -> DMatrix<C64> {
        let start: usize = self.h_dims[..i].iter().sum();
        let mut p = DMatrix::zeros(self.h_dim(), self.h_dim());
        for r in start..start + self.h_dims[i] {
            p[(r, r)] = C64::new(1.0, 0.0);
        }
        p
    }

    /// `E(z) = ⊕ z_i I_{H_i}`.
    fn e_of(&self, z: &[C64]) -> DMatrix<C64> {
        let mut e = DMatrix::zeros(self.h_dim(), self.h_dim());
        let mut r = 0;
        for (i, &dim) in self.h_dims.iter().enumerate() {
            for _ in 0..dim {
                e[(r, r)] = z[i];
                r += 1;
            }
        }
        e
    }
}

/// `Φ(z) = A + B E(z) (I - D E(z))^{-1} C`.
pub fn transfer_eval(c: &Colligation, z: &[C64]) -> Result<DMatrix<C64>> {
    if z.len() != c.num_vars() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, colligation has {} variables",
            z.len(),
            c.num_vars()
        )));
    }
    let size = z.iter().fold(0.0_f64, |acc, w| acc.max(w.norm()));
    if !(size < 1.0) {
        return Err(Error::NotInterior { size });
    }
    let e = c.e_of(z);
    let resolvent = (linalg::identity(c.h_dim()) - &c.d * &e)
        .try_inverse()
        .ok_or_else(|| Error::Numerical("I - D E(z) is singular".into()))?;
    Ok(&c.a + &c.b * e * resolvent * &c.c)
}

/// Taylor coefficients of the transfer function up to total degree `d`.
///
/// `B E(z) (D E(z))^k C` expands into words `P_{i_1} D P_{i_2} ... D P_{i_k}`
/// with `P_i` the block projections; `W_β` collects the words with letter
/// counts `β`, via `W_{e_i} = P_i` and `W_β = Σ_{β_i >= 1} W_{β - e_i} D P_i`.
pub fn taylor_jet(c: &Colligation, d: usize) -> Result<MultiplierSymbol> {
    let n = c.num_vars();
    let mut jet = MultiplierSymbol::zero(n, c.e_dim);
    jet.add_term(MultiIndex::zero(n), c.a.clone())?;
    let projections: Vec<DMatrix<C64>> = (0..n).map(|i| c.block_projection(i)).collect();
    let mut words: HashMap<MultiIndex, DMatrix<C64>> = HashMap::new();
    for beta in enumerate_indices(n, d) {
        if beta.degree() == 0 {
            continue;
        }
        let mut w = DMatrix::zeros(c.h_dim(), c.h_dim());
        for i in 0..n {
            if beta.entries()[i] == 0 {
                continue;
            }
            let prev = beta.checked_sub(&MultiIndex::unit(n, i)).expect("positive entry");
            if prev.degree() == 0 {
                w += &projections[i];
            } else {
                w += &words[&prev] * &c.d * &projections[i];
            }
        }
        let coeff = &c.b * &w * &c.c;
        words.insert(beta.clone(), w);
        jet.add_term(beta, coeff)?;
    }
    Ok(jet)
}

/// Purity verdict for `M_Φ` on `H²(D^{n-1}) ⊗ E`, from the degree-`d` jet.
pub fn schur_agler_purity(c: &Colligation, d: usize, tol: f64) -> Result<PurityReport> {
    c.validate()?;
    if c.num_vars() == 0 {
        return Err(Error::InvalidInput("colligation has no variables".into()));
    }
    let jet = taylor_jet(c, d)?;
    jet_purity_verdict(&jet, &Domain::polydisc(KernelSpec1D::Hardy, c.num_vars()), d, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_colligation, random_polydisc_point};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jet_matches_transfer_function_near_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_colligation(&mut rng, 2, &[1, 2]).unwrap();
        let jet = taylor_jet(&c, 30).unwrap();
        let z = [C64::new(0.1, 0.05), C64::new(-0.08, 0.1)];
        let exact = transfer_eval(&c, &z).unwrap();
        assert!((jet.eval(&z).unwrap() - exact).norm() < 1e-14);
    }

    #[test]
    fn transfer_function_is_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_colligation(&mut rng, 3, &[2, 1]).unwrap();
        for _ in 0..50 {
            let z = random_polydisc_point(&mut rng, 2, 0.999);
            assert!(linalg::spectral_norm(&transfer_eval(&c, &z).unwrap()) <= 1.0 + 1e-10);
        }
        assert!(matches!(
            transfer_eval(&c, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            Err(Error::NotInterior { .. })
        ));
    }

    #[test]
    fn degenerate_blocks() {
        // B = 0 forces a unitary A and D.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = crate::random::haar_unitary(&mut rng, 2);
        let d = crate::random::haar_unitary(&mut rng, 2);
        let c = Colligation::new(a.clone(), DMatrix::zeros(2, 2), DMatrix::zeros(2, 2), d, vec![1, 1]).unwrap();
        let z = [C64::new(0.3, 0.0), C64::new(0.0, -0.4)];
        assert!((transfer_eval(&c, &z).unwrap() - &a).norm() < 1e-15);
        let jet = taylor_jet(&c, 4).unwrap();
        assert_eq!(jet.degree(), 0);
    }
}
