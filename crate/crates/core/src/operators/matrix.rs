//! Dense operator matrices between truncated bases, with exactness metadata.
//!
//! An operator `T` on the full space is modelled by its matrix between two
//! truncations. [`Exactness::degree`] is the largest `d` such that the matrix
//! applied to any vector of `V_d` equals `T` applied to it; `lift` bounds how
//! far `T` raises total degree. The same pair is tracked for `T*`.
//! Composition follows `d*(AB) = min(d*(B), d*(A) - lift(B))`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::symbol::MultiplierSymbol;
use crate::spaces::TruncatedBasis;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exactness {
    /// Degree up to which the matrix is exact; `None` when nothing is certified.
    pub degree: Option<usize>,
    /// Upper bound on the degree increase.
    pub lift: usize,
}

impl Exactness {
    pub fn exact(degree: usize, lift: usize) -> Self {
        Exactness { degree: Some(degree), lift }
    }

    pub fn unknown(lift: usize) -> Self {
        Exactness { degree: None, lift }
    }

    /// Metadata of `a ∘ b`.
    pub fn compose(a: Exactness, b: Exactness) -> Exactness {
        let degree = match (a.degree, b.degree) {
            (Some(da), Some(db)) => da.checked_sub(b.lift).map(|x| x.min(db)),
            _ => None,
        };
        Exactness { degree, lift: a.lift + b.lift }
    }

    fn meet(a: Exactness, b: Exactness) -> Exactness {
        let degree = match (a.degree, b.degree) {
            (Some(x), Some(y)) => Some(x.min(y)),
            _ => None,
        };
        Exactness { degree, lift: a.lift.max(b.lift) }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub data: DMatrix<C64>,
    domain: Arc<TruncatedBasis>,
    codomain: Arc<TruncatedBasis>,
    pub exactness: Exactness,
    pub adjoint_exactness: Exactness,
    /// `Some(s)` when the true operator maps homogeneous degree `d` into
    /// homogeneous degree `d + s`.
    pub grading: Option<isize>,
}

impl OperatorMatrix {
    pub fn new(
        data: DMatrix<C64>,
        domain: Arc<TruncatedBasis>,
        codomain: Arc<TruncatedBasis>,
        exactness: Exactness,
        adjoint_exactness: Exactness,
        grading: Option<isize>,
    ) -> Result<Self> {
        if data.nrows() != codomain.dim() || data.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix between bases of dimension {} -> {}",
                data.nrows(),
                data.ncols(),
                domain.dim(),
                codomain.dim()
            )));
        }
        Ok(OperatorMatrix { data, domain, codomain, exactness, adjoint_exactness, grading })
    }

    /// Square matrix with no exactness claim.
    pub fn uncertified(data: DMatrix<C64>, basis: Arc<TruncatedBasis>) -> Result<Self> {
        Self::new(data, Arc::clone(&basis), basis, Exactness::unknown(0), Exactness::unknown(0), None)
    }

    pub fn identity(basis: Arc<TruncatedBasis>) -> Self {
        let d = basis.degree_cap();
        let data = linalg::identity(basis.dim());
        OperatorMatrix {
            data,
            domain: Arc::clone(&basis),
            codomain: basis,
            exactness: Exactness::exact(d, 0),
            adjoint_exactness: Exactness::exact(d, 0),
            grading: Some(0),
        }
    }

    pub fn domain(&self) -> &Arc<TruncatedBasis> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<TruncatedBasis> {
        &self.codomain
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            data: self.data.adjoint(),
            domain: Arc::clone(&self.codomain),
            codomain: Arc::clone(&self.domain),
            exactness: self.adjoint_exactness,
            adjoint_exactness: self.exactness,
            grading: self.grading.map(|s| -s),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if other.codomain != self.domain {
            return Err(Error::DimensionMismatch(
                "composition of operators whose bases do not match".into(),
            ));
        }
        Ok(OperatorMatrix {
            data: &self.data * &other.data,
            domain: Arc::clone(&other.domain),
            codomain: Arc::clone(&self.codomain),
            exactness: Exactness::compose(self.exactness, other.exactness),
            adjoint_exactness: Exactness::compose(other.adjoint_exactness, self.adjoint_exactness),
            grading: match (self.grading, other.grading) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        })
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: C64, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if other.domain != self.domain || other.codomain != self.codomain {
            return Err(Error::DimensionMismatch("sum of operators on different bases".into()));
        }
        Ok(OperatorMatrix {
            data: &self.data + &other.data * c,
            domain: Arc::clone(&self.domain),
            codomain: Arc::clone(&self.codomain),
            exactness: Exactness::meet(self.exactness, other.exactness),
            adjoint_exactness: Exactness::meet(self.adjoint_exactness, other.adjoint_exactness),
            grading: if self.grading == other.grading { self.grading } else { None },
        })
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.data)
    }

    /// Restriction to the domain block `V_d`, `d` the exactness degree.
    pub fn exact_block(&self) -> Result<OperatorMatrix> {
        let d = self.exactness.degree.ok_or(Error::ExactnessBudget {
            needed: self.exactness.lift,
            available: self.codomain.degree_cap(),
        })?;
        self.restrict_domain(d)
    }

    /// Restriction to the domain block `V_d`.
    pub fn restrict_domain(&self, d: usize) -> Result<OperatorMatrix> {
        let d = d.min(self.domain.degree_cap());
        let domain = Arc::new(self.domain.with_degree(d)?);
        let cols = domain.dim();
        let data = self.data.columns(0, cols).into_owned();
        let exactness = Exactness {
            degree: self.exactness.degree.map(|e| e.min(d)),
            lift: self.exactness.lift,
        };
        // P_{V_d} T* is exact where T* is exact and lands inside V_d.
        let adjoint_exactness = Exactness {
            degree: self
                .adjoint_exactness
                .degree
                .and_then(|e| d.checked_sub(self.adjoint_exactness.lift).map(|x| x.min(e))),
            lift: self.adjoint_exactness.lift,
        };
        Ok(OperatorMatrix {
            data,
            domain,
            codomain: Arc::clone(&self.codomain),
            exactness,
            adjoint_exactness,
            grading: self.grading,
        })
    }

    /// Zero-extends the domain to `basis`, which must contain the current
    /// domain as a leading block of the same space.
    pub fn extend_domain(&self, basis: Arc<TruncatedBasis>) -> Result<OperatorMatrix> {
        if basis.domain() != self.domain.domain()
            || basis.coeff_dim() != self.domain.coeff_dim()
            || basis.degree_cap() < self.domain.degree_cap()
        {
            return Err(Error::DimensionMismatch("domain extension to an unrelated basis".into()));
        }
        let mut data = DMatrix::zeros(self.codomain.dim(), basis.dim());
        data.columns_mut(0, self.domain.dim()).copy_from(&self.data);
        let own = self.domain.degree_cap();
        Ok(OperatorMatrix {
            data,
            domain: basis,
            codomain: Arc::clone(&self.codomain),
            exactness: Exactness { degree: self.exactness.degree.map(|e| e.min(own)), lift: self.exactness.lift },
            adjoint_exactness: Exactness::unknown(self.adjoint_exactness.lift),
            grading: self.grading,
        })
    }
}

fn check_symbol(basis: &TruncatedBasis, phi: &MultiplierSymbol) -> Result<()> {
    if phi.n() != basis.n() || phi.coeff_dim() != basis.coeff_dim() {
        return Err(Error::DimensionMismatch(format!(
            "symbol on {} variables with {}x{} coefficients, basis on {} variables with coefficient dimension {}",
            phi.n(),
            phi.coeff_dim(),
            phi.coeff_dim(),
            basis.n(),
            basis.coeff_dim()
        )));
    }
    Ok(())
}

/// Matrix of `P_D M_Φ |_{V_D}`. Its adjoint is exactly `M_Φ*` on `V_D`.
pub fn multiplier_matrix(basis: &Arc<TruncatedBasis>, phi: &MultiplierSymbol) -> Result<OperatorMatrix> {
    check_symbol(basis, phi)?;
    let k = basis.coeff_dim();
    let cap = basis.degree_cap();
    let mut data = DMatrix::zeros(basis.dim(), basis.dim());
    for (col_pos, alpha) in basis.indices().iter().enumerate() {
        for (beta, coeff) in phi.terms() {
            if alpha.degree() + beta.degree() > cap {
                continue;
            }
            let target = alpha.add(beta);
            let row_pos = basis.position(&target).expect("index within the degree cap");
            let w = basis.norm_at(row_pos) / basis.norm_at(col_pos);
            for i in 0..k {
                for j in 0..k {
                    data[(row_pos * k + i, col_pos * k + j)] += coeff[(i, j)] * w;
                }
            }
        }
    }
    let deg = phi.degree();
    let exactness = Exactness { degree: cap.checked_sub(deg), lift: deg };
    let grading = if phi.is_homogeneous() { Some(deg as isize) } else { None };
    OperatorMatrix::new(
        data,
        Arc::clone(basis),
        Arc::clone(basis),
        exactness,
        Exactness::exact(cap, 0),
        grading,
    )
}

/// `M_{z_i}` on `V_D ⊗ E`.
pub fn shift_matrix(basis: &Arc<TruncatedBasis>, axis: usize) -> Result<OperatorMatrix> {
    let z = MultiplierSymbol::variable(basis.n(), basis.coeff_dim(), axis)?;
    multiplier_matrix(basis, &z)
}

/// All coordinate shifts `(M_{z_1}, ..., M_{z_n})`.
pub fn shift_tuple(basis: &Arc<TruncatedBasis>) -> Result<Vec<OperatorMatrix>> {
    (0..basis.n()).map(|i| shift_matrix(basis, i)).collect()
}

/// The matrix of `M_Φ*` on `V_D`.
pub fn adjoint_compression(basis: &Arc<TruncatedBasis>, phi: &MultiplierSymbol) -> Result<OperatorMatrix> {
    Ok(multiplier_matrix(basis, phi)?.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{BallKernelSpec, KernelSpec1D};
    use crate::spaces::MultiIndex;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn hardy(n: usize, d: usize, k: usize) -> Arc<TruncatedBasis> {
        Arc::new(TruncatedBasis::polydisc(KernelSpec1D::Hardy, n, d, k).unwrap())
    }

    #[test]
    fn identity_symbol_gives_identity() {
        let b = hardy(2, 3, 2);
        let m = multiplier_matrix(&b, &MultiplierSymbol::identity(2, 2)).unwrap();
        assert_eq!(m.data, linalg::identity(b.dim()));
        assert_eq!(m.exactness, Exactness::exact(3, 0));
    }

    #[test]
    fn hardy_shift_is_nilpotent_forward_shift() {
        let b = hardy(1, 2, 1);
        let s = shift_matrix(&b, 0).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[c(0.), c(0.), c(0.), c(1.), c(0.), c(0.), c(0.), c(1.), c(0.)]);
        assert_eq!(s.data, expected);
        assert_eq!(s.exactness, Exactness::exact(1, 1));
        assert_eq!(s.adjoint().exactness, Exactness::exact(2, 0));
    }

    #[test]
    fn product_monomial_bookkeeping() {
        let b = hardy(2, 2, 1);
        let phi = MultiplierSymbol::scalar(2, &[(MultiIndex(vec![1, 1]), c(1.0))]).unwrap();
        let m = multiplier_matrix(&b, &phi).unwrap();
        let from = b.position(&MultiIndex(vec![0, 0])).unwrap();
        let to = b.position(&MultiIndex(vec![1, 1])).unwrap();
        assert_eq!(m.data[(to, from)], c(1.0));
        // Only the constant column survives the truncation.
        let nonzero = m.data.iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 1);
        assert_eq!(m.exactness.degree, Some(0));
    }

    #[test]
    fn weighted_shift_weights() {
        for (family, weight) in [
            (KernelSpec1D::Bergman, Box::new(|m: f64| ((m + 1.0) / (m + 2.0)).sqrt()) as Box<dyn Fn(f64) -> f64>),
            (KernelSpec1D::Dirichlet, Box::new(|m: f64| ((m + 2.0) / (m + 1.0)).sqrt())),
        ] {
            let b = Arc::new(TruncatedBasis::polydisc(family, 1, 5, 1).unwrap());
            let s = shift_matrix(&b, 0).unwrap();
            for m in 0..5 {
                assert!((s.data[(m + 1, m)].re - weight(m as f64)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn adjoint_degree_zero_block_is_phi0_adjoint() {
        let b = Arc::new(TruncatedBasis::ball(BallKernelSpec::hm(2, 2).unwrap(), 3, 2).unwrap());
        let a = DMatrix::from_row_slice(2, 2, &[C64::new(0.1, 0.2), c(0.3), c(-0.4), C64::new(0.0, 0.5)]);
        let mut phi = MultiplierSymbol::constant(2, a.clone()).unwrap();
        phi.add_term(MultiIndex(vec![1, 0]), DMatrix::identity(2, 2) * c(0.2)).unwrap();
        let t = adjoint_compression(&b, &phi).unwrap();
        let block = t.data.view((0, 0), (2, 2)).into_owned();
        assert_eq!(block, a.adjoint());
    }

    #[test]
    fn composition_metadata() {
        let b = hardy(2, 4, 1);
        let s = shift_matrix(&b, 0).unwrap();
        let ss = s.compose(&s).unwrap();
        assert_eq!(ss.exactness, Exactness::exact(2, 2));
        assert_eq!(ss.adjoint_exactness, Exactness::exact(4, 0));
        assert_eq!(ss.grading, Some(2));
        let mixed = s.adjoint().compose(&s).unwrap();
        assert_eq!(mixed.exactness, Exactness::exact(3, 1));
        assert_eq!(mixed.grading, Some(0));
        let block = s.exact_block().unwrap();
        assert_eq!(block.domain().degree_cap(), 3);
        assert_eq!(block.adjoint_exactness, Exactness::exact(3, 0));
    }
}
