//! Operator-valued polynomial symbols `Φ(z) = Σ_α Φ_α z^α`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spaces::MultiIndex;
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierSymbol {
    n: usize,
    coeff_dim: usize,
    terms: BTreeMap<MultiIndex, DMatrix<C64>>,
}

impl MultiplierSymbol {
    /// The zero symbol.
    pub fn zero(n: usize, coeff_dim: usize) -> Self {
        MultiplierSymbol { n, coeff_dim, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, value: DMatrix<C64>) -> Result<Self> {
        let mut s = Self::zero(n, value.nrows());
        s.add_term(MultiIndex::zero(n), value)?;
        Ok(s)
    }

    pub fn identity(n: usize, coeff_dim: usize) -> Self {
        Self::constant(n, DMatrix::identity(coeff_dim, coeff_dim)).expect("square identity")
    }

    /// `z_i · I`.
    pub fn variable(n: usize, coeff_dim: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::AxisOutOfRange { axis: i, n });
        }
        let mut s = Self::zero(n, coeff_dim);
        s.add_term(MultiIndex::unit(n, i), DMatrix::identity(coeff_dim, coeff_dim))?;
        Ok(s)
    }

    /// Scalar polynomial `Σ c_α z^α` acting on `C^1`.
    pub fn scalar(n: usize, terms: &[(MultiIndex, C64)]) -> Result<Self> {
        let mut s = Self::zero(n, 1);
        for (alpha, c) in terms {
            s.add_term(alpha.clone(), DMatrix::from_element(1, 1, *c))?;
        }
        Ok(s)
    }

    /// Adds `coeff · z^α` (accumulating with an existing term).
    pub fn add_term(&mut self, alpha: MultiIndex, coeff: DMatrix<C64>) -> Result<()> {
        if alpha.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "term index {alpha} has {} entries, symbol has {} variables",
                alpha.n(),
                self.n
            )));
        }
        if coeff.nrows() != self.coeff_dim || coeff.ncols() != self.coeff_dim {
            return Err(Error::DimensionMismatch(format!(
                "coefficient is {}x{}, expected {}x{}",
                coeff.nrows(),
                coeff.ncols(),
                self.coeff_dim,
                self.coeff_dim
            )));
        }
        let entry = self
            .terms
            .entry(alpha.clone())
            .or_insert_with(|| DMatrix::zeros(coeff.nrows(), coeff.ncols()));
        *entry += coeff;
        if entry.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            self.terms.remove(&alpha);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, DMatrix<C64>> {
        &self.terms
    }

    /// Largest total degree of a nonzero term (0 for the zero symbol).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Every nonzero term has the same total degree.
    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(MultiIndex::degree);
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> DMatrix<C64> {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.coeff_dim, self.coeff_dim))
    }

    /// `Φ(0)`.
    pub fn phi0(&self) -> DMatrix<C64> {
        self.coefficient(&MultiIndex::zero(self.n))
    }

    pub fn eval(&self, point: &[C64]) -> Result<DMatrix<C64>> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, symbol has {} variables",
                point.len(),
                self.n
            )));
        }
        let mut out = DMatrix::zeros(self.coeff_dim, self.coeff_dim);
        for (alpha, c) in &self.terms {
            out += c * alpha.eval(point);
        }
        Ok(out)
    }

    fn check_compatible(&self, other: &MultiplierSymbol) -> Result<()> {
        if self.n != other.n || self.coeff_dim != other.coeff_dim {
            return Err(Error::DimensionMismatch(format!(
                "symbols on ({}, {}) and ({}, {}) variables/coefficients",
                self.n, self.coeff_dim, other.n, other.coeff_dim
            )));
        }
        Ok(())
    }

    /// Pointwise product `self(z) · other(z)`.
    pub fn mul(&self, other: &MultiplierSymbol) -> Result<MultiplierSymbol> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.n, self.coeff_dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), ca * cb)?;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &MultiplierSymbol) -> Result<MultiplierSymbol> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (b, cb) in &other.terms {
            out.add_term(b.clone(), cb.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> MultiplierSymbol {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out.terms.retain(|_, v| v.iter().any(|z| *z != C64::new(0.0, 0.0)));
        out
    }

    /// Largest entrywise difference over all coefficients.
    pub fn max_coeff_diff(&self, other: &MultiplierSymbol) -> Result<f64> {
        self.check_compatible(other)?;
        let keys = self.terms.keys().chain(other.terms.keys());
        Ok(keys
            .map(|k| (self.coefficient(k) - other.coefficient(k)).iter().fold(0.0_f64, |m, z| m.max(z.norm())))
            .fold(0.0, f64::max))
    }
}

/// `Φ` with `z_axis := 0`, re-indexed on the remaining variables.
pub fn slice_symbol(phi: &MultiplierSymbol, axis: usize) -> Result<MultiplierSymbol> {
    if axis >= phi.n() {
        return Err(Error::AxisOutOfRange { axis, n: phi.n() });
    }
    let mut out = MultiplierSymbol::zero(phi.n() - 1, phi.coeff_dim());
    for (alpha, c) in phi.terms() {
        if alpha.entries()[axis] != 0 {
            continue;
        }
        let mut rest = alpha.entries().to_vec();
        rest.remove(axis);
        out.add_term(MultiIndex(rest), c.clone())?;
    }
    Ok(out)
}
