//! Multi-indices and graded truncations `V_D` of `H_k ⊗ E`.
//!
//! The basis of `V_D` is `e_α ⊗ ξ_j` with `e_α = z^α / ‖z^α‖`, ordered by
//! total degree, then lexicographically, with the coefficient index `j`
//! running fastest. So `V_d` for `d <= D` is always a leading block.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{ball_coeff, coeff_1d, BallKernelSpec, KernelSpec1D};
use crate::{C64, MAX_ORDER};

pub use crate::operators::symbol::slice_symbol;

/// Largest coefficient-space dimension.
pub const MAX_COEFF_DIM: usize = 8;
/// Largest total basis dimension (monomials times coefficient dimension).
pub const MAX_BASIS_DIM: usize = 4096;

/// Exponent vector `α = (α_1, ..., α_n)`, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, if every entry stays nonnegative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// Multinomial coefficient `|α|! / α!`, or `None` on `u64` overflow.
    pub fn multinomial(&self) -> Option<u64> {
        let mut acc: u64 = 1;
        let mut running = 0u64;
        for &a in &self.0 {
            for i in 1..=a as u64 {
                running += 1;
                acc = acc.checked_mul(running)? / i;
            }
        }
        Some(acc)
    }

    /// `λ^α` for a complex point.
    pub fn eval(&self, point: &[C64]) -> C64 {
        self.0
            .iter()
            .zip(point)
            .fold(C64::new(1.0, 0.0), |acc, (&a, z)| acc * z.powu(a as u32))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `C(n + d, n)` as `u128`.
pub fn count_indices(n: usize, d: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=n as u128 {
        acc = acc * (d as u128 + i) / i;
    }
    acc
}

/// All `α` in `n` variables with `|α| <= d`, graded-lex ascending.
pub fn enumerate_indices(n: usize, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for degree in 0..=d {
        homogeneous(n, degree, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// All `α` with `|α| = d`, lexicographically ascending.
pub fn homogeneous_indices(n: usize, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    homogeneous(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

fn homogeneous(n: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        return;
    }
    if prefix.len() + 1 == n {
        prefix.push(remaining);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in 0..=remaining {
        prefix.push(first);
        homogeneous(n, remaining - first, prefix, out);
        prefix.pop();
    }
}

/// Underlying scalar space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum Domain {
    /// Product kernel on `D^n`, one factor per variable.
    Polydisc { factors: Vec<KernelSpec1D> },
    /// Unitarily invariant kernel on `B_n`.
    Ball { kernel: BallKernelSpec },
}

impl Domain {
    pub fn polydisc(factor: KernelSpec1D, n: usize) -> Domain {
        Domain::Polydisc { factors: vec![factor; n] }
    }

    pub fn ball(kernel: BallKernelSpec) -> Domain {
        Domain::Ball { kernel }
    }

    pub fn n(&self) -> usize {
        match self {
            Domain::Polydisc { factors } => factors.len(),
            Domain::Ball { kernel } => kernel.n,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Domain::Polydisc { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidInput("polydisc needs at least one variable".into()));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
            Domain::Ball { kernel } => kernel.validate(),
        }
    }

    /// `‖z^α‖`.
    fn norm(&self, alpha: &MultiIndex) -> Result<f64> {
        match self {
            Domain::Polydisc { factors } => {
                let mut sq = 1.0;
                for (f, &a) in factors.iter().zip(alpha.entries()) {
                    sq /= coeff_1d(f, a)?;
                }
                Ok(sq.sqrt())
            }
            Domain::Ball { kernel } => {
                let a = ball_coeff(kernel, alpha.degree())?;
                let gamma = alpha.multinomial().ok_or(Error::OutOfRange {
                    what: "multinomial coefficient degree",
                    value: alpha.degree(),
                    cap: MAX_ORDER,
                })?;
                Ok((1.0 / (gamma as f64 * a)).sqrt())
            }
        }
    }
}

/// Orthonormal monomial basis of `V_D ⊗ E`.
#[derive(Clone, Debug)]
pub struct TruncatedBasis {
    domain: Domain,
    degree_cap: usize,
    coeff_dim: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
    norms: Vec<f64>,
    /// `offsets[d]` = number of monomials of degree `< d`, for `d = 0..=D+1`.
    offsets: Vec<usize>,
}

impl PartialEq for TruncatedBasis {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.degree_cap == other.degree_cap && self.coeff_dim == other.coeff_dim
    }
}

impl TruncatedBasis {
    pub fn new(domain: Domain, degree_cap: usize, coeff_dim: usize) -> Result<Self> {
        domain.validate()?;
        if degree_cap > MAX_ORDER {
            return Err(Error::OutOfRange { what: "degree_cap", value: degree_cap, cap: MAX_ORDER });
        }
        if coeff_dim == 0 {
            return Err(Error::InvalidInput("coefficient dimension must be positive".into()));
        }
        if coeff_dim > MAX_COEFF_DIM {
            return Err(Error::OutOfRange { what: "coeff_dim", value: coeff_dim, cap: MAX_COEFF_DIM });
        }
        let n = domain.n();
        let count = count_indices(n, degree_cap).saturating_mul(coeff_dim as u128);
        if count > MAX_BASIS_DIM as u128 {
            return Err(Error::OutOfRange {
                what: "basis dimension",
                value: usize::try_from(count).unwrap_or(usize::MAX),
                cap: MAX_BASIS_DIM,
            });
        }
        let indices = enumerate_indices(n, degree_cap);
        let norms = indices.iter().map(|a| domain.norm(a)).collect::<Result<Vec<_>>>()?;
        if let Some(bad) = norms.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Numerical(format!("monomial norm {bad} is not positive and finite")));
        }
        let positions = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let mut offsets = vec![0; degree_cap + 2];
        for a in &indices {
            offsets[a.degree() + 1] += 1;
        }
        for d in 1..offsets.len() {
            offsets[d] += offsets[d - 1];
        }
        Ok(TruncatedBasis { domain, degree_cap, coeff_dim, indices, positions, norms, offsets })
    }

    pub fn polydisc(factor: KernelSpec1D, n: usize, degree_cap: usize, coeff_dim: usize) -> Result<Self> {
        Self::new(Domain::polydisc(factor, n), degree_cap, coeff_dim)
    }

    pub fn ball(kernel: BallKernelSpec, degree_cap: usize, coeff_dim: usize) -> Result<Self> {
        Self::new(Domain::ball(kernel), degree_cap, coeff_dim)
    }

    /// Same space with another degree cap.
    pub fn with_degree(&self, degree_cap: usize) -> Result<Self> {
        Self::new(self.domain.clone(), degree_cap, self.coeff_dim)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn num_monomials(&self) -> usize {
        self.indices.len()
    }

    pub fn dim(&self) -> usize {
        self.indices.len() * self.coeff_dim
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }

    /// Flat coordinate of `e_α ⊗ ξ_j` given the monomial position.
    pub fn flat(&self, pos: usize, j: usize) -> usize {
        pos * self.coeff_dim + j
    }

    /// Dimension of the leading block `V_d` (all of `V_D` if `d >= D`).
    pub fn prefix_dim(&self, d: usize) -> usize {
        self.offsets[d.min(self.degree_cap) + 1] * self.coeff_dim
    }

    /// Flat coordinates of the degree-`d` homogeneous block.
    pub fn degree_block(&self, d: usize) -> Range<usize> {
        if d > self.degree_cap {
            let end = self.dim();
            return end..end;
        }
        self.offsets[d] * self.coeff_dim..self.offsets[d + 1] * self.coeff_dim
    }

    /// `‖z^α‖` by monomial position.
    pub fn norm_at(&self, pos: usize) -> f64 {
        self.norms[pos]
    }

    pub fn monomial_norm(&self, alpha: &MultiIndex) -> Result<f64> {
        if alpha.n() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "multi-index has {} entries, space has {} variables",
                alpha.n(),
                self.n()
            )));
        }
        let pos = self.position(alpha).ok_or(Error::OutOfRange {
            what: "monomial degree",
            value: alpha.degree(),
            cap: self.degree_cap,
        })?;
        Ok(self.norms[pos])
    }

    fn check_interior(&self, point: &[C64]) -> Result<()> {
        if point.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, space has {} variables",
                point.len(),
                self.n()
            )));
        }
        let size = match self.domain {
            Domain::Polydisc { .. } => point.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())),
            Domain::Ball { .. } => point.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        };
        if !(size < 1.0) {
            return Err(Error::NotInterior { size });
        }
        Ok(())
    }
}

/// Vector of `V_D ⊗ E` in the normalized basis.
#[derive(Clone, Debug)]
pub struct SpaceVector {
    pub basis: Arc<TruncatedBasis>,
    pub coords: DVector<C64>,
}

impl SpaceVector {
    pub fn new(basis: Arc<TruncatedBasis>, coords: DVector<C64>) -> Result<Self> {
        if coords.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for a basis of dimension {}",
                coords.len(),
                basis.dim()
            )));
        }
        Ok(SpaceVector { basis, coords })
    }

    pub fn zeros(basis: Arc<TruncatedBasis>) -> Self {
        let coords = DVector::zeros(basis.dim());
        SpaceVector { basis, coords }
    }

    /// `ξ` placed in the constant block.
    pub fn constant(basis: Arc<TruncatedBasis>, xi: &[C64]) -> Result<Self> {
        if xi.len() != basis.coeff_dim() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient vector of length {}, expected {}",
                xi.len(),
                basis.coeff_dim()
            )));
        }
        let mut v = Self::zeros(basis);
        v.coords.rows_mut(0, xi.len()).copy_from_slice(xi);
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    /// `⟨self, other⟩`, linear in the first slot.
    pub fn inner(&self, other: &SpaceVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch("vectors live on different bases".into()));
        }
        Ok(other.coords.dotc(&self.coords))
    }
}

/// Truncation of `K(·, λ) ξ` to `V_D`.
pub fn kernel_vector(basis: &Arc<TruncatedBasis>, lambda: &[C64], xi: &[C64]) -> Result<SpaceVector> {
    basis.check_interior(lambda)?;
    if xi.len() != basis.coeff_dim() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient vector of length {}, expected {}",
            xi.len(),
            basis.coeff_dim()
        )));
    }
    let k = basis.coeff_dim();
    let mut coords = DVector::zeros(basis.dim());
    for (pos, alpha) in basis.indices().iter().enumerate() {
        let w = alpha.eval(lambda).conj() / basis.norm_at(pos);
        for (j, x) in xi.iter().enumerate() {
            coords[pos * k + j] = w * x;
        }
    }
    Ok(SpaceVector { basis: Arc::clone(basis), coords })
}
