//! Seeded random test objects: Haar unitaries, projections, contractive
//! polynomial symbols, BCL triples and colligations.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dilation::{BCLTriple, Colligation};
use crate::error::Result;
use crate::linalg;
use crate::operators::symbol::MultiplierSymbol;
use crate::purity::padded_multiplier_norm;
use crate::spaces::{enumerate_indices, Domain, TruncatedBasis};
use crate::C64;

/// Safety factor applied when rescaling random symbols to contractions.
pub const CONTRACTION_MARGIN: f64 = 0.99;

/// Standard complex Gaussian (independent real and imaginary parts of
/// variance 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of the
/// diagonal of `R` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, k: usize) -> DMatrix<C64> {
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let qr = gaussian_matrix(rng, k, k).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `V diag(1, ..., 1, 0, ..., 0) V*` with `rank` ones and Haar `V`.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, k: usize, rank: usize) -> DMatrix<C64> {
    let v = haar_unitary(rng, k);
    let q = v.columns(0, rank.min(k)).into_owned();
    linalg::projector(&q)
}

/// Gaussian symbol with a coefficient for every `|α| <= degree`.
pub fn gaussian_symbol<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, degree: usize) -> MultiplierSymbol {
    let mut phi = MultiplierSymbol::zero(n, k);
    for alpha in enumerate_indices(n, degree) {
        phi.add_term(alpha, gaussian_matrix(rng, k, k)).expect("matching shapes");
    }
    phi
}

/// Rescales `phi` so its padded multiplier norm on `domain` is
/// [`CONTRACTION_MARGIN`].
pub fn rescale_contractive(phi: &MultiplierSymbol, domain: &Domain, d_max: usize) -> Result<MultiplierSymbol> {
    let norm = padded_multiplier_norm(phi, domain, d_max)?;
    if norm == 0.0 {
        return Ok(phi.clone());
    }
    Ok(phi.scale(C64::new(CONTRACTION_MARGIN / norm, 0.0)))
}

/// Random contractive symbol of degree at most `degree`.
pub fn random_contractive_symbol<R: Rng + ?Sized>(
    rng: &mut R,
    domain: &Domain,
    k: usize,
    degree: usize,
    d_max: usize,
) -> Result<MultiplierSymbol> {
    let phi = gaussian_symbol(rng, domain.n(), k, degree);
    rescale_contractive(&phi, domain, d_max)
}

/// Contractive symbol whose constant term has a unimodular eigenvalue:
/// `W (U_1 ⊕ Ψ(z)) W*` with `U_1` a Haar unitary on a block of random rank
/// `r >= 1`, `Ψ` a rescaled random symbol on the rest and `W` Haar.
pub fn forced_unitary_symbol<R: Rng + ?Sized>(
    rng: &mut R,
    domain: &Domain,
    k: usize,
    degree: usize,
    d_max: usize,
) -> Result<MultiplierSymbol> {
    let n = domain.n();
    let r = rng.random_range(1..=k);
    let u1 = haar_unitary(rng, r);
    let rest = k - r;
    let psi = if rest > 0 { Some(random_contractive_symbol(rng, domain, rest, degree, d_max)?) } else { None };
    let w = haar_unitary(rng, k);
    let mut phi = MultiplierSymbol::zero(n, k);
    for alpha in enumerate_indices(n, degree) {
        let mut block = DMatrix::zeros(k, k);
        if alpha.degree() == 0 {
            block.view_mut((0, 0), (r, r)).copy_from(&u1);
        }
        if let Some(psi) = &psi {
            block.view_mut((r, r), (rest, rest)).copy_from(&psi.coefficient(&alpha));
        }
        phi.add_term(alpha, &w * block * w.adjoint())?;
    }
    Ok(phi)
}

/// Random BCL triple. With `on_circle` the unitary and projection share an
/// eigenbasis, so `P U*` has eigenvalues of modulus one whenever `P` is
/// nonzero; otherwise both are independent Haar-random.
pub fn random_bcl_triple<R: Rng + ?Sized>(
    rng: &mut R,
    e_dim: usize,
    rank: usize,
    axis: usize,
    on_circle: bool,
) -> Result<BCLTriple> {
    let (u, p) = if on_circle {
        let v = haar_unitary(rng, e_dim);
        let phases = DMatrix::from_fn(e_dim, e_dim, |i, j| {
            if i == j {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                C64::from_polar(1.0, t)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mut diag = DMatrix::zeros(e_dim, e_dim);
        for i in 0..rank.min(e_dim) {
            diag[(i, i)] = C64::new(1.0, 0.0);
        }
        (&v * phases * v.adjoint(), &v * diag * v.adjoint())
    } else {
        (haar_unitary(rng, e_dim), random_projection(rng, e_dim, rank))
    };
    BCLTriple::new(u, p, axis)
}

/// Colligation from a Haar unitary on `E ⊕ H_1 ⊕ ... ⊕ H_{n-1}`.
pub fn random_colligation<R: Rng + ?Sized>(rng: &mut R, e_dim: usize, h_dims: &[usize]) -> Result<Colligation> {
    let total = e_dim + h_dims.iter().sum::<usize>();
    Colligation::from_unitary(&haar_unitary(rng, total), e_dim, h_dims.to_vec())
}

/// Gaussian vector supported on the degree-`degree` block of `basis`.
pub fn random_homogeneous_vector<R: Rng + ?Sized>(rng: &mut R, basis: &TruncatedBasis, degree: usize) -> DMatrix<C64> {
    let mut v = DMatrix::zeros(basis.dim(), 1);
    for r in basis.degree_block(degree) {
        v[(r, 0)] = complex_gaussian(rng);
    }
    v
}

/// Uniform point in the open polydisc of radius `radius`.
pub fn random_polydisc_point<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let r: f64 = radius * rng.random::<f64>().sqrt();
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r, t)
        })
        .collect()
}
