use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rkhs_purity::kernels::{BallKernelSpec, KernelSpec1D};
use rkhs_purity::linalg;
use rkhs_purity::operators::*;
use rkhs_purity::random::{haar_unitary, random_homogeneous_vector};
use rkhs_purity::spaces::{enumerate_indices, Domain, MultiIndex, TruncatedBasis};
use rkhs_purity::{Error, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn polydisc(family: KernelSpec1D, n: usize, d: usize, k: usize) -> Arc<TruncatedBasis> {
    Arc::new(TruncatedBasis::polydisc(family, n, d, k).unwrap())
}

/// Weight of the one-variable shift from degree `m` to `m + 1`.
fn shift_weight(family: &KernelSpec1D, m: usize) -> f64 {
    let m = m as f64;
    match family {
        KernelSpec1D::Hardy => 1.0,
        KernelSpec1D::Bergman => ((m + 1.0) / (m + 2.0)).sqrt(),
        KernelSpec1D::Dirichlet => ((m + 2.0) / (m + 1.0)).sqrt(),
        _ => unreachable!(),
    }
}

#[test]
fn shift_weights() {
    for family in [KernelSpec1D::Hardy, KernelSpec1D::Bergman, KernelSpec1D::Dirichlet] {
        let b = polydisc(family.clone(), 1, 5, 1);
        let s = shift_matrix(&b, 0).unwrap();
        for row in 0..6 {
            for col in 0..6 {
                let expected = if row == col + 1 { shift_weight(&family, col) } else { 0.0 };
                assert!((s.data[(row, col)] - c(expected)).norm() < 1e-15);
            }
        }
        assert_eq!(s.exactness.degree, Some(4));
        assert_eq!(s.adjoint_exactness.degree, Some(5));
    }
}

#[test]
fn multiplier_examples() {
    let b = polydisc(KernelSpec1D::Bergman, 2, 3, 2);
    let id = multiplier_matrix(&b, &MultiplierSymbol::identity(2, 2)).unwrap();
    assert!((id.data - linalg::identity(b.dim())).norm() < 1e-15);

    let b = polydisc(KernelSpec1D::Hardy, 1, 2, 1);
    let z = multiplier_matrix(&b, &MultiplierSymbol::variable(1, 1, 0).unwrap()).unwrap();
    let expected = DMatrix::from_row_slice(3, 3, &[c(0.), c(0.), c(0.), c(1.), c(0.), c(0.), c(0.), c(1.), c(0.)]);
    assert!((z.data - expected).norm() < 1e-15);

    let b = polydisc(KernelSpec1D::Hardy, 2, 2, 1);
    let z1z2 = MultiplierSymbol::scalar(2, &[(mi(&[1, 1]), c(1.0))]).unwrap();
    let m = multiplier_matrix(&b, &z1z2).unwrap();
    let target = b.position(&mi(&[1, 1])).unwrap();
    let mut expected = DMatrix::zeros(b.dim(), b.dim());
    expected[(target, 0)] = c(1.0);
    assert!((m.data - expected).norm() < 1e-15);
    assert_eq!(m.exactness.degree, Some(0));
}

/// Adjoint of the multiplier matrix equals `M_Φ*` on `V_D`, checked through
/// `<M_Φ* f, g> = <f, Φ g>` with `Φ g` computed on a larger truncation.
#[test]
fn adjoint_compression_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let domain = Domain::ball(BallKernelSpec::hm(2, 2).unwrap());
    let phi = rkhs_purity::random::gaussian_symbol(&mut rng, 2, 2, 2);
    let small = Arc::new(TruncatedBasis::new(domain.clone(), 3, 2).unwrap());
    let big = Arc::new(TruncatedBasis::new(domain, 5, 2).unwrap());
    let t_small = adjoint_compression(&small, &phi).unwrap();
    let m_big = multiplier_matrix(&big, &phi).unwrap();
    let n = small.dim();
    // On V_3, M_Φ maps into V_5 exactly; its adjoint compressed back to V_3
    // is the leading block of the big adjoint.
    let reference = m_big.data.adjoint().view((0, 0), (n, n)).into_owned();
    assert!((t_small.data - reference).norm() < 1e-13);
}

#[test]
fn cauchy_duals_have_closed_form_weights() {
    for family in [KernelSpec1D::Bergman, KernelSpec1D::Dirichlet, KernelSpec1D::Hardy] {
        let b = polydisc(family.clone(), 1, 6, 1);
        let s = shift_matrix(&b, 0).unwrap();
        let dual = cauchy_dual(&s, LEFT_INVERTIBLE_TOL).unwrap();
        assert_eq!(dual.data.ncols(), 6);
        for col in 0..6 {
            for row in 0..7 {
                let expected = if row == col + 1 { 1.0 / shift_weight(&family, col) } else { 0.0 };
                assert!((dual.data[(row, col)] - c(expected)).norm() < 1e-12);
            }
        }
    }
}

fn kernel_of_adjoint(t: &OperatorMatrix) -> DMatrix<C64> {
    linalg::null_space(&t.data.adjoint(), NULL_THRESHOLD)
}

#[test]
fn dual_shares_kernel_and_range() {
    for family in [KernelSpec1D::Bergman, KernelSpec1D::Dirichlet] {
        for axis in 0..2 {
            let b = polydisc(family.clone(), 2, 5, 2);
            let s = shift_matrix(&b, axis).unwrap();
            let block = s.exact_block().unwrap();
            let dual = cauchy_dual(&s, LEFT_INVERTIBLE_TOL).unwrap();
            assert!(linalg::max_principal_angle(&kernel_of_adjoint(&block), &kernel_of_adjoint(&dual)) <= 1e-10);
            let p = range_projection(&s, LEFT_INVERTIBLE_TOL).unwrap();
            let p_dual = range_projection(&dual, LEFT_INVERTIBLE_TOL).unwrap();
            assert!(linalg::spectral_norm(&(&p.data - &p_dual.data)) <= 1e-10);
            assert!(linalg::projection_residual(&p.data) <= 1e-11);
            let double = cauchy_dual(&dual, LEFT_INVERTIBLE_TOL).unwrap();
            assert!(linalg::spectral_norm(&(&double.data - &block.data)) <= 1e-10);
        }
    }
}

#[test]
fn range_projection_examples() {
    let b = polydisc(KernelSpec1D::Hardy, 1, 3, 1);
    let s = shift_matrix(&b, 0).unwrap();
    let p = range_projection(&s, LEFT_INVERTIBLE_TOL).unwrap();
    let diag: Vec<f64> = (0..4).map(|i| p.data[(i, i)].re).collect();
    assert_eq!(diag, vec![0.0, 1.0, 1.0, 1.0]);
    let block = s.exact_block().unwrap();
    assert!((p.data - &block.data * block.data.adjoint()).norm() < 1e-15);

    let square = OperatorMatrix::uncertified(s.data.clone(), Arc::clone(&b)).unwrap();
    assert!(matches!(range_projection(&square, 1e-8), Err(Error::ExactnessBudget { .. })));
}

#[test]
fn wandering_subspace_examples() {
    for k in 1..=2 {
        let b = polydisc(KernelSpec1D::Hardy, 2, 4, k);
        let w = wandering_subspace(&shift_tuple(&b).unwrap(), NULL_THRESHOLD).unwrap();
        assert_eq!(w.dim(), k);
        let constants = DMatrix::from_fn(b.dim(), k, |r, j| if r == j { c(1.0) } else { c(0.0) });
        assert!(linalg::max_principal_angle(w.columns(), &constants) < 1e-12);
    }
    let b = polydisc(KernelSpec1D::Hardy, 1, 4, 2);
    assert_eq!(wandering_subspace(&shift_tuple(&b).unwrap(), NULL_THRESHOLD).unwrap().dim(), 2);

    for family in [KernelSpec1D::Bergman, KernelSpec1D::Dirichlet] {
        let b = polydisc(family, 2, 4, 1);
        let x = shift_tuple(&b).unwrap();
        let w = wandering_subspace(&x, NULL_THRESHOLD).unwrap();
        let w_dual = wandering_subspace(&dual_tuple(&x, LEFT_INVERTIBLE_TOL).unwrap(), NULL_THRESHOLD).unwrap();
        assert!(w.max_angle(&w_dual) <= 1e-10);
    }
}

/// The joint kernel of `(A ⊗ I, I ⊗ B)*` is `ker A* ⊗ ker B*`.
#[test]
fn tensor_tuple_wandering_subspace_factors() {
    for (f1, f2) in [
        (KernelSpec1D::Hardy, KernelSpec1D::Bergman),
        (KernelSpec1D::Bergman, KernelSpec1D::Dirichlet),
        (KernelSpec1D::Dirichlet, KernelSpec1D::Dirichlet),
    ] {
        for use_duals in [false, true] {
            let b1 = polydisc(f1.clone(), 1, 4, 1);
            let b2 = polydisc(f2.clone(), 1, 3, 1);
            let mut a = shift_tuple(&b1).unwrap();
            let mut b = shift_tuple(&b2).unwrap();
            if use_duals {
                a = dual_tuple(&a, LEFT_INVERTIBLE_TOL).unwrap();
                b = dual_tuple(&b, LEFT_INVERTIBLE_TOL).unwrap();
            }
            let (a, b) = (&a[0].data, &b[0].data);
            let x1 = linalg::kron(a, &linalg::identity(b.nrows()));
            let x2 = linalg::kron(&linalg::identity(a.nrows()), b);
            let mut stacked = DMatrix::zeros(2 * x1.nrows(), x1.ncols());
            stacked.rows_mut(0, x1.nrows()).copy_from(&x1.adjoint());
            stacked.rows_mut(x1.nrows(), x1.nrows()).copy_from(&x2.adjoint());
            let joint = linalg::null_space(&stacked, NULL_THRESHOLD);
            let w1 = linalg::null_space(&a.adjoint(), NULL_THRESHOLD);
            let w2 = linalg::null_space(&b.adjoint(), NULL_THRESHOLD);
            let product = linalg::kron(&w1, &w2);
            assert_eq!(joint.ncols(), product.ncols());
            assert!(linalg::max_principal_angle(&joint, &product) <= 1e-10);
        }
    }
}

#[test]
fn wandering_property_at_truncation() {
    for family in [KernelSpec1D::Hardy, KernelSpec1D::Bergman, KernelSpec1D::Dirichlet] {
        for n in 1..=3 {
            let b = polydisc(family.clone(), n, 4, 2);
            let x = shift_tuple(&b).unwrap();
            assert!(wandering_property_check(&x, NULL_THRESHOLD).unwrap().pass);
            let d = dual_tuple(&x, LEFT_INVERTIBLE_TOL).unwrap();
            assert!(wandering_property_check(&d, NULL_THRESHOLD).unwrap().pass);
        }
    }
}

#[test]
fn decomposition_identity_for_shift_tuples() {
    for family in [KernelSpec1D::Hardy, KernelSpec1D::Bergman, KernelSpec1D::Dirichlet] {
        let b = polydisc(family, 2, 5, 1);
        let r = wandering_decomposition_check(&shift_tuple(&b).unwrap(), LEFT_INVERTIBLE_TOL).unwrap();
        assert!(r.residual <= 1e-10, "{r:?}");
    }
}

#[test]
fn union_projection_matches_span_of_ranges() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let k = 6;
    let b = polydisc(KernelSpec1D::Hardy, 1, k - 1, 1);
    for trial in 0..10 {
        let u = haar_unitary(&mut rng, k);
        let patterns: Vec<Vec<bool>> = (0..3)
            .map(|i| (0..k).map(|j| (j * 7 + i * 3 + trial) % 4 == 0 || (i + j) % 3 == 0).collect())
            .collect();
        let projections: Vec<OperatorMatrix> = patterns
            .iter()
            .map(|pat| {
                let d = DMatrix::from_fn(k, k, |r, s| if r == s && pat[r] { c(1.0) } else { c(0.0) });
                OperatorMatrix::uncertified(&u * d * u.adjoint(), Arc::clone(&b)).unwrap()
            })
            .collect();
        let union = union_projection(&projections, 1e-10).unwrap();
        let mut all = DMatrix::zeros(k, 3 * k);
        for (i, p) in projections.iter().enumerate() {
            all.columns_mut(i * k, k).copy_from(&p.data);
        }
        let q = linalg::orthonormal_range(&all, 1e-8);
        assert!(linalg::spectral_norm(&(union.data - &q * q.adjoint())) < 1e-10);
    }
}

#[test]
fn doubly_commuting_examples() {
    for family in [KernelSpec1D::Hardy, KernelSpec1D::Bergman, KernelSpec1D::Dirichlet] {
        let b = polydisc(family, 2, 5, 1);
        let r = doubly_commuting_check(&shift_tuple(&b).unwrap(), 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
    }
    let b = polydisc(KernelSpec1D::Hardy, 1, 4, 1);
    let s = shift_matrix(&b, 0).unwrap();
    let r = doubly_commuting_check(&[s.clone(), s], 1e-12).unwrap();
    assert!(r.commutator < 1e-15);
    assert!(r.cross_commutator > 0.5);
    assert!(!r.pass);
}

/// Tuple duals computed directly: `T (T*T)^{-1}` on the columns of degree
/// below the cap, zero on the top degree.
fn direct_duals(basis: &Arc<TruncatedBasis>) -> Vec<DMatrix<C64>> {
    let cols = basis.prefix_dim(basis.degree_cap() - 1);
    shift_tuple(basis)
        .unwrap()
        .iter()
        .map(|s| {
            let t = s.data.columns(0, cols).into_owned();
            let dual = &t * (t.adjoint() * &t).try_inverse().unwrap();
            let mut out = DMatrix::zeros(basis.dim(), basis.dim());
            out.columns_mut(0, cols).copy_from(&dual);
            out
        })
        .collect()
}

/// Minimal `m` in lexicographic order (via `Vec` ordering) over the cube,
/// returning the witness vector.
fn brute_force_witness(
    basis: &Arc<TruncatedBasis>,
    m: &SubspaceFrame,
    budget: usize,
    tol: f64,
) -> Option<(usize, Vec<usize>, DMatrix<C64>)> {
    let duals = direct_duals(basis);
    let n = basis.n();
    let w = linalg::null_space(
        &{
            let x = shift_tuple(basis).unwrap();
            let mut s = DMatrix::zeros(n * basis.dim(), basis.dim());
            for (i, xi) in x.iter().enumerate() {
                s.rows_mut(i * basis.dim(), basis.dim()).copy_from(&xi.data.adjoint());
            }
            s
        },
        NULL_THRESHOLD,
    );
    let p = m.projector();
    for h_index in 0..w.ncols() {
        let h = w.columns(h_index, 1).into_owned();
        let mut best: Option<(Vec<usize>, DMatrix<C64>)> = None;
        for alpha in enumerate_indices(n, budget) {
            let mut v = h.clone();
            for (i, &a) in alpha.entries().iter().enumerate() {
                for _ in 0..a {
                    v = &duals[i] * v;
                }
            }
            if linalg::spectral_norm(&(m.columns().adjoint() * &v)) <= tol {
                continue;
            }
            let key = alpha.entries().to_vec();
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((key, &p * v));
            }
        }
        if let Some((key, eta)) = best {
            return Some((h_index, key, eta));
        }
    }
    None
}

fn witness_bases() -> Vec<Arc<TruncatedBasis>> {
    vec![
        polydisc(KernelSpec1D::Hardy, 2, 5, 1),
        polydisc(KernelSpec1D::Bergman, 2, 5, 1),
        polydisc(KernelSpec1D::Dirichlet, 2, 5, 1),
        Arc::new(TruncatedBasis::ball(BallKernelSpec::drury_arveson(2).unwrap(), 5, 1).unwrap()),
    ]
}

#[test]
fn witness_for_monomial_ideal() {
    let b = polydisc(KernelSpec1D::Hardy, 2, 5, 1);
    let mut g = DMatrix::zeros(b.dim(), 1);
    g[(b.position(&mi(&[1, 1])).unwrap(), 0)] = c(1.0);
    let m = generated_invariant_subspace(&b, &g).unwrap();
    assert_eq!(m.dim(), b.dim() - 1 - 2 * 5);
    let x = shift_tuple(&b).unwrap();
    let WitnessOutcome::Found(w) = wandering_witness(&x, &m, 5, 1e-8).unwrap() else { panic!("no witness") };
    assert_eq!(w.multi_index, mi(&[1, 1]));
    assert!(w.max_residual() <= 1e-8);
    // The frame vector of W is a constant of modulus one; its phase is free.
    assert!((w.eta.coords.dotc(&g.column(0)).norm() - 1.0).abs() < 1e-12);
    assert!((w.eta.norm() - 1.0).abs() < 1e-12);

    assert!(matches!(
        wandering_witness(&x, &m, 1, 1e-8).unwrap(),
        WitnessOutcome::BudgetExhausted { budget: 1 }
    ));
}

#[test]
fn witness_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for b in witness_bases() {
        let x = shift_tuple(&b).unwrap();
        for trial in 0..10 {
            let gens = 1 + trial % 2;
            let mut g = DMatrix::zeros(b.dim(), gens);
            for j in 0..gens {
                let degree = 1 + (trial + j) % 3;
                g.set_column(j, &random_homogeneous_vector(&mut rng, &b, degree).column(0));
            }
            let m = generated_invariant_subspace(&b, &g).unwrap();
            let outcome = wandering_witness(&x, &m, 5, 1e-8).unwrap();
            let WitnessOutcome::Found(w) = outcome else { panic!("no witness on trial {trial}") };
            assert!(w.max_residual() <= 1e-8, "{:?}", w.residuals);
            let (h_index, key, eta) = brute_force_witness(&b, &m, 5, 1e-8).unwrap();
            assert_eq!(w.h_index, h_index);
            assert_eq!(w.multi_index.entries(), key.as_slice());
            assert!((w.eta.coords.clone() - eta.column(0)).norm() < 1e-9);
        }
    }
}

#[test]
fn non_homogeneous_generators_are_rejected() {
    let b = polydisc(KernelSpec1D::Hardy, 2, 3, 1);
    let mut g = DMatrix::zeros(b.dim(), 1);
    g[(1, 0)] = c(1.0);
    g[(4, 0)] = c(1.0);
    assert!(matches!(generated_invariant_subspace(&b, &g), Err(Error::Precondition(_))));
    let mut g = DMatrix::zeros(b.dim(), 1);
    g[(0, 0)] = c(1.0);
    assert!(matches!(generated_invariant_subspace(&b, &g), Err(Error::Precondition(_))));
}

#[test]
fn partial_isometry_wandering_formula() {
    // Unimodular multiples of monomials are inner.
    let b = polydisc(KernelSpec1D::Hardy, 2, 6, 1);
    for theta in [
        MultiplierSymbol::scalar(2, &[(mi(&[1, 0]), c(1.0))]).unwrap(),
        MultiplierSymbol::scalar(2, &[(mi(&[1, 1]), c(1.0))]).unwrap(),
        MultiplierSymbol::scalar(2, &[(mi(&[2, 1]), C64::new(0.0, 1.0))]).unwrap(),
    ] {
        let pi = multiplier_matrix(&b, &theta).unwrap();
        let r = partial_isometry_wandering_check(&pi, 1e-10).unwrap();
        assert_eq!(r.lhs_dim, r.rhs_dim);
        assert!(r.max_angle <= 1e-9, "{r:?}");
    }
}

proptest! {
    #[test]
    fn degree_zero_block_is_phi0_adjoint(seed in 0u64..1000, k in 1usize..=3, which in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = [
            Domain::polydisc(KernelSpec1D::Hardy, 2),
            Domain::polydisc(KernelSpec1D::Dirichlet, 2),
            Domain::ball(BallKernelSpec::drury_arveson(2).unwrap()),
            Domain::ball(BallKernelSpec::hm(3, 2).unwrap()),
        ][which].clone();
        let phi = rkhs_purity::random::gaussian_symbol(&mut rng, domain.n(), k, 2);
        let b = Arc::new(TruncatedBasis::new(domain, 3, k).unwrap());
        let t = adjoint_compression(&b, &phi).unwrap();
        let block = t.data.view((0, 0), (k, k)).into_owned();
        prop_assert!((block - phi.phi0().adjoint()).iter().all(|x| x.norm() <= 1e-13));
    }

    #[test]
    fn involution_of_the_dual(which in 0usize..3, n in 1usize..=2, axis_seed in 0usize..2) {
        let family = [KernelSpec1D::Hardy, KernelSpec1D::Bergman, KernelSpec1D::Dirichlet][which].clone();
        let b = polydisc(family, n, 4, 1);
        let s = shift_matrix(&b, axis_seed % n).unwrap();
        let dual = cauchy_dual(&s, LEFT_INVERTIBLE_TOL).unwrap();
        let double = cauchy_dual(&dual, LEFT_INVERTIBLE_TOL).unwrap();
        prop_assert!(linalg::spectral_norm(&(double.data - s.exact_block().unwrap().data)) <= 1e-10);
    }
}
