use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rkhs_purity::dilation::bcl_pair;
use rkhs_purity::kernels::{BallKernelSpec, KernelSpec1D};
use rkhs_purity::linalg;
use rkhs_purity::operators::{adjoint_compression, MultiplierSymbol};
use rkhs_purity::purity::*;
use rkhs_purity::random::*;
use rkhs_purity::spaces::{Domain, MultiIndex, SpaceVector, TruncatedBasis};
use rkhs_purity::{Error, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mi(v: &[usize]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn hardy(n: usize) -> Domain {
    Domain::polydisc(KernelSpec1D::Hardy, n)
}

#[test]
fn verdict_examples() {
    let one = scalar_constant(2, c(1.0));
    let r = multiplier_purity_verdict(&one, &Domain::polydisc(KernelSpec1D::Bergman, 2), 4, PURITY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::NotPure);
    assert!(r.per_degree_rho.values().all(|&x| (x - 1.0).abs() < 1e-12));

    let z1z2 = MultiplierSymbol::scalar(2, &[(mi(&[1, 1]), c(1.0))]).unwrap();
    let r = multiplier_purity_verdict(&z1z2, &hardy(2), 6, PURITY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Pure);
    assert!(r.per_degree_rho.values().all(|&x| x == 0.0));
    assert_eq!(r.phi0_rho, 0.0);

    let mut diag = MultiplierSymbol::zero(1, 2);
    diag.add_term(mi(&[0]), DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)])).unwrap();
    diag.add_term(mi(&[1]), DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)])).unwrap();
    let r = multiplier_purity_verdict(&diag, &hardy(1), 5, PURITY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::NotPure);
    assert_eq!(r.per_degree_rho.len(), 6);
    assert!(r.per_degree_rho.values().all(|&x| (x - 1.0).abs() < 1e-12));

    let r = multiplier_purity_verdict(&scalar_constant(2, c(0.9)), &hardy(2), 3, PURITY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Pure);

    let big = scalar_constant(1, c(1.5));
    assert!(matches!(
        multiplier_purity_verdict(&big, &hardy(1), 3, PURITY_TOL),
        Err(Error::NonContractive { .. })
    ));
}

#[test]
fn near_boundary_is_flagged() {
    let phi = scalar_constant(1, c(1.0 - 5e-8));
    let r = multiplier_purity_verdict(&phi, &hardy(1), 2, PURITY_TOL).unwrap();
    assert_eq!(r.verdict, Verdict::Pure);
    assert!(r.near_boundary);
    let r = multiplier_purity_verdict(&scalar_constant(1, c(0.5)), &hardy(1), 2, PURITY_TOL).unwrap();
    assert!(!r.near_boundary);
}

#[test]
fn adjoint_compression_examples() {
    let b = Arc::new(TruncatedBasis::polydisc(KernelSpec1D::Bergman, 2, 3, 1).unwrap());
    let t = adjoint_compression(&b, &scalar_constant(2, C64::new(0.3, 0.4))).unwrap();
    assert!((t.data - linalg::identity(b.dim()) * C64::new(0.3, -0.4)).norm() < 1e-15);

    let b = Arc::new(TruncatedBasis::polydisc(KernelSpec1D::Hardy, 1, 4, 1).unwrap());
    let t = adjoint_compression(&b, &MultiplierSymbol::variable(1, 1, 0).unwrap()).unwrap();
    let mut power = linalg::identity(5);
    for _ in 0..5 {
        power = &t.data * power;
    }
    assert_eq!(power.norm(), 0.0);
    assert_eq!(t.exactness.degree, Some(4));
}

#[test]
fn decay_examples() {
    let b = Arc::new(TruncatedBasis::polydisc(KernelSpec1D::Hardy, 1, 6, 2).unwrap());
    let h = SpaceVector::constant(Arc::clone(&b), &[c(3.0), c(4.0)]).unwrap();
    let one = adjoint_compression(&b, &MultiplierSymbol::identity(1, 2)).unwrap();
    assert!(decay_curve(&one, &h, 5).unwrap().iter().all(|&x| (x - 5.0).abs() < 1e-14));
    let z = adjoint_compression(&b, &MultiplierSymbol::variable(1, 2, 0).unwrap()).unwrap();
    assert_eq!(decay_curve(&z, &h, 3).unwrap(), vec![5.0, 0.0, 0.0, 0.0]);

    // (1 + z)/2 against explicit powers of the backward-shift matrix.
    let b = Arc::new(TruncatedBasis::polydisc(KernelSpec1D::Hardy, 1, 8, 1).unwrap());
    let phi = MultiplierSymbol::scalar(1, &[(mi(&[0]), c(0.5)), (mi(&[1]), c(0.5))]).unwrap();
    let t = adjoint_compression(&b, &phi).unwrap();
    let backward = DMatrix::from_fn(9, 9, |r, s| if s == r + 1 { c(1.0) } else { c(0.0) });
    let oracle = (linalg::identity(9) + backward) * c(0.5);
    let h = SpaceVector::constant(Arc::clone(&b), &[c(1.0)]).unwrap();
    let curve = decay_curve(&t, &h, 12).unwrap();
    let mut v = h.coords.clone();
    for (m, &x) in curve.iter().enumerate() {
        assert!((x - v.norm()).abs() < 1e-14);
        if m > 0 {
            assert!(x < curve[m - 1]);
        }
        v = &oracle * v;
    }
    assert!(curve[12] < 1e-3);
}

#[test]
fn a_operator_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = haar_unitary(&mut rng, 2);
    let mut t = DMatrix::zeros(4, 4);
    t.view_mut((0, 0), (2, 2)).copy_from(&u);
    t[(2, 2)] = c(0.5);
    t[(3, 3)] = c(-0.3);
    let a = a_operator_estimate(&t, 60).unwrap();
    let mut p = DMatrix::zeros(4, 4);
    p[(0, 0)] = c(1.0);
    p[(1, 1)] = c(1.0);
    assert!((a.matrix - p).norm() < 1e-12);

    let nil = DMatrix::from_fn(3, 3, |r, s| if s == r + 1 { c(1.0) } else { c(0.0) });
    assert_eq!(a_operator_estimate(&nil, 3).unwrap().matrix.norm(), 0.0);

    let scaled = linalg::identity(3) * c(0.7);
    let a = a_operator_estimate(&scaled, 4).unwrap();
    assert!((a.matrix - linalg::identity(3) * c(0.7f64.powi(8))).norm() < 1e-15);
    assert!(a_operator_monotonicity(&scaled, 10).unwrap().monotone);
}

#[test]
fn nagy_foias_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = haar_unitary(&mut rng, 3);
    let s = nagy_foias_split(&u, 1e-8).unwrap();
    assert_eq!(s.e0.ncols(), 3);

    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.5)]));
    let s = nagy_foias_split(&d, 1e-8).unwrap();
    assert_eq!(s.e0.ncols(), 1);
    assert!((s.e0[(0, 0)].norm() - 1.0).abs() < 1e-14);
    assert!((s.e1[(1, 0)].norm() - 1.0).abs() < 1e-14);

    let nil = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    assert!(nagy_foias_split(&nil, 1e-8).unwrap().is_pure());
}

#[test]
fn invariant_restriction_examples() {
    let z1z2 = MultiplierSymbol::scalar(2, &[(mi(&[1, 1]), c(1.0))]).unwrap();
    let phi = scalar_constant(2, c(0.5));
    assert!(matches!(
        invariant_restriction_test(&phi, &z1z2, 6, 4, 1e-8),
        Err(Error::Precondition(_))
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let triple = random_bcl_triple(&mut rng, 3, 1, 0, false).unwrap();
    let (_, theta) = bcl_pair(&triple, 2).unwrap();
    let r = invariant_restriction_test(&scalar_constant(2, C64::new(0.3, -0.4)), &theta, 4, 6, 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
    for (m, s) in r.samples.iter().enumerate() {
        assert!((s - 0.5f64.powi(m as i32) * r.measured_constant).abs() < 1e-12);
    }
    assert!((r.measured_constant - r.predicted_constant).abs() < 1e-12);
    assert!(matches!(
        invariant_restriction_test(&phi, &theta, 1, 3, 1e-8),
        Err(Error::ExactnessBudget { .. })
    ));
}

#[test]
fn invariant_restriction_with_polynomial_phi() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for trial in 0..10 {
        let triple = random_bcl_triple(&mut rng, 2 + trial % 3, 1, trial % 2, false).unwrap();
        let (_, theta) = bcl_pair(&triple, 2).unwrap();
        let phi = random_contractive_symbol(&mut rng, &hardy(2), 1, 2, 6).unwrap();
        let r = invariant_restriction_test(&phi, &theta, 6, 8, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.measured_constant - r.predicted_constant).abs() <= 1e-10);
    }
}

#[test]
fn slice_examples() {
    let z1z2 = MultiplierSymbol::scalar(2, &[(mi(&[1, 1]), c(1.0))]).unwrap();
    let r = slice_purity_consistency(&z1z2, 4, PURITY_TOL).unwrap();
    assert!(r.pass && r.verdict == Verdict::Pure);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = MultiplierSymbol::constant(2, haar_unitary(&mut rng, 2)).unwrap();
    let r = slice_purity_consistency(&u, 4, PURITY_TOL).unwrap();
    assert!(r.pass && r.verdict == Verdict::NotPure);

    let half = MultiplierSymbol::scalar(2, &[(mi(&[0, 0]), c(0.5)), (mi(&[1, 0]), c(0.5))]).unwrap();
    let r = slice_purity_consistency(&half, 4, PURITY_TOL).unwrap();
    assert!(r.pass && r.slice_verdicts == vec![Verdict::Pure, Verdict::Pure]);
}

fn sweep_domain(which: usize) -> Domain {
    match which {
        0 => Domain::polydisc(KernelSpec1D::Hardy, 2),
        1 => Domain::polydisc(KernelSpec1D::Bergman, 2),
        2 => Domain::polydisc(KernelSpec1D::Dirichlet, 2),
        3 => Domain::ball(BallKernelSpec::drury_arveson(2).unwrap()),
        4 => Domain::ball(BallKernelSpec::hm(2, 2).unwrap()),
        _ => Domain::ball(BallKernelSpec::hm(2, 3).unwrap()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdict_is_never_inconsistent(seed in 0u64..10_000, which in 0usize..6, k in 1usize..=2, forced in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = sweep_domain(which);
        let phi = if forced {
            forced_unitary_symbol(&mut rng, &domain, k, 2, 4).unwrap()
        } else {
            random_contractive_symbol(&mut rng, &domain, k, 2, 4).unwrap()
        };
        let r = multiplier_purity_verdict(&phi, &domain, 4, PURITY_TOL).unwrap();
        prop_assert_ne!(r.verdict, Verdict::Inconsistent);
        if forced {
            prop_assert_eq!(r.verdict, Verdict::NotPure);
        }
        let oracle = nagy_foias_split(&phi.phi0(), PURITY_TOL).unwrap();
        prop_assert_eq!(oracle.is_pure(), r.verdict == Verdict::Pure);
    }

    #[test]
    fn decay_curves_are_nonincreasing(seed in 0u64..10_000, which in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = sweep_domain(which);
        let phi = random_contractive_symbol(&mut rng, &domain, 2, 2, 4).unwrap();
        let b = Arc::new(TruncatedBasis::new(domain, 4, 2).unwrap());
        let t = adjoint_compression(&b, &phi).unwrap();
        let h = SpaceVector::new(Arc::clone(&b), gaussian_matrix(&mut rng, b.dim(), 1).column(0).into_owned()).unwrap();
        let curve = decay_curve(&t, &h, 20).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!(a_operator_monotonicity(&t.data, 10).unwrap().monotone);
    }

    #[test]
    fn nagy_foias_certifies_gapped_spectra(seed in 0u64..10_000, r in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(&mut rng, r);
        let rest = gaussian_matrix(&mut rng, 4 - r, 4 - r);
        let rho = linalg::spectral_norm(&rest).max(1e-12);
        let rest = rest * c(0.9 / rho);
        let w = haar_unitary(&mut rng, 4);
        let mut block = DMatrix::zeros(4, 4);
        block.view_mut((0, 0), (r, r)).copy_from(&u);
        block.view_mut((r, r), (4 - r, 4 - r)).copy_from(&rest);
        let t = &w * block * w.adjoint();
        let s = nagy_foias_split(&t, 1e-8).unwrap();
        prop_assert_eq!(s.e0.ncols(), r);
    }

    #[test]
    fn slices_agree(seed in 0u64..10_000, n in 2usize..=3, forced in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = hardy(n);
        let phi = if forced {
            forced_unitary_symbol(&mut rng, &domain, 1, 2, 3).unwrap()
        } else {
            random_contractive_symbol(&mut rng, &domain, 1, 2, 3).unwrap()
        };
        let r = slice_purity_consistency(&phi, 3, PURITY_TOL).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}
