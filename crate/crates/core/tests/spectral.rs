use framelab::gallery;
use framelab::hilbert::{svd, SubspaceSpec};
use framelab::random;
use framelab::{hermitian_eig, inner, project, singular_values, ComplexVector, LinearOperator};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn max_abs(m: &DMatrix<framelab::C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn hermitian_reconstruction_on_random_matrices() {
    let mut rng = random::rng(11);
    for _ in 0..200 {
        let d = rng.random_range(1..=16);
        let m = random::hermitian(&mut rng, d);
        let s = hermitian_eig(&LinearOperator::new(m.clone()).unwrap()).unwrap();
        let scale = 1f64.max(s.max().abs()).max(s.min().abs());
        assert!(max_abs(&(&m - s.reconstruct())) <= 1e-9 * scale);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let v = s.vectors_matrix();
        assert!(max_abs(&(v.adjoint() * &v - DMatrix::identity(d, d))) <= 1e-10);
    }
}

#[test]
fn psd_spectra_are_nonnegative() {
    let mut rng = random::rng(12);
    for _ in 0..100 {
        let d = rng.random_range(1..=12);
        let k = rng.random_range(1..=d);
        let g = random::matrix(&mut rng, d, k);
        let s = hermitian_eig(&LinearOperator::new(&g * g.adjoint()).unwrap()).unwrap();
        assert!(s.min() >= -1e-10);
    }
}

#[test]
fn singular_values_square_to_gram_eigenvalues() {
    let mut rng = random::rng(13);
    for _ in 0..200 {
        let (r, c) = (rng.random_range(1..=10), rng.random_range(1..=10));
        let m = random::matrix(&mut rng, r, c);
        let sv = singular_values(&m).unwrap();
        assert_eq!(sv.len(), r.min(c));
        let gram = hermitian_eig(&LinearOperator::new(m.adjoint() * &m).unwrap()).unwrap();
        let top = gram.max();
        for (k, s) in sv.iter().enumerate() {
            let l = gram.eigenvalues[c - 1 - k];
            assert!((s * s - l).abs() <= 1e-8 * top, "{s}^2 vs {l}");
        }
        let full = svd(&m).unwrap();
        assert_eq!(full.rank(1e-12), r.min(c));
    }
}

#[test]
fn non_hermitian_input_is_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(0.0), re(0.0)]);
    assert!(hermitian_eig(&LinearOperator::new(m).unwrap()).is_err());
}

fn re(v: f64) -> framelab::C64 {
    framelab::C64::new(v, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_idempotent_and_self_adjoint(seed in any::<u64>(), d in 2usize..10, k in 1usize..6) {
        let mut rng = random::rng(seed);
        let k = k.min(d);
        let span: Vec<ComplexVector> = (0..k).map(|_| random::vector(&mut rng, d)).collect();
        let m = SubspaceSpec::spanned_by(d, &span).unwrap();
        let x = random::vector(&mut rng, d);
        let y = random::vector(&mut rng, d);
        let px = project(&m, &x).unwrap();
        let ppx = project(&m, &px).unwrap();
        prop_assert!(ppx.max_abs_diff(&px) <= 1e-12 * (1.0 + x.norm()));
        let lhs = inner(&px, &y).unwrap();
        let rhs = inner(&x, &project(&m, &y).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + x.norm() * y.norm()));
        for v in &span {
            prop_assert!(project(&m, v).unwrap().max_abs_diff(v) <= 1e-10 * (1.0 + v.norm()));
        }
    }

    #[test]
    fn inner_is_conjugate_symmetric(seed in any::<u64>(), d in 1usize..12) {
        let mut rng = random::rng(seed);
        let x = random::vector(&mut rng, d);
        let y = random::vector(&mut rng, d);
        let a = inner(&x, &y).unwrap();
        let b = inner(&y, &x).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-14 * (1.0 + x.norm() * y.norm()));
    }
}

#[test]
fn gallery_generators_keep_the_prefix_property() {
    for (id, g) in gallery::generators() {
        let sched = g.default_schedule();
        let top = g.materialize_level(sched.max()).unwrap();
        for &level in sched.sizes() {
            let small = g.materialize_level(level).unwrap();
            let padded = small.padded(top.ambient_dim());
            for i in 0..small.len() {
                assert_eq!(padded.get(i), top.get(i), "{id} level {level} index {i}");
            }
        }
    }
}
