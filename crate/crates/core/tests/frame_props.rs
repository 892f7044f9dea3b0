use framelab::frame::{frame_spectrum, projected_deltas};
use framelab::hilbert::SubspaceSpec;
use framelab::random;
use framelab::{
    balan_check, canonical_parseval, frame_bounds, gram_matrix, hermitian_eig, inner, normalize, parseval_residual,
    verify_projection_model, ComplexVector, LinearOperator, VectorSequence,
};
use rand::seq::IteratorRandom;
use rand::Rng;

fn random_frame(rng: &mut impl Rng, max_dim: usize, max_len: usize) -> VectorSequence {
    let d = rng.random_range(1..=max_dim);
    let n = rng.random_range(d..=max_len.max(d));
    random::sequence(rng, d, n)
}

fn energy(x: &VectorSequence, v: &ComplexVector) -> f64 {
    x.iter().map(|xn| inner(v, xn).unwrap().norm_sqr()).sum()
}

#[test]
fn bounds_enclose_brute_force_rayleigh_quotients() {
    let mut rng = random::rng(21);
    for _ in 0..100 {
        let d = rng.random_range(1..=6);
        let n = rng.random_range(1..=12);
        let x = random::sequence(&mut rng, d, n);
        let b = frame_bounds(&x).unwrap();
        let span = SubspaceSpec::spanned_by(d, x.vectors()).unwrap();
        let (mut hi, mut lo) = (0f64, f64::INFINITY);
        for _ in 0..10_000 {
            let u = random::unit_vector(&mut rng, d);
            hi = hi.max(energy(&x, &u));
            let p = span.project(&u).unwrap();
            if p.norm() > 1e-6 {
                let p = p.scaled_real(1.0 / p.norm());
                lo = lo.min(energy(&x, &p));
            }
        }
        assert!(hi <= b.upper_opt + 1e-8, "{hi} > {}", b.upper_opt);
        assert!(lo >= b.lower_opt - 1e-8, "{lo} < {}", b.lower_opt);
        assert_eq!(b.rank, n.min(d));
    }
}

#[test]
fn gram_and_frame_operator_share_nonzero_spectrum() {
    let mut rng = random::rng(22);
    for _ in 0..100 {
        let (d, n) = (rng.random_range(1..=8), rng.random_range(1..=12));
        let x = random::sequence(&mut rng, d, n);
        let s = frame_spectrum(&x).unwrap();
        let g = hermitian_eig(&LinearOperator::new(gram_matrix(&x)).unwrap()).unwrap();
        let top = s.max();
        let nonzero = |v: &[f64]| -> Vec<f64> { v.iter().copied().filter(|&l| l > 1e-10 * top).collect() };
        let (a, b) = (nonzero(&s.eigenvalues), nonzero(&g.eigenvalues));
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-8 * top);
        }
    }
}

#[test]
fn canonical_parseval_on_random_frames() {
    let mut rng = random::rng(23);
    for _ in 0..200 {
        let x = random_frame(&mut rng, 8, 20);
        let p = canonical_parseval(&x).unwrap();
        assert!(parseval_residual(&p).unwrap() <= 1e-9);
        assert!(p.norms().iter().all(|&n| n <= 1.0 + 1e-10));
    }
}

#[test]
fn balan_inequality_on_random_triples() {
    let mut rng = random::rng(24);
    for _ in 0..1000 {
        let p = canonical_parseval(&random_frame(&mut rng, 8, 24)).unwrap();
        let k = rng.random_range(0..=p.len());
        let subset: Vec<usize> = (0..p.len()).choose_multiple(&mut rng, k);
        let x = random::vector(&mut rng, p.ambient_dim());
        let r = balan_check(&p, &subset, &x).unwrap();
        assert!(r.slack >= -1e-9 * x.norm_sq(), "slack {}", r.slack);
    }
}

#[test]
fn balan_equality_case() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let p = VectorSequence::from_real_rows(1, &[&[h], &[h]], "halves").unwrap();
    let x = ComplexVector::from_real(&[1.7]);
    let r = balan_check(&p, &[0], &x).unwrap();
    assert!((r.total - 0.75 * x.norm_sq()).abs() <= 1e-12);
    assert!(r.equality_residual <= 1e-12);
}

#[test]
fn projection_model_on_random_frames() {
    let mut rng = random::rng(25);
    for _ in 0..200 {
        let x = random_frame(&mut rng, 8, 20);
        let r = verify_projection_model(&x).unwrap();
        assert!(r.residual <= 1e-9, "residual {}", r.residual);
        // P_S δ_n is Parseval for S, so its frame operator is the projection P_S
        let s = framelab::frame_operator(&projected_deltas(&x).unwrap()).unwrap().into_matrix();
        let defect = (&s * &s - &s).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(defect <= 1e-9);
    }
}

#[test]
fn normalized_frames_keep_the_explicit_lower_bound() {
    let mut rng = random::rng(26);
    for _ in 0..200 {
        let x = random_frame(&mut rng, 6, 16);
        let b = frame_bounds(&x).unwrap();
        let nb = frame_bounds(&normalize(&x)).unwrap();
        assert!(nb.lower_opt >= b.lower_opt / b.upper_opt - 1e-8);
    }
}

#[test]
fn normalized_upper_bound_grows_with_length_in_fixed_dimension() {
    let mut rng = random::rng(27);
    for _ in 0..100 {
        let d = rng.random_range(1..=5);
        let n = rng.random_range(1..=40);
        let x = random::sequence(&mut rng, d, n);
        let b = frame_bounds(&normalize(&x)).unwrap();
        assert!(b.upper_opt >= n as f64 / d as f64 - 1e-10);
    }
}

#[test]
fn normalize_is_idempotent() {
    let mut rng = random::rng(28);
    for _ in 0..200 {
        let (d, n) = (rng.random_range(1..=8), rng.random_range(1..=16));
        let x = random::sequence(&mut rng, d, n);
        let once = normalize(&x);
        assert_eq!(normalize(&once), once);
    }
}
