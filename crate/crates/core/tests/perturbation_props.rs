use framelab::gallery;
use framelab::hilbert::svd;
use framelab::perturbation::{
    check_inequality_41, guaranteed_bounds, rescale_verdict_agreement, verify_perturbation, CertificateStatus,
    InequalityMode,
};
use framelab::random;
use framelab::{frame_bounds, normalize, ComplexVector, PerturbationParams, VectorSequence, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

#[test]
fn guaranteed_interval_widens_with_every_parameter() {
    let grid = [0.0, 0.05, 0.1, 0.2, 0.3];
    for (a, b) in [(1.0, 1.0), (1.0, 4.0), (0.5, 2.0)] {
        for &l in &grid {
            for &m in &grid {
                for &n in &grid {
                    let Ok(base) = guaranteed_bounds(a, b, &PerturbationParams::new(l, m, n).unwrap()) else {
                        continue;
                    };
                    for step in [(0.01, 0.0, 0.0), (0.0, 0.01, 0.0), (0.0, 0.0, 0.01)] {
                        let p = PerturbationParams::new(l + step.0, m + step.1, n + step.2).unwrap();
                        if let Ok(wider) = guaranteed_bounds(a, b, &p) {
                            assert!(wider.0 <= base.0 && wider.1 >= base.1, "{p:?}");
                        }
                    }
                }
            }
        }
    }
}

fn synthesis(x: &VectorSequence) -> DMatrix<C64> {
    x.synthesis_matrix()
}

/// Random sampling of `‖D c‖ / ‖X c‖` followed by ascent on the best sample.
fn brute_ratio(d: &DMatrix<C64>, x: Option<&DMatrix<C64>>, rng: &mut impl Rng) -> f64 {
    let n = d.ncols();
    let ratio = |c: &DVector<C64>| {
        let den = x.map_or(c.norm(), |x| (x * c).norm());
        (d * c).norm() / den
    };
    let mut best = DVector::<C64>::zeros(n);
    let mut best_r = 0.0;
    for _ in 0..100_000 {
        let c = random::vector(rng, n).into_dvector();
        let r = ratio(&c);
        if r > best_r {
            best_r = r;
            best = c;
        }
    }
    let dd = d.adjoint() * d;
    let step = match x {
        None => dd,
        Some(x) => (x.adjoint() * x).try_inverse().expect("injective synthesis") * dd,
    };
    for _ in 0..5000 {
        best = &step * &best;
        best /= C64::new(best.norm(), 0.0);
    }
    best_r.max(ratio(&best))
}

#[test]
fn exact_modes_match_brute_force() {
    let mut rng = random::rng(31);
    for trial in 0..12 {
        let d = rng.random_range(2..=6);
        let n = rng.random_range(1..=d.min(10));
        let x = random::sequence(&mut rng, d, n);
        let y = random::sequence(&mut rng, d, n);
        let dm = synthesis(&x) - synthesis(&y);
        let mu = check_inequality_41(&x, &y, &PerturbationParams::new(0.0, 1.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(mu.mode, InequalityMode::MuOnly);
        let brute = brute_ratio(&dm, None, &mut rng);
        assert!((mu.achieved_ratio - brute).abs() <= 1e-6 * mu.achieved_ratio.max(1.0), "trial {trial}");
        let lam = check_inequality_41(&x, &y, &PerturbationParams::new(1.0, 0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(lam.mode, InequalityMode::LambdaOnly);
        let sx = synthesis(&x);
        let brute = brute_ratio(&dm, Some(&sx), &mut rng);
        assert!((lam.achieved_ratio - brute).abs() <= 1e-6 * lam.achieved_ratio.max(1.0), "trial {trial}");
    }
}

#[test]
fn mu_perturbations_stay_inside_the_guaranteed_interval() {
    let mut rng = random::rng(32);
    for _ in 0..500 {
        let d = rng.random_range(1..=6);
        let n = rng.random_range(d..=2 * d + 2);
        let x = random::sequence(&mut rng, d, n);
        let a = frame_bounds(&x).unwrap().ambient_lower;
        let mu = rng.random_range(0.05..0.95) * a.sqrt();
        let e = random::matrix(&mut rng, d, n);
        let top = svd(&e).unwrap().singular_values[0];
        let e = e * C64::new(rng.random_range(0.1..1.0) * mu / top, 0.0);
        let y = VectorSequence::new(
            d,
            (0..n).map(|k| ComplexVector::from_dvector(x.get(k).as_dvector() + e.column(k))).collect(),
            "perturbed",
        )
        .unwrap();
        let r = verify_perturbation(&x, &y, &PerturbationParams::new(0.0, mu, 0.0).unwrap(), 5).unwrap();
        assert_eq!(r.certificate.status, CertificateStatus::HoldsExact);
        assert!(r.lower_slack >= -1e-8 && r.upper_slack >= -1e-8, "{r:?}");
    }
}

/// Block-diagonal `T` with seeded 2×2 blocks whose singular values lie in
/// `[1, 10]`, so every truncation sees the same operator.
fn block_operator(d: usize, seed: u64) -> DMatrix<C64> {
    let mut t = DMatrix::<C64>::identity(d, d);
    for b in 0..d / 2 {
        let mut rng = random::rng(random::derive_seed(seed, b as u64));
        let u = random::unitary(&mut rng, 2);
        let v = random::unitary(&mut rng, 2);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(rng.random_range(1.0..10.0), 0.0),
            C64::new(rng.random_range(1.0..10.0), 0.0),
        ]));
        t.view_mut((2 * b, 2 * b), (2, 2)).copy_from(&(u * s * v.adjoint()));
    }
    t
}

#[test]
fn isomorphisms_preserve_normalized_bessel_verdicts() {
    for (id, g) in gallery::generators() {
        let sched = g.default_schedule();
        let mut plain = Vec::new();
        let mut mapped = Vec::new();
        for &level in sched.sizes() {
            let x = g.materialize_level(level).unwrap();
            let t = block_operator(x.ambient_dim(), 77);
            let s = svd(&t).unwrap().singular_values;
            let kappa_sq = (s[0] / s[s.len() - 1]).powi(2);
            assert!(kappa_sq <= 100.0 + 1e-9);
            let tx = x.try_map(|_, v| ComplexVector::from_dvector(&t * v.as_dvector())).unwrap();
            let b = frame_bounds(&normalize(&x)).unwrap().upper_opt;
            let bt = frame_bounds(&normalize(&tx)).unwrap().upper_opt;
            assert!(bt / b <= kappa_sq * (1.0 + 1e-10) && b / bt <= kappa_sq * (1.0 + 1e-10), "{id}");
            plain.push((level, b));
            mapped.push((level, bt));
        }
        let v = framelab::DivergenceVerdict::classify(plain, false);
        let vt = framelab::DivergenceVerdict::classify(mapped, false);
        assert_eq!(v.classification, vt.classification, "{id}: {:?} vs {:?}", v.values(), vt.values());
    }
}

#[test]
fn rescaling_by_norm_multiples_agrees_with_normalizing() {
    for (id, g) in gallery::generators() {
        for factor in [1.0, 2.0] {
            let r = rescale_verdict_agreement(&g, &g.default_schedule(), factor).unwrap();
            assert!(r.agree, "{id} factor {factor}: {r:?}");
        }
    }
}

#[test]
fn compact_difference_does_not_rescue_normalizability() {
    let (gx, gy) = gallery::remark_4_4_c(0.1).unwrap();
    let (x, y) = (gx.materialize(64).unwrap(), gy.materialize(64).unwrap());
    let d = synthesis(&x) - synthesis(&y);
    let hs = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(hs < 0.1);
    let v = framelab::normalization::bessel_normalizable_probe(&gy, &gy.default_schedule()).unwrap();
    assert!(v.is_divergent());
}
