use framelab::iterative::{
    build_thm313_system, compact_fixed_point, compact_iteration_probe, fixed_point_probe, iterate, lemma57_check,
    norm_trajectory, thm313_report, DenseMatrix, Regime, THM313_NORMALIZED_SCHEDULE, THM313_PROXY_SCHEDULE,
};
use framelab::random;
use framelab::{
    frame_bounds, hermitian_eig, normalize, Classification, ComplexVector, DivergenceVerdict, IterativeSystemSpec,
    LinearOperator, OperatorSpec, TruncationSchedule, VectorSequence, C64,
};
use nalgebra::DMatrix;
use rand::Rng;

fn polar(r: f64, theta: f64) -> C64 {
    C64::from_polar(r, theta)
}

#[test]
fn growth_envelope_on_random_normal_matrices() {
    let mut rng = random::rng(41);
    for _ in 0..1000 {
        let d = rng.random_range(1..=6);
        let eig: Vec<C64> =
            (0..d).map(|_| polar(rng.random_range(0.2..1.8), rng.random_range(0.0..std::f64::consts::TAU))).collect();
        let m = random::normal_with_spectrum(&mut rng, &eig);
        let op = OperatorSpec::dense(m).unwrap();
        let x = random::vector(&mut rng, d);
        let k0 = rng.random_range(0..=3);
        let n = rng.random_range(2..=8);
        let v = lemma57_check(&op, &x, k0, n).unwrap();
        assert!(v <= 1e-9, "violation {v}");
    }
}

#[test]
fn scalar_doubling_meets_the_envelope_exactly() {
    let op = OperatorSpec::DiagonalNormal { eigenvalues: vec![C64::new(2.0, 0.0)] };
    let x = ComplexVector::from_real(&[1.0]);
    assert_eq!(lemma57_check(&op, &x, 0, 8).unwrap(), 0.0);
    let t = norm_trajectory(&op, &x, 10).unwrap();
    assert_eq!(t.regime, Regime::IncreasingUnbounded);
    assert_eq!(t.envelope_violation, Some(0.0));
}

#[test]
fn fixed_vectors_of_norm_one_operators_are_adjoint_fixed() {
    let mut rng = random::rng(42);
    for _ in 0..200 {
        let d = rng.random_range(1..=8);
        let ones = rng.random_range(1..=d);
        let eig: Vec<C64> = (0..d)
            .map(|k| {
                if k < ones {
                    C64::new(1.0, 0.0)
                } else if rng.random_bool(0.3) {
                    polar(1.0, rng.random_range(0.5..5.5))
                } else {
                    polar(rng.random_range(0.0..0.95), rng.random_range(0.0..std::f64::consts::TAU))
                }
            })
            .collect();
        let op = LinearOperator::new(random::normal_with_spectrum(&mut rng, &eig)).unwrap();
        let seeds = vec![random::vector(&mut rng, d)];
        let r = fixed_point_probe(&op, &seeds).unwrap();
        assert_eq!(r.w0.len(), ones);
        assert!(r.adjoint_residual <= 1e-9, "residual {}", r.adjoint_residual);
    }
}

#[test]
fn compact_fixed_point_orbit_is_not_normalizable() {
    let (op, seed) = compact_fixed_point(32);
    let r = compact_iteration_probe(&op, &[seed], &TruncationSchedule::default()).unwrap();
    assert!(r.fixed_point_pairs && r.conclusion_holds);
    let v = r.normalized.unwrap();
    assert_eq!(v.classification, Classification::Divergent);
    let g = v.growth_exponent.unwrap();
    assert!((0.9..=1.1).contains(&g), "exponent {g}");
}

/// Orbit frame operator of `diag(1 − a_k)` with seed `√(a_k(2 − a_k))`,
/// each entry summed as a geometric series and written in the defects.
fn orbit_frame_operator(defects: &[f64]) -> DMatrix<C64> {
    let k = defects.len();
    let x: Vec<f64> = defects.iter().map(|a| (a * (2.0 - a)).sqrt()).collect();
    DMatrix::from_fn(k, k, |i, j| {
        let (a, b) = (defects[i], defects[j]);
        C64::new(x[i] * x[j] / (a + b - a * b), 0.0)
    })
}

/// Defects `c_k 2^{-k}` with `c_k` drawn from `[0.6, 1)`.
fn jittered_defects(stream: u64, k: usize) -> Vec<f64> {
    let mut rng = random::rng(stream);
    (1..=k).map(|j| rng.random_range(0.6..1.0) * 0.5f64.powi(j as i32)).collect()
}

#[test]
fn stable_frame_proxies_come_with_divergent_normalized_probes() {
    let r = thm313_report(12, &THM313_PROXY_SCHEDULE, &THM313_NORMALIZED_SCHEDULE).unwrap();
    assert!(r.frame_proxy_stable);
    assert!(r.normalized.is_divergent());

    let mut rng = random::rng(43);
    let mut tested = 0;
    for trial in 0..6 {
        let stream = rng.random::<u64>();
        let proxy: Vec<(usize, f64)> = THM313_PROXY_SCHEDULE
            .iter()
            .map(|&k| {
                let s =
                    hermitian_eig(&LinearOperator::new(orbit_frame_operator(&jittered_defects(stream, k))).unwrap());
                (k, s.unwrap().min())
            })
            .collect();
        let lower = DivergenceVerdict::classify(proxy, true);
        if !lower.is_bounded() {
            continue;
        }
        let normalized: Vec<(usize, f64)> = THM313_NORMALIZED_SCHEDULE
            .iter()
            .map(|&k| {
                let a = jittered_defects(stream, k);
                let depth = (1e8f64.ln() / -(-a[k - 1]).ln_1p()).ceil() as usize;
                let seed: Vec<f64> = a.iter().map(|a| (a * (2.0 - a)).sqrt()).collect();
                let spec = IterativeSystemSpec::new(
                    OperatorSpec::SelfAdjointSpectral { eigenvalues: a.iter().map(|a| 1.0 - a).collect() },
                    vec![ComplexVector::from_real(&seed)],
                    depth,
                )
                .unwrap();
                (k, frame_bounds(&normalize(&iterate(&spec).unwrap().sequence)).unwrap().upper_opt)
            })
            .collect();
        let v = DivergenceVerdict::classify(normalized, false);
        assert!(v.is_divergent(), "trial {trial}: {:?}", v.values());
        tested += 1;
    }
    assert!(tested >= 3, "only {tested} random systems passed the frame proxy");
}

#[test]
fn norm_ranges_transfer_bounds_between_normalized_and_raw_orbits() {
    let mut rng = random::rng(44);
    for _ in 0..100 {
        let d = rng.random_range(1..=6);
        let eig: Vec<C64> =
            (0..d).map(|_| polar(rng.random_range(0.5..1.2), rng.random_range(0.0..std::f64::consts::TAU))).collect();
        let m = random::normal_with_spectrum(&mut rng, &eig);
        let seeds: Vec<ComplexVector> = (0..2).map(|_| random::vector(&mut rng, d)).collect();
        let spec = IterativeSystemSpec::new(OperatorSpec::DenseNormal { matrix: DenseMatrix(m) }, seeds, 12).unwrap();
        let x: VectorSequence = iterate(&spec).unwrap().sequence;
        let norms = x.norms();
        let b = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let c = norms.iter().copied().fold(0.0, f64::max);
        let raw = frame_bounds(&x).unwrap();
        let nrm = frame_bounds(&normalize(&x)).unwrap();
        assert!(raw.lower_opt >= nrm.lower_opt * b * b * (1.0 - 1e-9));
        assert!(raw.upper_opt <= nrm.upper_opt * c * c * (1.0 + 1e-9));
    }
}

#[test]
fn dropping_finitely_many_iterates_keeps_the_divergence() {
    let trace: Vec<(usize, f64)> = THM313_NORMALIZED_SCHEDULE
        .iter()
        .map(|&k| {
            let it = iterate(&build_thm313_system(k).unwrap()).unwrap().sequence;
            let tail = VectorSequence::new(it.ambient_dim(), it.vectors()[3..].to_vec(), "tail").unwrap();
            (k, frame_bounds(&normalize(&tail)).unwrap().upper_opt)
        })
        .collect();
    assert!(DivergenceVerdict::classify(trace, false).is_divergent());
}
