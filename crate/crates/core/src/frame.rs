//! Analysis, synthesis and frame operators; optimal bounds and the
//! constructions built on them.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::hilbert::{
    eig_hermitian_matrix, inner, max_abs, re, svd, ComplexVector, LinearOperator, SpectralData, VectorSequence, C64,
};
use crate::tol;

/// `N × d` matrix whose row `n` is `x_n^H`, so `(Cx)_n = ⟨x, x_n⟩`.
#[derive(Clone, Debug)]
pub struct AnalysisMatrix(DMatrix<C64>);

impl AnalysisMatrix {
    pub fn of(x: &VectorSequence) -> Self {
        Self(x.synthesis_matrix().adjoint())
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<DVector<C64>> {
        if v.dim() != self.0.ncols() {
            return Err(FrameError::DimensionMismatch { expected: self.0.ncols(), found: v.dim() });
        }
        Ok(&self.0 * v.as_dvector())
    }

    /// `C^H C`.
    pub fn frame_operator(&self) -> DMatrix<C64> {
        self.0.adjoint() * &self.0
    }
}

/// `S = Σ x_n x_n^H`, accumulated over each vector's support.
pub fn frame_operator(x: &VectorSequence) -> Result<LinearOperator> {
    if x.is_empty() {
        return Err(FrameError::EmptySequence);
    }
    LinearOperator::new(frame_operator_matrix(x.vectors(), x.ambient_dim()))
}

pub(crate) fn frame_operator_matrix(vectors: &[ComplexVector], dim: usize) -> DMatrix<C64> {
    let mut s = DMatrix::zeros(dim, dim);
    let mut support: Vec<(usize, C64)> = Vec::with_capacity(dim);
    for v in vectors {
        support.clear();
        support.extend(
            v.components().iter().enumerate().filter(|(_, z)| z.re != 0.0 || z.im != 0.0).map(|(i, z)| (i, *z)),
        );
        for &(j, b) in &support {
            let bc = b.conj();
            for &(i, a) in &support {
                s[(i, j)] += a * bc;
            }
        }
    }
    s
}

/// Gram matrix `G_{mn} = ⟨x_n, x_m⟩`.
pub fn gram_matrix(x: &VectorSequence) -> DMatrix<C64> {
    let syn = x.synthesis_matrix();
    syn.adjoint() * syn
}

/// Optimal frame bounds of a finite sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameBounds {
    /// Smallest nonzero eigenvalue of `S`: the lower bound on the span.
    pub lower_opt: f64,
    /// Largest eigenvalue of `S`.
    pub upper_opt: f64,
    /// Smallest eigenvalue of `S` on the whole ambient space (clamped at 0).
    pub ambient_lower: f64,
    pub rank: usize,
    pub ambient_dim: usize,
    pub is_complete: bool,
    pub is_frame_for_ambient: bool,
}

pub fn frame_spectrum(x: &VectorSequence) -> Result<SpectralData> {
    let s = frame_operator(x)?;
    eig_hermitian_matrix(s.matrix())
}

pub fn bounds_from_spectrum(spec: &SpectralData) -> FrameBounds {
    let top = spec.max().max(0.0);
    let cutoff = tol::RANK_REL * top;
    let nonzero: Vec<f64> = spec.eigenvalues.iter().copied().filter(|&l| l > cutoff && l > 0.0).collect();
    let rank = nonzero.len();
    let lower_opt = nonzero.first().copied().unwrap_or(0.0);
    let is_complete = rank == spec.dim();
    FrameBounds {
        lower_opt,
        upper_opt: top,
        ambient_lower: if is_complete { spec.min().max(0.0) } else { 0.0 },
        rank,
        ambient_dim: spec.dim(),
        is_complete,
        is_frame_for_ambient: is_complete && lower_opt > cutoff,
    }
}

pub fn frame_bounds(x: &VectorSequence) -> Result<FrameBounds> {
    Ok(bounds_from_spectrum(&frame_spectrum(x)?))
}

/// `max|S − I|`.
pub fn parseval_residual(x: &VectorSequence) -> Result<f64> {
    let s = frame_operator(x)?;
    let d = x.ambient_dim();
    Ok(max_abs(&(s.matrix() - DMatrix::<C64>::identity(d, d))))
}

/// `{S^{-1/2} x_n}` with the inverse square root taken on the span.
pub fn canonical_parseval(x: &VectorSequence) -> Result<VectorSequence> {
    let spec = frame_spectrum(x)?;
    let bounds = bounds_from_spectrum(&spec);
    if bounds.rank == 0 || bounds.lower_opt <= tol::RANK_REL * bounds.upper_opt {
        return Err(FrameError::NotFrameSequence { lower: bounds.lower_opt });
    }
    let cutoff = tol::RANK_REL * bounds.upper_opt;
    let inv_sqrt = spec.functional_calculus(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 });
    let vectors = x.iter().map(|v| ComplexVector::from_dvector(&inv_sqrt * v.as_dvector())).collect();
    VectorSequence::new(x.ambient_dim(), vectors, format!("parseval({})", x.label()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanReport {
    pub subset: Vec<usize>,
    /// `Σ_{n∈J} |⟨x, x_n⟩|²`
    pub lhs_sum: f64,
    /// `‖Σ_{n∉J} ⟨x, x_n⟩ x_n‖²`
    pub lhs_norm_sq: f64,
    pub total: f64,
    /// `total − ¾‖x‖²`
    pub slack: f64,
    /// `‖Σ_{n∈J} ⟨x, x_n⟩ x_n − x/2‖`; zero exactly in the equality case.
    pub equality_residual: f64,
}

pub fn balan_check(p: &VectorSequence, subset: &[usize], x: &ComplexVector) -> Result<BalanReport> {
    if x.dim() != p.ambient_dim() {
        return Err(FrameError::DimensionMismatch { expected: p.ambient_dim(), found: x.dim() });
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= p.len()) {
        return Err(FrameError::ParamValidation(format!("index {bad} outside 0..{}", p.len())));
    }
    let residual = parseval_residual(p)?;
    if residual > tol::PARSEVAL {
        return Err(FrameError::NotParseval { residual });
    }
    let members: BTreeSet<usize> = subset.iter().copied().collect();
    let mut lhs_sum = 0.0;
    let mut inside = DVector::<C64>::zeros(x.dim());
    let mut outside = DVector::<C64>::zeros(x.dim());
    for (n, v) in p.iter().enumerate() {
        let coeff = inner(x, v)?;
        if members.contains(&n) {
            lhs_sum += coeff.norm_sqr();
            inside += v.as_dvector() * coeff;
        } else {
            outside += v.as_dvector() * coeff;
        }
    }
    let lhs_norm_sq = outside.norm_squared();
    let total = lhs_sum + lhs_norm_sq;
    let half = x.as_dvector() * re(0.5);
    Ok(BalanReport {
        subset: members.into_iter().collect(),
        lhs_sum,
        lhs_norm_sq,
        total,
        slack: total - 0.75 * x.norm_sq(),
        equality_residual: (inside - half).norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionModelReport {
    /// `max_n ‖x_n − T P_S δ_n‖`
    pub residual: f64,
    pub relative_residual: f64,
    /// Dimension of `S = range(C)`.
    pub range_dim: usize,
    /// Extreme singular values of `T : S → span{x_n}`.
    pub t_min_singular: f64,
    pub t_max_singular: f64,
    /// `max|U^H U − I|` for the computed orthonormal basis of `S`.
    pub basis_error: f64,
}

/// Orthonormal basis `U` (as `N × r` columns) of the range of the analysis
/// matrix, built as `C V_r Λ_r^{-1/2}`, together with the span spectrum.
fn analysis_range_basis(x: &VectorSequence) -> Result<(DMatrix<C64>, DMatrix<C64>, Vec<f64>)> {
    let spec = frame_spectrum(x)?;
    let bounds = bounds_from_spectrum(&spec);
    if bounds.rank == 0 {
        return Err(FrameError::NotFrameSequence { lower: 0.0 });
    }
    let cutoff = tol::RANK_REL * bounds.upper_opt;
    let keep: Vec<usize> =
        (0..spec.dim()).filter(|&k| spec.eigenvalues[k] > cutoff && spec.eigenvalues[k] > 0.0).collect();
    let d = x.ambient_dim();
    let mut v_r = DMatrix::<C64>::zeros(d, keep.len());
    let mut lambdas = Vec::with_capacity(keep.len());
    for (j, &k) in keep.iter().enumerate() {
        v_r.column_mut(j).copy_from(spec.eigenvectors[k].as_dvector());
        lambdas.push(spec.eigenvalues[k]);
    }
    let c = AnalysisMatrix::of(x);
    let mut u = c.matrix() * &v_r;
    for (j, l) in lambdas.iter().enumerate() {
        let s = re(1.0 / l.sqrt());
        for z in u.column_mut(j).iter_mut() {
            *z *= s;
        }
    }
    Ok((u, v_r, lambdas))
}

/// Coordinates of `P_S δ_n` in the orthonormal basis of `S = range(C)`
/// returned alongside it. These vectors live in `C^r`, `r = rank`.
pub fn projected_delta_coordinates(x: &VectorSequence) -> Result<VectorSequence> {
    let (u, _, _) = analysis_range_basis(x)?;
    let r = u.ncols();
    let vectors = (0..u.nrows()).map(|n| ComplexVector::from_dvector(u.row(n).adjoint())).collect();
    VectorSequence::new(r, vectors, format!("psdelta({})", x.label()))
}

/// `P_S δ_n` as vectors of `C^N`.
pub fn projected_deltas(x: &VectorSequence) -> Result<VectorSequence> {
    let (u, _, _) = analysis_range_basis(x)?;
    let vectors = (0..u.nrows()).map(|n| ComplexVector::from_dvector(&u * u.row(n).adjoint())).collect();
    VectorSequence::new(x.len(), vectors, format!("psdelta({})", x.label()))
}

/// Rebuild every `x_n` as `T P_S δ_n` with `S = range(C)` and `T` the
/// synthesis map restricted to `S`.
pub fn verify_projection_model(x: &VectorSequence) -> Result<ProjectionModelReport> {
    let (u, _, lambdas) = analysis_range_basis(x)?;
    let syn = x.synthesis_matrix();
    // T in the basis U: d × r
    let t = &syn * &u;
    let mut residual: f64 = 0.0;
    for (n, v) in x.iter().enumerate() {
        let coords = u.row(n).adjoint();
        let rebuilt = &t * coords;
        residual = residual.max((v.as_dvector() - rebuilt).norm());
    }
    let r = u.ncols();
    let basis_error = max_abs(&(u.adjoint() * &u - DMatrix::<C64>::identity(r, r)));
    let max_norm = x.norms().into_iter().fold(0.0, f64::max);
    Ok(ProjectionModelReport {
        residual,
        relative_residual: residual / max_norm,
        range_dim: r,
        t_min_singular: lambdas.first().map_or(0.0, |l| l.sqrt()),
        t_max_singular: lambdas.last().map_or(0.0, |l| l.sqrt()),
        basis_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Minimality {
    Minimal { dual: VectorSequence, max_error: f64 },
    NotMinimal { rank: usize },
}

/// Biorthogonal sequence `⟨x_n, a_k⟩ = δ_{nk}` from the pseudo-inverse of the
/// synthesis matrix; the minimum-norm choice, lying in the span.
pub fn biorthogonal_dual(x: &VectorSequence) -> Result<Minimality> {
    if x.is_empty() {
        return Err(FrameError::EmptySequence);
    }
    let syn = x.synthesis_matrix();
    let s = svd(&syn)?;
    let n = x.len();
    let top = s.singular_values.first().copied().unwrap_or(0.0);
    let rank = s.singular_values.iter().filter(|&&sv| sv > 0.0 && sv * sv > tol::RANK_REL * top * top).count();
    if rank < n {
        return Ok(Minimality::NotMinimal { rank });
    }
    // (X^+)^H = U Σ^{-1} V^H
    let mut u = s.u.clone();
    for (j, sv) in s.singular_values.iter().enumerate() {
        let f = re(1.0 / sv);
        for z in u.column_mut(j).iter_mut() {
            *z *= f;
        }
    }
    let a = u * &s.v_t;
    let dual: Vec<ComplexVector> = (0..n).map(|k| ComplexVector::from_dvector(a.column(k).into_owned())).collect();
    let dual = VectorSequence::new(x.ambient_dim(), dual, format!("dual({})", x.label()))?;
    let max_error = biorthogonality_error(x, &dual)?;
    Ok(Minimality::Minimal { dual, max_error })
}

/// `max_{n,k} |⟨x_n, a_k⟩ − δ_{nk}|`.
pub fn biorthogonality_error(x: &VectorSequence, a: &VectorSequence) -> Result<f64> {
    if x.len() != a.len() {
        return Err(FrameError::LengthMismatch { expected: x.len(), found: a.len() });
    }
    let mut worst: f64 = 0.0;
    for (n, xn) in x.iter().enumerate() {
        for (k, ak) in a.iter().enumerate() {
            let target = if n == k { 1.0 } else { 0.0 };
            worst = worst.max((inner(xn, ak)? - re(target)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::GeneratorSequence;

    #[test]
    fn orthonormal_basis_is_tight() {
        let x = VectorSequence::orthonormal_basis(4);
        let s = frame_operator(&x).unwrap();
        assert_eq!(s.matrix(), &DMatrix::<C64>::identity(4, 4));
        let b = frame_bounds(&x).unwrap();
        assert!((b.lower_opt - 1.0).abs() < 1e-14 && (b.upper_opt - 1.0).abs() < 1e-14);
        assert!(b.is_frame_for_ambient);
    }

    #[test]
    fn repeated_vector_bounds_on_span() {
        let x = VectorSequence::from_real_rows(2, &[&[1.0, 0.0], &[1.0, 0.0]], "e1e1").unwrap();
        let b = frame_bounds(&x).unwrap();
        assert!((b.lower_opt - 2.0).abs() < 1e-14);
        assert_eq!(b.rank, 1);
        assert!(!b.is_frame_for_ambient);
        assert_eq!(b.ambient_lower, 0.0);
    }

    #[test]
    fn union_with_scaled_copies_diagonal() {
        let d = 6;
        let x = GeneratorSequence::BasisWithScaledCopies.materialize(2 * d).unwrap();
        let s = frame_operator(&x).unwrap();
        for i in 0..d {
            for j in 0..d {
                let expected = if i == j { 1.0 + 1.0 / ((i + 1) * (i + 1)) as f64 } else { 0.0 };
                assert!((s.matrix()[(i, j)] - re(expected)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn analysis_matrix_reproduces_frame_operator() {
        let mut rng = crate::random::rng(3);
        let x = crate::random::sequence(&mut rng, 3, 5);
        let c = AnalysisMatrix::of(&x);
        let diff = max_abs(&(c.frame_operator() - frame_operator(&x).unwrap().matrix()));
        assert!(diff < 1e-10);
        let v = crate::random::vector(&mut rng, 3);
        let cv = c.apply(&v).unwrap();
        for (n, xn) in x.iter().enumerate() {
            assert!((cv[n] - inner(&v, xn).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn canonical_parseval_examples() {
        let onb = VectorSequence::orthonormal_basis(3);
        let p = canonical_parseval(&onb).unwrap();
        for (a, b) in p.iter().zip(onb.iter()) {
            assert!(a.max_abs_diff(b) < 1e-14);
        }
        let two = VectorSequence::from_real_rows(2, &[&[2.0, 0.0], &[0.0, 2.0]], "2e").unwrap();
        let p = canonical_parseval(&two).unwrap();
        assert!(p.get(0).max_abs_diff(&ComplexVector::basis(2, 0)) < 1e-14);
        assert!(p.get(1).max_abs_diff(&ComplexVector::basis(2, 1)) < 1e-14);
        let doubled = GeneratorSequence::RepeatedBasis { copies: 2 }.materialize(8).unwrap();
        let p = canonical_parseval(&doubled).unwrap();
        for v in p.iter() {
            assert!((v.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        }
        assert!(parseval_residual(&p).unwrap() < 1e-14);
    }

    #[test]
    fn canonical_parseval_on_span_only() {
        let x = VectorSequence::from_real_rows(3, &[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0]], "line").unwrap();
        let p = canonical_parseval(&x).unwrap();
        let s = frame_operator(&p).unwrap();
        // identity on span{(1,1,0)/√2}: the projector onto it
        let h = 0.5;
        let expected =
            DMatrix::from_row_slice(3, 3, &[re(h), re(h), re(0.0), re(h), re(h), re(0.0), re(0.0), re(0.0), re(0.0)]);
        assert!(max_abs(&(s.matrix() - expected)) < 1e-12);
    }

    #[test]
    fn balan_examples() {
        let onb = VectorSequence::orthonormal_basis(3);
        let x = ComplexVector::from_real(&[1.0, -2.0, 0.5]);
        let r = balan_check(&onb, &[0, 1, 2], &x).unwrap();
        assert!((r.total - x.norm_sq()).abs() < 1e-14);
        assert!((r.slack - x.norm_sq() / 4.0).abs() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = VectorSequence::from_real_rows(1, &[&[h], &[h]], "halves").unwrap();
        let one = ComplexVector::from_real(&[1.0]);
        let r = balan_check(&p, &[0], &one).unwrap();
        assert!((r.total - 0.75).abs() < 1e-15);
        assert!(r.slack.abs() < 1e-15);
        assert!(r.equality_residual < 1e-15);

        let r = balan_check(&onb, &[], &x).unwrap();
        assert!((r.total - x.norm_sq()).abs() < 1e-13);
    }

    #[test]
    fn balan_rejects_non_parseval() {
        let x = VectorSequence::from_real_rows(1, &[&[1.0], &[1.0]], "two").unwrap();
        let err = balan_check(&x, &[0], &ComplexVector::from_real(&[1.0])).unwrap_err();
        assert!(matches!(err, FrameError::NotParseval { .. }));
    }

    #[test]
    fn projection_model_examples() {
        let onb = VectorSequence::orthonormal_basis(3);
        let r = verify_projection_model(&onb).unwrap();
        assert!(r.residual < 1e-14);
        assert_eq!(r.range_dim, 3);

        let x = VectorSequence::from_real_rows(2, &[&[1.0, 0.0], &[1.0, 0.0]], "e1e1").unwrap();
        let r = verify_projection_model(&x).unwrap();
        assert!(r.residual < 1e-12);
        let p = projected_deltas(&x).unwrap();
        let half = ComplexVector::from_real(&[0.5, 0.5]);
        assert!(p.get(0).max_abs_diff(&half) < 1e-12);
        assert!(p.get(1).max_abs_diff(&half) < 1e-12);
    }

    #[test]
    fn dual_examples() {
        let onb = VectorSequence::orthonormal_basis(3);
        match biorthogonal_dual(&onb).unwrap() {
            Minimality::Minimal { dual, max_error } => {
                assert!(max_error < 1e-14);
                for (a, b) in dual.iter().zip(onb.iter()) {
                    assert!(a.max_abs_diff(b) < 1e-14);
                }
            }
            other => panic!("{other:?}"),
        }
        let x = VectorSequence::from_real_rows(2, &[&[1.0, 0.0], &[1.0, 0.0]], "e1e1").unwrap();
        assert_eq!(biorthogonal_dual(&x).unwrap(), Minimality::NotMinimal { rank: 1 });
    }

    #[test]
    fn exact_bessel_dual_matches_published_dual_on_span() {
        let n = 12;
        let x = GeneratorSequence::ExactBessel.materialize(n).unwrap();
        let published = VectorSequence::new(
            n + 1,
            (0..n).map(|k| ComplexVector::basis(n + 1, k + 1).scaled_real((k + 1) as f64)).collect(),
            "n e_{n+1}",
        )
        .unwrap();
        assert!(biorthogonality_error(&x, &published).unwrap() < 1e-12);
        let Minimality::Minimal { dual, max_error } = biorthogonal_dual(&x).unwrap() else {
            panic!("independent vectors")
        };
        assert!(max_error < 1e-9);
        let span = crate::hilbert::SubspaceSpec::spanned_by(n + 1, x.vectors()).unwrap();
        for (a, b) in dual.iter().zip(published.iter()) {
            assert!(a.max_abs_diff(&span.project(b).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn empty_sequence_errors() {
        let empty = VectorSequence::new(2, vec![], "empty").unwrap();
        assert_eq!(frame_operator(&empty).unwrap_err(), FrameError::EmptySequence);
    }
}
