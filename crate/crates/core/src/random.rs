//! Seeded random vectors, sequences and operators for property suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hilbert::{c, ComplexVector, VectorSequence, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mix a root seed with a stream index so sub-streams are independent.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    c(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn vector(rng: &mut impl Rng, dim: usize) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect())
}

pub fn unit_vector(rng: &mut impl Rng, dim: usize) -> ComplexVector {
    let v = vector(rng, dim);
    let n = v.norm();
    v.scaled_real(1.0 / n)
}

/// `len` Gaussian vectors in `C^dim`; full rank almost surely when `len ≥ dim`.
pub fn sequence(rng: &mut impl Rng, dim: usize, len: usize) -> VectorSequence {
    let vectors = (0..len).map(|_| vector(rng, dim)).collect();
    VectorSequence::new(dim, vectors, format!("gaussian({dim}x{len})")).expect("gaussian vectors are nonzero")
}

pub fn matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    let g = matrix(rng, dim, dim);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Haar-distributed unitary from the QR factorisation of a Gaussian matrix.
pub fn unitary(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    let qr = matrix(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// `U diag(eigenvalues) U^H` with a random unitary `U`.
pub fn normal_with_spectrum(rng: &mut impl Rng, eigenvalues: &[C64]) -> DMatrix<C64> {
    let u = unitary(rng, eigenvalues.len());
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues));
    &u * d * u.adjoint()
}
