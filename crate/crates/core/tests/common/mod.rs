//! Seeded fixture generators shared by the integration suites.
#![allow(dead_code)]

use adiametric::linalg::{c, hermitian_function, invert, ComplexMatrix};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
    let a = random_complex(rng, n, scale);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// `e^{K}` for a random Hermitian `K` of size `spread`: positive, with
/// condition number at most `e^{2·spread·n}`-ish.
pub fn random_positive(rng: &mut impl Rng, n: usize, spread: f64) -> ComplexMatrix {
    let k = random_hermitian(rng, n, spread);
    hermitian_function(&k, f64::exp)
}

/// `H = Ω⁻¹hΩ` with `h` Hermitian and `Ω` positive, so `Θ = Ω²` is a metric
/// for `H` and the spectrum is real.
pub struct QuasiHermitian {
    pub h: ComplexMatrix,
    pub hermitian: ComplexMatrix,
    pub omega: ComplexMatrix,
    pub metric: ComplexMatrix,
}

pub fn quasi_hermitian(rng: &mut impl Rng, n: usize, scale: f64, spread: f64) -> QuasiHermitian {
    let hermitian = random_hermitian(rng, n, scale);
    let omega = random_positive(rng, n, spread);
    let inv = invert(&omega).unwrap();
    QuasiHermitian {
        h: &inv * &hermitian * &omega,
        metric: &omega * &omega,
        hermitian,
        omega,
    }
}

/// `S diag(E) S⁻¹` with a well-conditioned random `S`.
pub fn with_spectrum(rng: &mut impl Rng, eigenvalues: &[Complex64]) -> ComplexMatrix {
    let n = eigenvalues.len();
    let s = ComplexMatrix::identity(n, n) + random_complex(rng, n, 0.3 / n as f64);
    let d = ComplexMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues));
    &s * d * invert(&s).unwrap()
}
