//! Dense complex linear algebra: Hermiticity and positivity predicates,
//! principal square roots, biorthogonal eigensystems and propagators.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// Relative tolerance used when an input is required to be Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-8;
/// Relative eigenvalue gap below which a spectrum counts as degenerate.
pub const GAP_TOL: f64 = 1e-8;

const SCHUR_MAX_ITER: usize = 10_000;
const CONDITION_LIMIT: f64 = 1e12;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Checks that `m` is a non-empty square matrix with finite entries.
pub fn validate_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m.nrows())
}

pub fn same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<usize> {
    let n = validate_square(a)?;
    let m = validate_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: m,
        });
    }
    Ok(n)
}

/// Frobenius norm of `M - M†`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn require_hermitian(m: &ComplexMatrix) -> Result<()> {
    validate_square(m)?;
    let defect = hermiticity_defect(m);
    if defect > HERMITICITY_TOL * m.norm().max(1.0) {
        return Err(Error::NonHermitianInput { defect });
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (values, vectors)
}

/// Applies a real function to a Hermitian matrix through its spectral decomposition.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let diag = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| c(f(x), 0.0)),
    ));
    &vectors * diag * vectors.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Positivity {
    pub positive: bool,
    pub min_eigenvalue: f64,
}

pub fn positivity_check(m: &ComplexMatrix) -> Result<Positivity> {
    require_hermitian(m)?;
    let (values, _) = hermitian_eigen(m);
    let min_eigenvalue = values[0];
    Ok(Positivity {
        positive: min_eigenvalue > 0.0,
        min_eigenvalue,
    })
}

/// Principal (Hermitian positive-definite) square root, so that `Θ = Ω†Ω = Ω²`.
pub fn hermitian_sqrt(theta: &ComplexMatrix) -> Result<ComplexMatrix> {
    let check = positivity_check(theta)?;
    if !check.positive {
        return Err(Error::NotPositive {
            min_eigenvalue: check.min_eigenvalue,
        });
    }
    Ok(hermitian_function(theta, f64::sqrt))
}

pub fn invert(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    m.clone().try_inverse()
}

/// Ratio of largest to smallest singular value.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn schur(h: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Schur::try_new(h.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .map(|s| s.unpack())
        .ok_or(Error::NotDiagonalizable {
            condition: f64::INFINITY,
        })
}

/// Eigenvalues of a general complex matrix, read off its Schur form.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<Complex64>> {
    validate_square(h)?;
    let (_, t) = schur(h)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// `true` iff every eigenvalue has imaginary part below `tol` in modulus.
pub fn spectrum_reality_check(h: &ComplexMatrix, tol: f64) -> bool {
    match eigenvalues(h) {
        Ok(values) => values.iter().all(|e| e.im.abs() < tol),
        Err(_) => false,
    }
}

/// Eigenvalues with paired right eigenvectors of `H` and left eigenvectors
/// (eigenvectors of `H†`), normalized so that `⟨Ψᵐ|Ψₙ⟩ = δₘₙ`.
///
/// Right vectors have unit Euclidean norm and their first nonzero component is
/// real positive; the left vectors are then fixed by biorthonormality.
/// Eigenvalues are ordered by real part, then imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalSystem {
    pub eigenvalues: Vec<Complex64>,
    /// Columns are the right eigenvectors `Ψₙ`.
    pub right: ComplexMatrix,
    /// Columns are the left eigenvectors `Ψⁿ`.
    pub left: ComplexMatrix,
}

impl BiorthogonalSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right_vector(&self, n: usize) -> StateVector {
        self.right.column(n).into_owned()
    }

    pub fn left_vector(&self, n: usize) -> StateVector {
        self.left.column(n).into_owned()
    }

    /// `max |⟨Ψᵐ|Ψₙ⟩ − δₘₙ|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let gram = self.left.adjoint() * &self.right;
        let n = self.dim();
        (gram - identity(n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest of `‖HΨₙ − EₙΨₙ‖` and `‖H†Ψⁿ − Eₙ*Ψⁿ‖` over all `n`.
    pub fn eigen_residual(&self, h: &ComplexMatrix) -> f64 {
        let hd = h.adjoint();
        (0..self.dim())
            .map(|n| {
                let e = self.eigenvalues[n];
                let r = self.right_vector(n);
                let l = self.left_vector(n);
                let a = (h * &r - r.clone() * e).norm();
                let b = (&hd * &l - l * e.conj()).norm();
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    /// Reassembles `Σ Eₙ |Ψₙ⟩⟨Ψⁿ|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&DVector::from_vec(self.eigenvalues.clone()));
        &self.right * d * self.left.adjoint()
    }

    /// Spectral form of `e^{−iHΔt}`.
    pub fn propagator(&self, dt: f64) -> ComplexMatrix {
        let phases = DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| (-I * e * dt).exp()),
        );
        &self.right * ComplexMatrix::from_diagonal(&phases) * self.left.adjoint()
    }
}

pub fn biorthogonal_decompose(h: &ComplexMatrix) -> Result<BiorthogonalSystem> {
    let n = validate_square(h)?;
    let (q, t) = schur(h)?;
    let diag: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();

    let scale = h.norm();
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in (a + 1)..n {
            min_gap = min_gap.min((diag[a] - diag[b]).norm());
        }
    }
    if n > 1 && (scale == 0.0 || !(min_gap >= GAP_TOL * scale)) {
        return Err(Error::DegenerateSpectrum { gap: min_gap });
    }

    // Back substitution on the triangular factor gives T y = λ y.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        diag[a]
            .re
            .total_cmp(&diag[b].re)
            .then(diag[a].im.total_cmp(&diag[b].im))
    });
    let mut right = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let lambda = diag[k];
        let mut y = DVector::<Complex64>::zeros(n);
        y[k] = c(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = c(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[l];
            }
            y[j] = -acc / (t[(j, j)] - lambda);
        }
        let mut x = &q * y;
        let norm = x.norm();
        x /= c(norm, 0.0);
        if let Some(lead) = x.iter().find(|z| z.norm() > 1e-12).copied() {
            let phase = lead.conj() / lead.norm();
            x *= phase;
        }
        right.set_column(col, &x);
    }

    let condition = condition_number(&right);
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::NotDiagonalizable { condition });
    }
    let inverse = invert(&right).ok_or(Error::NotDiagonalizable { condition })?;
    Ok(BiorthogonalSystem {
        eigenvalues: order.iter().map(|&k| diag[k]).collect(),
        right,
        left: inverse.adjoint(),
    })
}

/// `e^{A}` by scaling and squaring with a Padé approximant.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    a.exp()
}

/// `U = e^{−iHΔt}`.
pub fn propagator(h: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    if dt == 0.0 {
        return identity(h.nrows());
    }
    expm(&(h * (-I * dt)))
}

/// Column-major `[re, im, re, im, ...]` view of a matrix, the ODE state layout.
pub(crate) fn flatten(m: &ComplexMatrix, out: &mut [f64]) {
    for (k, z) in m.iter().enumerate() {
        out[2 * k] = z.re;
        out[2 * k + 1] = z.im;
    }
}

pub(crate) fn unflatten(dim: usize, data: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_iterator(
        dim,
        dim,
        (0..dim * dim).map(|k| c(data[2 * k], data[2 * k + 1])),
    )
}
