//! Phase-space polynomials with the Moyal star product, the harmonic-oscillator
//! metric flow, and the first-order metric of the cubic oscillator
//! `H = p² + q² + igq³`.
//!
//! Polynomials are generic over [`Coefficient`]; [`Exact`] (Gaussian
//! rationals) makes every algebraic identity hold exactly, while `Complex64`
//! is used where time integration enters.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};

pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// `(re + i·im) / den`.
    fn gaussian(re: i64, im: i64, den: i64) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_complex64(&self) -> Complex64;

    fn zero() -> Self {
        Self::gaussian(0, 0, 1)
    }

    fn one() -> Self {
        Self::gaussian(1, 0, 1)
    }

    fn i() -> Self {
        Self::gaussian(0, 1, 1)
    }

    fn integer(n: i64) -> Self {
        Self::gaussian(n, 0, 1)
    }
}

impl Coefficient for Complex64 {
    fn gaussian(re: i64, im: i64, den: i64) -> Self {
        Complex64::new(re as f64 / den as f64, im as f64 / den as f64)
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn to_complex64(&self) -> Complex64 {
        *self
    }
}

/// Complex numbers with arbitrary-precision rational parts.
pub type Exact = Complex<BigRational>;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Coefficient for Exact {
    fn gaussian(re: i64, im: i64, den: i64) -> Self {
        Complex::new(ratio(re, den), ratio(im, den))
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Exponent pair `(i, j)` of the monomial `pⁱqʲ`.
pub type Exponent = (u32, u32);

/// `Σ c_{ij} pⁱ qʲ`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Debug)]
pub struct PhasePolynomial<C: Coefficient> {
    terms: BTreeMap<Exponent, C>,
}

pub type ExactPolynomial = PhasePolynomial<Exact>;
pub type FloatPolynomial = PhasePolynomial<Complex64>;

impl<C: Coefficient> Default for PhasePolynomial<C> {
    fn default() -> Self {
        Self::zero()
    }
}

fn falling(n: u32, k: u32) -> i64 {
    (0..k).map(|m| (n - m) as i64).product()
}

fn binomial(n: u32, k: u32) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, m| acc * (n - m) as i64 / (m + 1) as i64)
}

impl<C: Coefficient> PhasePolynomial<C> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    /// `c · pⁱ qʲ`.
    pub fn monomial(i: u32, j: u32, c: C) -> Self {
        let mut out = Self::zero();
        out.add_term((i, j), c);
        out
    }

    pub fn p() -> Self {
        Self::monomial(1, 0, C::one())
    }

    pub fn q() -> Self {
        Self::monomial(0, 1, C::one())
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, C)>) -> Self {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: Exponent, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&e) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(e, sum);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, i: u32, j: u32) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    /// Highest total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.clone() * c.clone())))
    }

    /// Coefficientwise conjugate, the representative of the adjoint.
    pub fn conjugate(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v.conj())))
    }

    /// `∂_pᵃ ∂_qᵇ`.
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        Self::from_terms(self.terms.iter().filter_map(|(&(i, j), v)| {
            (i >= a && j >= b).then(|| {
                let k = falling(i, a) * falling(j, b);
                ((i - a, j - b), v.clone() * C::integer(k))
            })
        }))
    }

    /// Ordinary (commutative) product.
    pub fn pointwise(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), x) in &self.terms {
            for (&(c, d), y) in &other.terms {
                out.add_term((a + c, b + d), x.clone() * y.clone());
            }
        }
        out
    }

    /// The Moyal product `F exp[(i/2)(←∂_q →∂_p − ←∂_p →∂_q)] G`, expanded
    /// exactly; the series stops at order `min(deg F, deg G)`.
    pub fn star(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        let i_pow = [
            C::one(),
            C::i(),
            -C::one(),
            -C::i(),
        ];
        for (&(a, b), x) in &self.terms {
            for (&(c, d), y) in &other.terms {
                let xy = x.clone() * y.clone();
                let top = (a + b).min(c + d);
                for n in 0..=top {
                    // F takes ∂_pᵏ ∂_q^{n−k}, G takes ∂_p^{n−k} ∂_qᵏ, weight (−1)ᵏ/(k!(n−k)!).
                    let mut weight = 0i64;
                    for k in 0..=n {
                        let m = n - k;
                        if k > a || m > b || m > c || k > d {
                            continue;
                        }
                        let w = binomial(a, k) * falling(d, k) * binomial(b, m) * falling(c, m);
                        weight += if k % 2 == 0 { w } else { -w };
                    }
                    if weight == 0 {
                        continue;
                    }
                    let scalar = i_pow[(n % 4) as usize].clone() * C::gaussian(weight, 0, 1i64 << n);
                    out.add_term((a + c - n, b + d - n), xy.clone() * scalar);
                }
            }
        }
        out
    }

    /// `F⋆G − G⋆F`.
    pub fn star_commutator(&self, other: &Self) -> Self {
        &self.star(other) - &other.star(self)
    }

    /// Substitutes `p → m₀₀p + m₀₁q`, `q → m₁₀p + m₁₁q`.
    pub fn linear_substitute(&self, m: [[C; 2]; 2]) -> Self {
        let new_p = Self::from_terms([((1, 0), m[0][0].clone()), ((0, 1), m[0][1].clone())]);
        let new_q = Self::from_terms([((1, 0), m[1][0].clone()), ((0, 1), m[1][1].clone())]);
        let max = self.degree() as usize;
        let mut p_pow = vec![Self::one()];
        let mut q_pow = vec![Self::one()];
        for k in 1..=max {
            p_pow.push(p_pow[k - 1].pointwise(&new_p));
            q_pow.push(q_pow[k - 1].pointwise(&new_q));
        }
        let mut out = Self::zero();
        for (&(i, j), v) in &self.terms {
            let term = p_pow[i as usize].pointwise(&q_pow[j as usize]).scale(v);
            out = &out + &term;
        }
        out
    }

    pub fn map<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> PhasePolynomial<D> {
        PhasePolynomial::from_terms(self.terms.iter().map(|(e, v)| (*e, f(v))))
    }

    pub fn to_float(&self) -> FloatPolynomial {
        self.map(|c| c.to_complex64())
    }
}

impl FloatPolynomial {
    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl<'a, C: Coefficient> Add<&'a PhasePolynomial<C>> for &'a PhasePolynomial<C> {
    type Output = PhasePolynomial<C>;
    fn add(self, rhs: Self) -> PhasePolynomial<C> {
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(*e, v.clone());
        }
        out
    }
}

impl<'a, C: Coefficient> Sub<&'a PhasePolynomial<C>> for &'a PhasePolynomial<C> {
    type Output = PhasePolynomial<C>;
    fn sub(self, rhs: Self) -> PhasePolynomial<C> {
        let mut out = self.clone();
        for (e, v) in &rhs.terms {
            out.add_term(*e, -v.clone());
        }
        out
    }
}

impl<C: Coefficient> Neg for &PhasePolynomial<C> {
    type Output = PhasePolynomial<C>;
    fn neg(self) -> PhasePolynomial<C> {
        PhasePolynomial::from_terms(self.terms.iter().map(|(e, v)| (*e, -v.clone())))
    }
}

impl<C: Coefficient + fmt::Display> fmt::Display for PhasePolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, ((i, j), v)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({v})")?;
            for (name, power) in [("p", *i), ("q", *j)] {
                match power {
                    0 => {}
                    1 => write!(f, "·{name}")?,
                    n => write!(f, "·{name}^{n}")?,
                }
            }
        }
        Ok(())
    }
}

/// Random polynomial of total degree `≤ max_degree`; each monomial is present
/// with probability 1/2 and carries a small Gaussian-rational coefficient.
pub fn random_polynomial<C: Coefficient, R: rand::Rng>(rng: &mut R, max_degree: u32) -> PhasePolynomial<C> {
    let mut terms = Vec::new();
    for d in 0..=max_degree {
        for i in 0..=d {
            if rng.gen_bool(0.5) {
                let c = C::gaussian(rng.gen_range(-5..=5), rng.gen_range(-5..=5), rng.gen_range(1..=4));
                terms.push(((i, d - i), c));
            }
        }
    }
    PhasePolynomial::from_terms(terms)
}

/// `moyal_product(F, G) = F⋆G`.
pub fn moyal_product<C: Coefficient>(f: &PhasePolynomial<C>, g: &PhasePolynomial<C>) -> PhasePolynomial<C> {
    f.star(g)
}

/// `i(Θ⋆H − H*⋆Θ)`, the metric flow in phase space.
pub fn star_flow_rhs<C: Coefficient>(theta: &PhasePolynomial<C>, h: &PhasePolynomial<C>) -> PhasePolynomial<C> {
    (&theta.star(h) - &h.conjugate().star(theta)).scale(&C::i())
}

/// `2(q ∂Θ/∂p − p ∂Θ/∂q)`, the flow generated by `H₀ = p² + q²`.
pub fn harmonic_flow<C: Coefficient>(theta: &PhasePolynomial<C>) -> PhasePolynomial<C> {
    let two = C::integer(2);
    let a = PhasePolynomial::q().pointwise(&theta.derivative(1, 0));
    let b = PhasePolynomial::p().pointwise(&theta.derivative(0, 1));
    (&a - &b).scale(&two)
}

/// `p² + q²`.
pub fn harmonic_hamiltonian<C: Coefficient>() -> PhasePolynomial<C> {
    PhasePolynomial::from_terms([((2, 0), C::one()), ((0, 2), C::one())])
}

/// The cubic perturbation `iq³` (so that `H = H₀ + g·iq³`).
pub fn cubic_perturbation<C: Coefficient>() -> PhasePolynomial<C> {
    PhasePolynomial::monomial(0, 3, C::i())
}

/// Order-by-order flow for `Θ = Σ gᵏΘₖ`, `H = Σ gᵏHₖ` (real `g`):
/// entry `k` is `Σ_{a+b=k} i(Θ_a⋆H_b − H_b*⋆Θ_a)`.
pub fn star_flow_series<C: Coefficient>(
    theta: &[PhasePolynomial<C>],
    h: &[PhasePolynomial<C>],
) -> Vec<PhasePolynomial<C>> {
    if theta.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut out = vec![PhasePolynomial::zero(); theta.len() + h.len() - 1];
    for (a, t) in theta.iter().enumerate() {
        for (b, hb) in h.iter().enumerate() {
            out[a + b] = &out[a + b] + &star_flow_rhs(t, hb);
        }
    }
    out
}

/// `Θ(p,q,t) = Θ₀(p cos2t + q sin2t, −p sin2t + q cos2t)`, the exact flow
/// under `H₀ = p² + q²`. `t` is reduced modulo `π` first, so the result is
/// exactly `π`-periodic.
pub fn harmonic_transport(theta0: &FloatPolynomial, t: f64) -> FloatPolynomial {
    let reduced = t.rem_euclid(std::f64::consts::PI);
    if reduced == 0.0 {
        return theta0.clone();
    }
    let (s, c) = (2.0 * reduced).sin_cos();
    let z = |x: f64| Complex64::new(x, 0.0);
    theta0.linear_substitute([[z(c), z(s)], [z(-s), z(c)]])
}

/// `Θ₁ˢ = c + d(p² + q²) + pq² + (2/3)p³`.
pub fn cubic_static_first_order<C: Coefficient>(c: C, d: C) -> PhasePolynomial<C> {
    PhasePolynomial::from_terms([
        ((0, 0), c),
        ((2, 0), d.clone()),
        ((0, 2), d),
        ((1, 2), C::one()),
        ((3, 0), C::gaussian(2, 0, 3)),
    ])
}

/// Order-`g` part of `i(Θ⋆H − H*⋆Θ)` for `Θ = 1 + gΘ₁`, `H = p²+q² + igq³`.
pub fn first_order_residual<C: Coefficient>(theta1: &PhasePolynomial<C>) -> PhasePolynomial<C> {
    let series = star_flow_series(
        &[PhasePolynomial::one(), theta1.clone()],
        &[harmonic_hamiltonian(), cubic_perturbation()],
    );
    series[1].clone()
}

/// Monomials `1, p, q, p², pq, q², p³, p²q, pq², q³` of the third-order ansatz.
pub const ANSATZ_BASIS: [Exponent; 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

pub const ANSATZ_LABELS: [&str; 10] = ["1", "p", "q", "p2", "pq", "q2", "p3", "p2q", "pq2", "q3"];

pub fn basis_index(e: Exponent) -> Option<usize> {
    ANSATZ_BASIS.iter().position(|&b| b == e)
}

fn project<C: Coefficient>(poly: &PhasePolynomial<C>) -> Result<Vec<C>> {
    let mut out = vec![C::zero(); ANSATZ_BASIS.len()];
    for (e, v) in poly.terms() {
        let k = basis_index(*e).ok_or_else(|| {
            Error::InvalidParameter(format!("term p^{} q^{} leaves the ansatz", e.0, e.1))
        })?;
        out[k] = v.clone();
    }
    Ok(out)
}

pub fn from_ansatz<C: Coefficient>(values: &[C]) -> PhasePolynomial<C> {
    PhasePolynomial::from_terms(ANSATZ_BASIS.iter().copied().zip(values.iter().cloned()))
}

/// Order-`g` coefficients `gΘ₁` on the ansatz basis at each sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<[Complex64; 10]>,
}

impl CoefficientTrajectory {
    pub fn coefficient(&self, sample: usize, e: Exponent) -> Option<Complex64> {
        basis_index(e).map(|k| self.values[sample][k])
    }

    /// Largest imaginary part over all samples (zero for a Hermitian metric).
    pub fn max_imag(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().map(|z| z.im.abs()))
            .fold(0.0, f64::max)
    }

    /// `max |c(t)|` over samples with `t ∈ [lower, upper]`.
    pub fn envelope(&self, e: Exponent, lower: f64, upper: f64) -> Option<f64> {
        let k = basis_index(e)?;
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lower && **t <= upper)
            .map(|(_, v)| v[k].norm())
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CubicConfig {
    /// Factor multiplying the whole Hamiltonian in the flow. The default `1/2`
    /// reproduces the reference closed form for the linear switch, whose time
    /// scale corresponds to `(p² + q² + igq³)/2`.
    pub hamiltonian_scale: f64,
    pub integrator: IntegratorConfig,
}

impl Default for CubicConfig {
    fn default() -> Self {
        Self {
            hamiltonian_scale: 0.5,
            integrator: IntegratorConfig::with_tolerances(1e-13, 1e-17),
        }
    }
}

/// Linear generator and source of the order-`g` block:
/// `Θ̇₁ = s(A Θ₁ + λ(t) b)` with `λ` the switching profile.
pub fn first_order_system() -> (Vec<Vec<Exact>>, Vec<Exact>) {
    let h0 = harmonic_hamiltonian::<Exact>();
    let columns: Vec<Vec<Exact>> = ANSATZ_BASIS
        .iter()
        .map(|&(i, j)| {
            let rhs = star_flow_rhs(&PhasePolynomial::monomial(i, j, Exact::one()), &h0);
            project(&rhs).expect("H₀ flow preserves degree")
        })
        .collect();
    let n = ANSATZ_BASIS.len();
    let a = (0..n)
        .map(|row| (0..n).map(|col| columns[col][row].clone()).collect())
        .collect();
    let source = star_flow_rhs(&PhasePolynomial::one(), &cubic_perturbation::<Exact>());
    (a, project(&source).expect("source is cubic"))
}

/// Integrates the order-`g` coefficients for `Θ(0) = 1` and the switch
/// `H = p² + q² + i g λ(t) q³`, `λ(t) = clamp(t/T, 0, 1)`, returning `gΘ₁` at
/// the requested (increasing, positive) times.
pub fn cubic_linear_switch_evolve(
    g: f64,
    duration: f64,
    grid: &[f64],
    config: &CubicConfig,
) -> Result<CoefficientTrajectory> {
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    let (a, b) = first_order_system();
    let n = ANSATZ_BASIS.len();
    let s = config.hamiltonian_scale;
    let a: Vec<Vec<Complex64>> = a
        .iter()
        .map(|row| row.iter().map(|z| z.to_complex64() * s).collect())
        .collect();
    let b: Vec<Complex64> = b.iter().map(|z| z.to_complex64() * s).collect();

    let outputs: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
    let sol = integrate(
        |t, y, dy| {
            let lambda = (t / duration).clamp(0.0, 1.0);
            for r in 0..n {
                let mut acc = b[r] * lambda;
                for col in 0..n {
                    acc += a[r][col] * Complex64::new(y[2 * col], y[2 * col + 1]);
                }
                dy[2 * r] = acc.re;
                dy[2 * r + 1] = acc.im;
            }
        },
        0.0,
        &vec![0.0; 2 * n],
        &outputs,
        &config.integrator,
        |_| {},
    )?;

    let to_array = |y: &[f64]| -> [Complex64; 10] {
        std::array::from_fn(|k| Complex64::new(y[2 * k], y[2 * k + 1]) * g)
    };
    let mut times = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    if grid.first().is_some_and(|&t| t == 0.0) {
        times.push(0.0);
        values.push([Complex64::new(0.0, 0.0); 10]);
    }
    for (t, y) in sol.times.iter().zip(&sol.states) {
        times.push(*t);
        values.push(to_array(y));
    }
    Ok(CoefficientTrajectory { times, values })
}

/// The closed-form order-`g` metric for the linear switch on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PigCoefficients {
    pub p3: f64,
    pub p2q: f64,
    pub pq2: f64,
    pub q3: f64,
}

impl PigCoefficients {
    pub fn to_ansatz(&self) -> [Complex64; 10] {
        let mut out = [Complex64::new(0.0, 0.0); 10];
        out[6] = self.p3.into();
        out[7] = self.p2q.into();
        out[8] = self.pq2.into();
        out[9] = self.q3.into();
        out
    }
}

pub fn pig_closed_form(g: f64, duration: f64, t: f64) -> Result<PigCoefficients> {
    if !(t >= 0.0 && t <= duration) {
        return Err(Error::OutOfRange {
            t,
            lower: 0.0,
            upper: duration,
        });
    }
    let k = g / duration;
    let half = (t / 2.0).sin();
    Ok(PigCoefficients {
        p3: k / 36.0 * (24.0 * t - 27.0 * t.sin() + (3.0 * t).sin()),
        p2q: -k * 4.0 / 3.0 * (2.0 + t.cos()) * half.powi(4),
        pq2: k * (t - 0.75 * t.sin() - (3.0 * t).sin() / 12.0),
        q3: -k / 9.0 * (15.0 + 2.0 * t.cos() + (2.0 * t).cos()) * half * half,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    type P = ExactPolynomial;

    fn ex(re: i64, im: i64, den: i64) -> Exact {
        Exact::gaussian(re, im, den)
    }

    #[test]
    fn canonical_pairs() {
        let p = P::p();
        let q = P::q();
        assert_eq!(p.star(&q), P::from_terms([((1, 1), ex(1, 0, 1)), ((0, 0), ex(0, -1, 2))]));
        assert_eq!(q.star(&p), P::from_terms([((1, 1), ex(1, 0, 1)), ((0, 0), ex(0, 1, 2))]));
        assert_eq!(q.star_commutator(&p), P::constant(Exact::i()));
        let g = P::from_terms([((2, 3), ex(3, 1, 2)), ((0, 1), ex(-1, 0, 1))]);
        assert_eq!(P::one().star(&g), g);
        assert_eq!(g.star(&P::one()), g);
    }

    #[test]
    fn squares_commutator() {
        let p2 = P::monomial(2, 0, ex(1, 0, 1));
        let q2 = P::monomial(0, 2, ex(1, 0, 1));
        assert_eq!(p2.star_commutator(&q2), P::monomial(1, 1, ex(0, -4, 1)));
    }

    #[test]
    fn harmonic_examples() {
        let h0 = harmonic_hamiltonian::<Exact>();
        assert_eq!(star_flow_rhs(&P::p(), &h0), P::monomial(0, 1, ex(2, 0, 1)));
        assert!(star_flow_rhs(&h0, &h0).is_zero());
        let theta = P::from_terms([((3, 1), ex(2, 0, 1)), ((0, 4), ex(-1, 0, 3)), ((1, 0), ex(5, 0, 1))]);
        let rhs = star_flow_rhs(&theta, &h0);
        assert_eq!(rhs, harmonic_flow(&theta));
        assert!(rhs.terms().all(|(_, v)| v.im.is_zero()));
    }

    #[test]
    fn transport_examples() {
        let h0 = harmonic_hamiltonian::<Complex64>();
        let t = harmonic_transport(&h0, 0.37);
        assert!((&t - &h0).max_abs() < 1e-15);
        let q = FloatPolynomial::q();
        let r = harmonic_transport(&q, PI / 4.0);
        assert!((r.coefficient(1, 0) + 1.0).norm() < 1e-15);
        assert!(r.coefficient(0, 1).norm() < 1e-15);
        let theta = FloatPolynomial::from_terms([((2, 1), Complex64::new(0.3, 0.0)), ((0, 3), Complex64::new(-1.0, 0.0))]);
        assert_eq!(harmonic_transport(&theta, PI), theta);
    }

    #[test]
    fn static_first_order_examples() {
        let s = cubic_static_first_order(ex(0, 0, 1), ex(0, 0, 1));
        assert_eq!(
            s,
            P::from_terms([((1, 2), ex(1, 0, 1)), ((3, 0), ex(2, 0, 3))])
        );
        assert!(first_order_residual(&s).is_zero());
        let s = cubic_static_first_order(ex(7, 0, 3), ex(-5, 0, 2));
        assert!(first_order_residual(&s).is_zero());
    }

    #[test]
    fn pig_values() {
        let z = pig_closed_form(0.1, PI, 0.0).unwrap();
        assert_eq!(z.p3.abs() + z.p2q.abs() + z.pq2.abs() + z.q3.abs(), 0.0);
        let v = pig_closed_form(0.1, PI, PI).unwrap();
        assert!((v.p3 - 1.0 / 15.0).abs() < 1e-15);
        assert!((v.p2q + 4.0 / 3.0 * 0.1 / PI).abs() < 1e-15);
        assert!(matches!(pig_closed_form(0.1, 1.0, 2.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn first_order_system_is_rotation_plus_cubic_source() {
        let (a, b) = first_order_system();
        // q³ source with weight −2, nothing else.
        for (k, v) in b.iter().enumerate() {
            let expected = if k == 9 { ex(-2, 0, 1) } else { ex(0, 0, 1) };
            assert_eq!(*v, expected);
        }
        // p → 2q.
        assert_eq!(a[2][1], ex(2, 0, 1));
    }
}
