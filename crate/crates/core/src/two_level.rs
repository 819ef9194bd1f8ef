//! Two-level model: `H = h₀ + hᵢσᵢ` with `v_μ = 2 Re h_μ`, `w_μ = 2 Im h_μ`,
//! and metrics `Θ = ϑ₀ + ϑᵢσᵢ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::linalg::{c, ComplexMatrix};

const PSEUDO_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelParams {
    pub v: [f64; 4],
    pub w: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComponents {
    pub theta0: f64,
    pub theta: [f64; 3],
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn spatial(x: &[f64; 4]) -> [f64; 3] {
    [x[1], x[2], x[3]]
}

impl TwoLevelParams {
    pub fn new(v: [f64; 4], w: [f64; 4]) -> Self {
        Self { v, w }
    }

    pub fn v_vec(&self) -> [f64; 3] {
        spatial(&self.v)
    }

    pub fn w_vec(&self) -> [f64; 3] {
        spatial(&self.w)
    }

    pub fn v_squared(&self) -> f64 {
        let v = self.v_vec();
        dot(&v, &v)
    }

    pub fn w_squared(&self) -> f64 {
        let w = self.w_vec();
        dot(&w, &w)
    }

    fn scale(&self) -> f64 {
        self.v_squared().max(self.w_squared()).sqrt().max(1.0)
    }

    /// Checks `w₀ = 0` and `v⃗·w⃗ = 0`.
    pub fn check_pseudo_hermitian(&self) -> Result<()> {
        let w0 = self.w[0];
        let v_dot_w = dot(&self.v_vec(), &self.w_vec());
        let s = self.scale();
        if w0.abs() > PSEUDO_HERMITIAN_TOL * s || v_dot_w.abs() > PSEUDO_HERMITIAN_TOL * s * s {
            return Err(Error::NotPseudoHermitian { w0, v_dot_w });
        }
        Ok(())
    }
}

impl MetricComponents {
    pub fn new(theta0: f64, theta: [f64; 3]) -> Self {
        Self { theta0, theta }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.theta0, self.theta[0], self.theta[1], self.theta[2]]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], [a[1], a[2], a[3]])
    }

    pub fn norm(&self) -> f64 {
        self.as_array().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let a = self.as_array();
        let b = other.as_array();
        (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// `Θ` is positive iff `ϑ₀ > |ϑ⃗|`.
    pub fn is_positive(&self) -> bool {
        self.theta0 > dot(&self.theta, &self.theta).sqrt()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let [a0, a1, a2, a3] = self.as_array();
        pauli_matrix([c(a0, 0.), c(a1, 0.), c(a2, 0.), c(a3, 0.)])
    }

    /// Real Pauli components of a 2×2 matrix (the Hermitian part).
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let h = pauli_components(m)?;
        Ok(Self::from_array([h[0].re, h[1].re, h[2].re, h[3].re]))
    }
}

fn pauli_matrix(h: [num_complex::Complex64; 4]) -> ComplexMatrix {
    let i = c(0.0, 1.0);
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[h[0] + h[3], h[1] - i * h[2], h[1] + i * h[2], h[0] - h[3]],
    )
}

fn pauli_components(m: &ComplexMatrix) -> Result<[num_complex::Complex64; 4]> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: m.nrows().max(m.ncols()),
        });
    }
    let i = c(0.0, 1.0);
    let half = c(0.5, 0.0);
    Ok([
        (m[(0, 0)] + m[(1, 1)]) * half,
        (m[(0, 1)] + m[(1, 0)]) * half,
        (m[(1, 0)] - m[(0, 1)]) * half / i,
        (m[(0, 0)] - m[(1, 1)]) * half,
    ])
}

/// `H = h₀ + hᵢσᵢ` with `h_μ = (v_μ + i w_μ)/2`.
pub fn pauli_compose(params: &TwoLevelParams) -> ComplexMatrix {
    let h = std::array::from_fn(|k| c(params.v[k] / 2.0, params.w[k] / 2.0));
    pauli_matrix(h)
}

pub fn pauli_decompose(m: &ComplexMatrix) -> Result<TwoLevelParams> {
    let h = pauli_components(m)?;
    Ok(TwoLevelParams {
        v: std::array::from_fn(|k| 2.0 * h[k].re),
        w: std::array::from_fn(|k| 2.0 * h[k].im),
    })
}

/// Right-hand side of the metric flow in Pauli components:
/// `−ϑ̇₀ = ϑ_μ w_μ`, `−ϑ̇ᵢ = ϑ₀wᵢ + ϑᵢw₀ + εᵢⱼₖϑⱼvₖ`.
pub fn component_flow(m: &MetricComponents, params: &TwoLevelParams) -> MetricComponents {
    let w = params.w_vec();
    let v = params.v_vec();
    let w0 = params.w[0];
    let t0 = m.theta0;
    let tv = &m.theta;
    let x = cross(tv, &v);
    MetricComponents::new(
        -(t0 * w0 + dot(tv, &w)),
        std::array::from_fn(|i| -(t0 * w[i] + tv[i] * w0 + x[i])),
    )
}

/// Static metric `ϑ⃗ˢ = −(ϑ₀ˢ/v⃗²)(v⃗×w⃗) + αv⃗` of a pseudo-Hermitian `H`.
pub fn static_solution(params: &TwoLevelParams, theta0: f64, alpha: f64) -> Result<MetricComponents> {
    params.check_pseudo_hermitian()?;
    let v = params.v_vec();
    let v2 = dot(&v, &v);
    if v2 == 0.0 {
        return Err(Error::InvalidParameter("v must be nonzero".into()));
    }
    let vw = cross(&v, &params.w_vec());
    Ok(MetricComponents::new(
        theta0,
        std::array::from_fn(|i| -theta0 / v2 * vw[i] + alpha * v[i]),
    ))
}

/// Splits a metric into the static solution it oscillates about (for constant
/// `H`) by conserving `α = ϑ⃗·v⃗/v²` and `ϑ₀ + w²γ`, where `γ` is the
/// `v⃗×w⃗` component of `ϑ⃗`.
pub fn static_projection(m: &MetricComponents, params: &TwoLevelParams) -> Result<MetricComponents> {
    params.check_pseudo_hermitian()?;
    let v = params.v_vec();
    let w = params.w_vec();
    let v2 = dot(&v, &v);
    let w2 = dot(&w, &w);
    if v2 == 0.0 {
        return Err(Error::InvalidParameter("v must be nonzero".into()));
    }
    if v2 <= w2 {
        return Err(Error::ComplexSpectrum {
            max_imag: ((w2 - v2).max(0.0)).sqrt() / 2.0,
        });
    }
    let vw = cross(&v, &w);
    let vw2 = dot(&vw, &vw);
    let gamma = if vw2 > 0.0 { dot(&m.theta, &vw) / vw2 } else { 0.0 };
    let invariant = m.theta0 + w2 * gamma;
    let theta0 = invariant * v2 / (v2 - w2);
    static_solution(params, theta0, dot(&m.theta, &v) / v2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum Regime {
    Oscillatory { frequency: f64 },
    ExponentialGrowth { rate: f64 },
    Degenerate,
}

/// Oscillatory with frequency `√(v²−w²)` when `v² > w²` (real energies),
/// exponential growth with rate `√(w²−v²)` when `v² < w²`.
pub fn classify_regime(params: &TwoLevelParams) -> Result<Regime> {
    params.check_pseudo_hermitian()?;
    let d = params.v_squared() - params.w_squared();
    let s = params.scale();
    Ok(if d.abs() <= 1e-12 * s * s {
        Regime::Degenerate
    } else if d > 0.0 {
        Regime::Oscillatory { frequency: d.sqrt() }
    } else {
        Regime::ExponentialGrowth { rate: (-d).sqrt() }
    })
}

/// Rotation of `ϑ⃗` about `v⃗` by angle `|v⃗|t` (the `w = 0` flow).
pub fn hermitian_precession(theta: [f64; 3], v: [f64; 3], t: f64) -> [f64; 3] {
    let norm = dot(&v, &v).sqrt();
    if norm == 0.0 {
        return theta;
    }
    let k = [v[0] / norm, v[1] / norm, v[2] / norm];
    let (s, co) = (norm * t).sin_cos();
    let kxt = cross(&k, &theta);
    let kt = dot(&k, &theta);
    std::array::from_fn(|i| theta[i] * co + kxt[i] * s + k[i] * kt * (1.0 - co))
}

/// The ramp `v₁(t) = a t/T`, `v₂(t) = a (T−t)/T` on `[0, T]`, constant outside,
/// with `w⃗ = (0, 0, w₃)` and fixed `v₀`, `v₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FigOneParams {
    pub duration: f64,
    pub amplitude: f64,
    pub w3: f64,
    pub v0: f64,
    pub v3: f64,
    /// Permits ramps that pass through complex spectrum (e.g. amplitude 2).
    pub allow_complex_spectrum: bool,
}

impl Default for FigOneParams {
    fn default() -> Self {
        Self {
            duration: 100.0,
            amplitude: 8.0,
            w3: 3.0,
            v0: 0.0,
            v3: 0.0,
            allow_complex_spectrum: false,
        }
    }
}

impl FigOneParams {
    pub fn with_duration(duration: f64) -> Self {
        Self {
            duration,
            ..Self::default()
        }
    }

    pub fn params_at(&self, t: f64) -> TwoLevelParams {
        let s = (t / self.duration).clamp(0.0, 1.0);
        TwoLevelParams {
            v: [self.v0, self.amplitude * s, self.amplitude * (1.0 - s), self.v3],
            w: [0.0, 0.0, 0.0, self.w3],
        }
    }

    /// Smallest `v⃗²` along the ramp (reached at `t = T/2`).
    pub fn min_v_squared(&self) -> f64 {
        self.amplitude * self.amplitude / 2.0 + self.v3 * self.v3
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::InvalidParameter("duration must be positive".into()));
        }
        self.params_at(0.0).check_pseudo_hermitian()?;
        let v2 = self.min_v_squared();
        let w2 = self.w3 * self.w3;
        if v2 <= w2 && !self.allow_complex_spectrum {
            return Err(Error::RealSpectrumViolated {
                t: self.duration / 2.0,
                v_squared: v2,
                w_squared: w2,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FigOneConfig {
    /// Time integrated past the end of the ramp.
    pub settle: f64,
    pub samples_per_unit: f64,
    pub integrator: IntegratorConfig,
}

impl Default for FigOneConfig {
    fn default() -> Self {
        Self {
            settle: 20.0,
            samples_per_unit: 50.0,
            integrator: IntegratorConfig::with_tolerances(1e-10, 1e-13),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigOneResult {
    pub times: Vec<f64>,
    pub components: Vec<MetricComponents>,
    pub initial_static: MetricComponents,
    /// Static solution of the final Hamiltonian that the metric oscillates about.
    pub final_static: Option<MetricComponents>,
    /// `sup_{t ≥ T} ‖ϑ(t) − ϑˢ‖ / ‖ϑˢ‖`; NaN when the final spectrum is complex.
    pub deviation: f64,
}

fn grid(a: f64, b: f64, per_unit: f64) -> Vec<f64> {
    let n = (((b - a) * per_unit).ceil() as usize).max(1);
    (0..=n)
        .map(|k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
        .collect()
}

/// Integrates the component flow across the ramp starting from the static
/// solution (`ϑ₀ˢ = 1`, `α = 0`) of the initial Hamiltonian and measures how
/// far the metric ends up from a static solution of the final one.
pub fn fig1_experiment(params: &FigOneParams, config: &FigOneConfig) -> Result<FigOneResult> {
    params.validate()?;
    let big_t = params.duration;
    let initial_static = static_solution(&params.params_at(0.0), 1.0, 0.0)?;

    let mut times = grid(0.0, big_t, config.samples_per_unit);
    let tail = grid(big_t, big_t + config.settle, config.samples_per_unit);
    times.extend_from_slice(&tail[1..]);

    let p = *params;
    let sol = integrate(
        move |t, y, dy| {
            let m = MetricComponents::from_array([y[0], y[1], y[2], y[3]]);
            let d = component_flow(&m, &p.params_at(t));
            dy.copy_from_slice(&d.as_array());
        },
        0.0,
        &initial_static.as_array(),
        &times,
        &config.integrator,
        |_| {},
    )?;
    let components: Vec<MetricComponents> = sol
        .states
        .iter()
        .map(|y| MetricComponents::from_array([y[0], y[1], y[2], y[3]]))
        .collect();

    let end = components
        .iter()
        .zip(&sol.times)
        .find(|(_, &t)| t >= big_t)
        .map(|(m, _)| *m)
        .expect("grid contains T");
    let final_static = static_projection(&end, &params.params_at(big_t)).ok();
    let deviation = match &final_static {
        Some(s) => {
            let scale = s.norm();
            components
                .iter()
                .zip(&sol.times)
                .filter(|(_, &t)| t >= big_t)
                .map(|(m, _)| m.distance(s) / scale)
                .fold(0.0, f64::max)
        }
        None => f64::NAN,
    };

    Ok(FigOneResult {
        times: sol.times,
        components,
        initial_static,
        final_static,
        deviation,
    })
}
