//! The metric flow `Θ̇ = i(ΘH − H†Θ)`: static metrics, four interchangeable
//! solvers, eigenbasis coefficients, the observable Hamiltonian and its
//! Hermitian counterpart, and transition probabilities.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, uniform_grid, IntegratorConfig, StepStats};
use crate::linalg::{
    c, flatten, hermitian_eigen, hermitian_sqrt, hermiticity_defect, identity, invert, unflatten,
    validate_square, BiorthogonalSystem, ComplexMatrix, StateVector, HERMITICITY_TOL, I,
};
use crate::schedule::HamiltonianSchedule;

/// Relative tolerance on `max |Im Eₙ|` for a spectrum to count as real.
pub const REAL_SPECTRUM_TOL: f64 = 1e-8;

/// `‖H†Θ − ΘH‖`.
pub fn quasi_hermiticity_residual(h: &ComplexMatrix, theta: &ComplexMatrix) -> f64 {
    (h.adjoint() * theta - theta * h).norm()
}

/// `i(ΘH − H†Θ)`.
pub fn flow_rhs(h: &ComplexMatrix, theta: &ComplexMatrix) -> ComplexMatrix {
    (theta * h - h.adjoint() * theta) * I
}

fn spectral_scale(system: &BiorthogonalSystem) -> f64 {
    system
        .eigenvalues
        .iter()
        .map(|e| e.norm())
        .fold(1.0, f64::max)
}

/// `Θ = Σ ϑₙ |Ψⁿ⟩⟨Ψⁿ|`.
pub fn static_metric(system: &BiorthogonalSystem, weights: &[f64]) -> Result<ComplexMatrix> {
    if weights.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            actual: weights.len(),
        });
    }
    let max_imag = system.max_imag();
    if max_imag > REAL_SPECTRUM_TOL * spectral_scale(system) {
        return Err(Error::ComplexSpectrum { max_imag });
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
        return Err(Error::NonpositiveWeight { index, value });
    }
    let d = ComplexMatrix::from_diagonal(&DVector::from_iterator(
        weights.len(),
        weights.iter().map(|&w| c(w, 0.0)),
    ));
    let theta = &system.left * d * system.left.adjoint();
    Ok(crate::linalg::hermitian_part(&theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    RungeKutta,
    PropagatorConjugation,
    Picard,
    NormalOrderedSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTrajectory {
    pub times: Vec<f64>,
    #[serde(with = "metric_list")]
    pub metrics: Vec<ComplexMatrix>,
    pub solver: Solver,
    pub stats: StepStats,
}

mod metric_list {
    use super::ComplexMatrix;
    use crate::serde_matrix::{from_rows, to_rows};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    type Rows = Vec<Vec<[f64; 2]>>;

    pub fn serialize<S: Serializer>(m: &[ComplexMatrix], s: S) -> Result<S::Ok, S::Error> {
        m.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<ComplexMatrix>, D::Error> {
        let rows: Vec<Rows> = Vec::deserialize(d)?;
        rows.iter()
            .map(|r| from_rows(r).map_err(D::Error::custom))
            .collect()
    }
}

impl MetricTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> (f64, &ComplexMatrix) {
        let n = self.times.len() - 1;
        (self.times[n], &self.metrics[n])
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.metrics
            .iter()
            .map(hermiticity_defect)
            .fold(0.0, f64::max)
    }

    /// Largest Frobenius distance to another trajectory sampled at the same times.
    pub fn max_distance(&self, other: &MetricTrajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.times.len(),
                actual: other.times.len(),
            });
        }
        Ok(self
            .metrics
            .iter()
            .zip(&other.metrics)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max ‖U(t,t₀)†Θ(t)U(t,t₀) − Θ(t₀)‖` with `U` rebuilt from `schedule`.
    pub fn conservation_defect(&self, schedule: &HamiltonianSchedule, steps_per_unit: f64) -> f64 {
        let theta0 = &self.metrics[0];
        let mut u = identity(theta0.nrows());
        let mut worst: f64 = 0.0;
        for k in 1..self.times.len() {
            let (a, b) = (self.times[k - 1], self.times[k]);
            let n = (((b - a) * steps_per_unit).ceil() as usize).max(1);
            u = evolution_operator(schedule, a, b, n) * u;
            worst = worst.max((u.adjoint() * &self.metrics[k] * &u - theta0).norm());
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub solver: Solver,
    pub integrator: IntegratorConfig,
    /// Number of output intervals between `t₀` and `t₁`.
    pub samples: usize,
    pub picard_order: usize,
    pub series_order: usize,
    /// Magnus steps per unit time for propagator conjugation.
    pub steps_per_unit: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            solver: Solver::RungeKutta,
            integrator: IntegratorConfig::default(),
            samples: 100,
            picard_order: 8,
            series_order: 12,
            steps_per_unit: 200.0,
        }
    }
}

fn require_hermitian_metric(theta: &ComplexMatrix) -> Result<()> {
    validate_square(theta)?;
    let defect = hermiticity_defect(theta);
    if defect > HERMITICITY_TOL * theta.norm().max(1.0) {
        return Err(Error::NonHermitianInput { defect });
    }
    Ok(())
}

fn check_interval(t0: f64, t1: f64) -> Result<()> {
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need a finite interval with t1 > t0, got [{t0}, {t1}]"
        )));
    }
    Ok(())
}

fn check_dims(schedule: &HamiltonianSchedule, theta0: &ComplexMatrix) -> Result<()> {
    let n = schedule.validate()?;
    if theta0.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: theta0.nrows(),
        });
    }
    Ok(())
}

/// Dispatches to the solver selected in `config`, sampling `samples + 1`
/// uniformly spaced times.
pub fn evolve(
    schedule: &HamiltonianSchedule,
    theta0: &ComplexMatrix,
    t0: f64,
    t1: f64,
    config: &FlowConfig,
) -> Result<MetricTrajectory> {
    match config.solver {
        Solver::RungeKutta => evolve_metric(schedule, theta0, t0, t1, config),
        Solver::PropagatorConjugation => {
            let n = (((t1 - t0) * config.steps_per_unit).ceil() as usize).max(config.samples);
            let n = n.div_ceil(config.samples.max(1)) * config.samples.max(1);
            let full = evolve_metric_via_propagator(schedule, theta0, t0, t1, n)?;
            let stride = n / config.samples.max(1);
            Ok(MetricTrajectory {
                times: full.times.iter().step_by(stride).copied().collect(),
                metrics: full.metrics.iter().step_by(stride).cloned().collect(),
                ..full
            })
        }
        Solver::Picard | Solver::NormalOrderedSeries => {
            let HamiltonianSchedule::Constant { h } = schedule else {
                return Err(Error::InvalidParameter(
                    "series solvers need a constant Hamiltonian".into(),
                ));
            };
            check_interval(t0, t1)?;
            check_dims(schedule, theta0)?;
            require_hermitian_metric(theta0)?;
            let times = uniform_grid(t0, t1, config.samples.max(1) + 1);
            let metrics = times
                .iter()
                .map(|&t| {
                    if config.solver == Solver::Picard {
                        picard_iterate(h, theta0, t - t0, config.picard_order)
                    } else {
                        normal_ordered_exp(h, t - t0, config.series_order, theta0)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(MetricTrajectory {
                times,
                metrics,
                solver: config.solver,
                stats: StepStats::default(),
            })
        }
    }
}

/// Adaptive Runge–Kutta solution of the flow on a uniform output grid.
pub fn evolve_metric(
    schedule: &HamiltonianSchedule,
    theta0: &ComplexMatrix,
    t0: f64,
    t1: f64,
    config: &FlowConfig,
) -> Result<MetricTrajectory> {
    check_interval(t0, t1)?;
    let times = uniform_grid(t0, t1, config.samples.max(1) + 1);
    evolve_metric_at(schedule, theta0, t0, &times[1..], &config.integrator)
}

/// Adaptive Runge–Kutta solution sampled at `t₀` and the increasing `outputs`.
/// The state is re-symmetrized after every accepted step.
pub fn evolve_metric_at(
    schedule: &HamiltonianSchedule,
    theta0: &ComplexMatrix,
    t0: f64,
    outputs: &[f64],
    config: &IntegratorConfig,
) -> Result<MetricTrajectory> {
    check_dims(schedule, theta0)?;
    require_hermitian_metric(theta0)?;
    if !outputs.iter().all(|&t| t > t0) || !outputs.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter(
            "output times must increase strictly from t0".into(),
        ));
    }
    let n = theta0.nrows();
    let mut y0 = vec![0.0; 2 * n * n];
    flatten(&crate::linalg::hermitian_part(theta0), &mut y0);

    let sol = integrate(
        |t, y, dy| {
            let theta = unflatten(n, y);
            flatten(&flow_rhs(&schedule.hamiltonian_at(t), &theta), dy);
        },
        t0,
        &y0,
        outputs,
        config,
        |y| symmetrize_flat(n, y),
    )?;

    let mut times = vec![t0];
    times.extend_from_slice(&sol.times);
    let mut metrics = vec![crate::linalg::hermitian_part(theta0)];
    metrics.extend(sol.states.iter().map(|y| unflatten(n, y)));
    Ok(MetricTrajectory {
        times,
        metrics,
        solver: Solver::RungeKutta,
        stats: sol.stats,
    })
}

fn symmetrize_flat(n: usize, y: &mut [f64]) {
    for j in 0..n {
        for i in 0..=j {
            let a = 2 * (i + j * n);
            let b = 2 * (j + i * n);
            let re = 0.5 * (y[a] + y[b]);
            let im = 0.5 * (y[a + 1] - y[b + 1]);
            y[a] = re;
            y[a + 1] = im;
            y[b] = re;
            y[b + 1] = -im;
        }
    }
}

/// Exponent of one fourth-order Magnus step for `dU/dt = −iH(t)U` on `[t, t+h]`.
fn magnus_exponent(schedule: &HamiltonianSchedule, t: f64, h: f64) -> ComplexMatrix {
    let d = 3f64.sqrt() / 6.0;
    let a1 = schedule.hamiltonian_at(t + h * (0.5 - d)) * (-I);
    let a2 = schedule.hamiltonian_at(t + h * (0.5 + d)) * (-I);
    let comm = &a2 * &a1 - &a1 * &a2;
    (&a1 + &a2) * c(h / 2.0, 0.0) + comm * c(3f64.sqrt() / 12.0 * h * h, 0.0)
}

/// `U(t₁, t₀)` from `nsteps` fourth-order Magnus steps (exact for constant `H`).
pub fn evolution_operator(
    schedule: &HamiltonianSchedule,
    t0: f64,
    t1: f64,
    nsteps: usize,
) -> ComplexMatrix {
    if let HamiltonianSchedule::Constant { h } = schedule {
        return crate::linalg::propagator(h, t1 - t0);
    }
    let n = nsteps.max(1);
    let h = (t1 - t0) / n as f64;
    let mut u = identity(schedule.dim());
    for k in 0..n {
        let t = t0 + h * k as f64;
        u = crate::linalg::expm(&magnus_exponent(schedule, t, h)) * u;
    }
    u
}

/// `Θ(t) = U(t,t₀)^{−†} Θ₀ U(t,t₀)^{−1}` with `U` accumulated from `nsteps`
/// Magnus steps; one sample per step.
pub fn evolve_metric_via_propagator(
    schedule: &HamiltonianSchedule,
    theta0: &ComplexMatrix,
    t0: f64,
    t1: f64,
    nsteps: usize,
) -> Result<MetricTrajectory> {
    check_interval(t0, t1)?;
    check_dims(schedule, theta0)?;
    require_hermitian_metric(theta0)?;
    let n = nsteps.max(1);
    let step = (t1 - t0) / n as f64;
    let mut inverse = identity(theta0.nrows());
    let mut times = Vec::with_capacity(n + 1);
    let mut metrics = Vec::with_capacity(n + 1);
    times.push(t0);
    metrics.push(theta0.clone());
    for k in 0..n {
        let t = t0 + step * k as f64;
        let back = match schedule {
            HamiltonianSchedule::Constant { h } => crate::linalg::propagator(h, -step),
            _ => crate::linalg::expm(&(-magnus_exponent(schedule, t, step))),
        };
        inverse *= back;
        times.push(if k + 1 == n { t1 } else { t0 + step * (k + 1) as f64 });
        metrics.push(crate::linalg::hermitian_part(
            &(inverse.adjoint() * theta0 * &inverse),
        ));
    }
    Ok(MetricTrajectory {
        times,
        metrics,
        solver: Solver::PropagatorConjugation,
        stats: StepStats {
            accepted: n,
            ..StepStats::default()
        },
    })
}

/// `k`-th Picard iterate of `Θ(t) = Θ₀ + i∫₀ᵗ (ΘH − H†Θ) dt'` for constant `H`.
///
/// Starting from `Θ₀`, every iteration adds one order in `t`, so the iterate is
/// `Σ_{j≤k} Cⱼ tʲ` with `Cⱼ = i(C_{j−1}H − H†C_{j−1})/j`.
pub fn picard_iterate(
    h: &ComplexMatrix,
    theta0: &ComplexMatrix,
    t: f64,
    order: usize,
) -> Result<ComplexMatrix> {
    crate::linalg::same_dim(h, theta0)?;
    if order == 0 {
        return Err(Error::InvalidParameter("Picard order must be at least 1".into()));
    }
    let mut term = theta0.clone();
    let mut sum = theta0.clone();
    for j in 1..=order {
        term = flow_rhs(h, &term) * c(t / j as f64, 0.0);
        sum += &term;
    }
    Ok(sum)
}

/// `Σ_{a+b≤N} (−iH†t)ᵃ/a! · Θ₀ · (iHt)ᵇ/b!`, the normal-ordered partial sum.
pub fn normal_ordered_exp(
    h: &ComplexMatrix,
    t: f64,
    truncation: usize,
    theta0: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    crate::linalg::same_dim(h, theta0)?;
    let n = h.nrows();
    let left_gen = h.adjoint() * c(0.0, -t);
    let right_gen = h * c(0.0, t);
    let mut left = Vec::with_capacity(truncation + 1);
    let mut right = Vec::with_capacity(truncation + 1);
    left.push(identity(n));
    right.push(identity(n));
    for k in 1..=truncation {
        let l = &left[k - 1] * &left_gen * c(1.0 / k as f64, 0.0);
        let r = &right[k - 1] * &right_gen * c(1.0 / k as f64, 0.0);
        left.push(l);
        right.push(r);
    }
    let mut sum = ComplexMatrix::zeros(n, n);
    for a in 0..=truncation {
        let lt = &left[a] * theta0;
        let mut partial = ComplexMatrix::zeros(n, n);
        for r in right.iter().take(truncation - a + 1) {
            partial += r;
        }
        sum += lt * partial;
    }
    Ok(sum)
}

/// `Θ = Σ ϑₘₙ |Ψᵐ⟩⟨Ψⁿ|`, stored as the matrix `ϑ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenbasisCoefficients {
    #[serde(with = "crate::serde_matrix")]
    pub coefficients: ComplexMatrix,
}

impl EigenbasisCoefficients {
    pub fn reconstruct(&self, system: &BiorthogonalSystem) -> ComplexMatrix {
        &system.left * &self.coefficients * system.left.adjoint()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        self.coefficients.diagonal().iter().copied().collect()
    }

    /// `max |ϑₘₙ − ϑₙₘ*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.coefficients - self.coefficients.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `ϑ = R†ΘR` where the columns of `R` are the right eigenvectors.
pub fn eigenbasis_coefficients(
    system: &BiorthogonalSystem,
    theta: &ComplexMatrix,
) -> EigenbasisCoefficients {
    EigenbasisCoefficients {
        coefficients: system.right.adjoint() * theta * &system.right,
    }
}

/// Constant-`H` evolution in the eigenbasis: `ϑₘₙ(t) = e^{i(Eₙ − Eₘ*)t} ϑₘₙ(0)`.
pub fn eigenbasis_evolution(
    system: &BiorthogonalSystem,
    initial: &EigenbasisCoefficients,
    t: f64,
) -> EigenbasisCoefficients {
    let e = &system.eigenvalues;
    let coefficients = ComplexMatrix::from_fn(system.dim(), system.dim(), |m, n| {
        (I * (e[n] - e[m].conj()) * t).exp() * initial.coefficients[(m, n)]
    });
    EigenbasisCoefficients { coefficients }
}

/// Solves `ΩX + XΩ = Θ̇` for the derivative `X = Ω̇` of the square root.
pub fn sqrt_derivative(omega: &ComplexMatrix, theta_dot: &ComplexMatrix) -> ComplexMatrix {
    let (w, v) = hermitian_eigen(omega);
    let rotated = v.adjoint() * theta_dot * &v;
    let x = ComplexMatrix::from_fn(w.len(), w.len(), |i, j| rotated[(i, j)] / (w[i] + w[j]));
    &v * x * v.adjoint()
}

/// `H_obs = H + iΩ⁻¹Ω̇` with `Ω = Θ^{1/2}` and `Ω̇` the matching derivative of
/// the square root. When `Θ̇` follows the flow, `H_obs` is quasi-Hermitian
/// with respect to `Θ` at every instant.
pub fn observable_hamiltonian(
    h: &ComplexMatrix,
    theta: &ComplexMatrix,
    theta_dot: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    crate::linalg::same_dim(h, theta)?;
    crate::linalg::same_dim(h, theta_dot)?;
    let omega = match hermitian_sqrt(theta) {
        Ok(o) => o,
        Err(Error::NotPositive { min_eigenvalue }) if min_eigenvalue.abs() < 1e-14 => {
            return Err(Error::SingularMetric)
        }
        Err(e) => return Err(e),
    };
    let omega_inv = invert(&omega).ok_or(Error::SingularMetric)?;
    let omega_dot = sqrt_derivative(&omega, theta_dot);
    Ok(h + omega_inv * omega_dot * I)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianSample {
    pub t: f64,
    #[serde(with = "crate::serde_matrix")]
    pub h: ComplexMatrix,
    /// `‖h − h†‖ / ‖h‖`.
    pub relative_defect: f64,
    /// `‖H_obs − iΩ⁻¹Ω̇ − H‖ / ‖H‖` with `Ω̇` from central differences;
    /// absent at the end points.
    pub generator_consistency: Option<f64>,
}

/// `h(t) = Ω H_obs Ω⁻¹` at every sample, with `Θ̇` taken from the flow.
pub fn hermitian_representation(
    trajectory: &MetricTrajectory,
    schedule: &HamiltonianSchedule,
) -> Result<Vec<HermitianSample>> {
    let omegas = trajectory
        .metrics
        .iter()
        .map(hermitian_sqrt)
        .collect::<Result<Vec<_>>>()?;
    let n = trajectory.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = trajectory.times[k];
        let ham = schedule.hamiltonian_at(t);
        let theta = &trajectory.metrics[k];
        let theta_dot = flow_rhs(&ham, theta);
        let h_obs = observable_hamiltonian(&ham, theta, &theta_dot)?;
        let omega = &omegas[k];
        let omega_inv = invert(omega).ok_or(Error::SingularMetric)?;
        let h = omega * &h_obs * &omega_inv;
        let relative_defect = hermiticity_defect(&h) / h.norm().max(f64::MIN_POSITIVE);
        let generator_consistency = (k > 0 && k + 1 < n).then(|| {
            let dt = trajectory.times[k + 1] - trajectory.times[k - 1];
            let omega_dot = (&omegas[k + 1] - &omegas[k - 1]) / c(dt, 0.0);
            let h_gen = &h_obs - &omega_inv * omega_dot * I;
            (h_gen - &ham).norm() / ham.norm().max(f64::MIN_POSITIVE)
        });
        out.push(HermitianSample {
            t,
            h,
            relative_defect,
            generator_consistency,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionProbability {
    /// `|⟨Φ|Θ(t)U(t,t′)|Ψ⟩|²`.
    pub forward: f64,
    /// `|⟨Φ|U(t′,t)†Θ(t′)|Ψ⟩|²`.
    pub backward: f64,
}

fn theta_normalize(v: &StateVector, theta: &ComplexMatrix) -> Result<StateVector> {
    let norm2 = v.dotc(&(theta * v)).re;
    if !(norm2 > 0.0) {
        return Err(Error::InvalidParameter("state has zero metric norm".into()));
    }
    Ok(v / c(norm2.sqrt(), 0.0))
}

/// Probability of finding `Φ` at `t` after preparing `Ψ` at `t′` with metric
/// `Θ(t′)`. `Ψ` is normalized in the `Θ(t′)` inner product and `Φ` in the
/// `Θ(t)` one.
pub fn transition_probability(
    phi: &StateVector,
    psi: &StateVector,
    schedule: &HamiltonianSchedule,
    theta_prep: &ComplexMatrix,
    t_prep: f64,
    t: f64,
    nsteps: usize,
) -> Result<TransitionProbability> {
    check_dims(schedule, theta_prep)?;
    require_hermitian_metric(theta_prep)?;
    let u = evolution_operator(schedule, t_prep, t, nsteps);
    let u_back = invert(&u).ok_or(Error::SingularMetric)?;
    let theta_t = crate::linalg::hermitian_part(&(u_back.adjoint() * theta_prep * &u_back));
    let psi = theta_normalize(psi, theta_prep)?;
    let phi = theta_normalize(phi, &theta_t)?;
    let forward = phi.dotc(&(&theta_t * (&u * &psi))).norm_sqr();
    let backward = phi.dotc(&(u_back.adjoint() * (theta_prep * &psi))).norm_sqr();
    Ok(TransitionProbability { forward, backward })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{biorthogonal_decompose, positivity_check};
    use crate::two_level::{pauli_compose, TwoLevelParams};

    fn quasi() -> ComplexMatrix {
        pauli_compose(&TwoLevelParams::new([0., 4., 0., 0.], [0., 0., 0., 3.]))
    }

    fn sigma2_metric(a: f64) -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., -a), c(0., a), c(1., 0.)])
    }

    fn hermitian() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0.3, -0.2), c(0.3, 0.2), c(-0.5, 0.)])
    }

    #[test]
    fn residual_examples() {
        assert_eq!(quasi_hermiticity_residual(&hermitian(), &identity(2)), 0.0);
        assert!(quasi_hermiticity_residual(&quasi(), &sigma2_metric(0.75)) < 1e-12);
        let r = quasi_hermiticity_residual(&quasi(), &identity(2));
        let expected = (quasi().adjoint() - quasi()).norm();
        assert!((r - expected).abs() < 1e-12 && r > 1.0);
    }

    #[test]
    fn static_metric_examples() {
        let sys = biorthogonal_decompose(&hermitian()).unwrap();
        let theta = static_metric(&sys, &[1.0, 1.0]).unwrap();
        assert!((theta - identity(2)).norm() < 1e-12);

        let sys = biorthogonal_decompose(&quasi()).unwrap();
        let target = sigma2_metric(0.75);
        let weights: Vec<f64> = eigenbasis_coefficients(&sys, &target)
            .diagonal()
            .iter()
            .map(|z| z.re)
            .collect();
        let theta = static_metric(&sys, &weights).unwrap();
        assert!((&theta - &target).norm() < 1e-12);
        assert!(positivity_check(&theta).unwrap().positive);

        assert!(matches!(
            static_metric(&sys, &[1.0, 0.0]),
            Err(Error::NonpositiveWeight { index: 1, .. })
        ));
        let complex = pauli_compose(&TwoLevelParams::new([0., 2., 0., 0.], [0., 0., 0., 3.]));
        let sys = biorthogonal_decompose(&complex).unwrap();
        assert!(matches!(
            static_metric(&sys, &[1.0, 1.0]),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn flow_rhs_vanishes_on_static() {
        assert_eq!(flow_rhs(&hermitian(), &identity(2)).norm(), 0.0);
        assert!(flow_rhs(&quasi(), &sigma2_metric(0.75)).norm() < 1e-12);
    }

    #[test]
    fn normal_ordered_second_order() {
        let h = quasi();
        let t = 0.1;
        let hd = h.adjoint();
        let expected = identity(2) + (&h - &hd) * c(0.0, t)
            - (&h * &h - (&hd * &h) * c(2.0, 0.0) + &hd * &hd) * c(t * t / 2.0, 0.0);
        let got = normal_ordered_exp(&h, t, 2, &identity(2)).unwrap();
        assert!((got - expected).norm() < 1e-14);
        for n in [0, 3, 9] {
            let got = normal_ordered_exp(&hermitian(), 0.7, n, &identity(2)).unwrap();
            assert!((got - identity(2)).norm() < 1e-12);
        }
    }

    #[test]
    fn picard_first_order_matches_series() {
        let h = quasi();
        let theta0 = sigma2_metric(0.2);
        let t = 1e-3;
        let p = picard_iterate(&h, &theta0, t, 1).unwrap();
        let s = normal_ordered_exp(&h, t, 1, &theta0).unwrap();
        assert!((p - s).norm() < 1e-14);
        let p = picard_iterate(&hermitian(), &identity(2), 3.0, 5).unwrap();
        assert!((p - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn observable_hamiltonian_is_quasi_hermitian() {
        let h = quasi();
        let theta = sigma2_metric(0.3);
        let dot = flow_rhs(&h, &theta);
        let h_obs = observable_hamiltonian(&h, &theta, &dot).unwrap();
        assert!(quasi_hermiticity_residual(&h_obs, &theta) < 1e-12);
        let s = sigma2_metric(0.75);
        let zero = ComplexMatrix::zeros(2, 2);
        assert!((observable_hamiltonian(&h, &s, &zero).unwrap() - &h).norm() < 1e-14);
        let singular = ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            observable_hamiltonian(&h, &singular, &zero),
            Err(Error::SingularMetric)
        ));
    }

    #[test]
    fn sqrt_derivative_solves_sylvester() {
        let omega = hermitian_sqrt(&sigma2_metric(0.4)).unwrap();
        let dot = hermitian();
        let x = sqrt_derivative(&omega, &dot);
        assert!((&omega * &x + &x * &omega - dot).norm() < 1e-13);
    }

    #[test]
    fn symmetrize_makes_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.2), c(2., 1.), c(0., 0.), c(3., 0.)]);
        let mut y = vec![0.0; 8];
        flatten(&m, &mut y);
        symmetrize_flat(2, &mut y);
        let s = unflatten(2, &y);
        assert!((s - crate::linalg::hermitian_part(&m)).norm() < 1e-15);
    }

    #[test]
    fn transition_trivial_cases() {
        let sched = HamiltonianSchedule::Constant { h: hermitian() };
        let psi = StateVector::from_vec(vec![c(1., 0.), c(0., 0.)]);
        let u = crate::linalg::propagator(&hermitian(), 1.3);
        let phi = &u * &psi;
        let p = transition_probability(&phi, &psi, &sched, &identity(2), 0.0, 1.3, 1).unwrap();
        assert!((p.forward - 1.0).abs() < 1e-12 && (p.backward - 1.0).abs() < 1e-12);
        let orth = StateVector::from_vec(vec![-phi[1].conj(), phi[0].conj()]);
        let p = transition_probability(&orth, &psi, &sched, &identity(2), 0.0, 1.3, 1).unwrap();
        assert!(p.forward < 1e-24 && p.backward < 1e-24);
    }
}
