//! Møller operators, the adiabatically switched metric and the metric-dressed
//! S-matrix `S_fi = ⟨Φ_f^out|Θ Φ_i^in⟩` between free eigenstates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{evolution_operator, quasi_hermiticity_residual};
use crate::linalg::{
    hermitian_eigen, hermiticity_defect, identity, invert, propagator, spectrum_reality_check,
    ComplexMatrix, StateVector, HERMITICITY_TOL,
};
use crate::schedule::{
    adiabatic_sweep, extrapolate_matrix_to_zero, extrapolate_to_zero, is_nonincreasing,
    HamiltonianSchedule, SweepRow, HORIZON_FACTOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScatteringConfig {
    /// Magnus steps per unit time.
    pub steps_per_unit: f64,
    /// Exponential switching starts at `t = ∓horizon_factor/ε`.
    pub horizon_factor: f64,
    /// Re-run with a doubled horizon and fail if the Møller operators move by
    /// more than `convergence_tol` (relative).
    pub check_convergence: bool,
    pub convergence_tol: f64,
    /// Tolerance of the reality check on `H₀ + H_I`.
    pub spectrum_tol: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        Self {
            steps_per_unit: 20.0,
            horizon_factor: HORIZON_FACTOR,
            check_convergence: true,
            convergence_tol: 1e-3,
            spectrum_tol: 1e-8,
        }
    }
}

struct Switch<'a> {
    h0: &'a ComplexMatrix,
    interaction: &'a ComplexMatrix,
    /// Time beyond which the interaction is negligible (or exactly off).
    horizon: f64,
    /// `ε` for exponential switching, `1/L` for the compact one.
    rate: f64,
    compact: bool,
}

fn switch_of<'a>(schedule: &'a HamiltonianSchedule, config: &ScatteringConfig) -> Result<Switch<'a>> {
    schedule.validate()?;
    match schedule {
        HamiltonianSchedule::ExponentialSwitch {
            h0,
            interaction,
            epsilon,
        } => Ok(Switch {
            h0,
            interaction,
            horizon: config.horizon_factor / epsilon,
            rate: *epsilon,
            compact: false,
        }),
        HamiltonianSchedule::SmoothSwitch {
            h0,
            interaction,
            half_width,
        } => Ok(Switch {
            h0,
            interaction,
            horizon: *half_width,
            rate: 1.0 / half_width,
            compact: true,
        }),
        _ => Err(Error::InvalidParameter(
            "scattering needs an exponential or smooth switching schedule".into(),
        )),
    }
}

fn steps(span: f64, config: &ScatteringConfig) -> usize {
    ((span.abs() * config.steps_per_unit).ceil() as usize).max(1)
}

/// `Ω⁻ = U(0, t₋) U₀(t₋, 0)` with `t₋ = −horizon`.
fn moller_minus_at(schedule: &HamiltonianSchedule, h0: &ComplexMatrix, horizon: f64, config: &ScatteringConfig) -> ComplexMatrix {
    let u = evolution_operator(schedule, -horizon, 0.0, steps(horizon, config));
    u * propagator(h0, -horizon)
}

/// `Ω⁺ = U₀(0, t₊) U(t₊, 0)` with `t₊ = horizon`.
fn moller_plus_at(schedule: &HamiltonianSchedule, h0: &ComplexMatrix, horizon: f64, config: &ScatteringConfig) -> ComplexMatrix {
    let u = evolution_operator(schedule, 0.0, horizon, steps(horizon, config));
    propagator(h0, -horizon) * u
}

fn converged(
    f: impl Fn(f64) -> ComplexMatrix,
    sw: &Switch,
    config: &ScatteringConfig,
) -> Result<ComplexMatrix> {
    let m = f(sw.horizon);
    if config.check_convergence && !sw.compact {
        let wide = f(2.0 * sw.horizon);
        let change = (&wide - &m).norm() / m.norm().max(1.0);
        if !(change <= config.convergence_tol) {
            return Err(Error::NoConvergence { change });
        }
    }
    Ok(m)
}

pub fn moller_minus(schedule: &HamiltonianSchedule, config: &ScatteringConfig) -> Result<ComplexMatrix> {
    let sw = switch_of(schedule, config)?;
    converged(|hz| moller_minus_at(schedule, sw.h0, hz, config), &sw, config)
}

pub fn moller_plus(schedule: &HamiltonianSchedule, config: &ScatteringConfig) -> Result<ComplexMatrix> {
    let sw = switch_of(schedule, config)?;
    converged(|hz| moller_plus_at(schedule, sw.h0, hz, config), &sw, config)
}

fn check_full_spectrum(sw: &Switch, config: &ScatteringConfig) -> Result<()> {
    let full = sw.h0 + sw.interaction;
    if !spectrum_reality_check(&full, config.spectrum_tol * full.norm().max(1.0)) {
        let max_imag = crate::linalg::eigenvalues(&full)?
            .iter()
            .map(|e| e.im.abs())
            .fold(0.0, f64::max);
        return Err(Error::ComplexSpectrum { max_imag });
    }
    Ok(())
}

fn require_metric(theta0: &ComplexMatrix, dim: usize) -> Result<()> {
    if theta0.nrows() != dim || theta0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: theta0.nrows(),
        });
    }
    let check = crate::linalg::positivity_check(theta0)?;
    if !check.positive {
        return Err(Error::NotPositive {
            min_eigenvalue: check.min_eigenvalue,
        });
    }
    Ok(())
}

/// `Θ(0) = U(0,t₋)^{−†} Θ₀ U(0,t₋)^{−1}`: the free metric `Θ₀` pushed forward
/// from the start of the switching to `t = 0`.
pub fn adiabatic_metric(
    schedule: &HamiltonianSchedule,
    theta0: &ComplexMatrix,
    config: &ScatteringConfig,
) -> Result<ComplexMatrix> {
    let sw = switch_of(schedule, config)?;
    require_metric(theta0, sw.h0.nrows())?;
    check_full_spectrum(&sw, config)?;
    let u = evolution_operator(schedule, -sw.horizon, 0.0, steps(sw.horizon, config));
    let inv = invert(&u).ok_or(Error::SingularMetric)?;
    Ok(crate::linalg::hermitian_part(&(inv.adjoint() * theta0 * inv)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    #[serde(with = "crate::serde_matrix")]
    pub s: ComplexMatrix,
    #[serde(with = "crate::serde_matrix")]
    pub theta_adiabatic: ComplexMatrix,
    #[serde(with = "crate::serde_matrix")]
    pub moller_plus: ComplexMatrix,
    #[serde(with = "crate::serde_matrix")]
    pub moller_minus: ComplexMatrix,
    /// Free eigenbasis (columns) used for the in and out states.
    #[serde(with = "crate::serde_matrix")]
    pub basis: ComplexMatrix,
    /// `ε`, or `1/L` for the compact switch.
    pub rate: f64,
    /// `‖S†S − I‖`; meaningful as a unitarity test for `Θ₀ = I`.
    pub unitarity_defect: f64,
    /// `‖Ω⁻†ΘΩ⁻ − Θ₀‖`, the in-state isometry defect.
    pub isometry_defect: f64,
    /// `‖(H₀+H_I)†Θ − Θ(H₀+H_I)‖`.
    pub static_residual: f64,
}

impl ScatteringResult {
    pub fn in_state(&self, psi: &StateVector) -> StateVector {
        &self.moller_minus * psi
    }

    /// `(Ω⁺)⁻¹Ψ`: the state that `Ω⁺` carries back onto the free `Ψ`.
    pub fn out_state(&self, psi: &StateVector) -> Result<StateVector> {
        self.moller_plus
            .clone()
            .lu()
            .solve(psi)
            .ok_or(Error::SingularMetric)
    }
}

pub fn in_state(psi: &StateVector, schedule: &HamiltonianSchedule, config: &ScatteringConfig) -> Result<StateVector> {
    Ok(moller_minus(schedule, config)? * psi)
}

pub fn out_state(psi: &StateVector, schedule: &HamiltonianSchedule, config: &ScatteringConfig) -> Result<StateVector> {
    moller_plus(schedule, config)?
        .lu()
        .solve(psi)
        .ok_or(Error::SingularMetric)
}

/// `S_fi = ⟨Φ_f^out|Θ Φ_i^in⟩` over the (Hermitian) `H₀` eigenbasis, with
/// `Φ^in = Ω⁻Φ`, `Φ^out = (Ω⁺)⁻¹Φ` and `Θ` the adiabatic metric grown from `Θ₀`.
pub fn s_matrix(
    schedule: &HamiltonianSchedule,
    theta0: &ComplexMatrix,
    config: &ScatteringConfig,
) -> Result<ScatteringResult> {
    let sw = switch_of(schedule, config)?;
    let n = sw.h0.nrows();
    let defect = hermiticity_defect(sw.h0);
    if defect > HERMITICITY_TOL * sw.h0.norm().max(1.0) {
        return Err(Error::NonHermitianInput { defect });
    }
    require_metric(theta0, n)?;
    check_full_spectrum(&sw, config)?;

    let minus = moller_minus(schedule, config)?;
    let plus = moller_plus(schedule, config)?;
    let (_, basis) = hermitian_eigen(sw.h0);

    // U(0,t₋) = Ω⁻ U₀(t₋,0)⁻¹, so Θ follows from Ω⁻ without another pass.
    let u = &minus * propagator(sw.h0, sw.horizon);
    let u_inv = invert(&u).ok_or(Error::SingularMetric)?;
    let theta = crate::linalg::hermitian_part(&(u_inv.adjoint() * theta0 * u_inv));

    let plus_inv = invert(&plus).ok_or(Error::SingularMetric)?;
    let incoming = &minus * &basis;
    let outgoing = plus_inv * &basis;
    let s = outgoing.adjoint() * &theta * incoming;

    let unitarity_defect = (s.adjoint() * &s - identity(n)).norm();
    let isometry_defect = (minus.adjoint() * &theta * &minus - theta0).norm();
    let static_residual = quasi_hermiticity_residual(&(sw.h0 + sw.interaction), &theta);
    Ok(ScatteringResult {
        s,
        theta_adiabatic: theta,
        moller_plus: plus,
        moller_minus: minus,
        basis,
        rate: sw.rate,
        unitarity_defect,
        isometry_defect,
        static_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLadder {
    pub rows: Vec<SweepRow<ScatteringResult>>,
    /// Unitarity defect extrapolated linearly to `ε → 0`.
    pub extrapolated_defect: f64,
    #[serde(with = "crate::serde_matrix")]
    pub extrapolated_metric: ComplexMatrix,
    /// `true` when the defect does not increase as `ε` decreases.
    pub defect_decreasing: bool,
}

/// Runs [`s_matrix`] over a decreasing `ε` ladder with exponential switching.
pub fn epsilon_ladder(
    h0: &ComplexMatrix,
    interaction: &ComplexMatrix,
    epsilons: &[f64],
    theta0: &ComplexMatrix,
    config: &ScatteringConfig,
) -> Result<EpsilonLadder> {
    let rows = adiabatic_sweep(epsilons, |eps| {
        let schedule = HamiltonianSchedule::exponential(h0.clone(), interaction.clone(), eps);
        s_matrix(&schedule, theta0, config)
    })?;
    ladder_summary(rows)
}

/// The same ladder with the compact smooth switch of half-width `scale/ε`.
pub fn smooth_ladder(
    h0: &ComplexMatrix,
    interaction: &ComplexMatrix,
    epsilons: &[f64],
    scale: f64,
    theta0: &ComplexMatrix,
    config: &ScatteringConfig,
) -> Result<EpsilonLadder> {
    let rows = adiabatic_sweep(epsilons, |eps| {
        let schedule = HamiltonianSchedule::SmoothSwitch {
            h0: h0.clone(),
            interaction: interaction.clone(),
            half_width: scale / eps,
        };
        s_matrix(&schedule, theta0, config)
    })?;
    ladder_summary(rows)
}

fn ladder_summary(rows: Vec<SweepRow<ScatteringResult>>) -> Result<EpsilonLadder> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.parameter, r.result.unitarity_defect))
        .collect();
    let metrics: Vec<(f64, ComplexMatrix)> = rows
        .iter()
        .map(|r| (r.parameter, r.result.theta_adiabatic.clone()))
        .collect();
    let mut by_eps = points.clone();
    by_eps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let defects: Vec<f64> = by_eps.iter().map(|p| p.1).collect();
    let (extrapolated_defect, extrapolated_metric) = if rows.len() >= 2 {
        (
            extrapolate_to_zero(&points)?.abs(),
            extrapolate_matrix_to_zero(&metrics)?,
        )
    } else {
        (points[0].1, metrics[0].1.clone())
    };
    Ok(EpsilonLadder {
        rows,
        extrapolated_defect,
        extrapolated_metric,
        defect_decreasing: is_nonincreasing(&defects),
    })
}
