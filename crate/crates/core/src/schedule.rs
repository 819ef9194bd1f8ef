//! Time-dependent Hamiltonians: adiabatic damping, compact smooth switching,
//! linear ramps and the two-level ramp experiment, plus parameter sweeps and
//! the extrapolation used to read off adiabatic limits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::two_level::{pauli_compose, FigOneParams};

/// Damping cutoff: switching starts at `t = −HORIZON_FACTOR / ε`, where
/// `e^{−ε|t|} < 7e−6`.
pub const HORIZON_FACTOR: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianSchedule {
    Constant {
        #[serde(with = "crate::serde_matrix")]
        h: ComplexMatrix,
    },
    /// `H₀ + e^{−ε|t|} H_I`.
    ExponentialSwitch {
        #[serde(with = "crate::serde_matrix")]
        h0: ComplexMatrix,
        #[serde(with = "crate::serde_matrix")]
        interaction: ComplexMatrix,
        epsilon: f64,
    },
    /// `H₀ + s(1 − |t|/L) H_I` for `|t| < L`, where `s` is the quintic
    /// smoothstep; `H₀` outside. Switching has zero slope at `t = 0`.
    SmoothSwitch {
        #[serde(with = "crate::serde_matrix")]
        h0: ComplexMatrix,
        #[serde(with = "crate::serde_matrix")]
        interaction: ComplexMatrix,
        half_width: f64,
    },
    /// `((T−t)/T) H₀ + (t/T) H₁` on `[0, T]`, clamped outside.
    LinearRamp {
        #[serde(with = "crate::serde_matrix")]
        h0: ComplexMatrix,
        #[serde(with = "crate::serde_matrix")]
        h1: ComplexMatrix,
        duration: f64,
    },
    TwoLevelFigOne(FigOneParams),
}

pub fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

impl HamiltonianSchedule {
    pub fn exponential(h0: ComplexMatrix, interaction: ComplexMatrix, epsilon: f64) -> Self {
        Self::ExponentialSwitch {
            h0,
            interaction,
            epsilon,
        }
    }

    pub fn validate(&self) -> Result<usize> {
        use crate::linalg::same_dim;
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
            }
        };
        match self {
            Self::Constant { h } => crate::linalg::validate_square(h),
            Self::ExponentialSwitch {
                h0,
                interaction,
                epsilon,
            } => {
                positive("epsilon", *epsilon)?;
                same_dim(h0, interaction)
            }
            Self::SmoothSwitch {
                h0,
                interaction,
                half_width,
            } => {
                positive("half_width", *half_width)?;
                same_dim(h0, interaction)
            }
            Self::LinearRamp { h0, h1, duration } => {
                positive("duration", *duration)?;
                same_dim(h0, h1)
            }
            Self::TwoLevelFigOne(p) => {
                positive("duration", p.duration)?;
                Ok(2)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Constant { h } => h.nrows(),
            Self::ExponentialSwitch { h0, .. }
            | Self::SmoothSwitch { h0, .. }
            | Self::LinearRamp { h0, .. } => h0.nrows(),
            Self::TwoLevelFigOne(_) => 2,
        }
    }

    /// `H(t)` for the schedule.
    pub fn hamiltonian_at(&self, t: f64) -> ComplexMatrix {
        match self {
            Self::Constant { h } => h.clone(),
            Self::ExponentialSwitch {
                h0,
                interaction,
                epsilon,
            } => h0 + interaction * c((-epsilon * t.abs()).exp(), 0.0),
            Self::SmoothSwitch {
                h0,
                interaction,
                half_width,
            } => h0 + interaction * c(smootherstep(1.0 - t.abs() / half_width), 0.0),
            Self::LinearRamp { h0, h1, duration } => {
                let s = (t / duration).clamp(0.0, 1.0);
                h0 * c(1.0 - s, 0.0) + h1 * c(s, 0.0)
            }
            Self::TwoLevelFigOne(p) => pauli_compose(&p.params_at(t)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<R> {
    pub parameter: f64,
    pub result: R,
}

/// Runs `experiment` for every parameter (concurrently) and returns rows in
/// input order. The parameter list must be strictly monotone.
pub fn adiabatic_sweep<R, F>(parameters: &[f64], experiment: F) -> Result<Vec<SweepRow<R>>>
where
    R: Send,
    F: Fn(f64) -> Result<R> + Sync,
{
    if parameters.is_empty() {
        return Err(Error::InvalidParameter("empty parameter ladder".into()));
    }
    let increasing = parameters.windows(2).all(|w| w[1] > w[0]);
    let decreasing = parameters.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidParameter(
            "parameter ladder must be strictly monotone".into(),
        ));
    }
    parameters
        .par_iter()
        .map(|&p| {
            experiment(p).map(|result| SweepRow {
                parameter: p,
                result,
            })
        })
        .collect()
}

/// `true` iff the sequence never increases.
pub fn is_nonincreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0])
}

fn two_smallest(thetas: impl Iterator<Item = f64>) -> Result<(usize, usize)> {
    let mut idx: Vec<(usize, f64)> = thetas.enumerate().collect();
    if idx.len() < 2 {
        return Err(Error::InvalidParameter(
            "extrapolation needs at least two points".into(),
        ));
    }
    idx.sort_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    if idx[0].1 == idx[1].1 {
        return Err(Error::InvalidParameter("duplicate extrapolation abscissae".into()));
    }
    Ok((idx[0].0, idx[1].0))
}

/// Fits `value(θ) = a + bθ` through the two points with smallest `|θ|` and
/// returns `a`. For `T → ∞` limits pass `θ = 1/T`.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> Result<f64> {
    let (i, j) = two_smallest(points.iter().map(|p| p.0))?;
    let (t1, v1) = points[i];
    let (t2, v2) = points[j];
    Ok((v1 * t2 - v2 * t1) / (t2 - t1))
}

/// Entrywise version of [`extrapolate_to_zero`].
pub fn extrapolate_matrix_to_zero(points: &[(f64, ComplexMatrix)]) -> Result<ComplexMatrix> {
    let (i, j) = two_smallest(points.iter().map(|p| p.0))?;
    let (t1, m1) = (&points[i].0, &points[i].1);
    let (t2, m2) = (&points[j].0, &points[j].1);
    Ok((m1 * c(*t2, 0.0) - m2 * c(*t1, 0.0)) / c(t2 - t1, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn pair() -> (ComplexMatrix, ComplexMatrix) {
        let h0 = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(2., 0.), c(2., 0.), c(0., 0.)]);
        let hi = ComplexMatrix::from_row_slice(2, 2, &[c(0., 1.5), c(0., 0.), c(0., 0.), c(0., -1.5)]);
        (h0, hi)
    }

    #[test]
    fn exponential_switch_values() {
        let (h0, hi) = pair();
        let s = HamiltonianSchedule::exponential(h0.clone(), hi.clone(), 0.1);
        assert_eq!(s.hamiltonian_at(0.0), &h0 + &hi);
        let far = s.hamiltonian_at(-200.0);
        assert!((far - &h0).norm() <= (-20.0f64).exp() * hi.norm() * (1.0 + 1e-12));
        assert_eq!(s.hamiltonian_at(3.0), s.hamiltonian_at(-3.0));
    }

    #[test]
    fn smooth_switch_is_compact() {
        let (h0, hi) = pair();
        let s = HamiltonianSchedule::SmoothSwitch {
            h0: h0.clone(),
            interaction: hi.clone(),
            half_width: 10.0,
        };
        assert_eq!(s.hamiltonian_at(0.0), &h0 + &hi);
        assert_eq!(s.hamiltonian_at(-10.0), h0);
        assert_eq!(s.hamiltonian_at(12.0), h0);
    }

    #[test]
    fn linear_ramp_midpoint_and_clamp() {
        let (h0, h1) = pair();
        let s = HamiltonianSchedule::LinearRamp {
            h0: h0.clone(),
            h1: h1.clone(),
            duration: 4.0,
        };
        assert!((s.hamiltonian_at(2.0) - (&h0 + &h1) * c(0.5, 0.)).norm() < 1e-15);
        assert_eq!(s.hamiltonian_at(-1.0), h0);
        assert_eq!(s.hamiltonian_at(5.0), h1);
    }

    #[test]
    fn lipschitz_continuity() {
        let (h0, hi) = pair();
        let s = HamiltonianSchedule::exponential(h0, hi.clone(), 0.3);
        let l = 0.3 * hi.norm();
        for k in -50..50 {
            let t = k as f64 * 0.37;
            let d = (s.hamiltonian_at(t + 1e-3) - s.hamiltonian_at(t)).norm();
            assert!(d <= l * 1e-3 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn sweep_preserves_order_and_rejects_unsorted() {
        let rows = adiabatic_sweep(&[1.0, 10.0, 100.0], |t| Ok(1.0 / t)).unwrap();
        let values: Vec<f64> = rows.iter().map(|r| r.result).collect();
        assert_eq!(values, vec![1.0, 0.1, 0.01]);
        assert!(is_nonincreasing(&values));
        assert_eq!(adiabatic_sweep(&[2.0], |t| Ok(t)).unwrap().len(), 1);
        assert!(adiabatic_sweep(&[1.0, 3.0, 2.0], |t| Ok(t)).is_err());
    }

    #[test]
    fn linear_extrapolation_is_exact_for_lines() {
        let pts = [(0.4, 1.0 + 0.8), (0.2, 1.4), (0.1, 1.2), (0.05, 1.1)];
        assert!((extrapolate_to_zero(&pts).unwrap() - 1.0).abs() < 1e-14);
        let mats = vec![(0.1, identity(2) * c(1.1, 0.)), (0.2, identity(2) * c(1.2, 0.))];
        let m = extrapolate_matrix_to_zero(&mats).unwrap();
        assert!((m - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn schedule_json_round_trip() {
        let (h0, hi) = pair();
        let s = HamiltonianSchedule::exponential(h0, hi, 0.05);
        let text = serde_json::to_string(&s).unwrap();
        let back: HamiltonianSchedule = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
