//! Adaptive Dormand–Prince 5(4) integrator for real state vectors.
//!
//! Complex matrix equations are integrated through their flattened
//! `[re, im, ...]` representation. The integrator lands exactly on every
//! requested output time instead of interpolating.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step; `None` means unbounded.
    pub max_step: Option<f64>,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: None,
            min_step: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Integrates `y' = f(t, y)` from `t0` through the sorted `outputs`, which
/// must all lie on the same side of `t0`. `project` runs after every accepted
/// step (pass `|_| {}` for none).
pub fn integrate<F, P>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    config: &IntegratorConfig,
    mut project: P,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    let n = y0.len();
    let mut stats = StepStats::default();
    let mut times = Vec::with_capacity(outputs.len());
    let mut states = Vec::with_capacity(outputs.len());
    if outputs.is_empty() {
        return Ok(OdeSolution {
            times,
            states,
            stats,
        });
    }
    let last = *outputs.last().unwrap();
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    if outputs
        .windows(2)
        .any(|w| (w[1] - w[0]) * dir < 0.0)
        || (outputs[0] - t0) * dir < 0.0
    {
        return Err(Error::InvalidParameter(
            "output times must be monotone and start at or after t0".into(),
        ));
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    rhs(t, &y, &mut k[0]);
    stats.rhs_evaluations += 1;

    let span = (last - t0).abs();
    let mut h = initial_step(&mut rhs, t, &y, &k[0], config, span, &mut stats) * dir;
    if let Some(max) = config.max_step {
        h = h.signum() * h.abs().min(max);
    }

    let mut next = 0;
    while next < outputs.len() && outputs[next] == t {
        times.push(t);
        states.push(y.clone());
        next += 1;
    }

    let mut steps = 0usize;
    while next < outputs.len() {
        let target = outputs[next];
        let remaining = target - t;
        let mut hits_target = false;
        let mut step = h;
        if (step - remaining) * dir >= 0.0 {
            step = remaining;
            hits_target = true;
        }
        if step.abs() < config.min_step && !hits_target {
            return Err(Error::StepSizeUnderflow { t, step });
        }
        steps += 1;
        if steps > config.max_steps {
            return Err(Error::StepSizeUnderflow { t, step });
        }

        for s in 1..7 {
            let (done, rest) = k.split_at_mut(s);
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in done.iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + step * acc;
            }
            rhs(t + C[s] * step, &stage, &mut rest[0]);
            stats.rhs_evaluations += 1;
        }
        // Row 6 of A equals B5, so the last stage state is the 5th-order solution.
        y_new.copy_from_slice(&stage);
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += (B5[s] - B4[s]) * k[s][i];
            }
            err[i] = step * e;
        }
        let mut sum = 0.0;
        for i in 0..n {
            let scale = config.atol + config.rtol * y[i].abs().max(y_new[i].abs());
            let r = err[i] / scale;
            sum += r * r;
        }
        let err_norm = if n == 0 { 0.0 } else { (sum / n as f64).sqrt() };

        if err_norm <= 1.0 {
            stats.accepted += 1;
            t = if hits_target { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            project(&mut y);
            rhs(t, &y, &mut k[0]);
            stats.rhs_evaluations += 1;
            let factor = if err_norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            // A truncated landing step says nothing about the natural step size.
            if !hits_target || factor < 1.0 {
                h = step * factor;
            }
            if let Some(max) = config.max_step {
                h = h.signum() * h.abs().min(max);
            }
            while next < outputs.len() && outputs[next] == t {
                times.push(t);
                states.push(y.clone());
                next += 1;
            }
        } else {
            stats.rejected += 1;
            let factor = if err_norm.is_finite() {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                MIN_FACTOR
            };
            h = step * factor;
            if h.abs() < config.min_step {
                return Err(Error::StepSizeUnderflow { t, step: h });
            }
        }
    }

    Ok(OdeSolution {
        times,
        states,
        stats,
    })
}

fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    config: &IntegratorConfig,
    span: f64,
    stats: &mut StepStats,
) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len().max(1) as f64;
    let scale: Vec<f64> = y.iter().map(|v| config.atol + config.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&scale).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&scale).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span.max(f64::MIN_POSITIVE));
    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, f)| v + h0 * f).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs(t + h0, &y1, &mut f1);
    stats.rhs_evaluations += 1;
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&scale)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span.max(f64::MIN_POSITIVE))
}

/// `n` equally spaced points from `a` to `b` inclusive (`n ≥ 2`).
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|k| {
            if k == n - 1 {
                b
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let out = uniform_grid(0.0, 2.0, 5);
        let sol = integrate(
            |_, y, dy| dy[0] = -y[0],
            0.0,
            &[1.0],
            &out,
            &IntegratorConfig::with_tolerances(1e-12, 1e-14),
            |_| {},
        )
        .unwrap();
        assert_eq!(sol.times, out);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let out = vec![-1.0, -3.0];
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            &out,
            &IntegratorConfig::with_tolerances(1e-11, 1e-13),
            |_| {},
        )
        .unwrap();
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_source() {
        // y' = t, y(0) = 0
        let sol = integrate(
            |t, _, dy| dy[0] = t,
            0.0,
            &[0.0],
            &[3.0],
            &IntegratorConfig::default(),
            |_| {},
        )
        .unwrap();
        assert!((sol.states[0][0] - 4.5).abs() < 1e-9);
    }

    #[test]
    fn blow_up_stalls() {
        let config = IntegratorConfig {
            max_steps: 10_000,
            ..IntegratorConfig::default()
        };
        let res = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            0.0,
            &[1.0],
            &[2.0],
            &config,
            |_| {},
        );
        assert!(matches!(res, Err(Error::StepSizeUnderflow { .. })));
    }

    #[test]
    fn rejects_unsorted_outputs() {
        let res = integrate(|_, _, dy| dy[0] = 0.0, 0.0, &[0.0], &[2.0, 1.0], &IntegratorConfig::default(), |_| {});
        assert!(matches!(res, Err(Error::InvalidParameter(_))));
    }
}
