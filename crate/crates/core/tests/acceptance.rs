//! Acceptance suite: one PASS/FAIL line per criterion at the pinned
//! tolerances. Runs without the libtest harness so the lines always print.
//!
//! A criterion listed in `KNOWN_FAILURES` is reported as FAIL but does not
//! fail the run; if it ever starts passing the run fails, so the list cannot
//! go stale silently.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use adiametric::flow::{
    eigenbasis_coefficients, evolve, evolve_metric, evolve_metric_at, hermitian_representation,
    quasi_hermiticity_residual, static_metric, FlowConfig, Solver,
};
use adiametric::integrate::{uniform_grid, IntegratorConfig};
use adiametric::linalg::{biorthogonal_decompose, c, identity, ComplexMatrix};
use adiametric::moyal::{
    cubic_linear_switch_evolve, harmonic_flow, harmonic_hamiltonian, harmonic_transport,
    pig_closed_form, random_polynomial, star_flow_rhs, Coefficient, CubicConfig, Exact,
    ExactPolynomial,
};
use adiametric::scattering::{epsilon_ladder, smooth_ladder, ScatteringConfig};
use adiametric::schedule::{adiabatic_sweep, HamiltonianSchedule};
use adiametric::two_level::{
    fig1_experiment, pauli_compose, static_solution, FigOneConfig, FigOneParams, TwoLevelParams,
};
use common::{quasi_hermitian, random_positive, rng, with_spectrum};
use rand::Rng;

/// Criterion 3 asks for deviation(T = 1) > 0.3; with the fixed ramp
/// (a = 8, w₃ = 3) the fast ramp only reaches ≈ 0.14. See the decision log.
const KNOWN_FAILURES: &[u32] = &[3];

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, checks: &[(bool, String)]) -> Outcome {
    let pass = checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, s)| if *ok { s.clone() } else { format!("{s} [FAIL]") })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { id, pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (g, big_t) in [(0.1, PI), (0.1, 10.0), (0.1, 100.0)] {
        let times = [big_t / 4.0, big_t / 2.0, big_t];
        let traj = cubic_linear_switch_evolve(g, big_t, &times, &CubicConfig::default()).unwrap();
        for (t, values) in traj.times.iter().zip(&traj.values) {
            let exact = pig_closed_form(g, big_t, *t).unwrap().to_ansatz();
            for (num, ex) in values.iter().zip(&exact) {
                let err = if ex.norm() > 0.0 {
                    (num - ex).norm() / ex.norm()
                } else {
                    (num - ex).norm() / g
                };
                worst = worst.max(err);
            }
        }
    }
    let spot = cubic_linear_switch_evolve(0.1, PI, &[PI], &CubicConfig::default()).unwrap();
    let p3 = spot.values[0][6].re;
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        1,
        &[
            (worst < 1e-6, format!("max relative error {worst:.2e} < 1e-6")),
            (rel(p3, 1.0 / 15.0) < 1e-6, format!("p3(t=pi) = {p3:.12} vs 1/15")),
            (elapsed < 5.0, format!("runtime {elapsed:.2} s < 5 s")),
        ],
    )
}

fn criterion_2() -> Outcome {
    let g = 0.1;
    let cfg = CubicConfig::default();
    // Amplitude of the transient terms: envelope over the last period of
    // the ramp, where c(t) = (g/T)·f(t) with f 2π-periodic.
    let envelope = |big_t: f64| {
        let grid = uniform_grid(big_t - 2.0 * PI, big_t, 801);
        let traj = cubic_linear_switch_evolve(g, big_t, &grid, &cfg).unwrap();
        let p2q = traj.envelope((2, 1), big_t - 2.0 * PI, big_t).unwrap();
        let q3 = traj.envelope((0, 3), big_t - 2.0 * PI, big_t).unwrap();
        let last = traj.values.last().unwrap();
        (p2q, q3, last[8].re, last[6].re)
    };
    let mut checks = Vec::new();
    let (a_p2q, a_q3, ..) = envelope(100.0);
    let (b_p2q, b_q3, ..) = envelope(200.0);
    for (name, a, b) in [("p2q", a_p2q, b_p2q), ("q3", a_q3, b_q3)] {
        let ratio = b / a;
        checks.push(((0.4..=0.6).contains(&ratio), format!("{name} |c(2T)|/|c(T)| = {ratio:.4}")));
    }
    for big_t in [100.0, 200.0] {
        let (_, _, pq2, p3) = envelope(big_t);
        let e1 = rel(pq2, g);
        let e2 = rel(p3, 2.0 * g / 3.0);
        checks.push((e1 < 2.0 / big_t, format!("T={big_t}: pq2 rel {e1:.2e} < 2/T")));
        checks.push((e2 < 2.0 / big_t, format!("T={big_t}: p3 rel {e2:.2e} < 2/T")));
    }
    outcome(2, &checks)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let ladder = [1.0, 3.0, 10.0, 30.0, 100.0];
    let rows = adiabatic_sweep(&ladder, |t| {
        fig1_experiment(&FigOneParams::with_duration(t), &FigOneConfig::default()).map(|r| r.deviation)
    })
    .unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let dev: Vec<f64> = rows.iter().map(|r| r.result).collect();
    let monotone = dev.windows(2).all(|w| w[1] <= w[0]);
    outcome(
        3,
        &[
            (dev[4] < 0.05, format!("deviation(T=100) = {:.3e} < 0.05", dev[4])),
            (dev[0] > 0.3, format!("deviation(T=1) = {:.4} > 0.3", dev[0])),
            (monotone, format!("monotone over {ladder:?}: {}", fmt_list(&dev))),
            (elapsed < 2.0, format!("runtime {elapsed:.2} s < 2 s")),
        ],
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = 2 + k % 5;
        let a = quasi_hermitian(&mut r, n, 1.0, 0.3);
        let b_herm = common::random_hermitian(&mut r, n, 1.0);
        let inv = adiametric::linalg::invert(&a.omega).unwrap();
        let schedule = HamiltonianSchedule::LinearRamp {
            h0: a.h.clone(),
            h1: &inv * b_herm * &a.omega,
            duration: 10.0,
        };
        let theta0 = random_positive(&mut r, n, 0.3);
        let config = FlowConfig {
            samples: 10,
            ..FlowConfig::default()
        };
        let traj = evolve_metric(&schedule, &theta0, 0.0, 10.0, &config).unwrap();
        worst = worst.max(traj.conservation_defect(&schedule, 200.0));
    }
    outcome(4, &[(worst < 1e-6, format!("max ||U^dag Theta U - Theta0|| = {worst:.2e} < 1e-6 (20 fixtures)"))])
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let n = 2 + k % 4;
        let q = quasi_hermitian(&mut r, n, 0.5, 0.3);
        let t = 0.5 / (&q.h - q.h.adjoint()).norm();
        let schedule = HamiltonianSchedule::Constant { h: q.h.clone() };
        let theta0 = random_positive(&mut r, n, 0.3);
        let solvers = [
            Solver::RungeKutta,
            Solver::PropagatorConjugation,
            Solver::Picard,
            Solver::NormalOrderedSeries,
        ];
        let trajs: Vec<_> = solvers
            .iter()
            .map(|&solver| {
                let config = FlowConfig {
                    solver,
                    integrator: IntegratorConfig::with_tolerances(1e-12, 1e-14),
                    samples: 5,
                    picard_order: 40,
                    series_order: 40,
                    steps_per_unit: 400.0,
                };
                evolve(&schedule, &theta0, 0.0, t, &config).unwrap()
            })
            .collect();
        for i in 0..trajs.len() {
            for j in (i + 1)..trajs.len() {
                worst = worst.max(trajs[i].max_distance(&trajs[j]).unwrap());
            }
        }
    }
    outcome(5, &[(worst < 1e-6, format!("max pairwise distance {worst:.2e} < 1e-6 (10 fixtures, 4 solvers)"))])
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let tight = IntegratorConfig::with_tolerances(1e-12, 1e-14);
    let grid = uniform_grid(0.0, 10.0, 41);
    let mut hs: Vec<ComplexMatrix> = (0..5).map(|k| quasi_hermitian(&mut r, 2 + k % 4, 1.0, 0.3).h).collect();
    hs.push(pauli_compose(&TwoLevelParams::new([0.0, 4.0, 0.0, 0.0], [0.0, 0.0, 0.0, 3.0])));
    let (mut diag_drift, mut off_drift): (f64, f64) = (0.0, 0.0);
    for h in &hs {
        let n = h.nrows();
        let system = biorthogonal_decompose(h).unwrap();
        let schedule = HamiltonianSchedule::Constant { h: h.clone() };
        let theta0 = random_positive(&mut r, n, 0.3);
        let traj = evolve_metric_at(&schedule, &theta0, 0.0, &grid[1..], &tight).unwrap();
        let first = eigenbasis_coefficients(&system, &traj.metrics[0]).coefficients;
        for m in &traj.metrics {
            let now = eigenbasis_coefficients(&system, m).coefficients;
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        diag_drift = diag_drift.max((now[(a, a)] - first[(a, a)]).norm());
                    } else {
                        off_drift = off_drift.max((now[(a, b)].norm() - first[(a, b)].norm()).abs());
                    }
                }
            }
        }
    }

    // Complex spectra: log-norm slope on [6, 10] against 2·max Im E.
    let complex_cases = [
        pauli_compose(&TwoLevelParams::new([0.0, 2.0, 0.0, 0.0], [0.0, 0.0, 0.0, 3.0])),
        with_spectrum(&mut r, &[c(1.0, 0.0), c(-0.5, 0.0), c(0.3, 0.6), c(0.3, -0.6)]),
    ];
    let late = uniform_grid(6.0, 10.0, 21);
    let mut worst_rate: f64 = 0.0;
    let mut rates = Vec::new();
    for h in &complex_cases {
        let n = h.nrows();
        let expected = 2.0 * biorthogonal_decompose(h).unwrap().max_imag();
        let schedule = HamiltonianSchedule::Constant { h: h.clone() };
        let traj = evolve_metric_at(&schedule, &identity(n), 0.0, &late, &tight).unwrap();
        let (xs, ys): (Vec<f64>, Vec<f64>) = traj
            .times
            .iter()
            .zip(&traj.metrics)
            .filter(|(t, _)| **t >= 6.0)
            .map(|(t, m)| (*t, m.norm().ln()))
            .unzip();
        let slope = least_squares_slope(&xs, &ys);
        let err = rel(slope, expected);
        worst_rate = worst_rate.max(err);
        rates.push(format!("{slope:.4}/{expected:.4}"));
    }
    outcome(
        6,
        &[
            (diag_drift < 1e-8, format!("diagonal drift {diag_drift:.2e} < 1e-8")),
            (off_drift < 1e-8, format!("off-diagonal modulus drift {off_drift:.2e} < 1e-8")),
            (
                worst_rate < 0.05,
                format!("growth rate vs 2 max Im E within {:.2}% ({})", 100.0 * worst_rate, rates.join(", ")),
            ),
        ],
    )
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_7() -> Outcome {
    let cfg = ScatteringConfig::default();
    let h0 = ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(4., 0.), c(4., 0.), c(0., 0.)]);
    let hi = ComplexMatrix::from_row_slice(2, 2, &[c(0., 1.5), c(0., 0.), c(0., 0.), c(0., -1.5)]);
    let zero = ComplexMatrix::zeros(2, 2);
    let free = adiametric::scattering::s_matrix(
        &HamiltonianSchedule::exponential(h0.clone(), zero, 0.1),
        &identity(2),
        &cfg,
    )
    .unwrap();
    let free_err = (&free.s - identity(2)).norm();

    let eps = [0.4, 0.2, 0.1, 0.05];
    let exp = epsilon_ladder(&h0, &hi, &eps, &identity(2), &cfg).unwrap();
    let smooth = smooth_ladder(&h0, &hi, &eps, 4.0, &identity(2), &cfg).unwrap();
    let defects: Vec<f64> = exp.rows.iter().map(|r| r.result.unitarity_defect).collect();
    let strictly = defects.windows(2).all(|w| w[1] < w[0]);
    let shape = (&exp.extrapolated_metric - &smooth.extrapolated_metric).norm();
    outcome(
        7,
        &[
            (free_err < 1e-12, format!("H_I = 0: ||S - I|| = {free_err:.1e}")),
            (strictly, format!("defects {} decreasing", fmt_list(&defects))),
            (exp.extrapolated_defect < 1e-3, format!("extrapolated defect {:.2e} < 1e-3", exp.extrapolated_defect)),
            (
                smooth.extrapolated_defect < 1e-3 && shape < 1e-3,
                format!(
                    "smooth switch: defect {:.2e}, metric difference {shape:.2e} < 1e-3",
                    smooth.extrapolated_defect
                ),
            ),
        ],
    )
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    // The two-level ramp, starting from its static metric.
    let ramp = FigOneParams::with_duration(10.0);
    let schedule = HamiltonianSchedule::TwoLevelFigOne(ramp);
    let theta0 = static_solution(&ramp.params_at(0.0), 1.0, 0.0).unwrap().to_matrix();
    let config = FlowConfig {
        samples: 60,
        ..FlowConfig::default()
    };
    let traj = evolve_metric(&schedule, &theta0, 0.0, 15.0, &config).unwrap();
    for s in hermitian_representation(&traj, &schedule).unwrap() {
        worst = worst.max(s.relative_defect);
        count += 1;
    }
    // Random quasi-Hermitian ramps from random positive metrics.
    let mut r = rng(8);
    for k in 0..3 {
        let n = 2 + k;
        let a = quasi_hermitian(&mut r, n, 1.0, 0.3);
        let b = quasi_hermitian(&mut r, n, 1.0, 0.3);
        let schedule = HamiltonianSchedule::LinearRamp {
            h0: a.h,
            h1: b.h,
            duration: 5.0,
        };
        let theta0 = random_positive(&mut r, n, 0.3);
        let config = FlowConfig {
            samples: 20,
            ..FlowConfig::default()
        };
        let traj = evolve_metric(&schedule, &theta0, 0.0, 5.0, &config).unwrap();
        for s in hermitian_representation(&traj, &schedule).unwrap() {
            worst = worst.max(s.relative_defect);
            count += 1;
        }
    }
    outcome(8, &[(worst < 1e-6, format!("max ||h - h^dag||/||h|| = {worst:.2e} < 1e-6 over {count} samples"))])
}

fn criterion_9() -> Outcome {
    let p = ExactPolynomial::p();
    let q = ExactPolynomial::q();
    let canonical = &q.star(&p) - &p.star(&q) == ExactPolynomial::constant(Exact::i());

    let mut r = rng(9);
    let mut assoc_fail = 0;
    for _ in 0..50 {
        let f: ExactPolynomial = random_polynomial(&mut r, 4);
        let g: ExactPolynomial = random_polynomial(&mut r, 4);
        let h: ExactPolynomial = random_polynomial(&mut r, 4);
        if f.star(&g).star(&h) != f.star(&g.star(&h)) {
            assoc_fail += 1;
        }
    }

    let h0 = harmonic_hamiltonian::<Exact>();
    let mut flow_fail = 0;
    let mut monomials = 0;
    for d in 0..=6u32 {
        for i in 0..=d {
            let m = ExactPolynomial::monomial(i, d - i, Exact::one());
            monomials += 1;
            if star_flow_rhs(&m, &h0) != harmonic_flow(&m) {
                flow_fail += 1;
            }
        }
    }

    let theta = random_polynomial::<Exact, _>(&mut r, 5).to_float();
    let exact_period = [PI, 2.0 * PI, 4.0 * PI]
        .iter()
        .all(|&t| harmonic_transport(&theta, t) == theta);
    let mut shift: f64 = 0.0;
    for _ in 0..20 {
        let t = r.gen_range(0.0..10.0);
        let a = harmonic_transport(&theta, t);
        let b = harmonic_transport(&theta, t + PI);
        shift = shift.max((&a - &b).max_abs());
    }
    outcome(
        9,
        &[
            (canonical, "q*p - p*q = i exactly".to_string()),
            (assoc_fail == 0, format!("associativity exact on 50 random triples ({assoc_fail} failures)")),
            (flow_fail == 0, format!("star flow = 2(q d_p - p d_q) on {monomials} monomials ({flow_fail} failures)")),
            (
                exact_period && shift < 1e-12,
                format!("transport(t + pi) = transport(t): exact at multiples of pi, max shift {shift:.1e} elsewhere"),
            ),
        ],
    )
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut two_level_worst: f64 = 0.0;
    let mut draws = vec![TwoLevelParams::new([0.0, 4.0, 0.0, 0.0], [0.0, 0.0, 0.0, 3.0])];
    for _ in 0..20 {
        // w ⊥ v, |w| < |v|.
        let v = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        let u = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let uv: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - uv / vv * b).collect();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = r.gen_range(0.1..0.9) * vv.sqrt() / wn;
        draws.push(TwoLevelParams::new(
            [r.gen_range(-1.0..1.0), v[0], v[1], v[2]],
            [0.0, w[0] * scale, w[1] * scale, w[2] * scale],
        ));
    }
    for p in &draws {
        let m = static_solution(p, r.gen_range(0.5..2.0), r.gen_range(-0.1..0.1)).unwrap();
        two_level_worst = two_level_worst.max(quasi_hermiticity_residual(&pauli_compose(p), &m.to_matrix()));
    }

    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = 2 + k % 7;
        let q = quasi_hermitian(&mut r, n, 1.0, 0.3);
        let system = biorthogonal_decompose(&q.h).unwrap();
        let weights: Vec<f64> = (0..n).map(|_| r.gen_range(0.5..2.0)).collect();
        let theta = static_metric(&system, &weights).unwrap();
        worst = worst.max(quasi_hermiticity_residual(&q.h, &theta));
    }
    outcome(
        10,
        &[
            (two_level_worst < 1e-10, format!("two-level closed form residual {two_level_worst:.2e} < 1e-10 ({} draws)", draws.len())),
            (worst < 1e-10, format!("constructed fixtures (dim 2..8) residual {worst:.2e} < 1e-10")),
        ],
    )
}

fn main() -> ExitCode {
    let outcomes = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_FAILURES.contains(&o.id);
        let note = match (o.pass, known) {
            (false, true) => " (known, see decision log)",
            (true, true) => " (listed as known failure but passed)",
            _ => "",
        };
        println!("criterion {:>2}: {verdict}{note} -- {}", o.id, o.detail);
        if o.pass == known {
            unexpected.push(o.id);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
