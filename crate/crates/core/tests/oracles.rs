//! Checks against independently computed reference values.
#![allow(clippy::needless_range_loop)]

mod common;

use common::{dormand_prince, Dd};
use dyadic_core::diagnostics::{
    energy_rate_residual, energy_report, flux_profile, linear_flow_sup, smoothing_psi, tao_audit, tao_quantities,
    window_balance, CounterexampleG,
};
use dyadic_core::envelope::{
    bounding_sequence, count_adjacent_pairs, d_n_squared, envelope_dominates, select_ladder_parameters,
    special_subsequence, summability_report, verify_decay_ladder, weighted_tail_sum,
};
use dyadic_core::integrator::{compute_l, picard_local_solve};
use dyadic_core::shell_model::rhs_dyadic;
use dyadic_core::{integrate, GFamily, ModelParams, PhiSpec, ShellState, StepControl};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

fn params(beta: f64, n: usize, g: GFamily) -> ModelParams {
    ModelParams::new(beta, n, g, PhiSpec::constant(1.0)).unwrap()
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn bounding_sequence_matches_double_double() {
    let n = 40;
    let p = params(1.0, n, GFamily::Linear);
    let x: Vec<f64> = (1..=20).map(|i| (0.5f64).powi(i) * (1.0 + 0.1 * (i as f64).sin())).collect();
    let y = bounding_sequence(&x, &p).unwrap();

    let mut xs = x.clone();
    xs.resize(n, 0.0);
    let mut f = vec![Dd::ZERO; n + 1];
    for i in (0..n).rev() {
        f[i] = f[i + 1].add(Dd::from(xs[i]).mul(Dd::from(xs[i])));
    }
    let mut yy = vec![Dd::ZERO; n];
    yy[0] = f[0].mul(Dd::from(2.0));
    yy[1] = yy[0];
    for m in 3..=n {
        let z = Dd::from(0.5 * m as f64).mul(yy[m - 2].sqrt());
        let c = z.div(Dd::from(1.0).add(z));
        yy[m - 1] = c.mul(yy[m - 3]).add(f[m - 1]);
    }
    for m in 0..n {
        let want = yy[m].to_f64();
        assert!((y.y[m] - want).abs() <= 1e-13 * want, "y_{}: {} vs {}", m + 1, y.y[m], want);
    }
    assert!(y.y[6..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn first_terms_for_unit_mode() {
    let p = params(1.0, 6, GFamily::Constant(1.0));
    let y = bounding_sequence(&[1.0], &p).unwrap();
    // C_3(sqrt 2) with g = phi = 1 is (sqrt2/2) / (1 + sqrt2/2), so y_3 = 2 sqrt2 - 2
    assert_eq!((y.y(1), y.y(2)), (2.0, 2.0));
    assert!((y.y(3) - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-15);
}

fn exp_neg_rational(q: &BigRational, terms: usize) -> BigRational {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for k in 0..terms {
        sum += &term;
        term = -(term * q) / BigRational::from_integer(BigInt::from(k as i64 + 1));
    }
    sum
}

#[test]
fn l_matches_exact_rational_sum() {
    let p = params(1.0, 10, GFamily::Constant(1.0));
    let eta = rational(1, 100);
    let mut total = BigRational::zero();
    for n in 1..=10i64 {
        let k = BigRational::from_integer(BigInt::from(1i64 << n));
        let k_prev = BigRational::from_integer(BigInt::from(1i64 << (n - 1)));
        let one_minus = BigRational::one() - exp_neg_rational(&(&k * &eta), 120);
        let w = (&k * &k) / (&k_prev * &k_prev * &k_prev * &k_prev);
        total += w * &one_minus * &one_minus;
    }
    let want = total.to_f64().unwrap().sqrt();
    let got = compute_l(0.01, &p, 1.0).unwrap().truncated;
    assert!((got - want).abs() <= 1e-14 * want, "{got} vs {want}");
}

#[test]
fn integrate_matches_dormand_prince() {
    let n = 20;
    let p = params(1.0, n, GFamily::Constant(1.0));
    let x0 = ShellState::unit_mode(n, 1);
    let outputs = [0.25, 0.5, 0.75, 1.0];
    let ctrl = StepControl { rtol: 1e-8, atol: 1e-12, sample_dt: Some(0.25), ..StepControl::default() };
    let tr = integrate(&x0, &p, 1.0, &ctrl).unwrap();
    let reference = dormand_prince(
        |t, x, out| {
            let v = rhs_dyadic(&ShellState { t, x: x.to_vec() }, &p).unwrap();
            out.copy_from_slice(&v);
        },
        &x0.x,
        &outputs,
        1e-9,
        1e-13,
    );
    for (k, want) in reference.iter().enumerate() {
        let got = &tr.states[tr.sample_indices[k + 1]];
        let d: f64 = got.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(d < 1e-6, "t = {}: {d:e}", outputs[k]);
    }
}

#[test]
fn picard_matches_integrate() {
    let p = params(1.0, 10, GFamily::Constant(1.0));
    let x0 = ShellState::unit_mode(10, 1);
    let sol = picard_local_solve(&x0, &p, 1.0, 0.5, 1e-12).unwrap();
    assert!(sol.stayed_in_ball);
    assert!(sol.contraction_rate <= 0.55);
    let ctrl = StepControl {
        rtol: 1e-10,
        atol: 1e-14,
        dt_init: 1e-6,
        sample_dt: Some(sol.eta / 16.0),
        ..StepControl::default()
    };
    let tr = integrate(&x0, &p, sol.eta, &ctrl).unwrap();
    let stride = (sol.times.len() - 1) / 16;
    for (k, &j) in tr.sample_indices.iter().enumerate() {
        let d: f64 =
            tr.states[j].iter().zip(&sol.values[k * stride]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(d <= 10.0 * 1e-10, "t = {}: {d:e}", tr.times[j]);
    }
}

/// Least `n >= start` with `sum_{j=start}^n 1/j >= target`, exactly.
fn harmonic_crossing(start: i64, target: &BigRational) -> i64 {
    let mut acc = BigRational::zero();
    let mut n = start;
    loop {
        acc += rational(1, n);
        if &acc >= target {
            return n;
        }
        n += 1;
    }
}

#[test]
fn subsequence_matches_harmonic_sums() {
    let g: Vec<f64> = (1..=200).map(|n| n as f64).collect();
    let sub = special_subsequence(&g, 1, 1.0, 1.0, 4).unwrap();
    let mut want = vec![1i64];
    for k in 0..4 {
        let target = rational(1, 1 << k);
        let next = harmonic_crossing(want[k] + 2, &target);
        want.push(next);
    }
    assert_eq!(want[1], 7);
    assert_eq!(want[2], 14);
    let got: Vec<i64> = sub.indices.iter().map(|&n| n as i64).collect();
    assert_eq!(got, want);
}

#[test]
fn psi_matches_brute_force() {
    let p = params(1.0, 60, GFamily::Linear);
    let got = smoothing_psi(0.1, 1.0, 1.5, &p).unwrap();
    let mut best = f64::NEG_INFINITY;
    for n in 1..=10_000 {
        let n = n as f64;
        let rate = (n * std::f64::consts::LN_2 - n.ln()).exp();
        best = best.max(0.5 * n - rate * 0.1 / std::f64::consts::LN_2);
    }
    assert!(got.interior);
    assert!((got.log2_psi - best).abs() < 1e-12, "{} vs {best}", got.log2_psi);
    assert!((got.psi * got.phi - 1.0).abs() < 1e-15);
}

#[test]
fn linear_flow_smooths_when_ratio_vanishes() {
    for s in [1.0, 2.0] {
        for t in [0.01, 0.1, 1.0] {
            let mut values = Vec::new();
            for n in [40, 80] {
                let p = params(1.0, n, GFamily::Linear);
                let x: Vec<f64> = (1..=n).map(|i| 1.0 / i as f64).collect();
                let (v, argmax) = linear_flow_sup(&x, &p, t, s);
                assert!(argmax < n, "s {s} t {t} N {n}");
                values.push(v);
            }
            assert_eq!(values[0], values[1]);
        }
    }
}

#[test]
fn counterexample_witness_does_not_smooth() {
    let c = CounterexampleG::build(1.0, 2, 2).unwrap();
    assert_eq!(c.plateau_ratios(), vec![1.0, 1.0]);
    let w = c.witness(16);
    assert_eq!((w[1], w[7]), (1.0, 0.5));
    // at n_p the decay rate equals n_p, so 2^{s n_p} Z_{n_p}(t) grows with p when s ln 2 > t
    let logs = c.witness_log2_weights(1.0, 0.1);
    assert!(logs[1] > logs[0]);
    let p = ModelParams::new(1.0, 16, GFamily::Counterexample { n1: 2, levels: 2 }, PhiSpec::constant(1.0)).unwrap();
    assert_eq!(p.decay_rates()[7], 8.0);
}

#[test]
fn envelope_dominates_conjecture_run() {
    let p = params(1.0, 30, GFamily::Linear);
    let x0 = ShellState::unit_mode(30, 1);
    let tr = integrate(&x0, &p, 5.0, &StepControl::default()).unwrap();
    let y = bounding_sequence(&x0.x, &p).unwrap();
    let report = envelope_dominates(&tr, &y, 1e-8);
    assert!(report.holds(), "{:?}", report.violations.first());

    let mut shrunk = y.clone();
    shrunk.y.iter_mut().for_each(|v| *v *= 0.4);
    assert!(envelope_dominates(&tr, &shrunk, 1e-8).violation_count > 0);

    assert_eq!(d_n_squared(&tr, 2, 0.0).unwrap(), y.f[1]);
    let t_mid = tr.times[tr.len() / 2];
    assert!(d_n_squared(&tr, 1, t_mid).unwrap() <= 1.0 + 1e-6);
}

#[test]
fn single_mode_energy_decay() {
    let p = ModelParams::new(1.0, 6, GFamily::Constant(1.0), PhiSpec::constant(0.0)).unwrap();
    let ctrl = StepControl { sample_dt: Some(0.1), ..StepControl::default() };
    let tr = integrate(&ShellState::unit_mode(6, 1), &p, 1.0, &ctrl).unwrap();
    let r = energy_report(&tr);
    for (t, e) in r.times.iter().zip(&r.energy) {
        assert!((e - (-4.0 * t).exp()).abs() <= 1e-12);
    }
    assert!(r.equality);
    assert!(r.max_abs_residual <= r.tolerance);
}

#[test]
fn flux_and_window_balances_along_a_run() {
    let p = params(1.0, 12, GFamily::Linear);
    let x0 = ShellState::geometric(12, 0.5, 6);
    let ctrl = StepControl { dt_max: 2e-3, ..StepControl::default() };
    let tr = integrate(&x0, &p, 0.5, &ctrl).unwrap();
    let scale = (1..tr.len() - 1)
        .map(|j| flux_profile(&tr.shell_state(j), &p).unwrap().partial_energy_rate(3).abs())
        .fold(0.0, f64::max);
    let r = energy_rate_residual(&tr, 3).unwrap();
    let interior = r[1..r.len() - 1].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(interior <= 1e-4 * scale, "{interior:e} vs {scale:e}");

    let w = window_balance(&tr, 2, 3).unwrap();
    let interior = w[1..w.len() - 1].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(interior <= 1e-4 * scale, "{interior:e}");

    // the full window is the global balance: d/dt E / 2 = -sum (k/g) X^2
    let full = window_balance(&tr, 1, 11).unwrap();
    let e = energy_report(&tr);
    for j in 1..tr.len() - 1 {
        let diss: f64 = flux_profile(&tr.shell_state(j), &p).unwrap().dissipation.iter().sum();
        let fd = 0.5 * (e.energy[j + 1] - e.energy[j - 1]) / (tr.times[j + 1] - tr.times[j - 1]);
        assert!((full[j] - (fd + 0.5 * diss)).abs() <= 1e-3 * scale);
    }
    assert!(window_balance(&tr, 10, 5).is_err());
}

#[test]
fn tao_audit_along_a_run() {
    let p = params(1.0, 16, GFamily::Linear);
    let x0 = ShellState::geometric(16, 0.3, 8);
    let ctrl = StepControl { sample_dt: Some(0.05), ..StepControl::default() };
    let tr = integrate(&x0, &p, 1.0, &ctrl).unwrap();
    for &j in &tr.sample_indices {
        let q = tao_quantities(&tr.shell_state(j), &p, 1.0).unwrap();
        let audit = tao_audit(&q, &p);
        assert!(audit.holds(1e-12), "t = {}: {audit:?}", tr.times[j]);
    }
}

#[test]
fn decay_ladder_on_geometric_data() {
    let p = params(1.0, 60, GFamily::Linear);
    let x = ShellState::geometric(60, 0.5, 30);
    let y = bounding_sequence(&x.x, &p).unwrap();
    let lp = select_ladder_parameters(&y, 0.5).unwrap();
    let g = GFamily::Linear.table(1.0, 1 << 15).unwrap();
    let sub = special_subsequence(&g, lp.n0, lp.theta, 0.5, 1).unwrap();
    let report = verify_decay_ladder(&y, &sub).unwrap();
    assert!(report.holds(), "{report:?}");
    assert!(report.y_bounded_from_n0);

    let zero = bounding_sequence(&[], &p).unwrap();
    let report = verify_decay_ladder(&zero, &sub).unwrap();
    assert!(report.levels.iter().all(|l| l.sup_y == 0.0));
}

#[test]
fn summability_on_conjecture_scenario() {
    let p = params(1.0, 60, GFamily::Linear);
    let x = ShellState::geometric(60, 0.25, 30);
    let y = bounding_sequence(&x.x, &p).unwrap();
    let r = summability_report(&y, 0.5);
    assert!(r.last_quarter_share < 1e-2);
    assert!(r.c_decreasing);
    assert_eq!(weighted_tail_sum(&bounding_sequence(&[], &p).unwrap(), 0.5, 1), 0.0);
}

#[test]
fn adjacent_pairs_grow() {
    let g: Vec<f64> = (1..=100_000).map(|n| n as f64).collect();
    let c20 = count_adjacent_pairs(&special_subsequence(&g, 1, 1.0, 1.0, 20).unwrap());
    let c40 = count_adjacent_pairs(&special_subsequence(&g, 1, 1.0, 1.0, 40).unwrap());
    assert!(c20 >= 1 && c40 >= c20);
}
