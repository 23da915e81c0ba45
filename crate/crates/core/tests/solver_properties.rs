use std::sync::{Arc, Mutex};

use sdelab::models;
use sdelab::noise::{MartingaleMeasureSpec, NoiseRealization, TimeGrid};
use sdelab::solver::{euler_solve, kappa, remainder_path, sup_remainder, CoefficientModel, SolveOptions};
use sdelab::stats::{Estimate, Z_TWO_SIDED_99};
use sdelab::CadlagPath;

/// Drift `-x(t)` that records, for each call, the evaluation time and the
/// last breakpoint of the history it was handed.
fn spy_model(log: Arc<Mutex<Vec<(f64, f64)>>>) -> CoefficientModel {
    let z = CadlagPath::constant(-1.0, 0.0, &[1.0]).unwrap();
    CoefficientModel::new(
        "spy",
        1.0,
        z,
        Arc::new(move |t, x, out| {
            log.lock().unwrap().push((t, *x.breakpoints().last().unwrap()));
            out[0] = -x.value_at(t).map_err(|e| e.to_string())?[0];
            Ok(())
        }),
        Arc::new(|t, x, _, out| {
            out[0] = 0.3 * x.value_at(t).map_err(|e| e.to_string())?[0];
            Ok(())
        }),
    )
    .unwrap()
    .with_jump_mean(Arc::new(|t, x, out| {
        out[0] = 0.3 * x.value_at(t).map_err(|e| e.to_string())?[0];
        Ok(())
    }))
}

#[test]
fn coefficients_only_see_the_frozen_history() {
    let log = Arc::new(Mutex::new(Vec::new()));
    let model = spy_model(log.clone());
    let spec = MartingaleMeasureSpec::poisson(1, 4.0);
    let n = 8;
    let grid = TimeGrid::uniform(32, 1.0).unwrap();
    let noise = spec.sample(&grid, 9, 0).unwrap();
    assert!(noise.event_count() > 0);
    euler_solve(&model, &spec, n, &noise, SolveOptions::default()).unwrap();
    let log = log.lock().unwrap();
    assert!(!log.is_empty());
    for &(t, last) in log.iter() {
        let anchor = (t * n as f64 + 1e-9).floor() / n as f64;
        assert!(
            last <= anchor + 1e-12,
            "at t = {t} the history reaches {last} > {anchor}"
        );
    }
}

#[test]
fn solution_is_adapted_to_the_noise() {
    let model = models::gbm(0.1, 0.4, 1.0).unwrap();
    let spec = MartingaleMeasureSpec::wiener(1);
    let grid = TimeGrid::uniform(16, 1.0).unwrap();
    let a = spec.sample(&grid, 1, 0).unwrap();
    let mut b = a.clone();
    // change the noise after t = 0.5 only
    for j in 8..16 {
        b.increments[j] = -a.increments[j] + 0.1;
    }
    let xa = euler_solve(&model, &spec, 16, &a, SolveOptions::default()).unwrap();
    let xb = euler_solve(&model, &spec, 16, &b, SolveOptions::default()).unwrap();
    assert_eq!(xa.restrict(0.5).unwrap(), xb.restrict(0.5).unwrap());
    assert_ne!(xa.terminal(), xb.terminal());
}

#[test]
fn coarse_solve_on_fine_noise_matches_summed_increments() {
    let model = models::gbm(0.05, 0.3, 2.0).unwrap();
    let spec = MartingaleMeasureSpec::wiener(1);
    let fine = spec.sample(&TimeGrid::uniform(64, 1.0).unwrap(), 2, 0).unwrap();
    let coarse = NoiseRealization {
        grid: TimeGrid::uniform(8, 1.0).unwrap().times().to_vec(),
        wiener_count: 1,
        increments: fine.increments.chunks(8).map(|c| c.iter().sum()).collect(),
        mark_dim: 0,
        event_times: vec![],
        event_marks: vec![],
    };
    let on_fine = euler_solve(&model, &spec, 8, &fine, SolveOptions::default()).unwrap();
    let on_coarse = euler_solve(&model, &spec, 8, &coarse, SolveOptions::default()).unwrap();
    for k in 0..=8 {
        let t = k as f64 / 8.0;
        let (u, v) = (on_fine.value_at(t).unwrap()[0], on_coarse.value_at(t).unwrap()[0]);
        assert!((u - v).abs() < 1e-12 * u.abs().max(1.0), "t = {t}: {u} vs {v}");
    }
}

#[test]
fn jump_gbm_mean_follows_the_drift() {
    let (mu, n) = (0.2, 16u32);
    let model = models::jump_gbm(mu, 0.3, 0.4, 1.0).unwrap();
    let spec = MartingaleMeasureSpec::poisson(1, 1.5);
    let grid = TimeGrid::uniform(n as usize, 1.0).unwrap();
    let terminal: Vec<f64> = (0..20_000)
        .map(|r| {
            let noise = spec.sample(&grid, 3, r).unwrap();
            euler_solve(&model, &spec, n, &noise, SolveOptions::default())
                .unwrap()
                .terminal()[0]
        })
        .collect();
    // the compensated jumps and Wiener increments are centred given the past
    let oracle = (1.0 + mu / n as f64).powi(n as i32);
    assert!(Estimate::from_samples(&terminal, Z_TWO_SIDED_99).within_sigmas(oracle, 4.0));
}

#[test]
fn remainder_vanishes_on_anchors_and_is_bounded_by_cell_oscillation() {
    let model = models::gbm(0.0, 0.5, 1.0).unwrap();
    let spec = MartingaleMeasureSpec::poisson(1, 3.0);
    let grid = TimeGrid::uniform(32, 1.0).unwrap();
    let noise = spec.sample(&grid, 5, 0).unwrap();
    let n = 4;
    let x = euler_solve(&model, &spec, n, &noise, SolveOptions::default()).unwrap();
    let p = remainder_path(&x, n).unwrap();
    for k in 0..n {
        assert_eq!(p.value_at(k as f64 / n as f64).unwrap(), [0.0]);
    }
    for (t, v) in p.segments().filter(|(t, _)| *t > 0.0) {
        let anchor = kappa(n, t + 1e-12, 1.0).unwrap();
        let expected = x.value_at(anchor).unwrap()[0] - x.value_at(t).unwrap()[0];
        assert!((v[0] - expected).abs() < 1e-12);
    }
    assert!(sup_remainder(&x, n).unwrap() >= p.window_sup(0.0, 1.0).unwrap());
}
