use sdelab::noise::{
    empirical_covariation, indicator, integrate, Intensity, MarkDistribution, MarkRegion, MarkSet,
    MartingaleMeasureSpec, TimeGrid,
};
use sdelab::stats::{Estimate, VarianceEstimate, Z_TWO_SIDED_99};
use sdelab::CadlagPath;

const REPS: u64 = 40_000;

fn counts(spec: &MartingaleMeasureSpec, seed: u64) -> Vec<f64> {
    let grid = TimeGrid::uniform(4, 1.0).unwrap();
    (0..REPS)
        .map(|r| spec.sample(&grid, seed, r).unwrap().event_count() as f64)
        .collect()
}

#[test]
fn constant_rate_event_count_is_poisson() {
    let c = counts(&MartingaleMeasureSpec::poisson(0, 2.0), 1);
    assert!(Estimate::from_samples(&c, Z_TWO_SIDED_99).within_sigmas(2.0, 4.0));
    assert!(VarianceEstimate::from_samples(&c).within_sigmas(2.0, 4.0));
}

#[test]
fn thinned_linear_rate_has_integrated_mean() {
    let spec = MartingaleMeasureSpec::wiener(0).with_intensity(
        Intensity::Linear {
            intercept: 0.0,
            slope: 2.0,
        },
        2.0,
    );
    // ∫_0^1 2t dt = 1
    let c = counts(&spec, 2);
    assert!(Estimate::from_samples(&c, Z_TWO_SIDED_99).within_sigmas(1.0, 4.0));
}

#[test]
fn event_times_are_increasing_inside_the_horizon() {
    let spec = MartingaleMeasureSpec::poisson(2, 5.0);
    let grid = TimeGrid::uniform(10, 2.5).unwrap();
    for r in 0..200 {
        let real = spec.sample(&grid, 3, r).unwrap();
        assert!(real.event_times.windows(2).all(|w| w[0] < w[1]));
        assert!(real.event_times.iter().all(|&t| t > 0.0 && t <= 2.5));
        assert_eq!(real.increments.len(), real.cells() * 2);
    }
}

#[test]
fn ito_isometry_for_a_time_dependent_integrand() {
    let spec = MartingaleMeasureSpec::wiener(1);
    let grid = TimeGrid::uniform(16, 1.0).unwrap();
    // g(s) = s evaluated at left endpoints: E[I²] = Σ s_j² h
    let oracle: f64 = (0..16).map(|j| (j as f64 / 16.0).powi(2) / 16.0).sum();
    let terminal: Vec<f64> = (0..REPS)
        .map(|r| {
            let real = spec.sample(&grid, 4, r).unwrap();
            integrate(1, |s, _, o| o[0] = s, &spec, &real, None).unwrap().terminal()[0]
        })
        .collect();
    let squares: Vec<f64> = terminal.iter().map(|v| v * v).collect();
    assert!(Estimate::from_samples(&terminal, Z_TWO_SIDED_99).within_sigmas(0.0, 4.0));
    assert!(Estimate::from_samples(&squares, Z_TWO_SIDED_99).within_sigmas(oracle, 4.0));
}

#[test]
fn compensated_poisson_has_unit_variance() {
    let spec = MartingaleMeasureSpec::poisson(0, 1.0);
    let grid = TimeGrid::uniform(8, 1.0).unwrap();
    let all = MarkSet::marks(MarkRegion::All);
    let paths: Vec<CadlagPath> = (0..REPS)
        .map(|r| integrate(1, indicator(&all), &spec, &spec.sample(&grid, 5, r).unwrap(), None).unwrap())
        .collect();
    let cov = empirical_covariation(&paths, &paths).unwrap();
    assert!(cov.within_sigmas(1.0, 4.0));
    let t: Vec<f64> = paths.iter().map(|p| p.terminal()[0]).collect();
    assert!(Estimate::from_samples(&t, Z_TWO_SIDED_99).within_sigmas(0.0, 4.0));
}

#[test]
fn categorical_marks_follow_their_weights() {
    let spec = MartingaleMeasureSpec::poisson(0, 3.0).with_marks(MarkDistribution::Categorical {
        weights: vec![0.2, 0.5, 0.3],
    });
    let grid = TimeGrid::uniform(1, 1.0).unwrap();
    let mut hits = [0usize; 3];
    let mut total = 0usize;
    for r in 0..5_000 {
        let real = spec.sample(&grid, 6, r).unwrap();
        for e in 0..real.event_count() {
            hits[real.mark(e)[0] as usize] += 1;
            total += 1;
        }
    }
    for (h, w) in hits.iter().zip([0.2, 0.5, 0.3]) {
        let p = *h as f64 / total as f64;
        let se = (w * (1.0 - w) / total as f64).sqrt();
        assert!((p - w).abs() < 4.0 * se, "{p} vs {w}");
    }
}

#[test]
fn disjoint_label_sets_are_orthogonal() {
    let spec = MartingaleMeasureSpec::poisson(1, 2.0).with_marks(MarkDistribution::Categorical {
        weights: vec![0.5, 0.5],
    });
    let grid = TimeGrid::uniform(4, 1.0).unwrap();
    let a = MarkSet {
        wiener: vec![0],
        marks: MarkRegion::Labels(vec![0]),
    };
    let b = MarkSet::marks(MarkRegion::Labels(vec![1]));
    let (mut pa, mut pb) = (Vec::new(), Vec::new());
    for r in 0..REPS {
        let real = spec.sample(&grid, 7, r).unwrap();
        pa.push(integrate(1, indicator(&a), &spec, &real, None).unwrap());
        pb.push(integrate(1, indicator(&b), &spec, &real, None).unwrap());
    }
    assert!(empirical_covariation(&pa, &pb).unwrap().within_sigmas(0.0, 4.0));
    // ν(A) = 1 + 2 * 0.5 per unit time
    assert!(empirical_covariation(&pa, &pa).unwrap().within_sigmas(2.0, 4.0));
    assert!(empirical_covariation(&pa, &pb[..3]).is_err());
    assert!(empirical_covariation(&[], &[]).is_err());
}
