//! Built-in coefficient models.

use std::sync::Arc;

use crate::error::Result;
use crate::noise::NoiseSite;
use crate::path::{norm, CadlagPath};
use crate::solver::{CoefficientModel, DriftFn, NoiseFn, RateFunctions};

fn state(x: &CadlagPath, t: f64) -> Result<&[f64], String> {
    x.value_at(t).map_err(|e| e.to_string())
}

/// Geometric Brownian motion `dX = μ X dt + σ X dW` on one Wiener component,
/// started from the constant segment `x0` on `[-1, 0]`.
pub fn gbm(mu: f64, sigma: f64, x0: f64) -> Result<CoefficientModel> {
    jump_gbm(mu, sigma, 0.0, x0)
}

/// GBM with proportional jumps `X(t-) · jump` at every event of the
/// (compensated) Poisson part of the noise.
pub fn jump_gbm(mu: f64, sigma: f64, jump: f64, x0: f64) -> Result<CoefficientModel> {
    let z = CadlagPath::constant(-1.0, 0.0, &[x0])?;
    let drift: DriftFn = Arc::new(move |t, x, out| {
        out[0] = mu * state(x, t)?[0];
        Ok(())
    });
    let noise: NoiseFn = Arc::new(move |t, x, site, out| {
        let s = state(x, t)?[0];
        out[0] = match site {
            NoiseSite::Wiener(0) => sigma * s,
            NoiseSite::Wiener(_) => 0.0,
            NoiseSite::Jump(_) => jump * s,
        };
        Ok(())
    });
    let mean: DriftFn = Arc::new(move |t, x, out| {
        out[0] = jump * state(x, t)?[0];
        Ok(())
    });
    let lip = (2.0 * mu + sigma * sigma).max(0.0);
    let rates = RateFunctions {
        monotonicity: Some(Arc::new(move |_, _| lip)),
        coercivity: Some(Arc::new(move |_| lip)),
        local_bound: Some(Arc::new(move |r, _| mu.abs() * r + sigma * sigma * r * r)),
    };
    Ok(
        CoefficientModel::new(if jump == 0.0 { "gbm" } else { "jump-gbm" }, 1.0, z, drift, noise)?
            .with_jump_mean(mean)
            .with_rates(rates),
    )
}

/// Exact GBM value `x0 exp((μ - σ²/2) t + σ W(t))`.
pub fn gbm_exact(x0: f64, mu: f64, sigma: f64, t: f64, w: f64) -> f64 {
    x0 * ((mu - 0.5 * sigma * sigma) * t + sigma * w).exp()
}

/// Delay equation `x'(t) = -x(t - 1)` with `z ≡ 1` on `[-1, 0]`.
pub fn delay_ode() -> Result<CoefficientModel> {
    delay_ode_with_initial(CadlagPath::constant(-1.0, 0.0, &[1.0])?)
}

pub fn delay_ode_with_initial(z: CadlagPath) -> Result<CoefficientModel> {
    let drift: DriftFn = Arc::new(|t, x, out| {
        out[0] = -state(x, t - 1.0)?[0];
        Ok(())
    });
    let noise: NoiseFn = Arc::new(|_, _, _, out| {
        out[0] = 0.0;
        Ok(())
    });
    let zero: DriftFn = Arc::new(|_, _, out| {
        out[0] = 0.0;
        Ok(())
    });
    Ok(CoefficientModel::new("delay-ode", 1.0, z, drift, noise)?.with_jump_mean(zero))
}

/// Method-of-steps solution of `x'(t) = -x(t - 1)`, `z ≡ 1`, on `[0, 2]`.
pub fn delay_ode_exact(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t <= 1.0 {
        1.0 - t
    } else {
        0.5 * t * t - 2.0 * t + 1.5
    }
}

/// Mean-reverting model `f(t, x) = -x(t)`, `g ≡ σ` on every noise site.
///
/// `nu_total` is `ν_t(U)` for the spec the model is used with (Wiener count
/// plus jump rate bound); it enters the coercivity rate `K = σ² ν_t(U)`.
pub fn linear(sigma: f64, nu_total: f64, x0: f64) -> Result<CoefficientModel> {
    let z = CadlagPath::constant(-1.0, 0.0, &[x0])?;
    let drift: DriftFn = Arc::new(|t, x, out| {
        out[0] = -state(x, t)?[0];
        Ok(())
    });
    let noise: NoiseFn = Arc::new(move |_, _, _, out| {
        out[0] = sigma;
        Ok(())
    });
    let mean: DriftFn = Arc::new(move |_, _, out| {
        out[0] = sigma;
        Ok(())
    });
    let rates = RateFunctions {
        monotonicity: Some(Arc::new(|_, _| 2.0)),
        coercivity: Some(Arc::new(move |_| sigma * sigma * nu_total)),
        local_bound: Some(Arc::new(move |r, _| r + sigma * sigma * nu_total)),
    };
    Ok(CoefficientModel::new("linear", 1.0, z, drift, noise)?
        .with_jump_mean(mean)
        .with_rates(rates))
}

/// Superlinear drift `f(t, x) = |x(t)| x(t)` (quadratic growth) claiming
/// coercivity with `K ≡ 1`. The claim is false; this model exists to be
/// caught by the checker.
pub fn superlinear(x0: f64) -> Result<CoefficientModel> {
    let z = CadlagPath::constant(-1.0, 0.0, &[x0])?;
    let drift: DriftFn = Arc::new(|t, x, out| {
        let s = state(x, t)?;
        let r = norm(s);
        out.iter_mut().zip(s).for_each(|(o, v)| *o = r * v);
        Ok(())
    });
    let noise: NoiseFn = Arc::new(|_, _, _, out| {
        out.fill(0.0);
        Ok(())
    });
    let zero: DriftFn = Arc::new(|_, _, out| {
        out.fill(0.0);
        Ok(())
    });
    let rates = RateFunctions {
        monotonicity: Some(Arc::new(|r, _| 4.0 * r)),
        coercivity: Some(Arc::new(|_| 1.0)),
        local_bound: Some(Arc::new(|r, _| r * r)),
    };
    Ok(CoefficientModel::new("superlinear", 1.0, z, drift, noise)?
        .with_jump_mean(zero)
        .with_rates(rates))
}

/// `f ≡ 0`, `g ≡ 0` in dimension `value.len()` with constant initial segment.
pub fn zero(delay: f64, value: &[f64]) -> Result<CoefficientModel> {
    let z = CadlagPath::constant(-delay, 0.0, value)?;
    let drift: DriftFn = Arc::new(|_, _, out| {
        out.fill(0.0);
        Ok(())
    });
    let noise: NoiseFn = Arc::new(|_, _, _, out| {
        out.fill(0.0);
        Ok(())
    });
    let rates = RateFunctions {
        monotonicity: Some(Arc::new(|_, _| 0.0)),
        coercivity: Some(Arc::new(|_| 0.0)),
        local_bound: Some(Arc::new(|_, _| 0.0)),
    };
    Ok(CoefficientModel::new("zero", delay, z, drift.clone(), noise)?
        .with_jump_mean(drift)
        .with_rates(rates))
}
