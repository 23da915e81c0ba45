//! Euler scheme for path-dependent SDEs
//!
//! ```text
//! dX(t) = f(t, X) dt + ∫_U g(t, X, ξ) M̃(dt, dξ),   X = z on [-τ, 0]
//! ```
//!
//! On each cell `(k/n, (k+1)/n]` both coefficients are evaluated on the
//! history frozen at `k/n`. The cell is split at every noise grid point and
//! jump time; the drift and the jump compensator use the left endpoint of
//! each piece, Wiener increments enter at the grid point closing their cell,
//! and jumps enter at their exact times.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SdeError};
use crate::noise::{mark_mean, MartingaleMeasureSpec, NoiseRealization, NoiseSite, TimeGrid};
use crate::path::{norm, CadlagPath};
use crate::stats::{linear_fit, Estimate, Proportion, Z_TWO_SIDED_99};

/// Drift `f(t, history) -> R^d`, written into the output slice.
pub type DriftFn = Arc<dyn Fn(f64, &CadlagPath, &mut [f64]) -> Result<(), String> + Send + Sync>;
/// Noise coefficient `g(t, history, site) -> R^d`.
pub type NoiseFn = Arc<dyn Fn(f64, &CadlagPath, NoiseSite<'_>, &mut [f64]) -> Result<(), String> + Send + Sync>;
/// Rate depending on a radius and a time, e.g. `L_R(t)`.
pub type RadiusRate = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Rate depending on time only, e.g. `K(t)`.
pub type TimeRate = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Rate functions a model claims for its monotonicity, coercivity and local
/// boundedness conditions.
#[derive(Clone, Default)]
pub struct RateFunctions {
    /// `(R, t) -> L_R(t)`.
    pub monotonicity: Option<RadiusRate>,
    /// `t -> K(t)`.
    pub coercivity: Option<TimeRate>,
    /// `(R, t) -> K̃_R(t)`.
    pub local_bound: Option<RadiusRate>,
}

impl RateFunctions {
    pub fn describe(&self) -> String {
        let tag = |present: bool| if present { "supplied" } else { "absent" };
        format!(
            "L_R(t): {}, K(t): {}, K~_R(t): {}",
            tag(self.monotonicity.is_some()),
            tag(self.coercivity.is_some()),
            tag(self.local_bound.is_some())
        )
    }
}

/// Coefficients `(f, g)` with delay `τ` and initial segment `z` on `[-τ, 0]`.
///
/// Coefficients are called with the history frozen at the left end of the
/// current Euler cell, at the left endpoint of each piece of the refined
/// grid. On a frozen history `value_at(t)` equals the left limit at every
/// time inside the cell, so state-dependent coefficients should read the
/// current state through [`CadlagPath::value_at`].
#[derive(Clone)]
pub struct CoefficientModel {
    pub name: String,
    delay: f64,
    initial: CadlagPath,
    drift: DriftFn,
    noise: NoiseFn,
    jump_mean: Option<DriftFn>,
    pub rates: RateFunctions,
}

impl std::fmt::Debug for CoefficientModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientModel")
            .field("name", &self.name)
            .field("delay", &self.delay)
            .field("dim", &self.dim())
            .finish_non_exhaustive()
    }
}

impl CoefficientModel {
    pub fn new(
        name: impl Into<String>,
        delay: f64,
        initial: CadlagPath,
        drift: DriftFn,
        noise: NoiseFn,
    ) -> Result<Self> {
        if !(delay > 0.0) || !delay.is_finite() {
            return Err(SdeError::Argument(format!("delay must be positive, got {delay}")));
        }
        if (initial.start() + delay).abs() > 1e-12 || initial.end() != 0.0 {
            return Err(SdeError::Argument(format!(
                "initial segment must live on [-{delay}, 0], got [{}, {}]",
                initial.start(),
                initial.end()
            )));
        }
        if !initial.window_sup(initial.start(), 0.0)?.is_finite() {
            return Err(SdeError::Argument("initial segment has infinite sup norm".into()));
        }
        Ok(Self {
            name: name.into(),
            delay,
            initial,
            drift,
            noise,
            jump_mean: None,
            rates: RateFunctions::default(),
        })
    }

    /// Closed form of `∫ g(t, x, ξ) μ(dξ)` over the marks.
    pub fn with_jump_mean(mut self, mean: DriftFn) -> Self {
        self.jump_mean = Some(mean);
        self
    }

    pub fn with_rates(mut self, rates: RateFunctions) -> Self {
        self.rates = rates;
        self
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn initial(&self) -> &CadlagPath {
        &self.initial
    }

    pub fn has_jump_mean(&self) -> bool {
        self.jump_mean.is_some()
    }

    pub fn drift(&self, t: f64, x: &CadlagPath, out: &mut [f64]) -> Result<(), String> {
        (self.drift)(t, x, out)
    }

    pub fn noise(&self, t: f64, x: &CadlagPath, site: NoiseSite<'_>, out: &mut [f64]) -> Result<(), String> {
        (self.noise)(t, x, site, out)
    }

    /// `∫ g(t, x, ξ) μ(dξ)`, from the closed form when present.
    pub fn jump_mean(
        &self,
        t: f64,
        x: &CadlagPath,
        quad: Option<&crate::noise::MarkQuadrature>,
        out: &mut [f64],
    ) -> Result<(), String> {
        match (&self.jump_mean, quad) {
            (Some(m), _) => m(t, x, out),
            (None, Some(q)) => mark_mean(q, out, |xi, o| {
                self.noise(t, x, NoiseSite::Jump(xi), o).map_err(SdeError::Argument)
            })
            .map_err(|e| e.to_string()),
            (None, None) => Err("no compensator or quadrature for the jump mean".into()),
        }
    }
}

/// Grid anchor `κ(n, t)`: `k/n` for `t ∈ (k/n, (k+1)/n]`, and `t` itself on `[-τ, 0]`.
pub fn kappa(n: u32, t: f64, delay: f64) -> Result<f64> {
    if n == 0 {
        return Err(SdeError::Argument("n must be at least 1".into()));
    }
    if t < -delay || t.is_nan() {
        return Err(SdeError::Domain(format!("t = {t} precedes -τ = {}", -delay)));
    }
    if t <= 0.0 {
        return Ok(t);
    }
    let k = (t * n as f64).ceil() - 1.0;
    Ok(k / n as f64)
}

/// Anchor index `k` of the left-open cell containing `t > 0`, tolerant to
/// rounding at grid points.
fn cell_index(n: u32, t: f64) -> f64 {
    let x = t * n as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r - 1.0
    } else {
        x.floor()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Abort with [`SdeError::Exploded`] once `|X|` exceeds this bound.
    pub explosion_bound: Option<f64>,
    /// Replication index reported in errors.
    pub replication: u64,
}

/// Locates the grid index of every anchor `k/n < T`, plus the final grid index.
fn anchor_indices(grid: &[f64], n: u32) -> Result<Vec<usize>> {
    let horizon = *grid.last().expect("non-empty");
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let a = k as f64 / n as f64;
        if a >= horizon - 1e-12 * horizon.max(1.0) {
            break;
        }
        let tol = 1e-9 * a.max(1.0);
        let idx = grid.partition_point(|&s| s < a - tol);
        if idx >= grid.len() || (grid[idx] - a).abs() > tol {
            return Err(SdeError::Argument(format!(
                "noise grid does not contain the Euler anchor {k}/{n}"
            )));
        }
        out.push(idx);
        k += 1;
    }
    out.push(grid.len() - 1);
    Ok(out)
}

/// One Euler approximation `X^(n)` on `[-τ, T]` along a noise realization.
///
/// `n` is the number of Euler cells per unit time; every anchor `k/n` must be a
/// point of the realization's grid (any grid refining the Euler grid works,
/// which is how coarse and fine solves share one realization).
pub fn euler_solve(
    model: &CoefficientModel,
    spec: &MartingaleMeasureSpec,
    n: u32,
    noise: &NoiseRealization,
    options: SolveOptions,
) -> Result<CadlagPath> {
    if n == 0 {
        return Err(SdeError::Argument("n must be at least 1".into()));
    }
    noise.validate()?;
    if noise.wiener_count != spec.wiener_count {
        return Err(SdeError::Argument(format!(
            "realization has {} Wiener components, spec has {}",
            noise.wiener_count, spec.wiener_count
        )));
    }
    let d = model.dim();
    let horizon = noise.horizon();
    let anchors = anchor_indices(&noise.grid, n)?;
    let quad = if spec.has_jumps() && !model.has_jump_mean() {
        Some(spec.quadrature()?)
    } else {
        None
    };
    let rep = options.replication;
    let model_err = |t: f64, message: String| SdeError::Model {
        t,
        replication: rep,
        message,
    };
    let check = |t: f64, v: &[f64]| -> Result<()> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(model_err(t, "coefficient returned a non-finite value".into()));
        }
        Ok(())
    };

    let mut path = model.initial.clone();
    path.set_end(horizon)?;
    let mut state = path.terminal().to_vec();
    let mut buf = vec![0.0; d];
    let mut pending: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut e = 0usize;

    for cell in anchors.windows(2) {
        let frozen = &path;
        pending.clear();

        // f(u) Δ - Λ(u, v) ∫g(u, ξ)μ(dξ) over the piece (u, v]
        let advance = |state: &mut [f64], u: f64, v: f64, buf: &mut [f64]| -> Result<()> {
            model.drift(u, frozen, buf).map_err(|m| model_err(u, m))?;
            check(u, buf)?;
            for (s, f) in state.iter_mut().zip(buf.iter()) {
                *s += f * (v - u);
            }
            if spec.has_jumps() {
                let lambda = spec.intensity.integral(u, v);
                model
                    .jump_mean(u, frozen, quad.as_ref(), buf)
                    .map_err(|m| model_err(u, m))?;
                check(u, buf)?;
                for (s, m) in state.iter_mut().zip(buf.iter()) {
                    *s -= lambda * m;
                }
            }
            Ok(())
        };

        for j in cell[0]..cell[1] {
            let (s0, s1) = (noise.grid[j], noise.grid[j + 1]);
            let mut u = s0;
            while e < noise.event_count() && noise.event_times[e] < s1 {
                let te = noise.event_times[e];
                advance(&mut state, u, te, &mut buf)?;
                model
                    .noise(te, frozen, NoiseSite::Jump(noise.mark(e)), &mut buf)
                    .map_err(|m| model_err(te, m))?;
                check(te, &buf)?;
                state.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
                pending.push((te, state.clone()));
                u = te;
                e += 1;
            }
            advance(&mut state, u, s1, &mut buf)?;
            if e < noise.event_count() && noise.event_times[e] == s1 {
                model
                    .noise(s1, frozen, NoiseSite::Jump(noise.mark(e)), &mut buf)
                    .map_err(|m| model_err(s1, m))?;
                check(s1, &buf)?;
                state.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
                e += 1;
            }
            for (i, dw) in noise.cell_increments(j).iter().enumerate() {
                model
                    .noise(s0, frozen, NoiseSite::Wiener(i), &mut buf)
                    .map_err(|m| model_err(s0, m))?;
                check(s0, &buf)?;
                state.iter_mut().zip(&buf).for_each(|(s, b)| *s += b * dw);
            }
            pending.push((s1, state.clone()));
        }

        for (t, v) in pending.drain(..) {
            if let Some(bound) = options.explosion_bound {
                if norm(&v) > bound {
                    return Err(SdeError::Exploded {
                        t,
                        bound,
                        replication: rep,
                    });
                }
            }
            path.push(t, &v)?;
        }
    }
    Ok(path)
}

/// Samples noise on the Euler grid itself from stream `(seed, stream)` and solves.
pub fn euler_solve_sampled(
    model: &CoefficientModel,
    spec: &MartingaleMeasureSpec,
    n: u32,
    horizon: f64,
    seed: u64,
    stream: u64,
) -> Result<CadlagPath> {
    spec.validate(horizon)?;
    let grid = TimeGrid::uniform(n as usize, horizon)?;
    let noise = spec.sample(&grid, seed, stream)?;
    euler_solve(
        model,
        spec,
        n,
        &noise,
        SolveOptions {
            replication: stream,
            ..Default::default()
        },
    )
}

/// Right-continuous version of the remainder `p(t) = X(κ(n, t)) - X(t)`.
///
/// It vanishes on `[-τ, 0]` and right after every anchor `k/n`. The value at a
/// cell's closing point, `X(k/n) - X((k+1)/n)`, is not right-continuous and is
/// therefore only reported by [`sup_remainder`].
pub fn remainder_path(x: &CadlagPath, n: u32) -> Result<CadlagPath> {
    if n == 0 {
        return Err(SdeError::Argument("n must be at least 1".into()));
    }
    let d = x.dim();
    let mut values = Vec::with_capacity(x.segment_count() * d);
    for (t, v) in x.segments() {
        if t <= 0.0 {
            values.extend(std::iter::repeat_n(0.0, d));
            continue;
        }
        // anchor of (t, t + ε)
        let k = {
            let s = t * n as f64;
            let r = s.round();
            if (s - r).abs() <= 1e-9 * r.max(1.0) {
                r
            } else {
                s.floor()
            }
        };
        let anchor = x.value_at(k / n as f64)?;
        values.extend(anchor.iter().zip(v).map(|(a, b)| a - b));
    }
    CadlagPath::from_flat(d, x.breakpoints().to_vec(), values, x.end())
}

/// Solves once and returns the remainder path.
pub fn remainder(
    model: &CoefficientModel,
    spec: &MartingaleMeasureSpec,
    n: u32,
    horizon: f64,
    seed: u64,
    stream: u64,
) -> Result<CadlagPath> {
    remainder_path(&euler_solve_sampled(model, spec, n, horizon, seed, stream)?, n)
}

/// `sup_{t ∈ [0, T]} |p(t)|` including the closing point of every cell.
pub fn sup_remainder(x: &CadlagPath, n: u32) -> Result<f64> {
    let mut sup = 0.0f64;
    for (t, v) in x.segments() {
        if t <= 0.0 {
            continue;
        }
        let anchor = x.value_at(cell_index(n, t) / n as f64)?;
        let d = anchor.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        sup = sup.max(d.sqrt());
    }
    Ok(sup)
}

/// Runs `f(i)` for `i in 0..count` on the rayon pool, returning results in
/// index order; the first failing index wins.
pub fn replicate<T: Send>(count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = (0..count as u64).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

/// Estimate of `P(sup_{[0,T]} |X^(n) - X^(m)| > ε)` on a common probability space.
pub fn resolution_gap(
    model: &CoefficientModel,
    spec: &MartingaleMeasureSpec,
    n: u32,
    m: u32,
    horizon: f64,
    epsilon: f64,
    replications: usize,
    seed: u64,
) -> Result<Proportion> {
    if n == 0 || m == 0 || !m.is_multiple_of(n) {
        return Err(SdeError::Argument(format!(
            "m = {m} must be a positive multiple of n = {n}"
        )));
    }
    spec.validate(horizon)?;
    let grid = TimeGrid::uniform(m as usize, horizon)?;
    let exceed = replicate(replications, |rep| {
        let noise = spec.sample(&grid, seed, rep)?;
        let opts = SolveOptions {
            replication: rep,
            ..Default::default()
        };
        let fine = euler_solve(model, spec, m, &noise, opts)?;
        if n == m {
            return Ok(false);
        }
        let coarse = euler_solve(model, spec, n, &noise, opts)?;
        Ok(coarse.sup_distance(&fine, 0.0, horizon)? > epsilon)
    })?;
    Ok(Proportion::wilson(
        exceed.iter().filter(|&&b| b).count(),
        replications,
        Z_TWO_SIDED_99,
    ))
}

/// Strong errors `E|X^(n)(T) - X(T)|` at several resolutions.
#[derive(Debug, Clone)]
pub struct StrongErrorStudy {
    pub resolutions: Vec<u32>,
    pub errors: Vec<Estimate>,
    /// Slope of `ln error` against `ln n`.
    pub slope: f64,
}

/// Solves every resolution on a shared realization sampled on the finest
/// grid and compares the terminal value against `reference(noise)`.
pub fn strong_error_study(
    model: &CoefficientModel,
    spec: &MartingaleMeasureSpec,
    resolutions: &[u32],
    horizon: f64,
    replications: usize,
    seed: u64,
    reference: impl Fn(&NoiseRealization) -> Vec<f64> + Sync + Send,
) -> Result<StrongErrorStudy> {
    let finest = *resolutions
        .iter()
        .max()
        .ok_or_else(|| SdeError::Argument("no resolutions given".into()))?;
    if resolutions.iter().any(|&n| n == 0 || finest % n != 0) {
        return Err(SdeError::Argument("every resolution must divide the finest".into()));
    }
    spec.validate(horizon)?;
    let grid = TimeGrid::uniform(finest as usize, horizon)?;
    let per_rep = replicate(replications, |rep| {
        let noise = spec.sample(&grid, seed, rep)?;
        let exact = reference(&noise);
        resolutions
            .iter()
            .map(|&n| {
                let x = euler_solve(
                    model,
                    spec,
                    n,
                    &noise,
                    SolveOptions {
                        replication: rep,
                        ..Default::default()
                    },
                )?;
                Ok(norm(
                    &x.terminal().iter().zip(&exact).map(|(a, b)| a - b).collect::<Vec<_>>(),
                ))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let errors: Vec<Estimate> = (0..resolutions.len())
        .map(|i| {
            let col: Vec<f64> = per_rep.iter().map(|r| r[i]).collect();
            Estimate::from_samples(&col, Z_TWO_SIDED_99)
        })
        .collect();
    let xs: Vec<f64> = resolutions.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.mean.ln()).collect();
    let (slope, _) = linear_fit(&xs, &ys);
    Ok(StrongErrorStudy {
        resolutions: resolutions.to_vec(),
        errors,
        slope,
    })
}
