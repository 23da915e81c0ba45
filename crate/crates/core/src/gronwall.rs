//! Lenglart domination and stochastic Gronwall bounds, checked by Monte Carlo.
//!
//! For a non-negative adapted right-continuous `X` satisfying
//!
//! ```text
//! X(t) <= ∫_0^t X*(u-) dA(u) + M(t) + H(t),     X*(u) = sup_{r <= u} X(r)
//! ```
//!
//! with `A` deterministic non-decreasing, `M` a local martingale and `H`
//! non-decreasing, the p-th moment of `X*(T)` is bounded by
//! [`gronwall_bound`] for `p ∈ (0, 1)`. The three variants differ in what is
//! assumed about `H` and `M`:
//!
//! - `a`: `H` predictable, bound `(c_p/p) E[H(T)^p] exp(c_p^{1/p} A(T))`;
//! - `b`: `M` without negative jumps, bound `((c_p+1)/p) E[H(T)^p] exp((c_p+1)^{1/p} A(T))`;
//! - `c`: no extra assumption, bound `(c_p/p) (E[H(T)])^p exp(c_p^{1/p} A(T))`;
//!
//! where `c_p = p^{-p} / (1 - p)`.
//!
//! Conditional expectations given `F_0` reduce to plain expectations here:
//! every shipped experiment starts from deterministic data.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdeError};
use crate::models;
use crate::noise::MartingaleMeasureSpec;
use crate::path::CadlagPath;
use crate::rng::stream_rng;
use crate::solver::{euler_solve_sampled, replicate};
use crate::stats::{Estimate, Z_ONE_SIDED_99};

const ASSUMPTION_TOL: f64 = 1e-9;

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SdeError::Domain(format!("p must lie in (0,1), got {p}")));
    }
    Ok(())
}

/// `c_p = p^{-p} / (1 - p)`.
pub fn c_p(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(p.powf(-p) / (1.0 - p))
}

/// The objective `(1-p)^{-1} λ^{1-p} + λ^{-p}` whose minimum over `λ > 0` is `c_p`.
pub fn lenglart_objective(p: f64, lambda: f64) -> f64 {
    lambda.powf(1.0 - p) / (1.0 - p) + lambda.powf(-p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    A,
    B,
    C,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "a",
            Variant::B => "b",
            Variant::C => "c",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = SdeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Variant::A),
            "b" => Ok(Variant::B),
            "c" => Ok(Variant::C),
            other => Err(SdeError::Argument(format!(
                "unknown Gronwall variant `{other}` (expected a, b or c)"
            ))),
        }
    }
}

/// Right-hand side of the Gronwall estimate. `h_stat` is `E[H(T)^p]` for
/// variants `a` and `b`, and `E[H(T)]` for variant `c`.
pub fn gronwall_bound(variant: Variant, p: f64, a_t: f64, h_stat: f64) -> Result<f64> {
    let cp = c_p(p)?;
    Ok(match variant {
        Variant::A => cp / p * h_stat * (cp.powf(1.0 / p) * a_t).exp(),
        Variant::B => (cp + 1.0) / p * h_stat * ((cp + 1.0).powf(1.0 / p) * a_t).exp(),
        Variant::C => cp / p * h_stat.powf(p) * (cp.powf(1.0 / p) * a_t).exp(),
    })
}

/// Deterministic non-decreasing integrator `A` with `A(0) = 0`.
pub type Integrator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Simulated `(X, M, H)` triples sharing a deterministic integrator `A`.
#[derive(Clone)]
pub struct GronwallEnsemble {
    x: Vec<CadlagPath>,
    m: Vec<CadlagPath>,
    h: Vec<CadlagPath>,
    a: Integrator,
    horizon: f64,
    h_predictable: bool,
    seed: u64,
}

impl fmt::Debug for GronwallEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GronwallEnsemble")
            .field("replications", &self.x.len())
            .field("horizon", &self.horizon)
            .field("h_predictable", &self.h_predictable)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

/// `∫_0^t X*(u-) dA(u)` at every point of `times` (sorted, starting at 0),
/// exact for piecewise-constant `X` when `times` contains X's breakpoints.
fn stieltjes_integral(x: &CadlagPath, a: &Integrator, times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut running_sup = 0.0f64;
    let mut acc = 0.0;
    for (l, &t) in times.iter().enumerate() {
        if l > 0 {
            acc += running_sup * (a(t) - a(times[l - 1]));
        }
        out.push(acc);
        running_sup = running_sup.max(x.value_at(t).map(|v| v[0].abs()).unwrap_or(0.0));
    }
    out
}

impl GronwallEnsemble {
    /// Validates the ensemble; fails with [`SdeError::Rejected`] if any path
    /// breaks the sign, monotonicity or domination assumptions.
    ///
    /// `h_predictable` is a construction-time certificate: set it only when
    /// every `H` is built from deterministic or left-continuous data.
    pub fn new(
        x: Vec<CadlagPath>,
        m: Vec<CadlagPath>,
        h: Vec<CadlagPath>,
        a: Integrator,
        horizon: f64,
        h_predictable: bool,
        seed: u64,
    ) -> Result<Self> {
        if x.len() != m.len() || x.len() != h.len() {
            return Err(SdeError::Argument("X, M and H ensembles differ in size".into()));
        }
        if !(horizon > 0.0) {
            return Err(SdeError::Argument("horizon must be positive".into()));
        }
        let reject = |rep: usize, msg: String| SdeError::Rejected(format!("replication {rep}: {msg}"));
        if a(0.0) != 0.0 {
            return Err(SdeError::Rejected(format!("A(0) = {} is not 0", a(0.0))));
        }
        for (rep, ((xp, mp), hp)) in x.iter().zip(&m).zip(&h).enumerate() {
            for p in [xp, mp, hp] {
                if p.dim() != 1 || p.start() != 0.0 || p.end() < horizon {
                    return Err(reject(rep, "paths must be scalar and cover [0, T]".into()));
                }
            }
            if let Some((t, v)) = xp.segments().find(|(t, v)| *t <= horizon && v[0] < 0.0) {
                return Err(reject(rep, format!("X({t}) = {} is negative", v[0])));
            }
            if mp.segment(0)[0] != 0.0 {
                return Err(reject(rep, "M(0) is not 0".into()));
            }
            if hp.segment(0)[0] < 0.0 {
                return Err(reject(rep, "H(0) is negative".into()));
            }
            if let Some(w) = hp
                .segments()
                .collect::<Vec<_>>()
                .windows(2)
                .find(|w| w[1].1[0] < w[0].1[0])
            {
                return Err(reject(rep, format!("H decreases at t = {}", w[1].0)));
            }
            let times = CadlagPath::merged_breakpoints(&[xp, mp, hp], 0.0, horizon);
            if times.windows(2).any(|w| a(w[1]) < a(w[0])) {
                return Err(SdeError::Rejected("A is not non-decreasing".into()));
            }
            let integral = stieltjes_integral(xp, &a, &times);
            for (t, i) in times.iter().zip(integral) {
                let lhs = xp.value_at(*t)?[0];
                let rhs = i + mp.value_at(*t)?[0] + hp.value_at(*t)?[0];
                if lhs > rhs + ASSUMPTION_TOL * (1.0 + rhs.abs()) {
                    return Err(reject(rep, format!("X({t}) = {lhs} exceeds ∫X*dA + M + H = {rhs}")));
                }
            }
        }
        Ok(Self {
            x,
            m,
            h,
            a,
            horizon,
            h_predictable,
            seed,
        })
    }

    pub fn replications(&self) -> usize {
        self.x.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn h_predictable(&self) -> bool {
        self.h_predictable
    }

    pub fn integrator_at_horizon(&self) -> f64 {
        (self.a)(self.horizon)
    }

    pub fn x_paths(&self) -> &[CadlagPath] {
        &self.x
    }

    pub fn m_paths(&self) -> &[CadlagPath] {
        &self.m
    }

    pub fn h_paths(&self) -> &[CadlagPath] {
        &self.h
    }

    /// Whether every `M` path has only non-negative jumps at its breakpoints.
    pub fn m_without_negative_jumps(&self) -> bool {
        self.m.iter().all(|mp| {
            mp.segments()
                .collect::<Vec<_>>()
                .windows(2)
                .all(|w| w[1].1[0] >= w[0].1[0])
        })
    }

    /// The ensemble with `X`, `M` and `H` multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let scale =
            |ps: &[CadlagPath]| -> Vec<CadlagPath> { ps.iter().map(|p| p.map(1, |_, v, o| o[0] = c * v[0])).collect() };
        Self::new(
            scale(&self.x),
            scale(&self.m),
            scale(&self.h),
            self.a.clone(),
            self.horizon,
            self.h_predictable,
            self.seed,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub variant: Variant,
    pub p: f64,
    /// Monte Carlo estimate of `E[X*(T)^p]`.
    pub lhs: f64,
    /// One-sided 99% interval `[mean - z se, mean + z se]`.
    pub lhs_ci: [f64; 2],
    pub rhs: f64,
    pub verdict: Verdict,
    pub replications: usize,
    pub seed: u64,
    pub a_t: f64,
    pub h_stat: f64,
}

/// Checks the variant's certificates, then evaluates the estimate.
pub fn verify_gronwall(ens: &GronwallEnsemble, variant: Variant, p: f64) -> Result<VerificationReport> {
    match variant {
        Variant::A if !ens.h_predictable => {
            return Err(SdeError::Precondition("variant a needs H certified predictable".into()))
        }
        Variant::B if !ens.m_without_negative_jumps() => {
            return Err(SdeError::Precondition(
                "variant b needs M without negative jumps".into(),
            ))
        }
        _ => {}
    }
    evaluate_gronwall(ens, variant, p)
}

/// Compares `E[X*(T)^p]` with the variant's bound without checking the
/// predictability or jump certificates. Use this to exhibit failures of a
/// bound outside its hypotheses.
pub fn evaluate_gronwall(ens: &GronwallEnsemble, variant: Variant, p: f64) -> Result<VerificationReport> {
    check_exponent(p)?;
    if ens.replications() == 0 {
        return Err(SdeError::Argument("empty ensemble".into()));
    }
    let t = ens.horizon;
    let lhs_samples: Vec<f64> = ens
        .x
        .iter()
        .map(|x| x.window_sup(0.0, t).map(|s| s.powf(p)))
        .collect::<Result<_>>()?;
    let h_t: Vec<f64> = ens
        .h
        .iter()
        .map(|h| h.value_at(t).map(|v| v[0]))
        .collect::<Result<_>>()?;
    let n = h_t.len() as f64;
    let h_stat = match variant {
        Variant::A | Variant::B => h_t.iter().map(|h| h.powf(p)).sum::<f64>() / n,
        Variant::C => h_t.iter().sum::<f64>() / n,
    };
    let a_t = ens.integrator_at_horizon();
    let rhs = gronwall_bound(variant, p, a_t, h_stat)?;
    let lhs = Estimate::from_samples(&lhs_samples, Z_ONE_SIDED_99);
    Ok(VerificationReport {
        variant,
        p,
        lhs: lhs.mean,
        lhs_ci: [lhs.lower, lhs.upper],
        rhs,
        verdict: if lhs.upper <= rhs {
            Verdict::Holds
        } else {
            Verdict::Violated
        },
        replications: ens.replications(),
        seed: ens.seed,
        a_t,
        h_stat,
    })
}

/// Certified ensemble derived from the Euler scheme for GBM.
///
/// With `Y` the Euler approximation of `dY = μY dt + σY dW` on a grid of
/// width `h`, `X = Y²` satisfies `X_{j+1} = X_j + K h X_j + ΔM_j` with
/// `K = 2μ + σ² + μ²h` and a martingale increment `ΔM_j`. Taking
/// `A(t) = K⁺ t`, `M` the sum of the `ΔM_j`, and the deterministic
/// `H(t) = X(0) + K⁺ κ(t)` (the coercivity bound's additive term) gives an
/// ensemble meeting the domination assumption path by path.
pub fn gbm_square_ensemble(
    mu: f64,
    sigma: f64,
    x0: f64,
    n: u32,
    horizon: f64,
    replications: usize,
    seed: u64,
) -> Result<GronwallEnsemble> {
    let model = models::gbm(mu, sigma, x0)?;
    let spec = MartingaleMeasureSpec::wiener(1);
    let h = 1.0 / n as f64;
    let k = 2.0 * mu + sigma * sigma + mu * mu * h;
    let rate = k.max(0.0);
    let triples = replicate(replications, |rep| {
        let y = euler_solve_sampled(&model, &spec, n, horizon, seed, rep)?;
        let times: Vec<f64> = std::iter::once(0.0)
            .chain(y.breakpoints().iter().copied().filter(|&t| t > 0.0))
            .collect();
        let xs: Vec<f64> = times
            .iter()
            .map(|&t| y.value_at(t).map(|v| v[0] * v[0]))
            .collect::<Result<_>>()?;
        let mut ms = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        ms.push(0.0);
        for j in 1..xs.len() {
            let dt = times[j] - times[j - 1];
            acc += xs[j] - xs[j - 1] - k * dt * xs[j - 1];
            ms.push(acc);
        }
        let hs: Vec<f64> = times.iter().map(|&t| xs[0] + rate * t).collect();
        Ok((
            CadlagPath::scalar(times.clone(), xs, horizon)?,
            CadlagPath::scalar(times.clone(), ms, horizon)?,
            CadlagPath::scalar(times, hs, horizon)?,
        ))
    })?;
    let (mut x, mut m, mut hp) = (Vec::new(), Vec::new(), Vec::new());
    for (a, b, c) in triples {
        x.push(a);
        m.push(b);
        hp.push(c);
    }
    GronwallEnsemble::new(x, m, hp, Arc::new(move |t| rate * t), horizon, true, seed)
}

/// The two values of the counterexample variable `S_{q,α}`:
/// `(1-q)^{1-1/α}/q` with probability `q` and `-(1-q)^{-1/α}` otherwise.
pub fn counterexample_values(q: f64, alpha: f64) -> (f64, f64) {
    ((1.0 - q).powf(1.0 - 1.0 / alpha) / q, -(1.0 - q).powf(-1.0 / alpha))
}

/// `E[(S_{q,α})_+^p] = (1-q)^{p(1-1/α)} q^{1-p}`.
pub fn counterexample_lhs_exact(q: f64, alpha: f64, p: f64) -> f64 {
    (1.0 - q).powf(p * (1.0 - 1.0 / alpha)) * q.powf(1.0 - p)
}

/// `E[(S_{q,α})_-^α] = (1-q) ((1-q)^{-1/α})^α`, which is 1.
pub fn counterexample_h_moment_exact(q: f64, alpha: f64) -> f64 {
    (1.0 - q) * (1.0 - q).powf(-1.0 / alpha).powf(alpha)
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(SdeError::Domain(format!("{name} must lie in (0,1), got {v}")));
    }
    Ok(())
}

const DRAW_BATCH: usize = 4096;

/// Draws `count` samples of `S_{q,α}`, in fixed-size batches each owning one stream.
pub fn sample_counterexample(q: f64, alpha: f64, count: usize, seed: u64) -> Vec<f64> {
    let (up, down) = counterexample_values(q, alpha);
    let batches = count.div_ceil(DRAW_BATCH);
    let chunks = replicate(batches, |b| {
        let mut rng = stream_rng(seed, b);
        let len = DRAW_BATCH.min(count - b as usize * DRAW_BATCH);
        Ok((0..len)
            .map(|_| if rng.random::<f64>() < q { up } else { down })
            .collect::<Vec<f64>>())
    })
    .expect("sampling cannot fail");
    chunks.concat()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleStats {
    pub q: f64,
    pub alpha: f64,
    pub p: f64,
    pub replications: usize,
    pub lhs_mc: Estimate,
    pub lhs_exact: f64,
    pub h_moment_mc: Estimate,
    pub h_moment_exact: f64,
    /// Sample mean of `S` itself (the martingale increment has mean 0).
    pub mean_mc: Estimate,
}

pub fn counterexample_stats(q: f64, alpha: f64, p: f64, replications: usize, seed: u64) -> Result<CounterexampleStats> {
    check_unit_interval("q", q)?;
    check_unit_interval("alpha", alpha)?;
    check_unit_interval("p", p)?;
    let s = sample_counterexample(q, alpha, replications, seed);
    let plus: Vec<f64> = s.iter().map(|v| v.max(0.0).powf(p)).collect();
    let minus: Vec<f64> = s.iter().map(|v| (-v).max(0.0).powf(alpha)).collect();
    Ok(CounterexampleStats {
        q,
        alpha,
        p,
        replications,
        lhs_mc: Estimate::from_samples(&plus, crate::stats::Z_TWO_SIDED_99),
        lhs_exact: counterexample_lhs_exact(q, alpha, p),
        h_moment_mc: Estimate::from_samples(&minus, crate::stats::Z_TWO_SIDED_99),
        h_moment_exact: counterexample_h_moment_exact(q, alpha),
        mean_mc: Estimate::from_samples(&s, crate::stats::Z_TWO_SIDED_99),
    })
}

/// Ensemble `M = 1_{[1,∞)} S`, `H = 1_{[1,∞)} S_-`, `X = M + H`, `A ≡ 0` on
/// `[0, 1]`. It meets the domination assumption with equality, but `H` jumps
/// together with `M` and is not predictable.
pub fn counterexample_ensemble(q: f64, alpha: f64, replications: usize, seed: u64) -> Result<GronwallEnsemble> {
    check_unit_interval("q", q)?;
    check_unit_interval("alpha", alpha)?;
    let s = sample_counterexample(q, alpha, replications, seed);
    let step = |v: f64| CadlagPath::scalar(vec![0.0, 1.0], vec![0.0, v], 1.0);
    let mut x = Vec::with_capacity(s.len());
    let mut m = Vec::with_capacity(s.len());
    let mut h = Vec::with_capacity(s.len());
    for v in s {
        let neg = (-v).max(0.0);
        m.push(step(v)?);
        h.push(step(neg)?);
        x.push(step(v + neg)?);
    }
    GronwallEnsemble::new(x, m, h, Arc::new(|_| 0.0), 1.0, false, seed)
}

/// Per-replication suprema of a dominated pair `(X, G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatedSample {
    pub x_sup: Vec<f64>,
    pub g_sup: Vec<f64>,
}

impl DominatedSample {
    pub fn from_paths(x: &[CadlagPath], g: &[CadlagPath]) -> Result<Self> {
        if x.len() != g.len() {
            return Err(SdeError::Argument("X and G ensembles differ in size".into()));
        }
        let sup = |p: &CadlagPath| p.window_sup(p.start(), p.end());
        Ok(Self {
            x_sup: x.iter().map(sup).collect::<Result<_>>()?,
            g_sup: g.iter().map(sup).collect::<Result<_>>()?,
        })
    }

    pub fn len(&self) -> usize {
        self.x_sup.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_sup.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            x_sup: self.x_sup.iter().map(|v| c * v).collect(),
            g_sup: self.g_sup.iter().map(|v| c * v).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LenglartReport {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub verdict: Verdict,
}

/// `P(sup X > c)` against `(1/c) E[sup G ∧ d] + P(sup G >= d)`.
/// Holds when the lower one-sided 99% bound of the left side does not
/// exceed the upper bound of the right side.
pub fn lenglart_tail(sample: &DominatedSample, c: f64, d: f64) -> Result<LenglartReport> {
    if !(c > 0.0) || !(d > 0.0) {
        return Err(SdeError::Argument(format!("c and d must be positive, got {c}, {d}")));
    }
    if sample.is_empty() {
        return Err(SdeError::Argument("empty sample".into()));
    }
    let lhs: Vec<f64> = sample.x_sup.iter().map(|&x| if x > c { 1.0 } else { 0.0 }).collect();
    let rhs: Vec<f64> = sample
        .g_sup
        .iter()
        .map(|&g| g.min(d) / c + if g >= d { 1.0 } else { 0.0 })
        .collect();
    let (lhs, rhs) = (
        Estimate::from_samples(&lhs, Z_ONE_SIDED_99),
        Estimate::from_samples(&rhs, Z_ONE_SIDED_99),
    );
    let verdict = if lhs.lower <= rhs.upper {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok(LenglartReport { lhs, rhs, verdict })
}

/// `E[(sup X)^p]` against `c_p E[(sup G)^p]`; holds when the upper one-sided
/// 99% bound of the left side is at most the right side's estimate.
pub fn lenglart_moment(sample: &DominatedSample, p: f64) -> Result<LenglartReport> {
    let cp = c_p(p)?;
    if sample.is_empty() {
        return Err(SdeError::Argument("empty sample".into()));
    }
    let lhs: Vec<f64> = sample.x_sup.iter().map(|x| x.powf(p)).collect();
    let rhs: Vec<f64> = sample.g_sup.iter().map(|g| cp * g.powf(p)).collect();
    let (lhs, rhs) = (
        Estimate::from_samples(&lhs, Z_ONE_SIDED_99),
        Estimate::from_samples(&rhs, Z_ONE_SIDED_99),
    );
    let verdict = if lhs.upper <= rhs.mean {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    Ok(LenglartReport { lhs, rhs, verdict })
}

/// Generators of pairs `(X, G)` with `E[X(τ)] <= E[G(τ)]` for bounded stopping
/// times and `G` predictable non-decreasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DominatedPair {
    /// `X(t) = B(t∧1)²`, `G(t) = t∧1`, with `B` sampled on `steps` cells of `[0, 1]`.
    BrownianSquare { steps: usize },
    /// `X = G ≡ level`.
    Deterministic { level: f64 },
    /// `X(t) = N(t∧T)` for a Poisson process of rate `rate`, `G(t) = rate (t∧T)`.
    Counting { rate: f64, horizon: f64 },
}

impl DominatedPair {
    /// Explicit paths of replication `rep`.
    pub fn paths(&self, seed: u64, rep: u64) -> Result<(CadlagPath, CadlagPath)> {
        let mut rng = stream_rng(seed, rep);
        match *self {
            DominatedPair::BrownianSquare { steps } => {
                let h = 1.0 / steps as f64;
                let times: Vec<f64> = (0..=steps).map(|j| j as f64 * h).collect();
                let mut b = 0.0f64;
                let mut xs = vec![0.0];
                for _ in 0..steps {
                    let z: f64 = rng.sample(StandardNormal);
                    b += h.sqrt() * z;
                    xs.push(b * b);
                }
                let gs = times.clone();
                Ok((
                    CadlagPath::scalar(times.clone(), xs, 1.0)?,
                    CadlagPath::scalar(times, gs, 1.0)?,
                ))
            }
            DominatedPair::Deterministic { level } => Ok((
                CadlagPath::constant(0.0, 1.0, &[level])?,
                CadlagPath::constant(0.0, 1.0, &[level])?,
            )),
            DominatedPair::Counting { rate, horizon } => {
                let mut times = vec![0.0];
                let mut t = 0.0;
                if rate > 0.0 {
                    let gaps = Exp::new(rate).map_err(|e| SdeError::Argument(e.to_string()))?;
                    loop {
                        t += gaps.sample(&mut rng);
                        if t > horizon {
                            break;
                        }
                        times.push(t);
                    }
                }
                let counts: Vec<f64> = (0..times.len()).map(|i| i as f64).collect();
                let gs: Vec<f64> = times.iter().map(|t| rate * t).collect();
                let mut g = CadlagPath::scalar(times.clone(), gs, horizon)?;
                // G is continuous; the step version is refined so that sup G = rate * T
                if *times.last().expect("non-empty") < horizon {
                    g.push(horizon, &[rate * horizon])?;
                }
                Ok((CadlagPath::scalar(times, counts, horizon)?, g))
            }
        }
    }

    /// Suprema of `replications` independent pairs.
    pub fn sample(&self, replications: usize, seed: u64) -> Result<DominatedSample> {
        let sups = replicate(replications, |rep| match *self {
            DominatedPair::BrownianSquare { steps } => {
                let mut rng = stream_rng(seed, rep);
                let h = (1.0 / steps as f64).sqrt();
                let mut b = 0.0f64;
                let mut sup = 0.0f64;
                for _ in 0..steps {
                    let z: f64 = rng.sample(StandardNormal);
                    b += h * z;
                    sup = sup.max(b * b);
                }
                Ok((sup, 1.0))
            }
            _ => {
                let (x, g) = self.paths(seed, rep)?;
                Ok((x.window_sup(x.start(), x.end())?, g.window_sup(g.start(), g.end())?))
            }
        })?;
        let (x_sup, g_sup) = sups.into_iter().unzip();
        Ok(DominatedSample { x_sup, g_sup })
    }
}
