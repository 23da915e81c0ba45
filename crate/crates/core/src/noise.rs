//! Orthogonal martingale measures built from independent Wiener components
//! and a compensated Poisson random measure.
//!
//! The index space is `U = U1 ⊔ U2` with `U1 = {0, .., wiener_count - 1}` and
//! `U2` a mark space. The intensity is `ν_t({i}) = 1` on Wiener indices and
//! `ν_t(dξ) = λ(t) μ(dξ)` on marks. Jump times are simulated exactly by
//! thinning a homogeneous process of rate `λ̄ >= sup λ`.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Result, SdeError};
use crate::path::CadlagPath;
use crate::rng::stream_rng;
use crate::stats::{Estimate, Z_TWO_SIDED_99};

/// Deterministic jump rate `t -> λ(t)`.
#[derive(Clone)]
pub enum Intensity {
    Constant(f64),
    /// `λ(t) = intercept + slope * t`.
    Linear {
        intercept: f64,
        slope: f64,
    },
    /// Arbitrary rate; integrals use composite Simpson quadrature.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for Intensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Intensity::Constant(c) => write!(f, "Constant({c})"),
            Intensity::Linear { intercept, slope } => write!(f, "Linear({intercept} + {slope} t)"),
            Intensity::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

const SIMPSON_PANELS: usize = 64;

impl Intensity {
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Intensity::Constant(c) => *c,
            Intensity::Linear { intercept, slope } => intercept + slope * t,
            Intensity::Custom(f) => f(t),
        }
    }

    /// `∫_a^b λ(s) ds`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Intensity::Constant(c) => c * (b - a),
            Intensity::Linear { intercept, slope } => intercept * (b - a) + 0.5 * slope * (b * b - a * a),
            Intensity::Custom(f) => {
                let h = (b - a) / SIMPSON_PANELS as f64;
                let inner: f64 = (1..SIMPSON_PANELS)
                    .map(|i| {
                        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                        w * f(a + i as f64 * h)
                    })
                    .sum();
                (f(a) + inner + f(b)) * h / 3.0
            }
        }
    }

    fn is_identically_zero(&self) -> bool {
        match self {
            Intensity::Constant(c) => *c == 0.0,
            Intensity::Linear { intercept, slope } => *intercept == 0.0 && *slope == 0.0,
            Intensity::Custom(_) => false,
        }
    }
}

/// Mark distribution `μ` on `U2`.
#[derive(Debug, Clone, PartialEq)]
pub enum MarkDistribution {
    /// No marks: `U2` is a single point and events carry empty marks.
    Unmarked,
    /// Uniform on the box `[lo_1, hi_1] x ... x [lo_k, hi_k]`.
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Labels `0..weights.len()` drawn with the given probabilities.
    Categorical { weights: Vec<f64> },
    /// Marks of dimension `dim` supplied by hand; cannot be sampled.
    External { dim: usize },
}

impl MarkDistribution {
    pub fn mark_dim(&self) -> usize {
        match self {
            MarkDistribution::Unmarked => 0,
            MarkDistribution::UniformBox { lo, .. } => lo.len(),
            MarkDistribution::Categorical { .. } => 1,
            MarkDistribution::External { dim } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            MarkDistribution::UniformBox { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(SdeError::Spec("mark box needs lo < hi in every coordinate".into()));
                }
            }
            MarkDistribution::Categorical { weights } => {
                let total: f64 = weights.iter().sum();
                if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
                    return Err(SdeError::Spec("categorical mark weights must sum to 1".into()));
                }
            }
            MarkDistribution::Unmarked | MarkDistribution::External { .. } => {}
        }
        Ok(())
    }

    pub fn is_samplable(&self) -> bool {
        !matches!(self, MarkDistribution::External { .. })
    }

    fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) -> Result<()> {
        match self {
            MarkDistribution::Unmarked => {}
            MarkDistribution::UniformBox { lo, hi } => {
                out.extend(lo.iter().zip(hi).map(|(l, h)| rng.random_range(*l..*h)));
            }
            MarkDistribution::Categorical { weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut label = weights.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        label = i;
                        break;
                    }
                }
                out.push(label as f64);
            }
            MarkDistribution::External { .. } => return Err(SdeError::Spec("external marks cannot be sampled".into())),
        }
        Ok(())
    }

    /// `μ(region)`.
    pub fn measure(&self, region: &MarkRegion) -> f64 {
        match (self, region) {
            (_, MarkRegion::Empty) => 0.0,
            (_, MarkRegion::All) => 1.0,
            (MarkDistribution::UniformBox { lo, hi }, MarkRegion::Box { lo: a, hi: b }) => lo
                .iter()
                .zip(hi)
                .zip(a.iter().zip(b))
                .map(|((l, h), (a, b))| ((h.min(*b) - l.max(*a)).max(0.0)) / (h - l))
                .product(),
            (MarkDistribution::Categorical { weights }, MarkRegion::Labels(ls)) => {
                let mut ls = ls.clone();
                ls.sort_unstable();
                ls.dedup();
                ls.iter().filter_map(|&l| weights.get(l)).sum()
            }
            _ => 0.0,
        }
    }
}

/// Fixed quadrature rule for integrals `∫ h(ξ) μ(dξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkQuadrature {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl MarkQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.weights.len()).map(move |i| (&self.nodes[i * self.dim..(i + 1) * self.dim], self.weights[i]))
    }
}

/// A subset of `U = U1 ⊔ U2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkSet {
    pub wiener: Vec<usize>,
    pub marks: MarkRegion,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarkRegion {
    Empty,
    All,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Labels(Vec<usize>),
}

impl MarkSet {
    pub fn wiener(indices: Vec<usize>) -> Self {
        Self {
            wiener: indices,
            marks: MarkRegion::Empty,
        }
    }

    pub fn marks(region: MarkRegion) -> Self {
        Self {
            wiener: Vec::new(),
            marks: region,
        }
    }

    pub fn contains(&self, site: NoiseSite<'_>) -> bool {
        match site {
            NoiseSite::Wiener(i) => self.wiener.contains(&i),
            NoiseSite::Jump(xi) => match &self.marks {
                MarkRegion::Empty => false,
                MarkRegion::All => true,
                // half-open boxes keep adjacent boxes disjoint
                MarkRegion::Box { lo, hi } => xi.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| *l <= *x && *x < *h),
                MarkRegion::Labels(ls) => xi.first().is_some_and(|x| ls.contains(&(*x as usize))),
            },
        }
    }
}

/// A point of the index space `U` at which an integrand is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSite<'a> {
    Wiener(usize),
    Jump(&'a [f64]),
}

/// Description of the driving martingale measure.
#[derive(Debug, Clone)]
pub struct MartingaleMeasureSpec {
    pub wiener_count: usize,
    pub intensity: Intensity,
    /// Dominating rate `λ̄` used for thinning.
    pub intensity_bound: f64,
    pub marks: MarkDistribution,
    /// Node budget of the midpoint rule for box-shaped mark spaces.
    pub quadrature_nodes: usize,
}

impl MartingaleMeasureSpec {
    pub fn wiener(count: usize) -> Self {
        Self {
            wiener_count: count,
            intensity: Intensity::Constant(0.0),
            intensity_bound: 0.0,
            marks: MarkDistribution::Unmarked,
            quadrature_nodes: 256,
        }
    }

    /// Unmarked compensated Poisson noise with constant rate, plus `wiener_count`
    /// Wiener components.
    pub fn poisson(wiener_count: usize, rate: f64) -> Self {
        Self {
            intensity: Intensity::Constant(rate),
            intensity_bound: rate,
            ..Self::wiener(wiener_count)
        }
    }

    pub fn with_intensity(mut self, intensity: Intensity, bound: f64) -> Self {
        self.intensity = intensity;
        self.intensity_bound = bound;
        self
    }

    pub fn with_marks(mut self, marks: MarkDistribution) -> Self {
        self.marks = marks;
        self
    }

    pub fn has_jumps(&self) -> bool {
        !self.intensity.is_identically_zero()
    }

    /// Checks `0 <= λ(t) <= λ̄` on a probe grid over `[0, horizon]`.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        self.marks.validate()?;
        if !(self.intensity_bound >= 0.0) || !self.intensity_bound.is_finite() {
            return Err(SdeError::Spec("intensity bound must be finite and non-negative".into()));
        }
        const PROBES: usize = 1024;
        let mut nonzero = false;
        for i in 0..=PROBES {
            let t = horizon * i as f64 / PROBES as f64;
            let l = self.intensity.rate(t);
            if !(l >= 0.0) {
                return Err(SdeError::Spec(format!("intensity {l} < 0 at t = {t}")));
            }
            if l > self.intensity_bound * (1.0 + 1e-12) {
                return Err(SdeError::Spec(format!(
                    "intensity {l} at t = {t} exceeds bound {}",
                    self.intensity_bound
                )));
            }
            nonzero |= l > 0.0;
        }
        if self.intensity_bound == 0.0 && (nonzero || !self.intensity.is_identically_zero()) {
            return Err(SdeError::Spec("zero intensity bound with non-zero intensity".into()));
        }
        Ok(())
    }

    /// `ν_t(A)`.
    pub fn nu(&self, t: f64, set: &MarkSet) -> f64 {
        let mut w = set.wiener.clone();
        w.retain(|&i| i < self.wiener_count);
        w.sort_unstable();
        w.dedup();
        w.len() as f64 + self.intensity.rate(t) * self.marks.measure(&set.marks)
    }

    /// `∫_a^b ν_s(A) ds`.
    pub fn nu_integral(&self, a: f64, b: f64, set: &MarkSet) -> f64 {
        let mut w = set.wiener.clone();
        w.retain(|&i| i < self.wiener_count);
        w.sort_unstable();
        w.dedup();
        w.len() as f64 * (b - a) + self.intensity.integral(a, b) * self.marks.measure(&set.marks)
    }

    /// Quadrature rule for `μ`: exact for unmarked and categorical marks,
    /// a tensor midpoint rule for boxes.
    pub fn quadrature(&self) -> Result<MarkQuadrature> {
        let dim = self.marks.mark_dim();
        match &self.marks {
            MarkDistribution::Unmarked => Ok(MarkQuadrature {
                dim,
                nodes: Vec::new(),
                weights: vec![1.0],
            }),
            MarkDistribution::Categorical { weights } => Ok(MarkQuadrature {
                dim,
                nodes: (0..weights.len()).map(|i| i as f64).collect(),
                weights: weights.clone(),
            }),
            MarkDistribution::UniformBox { lo, hi } => {
                // tensor midpoint rule with at most `quadrature_nodes` nodes
                let per_axis = ((self.quadrature_nodes.max(1) as f64).powf(1.0 / dim as f64) + 1e-9).floor() as usize;
                let per_axis = per_axis.max(1);
                let count = per_axis.pow(dim as u32);
                let mut nodes = Vec::with_capacity(count * dim);
                for flat in 0..count {
                    let mut rest = flat;
                    for (l, h) in lo.iter().zip(hi) {
                        let j = rest % per_axis;
                        rest /= per_axis;
                        nodes.push(l + (j as f64 + 0.5) * (h - l) / per_axis as f64);
                    }
                }
                Ok(MarkQuadrature {
                    dim,
                    nodes,
                    weights: vec![1.0 / count as f64; count],
                })
            }
            MarkDistribution::External { .. } => Err(SdeError::Spec(
                "mark distribution is not samplable; supply a closed-form compensator".into(),
            )),
        }
    }

    /// Samples one realization on `grid` from stream `(seed, stream)`.
    pub fn sample(&self, grid: &TimeGrid, seed: u64, stream: u64) -> Result<NoiseRealization> {
        let mut rng = stream_rng(seed, stream);
        self.sample_with(grid, &mut rng)
    }

    /// Samples Wiener increments cell by cell, then jump events by thinning.
    pub fn sample_with(&self, grid: &TimeGrid, rng: &mut ChaCha8Rng) -> Result<NoiseRealization> {
        let times = grid.times();
        let horizon = grid.horizon();
        let cells = times.len() - 1;
        let mut increments = Vec::with_capacity(cells * self.wiener_count);
        for w in times.windows(2) {
            let sd = (w[1] - w[0]).sqrt();
            for _ in 0..self.wiener_count {
                let z: f64 = rng.sample(StandardNormal);
                increments.push(sd * z);
            }
        }
        let mut event_times = Vec::new();
        let mut event_marks = Vec::new();
        if self.has_jumps() {
            if self.intensity_bound == 0.0 {
                return Err(SdeError::Spec("zero intensity bound with non-zero intensity".into()));
            }
            if !self.marks.is_samplable() {
                return Err(SdeError::Spec("external marks cannot be sampled".into()));
            }
            let gaps = Exp::new(self.intensity_bound).map_err(|e| SdeError::Spec(format!("intensity bound: {e}")))?;
            let mut t = 0.0;
            loop {
                t += gaps.sample(rng);
                if t > horizon {
                    break;
                }
                let accept: f64 = rng.random();
                if accept * self.intensity_bound < self.intensity.rate(t) && t > 0.0 {
                    event_times.push(t);
                    self.marks.sample_into(rng, &mut event_marks)?;
                }
            }
        }
        Ok(NoiseRealization {
            grid: times.to_vec(),
            wiener_count: self.wiener_count,
            increments,
            mark_dim: self.marks.mark_dim(),
            event_times,
            event_marks,
        })
    }
}

/// Increasing time grid `0 = s_0 < ... < s_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Grid with `steps_per_unit` cells per unit time, truncated at `horizon`.
    pub fn uniform(steps_per_unit: usize, horizon: f64) -> Result<Self> {
        if steps_per_unit == 0 || !(horizon > 0.0) || !horizon.is_finite() {
            return Err(SdeError::Argument(format!(
                "uniform grid needs steps_per_unit >= 1 and a positive horizon, got {steps_per_unit}, {horizon}"
            )));
        }
        let m = steps_per_unit as f64;
        let exact = (horizon * m).round();
        let full = if (horizon * m - exact).abs() < 1e-9 {
            exact as usize
        } else {
            (horizon * m).floor() as usize + 1
        };
        let mut times: Vec<f64> = (0..full).map(|j| j as f64 / m).collect();
        times.push(horizon);
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(SdeError::Argument("grid must start at 0 and contain a cell".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !t.is_finite()) {
            return Err(SdeError::Argument("grid must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn cells(&self) -> usize {
        self.times.len() - 1
    }
}

/// One sampled realization of the driving noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub grid: Vec<f64>,
    pub wiener_count: usize,
    /// Row-major `cells x wiener_count` matrix of Gaussian increments.
    pub increments: Vec<f64>,
    pub mark_dim: usize,
    /// Jump times in `(0, T]`, increasing.
    pub event_times: Vec<f64>,
    /// Flattened `events x mark_dim` marks.
    pub event_marks: Vec<f64>,
}

impl NoiseRealization {
    pub fn horizon(&self) -> f64 {
        *self.grid.last().expect("non-empty grid")
    }

    pub fn cells(&self) -> usize {
        self.grid.len() - 1
    }

    /// Increment of Wiener component `i` over grid cell `j`.
    pub fn increment(&self, cell: usize, i: usize) -> f64 {
        self.increments[cell * self.wiener_count + i]
    }

    pub fn cell_increments(&self, cell: usize) -> &[f64] {
        &self.increments[cell * self.wiener_count..(cell + 1) * self.wiener_count]
    }

    pub fn event_count(&self) -> usize {
        self.event_times.len()
    }

    pub fn mark(&self, e: usize) -> &[f64] {
        &self.event_marks[e * self.mark_dim..(e + 1) * self.mark_dim]
    }

    /// `W_i(t)` for a grid time `t = s_j`.
    pub fn wiener_at_cell(&self, cell_end: usize, i: usize) -> f64 {
        (0..cell_end).map(|j| self.increment(j, i)).sum()
    }

    /// Checks shape and ordering invariants.
    pub fn validate(&self) -> Result<()> {
        TimeGrid::from_times(self.grid.clone())?;
        if self.increments.len() != self.cells() * self.wiener_count {
            return Err(SdeError::Argument("increment matrix has the wrong shape".into()));
        }
        if self.event_marks.len() != self.event_times.len() * self.mark_dim {
            return Err(SdeError::Argument("event marks have the wrong shape".into()));
        }
        let t_max = self.horizon();
        if self.event_times.windows(2).any(|w| !(w[0] < w[1]))
            || self.event_times.iter().any(|&t| !(t > 0.0 && t <= t_max))
        {
            return Err(SdeError::Argument("event times must be increasing in (0, T]".into()));
        }
        Ok(())
    }

    /// Events as CSV rows `time,mark_1,...`.
    pub fn write_events_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["time".to_string()];
        header.extend((1..=self.mark_dim).map(|i| format!("mark_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for e in 0..self.event_count() {
            write!(w, "{}", self.event_times[e])?;
            for m in self.mark(e) {
                write!(w, ",{m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Wiener increments as CSV rows `t_start,t_end,dW_1,...`.
    pub fn write_increments_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["t_start".to_string(), "t_end".to_string()];
        header.extend((1..=self.wiener_count).map(|i| format!("dW_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for j in 0..self.cells() {
            write!(w, "{},{}", self.grid[j], self.grid[j + 1])?;
            for dw in self.cell_increments(j) {
                write!(w, ",{dw}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Mean of a vector integrand over the marks, `∫ g(t, ξ) μ(dξ)`.
pub(crate) fn mark_mean(
    quad: &MarkQuadrature,
    out: &mut [f64],
    mut g: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
) -> Result<()> {
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut buf = vec![0.0; out.len()];
    for (node, w) in quad.nodes() {
        g(node, &mut buf)?;
        for (o, b) in out.iter_mut().zip(&buf) {
            *o += w * b;
        }
    }
    Ok(())
}

/// `t -> ∫ g(t, ξ) μ(dξ)` in closed form, written into the output slice.
pub type Compensator<'a> = &'a dyn Fn(f64, &mut [f64]);

/// Stochastic integral `t -> ∫_0^t ∫_U g(s, ξ) M̃(ds, dξ)` along one realization.
///
/// `g` is evaluated at the left endpoint of each grid cell for Wiener
/// components and at the event time for jumps. The compensator over a
/// piece `(u, v]` is `λ-integral(u, v) * ∫ g(u, ξ) μ(dξ)`, using `compensator`
/// when supplied and the spec's fixed quadrature otherwise. The result has
/// breakpoints at every grid point and event time.
pub fn integrate(
    dim: usize,
    g: impl Fn(f64, NoiseSite<'_>, &mut [f64]),
    spec: &MartingaleMeasureSpec,
    real: &NoiseRealization,
    compensator: Option<Compensator<'_>>,
) -> Result<CadlagPath> {
    real.validate()?;
    let quad = if spec.has_jumps() && compensator.is_none() {
        Some(spec.quadrature()?)
    } else {
        None
    };
    let mut state = vec![0.0; dim];
    let mut path = CadlagPath::constant(0.0, real.horizon(), &state)?;
    let mut buf = vec![0.0; dim];
    let mut mean = vec![0.0; dim];

    let mut compensate = |state: &mut [f64], u: f64, v: f64| -> Result<()> {
        if !spec.has_jumps() {
            return Ok(());
        }
        let lambda = spec.intensity.integral(u, v);
        match compensator {
            Some(c) => c(u, &mut mean),
            None => mark_mean(quad.as_ref().expect("quadrature"), &mut mean, |xi, out| {
                g(u, NoiseSite::Jump(xi), out);
                Ok(())
            })?,
        }
        for (s, m) in state.iter_mut().zip(&mean) {
            *s -= lambda * m;
        }
        Ok(())
    };

    let mut e = 0;
    for j in 0..real.cells() {
        let (s0, s1) = (real.grid[j], real.grid[j + 1]);
        let mut u = s0;
        while e < real.event_count() && real.event_times[e] < s1 {
            let te = real.event_times[e];
            compensate(&mut state, u, te)?;
            g(te, NoiseSite::Jump(real.mark(e)), &mut buf);
            state.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
            path.push(te, &state)?;
            u = te;
            e += 1;
        }
        compensate(&mut state, u, s1)?;
        if e < real.event_count() && real.event_times[e] == s1 {
            g(s1, NoiseSite::Jump(real.mark(e)), &mut buf);
            state.iter_mut().zip(&buf).for_each(|(s, b)| *s += b);
            e += 1;
        }
        for (i, dw) in real.cell_increments(j).iter().enumerate() {
            g(s0, NoiseSite::Wiener(i), &mut buf);
            state.iter_mut().zip(&buf).for_each(|(s, b)| *s += b * dw);
        }
        path.push(s1, &state)?;
    }
    Ok(path)
}

/// The integrand `1_A`, for building `M̃(t, A)`.
pub fn indicator(set: &MarkSet) -> impl Fn(f64, NoiseSite<'_>, &mut [f64]) + '_ {
    move |_, site, out| out[0] = if set.contains(site) { 1.0 } else { 0.0 }
}

/// Monte Carlo estimate of `E[M_A(T) · M_B(T)]` from paired terminal values of
/// two integral paths, with a two-sided 99% interval.
pub fn empirical_covariation(a: &[CadlagPath], b: &[CadlagPath]) -> Result<Estimate> {
    if a.len() != b.len() {
        return Err(SdeError::Argument(format!(
            "ensembles have different sizes ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(SdeError::Argument("empty ensemble".into()));
    }
    let products: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.terminal().iter().zip(y.terminal()).map(|(u, v)| u * v).sum())
        .collect();
    Ok(Estimate::from_samples(&products, Z_TWO_SIDED_99))
}
