//! Piecewise-constant càdlàg paths.
//!
//! A [`CadlagPath`] on `[start, end]` is described by strictly increasing
//! breakpoints `t_0 = start < t_1 < ... < t_k <= end` and one value per
//! half-open segment `[t_i, t_{i+1})`; the last segment runs to `end`
//! inclusive. Right-continuity holds by construction and left limits are the
//! value of the preceding segment.

use std::io::Write;

use crate::error::{Result, SdeError};

#[derive(Debug, Clone, PartialEq)]
pub struct CadlagPath {
    dim: usize,
    end: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>()
}

impl CadlagPath {
    /// Builds a path from breakpoints and a flattened `times.len() * dim`
    /// value buffer.
    pub fn from_flat(dim: usize, times: Vec<f64>, values: Vec<f64>, end: f64) -> Result<Self> {
        if dim == 0 {
            return Err(SdeError::Argument("path dimension must be positive".into()));
        }
        if times.is_empty() {
            return Err(SdeError::Argument("path needs at least one breakpoint".into()));
        }
        if values.len() != times.len() * dim {
            return Err(SdeError::Argument(format!(
                "expected {} values for {} breakpoints of dimension {dim}, got {}",
                times.len() * dim,
                times.len(),
                values.len()
            )));
        }
        if times.iter().chain(values.iter()).any(|x| !x.is_finite()) || end.is_nan() {
            return Err(SdeError::Argument("path data must be finite".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SdeError::Argument("breakpoints must be strictly increasing".into()));
        }
        let last = *times.last().expect("non-empty");
        if end < last {
            return Err(SdeError::Argument(format!(
                "domain end {end} precedes last breakpoint {last}"
            )));
        }
        Ok(Self {
            dim,
            end,
            times,
            values,
        })
    }

    /// Builds a path from breakpoints and one value vector per segment.
    pub fn from_segments(times: Vec<f64>, values: Vec<Vec<f64>>, end: f64) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != dim) {
            return Err(SdeError::Argument("segment values have mixed dimensions".into()));
        }
        Self::from_flat(dim, times, values.concat(), end)
    }

    /// One-dimensional path.
    pub fn scalar(times: Vec<f64>, values: Vec<f64>, end: f64) -> Result<Self> {
        Self::from_flat(1, times, values, end)
    }

    pub fn constant(start: f64, end: f64, value: &[f64]) -> Result<Self> {
        Self::from_flat(value.len(), vec![start], value.to_vec(), end)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    pub fn segment_count(&self) -> usize {
        self.times.len()
    }

    /// Value carried by segment `i`.
    pub fn segment(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Iterates `(breakpoint, value)` pairs.
    pub fn segments(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.values.chunks_exact(self.dim))
    }

    /// The value at the last breakpoint, i.e. the value at `end`.
    pub fn terminal(&self) -> &[f64] {
        self.segment(self.times.len() - 1)
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !(self.start() <= t && t <= self.end) {
            return Err(SdeError::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.start(),
                self.end
            )));
        }
        Ok(())
    }

    /// Index of the segment containing `t` (last breakpoint `<= t`).
    fn index_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t) - 1
    }

    /// Index of the segment immediately left of `t` (last breakpoint `< t`).
    fn index_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t) - 1
    }

    pub fn value_at(&self, t: f64) -> Result<&[f64]> {
        self.check_domain(t)?;
        Ok(self.segment(self.index_at(t)))
    }

    /// Left limit `x(t-)`, defined for `start < t <= end`.
    pub fn left_limit(&self, t: f64) -> Result<&[f64]> {
        if !(self.start() < t && t <= self.end) {
            return Err(SdeError::Domain(format!(
                "left limit at t = {t} needs start {} < t <= {}",
                self.start(),
                self.end
            )));
        }
        Ok(self.segment(self.index_before(t)))
    }

    fn check_window(&self, a: f64, b: f64) -> Result<()> {
        if a > b {
            return Err(SdeError::Argument(format!("window [{a}, {b}] is reversed")));
        }
        self.check_domain(a)?;
        self.check_domain(b)
    }

    /// `sup_{s in [a, b]} |x(s)|` with the Euclidean norm, including the value at `b`.
    pub fn window_sup(&self, a: f64, b: f64) -> Result<f64> {
        self.check_window(a, b)?;
        let (i0, i1) = (self.index_at(a), self.index_at(b));
        Ok((i0..=i1).map(|i| norm(self.segment(i))).fold(0.0, f64::max))
    }

    /// `sup_{s in [a, b)} |x(s)|`; the empty window `a == b` gives 0.
    pub fn window_sup_open(&self, a: f64, b: f64) -> Result<f64> {
        self.check_window(a, b)?;
        if a == b {
            return Ok(0.0);
        }
        let (i0, i1) = (self.index_at(a), self.index_before(b));
        Ok((i0..=i1).map(|i| norm(self.segment(i))).fold(0.0, f64::max))
    }

    /// The path stopped at `t`: unchanged on `[start, t]`, constant equal to
    /// `x(t)` on `[t, end]`.
    pub fn history(&self, t: f64) -> Result<CadlagPath> {
        self.check_domain(t)?;
        let keep = self.index_at(t) + 1;
        Ok(CadlagPath {
            dim: self.dim,
            end: self.end,
            times: self.times[..keep].to_vec(),
            values: self.values[..keep * self.dim].to_vec(),
        })
    }

    /// The restriction of the path to `[start, t]`.
    pub fn restrict(&self, t: f64) -> Result<CadlagPath> {
        let mut h = self.history(t)?;
        h.end = t;
        Ok(h)
    }

    /// Appends a breakpoint at `t > last breakpoint`, extending the domain if needed.
    pub fn push(&mut self, t: f64, value: &[f64]) -> Result<()> {
        let last = *self.times.last().expect("non-empty");
        if !(t > last) || !t.is_finite() {
            return Err(SdeError::Argument(format!("breakpoint {t} does not follow {last}")));
        }
        if value.len() != self.dim {
            return Err(SdeError::Argument(format!(
                "value of dimension {} pushed onto path of dimension {}",
                value.len(),
                self.dim
            )));
        }
        self.times.push(t);
        self.values.extend_from_slice(value);
        self.end = self.end.max(t);
        Ok(())
    }

    /// Moves the right end of the domain; the last segment is stretched.
    pub fn set_end(&mut self, end: f64) -> Result<()> {
        let last = *self.times.last().expect("non-empty");
        if end < last {
            return Err(SdeError::Argument(format!(
                "domain end {end} precedes last breakpoint {last}"
            )));
        }
        self.end = end;
        Ok(())
    }

    /// Applies `f` to every segment value, producing a path of dimension `out_dim`.
    pub fn map(&self, out_dim: usize, mut f: impl FnMut(f64, &[f64], &mut [f64])) -> CadlagPath {
        let mut values = vec![0.0; self.times.len() * out_dim];
        for (i, (t, v)) in self.segments().enumerate() {
            f(t, v, &mut values[i * out_dim..(i + 1) * out_dim]);
        }
        CadlagPath {
            dim: out_dim,
            end: self.end,
            times: self.times.clone(),
            values,
        }
    }

    /// Breakpoints of all `paths` lying in `[a, b]`, merged and deduplicated,
    /// with `a` always first.
    pub fn merged_breakpoints(paths: &[&CadlagPath], a: f64, b: f64) -> Vec<f64> {
        let mut ts: Vec<f64> = std::iter::once(a)
            .chain(
                paths
                    .iter()
                    .flat_map(|p| p.times.iter().copied())
                    .filter(|&t| a < t && t <= b),
            )
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// `sup_{s in [a, b]} |x(s) - y(s)|`.
    pub fn sup_distance(&self, other: &CadlagPath, a: f64, b: f64) -> Result<f64> {
        if self.dim != other.dim {
            return Err(SdeError::Argument("paths have different dimensions".into()));
        }
        self.check_window(a, b)?;
        other.check_window(a, b)?;
        let mut sup = 0.0f64;
        for t in Self::merged_breakpoints(&[self, other], a, b) {
            let (x, y) = (self.segment(self.index_at(t)), other.segment(other.index_at(t)));
            let d = x.iter().zip(y).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
            sup = sup.max(d.sqrt());
        }
        Ok(sup)
    }

    /// Writes one CSV row `t,x_1,...,x_d` per breakpoint, with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim).map(|i| format!("x_{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (t, v) in self.segments() {
            write!(w, "{t}")?;
            for x in v {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
