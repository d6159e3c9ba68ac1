//! Dyadic intervals of `[0, 1)`, windows, and nonnegative families indexed by
//! dyadic intervals.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::numeric::fit_line;

/// The half-open interval `[k 2^-j, (k+1) 2^-j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub j: u32,
    pub k: u64,
}

/// Finest scale representable with exact `f64` endpoints and `u64` offsets.
pub const MAX_SCALE: u32 = 52;

impl DyadicCube {
    pub fn new(j: u32, k: u64) -> Result<Self> {
        if j > MAX_SCALE {
            return Err(Error::Scale(format!("scale {j} exceeds {MAX_SCALE}")));
        }
        if k >= 1u64 << j {
            return Err(Error::Invalid(format!("offset {k} out of range at scale {j}")));
        }
        Ok(DyadicCube { j, k })
    }

    pub fn count_at(j: u32) -> u64 {
        1u64 << j
    }

    pub fn width(&self) -> f64 {
        (-(self.j as f64)).exp2()
    }

    pub fn left(&self) -> f64 {
        self.k as f64 * self.width()
    }

    pub fn right(&self) -> f64 {
        (self.k + 1) as f64 * self.width()
    }

    pub fn midpoint(&self) -> f64 {
        (self.k as f64 + 0.5) * self.width()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.left() && x < self.right()
    }

    pub fn children(&self) -> [DyadicCube; 2] {
        [
            DyadicCube { j: self.j + 1, k: 2 * self.k },
            DyadicCube { j: self.j + 1, k: 2 * self.k + 1 },
        ]
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.j > 0).then(|| DyadicCube { j: self.j - 1, k: self.k / 2 })
    }

    /// Whether `self` is contained in `other` (or equal to it).
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        self.j >= other.j && (self.k >> (self.j - other.j)) == other.k
    }

    /// Whether the enlarged cube `3λ` is clipped by the boundary of `[0, 1)`.
    pub fn touches_boundary(&self) -> bool {
        self.k == 0 || self.k + 1 == 1u64 << self.j
    }
}

/// The unique dyadic cube of scale `j` containing `x`.
pub fn cube_at(x: f64, j: u32) -> Result<DyadicCube> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(x));
    }
    if j > MAX_SCALE {
        return Err(Error::Scale(format!("scale {j} exceeds {MAX_SCALE}")));
    }
    let k = (x * (j as f64).exp2()).floor() as u64;
    Ok(DyadicCube { j, k: k.min((1u64 << j) - 1) })
}

/// The cubes making up `3λ`: `λ` and its same-scale neighbours, clipped to
/// `[0, 1)` (no wrap-around).
pub fn neighborhood(cube: DyadicCube) -> Vec<DyadicCube> {
    let n = 1u64 << cube.j;
    let lo = cube.k.saturating_sub(1);
    let hi = (cube.k + 1).min(n - 1);
    (lo..=hi).map(|k| DyadicCube { j: cube.j, k }).collect()
}

/// Half-open analysis window `[lo, hi)` with `0 <= lo < hi <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0 && hi <= 1.0 && lo < hi) {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Window { lo, hi })
    }

    pub fn full() -> Self {
        Window { lo: 0.0, hi: 1.0 }
    }

    /// `B(x, r) ∩ [0, 1)`.
    pub fn ball(x: f64, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Range(format!("radius must be positive, got {r}")));
        }
        Window::new((x - r).max(0.0), (x + r).min(1.0))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Window { lo, hi })
    }

    /// Offsets `k` of the scale-`j` cubes contained in the window.
    pub fn cube_range(&self, j: u32) -> Range<u64> {
        let scale = (j as f64).exp2();
        let start = (self.lo * scale).ceil() as u64;
        let end = (self.hi * scale).floor() as u64;
        start..end.max(start)
    }

    pub fn cube_count(&self, j: u32) -> usize {
        let r = self.cube_range(j);
        (r.end - r.start) as usize
    }

    pub fn contains_cube(&self, cube: &DyadicCube) -> bool {
        self.cube_range(cube.j).contains(&cube.k)
    }
}

/// Nonnegative values `e_λ` attached to the cubes of scales
/// `j_min..=j_max` that lie inside `window`.
///
/// Storage is dense: the row of scale `j` holds the values of the cubes with
/// offsets `window.cube_range(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicFamily {
    j_min: u32,
    window: Window,
    rows: Vec<Vec<f64>>,
    offsets: Vec<u64>,
    edge_flagged: bool,
}

impl DyadicFamily {
    /// Builds a family on `[0, 1)` from full rows; row `i` belongs to scale
    /// `j_min + i` and must have `2^(j_min + i)` entries.
    pub fn from_full_rows(j_min: u32, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Scale("a family needs at least one scale".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            let j = j_min + i as u32;
            if row.len() as u64 != DyadicCube::count_at(j) {
                return Err(Error::Invalid(format!(
                    "row for scale {j} has {} values, expected {}",
                    row.len(),
                    DyadicCube::count_at(j)
                )));
            }
        }
        Self::from_rows(j_min, Window::full(), rows)
    }

    /// Builds a family from window-restricted rows.
    pub fn from_rows(j_min: u32, window: Window, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Scale("a family needs at least one scale".into()));
        }
        let j_max = j_min + rows.len() as u32 - 1;
        if j_max > MAX_SCALE {
            return Err(Error::Scale(format!("scale {j_max} exceeds {MAX_SCALE}")));
        }
        let mut offsets = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let j = j_min + i as u32;
            let range = window.cube_range(j);
            if row.len() as u64 != range.end - range.start {
                return Err(Error::Invalid(format!(
                    "row for scale {j} has {} values, window holds {}",
                    row.len(),
                    range.end - range.start
                )));
            }
            if let Some(bad) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Invalid(format!("family value {bad} at scale {j} is not finite and nonnegative")));
            }
            offsets.push(range.start);
        }
        Ok(DyadicFamily { j_min, window, rows, offsets, edge_flagged: false })
    }

    /// Builds a family on the window by evaluating `f` on every cube.
    pub fn from_fn<F: Fn(DyadicCube) -> f64>(j_min: u32, j_max: u32, window: Window, f: F) -> Result<Self> {
        if j_max < j_min {
            return Err(Error::Scale(format!("empty scale range {j_min}..={j_max}")));
        }
        let rows = (j_min..=j_max)
            .map(|j| window.cube_range(j).map(|k| f(DyadicCube { j, k })).collect())
            .collect();
        Self::from_rows(j_min, window, rows)
    }

    /// Marks the boundary cubes (whose `3λ` is clipped) so that structure
    /// sums skip them by default.
    pub fn with_edge_flag(mut self, flagged: bool) -> Self {
        self.edge_flagged = flagged;
        self
    }

    pub fn edge_flagged(&self) -> bool {
        self.edge_flagged
    }

    pub fn is_edge(&self, cube: &DyadicCube) -> bool {
        self.edge_flagged && cube.touches_boundary()
    }

    pub fn j_min(&self) -> u32 {
        self.j_min
    }

    pub fn j_max(&self) -> u32 {
        self.j_min + self.rows.len() as u32 - 1
    }

    pub fn num_scales(&self) -> usize {
        self.rows.len()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> u32 {
        crate::DIM
    }

    /// Row of scale `j` with the offset of its first cube.
    pub fn row(&self, j: u32) -> Option<(u64, &[f64])> {
        if j < self.j_min || j > self.j_max() {
            return None;
        }
        let i = (j - self.j_min) as usize;
        Some((self.offsets[i], &self.rows[i]))
    }

    pub fn get(&self, cube: DyadicCube) -> Option<f64> {
        let (start, row) = self.row(cube.j)?;
        let idx = cube.k.checked_sub(start)? as usize;
        row.get(idx).copied()
    }

    /// Iterator over `(cube, value)` at scale `j`.
    pub fn cubes(&self, j: u32) -> impl Iterator<Item = (DyadicCube, f64)> + '_ {
        let (start, row) = self.row(j).unwrap_or((0, &[]));
        row.iter().enumerate().map(move |(i, v)| (DyadicCube { j, k: start + i as u64 }, *v))
    }

    /// Keeps exactly the cubes contained in `w`; the scale range is unchanged.
    pub fn restrict(&self, w: &Window) -> Result<DyadicFamily> {
        let empty = || Error::EmptyWindow { lo: w.lo, hi: w.hi, scale: self.j_max() };
        let inter = self.window.intersect(w).ok_or_else(empty)?;
        if inter.cube_count(self.j_max()) == 0 {
            return Err(empty());
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for j in self.j_min..=self.j_max() {
            let range = inter.cube_range(j);
            let (start, row) = self.row(j).expect("scale in range");
            let a = (range.start - start) as usize;
            let b = (range.end - start) as usize;
            rows.push(row[a..b.max(a)].to_vec());
        }
        let mut fam = DyadicFamily::from_rows(self.j_min, inter, rows)?;
        fam.edge_flagged = self.edge_flagged;
        Ok(fam)
    }

    /// Applies `f` to every value; the result must stay finite and nonnegative.
    pub fn map_values<F: Fn(DyadicCube, f64) -> f64>(&self, f: F) -> Result<DyadicFamily> {
        let rows = (self.j_min..=self.j_max())
            .map(|j| self.cubes(j).map(|(c, v)| f(c, v)).collect())
            .collect();
        let mut fam = DyadicFamily::from_rows(self.j_min, self.window, rows)?;
        fam.edge_flagged = self.edge_flagged;
        Ok(fam)
    }

    /// Values `e_{λ_j(x)}` for the scales whose cube around `x` lies inside the
    /// window.
    pub fn trace(&self, x: f64) -> Result<Vec<(u32, f64)>> {
        if !self.window.contains(x) {
            return Err(Error::OutOfWindow(x));
        }
        let mut out = Vec::with_capacity(self.rows.len());
        for j in self.j_min..=self.j_max() {
            let cube = cube_at(x, j)?;
            if let Some(v) = self.get(cube) {
                out.push((j, v));
            }
        }
        Ok(out)
    }

    /// Lower (liminf) exponent at `x`. With the default tail-min method this
    /// is the smallest chord slope over the fit range; `+∞` if every value
    /// there vanishes.
    pub fn lower_exponent(&self, x: f64, opts: ExponentOptions) -> Result<ExponentEstimate> {
        self.exponent(x, opts, false)
    }

    /// Upper (limsup) exponent at `x`: the largest chord slope.
    pub fn upper_exponent(&self, x: f64, opts: ExponentOptions) -> Result<ExponentEstimate> {
        self.exponent(x, opts, true)
    }

    fn exponent(&self, x: f64, opts: ExponentOptions, upper: bool) -> Result<ExponentEstimate> {
        if self.num_scales() < 4 {
            return Err(Error::Scale(format!("pointwise exponents need >= 4 scales, family has {}", self.num_scales())));
        }
        let (j1, j2) = opts.clipped_range(self.j_min, self.j_max())?;
        let trace: Vec<(u32, f64)> = self.trace(x)?.into_iter().filter(|(j, _)| *j >= j1 && *j <= j2).collect();
        Ok(estimate_from_trace(&trace, (j1, j2), opts.method, upper))
    }
}

/// Finite-scale surrogate for the liminf / limsup of `log e_j / log 2^-j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentMethod {
    /// Extreme chord slope `log2 e_j / (-j)` over the fit range.
    #[default]
    TailMin,
    /// Least-squares slope of `log2 e_j` against `-j`.
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExponentOptions {
    pub method: ExponentMethod,
    /// Inclusive scale range; defaults to `3..=j_max`.
    pub range: Option<(u32, u32)>,
}

impl ExponentOptions {
    pub fn regression() -> Self {
        ExponentOptions { method: ExponentMethod::Regression, range: None }
    }

    pub fn with_range(mut self, j1: u32, j2: u32) -> Self {
        self.range = Some((j1, j2));
        self
    }

    pub(crate) fn clipped_range(&self, j_min: u32, j_max: u32) -> Result<(u32, u32)> {
        let (a, b) = self.range.unwrap_or((3, j_max));
        let j1 = a.max(j_min).max(1);
        let j2 = b.min(j_max);
        if j1 >= j2 {
            return Err(Error::Scale(format!("fit range {a}..={b} leaves fewer than two scales in {j_min}..={j_max}")));
        }
        Ok((j1, j2))
    }
}

/// A pointwise or uniform exponent estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    /// The estimate; `+∞` when every value in the fit range vanishes.
    pub value: f64,
    /// Least-squares slope over the same range (NaN with fewer than two
    /// positive values).
    pub slope_fit: f64,
    pub fit_range: (u32, u32),
    /// RMS residual of the regression.
    pub residual: f64,
}

pub(crate) fn estimate_from_trace(
    trace: &[(u32, f64)],
    fit_range: (u32, u32),
    method: ExponentMethod,
    upper: bool,
) -> ExponentEstimate {
    let positive: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(j, v)| *v > 0.0 && *j > 0)
        .map(|(j, v)| (-(*j as f64), v.log2()))
        .collect();
    let xs: Vec<f64> = positive.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = positive.iter().map(|p| p.1).collect();
    let fit = fit_line(&xs, &ys);
    let (slope_fit, residual) = fit.map_or((f64::NAN, 0.0), |f| (f.slope, f.rms));
    let value = if positive.is_empty() {
        f64::INFINITY
    } else {
        match method {
            ExponentMethod::Regression if fit.is_some() => slope_fit,
            _ => {
                let chords = positive.iter().map(|(mj, l)| l / mj);
                if upper {
                    chords.fold(f64::NEG_INFINITY, f64::max)
                } else {
                    chords.fold(f64::INFINITY, f64::min)
                }
            }
        }
    };
    ExponentEstimate { value, slope_fit, fit_range, residual }
}
