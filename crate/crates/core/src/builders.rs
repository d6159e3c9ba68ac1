//! Dyadic families from binned measures, sampled signals and Birkhoff sums.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicCube, DyadicFamily, Window};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numeric::pairwise_sum;
use crate::profile::Profile;

/// A measure on `[0, 1)` given by its masses on the `2^J` dyadic bins of
/// scale `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedMeasure {
    scale: u32,
    mass: Vec<f64>,
    total_mass: f64,
}

impl BinnedMeasure {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        let n = mass.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Length(n, 1));
        }
        if let Some(bad) = mass.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Invalid(format!("bin mass {bad} is not finite and nonnegative")));
        }
        let total_mass = pairwise_sum(&mass);
        if !(total_mass > 0.0) {
            return Err(Error::Invalid("measure has zero total mass".into()));
        }
        Ok(BinnedMeasure { scale: n.trailing_zeros(), mass, total_mass })
    }

    /// Checks a declared total against the bins (relative tolerance 1e-12).
    pub fn with_declared_total(mass: Vec<f64>, declared: f64) -> Result<Self> {
        let m = Self::new(mass)?;
        if (m.total_mass - declared).abs() > 1e-12 * declared.abs().max(m.total_mass) {
            return Err(Error::Invalid(format!("declared total {declared} differs from bin sum {}", m.total_mass)));
        }
        Ok(m)
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Masses of the `2^j` dyadic intervals of scale `j <= J`.
    pub fn masses_at(&self, j: u32) -> Result<Vec<f64>> {
        if j > self.scale {
            return Err(Error::Scale(format!("scale {j} is finer than the binning scale {}", self.scale)));
        }
        let block = 1usize << (self.scale - j);
        Ok(self.mass.chunks(block).map(pairwise_sum).collect())
    }

    /// `μ(λ)` for a cube of scale `<= J`.
    pub fn mass_of(&self, cube: DyadicCube) -> Result<f64> {
        if cube.j > self.scale {
            return Err(Error::Scale(format!("scale {} is finer than the binning scale {}", cube.j, self.scale)));
        }
        let block = 1usize << (self.scale - cube.j);
        let start = cube.k as usize * block;
        Ok(pairwise_sum(&self.mass[start..start + block]))
    }

    /// Mass of `[lo, hi)` when both endpoints fall on the bin grid.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let n = self.mass.len() as f64;
        let a = (lo * n).round() as usize;
        let b = ((hi * n).round() as usize).min(self.mass.len());
        pairwise_sum(&self.mass[a.min(b)..b])
    }

    fn rows(&self, j_max: u32) -> Result<Vec<Vec<f64>>> {
        if j_max > self.scale {
            return Err(Error::Scale(format!("j_max = {j_max} exceeds the binning scale {}", self.scale)));
        }
        if j_max < 4 {
            return Err(Error::Scale(format!("j_max = {j_max} is below the minimum of 4")));
        }
        let mut rows = vec![self.masses_at(j_max)?];
        for _ in 0..j_max {
            let finer = rows.last().expect("nonempty");
            let coarser: Vec<f64> = finer.chunks(2).map(|c| c[0] + c[1]).collect();
            rows.push(coarser);
        }
        rows.reverse();
        Ok(rows)
    }
}

/// `e_λ = μ(3λ)`, the mass of the cube and its two neighbours.
pub fn measure_family(m: &BinnedMeasure, j_max: u32) -> Result<DyadicFamily> {
    let rows = m
        .rows(j_max)?
        .into_iter()
        .map(|row| {
            let n = row.len();
            (0..n)
                .map(|k| {
                    let lo = k.saturating_sub(1);
                    let hi = (k + 1).min(n - 1);
                    row[lo..=hi].iter().sum()
                })
                .collect()
        })
        .collect();
    DyadicFamily::from_full_rows(0, rows)
}

/// `e_λ = μ(λ)`.
pub fn plain_measure_family(m: &BinnedMeasure, j_max: u32) -> Result<DyadicFamily> {
    DyadicFamily::from_full_rows(0, m.rows(j_max)?)
}

/// Oscillation family of a signal sampled at `i / N`, `N = 2^J`.
///
/// Order 1 is `max - min` over the samples in `3λ`. Order 2 is the largest
/// `|f(t + 2h) - 2 f(t + h) + f(t)|` with `t` and `t + 2h` in `3λ`; steps
/// `h` run over every integer up to 32 samples and a geometric grid beyond.
pub fn oscillation_family(signal: &[f64], order: u32, j_max: u32) -> Result<DyadicFamily> {
    oscillation_family_with(signal, order, j_max, Exec::default())
}

pub fn oscillation_family_with(signal: &[f64], order: u32, j_max: u32, exec: Exec) -> Result<DyadicFamily> {
    if order != 1 && order != 2 {
        return Err(Error::Order(order));
    }
    let n = signal.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Length(n, 2));
    }
    if let Some(bad) = signal.iter().find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("non-finite sample {bad}")));
    }
    let big_j = n.trailing_zeros();
    if j_max > big_j {
        return Err(Error::Scale(format!("j_max = {j_max} exceeds the sampling scale {big_j}")));
    }
    let span = |j: u32, k: usize| {
        let b = n >> j;
        let lo = k.saturating_sub(1) * b;
        let hi = ((k + 2) * b).min(n);
        (lo, hi)
    };
    let rows: Vec<Vec<f64>> = if order == 1 {
        let table = SparseTable::new(signal);
        (0..=j_max)
            .map(|j| {
                let mut row = vec![0.0; 1 << j];
                exec.fill(&mut row, |k| {
                    let (lo, hi) = span(j, k);
                    let (mn, mx) = table.min_max(lo, hi);
                    mx - mn
                });
                row
            })
            .collect()
    } else {
        let steps = second_difference_steps(n);
        let mut rows: Vec<Vec<f64>> = (0..=j_max).map(|j| vec![0.0; 1 << j]).collect();
        let per_step: Vec<Vec<Vec<f64>>> = exec.map(&steps, |&h| {
            let diffs: Vec<f64> =
                (0..n - 2 * h).map(|t| (signal[t + 2 * h] - 2.0 * signal[t + h] + signal[t]).abs()).collect();
            let table = SparseTable::new(&diffs);
            (0..=j_max)
                .map(|j| {
                    (0..1usize << j)
                        .map(|k| {
                            let (lo, hi) = span(j, k);
                            // starting points t with t + 2h < hi
                            if hi < lo + 2 * h + 1 {
                                0.0
                            } else {
                                table.min_max(lo, hi - 2 * h).1
                            }
                        })
                        .collect()
                })
                .collect()
        });
        for step_rows in per_step {
            for (row, vals) in rows.iter_mut().zip(step_rows) {
                for (r, v) in row.iter_mut().zip(vals) {
                    *r = r.max(v);
                }
            }
        }
        rows
    };
    DyadicFamily::from_full_rows(0, rows)
}

fn second_difference_steps(n: usize) -> Vec<usize> {
    let max_h = (n - 1) / 2;
    let mut steps: Vec<usize> = (1..=max_h.min(32)).collect();
    let mut h = 32.0f64;
    loop {
        h *= 1.09;
        let s = h.round() as usize;
        if s > max_h {
            break;
        }
        if Some(&s) != steps.last() {
            steps.push(s);
        }
    }
    steps
}

/// Range min/max queries in O(1) after O(n log n) preprocessing.
struct SparseTable {
    mins: Vec<Vec<f64>>,
    maxs: Vec<Vec<f64>>,
}

impl SparseTable {
    fn new(values: &[f64]) -> Self {
        let mut mins = vec![values.to_vec()];
        let mut maxs = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let (pm, px) = (mins.last().unwrap(), maxs.last().unwrap());
            let len = values.len() - 2 * width + 1;
            let nm: Vec<f64> = (0..len).map(|i| pm[i].min(pm[i + width])).collect();
            let nx: Vec<f64> = (0..len).map(|i| px[i].max(px[i + width])).collect();
            mins.push(nm);
            maxs.push(nx);
            width *= 2;
        }
        SparseTable { mins, maxs }
    }

    /// Min and max over `lo..hi` (nonempty).
    fn min_max(&self, lo: usize, hi: usize) -> (f64, f64) {
        let len = hi - lo;
        let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let w = 1 << level;
        (
            self.mins[level][lo].min(self.mins[level][hi - w]),
            self.maxs[level][lo].max(self.maxs[level][hi - w]),
        )
    }
}

/// Digit potential `φ = a` on `[0, 1/2)`, `b` on `[1/2, 1)` for the doubling
/// map, with continuous weights `γ > 0` and `θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitPotential {
    pub a: f64,
    pub b: f64,
    pub gamma: Profile,
    pub theta: Profile,
}

impl DigitPotential {
    pub fn new(a: f64, b: f64) -> Self {
        DigitPotential { a, b, gamma: Profile::Constant(1.0), theta: Profile::Constant(0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::Range("digit potential values must be finite".into()));
        }
        let (g_lo, _) = self.gamma.range_on(0.0, 1.0);
        if !(g_lo > 0.0) {
            return Err(Error::Range(format!("gamma must be positive on [0, 1], minimum is {g_lo}")));
        }
        Ok(())
    }

    /// True when `φ` is cohomologous to a constant and the spectrum
    /// degenerates to a point.
    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    /// Topological pressure `P(q) = ln(e^{qa} + e^{qb})`.
    pub fn pressure(&self, q: f64) -> f64 {
        let (u, v) = (q * self.a, q * self.b);
        let m = u.max(v);
        m + ((u - m).exp() + (v - m).exp()).ln()
    }

    /// Birkhoff sum `S_jφ` on the cylinder `(j, k)`.
    pub fn birkhoff_sum(&self, cube: DyadicCube) -> f64 {
        let ones = cube.k.count_ones() as f64;
        let zeros = cube.j as f64 - ones;
        zeros * self.a + ones * self.b
    }
}

/// `e_λ = sup_{x ∈ λ} exp(-γ(x) S_jφ(x) - jθ(x))`, with the supremum taken
/// over the left endpoint and the midpoint of `λ`.
pub fn birkhoff_family(pot: &DigitPotential, j_max: u32) -> Result<DyadicFamily> {
    pot.validate()?;
    if j_max < 4 {
        return Err(Error::Scale(format!("j_max = {j_max} is below the minimum of 4")));
    }
    let constant = pot.gamma.is_constant() && pot.theta.is_constant();
    DyadicFamily::from_fn(0, j_max, Window::full(), |c| {
        let s = pot.birkhoff_sum(c);
        let j = c.j as f64;
        let at = |x: f64| (-pot.gamma.eval(x) * s - j * pot.theta.eval(x)).exp();
        if constant {
            at(0.0)
        } else {
            at(c.left()).max(at(c.midpoint()))
        }
    })
}
