//! Structure functions, scaling functions, Legendre spectra and the windowed
//! (local) pipeline.

mod besov;
mod legendre;
mod local;
mod monohoelder;

pub use besov::{besov_membership, BesovExponent, BesovReport};
pub use legendre::{
    auto_h_grid, inverse_legendre, legendre, legendre_points, LegendreSpectrum, LEGENDRE_FLOOR, SLOPE_SLACK,
};
pub use local::{global_from_local_check, local_profile, GlobalLocalCheck, LocalPoint, LocalProfile};
pub use monohoelder::{monohoelder_detect, monohoelder_local, monohoelder_points, MonoHolder, TOL_LIN};

use serde::{Deserialize, Serialize};

use crate::dyadic::{estimate_from_trace, DyadicFamily, ExponentEstimate, ExponentMethod, Window};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::numeric::{fit_line, pairwise_sum};

/// Inclusive scale range used for regressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitRange {
    pub j1: u32,
    pub j2: u32,
}

impl FitRange {
    pub fn new(j1: u32, j2: u32) -> Self {
        FitRange { j1, j2 }
    }

    pub fn len(&self) -> usize {
        (self.j2 + 1).saturating_sub(self.j1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> {
        self.j1..=self.j2
    }
}

/// How scaling exponents are fitted on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPolicy {
    /// Requested scale range; `None` means `3..=j_max-1`.
    pub range: Option<FitRange>,
    /// On a window the fit starts at the first scale holding at least this
    /// many cubes.
    pub min_cubes: usize,
    /// Local analysis needs this many cubes at the finest fitted scale of
    /// the smallest ball.
    pub min_finest_cubes: usize,
    /// Keep boundary cubes of edge-flagged families in structure sums.
    pub include_edges: bool,
    /// H grid for Legendre transforms; `None` picks one from the chord slopes.
    pub h_grid: Option<Vec<f64>>,
    pub exec: Exec,
}

impl Default for FitPolicy {
    fn default() -> Self {
        FitPolicy {
            range: None,
            min_cubes: 8,
            min_finest_cubes: 64,
            include_edges: false,
            h_grid: None,
            exec: Exec::default(),
        }
    }
}

impl FitPolicy {
    pub fn with_range(mut self, j1: u32, j2: u32) -> Self {
        self.range = Some(FitRange::new(j1, j2));
        self
    }

    pub fn with_h_grid(mut self, h: Vec<f64>) -> Self {
        self.h_grid = Some(h);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn including_edges(mut self, yes: bool) -> Self {
        self.include_edges = yes;
        self
    }

    /// Scale range for `f` restricted to `w`.
    pub fn resolve(&self, f: &DyadicFamily, w: &Window) -> Result<FitRange> {
        let requested = self.range.unwrap_or(FitRange::new(3, f.j_max().saturating_sub(1)));
        let mut j1 = requested.j1.max(f.j_min()).max(1);
        let j2 = requested.j2.min(f.j_max());
        while j1 <= j2 && w.cube_count(j1) < self.min_cubes {
            j1 += 1;
        }
        let fit = FitRange::new(j1, j2);
        if fit.len() < 4 {
            return Err(Error::Scale(format!(
                "fit range {}..={} on [{}, {}) leaves {} scales, need 4",
                requested.j1,
                requested.j2,
                w.lo,
                w.hi,
                fit.len()
            )));
        }
        Ok(fit)
    }
}

/// `S_j(w, p)` for every scale of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunction {
    pub p: f64,
    pub window: Window,
    pub scales: Vec<u32>,
    pub values: Vec<f64>,
    /// Cubes entering each sum.
    pub counts: Vec<usize>,
    /// Zero-valued cubes left out of each sum (only when `p <= 0`).
    pub excluded: Vec<usize>,
}

impl StructureFunction {
    pub fn at(&self, j: u32) -> Option<f64> {
        self.scales.iter().position(|s| *s == j).map(|i| self.values[i])
    }
}

/// Values of the cubes of scale `j` that enter structure sums.
fn analysis_values(f: &DyadicFamily, j: u32, include_edges: bool) -> Vec<f64> {
    f.cubes(j).filter(|(c, _)| include_edges || !f.is_edge(c)).map(|(_, v)| v).collect()
}

fn power_sum(values: &[f64], p: f64) -> (f64, usize, usize) {
    if p > 0.0 {
        let powered: Vec<f64> = values.iter().map(|v| v.powf(p)).collect();
        (pairwise_sum(&powered), values.len(), 0)
    } else {
        // zero cubes carry no information for p <= 0; p = 0 counts the support
        let powered: Vec<f64> = values.iter().filter(|v| **v > 0.0).map(|v| v.powf(p)).collect();
        let n = powered.len();
        (pairwise_sum(&powered), n, values.len() - n)
    }
}

pub fn structure_function(f: &DyadicFamily, w: &Window, p: f64) -> Result<StructureFunction> {
    structure_function_with(f, w, p, false)
}

pub fn structure_function_with(
    f: &DyadicFamily,
    w: &Window,
    p: f64,
    include_edges: bool,
) -> Result<StructureFunction> {
    let r = f.restrict(w)?;
    let mut out = StructureFunction {
        p,
        window: r.window(),
        scales: Vec::new(),
        values: Vec::new(),
        counts: Vec::new(),
        excluded: Vec::new(),
    };
    for j in r.j_min()..=r.j_max() {
        let (s, n, z) = power_sum(&analysis_values(&r, j, include_edges), p);
        out.scales.push(j);
        out.values.push(s);
        out.counts.push(n);
        out.excluded.push(z);
    }
    Ok(out)
}

/// Sampled scaling function of a family on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFunction {
    pub window: Window,
    pub p_grid: Vec<f64>,
    /// Least-squares slope of `log2 S_j` against `-j`; `+∞` when every
    /// `S_j` in the fit range vanishes.
    pub tau: Vec<f64>,
    /// Smallest chord slope `log2 S_j / (-j)` over the fit range.
    pub tau_chord: Vec<f64>,
    /// `tau - d`.
    pub eta: Vec<f64>,
    pub fit_range: FitRange,
    /// RMS regression residual per p.
    pub residuals: Vec<f64>,
    /// Zero-valued cubes per fitted scale.
    pub zero_cubes: Vec<usize>,
}

impl ScalingFunction {
    /// Grid points where `tau` is finite.
    pub fn finite_points(&self) -> (Vec<f64>, Vec<f64>) {
        self.p_grid.iter().zip(&self.tau).filter(|(_, t)| t.is_finite()).map(|(p, t)| (*p, *t)).unzip()
    }

    pub fn tau_at(&self, p: f64) -> Option<f64> {
        self.p_grid.iter().position(|q| (q - p).abs() < 1e-12).map(|i| self.tau[i])
    }
}

pub fn scaling_function(
    f: &DyadicFamily,
    w: &Window,
    p_grid: &[f64],
    policy: &FitPolicy,
) -> Result<ScalingFunction> {
    if p_grid.is_empty() {
        return Err(Error::Invalid("empty p grid".into()));
    }
    let mut grid = p_grid.to_vec();
    if grid.iter().any(|p| !p.is_finite()) {
        return Err(Error::Invalid("p grid contains non-finite values".into()));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r = f.restrict(w)?;
    let fit = policy.resolve(&r, &r.window())?;
    let per_scale: Vec<Vec<f64>> = fit.scales().map(|j| analysis_values(&r, j, policy.include_edges)).collect();
    let zero_cubes = per_scale.iter().map(|v| v.iter().filter(|x| **x == 0.0).count()).collect();
    let d = f.dim() as f64;

    let fits: Vec<(f64, f64, f64)> = policy.exec.map(&grid, |&p| {
        let mut xs = Vec::with_capacity(fit.len());
        let mut ys = Vec::with_capacity(fit.len());
        for (j, values) in fit.scales().zip(&per_scale) {
            let (s, _, _) = power_sum(values, p);
            if s > 0.0 && s.is_finite() {
                xs.push(-(j as f64));
                ys.push(s.log2());
            }
        }
        let chord = xs.iter().zip(&ys).map(|(x, y)| y / x).fold(f64::INFINITY, f64::min);
        match fit_line(&xs, &ys) {
            Some(line) => (line.slope, chord, line.rms),
            None if xs.is_empty() => (f64::INFINITY, f64::INFINITY, 0.0),
            None => (chord, chord, 0.0),
        }
    });
    let tau: Vec<f64> = fits.iter().map(|t| t.0).collect();
    Ok(ScalingFunction {
        window: r.window(),
        eta: tau.iter().map(|t| t - d).collect(),
        tau,
        tau_chord: fits.iter().map(|t| t.1).collect(),
        p_grid: grid,
        fit_range: fit,
        residuals: fits.iter().map(|t| t.2).collect(),
        zero_cubes,
    })
}

/// Exponent of `sup_{λ ⊂ w} e_λ` as a function of the scale.
pub fn uniform_exponent(
    f: &DyadicFamily,
    w: &Window,
    policy: &FitPolicy,
    method: ExponentMethod,
) -> Result<ExponentEstimate> {
    let r = f.restrict(w)?;
    let fit = policy.resolve(&r, &r.window())?;
    let trace: Vec<(u32, f64)> = fit
        .scales()
        .map(|j| (j, analysis_values(&r, j, policy.include_edges).into_iter().fold(0.0, f64::max)))
        .collect();
    Ok(estimate_from_trace(&trace, (fit.j1, fit.j2), method, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{plain_measure_family, BinnedMeasure};
    use crate::numeric::linspace_step;

    pub(crate) fn binomial(p: f64, depth: u32) -> BinnedMeasure {
        let mass = (0..1u64 << depth)
            .map(|k| {
                let ones = k.count_ones() as i32;
                p.powi(depth as i32 - ones) * (1.0 - p).powi(ones)
            })
            .collect();
        BinnedMeasure::new(mass).unwrap()
    }

    fn power_family(alpha: f64, j_max: u32) -> DyadicFamily {
        DyadicFamily::from_fn(0, j_max, Window::full(), |c| (-alpha * c.j as f64).exp2()).unwrap()
    }

    #[test]
    fn power_law_structure_function() {
        let f = power_family(1.0, 10);
        for p in [-1.0, 0.0, 2.0] {
            let s = structure_function(&f, &Window::full(), p).unwrap();
            for (j, v) in s.scales.iter().zip(&s.values) {
                let exact = ((*j as f64) * (1.0 - p)).exp2();
                assert!((v - exact).abs() <= 1e-12 * exact);
            }
        }
    }

    #[test]
    fn binomial_structure_function() {
        let f = plain_measure_family(&binomial(0.3, 12), 12).unwrap();
        let s = structure_function(&f, &Window::full(), 2.0).unwrap();
        for (j, v) in s.scales.iter().zip(&s.values) {
            assert!((v - 0.58f64.powi(*j as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_cubes_are_left_out_for_nonpositive_p() {
        let f = DyadicFamily::from_fn(0, 6, Window::full(), |c| if c.k % 2 == 0 { 1.0 } else { 0.0 }).unwrap();
        let s = structure_function(&f, &Window::full(), -1.0).unwrap();
        assert_eq!(s.at(4), Some(8.0));
        assert_eq!(s.excluded[4], 8);
        let s0 = structure_function(&f, &Window::full(), 0.0).unwrap();
        assert_eq!(s0.at(6), Some(32.0));
    }

    #[test]
    fn power_law_scaling_function() {
        let f = power_family(0.7, 12);
        let grid = linspace_step(-3.0, 3.0, 0.5);
        let sf = scaling_function(&f, &Window::full(), &grid, &FitPolicy::default()).unwrap();
        for (p, t) in sf.p_grid.iter().zip(&sf.tau) {
            assert!((t - (0.7 * p - 1.0)).abs() < 1e-12);
        }
        assert_eq!(sf.fit_range, FitRange::new(3, 11));
        assert!(sf.eta.iter().zip(&sf.tau).all(|(e, t)| *e == t - 1.0));
    }

    #[test]
    fn binomial_scaling_function_is_exact() {
        let p = 0.3;
        let f = plain_measure_family(&binomial(p, 14), 14).unwrap();
        let grid = linspace_step(-5.0, 5.0, 1.0);
        let sf = scaling_function(&f, &Window::full(), &grid, &FitPolicy::default()).unwrap();
        for (q, t) in sf.p_grid.iter().zip(&sf.tau) {
            let exact = -(p.powf(*q) + (1.0 - p).powf(*q)).log2();
            assert!((t - exact).abs() < 1e-9, "q={q}: {t} vs {exact}");
        }
        assert!((sf.tau_at(0.0).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_family_gives_infinite_tau() {
        let f = DyadicFamily::from_fn(0, 8, Window::full(), |_| 0.0).unwrap();
        let sf = scaling_function(&f, &Window::full(), &[1.0, 2.0], &FitPolicy::default()).unwrap();
        assert!(sf.tau.iter().all(|t| *t == f64::INFINITY));
    }

    #[test]
    fn short_fit_range_is_rejected() {
        let f = power_family(0.7, 12);
        let r = scaling_function(&f, &Window::full(), &[1.0], &FitPolicy::default().with_range(5, 7));
        assert!(matches!(r, Err(Error::Scale(_))));
    }

    #[test]
    fn uniform_exponent_examples() {
        let f = power_family(0.4, 10);
        let e = uniform_exponent(&f, &Window::full(), &FitPolicy::default(), ExponentMethod::Regression).unwrap();
        assert!((e.value - 0.4).abs() < 1e-12);
        let b = plain_measure_family(&binomial(0.3, 12), 12).unwrap();
        let e = uniform_exponent(&b, &Window::full(), &FitPolicy::default(), ExponentMethod::TailMin).unwrap();
        assert!((e.value + 0.7f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn window_fit_starts_where_cubes_exist() {
        let f = power_family(0.5, 14);
        let w = Window::new(0.25, 0.375).unwrap();
        let fit = FitPolicy::default().resolve(&f.restrict(&w).unwrap(), &w).unwrap();
        assert_eq!(fit, FitRange::new(6, 13));
        let full = FitPolicy::default().resolve(&f, &Window::full()).unwrap();
        assert_eq!(full, FitRange::new(3, 13));
    }
}
