use super::legendre::{auto_h_grid, legendre_points, LegendreSpectrum};
use super::{scaling_function, FitPolicy, ScalingFunction};
use crate::dyadic::{DyadicFamily, Window};
use crate::error::{Error, Result};

/// Scaling functions on shrinking balls around one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPoint {
    pub x: f64,
    /// One entry per radius, largest radius first.
    pub per_radius: Vec<ScalingFunction>,
    /// `tau(x, p)`: the scaling function on the smallest ball.
    pub tau: Vec<f64>,
    /// `inf_p (Hp - tau(x, p))`.
    pub legendre: LegendreSpectrum,
}

impl LocalPoint {
    /// Largest violation of "tau grows as the radius shrinks", for one p.
    pub fn monotonicity_defect(&self, p_index: usize) -> f64 {
        self.per_radius
            .windows(2)
            .map(|w| w[0].tau[p_index] - w[1].tau[p_index])
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalProfile {
    pub p_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// Decreasing.
    pub radii: Vec<f64>,
    pub points: Vec<LocalPoint>,
}

impl LocalProfile {
    pub fn point(&self, x: f64) -> Option<&LocalPoint> {
        self.points.iter().find(|pt| (pt.x - x).abs() < 1e-12)
    }

    /// True when, for every x and p, `tau` along decreasing radii never drops
    /// by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.points.iter().all(|pt| (0..self.p_grid.len()).all(|i| pt.monotonicity_defect(i) <= tol))
    }
}

pub fn local_profile(
    f: &DyadicFamily,
    x_grid: &[f64],
    radii: &[f64],
    p_grid: &[f64],
    policy: &FitPolicy,
) -> Result<LocalProfile> {
    if x_grid.is_empty() || radii.is_empty() {
        return Err(Error::Invalid("local analysis needs base points and radii".into()));
    }
    if let Some(x) = x_grid.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::Domain(*x));
    }
    let mut radii = radii.to_vec();
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Range("radii must be positive".into()));
    }
    radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
    radii.dedup();
    let mut p_sorted = p_grid.to_vec();
    p_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let r_min = *radii.last().unwrap();
    for &x in x_grid {
        let w = Window::ball(x, r_min)?;
        let j2 = policy.range.map_or(f.j_max().saturating_sub(1), |r| r.j2).min(f.j_max());
        let cubes = w.cube_count(j2);
        if cubes < policy.min_finest_cubes {
            return Err(Error::RadiusTooSmall { radius: r_min, cubes, scale: j2, needed: policy.min_finest_cubes });
        }
        policy.resolve(f, &w)?;
    }

    // parallelism is spent across base points; each scaling function runs inline
    let inner = FitPolicy { exec: crate::exec::Exec::Sequential, ..policy.clone() };
    let points = policy.exec.map(x_grid, |&x| -> Result<LocalPoint> {
        let per_radius = radii
            .iter()
            .map(|&r| scaling_function(f, &Window::ball(x, r)?, &p_sorted, &inner))
            .collect::<Result<Vec<_>>>()?;
        let last = per_radius.last().expect("at least one radius");
        let tau = last.tau.clone();
        let (p, t) = last.finite_points();
        let h = policy.h_grid.clone().unwrap_or_else(|| auto_h_grid(&p, &t, 0.01));
        let legendre = legendre_points(&p, &t, &h);
        Ok(LocalPoint { x, per_radius, tau, legendre })
    });
    Ok(LocalProfile {
        p_grid: p_sorted,
        x_grid: x_grid.to_vec(),
        radii,
        points: points.into_iter().collect::<Result<Vec<_>>>()?,
    })
}

/// Comparison of the scaling function on `w` with the infimum of the local
/// scaling functions over the base points in `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalLocalCheck {
    pub window: Window,
    pub p_grid: Vec<f64>,
    pub global_tau: Vec<f64>,
    pub local_inf: Vec<f64>,
    /// Base point attaining the infimum.
    pub argmin_x: Vec<f64>,
    /// `|global - local_inf|` per p.
    pub discrepancy: Vec<f64>,
}

impl GlobalLocalCheck {
    pub fn max_discrepancy(&self) -> f64 {
        self.discrepancy.iter().copied().fold(0.0, f64::max)
    }
}

pub fn global_from_local_check(
    lp: &LocalProfile,
    f: &DyadicFamily,
    w: &Window,
    policy: &FitPolicy,
) -> Result<GlobalLocalCheck> {
    let inside: Vec<&LocalPoint> = lp.points.iter().filter(|pt| w.contains(pt.x)).collect();
    let r_min = *lp.radii.last().ok_or(Error::Coverage { lo: w.lo, hi: w.hi })?;
    // the smallest balls around the base points must cover the window
    let mut reach = w.lo;
    let mut xs: Vec<f64> = inside.iter().map(|pt| pt.x).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for x in &xs {
        if x - r_min > reach + 1e-12 {
            break;
        }
        reach = reach.max(x + r_min);
    }
    if xs.is_empty() || reach < w.hi - 1e-12 {
        return Err(Error::Coverage { lo: w.lo, hi: w.hi });
    }
    let global = scaling_function(f, w, &lp.p_grid, policy)?;
    let mut local_inf = Vec::with_capacity(lp.p_grid.len());
    let mut argmin_x = Vec::with_capacity(lp.p_grid.len());
    for i in 0..lp.p_grid.len() {
        let (x, t) = inside
            .iter()
            .map(|pt| (pt.x, pt.tau[i]))
            .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        local_inf.push(t);
        argmin_x.push(x);
    }
    let discrepancy = global
        .tau
        .iter()
        .zip(&local_inf)
        .map(|(g, l)| if g == l { 0.0 } else { (g - l).abs() })
        .collect();
    Ok(GlobalLocalCheck {
        window: *w,
        p_grid: lp.p_grid.clone(),
        global_tau: global.tau,
        local_inf,
        argmin_x,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::plain_measure_family;
    use crate::estimators::tests::binomial;
    use crate::numeric::linspace_step;

    #[test]
    fn homogeneous_binomial_is_locally_global() {
        let pm = 0.3;
        let f = plain_measure_family(&binomial(pm, 16), 16).unwrap();
        let q = linspace_step(-2.0, 3.0, 1.0);
        let xs = [0.3, 0.5, 0.7];
        let lp = local_profile(&f, &xs, &[0.25, 0.125], &q, &FitPolicy::default()).unwrap();
        for pt in &lp.points {
            for (qq, t) in lp.p_grid.iter().zip(&pt.tau) {
                let exact = -(pm.powf(*qq) + (1.0 - pm).powf(*qq)).log2();
                assert!((t - exact).abs() < 0.02, "x={} q={qq}: {t} vs {exact}", pt.x);
            }
        }
    }

    #[test]
    fn tiny_radius_is_rejected() {
        let f = DyadicFamily::from_fn(0, 10, Window::full(), |c| (-(c.j as f64)).exp2()).unwrap();
        let r = local_profile(&f, &[0.5], &[0.01], &[1.0], &FitPolicy::default());
        assert!(matches!(r, Err(Error::RadiusTooSmall { .. })));
    }

    #[test]
    fn coverage_is_checked() {
        let f = DyadicFamily::from_fn(0, 14, Window::full(), |c| (-0.5 * c.j as f64).exp2()).unwrap();
        let q = [0.0, 1.0, 2.0];
        let lp = local_profile(&f, &[0.1, 0.3], &[0.0625], &q, &FitPolicy::default()).unwrap();
        let r = global_from_local_check(&lp, &f, &Window::full(), &FitPolicy::default());
        assert!(matches!(r, Err(Error::Coverage { .. })));
        let xs: Vec<f64> = (0..8).map(|i| (i as f64 + 0.5) / 8.0).collect();
        let lp = local_profile(&f, &xs, &[0.0625], &q, &FitPolicy::default()).unwrap();
        let c = global_from_local_check(&lp, &f, &Window::full(), &FitPolicy::default()).unwrap();
        assert!(c.max_discrepancy() < 1e-9, "{c:?}");
    }
}
