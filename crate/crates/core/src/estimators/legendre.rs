use super::ScalingFunction;

/// Values below this are reported as `-∞`.
pub const LEGENDRE_FLOOR: f64 = -10.0;

/// When the infimum over the grid sits at an end point, `H` must lie within
/// this distance of the extrapolated end slope for the value to be kept.
pub const SLOPE_SLACK: f64 = 0.05;

/// Discrete Legendre spectrum `L(H) = min_p (Hp - tau(p))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSpectrum {
    pub h: Vec<f64>,
    /// `-∞` where the infimum is unbounded.
    pub l: Vec<f64>,
    /// Grid point attaining the minimum.
    pub argmin_p: Vec<f64>,
    /// True where the minimum fell on a grid end point.
    pub at_boundary: Vec<bool>,
    pub p_grid: Vec<f64>,
}

impl LegendreSpectrum {
    /// Largest finite value and its `H`.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.h
            .iter()
            .zip(&self.l)
            .filter(|(_, l)| l.is_finite())
            .fold(None, |best: Option<(f64, f64)>, (h, l)| match best {
                Some((_, bl)) if bl >= *l => best,
                _ => Some((*h, *l)),
            })
    }

    /// Finite `(H, L)` pairs.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.h.iter().zip(&self.l).filter(|(_, l)| l.is_finite()).map(|(h, l)| (*h, *l)).collect()
    }

    pub fn value_at(&self, h: f64) -> Option<f64> {
        self.h.iter().position(|x| (x - h).abs() < 1e-12).map(|i| self.l[i])
    }
}

pub fn legendre(sf: &ScalingFunction, h_grid: &[f64]) -> LegendreSpectrum {
    let (p, tau) = sf.finite_points();
    legendre_points(&p, &tau, h_grid)
}

/// Legendre transform of the sampled concave function `(p_i, tau_i)`; `p`
/// must be increasing.
pub fn legendre_points(p: &[f64], tau: &[f64], h_grid: &[f64]) -> LegendreSpectrum {
    let n = p.len();
    let mut out = LegendreSpectrum {
        h: h_grid.to_vec(),
        l: Vec::with_capacity(h_grid.len()),
        argmin_p: Vec::with_capacity(h_grid.len()),
        at_boundary: Vec::with_capacity(h_grid.len()),
        p_grid: p.to_vec(),
    };
    if n < 2 {
        for _ in h_grid {
            out.l.push(f64::NEG_INFINITY);
            out.argmin_p.push(f64::NAN);
            out.at_boundary.push(true);
        }
        return out;
    }
    let (left_slope, right_slope) = end_slopes(p, tau);
    for &h in h_grid {
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for i in 0..n {
            let v = h * p[i] - tau[i];
            if v < best {
                best = v;
                arg = i;
            }
        }
        let boundary = arg == 0 || arg == n - 1;
        let unbounded = (arg == 0 && h - left_slope > SLOPE_SLACK) || (arg == n - 1 && right_slope - h > SLOPE_SLACK);
        let value = if unbounded || best < LEGENDRE_FLOOR { f64::NEG_INFINITY } else { best };
        out.l.push(value);
        out.argmin_p.push(p[arg]);
        out.at_boundary.push(boundary);
    }
    out
}

fn chord_slopes(p: &[f64], tau: &[f64]) -> Vec<f64> {
    p.windows(2).zip(tau.windows(2)).map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0])).collect()
}

/// Limit of a chord-slope sequence read from its last three terms. Geometric
/// convergence is extrapolated; anything else keeps the last slope.
fn slope_limit(s1: f64, s2: f64, s3: f64) -> f64 {
    let (d1, d2) = (s2 - s1, s3 - s2);
    if d1 == 0.0 || d2 == 0.0 {
        return s3;
    }
    let r = d2 / d1;
    if r > 0.0 && r < 1.0 {
        s3 + d2 * r / (1.0 - r)
    } else {
        s3
    }
}

/// Asymptotic slopes of `tau` beyond the left end (largest) and the right
/// end (smallest) of the grid.
fn end_slopes(p: &[f64], tau: &[f64]) -> (f64, f64) {
    let s = chord_slopes(p, tau);
    let n = s.len();
    if n < 3 {
        return (s[0], s[n - 1]);
    }
    (slope_limit(s[2], s[1], s[0]), slope_limit(s[n - 3], s[n - 2], s[n - 1]))
}

/// H grid with the given step covering the chord slopes of `(p, tau)` and
/// their extrapolated limits, padded by the end-point slack.
pub fn auto_h_grid(p: &[f64], tau: &[f64], step: f64) -> Vec<f64> {
    let slopes = chord_slopes(p, tau);
    if slopes.is_empty() || slopes.iter().any(|s| !s.is_finite()) {
        return Vec::new();
    }
    let (left, right) = end_slopes(p, tau);
    let lo = slopes.iter().copied().fold(right, f64::min) - SLOPE_SLACK;
    let hi = slopes.iter().copied().fold(left, f64::max) + SLOPE_SLACK;
    let a = (lo / step).floor() as i64;
    let b = (hi / step).ceil() as i64;
    (a..=b).map(|i| i as f64 * step).collect()
}

/// `tau*(p) = min_H (Hp - L(H))` over the finite part of the spectrum.
pub fn inverse_legendre(spec: &LegendreSpectrum, p_grid: &[f64]) -> Vec<f64> {
    let support = spec.support();
    p_grid
        .iter()
        .map(|&p| support.iter().map(|(h, l)| h * p - l).fold(f64::INFINITY, f64::min))
        .collect()
}
