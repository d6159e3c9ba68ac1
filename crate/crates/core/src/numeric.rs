//! Small numerical helpers shared by the estimators.

/// Pairwise (cascade) summation. The association order depends only on the
/// slice length, which keeps structure sums reproducible.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Largest absolute residual.
    pub max_abs: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss = 0.0;
    let mut max_abs: f64 = 0.0;
    for (a, b) in x.iter().zip(y) {
        let r = b - (intercept + slope * a);
        ss += r * r;
        max_abs = max_abs.max(r.abs());
    }
    Some(LineFit { slope, intercept, rms: (ss / nf).sqrt(), max_abs })
}

/// Binary entropy in bits.
pub fn entropy2(a: f64) -> f64 {
    let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
    term(a) + term(1.0 - a)
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let a: f64 = parts[0].trim().parse().ok()?;
    let b: f64 = parts[1].trim().parse().ok()?;
    let step: f64 = parts[2].trim().parse().ok()?;
    if !(step > 0.0) || b < a {
        return None;
    }
    Some(linspace_step(a, b, step))
}

/// Inclusive grid `a, a+step, ..., <= b` built by multiplication so that
/// values such as `0` are hit exactly.
pub fn linspace_step(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| a + step * i as f64).collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
