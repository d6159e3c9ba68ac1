use super::{LocalProfile, ScalingFunction};
use crate::numeric::fit_line;

/// Default linearity tolerance, per unit of p.
pub const TOL_LIN: f64 = 0.02;

/// Least-squares fit `tau(p) = tau0 + alpha p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonoHolder {
    pub is_linear: bool,
    pub alpha: f64,
    pub tau0: f64,
    pub max_residual: f64,
    /// `tol_lin * (p_max - p_min)`.
    pub threshold: f64,
}

pub fn monohoelder_points(p: &[f64], tau: &[f64], tol_lin: f64) -> MonoHolder {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        p.iter().zip(tau).filter(|(_, t)| t.is_finite()).map(|(a, b)| (*a, *b)).unzip();
    let span = match (xs.first(), xs.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let threshold = tol_lin * span;
    match fit_line(&xs, &ys) {
        Some(line) => MonoHolder {
            is_linear: line.max_abs <= threshold,
            alpha: line.slope,
            tau0: line.intercept,
            max_residual: line.max_abs,
            threshold,
        },
        None => MonoHolder { is_linear: false, alpha: f64::NAN, tau0: f64::NAN, max_residual: f64::NAN, threshold },
    }
}

pub fn monohoelder_detect(sf: &ScalingFunction, tol_lin: f64) -> MonoHolder {
    monohoelder_points(&sf.p_grid, &sf.tau, tol_lin)
}

/// Per base point: `(x, fit)`; a linear local scaling function gives the
/// pointwise exponent `alpha(x)`.
pub fn monohoelder_local(lp: &LocalProfile, tol_lin: f64) -> Vec<(f64, MonoHolder)> {
    lp.points.iter().map(|pt| (pt.x, monohoelder_points(&lp.p_grid, &pt.tau, tol_lin))).collect()
}
