use crate::dyadic::{DyadicFamily, Window};
use crate::error::{Error, Result};
use crate::numeric::fit_line;

use super::{power_sum, FitPolicy};

/// Integrability index of the discrete Besov condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BesovExponent {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesovReport {
    pub member: bool,
    /// `max_j C(j)` over the fitted scales.
    pub constant: f64,
    /// Fitted slope of `log2 C(j)` against `j`.
    pub growth: f64,
    /// `(j, C(j))` with `C(j) = 2^{(sp - d) j} Σ e_λ^p`, or
    /// `2^{sj} sup e_λ` for `p = ∞`.
    pub per_scale: Vec<(u32, f64)>,
}

/// Growth slopes up to this size are read as bounded.
const GROWTH_TOL: f64 = 1e-6;

/// Tests `2^{-dj} Σ_λ e_λ^p <= C 2^{-spj}` over the fitted scales of the full
/// interval.
pub fn besov_membership(f: &DyadicFamily, s: f64, p: BesovExponent, policy: &FitPolicy) -> Result<BesovReport> {
    let w = Window::full();
    let fit = policy.resolve(f, &w)?;
    let d = f.dim() as f64;
    let mut per_scale = Vec::with_capacity(fit.len());
    for j in fit.scales() {
        let values: Vec<f64> = f.cubes(j).filter(|(c, _)| policy.include_edges || !f.is_edge(c)).map(|(_, v)| v).collect();
        let jf = j as f64;
        let c = match p {
            BesovExponent::Infinity => values.iter().copied().fold(0.0, f64::max) * (s * jf).exp2(),
            BesovExponent::Finite(p) => {
                if p == 0.0 || !p.is_finite() {
                    return Err(Error::Range(format!("Besov index p must be nonzero, got {p}")));
                }
                let (sum, _, _) = power_sum(&values, p);
                sum * ((s * p - d) * jf).exp2()
            }
        };
        per_scale.push((j, c));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        per_scale.iter().filter(|(_, c)| *c > 0.0).map(|(j, c)| (*j as f64, c.log2())).unzip();
    let growth = fit_line(&xs, &ys).map_or(0.0, |l| l.slope);
    let constant = per_scale.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    Ok(BesovReport { member: growth <= GROWTH_TOL && constant.is_finite(), constant, growth, per_scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sup_form() {
        let f = DyadicFamily::from_fn(0, 12, Window::full(), |c| (-0.6 * c.j as f64).exp2()).unwrap();
        let pol = FitPolicy::default();
        assert!(besov_membership(&f, 0.5, BesovExponent::Infinity, &pol).unwrap().member);
        assert!(besov_membership(&f, 0.6, BesovExponent::Infinity, &pol).unwrap().member);
        let r = besov_membership(&f, 0.8, BesovExponent::Infinity, &pol).unwrap();
        assert!(!r.member);
        assert!((r.growth - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_family_is_a_member() {
        let f = DyadicFamily::from_fn(0, 10, Window::full(), |_| 0.0).unwrap();
        for s in [-1.0, 0.0, 5.0] {
            let r = besov_membership(&f, s, BesovExponent::Finite(2.0), &FitPolicy::default()).unwrap();
            assert!(r.member);
            assert_eq!(r.constant, 0.0);
        }
    }

    #[test]
    fn zero_p_is_rejected() {
        let f = DyadicFamily::from_fn(0, 10, Window::full(), |_| 1.0).unwrap();
        assert!(besov_membership(&f, 0.0, BesovExponent::Finite(0.0), &FitPolicy::default()).is_err());
    }
}
