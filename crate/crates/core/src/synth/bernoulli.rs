use crate::builders::BinnedMeasure;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::profile::Profile;

/// Deterministic localized Bernoulli cascade to depth `depth`.
///
/// A cylinder of generation `n - 1` with midpoint `m` hands the fraction
/// `p(m)` of its mass to its left child and `1 - p(m)` to its right child.
/// A constant `p` gives the binomial measure.
pub fn localized_bernoulli(p: &Profile, depth: u32, exec: Exec) -> Result<BinnedMeasure> {
    if depth > 24 {
        return Err(Error::Scale(format!("cascade depth {depth} exceeds 24")));
    }
    let (lo, hi) = p.range_on(0.0, 1.0);
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::Range(format!("split ratio must stay in (0, 1), got [{lo}, {hi}]")));
    }
    let mut mass = vec![1.0];
    for n in 1..=depth {
        let parents = mass;
        let width = (-((n - 1) as f64)).exp2();
        let mut next = vec![0.0; parents.len() * 2];
        exec.fill(&mut next, |i| {
            let k = i / 2;
            let ratio = p.eval((k as f64 + 0.5) * width);
            parents[k] * if i % 2 == 0 { ratio } else { 1.0 - ratio }
        });
        mass = next;
    }
    BinnedMeasure::new(mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_generation() {
        let p = Profile::linear(0.2, 0.25);
        let m = localized_bernoulli(&p, 1, Exec::Sequential).unwrap();
        assert_eq!(m.masses(), &[p.eval(0.5), 1.0 - p.eval(0.5)]);
    }

    #[test]
    fn constant_ratio_is_binomial() {
        let m = localized_bernoulli(&Profile::Constant(0.3), 12, Exec::Sequential).unwrap();
        assert!((m.masses()[0] - 0.3f64.powi(12)).abs() < 1e-20);
        assert!((m.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generations_refine() {
        let p = Profile::linear(0.2, 0.25);
        let coarse = localized_bernoulli(&p, 8, Exec::Sequential).unwrap();
        let fine = localized_bernoulli(&p, 10, Exec::Parallel).unwrap();
        let agg = fine.masses_at(8).unwrap();
        for (a, b) in coarse.masses().iter().zip(&agg) {
            assert!((a - b).abs() <= 1e-14 * a);
        }
    }
}
