use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::profile::Profile;

/// Default truncation of the jump measure.
pub const DEFAULT_TRUNCATION: f64 = 1.0 / 1_048_576.0;

/// Jump indices must stay in `[GAMMA_MARGIN, 1 - GAMMA_MARGIN]`.
pub const GAMMA_MARGIN: f64 = 0.01;

/// One simulated path of the increasing jump process.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPath {
    pub horizon: f64,
    /// `M_t` at `t_i = i T / N`.
    pub samples: Vec<f64>,
    /// `(time, size)` of every simulated jump.
    pub jumps: Vec<(f64, f64)>,
    pub truncation: f64,
    /// Upper bound on the neglected small-jump drift over `[0, T]`.
    pub drift_bound: f64,
}

impl MarkovPath {
    /// State at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> f64 {
        let n = self.jumps.partition_point(|(s, _)| *s <= t);
        self.jumps[..n].iter().map(|(_, u)| u).sum()
    }

    /// Sample index whose cell `[t_i, t_{i+1})` contains `t`.
    pub fn sample_index(&self, t: f64) -> usize {
        let n = self.samples.len();
        ((t / self.horizon * n as f64).floor() as usize).min(n - 1)
    }
}

/// Small-jump drift `∫_0^ε u ν_γ(du) = γ ε^{1-γ} / (1 - γ)` per unit time.
pub fn neglected_drift(gamma: f64, truncation: f64) -> f64 {
    gamma / (1.0 - gamma) * truncation.powf(1.0 - gamma)
}

/// Rate of jumps larger than `ε`: `ε^{-γ} - 1`.
pub fn jump_rate(gamma: f64, truncation: f64) -> f64 {
    truncation.powf(-gamma) - 1.0
}

pub fn validate_gamma(gamma: &Profile) -> Result<()> {
    let (lo, hi) = gamma.range_on(0.0, 64.0);
    if !(lo >= GAMMA_MARGIN && hi <= 1.0 - GAMMA_MARGIN) {
        return Err(Error::Range(format!("gamma must stay in [{GAMMA_MARGIN}, {}], got [{lo}, {hi}]", 1.0 - GAMMA_MARGIN)));
    }
    if !gamma.is_increasing_on(0.0, 64.0) {
        return Err(Error::Range("gamma must be increasing".into()));
    }
    Ok(())
}

/// Simulates `M` on `[0, T]` with `M_0 = 0`.
///
/// Between jumps the state is constant, so the waiting time to the next jump
/// is exponential with rate `Λ(M)`; the jump size follows the power law
/// `γ u^{-1-γ}` restricted to `[ε, 1]`, drawn by inverse CDF. The `i`-th jump
/// reads its two uniforms at a fixed position of the counter-based stream.
pub fn simulate(gamma: &Profile, horizon: f64, n: usize, truncation: f64, seed: u64) -> Result<MarkovPath> {
    if !(truncation > 0.0 && truncation < 1.0) {
        return Err(Error::Truncation(truncation));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Range(format!("horizon must be positive, got {horizon}")));
    }
    if n == 0 {
        return Err(Error::Range("sample count must be positive".into()));
    }
    validate_gamma(gamma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jumps = Vec::new();
    let (mut t, mut y) = (0.0f64, 0.0f64);
    let mut gamma_max: f64 = 0.0;
    loop {
        let g = gamma.eval(y);
        gamma_max = gamma_max.max(g);
        rng.set_word_pos(4 * jumps.len() as u128);
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        t += -(1.0 - u1).ln() / jump_rate(g, truncation);
        if t > horizon {
            break;
        }
        let top = truncation.powf(-g);
        let size = (top - u2 * (top - 1.0)).powf(-1.0 / g);
        y += size;
        jumps.push((t, size));
    }
    let mut samples = Vec::with_capacity(n);
    let (mut idx, mut level) = (0usize, 0.0);
    for i in 0..n {
        let ti = i as f64 * horizon / n as f64;
        while idx < jumps.len() && jumps[idx].0 <= ti {
            level += jumps[idx].1;
            idx += 1;
        }
        samples.push(level);
    }
    Ok(MarkovPath {
        horizon,
        samples,
        jumps,
        truncation,
        drift_bound: neglected_drift(gamma_max, truncation) * horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma() -> Profile {
        Profile::Linear { intercept: 0.5, slope: 0.25, min: None, max: Some(0.9) }
    }

    #[test]
    fn path_is_monotone_from_zero() {
        let p = simulate(&gamma(), 1.0, 4096, 1e-4, 3).unwrap();
        assert_eq!(p.samples[0], 0.0);
        assert!(p.samples.windows(2).all(|w| w[1] >= w[0]));
        assert!(p.jumps.iter().all(|(_, u)| *u >= 1e-4 && *u <= 1.0));
        assert!(p.jumps.windows(2).all(|w| w[1].0 > w[0].0));
        let again = simulate(&gamma(), 1.0, 4096, 1e-4, 3).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn neglected_drift_matches_quadrature() {
        for g in [0.3, 0.5, 0.8] {
            let eps: f64 = 1e-3;
            let n = 200_000;
            // midpoint rule on a log grid for ∫_0^ε u γ u^{-1-γ} du
            let lo: f64 = 1e-60;
            let (a, b) = (lo.ln(), eps.ln());
            let h = (b - a) / n as f64;
            let quad: f64 = (0..n)
                .map(|i| {
                    let u = (a + (i as f64 + 0.5) * h).exp();
                    g * u.powf(-g) * u * h
                })
                .sum();
            let exact = neglected_drift(g, eps);
            assert!((quad - exact).abs() < 1e-5 * exact, "{g}: {quad} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(simulate(&gamma(), 1.0, 16, 0.0, 1), Err(Error::Truncation(_))));
        assert!(simulate(&Profile::Constant(0.5), 1.0, 16, 1e-3, 1).is_err());
        assert!(simulate(&Profile::linear(0.5, -0.1), 1.0, 16, 1e-3, 1).is_err());
    }
}
