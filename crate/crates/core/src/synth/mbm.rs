use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::profile::Profile;
use crate::wavelet::{Filter, WaveletPyramid, COARSE_SCALES};

/// Reduced wavelet model of multifractional Brownian motion:
/// `c_{j,k} = ε_{j,k} 2^{-H(k 2^-j) j}` with independent standard Gaussians
/// `ε`. Scale `j` draws from its own stream of the seeded generator, so the
/// result does not depend on how scales are scheduled.
pub fn mbm_pyramid(h: &Profile, depth: u32, filter: Filter, seed: u64, exec: Exec) -> Result<WaveletPyramid> {
    if !(COARSE_SCALES + 2..=20).contains(&depth) {
        return Err(Error::Scale(format!("MBM depth must be in {}..=20, got {depth}", COARSE_SCALES + 2)));
    }
    let (lo, hi) = h.range_on(0.0, 1.0);
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::Range(format!("Hurst function must stay in (0, 1), got [{lo}, {hi}]")));
    }
    let scales: Vec<u32> = (COARSE_SCALES..depth).collect();
    let details = exec.map(&scales, |&j| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        let width = (-(j as f64)).exp2();
        (0..1u64 << j)
            .map(|k| {
                let eps: f64 = rng.sample(StandardNormal);
                eps * (-h.eval(k as f64 * width) * j as f64).exp2()
            })
            .collect()
    });
    WaveletPyramid::from_details(filter, COARSE_SCALES, details)
}
