//! Periodic orthogonal discrete wavelet transform, wavelet leaders and
//! p-leaders.
//!
//! Coefficients are stored with L∞ normalisation: for a signal of `2^J`
//! samples, `c_{j,k} = 2^{(j-J)/2} d_{j,k}` where `d_{j,k}` is the output of
//! the orthonormal discrete transform. For a function with pointwise Hölder
//! exponent `h` this makes `|c_{j,k}|` of order `2^{-hj}` independently of
//! the sampling resolution.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::dyadic::{DyadicFamily, Window};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Number of coarse scales folded into the approximation remainder.
pub const COARSE_SCALES: u32 = 3;

/// Orthogonal compactly supported Daubechies filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    Haar,
    Db2,
    #[default]
    Db3,
    Db4,
}

const HAAR: [f64; 2] = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
const DB2: [f64; 4] = [0.4829629131445341, 0.8365163037378079, 0.2241438680420134, -0.1294095225512604];
const DB3: [f64; 6] = [
    0.3326705529500826,
    0.8068915093110925,
    0.4598775021184915,
    -0.1350110200102546,
    -0.0854412738820267,
    0.0352262918857095,
];
const DB4: [f64; 8] = [
    0.2303778133088964,
    0.7148465705529154,
    0.6308807679298587,
    -0.0279837694168599,
    -0.1870348117190931,
    0.0308413818355607,
    0.0328830116668852,
    -0.0105974017850690,
];

impl Filter {
    pub fn lowpass(self) -> &'static [f64] {
        match self {
            Filter::Haar => &HAAR,
            Filter::Db2 => &DB2,
            Filter::Db3 => &DB3,
            Filter::Db4 => &DB4,
        }
    }

    /// Quadrature mirror: `g[n] = (-1)^n h[L-1-n]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l).map(|n| if n % 2 == 0 { h[l - 1 - n] } else { -h[l - 1 - n] }).collect()
    }

    pub fn vanishing_moments(self) -> u32 {
        self.lowpass().len() as u32 / 2
    }

    pub fn name(self) -> &'static str {
        match self {
            Filter::Haar => "haar",
            Filter::Db2 => "db2",
            Filter::Db3 => "db3",
            Filter::Db4 => "db4",
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" | "db1" => Ok(Filter::Haar),
            "db2" => Ok(Filter::Db2),
            "db3" => Ok(Filter::Db3),
            "db4" => Ok(Filter::Db4),
            other => Err(Error::UnknownFilter(other.to_string())),
        }
    }
}

/// Detail coefficients `c_{j,k}` for scales `j_min..=j_max` plus the coarse
/// approximation remainder of `2^j_min` values.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    filter: Filter,
    j_min: u32,
    approx: Vec<f64>,
    details: Vec<Vec<f64>>,
}

impl WaveletPyramid {
    /// Assembles a pyramid from L∞-normalised detail rows; row `i` holds the
    /// `2^(j_min+i)` coefficients of scale `j_min + i`. The approximation
    /// remainder is zero.
    pub fn from_details(filter: Filter, j_min: u32, details: Vec<Vec<f64>>) -> Result<Self> {
        if details.is_empty() {
            return Err(Error::Scale("a pyramid needs at least one scale".into()));
        }
        for (i, row) in details.iter().enumerate() {
            let j = j_min + i as u32;
            if row.len() != 1usize << j {
                return Err(Error::Invalid(format!("scale {j} has {} coefficients, expected {}", row.len(), 1usize << j)));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid(format!("non-finite coefficient at scale {j}")));
            }
        }
        Ok(WaveletPyramid { filter, j_min, approx: vec![0.0; 1 << j_min], details })
    }

    pub fn filter(&self) -> Filter {
        self.filter
    }

    pub fn j_min(&self) -> u32 {
        self.j_min
    }

    pub fn j_max(&self) -> u32 {
        self.j_min + self.details.len() as u32 - 1
    }

    pub fn num_scales(&self) -> usize {
        self.details.len()
    }

    pub fn n_samples(&self) -> usize {
        1usize << (self.j_max() + 1)
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    pub fn scale(&self, j: u32) -> Option<&[f64]> {
        if j < self.j_min || j > self.j_max() {
            return None;
        }
        Some(&self.details[(j - self.j_min) as usize])
    }

    pub fn coefficient_count(&self) -> usize {
        self.details.iter().map(Vec::len).sum()
    }

    /// `c'_{j,k} = 2^{-sj} c_{j,k}`.
    pub fn frac_integrate(&self, s: f64) -> WaveletPyramid {
        let details = self
            .details
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let f = (-s * (self.j_min + i as u32) as f64).exp2();
                row.iter().map(|c| c * f).collect()
            })
            .collect();
        WaveletPyramid { filter: self.filter, j_min: self.j_min, approx: self.approx.clone(), details }
    }

    /// Reconstructs the sampled signal.
    pub fn inverse(&self) -> Vec<f64> {
        let h = self.filter.lowpass();
        let g = self.filter.highpass();
        let big_j = self.j_max() + 1;
        let mut approx = self.approx.clone();
        for (i, row) in self.details.iter().enumerate() {
            let j = self.j_min + i as u32;
            let norm = ((big_j - j) as f64 / 2.0).exp2();
            let m = approx.len() * 2;
            let mut next = vec![0.0; m];
            for k in 0..approx.len() {
                let a = approx[k];
                let d = row[k] * norm;
                for n in 0..h.len() {
                    next[(2 * k + n) % m] += h[n] * a + g[n] * d;
                }
            }
            approx = next;
        }
        approx
    }

    /// Wavelet leaders `d_λ = sup_{λ' ⊂ 3λ} |c_{λ'}|`, computed bottom-up in
    /// one pass. Boundary cubes are flagged.
    pub fn leaders(&self) -> DyadicFamily {
        self.leaders_with(Exec::default())
    }

    pub fn leaders_with(&self, exec: Exec) -> DyadicFamily {
        let mut subtree: Vec<Vec<f64>> = vec![Vec::new(); self.details.len()];
        for i in (0..self.details.len()).rev() {
            let row = &self.details[i];
            let mut out = vec![0.0; row.len()];
            match subtree.get(i + 1) {
                Some(finer) if !finer.is_empty() => {
                    exec.fill(&mut out, |k| row[k].abs().max(finer[2 * k]).max(finer[2 * k + 1]))
                }
                _ => exec.fill(&mut out, |k| row[k].abs()),
            }
            subtree[i] = out;
        }
        let rows = subtree
            .iter()
            .map(|sub| {
                let n = sub.len();
                let mut out = vec![0.0; n];
                exec.fill(&mut out, |k| {
                    let lo = k.saturating_sub(1);
                    let hi = (k + 1).min(n - 1);
                    sub[lo..=hi].iter().copied().fold(0.0, f64::max)
                });
                out
            })
            .collect();
        DyadicFamily::from_rows(self.j_min, Window::full(), rows)
            .expect("leader rows match the pyramid layout")
            .with_edge_flag(true)
    }

    /// p-leaders `(Σ_{λ' ⊂ 3λ} |c_{λ'}|^p 2^{-(j'-j)})^{1/p}`.
    pub fn p_leaders(&self, p: f64) -> Result<DyadicFamily> {
        self.p_leaders_with(p, Exec::default())
    }

    pub fn p_leaders_with(&self, p: f64, exec: Exec) -> Result<DyadicFamily> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPositiveP(p));
        }
        let mut subtree: Vec<Vec<f64>> = vec![Vec::new(); self.details.len()];
        for i in (0..self.details.len()).rev() {
            let row = &self.details[i];
            let mut out = vec![0.0; row.len()];
            match subtree.get(i + 1) {
                Some(finer) if !finer.is_empty() => exec.fill(&mut out, |k| {
                    row[k].abs().powf(p) + 0.5 * (finer[2 * k] + finer[2 * k + 1])
                }),
                _ => exec.fill(&mut out, |k| row[k].abs().powf(p)),
            }
            subtree[i] = out;
        }
        let inv = 1.0 / p;
        let rows = subtree
            .iter()
            .map(|sub| {
                let n = sub.len();
                let mut out = vec![0.0; n];
                exec.fill(&mut out, |k| {
                    let lo = k.saturating_sub(1);
                    let hi = (k + 1).min(n - 1);
                    sub[lo..=hi].iter().sum::<f64>().powf(inv)
                });
                out
            })
            .collect();
        Ok(DyadicFamily::from_rows(self.j_min, Window::full(), rows)
            .expect("p-leader rows match the pyramid layout")
            .with_edge_flag(true))
    }
}

/// Periodic DWT of a signal of length `2^J >= 16`, down to the coarse
/// remainder of `2^COARSE_SCALES` approximation coefficients.
pub fn dwt(signal: &[f64], filter: Filter) -> Result<WaveletPyramid> {
    let n = signal.len();
    if n < 16 || !n.is_power_of_two() {
        return Err(Error::Length(n, 16));
    }
    if let Some(bad) = signal.iter().find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("non-finite sample {bad}")));
    }
    let big_j = n.trailing_zeros();
    let h = filter.lowpass();
    let g = filter.highpass();
    let mut approx = signal.to_vec();
    let mut details_rev = Vec::new();
    while approx.len() > 1 << COARSE_SCALES {
        let m = approx.len();
        let half = m / 2;
        let j = half.trailing_zeros();
        let norm = ((j as f64 - big_j as f64) / 2.0).exp2();
        let mut a = vec![0.0; half];
        let mut d = vec![0.0; half];
        for k in 0..half {
            let (mut sa, mut sd) = (0.0, 0.0);
            for t in 0..h.len() {
                let v = approx[(2 * k + t) % m];
                sa += h[t] * v;
                sd += g[t] * v;
            }
            a[k] = sa;
            d[k] = sd * norm;
        }
        details_rev.push(d);
        approx = a;
    }
    details_rev.reverse();
    Ok(WaveletPyramid { filter, j_min: COARSE_SCALES, approx, details: details_rev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    #[test]
    fn filters_are_orthonormal() {
        for f in [Filter::Haar, Filter::Db2, Filter::Db3, Filter::Db4] {
            let h = f.lowpass();
            let norm: f64 = h.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12, "{f}");
            assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12);
            let g = f.highpass();
            for m in 0..f.vanishing_moments() {
                let moment: f64 = g.iter().enumerate().map(|(n, v)| v * (n as f64).powi(m as i32)).sum();
                assert!(moment.abs() < 1e-9, "{f} moment {m} = {moment}");
            }
        }
    }

    #[test]
    fn constant_signal_has_no_details() {
        let p = dwt(&vec![3.5; 256], Filter::Db3).unwrap();
        for j in p.j_min()..=p.j_max() {
            assert!(p.scale(j).unwrap().iter().all(|c| c.abs() < 1e-12));
        }
    }

    #[test]
    fn ramp_is_annihilated_in_the_interior() {
        let n = 512;
        let ramp: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        for f in [Filter::Db2, Filter::Db3, Filter::Db4] {
            let p = dwt(&ramp, f).unwrap();
            for j in p.j_min()..=p.j_max() {
                let row = p.scale(j).unwrap();
                let support = f.lowpass().len();
                // wavelets whose support wraps from 1 back to 0
                let wrapped = support - 1;
                for c in &row[..row.len().saturating_sub(wrapped)] {
                    assert!(c.abs() < 1e-10, "{f} scale {j}: {c}");
                }
            }
        }
    }

    #[test]
    fn perfect_reconstruction() {
        for f in [Filter::Haar, Filter::Db2, Filter::Db3, Filter::Db4] {
            let x = random_signal(1024, 7);
            let back = dwt(&x, f).unwrap().inverse();
            let num: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(num / den < 1e-10, "{f}: {}", num / den);
        }
    }

    #[test]
    fn dwt_errors() {
        assert!(matches!(dwt(&[0.0; 8], Filter::Db3), Err(Error::Length(8, 16))));
        assert!(matches!(dwt(&[0.0; 24], Filter::Db3), Err(Error::Length(24, 16))));
        assert!(matches!("sym8".parse::<Filter>(), Err(Error::UnknownFilter(_))));
    }

    #[test]
    fn pyramid_counts() {
        let p = dwt(&random_signal(64, 1), Filter::Db2).unwrap();
        assert_eq!(p.j_min(), 3);
        assert_eq!(p.j_max(), 5);
        assert_eq!(p.coefficient_count(), 64 - 8);
    }

    fn single_spike(j_min: u32, j_max: u32, at: (u32, usize)) -> WaveletPyramid {
        let details = (j_min..=j_max)
            .map(|j| {
                let mut row = vec![0.0; 1 << j];
                if j == at.0 {
                    row[at.1] = 1.0;
                }
                row
            })
            .collect();
        WaveletPyramid::from_details(Filter::Db3, j_min, details).unwrap()
    }

    #[test]
    fn leader_of_single_coefficient() {
        let (j0, k0) = (6u32, 21usize);
        let p = single_spike(3, 8, (j0, k0));
        let lead = p.leaders();
        for j in 3..=8u32 {
            for (cube, v) in lead.cubes(j) {
                let expected = if j <= j0 {
                    // 3λ ⊇ λ_{j0,k0} iff the ancestor of (j0,k0) at scale j is within one step of k
                    let anc = (k0 >> (j0 - j)) as i64;
                    if (anc - cube.k as i64).abs() <= 1 { 1.0 } else { 0.0 }
                } else {
                    0.0
                };
                assert_eq!(v, expected, "cube {cube:?}");
            }
        }
    }

    #[test]
    fn leaders_of_power_law_field() {
        let h = 0.6;
        let details = (3..=10u32)
            .map(|j| (0..1usize << j).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (-h * j as f64).exp2()).collect())
            .collect();
        let p = WaveletPyramid::from_details(Filter::Db3, 3, details).unwrap();
        let lead = p.leaders();
        for j in 3..=10 {
            for (_, v) in lead.cubes(j) {
                assert!((v - (-h * j as f64).exp2()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn p_leader_examples() {
        let p = single_spike(3, 7, (5, 9));
        let fam = p.p_leaders(2.0).unwrap();
        assert!((fam.get(crate::dyadic::DyadicCube { j: 5, k: 9 }).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(p.p_leaders(0.0), Err(Error::NonPositiveP(_))));
        assert!(matches!(p.p_leaders(-1.0), Err(Error::NonPositiveP(_))));
    }

    #[test]
    fn frac_integrate_composes() {
        let x = random_signal(256, 3);
        let p = dwt(&x, Filter::Db3).unwrap();
        assert_eq!(p.frac_integrate(0.0), p);
        let a = p.frac_integrate(0.25).frac_integrate(0.5);
        let b = p.frac_integrate(0.75);
        for j in p.j_min()..=p.j_max() {
            for (u, v) in a.scale(j).unwrap().iter().zip(b.scale(j).unwrap()) {
                assert!((u - v).abs() <= 1e-15 * v.abs().max(1e-300));
            }
        }
    }
}
