use std::f64::consts::LN_2;

use crate::builders::DigitPotential;
use crate::dyadic::Window;
use crate::numeric::entropy2;
use crate::profile::Profile;

use super::markov::MarkovPath;

/// Closed-form local scaling functions, spectra and exponents of the
/// reference models.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpectrum {
    /// Localized Bernoulli cascade (binomial when `p` is constant).
    Bernoulli { p: Profile },
    CantorPair,
    /// Leaders of the reduced MBM model.
    Mbm { h: Profile },
    /// Jump process; local quantities depend on the state `M_t`.
    Markov { gamma: Profile, path: MarkovPath },
    Birkhoff { potential: DigitPotential },
}

/// Base points used for infima and suprema over a window.
const SWEEP: usize = 2048;

fn bernoulli_tau(p: f64, q: f64) -> f64 {
    -(p.powf(q) + (1.0 - p).powf(q)).log2()
}

/// Spectrum of the binomial measure of parameter `p`, parametrised by the
/// frequency of zero digits.
fn bernoulli_spectrum(p: f64, h: f64) -> f64 {
    let (lp, lq) = (-p.log2(), -(1.0 - p).log2());
    if (lp - lq).abs() < 1e-15 {
        return if (h - lp).abs() < 1e-12 { 1.0 } else { f64::NEG_INFINITY };
    }
    let alpha = (h - lq) / (lp - lq);
    if !(-1e-12..=1.0 + 1e-12).contains(&alpha) {
        return f64::NEG_INFINITY;
    }
    entropy2(alpha.clamp(0.0, 1.0))
}

impl OracleSpectrum {
    pub fn kind(&self) -> &'static str {
        match self {
            OracleSpectrum::Bernoulli { p } if p.is_constant() => "binomial",
            OracleSpectrum::Bernoulli { .. } => "localized_bernoulli",
            OracleSpectrum::CantorPair => "cantor_pair",
            OracleSpectrum::Mbm { .. } => "mbm",
            OracleSpectrum::Markov { .. } => "markov_jump",
            OracleSpectrum::Birkhoff { .. } => "birkhoff",
        }
    }

    /// For the jump process, base points `x ∈ [0, 1)` stand for times `xT`.
    fn markov_state(path: &MarkovPath, x: f64) -> f64 {
        path.samples[path.sample_index(x * path.horizon)]
    }

    /// Local scaling function `τ(x, p)`.
    pub fn tau(&self, x: f64, p: f64) -> f64 {
        match self {
            OracleSpectrum::Bernoulli { p: ratio } => bernoulli_tau(ratio.eval(x), p),
            OracleSpectrum::CantorPair => {
                if x < 0.5 {
                    (p - 1.0) / 2.0
                } else {
                    (p - 1.0) / 4.0
                }
            }
            OracleSpectrum::Mbm { h } => h.eval(x) * p - 1.0,
            OracleSpectrum::Markov { gamma, path } => {
                let g = gamma.eval(Self::markov_state(path, x));
                Self::markov_tau(g, p)
            }
            OracleSpectrum::Birkhoff { potential } => {
                let g = potential.gamma.eval(x);
                let th = potential.theta.eval(x);
                (-potential.pressure(-g * p) + th * p) / LN_2
            }
        }
    }

    /// `inf_{h ∈ [0, 1/γ]} (hp - hγ)`.
    pub fn markov_tau(gamma: f64, p: f64) -> f64 {
        if p >= gamma {
            0.0
        } else {
            (p - gamma) / gamma
        }
    }

    /// Jump-process spectrum at a continuity time with state `y`.
    pub fn markov_spectrum(gamma: f64, h: f64) -> f64 {
        if (0.0..=1.0 / gamma).contains(&h) {
            h * gamma
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Local spectrum `d(x, H)`; `-∞` off the support.
    pub fn spectrum(&self, x: f64, h: f64) -> f64 {
        match self {
            OracleSpectrum::Bernoulli { p } => bernoulli_spectrum(p.eval(x), h),
            OracleSpectrum::CantorPair => {
                let dim = if x < 0.5 { 0.5 } else { 0.25 };
                if (h - dim).abs() < 1e-12 {
                    dim
                } else {
                    f64::NEG_INFINITY
                }
            }
            // the Legendre transform of H(x)p - 1
            OracleSpectrum::Mbm { h: hurst } => {
                if (h - hurst.eval(x)).abs() < 1e-12 {
                    1.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            OracleSpectrum::Markov { gamma, path } => {
                Self::markov_spectrum(gamma.eval(Self::markov_state(path, x)), h)
            }
            OracleSpectrum::Birkhoff { potential } => {
                let g = potential.gamma.eval(x);
                let th = potential.theta.eval(x);
                let mean = (h * LN_2 - th) / g;
                let (a, b) = (potential.a, potential.b);
                if potential.is_degenerate() {
                    return if (mean - a).abs() < 1e-12 { 1.0 } else { f64::NEG_INFINITY };
                }
                // mean = αa + (1 - α)b with α the frequency of zero digits
                let alpha = (mean - b) / (a - b);
                if (-1e-12..=1.0 + 1e-12).contains(&alpha) {
                    entropy2(alpha.clamp(0.0, 1.0))
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Pointwise exponent at Lebesgue-typical points near `x`.
    pub fn typical_exponent(&self, x: f64) -> f64 {
        match self {
            OracleSpectrum::Bernoulli { p } => {
                let r = p.eval(x);
                -(r.log2() + (1.0 - r).log2()) / 2.0
            }
            OracleSpectrum::CantorPair => {
                if x < 0.5 {
                    0.5
                } else {
                    0.25
                }
            }
            OracleSpectrum::Mbm { h } => h.eval(x),
            OracleSpectrum::Markov { gamma, path } => 1.0 / gamma.eval(Self::markov_state(path, x)),
            OracleSpectrum::Birkhoff { potential } => {
                let g = potential.gamma.eval(x);
                (g * (potential.a + potential.b) / 2.0 + potential.theta.eval(x)) / LN_2
            }
        }
    }

    /// Dyadic exponent of the Bernoulli cascades from the first `depth`
    /// binary digits of `x`: `-N_0 log2 p(x) - (1 - N_0) log2 (1 - p(x))`.
    pub fn bernoulli_dyadic_exponent(&self, x: f64, depth: u32) -> Option<f64> {
        let OracleSpectrum::Bernoulli { p } = self else { return None };
        let k = (x * (depth as f64).exp2()).floor() as u64;
        let zeros = depth - k.count_ones();
        let n0 = zeros as f64 / depth as f64;
        let r = p.eval(x);
        Some(-n0 * r.log2() - (1.0 - n0) * (1.0 - r).log2())
    }

    fn sweep(w: &Window) -> impl Iterator<Item = f64> + '_ {
        (0..SWEEP).map(move |i| w.lo + w.width() * (i as f64 + 0.5) / SWEEP as f64)
    }

    /// `τ^w(p) = inf_{x ∈ w} τ(x, p)`.
    pub fn window_tau(&self, w: &Window, p: f64) -> f64 {
        match self {
            OracleSpectrum::CantorPair => {
                let mut t = f64::INFINITY;
                if w.lo < 0.5 {
                    t = t.min(self.tau(0.0, p));
                }
                if w.hi > 0.5 {
                    t = t.min(self.tau(0.75, p));
                }
                t
            }
            _ => Self::sweep(w).map(|x| self.tau(x, p)).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn global_tau(&self, p: f64) -> f64 {
        self.window_tau(&Window::full(), p)
    }

    /// `sup_{x ∈ w} d(x, H)`.
    pub fn window_spectrum(&self, w: &Window, h: f64) -> f64 {
        match self {
            OracleSpectrum::CantorPair => {
                let mut d = f64::NEG_INFINITY;
                if w.lo < 0.5 {
                    d = d.max(self.spectrum(0.0, h));
                }
                if w.hi > 0.5 {
                    d = d.max(self.spectrum(0.75, h));
                }
                d
            }
            OracleSpectrum::Mbm { h: hurst } if !hurst.is_constant() => {
                // away from the constant case only the Legendre bound is known
                let (lo, hi) = hurst.range_on(w.lo, w.hi);
                if h >= lo && h <= hi {
                    1.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => Self::sweep(w).map(|x| self.spectrum(x, h)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn global_spectrum(&self, h: f64) -> f64 {
        self.window_spectrum(&Window::full(), h)
    }
}
