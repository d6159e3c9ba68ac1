//! Scalar parameter functions: split ratios p(x), Hurst functions H(x),
//! jump indices γ(y) and Birkhoff weights.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A real function of one variable, as carried in model and config files.
///
/// JSON forms: `{"constant": 0.3}`, `{"linear": {"intercept": 0.2, "slope":
/// 0.25}}` (optionally with `"min"`/`"max"` clamps), `{"sine": {"mean": 0.5,
/// "amplitude": 0.2}}` and `{"table": [[x0, y0], [x1, y1], ...]}` for
/// piecewise-linear interpolation (constant beyond the end knots).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Constant(f64),
    Linear {
        intercept: f64,
        slope: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    Sine {
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Table(Vec<[f64; 2]>),
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn linear(intercept: f64, slope: f64) -> Self {
        Profile::Linear { intercept, slope, min: None, max: None }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Linear { intercept, slope, min, max } => {
                let mut v = intercept + slope * x;
                if let Some(lo) = min {
                    v = v.max(*lo);
                }
                if let Some(hi) = max {
                    v = v.min(*hi);
                }
                v
            }
            Profile::Sine { mean, amplitude, frequency, phase } => {
                mean + amplitude * (2.0 * PI * frequency * x + phase).sin()
            }
            Profile::Table(knots) => table_eval(knots, x),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Profile::Constant(_) => true,
            Profile::Linear { slope, .. } => *slope == 0.0,
            Profile::Sine { amplitude, .. } => *amplitude == 0.0,
            Profile::Table(k) => k.windows(2).all(|w| w[0][1] == w[1][1]),
        }
    }

    /// Range of values over `[a, b]`, sampled densely (exact for the affine
    /// and table forms, whose extrema sit at knots or endpoints).
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut pts: Vec<f64> = (0..=1024).map(|i| a + (b - a) * i as f64 / 1024.0).collect();
        if let Profile::Table(k) = self {
            pts.extend(k.iter().map(|kn| kn[0]).filter(|x| *x >= a && *x <= b));
        }
        pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            let v = self.eval(x);
            (lo.min(v), hi.max(v))
        })
    }

    /// True if the function is nondecreasing on a dense sample of `[a, b]`
    /// and strictly increases somewhere.
    pub fn is_increasing_on(&self, a: f64, b: f64) -> bool {
        let vals: Vec<f64> = (0..=1024).map(|i| self.eval(a + (b - a) * i as f64 / 1024.0)).collect();
        vals.windows(2).all(|w| w[1] >= w[0]) && vals[1024] > vals[0]
    }
}

fn table_eval(knots: &[[f64; 2]], x: f64) -> f64 {
    match knots {
        [] => f64::NAN,
        [only] => only[1],
        _ => {
            if x <= knots[0][0] {
                return knots[0][1];
            }
            for w in knots.windows(2) {
                let ([x0, y0], [x1, y1]) = (w[0], w[1]);
                if x <= x1 {
                    if x1 == x0 {
                        return y1;
                    }
                    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
                }
            }
            knots[knots.len() - 1][1]
        }
    }
}
