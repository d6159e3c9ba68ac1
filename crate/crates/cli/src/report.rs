use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real written with 12 significant digits; infinities as `"inf"` /
/// `"-inf"`, NaN as `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

pub fn round12(x: f64) -> f64 {
    if x.is_finite() && x != 0.0 {
        format!("{x:.11e}").parse().expect("formatted float")
    } else {
        x
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.0;
        if x.is_nan() {
            Ok(())
        } else if x == f64::INFINITY {
            f.write_str("inf")
        } else if x == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            let r = round12(x);
            if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
                write!(f, "{r:e}")
            } else {
                write!(f, "{r}")
            }
        }
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_nan() {
            s.serialize_none()
        } else if x.is_infinite() {
            s.serialize_str(if x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(round12(x))
        }
    }
}

struct NumVisitor;

impl<'de> Visitor<'de> for NumVisitor {
    type Value = Num;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number, \"inf\", \"-inf\" or null")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
        Ok(Num(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
        Ok(Num(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
        Ok(Num(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
        match v {
            "inf" | "+inf" => Ok(Num(f64::INFINITY)),
            "-inf" => Ok(Num(f64::NEG_INFINITY)),
            _ => Err(E::custom(format!("unexpected string `{v}`"))),
        }
    }

    fn visit_unit<E: de::Error>(self) -> Result<Num, E> {
        Ok(Num(f64::NAN))
    }

    fn visit_none<E: de::Error>(self) -> Result<Num, E> {
        Ok(Num(f64::NAN))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Num, D::Error> {
        d.deserialize_any(NumVisitor)
    }
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().map(|x| Num(*x)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub j1: u32,
    pub j2: u32,
    pub residuals: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    #[serde(rename = "H")]
    pub h: Vec<Num>,
    #[serde(rename = "L")]
    pub l: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linearity {
    pub is_linear: bool,
    pub alpha: Num,
    pub max_residual: Num,
    pub threshold: Num,
}

/// Oracle values on the same grids as the estimate they sit next to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCurves {
    pub tau: Vec<Num>,
    /// Theoretical spectrum on the estimate's H grid.
    pub d: Vec<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub window: [Num; 2],
    pub p_grid: Vec<Num>,
    pub tau: Vec<Num>,
    pub eta: Vec<Num>,
    pub tau_chord: Vec<Num>,
    pub fit: Fit,
    pub legendre: Spectrum,
    pub linearity: Linearity,
    #[serde(rename = "oracle_curves", default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCurves>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalResult {
    pub x: Num,
    pub radii: Vec<Num>,
    pub p_grid: Vec<Num>,
    /// One row per radius, largest first.
    pub tau: Vec<Vec<Num>>,
    pub fit: Vec<Fit>,
    pub legendre: Spectrum,
    pub linearity: Linearity,
    #[serde(rename = "oracle_curves", default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCurves>,
    /// Pointwise exponent of the model at x, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_oracle: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub model: String,
    /// `max |tau_hat - tau|` over finite entries.
    pub max_tau_deviation: Num,
    /// `max (d - L)` over grid points where `d` is finite.
    pub max_spectrum_excess: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub source: String,
    pub family: String,
    pub frac: Num,
    /// First window, at the top level.
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub global: Option<WindowResult>,
    /// Every analysed window, the first included.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub windows: Vec<WindowResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local: Vec<LocalResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_bound: Option<Num>,
}

fn csv(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()
}

fn blank_or(x: Option<Num>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

/// Long-format `tau.csv` and `spectrum.csv`, plus the oracle tables when the
/// report carries oracle curves.
pub fn report_plots(r: &Report, dir: &Path) -> std::io::Result<Vec<String>> {
    let mut tau_rows = Vec::new();
    let mut spec_rows = Vec::new();
    let mut otau_rows = Vec::new();
    let mut ospec_rows = Vec::new();
    let mut mbm_rows = Vec::new();
    let mut push = |x: Option<Num>, w: [Num; 2], p: &[Num], tau: &[Num], s: &Spectrum, o: Option<&OracleCurves>| {
        let lead = format!("{},{},{}", blank_or(x), w[0], w[1]);
        for (pp, t) in p.iter().zip(tau) {
            tau_rows.push(format!("{lead},{pp},{t}"));
        }
        for (h, l) in s.h.iter().zip(&s.l) {
            spec_rows.push(format!("{lead},{h},{l}"));
        }
        if let Some(o) = o {
            for ((pp, t), ot) in p.iter().zip(tau).zip(&o.tau) {
                otau_rows.push(format!("{lead},{pp},{t},{ot}"));
            }
            for ((h, l), d) in s.h.iter().zip(&s.l).zip(&o.d) {
                ospec_rows.push(format!("{lead},{h},{l},{d}"));
            }
        }
    };
    let windows: Vec<&WindowResult> = if r.windows.is_empty() { r.global.iter().collect() } else { r.windows.iter().collect() };
    for w in windows {
        push(None, w.window, &w.p_grid, &w.tau, &w.legendre, w.oracle.as_ref());
    }
    for pt in &r.local {
        let r_min = pt.radii.last().map_or(f64::NAN, |n| n.0);
        let ball = [Num((pt.x.0 - r_min).max(0.0)), Num((pt.x.0 + r_min).min(1.0))];
        let tau = pt.tau.last().cloned().unwrap_or_default();
        push(Some(pt.x), ball, &pt.p_grid, &tau, &pt.legendre, pt.oracle.as_ref());
        if let Some(h) = pt.h_oracle {
            mbm_rows.push(format!("{},{},{}", pt.x, pt.linearity.alpha, h));
        }
    }
    let mut written = Vec::new();
    csv(&dir.join("tau.csv"), "x,window_lo,window_hi,p,tau", tau_rows.into_iter())?;
    written.push("tau.csv".to_string());
    csv(&dir.join("spectrum.csv"), "x,window_lo,window_hi,H,L", spec_rows.into_iter())?;
    written.push("spectrum.csv".to_string());
    if !otau_rows.is_empty() {
        csv(&dir.join("oracle_tau.csv"), "x,window_lo,window_hi,p,tau,tau_oracle", otau_rows.into_iter())?;
        csv(&dir.join("oracle_spectrum.csv"), "x,window_lo,window_hi,H,L,d_oracle", ospec_rows.into_iter())?;
        written.push("oracle_tau.csv".to_string());
        written.push("oracle_spectrum.csv".to_string());
    }
    if !mbm_rows.is_empty() {
        csv(&dir.join("holder.csv"), "x,H_hat,H", mbm_rows.into_iter())?;
        written.push("holder.csv".to_string());
    }
    Ok(written)
}
