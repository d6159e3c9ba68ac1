use std::path::Path;

use locmf::builders::{birkhoff_family, measure_family, oscillation_family, plain_measure_family};
use locmf::estimators::{
    auto_h_grid, legendre, local_profile, monohoelder_detect, scaling_function, FitPolicy, LegendreSpectrum,
    MonoHolder, ScalingFunction, TOL_LIN,
};
use locmf::synth::{MarkovPath, ModelKind, ModelSpec, OracleSpectrum, Realization};
use locmf::wavelet::dwt;
use locmf::{io, BinnedMeasure, DyadicFamily, Window, WaveletPyramid};

use crate::config::{invalid, FamilyKind, Failure, Pipeline, Source};
use crate::report::{
    nums, Fit, Linearity, LocalResult, Num, OracleCurves, OracleSummary, Report, Spectrum, WindowResult,
};

/// Raw material a family can be built from.
enum Data {
    Measure(BinnedMeasure),
    Signal(Vec<f64>),
    Pyramid { pyramid: WaveletPyramid, samples: Option<Vec<f64>> },
    Path(MarkovPath),
    Family(DyadicFamily),
    Potential { potential: locmf::DigitPotential, depth: u32 },
}

pub struct Loaded {
    pub family: DyadicFamily,
    pub kind: String,
    pub label: String,
    pub model: Option<ModelSpec>,
    pub path: Option<MarkovPath>,
}

fn sniff(path: &Path, pipe: &Pipeline) -> Result<(Data, Option<ModelSpec>), Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(io::SIGNAL_MAGIC) {
        return Ok((Data::Signal(io::parse_signal_binary(&bytes)?), None));
    }
    let text = String::from_utf8(bytes).map_err(|_| Failure::Runtime(format!("{}: unreadable input", path.display())))?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).unwrap_or("");
    if first.starts_with('{') {
        let spec = ModelSpec::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let data = generate(&spec)?;
        return Ok((data, Some(spec)));
    }
    let data = if first.starts_with("locmf-family") {
        Data::Family(io::read_family(path)?)
    } else if first == "j,k,c" {
        Data::Pyramid { pyramid: io::parse_pyramid_csv(&text, pipe.filter)?, samples: None }
    } else if first.contains(',') {
        Data::Measure(io::parse_measure(&text)?)
    } else {
        Data::Signal(io::parse_signal_text(&text)?)
    };
    Ok((data, None))
}

fn generate(spec: &ModelSpec) -> Result<Data, Failure> {
    Ok(match spec.generate()? {
        Realization::Measure(m) => Data::Measure(m),
        Realization::Signal { samples, pyramid } => Data::Pyramid { pyramid, samples: Some(samples) },
        Realization::Jumps(p) => Data::Path(p),
        Realization::Potential { potential, depth } => Data::Potential { potential, depth },
    })
}

fn log2_len(n: usize) -> Result<u32, Failure> {
    if n < 16 || !n.is_power_of_two() {
        return Err(Failure::Runtime(format!("signal length {n} is not a power of two >= 16")));
    }
    Ok(n.trailing_zeros())
}

fn mismatch(kind: FamilyKind, what: &str) -> Failure {
    invalid(format!("family `{}` cannot be built from {what}", kind.name()))
}

fn pyramid_family(py: &WaveletPyramid, kind: FamilyKind, frac: f64) -> Result<DyadicFamily, Failure> {
    let py = if frac != 0.0 { py.frac_integrate(frac) } else { py.clone() };
    match kind {
        FamilyKind::Leaders => Ok(py.leaders()),
        FamilyKind::PLeaders(p) => Ok(py.p_leaders(p)?),
        _ => Err(mismatch(kind, "wavelet coefficients")),
    }
}

fn signal_family(samples: &[f64], kind: FamilyKind, pipe: &Pipeline) -> Result<DyadicFamily, Failure> {
    let j = log2_len(samples.len())?;
    match kind {
        FamilyKind::Oscillation(l) => {
            if pipe.frac != 0.0 {
                return Err(invalid("fractional integration applies to leader families only"));
            }
            Ok(oscillation_family(samples, l, j)?)
        }
        FamilyKind::Leaders | FamilyKind::PLeaders(_) => pyramid_family(&dwt(samples, pipe.filter)?, kind, pipe.frac),
        _ => Err(mismatch(kind, "a signal")),
    }
}

pub fn load(pipe: &Pipeline) -> Result<Loaded, Failure> {
    let (data, model, label) = match &pipe.source {
        Source::Model(m) => (generate(m)?, Some(m.clone()), m.kind.name().to_string()),
        Source::File(p) => {
            let (d, m) = sniff(p, pipe)?;
            (d, m, p.display().to_string())
        }
    };
    if pipe.frac != 0.0 && !matches!(data, Data::Signal(_) | Data::Pyramid { .. }) {
        return Err(invalid("fractional integration applies to signals and wavelet coefficients only"));
    }
    let mut path = None;
    let (family, kind) = match data {
        Data::Measure(m) => {
            let kind = pipe.family.unwrap_or(FamilyKind::PlainMeasure);
            let j = m.scale();
            let f = match kind {
                FamilyKind::Measure => measure_family(&m, j)?,
                FamilyKind::PlainMeasure => plain_measure_family(&m, j)?,
                _ => return Err(mismatch(kind, "a measure")),
            };
            (f, kind.name())
        }
        Data::Signal(s) => {
            let kind = pipe.family.unwrap_or(FamilyKind::Leaders);
            (signal_family(&s, kind, pipe)?, kind.name())
        }
        Data::Pyramid { pyramid, samples } => {
            let kind = pipe.family.unwrap_or(FamilyKind::Leaders);
            let f = match (kind, samples) {
                (FamilyKind::Oscillation(_), Some(s)) => signal_family(&s, kind, pipe)?,
                _ => pyramid_family(&pyramid, kind, pipe.frac)?,
            };
            (f, kind.name())
        }
        Data::Path(p) => {
            let kind = pipe.family.unwrap_or(FamilyKind::Oscillation(1));
            let f = signal_family(&p.samples, kind, pipe)?;
            path = Some(p);
            (f, kind.name())
        }
        Data::Potential { potential, depth } => {
            let kind = pipe.family.unwrap_or(FamilyKind::Birkhoff);
            if kind != FamilyKind::Birkhoff {
                return Err(mismatch(kind, "a digit potential"));
            }
            (birkhoff_family(&potential, depth)?, kind.name())
        }
        Data::Family(f) => {
            if pipe.family.is_some() {
                return Err(invalid("input is already a dyadic family; drop --family"));
            }
            (f, "file".to_string())
        }
    };
    Ok(Loaded { family, kind, label, model, path })
}

fn policy(pipe: &Pipeline) -> FitPolicy {
    let mut p = FitPolicy::default().including_edges(pipe.include_edges);
    if let Some((j1, j2)) = pipe.fit {
        p = p.with_range(j1, j2);
    }
    if let Some(h) = &pipe.h_grid {
        p = p.with_h_grid(h.clone());
    }
    p
}

fn spectrum_of(sf: &ScalingFunction, h_grid: &Option<Vec<f64>>) -> LegendreSpectrum {
    let h = h_grid.clone().unwrap_or_else(|| {
        let (p, t) = sf.finite_points();
        auto_h_grid(&p, &t, 0.01)
    });
    legendre(sf, &h)
}

fn spectrum_json(s: &LegendreSpectrum) -> Spectrum {
    Spectrum { h: nums(&s.h), l: nums(&s.l) }
}

fn linearity(m: &MonoHolder) -> Linearity {
    Linearity { is_linear: m.is_linear, alpha: Num(m.alpha), max_residual: Num(m.max_residual), threshold: Num(m.threshold) }
}

fn fit_json(sf: &ScalingFunction) -> Fit {
    Fit { j1: sf.fit_range.j1, j2: sf.fit_range.j2, residuals: nums(&sf.residuals) }
}

#[derive(Default)]
struct Deviation {
    tau: f64,
    excess: f64,
}

impl Deviation {
    fn add(&mut self, tau_hat: &[f64], tau: &[f64], spec: &LegendreSpectrum, d: &[f64]) {
        for (a, b) in tau_hat.iter().zip(tau) {
            if a.is_finite() && b.is_finite() {
                self.tau = self.tau.max((a - b).abs());
            }
        }
        for (l, dv) in spec.l.iter().zip(d) {
            if dv.is_finite() {
                let gap = if *l == f64::NEG_INFINITY { f64::INFINITY } else { dv - l };
                self.excess = self.excess.max(gap);
            }
        }
    }
}

/// Runs the pipeline; the simulated path comes back for jump-process inputs.
pub fn run(pipe: &Pipeline, local: bool, timestamp: Option<u64>) -> Result<(Report, Option<MarkovPath>), Failure> {
    let loaded = load(pipe)?;
    let f = &loaded.family;
    let policy = policy(pipe);
    // The jump-process oracle needs the path; reuse the one already simulated.
    let oracle: Option<OracleSpectrum> = match (&loaded.model, &loaded.path) {
        (Some(m), Some(path)) => Some(OracleSpectrum::Markov { gamma: m.gamma()?, path: path.clone() }),
        (Some(m), None) => Some(m.oracle()?),
        _ => None,
    };
    let mut dev = Deviation::default();
    let mut report = Report {
        timestamp,
        source: loaded.label.clone(),
        family: loaded.kind.clone(),
        frac: Num(pipe.frac),
        global: None,
        windows: Vec::new(),
        local: Vec::new(),
        oracle: None,
        drift_bound: loaded.path.as_ref().map(|p| Num(p.drift_bound)),
    };

    if local {
        let lp = local_profile(f, &pipe.x_grid, &pipe.radii, &pipe.p_grid, &policy)?;
        for pt in &lp.points {
            let last = pt.per_radius.last().expect("at least one radius");
            let mono = monohoelder_detect(last, TOL_LIN);
            let oc = oracle.as_ref().map(|o| {
                let tau: Vec<f64> = lp.p_grid.iter().map(|p| o.tau(pt.x, *p)).collect();
                let d: Vec<f64> = pt.legendre.h.iter().map(|h| o.spectrum(pt.x, *h)).collect();
                dev.add(&pt.tau, &tau, &pt.legendre, &d);
                OracleCurves { tau: nums(&tau), d: nums(&d) }
            });
            let h_oracle = match (&oracle, loaded.model.as_ref().map(|m| m.kind)) {
                (Some(o), Some(ModelKind::Mbm | ModelKind::Fbm)) => Some(Num(o.typical_exponent(pt.x))),
                _ => None,
            };
            report.local.push(LocalResult {
                x: Num(pt.x),
                radii: nums(&lp.radii),
                p_grid: nums(&lp.p_grid),
                tau: pt.per_radius.iter().map(|s| nums(&s.tau)).collect(),
                fit: pt.per_radius.iter().map(fit_json).collect(),
                legendre: spectrum_json(&pt.legendre),
                linearity: linearity(&mono),
                oracle: oc,
                h_oracle,
            });
        }
    } else {
        for &(lo, hi) in &pipe.windows {
            let w = Window::new(lo, hi)?;
            let sf = scaling_function(f, &w, &pipe.p_grid, &policy)?;
            let spec = spectrum_of(&sf, &pipe.h_grid);
            let oc = oracle.as_ref().map(|o| {
                let tau: Vec<f64> = sf.p_grid.iter().map(|p| o.window_tau(&w, *p)).collect();
                let d: Vec<f64> = spec.h.iter().map(|h| o.window_spectrum(&w, *h)).collect();
                dev.add(&sf.tau, &tau, &spec, &d);
                OracleCurves { tau: nums(&tau), d: nums(&d) }
            });
            report.windows.push(WindowResult {
                window: [Num(w.lo), Num(w.hi)],
                p_grid: nums(&sf.p_grid),
                tau: nums(&sf.tau),
                eta: nums(&sf.eta),
                tau_chord: nums(&sf.tau_chord),
                fit: fit_json(&sf),
                legendre: spectrum_json(&spec),
                linearity: linearity(&monohoelder_detect(&sf, TOL_LIN)),
                oracle: oc,
            });
        }
        report.global = report.windows.first().cloned();
    }
    if let Some(o) = &oracle {
        report.oracle = Some(OracleSummary {
            model: o.kind().to_string(),
            max_tau_deviation: Num(dev.tau),
            max_spectrum_excess: Num(dev.excess),
        });
    }
    Ok((report, loaded.path))
}
