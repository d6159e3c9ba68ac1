//! Seeded generators for the reference models and their closed-form
//! spectra.
//!
//! Model files are JSON:
//!
//! ```json
//! {"kind": "localized_bernoulli", "params": {"p": {"linear": {"intercept": 0.2, "slope": 0.25}}}, "J": 18, "seed": 0}
//! ```
//!
//! Scalar parameters accept either a number or a [`Profile`] object.

mod bernoulli;
mod cantor;
mod markov;
mod mbm;
mod oracle;

pub use bernoulli::localized_bernoulli;
pub use cantor::cantor_pair;
pub use markov::{jump_rate, neglected_drift, simulate, MarkovPath, DEFAULT_TRUNCATION, GAMMA_MARGIN};
pub use mbm::mbm_pyramid;
pub use oracle::OracleSpectrum;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::builders::{BinnedMeasure, DigitPotential};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::profile::Profile;
use crate::wavelet::{Filter, WaveletPyramid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Binomial,
    LocalizedBernoulli,
    CantorPair,
    Mbm,
    Fbm,
    MarkovJump,
    Birkhoff,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Binomial => "binomial",
            ModelKind::LocalizedBernoulli => "localized_bernoulli",
            ModelKind::CantorPair => "cantor_pair",
            ModelKind::Mbm => "mbm",
            ModelKind::Fbm => "fbm",
            ModelKind::MarkovJump => "markov_jump",
            ModelKind::Birkhoff => "birkhoff",
        }
    }

    pub const ALL: [ModelKind; 7] = [
        ModelKind::Binomial,
        ModelKind::LocalizedBernoulli,
        ModelKind::CantorPair,
        ModelKind::Mbm,
        ModelKind::Fbm,
        ModelKind::MarkovJump,
        ModelKind::Birkhoff,
    ];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnsupportedKind(s.to_string()))
    }
}

/// A number or a function of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamFn {
    Number(f64),
    Function(Profile),
}

impl ParamFn {
    pub fn profile(&self) -> Profile {
        match self {
            ParamFn::Number(v) => Profile::Constant(*v),
            ParamFn::Function(p) => p.clone(),
        }
    }
}

impl From<Profile> for ParamFn {
    fn from(p: Profile) -> Self {
        ParamFn::Function(p)
    }
}

impl From<f64> for ParamFn {
    fn from(v: f64) -> Self {
        ParamFn::Number(v)
    }
}

/// Kind-specific parameters; each kind reads the fields it needs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Split ratio (binomial, localized Bernoulli).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<ParamFn>,
    /// Hurst function (mbm, fbm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<ParamFn>,
    /// Jump index of the state (markov_jump) or Birkhoff weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<ParamFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ParamFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Filter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub params: ModelParams,
    /// Finest scale: cascade depth, or `log2` of the sample count.
    #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    /// Sample count (jump process; for mbm an alternative to `J`).
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Time horizon of the jump process.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// What a generator produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    Measure(BinnedMeasure),
    Signal { samples: Vec<f64>, pyramid: WaveletPyramid },
    Jumps(MarkovPath),
    Potential { potential: DigitPotential, depth: u32 },
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec { kind, params: ModelParams::default(), depth: None, samples: None, horizon: None, seed: 0 }
    }

    pub fn binomial(p: f64, depth: u32) -> Self {
        let mut s = Self::new(ModelKind::Binomial);
        s.params.p = Some(p.into());
        s.depth = Some(depth);
        s
    }

    pub fn localized_bernoulli(p: Profile, depth: u32) -> Self {
        let mut s = Self::new(ModelKind::LocalizedBernoulli);
        s.params.p = Some(p.into());
        s.depth = Some(depth);
        s
    }

    pub fn cantor_pair(depth: u32) -> Self {
        let mut s = Self::new(ModelKind::CantorPair);
        s.depth = Some(depth);
        s
    }

    pub fn mbm(h: Profile, depth: u32, seed: u64) -> Self {
        let mut s = Self::new(if h.is_constant() { ModelKind::Fbm } else { ModelKind::Mbm });
        s.params.h = Some(h.into());
        s.depth = Some(depth);
        s.seed = seed;
        s
    }

    pub fn markov_jump(gamma: Profile, horizon: f64, samples: usize, seed: u64) -> Self {
        let mut s = Self::new(ModelKind::MarkovJump);
        s.params.gamma = Some(gamma.into());
        s.horizon = Some(horizon);
        s.samples = Some(samples);
        s.seed = seed;
        s
    }

    pub fn birkhoff(potential: &DigitPotential, depth: u32) -> Self {
        let mut s = Self::new(ModelKind::Birkhoff);
        s.params.a = Some(potential.a);
        s.params.b = Some(potential.b);
        s.params.gamma = Some(potential.gamma.clone().into());
        s.params.theta = Some(potential.theta.clone().into());
        s.depth = Some(depth);
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    fn require_depth(&self) -> Result<u32> {
        if let Some(j) = self.depth {
            return Ok(j);
        }
        if let Some(n) = self.samples {
            if n.is_power_of_two() {
                return Ok(n.trailing_zeros());
            }
            return Err(Error::Length(n, 16));
        }
        Err(Error::Invalid(format!("{} needs \"J\"", self.kind)))
    }

    fn param(&self, name: &str, value: &Option<ParamFn>) -> Result<Profile> {
        value.as_ref().map(ParamFn::profile).ok_or_else(|| Error::Invalid(format!("{} needs params.{name}", self.kind)))
    }

    pub fn split_ratio(&self) -> Result<Profile> {
        self.param("p", &self.params.p)
    }

    pub fn hurst(&self) -> Result<Profile> {
        self.param("h", &self.params.h)
    }

    pub fn gamma(&self) -> Result<Profile> {
        self.param("gamma", &self.params.gamma)
    }

    pub fn potential(&self) -> Result<DigitPotential> {
        let a = self.params.a.ok_or_else(|| Error::Invalid("birkhoff needs params.a".into()))?;
        let b = self.params.b.ok_or_else(|| Error::Invalid("birkhoff needs params.b".into()))?;
        let mut pot = DigitPotential::new(a, b);
        if let Some(g) = &self.params.gamma {
            pot.gamma = g.profile();
        }
        if let Some(t) = &self.params.theta {
            pot.theta = t.profile();
        }
        Ok(pot)
    }

    pub fn truncation(&self) -> f64 {
        self.params.truncation.unwrap_or(DEFAULT_TRUNCATION)
    }

    /// Checks the parameter ranges of the kind.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ModelKind::Binomial => {
                let p = self.split_ratio()?;
                let (lo, hi) = p.range_on(0.0, 1.0);
                if !p.is_constant() || !(lo > 0.0 && hi < 1.0) {
                    return Err(Error::Range(format!("binomial p must be a constant in (0, 1), got [{lo}, {hi}]")));
                }
                self.depth_in(4, 24)
            }
            ModelKind::LocalizedBernoulli => {
                let (lo, hi) = self.split_ratio()?.range_on(0.0, 1.0);
                if !(lo > 0.0 && hi < 0.5) {
                    return Err(Error::Range(format!("p(x) must stay in (0, 1/2), got [{lo}, {hi}]")));
                }
                self.depth_in(4, 24)
            }
            ModelKind::CantorPair => self.depth_in(8, 20),
            ModelKind::Mbm | ModelKind::Fbm => {
                let h = self.hurst()?;
                let (lo, hi) = h.range_on(0.0, 1.0);
                if !(lo > 0.0 && hi < 1.0) {
                    return Err(Error::Range(format!("H(x) must stay in a compact part of (0, 1), got [{lo}, {hi}]")));
                }
                if self.kind == ModelKind::Fbm && !h.is_constant() {
                    return Err(Error::Range("fbm needs a constant H".into()));
                }
                if let Some(n) = self.samples {
                    if !n.is_power_of_two() {
                        return Err(Error::Length(n, 16));
                    }
                }
                self.depth_in(5, 20)
            }
            ModelKind::MarkovJump => {
                markov::validate_gamma(&self.gamma()?)?;
                let eps = self.truncation();
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::Truncation(eps));
                }
                match self.horizon {
                    Some(t) if t > 0.0 && t.is_finite() => {}
                    other => return Err(Error::Range(format!("markov_jump needs a positive \"T\", got {other:?}"))),
                }
                match self.samples {
                    Some(n) if n >= 16 && n.is_power_of_two() => Ok(()),
                    Some(n) => Err(Error::Length(n, 16)),
                    None => Err(Error::Invalid("markov_jump needs \"N\"".into())),
                }
            }
            ModelKind::Birkhoff => {
                self.potential()?.validate()?;
                self.depth_in(4, 24)
            }
        }
    }

    fn depth_in(&self, lo: u32, hi: u32) -> Result<()> {
        let j = self.require_depth()?;
        if !(lo..=hi).contains(&j) {
            return Err(Error::Scale(format!("{} needs J in {lo}..={hi}, got {j}", self.kind)));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Realization> {
        self.generate_with(Exec::default())
    }

    /// Runs the generator. Identical specs give bit-identical output for
    /// either execution strategy.
    pub fn generate_with(&self, exec: Exec) -> Result<Realization> {
        self.validate()?;
        match self.kind {
            ModelKind::Binomial | ModelKind::LocalizedBernoulli => {
                Ok(Realization::Measure(localized_bernoulli(&self.split_ratio()?, self.require_depth()?, exec)?))
            }
            ModelKind::CantorPair => Ok(Realization::Measure(cantor_pair(self.require_depth()?)?)),
            ModelKind::Mbm | ModelKind::Fbm => {
                let filter = self.params.filter.unwrap_or_default();
                let pyramid = mbm_pyramid(&self.hurst()?, self.require_depth()?, filter, self.seed, exec)?;
                Ok(Realization::Signal { samples: pyramid.inverse(), pyramid })
            }
            ModelKind::MarkovJump => Ok(Realization::Jumps(simulate(
                &self.gamma()?,
                self.horizon.expect("validated"),
                self.samples.expect("validated"),
                self.truncation(),
                self.seed,
            )?)),
            ModelKind::Birkhoff => {
                Ok(Realization::Potential { potential: self.potential()?, depth: self.require_depth()? })
            }
        }
    }

    /// Closed-form spectra of the model. For the jump process the path is
    /// regenerated from the seed, since local quantities depend on `M_t`.
    pub fn oracle(&self) -> Result<OracleSpectrum> {
        self.validate()?;
        Ok(match self.kind {
            ModelKind::Binomial | ModelKind::LocalizedBernoulli => OracleSpectrum::Bernoulli { p: self.split_ratio()? },
            ModelKind::CantorPair => OracleSpectrum::CantorPair,
            ModelKind::Mbm | ModelKind::Fbm => OracleSpectrum::Mbm { h: self.hurst()? },
            ModelKind::MarkovJump => {
                let Realization::Jumps(path) = self.generate()? else { unreachable!("markov_jump yields a path") };
                OracleSpectrum::Markov { gamma: self.gamma()?, path }
            }
            ModelKind::Birkhoff => OracleSpectrum::Birkhoff { potential: self.potential()? },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_model_files() {
        let s = ModelSpec::from_json(r#"{"kind":"binomial","params":{"p":0.4},"J":14,"seed":7}"#).unwrap();
        assert_eq!(s, ModelSpec { seed: 7, ..ModelSpec::binomial(0.4, 14) });
        let lb = ModelSpec::from_json(
            r#"{"kind":"localized_bernoulli","params":{"p":{"linear":{"intercept":0.2,"slope":0.25}}},"J":10}"#,
        )
        .unwrap();
        assert_eq!(lb.split_ratio().unwrap(), Profile::linear(0.2, 0.25));
        let m = ModelSpec::from_json(r#"{"kind":"markov_jump","params":{"gamma":{"linear":{"intercept":0.5,"slope":0.25,"max":0.9}}},"T":3,"N":1024}"#).unwrap();
        assert_eq!(m.truncation(), DEFAULT_TRUNCATION);
    }

    #[test]
    fn round_trips_through_json() {
        let s = ModelSpec::mbm(Profile::Sine { mean: 0.5, amplitude: 0.2, frequency: 1.0, phase: 0.0 }, 12, 3);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(ModelSpec::from_json(&text).unwrap(), s);
    }

    #[test]
    fn range_errors() {
        let bad = ModelSpec::localized_bernoulli(Profile::linear(0.3, 0.4), 10);
        assert!(matches!(bad.validate(), Err(Error::Range(_))));
        let bad = ModelSpec::mbm(Profile::Constant(1.0), 10, 0);
        assert!(matches!(bad.validate(), Err(Error::Range(_))));
        assert!(matches!(ModelSpec::cantor_pair(6).validate(), Err(Error::Scale(_))));
        assert!(matches!("levy".parse::<ModelKind>(), Err(Error::UnsupportedKind(_))));
        assert!(serde_json::from_str::<ModelSpec>(r#"{"kind":"levy"}"#).is_err());
        let mut m = ModelSpec::markov_jump(Profile::linear(0.5, 0.1), 1.0, 64, 0);
        m.params.truncation = Some(-1.0);
        assert!(matches!(m.validate(), Err(Error::Range(_)) | Err(Error::Truncation(_))));
    }

    #[test]
    fn generation_is_deterministic() {
        let s = ModelSpec::mbm(Profile::linear(0.4, 0.2), 10, 11);
        assert_eq!(s.generate_with(Exec::Sequential).unwrap(), s.generate_with(Exec::Parallel).unwrap());
        let lb = ModelSpec::localized_bernoulli(Profile::linear(0.2, 0.25), 12);
        assert_eq!(lb.generate_with(Exec::Sequential).unwrap(), lb.generate_with(Exec::Parallel).unwrap());
    }
}
