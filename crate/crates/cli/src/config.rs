use std::fmt;
use std::path::{Path, PathBuf};

use locmf::numeric::parse_grid;
use locmf::synth::ModelSpec;
use locmf::Filter;
use serde::Deserialize;

/// Failure classes; the discriminant is the process exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            Failure::Validation(m) => ("validation", m),
            Failure::Runtime(m) => ("runtime", m),
        };
        write!(f, "error: {kind}: {}", msg.replace('\n', " "))
    }
}

pub fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

impl From<locmf::Error> for Failure {
    fn from(e: locmf::Error) -> Self {
        use locmf::Error::*;
        match e {
            Domain(_) | InvalidWindow { .. } | UnknownFilter(_) | Order(_) | NonPositiveP(_) | Range(_)
            | Truncation(_) | UnsupportedKind(_) | Invalid(_) | Json(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// A grid given as `a:b:step`, a comma list, or a JSON array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridArg {
    Text(String),
    List(Vec<f64>),
}

impl GridArg {
    pub fn values(&self, what: &str) -> Result<Vec<f64>, Failure> {
        match self {
            GridArg::List(v) => Ok(v.clone()),
            GridArg::Text(t) => parse_list(t).ok_or_else(|| invalid(format!("cannot parse {what} `{t}`"))),
        }
    }
}

pub fn parse_list(t: &str) -> Option<Vec<f64>> {
    if t.contains(':') {
        return parse_grid(t);
    }
    t.split(',').map(|s| s.trim().parse().ok()).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WindowsArg {
    Text(String),
    List(Vec<[f64; 2]>),
}

impl WindowsArg {
    pub fn values(&self) -> Result<Vec<(f64, f64)>, Failure> {
        match self {
            WindowsArg::List(v) => Ok(v.iter().map(|w| (w[0], w[1])).collect()),
            WindowsArg::Text(t) => parse_windows(t),
        }
    }
}

pub fn parse_windows(t: &str) -> Result<Vec<(f64, f64)>, Failure> {
    t.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|w| {
            let (a, b) = w.split_once(',').ok_or_else(|| invalid(format!("window `{w}` is not `lo,hi`")))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| invalid(format!("bad window bound `{s}`")));
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FitArg {
    Text(String),
    Pair([u32; 2]),
}

impl FitArg {
    pub fn values(&self) -> Result<(u32, u32), Failure> {
        match self {
            FitArg::Pair([a, b]) => Ok((*a, *b)),
            FitArg::Text(t) => parse_fit(t),
        }
    }
}

pub fn parse_fit(t: &str) -> Result<(u32, u32), Failure> {
    let bad = || invalid(format!("fit range `{t}` is not `j1:j2`"));
    let (a, b) = t.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a >= b {
        return Err(invalid(format!("fit range {a}:{b} must have j1 < j2")));
    }
    Ok((a, b))
}

/// How dyadic quantities are built from the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    Measure,
    PlainMeasure,
    Oscillation(u32),
    Leaders,
    PLeaders(f64),
    Birkhoff,
}

impl FamilyKind {
    pub fn parse(s: &str) -> Result<Self, Failure> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let kind = match (head, arg) {
            ("measure", None) => FamilyKind::Measure,
            ("plain-measure", None) => FamilyKind::PlainMeasure,
            ("oscillation", None) => FamilyKind::Oscillation(1),
            ("oscillation", Some(l)) => {
                let l: u32 = l.parse().map_err(|_| invalid(format!("bad oscillation order `{l}`")))?;
                if !(1..=2).contains(&l) {
                    return Err(invalid(format!("oscillation order must be 1 or 2, got {l}")));
                }
                FamilyKind::Oscillation(l)
            }
            ("leaders", None) => FamilyKind::Leaders,
            ("p-leaders", Some(p)) => {
                let p: f64 = p.parse().map_err(|_| invalid(format!("bad p-leader exponent `{p}`")))?;
                if !(p > 0.0) {
                    return Err(invalid(format!("p-leaders need p > 0, got {p}")));
                }
                FamilyKind::PLeaders(p)
            }
            ("p-leaders", None) => return Err(invalid("p-leaders needs an exponent, e.g. p-leaders:2")),
            ("birkhoff", None) => FamilyKind::Birkhoff,
            _ => return Err(invalid(format!("unknown family `{s}`"))),
        };
        Ok(kind)
    }

    pub fn name(&self) -> String {
        match self {
            FamilyKind::Measure => "measure".into(),
            FamilyKind::PlainMeasure => "plain-measure".into(),
            FamilyKind::Oscillation(l) => format!("oscillation:{l}"),
            FamilyKind::Leaders => "leaders".into(),
            FamilyKind::PLeaders(p) => format!("p-leaders:{p}"),
            FamilyKind::Birkhoff => "birkhoff".into(),
        }
    }
}

/// Pipeline configuration file. Every field may be overridden by a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub model: Option<ModelSpec>,
    pub family: Option<String>,
    pub frac: Option<f64>,
    pub p_grid: Option<GridArg>,
    pub h_grid: Option<GridArg>,
    pub windows: Option<WindowsArg>,
    pub x_grid: Option<GridArg>,
    pub radii: Option<GridArg>,
    pub fit: Option<FitArg>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub filter: Option<Filter>,
    pub include_edges: Option<bool>,
}

impl ConfigFile {
    /// Reads either a pipeline config or a bare model spec.
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        if value.get("kind").is_some() {
            let model = ModelSpec::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            return Ok(ConfigFile { model: Some(model), ..Default::default() });
        }
        serde_json::from_value(value).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

pub enum Source {
    Model(ModelSpec),
    File(PathBuf),
}

/// Fully resolved settings for one run.
pub struct Pipeline {
    pub source: Source,
    pub family: Option<FamilyKind>,
    pub frac: f64,
    pub p_grid: Vec<f64>,
    pub h_grid: Option<Vec<f64>>,
    pub windows: Vec<(f64, f64)>,
    pub x_grid: Vec<f64>,
    pub radii: Vec<f64>,
    pub fit: Option<(u32, u32)>,
    pub out: PathBuf,
    pub filter: Filter,
    pub include_edges: bool,
}

/// Flag values, all optional; flags win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub family: Option<String>,
    pub frac: Option<f64>,
    pub p_grid: Option<String>,
    pub h_grid: Option<String>,
    pub windows: Option<String>,
    pub x_grid: Option<String>,
    pub radii: Option<String>,
    pub fit: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub filter: Option<String>,
    pub include_edges: bool,
}

pub const DEFAULT_P_GRID: &str = "-5:5:0.5";

impl Pipeline {
    pub fn resolve(cfg: ConfigFile, o: Overrides, local: bool) -> Result<Pipeline, Failure> {
        let source = match (o.input, cfg.input, cfg.model) {
            (Some(path), _, _) => Source::File(path),
            (None, Some(_), Some(_)) => return Err(invalid("config names both an input file and a model")),
            (None, Some(path), None) => Source::File(path),
            (None, None, Some(m)) => Source::Model(m),
            (None, None, None) => return Err(invalid("no input: give --input or a config with `input` or `model`")),
        };
        let source = match source {
            Source::Model(mut m) => {
                if let Some(seed) = o.seed.or(cfg.seed) {
                    m.seed = seed;
                }
                m.validate()?;
                Source::Model(m)
            }
            Source::File(p) => Source::File(p),
        };
        let family = o.family.or(cfg.family).map(|s| FamilyKind::parse(&s)).transpose()?;
        let grid = |flag: Option<String>, file: Option<GridArg>, what: &str| -> Result<Option<Vec<f64>>, Failure> {
            match (flag, file) {
                (Some(t), _) => GridArg::Text(t).values(what).map(Some),
                (None, Some(g)) => g.values(what).map(Some),
                (None, None) => Ok(None),
            }
        };
        let mut p_grid = grid(o.p_grid, cfg.p_grid, "p grid")?.unwrap_or_else(|| parse_grid(DEFAULT_P_GRID).unwrap());
        if p_grid.is_empty() || p_grid.iter().any(|p| !p.is_finite()) {
            return Err(invalid("p grid must be a nonempty list of finite values"));
        }
        p_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        p_grid.dedup();
        let h_grid = grid(o.h_grid, cfg.h_grid, "H grid")?;
        let x_grid = grid(o.x_grid, cfg.x_grid, "x grid")?.unwrap_or_default();
        let radii = grid(o.radii, cfg.radii, "radii")?.unwrap_or_default();
        if local && (x_grid.is_empty() || radii.is_empty()) {
            return Err(invalid("local mode needs --x-grid and --radii"));
        }
        let windows = match (o.windows, cfg.windows) {
            (Some(t), _) => parse_windows(&t)?,
            (None, Some(w)) => w.values()?,
            (None, None) => vec![(0.0, 1.0)],
        };
        if windows.is_empty() {
            return Err(invalid("no analysis window given"));
        }
        let fit = match (o.fit, cfg.fit) {
            (Some(t), _) => Some(parse_fit(&t)?),
            (None, Some(f)) => Some(f.values()?),
            (None, None) => None,
        };
        let filter = match o.filter {
            Some(t) => t.parse::<Filter>()?,
            None => cfg.filter.unwrap_or_default(),
        };
        let frac = o.frac.or(cfg.frac).unwrap_or(0.0);
        if !frac.is_finite() {
            return Err(invalid("fractional integration order must be finite"));
        }
        Ok(Pipeline {
            source,
            family,
            frac,
            p_grid,
            h_grid,
            windows,
            x_grid,
            radii,
            fit,
            out: o.out.or(cfg.out).unwrap_or_else(|| PathBuf::from(".")),
            filter,
            include_edges: o.include_edges || cfg.include_edges.unwrap_or(false),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for s in ["measure", "plain-measure", "oscillation:2", "leaders", "p-leaders:2", "birkhoff"] {
            assert_eq!(FamilyKind::parse(s).unwrap().name(), s);
        }
        assert_eq!(FamilyKind::parse("oscillation").unwrap(), FamilyKind::Oscillation(1));
        assert!(matches!(FamilyKind::parse("p-leaders:0"), Err(Failure::Validation(_))));
        assert!(matches!(FamilyKind::parse("p-leaders:-1"), Err(Failure::Validation(_))));
        assert!(matches!(FamilyKind::parse("wavelets"), Err(Failure::Validation(_))));
    }

    #[test]
    fn windows_and_lists_parse() {
        assert_eq!(parse_windows("0,0.5;0.5,1").unwrap(), vec![(0.0, 0.5), (0.5, 1.0)]);
        assert_eq!(parse_list("0.25, 0.5").unwrap(), vec![0.25, 0.5]);
        assert_eq!(parse_list("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_fit("3:12").unwrap(), (3, 12));
        assert!(parse_fit("5:5").is_err());
    }
}
