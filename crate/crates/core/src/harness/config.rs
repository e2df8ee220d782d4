use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copulas::{Archimedean, ArchimedeanKind, GaussianCopula};
use crate::error::{Error, Result};
use crate::joint::{Dependence, JointModel};
use crate::marginals::Marginal;

/// Named experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    /// n = 10, Clayton(0.2), Weibull(0.3, 1) marginals.
    ClaytonWeibull,
    /// n = 15, Gumbel(5), Exp(1) marginals.
    GumbelExponential,
    /// n = 10, Frank(0.001), Lognormal(i − 10, √i) marginals.
    FrankLognormal,
    /// n = 32, equicorrelated Gaussian copula, standard lognormal marginals.
    GaussLognormal,
    /// BMI coefficient of a logistic regression on the Pima data.
    BayesPima,
    /// Copula and marginal given on the command line.
    Custom,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        Self::ClaytonWeibull,
        Self::GumbelExponential,
        Self::FrankLognormal,
        Self::GaussLognormal,
        Self::BayesPima,
        Self::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ClaytonWeibull => "clayton_weibull",
            Self::GumbelExponential => "gumbel_exponential",
            Self::FrankLognormal => "frank_lognormal",
            Self::GaussLognormal => "gauss_lognormal",
            Self::BayesPima => "bayes_pima",
            Self::Custom => "custom",
        }
    }

    pub fn default_n(self) -> usize {
        match self {
            Self::ClaytonWeibull | Self::FrankLognormal => 10,
            Self::GumbelExponential => 15,
            Self::GaussLognormal => 32,
            Self::BayesPima => 1,
            Self::Custom => 5,
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sensitivity,
    Cond,
    ExtCond,
    Ak,
    AkExt,
    GaussSeq,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Self::Sensitivity,
        Self::Cond,
        Self::ExtCond,
        Self::Ak,
        Self::AkExt,
        Self::GaussSeq,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sensitivity => "sensitivity",
            Self::Cond => "cond",
            Self::ExtCond => "ext_cond",
            Self::Ak => "ak",
            Self::AkExt => "ak_ext",
            Self::GaussSeq => "gauss_seq",
        }
    }

    /// Checks that the joint model offers what the method needs.
    pub fn check_compatible(self, jm: &JointModel) -> Result<()> {
        let ok = match self {
            Self::Sensitivity => true,
            Self::Cond | Self::Ak => jm.supports_conditional(),
            Self::ExtCond | Self::AkExt => jm.supports_extended(),
            Self::GaussSeq => {
                matches!(
                    jm.dependence(),
                    Dependence::Gaussian(_) | Dependence::Independence
                ) && jm.marginals().iter().all(Marginal::is_positive)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Capability(format!(
                "method {self} is not available for this model"
            )))
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// Parses a comma-separated method list such as `sensitivity,cond`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.dedup();
    if out.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown output format {s:?}"))),
        }
    }
}

/// Evaluation grid; missing endpoints are filled from a simulation pre-pass
/// covering the central 99% of the mass of S.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: None,
            max: None,
            points: 50,
        }
    }
}

impl GridSpec {
    pub fn explicit(min: f64, max: f64, points: usize) -> Self {
        Self {
            min: Some(min),
            max: Some(max),
            points,
        }
    }
}

/// Evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let step = (max - min) / (points - 1) as f64;
    (0..points)
        .map(|j| {
            if j + 1 == points {
                max
            } else {
                min + step * j as f64
            }
        })
        .collect()
}

/// Parses `clayton:0.2`, `gumbel:5`, `frank:0.001`, `gaussian:0.5` or
/// `independence` for a model of dimension `n`.
pub fn parse_copula(spec: &str, n: usize) -> Result<Dependence> {
    let (family, param) = match spec.split_once(':') {
        Some((f, p)) => (f.trim(), Some(p.trim())),
        None => (spec.trim(), None),
    };
    let value = || -> Result<f64> {
        let p =
            param.ok_or_else(|| Error::Config(format!("copula {family:?} needs a parameter")))?;
        p.parse()
            .map_err(|_| Error::Config(format!("cannot parse copula parameter {p:?}")))
    };
    Ok(match family {
        "independence" => Dependence::Independence,
        "clayton" => Dependence::Archimedean(Archimedean::new(ArchimedeanKind::Clayton, value()?)?),
        "gumbel" => {
            Dependence::Archimedean(Archimedean::new(ArchimedeanKind::GumbelHougaard, value()?)?)
        }
        "frank" => Dependence::Archimedean(Archimedean::new(ArchimedeanKind::Frank, value()?)?),
        "gaussian" => Dependence::Gaussian(GaussianCopula::equicorrelated(n, value()?)?),
        other => return Err(Error::Config(format!("unknown copula family {other:?}"))),
    })
}

/// Parses `exponential:1`, `weibull:0.3,1`, `lognormal:0,1` or `normal:0,1`.
pub fn parse_marginal(spec: &str) -> Result<Marginal> {
    let (family, params) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("marginal {spec:?} needs parameters")))?;
    let p: Vec<f64> = params
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse marginal parameter {v:?}")))
        })
        .collect::<Result<_>>()?;
    let arity = |k: usize| {
        if p.len() == k {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "marginal {family:?} takes {k} parameter(s)"
            )))
        }
    };
    match family.trim() {
        "exponential" => {
            arity(1)?;
            Marginal::exponential(p[0])
        }
        "weibull" => {
            arity(2)?;
            Marginal::weibull(p[0], p[1])
        }
        "lognormal" => {
            arity(2)?;
            Marginal::lognormal(p[0], p[1])
        }
        "normal" => {
            arity(2)?;
            Marginal::normal(p[0], p[1])
        }
        other => Err(Error::Config(format!("unknown marginal family {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    /// Number of summands; the experiment default when `None`.
    pub n: Option<usize>,
    pub r: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub pilot_frac: f64,
    /// Methods to run; the experiment default when `None`.
    pub methods: Option<Vec<Method>>,
    /// Equicorrelation of `gauss_lognormal`.
    pub rho: f64,
    /// Copula of `custom`, see [`parse_copula`].
    pub copula: Option<String>,
    /// Marginal of `custom`, see [`parse_marginal`].
    pub marginal: Option<String>,
    /// Draws in the grid pre-pass.
    pub prepass_draws: usize,
    /// Worker threads; rayon's default pool when `None`.
    pub workers: Option<usize>,
    /// Record wall times; when off, timings and √WNRV are written as NaN so
    /// that output depends on the seed only.
    pub timing: bool,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// Data file of `bayes_pima`.
    pub data: Option<PathBuf>,
}

impl ExperimentConfig {
    pub const DEFAULT_R: usize = 100_000;
    pub const DEFAULT_PREPASS: usize = 1_000_000;

    pub fn new(name: ExperimentName) -> Self {
        Self {
            name,
            n: None,
            r: Self::DEFAULT_R,
            seed: 0,
            grid: GridSpec::default(),
            pilot_frac: 0.05,
            methods: None,
            rho: 0.5,
            copula: None,
            marginal: None,
            prepass_draws: Self::DEFAULT_PREPASS,
            workers: None,
            timing: true,
            output: None,
            format: OutputFormat::Csv,
            data: None,
        }
    }

    pub fn dimension(&self) -> usize {
        self.n.unwrap_or_else(|| self.name.default_n())
    }

    /// Builds the joint model of a simulation experiment.
    pub fn joint_model(&self) -> Result<JointModel> {
        let n = self.dimension();
        if n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        match self.name {
            ExperimentName::ClaytonWeibull => JointModel::new(
                Dependence::Archimedean(Archimedean::clayton(0.2)?),
                vec![Marginal::weibull(0.3, 1.0)?; n],
            ),
            ExperimentName::GumbelExponential => JointModel::new(
                Dependence::Archimedean(Archimedean::gumbel(5.0)?),
                vec![Marginal::exponential(1.0)?; n],
            ),
            ExperimentName::FrankLognormal => {
                let marginals = (1..=n)
                    .map(|i| Marginal::lognormal(i as f64 - 10.0, (i as f64).sqrt()))
                    .collect::<Result<Vec<_>>>()?;
                JointModel::new(
                    Dependence::Archimedean(Archimedean::frank(0.001)?),
                    marginals,
                )
            }
            ExperimentName::GaussLognormal => JointModel::new(
                Dependence::Gaussian(GaussianCopula::equicorrelated(n, self.rho)?),
                vec![Marginal::lognormal(0.0, 1.0)?; n],
            ),
            ExperimentName::Custom => {
                let copula = self
                    .copula
                    .as_deref()
                    .ok_or_else(|| Error::Config("custom experiments need a copula".into()))?;
                let marginal = self
                    .marginal
                    .as_deref()
                    .ok_or_else(|| Error::Config("custom experiments need a marginal".into()))?;
                JointModel::new(parse_copula(copula, n)?, vec![parse_marginal(marginal)?; n])
            }
            ExperimentName::BayesPima => Err(Error::Config("bayes_pima has no joint model".into())),
        }
    }

    /// Methods to run: the explicit list, or the experiment default.
    pub fn resolved_methods(&self, jm: &JointModel) -> Result<Vec<Method>> {
        let methods = match (&self.methods, self.name) {
            (Some(m), _) => m.clone(),
            (None, ExperimentName::ClaytonWeibull | ExperimentName::GumbelExponential) => {
                vec![Method::Sensitivity, Method::ExtCond, Method::AkExt]
            }
            (None, ExperimentName::FrankLognormal) => {
                vec![Method::Sensitivity, Method::Cond, Method::Ak]
            }
            (None, ExperimentName::GaussLognormal) => vec![Method::GaussSeq],
            (None, _) => Method::ALL
                .into_iter()
                .filter(|m| m.check_compatible(jm).is_ok())
                .collect(),
        };
        for m in &methods {
            m.check_compatible(jm)?;
        }
        Ok(methods)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.points < 2 {
            return Err(Error::Config("grid needs at least two points".into()));
        }
        if let (Some(lo), Some(hi)) = (self.grid.min, self.grid.max) {
            if !(lo < hi) {
                return Err(Error::Config(format!(
                    "grid minimum {lo} must be below maximum {hi}"
                )));
            }
        }
        if self.name != ExperimentName::BayesPima && self.r < 100 {
            return Err(Error::Config(format!(
                "R = {} is below the minimum of 100",
                self.r
            )));
        }
        if !(self.pilot_frac > 0.0 && self.pilot_frac < 1.0) {
            return Err(Error::Config(format!(
                "pilot fraction {} must lie in (0, 1)",
                self.pilot_frac
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        Ok(())
    }
}
