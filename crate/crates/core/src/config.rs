//! Plain-text (TOML) scenario and potential descriptions.
//!
//! ```toml
//! [scenario]
//! name = "positive-mean"
//! tag = "T4i+"
//! dimension = 1
//! energies = { from = -1e-1, to = -1e-3, points = 10 }   # or a list
//! fit_exclude = 0.333          # largest-|E| fraction left out of fits
//! epsilons = [0.05, 0.1, 0.2]  # sandwich check, optional
//! sign_flip = false
//!
//! [eta]
//! mean = 1.0
//! modes = [{ frequency = [1.0], re = 1.0, im = 0.0 }]  # conjugates added
//!
//! [w]
//! family = "power"     # power | inverse_square | bump
//! amplitude = -1.0
//! rho = "2/3"          # number or fraction
//!
//! [tolerances]         # all optional
//! slope_abs = 0.15
//! ratio_band = [0.75, 1.25]
//!
//! [scan]               # all optional
//! h0 = 0.2
//! max_stages = 7
//! radius = 40.0        # sublevel radius instead of the automatic scale
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::counting::{BoxScale, ScanPolicy};
use crate::error::{Error, Result};
use crate::potentials::{AdmissibleEta, DecayingW, EtaW, Mode, TrigBackground};
use crate::scenarios::{default_box_scale, ScenarioSpec, TheoremTag, Tolerances};
use crate::semiclassical::log_energy_grid;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scenario: ScenarioSection,
    pub eta: EtaSection,
    pub w: WSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub scan: ScanSection,
}

/// Potential-only description, used by the module subcommands.
#[derive(Debug, Clone, Deserialize)]
pub struct PotentialFile {
    #[serde(default)]
    pub scenario: Option<toml::Value>,
    pub dimension: Option<usize>,
    pub eta: EtaSection,
    pub w: WSection,
    #[serde(default)]
    pub scan: ScanSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: Option<String>,
    pub tag: TheoremTag,
    #[serde(default = "one")]
    pub dimension: usize,
    pub energies: EnergyGrid,
    #[serde(default = "third")]
    pub fit_exclude: f64,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub sign_flip: bool,
}

fn one() -> usize {
    1
}

fn third() -> f64 {
    1.0 / 3.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EnergyGrid {
    List(Vec<f64>),
    /// Log-spaced, endpoints included.
    Range { from: f64, to: f64, points: usize },
}

impl EnergyGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            EnergyGrid::List(ref v) => Ok(v.clone()),
            EnergyGrid::Range { from, to, points } => {
                if !(from < 0.0 && to < 0.0) || points < 2 {
                    return Err(Error::Config("energy range needs negative endpoints and ≥ 2 points".into()));
                }
                Ok(log_energy_grid(from.abs().log10(), to.abs().log10(), points))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub frequency: Vec<f64>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSection {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub modes: Vec<ModeEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WFamilyName {
    Power,
    InverseSquare,
    Bump,
}

/// A number or a fraction string such as `"2/3"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => {
                let bad = || Error::Config(format!("not a number: {s:?}"));
                match s.split_once('/') {
                    Some((a, b)) => {
                        let a: f64 = a.trim().parse().map_err(|_| bad())?;
                        let b: f64 = b.trim().parse().map_err(|_| bad())?;
                        Ok(a / b)
                    }
                    None => s.trim().parse().map_err(|_| bad()),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WSection {
    pub family: WFamilyName,
    #[serde(default = "minus_one")]
    pub amplitude: f64,
    pub rho: Option<Number>,
    pub radius: Option<f64>,
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub box_factor: Option<f64>,
    pub h0: Option<f64>,
    pub max_stages: Option<usize>,
    pub max_points_1d: Option<usize>,
    pub max_points_2d: Option<usize>,
    pub max_seconds: Option<f64>,
    /// Fixed half-width for every energy.
    pub fixed: Option<f64>,
    /// Radius containing all sublevel sets.
    pub radius: Option<f64>,
}

impl ScanSection {
    pub fn policy(&self, auto: BoxScale) -> Result<ScanPolicy> {
        let mut p = ScanPolicy::default().with_scale(auto);
        if let Some(r) = self.radius {
            p.scale = BoxScale::Radius(r);
        }
        if let Some(r) = self.fixed {
            p.scale = BoxScale::Fixed(r);
        }
        if let Some(v) = self.box_factor {
            p.box_factor = v;
        }
        if let Some(v) = self.h0 {
            if !(v > 0.0) {
                return Err(Error::Config("h0 must be positive".into()));
            }
            p.h0 = v;
        }
        if let Some(v) = self.max_stages {
            p.max_stages = v;
        }
        if let Some(v) = self.max_points_1d {
            p.caps.max_points_1d = v;
        }
        if let Some(v) = self.max_points_2d {
            p.caps.max_points_2d = v;
        }
        p.max_seconds = self.max_seconds.or(p.max_seconds);
        Ok(p)
    }
}

impl EtaSection {
    /// The oscillating factor plus the number of conjugate modes that had
    /// to be added.
    pub fn build(&self, dim: usize) -> Result<(AdmissibleEta, usize)> {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode::new(m.frequency.clone(), Complex64::new(m.re, m.im)))
            .collect();
        let bg = TrigBackground::new(dim, modes)?;
        let added = bg.added_conjugates();
        Ok((AdmissibleEta::new(self.mean, bg), added))
    }
}

impl WSection {
    pub fn build(&self, dim: usize) -> Result<DecayingW> {
        match self.family {
            WFamilyName::Power => {
                let rho = self
                    .rho
                    .as_ref()
                    .ok_or_else(|| Error::Config("power family needs rho".into()))?
                    .value()?;
                DecayingW::power(dim, self.amplitude, rho)
            }
            // amplitude is the (signed) coefficient of |x|^{-2}
            WFamilyName::InverseSquare => DecayingW::power(dim, self.amplitude, 2.0),
            WFamilyName::Bump => {
                let r = self.radius.ok_or_else(|| Error::Config("bump family needs radius".into()))?;
                DecayingW::compact_bump(dim, self.amplitude, r)
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_scenario(path: &Path) -> Result<(ScenarioSpec, Vec<String>)> {
    parse_scenario(&read(path)?)
}

/// Parses a scenario; the second value lists warnings for the report.
pub fn parse_scenario(text: &str) -> Result<(ScenarioSpec, Vec<String>)> {
    let f: ScenarioFile = toml::from_str(text)?;
    let dim = f.scenario.dimension;
    let (eta, added) = f.eta.build(dim)?;
    let w = f.w.build(dim)?;
    let mut warnings = Vec::new();
    if added > 0 {
        warnings.push(format!("added {added} conjugate mode(s) to make η real"));
    }
    let energies = f.scenario.energies.values()?;
    let mut spec = ScenarioSpec::new(f.scenario.tag, eta, w, energies);
    if let Some(n) = f.scenario.name {
        spec.name = n;
    }
    if !(0.0..1.0).contains(&f.scenario.fit_exclude) {
        return Err(Error::Config("fit_exclude must lie in [0, 1)".into()));
    }
    spec.fit_exclude = f.scenario.fit_exclude;
    spec.epsilons = f.scenario.epsilons;
    spec.sign_flip = f.scenario.sign_flip;
    spec.tolerances = f.tolerances;
    spec.scan = f.scan.policy(default_box_scale(&spec.eta, &spec.w))?;
    Ok((spec, warnings))
}

/// Potential and scan policy from a scenario or potential-only file.
pub fn load_potential(path: &Path) -> Result<(EtaW, ScanPolicy)> {
    parse_potential(&read(path)?)
}

pub fn parse_potential(text: &str) -> Result<(EtaW, ScanPolicy)> {
    let f: PotentialFile = toml::from_str(text)?;
    let dim = f
        .dimension
        .or_else(|| {
            f.scenario
                .as_ref()
                .and_then(|s| s.get("dimension"))
                .and_then(|v| v.as_integer())
                .map(|d| d as usize)
        })
        .unwrap_or(1);
    let (eta, _) = f.eta.build(dim)?;
    let w = f.w.build(dim)?;
    let policy = f.scan.policy(default_box_scale(&eta, &w))?;
    Ok((EtaW::new(eta, w), policy))
}
