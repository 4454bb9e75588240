//! End-to-end reproductions of the asymptotic counting laws: build the
//! potential, count, compute the predictor, fit and decide.

pub mod fit;
mod output;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::counting::{n_curve, sandwich_check, BoxScale, CountResult, SandwichReport, ScanPolicy};
use crate::error::{Error, Result};
use crate::gauge::{psi_mean, GaugeData};
use crate::potentials::{angular_limit, squared_angular_limit, AdmissibleEta, DecayingW, EtaW, ScaledW, SquaredW, WFamily};
use crate::semiclassical::{ncl, NclQuery};
use crate::sphere::{cd_constant, finiteness_predicate, spectrum_of};

pub use fit::{fit_log, fit_power, LineFit, MIN_FIT_POINTS};
pub use output::{exit_code, render_text, write_outputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    /// Positive mean: power law with the semiclassical constant of `η₀W`.
    #[serde(rename = "T4i+")]
    T4iPlus,
    /// Negative mean: finitely many eigenvalues.
    #[serde(rename = "T4i-", alias = "T4i−")]
    T4iMinus,
    /// Zero mean: upper bounds by branch of `ρ`.
    #[serde(rename = "T4ii")]
    T4ii,
    /// `ρ = 2`: logarithmic law with constant `C_d(η₀L)`.
    #[serde(rename = "T4iii")]
    T4iii,
    /// Zero mean, `ρ < 1`: power law with the semiclassical constant of
    /// `−ψ₀W²`.
    #[serde(rename = "T5i")]
    T5i,
    /// Zero mean, `ρ = 1`: logarithmic law with constant `C_d(−ψ₀𝓛)`.
    #[serde(rename = "T5ii")]
    T5ii,
    /// Fast decay: finitely many eigenvalues.
    #[serde(rename = "CLR")]
    Clr,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremTag::T4iPlus => "T4i+",
            TheoremTag::T4iMinus => "T4i-",
            TheoremTag::T4ii => "T4ii",
            TheoremTag::T4iii => "T4iii",
            TheoremTag::T5i => "T5i",
            TheoremTag::T5ii => "T5ii",
            TheoremTag::Clr => "CLR",
        };
        f.write_str(s)
    }
}

/// Engineering tolerances; none of them is a statement about the size of
/// the remainder terms in the asymptotic laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative slope tolerance, used when `slope_abs` is unset.
    pub slope_rel: f64,
    pub slope_abs: Option<f64>,
    /// Band for `N / predictor` at the smallest converged `|E|`.
    pub ratio_band: (f64, f64),
    /// Relative tolerance of the log-law level.
    pub log_rel: f64,
    /// Allowed `max − min` of counts for bounded branches.
    pub variation: usize,
    /// Minimum fraction of converged grid points for a definite verdict.
    pub min_converged: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            slope_rel: 0.15,
            slope_abs: None,
            ratio_band: (0.75, 1.25),
            log_rel: 0.25,
            variation: 1,
            min_converged: 0.8,
        }
    }
}

impl Tolerances {
    pub fn slope_tolerance(&self, predicted: f64) -> f64 {
        self.slope_abs.unwrap_or(self.slope_rel * predicted.abs())
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub tag: TheoremTag,
    pub eta: AdmissibleEta,
    pub w: DecayingW,
    pub energies: Vec<f64>,
    /// Sandwich-check parameters; empty to skip.
    pub epsilons: Vec<f64>,
    /// Fraction of the grid (largest `|E|` first) left out of fits.
    pub fit_exclude: f64,
    pub tolerances: Tolerances,
    pub scan: ScanPolicy,
    /// Repeat the run with `−W` and require the same verdict (T5i).
    pub sign_flip: bool,
}

impl ScenarioSpec {
    pub fn new(tag: TheoremTag, eta: AdmissibleEta, w: DecayingW, energies: Vec<f64>) -> Self {
        let scan = ScanPolicy::default().with_scale(default_box_scale(&eta, &w));
        Self {
            name: format!("{tag}"),
            tag,
            eta,
            w,
            energies,
            epsilons: Vec::new(),
            fit_exclude: 1.0 / 3.0,
            tolerances: Tolerances::default(),
            scan,
            sign_flip: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn psi0(&self) -> f64 {
        psi_mean(&self.eta.background)
    }

    /// Refuses `(tag, parameters)` combinations outside the tag's regime.
    pub fn validate(&self) -> Result<()> {
        let mismatch = |reason: String| Error::BranchMismatch {
            tag: self.tag.to_string(),
            reason,
        };
        if self.eta.dim() != self.w.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.w.dim(),
                got: self.eta.dim(),
            });
        }
        if self.energies.is_empty() || self.energies.iter().any(|&e| !(e < 0.0)) {
            return Err(Error::InvalidParameter("energies must be negative and nonempty".into()));
        }
        let eta0 = self.eta.mean;
        let rho = self.w.rho();
        let compact = self.w.support_radius().is_some();
        let is = |r: f64| (rho - r).abs() < 1e-12;
        let psi0 = self.psi0();
        match self.tag {
            TheoremTag::T4iPlus | TheoremTag::T4iMinus => {
                let want = if self.tag == TheoremTag::T4iPlus { eta0 > 0.0 } else { eta0 < 0.0 };
                if !want {
                    return Err(mismatch(format!("mean η₀ = {eta0} has the wrong sign")));
                }
                if !(rho > 0.0 && rho < 2.0) {
                    return Err(mismatch(format!("needs ρ ∈ (0,2), got {rho}")));
                }
                if self.tag == TheoremTag::T4iMinus && self.w.tail_sign() > 0.0 {
                    return Err(mismatch("negative-mean branch needs W ≤ 0 in the tail".into()));
                }
            }
            TheoremTag::T4ii => {
                if eta0 != 0.0 {
                    return Err(mismatch(format!("needs η₀ = 0, got {eta0}")));
                }
                if !(rho > 0.0 && rho <= 2.0) {
                    return Err(mismatch(format!("needs ρ ∈ (0,2], got {rho}")));
                }
            }
            TheoremTag::T4iii => {
                if !(is(2.0) || compact) {
                    return Err(mismatch(format!("needs ρ = 2, got {rho}")));
                }
            }
            TheoremTag::T5i => {
                if eta0 != 0.0 || !(rho > 0.0 && rho < 1.0) || !(psi0 > 0.0) {
                    return Err(mismatch(format!("needs η₀ = 0, ψ₀ > 0, ρ ∈ (0,1); got η₀ = {eta0}, ψ₀ = {psi0}, ρ = {rho}")));
                }
            }
            TheoremTag::T5ii => {
                if eta0 != 0.0 || !(is(1.0) || compact) || !(psi0 > 0.0) {
                    return Err(mismatch(format!("needs η₀ = 0, ψ₀ > 0, ρ = 1; got η₀ = {eta0}, ψ₀ = {psi0}, ρ = {rho}")));
                }
            }
            TheoremTag::Clr => {
                if !(rho > 2.0) {
                    return Err(mismatch(format!("needs ρ > 2 or compact support, got {rho}")));
                }
            }
        }
        Ok(())
    }
}

/// Initial box scale from the effective attraction of `ηW`:
/// an attractive mean `η₀W` sets the classical turning point of `η₀W`; a
/// zero mean that of `−ψ₀W²`; a repulsive mean confines the attraction of
/// `−ψ₀W²` to where `ψ₀|W| > |η₀|`.
pub fn default_box_scale(eta: &AdmissibleEta, w: &DecayingW) -> BoxScale {
    if let Some(r) = w.support_radius() {
        return BoxScale::Radius(r);
    }
    let (amp, rho) = match w.family() {
        WFamily::Power { amplitude, rho } => (*amplitude, *rho),
        _ => return BoxScale::FromEnvelope,
    };
    let cw = w.envelope_constant().unwrap_or(amp.abs());
    let psi0 = psi_mean(&eta.background);
    let attraction = eta.mean * amp.signum();
    if attraction < 0.0 {
        BoxScale::TurningPoint {
            c: eta.mean.abs() * cw,
            rho,
        }
    } else if attraction == 0.0 {
        if psi0 == 0.0 {
            BoxScale::Radius(0.0)
        } else {
            BoxScale::TurningPoint { c: psi0 * cw * cw, rho: 2.0 * rho }
        }
    } else if psi0 == 0.0 {
        BoxScale::Radius(0.0)
    } else {
        // |a|(1+r²)^{-ρ/2} = |η₀|/ψ₀
        let q = (amp.abs() * psi0 / eta.mean.abs()).powf(2.0 / rho) - 1.0;
        BoxScale::Radius(q.max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Verdict,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            status: if pass { Verdict::Pass } else { Verdict::Fail },
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub energy: f64,
    pub count: usize,
    /// The law's prediction at this energy (`N_cl` or `C_d|ln|E||`).
    pub predictor: Option<f64>,
    pub dirichlet: usize,
    pub neumann: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub converged: bool,
    pub perturbed: bool,
    /// `N_cl(E; ηW)`, shown for comparison in the zero-mean power law.
    pub ncl_eta_w: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub name: String,
    pub tag: TheoremTag,
    pub branch: String,
    pub verdict: Verdict,
    /// Pass for trivial reasons (e.g. no eigenvalues at all).
    pub degenerate: bool,
    pub fit: Option<LineFit>,
    pub predicted_slope: Option<f64>,
    /// `N/|ln|E||` at the smallest converged `|E|` and its predicted value.
    pub log_level: Option<f64>,
    pub predicted_level: Option<f64>,
    pub variation: Option<usize>,
    /// `N / predictor` (power laws) or `N / |ln|E||` (log laws).
    pub ratio_curve: Vec<(f64, f64)>,
    pub converged_fraction: f64,
    pub fit_energies: Vec<f64>,
    pub tolerances: Tolerances,
    pub rows: Vec<CurveRow>,
    pub checks: Vec<Check>,
    pub sandwich: Vec<SandwichReport>,
    pub notes: Vec<String>,
    pub sign_flip: Option<Box<FitReport>>,
    /// Where `curve.csv` was written, once it has been.
    pub csv_path: Option<String>,
}

impl FitReport {
    fn finalize(&mut self) {
        let worst = if self.checks.iter().any(|c| c.status == Verdict::Fail) {
            Verdict::Fail
        } else if self.checks.iter().any(|c| c.status == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        self.verdict = if self.converged_fraction < self.tolerances.min_converged {
            self.notes.push(format!(
                "only {:.0}% of grid points converged",
                100.0 * self.converged_fraction
            ));
            Verdict::Inconclusive
        } else {
            worst
        };
    }
}

struct Curve {
    results: Vec<CountResult>,
}

impl Curve {
    fn converged(&self) -> impl Iterator<Item = &CountResult> {
        self.results.iter().filter(|r| r.converged)
    }

    fn converged_fraction(&self) -> f64 {
        self.converged().count() as f64 / self.results.len().max(1) as f64
    }

    /// Converged point with the smallest `|E|`.
    fn tip(&self) -> Option<&CountResult> {
        self.converged().min_by(|a, b| a.energy.abs().total_cmp(&b.energy.abs()))
    }

    /// Converged points in the fit window: the largest-`|E|` fraction
    /// `exclude` of the grid is dropped.
    fn window(&self, exclude: f64) -> Vec<&CountResult> {
        let mut all: Vec<&CountResult> = self.results.iter().collect();
        all.sort_by(|a, b| b.energy.abs().total_cmp(&a.energy.abs()));
        let skip = (exclude * all.len() as f64).floor() as usize;
        all.into_iter().skip(skip).filter(|r| r.converged).collect()
    }

    fn variation(&self) -> Option<usize> {
        let counts: Vec<usize> = self.converged().map(|r| r.count).collect();
        Some(counts.iter().max()? - counts.iter().min()?)
    }
}

fn base_report(spec: &ScenarioSpec, branch: &str, curve: &Curve, predictor: &[Option<f64>]) -> FitReport {
    let rows = curve
        .results
        .iter()
        .zip(predictor)
        .map(|(r, p)| CurveRow {
            energy: r.energy,
            count: r.count,
            predictor: *p,
            dirichlet: r.dirichlet,
            neumann: r.neumann,
            half_width: r.half_width,
            spacing: r.spacing,
            converged: r.converged,
            perturbed: r.perturbed,
            ncl_eta_w: None,
        })
        .collect();
    let mut notes = Vec::new();
    for r in curve.results.iter().filter(|r| !r.converged) {
        notes.push(format!(
            "E = {:e} not converged ({})",
            r.energy,
            r.note.clone().unwrap_or_default()
        ));
    }
    if curve.results.iter().any(|r| r.perturbed) {
        notes.push("some counts used a tie-breaking energy shift".into());
    }
    FitReport {
        name: spec.name.clone(),
        tag: spec.tag,
        branch: branch.into(),
        verdict: Verdict::Inconclusive,
        degenerate: false,
        fit: None,
        predicted_slope: None,
        log_level: None,
        predicted_level: None,
        variation: None,
        ratio_curve: Vec::new(),
        converged_fraction: curve.converged_fraction(),
        fit_energies: Vec::new(),
        tolerances: spec.tolerances,
        rows,
        checks: Vec::new(),
        sandwich: Vec::new(),
        notes,
        sign_flip: None,
        csv_path: None,
    }
}

fn count_curve(spec: &ScenarioSpec, w: &DecayingW) -> Result<Curve> {
    let v = EtaW::new(spec.eta.clone(), w.clone());
    Ok(Curve {
        results: n_curve(&v, &spec.energies, &spec.scan)?,
    })
}

fn ncl_values(v: &dyn crate::potentials::Potential, energies: &[f64]) -> Vec<Option<f64>> {
    energies
        .iter()
        .map(|&e| ncl(&NclQuery::new(v, e)).ok().map(|r| r.value))
        .collect()
}

/// Power-law branch: slope of `log N` vs `log|E|` and `N / N_cl` at the tip.
fn power_law_checks(report: &mut FitReport, spec: &ScenarioSpec, curve: &Curve, predicted: f64) {
    let window = curve.window(spec.fit_exclude);
    report.fit_energies = window.iter().map(|r| r.energy).collect();
    report.predicted_slope = Some(predicted);
    let e: Vec<f64> = window.iter().map(|r| r.energy).collect();
    let n: Vec<f64> = window.iter().map(|r| r.count as f64).collect();
    let tol = spec.tolerances.slope_tolerance(predicted);
    match fit_power(&e, &n) {
        Ok(f) => {
            report.checks.push(Check::new(
                "slope",
                (f.slope - predicted).abs() <= tol,
                format!("fitted {:.4} ± {:.4}, predicted {predicted:.4}, tolerance ±{tol:.4}", f.slope, f.stderr),
            ));
            report.fit = Some(f);
        }
        Err(err) => report.checks.push(Check {
            name: "slope".into(),
            status: Verdict::Inconclusive,
            detail: err.to_string(),
        }),
    }
    report.ratio_curve = report
        .rows
        .iter()
        .filter_map(|r| match r.predictor {
            Some(p) if p > 0.0 && r.converged => Some((r.energy, r.count as f64 / p)),
            _ => None,
        })
        .collect();
    let (lo, hi) = spec.tolerances.ratio_band;
    let tip = curve.tip().map(|t| t.energy);
    match tip.and_then(|e| report.ratio_curve.iter().find(|(x, _)| *x == e)) {
        Some(&(e, q)) => report.checks.push(Check::new(
            "ratio",
            q >= lo && q <= hi,
            format!("N/predictor = {q:.4} at E = {e:e}, band [{lo}, {hi}]"),
        )),
        None => report.checks.push(Check {
            name: "ratio".into(),
            status: Verdict::Inconclusive,
            detail: "no converged point with a positive predictor".into(),
        }),
    }
}

fn bounded_check(report: &mut FitReport, spec: &ScenarioSpec, curve: &Curve) {
    report.variation = curve.variation();
    match report.variation {
        Some(v) => report.checks.push(Check::new(
            "bounded",
            v <= spec.tolerances.variation,
            format!("count variation {v} across converged points (allowed {})", spec.tolerances.variation),
        )),
        None => report.checks.push(Check {
            name: "bounded".into(),
            status: Verdict::Inconclusive,
            detail: "no converged points".into(),
        }),
    }
}

/// Log law: `N/|ln|E||` at the tip against `C_d`; bounded branch when the
/// finiteness predicate holds.
fn log_law(spec: &ScenarioSpec, branch: &str, curve: &Curve, limit: &crate::potentials::AngularLimit) -> Result<FitReport> {
    let spectrum = spectrum_of(limit)?;
    let cd = cd_constant(&spectrum)?;
    let finite = finiteness_predicate(&spectrum);
    let predictor: Vec<Option<f64>> = spec.energies.iter().map(|e| Some(cd * e.abs().ln().abs())).collect();
    let mut report = base_report(spec, branch, curve, &predictor);
    report.predicted_level = Some(cd);
    report.ratio_curve = curve
        .converged()
        .map(|r| (r.energy, r.count as f64 / r.energy.abs().ln().abs()))
        .collect();
    report.ratio_curve.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
    report.notes.push(format!(
        "sphere spectrum λ = {:?}, C_d = {cd:.6}, finiteness predicate {finite}",
        spectrum.eigenvalues.iter().take(6).collect::<Vec<_>>()
    ));
    if finite {
        report.branch = format!("{branch}: finitely many eigenvalues");
        bounded_check(&mut report, spec, curve);
        return Ok(report);
    }
    if let Some(t) = curve.tip() {
        let level = t.count as f64 / t.energy.abs().ln().abs();
        report.log_level = Some(level);
        let tol = spec.tolerances.log_rel;
        let pass = if cd > 0.0 {
            (level / cd - 1.0).abs() <= tol
        } else {
            level <= tol
        };
        report.checks.push(Check::new(
            "log level",
            pass,
            format!("N/|ln|E|| = {level:.4} at E = {:e}, predicted {cd:.4}, tolerance ±{:.0}%", t.energy, 100.0 * tol),
        ));
    } else {
        report.checks.push(Check {
            name: "log level".into(),
            status: Verdict::Inconclusive,
            detail: "no converged points".into(),
        });
    }
    let e: Vec<f64> = curve.converged().map(|r| r.energy).collect();
    let n: Vec<f64> = curve.converged().map(|r| r.count as f64).collect();
    report.fit = fit_log(&e, &n).ok();
    Ok(report)
}

fn run_sandwich(report: &mut FitReport, spec: &ScenarioSpec) -> Result<()> {
    if spec.epsilons.is_empty() || spec.eta.background.is_empty() {
        return Ok(());
    }
    let gauge = GaugeData::new(spec.eta.clone(), spec.w.clone(), spec.epsilons[0])?;
    for &eps in &spec.epsilons {
        let s = sandwich_check(&gauge, &spec.energies, eps, &spec.scan)?;
        report.checks.push(Check {
            name: format!("sandwich ε={eps}"),
            status: if !s.bounded {
                Verdict::Fail
            } else if s.inconclusive {
                Verdict::Inconclusive
            } else {
                Verdict::Pass
            },
            detail: format!("max offset {}, offset trend {:.3}", s.max_offset, s.trend),
        });
        report.sandwich.push(s);
    }
    Ok(())
}

pub fn run_theorem_4i(spec: &ScenarioSpec) -> Result<FitReport> {
    spec.validate()?;
    let curve = count_curve(spec, &spec.w)?;
    let d = spec.dim() as f64;
    let rho = spec.w.rho();
    if spec.eta.mean < 0.0 {
        let mut report = base_report(spec, "negative mean: N(0) finite", &curve, &vec![None; spec.energies.len()]);
        bounded_check(&mut report, spec, &curve);
        run_sandwich(&mut report, spec)?;
        report.finalize();
        return Ok(report);
    }
    let predictor = ncl_values(&ScaledW::new(spec.w.clone(), spec.eta.mean), &spec.energies);
    let mut report = base_report(spec, "positive mean: power law", &curve, &predictor);
    if spec.w.tail_sign() > 0.0 {
        // the lower bound W ≤ −C|x|^{-ρ} fails
        if curve.results.iter().all(|r| r.count == 0) {
            report.degenerate = true;
            report.notes.push("W ≥ 0: no eigenvalues, vacuous pass".into());
        } else {
            report.checks.push(Check {
                name: "hypothesis".into(),
                status: Verdict::Inconclusive,
                detail: "W ≥ 0 in the tail: the power law does not apply".into(),
            });
        }
        report.finalize();
        return Ok(report);
    }
    power_law_checks(&mut report, spec, &curve, d * (0.5 - 1.0 / rho));
    run_sandwich(&mut report, spec)?;
    report.finalize();
    Ok(report)
}

pub fn run_theorem_4ii(spec: &ScenarioSpec) -> Result<FitReport> {
    spec.validate()?;
    let curve = count_curve(spec, &spec.w)?;
    let d = spec.dim() as f64;
    let rho = spec.w.rho();
    let mut report;
    if rho < 1.0 {
        let predicted = 0.5 * d * (1.0 - 1.0 / rho);
        report = base_report(spec, "zero mean, ρ < 1: power-law upper bound", &curve, &vec![None; spec.energies.len()]);
        report.predicted_slope = Some(predicted);
        let window = curve.window(spec.fit_exclude);
        report.fit_energies = window.iter().map(|r| r.energy).collect();
        let e: Vec<f64> = window.iter().map(|r| r.energy).collect();
        let n: Vec<f64> = window.iter().map(|r| r.count as f64).collect();
        let tol = spec.tolerances.slope_tolerance(predicted);
        match fit_power(&e, &n) {
            Ok(f) => {
                report.checks.push(Check::new(
                    "growth bound",
                    f.slope >= predicted - tol,
                    format!("fitted {:.4}, growth may not exceed slope {predicted:.4} − {tol:.4}", f.slope),
                ));
                report.fit = Some(f);
            }
            Err(_) => bounded_check(&mut report, spec, &curve),
        }
    } else if (rho - 1.0).abs() < 1e-12 {
        report = base_report(spec, "zero mean, ρ = 1: O(|ln|E||)", &curve, &vec![None; spec.energies.len()]);
        let mut ratios: Vec<(f64, f64)> = curve
            .converged()
            .map(|r| (r.energy, r.count as f64 / r.energy.abs().ln().abs()))
            .collect();
        ratios.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
        report.ratio_curve = ratios.clone();
        if ratios.len() >= 2 {
            let half = ratios.len() / 2;
            let early = ratios[..half].iter().map(|r| r.1).fold(0.0, f64::max);
            let (e_last, last) = *ratios.last().expect("nonempty");
            let allowed = (1.0 + spec.tolerances.log_rel) * early + 1.0 / e_last.abs().ln().abs();
            report.checks.push(Check::new(
                "log bound",
                last <= allowed,
                format!("N/|ln|E|| = {last:.4} at the tip, allowed ≤ {allowed:.4}"),
            ));
        } else {
            bounded_check(&mut report, spec, &curve);
        }
    } else {
        report = base_report(spec, "zero mean, ρ ∈ (1,2]: O(1)", &curve, &vec![None; spec.energies.len()]);
        bounded_check(&mut report, spec, &curve);
    }
    run_sandwich(&mut report, spec)?;
    report.finalize();
    Ok(report)
}

pub fn run_theorem_4iii(spec: &ScenarioSpec) -> Result<FitReport> {
    spec.validate()?;
    let curve = count_curve(spec, &spec.w)?;
    let limit = angular_limit(&spec.w)?.scaled(spec.eta.mean);
    let mut report = log_law(spec, "ρ = 2: log law C_d(η₀L)", &curve, &limit)?;
    run_sandwich(&mut report, spec)?;
    report.finalize();
    Ok(report)
}

pub fn run_theorem_5i(spec: &ScenarioSpec) -> Result<FitReport> {
    spec.validate()?;
    let mut report = run_5i_once(spec, &spec.w)?;
    run_sandwich(&mut report, spec)?;
    if spec.sign_flip {
        let flipped_w = spec.w.scaled(-1.0);
        let mut flipped = run_5i_once(spec, &flipped_w)?;
        flipped.finalize();
        let same_verdict = {
            let mut base = report.clone();
            base.finalize();
            base.verdict == flipped.verdict
        };
        report.checks.push(Check::new(
            "sign flip verdict",
            same_verdict,
            format!("verdict with −W: {:?}", flipped.verdict),
        ));
        if let (Some(a), Some(b)) = (report.fit, flipped.fit) {
            let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            report.checks.push(Check::new(
                "sign flip slope",
                (a.slope - b.slope).abs() <= 2.0 * combined + 1e-12,
                format!("slopes {:.4} (W) and {:.4} (−W), combined stderr {combined:.4}", a.slope, b.slope),
            ));
        }
        report.sign_flip = Some(Box::new(flipped));
    }
    report.finalize();
    Ok(report)
}

fn run_5i_once(spec: &ScenarioSpec, w: &DecayingW) -> Result<FitReport> {
    let curve = count_curve(spec, w)?;
    let d = spec.dim() as f64;
    let rho = w.rho();
    let psi0 = spec.psi0();
    let predictor = ncl_values(&SquaredW::new(w.clone(), -psi0), &spec.energies);
    let mut report = base_report(spec, "zero mean, ρ < 1: power law of −ψ₀W²", &curve, &predictor);
    // the semiclassical function of ηW itself, for contrast
    let eta_w = EtaW::new(spec.eta.clone(), w.clone());
    for (row, v) in report.rows.iter_mut().zip(ncl_values(&eta_w, &spec.energies)) {
        row.ncl_eta_w = v;
    }
    report.notes.push(format!(
        "N_cl(E; ηW) grows like |E|^{:.3}, N like |E|^{:.3}",
        d * (0.5 - 1.0 / rho),
        0.5 * d * (1.0 - 1.0 / rho)
    ));
    power_law_checks(&mut report, spec, &curve, 0.5 * d * (1.0 - 1.0 / rho));
    Ok(report)
}

pub fn run_theorem_5ii(spec: &ScenarioSpec) -> Result<FitReport> {
    spec.validate()?;
    let curve = count_curve(spec, &spec.w)?;
    let limit = squared_angular_limit(&spec.w)?.scaled(-spec.psi0());
    let mut report = log_law(spec, "zero mean, ρ = 1: log law C_d(−ψ₀𝓛)", &curve, &limit)?;
    run_sandwich(&mut report, spec)?;
    report.finalize();
    Ok(report)
}

pub fn run_clr(spec: &ScenarioSpec) -> Result<FitReport> {
    spec.validate()?;
    let curve = count_curve(spec, &spec.w)?;
    let mut report = base_report(spec, "fast decay: finitely many eigenvalues", &curve, &vec![None; spec.energies.len()]);
    // N_cl(0) of the radial minorant −sup|η|·|W|
    let sign = if spec.w.tail_sign() == 0.0 { -1.0 } else { -spec.w.tail_sign() };
    let minorant = ScaledW::new(spec.w.clone(), sign * spec.eta.sup_bound());
    match ncl(&NclQuery::new(&minorant, 0.0)) {
        Ok(r) => report.notes.push(format!("N_cl(0; −sup|η|·|W|) = {}", r.value)),
        Err(e) => report.notes.push(format!("N_cl(0) unavailable: {e}")),
    }
    bounded_check(&mut report, spec, &curve);
    report.finalize();
    Ok(report)
}

/// Runs the scenario selected by its tag.
pub fn run(spec: &ScenarioSpec) -> Result<FitReport> {
    match spec.tag {
        TheoremTag::T4iPlus | TheoremTag::T4iMinus => run_theorem_4i(spec),
        TheoremTag::T4ii => run_theorem_4ii(spec),
        TheoremTag::T4iii => run_theorem_4iii(spec),
        TheoremTag::T5i => run_theorem_5i(spec),
        TheoremTag::T5ii => run_theorem_5ii(spec),
        TheoremTag::Clr => run_clr(spec),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimonReport {
    /// `ρ > d/(d+1)`.
    pub holds: bool,
    /// Cumulative `Σ |E|^{-1/2} (N(E;V) + N(E;−V)) ΔE`, from large to small
    /// `|E|`.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Ratio of the last increment to the one before (diagnostic only).
    pub growth_trend: Option<f64>,
}

/// The integrability criterion `ρ > d/(d+1)`, with an optional empirical
/// partial integral from counting curves of `V` and `−V` sampled on the same
/// energy grid.
pub fn simon_criterion_check(rho: f64, d: usize, curves: Option<(&[(f64, usize)], &[(f64, usize)])>) -> SimonReport {
    let holds = rho > d as f64 / (d as f64 + 1.0);
    let mut partial = Vec::new();
    let mut trend = None;
    if let Some((plus, minus)) = curves {
        let mut pts: Vec<(f64, f64)> = plus
            .iter()
            .zip(minus)
            .map(|(&(e, a), &(_, b))| (e, (a + b) as f64))
            .collect();
        pts.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()));
        let mut acc = 0.0;
        let mut incs = Vec::new();
        for w in pts.windows(2) {
            let de = (w[0].0 - w[1].0).abs();
            let inc = w[1].1 * w[1].0.abs().powf(-0.5) * de;
            acc += inc;
            incs.push(inc);
            partial.push((w[1].0, acc));
        }
        if incs.len() >= 2 && incs[incs.len() - 2] > 0.0 {
            trend = Some(incs[incs.len() - 1] / incs[incs.len() - 2]);
        }
    }
    SimonReport {
        holds,
        partial_integrals: partial,
        growth_trend: trend,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::TrigBackground;
    use crate::semiclassical::log_energy_grid;
    use num_complex::Complex64;

    fn cos_eta(mean: f64) -> AdmissibleEta {
        AdmissibleEta::new(mean, TrigBackground::cosine_pair(vec![1.0], Complex64::new(1.0, 0.0)).unwrap())
    }

    #[test]
    fn simon_examples() {
        assert!(simon_criterion_check(0.6, 1, None).holds);
        assert!(!simon_criterion_check(0.5, 1, None).holds);
        assert!(simon_criterion_check(0.7, 2, None).holds);
        let c: Vec<(f64, usize)> = log_energy_grid(-1.0, -3.0, 5).into_iter().map(|e| (e, 2)).collect();
        let r = simon_criterion_check(0.7, 1, Some((&c, &c)));
        assert_eq!(r.partial_integrals.len(), 4);
        assert!(r.partial_integrals.windows(2).all(|p| p[1].1 >= p[0].1));
    }

    #[test]
    fn branch_validation() {
        let w = DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap();
        let e = log_energy_grid(-1.0, -2.0, 6);
        let ok = ScenarioSpec::new(TheoremTag::T4iPlus, cos_eta(1.0), w.clone(), e.clone());
        assert!(ok.validate().is_ok());
        let bad = ScenarioSpec::new(TheoremTag::T4iPlus, cos_eta(-1.0), w.clone(), e.clone());
        assert!(matches!(bad.validate(), Err(Error::BranchMismatch { .. })));
        assert!(ScenarioSpec::new(TheoremTag::T5i, cos_eta(0.0), w.clone(), e.clone()).validate().is_ok());
        assert!(ScenarioSpec::new(TheoremTag::T5ii, cos_eta(0.0), w.clone(), e.clone()).validate().is_err());
        assert!(ScenarioSpec::new(TheoremTag::T4iii, cos_eta(1.0), w.clone(), e.clone()).validate().is_err());
        let w2 = DecayingW::power(1, -10.0, 2.0).unwrap();
        assert!(ScenarioSpec::new(TheoremTag::T4iii, cos_eta(1.0), w2.clone(), e.clone()).validate().is_ok());
        assert!(ScenarioSpec::new(TheoremTag::T4iPlus, cos_eta(1.0), w2, e.clone()).validate().is_err());
        let w3 = DecayingW::power(1, -1.0, 3.0).unwrap();
        assert!(ScenarioSpec::new(TheoremTag::Clr, cos_eta(0.5), w3, e.clone()).validate().is_ok());
        let flat = ScenarioSpec::new(TheoremTag::T5i, AdmissibleEta::constant(1, 0.0), w, e);
        assert!(flat.validate().is_err());
    }

    #[test]
    fn box_scales_follow_the_effective_attraction() {
        let w = DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap();
        let cw = 2f64.powf(1.0 / 3.0);
        match default_box_scale(&cos_eta(1.0), &w) {
            BoxScale::TurningPoint { c, rho } => assert!((c - cw).abs() < 1e-12 && (rho - 2.0 / 3.0).abs() < 1e-12),
            s => panic!("{s:?}"),
        }
        match default_box_scale(&cos_eta(0.0), &w) {
            BoxScale::TurningPoint { c, rho } => assert!((c - 2.0 * cw * cw).abs() < 1e-12 && (rho - 4.0 / 3.0).abs() < 1e-12),
            s => panic!("{s:?}"),
        }
        match default_box_scale(&cos_eta(-1.0), &w) {
            // (1+r²)^{-1/3} = 1/2
            BoxScale::Radius(r) => assert!((r - 7f64.sqrt()).abs() < 1e-12),
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn degenerate_positive_w() {
        // η ≥ 0 and W ≥ 0: V ≥ 0, nothing to count
        let eta = AdmissibleEta::new(1.0, TrigBackground::cosine_pair(vec![1.0], Complex64::new(0.25, 0.0)).unwrap());
        let w = DecayingW::power(1, 1.0, 2.0 / 3.0).unwrap();
        let mut spec = ScenarioSpec::new(TheoremTag::T4iPlus, eta, w, log_energy_grid(-1.0, -2.0, 6));
        spec.scan = spec.scan.with_scale(BoxScale::Radius(5.0));
        let r = run(&spec).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn small_log_law_finiteness_branch() {
        // η₀ L = −0.1 > −1/4: bounded counts
        let w = DecayingW::power(1, -0.1, 2.0).unwrap();
        let spec = ScenarioSpec::new(TheoremTag::T4iii, cos_eta(1.0), w, log_energy_grid(-1.0, -4.0, 7));
        let r = run(&spec).unwrap();
        assert!(r.branch.contains("finitely"), "{}", r.branch);
        assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.checks);
        assert_eq!(r.predicted_level, Some(0.0));
    }

    #[test]
    fn identical_specs_write_identical_curves() {
        let eta = AdmissibleEta::new(-1.0, TrigBackground::cosine_pair(vec![1.0], Complex64::new(1.0, 0.0)).unwrap());
        let w = DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap();
        let spec = ScenarioSpec::new(TheoremTag::T4iMinus, eta, w, log_energy_grid(-1.0, -3.0, 6));
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let mut bytes = Vec::new();
        for d in &dirs {
            let mut r = run(&spec).unwrap();
            write_outputs(d.path(), &mut r).unwrap();
            bytes.push(std::fs::read(d.path().join("curve.csv")).unwrap());
            assert!(d.path().join("report.json").exists() && d.path().join("report.txt").exists());
        }
        assert_eq!(bytes[0], bytes[1]);
        let text = String::from_utf8(bytes.swap_remove(0)).unwrap();
        assert!(text.starts_with("E,count,predictor,count_dirichlet,count_neumann,R,h,converged"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(Verdict::Pass), 0);
        assert_eq!(exit_code(Verdict::Fail), 1);
        assert_eq!(exit_code(Verdict::Inconclusive), 2);
    }
}
