//! The phase-space counting function
//! `N_cl(E; V) = τ_d (2π)^{-d} ∫ (V − E)_-^{d/2} dx`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{ray_directions, Envelope, Potential};
use crate::quadrature::{integrate_panels, uniform_breakpoints, QuadConfig};

pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// `τ_d = π^{d/2} / Γ(1 + d/2)`, by the recursion `τ_d = (2π/d) τ_{d−2}`.
pub fn unit_ball_volume(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Surface area of `S^{d−1}`, `d τ_d`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

fn prefactor(d: usize) -> f64 {
    unit_ball_volume(d) / (2.0 * std::f64::consts::PI).powi(d as i32)
}

/// How the outer radius of the sublevel set `{V < E}` is found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialCutoff {
    /// From the potential's declared envelope; sampled search if none.
    Envelope,
    /// Caller-provided radius.
    Fixed(f64),
}

#[derive(Clone, Copy)]
pub struct NclQuery<'a> {
    pub potential: &'a dyn Potential,
    pub energy: f64,
    pub tolerance: f64,
    pub cutoff: RadialCutoff,
}

impl<'a> NclQuery<'a> {
    pub fn new(potential: &'a dyn Potential, energy: f64) -> Self {
        Self {
            potential,
            energy,
            tolerance: DEFAULT_TOLERANCE,
            cutoff: RadialCutoff::Envelope,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_cutoff(mut self, cutoff: RadialCutoff) -> Self {
        self.cutoff = cutoff;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NclResult {
    pub energy: f64,
    /// `+∞` when the integral diverges (only possible at `E = 0`).
    pub value: f64,
    pub error: f64,
    /// Cumulative integral up to increasing radii.
    pub partial_sums: Vec<(f64, f64)>,
    pub outer_radius: f64,
    /// The outer radius came from sampling rather than a declared envelope.
    pub heuristic_bracket: bool,
}

impl NclResult {
    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }

    fn zero(energy: f64) -> Self {
        Self {
            energy,
            value: 0.0,
            error: 0.0,
            partial_sums: vec![(0.0, 0.0)],
            outer_radius: 0.0,
            heuristic_bracket: false,
        }
    }
}

/// `N_cl(E; V)` with an error estimate.
pub fn ncl(query: &NclQuery) -> Result<NclResult> {
    let v = query.potential;
    let e = query.energy;
    if !(e <= 0.0) || !e.is_finite() {
        return Err(Error::InvalidParameter(format!("energy must be ≤ 0, got {e}")));
    }
    if !(query.tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let d = v.dim();
    if d == 0 || d > 3 {
        return Err(Error::InvalidParameter(format!("unsupported dimension {d}")));
    }
    let envelope = v.envelope();
    if envelope == Envelope::Nonnegative {
        return Ok(NclResult::zero(e));
    }
    if e == 0.0 {
        return ncl_at_threshold(query);
    }
    let (radius, heuristic) = match query.cutoff {
        RadialCutoff::Fixed(r) => (r, false),
        RadialCutoff::Envelope => match envelope.sublevel_radius(e) {
            Some(r) => (r, false),
            None => (sampled_sublevel_radius(v, e)?, true),
        },
    };
    let mut res = integrate_ball(v, e, 0.0, radius, query.tolerance)?;
    res.heuristic_bracket = heuristic;
    Ok(res)
}

/// Radius beyond which no sampled point has `V < E`: rays are scanned over
/// doubling shells until two consecutive shells are clean.
fn sampled_sublevel_radius(v: &dyn Potential, e: f64) -> Result<f64> {
    let dirs = ray_directions(v.dim(), 8, 11);
    let step = if v.max_frequency() > 0.0 {
        0.25 * std::f64::consts::PI / v.max_frequency()
    } else {
        0.05
    };
    let mut inner: f64 = 0.0;
    let mut outer = 1.0;
    let mut clean = 0;
    let mut last_hit: f64 = 0.0;
    while outer < 1e9 {
        let n = (((outer - inner) / step).ceil() as usize).clamp(64, 1 << 22);
        let hit = dirs.iter().any(|dir| {
            (0..=n).any(|k| {
                let r = inner + (outer - inner) * k as f64 / n as f64;
                let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
                v.eval(&x) < e
            })
        });
        if hit {
            clean = 0;
            last_hit = outer;
        } else {
            clean += 1;
            if clean >= 2 {
                return Ok(last_hit);
            }
        }
        inner = outer;
        outer *= 2.0;
    }
    Err(Error::Resource(format!(
        "sublevel set of E = {e} not bracketed below radius 1e9"
    )))
}

fn cfg(tolerance: f64) -> QuadConfig {
    QuadConfig {
        rel_tol: tolerance * 0.25,
        abs_tol: 1e-300,
        max_evaluations: 20_000_000,
        min_width: 1e-13,
    }
}

/// `τ_d (2π)^{-d} ∫_{r_0 ≤ |x| ≤ r_1} (E − V)_+^{d/2}`.
fn integrate_ball(v: &dyn Potential, e: f64, r0: f64, r1: f64, tol: f64) -> Result<NclResult> {
    let d = v.dim();
    if r1 <= r0 {
        return Ok(NclResult {
            outer_radius: r1,
            ..NclResult::zero(e)
        });
    }
    let pre = prefactor(d);
    if v.is_radial() {
        let integrand = |r: f64| -> f64 {
            let neg = (e - v.radial_value(r)).max(0.0);
            sphere_area(d) * r.powi(d as i32 - 1) * neg.powf(d as f64 / 2.0)
        };
        let bp = radial_breakpoints(|r| v.radial_value(r) - e, r0, r1, v.max_frequency());
        let q = integrate_panels(integrand, &bp, cfg(tol));
        return Ok(finish(e, pre, q.value, q.error, &bp, r1, |a, b| {
            integrate_panels(integrand, &[a, b], cfg(tol)).value
        }));
    }
    if d == 1 {
        // d = 1 without symmetry: integrate over [−r1, −r0] ∪ [r0, r1]
        let f = |x: f64| (e - v.eval(&[x])).max(0.0).sqrt();
        let width = panel_width(v, r1 - r0);
        let n = (((r1 - r0) / width).ceil() as usize).max(1);
        if n > 5_000_000 {
            return Err(Error::Resource(format!("{n} quadrature panels needed")));
        }
        let pos = uniform_breakpoints(r0, r1, n);
        let neg: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
        let qp = integrate_panels(f, &pos, cfg(tol));
        let qn = integrate_panels(f, &neg, cfg(tol));
        let value = pre * (qp.value + qn.value);
        return Ok(NclResult {
            energy: e,
            value,
            error: pre * (qp.error + qn.error),
            partial_sums: vec![(r1, value)],
            outer_radius: r1,
            heuristic_bracket: false,
        });
    }
    if d == 2 {
        if r0 > 0.0 {
            return Err(Error::InvalidParameter(
                "annular integration is only available for radial potentials".into(),
            ));
        }
        // nested adaptive: outer in y, inner in x over the chord of the disk
        let width = panel_width(v, 2.0 * r1);
        let n = ((2.0 * r1 / width).ceil() as usize).max(2);
        if n > 200_000 {
            return Err(Error::Resource(format!("{n}² quadrature panels needed")));
        }
        let inner_cfg = cfg(tol * 0.1);
        let inner_err = std::sync::Mutex::new(0.0f64);
        let outer_bp = uniform_breakpoints(-r1, r1, n);
        let g = |y: f64| -> f64 {
            let half = (r1 * r1 - y * y).max(0.0).sqrt();
            if half == 0.0 {
                return 0.0;
            }
            let m = ((2.0 * half / width).ceil() as usize).max(1);
            let q = integrate_panels(
                |x| (e - v.eval(&[x, y])).max(0.0),
                &uniform_breakpoints(-half, half, m),
                inner_cfg,
            );
            let mut ie = inner_err.lock().expect("poisoned");
            *ie = ie.max(q.error);
            q.value
        };
        let q = integrate_panels(g, &outer_bp, cfg(tol));
        let ie = *inner_err.lock().expect("poisoned");
        let value = pre * q.value;
        return Ok(NclResult {
            energy: e,
            value,
            error: pre * (q.error + 2.0 * r1 * ie),
            partial_sums: vec![(r1, value)],
            outer_radius: r1,
            heuristic_bracket: false,
        });
    }
    Err(Error::InvalidParameter(
        "non-radial potentials are supported for d ≤ 2 only".into(),
    ))
}

fn panel_width(v: &dyn Potential, span: f64) -> f64 {
    let k = v.max_frequency();
    let w = if k > 0.0 {
        std::f64::consts::PI / k
    } else {
        span / 16.0
    };
    w.min(span / 4.0).max(1e-9)
}

/// Breakpoints for a radial integrand: a uniform/logarithmic sample grid
/// refined at sign changes of `g = V − E` (located by bisection) so that
/// the `(E − V)_+` kinks fall on panel boundaries.
fn radial_breakpoints(g: impl Fn(f64) -> f64, r0: f64, r1: f64, freq: f64) -> Vec<f64> {
    let n = if freq > 0.0 {
        ((r1 - r0) * freq / std::f64::consts::PI).ceil() as usize
    } else {
        0
    }
    .clamp(64, 2_000_000);
    let grid = uniform_breakpoints(r0, r1, n);
    let mut bp = vec![grid[0]];
    for w in grid.windows(2) {
        let (ga, gb) = (g(w[0]), g(w[1]));
        if ga.signum() != gb.signum() && ga != 0.0 && gb != 0.0 {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if g(m).signum() == ga.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            if root > *bp.last().expect("nonempty") {
                bp.push(root);
            }
        }
        if w[1] > *bp.last().expect("nonempty") {
            bp.push(w[1]);
        }
    }
    bp
}

fn finish(
    e: f64,
    pre: f64,
    raw: f64,
    raw_err: f64,
    bp: &[f64],
    r1: f64,
    piece: impl Fn(f64, f64) -> f64,
) -> NclResult {
    // cumulative sums on up to 8 checkpoints
    let mut partial = Vec::new();
    let stride = (bp.len() / 8).max(1);
    let mut acc = 0.0;
    let mut last = bp[0];
    for (i, &b) in bp.iter().enumerate().skip(1) {
        if i % stride == 0 || i == bp.len() - 1 {
            acc += piece(last, b);
            last = b;
            partial.push((b, pre * acc));
        }
    }
    NclResult {
        energy: e,
        value: pre * raw,
        error: pre * raw_err,
        partial_sums: partial,
        outer_radius: r1,
        heuristic_bracket: false,
    }
}

/// `E = 0`: integrate over doubling shells until the increments become
/// negligible; a tail that does not contract is reported as divergent.
fn ncl_at_threshold(query: &NclQuery) -> Result<NclResult> {
    let v = query.potential;
    let envelope = v.envelope();
    if let Envelope::Compact { radius, .. } = envelope {
        return integrate_ball(v, 0.0, 0.0, radius, query.tolerance);
    }
    if let RadialCutoff::Fixed(r) = query.cutoff {
        return integrate_ball(v, 0.0, 0.0, r, query.tolerance);
    }
    if !v.is_radial() {
        // a sign-definite power tail ρ ≤ 2 diverges regardless of the core
        if let Envelope::Power { rho, .. } = envelope {
            if rho > 2.0 {
                return Err(Error::InvalidParameter(
                    "N_cl(0) for non-radial potentials needs a fixed cutoff".into(),
                ));
            }
        }
    }
    let tol = query.tolerance;
    let mut partial = Vec::new();
    let mut total = 0.0;
    let mut error = 0.0;
    let mut r0 = 0.0;
    let mut r1 = 1.0;
    let mut increments: Vec<f64> = Vec::new();
    for _ in 0..64 {
        let shell = if v.is_radial() {
            integrate_ball(v, 0.0, r0, r1, tol)?
        } else {
            // non-radial: full balls, differenced
            let full = integrate_ball(v, 0.0, 0.0, r1, tol)?;
            NclResult {
                value: full.value - total,
                ..full
            }
        };
        total += shell.value;
        error += shell.error;
        partial.push((r1, total));
        increments.push(shell.value);
        let k = increments.len();
        if k >= 4 && total > 0.0 {
            let inc = &increments[k - 3..];
            let contracting = inc[2] <= 0.8 * inc[1] && inc[1] <= 0.8 * inc[0];
            let geometric_tail = if contracting && inc[1] > 0.0 {
                let q = inc[2] / inc[1];
                inc[2] * q / (1.0 - q)
            } else {
                f64::INFINITY
            };
            if inc[2] == 0.0 && inc[1] == 0.0 || geometric_tail <= tol * total {
                let tail = if geometric_tail.is_finite() { geometric_tail } else { 0.0 };
                return Ok(NclResult {
                    energy: 0.0,
                    value: total + tail,
                    error: error + tail,
                    partial_sums: partial,
                    outer_radius: r1,
                    heuristic_bracket: false,
                });
            }
            if k >= 8 && inc[2] >= 0.99 * inc[1] && inc[1] >= 0.99 * inc[0] {
                break;
            }
        }
        if total == 0.0 && k >= 8 && !matches!(envelope, Envelope::Power { .. }) {
            return Ok(NclResult::zero(0.0));
        }
        r0 = r1;
        r1 *= 2.0;
    }
    Ok(NclResult {
        energy: 0.0,
        value: f64::INFINITY,
        error: f64::INFINITY,
        partial_sums: partial,
        outer_radius: r1,
        heuristic_bracket: false,
    })
}

/// `ρ > 2` tail: the finiteness predicate for `N_cl(0; V)` of a power
/// envelope.
pub fn threshold_finite(envelope: &Envelope) -> bool {
    match *envelope {
        Envelope::Power { rho, .. } => rho > 2.0,
        Envelope::Compact { .. } | Envelope::Nonnegative => true,
        Envelope::Unknown => false,
    }
}

/// Evaluates `N_cl` on an energy grid in parallel.
pub fn ncl_curve(v: &dyn Potential, energies: &[f64], tolerance: f64) -> Result<Vec<NclResult>> {
    energies
        .par_iter()
        .map(|&e| ncl(&NclQuery::new(v, e).with_tolerance(tolerance)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderFit {
    pub slope: f64,
    /// `exp` of the intercept of the log–log fit.
    pub prefactor: f64,
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

/// Least-squares slope of `log N_cl` against `log|E|`.
pub fn ncl_order_fit(v: &dyn Potential, energies: &[f64]) -> Result<OrderFit> {
    if energies.len() < 8 {
        return Err(Error::InsufficientPoints {
            need: 8,
            got: energies.len(),
        });
    }
    let results = ncl_curve(v, energies, DEFAULT_TOLERANCE)?;
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    if let Some(r) = results.iter().find(|r| !(r.value > 0.0) || r.value.is_infinite()) {
        return Err(Error::EmptyCountingRange(r.energy));
    }
    let pts: Vec<(f64, f64)> = energies
        .iter()
        .zip(&values)
        .map(|(e, n)| (e.abs().ln(), n.ln()))
        .collect();
    let (slope, intercept) = linear_fit(&pts);
    Ok(OrderFit {
        slope,
        prefactor: intercept.exp(),
        energies: energies.to_vec(),
        values,
    })
}

pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `(E, N_cl(E; V2) / N_cl(E; V1))` over the grid.
pub fn ncl_ratio_stability(v1: &dyn Potential, v2: &dyn Potential, energies: &[f64]) -> Result<Vec<(f64, f64)>> {
    let a = ncl_curve(v1, energies, DEFAULT_TOLERANCE * 0.1)?;
    let b = ncl_curve(v2, energies, DEFAULT_TOLERANCE * 0.1)?;
    Ok(energies
        .iter()
        .zip(a.iter().zip(&b))
        .map(|(&e, (x, y))| (e, y.value / x.value))
        .collect())
}

/// Log-spaced negative energies `−10^{a} … −10^{b}` (`n ≥ 2` points).
pub fn log_energy_grid(from_exp: f64, to_exp: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -(10f64).powf(from_exp + (to_exp - from_exp) * i as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{DecayingW, FnPotential, ScaledW, SquareWell, ZeroPotential};
    use std::f64::consts::PI;

    fn power(d: usize, rho: f64) -> ScaledW {
        ScaledW::new(DecayingW::power(d, -1.0, rho).unwrap(), 1.0)
    }

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n).map(|i| f(a + h * i as f64)).sum();
        h * (inner + 0.5 * (f(a) + f(b)))
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert_eq!(unit_ball_volume(2), PI);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
        // π²/2 for d = 4
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn box_well_at_threshold() {
        let well = SquareWell { dim: 1, depth: 1.0, half_width: 0.5 };
        let r = ncl(&NclQuery::new(&well, 0.0)).unwrap();
        assert!((r.value - 1.0 / PI).abs() < 1e-10, "{:?}", r);
    }

    #[test]
    fn nonnegative_potential_counts_nothing() {
        let z = ZeroPotential { dim: 2 };
        for e in [0.0, -0.5, -10.0] {
            assert_eq!(ncl(&NclQuery::new(&z, e)).unwrap().value, 0.0);
        }
        let bumpy = FnPotential::new(1, |x| 1.0 + x[0].sin());
        let r = ncl(&NclQuery::new(&bumpy, -0.2)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.heuristic_bracket);
    }

    #[test]
    fn power_potential_matches_trapezoid_oracle() {
        let v = power(1, 1.0);
        let e = -0.1;
        let r = ncl(&NclQuery::new(&v, e)).unwrap();
        let xt = (1.0 / (e * e) - 1.0).sqrt();
        let f = |x: f64| ((1.0 + x * x).powf(-0.5) + e).max(0.0).sqrt();
        let oracle = 2.0 / (2.0 * PI) * 2.0 * trapezoid(f, 0.0, xt, 2_000_000);
        assert!((r.value - oracle).abs() <= 1e-4 * oracle, "{} {}", r.value, oracle);
        assert!(r.error <= 1e-4 * r.value);
    }

    #[test]
    fn non_radial_paths_agree_with_radial() {
        // same potential seen through the generic 1-D and 2-D integrators
        for d in [1, 2] {
            let v = power(d, 1.0);
            let generic = FnPotential::new(d, move |x| {
                -(1.0 + x.iter().map(|t| t * t).sum::<f64>()).powf(-0.5)
            });
            let e = -0.2;
            let a = ncl(&NclQuery::new(&v, e)).unwrap().value;
            let b = ncl(&NclQuery::new(&generic, e).with_cutoff(RadialCutoff::Fixed(5.0))).unwrap().value;
            assert!((a - b).abs() <= 1e-4 * a, "d={d}: {a} {b}");
        }
    }

    #[test]
    fn disk_well_in_two_dimensions() {
        // (1/4π)·depth·π R² for a disk of radius R
        let well = SquareWell { dim: 2, depth: 3.0, half_width: 2.0 };
        let r = ncl(&NclQuery::new(&well, -1.0)).unwrap();
        let oracle = (3.0 - 1.0) * PI * 4.0 / (4.0 * PI);
        assert!((r.value - oracle).abs() < 1e-8 * oracle);
    }

    #[test]
    fn order_fit_examples() {
        let cases = [(1, 2.0 / 3.0, -1.0, (-3.0, -6.0)), (1, 0.5, -1.5, (-2.0, -4.0)), (2, 1.0, -1.0, (-2.0, -4.0))];
        for (d, rho, expected, (a, b)) in cases {
            let fit = ncl_order_fit(&power(d, rho), &log_energy_grid(a, b, 8)).unwrap();
            assert!((fit.slope - expected).abs() <= 0.05 * expected.abs(), "d={d} ρ={rho}: {}", fit.slope);
            // d(1/2 − 1/ρ)
            assert!((expected - d as f64 * (0.5 - 1.0 / rho)).abs() < 1e-12);
        }
        assert!(matches!(
            ncl_order_fit(&power(1, 1.0), &log_energy_grid(-1.0, -2.0, 5)),
            Err(Error::InsufficientPoints { .. })
        ));
        // depth 1 potential: nothing below E = −2
        assert!(matches!(
            ncl_order_fit(&power(1, 1.0), &log_energy_grid(0.5, -1.0, 8)),
            Err(Error::EmptyCountingRange(_))
        ));
    }

    #[test]
    fn scaling_identity() {
        // N_cl(E; cV) = c^{d/2} N_cl(E/c; V) by pulling c out of the integrand
        for d in [1, 2] {
            let w = DecayingW::power(d, -1.0, 0.8).unwrap();
            for (c, e) in [(2.0, -0.05), (0.5, -0.01), (3.0, -0.3)] {
                let lhs = ncl(&NclQuery::new(&ScaledW::new(w.clone(), c), e).with_tolerance(1e-7)).unwrap().value;
                let rhs = ncl(&NclQuery::new(&ScaledW::new(w.clone(), 1.0), e / c).with_tolerance(1e-7)).unwrap().value;
                let pred = c.powf(d as f64 / 2.0) * rhs;
                assert!((lhs - pred).abs() <= 1e-6 * pred, "d={d} c={c}: {lhs} {pred}");
            }
        }
    }

    #[test]
    fn ratio_stability_examples() {
        let w = DecayingW::power(1, -1.0, 1.0).unwrap();
        let base = ScaledW::new(w.clone(), 1.0);
        let grid = log_energy_grid(-1.0, -5.0, 5);
        let same = ncl_ratio_stability(&base, &ScaledW::new(w.clone(), 1.0), &grid).unwrap();
        assert!(same.iter().all(|&(_, q)| (q - 1.0).abs() < 1e-12));
        let t = ncl_ratio_stability(&base, &ScaledW::new(w.clone(), 1.1), &grid).unwrap();
        let errs: Vec<f64> = t.iter().map(|&(_, q)| (q - 1.1).abs()).collect();
        assert!(errs.windows(2).all(|p| p[1] <= p[0] + 1e-6), "{errs:?}");
        assert!(errs[4] < 1e-3, "{errs:?}");
        // deviation from 1 shrinks monotonically with ε
        let e = [-1e-3];
        let mut prev = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05, 0.01] {
            let q = ncl_ratio_stability(&base, &ScaledW::new(w.clone(), 1.0 + eps), &e).unwrap()[0].1;
            assert!(q > 1.0 && q - 1.0 < prev);
            prev = q - 1.0;
        }
    }

    #[test]
    fn threshold_divergence_and_convergence() {
        for rho in [1.0, 2.0] {
            let r = ncl(&NclQuery::new(&power(1, rho), 0.0)).unwrap();
            assert!(r.is_divergent(), "ρ={rho}");
            assert!(!r.partial_sums.is_empty());
            assert!(!threshold_finite(&power(1, rho).envelope()));
        }
        // (2/2π)·2∫₀^∞ (1+x²)^{-3/4} dx with ∫ = √π Γ(1/4) / (2 Γ(3/4))
        let gamma_quarter = 3.625_609_908_221_908;
        let gamma_three_quarters = 1.225_416_702_465_178;
        let oracle = 2.0 / PI * PI.sqrt() * gamma_quarter / (2.0 * gamma_three_quarters);
        let r = ncl(&NclQuery::new(&power(1, 3.0), 0.0)).unwrap();
        assert!(!r.is_divergent());
        assert!((r.value - oracle).abs() <= 2e-4 * oracle, "{} {}", r.value, oracle);
        assert!(threshold_finite(&power(1, 3.0).envelope()));
    }

    #[test]
    fn monotone_in_energy_and_potential() {
        let v = power(1, 1.0);
        let deeper = ScaledW::new(DecayingW::power(1, -1.0, 1.0).unwrap(), 1.5);
        let grid = log_energy_grid(-0.5, -3.0, 12);
        let a = ncl_curve(&v, &grid, 1e-6).unwrap();
        let b = ncl_curve(&deeper, &grid, 1e-6).unwrap();
        for k in 0..grid.len() {
            if k > 0 {
                assert!(a[k].value >= a[k - 1].value);
            }
            assert!(b[k].value >= a[k].value);
        }
    }

    #[test]
    fn refinement_within_error_estimate() {
        let v = power(2, 0.9);
        let coarse = ncl(&NclQuery::new(&v, -0.02).with_tolerance(1e-4)).unwrap();
        let fine = ncl(&NclQuery::new(&v, -0.02).with_tolerance(1e-8)).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.error.max(1e-12));
    }

    #[test]
    fn rejects_positive_energy() {
        assert!(ncl(&NclQuery::new(&power(1, 1.0), 0.1)).is_err());
    }
}
