//! Exact eigenvalue counts of discretized Schrödinger operators on boxes,
//! with Dirichlet/Neumann bracketing and box/mesh convergence scans.
//!
//! The discrete quadratic form on the node set of `[−R, R]^d` is
//! `q[u] = Σ_edges w_e |u_i − u_j|²/h² + Σ_i m_i (V_i − E) u_i²` with
//! trapezoidal weights (`m = ½` on the boundary of the Neumann box, products
//! in `d = 2`). Dirichlet is the restriction of this form to functions that
//! vanish on the boundary, so `Dirichlet ≤ Neumann` holds exactly by
//! min-max. Counts are the negative inertia of `K + M(V − E)`.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::GaugeData;
use crate::inertia::{band_ldl_negative_count, bunch_kaufman_inertia, dense_count_below, sturm_negative_count, BandMatrix};
use crate::potentials::{EtaW, Envelope, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointCaps {
    pub max_points_1d: usize,
    pub max_points_2d: usize,
}

impl Default for PointCaps {
    fn default() -> Self {
        Self {
            max_points_1d: 50_000_000,
            max_points_2d: 4_000_000,
        }
    }
}

/// Above this many unknowns the dense fallback is not attempted.
pub const DENSE_FALLBACK_MAX: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxGrid {
    pub dim: usize,
    pub half_width: f64,
    /// Effective spacing `2R / cells`.
    pub spacing: f64,
    pub cells: usize,
    pub boundary: Boundary,
}

impl BoxGrid {
    /// The requested spacing is rounded down so that `2R/h` is an integer.
    pub fn new(dim: usize, half_width: f64, spacing: f64, boundary: Boundary) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidParameter(format!("counting supports d ∈ {{1,2}}, got {dim}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) || !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "box needs R > 0 and h > 0, got R = {half_width}, h = {spacing}"
            )));
        }
        let cells = (2.0 * half_width / spacing - 1e-9).ceil().max(2.0);
        if cells > 1e12 {
            return Err(Error::Resource(format!("{cells} cells requested")));
        }
        let cells = cells as usize;
        Ok(Self {
            dim,
            half_width,
            spacing: 2.0 * half_width / cells as f64,
            cells,
            boundary,
        })
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self { boundary, ..*self }
    }

    /// Unknowns per axis: interior nodes (Dirichlet) or all nodes (Neumann).
    pub fn nodes_per_axis(&self) -> usize {
        match self.boundary {
            Boundary::Dirichlet => self.cells - 1,
            Boundary::Neumann => self.cells + 1,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.nodes_per_axis().pow(self.dim as u32)
    }

    /// Total node count of the closed box (both conditions share it).
    pub fn total_nodes(&self) -> usize {
        (self.cells + 1).pow(self.dim as u32)
    }

    /// `h ≤ 2π / (10 · max|ξ|)`.
    pub fn check_resolution(&self, max_frequency: f64) -> Result<()> {
        if max_frequency > 0.0 {
            let limit = 2.0 * std::f64::consts::PI / (10.0 * max_frequency);
            if self.spacing > limit * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "spacing {} does not resolve frequency {max_frequency} (need h ≤ {limit})",
                    self.spacing
                )));
            }
        }
        Ok(())
    }

    pub fn check_caps(&self, caps: &PointCaps) -> Result<()> {
        let cap = if self.dim == 1 { caps.max_points_1d } else { caps.max_points_2d };
        let pts = (self.cells as f64 + 1.0).powi(self.dim as i32);
        if pts > cap as f64 {
            return Err(Error::Resource(format!(
                "grid with {pts:.3e} points exceeds the cap of {cap} for d = {}",
                self.dim
            )));
        }
        Ok(())
    }

    fn node(&self, full_index: usize) -> f64 {
        -self.half_width + full_index as f64 * self.spacing
    }
}

/// `K + M V` on a box grid; immutable after assembly.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub grid: BoxGrid,
    /// `V` at every node of the closed box (row-major in `d = 2`), shared
    /// between the two boundary conditions.
    samples: Arc<Vec<f64>>,
}

impl DiscreteHamiltonian {
    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self {
            grid: self.grid.with_boundary(boundary),
            samples: Arc::clone(&self.samples),
        }
    }

    fn offset(&self) -> usize {
        match self.grid.boundary {
            Boundary::Dirichlet => 1,
            Boundary::Neumann => 0,
        }
    }

    /// One-dimensional trapezoid mass and stiffness diagonal at a full
    /// node index.
    fn axis_weights(&self, full: usize) -> (f64, f64) {
        let ih2 = 1.0 / (self.grid.spacing * self.grid.spacing);
        let edge = full == 0 || full == self.grid.cells;
        match (self.grid.boundary, edge) {
            (Boundary::Neumann, true) => (0.5, ih2),
            _ => (1.0, 2.0 * ih2),
        }
    }

    pub fn unknowns(&self) -> usize {
        self.grid.unknowns()
    }

    /// Lumped mass diagonal `M`.
    pub fn mass_diagonal(&self) -> Vec<f64> {
        let n = self.grid.nodes_per_axis();
        let off = self.offset();
        match self.grid.dim {
            1 => (0..n).map(|i| self.axis_weights(i + off).0).collect(),
            _ => (0..n * n)
                .map(|p| self.axis_weights(p / n + off).0 * self.axis_weights(p % n + off).0)
                .collect(),
        }
    }

    /// Dense `K + M(V − E)`, for tests and small problems.
    pub fn to_dense(&self, energy: f64) -> DMatrix<f64> {
        let n = self.unknowns();
        let mut a = DMatrix::zeros(n, n);
        match self.grid.dim {
            1 => {
                for i in 0..n {
                    a[(i, i)] = self.diag_1d(i, energy);
                    if i + 1 < n {
                        a[(i, i + 1)] = self.off_1d();
                        a[(i + 1, i)] = self.off_1d();
                    }
                }
            }
            _ => {
                let band = self.band_2d(energy);
                for i in 0..n {
                    for j in i.saturating_sub(band.bandwidth)..=i {
                        a[(i, j)] = band.get(i, j);
                        a[(j, i)] = band.get(i, j);
                    }
                }
            }
        }
        a
    }

    #[inline]
    fn diag_1d(&self, i: usize, energy: f64) -> f64 {
        let full = i + self.offset();
        let (m, k) = self.axis_weights(full);
        k + m * (self.samples[full] - energy)
    }

    #[inline]
    fn off_1d(&self) -> f64 {
        -1.0 / (self.grid.spacing * self.grid.spacing)
    }

    fn band_2d(&self, energy: f64) -> BandMatrix {
        let n = self.grid.nodes_per_axis();
        let off = self.offset();
        let full_n = self.grid.cells + 1;
        let ih2 = 1.0 / (self.grid.spacing * self.grid.spacing);
        let mut b = BandMatrix::zeros(n * n, n);
        for r in 0..n {
            let (mr, kr) = self.axis_weights(r + off);
            for c in 0..n {
                let (mc, kc) = self.axis_weights(c + off);
                let p = r * n + c;
                let v = self.samples[(r + off) * full_n + c + off];
                b.set(p, p, kr * mc + mr * kc + mr * mc * (v - energy));
                if c > 0 {
                    // edge along the row direction, weighted by the row mass
                    b.set(p, p - 1, -mr * ih2);
                }
                if r > 0 {
                    b.set(p, p - n, -mc * ih2);
                }
            }
        }
        b
    }
}

/// Samples `V` on the closed box after checking resolution and caps.
pub fn discretize(v: &dyn Potential, grid: &BoxGrid, caps: &PointCaps) -> Result<DiscreteHamiltonian> {
    if v.dim() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: v.dim(),
        });
    }
    grid.check_resolution(v.max_frequency())?;
    grid.check_caps(caps)?;
    let full_n = grid.cells + 1;
    let samples: Vec<f64> = match grid.dim {
        1 => (0..full_n).map(|i| v.eval(&[grid.node(i)])).collect(),
        _ => (0..full_n * full_n)
            .map(|p| v.eval(&[grid.node(p / full_n), grid.node(p % full_n)]))
            .collect(),
    };
    Ok(DiscreteHamiltonian {
        grid: *grid,
        samples: Arc::new(samples),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Sturm,
    BandedLdl,
    DenseBunchKaufman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountOutcome {
    pub count: usize,
    /// Downward shift applied to `E` after a zero pivot (0 if none).
    pub perturbation: f64,
    pub method: CountMethod,
}

/// Number of eigenvalues of the discrete operator strictly below `E`.
///
/// A pivot within the relative breakdown threshold means `E` (nearly)
/// coincides with an eigenvalue; `E` is then lowered by
/// `10⁻¹²·max(|E|, h²)` (growing tenfold per retry) and the shift reported.
pub fn count_below(h: &DiscreteHamiltonian, energy: f64) -> Result<CountOutcome> {
    let n = h.unknowns();
    if n == 0 {
        return Ok(CountOutcome {
            count: 0,
            perturbation: 0.0,
            method: CountMethod::Sturm,
        });
    }
    let base = 1e-12 * energy.abs().max(h.grid.spacing * h.grid.spacing);
    let mut shift = 0.0;
    for attempt in 0..8 {
        let e = energy - shift;
        let result = match h.grid.dim {
            1 => {
                let off = h.off_1d();
                sturm_negative_count(n, |i| h.diag_1d(i, e), |_| off).map(|c| (c, CountMethod::Sturm))
            }
            _ => match band_ldl_negative_count(h.band_2d(e)) {
                Ok(c) => Ok((c, CountMethod::BandedLdl)),
                Err(b) if n <= DENSE_FALLBACK_MAX => {
                    let inertia = bunch_kaufman_inertia(&h.to_dense(e));
                    if inertia.zero == 0 {
                        Ok((inertia.negative, CountMethod::DenseBunchKaufman))
                    } else {
                        Err(b)
                    }
                }
                Err(b) => Err(b),
            },
        };
        match result {
            Ok((count, method)) => {
                return Ok(CountOutcome {
                    count,
                    perturbation: shift,
                    method,
                })
            }
            Err(_) => {
                shift = base * 10f64.powi(attempt);
            }
        }
    }
    Err(Error::Resource(format!(
        "factorization broke down at E = {energy} despite shifts up to {shift:e}"
    )))
}

/// `(Dirichlet, Neumann)` counts on the box `[−R, R]^d` with spacing `h`.
pub fn count_with_bracket(v: &dyn Potential, energy: f64, half_width: f64, spacing: f64) -> Result<(usize, usize)> {
    let grid = BoxGrid::new(v.dim(), half_width, spacing, Boundary::Neumann)?;
    let neumann = discretize(v, &grid, &PointCaps::default())?;
    let dirichlet = neumann.with_boundary(Boundary::Dirichlet);
    Ok((count_below(&dirichlet, energy)?.count, count_below(&neumann, energy)?.count))
}

/// How the initial box half-width is chosen for an energy `E < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoxScale {
    /// Use this `R₀` regardless of `E`.
    Fixed(f64),
    /// Classical turning point of `−c(1+r)^{-ρ}` at `E`: `r_t = (c/|E|)^{1/ρ}`.
    TurningPoint { c: f64, rho: f64 },
    /// The sublevel set lies within this radius for every `E < 0`.
    Radius(f64),
    /// Derive from the potential's declared envelope.
    FromEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPolicy {
    pub scale: BoxScale,
    /// `R₀ = box_factor · max(r_t, |E|^{-1/2}, 2π)` for the non-fixed scales.
    pub box_factor: f64,
    pub h0: f64,
    pub max_stages: usize,
    pub caps: PointCaps,
    /// Per-energy wall-clock budget.
    pub max_seconds: Option<f64>,
}

impl Default for ScanPolicy {
    fn default() -> Self {
        Self {
            scale: BoxScale::FromEnvelope,
            box_factor: 4.0,
            h0: 0.2,
            max_stages: 7,
            caps: PointCaps::default(),
            max_seconds: None,
        }
    }
}

impl ScanPolicy {
    pub fn with_scale(mut self, scale: BoxScale) -> Self {
        self.scale = scale;
        self
    }

    /// Initial half-width for energy `E`.
    pub fn initial_half_width(&self, v: &dyn Potential, energy: f64) -> Result<f64> {
        let floor = |r_t: f64| self.box_factor * r_t.max(energy.abs().powf(-0.5)).max(2.0 * std::f64::consts::PI);
        let r_t = match self.scale {
            BoxScale::Fixed(r) => return Ok(r),
            BoxScale::TurningPoint { c, rho } => (c / energy.abs()).powf(1.0 / rho),
            BoxScale::Radius(r) => r,
            BoxScale::FromEnvelope => match v.envelope() {
                Envelope::Unknown => {
                    return Err(Error::InvalidParameter(
                        "potential has no envelope; give the box scale explicitly".into(),
                    ))
                }
                env => env.sublevel_radius(energy).unwrap_or(0.0),
            },
        };
        if energy >= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "box sizing needs E < 0, got {energy}"
            )));
        }
        Ok(floor(r_t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stage {
    pub half_width: f64,
    pub spacing: f64,
    pub dirichlet: usize,
    pub neumann: usize,
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub energy: f64,
    /// Stabilized count (Dirichlet value at the final stage).
    pub count: usize,
    pub dirichlet: usize,
    pub neumann: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub converged: bool,
    pub perturbed: bool,
    pub history: Vec<Stage>,
    /// Why the scan stopped early, if it did.
    pub note: Option<String>,
}

impl CountResult {
    pub fn bracket_gap(&self) -> usize {
        self.neumann.saturating_sub(self.dirichlet)
    }
}

/// `(R_k, h_k)`: alternate box doubling and mesh halving, starting with
/// the box.
pub fn stage_schedule(r0: f64, h0: f64, stages: usize) -> Vec<(f64, f64)> {
    let (mut r, mut h) = (r0, h0);
    let mut out = vec![(r, h)];
    for k in 1..stages {
        if k % 2 == 1 {
            r *= 2.0;
        } else {
            h *= 0.5;
        }
        out.push((r, h));
    }
    out
}

/// Runs stages until the last three agree in both the Dirichlet and the
/// Neumann count — which covers one box doubling and one mesh halving —
/// or a resource cap is hit (then `converged = false`).
pub fn convergence_scan(v: &dyn Potential, energy: f64, policy: &ScanPolicy) -> Result<CountResult> {
    let r0 = policy.initial_half_width(v, energy)?;
    let h0 = policy.h0;
    scan_schedule(v, energy, &stage_schedule(r0, h0, policy.max_stages.max(3)), policy)
}

/// Same as [`convergence_scan`] with an explicit `(R, h)` schedule.
pub fn scan_schedule(v: &dyn Potential, energy: f64, schedule: &[(f64, f64)], policy: &ScanPolicy) -> Result<CountResult> {
    if schedule.len() < 3 {
        return Err(Error::InvalidParameter("a convergence scan needs at least 3 stages".into()));
    }
    let start = Instant::now();
    let mut history: Vec<Stage> = Vec::new();
    let mut note = None;
    let mut converged = false;
    for &(r, h) in schedule {
        if let Some(limit) = policy.max_seconds {
            if !history.is_empty() && start.elapsed().as_secs_f64() > limit {
                note = Some(format!("time budget of {limit} s exhausted"));
                break;
            }
        }
        let grid = BoxGrid::new(v.dim(), r, h, Boundary::Neumann)?;
        if let Err(e) = grid.check_caps(&policy.caps) {
            if history.is_empty() {
                return Err(e);
            }
            note = Some(e.to_string());
            break;
        }
        let neumann = discretize(v, &grid, &policy.caps)?;
        let dirichlet = neumann.with_boundary(Boundary::Dirichlet);
        let d = count_below(&dirichlet, energy)?;
        let n = count_below(&neumann, energy)?;
        history.push(Stage {
            half_width: r,
            spacing: grid.spacing,
            dirichlet: d.count,
            neumann: n.count,
            perturbation: d.perturbation.max(n.perturbation),
        });
        let k = history.len();
        if k >= 3 {
            let tail = &history[k - 3..];
            if tail.iter().all(|s| s.dirichlet == tail[0].dirichlet && s.neumann == tail[0].neumann) {
                converged = true;
                break;
            }
        }
    }
    let last = *history.last().expect("at least one stage");
    Ok(CountResult {
        energy,
        count: last.dirichlet,
        dirichlet: last.dirichlet,
        neumann: last.neumann,
        half_width: last.half_width,
        spacing: last.spacing,
        converged,
        perturbed: history.iter().any(|s| s.perturbation > 0.0),
        history,
        note: if converged { None } else { note.or(Some("stages exhausted".into())) },
    })
}

/// Convergence scans over an energy grid (in parallel; results in input
/// order).
pub fn n_curve(v: &dyn Potential, energies: &[f64], policy: &ScanPolicy) -> Result<Vec<CountResult>> {
    energies
        .par_iter()
        .map(|&e| convergence_scan(v, e, policy))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub epsilon: f64,
    pub energies: Vec<f64>,
    /// `N(E; (1+ε)^{-1} V_eff)`
    pub lower: Vec<usize>,
    /// `N(E; ηW)`
    pub middle: Vec<usize>,
    /// `N(E; (1−ε)^{-1} V_eff)`
    pub upper: Vec<usize>,
    /// Smallest `c ≥ 0` with `lower − c ≤ middle ≤ upper + c` at each `E`.
    pub offsets: Vec<f64>,
    pub max_offset: f64,
    /// Mean offset over the smallest-|E| third minus the largest-|E| third.
    pub trend: f64,
    pub bounded: bool,
    pub inconclusive: bool,
}

/// Largest allowed upward drift of the offsets across the grid.
pub const OFFSET_TREND_LIMIT: f64 = 1.0;

/// Counts `ηW` between the gauge-transformed potentials
/// `(1 ± ε)^{-1} V_eff` and checks that the needed offset stays bounded.
pub fn sandwich_check(gauge: &GaugeData, energies: &[f64], epsilon: f64, policy: &ScanPolicy) -> Result<SandwichReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let middle_v = EtaW::new(gauge.eta.clone(), gauge.w.clone());
    let lower_v = gauge.effective(1.0 / (1.0 + epsilon));
    let upper_v = gauge.effective(1.0 / (1.0 - epsilon));
    let lower = n_curve(&lower_v, energies, policy)?;
    let middle = n_curve(&middle_v, energies, policy)?;
    let upper = n_curve(&upper_v, energies, policy)?;
    let inconclusive = lower.iter().chain(&middle).chain(&upper).any(|r| !r.converged);
    let counts = |c: &[CountResult]| c.iter().map(|r| r.count).collect::<Vec<_>>();
    let (lo, mi, up) = (counts(&lower), counts(&middle), counts(&upper));
    let offsets: Vec<f64> = (0..energies.len())
        .map(|k| {
            let a = lo[k] as f64 - mi[k] as f64;
            let b = mi[k] as f64 - up[k] as f64;
            a.max(b).max(0.0)
        })
        .collect();
    let trend = offset_trend(energies, &offsets);
    Ok(SandwichReport {
        epsilon,
        energies: energies.to_vec(),
        lower: lo,
        middle: mi,
        upper: up,
        max_offset: offsets.iter().copied().fold(0.0, f64::max),
        offsets,
        trend,
        bounded: trend <= OFFSET_TREND_LIMIT,
        inconclusive,
    })
}

fn offset_trend(energies: &[f64], offsets: &[f64]) -> f64 {
    let n = energies.len();
    if n < 3 {
        return 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| energies[a].abs().total_cmp(&energies[b].abs()));
    let third = n / 3;
    let mean = |s: &[usize]| s.iter().map(|&k| offsets[k]).sum::<f64>() / s.len() as f64;
    mean(&idx[..third]) - mean(&idx[n - third..])
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityReport {
    pub trials: usize,
    pub violations: Vec<(usize, usize, usize, usize)>,
    pub pass: bool,
}

/// Number of strictly negative eigenvalues.
pub fn negative_count(a: &DMatrix<f64>) -> usize {
    dense_count_below(a, 0.0)
}

/// `ν(A + B) ≤ ν(A) + ν(B)` on seeded random symmetric pairs of size
/// `2..=max_size`.
pub fn subadditivity_check(trials: usize, max_size: usize, seed: u64) -> SubadditivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for t in 0..trials {
        let n = rng.gen_range(2..=max_size.max(2));
        let sym = |rng: &mut ChaCha8Rng| {
            let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            (&m + m.transpose()) * 0.5 + DMatrix::identity(n, n) * rng.gen_range(-1.0..1.0)
        };
        let a = sym(&mut rng);
        let b = sym(&mut rng);
        let (na, nb, nab) = (negative_count(&a), negative_count(&b), negative_count(&(&a + &b)));
        if nab > na + nb {
            violations.push((t, na, nb, nab));
        }
    }
    SubadditivityReport {
        trials,
        pass: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{AdmissibleEta, DecayingW, ScaledW, SquareWell, TrigBackground, ZeroPotential};
    use num_complex::Complex64;

    fn eig_count(a: &DMatrix<f64>, mass: &[f64], e: f64) -> usize {
        // M^{-1/2} A M^{-1/2} has the generalized eigenvalues of (A, M)
        let n = a.nrows();
        let s = DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (mass[i] * mass[j]).sqrt());
        s.symmetric_eigenvalues().iter().filter(|&&l| l < e).count()
    }

    #[test]
    fn one_dimensional_stencils() {
        let z = ZeroPotential { dim: 1 };
        let grid = BoxGrid::new(1, 1.0, 0.5, Boundary::Dirichlet).unwrap();
        let h = discretize(&z, &grid, &PointCaps::default()).unwrap();
        let a = h.to_dense(0.0);
        let expected = DMatrix::from_row_slice(3, 3, &[8.0, -4.0, 0.0, -4.0, 8.0, -4.0, 0.0, -4.0, 8.0]);
        assert_eq!(a, expected);
        let n = h.with_boundary(Boundary::Neumann);
        let a = n.to_dense(0.0);
        assert_eq!(a.nrows(), 5);
        assert_eq!((a[(0, 0)], a[(4, 4)], a[(2, 2)], a[(0, 1)]), (4.0, 4.0, 8.0, -4.0));
        assert_eq!(n.mass_diagonal(), vec![0.5, 1.0, 1.0, 1.0, 0.5]);
    }

    #[test]
    fn two_dimensional_stencil() {
        let z = ZeroPotential { dim: 2 };
        let grid = BoxGrid::new(2, 1.0, 0.5, Boundary::Dirichlet).unwrap();
        let a = discretize(&z, &grid, &PointCaps::default()).unwrap().to_dense(0.0);
        assert_eq!(a.nrows(), 9);
        for i in 0..9 {
            assert_eq!(a[(i, i)], 16.0);
            let row_sum: f64 = (0..9).map(|j| a[(i, j)]).sum();
            let neighbours = [(i % 3 > 0), (i % 3 < 2), (i / 3 > 0), (i / 3 < 2)].iter().filter(|&&b| b).count();
            assert_eq!(row_sum, 16.0 - 4.0 * neighbours as f64);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(BoxGrid::new(3, 1.0, 0.1, Boundary::Dirichlet).is_err());
        assert!(BoxGrid::new(1, 0.0, 0.1, Boundary::Dirichlet).is_err());
        let g = BoxGrid::new(1, 10.0, 0.7, Boundary::Dirichlet).unwrap();
        assert!(g.check_resolution(1.0).is_err());
        assert!(BoxGrid::new(1, 10.0, 0.6, Boundary::Dirichlet).unwrap().check_resolution(1.0).is_ok());
        let caps = PointCaps { max_points_1d: 1000, max_points_2d: 100 };
        assert!(matches!(
            BoxGrid::new(1, 1000.0, 0.1, Boundary::Dirichlet).unwrap().check_caps(&caps),
            Err(Error::Resource(_))
        ));
        assert!(BoxGrid::new(2, 10.0, 1.0, Boundary::Dirichlet).unwrap().check_caps(&caps).is_err());
    }

    #[test]
    fn counts_match_generalized_eigenvalues() {
        let v = crate::potentials::FnPotential::new(1, |x| -3.0 * (-x[0] * x[0]).exp() + 0.5 * (3.0 * x[0]).sin());
        let v2 = crate::potentials::FnPotential::new(2, |x| -6.0 * (-(x[0] * x[0] + 0.5 * x[1] * x[1])).exp());
        for bc in [Boundary::Dirichlet, Boundary::Neumann] {
            let h = discretize(&v, &BoxGrid::new(1, 6.0, 0.1, bc).unwrap(), &PointCaps::default()).unwrap();
            let h2 = discretize(&v2, &BoxGrid::new(2, 3.0, 0.25, bc).unwrap(), &PointCaps::default()).unwrap();
            for e in [-2.0, -0.7, -0.1, 0.3] {
                assert_eq!(count_below(&h, e).unwrap().count, eig_count(&h.to_dense(0.0), &h.mass_diagonal(), e));
                assert_eq!(count_below(&h2, e).unwrap().count, eig_count(&h2.to_dense(0.0), &h2.mass_diagonal(), e));
            }
        }
    }

    #[test]
    fn free_laplacian_has_no_negative_states() {
        for dim in [1, 2] {
            let z = ZeroPotential { dim };
            for bc in [Boundary::Dirichlet, Boundary::Neumann] {
                let h = discretize(&z, &BoxGrid::new(dim, 5.0, 0.5, bc).unwrap(), &PointCaps::default()).unwrap();
                assert_eq!(count_below(&h, -0.1).unwrap().count, 0);
            }
        }
    }

    #[test]
    fn tie_rule_perturbs_energy() {
        // Neumann constant mode sits exactly at 0
        let z = ZeroPotential { dim: 1 };
        let h = discretize(&z, &BoxGrid::new(1, 2.0, 0.5, Boundary::Neumann).unwrap(), &PointCaps::default()).unwrap();
        let out = count_below(&h, 0.0).unwrap();
        assert_eq!(out.count, 0);
        assert!(out.perturbation > 0.0);
    }

    /// Bound states of the 1-D well of depth `v0` and half-width `a`:
    /// even `z tan z = √(z₀² − z²)`, odd `−z cot z = √(z₀² − z²)`.
    fn well_states(v0: f64, a: f64) -> usize {
        let z0 = a * v0.sqrt();
        let n = 200_000;
        let mut count = 0;
        for (f, _name) in [
            (Box::new(|z: f64| z * z.sin() - (z0 * z0 - z * z).sqrt() * z.cos()) as Box<dyn Fn(f64) -> f64>, "even"),
            (Box::new(|z: f64| -z * z.cos() - (z0 * z0 - z * z).sqrt() * z.sin()), "odd"),
        ] {
            let mut prev = f(1e-9);
            for k in 1..=n {
                let z = z0 * k as f64 / n as f64;
                let cur = f(z);
                if cur.signum() != prev.signum() {
                    count += 1;
                }
                prev = cur;
            }
        }
        count
    }

    #[test]
    fn square_well_bound_states() {
        assert_eq!(well_states(4.0, 1.0), 2);
        let well = SquareWell { dim: 1, depth: 4.0, half_width: 1.0 };
        let grid = BoxGrid::new(1, 20.0, 1e-3, Boundary::Dirichlet).unwrap();
        let h = discretize(&well, &grid, &PointCaps::default()).unwrap();
        assert_eq!(count_below(&h, -1e-6).unwrap().count, 2);
        let (d, n) = count_with_bracket(&well, -1e-6, 20.0, 1e-3).unwrap();
        assert_eq!((d, n), (2, 2));
        // deeper well: z₀ = 3√2 ≈ 4.24 gives 3 states
        assert_eq!(well_states(18.0, 1.0), 3);
        assert_eq!(count_with_bracket(&SquareWell { depth: 18.0, ..well }, -1e-6, 20.0, 1e-3).unwrap(), (3, 3));
    }

    #[test]
    fn bracket_gap_flags_small_boxes() {
        let w = ScaledW::new(DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap(), 1.0);
        let (d, n) = count_with_bracket(&w, -1e-3, 50.0, 0.2).unwrap();
        assert!(n > d, "{d} {n}");
        assert_eq!(count_with_bracket(&ZeroPotential { dim: 1 }, -0.1, 50.0, 0.2).unwrap(), (0, 0));
    }

    #[test]
    fn orderings_hold() {
        let eta = AdmissibleEta::new(0.5, TrigBackground::cosine_pair(vec![1.0], Complex64::new(1.0, 0.0)).unwrap());
        let v = EtaW::new(eta, DecayingW::power(1, -2.0, 0.8).unwrap());
        let mut prev_d = 0;
        for r in [10.0, 20.0, 40.0, 80.0] {
            let grid = BoxGrid::new(1, r, 0.1, Boundary::Neumann).unwrap();
            let hn = discretize(&v, &grid, &PointCaps::default()).unwrap();
            let hd = hn.with_boundary(Boundary::Dirichlet);
            let mut prev = 0;
            for e in [-1.0, -0.3, -0.1, -0.03, -0.01] {
                let d = count_below(&hd, e).unwrap().count;
                let n = count_below(&hn, e).unwrap().count;
                assert!(d <= n);
                assert!(d >= prev);
                prev = d;
            }
            let d = count_below(&hd, -0.01).unwrap().count;
            assert!(d >= prev_d, "Dirichlet count decreased when the box grew");
            prev_d = d;
        }
        // deeper potential counts more
        let deeper = ScaledW::new(DecayingW::power(1, -1.0, 0.8).unwrap(), 2.0);
        let shallow = ScaledW::new(DecayingW::power(1, -1.0, 0.8).unwrap(), 1.0);
        let g = BoxGrid::new(1, 100.0, 0.1, Boundary::Dirichlet).unwrap();
        let a = count_below(&discretize(&deeper, &g, &PointCaps::default()).unwrap(), -0.01).unwrap().count;
        let b = count_below(&discretize(&shallow, &g, &PointCaps::default()).unwrap(), -0.01).unwrap().count;
        assert!(a >= b);
    }

    #[test]
    fn scans_converge() {
        let well = SquareWell { dim: 1, depth: 4.0, half_width: 1.0 };
        let policy = ScanPolicy { h0: 0.01, ..Default::default() };
        let r = convergence_scan(&well, -1e-2, &policy).unwrap();
        assert!(r.converged);
        assert_eq!(r.count, 2);
        assert_eq!(r.history.len(), 3);

        let z = ZeroPotential { dim: 1 };
        let r = convergence_scan(&z, -1e-3, &ScanPolicy::default()).unwrap();
        assert!(r.converged && r.history.iter().all(|s| s.dirichlet == 0 && s.neumann == 0));

        let w = ScaledW::new(DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap(), 1.0);
        let r = convergence_scan(&w, -1e-3, &ScanPolicy::default()).unwrap();
        assert!(r.converged, "{:?}", r.history);
        assert_eq!(r.dirichlet, r.neumann);
    }

    #[test]
    fn scan_reports_resource_caps() {
        let w = ScaledW::new(DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap(), 1.0);
        let policy = ScanPolicy {
            caps: PointCaps { max_points_1d: 3_000_000, max_points_2d: 1 },
            ..Default::default()
        };
        let r = convergence_scan(&w, -1e-3, &policy).unwrap();
        assert!(!r.converged);
        assert!(r.note.is_some());
    }

    #[test]
    fn stage_schedule_alternates() {
        let s = stage_schedule(10.0, 0.2, 5);
        assert_eq!(s, vec![(10.0, 0.2), (20.0, 0.2), (20.0, 0.1), (40.0, 0.1), (40.0, 0.05)]);
    }

    #[test]
    fn n_curve_is_monotone() {
        let w = ScaledW::new(DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap(), 1.0);
        let grid = crate::semiclassical::log_energy_grid(-1.0, -2.5, 6);
        let curve = n_curve(&w, &grid, &ScanPolicy::default()).unwrap();
        assert!(curve.windows(2).all(|p| p[1].count >= p[0].count));
        let zero = n_curve(&ZeroPotential { dim: 1 }, &grid, &ScanPolicy::default()).unwrap();
        assert!(zero.iter().all(|r| r.count == 0));
    }

    #[test]
    fn sandwich_trivial_cases() {
        let grid = crate::semiclassical::log_energy_grid(-1.0, -2.0, 4);
        let policy = ScanPolicy::default().with_scale(BoxScale::Radius(10.0));
        let eta = AdmissibleEta::new(0.0, TrigBackground::cosine_pair(vec![1.0], Complex64::new(1.0, 0.0)).unwrap());
        let g = GaugeData::new(eta, DecayingW::power(1, 0.0, 1.0).unwrap(), 0.1).unwrap();
        let rep = sandwich_check(&g, &grid, 0.1, &policy).unwrap();
        assert!(rep.lower.iter().chain(&rep.middle).chain(&rep.upper).all(|&c| c == 0));
        assert!(rep.bounded && !rep.inconclusive);

        // η ≈ 1: V_eff ≈ W, all three curves agree
        let eta = AdmissibleEta::new(1.0, TrigBackground::cosine_pair(vec![1.0], Complex64::new(1e-9, 0.0)).unwrap());
        let g = GaugeData::new(eta, DecayingW::compact_bump(1, -5.0, 4.0).unwrap(), 0.1).unwrap();
        let rep = sandwich_check(&g, &grid, 0.01, &policy).unwrap();
        assert_eq!(rep.middle, rep.lower);
        assert_eq!(rep.middle, rep.upper);
        assert_eq!(rep.max_offset, 0.0);
    }

    #[test]
    fn subadditivity_examples() {
        let i = DMatrix::<f64>::identity(2, 2);
        assert_eq!(negative_count(&(&i + &i)), 0);
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!((negative_count(&a), negative_count(&b), negative_count(&(&a + &b))), (1, 1, 0));
        assert!(subadditivity_check(30, 40, 7).pass);
    }
}
