//! Spectra of `−Δ_{S^{d−1}} + L` and the log-law constant
//! `C_d(L) = (2π)^{-1} Σ_j (λ_j + (d−2)²/4)_-^{1/2}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{AngularLimit, AngularProfile};

pub const MIN_CIRCLE_CUTOFF: usize = 64;
pub const DOUBLING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereSpectrum {
    pub dim: usize,
    /// Nondecreasing, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Lower bound for every eigenvalue not in `eigenvalues`
    /// (`+∞` when the list is complete).
    pub tail_bound: f64,
}

impl SphereSpectrum {
    /// `(d−2)²/4`.
    pub fn shift(&self) -> f64 {
        let k = self.dim as f64 - 2.0;
        k * k / 4.0
    }

    /// Every omitted eigenvalue satisfies `λ + (d−2)²/4 > 0`.
    pub fn tail_certified(&self) -> bool {
        self.tail_bound + self.shift() > 0.0
    }

    /// Index of the first listed eigenvalue with `λ_j + (d−2)²/4 > 0`.
    pub fn truncation_index(&self) -> Option<usize> {
        let s = self.shift();
        self.eigenvalues.iter().position(|&l| l + s > 0.0)
    }

    pub fn lowest(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

pub fn sphere_eigs_d1(l_minus: f64, l_plus: f64) -> SphereSpectrum {
    SphereSpectrum {
        dim: 1,
        eigenvalues: vec![l_minus.min(l_plus), l_minus.max(l_plus)],
        tail_bound: f64::INFINITY,
    }
}

fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < k || n < 0 {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Dimension of the degree-`l` spherical harmonics on `S^{d−1}`.
pub fn harmonic_multiplicity(d: usize, l: usize) -> u64 {
    let (d, l) = (d as i64, l as i64);
    binomial(l + d - 1, d - 1) - binomial(l + d - 3, d - 1)
}

/// First `count` eigenvalues `l(l+d−2) + c` (with multiplicity).
pub fn sphere_eigs_constant(d: usize, c: f64, count: usize) -> Result<SphereSpectrum> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "constant sphere spectra need d ≥ 2, got {d}"
        )));
    }
    let level = |l: usize| (l * (l + d - 2)) as f64 + c;
    let mut eigenvalues = Vec::with_capacity(count);
    let mut l = 0;
    while eigenvalues.len() < count {
        let m = harmonic_multiplicity(d, l) as usize;
        let take = m.min(count - eigenvalues.len());
        eigenvalues.extend(std::iter::repeat(level(l)).take(take));
        if take < m {
            // level only partly listed; remaining copies bound the tail
            return Ok(SphereSpectrum {
                dim: d,
                eigenvalues,
                tail_bound: level(l),
            });
        }
        l += 1;
    }
    Ok(SphereSpectrum {
        dim: d,
        eigenvalues,
        tail_bound: level(l),
    })
}

/// Complete list of the constant-`L` eigenvalues with `λ + (d−2)²/4 ≤ 0`,
/// plus the first positive level, so the tail is certified analytically.
pub fn sphere_eigs_constant_certified(d: usize, c: f64) -> Result<SphereSpectrum> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "constant sphere spectra need d ≥ 2, got {d}"
        )));
    }
    let shift = (d as f64 - 2.0).powi(2) / 4.0;
    let mut count = 0usize;
    let mut l = 0usize;
    loop {
        count += harmonic_multiplicity(d, l) as usize;
        if (l * (l + d - 2)) as f64 + c + shift > 0.0 {
            break;
        }
        l += 1;
    }
    sphere_eigs_constant(d, c, count)
}

fn circle_galerkin(l: &dyn Fn(f64) -> f64, m: usize) -> (Vec<f64>, f64) {
    let size = 2 * m + 1;
    // DFT with enough samples to resolve L̂_k for |k| ≤ 2M without aliasing
    // onto trigonometric polynomials of degree below 2M
    let n = 8 * m + 8;
    let samples: Vec<f64> = (0..n)
        .map(|j| l(2.0 * std::f64::consts::PI * j as f64 / n as f64))
        .collect();
    let sup = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let coeff = |k: i64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            acc += v * Complex64::from_polar(1.0, -(k as f64) * theta);
        }
        acc / n as f64
    };
    let lhat: Vec<Complex64> = (-(2 * m as i64)..=2 * m as i64).map(coeff).collect();
    let offset = 2 * m as i64;
    let mut h = DMatrix::<Complex64>::zeros(size, size);
    for a in 0..size {
        for b in 0..size {
            let (ma, mb) = (a as i64 - m as i64, b as i64 - m as i64);
            let mut v = lhat[(ma - mb + offset) as usize];
            if a == b {
                v += Complex64::new((ma * ma) as f64, 0.0);
            }
            h[(a, b)] = v;
        }
    }
    // symmetrize away rounding so the Hermitian solver sees exact symmetry
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    (eig, sup)
}

/// Fourier–Galerkin eigenvalues of `−d²/dθ² + L(θ)` on `[0, 2π)`.
///
/// The matrix `m²δ_{mn} + L̂_{m−n}`, `|m|,|n| ≤ M`, is diagonalized for `M`
/// and `2M`; eigenvalues below `(M/2)²` are retained and must agree to
/// [`DOUBLING_TOLERANCE`].
pub fn sphere_eigs_circle(l: &dyn Fn(f64) -> f64, cutoff: usize) -> Result<SphereSpectrum> {
    if cutoff < MIN_CIRCLE_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "mode cutoff must be at least {MIN_CIRCLE_CUTOFF}, got {cutoff}"
        )));
    }
    let (coarse, sup) = circle_galerkin(l, cutoff);
    let (fine, _) = circle_galerkin(l, 2 * cutoff);
    let window = (cutoff as f64 / 2.0).powi(2);
    let retained: Vec<f64> = coarse.iter().copied().filter(|&v| v < window).collect();
    let change = retained
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if change >= DOUBLING_TOLERANCE {
        return Err(Error::IncreaseCutoff { change });
    }
    // min-max: the k-th eigenvalue is at least (k-th eigenvalue of −d²/dθ²) − sup|L|
    let tail_bound = (window - sup).min(fine.get(retained.len()).copied().unwrap_or(window));
    Ok(SphereSpectrum {
        dim: 2,
        eigenvalues: retained,
        tail_bound,
    })
}

/// `C_d(L)`; ties at the threshold contribute zero.
pub fn cd_constant(spectrum: &SphereSpectrum) -> Result<f64> {
    if !spectrum.tail_certified() {
        return Err(Error::UncertifiedTail(format!(
            "omitted eigenvalues are only bounded below by {}",
            spectrum.tail_bound
        )));
    }
    let s = spectrum.shift();
    Ok(spectrum
        .eigenvalues
        .iter()
        .map(|&l| (-(l + s)).max(0.0).sqrt())
        .sum::<f64>()
        / (2.0 * std::f64::consts::PI))
}

/// `λ₁ + (d−2)²/4 > 0` (strict).
pub fn finiteness_predicate(spectrum: &SphereSpectrum) -> bool {
    match spectrum.lowest() {
        Some(l) => l + spectrum.shift() > 0.0,
        None => spectrum.tail_certified(),
    }
}

/// Spectrum of `−Δ_{S^{d−1}} + L` for an angular limit profile.
pub fn spectrum_of(limit: &AngularLimit) -> Result<SphereSpectrum> {
    match &limit.profile {
        AngularProfile::Endpoints { minus, plus } => Ok(sphere_eigs_d1(*minus, *plus)),
        AngularProfile::Constant(c) if limit.dim == 1 => Ok(sphere_eigs_d1(*c, *c)),
        AngularProfile::Constant(c) => sphere_eigs_constant_certified(limit.dim, *c),
        AngularProfile::Circle(f) => {
            let f = f.clone();
            sphere_eigs_circle(&move |t| f(t), MIN_CIRCLE_CUTOFF)
        }
    }
}

/// `C_d(L)` for an angular limit profile.
pub fn cd_of_limit(limit: &AngularLimit) -> Result<f64> {
    cd_constant(&spectrum_of(limit)?)
}

/// `L(θ) = a₀ + Σ_k (a_k cos kθ + b_k sin kθ)`.
pub fn fourier_profile(a0: f64, terms: Vec<(u32, f64, f64)>) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    move |t| {
        a0 + terms
            .iter()
            .map(|&(k, a, b)| a * (k as f64 * t).cos() + b * (k as f64 * t).sin())
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Periodic second-order finite differences on `n` nodes.
    fn fd_circle(l: &dyn Fn(f64) -> f64, n: usize, count: usize) -> Vec<f64> {
        let h = 2.0 * PI / n as f64;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            a[(j, j)] = 2.0 / (h * h) + l(h * j as f64);
            a[(j, (j + 1) % n)] = -1.0 / (h * h);
            a[(j, (j + n - 1) % n)] = -1.0 / (h * h);
        }
        let mut e: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e.truncate(count);
        e
    }

    /// Richardson-extrapolated finite-difference eigenvalues (O(h⁴)).
    fn fd_oracle(l: &dyn Fn(f64) -> f64, count: usize) -> Vec<f64> {
        let a = fd_circle(l, 300, count);
        let b = fd_circle(l, 600, count);
        a.iter().zip(&b).map(|(x, y)| (4.0 * y - x) / 3.0).collect()
    }

    #[test]
    fn endpoint_spectra() {
        assert_eq!(sphere_eigs_d1(-1.0, -1.0).eigenvalues, vec![-1.0, -1.0]);
        assert_eq!(sphere_eigs_d1(2.0, -3.0).eigenvalues, vec![-3.0, 2.0]);
        assert_eq!(sphere_eigs_d1(0.0, 0.0).eigenvalues, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_spectra() {
        let s = sphere_eigs_constant(2, 0.0, 5).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.0, 4.0, 4.0]);
        let s = sphere_eigs_constant(3, 0.0, 9).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0]);
        let s = sphere_eigs_constant(3, -5.0, 5).unwrap();
        assert_eq!(s.eigenvalues, vec![-5.0, -3.0, -3.0, -3.0, 1.0]);
        // d = 4: (l+1)² harmonics of degree l
        assert_eq!(harmonic_multiplicity(4, 3), 16);
        assert!(sphere_eigs_constant(1, 0.0, 3).is_err());
    }

    #[test]
    fn circle_zero_and_shift_are_exact() {
        let s = sphere_eigs_circle(&|_| 0.0, 64).unwrap();
        let expected: Vec<f64> = std::iter::once(0.0)
            .chain((1..=5).flat_map(|m| [(m * m) as f64; 2]))
            .collect();
        assert_eq!(&s.eigenvalues[..11], &expected[..]);
        let s = sphere_eigs_circle(&|_| -2.5, 64).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&expected) {
            assert!((a - (b - 2.5)).abs() < 1e-12);
        }
        assert!(sphere_eigs_circle(&|_| 0.0, 32).is_err());
    }

    #[test]
    fn mathieu_against_finite_differences() {
        let l = |t: f64| 2.0 * t.cos();
        let s = sphere_eigs_circle(&l, 64).unwrap();
        let oracle = fd_oracle(&l, 8);
        for (a, b) in s.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-4, "{a} {b}");
        }
        // simple ground state
        assert!(s.eigenvalues[1] - s.eigenvalues[0] > 0.0);
    }

    #[test]
    fn galerkin_matches_fd_on_random_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let terms: Vec<(u32, f64, f64)> = (1..=3)
                .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let l = fourier_profile(rng.gen_range(-2.0..2.0), terms);
            let s = sphere_eigs_circle(&l, 64).unwrap();
            let oracle = fd_oracle(&l, 6);
            for (a, b) in s.eigenvalues.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-4, "{a} {b}");
            }
            assert!(s.eigenvalues[1] - s.eigenvalues[0] > 0.0);
        }
    }

    #[test]
    fn rough_profile_fails_doubling() {
        let square = |t: f64| if t.sin() >= 0.0 { -30.0 } else { 30.0 };
        assert!(matches!(
            sphere_eigs_circle(&square, 64),
            Err(Error::IncreaseCutoff { .. })
        ));
    }

    #[test]
    fn cd_examples() {
        let c1 = cd_constant(&sphere_eigs_d1(-1.0, -1.0)).unwrap();
        assert!((c1 - 0.75f64.sqrt() / PI).abs() < 1e-12);
        let c2 = cd_constant(&sphere_eigs_constant_certified(2, -2.0).unwrap()).unwrap();
        assert!((c2 - (2f64.sqrt() + 2.0) / (2.0 * PI)).abs() < 1e-12);
        let c2g = cd_constant(&sphere_eigs_circle(&|_| -2.0, 64).unwrap()).unwrap();
        assert!((c2g - c2).abs() < 1e-10);
        for c in [0.0, 0.5, 3.0] {
            assert_eq!(cd_constant(&sphere_eigs_constant_certified(2, c).unwrap()).unwrap(), 0.0);
        }
        let c8 = cd_constant(&sphere_eigs_d1(-8.0, -8.0)).unwrap();
        assert!((c8 - 7.75f64.sqrt() / PI).abs() < 1e-12);
    }

    #[test]
    fn uncertified_tail_is_rejected() {
        let partial = sphere_eigs_constant(2, -10.0, 3).unwrap();
        assert!(matches!(cd_constant(&partial), Err(Error::UncertifiedTail(_))));
    }

    #[test]
    fn threshold_ties() {
        // d = 1, L = −1/4: the shifted value is exactly 0
        assert_eq!(cd_constant(&sphere_eigs_d1(-0.25, -0.25)).unwrap(), 0.0);
        assert!(!finiteness_predicate(&sphere_eigs_d1(-0.25, -0.25)));
        assert!(finiteness_predicate(&sphere_eigs_constant_certified(3, 0.0).unwrap()));
        assert!(!finiteness_predicate(&sphere_eigs_d1(-1.0, -1.0)));
        assert!(!finiteness_predicate(&sphere_eigs_constant_certified(2, 0.0).unwrap()));
    }

    #[test]
    fn continuity_and_monotonicity() {
        let base = |t: f64| -3.0 + t.cos();
        let c0 = cd_constant(&sphere_eigs_circle(&base, 64).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for delta in [1e-1, 1e-2, 1e-3] {
            let c = cd_constant(&sphere_eigs_circle(&|t| base(t) + delta, 64).unwrap()).unwrap();
            assert!(c < c0, "larger L gives smaller C_d");
            assert!((c - c0).abs() < prev);
            prev = (c - c0).abs();
        }
        assert!(prev < 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (a, b) = (rng.gen_range(-10.0..1.0), rng.gen_range(-10.0..1.0));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            assert!(
                cd_constant(&sphere_eigs_d1(lo, lo)).unwrap() >= cd_constant(&sphere_eigs_d1(hi, lo)).unwrap()
            );
            let d = 3;
            assert!(
                cd_constant(&sphere_eigs_constant_certified(d, lo).unwrap()).unwrap()
                    >= cd_constant(&sphere_eigs_constant_certified(d, hi).unwrap()).unwrap()
            );
        }
    }
}
