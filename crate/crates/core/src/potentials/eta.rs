//! The oscillating factor: a mean value plus a finite trigonometric background.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to match a frequency with its negative and a
/// coefficient with its conjugate.
const MATCH_TOL: f64 = 1e-12;

/// One term `c · exp(i ξ·x)` of a trigonometric sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub frequency: Vec<f64>,
    pub coefficient: Complex64,
}

impl Mode {
    pub fn new(frequency: Vec<f64>, coefficient: Complex64) -> Self {
        Self {
            frequency,
            coefficient,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.frequency.iter().map(|v| v * v).sum()
    }

    fn phase(&self, x: &[f64]) -> f64 {
        self.frequency.iter().zip(x).map(|(f, v)| f * v).sum()
    }
}

/// A real-valued finite trigonometric sum `Σ η_n exp(i ξ_n·x)` with nonzero,
/// pairwise distinct frequencies, closed under `(ξ, c) ↦ (−ξ, conj c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigBackground {
    dim: usize,
    modes: Vec<Mode>,
    added_conjugates: usize,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOL * (1.0 + a.abs().max(b.abs()))
}

fn same_frequency(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| close(*x, *y))
}

fn negated_frequency(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| close(*x, -*y))
}

fn conjugate_coefficients(a: Complex64, b: Complex64) -> bool {
    close(a.re, b.re) && close(a.im, -b.im)
}

impl TrigBackground {
    /// Builds a background from a mode list, adding any missing conjugate
    /// partners. The number of added modes is available through
    /// [`TrigBackground::added_conjugates`] so callers can warn about it.
    pub fn new(dim: usize, modes: Vec<Mode>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for m in &modes {
            if m.frequency.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.frequency.len(),
                });
            }
            if m.frequency.iter().any(|v| !v.is_finite())
                || !m.coefficient.re.is_finite()
                || !m.coefficient.im.is_finite()
            {
                return Err(Error::InvalidBackground("non-finite mode".into()));
            }
            if m.norm_sq() == 0.0 {
                return Err(Error::InvalidBackground(
                    "zero frequency: the constant part belongs to the mean value".into(),
                ));
            }
        }
        for (i, a) in modes.iter().enumerate() {
            for b in &modes[i + 1..] {
                if same_frequency(&a.frequency, &b.frequency) {
                    return Err(Error::InvalidBackground(format!(
                        "duplicate frequency {:?}",
                        a.frequency
                    )));
                }
            }
        }

        let mut out = modes.clone();
        let mut added = 0;
        for m in &modes {
            let partner = modes
                .iter()
                .find(|o| negated_frequency(&o.frequency, &m.frequency));
            match partner {
                Some(p) => {
                    if !conjugate_coefficients(p.coefficient, m.coefficient) {
                        return Err(Error::InvalidBackground(format!(
                            "modes at {:?} and its negative have non-conjugate coefficients",
                            m.frequency
                        )));
                    }
                }
                None => {
                    out.push(Mode::new(
                        m.frequency.iter().map(|v| -v).collect(),
                        m.coefficient.conj(),
                    ));
                    added += 1;
                }
            }
        }
        Ok(Self {
            dim,
            modes: out,
            added_conjugates: added,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            modes: Vec::new(),
            added_conjugates: 0,
        }
    }

    /// `2 Re(c e^{iξ·x})`, i.e. the pair `(ξ, c), (−ξ, conj c)`.
    pub fn cosine_pair(frequency: Vec<f64>, coefficient: Complex64) -> Result<Self> {
        let dim = frequency.len();
        Self::new(dim, vec![Mode::new(frequency, coefficient)])
    }

    /// Sum of several conjugate pairs given by their positive representatives.
    pub fn from_pairs(dim: usize, pairs: &[(Vec<f64>, Complex64)]) -> Result<Self> {
        let modes = pairs
            .iter()
            .map(|(f, c)| Mode::new(f.clone(), *c))
            .collect();
        Self::new(dim, modes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn added_conjugates(&self) -> usize {
        self.added_conjugates
    }

    pub fn eval_complex(&self, x: &[f64]) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.coefficient * Complex64::from_polar(1.0, m.phase(x)))
            .sum()
    }

    /// Real value of the background. The imaginary part cancels pairwise.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_complex(x).re
    }

    /// `Σ |η_n| (1 + |ξ_n|^{-2})`.
    pub fn summability(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.coefficient.norm() * (1.0 + 1.0 / m.norm_sq()))
            .sum()
    }

    /// Upper bound for `sup |η̃|`.
    pub fn sup_bound(&self) -> f64 {
        self.modes.iter().map(|m| m.coefficient.norm()).sum()
    }

    pub fn max_frequency(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| m.norm_sq().sqrt())
            .fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct frequencies; `None` with fewer
    /// than two modes. Small values signal near-resonances in `|∇φ|²`.
    pub fn min_frequency_gap(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, a) in self.modes.iter().enumerate() {
            for b in &self.modes[i + 1..] {
                let d = a
                    .frequency
                    .iter()
                    .zip(&b.frequency)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                best = Some(best.map_or(d, |v: f64| v.min(d)));
            }
        }
        best
    }
}

/// `η = η₀ + η̃`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleEta {
    pub mean: f64,
    pub background: TrigBackground,
}

impl AdmissibleEta {
    pub fn new(mean: f64, background: TrigBackground) -> Self {
        Self { mean, background }
    }

    pub fn constant(dim: usize, mean: f64) -> Self {
        Self::new(mean, TrigBackground::empty(dim))
    }

    pub fn dim(&self) -> usize {
        self.background.dim()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.mean + self.background.eval(x)
    }

    pub fn sup_bound(&self) -> f64 {
        self.mean.abs() + self.background.sup_bound()
    }

    pub fn max_frequency(&self) -> f64 {
        self.background.max_frequency()
    }
}

/// Average of `f` over the cube `(−side/2, side/2)^d` by the midpoint rule
/// with `per_axis` nodes per axis (d ≤ 3). Midpoint sums are exact for
/// trigonometric polynomials over whole periods.
pub fn box_average(dim: usize, side: f64, per_axis: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    assert!((1..=3).contains(&dim), "box_average supports d ≤ 3");
    let h = side / per_axis as f64;
    let node = |i: usize| -side / 2.0 + (i as f64 + 0.5) * h;
    let mut sum = 0.0;
    let mut x = vec![0.0; dim];
    let total = per_axis.pow(dim as u32);
    for flat in 0..total {
        let mut rem = flat;
        for xi in x.iter_mut() {
            *xi = node(rem % per_axis);
            rem /= per_axis;
        }
        sum += f(&x);
    }
    sum / total as f64
}
