//! Regularly decaying factors `W` with closed-form derivatives up to order 3.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Callable used by the unverified escape hatch.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WFamily {
    /// `W(x) = amplitude · (1 + |x|²)^{−ρ/2}`. Negative amplitude gives the
    /// attractive tails; `ρ = 2` is the inverse-square family with constant
    /// angular limit `L ≡ amplitude`.
    Power { amplitude: f64, rho: f64 },
    /// `W(x) = amplitude · exp(−1 / (1 − |x|²/radius²))` inside the ball, 0 outside.
    CompactBump { amplitude: f64, radius: f64 },
    /// User callable; derivatives by centered differences, never certified.
    Custom {
        name: String,
        rho: f64,
        f: ScalarField,
    },
}

impl fmt::Debug for WFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WFamily::Power { amplitude, rho } => f
                .debug_struct("Power")
                .field("amplitude", amplitude)
                .field("rho", rho)
                .finish(),
            WFamily::CompactBump { amplitude, radius } => f
                .debug_struct("CompactBump")
                .field("amplitude", amplitude)
                .field("radius", radius)
                .finish(),
            WFamily::Custom { name, rho, .. } => f
                .debug_struct("Custom")
                .field("name", name)
                .field("rho", rho)
                .finish_non_exhaustive(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecayingW {
    dim: usize,
    family: WFamily,
}

/// Derivatives `G, G', G'', G'''` of the radial generator `G(t)` with
/// `W(x) = G(|x|²)`.
type Jet = [f64; 4];

impl DecayingW {
    pub fn power(dim: usize, amplitude: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("decay exponent must be positive, got {rho}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        Self::with_family(dim, WFamily::Power { amplitude, rho })
    }

    /// `−c (1 + |x|²)^{−1}`.
    pub fn inverse_square(dim: usize, c: f64) -> Result<Self> {
        Self::power(dim, -c, 2.0)
    }

    pub fn compact_bump(dim: usize, amplitude: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("bump radius must be positive".into()));
        }
        Self::with_family(dim, WFamily::CompactBump { amplitude, radius })
    }

    pub fn custom(dim: usize, name: impl Into<String>, rho: f64, f: ScalarField) -> Result<Self> {
        Self::with_family(
            dim,
            WFamily::Custom {
                name: name.into(),
                rho,
                f,
            },
        )
    }

    fn with_family(dim: usize, family: WFamily) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} not supported (1..=3)"
            )));
        }
        Ok(Self { dim, family })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &WFamily {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            WFamily::Power { .. } => "power",
            WFamily::CompactBump { .. } => "compact-bump",
            WFamily::Custom { .. } => "custom",
        }
    }

    /// Closed-form families carry certified derivatives; custom callables do not.
    pub fn is_certified(&self) -> bool {
        !matches!(self.family, WFamily::Custom { .. })
    }

    pub fn max_order(&self) -> usize {
        match self.family {
            WFamily::Custom { .. } => 2,
            _ => 3,
        }
    }

    /// Nominal decay exponent; `+∞` for the compact bump.
    pub fn rho(&self) -> f64 {
        match self.family {
            WFamily::Power { rho, .. } => rho,
            WFamily::CompactBump { .. } => f64::INFINITY,
            WFamily::Custom { rho, .. } => rho,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self.family {
            WFamily::Power { amplitude, .. } | WFamily::CompactBump { amplitude, .. } => amplitude,
            WFamily::Custom { ref f, .. } => f(&vec![0.0; self.dim]),
        }
    }

    /// Same shape with the amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let family = match &self.family {
            WFamily::Power { amplitude, rho } => WFamily::Power {
                amplitude: amplitude * c,
                rho: *rho,
            },
            WFamily::CompactBump { amplitude, radius } => WFamily::CompactBump {
                amplitude: amplitude * c,
                radius: *radius,
            },
            WFamily::Custom { name, rho, f } => {
                let f = f.clone();
                WFamily::Custom {
                    name: format!("{c}*{name}"),
                    rho: *rho,
                    f: Arc::new(move |x| c * f(x)),
                }
            }
        };
        Self {
            dim: self.dim,
            family,
        }
    }

    /// Sign of `W` far out: −1 attractive, +1 repulsive, 0 for none.
    pub fn tail_sign(&self) -> f64 {
        let a = match self.family {
            WFamily::Power { amplitude, .. } => amplitude,
            WFamily::CompactBump { .. } => 0.0,
            WFamily::Custom { ref f, .. } => {
                let mut x = vec![0.0; self.dim];
                x[0] = 1e6;
                f(&x)
            }
        };
        if a > 0.0 {
            1.0
        } else if a < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// Analytic symbol constant `sup |W|(1+|x|)^ρ` where available.
    pub fn envelope_constant(&self) -> Option<f64> {
        match self.family {
            // ((1+r)²/(1+r²))^{ρ/2} peaks at r = 1
            WFamily::Power { amplitude, rho } => Some(amplitude.abs() * 2f64.powf(rho / 2.0)),
            WFamily::CompactBump { amplitude, .. } => Some(amplitude.abs() * (-1.0f64).exp()),
            WFamily::Custom { .. } => None,
        }
    }

    /// Outer radius of the support, if compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self.family {
            WFamily::CompactBump { radius, .. } => Some(radius),
            _ => None,
        }
    }

    fn jet(&self, t: f64) -> Jet {
        match self.family {
            WFamily::Power { amplitude, rho } => {
                let p = -rho / 2.0;
                let s = 1.0 + t;
                let g0 = amplitude * s.powf(p);
                [
                    g0,
                    g0 * p / s,
                    g0 * p * (p - 1.0) / (s * s),
                    g0 * p * (p - 1.0) * (p - 2.0) / (s * s * s),
                ]
            }
            WFamily::CompactBump { amplitude, radius } => {
                let k = radius * radius;
                let u = k - t;
                if u <= 0.0 {
                    return [0.0; 4];
                }
                let g = amplitude * (-k / u).exp();
                let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
                // d/dt = −d/du
                let d1 = g * k / u2;
                let d2 = g * (k * k / u4 - 2.0 * k / u3);
                let d3 = g * (k * k * k / (u4 * u2) - 6.0 * k * k / (u4 * u) + 6.0 * k / u4);
                [g, -d1, d2, -d3]
            }
            WFamily::Custom { .. } => unreachable!("custom family has no radial jet"),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.family {
            WFamily::Custom { f, .. } => f(x),
            _ => self.jet(norm_sq(x))[0],
        }
    }

    /// Value of a radial W at radius `r`; `None` for custom callables.
    pub fn radial_value(&self, r: f64) -> Option<f64> {
        match self.family {
            WFamily::Custom { .. } => None,
            _ => Some(self.jet(r * r)[0]),
        }
    }

    /// `D^α W(x)` for a multi-index `alpha` of length `d`.
    pub fn derivative(&self, x: &[f64], alpha: &[usize]) -> Result<f64> {
        if alpha.len() != self.dim || x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: alpha.len().min(x.len()),
            });
        }
        let order: usize = alpha.iter().sum();
        if order > self.max_order() {
            return Err(Error::UnsupportedDerivative {
                family: self.family_name(),
                order,
                max: self.max_order(),
            });
        }
        let idx: Vec<usize> = alpha
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat(i).take(k))
            .collect();
        if let WFamily::Custom { f, .. } = &self.family {
            return Ok(finite_difference(f.as_ref(), x, &idx));
        }
        let g = self.jet(norm_sq(x));
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        Ok(match idx.as_slice() {
            [] => g[0],
            [i] => 2.0 * x[*i] * g[1],
            [i, j] => 4.0 * x[*i] * x[*j] * g[2] + 2.0 * delta(*i, *j) * g[1],
            [i, j, k] => {
                let (i, j, k) = (*i, *j, *k);
                8.0 * x[i] * x[j] * x[k] * g[3]
                    + 4.0 * (delta(i, j) * x[k] + delta(i, k) * x[j] + delta(j, k) * x[i]) * g[2]
            }
            _ => unreachable!(),
        })
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if let WFamily::Custom { f, .. } = &self.family {
            return (0..self.dim)
                .map(|i| finite_difference(f.as_ref(), x, &[i]))
                .collect();
        }
        let g1 = self.jet(norm_sq(x))[1];
        x.iter().map(|v| 2.0 * v * g1).collect()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        if let WFamily::Custom { f, .. } = &self.family {
            return (0..self.dim)
                .map(|i| finite_difference(f.as_ref(), x, &[i, i]))
                .sum();
        }
        let t = norm_sq(x);
        let g = self.jet(t);
        4.0 * t * g[2] + 2.0 * self.dim as f64 * g[1]
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Centered differences for the custom escape hatch (order ≤ 2).
fn finite_difference(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), x: &[f64], idx: &[usize]) -> f64 {
    let shifted = |moves: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in moves {
            y[i] += s;
        }
        f(&y)
    };
    match idx {
        [] => f(x),
        [i] => {
            let h = 1e-5;
            (shifted(&[(*i, h)]) - shifted(&[(*i, -h)])) / (2.0 * h)
        }
        [i, j] if i == j => {
            let h = 1e-4;
            (shifted(&[(*i, h)]) - 2.0 * f(x) + shifted(&[(*i, -h)])) / (h * h)
        }
        [i, j] => {
            let h = 1e-4;
            (shifted(&[(*i, h), (*j, h)]) - shifted(&[(*i, h), (*j, -h)])
                - shifted(&[(*i, -h), (*j, h)])
                + shifted(&[(*i, -h), (*j, -h)]))
                / (4.0 * h * h)
        }
        _ => f64::NAN,
    }
}

/// All multi-indices of total order `order` in `dim` variables.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(dim, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, order, &mut Vec::new(), &mut out);
    out
}

/// Deterministic unit vectors: the `2d` signed axes followed by `extra`
/// random directions drawn with a fixed seed.
pub fn ray_directions(dim: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = s;
            dirs.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while dirs.len() < 2 * dim + extra {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm_sq(&v).sqrt();
        if n > 1e-3 && n <= 1.0 {
            dirs.push(v.iter().map(|c| c / n).collect());
        }
    }
    dirs
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolClassReport {
    pub rho: f64,
    pub order: usize,
    /// `sup |D^αW|(1+|x|)^{ρ+|α|}` over samples, one entry per `|α|`.
    pub constants: Vec<f64>,
    /// Per order, the sup over each radius decade `[10^k, 10^{k+1})`.
    pub decade_sups: Vec<Vec<f64>>,
    pub pass: bool,
    pub certified: bool,
    pub samples: usize,
}

/// Largest tolerated growth of the scaled sup from one radius decade to the
/// next before membership is rejected.
const DECADE_GROWTH: f64 = 1.5;

/// Sampled test of `|D^αW(x)| ≤ C(1+|x|)^{−ρ−|α|}` for `|α| ≤ m`, on
/// log-spaced radii in `[10^{-3}, 10^6]` along fixed rays.
pub fn check_symbol_class(w: &DecayingW, rho: f64, m: usize, sample_count: usize) -> Result<SymbolClassReport> {
    if m > w.max_order() {
        return Err(Error::UnsupportedDerivative {
            family: w.family_name(),
            order: m,
            max: w.max_order(),
        });
    }
    let sample_count = sample_count.max(1000);
    let dirs = ray_directions(w.dim(), if w.dim() == 1 { 0 } else { 8 }, 7);
    let per_ray = (sample_count / dirs.len()).max(100);
    let (lo, hi) = (-3.0f64, 6.0f64);
    let decades = (hi - lo) as usize;
    let mut constants = vec![0.0f64; m + 1];
    let mut decade_sups = vec![vec![0.0f64; decades]; m + 1];
    let mut samples = 0;
    let indices: Vec<Vec<Vec<usize>>> = (0..=m).map(|k| multi_indices(w.dim(), k)).collect();
    for dir in &dirs {
        for s in 0..per_ray {
            let e = lo + (hi - lo) * s as f64 / (per_ray - 1) as f64;
            let r = 10f64.powf(e);
            let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
            let decade = ((e - lo).floor() as usize).min(decades - 1);
            samples += 1;
            for (k, alphas) in indices.iter().enumerate() {
                for alpha in alphas {
                    let v = w.derivative(&x, alpha)?.abs() * (1.0 + r).powf(rho + k as f64);
                    constants[k] = constants[k].max(v);
                    decade_sups[k][decade] = decade_sups[k][decade].max(v);
                }
            }
        }
    }
    let pass = constants.iter().all(|c| c.is_finite())
        && decade_sups.iter().all(|sups| {
            let last = sups[decades - 1];
            let prev = sups[decades - 2];
            last <= DECADE_GROWTH * prev || last <= 1e-300
        });
    Ok(SymbolClassReport {
        rho,
        order: m,
        constants,
        decade_sups,
        pass,
        certified: w.is_certified(),
        samples,
    })
}

/// Limit profile `L(ω) = lim r² W(rω)` on the unit sphere.
#[derive(Clone)]
pub enum AngularProfile {
    /// d = 1: the values at ω = −1 and ω = +1.
    Endpoints { minus: f64, plus: f64 },
    Constant(f64),
    /// d = 2: a bounded function of the polar angle.
    Circle(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for AngularProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngularProfile::Endpoints { minus, plus } => {
                write!(f, "Endpoints({minus}, {plus})")
            }
            AngularProfile::Constant(c) => write!(f, "Constant({c})"),
            AngularProfile::Circle(_) => write!(f, "Circle(<fn>)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AngularLimit {
    pub dim: usize,
    pub profile: AngularProfile,
    /// `(r, sup_ω |r²W(rω) − L(ω)|)` along the sampled radii.
    pub verification: Vec<(f64, f64)>,
}

impl AngularLimit {
    pub fn constant(dim: usize, value: f64) -> Self {
        let profile = if dim == 1 {
            AngularProfile::Endpoints {
                minus: value,
                plus: value,
            }
        } else {
            AngularProfile::Constant(value)
        };
        Self {
            dim,
            profile,
            verification: Vec::new(),
        }
    }

    pub fn eval(&self, omega: &[f64]) -> f64 {
        match &self.profile {
            AngularProfile::Endpoints { minus, plus } => {
                if omega[0] < 0.0 {
                    *minus
                } else {
                    *plus
                }
            }
            AngularProfile::Constant(c) => *c,
            AngularProfile::Circle(f) => f(omega[1].atan2(omega[0])),
        }
    }

    /// `c · L`.
    pub fn scaled(&self, c: f64) -> Self {
        let profile = match &self.profile {
            AngularProfile::Endpoints { minus, plus } => AngularProfile::Endpoints {
                minus: c * minus,
                plus: c * plus,
            },
            AngularProfile::Constant(v) => AngularProfile::Constant(c * v),
            AngularProfile::Circle(f) => {
                let f = f.clone();
                AngularProfile::Circle(Arc::new(move |t| c * f(t)))
            }
        };
        Self {
            dim: self.dim,
            profile,
            verification: self.verification.clone(),
        }
    }

    /// Whether the sampled deviations shrink along the radii.
    pub fn verified(&self) -> bool {
        self.verification
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 || w[1].1 < 1e-12)
    }
}

const LIMIT_RADII: [f64; 3] = [1e2, 1e3, 1e4];

fn sampled_limit(w: &DecayingW, value: f64, power: i32) -> Vec<(f64, f64)> {
    let dirs = ray_directions(w.dim(), if w.dim() == 1 { 0 } else { 8 }, 11);
    LIMIT_RADII
        .iter()
        .map(|&r| {
            let err = dirs
                .iter()
                .map(|d| {
                    let x: Vec<f64> = d.iter().map(|c| c * r).collect();
                    (r * r * w.eval(&x).powi(power) - value).abs()
                })
                .fold(0.0, f64::max);
            (r, err)
        })
        .collect()
}

/// `L = lim r² W(rω)`; only the inverse-square power family (`ρ = 2`) and
/// compactly supported W (`L ≡ 0`) have one.
pub fn angular_limit(w: &DecayingW) -> Result<AngularLimit> {
    let value = match w.family() {
        WFamily::Power { amplitude, rho } if (*rho - 2.0).abs() < 1e-12 => *amplitude,
        WFamily::CompactBump { .. } => 0.0,
        other => {
            return Err(Error::NoAngularLimit(format!(
                "{other:?} does not decay like |x|^-2"
            )))
        }
    };
    let mut lim = AngularLimit::constant(w.dim(), value);
    lim.verification = sampled_limit(w, value, 1);
    Ok(lim)
}

/// `𝓛 = lim r² W(rω)²`, which exists for `ρ = 1`. The returned profile is
/// the (nonnegative) limit itself; callers form `−ψ₀𝓛`.
pub fn squared_angular_limit(w: &DecayingW) -> Result<AngularLimit> {
    let value = match w.family() {
        WFamily::Power { amplitude, rho } if (*rho - 1.0).abs() < 1e-12 => amplitude * amplitude,
        WFamily::CompactBump { .. } => 0.0,
        other => {
            return Err(Error::NoAngularLimit(format!(
                "{other:?}: W² does not decay like |x|^-2"
            )))
        }
    };
    let mut lim = AngularLimit::constant(w.dim(), value);
    lim.verification = sampled_limit(w, value, 2);
    Ok(lim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_family_values() {
        let w = DecayingW::power(1, -1.0, 1.0).unwrap();
        assert_eq!(w.eval(&[0.0]), -1.0);
        assert!((w.eval(&[1.0]) + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let w2 = DecayingW::power(1, -1.0, 2.0).unwrap();
        assert_eq!(w2.derivative(&[0.0], &[1]).unwrap(), 0.0);
    }

    #[test]
    fn unsupported_order_is_an_error() {
        let w = DecayingW::power(2, -1.0, 1.0).unwrap();
        let err = w.derivative(&[0.3, 0.1], &[2, 2]).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDerivative { order: 4, .. }));
    }

    /// Centered differences of the next-lower closed-form derivative.
    fn fd_check(w: &DecayingW, x: &[f64]) {
        let h = 1e-4;
        for order in 1..=3 {
            for alpha in multi_indices(w.dim(), order) {
                let i = alpha.iter().position(|&k| k > 0).unwrap();
                let mut lower = alpha.clone();
                lower[i] -= 1;
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                let fd = (w.derivative(&xp, &lower).unwrap() - w.derivative(&xm, &lower).unwrap())
                    / (2.0 * h);
                let exact = w.derivative(x, &alpha).unwrap();
                let scale = exact.abs().max(1e-3);
                assert!(
                    (fd - exact).abs() / scale < 1e-6,
                    "{:?} alpha={alpha:?} x={x:?}: fd {fd} exact {exact}",
                    w.family()
                );
            }
        }
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        for dim in 1..=3 {
            for w in [
                DecayingW::power(dim, -1.0, 2.0 / 3.0).unwrap(),
                DecayingW::power(dim, 2.5, 1.5).unwrap(),
                DecayingW::compact_bump(dim, -3.0, 4.0).unwrap(),
            ] {
                for x in [vec![0.3, -1.2, 0.7], vec![2.0, 1.0, -0.5], vec![-3.1, 0.4, 1.1]] {
                    fd_check(&w, &x[..dim]);
                }
            }
        }
    }

    #[test]
    fn laplacian_and_gradient_are_consistent() {
        let w = DecayingW::power(3, -2.0, 0.8).unwrap();
        let x = [0.4, -1.3, 2.2];
        let lap: f64 = (0..3)
            .map(|i| {
                let mut a = [0, 0, 0];
                a[i] = 2;
                w.derivative(&x, &a).unwrap()
            })
            .sum();
        assert!((lap - w.laplacian(&x)).abs() < 1e-14);
        let g = w.gradient(&x);
        assert!((g[1] - w.derivative(&x, &[0, 1, 0]).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn symbol_class_examples() {
        let w = DecayingW::power(1, -1.0, 1.0).unwrap();
        let ok = check_symbol_class(&w, 1.0, 3, 1000).unwrap();
        assert!(ok.pass);
        assert!(ok.constants[0] > 0.5 && ok.constants[0] < 2.0);
        let bad = check_symbol_class(&w, 2.0, 0, 1000).unwrap();
        assert!(!bad.pass);
        let bump = DecayingW::compact_bump(2, 1.0, 2.0).unwrap();
        for rho in [0.5, 3.0, 10.0] {
            assert!(check_symbol_class(&bump, rho, 3, 1000).unwrap().pass);
        }
    }

    #[test]
    fn symbol_class_monotone_in_rho_and_order() {
        let w = DecayingW::power(2, -1.0, 1.2).unwrap();
        assert!(check_symbol_class(&w, 1.2, 3, 1000).unwrap().pass);
        for (rho, m) in [(1.0, 3), (0.5, 2), (1.2, 1), (0.1, 0)] {
            assert!(check_symbol_class(&w, rho, m, 1000).unwrap().pass, "{rho} {m}");
        }
    }

    #[test]
    fn angular_limits() {
        let w = DecayingW::inverse_square(1, 10.0).unwrap();
        let lim = angular_limit(&w).unwrap();
        assert!(matches!(lim.profile, AngularProfile::Endpoints { minus, plus } if minus == -10.0 && plus == -10.0));
        assert!(lim.verified());
        assert!(lim.verification.last().unwrap().1 < 1e-6);

        let w1 = DecayingW::power(1, -1.0, 1.0).unwrap();
        assert!(matches!(angular_limit(&w1), Err(Error::NoAngularLimit(_))));

        let w3 = DecayingW::power(2, -3.0, 1.0).unwrap();
        let sq = squared_angular_limit(&w3).unwrap();
        assert!(matches!(sq.profile, AngularProfile::Constant(v) if v == 9.0));
        assert!(sq.verified());
    }

    #[test]
    fn custom_is_flagged_unverified() {
        let w = DecayingW::custom(1, "gauss", 5.0, Arc::new(|x: &[f64]| -(-x[0] * x[0]).exp())).unwrap();
        assert!(!w.is_certified());
        let d = w.derivative(&[0.5], &[1]).unwrap();
        let exact = 2.0 * 0.5 * (-0.25f64).exp();
        assert!((d - exact).abs() < 1e-8);
    }
}
