//! Oscillating factors, decaying factors and the evaluable potentials built
//! from them.

mod decay;
mod eta;

use std::sync::Arc;

pub use decay::{
    angular_limit, check_symbol_class, multi_indices, ray_directions, squared_angular_limit,
    AngularLimit, AngularProfile, DecayingW, ScalarField, SymbolClassReport, WFamily,
};
pub use eta::{box_average, AdmissibleEta, Mode, TrigBackground};

/// Bound on the negative part of a potential, used to bracket sublevel sets
/// and to size computational boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// `V_-(x) ≤ c (1+|x|)^{-ρ}`.
    Power { c: f64, rho: f64 },
    /// `V_- = 0` outside the ball of this radius; `bound ≥ sup V_-`.
    Compact { radius: f64, bound: f64 },
    /// `V ≥ 0` everywhere.
    Nonnegative,
    Unknown,
}

impl Envelope {
    /// Radius beyond which `V ≥ E` is guaranteed (`E < 0`).
    pub fn sublevel_radius(&self, energy: f64) -> Option<f64> {
        match *self {
            Envelope::Power { c, rho } => {
                if energy >= 0.0 {
                    None
                } else {
                    Some(((c / -energy).powf(1.0 / rho) - 1.0).max(0.0))
                }
            }
            Envelope::Compact { radius, .. } => Some(radius),
            Envelope::Nonnegative => Some(0.0),
            Envelope::Unknown => None,
        }
    }
}

/// A real potential on `ℝ^d` that can be sampled pointwise.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// `true` when `V(x)` depends only on `|x|`.
    fn is_radial(&self) -> bool {
        false
    }

    /// `V(r e₁)`; meaningful for radial potentials.
    fn radial_value(&self, r: f64) -> f64 {
        let mut x = vec![0.0; self.dim()];
        x[0] = r;
        self.eval(&x)
    }

    fn envelope(&self) -> Envelope {
        Envelope::Unknown
    }

    /// Largest oscillation frequency present; used to check mesh resolution.
    fn max_frequency(&self) -> f64 {
        0.0
    }

    fn describe(&self) -> String {
        "potential".into()
    }
}

impl<P: Potential + ?Sized> Potential for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn is_radial(&self) -> bool {
        (**self).is_radial()
    }
    fn radial_value(&self, r: f64) -> f64 {
        (**self).radial_value(r)
    }
    fn envelope(&self) -> Envelope {
        (**self).envelope()
    }
    fn max_frequency(&self) -> f64 {
        (**self).max_frequency()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<P: Potential + ?Sized> Potential for Arc<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (**self).eval(x)
    }
    fn is_radial(&self) -> bool {
        (**self).is_radial()
    }
    fn radial_value(&self, r: f64) -> f64 {
        (**self).radial_value(r)
    }
    fn envelope(&self) -> Envelope {
        (**self).envelope()
    }
    fn max_frequency(&self) -> f64 {
        (**self).max_frequency()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroPotential {
    pub dim: usize,
}

impl Potential for ZeroPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn is_radial(&self) -> bool {
        true
    }
    fn envelope(&self) -> Envelope {
        Envelope::Nonnegative
    }
    fn describe(&self) -> String {
        "0".into()
    }
}

fn w_envelope(w: &DecayingW, c: f64, power: i32) -> Envelope {
    // sign of c·W^power far out decides whether there is a negative part
    let tail = c * w.tail_sign().powi(power);
    let amp = c * w.amplitude().powi(power);
    if let Some(radius) = w.support_radius() {
        return if amp < 0.0 {
            Envelope::Compact {
                radius,
                bound: amp.abs(),
            }
        } else {
            Envelope::Nonnegative
        };
    }
    if tail > 0.0 || (tail == 0.0 && amp >= 0.0) {
        return Envelope::Nonnegative;
    }
    match w.envelope_constant() {
        Some(k) => Envelope::Power {
            c: c.abs() * k.powi(power),
            rho: w.rho() * power as f64,
        },
        None => Envelope::Unknown,
    }
}

/// `c · W`.
#[derive(Debug, Clone)]
pub struct ScaledW {
    pub w: DecayingW,
    pub factor: f64,
}

impl ScaledW {
    pub fn new(w: DecayingW, factor: f64) -> Self {
        Self { w, factor }
    }
}

impl Potential for ScaledW {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.factor * self.w.eval(x)
    }
    fn is_radial(&self) -> bool {
        self.w.is_certified()
    }
    fn radial_value(&self, r: f64) -> f64 {
        match self.w.radial_value(r) {
            Some(v) => self.factor * v,
            None => {
                let mut x = vec![0.0; self.dim()];
                x[0] = r;
                self.eval(&x)
            }
        }
    }
    fn envelope(&self) -> Envelope {
        w_envelope(&self.w, self.factor, 1)
    }
    fn describe(&self) -> String {
        format!("{} * W[{:?}]", self.factor, self.w.family())
    }
}

/// `c · W²`.
#[derive(Debug, Clone)]
pub struct SquaredW {
    pub w: DecayingW,
    pub factor: f64,
}

impl SquaredW {
    pub fn new(w: DecayingW, factor: f64) -> Self {
        Self { w, factor }
    }
}

impl Potential for SquaredW {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let v = self.w.eval(x);
        self.factor * v * v
    }
    fn is_radial(&self) -> bool {
        self.w.is_certified()
    }
    fn radial_value(&self, r: f64) -> f64 {
        match self.w.radial_value(r) {
            Some(v) => self.factor * v * v,
            None => {
                let mut x = vec![0.0; self.dim()];
                x[0] = r;
                self.eval(&x)
            }
        }
    }
    fn envelope(&self) -> Envelope {
        if self.factor >= 0.0 {
            return Envelope::Nonnegative;
        }
        if let Some(radius) = self.w.support_radius() {
            let a = self.w.amplitude();
            return Envelope::Compact {
                radius,
                bound: self.factor.abs() * a * a,
            };
        }
        match self.w.envelope_constant() {
            Some(k) => Envelope::Power {
                c: self.factor.abs() * k * k,
                rho: 2.0 * self.w.rho(),
            },
            None => Envelope::Unknown,
        }
    }
    fn describe(&self) -> String {
        format!("{} * W[{:?}]^2", self.factor, self.w.family())
    }
}

/// The product potential `V = ηW`.
#[derive(Debug, Clone)]
pub struct EtaW {
    pub eta: AdmissibleEta,
    pub w: DecayingW,
}

impl EtaW {
    pub fn new(eta: AdmissibleEta, w: DecayingW) -> Self {
        Self { eta, w }
    }
}

impl Potential for EtaW {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.eta.eval(x) * self.w.eval(x)
    }
    fn is_radial(&self) -> bool {
        self.eta.background.is_empty() && self.w.is_certified()
    }
    fn envelope(&self) -> Envelope {
        let sup = self.eta.sup_bound();
        if sup == 0.0 {
            return Envelope::Nonnegative;
        }
        // η changes sign in general, so bound |ηW| by sup|η|·|W|
        if let Some(radius) = self.w.support_radius() {
            return Envelope::Compact {
                radius,
                bound: sup * self.w.amplitude().abs(),
            };
        }
        match self.w.envelope_constant() {
            Some(k) => Envelope::Power {
                c: sup * k,
                rho: self.w.rho(),
            },
            None => Envelope::Unknown,
        }
    }
    fn max_frequency(&self) -> f64 {
        self.eta.max_frequency()
    }
    fn describe(&self) -> String {
        format!(
            "(η₀={} + {} modes) * W[{:?}]",
            self.eta.mean,
            self.eta.background.modes().len(),
            self.w.family()
        )
    }
}

/// `−depth` on the ball `|x| < half_width`, 0 outside.
#[derive(Debug, Clone, Copy)]
pub struct SquareWell {
    pub dim: usize,
    pub depth: f64,
    pub half_width: f64,
}

impl Potential for SquareWell {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 < self.half_width * self.half_width {
            -self.depth
        } else {
            0.0
        }
    }
    fn is_radial(&self) -> bool {
        true
    }
    fn radial_value(&self, r: f64) -> f64 {
        if r.abs() < self.half_width {
            -self.depth
        } else {
            0.0
        }
    }
    fn envelope(&self) -> Envelope {
        if self.depth > 0.0 {
            Envelope::Compact {
                radius: self.half_width,
                bound: self.depth,
            }
        } else {
            Envelope::Nonnegative
        }
    }
    fn describe(&self) -> String {
        format!("square well depth {} half-width {}", self.depth, self.half_width)
    }
}

/// Arbitrary callable with caller-declared metadata.
#[derive(Clone)]
pub struct FnPotential {
    pub dim: usize,
    pub f: ScalarField,
    pub envelope: Envelope,
    pub radial: bool,
    pub max_frequency: f64,
}

impl FnPotential {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            f: Arc::new(f),
            envelope: Envelope::Unknown,
            radial: false,
            max_frequency: 0.0,
        }
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn radial(mut self) -> Self {
        self.radial = true;
        self
    }
}

impl std::fmt::Debug for FnPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnPotential")
            .field("dim", &self.dim)
            .field("envelope", &self.envelope)
            .finish_non_exhaustive()
    }
}

impl Potential for FnPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn is_radial(&self) -> bool {
        self.radial
    }
    fn envelope(&self) -> Envelope {
        self.envelope
    }
    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

/// Pointwise `scale · P`.
#[derive(Debug, Clone)]
pub struct Scaled<P> {
    pub inner: P,
    pub scale: f64,
}

impl<P: Potential> Potential for Scaled<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.inner.eval(x)
    }
    fn is_radial(&self) -> bool {
        self.inner.is_radial()
    }
    fn radial_value(&self, r: f64) -> f64 {
        self.scale * self.inner.radial_value(r)
    }
    fn envelope(&self) -> Envelope {
        if self.scale < 0.0 {
            return Envelope::Unknown;
        }
        match self.inner.envelope() {
            Envelope::Power { c, rho } => Envelope::Power {
                c: c * self.scale,
                rho,
            },
            Envelope::Compact { radius, bound } => Envelope::Compact {
                radius,
                bound: bound * self.scale,
            },
            other => other,
        }
    }
    fn max_frequency(&self) -> f64 {
        self.inner.max_frequency()
    }
    fn describe(&self) -> String {
        format!("{} * ({})", self.scale, self.inner.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn product_potential_matches_factors() {
        let eta = AdmissibleEta::new(
            1.0,
            TrigBackground::cosine_pair(vec![1.0], Complex64::new(1.0, 0.0)).unwrap(),
        );
        let w = DecayingW::power(1, -1.0, 2.0 / 3.0).unwrap();
        let v = EtaW::new(eta.clone(), w.clone());
        for x in [0.0, 1.0, -7.3, 250.0] {
            assert_eq!(v.eval(&[x]), eta.eval(&[x]) * w.eval(&[x]));
        }
        assert_eq!(v.max_frequency(), 1.0);
        match v.envelope() {
            Envelope::Power { c, rho } => {
                assert!((rho - 2.0 / 3.0).abs() < 1e-15);
                assert!((c - 3.0 * 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn envelopes_bound_negative_parts() {
        let w = DecayingW::power(2, -2.0, 0.7).unwrap();
        let cases: Vec<Box<dyn Potential>> = vec![
            Box::new(ScaledW::new(w.clone(), 1.5)),
            Box::new(SquaredW::new(w.clone(), -2.0)),
            Box::new(SquareWell {
                dim: 2,
                depth: 4.0,
                half_width: 1.0,
            }),
        ];
        for p in &cases {
            let env = p.envelope();
            for k in 0..200 {
                let r = 0.05 * k as f64 * (1.0 + 0.1 * k as f64);
                let x = [r * 0.6, r * 0.8];
                let neg = (-p.eval(&x)).max(0.0);
                let bound = match env {
                    Envelope::Power { c, rho } => c * (1.0 + r).powf(-rho),
                    Envelope::Compact { radius, bound } => {
                        if r <= radius {
                            bound
                        } else {
                            0.0
                        }
                    }
                    Envelope::Nonnegative => 0.0,
                    Envelope::Unknown => f64::INFINITY,
                };
                assert!(neg <= bound * (1.0 + 1e-12), "{} at r={r}", p.describe());
            }
        }
        assert_eq!(ScaledW::new(w, -1.0).envelope(), Envelope::Nonnegative);
    }
}
