//! Adaptive Gauss–Kronrod (7/15) quadrature on unions of panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Single 15-point Kronrod rule with the embedded 7-point Gauss estimate.
/// Returns `(kronrod, |kronrod − gauss|)`.
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
    /// Intervals narrower than this are never split further.
    pub min_width: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_evaluations: 2_000_000,
            min_width: 1e-12,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over consecutive panels `[p_i, p_{i+1}]`
/// (breakpoints must be increasing). The piece with the largest error
/// estimate is bisected until the summed estimate meets the tolerance.
pub fn integrate_panels(mut f: impl FnMut(f64) -> f64, breakpoints: &[f64], cfg: QuadConfig) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let (mut total, mut err) = (0.0, 0.0);
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        total += v;
        err += e;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let target = |total: f64| cfg.abs_tol.max(cfg.rel_tol * total.abs());
    // error of pieces that reached the minimum width and were set aside
    let mut frozen_error = 0.0;
    let mut frozen_value = 0.0;
    while err > target(total) && evaluations < cfg.max_evaluations {
        let Some(p) = heap.pop() else { break };
        if p.b - p.a <= cfg.min_width * (1.0 + p.a.abs().max(p.b.abs())) {
            frozen_error += p.error;
            frozen_value += p.value;
            err -= p.error;
            total -= p.value;
            continue;
        }
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        evaluations += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
    }
    // resum to shed rounding accumulated by the incremental updates
    let value = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
    let error = heap.iter().map(|p| p.error).sum::<f64>() + frozen_error;
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= target(value),
    }
}

pub fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64, cfg: QuadConfig) -> QuadResult {
    integrate_panels(f, &[a, b], cfg)
}

/// `n+1` equally spaced breakpoints on `[a, b]`.
pub fn uniform_breakpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}
