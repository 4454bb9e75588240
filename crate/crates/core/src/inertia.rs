//! Matrix inertia: the number of negative eigenvalues of a symmetric matrix
//! from the signs of a symmetric factorization (Sylvester's law).

use nalgebra::DMatrix;

/// A pivot fell within the relative breakdown threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub index: usize,
    pub pivot: f64,
}

/// Pivots with `|d| ≤ PIVOT_TOLERANCE · scale` are treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Negative eigenvalues of the symmetric tridiagonal matrix with diagonal
/// `diag(i)`, `i < n`, and off-diagonal `off(i)` coupling `i` and `i+1`.
///
/// This is the Sturm count: the pivots of `LDLᵀ` without pivoting, whose
/// signs are backward stable for tridiagonal matrices.
pub fn sturm_negative_count(
    n: usize,
    diag: impl Fn(usize) -> f64,
    off: impl Fn(usize) -> f64,
) -> Result<usize, Breakdown> {
    let mut count = 0;
    let mut d = 1.0;
    let mut prev_b = 0.0;
    for i in 0..n {
        let a = diag(i);
        let b = if i + 1 < n { off(i) } else { 0.0 };
        d = if i == 0 { a } else { a - prev_b * prev_b / d };
        let scale = a.abs() + prev_b.abs() + b.abs();
        if d.abs() <= PIVOT_TOLERANCE * scale || d == 0.0 {
            return Err(Breakdown { index: i, pivot: d });
        }
        if d < 0.0 {
            count += 1;
        }
        prev_b = b;
    }
    Ok(count)
}

/// Symmetric band matrix in lower band storage: entry `(i, j)`,
/// `i − bandwidth ≤ j ≤ i`, lives at `data[i·(bandwidth+1) + (i−j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    pub n: usize,
    pub bandwidth: usize,
    pub data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        i * (self.bandwidth + 1) + (i - j)
    }

    /// Entry `(i, j)` of the lower triangle (`j ≤ i`).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i - j > self.bandwidth {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn from_dense(a: &DMatrix<f64>, bandwidth: usize) -> Self {
        let n = a.nrows();
        let mut b = Self::zeros(n, bandwidth);
        for i in 0..n {
            for j in i.saturating_sub(bandwidth)..=i {
                b.set(i, j, a[(i, j)]);
            }
        }
        b
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i.saturating_sub(self.bandwidth)..=i {
                a[(i, j)] = self.get(i, j);
                a[(j, i)] = self.get(i, j);
            }
        }
        a
    }
}

/// Element growth beyond this factor (relative to the largest input entry)
/// is reported as breakdown so callers can fall back to a pivoted method.
pub const GROWTH_LIMIT: f64 = 1e10;

/// Negative eigenvalues of a symmetric band matrix via banded `LDLᵀ`
/// without pivoting; consumes the matrix as workspace.
pub fn band_ldl_negative_count(mut a: BandMatrix) -> Result<usize, Breakdown> {
    let n = a.n;
    let m = a.bandwidth;
    let w = m + 1;
    let amax = a.data.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut count = 0;
    let mut col = vec![0.0; m];
    for k in 0..n {
        let p = a.data[k * w];
        // scale: the row's original magnitude is gone after updates, so use
        // the global maximum entry
        if p.abs() <= PIVOT_TOLERANCE * amax || p == 0.0 {
            return Err(Breakdown { index: k, pivot: p });
        }
        if p < 0.0 {
            count += 1;
        }
        let last = (k + m).min(n - 1);
        let len = last - k;
        for t in 0..len {
            let i = k + 1 + t;
            col[t] = a.data[i * w + (i - k)];
        }
        let inv = 1.0 / p;
        for t in 0..len {
            let ci = col[t];
            if ci == 0.0 {
                continue;
            }
            let i = k + 1 + t;
            let f = ci * inv;
            if (f * ci).abs() > GROWTH_LIMIT * amax {
                return Err(Breakdown { index: k, pivot: p });
            }
            let row = i * w;
            for s in 0..=t {
                let j = k + 1 + s;
                a.data[row + (i - j)] -= f * col[s];
            }
        }
    }
    Ok(count)
}

/// Inertia of a dense symmetric matrix by Bunch–Kaufman diagonal pivoting
/// (`PAPᵀ = LDLᵀ` with 1×1 and 2×2 blocks). Pivots below
/// [`PIVOT_TOLERANCE`] times the largest entry count as zero.
pub fn bunch_kaufman_inertia(matrix: &DMatrix<f64>) -> Inertia {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "matrix must be square");
    let mut a: Vec<f64> = (0..n * n).map(|t| matrix[(t / n, t % n)]).collect();
    let at = |i: usize, j: usize| i * n + j;
    let amax = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tiny = PIVOT_TOLERANCE * amax.max(f64::MIN_POSITIVE);
    let alpha = (1.0 + 17f64.sqrt()) / 8.0;
    let mut inertia = Inertia::default();
    let record = |v: f64, inertia: &mut Inertia| {
        if v.abs() <= tiny {
            inertia.zero += 1;
        } else if v < 0.0 {
            inertia.negative += 1;
        } else {
            inertia.positive += 1;
        }
    };
    let swap = |a: &mut Vec<f64>, p: usize, q: usize| {
        if p == q {
            return;
        }
        for j in 0..n {
            a.swap(at(p, j), at(q, j));
        }
        for i in 0..n {
            a.swap(at(i, p), at(i, q));
        }
    };
    let mut k = 0;
    while k < n {
        let absakk = a[at(k, k)].abs();
        let (mut imax, mut colmax) = (k, 0.0);
        for i in k + 1..n {
            let v = a[at(i, k)].abs();
            if v > colmax {
                colmax = v;
                imax = i;
            }
        }
        if absakk.max(colmax) <= tiny {
            record(0.0, &mut inertia);
            k += 1;
            continue;
        }
        let (kp, kstep) = if absakk >= alpha * colmax {
            (k, 1)
        } else {
            let mut rowmax: f64 = 0.0;
            for j in k..n {
                if j != imax {
                    rowmax = rowmax.max(a[at(imax, j)].abs());
                }
            }
            if absakk >= alpha * colmax * (colmax / rowmax) {
                (k, 1)
            } else if a[at(imax, imax)].abs() >= alpha * rowmax {
                (imax, 1)
            } else {
                (imax, 2)
            }
        };
        let kk = k + kstep - 1;
        swap(&mut a, kk, kp);
        if kstep == 1 {
            let d = a[at(k, k)];
            record(d, &mut inertia);
            if d.abs() > tiny {
                for i in k + 1..n {
                    let f = a[at(i, k)] / d;
                    if f == 0.0 {
                        continue;
                    }
                    for j in k + 1..n {
                        a[at(i, j)] -= f * a[at(k, j)];
                    }
                }
            }
        } else {
            let (p, q, r) = (a[at(k, k)], a[at(k + 1, k)], a[at(k + 1, k + 1)]);
            // eigenvalues of the 2×2 block
            let mean = 0.5 * (p + r);
            let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
            record(mean - rad, &mut inertia);
            record(mean + rad, &mut inertia);
            let det = p * r - q * q;
            for i in k + 2..n {
                let (x, y) = (a[at(i, k)], a[at(i, k + 1)]);
                // [x y] D^{-1}
                let u = (r * x - q * y) / det;
                let v = (p * y - q * x) / det;
                for j in k + 2..n {
                    a[at(i, j)] -= u * a[at(k, j)] + v * a[at(k + 1, j)];
                }
            }
        }
        k += kstep;
    }
    inertia
}

/// Number of eigenvalues of `a` strictly below `e` (zero pivots of
/// `a − eI` are not counted).
pub fn dense_count_below(a: &DMatrix<f64>, e: f64) -> usize {
    let n = a.nrows();
    let shifted = a - DMatrix::<f64>::identity(n, n) * e;
    bunch_kaufman_inertia(&shifted).negative
}
