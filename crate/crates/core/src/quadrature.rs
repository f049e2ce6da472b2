//! Adaptive Gauss–Kronrod quadrature and Gauss–Legendre panels.

use std::ops::{Add, Mul, Sub};

use crate::{Error, Result, C64};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

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
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-14,
            max_intervals: 4000,
        }
    }
}

struct Interval<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

/// Integrand callback: `(x, locator) -> value`, where `locator` is the
/// midpoint of the smooth sub-interval being integrated.
fn gk15<T: QuadValue>(f: &mut impl FnMut(f64, f64) -> T, lo: f64, hi: f64) -> (T, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center, center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx, center);
        let f2 = f(center + dx, center);
        let sum = f1 + f2;
        kronrod = kronrod + sum * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + sum * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    (value, error)
}

/// Integrates `f` over `[lo, hi]`, forcing subdivision at `breaks`.
///
/// The integrand receives the locator of the sub-interval so that piecewise
/// functions can pick the branch valid on the whole sub-interval.
pub fn integrate<T: QuadValue>(
    mut f: impl FnMut(f64, f64) -> T,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<T> {
    if hi <= lo {
        return Ok(T::zero());
    }
    let mut edges: Vec<f64> = breaks.iter().copied().filter(|b| *b > lo && *b < hi).collect();
    edges.push(lo);
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut intervals: Vec<Interval<T>> = edges
        .windows(2)
        .map(|w| {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            Interval {
                lo: w[0],
                hi: w[1],
                value,
                error,
            }
        })
        .collect();

    loop {
        let total = intervals.iter().fold(T::zero(), |acc, i| acc + i.value);
        let err: f64 = intervals.iter().map(|i| i.error).sum();
        if err <= opts.atol.max(opts.rtol * total.magnitude()) {
            return Ok(total);
        }
        if intervals.len() >= opts.max_intervals {
            return Err(Error::Numerical {
                module: "quadrature",
                message: format!(
                    "no convergence on [{lo:.6e}, {hi:.6e}]: estimated error {err:.3e} for value {:.6e} after {} intervals",
                    total.magnitude(),
                    intervals.len()
                ),
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("non-empty");
        let iv = intervals.swap_remove(worst);
        let mid = 0.5 * (iv.lo + iv.hi);
        if mid <= iv.lo || mid >= iv.hi {
            return Err(Error::Numerical {
                module: "quadrature",
                message: format!("interval collapsed near x = {:.6e}", iv.lo),
            });
        }
        // Sub-intervals inherit the parent's locator side.
        for (a, b) in [(iv.lo, mid), (mid, iv.hi)] {
            let (value, error) = gk15(&mut f, a, b);
            intervals.push(Interval {
                lo: a,
                hi: b,
                value,
                error,
            });
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pnm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule over consecutive panels given by `edges`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    pub fn new(edges: &[f64], order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(edges.len() * order);
        let mut weights = Vec::with_capacity(edges.len() * order);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(c + h * x);
                weights.push(h * wt);
            }
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
