//! Integration of `-y'' + (W(x) - zeta) y = f(x)` with complex `zeta`.
//!
//! Three pieces live here:
//!
//! * [`Dop853`], an embedded 8(5,3) Runge–Kutta pair that steps exactly onto
//!   a list of forced stops (breakpoints of the coefficients and requested
//!   output abscissae);
//! * [`OriginPair`], the fundamental system `phi`, `psi` at the Coulomb point
//!   built from power series with a logarithmic correction;
//! * [`exterior_solution`], solutions that are exactly `exp(i w |x|)` outside
//!   the support box, integrated towards the origin.

use crate::potentials::{CoulombSpec, PiecewiseFn, Side};
use crate::quadrature::{self, QuadOptions};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Error control for [`Dop853`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// State of the integrator at one abscissa.
#[derive(Debug, Clone, Copy)]
pub struct Node<const N: usize> {
    pub x: f64,
    pub y: [C64; N],
}

/// Dormand–Prince 8(5,3) with forced step boundaries.
#[derive(Debug, Clone, Copy)]
pub struct Dop853 {
    pub tol: Tolerances,
    /// Keep every accepted step in the output, not only the stops.
    pub record_steps: bool,
    pub max_steps: usize,
}

impl Default for Dop853 {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            record_steps: false,
            max_steps: 2_000_000,
        }
    }
}

impl Dop853 {
    pub fn with_tol(tol: Tolerances) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Integrates `y' = rhs(x, locator, y)` from `from` to `to`.
    ///
    /// Every value in `stops` strictly between the endpoints becomes a step
    /// boundary (stops within `1e-12` relative of a neighbour are merged) and appears in the output; `locator` passed to `rhs` is the
    /// midpoint of the stop interval being integrated. Output is ordered in
    /// the direction of integration and starts with `from`.
    pub fn solve<const N: usize, F>(
        &self,
        mut rhs: F,
        from: f64,
        to: f64,
        stops: &[f64],
        y0: [C64; N],
    ) -> Result<Vec<Node<N>>>
    where
        F: FnMut(f64, f64, &[C64; N]) -> [C64; N],
    {
        let dir = if to >= from { 1.0 } else { -1.0 };
        let mut edges: Vec<f64> = stops
            .iter()
            .copied()
            .filter(|s| (s - from) * dir > 0.0 && (to - s) * dir > 0.0)
            .collect();
        // Stops closer than this to a neighbour would force sub-ulp steps.
        // Clusters are merged in increasing order so that both directions
        // keep the same representatives.
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        edges.sort_by(f64::total_cmp);
        let mut prev: Option<f64> = None;
        edges.retain(|&e| {
            let keep = prev.is_none_or(|p| !close(e, p));
            if keep {
                prev = Some(e);
            }
            keep
        });
        edges.retain(|&e| !close(e, from) && !close(e, to));
        if dir < 0.0 {
            edges.reverse();
        }
        edges.push(to);

        let mut out = Vec::with_capacity(edges.len() + 1);
        out.push(Node { x: from, y: y0 });
        let mut x = from;
        let mut y = y0;
        // Step size proposed by the controller, carried across stops.
        let mut h_natural = 0.0;
        let mut steps = 0usize;
        for &end in &edges {
            if end == x {
                continue;
            }
            let locator = 0.5 * (x + end);
            let mut f = |x: f64, y: &[C64; N]| rhs(x, locator, y);
            let mut k1 = f(x, &y);
            if h_natural == 0.0 {
                h_natural = initial_step(&y, &k1, (end - x).abs(), self.tol) * dir;
            }
            loop {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::Numerical {
                        module: "odes",
                        message: format!("step limit exceeded near x = {x:.6e}"),
                    });
                }
                let remaining = end - x;
                let last = h_natural.abs() >= remaining.abs() * (1.0 - 1e-12);
                let h = if last { remaining } else { h_natural };
                if h.abs() < 1e-14 * x.abs().max(1.0) && !last {
                    return Err(Error::Stiffness { module: "odes", x });
                }
                let (y_new, k_new, err) = dop853_step(&mut f, x, &y, &k1, h, self.tol);
                if !err.is_finite() {
                    h_natural = 0.1 * h;
                    continue;
                }
                let fac11 = err.powf(1.0 / 8.0);
                if err <= 1.0 {
                    x = if last { end } else { x + h };
                    y = y_new;
                    k1 = k_new;
                    if !last {
                        h_natural = h / (fac11 / 0.9).clamp(1.0 / 6.0, 3.0);
                        if self.record_steps {
                            out.push(Node { x, y });
                        }
                    }
                    if last {
                        break;
                    }
                } else {
                    h_natural = h / (fac11 / 0.9).min(3.0);
                }
            }
            out.push(Node { x, y });
        }
        Ok(out)
    }
}

fn initial_step<const N: usize>(y: &[C64; N], dy: &[C64; N], span: f64, tol: Tolerances) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for (a, b) in y.iter().zip(dy) {
        let sk = tol.atol + tol.rtol * a.norm();
        d0 += (a.norm() / sk).powi(2);
        d1 += (b.norm() / sk).powi(2);
    }
    let h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * (d0 / d1).sqrt()
    };
    h.min(span).min(0.1).max(1e-10 * span)
}

fn lin<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// One DOP853 step; returns the new state, the derivative there and the
/// scaled error norm.
fn dop853_step<const N: usize>(
    f: &mut impl FnMut(f64, &[C64; N]) -> [C64; N],
    x: f64,
    y: &[C64; N],
    k1: &[C64; N],
    h: f64,
    tol: Tolerances,
) -> ([C64; N], [C64; N], f64) {
    use tableau::*;
    let k2 = f(x + C2 * h, &lin(y, h, &[(A21, k1)]));
    let k3 = f(x + C3 * h, &lin(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &lin(y, h, &[(A41, k1), (A43, &k3)]));
    let k5 = f(x + C5 * h, &lin(y, h, &[(A51, k1), (A53, &k3), (A54, &k4)]));
    let k6 = f(x + C6 * h, &lin(y, h, &[(A61, k1), (A64, &k4), (A65, &k5)]));
    let k7 = f(x + C7 * h, &lin(y, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
    let k8 = f(
        x + C8 * h,
        &lin(y, h, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]),
    );
    let k9 = f(
        x + C9 * h,
        &lin(
            y,
            h,
            &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)],
        ),
    );
    let k10 = f(
        x + C10 * h,
        &lin(
            y,
            h,
            &[
                (A101, k1),
                (A104, &k4),
                (A105, &k5),
                (A106, &k6),
                (A107, &k7),
                (A108, &k8),
                (A109, &k9),
            ],
        ),
    );
    let k11 = f(
        x + C11 * h,
        &lin(
            y,
            h,
            &[
                (A111, k1),
                (A114, &k4),
                (A115, &k5),
                (A116, &k6),
                (A117, &k7),
                (A118, &k8),
                (A119, &k9),
                (A1110, &k10),
            ],
        ),
    );
    let k12 = f(
        x + h,
        &lin(
            y,
            h,
            &[
                (A121, k1),
                (A124, &k4),
                (A125, &k5),
                (A126, &k6),
                (A127, &k7),
                (A128, &k8),
                (A129, &k9),
                (A1210, &k10),
                (A1211, &k11),
            ],
        ),
    );
    let y_new = lin(
        y,
        h,
        &[
            (B1, k1),
            (B6, &k6),
            (B7, &k7),
            (B8, &k8),
            (B9, &k9),
            (B10, &k10),
            (B11, &k11),
            (B12, &k12),
        ],
    );

    let mut err = 0.0;
    let mut err2 = 0.0;
    for i in 0..N {
        let sk = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
        let slope =
            k1[i] * B1 + k6[i] * B6 + k7[i] * B7 + k8[i] * B8 + k9[i] * B9 + k10[i] * B10 + k11[i] * B11 + k12[i] * B12;
        let e3 = slope - k1[i] * BHH1 - k9[i] * BHH2 - k12[i] * BHH3;
        err2 += (e3.norm() / sk).powi(2);
        let e5 = k1[i] * ER1
            + k6[i] * ER6
            + k7[i] * ER7
            + k8[i] * ER8
            + k9[i] * ER9
            + k10[i] * ER10
            + k11[i] * ER11
            + k12[i] * ER12;
        err += (e5.norm() / sk).powi(2);
    }
    let mut deno = err + 0.01 * err2;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err * (1.0 / (deno * N as f64)).sqrt();
    let k_new = f(x + h, &y_new);
    (y_new, k_new, err)
}

/// Where a trace lives relative to the singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    Left,
    Right,
    Full,
}

/// Sampled solution `(y, y')` on an increasing grid.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub grid: Vec<f64>,
    pub y: Vec<C64>,
    pub dy: Vec<C64>,
    pub side: TraceSide,
}

impl SolutionTrace {
    /// Builds a trace from integrator nodes (any direction) of a
    /// `[y, y', ...]` state.
    pub fn from_nodes<const N: usize>(nodes: &[Node<N>], side: TraceSide) -> Self {
        let mut nodes: Vec<&Node<N>> = nodes.iter().collect();
        nodes.sort_by(|a, b| a.x.total_cmp(&b.x));
        nodes.dedup_by(|a, b| a.x == b.x);
        Self {
            grid: nodes.iter().map(|n| n.x).collect(),
            y: nodes.iter().map(|n| n.y[0]).collect(),
            dy: nodes.iter().map(|n| n.y[1]).collect(),
            side,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index of a grid node equal to `x`.
    pub fn find(&self, x: f64) -> Option<usize> {
        self.grid.binary_search_by(|g| g.total_cmp(&x)).ok()
    }

    /// Value at a grid node, or cubic Hermite interpolation between nodes.
    pub fn eval(&self, x: f64) -> Option<C64> {
        let n = self.grid.len();
        if n == 0 || x < self.grid[0] || x > self.grid[n - 1] {
            return None;
        }
        match self.grid.binary_search_by(|g| g.total_cmp(&x)) {
            Ok(i) => Some(self.y[i]),
            Err(i) => {
                let (x0, x1) = (self.grid[i - 1], self.grid[i]);
                let h = x1 - x0;
                let s = (x - x0) / h;
                let h00 = (1.0 + 2.0 * s) * (1.0 - s).powi(2);
                let h10 = s * (1.0 - s).powi(2);
                let h01 = s * s * (3.0 - 2.0 * s);
                let h11 = s * s * (s - 1.0);
                Some(self.y[i - 1] * h00 + self.dy[i - 1] * (h10 * h) + self.y[i] * h01 + self.dy[i] * (h11 * h))
            }
        }
    }
}

/// Right-hand side of `y'' = (W - zeta) y - f` as a first order system.
fn linear_rhs<'a>(
    w: &'a dyn PiecewiseFn,
    zeta: C64,
    f: Option<&'a dyn PiecewiseFn>,
) -> impl Fn(f64, f64, &[C64; 2]) -> [C64; 2] + 'a {
    move |x, loc, y| {
        let src = f.map_or(0.0, |f| f.eval_on(x, loc));
        [y[1], (w.eval_on(x, loc) - zeta) * y[0] - src]
    }
}

/// Solves `-y'' + (W - zeta) y = f` from `from` to `to` with `init = (y, y')`.
///
/// Breakpoints of `W` and `f` and every abscissa in `outputs` are forced
/// step boundaries; all accepted steps are kept in the trace.
pub fn integrate(
    w: &dyn PiecewiseFn,
    zeta: C64,
    f: Option<&dyn PiecewiseFn>,
    from: f64,
    to: f64,
    init: (C64, C64),
    outputs: &[f64],
) -> Result<SolutionTrace> {
    let mut stops = w.breakpoints();
    if let Some(f) = f {
        stops.extend(f.breakpoints());
    }
    stops.extend_from_slice(outputs);
    let solver = Dop853 {
        record_steps: true,
        ..Dop853::default()
    };
    let nodes = solver.solve(linear_rhs(w, zeta, f), from, to, &stops, [init.0, init.1])?;
    let side = if from.min(to) >= 0.0 {
        TraceSide::Right
    } else if from.max(to) <= 0.0 {
        TraceSide::Left
    } else {
        TraceSide::Full
    };
    Ok(SolutionTrace::from_nodes(&nodes, side))
}

/// `sqrt(zeta)` on the branch with `Im w > 0`; for `zeta > 0` the positive root.
pub fn decay_root(zeta: C64) -> C64 {
    let w = zeta.sqrt();
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        -w
    } else {
        w
    }
}

/// Power series coefficients of the fundamental system at a Coulomb point.
///
/// `phi = sum a_n x^n` with `a_0 = 0`, `a_1 = 1`, and
/// `psi = sum c_n x^n + q phi ln x` with `c_0 = 1`, `c_1 = -q`, so that
/// `phi(0) = 0, phi'(0) = 1`, `psi(0) = 1` and `psi' - q ln x -> 0`.
#[derive(Debug, Clone)]
pub struct OriginSeries {
    pub q: f64,
    pub zeta: C64,
    pub a: Vec<C64>,
    pub c: Vec<C64>,
}

/// `(phi, phi', psi, psi')` at one point.
#[derive(Debug, Clone, Copy)]
pub struct Fundamental {
    pub phi: C64,
    pub dphi: C64,
    pub psi: C64,
    pub dpsi: C64,
}

impl OriginSeries {
    pub fn new(q: f64, zeta: C64, terms: usize) -> Self {
        let terms = terms.max(2);
        let mut a = vec![C64::new(0.0, 0.0); terms];
        let mut c = vec![C64::new(0.0, 0.0); terms];
        a[1] = C64::new(1.0, 0.0);
        c[0] = C64::new(1.0, 0.0);
        c[1] = C64::new(-q, 0.0);
        for n in 2..terms {
            let nn = (n * (n - 1)) as f64;
            a[n] = (a[n - 1] * q - zeta * a[n - 2]) / nn;
            c[n] = (c[n - 1] * q - zeta * c[n - 2] - a[n] * (q * (2 * n - 1) as f64)) / nn;
        }
        Self { q, zeta, a, c }
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Evaluates the fundamental system at `0 < x`.
    pub fn eval(&self, x: f64) -> Fundamental {
        let mut phi = C64::new(0.0, 0.0);
        let mut dphi = C64::new(0.0, 0.0);
        let mut reg = C64::new(0.0, 0.0);
        let mut dreg = C64::new(0.0, 0.0);
        for n in (0..self.a.len()).rev() {
            phi = phi * x + self.a[n];
            reg = reg * x + self.c[n];
            if n >= 1 {
                dphi = dphi * x + self.a[n] * n as f64;
                dreg = dreg * x + self.c[n] * n as f64;
            }
        }
        let ln = x.ln();
        Fundamental {
            phi,
            dphi,
            psi: reg + phi * (self.q * ln),
            dpsi: dreg + (dphi * ln + phi / x) * self.q,
        }
    }
}

/// Fundamental system at the hand-off radius `x0`.
#[derive(Debug, Clone)]
pub struct OriginPair {
    pub q: f64,
    pub zeta: C64,
    pub x0: f64,
    pub phi: C64,
    pub dphi: C64,
    pub psi: C64,
    pub dpsi: C64,
    pub order: usize,
    pub series: OriginSeries,
}

const MAX_ORDER: usize = 400;

/// Builds `phi`, `psi` at `x0`, adding terms until the tail drops below
/// `1e-16` relative.
///
/// `order = None` picks the order adaptively; `Some(n)` forces `n` terms.
/// For the left side call with `q = -q_minus` and evaluate at `s = -x`.
pub fn origin_pair(q: f64, zeta: C64, x0: f64, order: Option<usize>) -> Result<OriginPair> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "hand-off radius must be > 0, got {x0}"
        )));
    }
    let order = match order {
        Some(n) => n.max(2),
        None => adaptive_order(q, zeta, x0)?,
    };
    let series = OriginSeries::new(q, zeta, order);
    let v = series.eval(x0);
    let wronskian = v.dphi * v.psi - v.phi * v.dpsi;
    if (wronskian - 1.0).norm() > 1e-12 {
        return Err(Error::SeriesDivergence { x0 });
    }
    Ok(OriginPair {
        q,
        zeta,
        x0,
        phi: v.phi,
        dphi: v.dphi,
        psi: v.psi,
        dpsi: v.dpsi,
        order,
        series,
    })
}

fn adaptive_order(q: f64, zeta: C64, x0: f64) -> Result<usize> {
    let full = OriginSeries::new(q, zeta, MAX_ORDER);
    let log_factor = 1.0 + q.abs() * x0.ln().abs();
    let mut largest = 1.0f64;
    let mut power = 1.0;
    let mut quiet = 0;
    for n in 0..MAX_ORDER {
        let term = (full.a[n].norm() * log_factor + full.c[n].norm()) * power * (n as f64).max(1.0);
        largest = largest.max(term);
        if n >= 2 && term < 1e-16 * largest.max(1.0) {
            quiet += 1;
            if quiet == 2 {
                if largest > 1e8 {
                    // Cancellation would eat half the digits.
                    return Err(Error::SeriesDivergence { x0 });
                }
                return Ok(n + 1);
            }
        } else {
            quiet = 0;
        }
        power *= x0;
    }
    Err(Error::SeriesDivergence { x0 })
}

impl OriginPair {
    /// Coefficients `(A, B)` with `y = A psi + B phi` at `x0`.
    pub fn decompose(&self, y: C64, dy: C64) -> (C64, C64) {
        let w = self.dphi * self.psi - self.phi * self.dpsi;
        ((y * self.dphi - self.phi * dy) / w, (self.psi * dy - self.dpsi * y) / w)
    }

    /// `(u(±0), b_±(u))` of a solution given by `(y, y')` at `x = ±x0`.
    ///
    /// On the left the pair must have been built for `q = -q_minus`; with
    /// `s = -x` one has `u = u(-0) psi(s) - b_-(u) phi(s)`.
    pub fn boundary_values(&self, side: Side, y: C64, dy: C64) -> (C64, C64) {
        match side {
            Side::Right => self.decompose(y, dy),
            Side::Left => {
                let (a, b) = self.decompose(y, -dy);
                (a, -b)
            }
        }
    }

    /// Inverse of [`OriginPair::boundary_values`]: `(y, y')` at `x = ±x0`.
    pub fn solution_at(&self, side: Side, u0: C64, b: C64) -> (C64, C64) {
        match side {
            Side::Right => (u0 * self.psi + b * self.phi, u0 * self.dpsi + b * self.dphi),
            Side::Left => (u0 * self.psi - b * self.phi, -(u0 * self.dpsi - b * self.dphi)),
        }
    }

    /// Same as [`OriginPair::solution_at`] at any `0 < |x| <= x0` on `side`.
    pub fn solution_near(&self, side: Side, x: f64, u0: C64, b: C64) -> (C64, C64) {
        let v = self.series.eval(x.abs());
        match side {
            Side::Right => (u0 * v.psi + b * v.phi, u0 * v.dpsi + b * v.dphi),
            Side::Left => (u0 * v.psi - b * v.phi, -(u0 * v.dpsi - b * v.dphi)),
        }
    }

    /// Particular solution with `u(±0) = 0`, `b_±(u) = 0` of
    /// `-y'' + (q/x - zeta) y = f` at `x` (with `|x| <= x0` on `side`), by
    /// variation of parameters.
    pub fn particular_near(&self, side: Side, x: f64, f: &dyn PiecewiseFn) -> Result<(C64, C64)> {
        let s = x.abs();
        if s == 0.0 {
            return Ok((C64::new(0.0, 0.0), C64::new(0.0, 0.0)));
        }
        let sign = match side {
            Side::Right => 1.0,
            Side::Left => -1.0,
        };
        let at = self.series.eval(s);
        let opts = QuadOptions {
            rtol: 1e-12,
            atol: 1e-30,
            max_intervals: 2000,
        };
        let breaks: Vec<f64> = f
            .breakpoints()
            .into_iter()
            .map(|b| b * sign)
            .filter(|b| *b > 0.0 && *b < s)
            .collect();
        let psi_part: [C64; 2] = [
            quadrature::integrate(
                |sig, loc| self.series.eval(sig).psi * f.eval_on(sign * sig, sign * loc),
                0.0,
                s,
                &breaks,
                opts,
            )?,
            quadrature::integrate(
                |sig, loc| self.series.eval(sig).phi * f.eval_on(sign * sig, sign * loc),
                0.0,
                s,
                &breaks,
                opts,
            )?,
        ];
        let (int_psi_f, int_phi_f) = (psi_part[0], psi_part[1]);
        let y = -(int_psi_f * at.phi - int_phi_f * at.psi);
        let dy = -(int_psi_f * at.dphi - int_phi_f * at.dpsi);
        Ok(match side {
            Side::Right => (y, dy),
            Side::Left => (y, -dy),
        })
    }
}

/// Whether an exterior solution must decay or is the outgoing scattering wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exterior {
    Decaying,
    Outgoing,
}

/// `exp(i w |x|)` outside `[-l_box, l_box]` and `(y, y')` there.
pub fn exterior_values(w: C64, side: Side, x: f64) -> (C64, C64) {
    match side {
        Side::Right => {
            let e = (I * w * x).exp();
            (e, I * w * e)
        }
        Side::Left => {
            let e = (-I * w * x).exp();
            (e, -I * w * e)
        }
    }
}

/// Solution on one side that equals `exp(i w |x|)` for `|x| >= l_box`,
/// integrated towards the origin and stopped at `±x0`.
///
/// `w = sqrt(zeta)` with `Im w > 0`; for `Exterior::Outgoing` the energy must
/// be real and positive. `outputs` are extra abscissae on that side.
pub fn exterior_solution(
    spec: &CoulombSpec,
    zeta: C64,
    side: Side,
    mode: Exterior,
    l_box: f64,
    x0: f64,
    outputs: &[f64],
) -> Result<SolutionTrace> {
    let w = match mode {
        Exterior::Decaying => {
            if zeta.im == 0.0 && zeta.re >= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "no decaying solution for zeta = {zeta} on the spectrum [0, inf)"
                )));
            }
            decay_root(zeta)
        }
        Exterior::Outgoing => {
            if zeta.im != 0.0 || zeta.re <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "outgoing waves need a positive real energy, got {zeta}"
                )));
            }
            C64::new(zeta.re.sqrt(), 0.0)
        }
    };
    let l_box = l_box.max(spec.box_radius());
    let (start, end) = match side {
        Side::Right => (l_box, x0),
        Side::Left => (-l_box, -x0),
    };
    let init = exterior_values(w, side, start);
    integrate(spec, zeta, None, start, end, init, outputs)
}

/// Decaying solution on `side` with the default box and hand-off radius.
pub fn decaying_solution(spec: &CoulombSpec, zeta: C64, side: Side) -> Result<SolutionTrace> {
    exterior_solution(
        spec,
        zeta,
        side,
        Exterior::Decaying,
        spec.box_radius(),
        default_x0(spec),
        &[],
    )
}

/// Default hand-off radius `1e-3 a`.
pub fn default_x0(spec: &CoulombSpec) -> f64 {
    1e-3 * spec.a
}

#[rustfmt::skip]
#[allow(clippy::excessive_precision, clippy::unreadable_literal)]
mod tableau {
    pub const C2: f64 = 0.526001519587677318785587544488E-01;
    pub const C3: f64 = 0.789002279381515978178381316732E-01;
    pub const C4: f64 = 0.118350341907227396726757197510E+00;
    pub const C5: f64 = 0.281649658092772603273242802490E+00;
    pub const C6: f64 = 0.333333333333333333333333333333E+00;
    pub const C7: f64 = 0.25E+00;
    pub const C8: f64 = 0.307692307692307692307692307692E+00;
    pub const C9: f64 = 0.651282051282051282051282051282E+00;
    pub const C10: f64 = 0.6E+00;
    pub const C11: f64 = 0.857142857142857142857142857142E+00;

    pub const A21: f64 = 5.26001519587677318785587544488E-2;
    pub const A31: f64 = 1.97250569845378994544595329183E-2;
    pub const A32: f64 = 5.91751709536136983633785987549E-2;
    pub const A41: f64 = 2.95875854768068491816892993775E-2;
    pub const A43: f64 = 8.87627564304205475450678981324E-2;
    pub const A51: f64 = 2.41365134159266685502369798665E-1;
    pub const A53: f64 = -8.84549479328286085344864962717E-1;
    pub const A54: f64 = 9.24834003261792003115737966543E-1;
    pub const A61: f64 = 3.7037037037037037037037037037E-2;
    pub const A64: f64 = 1.70828608729473871279604482173E-1;
    pub const A65: f64 = 1.25467687566822425016691814123E-1;
    pub const A71: f64 = 3.7109375E-2;
    pub const A74: f64 = 1.70252211019544039314978060272E-1;
    pub const A75: f64 = 6.02165389804559606850219397283E-2;
    pub const A76: f64 = -1.7578125E-2;
    pub const A81: f64 = 3.70920001185047927108779319836E-2;
    pub const A84: f64 = 1.70383925712239993810214054705E-1;
    pub const A85: f64 = 1.07262030446373284651809199168E-1;
    pub const A86: f64 = -1.53194377486244017527936158236E-2;
    pub const A87: f64 = 8.27378916381402288758473766002E-3;
    pub const A91: f64 = 6.24110958716075717114429577812E-1;
    pub const A94: f64 = -3.36089262944694129406857109825E0;
    pub const A95: f64 = -8.68219346841726006818189891453E-1;
    pub const A96: f64 = 2.75920996994467083049415600797E1;
    pub const A97: f64 = 2.01540675504778934086186788979E1;
    pub const A98: f64 = -4.34898841810699588477366255144E1;
    pub const A101: f64 = 4.77662536438264365890433908527E-1;
    pub const A104: f64 = -2.48811461997166764192642586468E0;
    pub const A105: f64 = -5.90290826836842996371446475743E-1;
    pub const A106: f64 = 2.12300514481811942347288949897E1;
    pub const A107: f64 = 1.52792336328824235832596922938E1;
    pub const A108: f64 = -3.32882109689848629194453265587E1;
    pub const A109: f64 = -2.03312017085086261358222928593E-2;
    pub const A111: f64 = -9.3714243008598732571704021658E-1;
    pub const A114: f64 = 5.18637242884406370830023853209E0;
    pub const A115: f64 = 1.09143734899672957818500254654E0;
    pub const A116: f64 = -8.14978701074692612513997267357E0;
    pub const A117: f64 = -1.85200656599969598641566180701E1;
    pub const A118: f64 = 2.27394870993505042818970056734E1;
    pub const A119: f64 = 2.49360555267965238987089396762E0;
    pub const A1110: f64 = -3.0467644718982195003823669022E0;
    pub const A121: f64 = 2.27331014751653820792359768449E0;
    pub const A124: f64 = -1.05344954667372501984066689879E1;
    pub const A125: f64 = -2.00087205822486249909675718444E0;
    pub const A126: f64 = -1.79589318631187989172765950534E1;
    pub const A127: f64 = 2.79488845294199600508499808837E1;
    pub const A128: f64 = -2.85899827713502369474065508674E0;
    pub const A129: f64 = -8.87285693353062954433549289258E0;
    pub const A1210: f64 = 1.23605671757943030647266201528E1;
    pub const A1211: f64 = 6.43392746015763530355970484046E-1;

    pub const B1: f64 = 5.42937341165687622380535766363E-2;
    pub const B6: f64 = 4.45031289275240888144113950566E0;
    pub const B7: f64 = 1.89151789931450038304281599044E0;
    pub const B8: f64 = -5.8012039600105847814672114227E0;
    pub const B9: f64 = 3.1116436695781989440891606237E-1;
    pub const B10: f64 = -1.52160949662516078556178806805E-1;
    pub const B11: f64 = 2.01365400804030348374776537501E-1;
    pub const B12: f64 = 4.47106157277725905176885569043E-2;

    pub const BHH1: f64 = 0.244094488188976377952755905512E+00;
    pub const BHH2: f64 = 0.733846688281611857341361741547E+00;
    pub const BHH3: f64 = 0.220588235294117647058823529412E-01;

    pub const ER1: f64 = 0.1312004499419488073250102996E-01;
    pub const ER6: f64 = -0.1225156446376204440720569753E+01;
    pub const ER7: f64 = -0.4957589496572501915214079952E+00;
    pub const ER8: f64 = 0.1664377182454986536961530415E+01;
    pub const ER9: f64 = -0.3503288487499736816886487290E+00;
    pub const ER10: f64 = 0.3341791187130174790297318841E+00;
    pub const ER11: f64 = 0.8192320648511571246570742613E-01;
    pub const ER12: f64 = -0.2235530786388629525884427845E-01;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{Piece, Profile};

    struct Zero;
    impl PiecewiseFn for Zero {
        fn eval_on(&self, _x: f64, _l: f64) -> f64 {
            0.0
        }
        fn breakpoints(&self) -> Vec<f64> {
            vec![]
        }
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn free_plane_wave_keeps_unit_modulus() {
        let k = 1.7;
        let tr = integrate(&Zero, c(k * k), None, 0.0, 10.0, (c(1.0), I * k), &[]).unwrap();
        for (x, y) in tr.grid.iter().zip(&tr.y) {
            assert!((y.norm() - 1.0).abs() < 1e-9, "x = {x}: |y| = {}", y.norm());
            assert!((y - (I * k * x).exp()).norm() < 1e-9);
        }
    }

    #[test]
    fn near_coincident_stops_are_merged_alike_in_both_directions() {
        let k = 1.3;
        let stops = [1.0, 1.0 - 4e-15, 2.0 + 1e-15, 0.5];
        let fwd = integrate(&Zero, c(k * k), None, 0.0, 2.0, (c(1.0), I * k), &stops).unwrap();
        let y_end = fwd.y[fwd.len() - 1];
        assert!((y_end - (I * k * 2.0).exp()).norm() < 1e-9);
        let solver = Dop853::default();
        let rhs = |_x: f64, _l: f64, y: &[C64; 2]| [y[1], -c(k * k) * y[0]];
        let a = solver.solve(rhs, 0.0, 2.0, &stops, [c(1.0), I * k]).unwrap();
        let b = solver.solve(rhs, 2.0, 0.0, &stops, [c(1.0), I * k]).unwrap();
        let xa: Vec<f64> = a.iter().map(|n| n.x).collect();
        let mut xb: Vec<f64> = b.iter().map(|n| n.x).collect();
        xb.reverse();
        assert_eq!(xa, xb);
        assert_eq!(xa.len(), 4);
    }

    #[test]
    fn wronskian_constant_for_real_potential() {
        let w = Profile::new(vec![
            Piece::constant(-1.0, 0.5, -3.0),
            Piece::linear(0.5, 2.0, 1.0, 2.0),
        ])
        .unwrap();
        let zeta = C64::new(0.3, 0.8);
        let out: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
        let a = integrate(&w, zeta, None, -2.0, 2.0, (c(1.0), c(0.0)), &out).unwrap();
        let b = integrate(&w, zeta, None, -2.0, 2.0, (c(0.0), c(1.0)), &out).unwrap();
        for x in &out {
            let (i, j) = (a.find(*x).unwrap(), b.find(*x).unwrap());
            let wr = a.y[i] * b.dy[j] - a.dy[i] * b.y[j];
            assert!((wr - 1.0).norm() < 1e-9 * 4.0, "x = {x}: {wr}");
        }
    }

    #[test]
    fn origin_pair_trivial_cases() {
        let p = origin_pair(0.0, c(0.0), 0.1, None).unwrap();
        assert!((p.phi - 0.1).norm() < 1e-16 && (p.dphi - 1.0).norm() < 1e-16);
        assert!((p.psi - 1.0).norm() < 1e-16 && p.dpsi.norm() < 1e-16);

        let k: f64 = 2.3;
        let x0 = 0.4;
        let p = origin_pair(0.0, c(k * k), x0, None).unwrap();
        assert!((p.phi - (k * x0).sin() / k).norm() < 1e-15);
        assert!((p.psi - (k * x0).cos()).norm() < 1e-15);
        assert!((p.dpsi + k * (k * x0).sin()).norm() < 1e-14);
    }

    #[test]
    fn coulomb_series_coefficients() {
        let s = OriginSeries::new(1.0, c(0.0), 6);
        assert!((s.a[2] - 0.5).norm() < 1e-16);
        assert!((s.a[3] - 1.0 / 12.0).norm() < 1e-16);
        assert!((s.c[1] + 1.0).norm() < 1e-16);
    }

    #[test]
    fn wronskian_at_handoff_is_one() {
        for (q, zeta) in [(1.0, C64::new(0.0, 1.0)), (-2.5, C64::new(-1.0, 0.3)), (0.7, c(4.0))] {
            for x0 in [1e-4, 1e-3, 0.3] {
                let p = origin_pair(q, zeta, x0, None).unwrap();
                let w = p.dphi * p.psi - p.phi * p.dpsi;
                assert!((w - 1.0).norm() < 1e-12, "q = {q}, x0 = {x0}: {w}");
            }
        }
    }

    #[test]
    fn series_too_far_out_is_rejected() {
        assert!(matches!(
            origin_pair(40.0, C64::new(0.0, 400.0), 50.0, None),
            Err(Error::SeriesDivergence { .. })
        ));
    }

    #[test]
    fn integration_matches_series_for_coulomb_phi() {
        let spec = CoulombSpec::core(1.0, 1.0, 1.0);
        let zeta = C64::new(0.5, 0.5);
        let x0 = 1e-3;
        let p = origin_pair(1.0, zeta, x0, None).unwrap();
        let tr = integrate(&spec, zeta, None, x0, 0.5, (p.phi, p.dphi), &[]).unwrap();
        let far = origin_pair(1.0, zeta, 0.5, Some(80)).unwrap();
        let n = tr.len() - 1;
        assert!((tr.y[n] - far.phi).norm() < 1e-8, "{} vs {}", tr.y[n], far.phi);
        assert!((tr.dy[n] - far.dphi).norm() < 1e-8);
        let tr = integrate(&spec, zeta, None, x0, 0.5, (p.psi, p.dpsi), &[]).unwrap();
        let n = tr.len() - 1;
        assert!((tr.y[n] - far.psi).norm() < 1e-8, "{} vs {}", tr.y[n], far.psi);
    }

    /// Independent oracle for the normalisation of `psi`: shoot a solution
    /// from `x = 1` down to `x = 1e-8` and read off `y(+0)` and
    /// `lim (y' - q y(0) ln x)` directly.
    #[test]
    fn boundary_values_match_direct_shooting() {
        let q = 1.0;
        let spec = CoulombSpec::core(q, q, 2.0);
        let zeta = c(0.0);
        let x0 = 1e-3;
        let tr = integrate(&spec, zeta, None, 1.0, 1e-8, (c(1.0), c(0.0)), &[x0]).unwrap();
        let (y_small, dy_small) = (tr.y[0], tr.dy[0]);
        let b_direct = dy_small - q * y_small * (1e-8f64).ln();
        let i = tr.find(x0).unwrap();
        let p = origin_pair(q, zeta, x0, None).unwrap();
        let (u0, b) = p.boundary_values(Side::Right, tr.y[i], tr.dy[i]);
        assert!((u0 - y_small).norm() < 1e-6, "{u0} vs {y_small}");
        assert!((b - b_direct).norm() < 1e-5, "{b} vs {b_direct}");
    }

    #[test]
    fn left_side_parity_transform() {
        let spec = CoulombSpec::core(0.8, -0.3, 1.0);
        let zeta = C64::new(0.2, 1.0);
        let x0 = 1e-3;
        let tr = integrate(&spec, zeta, None, -1.0, -1e-8, (c(1.0), c(0.5)), &[-x0]).unwrap();
        let n = tr.len() - 1;
        let (y_small, dy_small) = (tr.y[n], tr.dy[n]);
        let b_direct = dy_small - 0.8 * y_small * (1e-8f64).ln();
        let i = tr.find(-x0).unwrap();
        let p = origin_pair(-0.8, zeta, x0, None).unwrap();
        let (u0, b) = p.boundary_values(Side::Left, tr.y[i], tr.dy[i]);
        assert!((u0 - y_small).norm() < 1e-6);
        assert!((b - b_direct).norm() < 1e-5, "{b} vs {b_direct}");
    }

    #[test]
    fn decaying_branch_free() {
        let spec = CoulombSpec::core(0.0, 0.0, 1.0);
        let tr = exterior_solution(&spec, I, Side::Right, Exterior::Decaying, 3.0, 0.5, &[1.0, 2.0]).unwrap();
        let r = tr.y[tr.find(2.0).unwrap()] / tr.y[tr.find(1.0).unwrap()];
        assert!((r.norm() - (-(0.5f64).sqrt()).exp()).abs() < 1e-9);
        assert!(((-(0.5f64).sqrt()).exp() - 0.4931).abs() < 1e-4);

        let tr = exterior_solution(&spec, c(-1.0), Side::Left, Exterior::Decaying, 3.0, 0.5, &[-2.0]).unwrap();
        let y = tr.y[tr.find(-2.0).unwrap()];
        assert!((y - (-2.0f64).exp()).norm() < 1e-10);
        assert!(decaying_solution(&spec, c(2.0), Side::Right).is_err());
    }

    #[test]
    fn handoff_radius_invariance() {
        let spec = CoulombSpec::core(0.0, 1.0, 1.0);
        let mut vals = vec![];
        for x0 in [1e-2, 1e-3, 1e-4] {
            let tr = exterior_solution(&spec, I, Side::Right, Exterior::Decaying, 1.0, x0, &[]).unwrap();
            let p = origin_pair(1.0, I, x0, None).unwrap();
            vals.push(p.boundary_values(Side::Right, tr.y[0], tr.dy[0]));
        }
        for v in &vals[1..] {
            assert!((v.0 - vals[0].0).norm() < 1e-7);
            assert!((v.1 - vals[0].1).norm() < 1e-7, "{:?} vs {:?}", v, vals[0]);
        }
    }

    #[test]
    fn particular_solution_near_origin_solves_ode() {
        let q = 1.3;
        let zeta = C64::new(0.1, 1.0);
        let p = origin_pair(q, zeta, 0.05, None).unwrap();
        let f = Profile::new(vec![Piece::linear(-1.0, 1.0, 1.0, 2.0)]).unwrap();
        // Compare with direct integration from a tiny start using the same
        // leading behaviour y ~ -f(0) x^2 / 2.
        let x = 0.05;
        let (y, dy) = p.particular_near(Side::Right, x, &f).unwrap();
        let x_start = 1e-6;
        let (ys, dys) = p.particular_near(Side::Right, x_start, &f).unwrap();
        let spec = CoulombSpec::core(q, q, 1.0);
        let tr = integrate(&spec, zeta, Some(&f), x_start, x, (ys, dys), &[]).unwrap();
        let n = tr.len() - 1;
        assert!((tr.y[n] - y).norm() < 1e-10 * (1.0 + y.norm()), "{} vs {y}", tr.y[n]);
        assert!((tr.dy[n] - dy).norm() < 1e-9 * (1.0 + dy.norm()));
        let (y0, _) = p.particular_near(Side::Right, 1e-9, &f).unwrap();
        assert!(y0.norm() < 1e-17);
    }
}
