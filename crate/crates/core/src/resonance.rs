//! Zero-energy resonances of the inner profile `U` on `(-1, 1)`.
//!
//! The half-bound state is the solution of `-h'' + U h = 0` with
//! `h(-1) = 1`, `h'(-1) = 0`; `U` is resonant when `h'(1)` vanishes, and
//! then `theta = h(1)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::odes::{Dop853, Tolerances};
use crate::potentials::{PiecewiseFn, Profile, RegularizedFamily};
use crate::{Error, Result, C64};

/// Relative shooting tolerance: `U` is resonant when
/// `|h'(1)| <= tol * max |h|`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Number of uniform grid points used to bracket resonant couplings.
pub const COUPLING_GRID: usize = 400;

const SAMPLES: usize = 201;

fn shooting_tol() -> Tolerances {
    Tolerances {
        rtol: 1e-13,
        atol: 1e-15,
    }
}

/// Half-bound state sampled on `[-1, 1]`.
#[derive(Debug, Clone, Serialize)]
pub struct Sampled {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
}

impl Sampled {
    pub fn max_abs(&self) -> f64 {
        self.h.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Shooting result for `U`, completed with the moments of a family by
/// [`resonance_functionals`].
#[derive(Debug, Clone, Serialize)]
pub struct ResonanceData {
    pub h0: Sampled,
    pub theta: f64,
    /// `h'(1)` of the sampled state.
    pub derivative_residual: f64,
    pub resonant: bool,
    /// Not resonant, but the residual is within ten times the threshold.
    pub near_threshold: bool,
    /// Absolute threshold `tol * max |h|` the residual was compared against.
    pub threshold: f64,
    pub mu: Option<f64>,
    pub kappa_moment: Option<f64>,
    pub matching_residual: Option<f64>,
    #[serde(skip)]
    u: Profile,
}

impl ResonanceData {
    /// Value `h(-1)` the state was shot from.
    pub fn start_value(&self) -> f64 {
        self.h0.h[0]
    }

    pub fn profile(&self) -> &Profile {
        &self.u
    }
}

fn shoot<const N: usize, F>(rhs: F, stops: &[f64], y0: [C64; N]) -> Result<Vec<crate::odes::Node<N>>>
where
    F: FnMut(f64, f64, &[C64; N]) -> [C64; N],
{
    Dop853::with_tol(shooting_tol()).solve(rhs, -1.0, 1.0, stops, y0)
}

fn sample_stops(u: &Profile) -> Vec<f64> {
    let mut s: Vec<f64> = (0..SAMPLES)
        .map(|i| -1.0 + 2.0 * i as f64 / (SAMPLES - 1) as f64)
        .collect();
    s.extend(u.breakpoints());
    s
}

/// Shoots `-h'' + U h = 0` from `h(-1) = 1`, `h'(-1) = 0`.
pub fn half_bound_state(u: &Profile, tol: f64) -> Result<ResonanceData> {
    half_bound_state_from(u, 1.0, tol)
}

/// As [`half_bound_state`] with `h(-1) = start`; `theta` is the ratio
/// `h(1) / h(-1)`.
pub fn half_bound_state_from(u: &Profile, start: f64, tol: f64) -> Result<ResonanceData> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    if start == 0.0 || !start.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "start value must be finite and non-zero, got {start}"
        )));
    }
    u.check_within(-1.0, 1.0, "U")?;
    let nodes = shoot(
        |t, loc, y: &[C64; 2]| [y[1], y[0] * u.eval_on(t, loc)],
        &sample_stops(u),
        [C64::new(start, 0.0), C64::new(0.0, 0.0)],
    )?;
    let h0 = Sampled {
        t: nodes.iter().map(|n| n.x).collect(),
        h: nodes.iter().map(|n| n.y[0].re).collect(),
        dh: nodes.iter().map(|n| n.y[1].re).collect(),
    };
    let last = nodes.len() - 1;
    let theta = h0.h[last] / start;
    let derivative_residual = h0.dh[last];
    let threshold = tol * h0.max_abs();
    let resonant = derivative_residual.abs() <= threshold && theta != 0.0;
    let near_threshold = !resonant && derivative_residual.abs() <= 10.0 * threshold;
    Ok(ResonanceData {
        h0,
        theta,
        derivative_residual,
        resonant,
        near_threshold,
        threshold,
        mu: None,
        kappa_moment: None,
        matching_residual: None,
        u: u.clone(),
    })
}

/// Fills in `mu = int V h0^2`, `int kappa h0^2` and the matching residual
/// `theta^2 q_+ - q_- - int kappa h0^2`.
///
/// Moments are divided by `h(-1)^2`, so data shot from any start value
/// gives the same result.
pub fn resonance_functionals(data: &ResonanceData, family: &RegularizedFamily) -> Result<ResonanceData> {
    if !data.resonant {
        return Err(Error::Contract(format!(
            "resonance functionals need resonant data (|h'(1)| = {:.3e} > {:.3e})",
            data.derivative_residual.abs(),
            data.threshold
        )));
    }
    if data.u != family.u {
        return Err(Error::Contract(
            "resonance data was computed for a different profile U".into(),
        ));
    }
    let start = data.start_value();
    let (u, v, kappa) = (&family.u, &family.v, &family.kappa);
    let nodes = shoot(
        |t, loc, y: &[C64; 4]| {
            let h2 = y[0] * y[0];
            [
                y[1],
                y[0] * u.eval_on(t, loc),
                h2 * v.eval_on(t, loc),
                h2 * kappa.eval_on(t, loc),
            ]
        },
        &family.inner_breakpoints(),
        [
            C64::new(start, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ],
    )?;
    let end = nodes[nodes.len() - 1].y;
    let norm = start * start;
    let mu = end[2].re / norm;
    let kappa_moment = end[3].re / norm;
    let c = &family.coulomb;
    let mut out = data.clone();
    out.mu = Some(mu);
    out.kappa_moment = Some(kappa_moment);
    out.matching_residual = Some(data.theta * data.theta * c.q_plus - c.q_minus - kappa_moment);
    Ok(out)
}

/// `h'(1)` for the profile `alpha U` with `h(-1) = 1`, `h'(-1) = 0`.
pub fn shooting_residual(u: &Profile, alpha: f64) -> Result<f64> {
    let nodes = shoot(
        |t, loc, y: &[C64; 2]| [y[1], y[0] * (alpha * u.eval_on(t, loc))],
        &u.breakpoints(),
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    )?;
    Ok(nodes[nodes.len() - 1].y[1].re)
}

/// Couplings `alpha` in `range` for which `alpha U` is resonant.
///
/// Roots are bracketed by sign changes on a uniform grid and refined by
/// bisection until the bracket is shorter than `tol`. The trivial root
/// `alpha = 0` is not reported.
pub fn find_resonant_couplings(u: &Profile, range: (f64, f64), tol: f64) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "coupling range must be finite with lo < hi, got [{lo}, {hi}]"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    if u.is_zero() {
        return Err(Error::Contract(
            "U vanishes identically, so every coupling is resonant".into(),
        ));
    }
    let n = COUPLING_GRID;
    let alphas: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let values = alphas
        .par_iter()
        .map(|&a| shooting_residual(u, a))
        .collect::<Result<Vec<f64>>>()?;

    let trivial = |a: f64| a.abs() <= tol;
    let mut brackets = vec![];
    for i in 0..n {
        if values[i] == 0.0 {
            if !trivial(alphas[i]) {
                brackets.push((alphas[i], alphas[i], 0.0));
            }
        } else if i + 1 < n && values[i] * values[i + 1] < 0.0 {
            brackets.push((alphas[i], alphas[i + 1], values[i]));
        }
    }
    let roots = brackets
        .par_iter()
        .map(|&(mut a, mut b, mut fa)| {
            while b - a > tol {
                let m = 0.5 * (a + b);
                let fm = shooting_residual(u, m)?;
                if fm == 0.0 {
                    return Ok(m);
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(roots.into_iter().filter(|a| !trivial(*a)).collect())
}
