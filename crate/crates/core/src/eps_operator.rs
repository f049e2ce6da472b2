//! The regularised operators `H_eps` at fixed `eps`: resolvent and
//! scattering.
//!
//! The line is cut into `[-L, -eps]`, `(-eps, eps)` and `[eps, L]`. The outer
//! pieces are integrated in `x`; the inner piece in `t = x / eps`, where the
//! equation reads `v'' = (eps^2 W_eps(eps t) - eps^2 zeta) v - eps^2 f(eps t)`
//! and has bounded coefficients. Derivatives are converted with
//! `v' = eps y'` at `x = ±eps`.

use serde::Serialize;

use crate::limit_operator::{plane_wave_split, Scattering};
use crate::odes::{decay_root, exterior_values, Dop853, Node, SolutionTrace, TraceSide};
use crate::potentials::{PiecewiseFn, RegularizedFamily, Side};
use crate::{Error, Result, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Coefficients of the equation on the current region: `jac = dx/ds` for the
/// integration variable `s`, `coef = jac^2 (W - zeta)`, `f` the source at `x`.
struct Ctx {
    coef: C64,
    f: f64,
    jac: f64,
}

#[derive(Clone, Copy)]
enum Region {
    Outer { from: f64, to: f64 },
    Inner { from: f64, to: f64 },
}

/// Integrates a state through the three regions, starting at `-l_box`
/// (`forward`) or `l_box`. `deriv` lists the slots holding `d/dx` of another
/// slot; they are rescaled at the inner interfaces. Returned nodes carry `x`
/// and `d/dx` values, ordered in the direction of integration; the interface
/// points appear once from each adjacent region.
#[allow(clippy::too_many_arguments)]
fn propagate<const N: usize>(
    family: &RegularizedFamily,
    eps: f64,
    zeta: C64,
    f: Option<&dyn PiecewiseFn>,
    forward: bool,
    l_box: f64,
    y0: [C64; N],
    deriv: &[usize],
    outputs: &[f64],
    rhs: impl Fn(&Ctx, &[C64; N]) -> [C64; N],
) -> Result<Vec<Node<N>>> {
    let regions = if forward {
        [
            Region::Outer { from: -l_box, to: -eps },
            Region::Inner { from: -1.0, to: 1.0 },
            Region::Outer { from: eps, to: l_box },
        ]
    } else {
        [
            Region::Outer { from: l_box, to: eps },
            Region::Inner { from: 1.0, to: -1.0 },
            Region::Outer { from: -eps, to: -l_box },
        ]
    };
    let solver = Dop853::default();
    let f_breaks = f.map(|f| f.breakpoints()).unwrap_or_default();
    let eps2 = eps * eps;
    let mut state = y0;
    let mut out: Vec<Node<N>> = Vec::new();
    for region in regions {
        match region {
            Region::Outer { from, to } => {
                let mut stops = family.coulomb.breakpoints();
                stops.extend(&f_breaks);
                stops.extend(outputs.iter().filter(|x| x.abs() > eps));
                let nodes = solver.solve(
                    |x, loc, y: &[C64; N]| {
                        let ctx = Ctx {
                            coef: family.outer_on(eps, x, loc) - zeta,
                            f: f.map_or(0.0, |f| f.eval_on(x, loc)),
                            jac: 1.0,
                        };
                        rhs(&ctx, y)
                    },
                    from,
                    to,
                    &stops,
                    state,
                )?;
                state = nodes[nodes.len() - 1].y;
                out.extend(nodes);
            }
            Region::Inner { from, to } => {
                // Requested abscissae keep their exact x after the round trip
                // through t.
                let mut inner_out: Vec<(f64, f64)> = outputs
                    .iter()
                    .filter(|x| x.abs() < eps)
                    .map(|&x| (x / eps, x))
                    .collect();
                inner_out.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut stops = family.inner_breakpoints();
                stops.extend(f_breaks.iter().map(|b| b / eps));
                stops.extend(inner_out.iter().map(|p| p.0));
                for &k in deriv {
                    state[k] *= eps;
                }
                let nodes = solver.solve(
                    |t, loc, y: &[C64; N]| {
                        let x = eps * t;
                        let ctx = Ctx {
                            coef: C64::new(family.inner_scaled_on(eps, t, loc), 0.0) - zeta * eps2,
                            f: f.map_or(0.0, |f| f.eval_on(x, eps * loc)),
                            jac: eps,
                        };
                        rhs(&ctx, y)
                    },
                    from,
                    to,
                    &stops,
                    state,
                )?;
                state = nodes[nodes.len() - 1].y;
                for &k in deriv {
                    state[k] /= eps;
                }
                out.extend(nodes.into_iter().map(|mut n| {
                    for &k in deriv {
                        n.y[k] /= eps;
                    }
                    n.x = match inner_out.binary_search_by(|p| p.0.total_cmp(&n.x)) {
                        Ok(i) => inner_out[i].1,
                        Err(_) => eps * n.x,
                    };
                    n
                }));
            }
        }
    }
    Ok(out)
}

/// `y = (H_eps - zeta)^{-1} f` on `[-l_box, l_box]`.
#[derive(Debug, Clone)]
pub struct EpsResolventResult {
    pub eps: f64,
    pub zeta: C64,
    pub trace: SolutionTrace,
    /// Largest `|-y'' + (W_eps - zeta) y - f|` over probe points in the outer
    /// regions, with `y''` from five-point differences of `y'`.
    pub residual_norm: f64,
    /// Largest relative jump of `(y, y')` between the one-sided values at
    /// `x = ±eps`.
    pub interface_jump: f64,
    /// `y = tails[0] exp(-i w x)` for `x <= -l_box`, `tails[1] exp(i w x)`
    /// for `x >= l_box`.
    pub tails: [C64; 2],
    pub w: C64,
    pub l_box: f64,
}

impl EpsResolventResult {
    pub fn value(&self, x: f64) -> Option<C64> {
        if x >= self.l_box {
            Some(self.tails[1] * (I * self.w * x).exp())
        } else if x <= -self.l_box {
            Some(self.tails[0] * (-I * self.w * x).exp())
        } else {
            self.trace.eval(x)
        }
    }
}

/// Default sample abscissae: uniform in each outer region, geometric towards
/// `±eps`, and uniform in `t` inside.
fn default_samples(eps: f64, a: f64, l_box: f64) -> Vec<f64> {
    let mut xs = vec![];
    for i in 1..200 {
        let x = eps + (l_box - eps) * i as f64 / 200.0;
        xs.extend([x, -x]);
    }
    let decades = (a / eps).log10();
    for i in 1..40 {
        let x = eps * 10f64.powf(decades * i as f64 / 40.0);
        xs.extend([x, -x]);
    }
    for i in 1..100 {
        xs.push(eps * (-1.0 + 2.0 * i as f64 / 100.0));
    }
    xs
}

/// Probe points for the differential residual: the middle of every smooth
/// outer interval, kept clear of breakpoints.
fn residual_probes(breaks: &[f64], eps: f64, l_box: f64) -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|b| b.abs() > eps && b.abs() < l_box)
        .chain([-l_box, -eps, eps, l_box])
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges
        .windows(2)
        .filter(|w| w[0] >= eps || w[1] <= -eps)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (mid, (0.1 * (w[1] - w[0])).min(2e-3))
        })
        .collect()
}

/// Applies `(H_eps - zeta)^{-1}` to `f` by the Green's function of the two
/// decaying solutions.
pub fn apply_eps_resolvent(
    family: &RegularizedFamily,
    eps: f64,
    zeta: C64,
    f: &dyn PiecewiseFn,
) -> Result<EpsResolventResult> {
    apply_eps_resolvent_at(family, eps, zeta, f, &[])
}

/// As [`apply_eps_resolvent`] with `outputs` added to the default samples.
pub fn apply_eps_resolvent_at(
    family: &RegularizedFamily,
    eps: f64,
    zeta: C64,
    f: &dyn PiecewiseFn,
    outputs: &[f64],
) -> Result<EpsResolventResult> {
    family.check_eps(eps)?;
    if zeta.im == 0.0 || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "resolvent needs Im zeta != 0, got {zeta}"
        )));
    }
    let w = decay_root(zeta);
    let mut l_box = family.coulomb.box_radius();
    if let Some((lo, hi)) = f.support() {
        l_box = l_box.max(lo.abs()).max(hi.abs());
    }
    for x in outputs {
        l_box = l_box.max(x.abs());
    }

    let breaks = family.breakpoints(eps);
    let probes = residual_probes(&[breaks.clone(), f.breakpoints()].concat(), eps, l_box);
    let mut xs = default_samples(eps, family.coulomb.a, l_box);
    xs.extend(outputs.iter().filter(|x| **x != 0.0 && x.abs() < l_box));
    for &(x, h) in &probes {
        xs.extend([-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| x + k * h));
    }

    let green_rhs = |sign: f64| move |c: &Ctx, y: &[C64; 3]| [y[1], c.coef * y[0], y[0] * (sign * c.jac * c.f)];
    let (el, del) = exterior_values(w, Side::Left, -l_box);
    let (er, der) = exterior_values(w, Side::Right, l_box);
    let zero = C64::new(0.0, 0.0);
    let fwd = propagate(
        family,
        eps,
        zeta,
        Some(f),
        true,
        l_box,
        [el, del, zero],
        &[1],
        &xs,
        green_rhs(1.0),
    )?;
    let mut bwd = propagate(
        family,
        eps,
        zeta,
        Some(f),
        false,
        l_box,
        [er, der, zero],
        &[1],
        &xs,
        green_rhs(-1.0),
    )?;
    bwd.reverse();
    if fwd.len() != bwd.len() {
        return Err(Error::Numerical {
            module: "eps_operator",
            message: format!("pass grids differ ({} vs {} nodes)", fwd.len(), bwd.len()),
        });
    }

    // Wronskian at the centre of the inner region.
    let mid = fwd.iter().position(|n| n.x == 0.0).unwrap_or(fwd.len() / 2);
    let (l, r) = (fwd[mid].y, bwd[mid].y);
    let wr = l[0] * r[1] - l[1] * r[0];
    let size = (l[0] * r[1]).norm() + (l[1] * r[0]).norm();
    if wr.norm() < 1e-12 * size {
        return Err(Error::NearEigenvalue {
            module: "eps_operator",
            wronskian: wr.norm() / size,
        });
    }

    let mut samples: Vec<(f64, C64, C64)> = Vec::with_capacity(fwd.len());
    for (a, b) in fwd.iter().zip(&bwd) {
        if a.x != b.x {
            return Err(Error::Numerical {
                module: "eps_operator",
                message: format!("pass grids differ at x = {:.6e} / {:.6e}", a.x, b.x),
            });
        }
        let (ul, ur) = (a.y, b.y);
        let y = -(ur[0] * ul[2] + ul[0] * ur[2]) / wr;
        let dy = -(ur[1] * ul[2] + ul[1] * ur[2]) / wr;
        samples.push((a.x, y, dy));
    }

    // One-sided values at +-eps appear as adjacent duplicates.
    let mut interface_jump: f64 = 0.0;
    for pair in samples.windows(2) {
        if pair[0].0 == pair[1].0 {
            let scale = 1.0 + pair[0].1.norm() + pair[0].2.norm();
            let jump = (pair[0].1 - pair[1].1).norm().max((pair[0].2 - pair[1].2).norm());
            interface_jump = interface_jump.max(jump / scale);
        }
    }
    samples.dedup_by(|a, b| a.0 == b.0);
    let trace = SolutionTrace {
        grid: samples.iter().map(|s| s.0).collect(),
        y: samples.iter().map(|s| s.1).collect(),
        dy: samples.iter().map(|s| s.2).collect(),
        side: TraceSide::Full,
    };

    let mut residual_norm: f64 = 0.0;
    for &(x, h) in &probes {
        let at = |k: f64| trace.find(x + k * h).map(|i| (trace.y[i], trace.dy[i]));
        let (Some(m2), Some(m1), Some(c), Some(p1), Some(p2)) = (at(-2.0), at(-1.0), at(0.0), at(1.0), at(2.0)) else {
            continue;
        };
        let d2 = (m2.1 - m1.1 * 8.0 + p1.1 * 8.0 - p2.1) / (12.0 * h);
        let res = -d2 + (family.outer_on(eps, x, x) - zeta) * c.0 - f.eval(x);
        residual_norm = residual_norm.max(res.norm());
    }

    let last = fwd.len() - 1;
    Ok(EpsResolventResult {
        eps,
        zeta,
        trace,
        residual_norm,
        interface_jump,
        tails: [-bwd[0].y[2] / wr, -fwd[last].y[2] / wr],
        w,
        l_box,
    })
}

/// Scattering of `H_eps` at energy `k^2` with the determinant of the transfer
/// matrix across `[-L, L]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsScattering {
    pub eps: f64,
    #[serde(flatten)]
    pub scattering: Scattering,
    pub transfer_det: C64,
}

/// `T_eps(k)`, `R_eps(k)` for a wave incident from the left.
pub fn eps_transmission(family: &RegularizedFamily, eps: f64, k: f64) -> Result<EpsScattering> {
    family.check_eps(eps)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("wave number must be > 0, got {k}")));
    }
    let zeta = C64::new(k * k, 0.0);
    let l_box = family.coulomb.box_radius();
    let (e, de) = exterior_values(C64::new(k, 0.0), Side::Right, l_box);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let nodes = propagate(
        family,
        eps,
        zeta,
        None,
        false,
        l_box,
        [e, de, one, zero, zero, one],
        &[1, 3, 5],
        &[],
        |c: &Ctx, y: &[C64; 6]| [y[1], c.coef * y[0], y[3], c.coef * y[2], y[5], c.coef * y[4]],
    )?;
    let end = nodes[nodes.len() - 1].y;
    let transfer_det = end[2] * end[5] - end[4] * end[3];
    let (alpha, beta) = plane_wave_split(k, -l_box, end[0], end[1]);
    Ok(EpsScattering {
        eps,
        scattering: Scattering {
            k,
            t: alpha.inv(),
            r: beta / alpha,
        },
        transfer_det,
    })
}
