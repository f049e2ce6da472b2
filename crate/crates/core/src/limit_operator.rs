//! The limit operator: classification of a family, resolvent with coupling
//! conditions at the Coulomb point, and plane-wave scattering.
//!
//! A solution near the origin is described by `u(±0)` and
//! `b_±(u) = lim (u'(x) - q_± u(±0) ln|x|)`. The resonant limit couples the
//! half-lines by `u(+0) = theta u(-0)` and `theta b_+ - b_- = mu u(-0)`;
//! the decoupled limit imposes `u(-0) = u(+0) = 0`.

use serde::Serialize;

use crate::odes::{
    decay_root, default_x0, exterior_solution, exterior_values, integrate, origin_pair, Dop853, Exterior, Node,
    OriginPair, SolutionTrace, TraceSide,
};
use crate::potentials::{CoulombSpec, FamilyForm, PiecewiseFn, RegularizedFamily, Side};
use crate::resonance::{half_bound_state, resonance_functionals, ResonanceData, DEFAULT_TOL};
use crate::{Error, Result, C64};

/// Default tolerance on the normalised matching residual.
pub const MATCH_TOL: f64 = 1e-8;

/// Largest condition number accepted for the coupling system.
pub const MAX_CONDITION: f64 = 1e12;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum LimitKind {
    ResonantPI { theta: f64, mu: f64 },
    DirichletSum,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitOperator {
    #[serde(flatten)]
    pub kind: LimitKind,
    pub spec: CoulombSpec,
}

impl LimitOperator {
    pub fn resonant(spec: CoulombSpec, theta: f64, mu: f64) -> Result<Self> {
        if theta == 0.0 || !theta.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling needs finite theta != 0 and finite mu, got theta = {theta}, mu = {mu}"
            )));
        }
        Ok(Self {
            kind: LimitKind::ResonantPI { theta, mu },
            spec,
        })
    }

    pub fn dirichlet(spec: CoulombSpec) -> Self {
        Self {
            kind: LimitKind::DirichletSum,
            spec,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            LimitKind::ResonantPI { .. } => "ResonantPI",
            LimitKind::DirichletSum => "DirichletSum",
        }
    }
}

/// `u(-0), u(+0), b_-(u), b_+(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryData {
    pub u_minus0: C64,
    pub u_plus0: C64,
    pub b_minus: C64,
    pub b_plus: C64,
}

impl BoundaryData {
    /// Residuals `(u(+0) - theta u(-0), theta b_+ - b_- - mu u(-0))`.
    pub fn coupling_residuals(&self, theta: f64, mu: f64) -> (C64, C64) {
        (
            self.u_plus0 - self.u_minus0 * theta,
            self.b_plus * theta - self.b_minus - self.u_minus0 * mu,
        )
    }

    /// Largest violation of the conditions of `kind`.
    pub fn condition_residual(&self, kind: LimitKind) -> f64 {
        match kind {
            LimitKind::ResonantPI { theta, mu } => {
                let (r1, r2) = self.coupling_residuals(theta, mu);
                r1.norm().max(r2.norm())
            }
            LimitKind::DirichletSum => self.u_minus0.norm().max(self.u_plus0.norm()),
        }
    }
}

/// Classification of a family together with the resonance data behind it.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub limit: LimitOperator,
    pub resonance: ResonanceData,
    /// `|theta^2 q_+ - q_- - int kappa h0^2| / (1 + |theta^2 q_+| + |q_-|)`,
    /// present when `U` is resonant.
    pub normalized_residual: Option<f64>,
    pub warning: Option<String>,
}

/// Decides between the coupled and the decoupled limit.
///
/// `tol` bounds the normalised matching residual. Near-threshold cases are
/// classified normally and carry a warning. The modified family has no
/// inner profiles in the required form and is rejected.
pub fn classify_limit(family: &RegularizedFamily, tol: f64) -> Result<Classification> {
    if family.form == FamilyForm::Modified {
        return Err(Error::Contract(format!(
            "family `{}` is not of the ln(eps)/eps kappa form; use the penetrability sweep",
            family.name
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }
    let spec = family.coulomb.clone();
    let data = half_bound_state(&family.u, DEFAULT_TOL)?;
    let mut warnings = vec![];
    if data.near_threshold {
        warnings.push(format!(
            "U is close to resonant: |h'(1)| = {:.3e}, threshold {:.3e}",
            data.derivative_residual.abs(),
            data.threshold
        ));
    }
    if !data.resonant {
        return Ok(Classification {
            limit: LimitOperator::dirichlet(spec),
            resonance: data,
            normalized_residual: None,
            warning: join(warnings),
        });
    }
    let data = resonance_functionals(&data, family)?;
    let residual = data.matching_residual.expect("set by resonance_functionals");
    let (q_minus, q_plus) = (spec.q_minus, spec.q_plus);
    let scale = 1.0 + (data.theta * data.theta * q_plus).abs() + q_minus.abs();
    let normalized = residual.abs() / scale;
    if normalized > tol && normalized <= 10.0 * tol {
        warnings.push(format!(
            "matching residual {normalized:.3e} is within 10x of the tolerance {tol:.1e}"
        ));
    }
    let limit = if normalized <= tol {
        LimitOperator::resonant(spec, data.theta, data.mu.expect("set by resonance_functionals"))?
    } else {
        LimitOperator::dirichlet(spec)
    };
    Ok(Classification {
        limit,
        resonance: data,
        normalized_residual: Some(normalized),
        warning: join(warnings),
    })
}

fn join(w: Vec<String>) -> Option<String> {
    if w.is_empty() {
        None
    } else {
        Some(w.join("; "))
    }
}

/// Output of [`apply_resolvent`].
#[derive(Debug, Clone)]
pub struct LimitResolvent {
    /// Samples on `[-l_box, l_box]` without the origin.
    pub trace: SolutionTrace,
    pub boundary: BoundaryData,
    /// `u = tails[0] exp(-i w x)` for `x <= -l_box` and
    /// `u = tails[1] exp(i w x)` for `x >= l_box`.
    pub tails: [C64; 2],
    pub w: C64,
    pub l_box: f64,
    pub x0: f64,
}

impl LimitResolvent {
    /// `u(x)`: closed form outside the box, trace interpolation inside.
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

/// One half-line: particular solution `P` (zero at the box edge) and
/// decaying solution `d`, both taken to `±x0` and reduced to boundary data.
struct HalfLine {
    side: Side,
    nodes: Vec<Node<4>>,
    pair: OriginPair,
    /// Boundary data of `P - y_p`, where `y_p` is the particular solution
    /// with zero boundary data near the origin.
    a_p: C64,
    b_p: C64,
    a_d: C64,
    b_d: C64,
}

fn sign(side: Side) -> f64 {
    match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    }
}

#[allow(clippy::too_many_arguments)]
fn half_line(
    spec: &CoulombSpec,
    zeta: C64,
    w: C64,
    f: &dyn PiecewiseFn,
    side: Side,
    l_box: f64,
    x0: f64,
    outputs: &[f64],
) -> Result<HalfLine> {
    let s = sign(side);
    let mut stops = spec.breakpoints();
    stops.extend(f.breakpoints());
    stops.extend_from_slice(outputs);
    let solver = Dop853 {
        record_steps: true,
        ..Dop853::default()
    };
    let (e, de) = exterior_values(w, side, s * l_box);
    let zero = C64::new(0.0, 0.0);
    let nodes = solver.solve(
        |x, loc, y: &[C64; 4]| {
            let pot = spec.eval_on(x, loc) - zeta;
            [y[1], pot * y[0] - f.eval_on(x, loc), y[3], pot * y[2]]
        },
        s * l_box,
        s * x0,
        &stops,
        [zero, zero, e, de],
    )?;
    let end = nodes[nodes.len() - 1].y;
    let pair = origin_pair(s * spec.q(side), zeta, x0, None)?;
    let (yp, dyp) = pair.particular_near(side, s * x0, f)?;
    let (a_p, b_p) = pair.boundary_values(side, end[0] - yp, end[1] - dyp);
    let (a_d, b_d) = pair.boundary_values(side, end[2], end[3]);
    Ok(HalfLine {
        side,
        nodes,
        pair,
        a_p,
        b_p,
        a_d,
        b_d,
    })
}

impl HalfLine {
    fn boundary(&self, c: C64) -> (C64, C64) {
        (self.a_p + c * self.a_d, self.b_p + c * self.b_d)
    }

    /// Samples of `P + c d` plus series samples inside `(0, x0)`.
    fn samples(&self, c: C64, f: &dyn PiecewiseFn, near: &[f64]) -> Result<Vec<(f64, C64, C64)>> {
        let mut out: Vec<(f64, C64, C64)> = self
            .nodes
            .iter()
            .map(|n| (n.x, n.y[0] + c * n.y[2], n.y[1] + c * n.y[3]))
            .collect();
        let (u0, b) = self.boundary(c);
        for &x in near {
            let (yp, dyp) = self.pair.particular_near(self.side, x, f)?;
            let (yh, dyh) = self.pair.solution_near(self.side, x, u0, b);
            out.push((x, yp + yh, dyp + dyh));
        }
        Ok(out)
    }
}

/// `(H - zeta)^{-1} f` for the limit operator, `Im zeta != 0`.
pub fn apply_resolvent(limit: &LimitOperator, zeta: C64, f: &dyn PiecewiseFn) -> Result<LimitResolvent> {
    apply_resolvent_at(limit, zeta, f, &[])
}

/// As [`apply_resolvent`], with `outputs` forced into the trace.
pub fn apply_resolvent_at(
    limit: &LimitOperator,
    zeta: C64,
    f: &dyn PiecewiseFn,
    outputs: &[f64],
) -> Result<LimitResolvent> {
    if zeta.im == 0.0 || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "resolvent needs Im zeta != 0, got {zeta}"
        )));
    }
    let spec = &limit.spec;
    let w = decay_root(zeta);
    let x0 = default_x0(spec);
    let mut l_box = spec.box_radius();
    if let Some((lo, hi)) = f.support() {
        l_box = l_box.max(lo.abs()).max(hi.abs());
    }
    for x in outputs {
        l_box = l_box.max(x.abs());
    }

    let pick = |side: Side| -> (Vec<f64>, Vec<f64>) {
        let s = sign(side);
        let on_side = outputs.iter().copied().filter(|x| x * s > 0.0);
        let (far, mut near): (Vec<f64>, Vec<f64>) = on_side.partition(|x| x.abs() >= x0);
        near.extend([0.5, 0.1, 1e-2, 1e-3].map(|r| s * r * x0));
        (far, near)
    };
    let (far_l, near_l) = pick(Side::Left);
    let (far_r, near_r) = pick(Side::Right);
    let left = half_line(spec, zeta, w, f, Side::Left, l_box, x0, &far_l)?;
    let right = half_line(spec, zeta, w, f, Side::Right, l_box, x0, &far_r)?;

    let (c_l, c_r) = match limit.kind {
        LimitKind::DirichletSum => (dirichlet_coefficient(&left)?, dirichlet_coefficient(&right)?),
        LimitKind::ResonantPI { theta, mu } => {
            // Unknowns (c_R, c_L):
            //   u(+0) = theta u(-0),  theta b_+ - b_- = mu u(-0).
            let m = [
                [right.a_d, -left.a_d * theta],
                [right.b_d * theta, -left.b_d - left.a_d * mu],
            ];
            let rhs = [
                left.a_p * theta - right.a_p,
                -right.b_p * theta + left.b_p + left.a_p * mu,
            ];
            let [c_r, c_l] = solve_2x2(m, rhs)?;
            (c_l, c_r)
        }
    };

    let (u_minus0, b_minus) = left.boundary(c_l);
    let (u_plus0, b_plus) = right.boundary(c_r);
    let mut samples = left.samples(c_l, f, &near_l)?;
    samples.extend(right.samples(c_r, f, &near_r)?);
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    let trace = SolutionTrace {
        grid: samples.iter().map(|s| s.0).collect(),
        y: samples.iter().map(|s| s.1).collect(),
        dy: samples.iter().map(|s| s.2).collect(),
        side: TraceSide::Full,
    };
    Ok(LimitResolvent {
        trace,
        boundary: BoundaryData {
            u_minus0,
            u_plus0,
            b_minus,
            b_plus,
        },
        tails: [c_l, c_r],
        w,
        l_box,
        x0,
    })
}

fn dirichlet_coefficient(h: &HalfLine) -> Result<C64> {
    let scale = h.a_d.norm().max(h.b_d.norm());
    if h.a_d.norm() <= 1e-12 * scale {
        return Err(Error::NearEigenvalue {
            module: "limit_operator",
            wronskian: h.a_d.norm() / scale,
        });
    }
    Ok(-h.a_p / h.a_d)
}

/// Solves a 2x2 system after scaling columns to unit size; fails when the
/// scaled condition number exceeds [`MAX_CONDITION`].
fn solve_2x2(mut m: [[C64; 2]; 2], rhs: [C64; 2]) -> Result<[C64; 2]> {
    let mut scale = [1.0; 2];
    for (j, s) in scale.iter_mut().enumerate() {
        let n = m[0][j].norm().max(m[1][j].norm());
        if n > 0.0 {
            *s = 1.0 / n;
            m[0][j] *= *s;
            m[1][j] *= *s;
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let frob2: f64 = m.iter().flatten().map(|v| v.norm_sqr()).sum();
    let condition = if det.norm() == 0.0 {
        f64::INFINITY
    } else {
        frob2 / det.norm()
    };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::DegenerateCoupling {
            module: "limit_operator",
            condition,
        });
    }
    let x0 = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
    let x1 = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det;
    Ok([x0 * scale[0], x1 * scale[1]])
}

/// Transmission and reflection amplitudes for a wave `exp(ikx)` incident
/// from the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scattering {
    pub k: f64,
    pub t: C64,
    pub r: C64,
}

impl Scattering {
    pub fn transmission_probability(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// `|T|^2 + |R|^2 - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.t.norm_sqr() + self.r.norm_sqr() - 1.0
    }
}

/// Coefficients `(alpha, beta)` of `y = alpha e^{ikx} + beta e^{-ikx}` from
/// `(y, y')` at `x`, where the potential vanishes.
pub(crate) fn plane_wave_split(k: f64, x: f64, y: C64, dy: C64) -> (C64, C64) {
    let ik = I * k;
    let e = (ik * x).exp();
    ((ik * y + dy) / (e * ik * 2.0), (ik * y - dy) * e / (ik * 2.0))
}

/// Scattering through the limit operator at energy `k^2`.
pub fn limit_transmission(limit: &LimitOperator, k: f64) -> Result<Scattering> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("wave number must be > 0, got {k}")));
    }
    let spec = &limit.spec;
    let zeta = C64::new(k * k, 0.0);
    let x0 = default_x0(spec);
    let l_box = spec.box_radius();
    let left_pair = origin_pair(-spec.q_minus, zeta, x0, None)?;
    let (u_minus0, b_minus) = match limit.kind {
        LimitKind::DirichletSum => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        LimitKind::ResonantPI { theta, mu } => {
            let right = exterior_solution(spec, zeta, Side::Right, Exterior::Outgoing, l_box, x0, &[])?;
            let right_pair = origin_pair(spec.q_plus, zeta, x0, None)?;
            let (u_plus0, b_plus) = right_pair.boundary_values(Side::Right, right.y[0], right.dy[0]);
            let u_minus0 = u_plus0 / theta;
            (u_minus0, b_plus * theta - u_minus0 * mu)
        }
    };
    let (y, dy) = left_pair.solution_at(Side::Left, u_minus0, b_minus);
    let tr = integrate(spec, zeta, None, -x0, -l_box, (y, dy), &[])?;
    let (alpha, beta) = plane_wave_split(k, -l_box, tr.y[0], tr.dy[0]);
    let t = match limit.kind {
        LimitKind::DirichletSum => C64::new(0.0, 0.0),
        LimitKind::ResonantPI { .. } => alpha.inv(),
    };
    Ok(Scattering { k, t, r: beta / alpha })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{builtin_catalog, Piece, Profile, TestFunction};
    use std::f64::consts::PI;

    fn free() -> CoulombSpec {
        CoulombSpec::core(0.0, 0.0, 1.0)
    }

    #[test]
    fn classify_free_profile_with_mean() {
        let mut fam = builtin_catalog("Q1").unwrap();
        fam.v = Profile::constant(-1.0, 1.0, 0.75);
        let c = classify_limit(&fam, MATCH_TOL).unwrap();
        match c.limit.kind {
            LimitKind::ResonantPI { theta, mu } => {
                assert_eq!(theta, 1.0);
                assert!((mu - 1.5).abs() < 1e-12);
            }
            k => panic!("{k:?}"),
        }
        assert!(c.warning.is_none());
    }

    #[test]
    fn classify_nonresonant_and_parity_cases() {
        let mut fam = builtin_catalog("Q3").unwrap();
        fam.u = Profile::constant(-1.0, 1.0, 1.0);
        assert_eq!(
            classify_limit(&fam, MATCH_TOL).unwrap().limit.kind,
            LimitKind::DirichletSum
        );

        let fam = RegularizedFamily::new(
            "well",
            CoulombSpec::core(1.0, 1.0, 1.0),
            Profile::new(vec![Piece::linear(-1.0, 1.0, 0.0, 1.0)]).unwrap(),
            Profile::constant(-1.0, 1.0, -PI * PI / 4.0),
            Profile::zero(),
        )
        .unwrap();
        match classify_limit(&fam, MATCH_TOL).unwrap().limit.kind {
            LimitKind::ResonantPI { theta, mu } => {
                assert!((theta + 1.0).abs() < 1e-10);
                assert!(mu.abs() < 1e-14);
            }
            k => panic!("{k:?}"),
        }
        assert!(classify_limit(&builtin_catalog("modified").unwrap(), MATCH_TOL).is_err());
    }

    #[test]
    fn classify_builtins() {
        let kind = |n: &str| {
            classify_limit(&builtin_catalog(n).unwrap(), MATCH_TOL)
                .unwrap()
                .limit
                .kind
        };
        assert_eq!(kind("Q0"), LimitKind::DirichletSum);
        assert_eq!(kind("Q1"), LimitKind::ResonantPI { theta: 1.0, mu: 0.0 });
        assert_eq!(kind("Q2"), LimitKind::DirichletSum);
        assert_eq!(kind("Q3"), LimitKind::ResonantPI { theta: 1.0, mu: 0.0 });
    }

    #[test]
    fn dirichlet_boundary_values_vanish() {
        let limit = LimitOperator::dirichlet(CoulombSpec::core(1.0, -1.0, 1.0));
        let f = TestFunction::bump(0.2, 0.5);
        let r = apply_resolvent(&limit, C64::new(0.5, 1.0), &f).unwrap();
        assert!(r.boundary.u_minus0.norm() < 1e-9 && r.boundary.u_plus0.norm() < 1e-9);
        assert!(r.boundary.b_plus.norm() > 1e-3);
    }

    #[test]
    fn free_line_matches_green_kernel() {
        let limit = LimitOperator::resonant(free(), 1.0, 0.0).unwrap();
        let zeta = I;
        let w = decay_root(zeta);
        let f = TestFunction::bump(0.3, 0.6);
        let xs: Vec<f64> = (-20..=20).map(|i| 0.15 * i as f64).collect();
        let r = apply_resolvent_at(&limit, zeta, &f, &xs).unwrap();
        for &x in &xs {
            let oracle = crate::quadrature::integrate(
                |s, _| (I * w * (x - s).abs()).exp() * f.value(s),
                -0.3,
                0.9,
                &[x.clamp(-0.3, 0.9)],
                Default::default(),
            )
            .unwrap()
                * (I / (w * 2.0));
            let got = r.value(x).unwrap();
            assert!((got - oracle).norm() < 1e-8, "x = {x}: {got} vs {oracle}");
        }
        // Closed-form tails.
        let far = r.value(5.0).unwrap();
        assert!((far - r.tails[1] * (I * w * 5.0).exp()).norm() < 1e-15);
    }

    #[test]
    fn odd_coupling_conditions_hold() {
        let limit = LimitOperator::resonant(CoulombSpec::core(1.0, 1.0, 1.0), -1.0, 0.0).unwrap();
        let f = TestFunction::bump(0.0, 0.7);
        let r = apply_resolvent(&limit, C64::new(-0.3, 2.0), &f).unwrap();
        let b = r.boundary;
        assert!((b.u_minus0 + b.u_plus0).norm() < 1e-8);
        assert!(b.condition_residual(limit.kind) < 1e-8);
        assert!(b.u_minus0.norm() > 1e-3);
    }

    #[test]
    fn trace_reproduces_boundary_data_at_handoff() {
        let spec = CoulombSpec::core(0.7, -1.2, 1.0);
        let limit = LimitOperator::resonant(spec, 1.3, 0.4).unwrap();
        let f = Profile::new(vec![Piece::linear(-0.8, 0.5, 1.0, -0.5)]).unwrap();
        let r = apply_resolvent(&limit, C64::new(1.0, 0.5), &f).unwrap();
        for side in [Side::Left, Side::Right] {
            let s = sign(side);
            let i = r.trace.find(s * r.x0).unwrap();
            let pair = origin_pair(s * limit.spec.q(side), C64::new(1.0, 0.5), r.x0, None).unwrap();
            let (yp, dyp) = pair.particular_near(side, s * r.x0, &f).unwrap();
            let (u0, b) = match side {
                Side::Left => (r.boundary.u_minus0, r.boundary.b_minus),
                Side::Right => (r.boundary.u_plus0, r.boundary.b_plus),
            };
            let (y, dy) = pair.solution_at(side, u0, b);
            assert!((y + yp - r.trace.y[i]).norm() < 1e-9);
            assert!((dy + dyp - r.trace.dy[i]).norm() < 1e-9);
        }
        assert!(r.boundary.condition_residual(limit.kind) < 1e-8);
    }

    #[test]
    fn delta_transmission() {
        for beta in [0.0, 1.0, -2.5] {
            let limit = LimitOperator::resonant(free(), 1.0, beta).unwrap();
            for k in [0.3, 1.0, 4.0] {
                let s = limit_transmission(&limit, k).unwrap();
                let ik = I * (2.0 * k);
                let expected = ik / (ik - beta);
                assert!(
                    (s.t - expected).norm() < 1e-9,
                    "beta {beta}, k {k}: {} vs {expected}",
                    s.t
                );
                assert!(s.unitarity_defect().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dirichlet_reflects_totally() {
        let limit = LimitOperator::dirichlet(CoulombSpec::core(1.0, -1.0, 1.0));
        let s = limit_transmission(&limit, 1.2).unwrap();
        assert_eq!(s.t, C64::new(0.0, 0.0));
        assert!((s.r.norm() - 1.0).abs() < 1e-9);
        assert!(limit_transmission(&limit, 0.0).is_err());
    }

    #[test]
    fn coulomb_core_is_unitary() {
        let limit = LimitOperator::resonant(CoulombSpec::core(1.0, -1.0, 1.0), 1.0, 0.3).unwrap();
        for k in [0.2, 1.0, 3.0] {
            let s = limit_transmission(&limit, k).unwrap();
            assert!(s.unitarity_defect().abs() < 1e-8, "k {k}: {}", s.unitarity_defect());
            assert!(s.t.norm() > 0.01);
        }
    }

    #[test]
    fn degenerate_coupling_is_reported() {
        let m = [
            [C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
        ];
        assert!(matches!(
            solve_2x2(m, [C64::new(1.0, 0.0); 2]),
            Err(Error::DegenerateCoupling { .. })
        ));
    }
}
