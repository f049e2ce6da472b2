//! Coulomb-like background potentials, their `eps`-regularizations and the
//! distributional pairing diagnostic.
//!
//! A [`RegularizedFamily`] describes, for every `0 < eps < a`,
//!
//! ```text
//! W_eps(x) = Q(x)                                              |x| > eps
//!          = ln(eps)/eps kappa(x/eps) + eps^-2 U(x/eps) + eps^-1 V(x/eps)   |x| < eps
//! ```
//!
//! where `Q(x) = q_-/x` on `(-a, 0)`, `q_+/x` on `(0, a)` and a compactly
//! supported tail elsewhere.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quadrature::{self, QuadOptions};
use crate::{Error, Result};

/// A real function that is smooth between a finite list of breakpoints.
///
/// `eval_on(x, locator)` evaluates the branch that is valid on the smooth
/// interval containing `locator`; this gives one-sided values at jumps.
pub trait PiecewiseFn: Send + Sync {
    fn eval_on(&self, x: f64, locator: f64) -> f64;

    fn eval(&self, x: f64) -> f64 {
        self.eval_on(x, x)
    }

    fn breakpoints(&self) -> Vec<f64>;

    /// Interval outside which the function vanishes; by default the hull of
    /// the breakpoints.
    fn support(&self) -> Option<(f64, f64)> {
        let b = self.breakpoints();
        let lo = b.iter().copied().reduce(f64::min)?;
        let hi = b.iter().copied().reduce(f64::max)?;
        Some((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    /// `params = [c]`
    Const,
    /// `params = [c0, c1]`, value `c0 + c1 x`
    Linear,
    /// `params = [c0, c1, ...]`, value `sum c_k x^k`
    Poly,
}

/// One polynomial piece on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Piece {
    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Self {
            lo,
            hi,
            kind: PieceKind::Const,
            params: vec![c],
        }
    }

    pub fn linear(lo: f64, hi: f64, c0: f64, c1: f64) -> Self {
        Self {
            lo,
            hi,
            kind: PieceKind::Linear,
            params: vec![c0, c1],
        }
    }

    fn value(&self, x: f64) -> f64 {
        match self.kind {
            PieceKind::Const => self.params[0],
            PieceKind::Linear => self.params[0] + self.params[1] * x,
            PieceKind::Poly => self.params.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Spec(format!(
                "piece bounds must satisfy lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        let needed = match self.kind {
            PieceKind::Const => 1,
            PieceKind::Linear => 2,
            PieceKind::Poly => 1,
        };
        if self.params.len() < needed || self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Spec(format!(
                "piece [{}, {}] of kind {:?} needs at least {needed} finite params",
                self.lo, self.hi, self.kind
            )));
        }
        Ok(())
    }

    /// Exact integral of the piece over `[lo, hi]`.
    fn integral(&self) -> f64 {
        let coeffs: &[f64] = match self.kind {
            PieceKind::Const => &self.params[..1],
            PieceKind::Linear => &self.params[..2],
            PieceKind::Poly => &self.params,
        };
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let p = (k + 1) as i32;
                c * (self.hi.powi(p) - self.lo.powi(p)) / p as f64
            })
            .sum()
    }
}

/// Piecewise polynomial, zero outside its pieces.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile {
    pieces: Vec<Piece>,
}

impl Profile {
    pub fn new(mut pieces: Vec<Piece>) -> Result<Self> {
        for p in &pieces {
            p.validate()?;
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in pieces.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::Spec(format!(
                    "pieces [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c` on `[lo, hi]`.
    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Self {
            pieces: vec![Piece::constant(lo, hi, c)],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.params.iter().all(|c| *c == 0.0))
    }

    /// Smallest interval containing all pieces.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lo = self.pieces.first()?.lo;
        let hi = self.pieces.iter().map(|p| p.hi).fold(f64::MIN, f64::max);
        Some((lo, hi))
    }

    pub fn integral(&self) -> f64 {
        self.pieces.iter().map(Piece::integral).sum()
    }

    /// Largest absolute value, sampled densely on each piece.
    pub fn sup_norm(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| {
                (0..=64).map(move |i| {
                    let x = p.lo + (p.hi - p.lo) * i as f64 / 64.0;
                    p.value(x).abs()
                })
            })
            .fold(0.0, f64::max)
    }

    /// Every piece multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece {
                lo: p.lo,
                hi: p.hi,
                kind: p.kind,
                params: p.params.iter().map(|c| c * factor).collect(),
            })
            .collect();
        Self { pieces }
    }

    pub fn check_within(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        if let Some((s, e)) = self.support() {
            if s < lo || e > hi {
                return Err(Error::Spec(format!(
                    "{what} must be supported in [{lo}, {hi}], got [{s}, {e}]"
                )));
            }
        }
        Ok(())
    }
}

impl PiecewiseFn for Profile {
    fn eval_on(&self, x: f64, locator: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.lo <= locator && locator <= p.hi)
            .map_or(0.0, |p| p.value(x))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().flat_map(|p| [p.lo, p.hi]).collect();
        b.dedup();
        b
    }
}

/// Background potential `Q`: `q_-/x` on `(-a, 0)`, `q_+/x` on `(0, a)` and a
/// compactly supported tail on `|x| >= a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoulombSpec {
    pub q_minus: f64,
    pub q_plus: f64,
    pub a: f64,
    pub tail: Profile,
}

impl PiecewiseFn for CoulombSpec {
    fn eval_on(&self, x: f64, locator: f64) -> f64 {
        CoulombSpec::eval_on(self, x, locator)
    }

    fn breakpoints(&self) -> Vec<f64> {
        CoulombSpec::breakpoints(self)
    }
}

impl CoulombSpec {
    pub fn new(q_minus: f64, q_plus: f64, a: f64, tail: Profile) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Spec(format!("singularity radius a must be > 0, got {a}")));
        }
        if !(q_minus.is_finite() && q_plus.is_finite()) {
            return Err(Error::Spec("Coulomb coefficients must be finite".into()));
        }
        if tail.pieces().iter().any(|p| p.hi > -a && p.lo < a) {
            return Err(Error::Spec(format!("tail pieces must lie in |x| >= a = {a}")));
        }
        Ok(Self {
            q_minus,
            q_plus,
            a,
            tail,
        })
    }

    /// Pure Coulomb core on `(-a, a)` with zero tail.
    pub fn core(q_minus: f64, q_plus: f64, a: f64) -> Self {
        Self::new(q_minus, q_plus, a, Profile::zero()).expect("valid core")
    }

    /// Half-width of the box outside which `Q` vanishes.
    pub fn box_radius(&self) -> f64 {
        match self.tail.support() {
            Some((lo, hi)) => self.a.max(lo.abs()).max(hi.abs()),
            None => self.a,
        }
    }

    /// `Q(x)`; NaN at the singular point `x = 0`.
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return f64::NAN;
        }
        self.eval_on(x, x)
    }

    pub fn eval_on(&self, x: f64, locator: f64) -> f64 {
        if locator > -self.a && locator < 0.0 {
            self.q_minus / x
        } else if locator > 0.0 && locator < self.a {
            self.q_plus / x
        } else {
            self.tail.eval_on(x, locator)
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![-self.a, 0.0, self.a];
        b.extend(self.tail.breakpoints());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Coulomb coefficient on the given side of the origin.
    pub fn q(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.q_minus,
            Side::Right => self.q_plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Whether the family has the `ln(eps)/eps kappa(x/eps)` form or is the
/// modified Coulomb interaction `q_±/(x ± eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyForm {
    Standard,
    Modified,
}

/// Background `Q` together with the inner profiles `kappa`, `U`, `V` on `(-1, 1)`.
#[derive(Debug, Clone)]
pub struct RegularizedFamily {
    pub name: String,
    pub coulomb: CoulombSpec,
    pub kappa: Profile,
    pub u: Profile,
    pub v: Profile,
    pub form: FamilyForm,
}

impl RegularizedFamily {
    pub fn new(name: impl Into<String>, coulomb: CoulombSpec, kappa: Profile, u: Profile, v: Profile) -> Result<Self> {
        kappa.check_within(-1.0, 1.0, "kappa")?;
        u.check_within(-1.0, 1.0, "U")?;
        v.check_within(-1.0, 1.0, "V")?;
        Ok(Self {
            name: name.into(),
            coulomb,
            kappa,
            u,
            v,
            form: FamilyForm::Standard,
        })
    }

    /// Every inner profile zero and no Coulomb core.
    pub fn is_free(&self) -> bool {
        self.form == FamilyForm::Standard
            && self.coulomb.q_minus == 0.0
            && self.coulomb.q_plus == 0.0
            && self.coulomb.tail.is_zero()
            && self.kappa.is_zero()
            && self.u.is_zero()
            && self.v.is_zero()
    }

    pub fn check_eps(&self, eps: f64) -> Result<()> {
        if !(eps > 0.0 && eps < self.coulomb.a) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, a) = (0, {}), got {eps}",
                self.coulomb.a
            )));
        }
        Ok(())
    }

    /// Breakpoints of the inner profiles in the scaled variable `t = x/eps`,
    /// always including `-1, 0, 1`.
    pub fn inner_breakpoints(&self) -> Vec<f64> {
        let mut b = vec![-1.0, 0.0, 1.0];
        b.extend(self.kappa.breakpoints());
        b.extend(self.u.breakpoints());
        b.extend(self.v.breakpoints());
        b.retain(|t| (-1.0..=1.0).contains(t));
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Potential for `|x| > eps`.
    pub fn outer_on(&self, eps: f64, x: f64, locator: f64) -> f64 {
        match self.form {
            FamilyForm::Standard => self.coulomb.eval_on(x, locator),
            FamilyForm::Modified => self.modified_on(eps, x, locator),
        }
    }

    fn modified_on(&self, eps: f64, x: f64, locator: f64) -> f64 {
        let c = &self.coulomb;
        if locator > -c.a && locator < 0.0 {
            c.q_minus / (x - eps)
        } else if locator >= 0.0 && locator < c.a {
            c.q_plus / (x + eps)
        } else {
            c.tail.eval_on(x, locator)
        }
    }

    /// `eps^2 W_eps(eps t)` for `|t| < 1`: the potential of the inner
    /// problem written in the scaled variable.
    pub fn inner_scaled_on(&self, eps: f64, t: f64, locator: f64) -> f64 {
        match self.form {
            FamilyForm::Standard => {
                eps * eps.ln() * self.kappa.eval_on(t, locator)
                    + self.u.eval_on(t, locator)
                    + eps * self.v.eval_on(t, locator)
            }
            FamilyForm::Modified => eps * eps * self.modified_on(eps, eps * t, locator * eps),
        }
    }

    /// Unscaled inner potential `W_eps(x)` for `|x| < eps`.
    pub fn inner_on(&self, eps: f64, x: f64, locator: f64) -> f64 {
        match self.form {
            FamilyForm::Standard => {
                let (t, tl) = (x / eps, locator / eps);
                eps.ln() / eps * self.kappa.eval_on(t, tl)
                    + self.u.eval_on(t, tl) / (eps * eps)
                    + self.v.eval_on(t, tl) / eps
            }
            FamilyForm::Modified => self.modified_on(eps, x, locator),
        }
    }

    /// `W_eps(x)` on the branch selected by `locator`.
    pub fn eval_on(&self, eps: f64, x: f64, locator: f64) -> f64 {
        if locator.abs() < eps {
            self.inner_on(eps, x, locator)
        } else {
            self.outer_on(eps, x, locator)
        }
    }

    /// Breakpoints of `W_eps` in `x`.
    pub fn breakpoints(&self, eps: f64) -> Vec<f64> {
        let mut b = self.coulomb.breakpoints();
        b.extend(self.inner_breakpoints().into_iter().map(|t| t * eps));
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// `Q_eps(x) + eps^-2 U(x/eps) + eps^-1 V(x/eps)`.
///
/// For `|x| > eps` this is exactly `Q(x)`.
pub fn eval_regularized(family: &RegularizedFamily, eps: f64, x: f64) -> Result<f64> {
    family.check_eps(eps)?;
    Ok(if x.abs() < eps {
        family.inner_on(eps, x, x)
    } else if family.form == FamilyForm::Standard {
        family.coulomb.eval(x)
    } else {
        family.modified_on(eps, x, x)
    })
}

/// Names accepted by [`builtin_catalog`].
pub const BUILTIN_NAMES: [&str; 7] = ["Q0", "Q1", "Q2", "Q3", "truncated", "truncated-even", "modified"];

/// Radius of the Coulomb window used by the builtin families; the tail is zero.
pub const BUILTIN_A: f64 = 1.0;

/// Example regularizations of the even (`-1/|x|`) and odd (`1/x`) Coulomb
/// potentials.
///
/// * `Q0`: even, zero inside (`kappa = 0`).
/// * `Q1`: even, `eps^-1 |ln eps|` inside (`kappa = -1`).
/// * `Q2`: odd, `eps^-1 |ln eps|` inside (`kappa = -1`).
/// * `Q3`: odd, `eps^-2 |ln eps| x` inside (`kappa(t) = -t`).
/// * `truncated`: odd Coulomb with `kappa = 0`; `truncated:qm,qp` sets the
///   coefficients explicitly.
/// * `truncated-even`: even Coulomb with `kappa = 0`.
/// * `modified`: `-1/(|x| + eps)`.
pub fn builtin_catalog(name: &str) -> Result<RegularizedFamily> {
    let zero = Profile::zero();
    let even = CoulombSpec::core(1.0, -1.0, BUILTIN_A);
    let odd = CoulombSpec::core(1.0, 1.0, BUILTIN_A);
    let family =
        |coulomb: CoulombSpec, kappa: Profile| RegularizedFamily::new(name, coulomb, kappa, zero.clone(), zero.clone());
    match name {
        "Q0" | "truncated-even" => family(even, Profile::zero()),
        "Q1" => family(even, Profile::constant(-1.0, 1.0, -1.0)),
        "Q2" => family(odd, Profile::constant(-1.0, 1.0, -1.0)),
        "Q3" => family(odd, Profile::new(vec![Piece::linear(-1.0, 1.0, 0.0, -1.0)])?),
        "truncated" => family(odd, Profile::zero()),
        "modified" => {
            let mut f = family(even, Profile::zero())?;
            f.form = FamilyForm::Modified;
            Ok(f)
        }
        other => {
            if let Some(args) = other.strip_prefix("truncated:") {
                let qs: Vec<f64> = args
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::UnknownBuiltin(other.to_string()))?;
                if let [qm, qp] = qs[..] {
                    return RegularizedFamily::new(
                        other,
                        CoulombSpec::core(qm, qp, BUILTIN_A),
                        zero.clone(),
                        zero.clone(),
                        zero,
                    );
                }
            }
            Err(Error::UnknownBuiltin(other.to_string()))
        }
    }
}

/// Coefficient of `psi(0) ln(eps)` in the pairing of `Q_eps` with a test
/// function: `int kappa - q_+ + q_-`. Vanishes iff `Q_eps` converges in the
/// sense of distributions.
///
/// The modified family behaves like `kappa = 0` here.
pub fn lneps_coefficient(family: &RegularizedFamily) -> f64 {
    let kappa_mass = match family.form {
        FamilyForm::Standard => family.kappa.integral(),
        FamilyForm::Modified => 0.0,
    };
    kappa_mass - family.coulomb.q_plus + family.coulomb.q_minus
}

/// Compactly supported test function for the distributional pairing.
#[derive(Clone)]
pub struct TestFunction {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    hi: f64,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("support", &(self.lo, self.hi))
            .finish()
    }
}

impl TestFunction {
    /// `func` must vanish outside `[lo, hi]`; values there are ignored.
    pub fn new(func: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64) -> Self {
        Self {
            func: Arc::new(func),
            lo,
            hi,
        }
    }

    /// Smooth bump `exp(1 - 1/(1 - r^2))`, `r = (x - center)/radius`, equal to
    /// one at its center.
    pub fn bump(center: f64, radius: f64) -> Self {
        Self::new(
            move |x| {
                let r = (x - center) / radius;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                }
            },
            center - radius,
            center + radius,
        )
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            0.0
        } else {
            (self.func)(x)
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &TestFunction) -> TestFunction {
        let (a, b) = (self.clone(), other.clone());
        let lo = a.lo.min(b.lo);
        let hi = a.hi.max(b.hi);
        TestFunction::new(move |x| a.value(x) + c * b.value(x), lo, hi)
    }
}

impl PiecewiseFn for TestFunction {
    fn eval_on(&self, x: f64, _locator: f64) -> f64 {
        self.value(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.lo, self.hi]
    }
}

/// `int W_eps(x) psi(x) dx` by adaptive quadrature, split at
/// `{-a, -eps, 0, eps, a}` and every profile breakpoint.
pub fn pairing(family: &RegularizedFamily, eps: f64, psi: &TestFunction) -> Result<f64> {
    family.check_eps(eps)?;
    let (lo, hi) = psi.support();
    let mut breaks = family.breakpoints(eps);
    breaks.extend([-eps, eps]);
    let opts = QuadOptions {
        rtol: 1e-10,
        atol: 1e-13,
        max_intervals: 20_000,
    };
    quadrature::integrate(
        |x, loc| {
            let w = family.eval_on(eps, x, loc);
            let p = psi.value(x);
            if p == 0.0 {
                0.0
            } else {
                w * p
            }
        },
        lo,
        hi,
        &breaks,
        opts,
    )
}

/// Least-squares slope of `pairing(eps)` against `ln eps`.
pub fn lneps_slope(family: &RegularizedFamily, psi: &TestFunction, eps_grid: &[f64]) -> Result<f64> {
    let points = eps_grid
        .iter()
        .map(|&e| Ok((e.ln(), pairing(family, e, psi)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(least_squares_slope(&points))
}

/// Default `eps` grid for the slope fit: seven points `10^-2 .. 10^-5`.
pub fn default_pairing_grid() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-2.0 - 0.5 * i as f64)).collect()
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// JSON document describing a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(default)]
    pub name: Option<String>,
    pub q_minus: f64,
    pub q_plus: f64,
    pub a: f64,
    #[serde(default)]
    pub tail: Vec<Piece>,
    #[serde(default)]
    pub kappa: Vec<Piece>,
    #[serde(default, rename = "U", alias = "u")]
    pub u: Vec<Piece>,
    #[serde(default, rename = "V", alias = "v")]
    pub v: Vec<Piece>,
    #[serde(default)]
    pub form: Option<FamilyForm>,
}

impl FamilySpec {
    pub fn build(self) -> Result<RegularizedFamily> {
        let coulomb = CoulombSpec::new(self.q_minus, self.q_plus, self.a, Profile::new(self.tail)?)?;
        let mut family = RegularizedFamily::new(
            self.name.unwrap_or_else(|| "custom".into()),
            coulomb,
            Profile::new(self.kappa)?,
            Profile::new(self.u)?,
            Profile::new(self.v)?,
        )?;
        if let Some(form) = self.form {
            family.form = form;
        }
        Ok(family)
    }

    pub fn from_family(family: &RegularizedFamily) -> Self {
        Self {
            name: Some(family.name.clone()),
            q_minus: family.coulomb.q_minus,
            q_plus: family.coulomb.q_plus,
            a: family.coulomb.a,
            tail: family.coulomb.tail.pieces().to_vec(),
            kappa: family.kappa.pieces().to_vec(),
            u: family.u.pieces().to_vec(),
            v: family.v.pieces().to_vec(),
            form: Some(family.form),
        }
    }
}

pub fn family_from_json(text: &str) -> Result<RegularizedFamily> {
    let spec: FamilySpec = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
    spec.build()
}

/// Builtin name or path to a JSON spec.
pub fn load_family(name_or_path: &str) -> Result<RegularizedFamily> {
    match builtin_catalog(name_or_path) {
        Ok(f) => Ok(f),
        Err(Error::UnknownBuiltin(_)) if Path::new(name_or_path).exists() => {
            family_from_json(&std::fs::read_to_string(name_or_path)?)
        }
        Err(e) => Err(e),
    }
}
