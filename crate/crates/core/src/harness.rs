//! Sweeps over `eps`: resolvent gaps against the limit operator, scattering
//! trends, and the inner-region comparison with the half-bound state.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::eps_operator::{apply_eps_resolvent_at, eps_transmission};
use crate::limit_operator::{
    apply_resolvent_at, classify_limit, limit_transmission, LimitKind, LimitOperator, MATCH_TOL,
};
use crate::potentials::{least_squares_slope, FamilyForm, PiecewiseFn, RegularizedFamily};
use crate::quadrature::PanelRule;
use crate::resonance::{half_bound_state, DEFAULT_TOL};
use crate::{Error, Result, BUILD_ID, C64};

/// Gauss–Legendre order per panel in gap norms.
const PANEL_ORDER: usize = 16;

/// Probes are cut off this many widths from their centre.
const PROBE_CUTOFF: f64 = 8.0;

/// Gaussian `exp(-(x - c)^2 / (2 s^2))`, optionally multiplied by
/// `cos(omega x)` or `sin(omega x)`, normalised in `L^2`.
#[derive(Debug, Clone, Serialize)]
pub struct Probe {
    pub name: String,
    pub center: f64,
    pub width: f64,
    pub omega: f64,
    pub modulation: Modulation,
    scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    None,
    Cos,
    Sin,
}

impl Probe {
    pub fn new(name: impl Into<String>, center: f64, width: f64, omega: f64, modulation: Modulation) -> Self {
        // Closed-form L2 norms of the untruncated functions; the cut-off
        // changes them by less than exp(-64).
        let gauss = width * std::f64::consts::PI.sqrt();
        let damp = (-(omega * width).powi(2)).exp();
        let phase = (2.0 * omega * center).cos();
        let norm2 = match modulation {
            Modulation::None => gauss,
            Modulation::Cos => 0.5 * gauss * (1.0 + damp * phase),
            Modulation::Sin => 0.5 * gauss * (1.0 - damp * phase),
        };
        Self {
            name: name.into(),
            center,
            width,
            omega,
            modulation,
            scale: norm2.sqrt().recip(),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        let r = PROBE_CUTOFF * self.width;
        (self.center - r, self.center + r)
    }

    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let g = (-0.5 * ((x - self.center) / self.width).powi(2)).exp() * self.scale;
        match self.modulation {
            Modulation::None => g,
            Modulation::Cos => g * (self.omega * x).cos(),
            Modulation::Sin => g * (self.omega * x).sin(),
        }
    }
}

impl PiecewiseFn for Probe {
    fn eval_on(&self, x: f64, _locator: f64) -> f64 {
        self.value(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        vec![lo, hi]
    }
}

/// The fixed probe set: four Gaussians and four modulated Gaussians.
pub fn default_probes() -> Vec<Probe> {
    vec![
        Probe::new("g0w0.2", 0.0, 0.2, 0.0, Modulation::None),
        Probe::new("g0w0.5", 0.0, 0.5, 0.0, Modulation::None),
        Probe::new("g+0.5w0.2", 0.5, 0.2, 0.0, Modulation::None),
        Probe::new("g-0.5w0.5", -0.5, 0.5, 0.0, Modulation::None),
        Probe::new("cos1", 0.0, 0.5, 1.0, Modulation::Cos),
        Probe::new("sin1", 0.0, 0.5, 1.0, Modulation::Sin),
        Probe::new("cos3", 0.0, 0.5, 3.0, Modulation::Cos),
        Probe::new("sin3", 0.0, 0.5, 3.0, Modulation::Sin),
    ]
}

/// `10^-1, 10^-1.5, ..., 10^-4`.
pub fn default_eps_grid() -> Vec<f64> {
    (2..=8).map(|i| 10f64.powf(-(i as f64) / 2.0)).collect()
}

/// `n` points from `lo` to `hi`, evenly spaced in `ln`, in the given order.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs positive finite ends and n >= 1, got {lo}..{hi} with {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut g: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

/// Panel edges for `L^2` norms over `[-l, l]`: panels in the inner region
/// split at the profile breakpoints, geometric panels from `eps` to `a`,
/// and panels of width at most `0.25` beyond.
fn gap_edges(family: &RegularizedFamily, eps: f64, l: f64, extra: &[f64]) -> Vec<f64> {
    let a = family.coulomb.a;
    let mut e: Vec<f64> = family.inner_breakpoints().iter().map(|t| t * eps).collect();
    let panels = ((a / eps).log10() * 4.0).ceil().max(1.0) as usize;
    for i in 0..=panels {
        let x = eps * (a / eps).powf(i as f64 / panels as f64);
        e.extend([x, -x]);
    }
    let far = ((l - a) / 0.25).ceil().max(0.0) as usize;
    for i in 1..=far {
        let x = a + (l - a) * i as f64 / far as f64;
        e.extend([x, -x]);
    }
    e.extend(family.coulomb.breakpoints());
    e.extend(extra);
    e.retain(|x| x.abs() <= l);
    e.sort_by(f64::total_cmp);
    e.dedup();
    e
}

/// `||y_eps - u||_2 / ||f||_2` for one probe.
pub fn resolvent_gap(
    family: &RegularizedFamily,
    limit: &LimitOperator,
    eps: f64,
    zeta: C64,
    probe: &Probe,
) -> Result<f64> {
    let (lo, hi) = probe.support();
    let l = family.coulomb.box_radius().max(lo.abs()).max(hi.abs());
    let rule = PanelRule::new(&gap_edges(family, eps, l, &[]), PANEL_ORDER);
    let y_eps = apply_eps_resolvent_at(family, eps, zeta, probe, &rule.nodes)?;
    let u = apply_resolvent_at(limit, zeta, probe, &rule.nodes)?;
    let mut sum = 0.0;
    for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
        let (Some(a), Some(b)) = (y_eps.value(*x), u.value(*x)) else {
            return Err(Error::Numerical {
                module: "harness",
                message: format!("no sample at x = {x:.6e}"),
            });
        };
        sum += wt * (a - b).norm_sqr();
    }
    // Both are multiples of exp(i w |x|) beyond the common box [-l, l].
    let decay = 2.0 * y_eps.w.im;
    for k in 0..2 {
        sum += (y_eps.tails[k] - u.tails[k]).norm_sqr() * (-decay * l).exp() / decay;
    }
    let f_norm2: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * probe.value(*x).powi(2))
        .sum();
    Ok(sum.sqrt() / f_norm2.sqrt())
}

/// One row of the CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub family: String,
    pub eps: f64,
    pub k_or_zeta: String,
    pub value: f64,
    pub kind: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Convergence,
    Penetrability,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub family: String,
    pub sweep: SweepKind,
    pub zeta: Option<C64>,
    pub k_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub cells: Vec<Cell>,
    /// Least-squares slope of `ln gap` against `ln eps`, largest `eps`
    /// excluded.
    pub slope: Option<f64>,
    /// `gap * eps^(-1/4)` has no growth trend over the last three points.
    pub bounded: Option<bool>,
    /// `penetrable`, `opaque` or `undetermined` from the `|T|^2` trend.
    pub verdict: Option<String>,
    /// The same question answered by [`classify_limit`].
    pub classification: Option<String>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl SweepReport {
    fn new(family: &str, sweep: SweepKind, eps_grid: &[f64]) -> Self {
        Self {
            family: family.to_string(),
            sweep,
            zeta: None,
            k_grid: vec![],
            eps_grid: eps_grid.to_vec(),
            cells: vec![],
            slope: None,
            bounded: None,
            verdict: None,
            classification: None,
            warnings: vec![],
            errors: vec![],
        }
    }

    /// `(eps, value)` of every cell of the given kind, in grid order.
    pub fn series(&self, kind: &str) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| (c.eps, c.value))
            .collect()
    }

    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.series("gap")
    }
}

fn check_eps_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("eps grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("eps grid must be strictly decreasing".into()));
    }
    Ok(())
}

pub fn format_zeta(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Whether `gap * eps^(-rate)` stays bounded over the last three grid
/// points: either non-increasing or within a factor of three.
pub fn bounded_rate(gaps: &[(f64, f64)], rate: f64) -> bool {
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    let scaled: Vec<f64> = tail.iter().map(|(e, g)| g * e.powf(-rate)).collect();
    if scaled.iter().all(|s| *s == 0.0) {
        return true;
    }
    let non_increasing = scaled.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let max = scaled.iter().copied().fold(f64::MIN, f64::max);
    let min = scaled.iter().copied().fold(f64::MAX, f64::min);
    non_increasing || (min > 0.0 && max / min < 3.0)
}

/// Resolvent gaps of `family` against its limit operator over `eps_grid`.
///
/// Failing cells are recorded in `errors` and left out of the gaps.
pub fn convergence_sweep(
    family: &RegularizedFamily,
    zeta: C64,
    eps_grid: &[f64],
    probes: &[Probe],
) -> Result<SweepReport> {
    let class = classify_limit(family, MATCH_TOL)?;
    convergence_sweep_against(family, &class.limit, zeta, eps_grid, probes)
}

/// As [`convergence_sweep`] with an explicit limit operator.
pub fn convergence_sweep_against(
    family: &RegularizedFamily,
    limit: &LimitOperator,
    zeta: C64,
    eps_grid: &[f64],
    probes: &[Probe],
) -> Result<SweepReport> {
    check_eps_grid(eps_grid)?;
    if probes.is_empty() {
        return Err(Error::InvalidParameter("probe set is empty".into()));
    }
    if zeta.im == 0.0 {
        return Err(Error::InvalidParameter(format!("sweep needs Im zeta != 0, got {zeta}")));
    }
    let jobs: Vec<(usize, usize)> = (0..eps_grid.len())
        .flat_map(|i| (0..probes.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, j)| resolvent_gap(family, limit, eps_grid[i], zeta, &probes[j]))
        .collect();

    let mut report = SweepReport::new(&family.name, SweepKind::Convergence, eps_grid);
    report.zeta = Some(zeta);
    report.classification = Some(limit.kind_name().to_string());
    let z = format_zeta(zeta);
    for (i, &eps) in eps_grid.iter().enumerate() {
        let mut worst: Option<f64> = None;
        for (j, probe) in probes.iter().enumerate() {
            match &results[i * probes.len() + j] {
                Ok(g) => {
                    worst = Some(worst.map_or(*g, |w| w.max(*g)));
                    report.cells.push(Cell {
                        family: family.name.clone(),
                        eps,
                        k_or_zeta: z.clone(),
                        value: *g,
                        kind: format!("probe:{}", probe.name),
                    });
                }
                Err(e) => report.errors.push(format!("eps = {eps:e}, probe {}: {e}", probe.name)),
            }
        }
        if let Some(g) = worst {
            report.cells.push(Cell {
                family: family.name.clone(),
                eps,
                k_or_zeta: z.clone(),
                value: g,
                kind: "gap".into(),
            });
        }
    }
    let gaps = report.gaps();
    let fit: Vec<(f64, f64)> = gaps
        .iter()
        .filter(|(e, g)| *e < eps_grid[0] && *g > 0.0)
        .map(|(e, g)| (e.ln(), g.ln()))
        .collect();
    if fit.len() >= 2 {
        report.slope = Some(least_squares_slope(&fit));
    }
    if !gaps.is_empty() {
        report.bounded = Some(bounded_rate(&gaps, 0.25));
    }
    if gaps.len() < eps_grid.len() {
        report.warnings.push(format!(
            "{} of {} eps values have no gap",
            eps_grid.len() - gaps.len(),
            eps_grid.len()
        ));
    }
    Ok(report)
}

/// Relative drop of `|T|^2` over the last three grid points below which a
/// family counts as opaque.
pub const OPAQUE_DROP: f64 = 0.2;

/// Relative change of `|T|^2` over the last three grid points below which a
/// family counts as penetrable.
pub const PENETRABLE_CHANGE: f64 = 0.05;

/// Verdict from `|T_eps(k)|^2` rows ordered by decreasing `eps`, one slice
/// per `k`.
pub fn trend_verdict(rows: &[Vec<f64>]) -> &'static str {
    let changes: Vec<f64> = rows
        .iter()
        .filter(|r| r.len() >= 3)
        .map(|r| {
            let (first, last) = (r[r.len() - 3], r[r.len() - 1]);
            (last - first) / first.max(f64::MIN_POSITIVE)
        })
        .collect();
    if changes.is_empty() {
        "undetermined"
    } else if changes.iter().all(|c| *c < -OPAQUE_DROP) {
        "opaque"
    } else if changes.iter().all(|c| c.abs() < PENETRABLE_CHANGE) {
        "penetrable"
    } else {
        "undetermined"
    }
}

/// `|T_eps(k)|^2` tables with the limit value and both verdicts.
pub fn penetrability_sweep(
    families: &[RegularizedFamily],
    k_grid: &[f64],
    eps_grid: &[f64],
) -> Result<Vec<SweepReport>> {
    check_eps_grid(eps_grid)?;
    if k_grid.is_empty() || k_grid.iter().any(|k| k.is_nan() || *k <= 0.0) {
        return Err(Error::InvalidParameter("k grid must be nonempty and positive".into()));
    }
    families
        .iter()
        .map(|fam| penetrability_one(fam, k_grid, eps_grid))
        .collect()
}

fn penetrability_one(family: &RegularizedFamily, k_grid: &[f64], eps_grid: &[f64]) -> Result<SweepReport> {
    let mut report = SweepReport::new(&family.name, SweepKind::Penetrability, eps_grid);
    report.k_grid = k_grid.to_vec();
    let limit = if family.form == FamilyForm::Modified {
        report
            .warnings
            .push("not of the ln(eps)/eps kappa form; verdict from the scattering trend only".into());
        None
    } else {
        let c = classify_limit(family, MATCH_TOL)?;
        report.classification = Some(
            match c.limit.kind {
                LimitKind::ResonantPI { .. } => "penetrable",
                LimitKind::DirichletSum => "opaque",
            }
            .to_string(),
        );
        report.warnings.extend(c.warning);
        Some(c.limit)
    };

    let jobs: Vec<(usize, usize)> = (0..k_grid.len())
        .flat_map(|i| (0..eps_grid.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            eps_transmission(family, eps_grid[j], k_grid[i]).map(|s| s.scattering.transmission_probability())
        })
        .collect();
    let mut rows = vec![];
    for (i, &k) in k_grid.iter().enumerate() {
        let mut row = vec![];
        for (j, &eps) in eps_grid.iter().enumerate() {
            match &values[i * eps_grid.len() + j] {
                Ok(t2) => {
                    row.push(*t2);
                    report.cells.push(Cell {
                        family: family.name.clone(),
                        eps,
                        k_or_zeta: k.to_string(),
                        value: *t2,
                        kind: "T2".into(),
                    });
                }
                Err(e) => report.errors.push(format!("eps = {eps:e}, k = {k}: {e}")),
            }
        }
        if let Some(limit) = &limit {
            match limit_transmission(limit, k) {
                Ok(s) => report.cells.push(Cell {
                    family: family.name.clone(),
                    eps: 0.0,
                    k_or_zeta: k.to_string(),
                    value: s.transmission_probability(),
                    kind: "T2_limit".into(),
                }),
                Err(e) => report.errors.push(format!("limit, k = {k}: {e}")),
            }
        }
        rows.push(row);
    }
    let verdict = trend_verdict(&rows);
    if let Some(c) = &report.classification {
        if c != verdict {
            report
                .warnings
                .push(format!("scattering trend says {verdict}, classification says {c}"));
        }
    }
    report.verdict = Some(verdict.to_string());
    Ok(report)
}

/// `sup |y_eps(eps t) - u(-0) h0(t)|` over the half-bound state grid on
/// `[-1, 1]`, for a family with a coupled limit.
pub fn inner_expansion_check(family: &RegularizedFamily, eps: f64, zeta: C64, f: &dyn PiecewiseFn) -> Result<f64> {
    let class = classify_limit(family, MATCH_TOL)?;
    if !matches!(class.limit.kind, LimitKind::ResonantPI { .. }) {
        return Err(Error::Contract(format!(
            "inner expansion needs a coupled limit; `{}` decouples",
            family.name
        )));
    }
    let h0 = half_bound_state(&family.u, DEFAULT_TOL)?.h0;
    let xs: Vec<f64> = h0.t.iter().map(|t| t * eps).collect();
    let y = apply_eps_resolvent_at(family, eps, zeta, f, &xs)?;
    let u = apply_resolvent_at(&class.limit, zeta, f, &[])?;
    let u_minus0 = u.boundary.u_minus0;
    let mut sup: f64 = 0.0;
    for (x, h) in xs.iter().zip(&h0.h) {
        let v = y.value(*x).ok_or_else(|| Error::Numerical {
            module: "harness",
            message: format!("no sample at x = {x:.6e}"),
        })?;
        sup = sup.max((v - u_minus0 * *h).norm());
    }
    Ok(sup)
}

pub const CSV_HEADER: &str = "family,eps,k_or_zeta,value,kind";

/// CSV with a build comment line, the fixed header and rows ordered by
/// family, decreasing `eps`, `k_or_zeta` and kind.
pub fn write_csv(reports: &[SweepReport], out: &mut dyn Write) -> Result<()> {
    writeln!(out, "# {BUILD_ID}")?;
    writeln!(out, "{CSV_HEADER}")?;
    for r in reports {
        let mut cells: Vec<&Cell> = r.cells.iter().collect();
        cells.sort_by(|a, b| {
            b.eps
                .total_cmp(&a.eps)
                .then_with(|| a.k_or_zeta.cmp(&b.k_or_zeta))
                .then_with(|| a.kind.cmp(&b.kind))
        });
        for c in cells {
            writeln!(out, "{},{},{},{},{}", c.family, c.eps, c.k_or_zeta, c.value, c.kind)?;
        }
    }
    Ok(())
}
