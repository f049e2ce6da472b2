//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when the input is rejected before any
//! computation, 3 when a computation fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::eps_operator::{apply_eps_resolvent, eps_transmission};
use crate::harness::{
    convergence_sweep, default_eps_grid, default_probes, format_zeta, log_grid, penetrability_sweep, write_csv, Cell,
    SweepKind, SweepReport, CSV_HEADER,
};
use crate::limit_operator::{classify_limit, LimitKind, MATCH_TOL};
use crate::potentials::{
    builtin_catalog, default_pairing_grid, family_from_json, lneps_coefficient, lneps_slope, pairing, Profile,
    RegularizedFamily, TestFunction,
};
use crate::resonance::{find_resonant_couplings, half_bound_state};
use crate::{Error, Result, BUILD_ID, C64};

/// Default `--tol` of the `resonance` subcommand.
pub const CLI_RESONANCE_TOL: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "coulomb-limit",
    version,
    about = "Regularized Coulomb-like potentials and their point-interaction limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Half-bound state of U (or of a constant well) as JSON.
    Resonance(ResonanceArgs),
    /// Limit operator of a family as JSON.
    Classify(ClassifyArgs),
    /// Resolvent of the regularized operator applied to a probe.
    ResolveEps(ResolveArgs),
    /// Transmission and reflection of the regularized operator.
    ScatterEps(ScatterArgs),
    /// Resolvent gaps against the limit operator over an eps grid.
    Converge(ConvergeArgs),
    /// |T|^2 tables and penetrability verdicts.
    Penetrability(PenetrabilityArgs),
    /// Distributional pairing and its ln(eps) slope.
    Pairing(PairingArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Builtin family name (Q0, Q1, Q2, Q3, truncated, truncated-even, modified).
    #[arg(long)]
    builtin: Option<String>,
    /// Path to a JSON family spec.
    #[arg(long)]
    spec: Option<PathBuf>,
}

impl Input {
    fn load(&self) -> Result<RegularizedFamily> {
        match (&self.builtin, &self.spec) {
            (Some(name), _) => builtin_catalog(name),
            (None, Some(path)) => read_spec(path),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

fn read_spec(path: &Path) -> Result<RegularizedFamily> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read spec {}: {e}", path.display())))?;
    family_from_json(&text)
}

#[derive(Debug, Args)]
struct Output {
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ResonanceArgs {
    /// Use U = depth on (-1, 1) instead of a family's U.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["builtin", "spec"])]
    well_depth: Option<f64>,
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Relative shooting tolerance. The default is looser than the library's
    /// so that depths typed to a few digits still register.
    #[arg(long, default_value_t = CLI_RESONANCE_TOL)]
    tol: f64,
    /// Also list resonant couplings alpha of alpha U in lo..hi.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    couplings: Option<(f64, f64)>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: Input,
    /// Tolerance on the normalized matching residual.
    #[arg(long, default_value_t = MATCH_TOL)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ResolveArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    eps: f64,
    /// Spectral parameter as `re,im`.
    #[arg(long, default_value = "0,1", value_parser = parse_zeta, allow_hyphen_values = true)]
    zeta: C64,
    /// Probe name from the fixed probe set.
    #[arg(long, default_value = "g0w0.5")]
    probe: String,
    /// Samples as CSV (x,re_y,im_y,re_dy,im_dy) go here; the JSON summary
    /// goes to stdout.
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// `lo..hi` (log-spaced, see --points), a comma list, or one value.
    #[arg(long, value_parser = parse_grid)]
    eps: Option<Grid>,
    /// Number of points in `lo..hi` grids.
    #[arg(long, default_value_t = 7)]
    points: usize,
}

#[derive(Debug, Args)]
struct ScatterArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_parser = parse_grid)]
    k: Grid,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value = "0,1", value_parser = parse_zeta, allow_hyphen_values = true)]
    zeta: C64,
    #[command(flatten)]
    grid: GridArgs,
    /// JSON summary (slope, bounded, warnings) goes here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct PenetrabilityArgs {
    /// Builtin names, comma separated.
    #[arg(long, value_delimiter = ',')]
    builtin: Vec<String>,
    /// JSON family specs (repeatable).
    #[arg(long)]
    spec: Vec<PathBuf>,
    #[arg(long, value_parser = parse_grid)]
    k: Grid,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct PairingArgs {
    #[command(flatten)]
    input: Input,
    /// Bump test function centre.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    center: f64,
    /// Bump test function radius.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: Output,
}

/// A numeric grid as given on the command line.
#[derive(Debug, Clone)]
enum Grid {
    Range(f64, f64),
    List(Vec<f64>),
}

impl Grid {
    fn values(&self, points: usize) -> Result<Vec<f64>> {
        match self {
            Grid::Range(lo, hi) => log_grid(*lo, *hi, points),
            Grid::List(v) => Ok(v.clone()),
        }
    }
}

fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: `{s}`"));
    }
    Ok(v)
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected lo..hi, got `{s}`"))?;
    Ok((parse_number(lo)?, parse_number(hi)?))
}

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    if s.contains("..") {
        let (lo, hi) = parse_range(s)?;
        return Ok(Grid::Range(lo, hi));
    }
    let values = s
        .split(',')
        .map(parse_number)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Grid::List(values))
}

fn parse_zeta(s: &str) -> std::result::Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im, got `{s}`"))?;
    Ok(C64::new(parse_number(re)?, parse_number(im)?))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn positive_eps(grid: &[f64], family: &RegularizedFamily) -> Result<()> {
    for &e in grid {
        family.check_eps(e)?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Resonance(a) => resonance(a),
        Command::Classify(a) => classify(a),
        Command::ResolveEps(a) => resolve_eps(a),
        Command::ScatterEps(a) => scatter_eps(a),
        Command::Converge(a) => converge(a),
        Command::Penetrability(a) => penetrability(a),
        Command::Pairing(a) => pairing_cmd(a),
    }
}

fn resonance(a: ResonanceArgs) -> Result<()> {
    let u = match (a.well_depth, &a.builtin, &a.spec) {
        (Some(depth), _, _) => Profile::constant(-1.0, 1.0, depth),
        (None, Some(name), _) => builtin_catalog(name)?.u,
        (None, None, Some(path)) => read_spec(path)?.u,
        (None, None, None) => return Err(Error::InvalidParameter("give --well-depth, --builtin or --spec".into())),
    };
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("--tol must be > 0, got {}", a.tol)));
    }
    let data = half_bound_state(&u, a.tol)?;
    let couplings = match a.couplings {
        Some(range) => Some(find_resonant_couplings(&u, range, 1e-10)?),
        None => None,
    };
    let warning = data
        .near_threshold
        .then(|| "residual within 10x of the resonance threshold".to_string());
    write_json(
        &a.output.out,
        &json!({
            "version": BUILD_ID,
            "resonant": data.resonant,
            "theta": data.theta,
            "derivative_residual": data.derivative_residual,
            "threshold": data.threshold,
            "warning": warning,
            "couplings": couplings,
            "h0": data.h0,
        }),
    )
}

fn classify(a: ClassifyArgs) -> Result<()> {
    let family = a.input.load()?;
    let c = classify_limit(&family, a.tol)?;
    let (theta, mu) = match c.limit.kind {
        LimitKind::ResonantPI { theta, mu } => (Some(theta), Some(mu)),
        LimitKind::DirichletSum => (None, None),
    };
    write_json(
        &a.output.out,
        &json!({
            "version": BUILD_ID,
            "family": family.name,
            "kind": c.limit.kind_name(),
            "theta": theta,
            "mu": mu,
            "resonant": c.resonance.resonant,
            "matching_residual": c.resonance.matching_residual,
            "normalized_residual": c.normalized_residual,
            "lneps_coefficient": lneps_coefficient(&family),
            "warning": c.warning,
        }),
    )
}

fn resolve_eps(a: ResolveArgs) -> Result<()> {
    let family = a.input.load()?;
    family.check_eps(a.eps)?;
    let probe = default_probes()
        .into_iter()
        .find(|p| p.name == a.probe)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown probe `{}`", a.probe)))?;
    let r = apply_eps_resolvent(&family, a.eps, a.zeta, &probe)?;
    if a.output.out.is_some() {
        let mut out = sink(&a.output.out)?;
        writeln!(out, "# {BUILD_ID}")?;
        writeln!(out, "x,re_y,im_y,re_dy,im_dy")?;
        for i in 0..r.trace.len() {
            let (y, dy) = (r.trace.y[i], r.trace.dy[i]);
            writeln!(out, "{},{},{},{},{}", r.trace.grid[i], y.re, y.im, dy.re, dy.im)?;
        }
        out.flush()?;
    }
    write_json(
        &None,
        &json!({
            "version": BUILD_ID,
            "family": family.name,
            "eps": a.eps,
            "zeta": format_zeta(a.zeta),
            "probe": probe.name,
            "samples": r.trace.len(),
            "residual_norm": r.residual_norm,
            "interface_jump": r.interface_jump,
            "l_box": r.l_box,
        }),
    )
}

fn scatter_eps(a: ScatterArgs) -> Result<()> {
    let family = a.input.load()?;
    let ks = a.k.values(a.grid.points)?;
    let eps = match &a.grid.eps {
        Some(g) => g.values(a.grid.points)?,
        None => default_eps_grid(),
    };
    positive_eps(&eps, &family)?;
    if ks.iter().any(|k| k.is_nan() || *k <= 0.0) {
        return Err(Error::InvalidParameter("k values must be > 0".into()));
    }
    let mut report = SweepReport {
        family: family.name.clone(),
        sweep: SweepKind::Penetrability,
        zeta: None,
        k_grid: ks.clone(),
        eps_grid: eps.clone(),
        cells: vec![],
        slope: None,
        bounded: None,
        verdict: None,
        classification: None,
        warnings: vec![],
        errors: vec![],
    };
    for &e in &eps {
        for &k in &ks {
            let s = eps_transmission(&family, e, k)?;
            for (kind, value) in [("T2", s.scattering.t.norm_sqr()), ("R2", s.scattering.r.norm_sqr())] {
                report.cells.push(Cell {
                    family: family.name.clone(),
                    eps: e,
                    k_or_zeta: k.to_string(),
                    value,
                    kind: kind.into(),
                });
            }
        }
    }
    let mut out = sink(&a.output.out)?;
    write_csv(&[report], &mut out)?;
    out.flush()?;
    Ok(())
}

fn converge(a: ConvergeArgs) -> Result<()> {
    let family = a.input.load()?;
    let eps = match &a.grid.eps {
        Some(g) => g.values(a.grid.points)?,
        None => default_eps_grid(),
    };
    positive_eps(&eps, &family)?;
    let report = convergence_sweep(&family, a.zeta, &eps, &default_probes())?;
    let mut out = sink(&a.output.out)?;
    write_csv(std::slice::from_ref(&report), &mut out)?;
    out.flush()?;
    if a.summary.is_some() {
        write_json(&a.summary, &summary(&[report]))?;
    }
    Ok(())
}

fn penetrability(a: PenetrabilityArgs) -> Result<()> {
    let mut families = a
        .builtin
        .iter()
        .map(|n| builtin_catalog(n))
        .collect::<Result<Vec<_>>>()?;
    for path in &a.spec {
        families.push(read_spec(path)?);
    }
    if families.is_empty() {
        return Err(Error::InvalidParameter("give at least one --builtin or --spec".into()));
    }
    let ks = a.k.values(a.grid.points)?;
    let eps = match &a.grid.eps {
        Some(g) => g.values(a.grid.points)?,
        None => default_eps_grid(),
    };
    for f in &families {
        positive_eps(&eps, f)?;
    }
    let reports = penetrability_sweep(&families, &ks, &eps)?;
    let mut out = sink(&a.output.out)?;
    write_csv(&reports, &mut out)?;
    out.flush()?;
    if a.summary.is_some() {
        write_json(&a.summary, &summary(&reports))?;
    }
    Ok(())
}

fn summary(reports: &[SweepReport]) -> serde_json::Value {
    let rows: Vec<_> = reports
        .iter()
        .map(|r| {
            json!({
                "family": r.family,
                "sweep": r.sweep,
                "zeta": r.zeta.map(format_zeta),
                "k_grid": r.k_grid,
                "eps_grid": r.eps_grid,
                "slope": r.slope,
                "bounded": r.bounded,
                "verdict": r.verdict,
                "classification": r.classification,
                "warnings": r.warnings,
                "errors": r.errors,
            })
        })
        .collect();
    json!({ "version": BUILD_ID, "csv_header": CSV_HEADER, "reports": rows })
}

fn pairing_cmd(a: PairingArgs) -> Result<()> {
    let family = a.input.load()?;
    if a.radius.is_nan() || a.radius <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "--radius must be > 0, got {}",
            a.radius
        )));
    }
    let eps = match &a.grid.eps {
        Some(g) => g.values(a.grid.points)?,
        None => default_pairing_grid(),
    };
    positive_eps(&eps, &family)?;
    let psi = TestFunction::bump(a.center, a.radius);
    let values = eps
        .iter()
        .map(|&e| Ok(json!({ "eps": e, "pairing": pairing(&family, e, &psi)? })))
        .collect::<Result<Vec<_>>>()?;
    let slope = if eps.len() >= 2 {
        Some(lneps_slope(&family, &psi, &eps)?)
    } else {
        None
    };
    write_json(
        &a.output.out,
        &json!({
            "version": BUILD_ID,
            "family": family.name,
            "psi_at_zero": psi.value(0.0),
            "lneps_coefficient": lneps_coefficient(&family),
            "fitted_slope": slope,
            "values": values,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse() {
        assert!(matches!(parse_grid("1e-1..1e-4"), Ok(Grid::Range(a, b)) if a == 0.1 && b == 1e-4));
        assert!(matches!(parse_grid("0.5,1,2"), Ok(Grid::List(v)) if v == vec![0.5, 1.0, 2.0]));
        assert!(parse_grid("1,x").is_err());
        assert_eq!(parse_zeta("-1,0.5").unwrap(), C64::new(-1.0, 0.5));
        assert!(parse_zeta("1").is_err());
    }
}
