mod common;

use coulomb_limit::harness::default_probes;
use coulomb_limit::potentials::builtin_catalog;
use coulomb_limit::C64;

use common::{fd_disagreement, square_well_family};

const EPS: f64 = 0.1;
const TOL: f64 = 1e-4;

fn zeta() -> C64 {
    C64::new(0.0, 1.0)
}

#[test]
fn q1_matches_finite_differences() {
    let fam = builtin_catalog("Q1").unwrap();
    for probe in &default_probes()[..4] {
        let d = fd_disagreement(&fam, EPS, zeta(), probe, 1);
        assert!(d < TOL, "{}: {d:e}", probe.name);
    }
}

#[test]
fn q0_matches_finite_differences() {
    let fam = builtin_catalog("Q0").unwrap();
    let probe = &default_probes()[1];
    let d = fd_disagreement(&fam, EPS, zeta(), probe, 1);
    assert!(d < TOL, "{d:e}");
}

#[test]
fn well_matches_finite_differences() {
    let fam = square_well_family();
    for probe in &default_probes()[4..] {
        let d = fd_disagreement(&fam, EPS, zeta(), probe, 1);
        assert!(d < TOL, "{}: {d:e}", probe.name);
    }
}

#[test]
fn off_axis_energy_matches_finite_differences() {
    let fam = builtin_catalog("Q3").unwrap();
    let probe = &default_probes()[2];
    let d = fd_disagreement(&fam, EPS, C64::new(1.5, 0.5), probe, 1);
    assert!(d < TOL, "{d:e}");
}
