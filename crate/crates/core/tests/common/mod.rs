#![allow(dead_code)]

use std::f64::consts::PI;

use coulomb_limit::odes::decay_root;
use coulomb_limit::potentials::{CoulombSpec, Piece, PiecewiseFn, Profile, RegularizedFamily};
use coulomb_limit::C64;

/// `q_- = q_+ = 1`, `kappa(t) = t`, `U = -pi^2/4`: resonant with `theta = -1`.
pub fn square_well_family() -> RegularizedFamily {
    RegularizedFamily::new(
        "well",
        CoulombSpec::core(1.0, 1.0, 1.0),
        Profile::new(vec![Piece::linear(-1.0, 1.0, 0.0, 1.0)]).unwrap(),
        Profile::constant(-1.0, 1.0, -PI * PI / 4.0),
        Profile::zero(),
    )
    .unwrap()
}

/// No Coulomb core, `U = 0` and `V = beta/2` on `(-1, 1)`: a shrinking
/// barrier of mass `beta`.
pub fn delta_family(beta: f64) -> RegularizedFamily {
    RegularizedFamily::new(
        format!("delta{beta}"),
        CoulombSpec::core(0.0, 0.0, 1.0),
        Profile::zero(),
        Profile::zero(),
        Profile::constant(-1.0, 1.0, beta / 2.0),
    )
    .unwrap()
}

/// Second order finite differences for `-y'' + (W_eps - zeta) y = f` on a
/// uniform grid of `n` nodes over `[-l, l]`.
///
/// `W` is averaged over both sides at jump nodes; outside the grid the
/// solution is closed by `exp(i w |x|)`. Returns `(x, y)`.
pub fn fd_resolvent(
    family: &RegularizedFamily,
    eps: f64,
    zeta: C64,
    f: &dyn PiecewiseFn,
    l: f64,
    n: usize,
) -> (Vec<f64>, Vec<C64>) {
    let h = 2.0 * l / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -l + h * i as f64).collect();
    let ghost = (C64::i() * decay_root(zeta) * h).exp();
    let h2 = h * h;
    let mut diag = vec![C64::new(0.0, 0.0); n];
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    for (i, &x) in xs.iter().enumerate() {
        let w = 0.5 * (family.eval_on(eps, x, x - 0.5 * h) + family.eval_on(eps, x, x + 0.5 * h));
        diag[i] = C64::new(2.0 / h2 + w, 0.0) - zeta;
        rhs[i] = C64::new(f.eval(x), 0.0);
    }
    diag[0] -= ghost / h2;
    diag[n - 1] -= ghost / h2;
    let off = C64::new(-1.0 / h2, 0.0);

    // Thomas algorithm with constant off-diagonals.
    let mut c = vec![C64::new(0.0, 0.0); n];
    let mut d = vec![C64::new(0.0, 0.0); n];
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    let mut y = vec![C64::new(0.0, 0.0); n];
    y[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = d[i] - c[i] * y[i + 1];
    }
    (xs, y)
}

/// Largest `|y_fd - y_eps|` over every `stride`-th finite difference node.
pub fn fd_disagreement(family: &RegularizedFamily, eps: f64, zeta: C64, f: &dyn PiecewiseFn, stride: usize) -> f64 {
    use coulomb_limit::eps_operator::apply_eps_resolvent_at;
    let (xs, y_fd) = fd_resolvent(family, eps, zeta, f, 8.0, 20_001);
    let picked: Vec<usize> = (0..xs.len()).step_by(stride).collect();
    let outputs: Vec<f64> = picked.iter().map(|&i| xs[i]).collect();
    let y = apply_eps_resolvent_at(family, eps, zeta, f, &outputs).unwrap();
    picked
        .iter()
        .map(|&i| (y.value(xs[i]).unwrap() - y_fd[i]).norm())
        .fold(0.0, f64::max)
}
