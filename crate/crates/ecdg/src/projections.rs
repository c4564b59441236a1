//! Gauss-Radau projections on 1D meshes and the coupled projections whose
//! interface conditions mirror the energy-conserving fluxes. They are used to
//! study optimal convergence; none of them enters the time stepping.

use crate::algebra::{eig_decompose, Mat};
use crate::error::{invalid, Result};
use crate::operator::{DgState, Discretization};
use crate::systems::{SymmetricSystem, SystemKind};

/// Which endpoint a Gauss-Radau projection interpolates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadauSide {
    /// Matches the value at the left endpoint of each cell.
    Plus,
    /// Matches the value at the right endpoint of each cell.
    Minus,
}

fn require_1d(disc: &Discretization) -> Result<()> {
    if disc.dim != 1 {
        return invalid("Gauss-Radau projections are defined on 1D meshes");
    }
    Ok(())
}

/// Moments `(1/h) int u phi_i` for all modes of every cell.
fn moments(disc: &Discretization, u: &dyn Fn(f64) -> f64) -> Vec<f64> {
    let nm = disc.n_modes();
    let mut out = vec![0.0; disc.n_cells() * nm];
    disc.for_each_point(2 * disc.k() + 8, |c, x, w, phi| {
        let v = u(x[0]) * w / disc.cells[c].det;
        for i in 0..nm {
            out[c * nm + i] += v * phi[i];
        }
    });
    out
}

/// Polynomial of degree `k` per cell with the moments of `u` against degree
/// `k-1` and the endpoint value of `u` on the chosen side.
pub fn gauss_radau(disc: &Discretization, u: &dyn Fn(f64) -> f64, side: RadauSide) -> Result<DgState> {
    require_1d(disc)?;
    let nm = disc.n_modes();
    let k = disc.k();
    let mom = moments(disc, u);
    let xi = match side {
        RadauSide::Plus => 0.0,
        RadauSide::Minus => 1.0,
    };
    let phi_e = disc.basis.eval([xi, 0.0]);
    let mut st = DgState { data: vec![0.0; disc.n_cells() * nm], m: 1, n_modes: nm };
    for (c, cell) in disc.cells.iter().enumerate() {
        let coef = &mut st.data[c * nm..(c + 1) * nm];
        coef[..k].copy_from_slice(&mom[c * nm..c * nm + k]);
        let x_e = cell.to_physical([xi, 0.0])[0];
        let partial: f64 = (0..k).map(|i| coef[i] * phi_e[i]).sum();
        coef[k] = (u(x_e) - partial) / phi_e[k];
    }
    Ok(st)
}

fn combine(a: &DgState, b: &DgState, sa: f64, sb: f64) -> DgState {
    DgState { data: a.data.iter().zip(&b.data).map(|(x, y)| sa * x + sb * y).collect(), m: 1, n_modes: a.n_modes }
}

/// Coupled projection of `(u, phi)` for doubled advection:
/// `P1 = (P+(u+phi) + P-(u-phi)) / 2`, `P2 = (P+(u+phi) - P-(u-phi)) / 2`.
pub fn coupled_advection(
    disc: &Discretization,
    u: &dyn Fn(f64) -> f64,
    phi: &dyn Fn(f64) -> f64,
) -> Result<(DgState, DgState)> {
    let sum = |x: f64| u(x) + phi(x);
    let diff = |x: f64| u(x) - phi(x);
    let pp = gauss_radau(disc, &sum, RadauSide::Plus)?;
    let pm = gauss_radau(disc, &diff, RadauSide::Minus)?;
    Ok((combine(&pp, &pm, 0.5, 0.5), combine(&pp, &pm, 0.5, -0.5)))
}

/// Coupled projection for subsonic 1D acoustics, built in the characteristic
/// variables `w = S^T u` of `B1 = S diag(l+, l-) S^T`. With
/// `a = sqrt(-l- / l+)` the characteristic components are
/// `W1 = (P+(w1 + a w2) + P-(w1 - a w2)) / 2` and
/// `W2 = (P+(w1 + a w2) - P-(w1 - a w2)) / (2a)`.
pub fn coupled_acoustics(
    disc: &Discretization,
    sys: &SymmetricSystem,
    u: &dyn Fn(f64) -> [f64; 2],
) -> Result<DgState> {
    require_1d(disc)?;
    if sys.kind != SystemKind::Acoustics1D || sys.m != 2 {
        return invalid("the coupled acoustics projection needs the 1D acoustics system");
    }
    let e = eig_decompose(&sys.b1, 1e-12)?;
    let (lp, lm) = (e.lambdas[0], e.lambdas[1]);
    if !(lp > 0.0 && lm < 0.0) {
        return invalid("the coupled acoustics projection needs a subsonic background (l+ > 0 > l-)");
    }
    // The transform relies on S commuting with the rotation [[0,1],[-1,0]],
    // which holds only for det S = +1.
    let mut s = e.s.clone();
    if s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)] < 0.0 {
        s[(0, 1)] = -s[(0, 1)];
        s[(1, 1)] = -s[(1, 1)];
    }
    let a = (-lm / lp).sqrt();
    let sw = s.clone();
    let w = move |x: f64| {
        let v = u(x);
        [sw[(0, 0)] * v[0] + sw[(1, 0)] * v[1], sw[(0, 1)] * v[0] + sw[(1, 1)] * v[1]]
    };
    let plus_arg = |x: f64| {
        let v = w(x);
        v[0] + a * v[1]
    };
    let minus_arg = |x: f64| {
        let v = w(x);
        v[0] - a * v[1]
    };
    let pp = gauss_radau(disc, &plus_arg, RadauSide::Plus)?;
    let pm = gauss_radau(disc, &minus_arg, RadauSide::Minus)?;
    let w1 = combine(&pp, &pm, 0.5, 0.5);
    let w2 = combine(&pp, &pm, 0.5 / a, -0.5 / a);
    let nm = disc.n_modes();
    let mut out = DgState { data: vec![0.0; disc.n_cells() * 2 * nm], m: 2, n_modes: nm };
    for c in 0..disc.n_cells() {
        for i in 0..nm {
            let (x1, x2) = (w1.data[c * nm + i], w2.data[c * nm + i]);
            out.data[(c * 2) * nm + i] = s[(0, 0)] * x1 + s[(0, 1)] * x2;
            out.data[(c * 2 + 1) * nm + i] = s[(1, 0)] * x1 + s[(1, 1)] * x2;
        }
    }
    Ok(out)
}

/// Largest violation of the defining conditions of a projection `p` of `u`:
/// the moments of `p - u` against degree `k-1` in every cell, and at every
/// interface `mean {p} + jump [p] = mean u` evaluated with the given matrices.
/// Interfaces wrap around periodically.
pub fn coupled_residual(
    disc: &Discretization,
    p: &DgState,
    u: &dyn Fn(f64) -> Vec<f64>,
    mean: &Mat,
    jump: &Mat,
) -> f64 {
    let m = p.m;
    let nm = p.n_modes;
    let k = disc.k();
    let mut worst: f64 = 0.0;
    let mut mom = vec![0.0; disc.n_cells() * m * nm];
    disc.for_each_point(2 * k + 8, |c, x, w, phi| {
        let uv = u(x[0]);
        let scale = w / disc.cells[c].det;
        for comp in 0..m {
            let ph: f64 = (0..nm).map(|i| p.data[p.idx(c, comp, i)] * phi[i]).sum();
            for i in 0..nm {
                mom[(c * m + comp) * nm + i] += scale * (ph - uv[comp]) * phi[i];
            }
        }
    });
    for c in 0..disc.n_cells() {
        for comp in 0..m {
            for i in 0..k {
                worst = worst.max(mom[(c * m + comp) * nm + i].abs());
            }
        }
    }
    let left = disc.basis.eval([0.0, 0.0]);
    let right = disc.basis.eval([1.0, 0.0]);
    let n = disc.n_cells();
    for j in 0..n {
        let prev = (j + n - 1) % n;
        let x = disc.cells[j].origin[0];
        let trace = |c: usize, t: &[f64]| -> Vec<f64> {
            (0..m).map(|comp| (0..nm).map(|i| p.data[p.idx(c, comp, i)] * t[i]).sum()).collect()
        };
        let um = trace(prev, &right);
        let up = trace(j, &left);
        let avg: Vec<f64> = um.iter().zip(&up).map(|(a, b)| 0.5 * (a + b)).collect();
        let jmp: Vec<f64> = um.iter().zip(&up).map(|(a, b)| b - a).collect();
        let lhs = mean.matvec(&avg);
        let lj = jump.matvec(&jmp);
        let rhs = mean.matvec(&u(x));
        for r in 0..m {
            worst = worst.max((lhs[r] + lj[r] - rhs[r]).abs());
        }
    }
    worst
}
