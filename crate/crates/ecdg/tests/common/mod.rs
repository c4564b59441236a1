//! Oracles shared by the projection tests and the acceptance target.
#![allow(dead_code)]

use ecdg::algebra::{Lu, Mat};
use ecdg::mesh::Mesh1D;
use ecdg::operator::{DgState, Discretization};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub fn disc(n: usize, k: usize, perturb: f64, seed: u64) -> Discretization {
    let m = Mesh1D::uniform(0.0, 1.0, n, true).unwrap().perturbed(perturb, seed).unwrap();
    Discretization::from_mesh1d(&m, k).unwrap()
}

pub fn value(d: &Discretization, st: &DgState, comp: usize, cell: usize, xi: f64) -> f64 {
    let phi = d.basis.eval([xi, 0.0]);
    (0..st.n_modes).map(|i| st.data[st.idx(cell, comp, i)] * phi[i]).sum()
}

pub fn l2_error(d: &Discretization, st: &DgState, comp: usize, f: &dyn Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    d.for_each_point(2 * d.k() + 8, |c, x, w, phi| {
        let ph: f64 = (0..st.n_modes).map(|i| st.data[st.idx(c, comp, i)] * phi[i]).sum();
        acc += w * (ph - f(x[0])).powi(2);
    });
    acc.sqrt()
}

/// Moments `(1/h) int (p - u) phi_i` for `i < k`, max over cells.
pub fn moment_defect(d: &Discretization, st: &DgState, f: &dyn Fn(f64) -> f64) -> f64 {
    let nm = d.n_modes();
    let mut mom = vec![0.0; d.n_cells() * nm];
    d.for_each_point(2 * d.k() + 8, |c, x, w, phi| {
        let ph: f64 = (0..nm).map(|i| st.data[st.idx(c, 0, i)] * phi[i]).sum();
        for i in 0..nm {
            mom[c * nm + i] += w / d.cells[c].det * (ph - f(x[0])) * phi[i];
        }
    });
    (0..d.n_cells()).flat_map(|c| (0..d.k()).map(move |i| c * nm + i)).fold(0.0, |a, i| a.max(mom[i].abs()))
}

/// Random periodic trigonometric polynomial.
pub fn random_wave(rng: &mut ChaCha8Rng) -> impl Fn(f64) -> f64 {
    let c: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..TAU))).collect();
    move |x| c[0].0 + (1..4).map(|i| c[i].0 * (TAU * i as f64 * x + c[i].1).sin()).sum::<f64>()
}

/// Solves the defining conditions of a coupled projection as one global linear system:
/// cell moments against degree `k-1` plus `mean {p} + jump [p] = mean u` at every
/// periodic interface. Independent of the characteristic transform.
pub fn global_solve(d: &Discretization, u: &dyn Fn(f64) -> Vec<f64>, mean: &Mat, jump: &Mat) -> DgState {
    let (n, nm, k) = (d.n_cells(), d.n_modes(), d.k());
    let m = mean.rows();
    let size = n * m * nm;
    let mut a = Mat::zeros(size, size);
    let mut b = vec![0.0; size];
    let var = |c: usize, comp: usize, i: usize| (c * m + comp) * nm + i;
    let mut gram = vec![vec![0.0; nm * nm]; n];
    let mut rhs = vec![0.0; size];
    d.for_each_point(2 * k + 8, |c, x, w, phi| {
        let uv = u(x[0]);
        for i in 0..nm {
            for l in 0..nm {
                gram[c][i * nm + l] += w * phi[i] * phi[l];
            }
            for comp in 0..m {
                rhs[var(c, comp, i)] += w * uv[comp] * phi[i];
            }
        }
    });
    let mut row = 0;
    for c in 0..n {
        for comp in 0..m {
            for i in 0..k {
                for l in 0..nm {
                    a[(row, var(c, comp, l))] = gram[c][i * nm + l];
                }
                b[row] = rhs[var(c, comp, i)];
                row += 1;
            }
        }
    }
    let left = d.basis.eval([0.0, 0.0]);
    let right = d.basis.eval([1.0, 0.0]);
    for j in 0..n {
        let prev = (j + n - 1) % n;
        let target = mean.matvec(&u(d.cells[j].origin[0]));
        for r in 0..m {
            for s in 0..m {
                let (cm, cp) = (0.5 * mean[(r, s)] - jump[(r, s)], 0.5 * mean[(r, s)] + jump[(r, s)]);
                for i in 0..nm {
                    a[(row, var(prev, s, i))] += cm * right[i];
                    a[(row, var(j, s, i))] += cp * left[i];
                }
            }
            b[row] = target[r];
            row += 1;
        }
    }
    assert_eq!(row, size);
    DgState { data: Lu::factor(&a).unwrap().solve(&b), m, n_modes: nm }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Interleaves two scalar states into one two-component state.
pub fn stack(a: &DgState, b: &DgState) -> DgState {
    let nm = a.n_modes;
    let n = a.data.len() / nm;
    let mut data = Vec::with_capacity(2 * a.data.len());
    for c in 0..n {
        data.extend_from_slice(&a.data[c * nm..(c + 1) * nm]);
        data.extend_from_slice(&b.data[c * nm..(c + 1) * nm]);
    }
    DgState { data, m: 2, n_modes: nm }
}
