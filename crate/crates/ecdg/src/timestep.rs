//! Taylor-series (Lax-Wendroff type) time integration of `M u' = A u + f(t)`.
//!
//! All schemes share the derivative chain `d^0 = u`,
//! `d^s = M^-1 (A d^{s-1} + f^{(s-1)}(t))`.
//!
//! * `conserving_lw(r)`: `u^{n+1} = u^{n-1} + sum_{i<=r} 2 dt^{2i+1}/(2i+1)! d^{2i+1}`,
//!   order `2r+2`; for anti-symmetric `A` and `f = 0` it preserves
//!   `(M u^{n+1}) . u^n` exactly.
//! * `rk_lw(r)`: `u^{n+1} = u^n + sum_{1<=i<=r} dt^i/i! d^i`, order `r`.
//! * `hybrid(r)`: `conserving_lw(r)` in the interior and `rk_lw(2r+1)` on
//!   cells that touch a physical boundary.
//!
//! Two-level schemes start with one `rk_lw(2r+2)` step. Without forcing,
//! `conserving_lw` extends that step with the higher Taylor terms of its own
//! physical root `g + sqrt(1 + g^2)`, `g(z) = sum_{i<=r} z^{2i+1}/(2i+1)!`, up
//! to degree `4r+4`. The first `2r+3` coefficients agree with `exp`, and the
//! parasitic root is then barely excited, so `u^T M u` also stays flat.

use crate::error::{EcdgError, Result};
use std::str::FromStr;

/// A linear semi-discrete system `M u' = A u + f(t)`.
pub trait SemiDiscrete: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = A u`.
    fn apply(&self, u: &[f64], out: &mut [f64]);

    /// `r <- M^-1 r`.
    fn solve_mass(&self, r: &mut [f64]);

    /// Writes `f^{(s)}(t)` into `out` and returns true, or returns false when
    /// the system has no forcing.
    fn source(&self, _t: f64, _s: usize, _out: &mut [f64]) -> bool {
        false
    }

    /// Unknowns that belong to cells touching a physical boundary.
    fn boundary_mask(&self) -> Vec<bool> {
        vec![false; self.len()]
    }
}

/// `d^0 .. d^count` at time `t`.
pub fn derivative_chain(op: &dyn SemiDiscrete, u: &[f64], t: f64, count: usize) -> Vec<Vec<f64>> {
    let n = op.len();
    let mut chain = Vec::with_capacity(count + 1);
    chain.push(u.to_vec());
    let mut f = vec![0.0; n];
    for s in 1..=count {
        let mut d = vec![0.0; n];
        op.apply(&chain[s - 1], &mut d);
        if op.source(t, s - 1, &mut f) {
            for (a, b) in d.iter_mut().zip(&f) {
                *a += b;
            }
        }
        op.solve_mass(&mut d);
        chain.push(d);
    }
    chain
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// One step of the Taylor one-step scheme of order `r`.
pub fn rk_lw_step(op: &dyn SemiDiscrete, u: &[f64], t: f64, dt: f64, r: usize) -> Vec<f64> {
    let chain = derivative_chain(op, u, t, r);
    let mut out = u.to_vec();
    for i in 1..=r {
        let c = dt.powi(i as i32) / factorial(i);
        for (o, d) in out.iter_mut().zip(&chain[i]) {
            *o += c * d;
        }
    }
    out
}

/// Taylor coefficients `c_0..=c_degree` of the physical root of the
/// conserving scheme, `lambda(z) = g(z) + sqrt(1 + g(z)^2)`.
pub fn physical_root_series(r: usize, degree: usize) -> Vec<f64> {
    let mut g = vec![0.0; degree + 1];
    for i in 0..=r {
        if 2 * i + 1 <= degree {
            g[2 * i + 1] = 1.0 / factorial(2 * i + 1);
        }
    }
    let mut s = vec![0.0; degree + 1];
    s[0] = 1.0;
    for a in 0..=degree {
        for b in 0..=degree - a {
            s[a + b] += g[a] * g[b];
        }
    }
    // Square root of a series with s_0 = 1.
    let mut q = vec![0.0; degree + 1];
    q[0] = 1.0;
    for n in 1..=degree {
        let cross: f64 = (1..n).map(|j| q[j] * q[n - j]).sum();
        q[n] = (s[n] - cross) / 2.0;
    }
    q.iter().zip(&g).map(|(a, b)| a + b).collect()
}

/// First step of `conserving_lw(r)`: the truncated physical root applied to
/// `u`, or `rk_lw(2r+2)` when the system is forced.
pub fn conserving_startup_step(op: &dyn SemiDiscrete, u: &[f64], t: f64, dt: f64, r: usize) -> Vec<f64> {
    let mut probe = vec![0.0; op.len()];
    if op.source(t, 0, &mut probe) {
        return rk_lw_step(op, u, t, dt, 2 * r + 2);
    }
    let degree = 4 * r + 4;
    let c = physical_root_series(r, degree);
    let chain = derivative_chain(op, u, t, degree);
    let mut out = u.to_vec();
    for i in 1..=degree {
        let f = c[i] * dt.powi(i as i32);
        for (o, d) in out.iter_mut().zip(&chain[i]) {
            *o += f * d;
        }
    }
    out
}

/// One step of the conserving two-level scheme of order `2r+2`.
pub fn conserving_lw_step(op: &dyn SemiDiscrete, u_prev: &[f64], u: &[f64], t: f64, dt: f64, r: usize) -> Vec<f64> {
    let chain = derivative_chain(op, u, t, 2 * r + 1);
    let mut out = u_prev.to_vec();
    for i in 0..=r {
        let p = 2 * i + 1;
        let c = 2.0 * dt.powi(p as i32) / factorial(p);
        for (o, d) in out.iter_mut().zip(&chain[p]) {
            *o += c * d;
        }
    }
    out
}

/// Conserving update in the interior and `rk_lw(2r+1)` where `mask` is set.
/// Both updates reuse one derivative chain.
pub fn hybrid_step(
    op: &dyn SemiDiscrete,
    u_prev: &[f64],
    u: &[f64],
    t: f64,
    dt: f64,
    r: usize,
    mask: &[bool],
) -> Vec<f64> {
    let q = 2 * r + 1;
    let chain = derivative_chain(op, u, t, q);
    let mut out = vec![0.0; u.len()];
    for j in 0..u.len() {
        let mut v;
        if mask[j] {
            v = u[j];
            for i in 1..=q {
                v += dt.powi(i as i32) / factorial(i) * chain[i][j];
            }
        } else {
            v = u_prev[j];
            for i in 0..=r {
                let p = 2 * i + 1;
                v += 2.0 * dt.powi(p as i32) / factorial(p) * chain[p][j];
            }
        }
        out[j] = v;
    }
    out
}

/// Time integrator choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    ConservingLw(usize),
    RkLw(usize),
    Hybrid(usize),
}

impl Integrator {
    pub fn order(&self) -> usize {
        match *self {
            Integrator::ConservingLw(r) | Integrator::Hybrid(r) => 2 * r + 2,
            Integrator::RkLw(r) => r,
        }
    }

    pub fn is_two_level(&self) -> bool {
        !matches!(self, Integrator::RkLw(_))
    }

    /// Operator applications per step.
    pub fn stages(&self) -> usize {
        match *self {
            Integrator::ConservingLw(r) | Integrator::Hybrid(r) => 2 * r + 1,
            Integrator::RkLw(r) => r,
        }
    }
}

impl FromStr for Integrator {
    type Err = EcdgError;

    /// `lw<order>` with an even order of at least 2, `rk<r>` or `hybrid<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || EcdgError::Unknown { kind: "integrator", name: s.to_string() };
        let num = |p: &str| p.parse::<usize>().map_err(|_| bad());
        if let Some(rest) = s.strip_prefix("hybrid") {
            return Ok(Integrator::Hybrid(num(rest)?));
        }
        if let Some(rest) = s.strip_prefix("lw") {
            let order = num(rest)?;
            if order < 2 || order % 2 == 1 {
                return Err(bad());
            }
            return Ok(Integrator::ConservingLw(order / 2 - 1));
        }
        if let Some(rest) = s.strip_prefix("rk") {
            let r = num(rest)?;
            if r == 0 {
                return Err(bad());
            }
            return Ok(Integrator::RkLw(r));
        }
        Err(bad())
    }
}

/// `dt = cfl * length / speed`.
pub fn cfl_dt(cfl: f64, length: f64, speed: f64) -> f64 {
    cfl * length / speed
}

/// State handed to the observer after every step.
pub struct StepView<'a> {
    pub n: usize,
    pub t: f64,
    pub u: &'a [f64],
    /// Previous level, available after the first step.
    pub u_prev: Option<&'a [f64]>,
}

/// Integrates from `t0` to `t_final` with the largest uniform step not
/// exceeding `dt_max`. Returns the final state, or a numerical error if the
/// solution stops being finite.
pub fn integrate(
    op: &dyn SemiDiscrete,
    integ: Integrator,
    u0: &[f64],
    t0: f64,
    t_final: f64,
    dt_max: f64,
    mut observer: impl FnMut(&StepView<'_>),
) -> Result<Vec<f64>> {
    if !(dt_max > 0.0) || !(t_final >= t0) {
        return Err(EcdgError::Invalid(format!("bad time interval [{t0}, {t_final}] or step {dt_max}")));
    }
    let steps = ((t_final - t0) / dt_max - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(u0.to_vec());
    }
    let dt = (t_final - t0) / steps as f64;
    let mask = match integ {
        Integrator::Hybrid(_) => op.boundary_mask(),
        _ => vec![],
    };
    if matches!(integ, Integrator::Hybrid(_)) && !mask.iter().any(|&b| b) {
        return Err(EcdgError::Invalid("hybrid stepping needs cells on a physical boundary".into()));
    }
    let mut prev: Option<Vec<f64>> = None;
    let mut u = u0.to_vec();
    observer(&StepView { n: 0, t: t0, u: &u, u_prev: None });
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        let next = match (integ, &prev) {
            (Integrator::RkLw(r), _) => rk_lw_step(op, &u, t, dt, r),
            (Integrator::ConservingLw(r), None) => conserving_startup_step(op, &u, t, dt, r),
            (Integrator::Hybrid(r), None) => rk_lw_step(op, &u, t, dt, 2 * r + 2),
            (Integrator::ConservingLw(r), Some(p)) => conserving_lw_step(op, p, &u, t, dt, r),
            (Integrator::Hybrid(r), Some(p)) => hybrid_step(op, p, &u, t, dt, r, &mask),
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(EcdgError::Numerical(format!("solution became non-finite at t = {:.6}", t + dt)));
        }
        prev = Some(std::mem::replace(&mut u, next));
        observer(&StepView { n: n + 1, t: t0 + (n + 1) as f64 * dt, u: &u, u_prev: prev.as_deref() });
    }
    Ok(u)
}

/// Dense linear system `M u' = A u + f(t)` for small test problems.
pub struct DenseSystem {
    pub a: crate::algebra::Mat,
    pub mass_diag: Vec<f64>,
    pub forcing: Option<Box<dyn Fn(f64, usize, &mut [f64]) + Sync>>,
}

impl DenseSystem {
    pub fn new(a: crate::algebra::Mat) -> Self {
        let n = a.rows();
        DenseSystem { a, mass_diag: vec![1.0; n], forcing: None }
    }

    /// `u' = [[0, w], [-w, 0]] u`, whose flow is a rotation by angle `w t`.
    pub fn rotation(omega: f64) -> Self {
        DenseSystem::new(crate::algebra::Mat::from_rows(&[vec![0.0, omega], vec![-omega, 0.0]]))
    }
}

impl SemiDiscrete for DenseSystem {
    fn len(&self) -> usize {
        self.a.rows()
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        self.a.matvec_into(u, out);
    }

    fn solve_mass(&self, r: &mut [f64]) {
        for (v, m) in r.iter_mut().zip(&self.mass_diag) {
            *v /= m;
        }
    }

    fn source(&self, t: f64, s: usize, out: &mut [f64]) -> bool {
        match &self.forcing {
            Some(f) => {
                f(t, s, out);
                true
            }
            None => false,
        }
    }
}
