//! Closed-form solutions used for initial data, boundary data and errors.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type EvalFn = dyn Fn([f64; 2], f64, &mut [f64]) + Send + Sync;
type DerivFn = dyn Fn([f64; 2], f64, usize, &mut [f64]) + Send + Sync;

/// A solution of the physical (unaugmented) components.
#[derive(Clone)]
pub struct ExactSolution {
    pub name: String,
    pub n_comp: usize,
    eval: Arc<EvalFn>,
    /// `s`-th time derivative; `None` when only values are available.
    deriv: Option<Arc<DerivFn>>,
    /// Latest time for which the formula is meaningful.
    pub t_valid: f64,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution").field("name", &self.name).field("n_comp", &self.n_comp).finish()
    }
}

impl ExactSolution {
    pub fn new(
        name: &str,
        n_comp: usize,
        eval: impl Fn([f64; 2], f64, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        ExactSolution { name: name.into(), n_comp, eval: Arc::new(eval), deriv: None, t_valid: f64::INFINITY }
    }

    pub fn with_derivative(mut self, d: impl Fn([f64; 2], f64, usize, &mut [f64]) + Send + Sync + 'static) -> Self {
        self.deriv = Some(Arc::new(d));
        self
    }

    pub fn valid_until(mut self, t: f64) -> Self {
        self.t_valid = t;
        self
    }

    pub fn eval(&self, x: [f64; 2], t: f64, out: &mut [f64]) {
        (self.eval)(x, t, out)
    }

    pub fn value(&self, x: [f64; 2], t: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.n_comp];
        self.eval(x, t, &mut v);
        v
    }

    /// `s`-th time derivative; falls back to centered finite differences of
    /// step `dt_hint` when no closed form is attached.
    pub fn time_derivative(&self, x: [f64; 2], t: f64, s: usize, dt_hint: f64, out: &mut [f64]) {
        if s == 0 {
            return self.eval(x, t, out);
        }
        if let Some(d) = &self.deriv {
            return d(x, t, s, out);
        }
        // Centered difference of order s built from binomial weights.
        let h = dt_hint.max(1e-6);
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = vec![0.0; self.n_comp];
        let mut binom = 1.0;
        for j in 0..=s {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let tj = t + (s as f64 / 2.0 - j as f64) * h;
            self.eval(x, tj, &mut tmp);
            for (o, v) in out.iter_mut().zip(&tmp) {
                *o += sign * binom * v;
            }
            binom = binom * (s - j) as f64 / (j + 1) as f64;
        }
        let scale = h.powi(s as i32);
        out.iter_mut().for_each(|v| *v /= scale);
    }
}

/// One term `amp * sin(2 pi (k.x - omega t))`.
#[derive(Clone, Debug)]
pub struct PlaneWave {
    pub amp: Vec<f64>,
    pub k: [f64; 2],
    pub omega: f64,
}

/// Sum of sinusoidal plane waves with closed-form time derivatives.
pub fn plane_waves(name: &str, waves: Vec<PlaneWave>) -> ExactSolution {
    let n = waves[0].amp.len();
    let w1 = Arc::new(waves);
    let w2 = w1.clone();
    ExactSolution::new(name, n, move |x, t, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for w in w1.iter() {
            let s = (2.0 * PI * (w.k[0] * x[0] + w.k[1] * x[1] - w.omega * t)).sin();
            for (o, a) in out.iter_mut().zip(&w.amp) {
                *o += a * s;
            }
        }
    })
    .with_derivative(move |x, t, s, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for w in w2.iter() {
            let factor = (-2.0 * PI * w.omega).powi(s as i32);
            let arg = 2.0 * PI * (w.k[0] * x[0] + w.k[1] * x[1] - w.omega * t) + s as f64 * PI / 2.0;
            let v = factor * arg.sin();
            for (o, a) in out.iter_mut().zip(&w.amp) {
                *o += a * v;
            }
        }
    })
}

/// Periodic Gaussian pulse `exp(-a (d - 1/2)^2)` moved with velocity `b` on the
/// unit torus, where `d` is the distance-like coordinate folded into `[0,1)`.
pub fn periodic_gaussian(name: &str, dim: usize, a: f64, b: [f64; 2]) -> ExactSolution {
    ExactSolution::new(name, 1, move |x, t, out| {
        let mut r2 = 0.0;
        for d in 0..dim {
            let y = (x[d] - b[d] * t).rem_euclid(1.0);
            r2 += (y - 0.5) * (y - 0.5);
        }
        out[0] = (-a * r2).exp();
    })
}

/// Outgoing spherical wave `u = (r0 / r) sin(omega (t - r + r0))` behind the
/// front `r <= t + r0`, zero ahead of it.
pub fn spherical_wave(r0: f64, omega: f64) -> ExactSolution {
    ExactSolution::new("spherical", 1, move |x, t, out| {
        let r = x[0];
        out[0] = if r <= t + r0 { r0 / r * (omega * (t - r + r0)).sin() } else { 0.0 };
    })
    .with_derivative(move |x, t, s, out| {
        let r = x[0];
        out[0] = if r <= t + r0 {
            r0 / r * omega.powi(s as i32) * (omega * (t - r + r0) + s as f64 * PI / 2.0).sin()
        } else {
            0.0
        };
    })
}
