//! Orthonormal modal bases and quadrature on the reference interval `[0,1]`,
//! square `[0,1]^2` and triangle `{(0,0), (1,0), (0,1)}`.
//!
//! Every basis is orthonormal with respect to the plain reference integral, so
//! the physical mass matrix of an affine cell is `|det J|` times the identity.

use crate::error::{invalid, Result};

/// Reference element shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefElement {
    Interval,
    Quad,
    Triangle,
}

impl RefElement {
    pub fn dim(self) -> usize {
        match self {
            RefElement::Interval => 1,
            _ => 2,
        }
    }

    pub fn n_faces(self) -> usize {
        match self {
            RefElement::Interval => 2,
            RefElement::Quad => 4,
            RefElement::Triangle => 3,
        }
    }

    /// Reference vertices in counterclockwise order (interval: left, right).
    pub fn vertices(self) -> Vec<[f64; 2]> {
        match self {
            RefElement::Interval => vec![[0.0, 0.0], [1.0, 0.0]],
            RefElement::Quad => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            RefElement::Triangle => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn measure(self) -> f64 {
        match self {
            RefElement::Triangle => 0.5,
            _ => 1.0,
        }
    }

    /// Point on face `face` at edge parameter `s in [0,1]`; edge `i` runs from
    /// vertex `i` to vertex `i+1`. Interval faces are the two endpoints.
    pub fn face_point(self, face: usize, s: f64) -> [f64; 2] {
        let v = self.vertices();
        match self {
            RefElement::Interval => v[face],
            _ => {
                let a = v[face];
                let b = v[(face + 1) % v.len()];
                [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
            }
        }
    }
}

/// Quadrature rule; 1D rules store the coordinate in `points[q][0]`.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
        let d2 = d0 + (2.0 * jf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Gauss rule on `[0,1]` exact for polynomials of degree `exactness`.
pub fn line_quadrature(exactness: usize) -> Quadrature {
    let n = exactness / 2 + 1;
    let (x, w) = gauss_legendre(n);
    Quadrature {
        points: x.iter().map(|&xi| [0.5 * (xi + 1.0), 0.0]).collect(),
        weights: w.iter().map(|wi| 0.5 * wi).collect(),
    }
}

/// Volume rule on the reference element exact to polynomial degree `exactness`.
/// Triangles use the collapsed (Duffy) tensor rule.
pub fn volume_quadrature(elem: RefElement, exactness: usize) -> Quadrature {
    match elem {
        RefElement::Interval => line_quadrature(exactness),
        RefElement::Quad => {
            let g = line_quadrature(exactness);
            let mut q = Quadrature { points: vec![], weights: vec![] };
            for (pj, wj) in g.points.iter().zip(&g.weights) {
                for (pi, wi) in g.points.iter().zip(&g.weights) {
                    q.points.push([pi[0], pj[0]]);
                    q.weights.push(wi * wj);
                }
            }
            q
        }
        RefElement::Triangle => {
            // The collapsed map adds one degree in the first variable.
            let gu = line_quadrature(exactness + 1);
            let gv = line_quadrature(exactness);
            let mut q = Quadrature { points: vec![], weights: vec![] };
            for (pu, wu) in gu.points.iter().zip(&gu.weights) {
                for (pv, wv) in gv.points.iter().zip(&gv.weights) {
                    let u = pu[0];
                    q.points.push([u, pv[0] * (1.0 - u)]);
                    q.weights.push(wu * wv * (1.0 - u));
                }
            }
            q
        }
    }
}

/// Modal basis of total degree `k` (tensor degree `k` on the square).
#[derive(Clone, Debug)]
pub struct ReferenceBasis {
    pub elem: RefElement,
    pub k: usize,
    n_modes: usize,
    /// Triangle only: rows are modes, columns are coefficients on the
    /// collapsed orthogonal basis.
    tri_coef: Vec<Vec<f64>>,
}

/// Scaled Legendre value `sqrt(2i+1) P_i(2x-1)` and its x-derivative.
fn shifted_legendre(i: usize, x: f64) -> (f64, f64) {
    let (p, dp) = legendre_with_derivative(i, 2.0 * x - 1.0);
    let c = (2.0 * i as f64 + 1.0).sqrt();
    (c * p, 2.0 * c * dp)
}

/// Values and partial derivatives of `L_a(x) L_b(y)` for each exponent pair.
fn legendre_products(exps: &[(usize, usize)], x: [f64; 2]) -> Vec<f64> {
    let deg = exps.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    let lx: Vec<f64> = (0..=deg).map(|i| shifted_legendre(i, x[0]).0).collect();
    let ly: Vec<f64> = (0..=deg).map(|i| shifted_legendre(i, x[1]).0).collect();
    exps.iter().map(|&(a, b)| lx[a] * ly[b]).collect()
}

/// Jacobi `P_n^{(alpha,0)}(z)` for `n = 0..=deg` with z-derivatives.
fn jacobi_alpha0(deg: usize, alpha: f64, z: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(1.0, 0.0)];
    if deg >= 1 {
        out.push((0.5 * ((alpha + 2.0) * z + alpha), 0.5 * (alpha + 2.0)));
    }
    for n in 1..deg {
        let nf = n as f64;
        let s = 2.0 * nf + alpha;
        let lhs = 2.0 * (nf + 1.0) * (nf + alpha + 1.0) * s;
        let a1 = (s + 1.0) * ((s + 2.0) * s * z + alpha * alpha);
        let a1d = (s + 1.0) * (s + 2.0) * s;
        let a2 = 2.0 * nf * (nf + alpha) * (s + 2.0);
        let (p, dp) = out[n];
        let (pm, dpm) = out[n - 1];
        out.push(((a1 * p - a2 * pm) / lhs, (a1d * p + a1 * dp - a2 * dpm) / lhs));
    }
    out
}

/// Collapsed-coordinate orthogonal basis on the reference triangle, unnormalized:
/// `psi_pq = s^p P_p(t/s) P_q^{(2p+1,0)}(2y-1)` with `s = 1-y`, `t = 2x+y-1`.
/// `s^p P_p(t/s)` runs through the homogenized Legendre recurrence, so nothing
/// is divided by `s` and the top vertex needs no special case.
/// Returns values and `[d/dx, d/dy]`, ordered by `dubiner_index`.
fn dubiner(k: usize, x: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let s = 1.0 - x[1];
    let t = 2.0 * x[0] + x[1] - 1.0;
    // F_p and its gradient (dt = (2,1), ds = (0,-1)).
    let mut f = vec![(1.0, [0.0, 0.0])];
    if k >= 1 {
        f.push((t, [2.0, 1.0]));
    }
    for n in 1..k {
        let nf = n as f64;
        let (fn_, dfn) = f[n];
        let (fm, dfm) = f[n - 1];
        let v = ((2.0 * nf + 1.0) * t * fn_ - nf * s * s * fm) / (nf + 1.0);
        let g = |d: usize, dt: f64, ds: f64| {
            ((2.0 * nf + 1.0) * (dt * fn_ + t * dfn[d]) - nf * (2.0 * s * ds * fm + s * s * dfm[d])) / (nf + 1.0)
        };
        f.push((v, [g(0, 2.0, 0.0), g(1, 1.0, -1.0)]));
    }
    let n = (k + 1) * (k + 2) / 2;
    let mut vals = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    for p in 0..=k {
        let jac = jacobi_alpha0(k - p, 2.0 * p as f64 + 1.0, 2.0 * x[1] - 1.0);
        for (q, &(jv, jd)) in jac.iter().enumerate() {
            let i = dubiner_index(p, q);
            let (fv, fd) = f[p];
            vals[i] = fv * jv;
            grads[i] = [fd[0] * jv, fd[1] * jv + fv * 2.0 * jd];
        }
    }
    (vals, grads)
}

fn dubiner_index(p: usize, q: usize) -> usize {
    let d = p + q;
    d * (d + 1) / 2 + q
}

impl ReferenceBasis {
    pub fn new(elem: RefElement, k: usize) -> Result<Self> {
        if k > 8 {
            return invalid(format!("polynomial degree {k} is not supported (max 8)"));
        }
        let mut b = ReferenceBasis { elem, k, n_modes: 0, tri_coef: vec![] };
        b.n_modes = match elem {
            RefElement::Interval => k + 1,
            RefElement::Quad => (k + 1) * (k + 1),
            RefElement::Triangle => {
                b.build_triangle();
                (k + 1) * (k + 2) / 2
            }
        };
        Ok(b)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Orthonormalizes the graded monomial sequence `x^{d-b} y^b`. The work is
    /// done in coordinates of the collapsed orthogonal basis, where the L2
    /// inner product is the Euclidean one, so Gram-Schmidt is well conditioned.
    /// Monomials enter through Legendre products `L_a(x) L_b(y)`, which differ
    /// from `x^a y^b` by lower-degree terms only and so give the same nested spans.
    fn build_triangle(&mut self) {
        let k = self.k;
        let exps: Vec<(usize, usize)> = (0..=k).flat_map(|d| (0..=d).map(move |b| (d - b, b))).collect();
        let nm = exps.len();
        let q = volume_quadrature(RefElement::Triangle, 2 * k);
        let psi: Vec<Vec<f64>> = q.points.iter().map(|&p| dubiner(k, p).0).collect();
        let norms: Vec<f64> = (0..nm)
            .map(|m| q.weights.iter().zip(&psi).map(|(w, v)| w * v[m] * v[m]).sum::<f64>().sqrt())
            .collect();
        // Column j: coordinates of the j-th Legendre product.
        let mut cols: Vec<Vec<f64>> = vec![vec![0.0; nm]; nm];
        for ((p, w), pv) in q.points.iter().zip(&q.weights).zip(&psi) {
            let l = legendre_products(&exps, *p);
            for (j, lj) in l.iter().enumerate() {
                for m in 0..nm {
                    cols[j][m] += w * lj * pv[m] / norms[m];
                }
            }
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut coef: Vec<Vec<f64>> = Vec::with_capacity(nm);
        for mut c in cols {
            // Modified Gram-Schmidt with one reorthogonalization pass.
            for _ in 0..2 {
                for prev in &coef {
                    let d = dot(&c, prev);
                    for (ci, pi) in c.iter_mut().zip(prev) {
                        *ci -= d * pi;
                    }
                }
            }
            let nrm = dot(&c, &c).sqrt();
            c.iter_mut().for_each(|v| *v /= nrm);
            coef.push(c);
        }
        for c in coef.iter_mut() {
            for (v, n) in c.iter_mut().zip(&norms) {
                *v /= n;
            }
        }
        self.tri_coef = coef;
    }

    /// Basis values at a reference point.
    pub fn eval(&self, x: [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_modes];
        self.eval_into(x, &mut out, None);
        out
    }

    /// Reference gradients `[d/dxi, d/deta]` at a reference point.
    pub fn grad(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let mut vals = vec![0.0; self.n_modes];
        let mut g = vec![[0.0; 2]; self.n_modes];
        self.eval_into(x, &mut vals, Some(&mut g));
        g
    }

    fn eval_into(&self, x: [f64; 2], out: &mut [f64], grad: Option<&mut [[f64; 2]]>) {
        let k = self.k;
        match self.elem {
            RefElement::Interval => {
                let mut g = grad;
                for i in 0..=k {
                    let (v, d) = shifted_legendre(i, x[0]);
                    out[i] = v;
                    if let Some(g) = g.as_deref_mut() {
                        g[i] = [d, 0.0];
                    }
                }
            }
            RefElement::Quad => {
                let lx: Vec<(f64, f64)> = (0..=k).map(|i| shifted_legendre(i, x[0])).collect();
                let ly: Vec<(f64, f64)> = (0..=k).map(|j| shifted_legendre(j, x[1])).collect();
                let mut g = grad;
                for j in 0..=k {
                    for i in 0..=k {
                        let idx = j * (k + 1) + i;
                        out[idx] = lx[i].0 * ly[j].0;
                        if let Some(g) = g.as_deref_mut() {
                            g[idx] = [lx[i].1 * ly[j].0, lx[i].0 * ly[j].1];
                        }
                    }
                }
            }
            RefElement::Triangle => {
                let (mv, mg) = dubiner(k, x);
                let mdx: Vec<f64> = mg.iter().map(|g| g[0]).collect();
                let mdy: Vec<f64> = mg.iter().map(|g| g[1]).collect();
                let mut g = grad;
                for (i, c) in self.tri_coef.iter().enumerate() {
                    out[i] = c.iter().zip(&mv).map(|(a, b)| a * b).sum();
                    if let Some(g) = g.as_deref_mut() {
                        g[i] = [
                            c.iter().zip(&mdx).map(|(a, b)| a * b).sum(),
                            c.iter().zip(&mdy).map(|(a, b)| a * b).sum(),
                        ];
                    }
                }
            }
        }
    }

    /// Basis values on face `face` at the given edge parameters (rows = points).
    pub fn face_trace(&self, face: usize, params: &[f64]) -> Vec<Vec<f64>> {
        params.iter().map(|&s| self.eval(self.elem.face_point(face, s))).collect()
    }
}
