//! Small dense linear algebra: a row-major matrix type, a deterministic
//! Jacobi eigen-solver for symmetric coefficient matrices, eigenvalue pairing
//! and the anti-symmetric coupler built from it.

use crate::error::{invalid, EcdgError, Result};
use std::fmt;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Block-diagonal concatenation.
    pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
        let mut m = Mat::zeros(a.rows + b.rows, a.cols + b.cols);
        m.set_block(0, 0, a);
        m.set_block(a.rows, a.cols, b);
        m
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == 0.0))
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))
                .unwrap_or(c);
            if a[(p, c)] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            det *= a[(c, c)];
            for r in c + 1..n {
                let f = a[(r, c)] / a[(c, c)];
                for j in c..n {
                    a[(r, j)] -= f * a[(c, j)];
                }
            }
        }
        det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Inverse of a small square matrix by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Mat> {
        let lu = Lu::factor(self)?;
        let n = self.rows;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// LU factorization with partial pivoting, used for small dense solves.
#[derive(Clone, Debug)]
pub struct Lu {
    a: Mat,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(m: &Mat) -> Result<Lu> {
        if !m.is_square() {
            return invalid("LU factorization needs a square matrix");
        }
        let n = m.rows;
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))
                .unwrap_or(c);
            if a[(p, c)].abs() <= 1e-14 * scale {
                return Err(EcdgError::Singular("LU factorization"));
            }
            if p != c {
                a.swap_rows(p, c);
                perm.swap(p, c);
            }
            for r in c + 1..n {
                let f = a[(r, c)] / a[(c, c)];
                a[(r, c)] = f;
                for j in c + 1..n {
                    a[(r, j)] -= f * a[(c, j)];
                }
            }
        }
        Ok(Lu { a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.a.rows;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.a[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.a[(i, j)] * x[j];
            }
            x[i] /= self.a[(i, i)];
        }
        x
    }
}

/// A square matrix whose symmetry has been checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix(Mat);

impl SymMatrix {
    /// Accepts `m` when `|m_ij - m_ji| <= 1e-14 max|m|`, then symmetrizes exactly.
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return invalid(format!("matrix is {}x{}, not square", m.rows(), m.cols()));
        }
        let tol = 1e-14 * m.max_abs();
        if !m.is_symmetric(tol) {
            return invalid("matrix is not symmetric");
        }
        let mut s = m;
        for i in 0..s.rows() {
            for j in 0..i {
                let v = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        Ok(SymMatrix(s))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        SymMatrix::new(Mat::from_rows(rows))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Mat::zeros(n, n))
    }

    pub fn diag(d: &[f64]) -> Self {
        SymMatrix(Mat::diag(d))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// `a*self + b*other`, which stays symmetric.
    pub fn combine(&self, a: f64, other: &SymMatrix, b: f64) -> SymMatrix {
        SymMatrix(self.0.scale(a).add(&other.0.scale(b)))
    }

    pub fn block_diag(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
        SymMatrix(Mat::block_diag(&a.0, &b.0))
    }
}

/// Sorted eigen-decomposition `B = S diag(lambdas) S^T` with its pairing structure.
///
/// When positives outnumber negatives, the `r` largest positive eigenvalues are
/// unpaired and the remaining `s` positives pair with the negatives from the
/// outside in. The mirrored rule applies when negatives are the majority.
#[derive(Clone, Debug)]
pub struct EigenPairing {
    pub lambdas: Vec<f64>,
    pub s: Mat,
    /// Number of unpaired eigenvalues (all of the majority sign).
    pub r: usize,
    /// Number of (positive, negative) pairs.
    pub s_pairs: usize,
    pub zero_count: usize,
    pub majority_negative: bool,
    /// Index pairs `(i, j)` into `lambdas`, with `lambdas[i] > 0 > lambdas[j]`.
    pub pairs: Vec<(usize, usize)>,
}

impl EigenPairing {
    /// Assembles a pairing from explicit parts, for example when an augmented
    /// system prescribes which characteristic couples with which auxiliary.
    pub fn from_parts(lambdas: Vec<f64>, s: Mat, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = lambdas.len();
        if s.rows() != n || s.cols() != n {
            return invalid("eigenvector matrix does not match the eigenvalue count");
        }
        for &(i, j) in &pairs {
            if i >= n || j >= n || lambdas[i] <= 0.0 || lambdas[j] >= 0.0 {
                return invalid(format!("pair ({i}, {j}) does not join a positive to a negative eigenvalue"));
            }
        }
        let pos = lambdas.iter().filter(|&&l| l > 0.0).count();
        let neg = lambdas.iter().filter(|&&l| l < 0.0).count();
        let zero_count = n - pos - neg;
        let s_pairs = pairs.len();
        Ok(EigenPairing {
            r: pos.max(neg) - s_pairs,
            s_pairs,
            zero_count,
            majority_negative: neg > pos,
            lambdas,
            s,
            pairs,
        })
    }

    /// Reconstructs `S diag(lambdas) S^T`.
    pub fn reconstruct(&self) -> Mat {
        let d = Mat::diag(&self.lambdas);
        self.s.matmul(&d).matmul(&self.s.transpose())
    }
}

/// Cyclic Jacobi eigen-decomposition with a deterministic orientation of the
/// eigenvectors: eigenvalues sorted in descending order, degenerate clusters
/// re-spanned by Gram-Schmidt against the canonical axes, each column signed
/// so its largest entry is positive, and `det S = +1` enforced by negating
/// the last column if needed. Eigenvalues below `zero_tol * ||m||_F` are zero.
pub fn eig_decompose(m: &SymMatrix, zero_tol: f64) -> Result<EigenPairing> {
    let n = m.n();
    let (mut vals, mut vecs) = jacobi(m.mat())?;
    let norm = m.mat().frobenius();
    let zero_abs = zero_tol * norm;
    for v in vals.iter_mut() {
        if v.abs() <= zero_abs {
            *v = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let lambdas: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut s = Mat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            s[(r, c)] = vecs[(r, i)];
        }
    }
    vals.clear();
    vecs = s;

    // Re-span degenerate clusters so the basis does not depend on rotation order.
    let cluster_tol = 1e-10 * norm.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (lambdas[end - 1] - lambdas[end]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            orient_cluster(&mut vecs, start, end);
        }
        start = end;
    }

    for c in 0..n {
        let col = vecs.column(c);
        let big = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let lead = col.iter().position(|v| v.abs() >= big * (1.0 - 1e-12)).unwrap_or(0);
        if col[lead] < 0.0 {
            for r in 0..n {
                vecs[(r, c)] = -vecs[(r, c)];
            }
        }
    }
    if n > 0 && vecs.det() < 0.0 {
        for r in 0..n {
            vecs[(r, n - 1)] = -vecs[(r, n - 1)];
        }
    }

    let pos = lambdas.iter().filter(|&&l| l > 0.0).count();
    let neg = lambdas.iter().filter(|&&l| l < 0.0).count();
    let s_pairs = pos.min(neg);
    let r = pos.max(neg) - s_pairs;
    let majority_negative = neg > pos;
    let pairs = (1..=s_pairs)
        .map(|mu| if majority_negative { (mu - 1, n - r - mu) } else { (r + mu - 1, n - mu) })
        .collect();

    Ok(EigenPairing { lambdas, s: vecs, r, s_pairs, zero_count: n - pos - neg, majority_negative, pairs })
}

fn orient_cluster(vecs: &mut Mat, start: usize, end: usize) {
    let n = vecs.rows();
    let width = end - start;
    let basis: Vec<Vec<f64>> = (start..end).map(|c| vecs.column(c)).collect();
    let mut chosen: Vec<Vec<f64>> = Vec::with_capacity(width);
    for axis in 0..n {
        if chosen.len() == width {
            break;
        }
        // Projection of the canonical axis onto the cluster subspace.
        let mut w = vec![0.0; n];
        for b in &basis {
            let coef = b[axis];
            for r in 0..n {
                w[r] += coef * b[r];
            }
        }
        for _ in 0..2 {
            for c in &chosen {
                let d: f64 = c.iter().zip(&w).map(|(a, b)| a * b).sum();
                for r in 0..n {
                    w[r] -= d * c[r];
                }
            }
        }
        let nrm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm > 1e-6 {
            chosen.push(w.into_iter().map(|v| v / nrm).collect());
        }
    }
    for (k, c) in chosen.into_iter().enumerate() {
        for r in 0..n {
            vecs[(r, start + k)] = c[r];
        }
    }
}

/// Plain cyclic Jacobi: returns unsorted eigenvalues and eigenvectors as columns.
fn jacobi(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    const MAX_SWEEPS: usize = 30;
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Mat::identity(n);
    let tol = 1e-14 * m.frobenius();
    let offdiag = |a: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while offdiag(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(EcdgError::NoConvergence { sweeps, offdiag: offdiag(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
}

/// Outcome of an anti-symmetry check.
#[derive(Clone, Copy, Debug)]
pub struct AntisymmetryReport {
    pub holds: bool,
    /// `max |a_ij + a_ji|`.
    pub violation: f64,
    /// `max |a_ij|`.
    pub scale: f64,
}

/// Checks `max|a + a^T| <= tol * max|a|`.
pub fn is_antisymmetric(a: &Mat, tol: f64) -> AntisymmetryReport {
    assert!(a.is_square(), "anti-symmetry needs a square matrix");
    let n = a.rows();
    let mut violation = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            violation = violation.max((a[(i, j)] + a[(j, i)]).abs());
        }
    }
    let scale = a.max_abs();
    AntisymmetryReport { holds: violation <= tol * scale, violation, scale }
}

/// The anti-symmetric coupler `C = 1/2 sum sqrt|l_i l_j| S R_ij S^T` over the
/// pairs of a fully paired spectrum, where `R_ij` has `+1` at `(i, j)` and `-1`
/// at `(j, i)`.
pub fn pairing_coupler(p: &EigenPairing) -> Result<Mat> {
    if p.r > 0 {
        return Err(EcdgError::UnpairedSpectrum { unpaired: p.r });
    }
    let n = p.lambdas.len();
    let mut c = Mat::zeros(n, n);
    for &(i, j) in &p.pairs {
        let w = 0.5 * (p.lambdas[i] * p.lambdas[j]).abs().sqrt();
        for a in 0..n {
            for b in 0..n {
                c[(a, b)] += w * (p.s[(a, i)] * p.s[(b, j)] - p.s[(a, j)] * p.s[(b, i)]);
            }
        }
    }
    Ok(c)
}

/// `|B|`, `B+` and `B-` from the eigen-split, with `B = B+ + B-` and `|B| = B+ - B-`.
#[derive(Clone, Debug)]
pub struct SignSplit {
    pub abs: Mat,
    pub plus: Mat,
    pub minus: Mat,
}

pub fn sign_split(b: &SymMatrix) -> Result<SignSplit> {
    let e = eig_decompose(b, 1e-12)?;
    let n = b.n();
    let mut plus = Mat::zeros(n, n);
    let mut minus = Mat::zeros(n, n);
    for k in 0..n {
        let l = e.lambdas[k];
        let target = if l > 0.0 { &mut plus } else { &mut minus };
        if l == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                target[(i, j)] += l * e.s[(i, k)] * e.s[(j, k)];
            }
        }
    }
    Ok(SignSplit { abs: plus.sub(&minus), plus, minus })
}

/// Largest eigenvalue magnitude of a symmetric matrix.
pub fn spectral_radius(b: &SymMatrix) -> Result<f64> {
    let e = eig_decompose(b, 0.0)?;
    Ok(e.lambdas.iter().fold(0.0f64, |m, l| m.max(l.abs())))
}

/// Cholesky factor `L` with `m = L L^T` for a symmetric positive definite matrix.
pub fn cholesky(m: &SymMatrix) -> Result<Mat> {
    let n = m.n();
    let a = m.mat();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return invalid("matrix is not positive definite");
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Pairwise summation; the reduction tree depends only on the input length.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}
