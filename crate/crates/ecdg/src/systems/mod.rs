//! Catalog of linear symmetric hyperbolic systems
//! `B0 u_t + B1 u_x + B2 u_y = 0`, plus the auxiliary-variable augmentations
//! that make their spectra pairable.

pub mod exact;

use crate::algebra::{cholesky, eig_decompose, spectral_radius, EigenPairing, Mat, SymMatrix};
use crate::error::{invalid, Result};
use std::fmt;
use std::sync::Arc;

/// Which catalog entry a system came from; flux builders use it to pick
/// system-specific alternating fluxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Advection1D,
    Acoustics1D,
    Advection2D,
    Acoustics2D,
    LinearizedEuler,
    MaxwellTM,
    Elastodynamics,
}

/// How a system was extended with auxiliary unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Augmentation {
    None,
    /// `u` is joined by `phi` solving the time-reversed system.
    FullDouble,
    /// One auxiliary per unpaired characteristic (1D only).
    Partial1D,
    /// Background-flow acoustics in 2D gain one auxiliary with speed `-v.n`.
    AcousticPairing2D,
}

/// Augmentation request accepted by [`augment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AugmentMode {
    FullDouble,
    Partial1D,
    AcousticPairing2D,
}

/// Zeroth-order term `c(x) u_i` added to the right-hand side of the selected
/// components.
#[derive(Clone)]
pub struct Reaction {
    pub coef: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    pub components: Vec<bool>,
}

impl fmt::Debug for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reaction").field("components", &self.components).finish()
    }
}

#[derive(Clone, Debug)]
pub struct SymmetricSystem {
    pub name: String,
    pub kind: SystemKind,
    pub dim: usize,
    pub m: usize,
    /// Symmetric positive definite `B0`, one per material region.
    pub b0: Vec<SymMatrix>,
    pub b1: SymMatrix,
    pub b2: SymMatrix,
    pub components: Vec<String>,
    /// The first `n_base` components are the physical unknowns.
    pub n_base: usize,
    pub augmentation: Augmentation,
    /// Pairing of `B1` prescribed by a 1D partial augmentation.
    pub pairing_1d: Option<EigenPairing>,
    /// Named physical parameters.
    pub params: Vec<(String, f64)>,
    pub reaction: Option<Reaction>,
}

impl SymmetricSystem {
    fn build(
        name: &str,
        kind: SystemKind,
        dim: usize,
        b0: Vec<SymMatrix>,
        b1: SymMatrix,
        b2: SymMatrix,
        components: &[&str],
        params: &[(&str, f64)],
    ) -> Result<Self> {
        let m = b1.n();
        if b2.n() != m || components.len() != m || b0.is_empty() || b0.iter().any(|b| b.n() != m) {
            return invalid(format!("inconsistent dimensions for system `{name}`"));
        }
        for b in &b0 {
            cholesky(b).map_err(|_| crate::error::EcdgError::Invalid(format!("B0 of `{name}` is not positive definite")))?;
        }
        if params.iter().any(|(_, v)| !v.is_finite()) {
            return invalid(format!("non-finite parameter for system `{name}`"));
        }
        Ok(SymmetricSystem {
            name: name.to_string(),
            kind,
            dim,
            m,
            b0,
            b1,
            b2,
            components: components.iter().map(|s| s.to_string()).collect(),
            n_base: m,
            augmentation: Augmentation::None,
            pairing_1d: None,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            reaction: None,
        })
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// `n_x B1 + n_y B2`.
    pub fn b_n(&self, n: [f64; 2]) -> SymMatrix {
        self.b1.combine(n[0], &self.b2, n[1])
    }

    pub fn n_regions(&self) -> usize {
        self.b0.len()
    }

    pub fn b0_is_diagonal(&self) -> bool {
        self.b0.iter().all(|b| b.mat().is_diagonal())
    }

    /// Largest characteristic speed in direction `n`: the spectral radius of
    /// `L^-1 B_n L^-T` with `B0 = L L^T`, maximized over regions.
    pub fn wave_speed(&self, n: [f64; 2]) -> Result<f64> {
        let bn = self.b_n(n);
        let mut best: f64 = 0.0;
        for b0 in &self.b0 {
            let l = cholesky(b0)?;
            let li = l.inverse()?;
            let g = SymMatrix::new(li.matmul(bn.mat()).matmul(&li.transpose()))?;
            best = best.max(spectral_radius(&g)?);
        }
        Ok(best)
    }

    /// Maximum wave speed over all directions (sampled on the unit circle in 2D).
    pub fn max_wave_speed(&self) -> Result<f64> {
        if self.dim == 1 {
            return self.wave_speed([1.0, 0.0]);
        }
        let mut best: f64 = 0.0;
        for i in 0..64 {
            let t = std::f64::consts::PI * i as f64 / 64.0;
            best = best.max(self.wave_speed([t.cos(), t.sin()])?);
        }
        Ok(best)
    }

    /// Component groups for alternating fluxes: `true` marks the group whose
    /// rows take the other group's values from `K+`. `None` when the system
    /// has no such block structure.
    pub fn alternating_groups(&self) -> Option<Vec<bool>> {
        let mut g = vec![false; self.m];
        match (self.kind, self.augmentation) {
            (SystemKind::Acoustics2D, Augmentation::None) => g[0] = true,
            (SystemKind::MaxwellTM, Augmentation::None) => g[2] = true,
            (SystemKind::Elastodynamics, Augmentation::None) => g[..3].iter_mut().for_each(|v| *v = true),
            _ => return None,
        }
        // Each group must have a zero diagonal block in both B1 and B2.
        for b in [&self.b1, &self.b2] {
            for i in 0..self.m {
                for j in 0..self.m {
                    if g[i] == g[j] && b.mat()[(i, j)] != 0.0 {
                        return None;
                    }
                }
            }
        }
        Some(g)
    }
}

fn zero(m: usize) -> SymMatrix {
    SymMatrix::zeros(m)
}

fn sym(rows: &[&[f64]]) -> Result<SymMatrix> {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(format!("parameter `{name}` must be positive and finite, got {v}"))
    }
}

/// Scalar advection `c^-1 u_t + u_x = 0`, one region per listed speed.
pub fn advection1d_piecewise(speeds: &[f64]) -> Result<SymmetricSystem> {
    if speeds.is_empty() {
        return invalid("advection needs at least one speed");
    }
    for &c in speeds {
        positive("c", c)?;
    }
    let b0 = speeds.iter().map(|c| SymMatrix::diag(&[1.0 / c])).collect();
    SymmetricSystem::build(
        "advection1d",
        SystemKind::Advection1D,
        1,
        b0,
        SymMatrix::diag(&[1.0]),
        zero(1),
        &["u"],
        &[("c", speeds[0])],
    )
}

pub fn advection1d(c: f64) -> Result<SymmetricSystem> {
    advection1d_piecewise(&[c])
}

/// Linear acoustics about a background velocity `u0`, unknowns `(p, u)`.
pub fn acoustics1d(u0: f64, k0: f64, rho0: f64) -> Result<SymmetricSystem> {
    positive("K0", k0)?;
    positive("rho0", rho0)?;
    SymmetricSystem::build(
        "acoustics1d",
        SystemKind::Acoustics1D,
        1,
        vec![SymMatrix::diag(&[1.0 / k0, rho0])],
        sym(&[&[u0 / k0, 1.0], &[1.0, u0 * rho0]])?,
        zero(2),
        &["p", "u"],
        &[("u0", u0), ("K0", k0), ("rho0", rho0)],
    )
}

/// Scalar advection `u_t + b.grad u = 0`.
pub fn advection2d(bx: f64, by: f64) -> Result<SymmetricSystem> {
    SymmetricSystem::build(
        "advection2d",
        SystemKind::Advection2D,
        2,
        vec![SymMatrix::diag(&[1.0])],
        SymMatrix::diag(&[bx]),
        SymMatrix::diag(&[by]),
        &["u"],
        &[("bx", bx), ("by", by)],
    )
}

/// Linear acoustics about a background flow `(u0, v0)`, unknowns `(p, u, v)`.
pub fn acoustics2d(u0: f64, v0: f64, k0: f64, rho0: f64) -> Result<SymmetricSystem> {
    positive("K0", k0)?;
    positive("rho0", rho0)?;
    SymmetricSystem::build(
        "acoustics2d",
        SystemKind::Acoustics2D,
        2,
        vec![SymMatrix::diag(&[1.0 / k0, rho0, rho0])],
        sym(&[&[u0 / k0, 1.0, 0.0], &[1.0, u0 * rho0, 0.0], &[0.0, 0.0, u0 * rho0]])?,
        sym(&[&[v0 / k0, 0.0, 1.0], &[0.0, v0 * rho0, 0.0], &[1.0, 0.0, v0 * rho0]])?,
        &["p", "u", "v"],
        &[("u0", u0), ("v0", v0), ("K0", k0), ("rho0", rho0)],
    )
}

/// Linearized Euler equations in the variables `(rho - p, u, v, p)` with
/// background Mach numbers `(Mx, My)`.
pub fn linearized_euler(mx: f64, my: f64) -> Result<SymmetricSystem> {
    SymmetricSystem::build(
        "linearized_euler",
        SystemKind::LinearizedEuler,
        2,
        vec![SymMatrix::diag(&[1.0; 4])],
        sym(&[&[mx, 0.0, 0.0, 0.0], &[0.0, mx, 0.0, 1.0], &[0.0, 0.0, mx, 0.0], &[0.0, 1.0, 0.0, mx]])?,
        sym(&[&[my, 0.0, 0.0, 0.0], &[0.0, my, 0.0, 0.0], &[0.0, 0.0, my, 1.0], &[0.0, 0.0, 1.0, my]])?,
        &["rho_minus_p", "u", "v", "p"],
        &[("Mx", mx), ("My", my)],
    )
}

/// Transverse-magnetic Maxwell equations, unknowns `(Hx, Hy, Ez)`.
pub fn maxwell_tm(mu: f64, eps: f64) -> Result<SymmetricSystem> {
    positive("mu", mu)?;
    positive("eps", eps)?;
    SymmetricSystem::build(
        "maxwell_tm",
        SystemKind::MaxwellTM,
        2,
        vec![SymMatrix::diag(&[mu, mu, eps])],
        sym(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, -1.0], &[0.0, -1.0, 0.0]])?,
        sym(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]])?,
        &["Hx", "Hy", "Ez"],
        &[("mu", mu), ("eps", eps)],
    )
}

/// Isotropic elastodynamics in stress-velocity form, unknowns
/// `(sxx, syy, sxy, v, w)`. `B0` holds the compliance block and the density;
/// it is not diagonal, so the mass solve is a small dense solve per cell.
pub fn elastodynamics(lambda: f64, mu: f64, rho: f64) -> Result<SymmetricSystem> {
    positive("mu", mu)?;
    positive("rho", rho)?;
    if !(lambda + mu > 0.0) {
        return invalid("elastodynamics needs lambda + mu > 0");
    }
    let d = 1.0 / (4.0 * mu * (mu + lambda));
    let a = (lambda + 2.0 * mu) * d;
    let b = -lambda * d;
    let b0 = sym(&[
        &[a, b, 0.0, 0.0, 0.0],
        &[b, a, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0 / mu, 0.0, 0.0],
        &[0.0, 0.0, 0.0, rho, 0.0],
        &[0.0, 0.0, 0.0, 0.0, rho],
    ])?;
    let mut b1 = Mat::zeros(5, 5);
    let mut b2 = Mat::zeros(5, 5);
    for (mat, entries) in [(&mut b1, [(0, 3), (2, 4)]), (&mut b2, [(1, 4), (2, 3)])] {
        for (i, j) in entries {
            mat[(i, j)] = -1.0;
            mat[(j, i)] = -1.0;
        }
    }
    SymmetricSystem::build(
        "elastodynamics",
        SystemKind::Elastodynamics,
        2,
        vec![b0],
        SymMatrix::new(b1)?,
        SymMatrix::new(b2)?,
        &["sxx", "syy", "sxy", "v", "w"],
        &[("lambda", lambda), ("mu", mu), ("rho", rho)],
    )
}

/// Elastodynamics coefficient matrices in velocity-stress primitive form,
/// `u_t + A1 u_x + A2 u_y = 0` with `A_i = B0^-1 B_i`.
pub fn elastodynamics_primitive(sys: &SymmetricSystem) -> Result<(Mat, Mat)> {
    if sys.kind != SystemKind::Elastodynamics {
        return invalid("primitive form is only provided for elastodynamics");
    }
    let inv = sys.b0[0].mat().inverse()?;
    Ok((inv.matmul(sys.b1.mat()), inv.matmul(sys.b2.mat())))
}

/// Looks a system up by catalog name with default parameters.
pub fn by_name(name: &str) -> Result<SymmetricSystem> {
    match name {
        "advection1d" => advection1d(1.0),
        "acoustics1d" => acoustics1d(0.5, 1.0, 1.0),
        "advection2d" => advection2d(1.0, 1.0),
        "acoustics2d" => acoustics2d(0.0, 0.0, 1.0, 1.0),
        "acoustics2d_flow" => acoustics2d(0.5, 0.0, 1.0, 1.0),
        "linearized_euler" => linearized_euler(0.5, 0.0),
        "maxwell_tm" => maxwell_tm(1.0, 1.0),
        "elastodynamics" => elastodynamics(2.0, 1.0, 1.0),
        other => Err(crate::error::EcdgError::Unknown { kind: "system", name: other.to_string() }),
    }
}

pub const CATALOG: [&str; 8] = [
    "advection1d",
    "acoustics1d",
    "advection2d",
    "acoustics2d",
    "acoustics2d_flow",
    "linearized_euler",
    "maxwell_tm",
    "elastodynamics",
];

/// Adds auxiliary unknowns. A partial augmentation of an already paired 1D
/// system returns it unchanged.
pub fn augment(sys: &SymmetricSystem, mode: AugmentMode) -> Result<SymmetricSystem> {
    if sys.augmentation != Augmentation::None {
        return invalid(format!("system `{}` is already augmented", sys.name));
    }
    let m = sys.m;
    let mut out = sys.clone();
    match mode {
        AugmentMode::FullDouble => {
            out.b0 = sys.b0.iter().map(|b| SymmetricSystem::dup(b)).collect();
            out.b1 = SymMatrix::block_diag(&sys.b1, &sys.b1.combine(-1.0, &sys.b1, 0.0));
            out.b2 = SymMatrix::block_diag(&sys.b2, &sys.b2.combine(-1.0, &sys.b2, 0.0));
            out.components.extend(sys.components.iter().map(|c| format!("phi_{c}")));
            out.m = 2 * m;
            out.augmentation = Augmentation::FullDouble;
        }
        AugmentMode::Partial1D => {
            if sys.dim != 1 {
                return invalid("partial augmentation is only defined in one space dimension");
            }
            let e = eig_decompose(&sys.b1, 1e-12)?;
            if e.r == 0 {
                return Ok(sys.clone());
            }
            let r = e.r;
            // Unpaired characteristics and the partner speed of each auxiliary.
            let unpaired: Vec<usize> = if e.majority_negative { (m - r..m).collect() } else { (0..r).collect() };
            let mut aux_speed = Vec::with_capacity(r);
            let mut pairs = e.pairs.clone();
            // Auxiliaries are listed so the appended speeds run in descending order.
            let order: Vec<usize> = if e.majority_negative { unpaired.clone() } else { unpaired.iter().rev().cloned().collect() };
            for (t, &idx) in order.iter().enumerate() {
                aux_speed.push(-e.lambdas[idx]);
                pairs.push(if e.majority_negative { (m + t, idx) } else { (idx, m + t) });
            }
            let mut lambdas = e.lambdas.clone();
            lambdas.extend(&aux_speed);
            let s = Mat::block_diag(&e.s, &Mat::identity(r));
            out.pairing_1d = Some(EigenPairing::from_parts(lambdas, s, pairs)?);
            out.b0 = sys.b0.iter().map(|b| SymMatrix::block_diag(b, &SymMatrix::diag(&vec![1.0; r]))).collect();
            // The auxiliary block is diagonal in the characteristic basis of B1.
            let mut aux_b1 = Mat::zeros(m + r, m + r);
            aux_b1.set_block(0, 0, sys.b1.mat());
            for (t, &l) in aux_speed.iter().enumerate() {
                aux_b1[(m + t, m + t)] = l;
            }
            out.b1 = SymMatrix::new(aux_b1)?;
            out.b2 = SymMatrix::zeros(m + r);
            for t in 0..r {
                out.components.push(if r == 1 { "phi".to_string() } else { format!("phi{t}") });
            }
            out.m = m + r;
            out.augmentation = Augmentation::Partial1D;
        }
        AugmentMode::AcousticPairing2D => {
            if sys.kind != SystemKind::Acoustics2D {
                return invalid("acoustic pairing applies to 2D acoustics only");
            }
            let (u0, v0, rho0) = (sys.param("u0").unwrap_or(0.0), sys.param("v0").unwrap_or(0.0), sys.param("rho0").unwrap_or(1.0));
            let ext = |b: &SymMatrix, v: f64| SymMatrix::block_diag(b, &SymMatrix::diag(&[v]));
            out.b0 = sys.b0.iter().map(|b| ext(b, rho0)).collect();
            out.b1 = ext(&sys.b1, -u0 * rho0);
            out.b2 = ext(&sys.b2, -v0 * rho0);
            out.components.push("phi".to_string());
            out.m = m + 1;
            out.augmentation = Augmentation::AcousticPairing2D;
        }
    }
    if let Some(re) = &mut out.reaction {
        re.components.resize(out.m, false);
    }
    Ok(out)
}

impl SymmetricSystem {
    fn dup(b: &SymMatrix) -> SymMatrix {
        SymMatrix::block_diag(b, b)
    }
}
