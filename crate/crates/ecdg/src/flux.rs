//! Numerical fluxes for `B_n u` on a face, written as `F_mean {u} + F_jump [u]`
//! with `{u}` the average and `[u] = u+ - u-`. The energy of the semi-discrete
//! scheme is conserved exactly when `F_jump` is anti-symmetric.

use crate::algebra::{eig_decompose, is_antisymmetric, pairing_coupler, sign_split, Mat, SymMatrix};
use crate::error::{invalid, Result};
use crate::systems::{Augmentation, SymmetricSystem, SystemKind};
use std::collections::HashMap;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxKind {
    /// Anti-symmetric coupling of paired characteristics.
    EnergyConserving,
    /// Characteristic-wise coupling of a doubled system with its auxiliary copy.
    Doubling,
    Upwind,
    LaxFriedrichs,
    Central,
    /// Alternating flux; the coefficient overrides the 1D acoustics default.
    Alternating(Option<f64>),
}

impl FromStr for FluxKind {
    type Err = crate::error::EcdgError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ec" => FluxKind::EnergyConserving,
            "double" => FluxKind::Doubling,
            "upwind" => FluxKind::Upwind,
            "lf" => FluxKind::LaxFriedrichs,
            "central" => FluxKind::Central,
            "alt" => FluxKind::Alternating(None),
            other => return Err(crate::error::EcdgError::Unknown { kind: "flux", name: other.into() }),
        })
    }
}

/// Flux `F(u-, u+) = mean {u} + jump [u]` for one normal direction.
#[derive(Clone, Debug)]
pub struct FluxSpec {
    pub mean: Mat,
    pub jump: Mat,
}

impl FluxSpec {
    pub fn eval(&self, um: &[f64], up: &[f64]) -> Vec<f64> {
        let avg: Vec<f64> = um.iter().zip(up).map(|(a, b)| 0.5 * (a + b)).collect();
        let jmp: Vec<f64> = um.iter().zip(up).map(|(a, b)| b - a).collect();
        let mut out = self.mean.matvec(&avg);
        for (o, v) in out.iter_mut().zip(self.jump.matvec(&jmp)) {
            *o += v;
        }
        out
    }

    /// True when the jump coupling is anti-symmetric to relative `tol`.
    pub fn conserves_energy(&self, tol: f64) -> bool {
        let rep = is_antisymmetric(&self.jump, tol);
        rep.holds || rep.scale == 0.0
    }
}

/// Coefficient of the 1D acoustics alternating flux,
/// `1/2 sqrt|1 - u0^2 / c0^2|` with `c0^2 = K0 / rho0`.
pub fn acoustics_alpha(sys: &SymmetricSystem) -> Result<f64> {
    let (u0, k0, rho0) = match (sys.param("u0"), sys.param("K0"), sys.param("rho0")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return invalid("acoustics parameters missing"),
    };
    let mach2 = u0 * u0 * rho0 / k0;
    Ok(0.5 * (1.0 - mach2).abs().sqrt())
}

pub fn build_face_flux(sys: &SymmetricSystem, n: [f64; 2], kind: FluxKind) -> Result<FluxSpec> {
    let bn = sys.b_n(n);
    let m = sys.m;
    let jump = match kind {
        FluxKind::Central => Mat::zeros(m, m),
        FluxKind::Upwind => sign_split(&bn)?.abs.scale(-0.5),
        FluxKind::LaxFriedrichs => {
            let e = eig_decompose(&bn, 0.0)?;
            let rho = e.lambdas.iter().fold(0.0f64, |a, l| a.max(l.abs()));
            Mat::identity(m).scale(-0.5 * rho)
        }
        FluxKind::EnergyConserving => match &sys.pairing_1d {
            Some(p) if n == [1.0, 0.0] => pairing_coupler(p)?,
            Some(_) => return invalid("1D pairing is defined for the normal (1, 0) only"),
            None => pairing_coupler(&eig_decompose(&bn, 1e-12)?)?,
        },
        FluxKind::Doubling => {
            if sys.augmentation != Augmentation::FullDouble {
                return invalid("the doubling flux needs a fully doubled system");
            }
            let nb = sys.n_base;
            let mut base = Mat::zeros(nb, nb);
            for i in 0..nb {
                for j in 0..nb {
                    base[(i, j)] = bn.mat()[(i, j)];
                }
            }
            let abs = sign_split(&SymMatrix::new(base)?)?.abs.scale(0.5);
            let mut jmp = Mat::zeros(m, m);
            jmp.set_block(0, nb, &abs);
            jmp.set_block(nb, 0, &abs.scale(-1.0));
            jmp
        }
        FluxKind::Alternating(alpha) => alternating_jump(sys, &bn, alpha)?,
    };
    Ok(FluxSpec { mean: bn.into_mat(), jump })
}

fn alternating_jump(sys: &SymmetricSystem, bn: &SymMatrix, alpha: Option<f64>) -> Result<Mat> {
    if sys.kind == SystemKind::Acoustics1D && sys.augmentation == Augmentation::None {
        let a = match alpha {
            Some(a) => a,
            None => acoustics_alpha(sys)?,
        };
        return Ok(Mat::from_rows(&[vec![0.0, a], vec![-a, 0.0]]));
    }
    let Some(g) = sys.alternating_groups() else {
        return invalid(format!("no alternating flux is defined for `{}` with this background state", sys.name));
    };
    let m = sys.m;
    let mut j = Mat::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            if g[r] != g[c] {
                let sign = if g[r] { 0.5 } else { -0.5 };
                j[(r, c)] = sign * bn.mat()[(r, c)];
            }
        }
    }
    Ok(j)
}

/// Fluxes in primitive rows, `B0^-1 F_mean` and `B0^-1 F_jump`, for region `region`.
pub fn primitive_rows(sys: &SymmetricSystem, region: usize, spec: &FluxSpec) -> Result<(Mat, Mat)> {
    let inv = sys.b0[region].mat().inverse()?;
    Ok((inv.matmul(&spec.mean), inv.matmul(&spec.jump)))
}

/// Face fluxes shared by all faces with the same normal. The normal is
/// rounded to twelve digits for the lookup key.
#[derive(Default)]
pub struct FluxCache {
    map: RwLock<HashMap<(i64, i64), Arc<FluxSpec>>>,
}

impl FluxCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(n: [f64; 2]) -> (i64, i64) {
        ((n[0] * 1e12).round() as i64, (n[1] * 1e12).round() as i64)
    }

    pub fn get_or_build(
        &self,
        n: [f64; 2],
        build: impl FnOnce([f64; 2]) -> Result<FluxSpec>,
    ) -> Result<Arc<FluxSpec>> {
        let key = Self::key(n);
        if let Some(f) = self.map.read().expect("flux cache poisoned").get(&key) {
            return Ok(f.clone());
        }
        let spec = Arc::new(build(n)?);
        let mut w = self.map.write().expect("flux cache poisoned");
        Ok(w.entry(key).or_insert(spec).clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("flux cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Treatment of a physical boundary face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Characteristic split with prescribed exterior data.
    Inflow,
    /// Characteristic split with zero exterior data.
    Outflow,
    /// Reflecting wall for acoustics without background flow.
    Wall,
}

/// Boundary flux in outward-normal form, `F = interior u_h + data g`.
#[derive(Clone, Debug)]
pub struct BoundaryFluxSpec {
    pub interior: Mat,
    pub data: Mat,
}

pub fn build_boundary_flux(sys: &SymmetricSystem, n_out: [f64; 2], kind: BoundaryKind) -> Result<BoundaryFluxSpec> {
    let m = sys.m;
    match kind {
        BoundaryKind::Inflow | BoundaryKind::Outflow => {
            let split = sign_split(&sys.b_n(n_out))?;
            let data = if kind == BoundaryKind::Inflow { split.minus } else { Mat::zeros(m, m) };
            Ok(BoundaryFluxSpec { interior: split.plus, data })
        }
        BoundaryKind::Wall => {
            let zero_flow = sys.param("u0").unwrap_or(0.0) == 0.0 && sys.param("v0").unwrap_or(0.0) == 0.0;
            let acoustic = matches!(sys.kind, SystemKind::Acoustics1D | SystemKind::Acoustics2D);
            if !acoustic || !zero_flow || sys.augmentation != Augmentation::None {
                return invalid("wall boundaries are available for acoustics without background flow");
            }
            // Normal velocity vanishes; the pressure acts along the normal.
            let mut interior = Mat::zeros(m, m);
            for d in 0..sys.dim {
                interior[(1 + d, 0)] = n_out[d];
            }
            Ok(BoundaryFluxSpec { interior, data: Mat::zeros(m, m) })
        }
    }
}
