//! Discrete spaces and the semi-discrete operator `M u_t = A u + f(t)`.
//!
//! Cell unknowns are modal coefficients stored as `[cell][component][mode]`.
//! `A` is applied matrix-free in two passes: face fluxes are first evaluated
//! independently per face, then every cell gathers its volume term and the
//! flux contributions of its faces in a fixed order. Both passes parallelize
//! without changing the floating-point result.

use crate::algebra::{pairwise_sum, Mat};
use crate::basis::{line_quadrature, volume_quadrature, RefElement, ReferenceBasis};
use crate::error::{invalid, EcdgError, Result};
use crate::flux::{build_boundary_flux, build_face_flux, BoundaryFluxSpec, BoundaryKind, FluxCache, FluxKind, FluxSpec};
use crate::mesh::{BoundarySide, Mesh1D, Mesh2D};
use crate::systems::exact::ExactSolution;
use crate::systems::SymmetricSystem;
use crate::timestep::SemiDiscrete;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

/// Cells per rayon task; small problems run sequentially.
const PAR_CHUNK: usize = 64;
const PAR_MIN_CELLS: usize = 256;

#[derive(Clone, Debug)]
pub struct CellGeom {
    pub origin: [f64; 2],
    pub jac: [[f64; 2]; 2],
    /// Inverse transpose of `jac`.
    pub jinv_t: [[f64; 2]; 2],
    /// `|det jac|`; the physical cell measure is this times the reference measure.
    pub det: f64,
    pub region: usize,
    /// Length scale for time-step limits: width in 1D, in-radius in 2D.
    pub size: f64,
}

impl CellGeom {
    fn new(origin: [f64; 2], jac: [[f64; 2]; 2], region: usize, size: f64) -> Self {
        let d = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jinv_t = [[jac[1][1] / d, -jac[1][0] / d], [-jac[0][1] / d, jac[0][0] / d]];
        CellGeom { origin, jac, jinv_t, det: d.abs(), region, size }
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        // jinv = transpose of jinv_t
        [
            self.jinv_t[0][0] * d[0] + self.jinv_t[1][0] * d[1],
            self.jinv_t[0][1] * d[0] + self.jinv_t[1][1] * d[1],
        ]
    }
}

#[derive(Clone, Debug)]
pub struct FaceGeom {
    pub minus: usize,
    pub plus: Option<usize>,
    pub normal: [f64; 2],
    /// Physical quadrature weights.
    pub weights: Vec<f64>,
    /// Physical points as seen from `minus`.
    pub points: Vec<[f64; 2]>,
    /// Basis traces, `n_q x n_modes`, row-major.
    pub trace_minus: Vec<f64>,
    pub trace_plus: Vec<f64>,
    pub boundary: Option<BoundarySide>,
}

/// Geometry, reference tables and connectivity of a DG space.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub dim: usize,
    pub elem: RefElement,
    pub basis: ReferenceBasis,
    pub cells: Vec<CellGeom>,
    pub faces: Vec<FaceGeom>,
    /// `(face, is_minus)` for every cell in a fixed order.
    pub cell_faces: Vec<Vec<(usize, bool)>>,
    vol_w: Vec<f64>,
    vol_phi: Vec<f64>,
    vol_dphi: Vec<[f64; 2]>,
    /// Spatial locator for 1D point evaluation.
    nodes_1d: Option<Vec<f64>>,
}

impl Discretization {
    pub fn k(&self) -> usize {
        self.basis.k
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Smallest cell length scale (width in 1D, in-radius in 2D).
    pub fn min_size(&self) -> f64 {
        self.cells.iter().map(|c| c.size).fold(f64::INFINITY, f64::min)
    }

    fn with_tables(dim: usize, basis: ReferenceBasis, cells: Vec<CellGeom>, faces: Vec<FaceGeom>) -> Self {
        let k = basis.k;
        let q = volume_quadrature(basis.elem, 2 * k + 2);
        let nm = basis.n_modes();
        let mut vol_phi = Vec::with_capacity(q.len() * nm);
        let mut vol_dphi = Vec::with_capacity(q.len() * nm);
        for &p in &q.points {
            vol_phi.extend(basis.eval(p));
            vol_dphi.extend(basis.grad(p));
        }
        let mut cell_faces = vec![vec![]; cells.len()];
        for (f, face) in faces.iter().enumerate() {
            cell_faces[face.minus].push((f, true));
            if let Some(p) = face.plus {
                cell_faces[p].push((f, false));
            }
        }
        Discretization {
            dim,
            elem: basis.elem,
            basis,
            cells,
            faces,
            cell_faces,
            vol_w: q.weights,
            vol_phi,
            vol_dphi,
            nodes_1d: None,
        }
    }

    pub fn from_mesh1d(mesh: &Mesh1D, k: usize) -> Result<Self> {
        let basis = ReferenceBasis::new(RefElement::Interval, k)?;
        let n = mesh.n_cells();
        let cells: Vec<CellGeom> = (0..n)
            .map(|j| {
                let h = mesh.width(j);
                CellGeom::new([mesh.nodes[j], 0.0], [[h, 0.0], [0.0, 1.0]], mesh.regions[j], h)
            })
            .collect();
        let left = basis.eval([0.0, 0.0]);
        let right = basis.eval([1.0, 0.0]);
        let mut faces = Vec::with_capacity(n + 1);
        let interior = |minus: usize, plus: usize, x: f64| FaceGeom {
            minus,
            plus: Some(plus),
            normal: [1.0, 0.0],
            weights: vec![1.0],
            points: vec![[x, 0.0]],
            trace_minus: right.clone(),
            trace_plus: left.clone(),
            boundary: None,
        };
        if mesh.periodic {
            faces.push(interior(n - 1, 0, mesh.nodes[n]));
        } else {
            faces.push(FaceGeom {
                minus: 0,
                plus: None,
                normal: [-1.0, 0.0],
                weights: vec![1.0],
                points: vec![[mesh.nodes[0], 0.0]],
                trace_minus: left.clone(),
                trace_plus: vec![],
                boundary: Some(BoundarySide::Left),
            });
        }
        for i in 1..n {
            faces.push(interior(i - 1, i, mesh.nodes[i]));
        }
        if !mesh.periodic {
            faces.push(FaceGeom {
                minus: n - 1,
                plus: None,
                normal: [1.0, 0.0],
                weights: vec![1.0],
                points: vec![[mesh.nodes[n], 0.0]],
                trace_minus: right.clone(),
                trace_plus: vec![],
                boundary: Some(BoundarySide::Right),
            });
        }
        let mut d = Discretization::with_tables(1, basis, cells, faces);
        d.nodes_1d = Some(mesh.nodes.clone());
        Ok(d)
    }

    pub fn from_mesh2d(mesh: &Mesh2D, k: usize) -> Result<Self> {
        let elem = mesh.cells[0].kind;
        if mesh.cells.iter().any(|c| c.kind != elem) {
            return invalid("mixed element types are not supported");
        }
        let basis = ReferenceBasis::new(elem, k)?;
        let cells: Vec<CellGeom> = (0..mesh.n_cells())
            .map(|c| {
                let p = mesh.cell_points(c);
                let (e1, e2) = match elem {
                    RefElement::Quad => (p[1], p[3]),
                    _ => (p[1], p[2]),
                };
                let jac = [[e1[0] - p[0][0], e2[0] - p[0][0]], [e1[1] - p[0][1], e2[1] - p[0][1]]];
                CellGeom::new(p[0], jac, mesh.cells[c].region, mesh.inradius(c))
            })
            .collect();
        let lq = line_quadrature(2 * k + 2);
        let nm = basis.n_modes();
        let faces = mesh
            .faces
            .iter()
            .map(|f| {
                let [p0, p1] = f.endpoints;
                let points: Vec<[f64; 2]> = lq
                    .points
                    .iter()
                    .map(|s| [p0[0] + s[0] * (p1[0] - p0[0]), p0[1] + s[0] * (p1[1] - p0[1])])
                    .collect();
                let trace = |cell: usize, shift: [f64; 2]| -> Vec<f64> {
                    let mut t = Vec::with_capacity(points.len() * nm);
                    for x in &points {
                        let xi = cells[cell].to_reference([x[0] + shift[0], x[1] + shift[1]]);
                        t.extend(basis.eval(xi));
                    }
                    t
                };
                FaceGeom {
                    minus: f.minus.0,
                    plus: f.plus.map(|p| p.0),
                    normal: f.normal,
                    weights: lq.weights.iter().map(|w| w * f.length).collect(),
                    trace_minus: trace(f.minus.0, [0.0, 0.0]),
                    trace_plus: f.plus.map(|p| trace(p.0, f.shift)).unwrap_or_default(),
                    points,
                    boundary: f.boundary,
                }
            })
            .collect();
        Ok(Discretization::with_tables(2, basis, cells, faces))
    }

    pub fn n_dofs(&self, m: usize) -> usize {
        self.n_cells() * m * self.n_modes()
    }

    /// Visits every quadrature point of a rule exact to `exactness`:
    /// `(cell, physical point, physical weight, basis values)`.
    pub fn for_each_point(&self, exactness: usize, mut f: impl FnMut(usize, [f64; 2], f64, &[f64])) {
        let q = volume_quadrature(self.elem, exactness);
        let phis: Vec<Vec<f64>> = q.points.iter().map(|&p| self.basis.eval(p)).collect();
        for (c, cell) in self.cells.iter().enumerate() {
            for (qi, &p) in q.points.iter().enumerate() {
                f(c, cell.to_physical(p), q.weights[qi] * cell.det, &phis[qi]);
            }
        }
    }

    /// Cell containing a physical point, if any.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        if let Some(nodes) = &self.nodes_1d {
            let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
            if x[0] < a || x[0] > b {
                return None;
            }
            let idx = nodes.partition_point(|&v| v <= x[0]);
            return Some(idx.saturating_sub(1).min(self.n_cells() - 1));
        }
        let tol = 1e-12;
        self.cells.iter().position(|c| {
            let xi = c.to_reference(x);
            match self.elem {
                RefElement::Triangle => xi[0] >= -tol && xi[1] >= -tol && xi[0] + xi[1] <= 1.0 + tol,
                _ => (-tol..=1.0 + tol).contains(&xi[0]) && (-tol..=1.0 + tol).contains(&xi[1]),
            }
        })
    }

    /// Cells that own at least one physical boundary face.
    pub fn boundary_cells(&self) -> Vec<bool> {
        let mut b = vec![false; self.n_cells()];
        for f in &self.faces {
            if f.plus.is_none() {
                b[f.minus] = true;
            }
        }
        b
    }
}

/// Modal coefficients laid out as `[cell][component][mode]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DgState {
    pub data: Vec<f64>,
    pub m: usize,
    pub n_modes: usize,
}

impl DgState {
    pub fn zeros(disc: &Discretization, m: usize) -> Self {
        DgState { data: vec![0.0; disc.n_dofs(m)], m, n_modes: disc.n_modes() }
    }

    #[inline]
    pub fn idx(&self, cell: usize, comp: usize, mode: usize) -> usize {
        (cell * self.m + comp) * self.n_modes + mode
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let s = self.m * self.n_modes;
        &self.data[c * s..(c + 1) * s]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// L2 projection of `g` (physical components; remaining components set to zero).
pub fn project(disc: &Discretization, m: usize, g: impl Fn([f64; 2], &mut [f64])) -> DgState {
    let mut st = DgState::zeros(disc, m);
    let mut val = vec![0.0; m];
    let nm = disc.n_modes();
    disc.for_each_point(2 * disc.k() + 6, |c, x, w, phi| {
        val.iter_mut().for_each(|v| *v = 0.0);
        g(x, &mut val);
        let scale = w / disc.cells[c].det;
        for comp in 0..m {
            let base = (c * m + comp) * nm;
            for i in 0..nm {
                st.data[base + i] += scale * val[comp] * phi[i];
            }
        }
    });
    st
}

/// Value of a DG function at a physical point.
pub fn evaluate(disc: &Discretization, u: &DgState, x: [f64; 2]) -> Option<Vec<f64>> {
    let c = disc.locate(x)?;
    let phi = disc.basis.eval(disc.cells[c].to_reference(x));
    Some(
        (0..u.m)
            .map(|comp| (0..u.n_modes).map(|i| phi[i] * u.data[u.idx(c, comp, i)]).sum())
            .collect(),
    )
}

/// Boundary condition assignment by side of the domain.
#[derive(Clone, Debug, Default)]
pub struct BoundaryConditions {
    pub sides: HashMap<BoundarySide, BoundaryKind>,
    pub default: Option<BoundaryKind>,
    /// Exterior data for inflow faces, in physical components.
    pub data: Option<ExactSolution>,
}

impl BoundaryConditions {
    pub fn periodic() -> Self {
        Self::default()
    }

    pub fn all(kind: BoundaryKind, data: Option<ExactSolution>) -> Self {
        BoundaryConditions { sides: HashMap::new(), default: Some(kind), data }
    }

    pub fn with_side(mut self, side: BoundarySide, kind: BoundaryKind) -> Self {
        self.sides.insert(side, kind);
        self
    }

    fn kind_for(&self, side: BoundarySide) -> Option<BoundaryKind> {
        self.sides.get(&side).copied().or(self.default)
    }
}

#[derive(Clone, Debug)]
struct BoundaryFace {
    spec: BoundaryFluxSpec,
    inflow: bool,
}

/// `M u_t = A u + f(t)` on a discretization.
pub struct SemiDiscreteOperator {
    pub disc: Arc<Discretization>,
    pub sys: SymmetricSystem,
    face_flux: Vec<Option<Arc<FluxSpec>>>,
    boundary: Vec<Option<BoundaryFace>>,
    data: Option<ExactSolution>,
    b0: Vec<Mat>,
    b0_inv: Vec<Mat>,
    b0_diag: Option<Vec<Vec<f64>>>,
    /// Per-cell weighted mass matrices of the reaction coefficient.
    reaction: Option<(Vec<bool>, Vec<Vec<f64>>)>,
    /// Conservative time-derivative step for finite-difference boundary data.
    pub data_dt_hint: f64,
}

/// Builds the operator with the standard flux family.
pub fn assemble(
    disc: Arc<Discretization>,
    sys: &SymmetricSystem,
    kind: FluxKind,
    bc: &BoundaryConditions,
) -> Result<SemiDiscreteOperator> {
    assemble_with(disc, sys, &|n| build_face_flux(sys, n, kind), bc)
}

/// Builds the operator with an arbitrary face-flux provider.
pub fn assemble_with(
    disc: Arc<Discretization>,
    sys: &SymmetricSystem,
    provider: &dyn Fn([f64; 2]) -> Result<FluxSpec>,
    bc: &BoundaryConditions,
) -> Result<SemiDiscreteOperator> {
    if sys.dim != disc.dim {
        return invalid(format!("system `{}` is {}D but the mesh is {}D", sys.name, sys.dim, disc.dim));
    }
    if let Some(r) = disc.cells.iter().map(|c| c.region).max() {
        if r >= sys.n_regions() {
            return invalid(format!("mesh uses region {r} but the system defines {} region(s)", sys.n_regions()));
        }
    }
    let cache = FluxCache::new();
    let mut face_flux = Vec::with_capacity(disc.faces.len());
    let mut boundary = Vec::with_capacity(disc.faces.len());
    for f in &disc.faces {
        if f.plus.is_some() {
            face_flux.push(Some(cache.get_or_build(f.normal, provider)?));
            boundary.push(None);
        } else {
            let side = f.boundary.unwrap_or(BoundarySide::Other);
            let kind = bc
                .kind_for(side)
                .ok_or_else(|| EcdgError::Invalid(format!("no boundary condition for side {side:?}")))?;
            if kind == BoundaryKind::Inflow && bc.data.is_none() {
                return invalid("inflow boundary needs exterior data");
            }
            let spec = build_boundary_flux(sys, f.normal, kind)?;
            face_flux.push(None);
            boundary.push(Some(BoundaryFace { spec, inflow: kind == BoundaryKind::Inflow }));
        }
    }
    let b0: Vec<Mat> = sys.b0.iter().map(|b| b.mat().clone()).collect();
    let b0_inv = b0.iter().map(|b| b.inverse()).collect::<Result<Vec<_>>>()?;
    let b0_diag = sys
        .b0_is_diagonal()
        .then(|| b0.iter().map(|b| (0..sys.m).map(|i| b[(i, i)]).collect()).collect());
    let reaction = sys.reaction.as_ref().map(|re| {
        let nm = disc.n_modes();
        let mut mats = vec![vec![0.0; nm * nm]; disc.n_cells()];
        disc.for_each_point(2 * disc.k() + 6, |c, x, w, phi| {
            let cw = w * (re.coef)(x);
            for i in 0..nm {
                for j in 0..nm {
                    mats[c][i * nm + j] += cw * phi[i] * phi[j];
                }
            }
        });
        (re.components.clone(), mats)
    });
    let h = disc.min_size();
    Ok(SemiDiscreteOperator {
        disc,
        sys: sys.clone(),
        face_flux,
        boundary,
        data: bc.data.clone(),
        b0,
        b0_inv,
        b0_diag,
        reaction,
        data_dt_hint: 0.01 * h,
    })
}

impl SemiDiscreteOperator {
    pub fn m(&self) -> usize {
        self.sys.m
    }

    pub fn zero_state(&self) -> DgState {
        DgState::zeros(&self.disc, self.m())
    }

    pub fn state_from(&self, data: Vec<f64>) -> DgState {
        assert_eq!(data.len(), self.disc.n_dofs(self.m()));
        DgState { data, m: self.m(), n_modes: self.disc.n_modes() }
    }

    /// Face fluxes times quadrature weights, `n_q x m` per face.
    fn face_pass(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let disc = &*self.disc;
        let m = self.m();
        let nm = disc.n_modes();
        let work = |fi: usize| -> Vec<f64> {
            let f = &disc.faces[fi];
            let nq = f.weights.len();
            let mut out = vec![0.0; nq * m];
            let um = &u[f.minus * m * nm..(f.minus + 1) * m * nm];
            let mut vm = vec![0.0; m];
            let mut vp = vec![0.0; m];
            let mut avg = vec![0.0; m];
            let mut jmp = vec![0.0; m];
            for q in 0..nq {
                let tm = &f.trace_minus[q * nm..(q + 1) * nm];
                for c in 0..m {
                    vm[c] = dot(&um[c * nm..(c + 1) * nm], tm);
                }
                let flux = &mut out[q * m..(q + 1) * m];
                match f.plus {
                    Some(p) => {
                        let up = &u[p * m * nm..(p + 1) * m * nm];
                        let tp = &f.trace_plus[q * nm..(q + 1) * nm];
                        for c in 0..m {
                            vp[c] = dot(&up[c * nm..(c + 1) * nm], tp);
                            avg[c] = 0.5 * (vm[c] + vp[c]);
                            jmp[c] = vp[c] - vm[c];
                        }
                        let spec = self.face_flux[fi].as_ref().expect("interior flux");
                        for r in 0..m {
                            let mut s = 0.0;
                            for c in 0..m {
                                s += spec.mean[(r, c)] * avg[c] + spec.jump[(r, c)] * jmp[c];
                            }
                            flux[r] = f.weights[q] * s;
                        }
                    }
                    None => {
                        let spec = &self.boundary[fi].as_ref().expect("boundary flux").spec;
                        for r in 0..m {
                            let mut s = 0.0;
                            for c in 0..m {
                                s += spec.interior[(r, c)] * vm[c];
                            }
                            flux[r] = f.weights[q] * s;
                        }
                    }
                }
            }
            out
        };
        let n = disc.faces.len();
        if disc.n_cells() >= PAR_MIN_CELLS {
            (0..n).into_par_iter().with_min_len(PAR_CHUNK).map(work).collect()
        } else {
            (0..n).map(work).collect()
        }
    }

    fn cell_pass(&self, c: usize, u: &[f64], fluxes: &[Vec<f64>], out: &mut [f64]) {
        let disc = &*self.disc;
        let m = self.m();
        let nm = disc.n_modes();
        let nq = disc.vol_w.len();
        let cell = &disc.cells[c];
        let uc = &u[c * m * nm..(c + 1) * m * nm];
        out.iter_mut().for_each(|v| *v = 0.0);

        // Volume term: sum_q w det ((a00 B1 + a10 B2) U . dphi/dxi + (a01 B1 + a11 B2) U . dphi/deta).
        let a = cell.jinv_t;
        let b1 = self.sys.b1.mat();
        let b2 = self.sys.b2.mat();
        let mut bxi = Mat::zeros(m, m);
        let mut beta = Mat::zeros(m, m);
        for r in 0..m {
            for s in 0..m {
                bxi[(r, s)] = cell.det * (a[0][0] * b1[(r, s)] + a[1][0] * b2[(r, s)]);
                beta[(r, s)] = cell.det * (a[0][1] * b1[(r, s)] + a[1][1] * b2[(r, s)]);
            }
        }
        let mut uq = vec![0.0; m];
        let mut hxi = vec![0.0; m];
        let mut heta = vec![0.0; m];
        for q in 0..nq {
            let phi = &disc.vol_phi[q * nm..(q + 1) * nm];
            let dphi = &disc.vol_dphi[q * nm..(q + 1) * nm];
            let w = disc.vol_w[q];
            for s in 0..m {
                uq[s] = dot(&uc[s * nm..(s + 1) * nm], phi);
            }
            for r in 0..m {
                let (mut x, mut y) = (0.0, 0.0);
                for s in 0..m {
                    x += bxi[(r, s)] * uq[s];
                    y += beta[(r, s)] * uq[s];
                }
                hxi[r] = w * x;
                heta[r] = w * y;
            }
            for r in 0..m {
                let o = &mut out[r * nm..(r + 1) * nm];
                for i in 0..nm {
                    o[i] += hxi[r] * dphi[i][0] + heta[r] * dphi[i][1];
                }
            }
        }

        for &(fi, is_minus) in &disc.cell_faces[c] {
            let f = &disc.faces[fi];
            let fl = &fluxes[fi];
            let (trace, sign) = if is_minus { (&f.trace_minus, -1.0) } else { (&f.trace_plus, 1.0) };
            for q in 0..f.weights.len() {
                let t = &trace[q * nm..(q + 1) * nm];
                for r in 0..m {
                    let v = sign * fl[q * m + r];
                    let o = &mut out[r * nm..(r + 1) * nm];
                    for i in 0..nm {
                        o[i] += v * t[i];
                    }
                }
            }
        }

        if let Some((mask, mats)) = &self.reaction {
            let rm = &mats[c];
            for r in 0..m {
                if !mask[r] {
                    continue;
                }
                for i in 0..nm {
                    out[r * nm + i] += dot(&rm[i * nm..(i + 1) * nm], &uc[r * nm..(r + 1) * nm]);
                }
            }
        }
    }

    /// Energy `u^T M u`.
    pub fn energy(&self, u: &DgState) -> f64 {
        self.bilinear(&u.data, &u.data)
    }

    /// `(M a) . b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let m = self.m();
        let nm = self.disc.n_modes();
        let per_cell: Vec<f64> = self
            .disc
            .cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                let b0 = &self.b0[cell.region];
                let mut s = 0.0;
                for r in 0..m {
                    for t in 0..m {
                        let coef = b0[(r, t)];
                        if coef == 0.0 {
                            continue;
                        }
                        let ar = &a[(c * m + r) * nm..(c * m + r + 1) * nm];
                        let bt = &b[(c * m + t) * nm..(c * m + t + 1) * nm];
                        s += coef * dot(ar, bt);
                    }
                }
                cell.det * s
            })
            .collect();
        pairwise_sum(&per_cell)
    }

    /// Dense `A` by applying the operator to unit vectors.
    pub fn dense_matrix(&self) -> Result<Mat> {
        let n = self.len();
        if n > 20_000 {
            return invalid(format!("{n} unknowns is too many for a dense matrix"));
        }
        let mut a = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for i in 0..n {
                a[(i, j)] = col[i];
            }
        }
        Ok(a)
    }

    /// Dense mass matrix (block diagonal).
    pub fn dense_mass(&self) -> Mat {
        let m = self.m();
        let nm = self.disc.n_modes();
        let n = self.len();
        let mut mm = Mat::zeros(n, n);
        for (c, cell) in self.disc.cells.iter().enumerate() {
            let b0 = &self.b0[cell.region];
            for r in 0..m {
                for t in 0..m {
                    for i in 0..nm {
                        mm[((c * m + r) * nm + i, (c * m + t) * nm + i)] = cell.det * b0[(r, t)];
                    }
                }
            }
        }
        mm
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SemiDiscrete for SemiDiscreteOperator {
    fn len(&self) -> usize {
        self.disc.n_dofs(self.m())
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let fluxes = self.face_pass(u);
        let block = self.m() * self.disc.n_modes();
        if self.disc.n_cells() >= PAR_MIN_CELLS {
            out.par_chunks_mut(block)
                .with_min_len(PAR_CHUNK)
                .enumerate()
                .for_each(|(c, o)| self.cell_pass(c, u, &fluxes, o));
        } else {
            out.chunks_mut(block).enumerate().for_each(|(c, o)| self.cell_pass(c, u, &fluxes, o));
        }
    }

    fn solve_mass(&self, r: &mut [f64]) {
        let m = self.m();
        let nm = self.disc.n_modes();
        let mut tmp = vec![0.0; m];
        for (c, cell) in self.disc.cells.iter().enumerate() {
            let block = &mut r[c * m * nm..(c + 1) * m * nm];
            let inv_det = 1.0 / cell.det;
            match &self.b0_diag {
                Some(d) => {
                    let d = &d[cell.region];
                    for comp in 0..m {
                        let s = inv_det / d[comp];
                        block[comp * nm..(comp + 1) * nm].iter_mut().for_each(|v| *v *= s);
                    }
                }
                None => {
                    let inv = &self.b0_inv[cell.region];
                    for i in 0..nm {
                        for comp in 0..m {
                            tmp[comp] = (0..m).map(|t| inv[(comp, t)] * block[t * nm + i]).sum();
                        }
                        for comp in 0..m {
                            block[comp * nm + i] = inv_det * tmp[comp];
                        }
                    }
                }
            }
        }
    }

    fn source(&self, t: f64, s: usize, out: &mut [f64]) -> bool {
        let Some(data) = &self.data else { return false };
        let m = self.m();
        let nm = self.disc.n_modes();
        let nb = data.n_comp.min(m);
        let mut any = false;
        let mut g = vec![0.0; data.n_comp];
        let mut gfull = vec![0.0; m];
        for (fi, b) in self.boundary.iter().enumerate() {
            let Some(b) = b else { continue };
            if !b.inflow {
                continue;
            }
            if !any {
                out.iter_mut().for_each(|v| *v = 0.0);
                any = true;
            }
            let f = &self.disc.faces[fi];
            for q in 0..f.weights.len() {
                data.time_derivative(f.points[q], t, s, self.data_dt_hint, &mut g);
                gfull[..nb].copy_from_slice(&g[..nb]);
                let flux = b.spec.data.matvec(&gfull);
                let tq = &f.trace_minus[q * nm..(q + 1) * nm];
                for r in 0..m {
                    let v = -f.weights[q] * flux[r];
                    let o = &mut out[(f.minus * m + r) * nm..(f.minus * m + r + 1) * nm];
                    for i in 0..nm {
                        o[i] += v * tq[i];
                    }
                }
            }
        }
        any
    }

    fn boundary_mask(&self) -> Vec<bool> {
        let block = self.m() * self.disc.n_modes();
        self.disc.boundary_cells().into_iter().flat_map(|b| std::iter::repeat(b).take(block)).collect()
    }
}
