//! One-dimensional interval meshes and two-dimensional conforming meshes of
//! rectangles or triangles, with face connectivity and oriented normals.
//!
//! Interior faces are oriented by the reference direction `(1, 1)`: the side
//! whose outward normal points along it is `K-`, and the stored normal is that
//! outward normal. When the normal is orthogonal to `(1, 1)` the side with a
//! positive x-component wins. Jumps are always `K+ minus K-`.

use crate::basis::RefElement;
use crate::error::{EcdgError, MeshError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::path::Path;

/// Interval mesh `a = x_0 < x_1 < ... < x_N = b`.
#[derive(Clone, Debug)]
pub struct Mesh1D {
    pub nodes: Vec<f64>,
    pub periodic: bool,
    /// Material region of each cell.
    pub regions: Vec<usize>,
}

impl Mesh1D {
    pub fn uniform(a: f64, b: f64, n: usize, periodic: bool) -> Result<Self> {
        if n == 0 {
            return Err(MeshError::Parameters("a 1D mesh needs at least one cell".into()).into());
        }
        if !(a < b) {
            return Err(MeshError::Parameters(format!("empty interval [{a}, {b}]")).into());
        }
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
        nodes[n] = b;
        Ok(Mesh1D { nodes, periodic, regions: vec![0; n] })
    }

    /// Moves every interior node by a uniform random amount in
    /// `[-fraction h, fraction h]`. Endpoints stay fixed, so periodicity holds.
    pub fn perturbed(&self, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&fraction) {
            return Err(MeshError::Parameters(format!("perturbation {fraction} outside [0, 0.5)")).into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = self.nodes.clone();
        let n = self.n_cells();
        for i in 1..n {
            let h = (self.nodes[i + 1] - self.nodes[i - 1]) / 2.0;
            let shift: f64 = rng.gen_range(-1.0..=1.0) * fraction * h;
            nodes[i] = self.nodes[i] + shift;
        }
        Ok(Mesh1D { nodes, periodic: self.periodic, regions: self.regions.clone() })
    }

    /// Assigns regions from the cell midpoints.
    pub fn with_regions(mut self, region_of: impl Fn(f64) -> usize) -> Self {
        self.regions = (0..self.n_cells()).map(|j| region_of(self.center(j))).collect();
        self
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.nodes[j] + self.nodes[j + 1])
    }

    pub fn h_max(&self) -> f64 {
        (0..self.n_cells()).map(|j| self.width(j)).fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_cells()).map(|j| self.width(j)).fold(f64::INFINITY, f64::min)
    }

    /// Regularity constant `h_min / h_max`, so that `h / rho <= 1 / gamma`.
    pub fn gamma(&self) -> f64 {
        self.h_min() / self.h_max()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.n_cells()])
    }

    /// Index of the cell containing `x` (closed on the left).
    pub fn locate(&self, x: f64) -> Option<usize> {
        let (a, b) = self.domain();
        if x < a || x > b {
            return None;
        }
        let idx = self.nodes.partition_point(|&v| v <= x);
        Some(idx.saturating_sub(1).min(self.n_cells() - 1))
    }
}

/// Which part of the domain boundary a face lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundarySide {
    Left,
    Right,
    Bottom,
    Top,
    Other,
}

/// A 2D cell given by counterclockwise vertex indices.
#[derive(Clone, Debug)]
pub struct Cell2D {
    pub kind: RefElement,
    pub verts: Vec<usize>,
    pub region: usize,
}

/// A face with its two sides. `plus` is `None` on a physical boundary, where
/// `normal` is the outward normal of `minus`.
#[derive(Clone, Debug)]
pub struct Face2D {
    /// `(cell, local face index)` of `K-`.
    pub minus: (usize, usize),
    pub plus: Option<(usize, usize)>,
    pub normal: [f64; 2],
    pub length: f64,
    /// Endpoints as traversed counterclockwise by `K-`.
    pub endpoints: [[f64; 2]; 2],
    /// Offset from a point seen by `K-` to the same point seen by `K+`
    /// (nonzero only across periodic boundaries).
    pub shift: [f64; 2],
    pub boundary: Option<BoundarySide>,
}

/// Conforming mesh of rectangles or triangles.
#[derive(Clone, Debug)]
pub struct Mesh2D {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Cell2D>,
    pub faces: Vec<Face2D>,
    pub periodic: [bool; 2],
    pub bbox: [[f64; 2]; 2],
}

const MATCH_TOL: f64 = 1e-10;

fn signed_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n).map(|i| {
        let a = p[i];
        let b = p[(i + 1) % n];
        a[0] * b[1] - a[1] * b[0]
    }).sum::<f64>()
}

impl Mesh2D {
    /// Builds connectivity and oriented faces. Periodic directions identify
    /// boundary edges whose coordinates match up to a shift by the box size.
    pub fn from_cells(vertices: Vec<[f64; 2]>, cells: Vec<Cell2D>, periodic: [bool; 2]) -> Result<Self> {
        if cells.is_empty() {
            return Err(MeshError::Parameters("mesh has no cells".into()).into());
        }
        let nv = vertices.len();
        let mut bbox = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
        for v in &vertices {
            for d in 0..2 {
                bbox[d][0] = bbox[d][0].min(v[d]);
                bbox[d][1] = bbox[d][1].max(v[d]);
            }
        }
        let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        let mut edge_order: Vec<(usize, usize)> = vec![];
        for (c, cell) in cells.iter().enumerate() {
            if let Some(&bad) = cell.verts.iter().find(|&&v| v >= nv) {
                return Err(MeshError::VertexOutOfRange { index: bad, count: nv }.into());
            }
            let pts: Vec<[f64; 2]> = cell.verts.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            let scale = pts.iter().map(|p| p[0].abs().max(p[1].abs())).fold(1.0, f64::max);
            if area <= 1e-14 * scale * scale {
                return Err(MeshError::Degenerate { cell: c, area }.into());
            }
            if cell.kind == RefElement::Quad {
                let d = [pts[1][0] + pts[3][0] - pts[0][0] - pts[2][0], pts[1][1] + pts[3][1] - pts[0][1] - pts[2][1]];
                if d[0].abs().max(d[1].abs()) > 1e-10 * scale {
                    return Err(MeshError::Parameters(format!("quadrilateral {c} is not a parallelogram")).into());
                }
            }
            let nvc = cell.verts.len();
            for f in 0..nvc {
                let a = cell.verts[f];
                let b = cell.verts[(f + 1) % nvc];
                let key = (a.min(b), a.max(b));
                let entry = edges.entry(key).or_default();
                if entry.is_empty() {
                    edge_order.push(key);
                }
                entry.push((c, f));
            }
        }

        let mut mesh = Mesh2D { vertices, cells, faces: vec![], periodic, bbox };
        let mut boundary: Vec<(usize, usize)> = vec![];
        for key in &edge_order {
            let owners = &edges[key];
            match owners.len() {
                1 => boundary.push(owners[0]),
                2 => {
                    let face = mesh.oriented_face(owners[0], owners[1], [0.0, 0.0]);
                    mesh.faces.push(face);
                }
                count => return Err(MeshError::NonConforming { a: key.0, b: key.1, count }.into()),
            }
        }

        mesh.check_hanging(&boundary)?;

        let lx = bbox[0][1] - bbox[0][0];
        let ly = bbox[1][1] - bbox[1][0];
        let tol = MATCH_TOL * lx.max(ly).max(1.0);
        let mut sides: Vec<((usize, usize), BoundarySide)> =
            boundary.iter().map(|&o| (o, mesh.classify(o, tol))).collect();
        for (dir, (lo, hi)) in [(BoundarySide::Left, BoundarySide::Right), (BoundarySide::Bottom, BoundarySide::Top)]
            .into_iter()
            .enumerate()
        {
            if !periodic[dir] {
                continue;
            }
            let shift = if dir == 0 { [lx, 0.0] } else { [0.0, ly] };
            let his: Vec<(usize, usize)> = sides.iter().filter(|s| s.1 == hi).map(|s| s.0).collect();
            let mut used = vec![false; his.len()];
            for &(owner, side) in sides.iter() {
                if side != lo {
                    continue;
                }
                let (p, q) = mesh.edge_points(owner);
                let mid = [0.5 * (p[0] + q[0]) + shift[0], 0.5 * (p[1] + q[1]) + shift[1]];
                let found = his.iter().enumerate().find(|(i, &o)| {
                    let (a, b) = mesh.edge_points(o);
                    !used[*i]
                        && (0.5 * (a[0] + b[0]) - mid[0]).abs() <= tol
                        && (0.5 * (a[1] + b[1]) - mid[1]).abs() <= tol
                });
                let Some((i, &other)) = found else {
                    return Err(MeshError::PeriodicMismatch { x: mid[0], y: mid[1] }.into());
                };
                used[i] = true;
                // Shift that maps points on `owner` to the matching points on `other`.
                let face = mesh.oriented_face(owner, other, shift);
                mesh.faces.push(face);
            }
            if let Some(i) = used.iter().position(|u| !u) {
                let (a, b) = mesh.edge_points(his[i]);
                return Err(MeshError::PeriodicMismatch { x: 0.5 * (a[0] + b[0]), y: 0.5 * (a[1] + b[1]) }.into());
            }
            sides.retain(|s| s.1 != lo && s.1 != hi);
        }
        for (owner, side) in sides {
            let (p, q) = mesh.edge_points(owner);
            let normal = outward_normal(p, q);
            mesh.faces.push(Face2D {
                minus: owner,
                plus: None,
                normal,
                length: dist(p, q),
                endpoints: [p, q],
                shift: [0.0, 0.0],
                boundary: Some(side),
            });
        }
        Ok(mesh)
    }

    /// Rejects single-owner edges that have another boundary vertex strictly
    /// inside them, which is how a hanging node shows up.
    fn check_hanging(&self, boundary: &[(usize, usize)]) -> Result<()> {
        let mut candidates: Vec<usize> = boundary
            .iter()
            .flat_map(|&(c, f)| {
                let v = &self.cells[c].verts;
                [v[f], v[(f + 1) % v.len()]]
            })
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        for &(c, f) in boundary {
            let v = &self.cells[c].verts;
            let (a, b) = (v[f], v[(f + 1) % v.len()]);
            let (p, q) = (self.vertices[a], self.vertices[b]);
            let len = dist(p, q);
            for &w in &candidates {
                if w == a || w == b {
                    continue;
                }
                let x = self.vertices[w];
                let t = ((x[0] - p[0]) * (q[0] - p[0]) + (x[1] - p[1]) * (q[1] - p[1])) / (len * len);
                let cross = (x[0] - p[0]) * (q[1] - p[1]) - (x[1] - p[1]) * (q[0] - p[0]);
                if t > 1e-12 && t < 1.0 - 1e-12 && cross.abs() <= 1e-12 * len * len {
                    return Err(MeshError::HangingNode { vertex: w, a, b }.into());
                }
            }
        }
        Ok(())
    }

    fn edge_points(&self, (c, f): (usize, usize)) -> ([f64; 2], [f64; 2]) {
        let v = &self.cells[c].verts;
        (self.vertices[v[f]], self.vertices[v[(f + 1) % v.len()]])
    }

    fn classify(&self, owner: (usize, usize), tol: f64) -> BoundarySide {
        let (p, q) = self.edge_points(owner);
        let on = |d: usize, val: f64| (p[d] - val).abs() <= tol && (q[d] - val).abs() <= tol;
        if on(0, self.bbox[0][0]) {
            BoundarySide::Left
        } else if on(0, self.bbox[0][1]) {
            BoundarySide::Right
        } else if on(1, self.bbox[1][0]) {
            BoundarySide::Bottom
        } else if on(1, self.bbox[1][1]) {
            BoundarySide::Top
        } else {
            BoundarySide::Other
        }
    }

    /// Face between `a` and `b`, where a point `x` on `a`'s edge corresponds
    /// to `x + shift_ab` on `b`'s edge.
    fn oriented_face(&self, a: (usize, usize), b: (usize, usize), shift_ab: [f64; 2]) -> Face2D {
        let (pa, qa) = self.edge_points(a);
        let (pb, qb) = self.edge_points(b);
        let na = outward_normal(pa, qa);
        let dot = na[0] + na[1];
        let a_is_minus = if dot.abs() > 1e-12 { dot > 0.0 } else { na[0] > 0.0 };
        if a_is_minus {
            Face2D {
                minus: a,
                plus: Some(b),
                normal: na,
                length: dist(pa, qa),
                endpoints: [pa, qa],
                shift: shift_ab,
                boundary: None,
            }
        } else {
            Face2D {
                minus: b,
                plus: Some(a),
                normal: [-na[0], -na[1]],
                length: dist(pb, qb),
                endpoints: [pb, qb],
                shift: [-shift_ab[0], -shift_ab[1]],
                boundary: None,
            }
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> Vec<[f64; 2]> {
        self.cells[c].verts.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        signed_area(&self.cell_points(c))
    }

    /// Radius of the largest inscribed circle of cell `c`.
    pub fn inradius(&self, c: usize) -> f64 {
        let p = self.cell_points(c);
        let area = signed_area(&p);
        let sides: Vec<f64> = (0..p.len()).map(|i| dist(p[i], p[(i + 1) % p.len()])).collect();
        match self.cells[c].kind {
            RefElement::Triangle => 2.0 * area / sides.iter().sum::<f64>(),
            _ => area / (2.0 * sides.iter().cloned().fold(0.0, f64::max)),
        }
    }

    pub fn min_inradius(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.inradius(c)).fold(f64::INFINITY, f64::min)
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| {
                let p = self.cell_points(c);
                let mut d: f64 = 0.0;
                for i in 0..p.len() {
                    for j in 0..i {
                        d = d.max(dist(p[i], p[j]));
                    }
                }
                d
            })
            .fold(0.0, f64::max)
    }

    /// Structured mesh of `nx x ny` rectangles on `[x0,x1] x [y0,y1]`. Interior
    /// grid lines are shifted by up to `perturb` times the spacing, which keeps
    /// every cell a rectangle.
    pub fn cartesian(
        nx: usize,
        ny: usize,
        bbox: [[f64; 2]; 2],
        periodic: [bool; 2],
        perturb: f64,
        seed: u64,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::Parameters("Cartesian mesh needs nx, ny >= 1".into()).into());
        }
        let xs = Mesh1D::uniform(bbox[0][0], bbox[0][1], nx, false)?.perturbed(perturb, seed)?.nodes;
        let ys = Mesh1D::uniform(bbox[1][0], bbox[1][1], ny, false)?
            .perturbed(perturb, seed.wrapping_add(0x9e37_79b9))?
            .nodes;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for y in &ys {
            for x in &xs {
                vertices.push([*x, *y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(Cell2D {
                    kind: RefElement::Quad,
                    verts: vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                    region: 0,
                });
            }
        }
        Mesh2D::from_cells(vertices, cells, periodic)
    }

    /// Unstructured-looking triangulation of the unit square: an `n x n` grid
    /// whose interior vertices move randomly by up to `perturb * h` in each
    /// direction and whose squares are split along randomly chosen diagonals.
    pub fn triangulated_square(n: usize, perturb: f64, seed: u64, periodic: [bool; 2]) -> Result<Self> {
        if n == 0 {
            return Err(MeshError::Parameters("triangulation needs n >= 1".into()).into());
        }
        if !(0.0..0.35).contains(&perturb) {
            return Err(MeshError::Parameters(format!("perturbation {perturb} outside [0, 0.35)")).into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let mut p = [i as f64 * h, j as f64 * h];
                if i > 0 && i < n && j > 0 && j < n {
                    p[0] += rng.gen_range(-1.0..=1.0) * perturb * h;
                    p[1] += rng.gen_range(-1.0..=1.0) * perturb * h;
                }
                vertices.push(p);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        let tri = |v: [usize; 3]| Cell2D { kind: RefElement::Triangle, verts: v.to_vec(), region: 0 };
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if rng.gen_bool(0.5) {
                    cells.push(tri([a, b, c]));
                    cells.push(tri([a, c, d]));
                } else {
                    cells.push(tri([a, b, d]));
                    cells.push(tri([b, c, d]));
                }
            }
        }
        Mesh2D::from_cells(vertices, cells, periodic)
    }

    /// Parses the plain-text triangle format: `V nv`, `nv` lines `x y`,
    /// `T nt`, `nt` lines `i j k` of zero-based counterclockwise indices.
    pub fn parse_triangles(text: &str, periodic: [bool; 2]) -> Result<Self> {
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, f)| !f.is_empty() && !f[0].starts_with('#'))
            .collect();
        let last = text.lines().count();
        let mut it = lines.into_iter();
        let nv = parse_section(&mut it, "V", last)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, f) = parse_fields(&mut it, 2, last)?;
            let x: f64 = f[0].parse().map_err(|_| parse_err(ln, "bad coordinate"))?;
            let y: f64 = f[1].parse().map_err(|_| parse_err(ln, "bad coordinate"))?;
            vertices.push([x, y]);
        }
        let nt = parse_section(&mut it, "T", last)?;
        let mut cells = Vec::with_capacity(nt);
        for _ in 0..nt {
            let (ln, f) = parse_fields(&mut it, 3, last)?;
            let mut v = vec![0usize; 3];
            for d in 0..3 {
                v[d] = f[d].parse().map_err(|_| parse_err(ln, "bad vertex index"))?;
            }
            cells.push(Cell2D { kind: RefElement::Triangle, verts: v, region: 0 });
        }
        Mesh2D::from_cells(vertices, cells, periodic)
    }

    pub fn load_triangles(path: &Path, periodic: [bool; 2]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Mesh2D::parse_triangles(&text, periodic)
    }

    /// Serializes a triangle mesh in the format read by [`Mesh2D::parse_triangles`].
    pub fn to_triangle_text(&self) -> String {
        let mut s = format!("V {}\n", self.vertices.len());
        for v in &self.vertices {
            s.push_str(&format!("{:.17e} {:.17e}\n", v[0], v[1]));
        }
        s.push_str(&format!("T {}\n", self.cells.len()));
        for c in &self.cells {
            let v = &c.verts;
            s.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        s
    }
}

fn parse_err(line: usize, msg: &str) -> EcdgError {
    EcdgError::from(MeshError::Parse { line, msg: msg.to_string() })
}

fn parse_fields<'a>(
    it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>,
    count: usize,
    last: usize,
) -> Result<(usize, Vec<&'a str>)> {
    let (ln, f) = it.next().ok_or_else(|| parse_err(last, "unexpected end of file"))?;
    if f.len() != count {
        return Err(parse_err(ln, &format!("expected {count} fields")));
    }
    Ok((ln, f))
}

fn parse_section<'a>(it: &mut impl Iterator<Item = (usize, Vec<&'a str>)>, tag: &str, last: usize) -> Result<usize> {
    let (ln, f) = parse_fields(it, 2, last)?;
    if f[0] != tag {
        return Err(parse_err(ln, &format!("expected `{tag} <count>`")));
    }
    f[1].parse().map_err(|_| parse_err(ln, "bad count"))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Outward unit normal of a counterclockwise edge from `p` to `q`.
fn outward_normal(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    let l = dist(p, q);
    [(q[1] - p[1]) / l, -(q[0] - p[0]) / l]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_cartesian_faces() {
        let m = Mesh2D::cartesian(1, 1, [[0.0, 1.0], [0.0, 1.0]], [false, false], 0.0, 0).unwrap();
        assert_eq!(m.faces.len(), 4);
        assert!(m.faces.iter().all(|f| f.plus.is_none()));
    }

    #[test]
    fn periodic_cartesian_has_no_boundary() {
        let m = Mesh2D::cartesian(3, 2, [[0.0, 1.0], [0.0, 1.0]], [true, true], 0.1, 3).unwrap();
        assert_eq!(m.faces.len(), 2 * 3 * 2);
        for f in &m.faces {
            assert!(f.plus.is_some());
            assert!(f.normal[0] + f.normal[1] >= 0.0);
        }
    }

    #[test]
    fn diagonal_tie_prefers_positive_x() {
        // Two triangles sharing the anti-diagonal edge with normal +-(1,-1)/sqrt2.
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let cells = vec![
            Cell2D { kind: RefElement::Triangle, verts: vec![0, 1, 3], region: 0 },
            Cell2D { kind: RefElement::Triangle, verts: vec![1, 2, 3], region: 0 },
        ];
        let m = Mesh2D::from_cells(verts, cells, [false, false]).unwrap();
        let f = m.faces.iter().find(|f| f.plus.is_some()).unwrap();
        assert!(f.normal[0] > 0.0);
        assert_eq!(f.minus.0, 0);
    }
}
