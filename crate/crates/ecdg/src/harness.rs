//! Example catalog, convergence studies, long-time runs and CSV output.

use crate::error::{invalid, EcdgError, Result};
use crate::flux::{BoundaryKind, FluxKind};
use crate::mesh::{Mesh1D, Mesh2D};
use crate::operator::{assemble, evaluate, project, BoundaryConditions, DgState, Discretization, SemiDiscreteOperator};
use crate::systems::exact::{periodic_gaussian, plane_waves, spherical_wave, ExactSolution, PlaneWave};
use crate::systems::{self, augment, AugmentMode, Augmentation, Reaction, SymmetricSystem, SystemKind};
use crate::timestep::{cfl_dt, integrate, Integrator};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    UnitSquare,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeshKind {
    Interval,
    Cartesian,
    Triangular,
    File(PathBuf),
}

impl std::str::FromStr for MeshKind {
    type Err = EcdgError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(MeshKind::Interval),
            "cart" | "cartesian" => Ok(MeshKind::Cartesian),
            "tri" | "triangular" => Ok(MeshKind::Triangular),
            other => Err(EcdgError::Unknown { kind: "mesh kind", name: other.into() }),
        }
    }
}

/// A benchmark problem with its exact solution and default settings.
#[derive(Clone, Debug)]
pub struct Example {
    pub id: &'static str,
    pub title: &'static str,
    pub system: SymmetricSystem,
    pub domain: Domain,
    pub periodic: bool,
    pub exact: ExactSolution,
    pub t_final: f64,
    pub default_k: usize,
    pub default_n: usize,
    pub default_perturb: f64,
    pub default_mesh: MeshKind,
    /// Sampling window `[from, to]` of the line cut (along `y = 1/2` in 2D).
    pub cut: (f64, f64),
}

pub const EXAMPLE_IDS: [&str; 12] =
    ["4.1", "4.2", "4.3", "4.4", "4.5", "4.6", "4.7", "4.8", "4.9", "4.10", "4.11", "4.12"];

fn wave(amp: Vec<f64>, k: [f64; 2], omega: f64) -> PlaneWave {
    PlaneWave { amp, k, omega }
}

/// Builds catalog example `id`.
pub fn example(id: &str) -> Result<Example> {
    let s2 = 2f64.sqrt();
    let unit = (0.0, 1.0);
    let ex1d = |id, title, system, exact, periodic, t_final, k, n, perturb| Example {
        id,
        title,
        system,
        domain: Domain::Interval(0.0, 1.0),
        periodic,
        exact,
        t_final,
        default_k: k,
        default_n: n,
        default_perturb: perturb,
        default_mesh: MeshKind::Interval,
        cut: unit,
    };
    let ex2d = |id, title, system, exact, t_final, k, n, mesh| Example {
        id,
        title,
        system,
        domain: Domain::UnitSquare,
        periodic: true,
        exact,
        t_final,
        default_k: k,
        default_n: n,
        default_perturb: 0.1,
        default_mesh: mesh,
        cut: unit,
    };
    let adv1 = || plane_waves("sin(2pi(x-t))", vec![wave(vec![1.0], [1.0, 0.0], 1.0)]);
    Ok(match id {
        "4.1" => ex1d("4.1", "1D advection, periodic", systems::advection1d(1.0)?, adv1(), true, 0.5, 1, 20, 0.1),
        "4.2" => ex1d("4.2", "1D advection, inflow boundary", systems::advection1d(1.0)?, adv1(), false, 0.5, 1, 20, 0.1),
        "4.3" => {
            let exact = plane_waves(
                "acoustics plane waves",
                vec![wave(vec![0.5, 0.5], [1.0, 0.0], 1.5), wave(vec![0.5, -0.5], [1.0, 0.0], -0.5)],
            );
            ex1d("4.3", "1D acoustics, subsonic background, periodic", systems::acoustics1d(0.5, 1.0, 1.0)?, exact, true, 0.5, 1, 20, 0.1)
        }
        "4.4" => {
            let exact = plane_waves("sin(6pi(x-t))", vec![wave(vec![1.0], [3.0, 0.0], 3.0)]);
            ex1d("4.4", "1D advection, long-time plane wave", systems::advection1d(1.0)?, exact, true, 10.0, 2, 10, 0.0)
        }
        "4.5" => {
            let exact = periodic_gaussian("gaussian", 1, 200.0, [1.0, 0.0]);
            ex1d("4.5", "1D advection, long-time Gaussian pulse", systems::advection1d(1.0)?, exact, true, 40.0, 2, 20, 0.0)
        }
        "4.6" => {
            let mut sys = systems::advection1d(1.0)?;
            sys.reaction = Some(Reaction { coef: Arc::new(|x: [f64; 2]| -1.0 / x[0]), components: vec![true] });
            Example {
                id: "4.6",
                title: "spherical wave with inflow source",
                system: sys,
                domain: Domain::Interval(5.0, 450.0),
                periodic: false,
                exact: spherical_wave(5.0, PI / 3.0),
                t_final: 400.0,
                default_k: 2,
                default_n: 250,
                default_perturb: 0.0,
                default_mesh: MeshKind::Interval,
                cut: (350.0, 430.0),
            }
        }
        "4.7" => {
            let exact = plane_waves("sin(2pi(x+y-2t))", vec![wave(vec![1.0], [1.0, 1.0], 2.0)]);
            ex2d("4.7", "2D advection, periodic", systems::advection2d(1.0, 1.0)?, exact, 0.1, 1, 10, MeshKind::Triangular)
        }
        "4.8" => {
            let a = s2 / 4.0;
            let exact = plane_waves(
                "acoustics plane waves, background flow",
                vec![wave(vec![0.5, a, a], [1.0, 1.0], s2 + 0.5), wave(vec![0.5, -a, -a], [1.0, 1.0], -(s2 - 0.5))],
            );
            ex2d("4.8", "2D acoustics, subsonic background, periodic", systems::acoustics2d(0.5, 0.0, 1.0, 1.0)?, exact, 0.1, 1, 10, MeshKind::Cartesian)
        }
        "4.9" => {
            let a = s2 / 4.0;
            let exact = plane_waves(
                "acoustics plane waves",
                vec![wave(vec![0.5, a, a], [1.0, 1.0], s2), wave(vec![0.5, -a, -a], [1.0, 1.0], -s2)],
            );
            ex2d("4.9", "2D acoustics, zero background, periodic", systems::acoustics2d(0.0, 0.0, 1.0, 1.0)?, exact, 0.1, 1, 10, MeshKind::Cartesian)
        }
        "4.10" => {
            let (lambda, mu, rho) = (2.0, 1.0, 1.0);
            let cp = ((lambda + 2.0 * mu) / rho as f64).sqrt();
            let cs = (mu / rho as f64).sqrt();
            let h = s2 / 2.0;
            // A plane wave in x + y travels at sqrt(2) times its speed in that variable.
            let exact = plane_waves(
                "elastic plane waves",
                vec![
                    wave(vec![-mu, mu, 0.0, -h * cs, h * cs], [1.0, 1.0], -s2 * cs),
                    wave(vec![lambda + mu, lambda + mu, mu, -h * cp, -h * cp], [1.0, 1.0], s2 * cp),
                ],
            );
            ex2d("4.10", "2D elastodynamics, periodic", systems::elastodynamics(lambda, mu, rho)?, exact, 0.1, 1, 10, MeshKind::Cartesian)
        }
        "4.11" => {
            let exact = plane_waves("sin(4pi(x+y-2t))", vec![wave(vec![1.0], [2.0, 2.0], 4.0)]);
            let mut e = ex2d("4.11", "2D advection, long-time plane wave", systems::advection2d(1.0, 1.0)?, exact, 40.0, 2, 10, MeshKind::Cartesian);
            e.default_perturb = 0.0;
            e
        }
        "4.12" => {
            let exact = periodic_gaussian("gaussian", 2, 200.0, [1.0, 1.0]);
            let mut e = ex2d("4.12", "2D advection, long-time Gaussian pulse", systems::advection2d(1.0, 1.0)?, exact, 10.0, 2, 20, MeshKind::Cartesian);
            e.default_perturb = 0.0;
            e
        }
        other => return Err(EcdgError::Unknown { kind: "example", name: other.into() }),
    })
}

/// Discretization family: the flux plus the augmentation it runs on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Method {
    pub flux: FluxKind,
    pub augment: Option<AugmentMode>,
}

impl Method {
    pub fn upwind() -> Self {
        Method { flux: FluxKind::Upwind, augment: None }
    }

    pub fn central() -> Self {
        Method { flux: FluxKind::Central, augment: None }
    }

    pub fn doubled() -> Self {
        Method { flux: FluxKind::Doubling, augment: Some(AugmentMode::FullDouble) }
    }

    /// The energy-conserving method used for the system's benchmark tables.
    pub fn conserving(sys: &SymmetricSystem) -> Self {
        match sys.kind {
            SystemKind::Advection1D => Method { flux: FluxKind::EnergyConserving, augment: Some(AugmentMode::Partial1D) },
            SystemKind::Acoustics1D => Method { flux: FluxKind::Alternating(None), augment: None },
            SystemKind::Advection2D | SystemKind::LinearizedEuler => Method::doubled(),
            SystemKind::Acoustics2D if sys.alternating_groups().is_none() => {
                Method { flux: FluxKind::EnergyConserving, augment: Some(AugmentMode::AcousticPairing2D) }
            }
            _ => Method { flux: FluxKind::Alternating(None), augment: None },
        }
    }

    /// Method for a flux name, adding the augmentation the flux requires.
    pub fn for_flux(sys: &SymmetricSystem, flux: FluxKind) -> Result<Self> {
        Ok(match flux {
            FluxKind::Doubling => Method::doubled(),
            FluxKind::EnergyConserving => {
                let paired = crate::algebra::eig_decompose(&sys.b_n([1.0, 0.0]), 1e-12)?.r == 0;
                if sys.dim == 1 {
                    Method { flux, augment: (!paired).then_some(AugmentMode::Partial1D) }
                } else if sys.kind == SystemKind::Acoustics2D && sys.alternating_groups().is_none() {
                    Method { flux, augment: Some(AugmentMode::AcousticPairing2D) }
                } else if paired {
                    Method { flux, augment: None }
                } else {
                    return invalid(format!("`{}` has an unpaired spectrum; use the doubling flux", sys.name));
                }
            }
            other => Method { flux: other, augment: None },
        })
    }
}

/// Settings of a single run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub k: usize,
    pub n: usize,
    pub perturb: f64,
    pub seed: u64,
    pub mesh: MeshKind,
    pub integrator: Integrator,
    pub cfl: f64,
    /// Fixed step overriding the CFL rule.
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    /// Also bound the step so that `dt^6 <= 0.01 h^(k+1)`, which keeps the
    /// temporal error of `rk_lw(6)` below the spatial error.
    pub reference_accuracy: bool,
}

impl RunConfig {
    pub fn for_example(ex: &Example) -> Self {
        RunConfig {
            k: ex.default_k,
            n: ex.default_n,
            perturb: ex.default_perturb,
            seed: 1,
            mesh: ex.default_mesh.clone(),
            integrator: Integrator::RkLw(6),
            cfl: 0.1,
            dt: None,
            t_final: None,
            reference_accuracy: false,
        }
    }

    /// Reference settings for convergence studies: `rk_lw(6)` with the
    /// accuracy bound on the step.
    pub fn reference(ex: &Example, k: usize) -> Self {
        RunConfig { k, reference_accuracy: true, cfl: 0.05, ..RunConfig::for_example(ex) }
    }
}

/// Mesh for an example.
pub fn build_discretization(ex: &Example, cfg: &RunConfig) -> Result<Discretization> {
    match (&ex.domain, &cfg.mesh) {
        (Domain::Interval(a, b), MeshKind::Interval) => {
            let m = Mesh1D::uniform(*a, *b, cfg.n, ex.periodic)?;
            let m = if cfg.perturb > 0.0 { m.perturbed(cfg.perturb, cfg.seed)? } else { m };
            Discretization::from_mesh1d(&m, cfg.k)
        }
        (Domain::UnitSquare, kind) => {
            let per = [ex.periodic, ex.periodic];
            let mesh = match kind {
                MeshKind::Cartesian => Mesh2D::cartesian(cfg.n, cfg.n, [[0.0, 1.0], [0.0, 1.0]], per, cfg.perturb, cfg.seed)?,
                MeshKind::Triangular => Mesh2D::triangulated_square(cfg.n, cfg.perturb, cfg.seed, per)?,
                MeshKind::File(p) => Mesh2D::load_triangles(p, per)?,
                MeshKind::Interval => return invalid("interval meshes need a 1D example"),
            };
            Discretization::from_mesh2d(&mesh, cfg.k)
        }
        _ => invalid("mesh kind does not match the example dimension"),
    }
}

/// An assembled problem ready for time stepping.
pub struct Problem {
    pub op: SemiDiscreteOperator,
    pub u0: DgState,
    pub exact: ExactSolution,
    pub t_final: f64,
    pub dt: f64,
}

pub fn build_problem(ex: &Example, method: Method, cfg: &RunConfig) -> Result<Problem> {
    let sys = match method.augment {
        Some(mode) => augment(&ex.system, mode)?,
        None => ex.system.clone(),
    };
    let disc = Arc::new(build_discretization(ex, cfg)?);
    let bc = if ex.periodic {
        BoundaryConditions::periodic()
    } else {
        BoundaryConditions::all(BoundaryKind::Inflow, Some(ex.exact.clone()))
    };
    let op = assemble(disc.clone(), &sys, method.flux, &bc)?;
    let nb = ex.exact.n_comp;
    let exact = ex.exact.clone();
    let u0 = project(&disc, sys.m, |x, out| exact.eval(x, 0.0, &mut out[..nb]));
    let t_final = cfg.t_final.unwrap_or(ex.t_final);
    let speed = ex.system.max_wave_speed()?;
    let mut dt = match cfg.dt {
        Some(dt) => dt,
        None => cfl_dt(cfg.cfl, disc.min_size(), speed),
    };
    if cfg.reference_accuracy {
        let h = disc.cells.iter().map(|c| c.size).fold(0.0, f64::max);
        let h = if disc.dim == 2 { 1.0 / cfg.n as f64 } else { h };
        dt = dt.min((0.01 * h.powi(cfg.k as i32 + 1)).powf(1.0 / 6.0));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return invalid(format!("time step {dt} is not positive"));
    }
    Ok(Problem { op, u0, exact: ex.exact.clone(), t_final, dt })
}

/// Integrates a problem to its final time.
pub fn run_problem(p: &Problem, integ: Integrator, observer: impl FnMut(&crate::timestep::StepView<'_>)) -> Result<DgState> {
    let u = integrate(&p.op, integ, &p.u0.data, 0.0, p.t_final, p.dt, observer)?;
    Ok(p.op.state_from(u))
}

/// Named L2 errors of one solution.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl ErrorReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// L2 errors of every physical component, their root-sum-square `all` (for
/// systems), and the norm `aux` of the auxiliary components when present.
pub fn l2_errors(op: &SemiDiscreteOperator, u: &DgState, exact: &ExactSolution, t: f64) -> ErrorReport {
    let disc = &op.disc;
    let m = u.m;
    let nb = exact.n_comp;
    let mut sq = vec![0.0; m];
    let mut ex = vec![0.0; nb];
    disc.for_each_point(2 * disc.k() + 6, |c, x, w, phi| {
        exact.eval(x, t, &mut ex);
        for comp in 0..m {
            let uh: f64 = (0..u.n_modes).map(|i| u.data[u.idx(c, comp, i)] * phi[i]).sum();
            let e = if comp < nb { uh - ex[comp] } else { uh };
            sq[comp] += w * e * e;
        }
    });
    let mut names: Vec<String> = op.sys.components[..nb].to_vec();
    let mut values: Vec<f64> = sq[..nb].iter().map(|v| v.sqrt()).collect();
    if nb > 1 {
        names.push("all".into());
        values.push(sq[..nb].iter().sum::<f64>().sqrt());
    }
    if m > nb {
        names.push("aux".into());
        values.push(sq[nb..].iter().sum::<f64>().sqrt());
    }
    ErrorReport { names, values }
}

/// Errors on a sequence of meshes with observed orders
/// `log(e_{i-1}/e_i) / log(N_i/N_{i-1})`.
#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub quantities: Vec<String>,
    pub ns: Vec<usize>,
    /// `errors[row][quantity]`.
    pub errors: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    pub fn column(&self, q: &str) -> Option<usize> {
        self.quantities.iter().position(|n| n == q)
    }

    /// Orders per row; the first row has none.
    pub fn orders(&self, q: &str) -> Vec<Option<f64>> {
        let Some(c) = self.column(q) else { return vec![] };
        (0..self.ns.len())
            .map(|i| {
                (i > 0).then(|| {
                    (self.errors[i - 1][c] / self.errors[i][c]).ln() / (self.ns[i] as f64 / self.ns[i - 1] as f64).ln()
                })
            })
            .collect()
    }

    /// Order observed between the last two meshes.
    pub fn final_order(&self, q: &str) -> Option<f64> {
        self.orders(q).last().copied().flatten()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("N");
        for q in &self.quantities {
            s.push_str(&format!(",error_{q},order_{q}"));
        }
        s.push('\n');
        let orders: Vec<Vec<Option<f64>>> = self.quantities.iter().map(|q| self.orders(q)).collect();
        for (i, n) in self.ns.iter().enumerate() {
            s.push_str(&n.to_string());
            for (c, _) in self.quantities.iter().enumerate() {
                s.push_str(&format!(",{:.6e},", self.errors[i][c]));
                if let Some(o) = orders[c][i] {
                    s.push_str(&format!("{o:.4}"));
                }
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6}", "N")?;
        for q in &self.quantities {
            write!(f, " {:>12} {:>6}", format!("err_{q}"), "order")?;
        }
        writeln!(f)?;
        let orders: Vec<Vec<Option<f64>>> = self.quantities.iter().map(|q| self.orders(q)).collect();
        for (i, n) in self.ns.iter().enumerate() {
            write!(f, "{n:>6}")?;
            for c in 0..self.quantities.len() {
                match orders[c][i] {
                    Some(o) => write!(f, " {:>12.4e} {:>6.2}", self.errors[i][c], o)?,
                    None => write!(f, " {:>12.4e} {:>6}", self.errors[i][c], "-")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Runs `ex` on each mesh size and tabulates the final-time errors.
pub fn convergence(ex: &Example, method: Method, cfg: &RunConfig, ns: &[usize]) -> Result<ConvergenceTable> {
    let reports: Vec<ErrorReport> = ns
        .par_iter()
        .map(|&n| {
            let c = RunConfig { n, ..cfg.clone() };
            let p = build_problem(ex, method, &c)?;
            let u = run_problem(&p, c.integrator, |_| {})?;
            Ok(l2_errors(&p.op, &u, &p.exact, p.t_final))
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceTable {
        quantities: reports[0].names.clone(),
        ns: ns.to_vec(),
        errors: reports.into_iter().map(|r| r.values).collect(),
    })
}

/// Samples `(x, u_h, u_exact)` of the first component along the cut.
pub fn line_cut(p: &Problem, u: &DgState, t: f64, from: f64, to: f64, samples: usize, periodic: bool) -> Vec<(f64, f64, f64)> {
    let dim = p.op.disc.dim;
    let denom = if periodic { samples } else { samples - 1 } as f64;
    (0..samples)
        .map(|i| {
            let x = from + (to - from) * i as f64 / denom;
            let pt = if dim == 1 { [x, 0.0] } else { [x, 0.5] };
            let uh = evaluate(&p.op.disc, u, pt).map(|v| v[0]).unwrap_or(f64::NAN);
            (x, uh, p.exact.value(pt, t)[0])
        })
        .collect()
}

/// Dissipation and dispersion measures of a long-time run.
#[derive(Clone, Copy, Debug)]
pub struct WaveMetrics {
    /// `max |u_h| / max |u|` on the cut.
    pub amplitude_ratio: f64,
    /// Shift `d` at the correlation peak of `u_h(x)` with `u(x - d)` nearest
    /// zero, so periodic waves report a shift within half a wavelength.
    pub phase_shift: f64,
    /// `max_t |E_h(t) - E_h(0)| / E_h(0)`.
    pub energy_drift: f64,
}

pub fn wave_metrics(cut: &[(f64, f64, f64)], periodic: bool, energy: &[(f64, f64)]) -> WaveMetrics {
    let n = cut.len();
    let amp_h = cut.iter().fold(0.0f64, |a, c| a.max(c.1.abs()));
    let amp_e = cut.iter().fold(0.0f64, |a, c| a.max(c.2.abs()));
    let dx = if n > 1 { cut[1].0 - cut[0].0 } else { 1.0 };
    let max_lag = if periodic { n as isize / 2 } else { n as isize / 4 };
    let corr = |s: isize| -> f64 {
        let mut acc = 0.0;
        for i in 0..n as isize {
            let j = i - s;
            let j = if periodic {
                j.rem_euclid(n as isize)
            } else if j < 0 || j >= n as isize {
                continue;
            } else {
                j
            };
            acc += cut[i as usize].1 * cut[j as usize].2;
        }
        acc
    };
    let lags: Vec<isize> = (-max_lag..=max_lag).collect();
    let vals: Vec<f64> = lags.iter().map(|&s| corr(s)).collect();
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Periodic signals have a peak every wavelength; take the strong local peak closest to zero lag.
    let best = (0..vals.len())
        .filter(|&i| {
            let left = i == 0 || vals[i - 1] <= vals[i];
            let right = i + 1 == vals.len() || vals[i + 1] <= vals[i];
            left && right && vals[i] >= 0.5 * top
        })
        .min_by(|&a, &b| lags[a].abs().cmp(&lags[b].abs()).then(vals[b].total_cmp(&vals[a])))
        .unwrap_or(0);
    let mut shift = lags[best] as f64;
    if best > 0 && best + 1 < vals.len() {
        let (a, b, c) = (vals[best - 1], vals[best], vals[best + 1]);
        let den = a - 2.0 * b + c;
        if den.abs() > 0.0 {
            shift += 0.5 * (a - c) / den;
        }
    }
    let e0 = energy.first().map(|e| e.1).unwrap_or(0.0);
    let drift = energy.iter().fold(0.0f64, |a, e| a.max((e.1 - e0).abs())) / e0.abs().max(f64::MIN_POSITIVE);
    WaveMetrics { amplitude_ratio: amp_h / amp_e.max(f64::MIN_POSITIVE), phase_shift: shift * dx, energy_drift: drift }
}

/// Output of a long-time run.
#[derive(Clone, Debug)]
pub struct LongtimeResult {
    /// `(t, E_h)` after every step.
    pub energy: Vec<(f64, f64)>,
    pub cut: Vec<(f64, f64, f64)>,
    pub metrics: WaveMetrics,
    pub errors: ErrorReport,
}

pub fn longtime(ex: &Example, method: Method, cfg: &RunConfig) -> Result<LongtimeResult> {
    let p = build_problem(ex, method, cfg)?;
    let mut energy = Vec::new();
    let u = run_problem(&p, cfg.integrator, |v| energy.push((v.t, p.op.bilinear(v.u, v.u))))?;
    let cells = p.op.disc.n_cells();
    let cut = line_cut(&p, &u, p.t_final, ex.cut.0, ex.cut.1, (40 * cells).clamp(400, 8000), ex.periodic && ex.cut == (0.0, 1.0));
    let metrics = wave_metrics(&cut, ex.periodic && ex.cut == (0.0, 1.0), &energy);
    let errors = l2_errors(&p.op, &u, &p.exact, p.t_final);
    Ok(LongtimeResult { energy, cut, metrics, errors })
}

pub fn energy_csv(series: &[(f64, f64)]) -> String {
    let mut s = String::from("t,E_h\n");
    for (t, e) in series {
        s.push_str(&format!("{t:.10e},{e:.16e}\n"));
    }
    s
}

pub fn cut_csv(cut: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("x,u_h,u_exact\n");
    for (x, uh, ue) in cut {
        s.push_str(&format!("{x:.10e},{uh:.10e},{ue:.10e}\n"));
    }
    s
}

/// True when the method leaves the physical system unchanged.
pub fn is_base(method: Method) -> bool {
    method.augment.is_none()
}

/// Short label of an augmentation, used in reports.
pub fn augmentation_label(a: Augmentation) -> &'static str {
    match a {
        Augmentation::None => "none",
        Augmentation::FullDouble => "double",
        Augmentation::Partial1D => "partial",
        Augmentation::AcousticPairing2D => "pairing",
    }
}
