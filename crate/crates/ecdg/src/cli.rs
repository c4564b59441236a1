//! Command-line front end.
//!
//! Settings come from an optional flat `key=value` file (`--config`) and are
//! overridden by flags. Exit codes: 0 on success or `--help`, 2 for usage and
//! configuration errors, 1 for runtime failures.

use crate::error::{EcdgError, Result};
use crate::flux::FluxKind;
use crate::harness::{self, example, Example, MeshKind, Method, RunConfig, EXAMPLE_IDS};
use crate::systems::CATALOG;
use crate::timestep::Integrator;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "ecdg", version, about = "Energy-conserving DG solver and verification harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single run; prints the final-time L2 errors.
    Run(Opts),
    /// Convergence study over several meshes; prints a CSV table.
    Converge(Opts),
    /// Energy time series `t,E_h`.
    Energy(Opts),
    /// Long-time run with dissipation and phase metrics.
    Longtime(Opts),
    /// Lists examples, systems, fluxes and integrators.
    List,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Example id, e.g. 4.1.
    #[arg(long)]
    example: Option<String>,
    /// ec | double | upwind | lf | central | alt.
    #[arg(long)]
    flux: Option<String>,
    /// Polynomial degree.
    #[arg(long)]
    k: Option<usize>,
    /// Mesh size, or a comma-separated list for `converge`.
    #[arg(long = "N")]
    n: Option<String>,
    /// Relative random perturbation of the mesh.
    #[arg(long)]
    perturb: Option<f64>,
    #[arg(long = "mesh-seed")]
    mesh_seed: Option<u64>,
    /// interval | cart | tri.
    #[arg(long)]
    mesh: Option<String>,
    /// Triangle mesh file; overrides `--mesh`.
    #[arg(long = "mesh-file")]
    mesh_file: Option<PathBuf>,
    /// lw<order> | rk<r> | hybrid<r>.
    #[arg(long)]
    ti: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    /// Flat key=value settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file for the main CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output file for the line cut of `longtime`.
    #[arg(long = "cut-out")]
    cut_out: Option<PathBuf>,
}

/// Flat settings keyed by flag name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings(pub BTreeMap<String, String>);

pub const SETTING_KEYS: [&str; 14] = [
    "example", "flux", "k", "N", "perturb", "mesh-seed", "mesh", "mesh-file", "ti", "cfl", "dt", "tfinal", "out", "cut-out",
];

impl Settings {
    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(EcdgError::Invalid(format!("config line {}: expected key=value", i + 1)));
            };
            let k = k.trim();
            if !SETTING_KEYS.contains(&k) {
                return Err(EcdgError::Unknown { kind: "config key", name: k.to_string() });
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Settings(map))
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn set(&mut self, key: &str, v: Option<String>) {
        if let Some(v) = v {
            self.0.insert(key.to_string(), v);
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| EcdgError::Invalid(format!("invalid value `{v}` for `{key}`"))),
        }
    }
}

fn merge(opts: &Opts) -> Result<Settings> {
    let mut s = match &opts.config {
        Some(p) => Settings::parse(&std::fs::read_to_string(p)?)?,
        None => Settings::default(),
    };
    s.set("example", opts.example.clone());
    s.set("flux", opts.flux.clone());
    s.set("k", opts.k.map(|v| v.to_string()));
    s.set("N", opts.n.clone());
    s.set("perturb", opts.perturb.map(|v| v.to_string()));
    s.set("mesh-seed", opts.mesh_seed.map(|v| v.to_string()));
    s.set("mesh", opts.mesh.clone());
    s.set("mesh-file", opts.mesh_file.as_ref().map(|p| p.display().to_string()));
    s.set("ti", opts.ti.clone());
    s.set("cfl", opts.cfl.map(|v| v.to_string()));
    s.set("dt", opts.dt.map(|v| v.to_string()));
    s.set("tfinal", opts.tfinal.map(|v| v.to_string()));
    s.set("out", opts.out.as_ref().map(|p| p.display().to_string()));
    s.set("cut-out", opts.cut_out.as_ref().map(|p| p.display().to_string()));
    Ok(s)
}

/// Settings validated against the catalogs.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub example: Example,
    pub method: Method,
    pub config: RunConfig,
    pub ns: Vec<usize>,
    pub out: Option<PathBuf>,
    pub cut_out: Option<PathBuf>,
}

pub fn resolve(s: &Settings) -> Result<Resolved> {
    let id: String = s.get("example")?.ok_or_else(|| EcdgError::Invalid("--example is required".into()))?;
    let ex = example(&id)?;
    let method = match s.get::<String>("flux")? {
        Some(f) => Method::for_flux(&ex.system, f.parse::<FluxKind>()?)?,
        None => Method::conserving(&ex.system),
    };
    let mut cfg = RunConfig::for_example(&ex);
    if let Some(k) = s.get("k")? {
        cfg.k = k;
    }
    let ns: Vec<usize> = match s.0.get("N") {
        Some(list) => list
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| EcdgError::Invalid(format!("invalid mesh size `{v}`"))))
            .collect::<Result<_>>()?,
        None => vec![cfg.n],
    };
    if ns.is_empty() || ns.contains(&0) {
        return Err(EcdgError::Invalid("mesh sizes must be positive".into()));
    }
    cfg.n = ns[0];
    if let Some(p) = s.get("perturb")? {
        cfg.perturb = p;
    }
    if let Some(seed) = s.get("mesh-seed")? {
        cfg.seed = seed;
    }
    if let Some(m) = s.get::<MeshKind>("mesh")? {
        cfg.mesh = m;
    }
    if let Some(p) = s.get::<PathBuf>("mesh-file")? {
        cfg.mesh = MeshKind::File(p);
    }
    if let Some(ti) = s.get::<Integrator>("ti")? {
        cfg.integrator = ti;
    }
    if let Some(c) = s.get("cfl")? {
        cfg.cfl = c;
    }
    cfg.dt = s.get("dt")?;
    cfg.t_final = s.get("tfinal")?;
    Ok(Resolved { example: ex, method, config: cfg, ns, out: s.get("out")?, cut_out: s.get("cut-out")? })
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn list() -> String {
    let mut s = String::from("examples:\n");
    for id in EXAMPLE_IDS {
        if let Ok(ex) = example(id) {
            s.push_str(&format!("  {id:<5} {} (T = {})\n", ex.title, ex.t_final));
        }
    }
    s.push_str("systems:\n");
    for name in CATALOG {
        s.push_str(&format!("  {name}\n"));
    }
    s.push_str("fluxes:\n  ec double upwind lf central alt\n");
    s.push_str("integrators:\n  lw<order> (even order >= 2), rk<r>, hybrid<r>\n");
    s
}

fn execute(cmd: Command) -> Result<()> {
    let opts = match cmd {
        Command::List => return emit(&None, &list()),
        Command::Run(ref o) | Command::Converge(ref o) | Command::Energy(ref o) | Command::Longtime(ref o) => o,
    };
    let r = resolve(&merge(opts)?)?;
    match cmd {
        Command::Run(_) => {
            let p = harness::build_problem(&r.example, r.method, &r.config)?;
            let u = harness::run_problem(&p, r.config.integrator, |_| {})?;
            let e = harness::l2_errors(&p.op, &u, &p.exact, p.t_final);
            let mut text = String::from("quantity,error\n");
            for (n, v) in e.names.iter().zip(&e.values) {
                text.push_str(&format!("{n},{v:.6e}\n"));
            }
            emit(&r.out, &text)
        }
        Command::Converge(_) => {
            let table = harness::convergence(&r.example, r.method, &r.config, &r.ns)?;
            emit(&r.out, &table.to_csv())
        }
        Command::Energy(_) => {
            let p = harness::build_problem(&r.example, r.method, &r.config)?;
            let mut series = Vec::new();
            harness::run_problem(&p, r.config.integrator, |v| series.push((v.t, p.op.bilinear(v.u, v.u))))?;
            emit(&r.out, &harness::energy_csv(&series))
        }
        Command::Longtime(_) => {
            let res = harness::longtime(&r.example, r.method, &r.config)?;
            let m = res.metrics;
            eprintln!(
                "amplitude_ratio={:.6} phase_shift={:.6e} energy_drift={:.3e}",
                m.amplitude_ratio, m.phase_shift, m.energy_drift
            );
            if let Some(p) = &r.cut_out {
                std::fs::write(p, harness::cut_csv(&res.cut))?;
            }
            emit(&r.out, &harness::energy_csv(&res.energy))
        }
        Command::List => unreachable!(),
    }
}

fn is_usage_error(e: &EcdgError) -> bool {
    matches!(e, EcdgError::Invalid(_) | EcdgError::Unknown { .. })
}

/// Applies `ECDG_THREADS` to the global worker pool.
pub fn configure_threads() {
    if let Some(n) = std::env::var("ECDG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    match execute(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}
