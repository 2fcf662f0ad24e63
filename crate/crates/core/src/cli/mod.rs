//! Batch front end: one run or a parameter sweep from a [`RunConfig`], with
//! CSV reports and a JSON manifest per run.

mod config;

pub use config::{
    DdSpec, Discretization, FieldDump, GeometrySpec, IncidenceSpec, InclusionSpec, LayerSpec, MaterialSpec, Mode,
    OutputSpec, PmlSpec, RunConfig, StackSpec, SweepParameter, SweepSpec,
};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::adaptive::{assemble, attach_pml, solve_adaptive, solve_with_grid, Phase, PmlSolve};
use crate::fem::boundary::{ExteriorField, NoField};
use crate::fem::FemSolution;
use crate::geometry::{Material, Mesh, PeriodicGeometry, Side};
use crate::modes::{zero3, IncidentWave, ModeRange};
use crate::multilayer::{solve_stack_at, LayerStack, MirroredSolution, ReflectionCache};
use crate::pml::{generate_grid, write_history_csv, PmlGrid, PmlIteration};
use crate::postproc::{efficiencies, energy_against, field_energy, outgoing_amplitudes, EfficiencyTable, EnergyReport};
use crate::schwarz::{ddeuv_solve, schwarz_solve, Below, ConvergenceHistory, SchwarzState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug)]
pub enum RunError {
    Config(Error),
    Solver(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration: {e}"),
            RunError::Solver(e) => write!(f, "solver: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

fn setup_err(e: Error) -> RunError {
    RunError::Config(e)
}

fn solve_err(e: Error) -> RunError {
    match e {
        Error::Config(_) => RunError::Config(e),
        other => RunError::Solver(other),
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub mesh: f64,
    pub pml: f64,
    pub solve: f64,
    pub total: f64,
    /// Wall time per Schwarz iteration.
    pub iterations: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    /// Unknowns per subdomain (one entry for monolithic runs).
    pub n_dofs: Vec<usize>,
    pub pml_rows: usize,
    pub pml_thickness: f64,
    pub pml_converged: bool,
    /// None for monolithic runs.
    pub dd_converged: Option<bool>,
    pub iterations: usize,
    pub efficiencies: EfficiencyTable,
    pub energy: Vec<EnergyReport>,
    pub timings: Timings,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.pml_converged && self.dd_converged.unwrap_or(true)
    }

    pub fn exit_code(&self) -> i32 {
        if self.converged() {
            EXIT_OK
        } else {
            EXIT_NOT_CONVERGED
        }
    }

    pub fn total_dofs(&self) -> usize {
        self.n_dofs.iter().sum()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    timestamp: u64,
    config: &'a RunConfig,
    report: &'a RunReport,
}

/// Write through a temporary file so readers never see partial output.
fn write_atomic(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = vec![];
    f(&mut buf)?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Analytic solution when the meshed strip is a plain layer stack.
fn layered_reference(geom: &PeriodicGeometry, inc: &IncidentWave) -> Result<Option<Box<dyn ExteriorField>>> {
    if !geom.inclusions.is_empty() {
        return Ok(None);
    }
    let mut interfaces = vec![geom.x2_minus];
    interfaces.extend(geom.slabs.iter().map(|s| s.x2_hi));
    let layers = geom.slabs.iter().map(|s| s.material).collect();
    let stack = LayerStack::new(interfaces, layers, geom.ambient_below, geom.ambient_above)?;
    let a = inc.amplitude;
    Ok(Some(if inc.k[1] < 0.0 {
        Box::new(solve_stack_at(&stack, inc.k[0], inc.k[2], inc.omega, zero3(), a, 0.0)?)
    } else {
        let b = [a[0], -a[1], a[2]];
        Box::new(MirroredSolution { inner: solve_stack_at(&stack.mirrored(), inc.k[0], inc.k[2], inc.omega, zero3(), b, 0.0)? })
    }))
}

/// Orders that can propagate in either ambient, with one order of margin.
fn propagating_range(geom: &PeriodicGeometry, inc: &IncidentWave) -> ModeRange {
    let kmax = [geom.ambient_above, geom.ambient_below]
        .iter()
        .map(|m| m.wavenumber(inc.omega).re)
        .fold(0.0, f64::max);
    let g = 2.0 * std::f64::consts::PI / geom.period;
    let lo = ((-kmax - inc.k[0]) / g).floor() as i64 - 1;
    let hi = ((kmax - inc.k[0]) / g).ceil() as i64 + 1;
    ModeRange::new(lo, hi)
}

struct Solved {
    solutions: Vec<FemSolution>,
    grid: PmlGrid,
    pml_history: Vec<PmlIteration>,
    pml_converged: bool,
    history: Option<ConvergenceHistory>,
    dd_converged: Option<bool>,
    state: Option<SchwarzState>,
}

/// Build, solve and post-process one configuration, writing all artifacts
/// into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> std::result::Result<RunReport, RunError> {
    let t_total = Instant::now();
    cfg.validate().map_err(setup_err)?;
    let geom = cfg.geometry().map_err(setup_err)?;
    let stack = cfg.stack().map_err(setup_err)?;
    let inc = cfg.incident().map_err(setup_err)?;
    fs::create_dir_all(out).map_err(|e| RunError::Config(e.into()))?;

    let t = Instant::now();
    let mut lines = cfg.dd.lines.clone();
    lines.sort_by(|a, b| b.total_cmp(a));
    let mesh_lines: &[f64] = if cfg.mode == Mode::Dd { &lines } else { &[] };
    let mut mesh =
        Mesh::build_with_lines(&geom, cfg.discretization.points_per_wavelength, cfg.incidence.wavelength, mesh_lines)
            .map_err(setup_err)?;
    for _ in 0..cfg.discretization.refinements {
        mesh = mesh.refine_uniform();
    }
    let mesh_time = t.elapsed().as_secs_f64();

    let phase = Phase { k1: inc.k[0], k3: inc.k[2], omega: inc.omega };
    let pml_cfg = cfg.pml.resolve(inc.omega, mesh.h_max_boundary, cfg.discretization.order);
    pml_cfg.validate().map_err(setup_err)?;
    let upward = inc.k[1] > 0.0;
    let top: &dyn ExteriorField = if upward { &NoField } else { &inc };
    let bottom: &dyn ExteriorField = if upward { &inc } else { &NoField };
    let scfg = cfg.dd.schwarz();

    // PML grid: adaptive pre-solve on the whole FEM strip (stack ignored), or fixed
    let t = Instant::now();
    let (grid, pml_history, pml_converged, mono) = if cfg.pml.adaptive {
        let o = solve_adaptive(&mesh, &pml_cfg, phase, top, bottom).map_err(solve_err)?;
        if let Some(d) = &o.diagnostic {
            log::warn!("PML adaptation: {d}");
        }
        (o.grid, o.history, o.converged, Some(o.field))
    } else {
        let g = generate_grid(&pml_cfg);
        let it = PmlIteration { kappa_min: pml_cfg.kappa_min, rows: g.rows(), thickness: g.thickness(), tail_ratio: f64::NAN };
        (g, vec![it], true, None)
    };
    let pml_time = t.elapsed().as_secs_f64();
    log::info!("PML grid: {} rows, thickness {:.4e}", grid.rows(), grid.thickness());

    let t = Instant::now();
    let cache = stack
        .as_ref()
        .map(|s| ReflectionCache::new(s.clone(), inc.k[0], inc.k[2], inc.omega, geom.period, mesh.x2_bottom));
    let solved = match cfg.mode {
        Mode::Monolithic => {
            let s = match mono {
                Some(s) => s,
                None => solve_with_grid(&mesh, &grid, phase, top, bottom).map_err(solve_err)?,
            };
            let mut hist = pml_history;
            if let Some(last) = hist.last_mut() {
                if last.tail_ratio.is_nan() {
                    last.tail_ratio = tail_ratio(&s);
                }
            }
            Solved {
                solutions: vec![s.solution],
                grid,
                pml_history: hist,
                pml_converged,
                history: None,
                dd_converged: None,
                state: None,
            }
        }
        Mode::Dd => {
            let pieces = if lines.is_empty() { vec![] } else { mesh.split(&lines).map_err(solve_err)? };
            let meshes: Vec<&Mesh> = if pieces.is_empty() { vec![&mesh] } else { pieces.iter().map(|p| &p.mesh).collect() };
            let subs = meshes
                .iter()
                .map(|m| assemble(attach_pml(m, &grid.xi)?, phase, grid.gamma))
                .collect::<Result<Vec<Arc<_>>>>()
                .map_err(solve_err)?;
            let below = match &cache {
                Some(c) => Below::Stack(c),
                None => Below::Field(bottom),
            };
            let o = schwarz_solve(&subs, top, below, &scfg, None).map_err(solve_err)?;
            Solved {
                solutions: o.solutions,
                grid,
                pml_history,
                pml_converged,
                history: Some(o.history),
                dd_converged: Some(o.converged),
                state: Some(o.state),
            }
        }
        Mode::DdEuv => {
            let c = cache.as_ref().expect("validated: dd_euv has a stack");
            let p = assemble(attach_pml(&mesh, &grid.xi).map_err(solve_err)?, phase, grid.gamma).map_err(solve_err)?;
            let o = ddeuv_solve(p, c, top, &scfg).map_err(solve_err)?;
            Solved {
                solutions: o.solutions,
                grid,
                pml_history,
                pml_converged,
                history: Some(o.history),
                dd_converged: Some(o.converged),
                state: Some(o.state),
            }
        }
    };
    let solve_time = t.elapsed().as_secs_f64();

    let effs = efficiency_table(&solved.solutions, &geom, &inc, stack.is_some()).map_err(solve_err)?;
    let reference = if stack.is_none() { layered_reference(&geom, &inc).map_err(solve_err)? } else { None };
    let energy: Vec<EnergyReport> = solved
        .solutions
        .iter()
        .map(|s| match &reference {
            Some(r) => energy_against(s, r.as_ref()),
            None => field_energy(s),
        })
        .collect();

    let report = RunReport {
        mode: cfg.mode,
        n_dofs: solved.solutions.iter().map(|s| s.problem.n_dofs()).collect(),
        pml_rows: solved.grid.rows(),
        pml_thickness: solved.grid.thickness(),
        pml_converged: solved.pml_converged,
        dd_converged: solved.dd_converged,
        iterations: solved.history.as_ref().map_or(1, |h| h.records.len()),
        efficiencies: effs,
        energy,
        timings: Timings {
            mesh: mesh_time,
            pml: pml_time,
            solve: solve_time,
            total: 0.0,
            iterations: solved.history.as_ref().map_or(vec![], |h| h.records.iter().map(|r| r.seconds).collect()),
        },
    };
    let mut report = report;
    write_artifacts(cfg, out, &solved, &report).map_err(solve_err)?;
    report.timings.total = t_total.elapsed().as_secs_f64();
    write_manifest(cfg, out, &report).map_err(solve_err)?;
    Ok(report)
}

fn tail_ratio(s: &PmlSolve) -> f64 {
    [Side::Top, Side::Bottom]
        .iter()
        .map(|&side| {
            let (t, n) = s.tail(side);
            if n > 0.0 {
                t / n
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn efficiency_table(sols: &[FemSolution], geom: &PeriodicGeometry, inc: &IncidentWave, stacked: bool) -> Result<EfficiencyTable> {
    let range = propagating_range(geom, inc);
    let (first, last) = (&sols[0], &sols[sols.len() - 1]);
    let (above, below) = (geom.ambient_above, geom.ambient_below);
    let side_amps = |s: &FemSolution, side: Side, sub: &dyn ExteriorField, m: Material| outgoing_amplitudes(s, side, sub, m, range);
    if inc.k[1] < 0.0 {
        let (ra, rm) = side_amps(first, Side::Top, inc, above)?;
        if stacked {
            return efficiencies(inc, (&ra, &rm, above), None);
        }
        let (ta, tm) = side_amps(last, Side::Bottom, &NoField, below)?;
        efficiencies(inc, (&ra, &rm, above), Some((&ta, &tm, below)))
    } else {
        let (ra, rm) = side_amps(last, Side::Bottom, inc, below)?;
        let (ta, tm) = side_amps(first, Side::Top, &NoField, above)?;
        efficiencies(inc, (&ra, &rm, below), Some((&ta, &tm, above)))
    }
}

fn write_artifacts(cfg: &RunConfig, out: &Path, solved: &Solved, report: &RunReport) -> Result<()> {
    write_atomic(&out.join("efficiencies.csv"), |w| report.efficiencies.write_csv(w))?;
    write_atomic(&out.join("energy.csv"), |w| {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["subdomain", "electric", "magnetic", "delta_e", "delta_e_prime", "error_energy"])?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        for (j, e) in report.energy.iter().enumerate() {
            wr.write_record([
                j.to_string(),
                format!("{:.12e}", e.electric),
                format!("{:.12e}", e.magnetic),
                opt(e.delta_e),
                opt(e.delta_e_prime),
                opt(e.error_energy),
            ])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    write_atomic(&out.join("convergence.csv"), |w| solved.history.clone().unwrap_or_default().write_csv(w))?;
    write_atomic(&out.join("pml_diagnostics.csv"), |w| write_history_csv(&solved.pml_history, w))?;
    if let Some(d) = cfg.output.field_dump {
        for (j, s) in solved.solutions.iter().enumerate() {
            write_atomic(&out.join(format!("field_{j}.csv")), |w| s.write_csv(w, d.nx, d.ny))?;
        }
    }
    if cfg.output.checkpoint {
        if let Some(st) = &solved.state {
            write_atomic(&out.join("checkpoint.json"), |w| st.write_json(w))?;
        }
    }
    Ok(())
}

fn write_manifest(cfg: &RunConfig, out: &Path, report: &RunReport) -> Result<()> {
    let timestamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let m = Manifest { version: env!("CARGO_PKG_VERSION"), timestamp, config: cfg, report };
    write_atomic(&out.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &m)?;
        writeln!(w)?;
        Ok(())
    })
}

/// One line of the sweep summary.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub exit_code: i32,
    pub message: String,
    pub report: Option<RunReport>,
}

pub const SUMMARY_HEADER: &str = "# sweep summary v1";

/// Run every sweep point into `out/point_NNN`, in parallel, and write
/// `summary.csv`. Failed points are recorded and do not stop the sweep.
pub fn sweep(cfg: &RunConfig, out: &Path) -> std::result::Result<Vec<SweepRow>, RunError> {
    cfg.validate().map_err(setup_err)?;
    let spec = cfg.sweep.as_ref().ok_or_else(|| RunError::Config(Error::Config("no `sweep` section".into())))?;
    let values = spec.points().map_err(setup_err)?;
    fs::create_dir_all(out).map_err(|e| RunError::Config(e.into()))?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let dir = point_dir(out, index);
            let res = cfg.with_parameter(spec.parameter, value).map_err(setup_err).and_then(|c| run(&c, &dir));
            match res {
                Ok(r) => SweepRow { index, value, exit_code: r.exit_code(), message: String::new(), report: Some(r) },
                Err(e) => {
                    log::error!("sweep point {index} ({value}): {e}");
                    SweepRow { index, value, exit_code: e.exit_code(), message: e.to_string(), report: None }
                }
            }
        })
        .collect();
    write_atomic(&out.join("summary.csv"), |w| write_summary(spec.parameter, &rows, w)).map_err(solve_err)?;
    Ok(rows)
}

pub fn point_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("point_{index:03}"))
}

fn write_summary<W: Write>(p: SweepParameter, rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    let mut wr = csv::Writer::from_writer(w);
    let name = serde_json::to_value(p)?.as_str().unwrap_or("value").to_string();
    wr.write_record([
        name.as_str(),
        "exit_code",
        "n_dofs",
        "pml_rows",
        "pml_thickness",
        "pml_converged",
        "iterations",
        "total_reflectance",
        "total_transmittance",
        "delta_e",
        "error_energy",
        "message",
    ])?;
    for r in rows {
        let f = |x: f64| format!("{x:.12e}");
        let mut rec = vec![format!("{}", r.value), r.exit_code.to_string()];
        match &r.report {
            Some(rep) => {
                let de = rep.energy.iter().filter_map(|e| e.delta_e).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
                let ee = rep.energy.iter().filter_map(|e| e.error_energy).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
                rec.extend([
                    rep.total_dofs().to_string(),
                    rep.pml_rows.to_string(),
                    f(rep.pml_thickness),
                    rep.pml_converged.to_string(),
                    rep.iterations.to_string(),
                    f(rep.efficiencies.total_reflectance),
                    f(rep.efficiencies.total_transmittance),
                    de.map(f).unwrap_or_default(),
                    ee.map(f).unwrap_or_default(),
                    String::new(),
                ]);
            }
            None => rec.extend(std::iter::repeat(String::new()).take(9).chain([r.message.clone()])),
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Exit status of a whole sweep: the most severe point status.
pub fn sweep_exit_code(rows: &[SweepRow]) -> i32 {
    rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK)
}
