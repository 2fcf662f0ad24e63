//! Multiplicative Schwarz iteration over horizontally stacked subdomains, with
//! PML-based transmission and optional analytic coupling to a layer stack.

mod stack;

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use stack::{bottom_trace, couple_stack, StackCoupling};

use crate::error::{Error, Result};
use crate::fem::boundary::{BoundaryData, ExteriorField};
use crate::fem::{FemProblem, FemSolution};
use crate::geometry::Side;
use crate::modes::ModeAmplitudes;
use crate::multilayer::ReflectionCache;
use crate::numerics::norm2;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchwarzConfig {
    /// Relaxation of the exchanged traces, in (0, 1].
    pub damping: f64,
    /// Stop when the largest relative subdomain update is below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Inner FEM/stack loop (nested analytic coupling).
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    /// Orders |k1n| < mode_factor·2π/h_max are exchanged with a stack.
    pub mode_factor: f64,
}

impl Default for SchwarzConfig {
    fn default() -> Self {
        Self { damping: 1.0, tol: 1e-10, max_iters: 100, inner_tol: 1e-9, inner_max_iters: 100, mode_factor: 0.1 }
    }
}

impl SchwarzConfig {
    pub fn euv() -> Self {
        Self { damping: 0.66, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config(format!("damping {} outside (0, 1]", self.damping)));
        }
        if !(self.tol > 0.0 && self.inner_tol > 0.0 && self.mode_factor > 0.0) || self.max_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::Config("Schwarz tolerances and iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// What lies below the lowest subdomain.
pub enum Below<'a> {
    Field(&'a dyn ExteriorField),
    Stack(&'a ReflectionCache),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// ‖u_j^{n+1} − u_j^n‖ / ‖u_j^{n+1}‖ per subdomain.
    pub updates: Vec<f64>,
    /// Relative Dirichlet and weak-Neumann jumps per FEM–FEM interface.
    pub dirichlet_jumps: Vec<f64>,
    pub neumann_jumps: Vec<f64>,
    pub inner_iterations: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceHistory {
    pub fn last_update(&self) -> Option<f64> {
        self.records.last().map(|r| r.updates.iter().fold(0.0f64, |m, &x| m.max(x)))
    }

    /// Wall times stay out of the CSV so that repeated runs compare equal.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["iteration", "subdomain", "update", "dirichlet_jump", "neumann_jump", "inner_iterations"])?;
        for r in &self.records {
            for (j, u) in r.updates.iter().enumerate() {
                let jump = |v: &[f64]| v.get(j).map(|x| format!("{x:.6e}")).unwrap_or_default();
                wr.write_record([
                    r.iteration.to_string(),
                    j.to_string(),
                    format!("{u:.6e}"),
                    jump(&r.dirichlet_jumps),
                    jump(&r.neumann_jumps),
                    r.inner_iterations.to_string(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

pub const STATE_VERSION: u32 = 1;

/// Restartable iteration state: fields and the exchanged data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzState {
    pub version: u32,
    pub iteration: usize,
    pub fields: Vec<Vec<C64>>,
    /// Data entering subdomain j through its top boundary (None for j = 0).
    pub from_above: Vec<Option<BoundaryData>>,
    /// Data entering subdomain j through its bottom boundary (None for the last).
    pub from_below: Vec<Option<BoundaryData>>,
    /// Up-going amplitudes reflected by the stack, if coupled.
    pub stack_up: Option<ModeAmplitudes>,
}

impl SchwarzState {
    fn initial(subs: &[Arc<FemProblem>]) -> Self {
        let n = subs.len();
        Self {
            version: STATE_VERSION,
            iteration: 0,
            fields: subs.iter().map(|p| vec![C64::new(0.0, 0.0); p.n_dofs()]).collect(),
            from_above: (0..n).map(|j| (j > 0).then(|| BoundaryData::zero(&subs[j].space, Side::Top))).collect(),
            from_below: (0..n).map(|j| (j + 1 < n).then(|| BoundaryData::zero(&subs[j].space, Side::Bottom))).collect(),
            stack_up: None,
        }
    }

    fn check(&self, subs: &[Arc<FemProblem>]) -> Result<()> {
        if self.version != STATE_VERSION {
            return Err(Error::Config(format!("checkpoint version {} (expected {STATE_VERSION})", self.version)));
        }
        if self.fields.len() != subs.len() || self.fields.iter().zip(subs).any(|(f, p)| f.len() != p.n_dofs()) {
            return Err(Error::Config("checkpoint does not match the subdomain setup".into()));
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

#[derive(Debug)]
pub struct DdOutcome {
    pub solutions: Vec<FemSolution>,
    pub history: ConvergenceHistory,
    pub converged: bool,
    pub state: SchwarzState,
    pub stack: Option<StackCoupling>,
}

/// Reject subdomains whose two coupling lines touch a common triangle.
fn check_separation(p: &FemProblem) -> Result<()> {
    let mesh = &p.space.mesh;
    let tol = mesh.tol();
    let (top, bottom) = (mesh.coupling_line(Side::Top), mesh.coupling_line(Side::Bottom));
    for tri in &mesh.triangles {
        let on = |y: f64| tri.v.iter().any(|&v| (mesh.vertices[v][1] - y).abs() <= tol);
        if on(top) && on(bottom) {
            return Err(Error::Mesh("fewer than two element layers between the coupling boundaries".into()));
        }
    }
    Ok(())
}

fn check_setup(subs: &[Arc<FemProblem>]) -> Result<()> {
    if subs.is_empty() {
        return Err(Error::Invalid("no subdomains".into()));
    }
    for p in subs {
        check_separation(p)?;
        let mesh = &p.space.mesh;
        if mesh.pml_top.is_none() || mesh.pml_bottom.is_none() {
            return Err(Error::Invalid("every subdomain needs PML strips on both sides".into()));
        }
    }
    for w in subs.windows(2) {
        let (a, b) = (&w[0].space, &w[1].space);
        let tol = a.mesh.tol().max(b.mesh.tol());
        if (a.mesh.coupling_line(Side::Bottom) - b.mesh.coupling_line(Side::Top)).abs() > tol
            || a.gamma_dofs(Side::Bottom).len() != b.gamma_dofs(Side::Top).len()
        {
            return Err(Error::Invalid("neighbouring subdomains do not share a matching interface".into()));
        }
    }
    Ok(())
}

fn rel_update(new: &[C64], old: &[C64]) -> f64 {
    let d: Vec<C64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
    let n = norm2(new);
    if n == 0.0 {
        norm2(&d)
    } else {
        norm2(&d) / n
    }
}

fn add(mut a: Vec<C64>, b: &[C64]) -> Vec<C64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// Interface residuals between j and j+1: Dirichlet jump and weak-Neumann sum.
fn interface_jumps(subs: &[Arc<FemProblem>], fields: &[Vec<C64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut dj = vec![];
    let mut nj = vec![];
    for j in 0..subs.len().saturating_sub(1) {
        let (a, b) = (&subs[j], &subs[j + 1]);
        let ga = a.space.gamma_dofs(Side::Bottom);
        let gb = b.space.gamma_dofs(Side::Top);
        let ua: Vec<C64> = ga.iter().map(|&d| fields[j][d]).collect();
        let ub: Vec<C64> = gb.iter().map(|&d| fields[j + 1][d]).collect();
        let diff: Vec<C64> = ua.iter().zip(&ub).map(|(x, y)| x - y).collect();
        dj.push(norm2(&diff) / norm2(&ua).max(norm2(&ub)).max(f64::MIN_POSITIVE));
        let fa = a.a_int.mul_vec(&fields[j])?;
        let fb = b.a_int.mul_vec(&fields[j + 1])?;
        let na: Vec<C64> = ga.iter().map(|&d| fa[d]).collect();
        let nb: Vec<C64> = gb.iter().map(|&d| fb[d]).collect();
        let sum: Vec<C64> = na.iter().zip(&nb).map(|(x, y)| x + y).collect();
        let nscale = norm2(&na).max(norm2(&nb)).max(f64::MIN_POSITIVE);
        nj.push(norm2(&sum) / nscale);
    }
    Ok((dj, nj))
}

/// Inner FEM/stack loop on one subdomain with fixed top data; returns the field
/// and the number of inner iterations.
fn stack_loop(
    p: &FemProblem,
    rhs_top: &[C64],
    coupling: &mut StackCoupling,
    cache: &ReflectionCache,
    start: &[C64],
    damping: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<C64>, usize, f64)> {
    let mut u = start.to_vec();
    let mut last = f64::INFINITY;
    for it in 1..=max_iters {
        let rhs = add(coupling.data(p)?.rhs(p)?, rhs_top);
        let new = p.solve(&rhs)?;
        last = rel_update(&new, &u);
        u = new;
        let trace = bottom_trace(p, &u)?;
        let reflected = couple_stack(&trace, &coupling.up, cache, coupling.range)?;
        coupling.relax(&reflected, damping);
        if last <= tol {
            return Ok((u, it, last));
        }
    }
    Ok((u, max_iters, last))
}

/// Multiplicative Schwarz sweep over subdomains ordered top to bottom. `top` is
/// the exterior field above the first subdomain, `below` what lies under the last.
pub fn schwarz_solve(
    subs: &[Arc<FemProblem>],
    top: &dyn ExteriorField,
    below: Below<'_>,
    cfg: &SchwarzConfig,
    restart: Option<SchwarzState>,
) -> Result<DdOutcome> {
    cfg.validate()?;
    check_setup(subs)?;
    let n = subs.len();
    let mut state = match restart {
        Some(s) => {
            s.check(subs)?;
            s
        }
        None => SchwarzState::initial(subs),
    };
    let outer_top = BoundaryData::from_field(&subs[0].space, Side::Top, top)?.rhs(&subs[0])?;
    let (outer_bottom, mut coupling) = match &below {
        Below::Field(f) => (Some(BoundaryData::from_field(&subs[n - 1].space, Side::Bottom, *f)?.rhs(&subs[n - 1])?), None),
        Below::Stack(cache) => {
            let mut c = StackCoupling::new(&subs[n - 1], cache, cfg.mode_factor)?;
            if let Some(up) = &state.stack_up {
                c.up = up.clone();
            }
            (None, Some(c))
        }
    };
    let mut history = ConvergenceHistory::default();
    let single = n == 1 && coupling.is_none();
    let mut converged = false;
    while state.iteration < cfg.max_iters {
        let t0 = Instant::now();
        state.iteration += 1;
        let mut updates = vec![0.0; n];
        let mut inner_total = 0;
        for j in 0..n {
            let p = &subs[j];
            let rhs_top = match &state.from_above[j] {
                None => outer_top.clone(),
                Some(d) => d.rhs(p)?,
            };
            let u = if j + 1 < n {
                let d = state.from_below[j].as_ref().expect("inner subdomains have lower data");
                p.solve(&add(rhs_top, &d.rhs(p)?))?
            } else if let (Some(c), Below::Stack(cache)) = (coupling.as_mut(), &below) {
                let (u, inner, _) = stack_loop(p, &rhs_top, c, cache, &state.fields[j], cfg.damping, cfg.inner_tol, cfg.inner_max_iters)?;
                inner_total += inner;
                u
            } else {
                p.solve(&add(rhs_top, outer_bottom.as_ref().expect("field below")))?
            };
            updates[j] = rel_update(&u, &state.fields[j]);
            state.fields[j] = u;
            if j + 1 < n {
                let new = BoundaryData::from_neighbour(p, &state.fields[j], Side::Bottom)?;
                let old = state.from_above[j + 1].take().expect("lower neighbour data");
                state.from_above[j + 1] = Some(old.relax(&new, cfg.damping)?);
            }
            if j > 0 {
                let new = BoundaryData::from_neighbour(p, &state.fields[j], Side::Top)?;
                let old = state.from_below[j - 1].take().expect("upper neighbour data");
                state.from_below[j - 1] = Some(old.relax(&new, cfg.damping)?);
            }
        }
        let (dirichlet_jumps, neumann_jumps) = interface_jumps(subs, &state.fields)?;
        let rec = IterationRecord {
            iteration: state.iteration,
            updates,
            dirichlet_jumps,
            neumann_jumps,
            inner_iterations: inner_total,
            seconds: t0.elapsed().as_secs_f64(),
        };
        log::info!("schwarz iteration {}: max update {:.3e}", rec.iteration, rec.updates.iter().fold(0.0f64, |m, &x| m.max(x)));
        history.records.push(rec);
        if single || history.last_update().unwrap_or(f64::INFINITY) <= cfg.tol {
            converged = true;
            break;
        }
    }
    state.stack_up = coupling.as_ref().map(|c| c.up.clone());
    let solutions = subs.iter().zip(&state.fields).map(|(p, u)| FemSolution::new(p.clone(), u.clone())).collect();
    Ok(DdOutcome { solutions, history, converged, state, stack: coupling })
}

/// One FEM domain above a layer stack, iterated with the stack until the update
/// drops below `cfg.tol`; every FEM solve counts as one iteration.
pub fn ddeuv_solve(problem: Arc<FemProblem>, cache: &ReflectionCache, top: &dyn ExteriorField, cfg: &SchwarzConfig) -> Result<DdOutcome> {
    cfg.validate()?;
    check_setup(std::slice::from_ref(&problem))?;
    let rhs_top = BoundaryData::from_field(&problem.space, Side::Top, top)?.rhs(&problem)?;
    let mut coupling = StackCoupling::new(&problem, cache, cfg.mode_factor)?;
    let mut state = SchwarzState::initial(std::slice::from_ref(&problem));
    let mut history = ConvergenceHistory::default();
    let mut converged = false;
    while state.iteration < cfg.max_iters {
        let t0 = Instant::now();
        state.iteration += 1;
        let (u, _, upd) = stack_loop(&problem, &rhs_top, &mut coupling, cache, &state.fields[0], cfg.damping, 0.0, 1)?;
        state.fields[0] = u;
        history.records.push(IterationRecord {
            iteration: state.iteration,
            updates: vec![upd],
            dirichlet_jumps: vec![],
            neumann_jumps: vec![],
            inner_iterations: 0,
            seconds: t0.elapsed().as_secs_f64(),
        });
        log::info!("dd-euv iteration {}: update {upd:.3e}", state.iteration);
        if upd <= cfg.tol {
            converged = true;
            break;
        }
    }
    state.stack_up = Some(coupling.up.clone());
    let solutions = vec![FemSolution::new(problem, state.fields[0].clone())];
    Ok(DdOutcome { solutions, history, converged, state, stack: Some(coupling) })
}
