//! Single-domain solves with PML strips on both sides: fixed grid or the
//! adaptive κ_min loop.

use std::sync::Arc;

use super::boundary::{BoundaryData, ExteriorField};
use super::field::FemSolution;
use super::problem::FemProblem;
use super::space::FeSpace;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Side};
use crate::pml::{adapt, AdaptOutcome, PmlConfig, PmlGrid, PmlTrial};
use crate::C64;

/// Wave numbers of the excitation shared by all subdomains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub k1: f64,
    pub k3: f64,
    pub omega: f64,
}

#[derive(Debug)]
pub struct PmlSolve {
    pub solution: FemSolution,
    pub top: BoundaryData,
    pub bottom: BoundaryData,
}

impl PmlSolve {
    pub fn data(&self, side: Side) -> &BoundaryData {
        match side {
            Side::Top => &self.top,
            Side::Bottom => &self.bottom,
        }
    }

    /// (‖u − u_ext‖ on the terminal PML line, same on the coupling line).
    pub fn tail(&self, side: Side) -> (f64, f64) {
        let d = self.data(side);
        let n = self.solution.problem.space.mesh.pml(side).map_or(0, |x| x.len() - 1);
        (self.solution.pml_line_norm(d, n), self.solution.pml_line_norm(d, 0))
    }
}

/// Attach the same ξ grid on both sides of an interior mesh.
pub fn attach_pml(interior: &Mesh, xi: &[f64]) -> Result<Mesh> {
    if interior.pml_top.is_some() || interior.pml_bottom.is_some() {
        return Err(Error::Mesh("interior mesh already carries PML strips".into()));
    }
    interior.extrude_pml(Side::Top, xi)?.extrude_pml(Side::Bottom, xi)
}

/// Assemble the problem on a mesh that already carries PML strips.
pub fn assemble(mesh: Mesh, phase: Phase, gamma: C64) -> Result<Arc<FemProblem>> {
    if gamma.norm() == 0.0 {
        return Err(Error::Invalid("PML stretching factor is zero".into()));
    }
    let space = Arc::new(FeSpace::new(Arc::new(mesh), 1, phase.k1)?);
    Ok(Arc::new(FemProblem::assemble(space, phase.omega, phase.k3, gamma)?))
}

/// Solve an assembled problem with exterior fields above and below.
pub fn solve_problem(problem: Arc<FemProblem>, top: &dyn ExteriorField, bottom: &dyn ExteriorField) -> Result<PmlSolve> {
    let space = &problem.space;
    let dt = BoundaryData::from_field(space, Side::Top, top)?;
    let db = BoundaryData::from_field(space, Side::Bottom, bottom)?;
    let mut rhs = dt.rhs(&problem)?;
    for (r, v) in rhs.iter_mut().zip(db.rhs(&problem)?) {
        *r += v;
    }
    let u = problem.solve(&rhs)?;
    Ok(PmlSolve { solution: FemSolution::new(problem, u), top: dt, bottom: db })
}

pub fn solve_with_grid(
    interior: &Mesh,
    grid: &PmlGrid,
    phase: Phase,
    top: &dyn ExteriorField,
    bottom: &dyn ExteriorField,
) -> Result<PmlSolve> {
    let p = assemble(attach_pml(interior, &grid.xi)?, phase, grid.gamma)?;
    solve_problem(p, top, bottom)
}

/// Adaptive PML: both strips use the current grid; the tail check takes the
/// worse of the two sides.
pub fn solve_adaptive(
    interior: &Mesh,
    cfg: &PmlConfig,
    phase: Phase,
    top: &dyn ExteriorField,
    bottom: &dyn ExteriorField,
) -> Result<AdaptOutcome<PmlSolve>> {
    adapt(cfg, |grid| {
        let s = solve_with_grid(interior, grid, phase, top, bottom)?;
        let (tt, nt) = s.tail(Side::Top);
        let (tb, nb) = s.tail(Side::Bottom);
        // compare ratios side by side; report them on a common scale
        let (tail_norm, total_norm) = if tt * nb >= tb * nt { (tt, nt) } else { (tb, nb) };
        Ok(PmlTrial { field: s, tail_norm, total_norm })
    })
}
