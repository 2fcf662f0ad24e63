//! Multiplicative Schwarz on the three-region test problem: D3 and D2 splits
//! against the monolithic solve, and D2 with the layers replaced by the
//! analytic stack.

use std::sync::Arc;

use conical_dd::fem::adaptive::{assemble, attach_pml, solve_adaptive, Phase};
use conical_dd::fem::boundary::NoField;
use conical_dd::fem::FemProblem;
use conical_dd::geometry::Mesh;
use conical_dd::multilayer::ReflectionCache;
use conical_dd::pml::{PmlConfig, PmlGrid};
use conical_dd::postproc::split_difference;
use conical_dd::scenarios::academic;
use conical_dd::schwarz::{schwarz_solve, Below, SchwarzConfig};

fn subdomains(pieces: &[conical_dd::geometry::SubMesh], grid: &PmlGrid, phase: Phase) -> conical_dd::Result<Vec<Arc<FemProblem>>> {
    pieces.iter().map(|p| assemble(attach_pml(&p.mesh, &grid.xi)?, phase, grid.gamma)).collect()
}

fn main() -> conical_dd::Result<()> {
    let ppw: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let ac = academic()?;
    let inc = &ac.incident;
    let phase = Phase { k1: inc.k[0], k3: inc.k[2], omega: inc.omega };
    let mesh = Mesh::build_with_lines(&ac.geometry, ppw, ac.wavelength, &ac.lines)?;
    let mono = solve_adaptive(&mesh, &PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1), phase, inc, &NoField)?;
    let grid = mono.grid.clone();
    let whole = &mono.field.solution;
    println!("monolithic: {} dofs, PML {} rows", whole.problem.n_dofs(), grid.rows());
    let cfg = SchwarzConfig { tol: 1e-12, max_iters: 60, ..Default::default() };

    for (name, lines) in [("D3", &ac.lines[..]), ("D2", &ac.lines[..1])] {
        let pieces = mesh.split(lines)?;
        let subs = subdomains(&pieces, &grid, phase)?;
        let out = schwarz_solve(&subs, inc, Below::Field(&NoField), &cfg, None)?;
        let parents: Vec<&[usize]> = pieces.iter().map(|p| p.parent_triangle.as_slice()).collect();
        println!(
            "{name}: {} iterations, converged {}, |E_dd - E_mono| / |E_mono| = {:.3e}",
            out.history.records.len(),
            out.converged,
            split_difference(&out.solutions, &parents, whole)?
        );
    }

    let pieces = mesh.split(&ac.lines)?;
    let upper = &pieces[..2];
    let subs = subdomains(upper, &grid, phase)?;
    let cache = ReflectionCache::new(ac.stack.clone(), inc.k[0], inc.k[2], inc.omega, ac.geometry.period, ac.lines[1]);
    let out = schwarz_solve(&subs, inc, Below::Stack(&cache), &SchwarzConfig { tol: 1e-10, ..cfg }, None)?;
    let parents: Vec<&[usize]> = upper.iter().map(|p| p.parent_triangle.as_slice()).collect();
    println!(
        "D2 with analytic stack: {} iterations, {} modes, plateau {:.3e}",
        out.history.records.len(),
        out.stack.as_ref().map_or(0, |s| s.range.len()),
        split_difference(&out.solutions, &parents, whole)?
    );
    Ok(())
}
