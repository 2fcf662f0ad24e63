//! Conical plane wave in vacuum on four uniformly refined meshes: distance to
//! the interpolant, L² error and the scattered field left in the PML.

use std::sync::Arc;

use conical_dd::fem::adaptive::{solve_with_grid, Phase};
use conical_dd::fem::boundary::NoField;
use conical_dd::fem::{field::interpolate, FemSolution};
use conical_dd::geometry::{Material, Mesh, PeriodicGeometry};
use conical_dd::modes::IncidentWave;
use conical_dd::pml::{generate_grid, PmlConfig};
use conical_dd::C64;

fn main() -> conical_dd::Result<()> {
    let vac = Material::vacuum();
    let inc = IncidentWave::from_angles(1.0, 35.0, 40.0, false, vac, C64::new(1.0, 0.0), C64::new(0.3, 0.5))?;
    let geom = PeriodicGeometry::layered(1.0, 0.0, &[(1.0, vac)], vac, vac);
    let mut mesh = Mesh::build(&geom, 4, 1.0)?;
    let grid = generate_grid(&PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1));
    let phase = Phase { k1: inc.k[0], k3: inc.k[2], omega: inc.omega };
    let mut prev: Option<(f64, f64)> = None;
    for level in 0..4 {
        let s = solve_with_grid(&mesh, &grid, phase, &inc, &inc)?;
        let sol = &s.solution;
        let pi = interpolate(&sol.problem.space, &inc);
        let diff: Vec<C64> = sol.u.iter().zip(&pi).map(|(a, b)| a - b).collect();
        let d = FemSolution::new(Arc::clone(&sol.problem), diff).l2_error(&NoField);
        let disc = d.e12.hypot(d.e3);
        let l2 = sol.l2_error(&inc).relative();
        let pml = sol.pml_norm(&s.top).max(sol.pml_norm(&s.bottom));
        print!("level {level}: dofs {:6}  |u_h - I u| {disc:.3e}  rel L2 {l2:.3e}  PML {pml:.3e}", sol.problem.n_dofs());
        if let Some((pd, pl)) = prev {
            print!("  ratios {:.2} {:.2}", pd / disc, pl / l2);
        }
        println!();
        prev = Some((disc, l2));
        mesh = mesh.refine_uniform();
    }
    Ok(())
}
