//! EUV line mask: FEM domain coupled to the analytic Mo/Si stack versus the
//! fully meshed mask at the same points per wavelength.

use conical_dd::fem::adaptive::{assemble, attach_pml, solve_adaptive, Phase};
use conical_dd::fem::boundary::NoField;
use conical_dd::geometry::{Material, Mesh, Side};
use conical_dd::modes::ModeRange;
use conical_dd::multilayer::ReflectionCache;
use conical_dd::pml::PmlConfig;
use conical_dd::postproc::{efficiencies, outgoing_amplitudes};
use conical_dd::scenarios::euv_mask;
use conical_dd::schwarz::{ddeuv_solve, SchwarzConfig};

fn main() -> conical_dd::Result<()> {
    let ppw: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let mask = euv_mask(6.0, 30.0, 10)?;
    let inc = &mask.incident;
    let phase = Phase { k1: inc.k[0], k3: inc.k[2], omega: inc.omega };
    let range = ModeRange::new(-4, 4);
    let air = Material::vacuum();

    let t = std::time::Instant::now();
    let mesh = Mesh::build(&mask.geometry, ppw, mask.wavelength)?;
    let pml = PmlConfig { sigma: 2.0, ..PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1) };
    let grid = solve_adaptive(&mesh, &pml, phase, inc, &NoField)?.grid;
    let problem = assemble(attach_pml(&mesh, &grid.xi)?, phase, grid.gamma)?;
    let cache = ReflectionCache::new(mask.stack.clone(), inc.k[0], inc.k[2], inc.omega, mask.geometry.period, mesh.x2_bottom);
    let out = ddeuv_solve(problem.clone(), &cache, inc, &SchwarzConfig::euv())?;
    let (amps, modes) = outgoing_amplitudes(&out.solutions[0], Side::Top, inc, air, range)?;
    let dd = efficiencies(inc, (&amps, &modes, air), None)?;
    println!(
        "stack coupling: {} dofs, {} iterations, converged {}, sum R = {:.5}, {:.2?}",
        problem.n_dofs(),
        out.history.records.len(),
        out.converged,
        dd.total_reflectance,
        t.elapsed()
    );
    for r in &dd.rows {
        println!("  order {:3}: R = {:.4e}", r.n, r.reflectance);
    }

    let t = std::time::Instant::now();
    let full = Mesh::build(&mask.full_geometry, ppw, mask.wavelength)?;
    let pml = PmlConfig { sigma: 2.0, ..PmlConfig::defaults(inc.omega, full.h_max_boundary, 1) };
    let f = solve_adaptive(&full, &pml, phase, inc, &NoField)?;
    let (amps, modes) = outgoing_amplitudes(&f.field.solution, Side::Top, inc, air, range)?;
    let fr = efficiencies(inc, (&amps, &modes, air), None)?;
    let n_full = f.field.solution.problem.n_dofs();
    println!("fully meshed: {n_full} dofs, sum R = {:.5}, {:.2?}", fr.total_reflectance, t.elapsed());
    println!("dof reduction {:.2}x", n_full as f64 / problem.n_dofs() as f64);
    Ok(())
}
