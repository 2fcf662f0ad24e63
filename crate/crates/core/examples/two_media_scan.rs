//! Glass/air interface illuminated from the glass side: energy error against
//! the analytic solution and adaptive PML thickness across the critical angle.

use conical_dd::fem::adaptive::{solve_adaptive, Phase};
use conical_dd::fem::boundary::NoField;
use conical_dd::geometry::Mesh;
use conical_dd::multilayer::solve_stack_upward;
use conical_dd::pml::PmlConfig;
use conical_dd::postproc::energy_against;
use conical_dd::scenarios::{critical_angle, two_media};

fn main() -> conical_dd::Result<()> {
    let levels: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let tc = critical_angle();
    println!("critical angle {tc:.4}");
    for theta in [20.0, 30.0, 40.0, tc - 0.5, tc, tc + 0.5, 45.0, 50.0, 60.0] {
        let tm = two_media(theta, 45.0)?;
        let inc = &tm.incident;
        let exact = solve_stack_upward(&tm.stack, inc.k[0], inc.k[2], inc.omega, inc.amplitude)?;
        let phase = Phase { k1: inc.k[0], k3: inc.k[2], omega: inc.omega };
        let mut mesh = Mesh::build(&tm.geometry, 4, tm.wavelength)?;
        print!("theta {theta:8.4}");
        for _ in 0..levels {
            let cfg = PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1);
            let out = solve_adaptive(&mesh, &cfg, phase, &NoField, inc)?;
            let e = energy_against(&out.field.solution, &exact);
            print!(
                "  | dE {:.3e} L2 {:.3e} PML {:4} rows {:.2e} thick",
                e.delta_e.unwrap_or(f64::NAN),
                e.error_energy.unwrap_or(f64::NAN).sqrt(),
                out.grid.rows(),
                out.grid.thickness()
            );
            mesh = mesh.refine_uniform();
        }
        println!();
    }
    Ok(())
}
