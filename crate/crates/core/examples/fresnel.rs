//! Plane wave on a single glass interface: Fresnel reflectance at normal
//! incidence and total reflection at the critical angle.

use conical_dd::geometry::Material;
use conical_dd::modes::IncidentWave;
use conical_dd::multilayer::{solve_stack, solve_stack_upward, LayerStack};
use conical_dd::scenarios::{critical_angle, GLASS_INDEX};
use conical_dd::C64;

fn main() -> conical_dd::Result<()> {
    let air = Material::vacuum();
    let glass = Material::from_index(GLASS_INDEX);
    let one = C64::new(1.0, 0.0);

    let inc = IncidentWave::from_angles(1.0, 0.0, 0.0, false, air, one, C64::new(0.0, 0.0))?;
    let down = LayerStack::interface(0.0, glass, air);
    let s = solve_stack(&down, inc.k[0], inc.k[2], inc.omega, [C64::new(0.0, 0.0); 3], inc.amplitude)?;
    println!("normal incidence air -> glass: R = {:.12}, T = {:.12}", s.reflectance(), s.transmittance());

    println!("from the glass side:");
    let up = LayerStack::interface(0.0, glass, air);
    for theta in [0.0, 20.0, 40.0, critical_angle(), 50.0] {
        let inc = IncidentWave::from_angles(1.0, theta, 45.0, true, glass, one, one)?;
        let m = solve_stack_upward(&up, inc.k[0], inc.k[2], inc.omega, inc.amplitude)?;
        println!("  theta {theta:8.4}  R = {:.12}  T = {:.12}", m.reflectance(), m.transmittance());
    }
    Ok(())
}
