//! Reflectance of a 40-pair Mo/Si multilayer versus angle, with the absorbed
//! fraction and the conditioning of the full stack system.

use conical_dd::modes::{FourierMode, IncidentWave};
use conical_dd::geometry::Material;
use conical_dd::multilayer::{condition_report, solve_stack, LayerStack};
use conical_dd::scenarios::euv_mask;
use conical_dd::C64;

fn main() -> conical_dd::Result<()> {
    let mask = euv_mask(6.0, 0.0, 40)?;
    // vacuum directly on top of the first Mo layer
    let s = &mask.stack;
    let stack = &LayerStack::new(s.interfaces.clone(), s.layers.clone(), s.below, Material::vacuum())?;
    println!("{} layers, top at {}", stack.m(), stack.top());
    for theta in [0.0, 3.0, 6.0, 9.0, 12.0, 15.0] {
        let inc = IncidentWave::from_angles(mask.wavelength, theta, 0.0, false, stack.above, C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
        let s = solve_stack(stack, inc.k[0], inc.k[2], inc.omega, [C64::new(0.0, 0.0); 3], inc.amplitude)?;
        let mode = FourierMode::new(0, inc.k[0], inc.k[2], stack.above.wavenumber(inc.omega), 40.0);
        let cond = condition_report(stack, &mode, inc.omega);
        println!(
            "theta {theta:5.1}  R = {:.5}  T = {:.3e}  absorbed = {:.5}  cond = {:.2e} (unscaled {:.2e})",
            s.reflectance(),
            s.transmittance(),
            1.0 - s.reflectance() - s.transmittance(),
            cond.normalized,
            cond.unnormalized
        );
    }
    Ok(())
}
