//! Diffraction orders of a grating period: classification, anomaly
//! detection and the Fourier expansion of a sampled boundary trace.

use conical_dd::modes::{detect_anomalous, fourier_coefficients, mode_range, BoundaryTrace, IncidentWave, ModeRange};
use conical_dd::geometry::Material;
use conical_dd::C64;

fn main() -> conical_dd::Result<()> {
    let a = 40.0;
    let inc = IncidentWave::from_angles(14.0, 6.0, 30.0, false, Material::vacuum(), C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
    let k0 = inc.k0();
    for m in ModeRange::new(-4, 3).modes(inc.k[0], inc.k[2], k0, a) {
        println!("n {:3}  k1n {:+.4}  k2n {:.4}  {:?}", m.n, m.k1n, m.k2n, m.class);
    }
    // wavelength where order -3 grazes: k1 - 3·2π/a = -k0 at normal incidence
    let lam = a / 3.0;
    let k = 2.0 * std::f64::consts::PI / lam;
    println!("near-anomalous orders at lambda = {lam:.4}: {:?}", detect_anomalous(0.0, 0.0, C64::new(k, 0.0), a, ModeRange::new(-4, 4), 1e-3));

    let range = mode_range(1.0, inc.k[0], a);
    let trace = BoundaryTrace::sample(a, inc.k[0], 400, |x| {
        let f = inc.field(x, 0.0);
        let w = C64::new(0.0, 2.0 * std::f64::consts::PI * 2.0 / a * x).exp() * 0.5;
        [f[0] + w * f[0], f[1], f[2]]
    });
    let c = fourier_coefficients(&trace, range);
    for n in [0, 1, 2, 3] {
        let e = c.up(n);
        println!("coefficient n = {n}: |e1| = {:.6}  |e3| = {:.6}", e[0].norm(), e[2].norm());
    }
    Ok(())
}
