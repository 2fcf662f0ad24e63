//! Adaptive PML grids: node count and thickness as κ_min shrinks.

use conical_dd::pml::{generate_grid, PmlConfig};

fn main() {
    let k0 = 2.0 * std::f64::consts::PI;
    let base = PmlConfig::defaults(k0, 0.1, 1);
    println!("{:>10} {:>6} {:>14} {:>12}", "kappa_min", "rows", "thickness", "xi*kappa*s/-ln e");
    for e in 0..=6 {
        let kappa = k0 * 10f64.powi(-e);
        let g = generate_grid(&PmlConfig { kappa_min: kappa, ..base });
        let scaled = g.thickness() * kappa * base.sigma / -base.epsilon.ln();
        println!("{kappa:10.3e} {:6} {:14.6e} {scaled:12.4}", g.rows(), g.thickness());
    }
    let g = generate_grid(&PmlConfig { kappa_min: 1.0, ..base });
    println!("nodes for kappa_min = 1: {:?}", g.xi.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>());
}
