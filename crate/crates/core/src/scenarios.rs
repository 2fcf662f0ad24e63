//! Reference problem setups shared by the examples, the CLI presets and the
//! acceptance tests.

use crate::error::Result;
use crate::geometry::{Inclusion, Material, PeriodicGeometry};
use crate::modes::IncidentWave;
use crate::multilayer::LayerStack;
use crate::C64;

/// Three-region test problem: two inclusion blocks over a four-layer stack.
#[derive(Debug, Clone)]
pub struct Academic {
    /// Whole domain including the layers, x2 ∈ [−0.4, 1.2].
    pub geometry: PeriodicGeometry,
    /// Ω1 | Ω2 interface and Ω2 | Ω3 interface.
    pub lines: [f64; 2],
    /// Ω1 ∪ Ω2 only, for coupling with the analytic stack.
    pub upper_geometry: PeriodicGeometry,
    /// Layers below x2 = 0 with ε5 as the upper half-space.
    pub stack: LayerStack,
    pub incident: IncidentWave,
    pub wavelength: f64,
}

pub fn academic() -> Result<Academic> {
    let d = Material::dielectric;
    let air = Material::vacuum();
    let wavelength = 0.84;
    let layers = [(0.1, d(1.08)), (0.1, d(1.57)), (0.1, d(1.06)), (0.1, d(1.55)), (0.6, d(1.03)), (0.6, d(1.01))];
    let geometry = PeriodicGeometry::layered(1.0, -0.4, &layers, air, air)
        .with_inclusion(Inclusion { x1_lo: 0.2, x1_hi: 0.6, x2_lo: 0.8, x2_hi: 1.0, material: d(1.52) })
        .with_inclusion(Inclusion { x1_lo: 0.4, x1_hi: 0.8, x2_lo: 0.2, x2_hi: 0.4, material: d(1.54) });
    geometry.validate()?;
    let upper_geometry = PeriodicGeometry::layered(1.0, 0.0, &layers[4..], d(1.55), air)
        .with_inclusion(geometry.inclusions[0])
        .with_inclusion(geometry.inclusions[1]);
    upper_geometry.validate()?;
    let stack = LayerStack::from_top(-0.1, &[(0.1, d(1.06)), (0.1, d(1.57)), (0.1, d(1.08))], air, d(1.55))?;
    let omega = 2.0 * std::f64::consts::PI / wavelength;
    let dir = [1.0, -2.0, 1.0].map(|x: f64| x / 6f64.sqrt());
    let incident = IncidentWave::with_reference(dir.map(|x| x * omega), [1.0, 1.0, 1.0], omega, air)?;
    Ok(Academic { geometry, lines: [0.6, 0.0], upper_geometry, stack, incident, wavelength })
}

/// Glass half-space below x2 = 0, air above, on a 1.5 × 1 wavelength window;
/// the wave comes from the glass side.
#[derive(Debug, Clone)]
pub struct TwoMedia {
    pub geometry: PeriodicGeometry,
    pub stack: LayerStack,
    pub incident: IncidentWave,
    pub wavelength: f64,
}

pub const GLASS_INDEX: f64 = 1.5;

/// θ_c of the glass/air interface in degrees.
pub fn critical_angle() -> f64 {
    (1.0 / GLASS_INDEX).asin().to_degrees()
}

pub fn two_media(theta_deg: f64, phi_deg: f64) -> Result<TwoMedia> {
    let glass = Material::from_index(GLASS_INDEX);
    let air = Material::vacuum();
    let wavelength = 1.0;
    let geometry = PeriodicGeometry::layered(1.5, -0.5, &[(0.5, glass), (0.5, air)], glass, air);
    geometry.validate()?;
    let incident =
        IncidentWave::from_angles(wavelength, theta_deg, phi_deg, true, glass, C64::new(1.0, 0.0), C64::new(1.0, 0.0))?;
    Ok(TwoMedia { geometry, stack: LayerStack::interface(0.0, glass, air), incident, wavelength })
}

/// EUV line mask in nm: Si line and Cr absorber on a Mo/Si multilayer.
#[derive(Debug, Clone)]
pub struct EuvMask {
    /// Line, absorber and air above the multilayer (x2 ≥ 10).
    pub geometry: PeriodicGeometry,
    /// Same mask with the multilayer meshed as well.
    pub full_geometry: PeriodicGeometry,
    /// Cap Si as upper half-space, 10 Mo/Si pairs, Si substrate.
    pub stack: LayerStack,
    pub incident: IncidentWave,
    pub wavelength: f64,
}

pub fn euv_materials() -> Result<(Material, Material, Material)> {
    let one = C64::new(1.0, 0.0);
    Ok((
        Material::new(C64::new(1.69, 0.016), one)?,
        Material::new(C64::new(1.21, 0.002), one)?,
        Material::new(C64::new(1.43, 0.24), one)?,
    ))
}

pub fn euv_mask(theta_deg: f64, phi_deg: f64, pairs: usize) -> Result<EuvMask> {
    let (mo, si, cr) = euv_materials()?;
    let air = Material::vacuum();
    let wavelength = 14.0;
    let line = Inclusion { x1_lo: 10.0, x1_hi: 30.0, x2_lo: 10.0, x2_hi: 25.0, material: si };
    let absorber = Inclusion { x1_lo: 10.0, x1_hi: 30.0, x2_lo: 25.0, x2_hi: 40.0, material: cr };
    let geometry = PeriodicGeometry::layered(40.0, 10.0, &[(35.0, air)], si, air)
        .with_inclusion(line)
        .with_inclusion(absorber);
    geometry.validate()?;
    let mut layers = vec![];
    for _ in 0..pairs {
        layers.push((8.0, si));
        layers.push((6.0, mo));
    }
    layers.push((10.0, si));
    layers.push((35.0, air));
    let bottom = -14.0 * pairs as f64;
    let full_geometry = PeriodicGeometry::layered(40.0, bottom, &layers, si, air)
        .with_inclusion(line)
        .with_inclusion(absorber);
    full_geometry.validate()?;
    let mut top_down = vec![];
    for _ in 0..pairs {
        top_down.push((6.0, mo));
        top_down.push((8.0, si));
    }
    let stack = LayerStack::from_top(0.0, &top_down[..top_down.len() - 1], si, si)?;
    let incident = IncidentWave::from_angles(wavelength, theta_deg, phi_deg, false, air, C64::new(1.0, 0.0), C64::new(0.0, 0.0))?;
    Ok(EuvMask { geometry, full_geometry, stack, incident, wavelength })
}
