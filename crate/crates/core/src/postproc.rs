//! Observables: interior field energies, energy errors against a reference and
//! diffraction efficiencies per order.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::boundary::ExteriorField;
use crate::fem::FemSolution;
use crate::geometry::{Material, Side};
use crate::modes::{fourier_coefficients, BoundaryTrace, FourierMode, ModeAmplitudes, ModeClass, ModeRange};
use crate::multilayer::plane_wave_flux;
use crate::modes::IncidentWave;
use crate::C64;

/// ‖E‖² and ‖curl₃E‖² over the interior strip, with ΔE and ΔE′ when a
/// reference was supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub electric: f64,
    pub magnetic: f64,
    pub delta_e: Option<f64>,
    pub delta_e_prime: Option<f64>,
    /// ‖E_ex − E_h‖² / ‖E_ex‖²
    pub error_energy: Option<f64>,
}

/// |a − b| / a
pub fn relative_energy_error(exact: f64, approx: f64) -> f64 {
    (exact - approx).abs() / exact
}

pub fn field_energy(sol: &FemSolution) -> EnergyReport {
    let (mut e, mut m) = (0.0, 0.0);
    sol.for_each_point(|_, w, _, ev, cv| {
        e += w * ev.iter().map(|z| z.norm_sqr()).sum::<f64>();
        m += w * cv.iter().map(|z| z.norm_sqr()).sum::<f64>();
    });
    EnergyReport { electric: e, magnetic: m, delta_e: None, delta_e_prime: None, error_energy: None }
}

/// Energies of the discrete field together with ΔE, ΔE′ against `reference`
/// (same quadrature for both).
pub fn energy_against(sol: &FemSolution, reference: &dyn ExteriorField) -> EnergyReport {
    let (mut e, mut m, mut ex, mut mx, mut err) = (0.0, 0.0, 0.0, 0.0, 0.0);
    sol.for_each_point(|x, w, _, ev, cv| {
        let (rv, rc) = reference.eval(x[0], x[1]);
        e += w * ev.iter().map(|z| z.norm_sqr()).sum::<f64>();
        m += w * cv.iter().map(|z| z.norm_sqr()).sum::<f64>();
        ex += w * rv.iter().map(|z| z.norm_sqr()).sum::<f64>();
        mx += w * rc.iter().map(|z| z.norm_sqr()).sum::<f64>();
        err += w * (0..3).map(|i| (ev[i] - rv[i]).norm_sqr()).sum::<f64>();
    });
    EnergyReport {
        electric: e,
        magnetic: m,
        delta_e: Some(relative_energy_error(ex, e)),
        delta_e_prime: Some(relative_energy_error(mx, m)),
        error_energy: Some(err / ex),
    }
}

/// Up-going (top) or down-going (bottom) amplitudes of u − `subtract` on the
/// coupling line of `side`, from a sampled trace of the discrete field.
pub fn outgoing_amplitudes(
    sol: &FemSolution,
    side: Side,
    subtract: &dyn ExteriorField,
    ambient: Material,
    range: ModeRange,
) -> Result<(ModeAmplitudes, Vec<FourierMode>)> {
    let space = &sol.problem.space;
    let mesh = &space.mesh;
    let y = mesh.coupling_line(side);
    let n = 8 * mesh.line_edges(y).len();
    let missing = std::cell::Cell::new(false);
    let trace = BoundaryTrace::sample(mesh.period, space.k1, n, |x| {
        let (e, _) = sol.eval(x, y).unwrap_or_else(|| {
            missing.set(true);
            (crate::modes::zero3(), crate::modes::zero3())
        });
        let (s, _) = subtract.eval(x, y);
        [0, 1, 2].map(|i| e[i] - s[i])
    });
    if missing.get() {
        return Err(Error::Invalid("trace line outside the interior mesh".into()));
    }
    let coeffs = fourier_coefficients(&trace, range);
    let k0 = ambient.wavenumber(sol.problem.omega);
    let dir = side.sign();
    let modes: Vec<FourierMode> = range.iter().map(|m| FourierMode::new(m, space.k1, sol.problem.k3, k0, mesh.period)).collect();
    let mut out = ModeAmplitudes::default();
    for m in &modes {
        let c = coeffs.up(m.n);
        out.set_up(m.n, m.complete(c[0], c[2], dir));
    }
    Ok((out, modes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub n: i64,
    pub k1n: f64,
    pub reflectance: f64,
    pub transmittance: Option<f64>,
    pub anomalous: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EfficiencyTable {
    pub rows: Vec<EfficiencyRow>,
    pub total_reflectance: f64,
    pub total_transmittance: f64,
    pub absorbed: f64,
}

pub const EFFICIENCY_HEADER: &str = "# efficiencies v1: R_n, T_n normalised by the x2 Poynting flux of the incident wave";

fn order_power(m: &FourierMode, e: [C64; 3], dir: f64, omega: f64, mu: C64) -> f64 {
    plane_wave_flux(m.wavevector(dir), e, omega, mu).abs()
}

/// Efficiencies of propagating orders; evanescent orders are skipped and
/// anomalous ones listed with zero efficiency.
pub fn efficiencies(
    incident: &IncidentWave,
    reflected: (&ModeAmplitudes, &[FourierMode], Material),
    transmitted: Option<(&ModeAmplitudes, &[FourierMode], Material)>,
) -> Result<EfficiencyTable> {
    let kinc = incident.k.map(|x| C64::new(x, 0.0));
    let p_inc = plane_wave_flux(kinc, incident.amplitude, incident.omega, incident.medium.mu).abs();
    if p_inc == 0.0 {
        return Err(Error::Invalid("incident wave carries no flux along x2".into()));
    }
    // reflection travels against the incident direction
    let rdir = if incident.k[1] < 0.0 { 1.0 } else { -1.0 };
    let mut table = EfficiencyTable::default();
    let (ramps, rmodes, rmat) = reflected;
    for m in rmodes {
        if m.class == ModeClass::Evanescent {
            continue;
        }
        let anomalous = m.class == ModeClass::Anomalous;
        let r = if anomalous { 0.0 } else { order_power(m, ramps.up(m.n), rdir, incident.omega, rmat.mu) / p_inc };
        let t = transmitted.and_then(|(tamps, tmodes, tmat)| {
            tmodes
                .iter()
                .find(|x| x.n == m.n && x.class == ModeClass::Propagating)
                .map(|x| order_power(x, tamps.up(x.n), -rdir, incident.omega, tmat.mu) / p_inc)
        });
        table.rows.push(EfficiencyRow { n: m.n, k1n: m.k1n, reflectance: r, transmittance: t, anomalous });
    }
    if let Some((tamps, tmodes, tmat)) = transmitted {
        // transmitted orders that do not propagate on the reflection side
        for x in tmodes.iter().filter(|x| x.class == ModeClass::Propagating) {
            if !table.rows.iter().any(|r| r.n == x.n) {
                let t = order_power(x, tamps.up(x.n), -rdir, incident.omega, tmat.mu) / p_inc;
                table.rows.push(EfficiencyRow { n: x.n, k1n: x.k1n, reflectance: 0.0, transmittance: Some(t), anomalous: false });
            }
        }
        table.rows.sort_by_key(|r| r.n);
    }
    table.total_reflectance = table.rows.iter().map(|r| r.reflectance).sum::<f64>() + 0.0;
    table.total_transmittance = table.rows.iter().filter_map(|r| r.transmittance).sum::<f64>() + 0.0;
    table.absorbed = 1.0 - table.total_reflectance - table.total_transmittance;
    Ok(table)
}

impl EfficiencyTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{EFFICIENCY_HEADER}")?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "k1n", "reflectance", "transmittance", "anomalous"])?;
        for r in &self.rows {
            wr.write_record([
                r.n.to_string(),
                format!("{:.12e}", r.k1n),
                format!("{:.12e}", r.reflectance),
                r.transmittance.map(|t| format!("{t:.12e}")).unwrap_or_default(),
                r.anomalous.to_string(),
            ])?;
        }
        wr.write_record(["total", "", &format!("{:.12e}", self.total_reflectance), &format!("{:.12e}", self.total_transmittance), ""])?;
        wr.flush()?;
        Ok(())
    }
}

/// Relative L² distance between fields on pieces of a split mesh and a field
/// on the parent mesh; `parents[j]` maps triangles of piece j to the parent.
pub fn split_difference(pieces: &[FemSolution], parents: &[&[usize]], whole: &FemSolution) -> Result<f64> {
    if pieces.len() != parents.len() {
        return Err(Error::Dimension(format!("{} pieces, {} triangle maps", pieces.len(), parents.len())));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (s, par) in pieces.iter().zip(parents) {
        if par.len() != s.problem.space.mesh.triangles.len() {
            return Err(Error::Dimension("triangle map does not match the piece".into()));
        }
        for (t, &pt) in par.iter().enumerate() {
            for (a, b) in s.triangle_fields(t).iter().zip(&whole.triangle_fields(pt)) {
                num += a.1 * (0..3).map(|i| (a.2[i] - b.2[i]).norm_sqr()).sum::<f64>();
                den += b.1 * (0..3).map(|i| b.2[i].norm_sqr()).sum::<f64>();
            }
        }
    }
    Ok((num / den).sqrt())
}
