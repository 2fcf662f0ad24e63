//! Semi-analytic coupling of a FEM subdomain to the layer stack below it.

use crate::error::{Error, Result};
use crate::fem::boundary::{trace_from_dofs, BoundaryData};
use crate::fem::FemProblem;
use crate::geometry::Side;
use crate::modes::{fourier_coefficients, mode_range_with, BoundaryTrace, FourierMode, ModalField, ModeAmplitudes, ModeRange};
use crate::multilayer::ReflectionCache;

/// Up-going field reflected by the stack into the FEM subdomain, referenced at
/// the subdomain's bottom coupling line.
#[derive(Debug, Clone)]
pub struct StackCoupling {
    pub range: ModeRange,
    pub modes: Vec<FourierMode>,
    pub up: ModeAmplitudes,
    pub x2_ref: f64,
}

impl StackCoupling {
    /// Orders |k1n| < factor·2π/h_max of the bottom coupling line, zero field.
    pub fn new(problem: &FemProblem, cache: &ReflectionCache, factor: f64) -> Result<Self> {
        let mesh = &problem.space.mesh;
        let x2_ref = mesh.coupling_line(Side::Bottom);
        if (cache.reference - x2_ref).abs() > mesh.tol() {
            return Err(Error::Invalid(format!(
                "stack reference plane {} differs from the coupling line {x2_ref}",
                cache.reference
            )));
        }
        if (cache.k1 - problem.space.k1).abs() > 1e-12 * cache.k1.abs().max(1.0) || (cache.k3 - problem.k3).abs() > 1e-12 * cache.k3.abs().max(1.0) {
            return Err(Error::Invalid("stack and FEM subdomain use different incidence".into()));
        }
        let range = mode_range_with(mesh.h_max_boundary, cache.k1, cache.period, factor);
        let modes: Vec<FourierMode> = range.iter().map(|n| cache.mode(n)).collect();
        let mut up = ModeAmplitudes::default();
        for n in range.iter() {
            up.set_up(n, crate::modes::zero3());
        }
        Ok(Self { range, modes, up, x2_ref })
    }

    pub fn field(&self) -> ModalField {
        ModalField {
            modes: self.modes.clone(),
            amplitudes: self.modes.iter().map(|m| self.up.up(m.n)).collect(),
            x2_ref: self.x2_ref,
            dir: 1.0,
        }
    }

    /// Exterior data of the current reflected field for the FEM subdomain.
    pub fn data(&self, problem: &FemProblem) -> Result<BoundaryData> {
        BoundaryData::from_field(&problem.space, Side::Bottom, &self.field())
    }

    /// (1 − d)·current + d·new amplitudes.
    pub fn relax(&mut self, new: &ModeAmplitudes, d: f64) {
        for n in self.range.iter() {
            let (a, b) = (self.up.up(n), new.up(n));
            self.up.set_up(n, [0, 1, 2].map(|i| (1.0 - d) * a[i] + d * b[i]));
        }
    }
}

/// Reflected up-going amplitudes for a total trace on the coupling line: the
/// known up-going part `up` is removed, the remaining down-going content is
/// reflected order by order and completed by the divergence condition.
pub fn couple_stack(trace: &BoundaryTrace, up: &ModeAmplitudes, cache: &ReflectionCache, range: ModeRange) -> Result<ModeAmplitudes> {
    let coeffs = fourier_coefficients(trace, range);
    let mut out = ModeAmplitudes::default();
    for n in range.iter() {
        let total = coeffs.up(n);
        let known = up.up(n);
        let (d1, d3) = (total[0] - known[0], total[2] - known[2]);
        let op = cache.get(n)?;
        let (r1, r3) = op.apply(d1, d3);
        out.set_up(n, cache.mode(n).complete(r1, r3, 1.0));
    }
    Ok(out)
}

/// Trace of a FEM solution on its bottom coupling line.
pub fn bottom_trace(problem: &FemProblem, u: &[crate::C64]) -> Result<BoundaryTrace> {
    let vals = crate::fem::boundary::gamma_values(&problem.space, Side::Bottom, u);
    trace_from_dofs(&problem.space, Side::Bottom, &vals)
}
