//! Periodic layered geometry and structured meshing.

mod mesh;

pub use mesh::{Edge, EdgeTag, Mesh, Quad, Side, SubMesh, Triangle};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Isotropic material with relative permittivity and permeability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub eps: C64,
    pub mu: C64,
}

impl Material {
    pub fn new(eps: C64, mu: C64) -> Result<Self> {
        if eps.im < 0.0 || mu.im < 0.0 {
            return Err(Error::Invalid(format!("active material eps={eps}, mu={mu}")));
        }
        if eps.norm() == 0.0 || mu.norm() == 0.0 {
            return Err(Error::Invalid("material with zero eps or mu".into()));
        }
        Ok(Self { eps, mu })
    }

    pub fn dielectric(eps: f64) -> Self {
        Self { eps: C64::new(eps, 0.0), mu: C64::new(1.0, 0.0) }
    }

    pub fn lossy(eps: C64) -> Self {
        Self { eps, mu: C64::new(1.0, 0.0) }
    }

    /// Material with refractive index `n` (μ = 1).
    pub fn from_index(n: f64) -> Self {
        Self::dielectric(n * n)
    }

    pub fn vacuum() -> Self {
        Self::dielectric(1.0)
    }

    pub fn refractive_index(&self) -> C64 {
        (self.eps * self.mu).sqrt()
    }

    /// Wavelength in the medium; lossy media use the real part of the index.
    pub fn local_wavelength(&self, vacuum_wavelength: f64) -> f64 {
        vacuum_wavelength / self.refractive_index().re
    }

    /// k0 = ω·sqrt(εμ) for vacuum wavenumber ω.
    pub fn wavenumber(&self, omega: f64) -> C64 {
        omega * self.refractive_index()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub x2_lo: f64,
    pub x2_hi: f64,
    pub material: Material,
}

/// Axis-aligned rectangular inclusion; later inclusions win where they overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
    pub material: Material,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGeometry {
    pub period: f64,
    pub x2_minus: f64,
    pub x2_plus: f64,
    pub slabs: Vec<Slab>,
    pub inclusions: Vec<Inclusion>,
    pub ambient_above: Material,
    pub ambient_below: Material,
}

impl PeriodicGeometry {
    /// Stack of slabs given bottom-up as (thickness, material) starting at `x2_minus`.
    pub fn layered(
        period: f64,
        x2_minus: f64,
        layers: &[(f64, Material)],
        ambient_below: Material,
        ambient_above: Material,
    ) -> Self {
        let mut slabs = Vec::with_capacity(layers.len());
        let mut y = x2_minus;
        for &(t, m) in layers {
            slabs.push(Slab { x2_lo: y, x2_hi: y + t, material: m });
            y += t;
        }
        Self {
            period,
            x2_minus,
            x2_plus: y,
            slabs,
            inclusions: vec![],
            ambient_above,
            ambient_below,
        }
    }

    pub fn with_inclusion(mut self, inc: Inclusion) -> Self {
        self.inclusions.push(inc);
        self
    }

    fn tol(&self) -> f64 {
        1e-12 * self.period.max(self.x2_plus - self.x2_minus)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = self.tol();
        if !(self.period > 0.0) {
            return Err(Error::Geometry(format!("period {} must be positive", self.period)));
        }
        if !(self.x2_minus < self.x2_plus) {
            return Err(Error::Geometry("x2_minus must be below x2_plus".into()));
        }
        for m in self.materials() {
            Material::new(m.eps, m.mu).map_err(|e| Error::Geometry(e.to_string()))?;
        }
        let mut slabs = self.slabs.clone();
        slabs.sort_by(|a, b| a.x2_lo.total_cmp(&b.x2_lo));
        if slabs.is_empty() {
            return Err(Error::Geometry("no background slabs".into()));
        }
        let mut y = self.x2_minus;
        for s in &slabs {
            if !(s.x2_hi > s.x2_lo + tol) {
                return Err(Error::Geometry(format!("degenerate slab [{}, {}]", s.x2_lo, s.x2_hi)));
            }
            if (s.x2_lo - y).abs() > tol {
                return Err(Error::Geometry(format!("slabs leave a gap or overlap at x2 = {y}")));
            }
            y = s.x2_hi;
        }
        if (y - self.x2_plus).abs() > tol {
            return Err(Error::Geometry("slabs do not reach x2_plus".into()));
        }
        for inc in &self.inclusions {
            if !(inc.x1_hi > inc.x1_lo + tol && inc.x2_hi > inc.x2_lo + tol) {
                return Err(Error::Geometry("degenerate inclusion rectangle".into()));
            }
            if inc.x1_lo < -tol || inc.x1_hi > self.period + tol {
                return Err(Error::Geometry(
                    "inclusion crosses the period boundary; shift the unit cell".into(),
                ));
            }
            if inc.x2_lo < self.x2_minus - tol || inc.x2_hi > self.x2_plus + tol {
                return Err(Error::Geometry("inclusion outside [x2_minus, x2_plus]".into()));
            }
        }
        Ok(())
    }

    fn materials(&self) -> impl Iterator<Item = &Material> {
        self.slabs
            .iter()
            .map(|s| &s.material)
            .chain(self.inclusions.iter().map(|i| &i.material))
            .chain([&self.ambient_above, &self.ambient_below])
    }

    /// Material at a point; outside the slab range the ambient media apply.
    pub fn material_at(&self, x1: f64, x2: f64) -> Material {
        if x2 > self.x2_plus {
            return self.ambient_above;
        }
        if x2 < self.x2_minus {
            return self.ambient_below;
        }
        if let Some(inc) = self
            .inclusions
            .iter()
            .rev()
            .find(|i| x1 >= i.x1_lo && x1 <= i.x1_hi && x2 >= i.x2_lo && x2 <= i.x2_hi)
        {
            return inc.material;
        }
        self.slabs
            .iter()
            .find(|s| x2 >= s.x2_lo && x2 <= s.x2_hi)
            .map(|s| s.material)
            .unwrap_or(self.ambient_above)
    }

    /// ∫ eps over the unit cell, evaluated on the rectangle arrangement.
    pub fn integrate_eps(&self) -> C64 {
        let (xs, ys) = self.breakpoints(&[]);
        let mut s = C64::new(0.0, 0.0);
        for w in xs.windows(2) {
            for v in ys.windows(2) {
                let m = self.material_at(0.5 * (w[0] + w[1]), 0.5 * (v[0] + v[1]));
                s += m.eps * (w[1] - w[0]) * (v[1] - v[0]);
            }
        }
        s
    }

    pub(crate) fn breakpoints(&self, extra_x2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let tol = self.tol();
        let mut xs = vec![0.0, self.period];
        let mut ys = vec![self.x2_minus, self.x2_plus];
        for s in &self.slabs {
            ys.extend([s.x2_lo, s.x2_hi]);
        }
        for i in &self.inclusions {
            xs.extend([i.x1_lo.max(0.0), i.x1_hi.min(self.period)]);
            ys.extend([i.x2_lo, i.x2_hi]);
        }
        ys.extend(extra_x2.iter().filter(|&&y| y > self.x2_minus && y < self.x2_plus));
        let dedup = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= tol);
            v
        };
        (dedup(xs), dedup(ys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PeriodicGeometry {
        PeriodicGeometry::layered(
            1.0,
            0.0,
            &[(1.0, Material::dielectric(2.0))],
            Material::vacuum(),
            Material::vacuum(),
        )
    }

    #[test]
    fn active_material_rejected() {
        assert!(Material::new(C64::new(1.0, -0.1), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn straddling_inclusion_rejected() {
        let g = unit().with_inclusion(Inclusion {
            x1_lo: -0.1,
            x1_hi: 0.2,
            x2_lo: 0.2,
            x2_hi: 0.4,
            material: Material::vacuum(),
        });
        assert!(matches!(g.validate(), Err(Error::Geometry(_))));
    }

    #[test]
    fn degenerate_inclusion_rejected() {
        let g = unit().with_inclusion(Inclusion {
            x1_lo: 0.3,
            x1_hi: 0.3,
            x2_lo: 0.2,
            x2_hi: 0.4,
            material: Material::vacuum(),
        });
        assert!(g.validate().is_err());
    }

    #[test]
    fn material_lookup() {
        let g = unit().with_inclusion(Inclusion {
            x1_lo: 0.2,
            x1_hi: 0.4,
            x2_lo: 0.2,
            x2_hi: 0.4,
            material: Material::dielectric(3.0),
        });
        assert_eq!(g.material_at(0.3, 0.3).eps.re, 3.0);
        assert_eq!(g.material_at(0.7, 0.3).eps.re, 2.0);
        assert_eq!(g.material_at(0.7, 1.3).eps.re, 1.0);
    }
}
