//! Run configuration: a JSON document, one length unit for the whole file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Inclusion, Material, PeriodicGeometry};
use crate::modes::{polarization_vectors, IncidentWave};
use crate::multilayer::LayerStack;
use crate::pml::PmlConfig;
use crate::schwarz::SchwarzConfig;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Declared length unit; informational, echoed into the manifest.
    #[serde(default = "default_units")]
    pub units: String,
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialSpec>,
    pub geometry: GeometrySpec,
    /// Multilayer below the FEM domain, coupled analytically (dd and dd_euv).
    #[serde(default)]
    pub stack: Option<StackSpec>,
    pub incidence: IncidenceSpec,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub pml: PmlSpec,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub dd: DdSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_units() -> String {
    "1".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Monolithic,
    Dd,
    #[value(name = "dd_euv")]
    DdEuv,
}

/// Either an index or (ε, μ) as [re, im] pairs; μ defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub thickness: f64,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub period: f64,
    /// Lower end of the meshed strip.
    pub bottom: f64,
    /// Slabs bottom-up.
    pub layers: Vec<LayerSpec>,
    pub below: String,
    pub above: String,
    #[serde(default)]
    pub inclusions: Vec<InclusionSpec>,
}

/// Layers listed top-down below `top`; the medium above the stack is the
/// geometry's lower ambient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub top: f64,
    pub layers: Vec<LayerSpec>,
    pub below: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceSpec {
    pub wavelength: f64,
    /// Degrees from the x2 axis.
    #[serde(default)]
    pub theta: f64,
    /// Conical rotation in degrees.
    #[serde(default)]
    pub phi: f64,
    /// Explicit propagation direction; overrides the angles.
    #[serde(default)]
    pub direction: Option<[f64; 3]>,
    /// Travelling up (from the lower ambient) instead of down.
    #[serde(default)]
    pub upward: bool,
    /// S and P amplitudes as [re, im].
    #[serde(default = "unit")]
    pub s: [f64; 2],
    #[serde(default)]
    pub p: [f64; 2],
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Discretization {
    pub points_per_wavelength: usize,
    pub refinements: usize,
    pub order: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { points_per_wavelength: 8, refinements: 0, order: 1 }
    }
}

/// PML settings; unset values take the defaults derived from the mesh and k0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PmlSpec {
    pub sigma: f64,
    pub epsilon: f64,
    pub adaptive: bool,
    pub kappa_min: Option<f64>,
    pub n_pw: Option<usize>,
    pub xi_max: Option<f64>,
}

impl Default for PmlSpec {
    fn default() -> Self {
        Self { sigma: 1.0, epsilon: 1e-6, adaptive: true, kappa_min: None, n_pw: None, xi_max: None }
    }
}

impl PmlSpec {
    pub fn resolve(&self, k0: f64, h_int: f64, order: usize) -> PmlConfig {
        let mut c = PmlConfig::defaults(k0, h_int, order);
        c.sigma = self.sigma;
        c.epsilon = self.epsilon;
        c.xi_max = self.xi_max.unwrap_or(std::f64::consts::PI / (k0 * self.epsilon));
        if let Some(k) = self.kappa_min {
            c.kappa_min = k;
        }
        if let Some(n) = self.n_pw {
            c.n_pw = n;
        }
        c
    }
}

/// Schwarz settings plus the split lines x2 = const (any order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdSpec {
    pub damping: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub mode_factor: f64,
    pub lines: Vec<f64>,
}

impl Default for DdSpec {
    fn default() -> Self {
        let s = SchwarzConfig::default();
        Self {
            damping: s.damping,
            tol: s.tol,
            max_iters: s.max_iters,
            inner_tol: s.inner_tol,
            inner_max_iters: s.inner_max_iters,
            mode_factor: s.mode_factor,
            lines: vec![],
        }
    }
}

impl DdSpec {
    pub fn schwarz(&self) -> SchwarzConfig {
        SchwarzConfig {
            damping: self.damping,
            tol: self.tol,
            max_iters: self.max_iters,
            inner_tol: self.inner_tol,
            inner_max_iters: self.inner_max_iters,
            mode_factor: self.mode_factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Theta,
    Phi,
    Wavelength,
    PointsPerWavelength,
    Refinements,
    Sigma,
    Damping,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    #[serde(default)]
    pub values: Vec<f64>,
    /// Inclusive linear range, used when `values` is empty.
    #[serde(default)]
    pub range: Option<[f64; 2]>,
    #[serde(default)]
    pub steps: Option<usize>,
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !self.values.is_empty() {
            return Ok(self.values.clone());
        }
        match (self.range, self.steps) {
            (Some([a, b]), Some(1)) if a == b => Ok(vec![a]),
            (Some([a, b]), Some(n)) if n >= 2 => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            _ => Err(Error::Config("sweep needs `values` or `range` with `steps` ≥ 2".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDump {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub field_dump: Option<FieldDump>,
    /// Write the final Schwarz state as checkpoint.json.
    pub checkpoint: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), field_dump: None, checkpoint: false }
    }
}

fn c(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn material(&self, name: &str) -> Result<Material> {
        if let Some(m) = self.materials.get(name) {
            let r = match (m.index, m.eps) {
                (Some(n), None) => {
                    if !(n > 0.0) {
                        return Err(Error::Config(format!("materials.{name}: index must be positive")));
                    }
                    Material::new(C64::new(n * n, 0.0), m.mu.map(c).unwrap_or(C64::new(1.0, 0.0)))
                }
                (None, Some(e)) => Material::new(c(e), m.mu.map(c).unwrap_or(C64::new(1.0, 0.0))),
                _ => return Err(Error::Config(format!("materials.{name}: give exactly one of `index`, `eps`"))),
            };
            return r.map_err(|e| Error::Config(format!("materials.{name}: {e}")));
        }
        match name {
            "vacuum" | "air" => Ok(Material::vacuum()),
            _ => Err(Error::Config(format!("unknown material `{name}`"))),
        }
    }

    pub fn geometry(&self) -> Result<PeriodicGeometry> {
        let g = &self.geometry;
        let layers = g
            .layers
            .iter()
            .map(|l| Ok((l.thickness, self.material(&l.material)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut geom = PeriodicGeometry::layered(g.period, g.bottom, &layers, self.material(&g.below)?, self.material(&g.above)?);
        for inc in &g.inclusions {
            geom = geom.with_inclusion(Inclusion {
                x1_lo: inc.x1[0],
                x1_hi: inc.x1[1],
                x2_lo: inc.x2[0],
                x2_hi: inc.x2[1],
                material: self.material(&inc.material)?,
            });
        }
        geom.validate().map_err(|e| Error::Config(format!("geometry: {e}")))?;
        Ok(geom)
    }

    pub fn stack(&self) -> Result<Option<LayerStack>> {
        let Some(s) = &self.stack else { return Ok(None) };
        let layers = s
            .layers
            .iter()
            .map(|l| Ok((l.thickness, self.material(&l.material)?)))
            .collect::<Result<Vec<_>>>()?;
        let above = self.material(&self.geometry.below)?;
        if s.top > self.geometry.bottom {
            return Err(Error::Config("stack.top lies above geometry.bottom".into()));
        }
        LayerStack::from_top(s.top, &layers, self.material(&s.below)?, above)
            .map(Some)
            .map_err(|e| Error::Config(format!("stack: {e}")))
    }

    pub fn incident(&self) -> Result<IncidentWave> {
        let inc = &self.incidence;
        if !(inc.wavelength > 0.0) {
            return Err(Error::Config("incidence.wavelength must be positive".into()));
        }
        let medium = self.material(if inc.upward { &self.geometry.below } else { &self.geometry.above })?;
        let (a_s, a_p) = (c(inc.s), c(inc.p));
        let r = match inc.direction {
            None => IncidentWave::from_angles(inc.wavelength, inc.theta, inc.phi, inc.upward, medium, a_s, a_p),
            Some(d) => {
                let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if n == 0.0 || (d[1] > 0.0) != inc.upward || d[1] == 0.0 {
                    return Err(Error::Config("incidence.direction must be non-zero with k2 matching `upward`".into()));
                }
                let nr = medium.refractive_index();
                if nr.im != 0.0 {
                    return Err(Error::Config("incident medium must be lossless".into()));
                }
                let omega = 2.0 * std::f64::consts::PI / inc.wavelength;
                let k = d.map(|x| x / n * omega * nr.re);
                let (s, p) = polarization_vectors(k);
                IncidentWave::new(k, [0, 1, 2].map(|i| a_s * s[i] + a_p * p[i]), omega, medium)
            }
        };
        r.map_err(|e| Error::Config(format!("incidence: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.trim().is_empty() {
            return Err(Error::Config("units must not be empty".into()));
        }
        if self.discretization.order != 1 {
            return Err(Error::Config(format!("discretization.order {} not supported (only 1)", self.discretization.order)));
        }
        if self.discretization.points_per_wavelength < 3 {
            return Err(Error::Config("discretization.points_per_wavelength must be at least 3".into()));
        }
        self.geometry()?;
        self.stack()?;
        self.incident()?;
        let p = self.pml.resolve(1.0, 1.0, 1);
        p.validate()?;
        self.dd.schwarz().validate()?;
        match self.mode {
            Mode::DdEuv if self.stack.is_none() => return Err(Error::Config("mode dd_euv needs a `stack`".into())),
            Mode::DdEuv | Mode::Dd if self.incidence.upward && self.stack.is_some() => {
                return Err(Error::Config("stack coupling needs downward incidence".into()))
            }
            Mode::Dd if self.dd.lines.is_empty() && self.stack.is_none() => {
                return Err(Error::Config("mode dd needs `dd.lines` or a `stack`".into()))
            }
            _ => {}
        }
        let g = &self.geometry;
        let top = g.bottom + g.layers.iter().map(|l| l.thickness).sum::<f64>();
        if self.dd.lines.iter().any(|&y| !(y > g.bottom && y < top)) {
            return Err(Error::Config("dd.lines must lie strictly inside the meshed strip".into()));
        }
        if let Some(s) = &self.sweep {
            s.points()?;
        }
        Ok(())
    }

    /// Copy with one sweep parameter set to `value`.
    pub fn with_parameter(&self, p: SweepParameter, value: f64) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        let count = |v: f64| -> Result<usize> {
            if v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Config(format!("sweep value {v} is not a count")));
            }
            Ok(v as usize)
        };
        match p {
            SweepParameter::Theta => c.incidence.theta = value,
            SweepParameter::Phi => c.incidence.phi = value,
            SweepParameter::Wavelength => c.incidence.wavelength = value,
            SweepParameter::PointsPerWavelength => c.discretization.points_per_wavelength = count(value)?,
            SweepParameter::Refinements => c.discretization.refinements = count(value)?,
            SweepParameter::Sigma => c.pml.sigma = value,
            SweepParameter::Damping => c.dd.damping = value,
        }
        c.validate()?;
        Ok(c)
    }
}
