//! Exterior data on the coupling boundaries: Dirichlet moments π of a field and
//! the weak Neumann functional ν, plus traces recovered from a discrete solution.

use super::problem::FemProblem;
use super::quadrature::gauss_legendre;
use super::space::{Entity, FeSpace};
use crate::error::{Error, Result};
use crate::geometry::Side;
use crate::modes::{zero3, BoundaryTrace, IncidentWave, ModalField, TraceSegment, Vec3};
use crate::multilayer::{MirroredSolution, StackSolution};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A field defined outside a subdomain: E and curl₃ E at a point.
pub trait ExteriorField: Sync {
    fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3);
}

impl ExteriorField for IncidentWave {
    fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        (self.field(x1, x2), self.curl(x1, x2))
    }
}

impl ExteriorField for ModalField {
    fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        ModalField::eval(self, x1, x2)
    }
}

impl ExteriorField for StackSolution {
    fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        let ph = C64::new(0.0, self.k1 * x1).exp();
        let (e, c) = StackSolution::eval(self, x2);
        (e.map(|z| z * ph), c.map(|z| z * ph))
    }
}

impl ExteriorField for MirroredSolution {
    fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        MirroredSolution::eval(self, x1, x2)
    }
}

/// The zero field.
pub struct NoField;

impl ExteriorField for NoField {
    fn eval(&self, _: f64, _: f64) -> (Vec3, Vec3) {
        (zero3(), zero3())
    }
}

/// Sum of exterior fields.
pub struct FieldSum<'a>(pub Vec<&'a dyn ExteriorField>);

impl ExteriorField for FieldSum<'_> {
    fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        let mut e = zero3();
        let mut c = zero3();
        for f in &self.0 {
            let (fe, fc) = f.eval(x1, x2);
            for i in 0..3 {
                e[i] += fe[i];
                c[i] += fc[i];
            }
        }
        (e, c)
    }
}

/// Dirichlet moments π and weak Neumann data ν on one coupling boundary, both
/// indexed like `FeSpace::gamma_dofs(side)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryData {
    pub side: Side,
    pub pi: Vec<C64>,
    pub nu: Vec<C64>,
}

const GAUSS_POINTS: usize = 5;

impl BoundaryData {
    pub fn zero(space: &FeSpace, side: Side) -> Self {
        let n = space.gamma_dofs(side).len();
        Self { side, pi: vec![C64::new(0.0, 0.0); n], nu: vec![C64::new(0.0, 0.0); n] }
    }

    /// Data of a field that solves Maxwell's equations in the ambient medium
    /// beyond `side`.
    pub fn from_field(space: &FeSpace, side: Side, field: &dyn ExteriorField) -> Result<Self> {
        let mesh = &space.mesh;
        if mesh.pml(side).is_none() {
            return Err(Error::Invalid(format!("no PML attached on the {side:?} side")));
        }
        let y = mesh.coupling_line(side);
        let mu = mesh.ambient(side).mu;
        let s = -side.sign();
        let gauss = gauss_legendre(GAUSS_POINTS);
        let ents = space.gamma_entities(side);
        let pos = |e: Entity| ents.iter().position(|&x| x == e);
        let mut out = Self::zero(space, side);
        for (k, &ent) in ents.iter().enumerate() {
            match ent {
                Entity::Edge(e) => {
                    let [p, q] = mesh.edges[e].v;
                    let (x0, x1) = (mesh.vertices[p][0], mesh.vertices[q][0]);
                    let h = x1 - x0;
                    for &(t, w) in &gauss {
                        let (ev, cv) = field.eval(x0 + t * h, y);
                        out.pi[k] += w * h * ev[0];
                        out.nu[k] += w * (-s * cv[2]) / mu;
                    }
                }
                Entity::Node(v) => {
                    out.pi[k] = -I * field.eval(mesh.vertices[v][0], y).0[2];
                }
            }
        }
        // nodal ν: ∫ (−iλ)(s V1)/μ over the two segments touching each node
        for e in mesh.line_edges(y) {
            let [p, q] = mesh.edges[e].v;
            let (x0, x1) = (mesh.vertices[p][0], mesh.vertices[q][0]);
            let h = x1 - x0;
            for (v, left) in [(p, true), (q, false)] {
                let Some((_, c)) = space.node_map[v] else { continue };
                let owner = space.dofs[space.node_map[v].expect("free").0];
                let Some(k) = pos(owner) else { continue };
                let mut acc = C64::new(0.0, 0.0);
                for &(t, w) in &gauss {
                    let lam = if left { 1.0 - t } else { t };
                    let cv = field.eval(x0 + t * h, y).1;
                    acc += w * h * (-I * lam) * (s * cv[0]) / mu;
                }
                out.nu[k] += c.conj() * acc;
            }
        }
        Ok(out)
    }

    /// Dirichlet and Neumann data handed over by a neighbouring subdomain solution:
    /// π = its boundary DOFs, ν = (A_int u)_Γ of the neighbour.
    pub fn from_neighbour(neighbour: &FemProblem, u: &[C64], neighbour_side: Side) -> Result<Self> {
        let dofs = neighbour.space.gamma_dofs(neighbour_side);
        let au = neighbour.a_int.mul_vec(u)?;
        Ok(Self {
            side: neighbour_side.opposite(),
            pi: dofs.iter().map(|&d| u[d]).collect(),
            nu: dofs.iter().map(|&d| au[d]).collect(),
        })
    }

    /// (1 − d)·self + d·new
    pub fn relax(&self, new: &BoundaryData, d: f64) -> Result<Self> {
        if self.side != new.side || self.pi.len() != new.pi.len() {
            return Err(Error::Dimension("boundary data of different boundaries".into()));
        }
        let mix = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| (1.0 - d) * x + d * y).collect();
        Ok(Self { side: self.side, pi: mix(&self.pi, &new.pi), nu: mix(&self.nu, &new.nu) })
    }

    pub fn add(&self, other: &BoundaryData) -> Result<Self> {
        if self.side != other.side || self.pi.len() != other.pi.len() {
            return Err(Error::Dimension("boundary data of different boundaries".into()));
        }
        Ok(Self {
            side: self.side,
            pi: self.pi.iter().zip(&other.pi).map(|(a, b)| a + b).collect(),
            nu: self.nu.iter().zip(&other.nu).map(|(a, b)| a + b).collect(),
        })
    }

    /// Contribution A_pml(side)·π − ν to the right-hand side.
    pub fn rhs(&self, problem: &FemProblem) -> Result<Vec<C64>> {
        let dofs = problem.space.gamma_dofs(self.side);
        if dofs.len() != self.pi.len() {
            return Err(Error::Dimension(format!("{} boundary values for {} DOFs", self.pi.len(), dofs.len())));
        }
        let n = problem.n_dofs();
        let mut pi = vec![C64::new(0.0, 0.0); n];
        for (&d, &v) in dofs.iter().zip(&self.pi) {
            pi[d] = v;
        }
        let mut r = problem.a_pml(self.side).mul_vec(&pi)?;
        for (&d, &v) in dofs.iter().zip(&self.nu) {
            r[d] -= v;
        }
        Ok(r)
    }
}

/// Tangential trace (E1, 0, E3) of DOF values on a coupling boundary: E1 constant
/// per edge, E3 linear between nodes.
pub fn trace_from_dofs(space: &FeSpace, side: Side, values: &[C64]) -> Result<BoundaryTrace> {
    let ents = space.gamma_entities(side);
    if values.len() != ents.len() {
        return Err(Error::Dimension("trace values do not match boundary DOFs".into()));
    }
    let mesh = &space.mesh;
    let index: std::collections::HashMap<usize, usize> =
        space.gamma_dofs(side).iter().enumerate().map(|(k, &d)| (d, k)).collect();
    let node_value = |v: usize| -> C64 {
        let (d, c) = space.node_map[v].expect("coupling vertices are free");
        I * c * values[index[&d]]
    };
    let mut segs = vec![];
    for (k, &ent) in ents.iter().enumerate() {
        if let Entity::Edge(e) = ent {
            let [p, q] = mesh.edges[e].v;
            let (x0, x1) = (mesh.vertices[p][0], mesh.vertices[q][0]);
            let e1 = values[k] / (x1 - x0);
            let z = C64::new(0.0, 0.0);
            segs.push(TraceSegment { x0, x1, v0: [e1, z, node_value(p)], v1: [e1, z, node_value(q)] });
        }
    }
    BoundaryTrace::new(mesh.period, space.k1, segs)
}

/// Restriction of a full DOF vector to the coupling boundary of `side`.
pub fn gamma_values(space: &FeSpace, side: Side, u: &[C64]) -> Vec<C64> {
    space.gamma_dofs(side).iter().map(|&d| u[d]).collect()
}
