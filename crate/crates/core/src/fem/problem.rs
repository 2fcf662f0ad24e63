//! Assembly and solution of the discrete conical problem on one (sub)domain.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::basis::{quad_points, triangle_points, PointEval};
use super::space::FeSpace;
use crate::error::Result;
use crate::geometry::{Material, Side};
use crate::numerics::{SparseLu, SparseMatrix, TripletBuilder};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Field values of one local basis function (test or trial) at a point.
#[derive(Clone, Copy)]
pub(crate) struct Local {
    pub val: [C64; 3],
    pub curl: [C64; 3],
}

fn dot(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Test (`trial = false`) or trial functions at one quadrature point: edges first,
/// then nodes. `g` is the x2 stretching (1 outside the PML).
pub(crate) fn locals<const NE: usize>(p: &PointEval<NE>, k3: f64, g: C64, trial: bool) -> Vec<Local> {
    let s = if trial { -1.0 } else { 1.0 };
    let z = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(2 * NE);
    for e in &p.edges {
        let (w1, w2) = (C64::from(e.w[0]), C64::from(e.w[1]));
        out.push(Local {
            val: [w1, w2, z],
            curl: [s * I * k3 * w2, -s * I * k3 * w1, C64::from(e.d1w2) - e.d2w1 / g],
        });
    }
    for n in &p.nodes {
        out.push(Local {
            val: [z, z, -s * I * n.lam],
            curl: [-s * I * n.grad[1] / g, s * I * n.grad[0], z],
        });
    }
    out
}

fn element_matrix<const NE: usize>(pts: &[PointEval<NE>], m: Material, omega: f64, k3: f64, g: C64) -> Vec<C64> {
    let n = 2 * NE;
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    let inv_mu = 1.0 / m.mu;
    let w2e = omega * omega * m.eps;
    for p in pts {
        let t = locals(p, k3, g, false);
        let u = locals(p, k3, g, true);
        let w = g * p.weight;
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] += w * (inv_mu * dot(&t[i].curl, &u[j].curl) - w2e * dot(&t[i].val, &u[j].val));
            }
        }
    }
    a
}

/// Local matrices of all triangles (interior part) or all quads of one PML side.
fn scatter(space: &FeSpace, n: usize, locals: Vec<(Vec<Option<(usize, C64)>>, Vec<C64>)>) -> Result<SparseMatrix> {
    let mut b = TripletBuilder::with_capacity(n, n, locals.iter().map(|l| l.1.len()).sum());
    let _ = space;
    for (dofs, m) in locals {
        let k = dofs.len();
        for i in 0..k {
            let Some((di, ci)) = dofs[i] else { continue };
            for j in 0..k {
                let Some((dj, cj)) = dofs[j] else { continue };
                b.push(di, dj, ci.conj() * cj * m[i * k + j]);
            }
        }
    }
    b.build()
}

/// Assembled problem: interior matrix, one PML matrix per side and the cached
/// factorisation of their sum.
#[derive(Debug)]
pub struct FemProblem {
    pub space: Arc<FeSpace>,
    pub omega: f64,
    pub k3: f64,
    pub gamma: C64,
    pub a_int: SparseMatrix,
    pub a_pml_top: SparseMatrix,
    pub a_pml_bottom: SparseMatrix,
    pub system: SparseMatrix,
    lu: OnceLock<SparseLu>,
}

impl FemProblem {
    /// `gamma` is the complex stretching factor used in both PML strips.
    pub fn assemble(space: Arc<FeSpace>, omega: f64, k3: f64, gamma: C64) -> Result<Self> {
        let mesh = &space.mesh;
        let n = space.n_dofs();
        let one = C64::new(1.0, 0.0);
        let tri: Vec<_> = (0..mesh.triangles.len())
            .into_par_iter()
            .map(|t| {
                let tr = &mesh.triangles[t];
                let (dofs, dirs) = space.triangle_dofs(t);
                let p = tr.v.map(|v| mesh.vertices[v]);
                let pts = triangle_points(p, &dirs);
                (dofs.to_vec(), element_matrix(&pts, mesh.materials[tr.material], omega, k3, one))
            })
            .collect();
        let quads = |side: Side| -> Vec<_> {
            (0..mesh.quads.len())
                .into_par_iter()
                .filter(|&q| mesh.quads[q].side == side)
                .map(|q| {
                    let quad = &mesh.quads[q];
                    let (lo, hi) = (mesh.vertices[quad.v[0]], mesh.vertices[quad.v[2]]);
                    let pts = quad_points(lo, hi, 3);
                    (space.quad_dofs(q).to_vec(), element_matrix(&pts, mesh.materials[quad.material], omega, k3, gamma))
                })
                .collect()
        };
        let a_int = scatter(&space, n, tri)?;
        let a_pml_top = scatter(&space, n, quads(Side::Top))?;
        let a_pml_bottom = scatter(&space, n, quads(Side::Bottom))?;
        let system = a_int.add(&a_pml_top)?.add(&a_pml_bottom)?;
        Ok(Self { space, omega, k3, gamma, a_int, a_pml_top, a_pml_bottom, system, lu: OnceLock::new() })
    }

    pub fn n_dofs(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn a_pml(&self, side: Side) -> &SparseMatrix {
        match side {
            Side::Top => &self.a_pml_top,
            Side::Bottom => &self.a_pml_bottom,
        }
    }

    fn lu(&self) -> Result<&SparseLu> {
        if let Some(lu) = self.lu.get() {
            return Ok(lu);
        }
        let lu = SparseLu::factor(&self.system)?;
        Ok(self.lu.get_or_init(|| lu))
    }

    /// Solve the system for one right-hand side (factorisation is reused).
    pub fn solve(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        self.lu()?.solve_refined(&self.system, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mesh, PeriodicGeometry};

    fn problem(k3: f64) -> FemProblem {
        let g = PeriodicGeometry::layered(1.0, 0.0, &[(0.5, Material::dielectric(2.0))], Material::vacuum(), Material::vacuum());
        let mesh = Mesh::build(&g, 6, 1.0).unwrap();
        let mesh = mesh.extrude_pml(Side::Top, &[0.0, 0.2, 0.4]).unwrap();
        let mesh = mesh.extrude_pml(Side::Bottom, &[0.0, 0.2, 0.4]).unwrap();
        let space = Arc::new(FeSpace::new(Arc::new(mesh), 1, 0.0).unwrap());
        FemProblem::assemble(space, 2.0 * std::f64::consts::PI, k3, C64::new(1.0, 1.0)).unwrap()
    }

    #[test]
    fn periodic_matrix_is_complex_symmetric() {
        let p = problem(1.3);
        let scale = p.system.norm_inf();
        assert!(scale > 0.0 && p.system.symmetry_defect() <= 1e-12);
    }

    #[test]
    fn zero_k3_decouples_edges_and_nodes() {
        let p = problem(0.0);
        for (r, c, v) in p.system.triplets() {
            let (er, ec) = (p.space.dofs[r], p.space.dofs[c]);
            let mixed = matches!(er, super::super::space::Entity::Edge(_)) != matches!(ec, super::super::space::Entity::Edge(_));
            if mixed {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_triangle_mass_and_stiffness() {
        // unit right triangle, eps = 1, mu = 1, k3 = 0, omega = 1: node block is
        // grad·grad − mass, edge curl-curl is 4/area·area = 2
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let dirs = [(0, 1), (1, 2), (2, 0)];
        let pts = triangle_points(p, &dirs);
        let a = element_matrix(&pts, Material::vacuum(), 0.0, 0.0, C64::new(1.0, 0.0));
        // stiffness of P1 on the reference triangle
        let k = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[(3 + i) * 6 + 3 + j] - C64::from(k[i][j])).norm() < 1e-13);
            }
        }
        // curl of every Whitney function is 1/area = 2, integrated over area 1/2
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i * 6 + j] - C64::from(2.0)).norm() < 1e-13);
            }
        }
    }
}
