//! Evaluation of discrete solutions: point values, quadrature sweeps, L² errors
//! and CSV sampling.

use std::io::Write;
use std::sync::Arc;

use super::basis::{barycentric, quad_points, triangle_eval, triangle_points, TriPoint};
use super::boundary::{BoundaryData, ExteriorField};
use super::problem::{locals, FemProblem};
use crate::error::Result;
use crate::geometry::{Material, Side};
use crate::modes::{zero3, Vec3};
use crate::C64;

/// Uniform bucket grid over the interior strip for point location.
#[derive(Debug)]
struct Locator {
    x2_lo: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl Locator {
    fn new(problem: &FemProblem) -> Self {
        let mesh = &problem.space.mesh;
        let n = ((mesh.triangles.len() as f64).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (n, n);
        let dx = mesh.period / nx as f64;
        let dy = (mesh.x2_top - mesh.x2_bottom) / ny as f64;
        let mut cells = vec![vec![]; nx * ny];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let p = tri.v.map(|v| mesh.vertices[v]);
            let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
            for q in p {
                for c in 0..2 {
                    lo[c] = lo[c].min(q[c]);
                    hi[c] = hi[c].max(q[c]);
                }
            }
            let ix = |x: f64| ((x / dx).floor().max(0.0) as usize).min(nx - 1);
            let iy = |y: f64| (((y - mesh.x2_bottom) / dy).floor().max(0.0) as usize).min(ny - 1);
            for j in iy(lo[1])..=iy(hi[1]) {
                for i in ix(lo[0])..=ix(hi[0]) {
                    cells[j * nx + i].push(t);
                }
            }
        }
        Self { x2_lo: mesh.x2_bottom, dx, dy, nx, ny, cells }
    }

    fn candidates(&self, x: f64, y: f64) -> &[usize] {
        let i = ((x / self.dx).floor().max(0.0) as usize).min(self.nx - 1);
        let j = (((y - self.x2_lo) / self.dy).floor().max(0.0) as usize).min(self.ny - 1);
        &self.cells[j * self.nx + i]
    }
}

/// L² norms of the difference to a reference field over the interior strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Error {
    /// ‖(E1, E2) − ref‖
    pub e12: f64,
    pub e3: f64,
    pub ref12: f64,
    pub ref3: f64,
}

impl L2Error {
    pub fn relative(&self) -> f64 {
        ((self.e12 * self.e12 + self.e3 * self.e3) / (self.ref12 * self.ref12 + self.ref3 * self.ref3)).sqrt()
    }
}

/// A discrete solution together with its problem.
#[derive(Debug)]
pub struct FemSolution {
    pub problem: Arc<FemProblem>,
    pub u: Vec<C64>,
    locator: std::sync::OnceLock<Locator>,
}

impl FemSolution {
    pub fn new(problem: Arc<FemProblem>, u: Vec<C64>) -> Self {
        Self { problem, u, locator: std::sync::OnceLock::new() }
    }

    fn combine(&self, t: usize, p: &TriPoint) -> (Vec3, Vec3) {
        let space = &self.problem.space;
        let (dofs, _) = space.triangle_dofs(t);
        let loc = locals(p, self.problem.k3, C64::new(1.0, 0.0), true);
        let mut e = zero3();
        let mut c = zero3();
        for (d, l) in dofs.iter().zip(&loc) {
            if let Some((d, coef)) = d {
                let a = coef * self.u[*d];
                for i in 0..3 {
                    e[i] += a * l.val[i];
                    c[i] += a * l.curl[i];
                }
            }
        }
        (e, c)
    }

    /// E and curl₃ E at a point of the interior strip; x1 may lie outside [0, a]
    /// (Bloch periodicity is applied). None outside the strip.
    pub fn eval(&self, x1: f64, x2: f64) -> Option<(Vec3, Vec3)> {
        let mesh = &self.problem.space.mesh;
        let tol = mesh.tol();
        if x2 < mesh.x2_bottom - tol || x2 > mesh.x2_top + tol {
            return None;
        }
        let a = mesh.period;
        let shift = (x1 / a).floor();
        let xr = x1 - shift * a;
        let phase = C64::new(0.0, self.problem.space.k1 * shift * a).exp();
        let loc = self.locator.get_or_init(|| Locator::new(&self.problem));
        for &t in loc.candidates(xr, x2) {
            let tri = &mesh.triangles[t];
            let p = tri.v.map(|v| mesh.vertices[v]);
            let (grads, _) = barycentric(p);
            let l = [0, 1, 2].map(|i| {
                let j = (i + 1) % 3;
                grads[i][0] * (xr - p[j][0]) + grads[i][1] * (x2 - p[j][1])
            });
            if l.iter().all(|&v| v >= -1e-10) {
                let (_, dirs) = self.problem.space.triangle_dofs(t);
                let (edges, nodes) = triangle_eval(&grads, &dirs, l);
                let pt = TriPoint { x: [xr, x2], weight: 0.0, edges, nodes };
                let (e, c) = self.combine(t, &pt);
                return Some((e.map(|z| z * phase), c.map(|z| z * phase)));
            }
        }
        None
    }

    /// Quadrature points of one triangle: (x, weight, E, curl E).
    pub fn triangle_fields(&self, t: usize) -> Vec<([f64; 2], f64, Vec3, Vec3)> {
        let mesh = &self.problem.space.mesh;
        let (_, dirs) = self.problem.space.triangle_dofs(t);
        let p = mesh.triangles[t].v.map(|v| mesh.vertices[v]);
        triangle_points(p, &dirs)
            .iter()
            .map(|pt| {
                let (e, c) = self.combine(t, pt);
                (pt.x, pt.weight, e, c)
            })
            .collect()
    }

    /// Visit every interior quadrature point: (x, weight, material, E, curl E).
    pub fn for_each_point(&self, mut f: impl FnMut([f64; 2], f64, Material, &Vec3, &Vec3)) {
        let mesh = &self.problem.space.mesh;
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let (_, dirs) = self.problem.space.triangle_dofs(t);
            let p = tri.v.map(|v| mesh.vertices[v]);
            for pt in triangle_points(p, &dirs) {
                let (e, c) = self.combine(t, &pt);
                f(pt.x, pt.weight, mesh.materials[tri.material], &e, &c);
            }
        }
    }

    /// L² distance to a reference field over the interior strip.
    pub fn l2_error(&self, reference: &dyn ExteriorField) -> L2Error {
        let mut r = L2Error { e12: 0.0, e3: 0.0, ref12: 0.0, ref3: 0.0 };
        self.for_each_point(|x, w, _, e, _| {
            let (ev, _) = reference.eval(x[0], x[1]);
            r.e12 += w * ((e[0] - ev[0]).norm_sqr() + (e[1] - ev[1]).norm_sqr());
            r.e3 += w * (e[2] - ev[2]).norm_sqr();
            r.ref12 += w * (ev[0].norm_sqr() + ev[1].norm_sqr());
            r.ref3 += w * ev[2].norm_sqr();
        });
        L2Error { e12: r.e12.sqrt(), e3: r.e3.sqrt(), ref12: r.ref12.sqrt(), ref3: r.ref3.sqrt() }
    }

    /// ‖E − E_ext‖_{L²} over one PML strip in the computational coordinates
    /// (x1, ξ); `exterior` supplies the exterior trace on the coupling boundary.
    pub fn pml_norm(&self, exterior: &BoundaryData) -> f64 {
        let side = exterior.side;
        let space = &self.problem.space;
        let mesh = &space.mesh;
        let mut u = self.u.clone();
        for (&d, &p) in space.gamma_dofs(side).iter().zip(&exterior.pi) {
            u[d] -= p;
        }
        let mut acc = 0.0;
        for (q, quad) in mesh.quads.iter().enumerate() {
            if quad.side != side {
                continue;
            }
            let dofs = space.quad_dofs(q);
            let (lo, hi) = (mesh.vertices[quad.v[0]], mesh.vertices[quad.v[2]]);
            for pt in quad_points(lo, hi, 3) {
                let loc = locals(&pt, self.problem.k3, self.problem.gamma, true);
                let mut e = zero3();
                for (d, l) in dofs.iter().zip(&loc) {
                    if let Some((d, coef)) = d {
                        for i in 0..3 {
                            e[i] += coef * u[*d] * l.val[i];
                        }
                    }
                }
                acc += pt.weight * e.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        acc.sqrt()
    }

    /// L² norm over one period of u − u_ext (all three components) on the PML
    /// line ξ = ξ_n of `exterior.side`.
    pub fn pml_line_norm(&self, exterior: &BoundaryData, n: usize) -> f64 {
        let side = exterior.side;
        let space = &self.problem.space;
        let mesh = &space.mesh;
        let Some(xi) = mesh.pml(side) else { return 0.0 };
        let n = n.min(xi.len() - 1);
        let base = mesh.coupling_line(side);
        let sg = side.sign();
        let y = base + sg * xi[n];
        let tol = mesh.tol();
        let mut u = self.u.clone();
        for (&d, &p) in space.gamma_dofs(side).iter().zip(&exterior.pi) {
            u[d] -= p;
        }
        let gauss = super::quadrature::gauss_legendre(3);
        let mut acc = 0.0;
        for (q, quad) in mesh.quads.iter().enumerate() {
            if quad.side != side {
                continue;
            }
            let (lo, hi) = (mesh.vertices[quad.v[0]], mesh.vertices[quad.v[2]]);
            let (near, far) = if sg > 0.0 { (lo[1], hi[1]) } else { (hi[1], lo[1]) };
            let take = if n + 1 < xi.len() { (near - y).abs() <= tol } else { (far - y).abs() <= tol };
            if !take {
                continue;
            }
            let dofs = space.quad_dofs(q);
            for &(t, w) in &gauss {
                let x = [lo[0] + t * (hi[0] - lo[0]), y];
                let (edges, nodes) = super::basis::quad_eval(lo, hi, x);
                let pt = super::basis::QuadPoint { x, weight: 0.0, edges, nodes };
                let loc = locals(&pt, self.problem.k3, self.problem.gamma, true);
                let mut e = zero3();
                for (d, l) in dofs.iter().zip(&loc) {
                    if let Some((d, coef)) = d {
                        for i in 0..3 {
                            e[i] += coef * u[*d] * l.val[i];
                        }
                    }
                }
                acc += w * (hi[0] - lo[0]) * e.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        acc.sqrt()
    }

    pub fn gamma_values(&self, side: Side) -> Vec<C64> {
        super::boundary::gamma_values(&self.problem.space, side, &self.u)
    }

    /// Sample the field on an nx × ny grid over one period of the interior strip.
    pub fn write_csv<W: Write>(&self, w: W, nx: usize, ny: usize) -> Result<()> {
        let mesh = &self.problem.space.mesh;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x1", "x2", "re_e1", "im_e1", "re_e2", "im_e2", "re_e3", "im_e3"])?;
        for j in 0..ny {
            let y = mesh.x2_bottom + (mesh.x2_top - mesh.x2_bottom) * (j as f64 + 0.5) / ny as f64;
            for i in 0..nx {
                let x = mesh.period * (i as f64 + 0.5) / nx as f64;
                let (e, _) = self.eval(x, y).unwrap_or((zero3(), zero3()));
                let mut rec = vec![x.to_string(), y.to_string()];
                for z in e {
                    rec.push(z.re.to_string());
                    rec.push(z.im.to_string());
                }
                out.write_record(&rec)?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Canonical interpolant of a field: tangential edge moments and nodal E3
/// values in the interior strip, zero on PML entities.
pub fn interpolate(space: &super::space::FeSpace, field: &dyn ExteriorField) -> Vec<C64> {
    use super::space::Entity;
    let mesh = &space.mesh;
    let tol = mesh.tol();
    let inside = |y: f64| y >= mesh.x2_bottom - tol && y <= mesh.x2_top + tol;
    let gauss = super::quadrature::gauss_legendre(5);
    space
        .dofs
        .iter()
        .map(|&ent| match ent {
            Entity::Edge(e) => {
                let [p, q] = mesh.edges[e].v;
                let (a, b) = (mesh.vertices[p], mesh.vertices[q]);
                if !inside(a[1]) || !inside(b[1]) {
                    return C64::new(0.0, 0.0);
                }
                let t = [b[0] - a[0], b[1] - a[1]];
                gauss.iter().fold(C64::new(0.0, 0.0), |acc, &(s, w)| {
                    let (ev, _) = field.eval(a[0] + s * t[0], a[1] + s * t[1]);
                    acc + w * (ev[0] * t[0] + ev[1] * t[1])
                })
            }
            Entity::Node(v) => {
                let x = mesh.vertices[v];
                if !inside(x[1]) {
                    return C64::new(0.0, 0.0);
                }
                C64::new(0.0, -1.0) * field.eval(x[0], x[1]).0[2]
            }
        })
        .collect()
}
