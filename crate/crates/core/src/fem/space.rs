//! Degree-of-freedom map: edge DOFs for (E1,E2), nodal DOFs for E3 (basis i·λ),
//! Bloch identification of right-boundary entities and Dirichlet elimination at
//! the PML ends.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{EdgeTag, Mesh, Side};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entity {
    Edge(usize),
    Node(usize),
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    pub mesh: Arc<Mesh>,
    pub k1: f64,
    /// e^{i k1 a}
    pub bloch: C64,
    /// Global DOF and coefficient of each mesh edge (None when eliminated).
    pub edge_map: Vec<Option<(usize, C64)>>,
    pub node_map: Vec<Option<(usize, C64)>>,
    /// Owning entity of each DOF.
    pub dofs: Vec<Entity>,
    gamma_top: Vec<usize>,
    gamma_bottom: Vec<usize>,
    gamma_entities_top: Vec<Entity>,
    gamma_entities_bottom: Vec<Entity>,
    interior: Vec<bool>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Mesh>, order: usize, k1: f64) -> Result<Self> {
        if order != 1 {
            return Err(Error::Invalid(format!("element order {order} not supported (order 1 only)")));
        }
        let tol = mesh.tol();
        let a = mesh.period;
        let bloch = C64::new(0.0, k1 * a).exp();
        let dirichlet_lines: Vec<f64> = [Side::Top, Side::Bottom]
            .into_iter()
            .filter(|&s| mesh.pml(s).is_some())
            .map(|s| mesh.outer_line(s))
            .collect();
        let on_dirichlet = |y: f64| dirichlet_lines.iter().any(|&l| (y - l).abs() <= tol);

        // partners of right-boundary vertices, located by x2
        let mut left: Vec<(f64, usize)> = (0..mesh.vertices.len())
            .filter(|&v| mesh.vertices[v][0].abs() <= tol)
            .map(|v| (mesh.vertices[v][1], v))
            .collect();
        left.sort_by(|x, y| x.0.total_cmp(&y.0));
        let partner = |y: f64| -> Result<usize> {
            let i = left.partition_point(|p| p.0 < y - tol);
            match left.get(i) {
                Some(&(ly, v)) if (ly - y).abs() <= tol => Ok(v),
                _ => Err(Error::Mesh(format!("no left partner for right vertex at x2 = {y}"))),
            }
        };
        let is_right = |v: usize| (mesh.vertices[v][0] - a).abs() <= tol;

        let mut dofs = vec![];
        let mut edge_map = vec![None; mesh.edges.len()];
        let mut node_map = vec![None; mesh.vertices.len()];
        let one = C64::new(1.0, 0.0);
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.has_tag(EdgeTag::PmlEnd) || edge.has_tag(EdgeTag::PeriodicRight) {
                continue;
            }
            edge_map[e] = Some((dofs.len(), one));
            dofs.push(Entity::Edge(e));
        }
        for v in 0..mesh.vertices.len() {
            if on_dirichlet(mesh.vertices[v][1]) || is_right(v) {
                continue;
            }
            node_map[v] = Some((dofs.len(), one));
            dofs.push(Entity::Node(v));
        }
        // right-boundary entities inherit the left DOF times the Bloch factor
        let mut left_edge = std::collections::HashMap::new();
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.has_tag(EdgeTag::PeriodicLeft) {
                left_edge.insert((edge.v[0], edge.v[1]), e);
            }
        }
        for v in 0..mesh.vertices.len() {
            if is_right(v) && !on_dirichlet(mesh.vertices[v][1]) {
                let p = partner(mesh.vertices[v][1])?;
                let (d, _) = node_map[p].ok_or_else(|| Error::Mesh("left partner eliminated".into()))?;
                node_map[v] = Some((d, bloch));
            }
        }
        for (e, edge) in mesh.edges.iter().enumerate() {
            if edge.has_tag(EdgeTag::PeriodicRight) {
                let (p0, p1) = (partner(mesh.vertices[edge.v[0]][1])?, partner(mesh.vertices[edge.v[1]][1])?);
                let le = left_edge
                    .get(&(p0, p1))
                    .ok_or_else(|| Error::Mesh("right edge without left partner".into()))?;
                let (d, _) = edge_map[*le].expect("left edges are free");
                edge_map[e] = Some((d, bloch));
            }
        }
        let mut interior = vec![false; dofs.len()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for &e in &mesh.triangle_edges[t] {
                if let Some((d, _)) = edge_map[e] {
                    interior[d] = true;
                }
            }
            for &v in &tri.v {
                if let Some((d, _)) = node_map[v] {
                    interior[d] = true;
                }
            }
        }
        let mut space = FeSpace {
            mesh,
            k1,
            bloch,
            edge_map,
            node_map,
            dofs,
            gamma_top: vec![],
            gamma_bottom: vec![],
            gamma_entities_top: vec![],
            gamma_entities_bottom: vec![],
            interior,
        };
        for side in [Side::Top, Side::Bottom] {
            let ents = space.line_entities(space.mesh.coupling_line(side));
            let d: Vec<usize> = ents.iter().map(|&e| space.dof_of(e).expect("coupling entities are free").0).collect();
            match side {
                Side::Top => {
                    space.gamma_top = d;
                    space.gamma_entities_top = ents;
                }
                Side::Bottom => {
                    space.gamma_bottom = d;
                    space.gamma_entities_bottom = ents;
                }
            }
        }
        Ok(space)
    }

    pub fn n_dofs(&self) -> usize {
        self.dofs.len()
    }

    pub fn period(&self) -> f64 {
        self.mesh.period
    }

    pub fn dof_of(&self, e: Entity) -> Option<(usize, C64)> {
        match e {
            Entity::Edge(i) => self.edge_map[i],
            Entity::Node(i) => self.node_map[i],
        }
    }

    /// Entities on the horizontal line x2 with their own DOF (the x1 = a vertex
    /// is represented by its x1 = 0 partner), ordered by x1 with nodes before edges.
    pub fn line_entities(&self, x2: f64) -> Vec<Entity> {
        let mesh = &self.mesh;
        let tol = mesh.tol();
        let mut out: Vec<(f64, u8, Entity)> = vec![];
        for v in mesh.line_vertices(x2) {
            if (mesh.vertices[v][0] - mesh.period).abs() > tol {
                out.push((mesh.vertices[v][0], 0, Entity::Node(v)));
            }
        }
        for e in mesh.line_edges(x2) {
            let [p, q] = mesh.edges[e].v;
            out.push((0.5 * (mesh.vertices[p][0] + mesh.vertices[q][0]), 1, Entity::Edge(e)));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out.into_iter().map(|x| x.2).collect()
    }

    /// DOFs on the coupling boundary of a side (canonical order).
    pub fn gamma_dofs(&self, side: Side) -> &[usize] {
        match side {
            Side::Top => &self.gamma_top,
            Side::Bottom => &self.gamma_bottom,
        }
    }

    pub fn gamma_entities(&self, side: Side) -> &[Entity] {
        match side {
            Side::Top => &self.gamma_entities_top,
            Side::Bottom => &self.gamma_entities_bottom,
        }
    }

    /// Whether a DOF belongs to an interior (triangle) element.
    pub fn is_interior(&self, dof: usize) -> bool {
        self.interior[dof]
    }

    /// Local (DOF, coefficient) list of a triangle: 3 edges then 3 nodes, plus the
    /// edge orientations as local vertex pairs.
    pub fn triangle_dofs(&self, t: usize) -> ([Option<(usize, C64)>; 6], [(usize, usize); 3]) {
        let tri = &self.mesh.triangles[t];
        let edges = self.mesh.triangle_edges[t];
        let mut dirs = [(0, 1), (1, 2), (2, 0)];
        for k in 0..3 {
            let ev = self.mesh.edges[edges[k]].v;
            let (a, b) = dirs[k];
            if ev[0] != tri.v[a] {
                dirs[k] = (b, a);
            }
        }
        let mut d = [None; 6];
        for k in 0..3 {
            d[k] = self.edge_map[edges[k]];
            d[3 + k] = self.node_map[tri.v[k]];
        }
        (d, dirs)
    }

    pub fn quad_dofs(&self, q: usize) -> [Option<(usize, C64)>; 8] {
        let quad = &self.mesh.quads[q];
        let edges = self.mesh.quad_edges[q];
        let mut d = [None; 8];
        for k in 0..4 {
            d[k] = self.edge_map[edges[k]];
            d[4 + k] = self.node_map[quad.v[k]];
        }
        d
    }
}
