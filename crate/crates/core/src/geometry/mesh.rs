use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Material, PeriodicGeometry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Top,
    Bottom,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
        }
    }

    /// +1 for the top side (outward is +x2), −1 for the bottom.
    pub fn sign(self) -> f64 {
        match self {
            Side::Top => 1.0,
            Side::Bottom => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    PeriodicLeft,
    PeriodicRight,
    CouplingTop,
    CouplingBottom,
    /// Edge between elements of two different materials (ids, ascending).
    Interface(usize, usize),
    PmlEnd,
}

/// Counter-clockwise triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [usize; 3],
    pub material: usize,
}

/// Axis-aligned PML rectangle; vertices bottom-left, bottom-right, top-right, top-left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub v: [usize; 4],
    pub material: usize,
    pub side: Side,
}

/// Edge oriented towards +x2, or towards +x1 when horizontal.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub v: [usize; 2],
    pub tags: Vec<EdgeTag>,
}

impl Edge {
    pub fn has_tag(&self, tag: EdgeTag) -> bool {
        self.tags.contains(&tag)
    }
}

/// Conforming mesh: triangles in the interior strip [x2_bottom, x2_top], quads in
/// PML strips above and below it.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub period: f64,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub quads: Vec<Quad>,
    pub materials: Vec<Material>,
    pub edges: Vec<Edge>,
    /// Edges (v0,v1), (v1,v2), (v2,v0) of each triangle.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Bottom, right, top, left edge of each quad.
    pub quad_edges: Vec<[usize; 4]>,
    pub x2_bottom: f64,
    pub x2_top: f64,
    pub ambient_top: Material,
    pub ambient_bottom: Material,
    pub pml_top: Option<Vec<f64>>,
    pub pml_bottom: Option<Vec<f64>>,
    /// Largest edge on a coupling boundary.
    pub h_max_boundary: f64,
}

/// One piece of a mesh split along horizontal lines, with maps into the parent.
#[derive(Debug, Clone)]
pub struct SubMesh {
    pub mesh: Mesh,
    pub parent_vertex: Vec<usize>,
    pub parent_triangle: Vec<usize>,
}

fn subdivisions(len: f64, h: f64) -> usize {
    ((len / h) - 1e-9).ceil().max(1.0) as usize
}

impl Mesh {
    /// Structured mesh of the unit cell: axis-aligned cells, each split in two
    /// triangles with alternating diagonals.
    pub fn build(geom: &PeriodicGeometry, points_per_wavelength: usize, wavelength: f64) -> Result<Mesh> {
        Self::build_with_lines(geom, points_per_wavelength, wavelength, &[])
    }

    /// As [`Mesh::build`], additionally resolving the horizontal lines `x2_lines`.
    pub fn build_with_lines(
        geom: &PeriodicGeometry,
        points_per_wavelength: usize,
        wavelength: f64,
        x2_lines: &[f64],
    ) -> Result<Mesh> {
        if points_per_wavelength < 3 {
            return Err(Error::Mesh(format!(
                "points per wavelength {points_per_wavelength} below 3"
            )));
        }
        if !(wavelength > 0.0) {
            return Err(Error::Mesh("wavelength must be positive".into()));
        }
        geom.validate()?;
        let (xs, ys) = geom.breakpoints(x2_lines);
        let ppw = points_per_wavelength as f64 * std::f64::consts::SQRT_2;
        let local_h = |x1: f64, x2: f64| geom.material_at(x1, x2).local_wavelength(wavelength) / ppw;
        let mid = |v: &[f64]| 0.5 * (v[0] + v[1]);
        let mut x_nodes = vec![xs[0]];
        for w in xs.windows(2) {
            let h = ys.windows(2).map(|v| local_h(mid(w), mid(v))).fold(f64::INFINITY, f64::min);
            let n = subdivisions(w[1] - w[0], h);
            for k in 1..=n {
                x_nodes.push(if k == n { w[1] } else { w[0] + (w[1] - w[0]) * k as f64 / n as f64 });
            }
        }
        let mut y_nodes = vec![ys[0]];
        for v in ys.windows(2) {
            let h = xs.windows(2).map(|w| local_h(mid(w), mid(v))).fold(f64::INFINITY, f64::min);
            let n = subdivisions(v[1] - v[0], h);
            for k in 1..=n {
                y_nodes.push(if k == n { v[1] } else { v[0] + (v[1] - v[0]) * k as f64 / n as f64 });
            }
        }
        let mut mesh = Mesh::empty(geom.period, geom.ambient_top_bottom());
        mesh.x2_bottom = geom.x2_minus;
        mesh.x2_top = geom.x2_plus;
        let nx = x_nodes.len() - 1;
        for &y in &y_nodes {
            for &x in &x_nodes {
                mesh.vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        for j in 0..y_nodes.len() - 1 {
            for i in 0..nx {
                let m = geom.material_at(
                    0.5 * (x_nodes[i] + x_nodes[i + 1]),
                    0.5 * (y_nodes[j] + y_nodes[j + 1]),
                );
                let material = mesh.material_id(m);
                let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                if (i + j) % 2 == 0 {
                    mesh.triangles.push(Triangle { v: [v00, v10, v11], material });
                    mesh.triangles.push(Triangle { v: [v00, v11, v01], material });
                } else {
                    mesh.triangles.push(Triangle { v: [v00, v10, v01], material });
                    mesh.triangles.push(Triangle { v: [v10, v11, v01], material });
                }
            }
        }
        mesh.finalize()?;
        Ok(mesh)
    }

    fn empty(period: f64, ambient: (Material, Material)) -> Mesh {
        Mesh {
            period,
            vertices: vec![],
            triangles: vec![],
            quads: vec![],
            materials: vec![],
            edges: vec![],
            triangle_edges: vec![],
            quad_edges: vec![],
            x2_bottom: 0.0,
            x2_top: 0.0,
            ambient_top: ambient.0,
            ambient_bottom: ambient.1,
            pml_top: None,
            pml_bottom: None,
            h_max_boundary: 0.0,
        }
    }

    pub fn material_id(&mut self, m: Material) -> usize {
        match self.materials.iter().position(|&x| x == m) {
            Some(i) => i,
            None => {
                self.materials.push(m);
                self.materials.len() - 1
            }
        }
    }

    pub fn tol(&self) -> f64 {
        let (lo, hi) = self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v[1]), b.max(v[1]))
        });
        1e-12 * self.period.max(hi - lo).max(self.x2_top - self.x2_bottom)
    }

    /// x2 of the outermost line on a side (coupling line when no PML is attached).
    pub fn outer_line(&self, side: Side) -> f64 {
        match side {
            Side::Top => self.x2_top + self.pml_top.as_ref().and_then(|g| g.last()).copied().unwrap_or(0.0),
            Side::Bottom => {
                self.x2_bottom - self.pml_bottom.as_ref().and_then(|g| g.last()).copied().unwrap_or(0.0)
            }
        }
    }

    pub fn coupling_line(&self, side: Side) -> f64 {
        match side {
            Side::Top => self.x2_top,
            Side::Bottom => self.x2_bottom,
        }
    }

    pub fn pml(&self, side: Side) -> Option<&Vec<f64>> {
        match side {
            Side::Top => self.pml_top.as_ref(),
            Side::Bottom => self.pml_bottom.as_ref(),
        }
    }

    pub fn ambient(&self, side: Side) -> Material {
        match side {
            Side::Top => self.ambient_top,
            Side::Bottom => self.ambient_bottom,
        }
    }

    /// Recompute the edge table, orientations and tags from the element lists.
    pub fn finalize(&mut self) -> Result<()> {
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = vec![];
        let mut adjacent: Vec<Vec<usize>> = vec![];
        let vertices = &self.vertices;
        let mut get = |a: usize, b: usize, mat: usize| -> usize {
            let key = (a.min(b), a.max(b));
            let e = *index.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let forward = d[1] > 0.0 || (d[1] == 0.0 && d[0] > 0.0);
                edges.push(Edge { v: if forward { [a, b] } else { [b, a] }, tags: vec![] });
                adjacent.push(vec![]);
                edges.len() - 1
            });
            adjacent[e].push(mat);
            e
        };
        let mut triangle_edges = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = t.v;
            let area = signed_area(vertices[a], vertices[b], vertices[c]);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!("triangle {:?} has non-positive area", t.v)));
            }
            triangle_edges.push([get(a, b, t.material), get(b, c, t.material), get(c, a, t.material)]);
        }
        let mut quad_edges = Vec::with_capacity(self.quads.len());
        for q in &self.quads {
            let [a, b, c, d] = q.v;
            quad_edges.push([
                get(a, b, q.material),
                get(b, c, q.material),
                get(d, c, q.material),
                get(a, d, q.material),
            ]);
        }
        let tol = self.tol();
        let near = |x: f64, y: f64| (x - y).abs() <= tol;
        let top_end = self.outer_line(Side::Top);
        let bottom_end = self.outer_line(Side::Bottom);
        let mut h_max: f64 = 0.0;
        for (e, adj) in edges.iter_mut().zip(&adjacent) {
            if adj.len() > 2 {
                return Err(Error::Mesh(format!("edge {:?} shared by {} elements", e.v, adj.len())));
            }
            let (p, q) = (self.vertices[e.v[0]], self.vertices[e.v[1]]);
            if near(p[0], q[0]) && near(p[0], 0.0) {
                e.tags.push(EdgeTag::PeriodicLeft);
            }
            if near(p[0], q[0]) && near(p[0], self.period) {
                e.tags.push(EdgeTag::PeriodicRight);
            }
            if near(p[1], q[1]) {
                let y = p[1];
                if near(y, self.x2_top) {
                    e.tags.push(EdgeTag::CouplingTop);
                    h_max = h_max.max(q[0] - p[0]);
                }
                if near(y, self.x2_bottom) {
                    e.tags.push(EdgeTag::CouplingBottom);
                    h_max = h_max.max(q[0] - p[0]);
                }
                if (self.pml_top.is_some() && near(y, top_end))
                    || (self.pml_bottom.is_some() && near(y, bottom_end))
                {
                    e.tags.push(EdgeTag::PmlEnd);
                }
            }
            if adj.len() == 2 && adj[0] != adj[1] {
                e.tags.push(EdgeTag::Interface(adj[0].min(adj[1]), adj[0].max(adj[1])));
            }
            if adj.len() == 1 {
                let on_boundary = e.tags.iter().any(|t| {
                    matches!(t, EdgeTag::PeriodicLeft | EdgeTag::PeriodicRight | EdgeTag::PmlEnd)
                }) || (near(p[1], q[1]) && (near(p[1], top_end) || near(p[1], bottom_end)));
                if !on_boundary {
                    return Err(Error::Mesh(format!("hanging edge {:?}", e.v)));
                }
            }
        }
        self.edges = edges;
        self.triangle_edges = triangle_edges;
        self.quad_edges = quad_edges;
        self.h_max_boundary = h_max;
        self.check_periodic()
    }

    fn check_periodic(&self) -> Result<()> {
        let tol = self.tol();
        let mut left: Vec<f64> = vec![];
        let mut right: Vec<f64> = vec![];
        for v in &self.vertices {
            if v[0].abs() <= tol {
                left.push(v[1]);
            } else if (v[0] - self.period).abs() <= tol {
                right.push(v[1]);
            }
        }
        left.sort_by(f64::total_cmp);
        right.sort_by(f64::total_cmp);
        if left.len() != right.len() || left.iter().zip(&right).any(|(a, b)| (a - b).abs() > tol) {
            return Err(Error::Mesh("left and right boundary vertices do not match".into()));
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len() + self.quads.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].v;
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].v.map(|i| self.vertices[i]);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    /// ∫ eps over the interior triangles.
    pub fn integrate_eps(&self) -> crate::C64 {
        (0..self.triangles.len())
            .map(|t| self.materials[self.triangles[t].material].eps * self.triangle_area(t))
            .sum()
    }

    /// Vertices on the coupling line of a side, sorted by x1 (both x1=0 and x1=a included).
    pub fn line_vertices(&self, x2: f64) -> Vec<usize> {
        let tol = self.tol();
        let mut v: Vec<usize> =
            (0..self.vertices.len()).filter(|&i| (self.vertices[i][1] - x2).abs() <= tol).collect();
        v.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        v
    }

    /// Edges lying on the horizontal line x2, sorted by x1.
    pub fn line_edges(&self, x2: f64) -> Vec<usize> {
        let tol = self.tol();
        let mut e: Vec<usize> = (0..self.edges.len())
            .filter(|&i| {
                let [a, b] = self.edges[i].v;
                (self.vertices[a][1] - x2).abs() <= tol && (self.vertices[b][1] - x2).abs() <= tol
            })
            .collect();
        e.sort_by(|&a, &b| self.vertices[self.edges[a].v[0]][0].total_cmp(&self.vertices[self.edges[b].v[0]][0]));
        e
    }

    /// Red refinement: every edge is bisected, triangles and quads split in four.
    pub fn refine_uniform(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut out = Mesh::empty(self.period, (self.ambient_top, self.ambient_bottom));
        out.materials = self.materials.clone();
        out.x2_bottom = self.x2_bottom;
        out.x2_top = self.x2_top;
        let half = |g: &Vec<f64>| {
            let mut h = vec![g[0]];
            for w in g.windows(2) {
                h.push(0.5 * (w[0] + w[1]));
                h.push(w[1]);
            }
            h
        };
        out.pml_top = self.pml_top.as_ref().map(half);
        out.pml_bottom = self.pml_bottom.as_ref().map(half);
        out.vertices = self.vertices.clone();
        for e in &self.edges {
            let (p, q) = (self.vertices[e.v[0]], self.vertices[e.v[1]]);
            out.vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.v;
            let [mab, mbc, mca] = self.triangle_edges[t].map(|e| nv + e);
            let m = tri.material;
            out.triangles.extend([
                Triangle { v: [a, mab, mca], material: m },
                Triangle { v: [mab, b, mbc], material: m },
                Triangle { v: [mca, mbc, c], material: m },
                Triangle { v: [mab, mbc, mca], material: m },
            ]);
        }
        for (k, quad) in self.quads.iter().enumerate() {
            let [v0, v1, v2, v3] = quad.v;
            let [mb, mr, mt, ml] = self.quad_edges[k].map(|e| nv + e);
            let (p, q) = (self.vertices[v0], self.vertices[v2]);
            out.vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            let c = out.vertices.len() - 1;
            let (m, s) = (quad.material, quad.side);
            out.quads.extend([
                Quad { v: [v0, mb, c, ml], material: m, side: s },
                Quad { v: [mb, v1, mr, c], material: m, side: s },
                Quad { v: [c, mr, v2, mt], material: m, side: s },
                Quad { v: [ml, c, mt, v3], material: m, side: s },
            ]);
        }
        out.finalize().expect("refinement of a valid mesh is valid");
        out
    }

    /// Attach a strip of quads on the coupling boundary of `side`, with rows at
    /// distances `xi` from it. The strip material is the mesh's ambient medium there.
    pub fn extrude_pml(&self, side: Side, xi: &[f64]) -> Result<Mesh> {
        if xi.len() < 2 || xi[0] != 0.0 || xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Mesh("PML grid must start at 0 and increase strictly".into()));
        }
        if self.pml(side).is_some() {
            return Err(Error::Mesh(format!("PML already attached on {side:?}")));
        }
        let mut out = self.clone();
        let line = out.line_vertices(self.coupling_line(side));
        let material = out.material_id(self.ambient(side));
        let base = self.coupling_line(side);
        let mut rows = vec![line.clone()];
        for &x in &xi[1..] {
            let y = base + side.sign() * x;
            let row: Vec<usize> = line
                .iter()
                .map(|&v| {
                    out.vertices.push([self.vertices[v][0], y]);
                    out.vertices.len() - 1
                })
                .collect();
            rows.push(row);
        }
        for n in 0..xi.len() - 1 {
            let (near, far) = (&rows[n], &rows[n + 1]);
            let (lo, hi) = match side {
                Side::Top => (near, far),
                Side::Bottom => (far, near),
            };
            for i in 0..line.len() - 1 {
                out.quads.push(Quad { v: [lo[i], lo[i + 1], hi[i + 1], hi[i]], material, side });
            }
        }
        match side {
            Side::Top => out.pml_top = Some(xi.to_vec()),
            Side::Bottom => out.pml_bottom = Some(xi.to_vec()),
        }
        out.finalize()?;
        Ok(out)
    }

    /// Split an interior-only mesh along horizontal mesh lines. Pieces are
    /// returned top to bottom; interior cuts take the neighbouring material as ambient.
    pub fn split(&self, lines: &[f64]) -> Result<Vec<SubMesh>> {
        if self.pml_top.is_some() || self.pml_bottom.is_some() || !self.quads.is_empty() {
            return Err(Error::Mesh("split expects a mesh without PML strips".into()));
        }
        let tol = self.tol();
        let mut cuts: Vec<f64> = lines.to_vec();
        cuts.sort_by(|a, b| b.total_cmp(a));
        if cuts.iter().any(|&y| y <= self.x2_bottom + tol || y >= self.x2_top - tol) {
            return Err(Error::Mesh("split line outside the interior strip".into()));
        }
        let mut bounds = vec![self.x2_top];
        bounds.extend(cuts);
        bounds.push(self.x2_bottom);
        for &y in &bounds[1..bounds.len() - 1] {
            for t in &self.triangles {
                let above = t.v.iter().any(|&v| self.vertices[v][1] > y + tol);
                let below = t.v.iter().any(|&v| self.vertices[v][1] < y - tol);
                if above && below {
                    return Err(Error::Mesh(format!("split line x2 = {y} is not a mesh line")));
                }
            }
        }
        let centroid_y = |t: &Triangle| t.v.iter().map(|&v| self.vertices[v][1]).sum::<f64>() / 3.0;
        // material of the triangles touching line y with an edge, from the given half
        let touching = |y: f64, from_above: bool| -> Result<Material> {
            let mut mats: Vec<usize> = self
                .triangles
                .iter()
                .filter(|t| (centroid_y(t) > y) == from_above)
                .filter(|t| t.v.iter().filter(|&&v| (self.vertices[v][1] - y).abs() <= tol).count() == 2)
                .map(|t| t.material)
                .collect();
            mats.sort_unstable();
            mats.dedup();
            match mats.as_slice() {
                [m] => Ok(self.materials[*m]),
                _ => Err(Error::Mesh(format!(
                    "material along split line x2 = {y} is not homogeneous"
                ))),
            }
        };
        let mut pieces = vec![];
        for p in 0..bounds.len() - 1 {
            let (hi, lo) = (bounds[p], bounds[p + 1]);
            let ambient_top = if p == 0 { self.ambient_top } else { touching(hi, true)? };
            let ambient_bottom =
                if p + 2 == bounds.len() { self.ambient_bottom } else { touching(lo, false)? };
            let parent_triangle: Vec<usize> = (0..self.triangles.len())
                .filter(|&t| {
                    let c = centroid_y(&self.triangles[t]);
                    c < hi && c > lo
                })
                .collect();
            let mut used = vec![false; self.vertices.len()];
            for &t in &parent_triangle {
                for &v in &self.triangles[t].v {
                    used[v] = true;
                }
            }
            let parent_vertex: Vec<usize> = (0..self.vertices.len()).filter(|&v| used[v]).collect();
            let mut local = vec![usize::MAX; self.vertices.len()];
            for (i, &v) in parent_vertex.iter().enumerate() {
                local[v] = i;
            }
            let mut mesh = Mesh::empty(self.period, (ambient_top, ambient_bottom));
            mesh.x2_top = hi;
            mesh.x2_bottom = lo;
            mesh.vertices = parent_vertex.iter().map(|&v| self.vertices[v]).collect();
            for &t in &parent_triangle {
                let tri = self.triangles[t];
                let material = mesh.material_id(self.materials[tri.material]);
                mesh.triangles.push(Triangle { v: tri.v.map(|v| local[v]), material });
            }
            mesh.finalize()?;
            pieces.push(SubMesh { mesh, parent_vertex, parent_triangle });
        }
        Ok(pieces)
    }

    /// Plain-text dump: vertices, triangles, quads and tagged edges.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "period {}", self.period)?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(w, "{:.17e} {:.17e}", v[0], v[1])?;
        }
        writeln!(w, "materials {}", self.materials.len())?;
        for m in &self.materials {
            writeln!(w, "{} {} {} {}", m.eps.re, m.eps.im, m.mu.re, m.mu.im)?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for t in &self.triangles {
            writeln!(w, "{} {} {} {}", t.v[0], t.v[1], t.v[2], t.material)?;
        }
        writeln!(w, "quads {}", self.quads.len())?;
        for q in &self.quads {
            writeln!(w, "{} {} {} {} {} {:?}", q.v[0], q.v[1], q.v[2], q.v[3], q.material, q.side)?;
        }
        let tagged: Vec<&Edge> = self.edges.iter().filter(|e| !e.tags.is_empty()).collect();
        writeln!(w, "tagged_edges {}", tagged.len())?;
        for e in tagged {
            let tags: Vec<String> = e.tags.iter().map(|t| format!("{t:?}")).collect();
            writeln!(w, "{} {} {}", e.v[0], e.v[1], tags.join(","))?;
        }
        Ok(())
    }
}

impl PeriodicGeometry {
    fn ambient_top_bottom(&self) -> (Material, Material) {
        (self.ambient_above, self.ambient_below)
    }
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Inclusion;

    fn slab_geometry() -> PeriodicGeometry {
        PeriodicGeometry::layered(
            1.0,
            0.0,
            &[(0.5, Material::from_index(1.5)), (0.5, Material::vacuum())],
            Material::from_index(1.5),
            Material::vacuum(),
        )
    }

    #[test]
    fn empty_geometry_is_structured_and_periodic() {
        let g = PeriodicGeometry::layered(1.0, 0.0, &[(1.0, Material::vacuum())], Material::vacuum(), Material::vacuum());
        let m = Mesh::build(&g, 4, 1.0).unwrap();
        // h ≤ 1/(4√2) → 6 cells per direction
        assert_eq!(m.vertices.len(), 49);
        assert_eq!(m.triangles.len(), 72);
        assert!(m.edges.iter().filter(|e| e.has_tag(EdgeTag::PeriodicLeft)).count() == 6);
        for t in 0..m.triangles.len() {
            assert!(m.triangle_diameter(t) <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn slab_interface_is_mesh_line() {
        let m = Mesh::build(&slab_geometry(), 6, 1.0).unwrap();
        assert!(!m.line_edges(0.5).is_empty());
        assert!(m.edges.iter().any(|e| matches!(e.tags.as_slice(), [EdgeTag::Interface(_, _)])));
        let exact = 0.5 * 2.25 + 0.5;
        assert!((m.integrate_eps().re - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn single_triangle_refinement() {
        let mut m = Mesh::empty(1.0, (Material::vacuum(), Material::vacuum()));
        m.vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        m.materials.push(Material::vacuum());
        m.triangles.push(Triangle { v: [0, 1, 2], material: 0 });
        m.triangles.push(Triangle { v: [0, 2, 3], material: 0 });
        m.x2_top = 1.0;
        m.finalize().unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.triangles.len(), 8);
        // children of the first triangle come first
        let area: f64 = (0..4).map(|t| r.triangle_area(t)).sum();
        assert!((area - 0.5).abs() < 1e-15);
        for t in 0..4 {
            assert!((r.triangle_area(t) - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn refinement_counts() {
        let m = Mesh::build(&slab_geometry(), 4, 1.0).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.vertices.len(), m.vertices.len() + m.edges.len());
        assert_eq!(r.triangles.len(), 4 * m.triangles.len());
    }

    #[test]
    fn pml_extrusion_rows() {
        let m = Mesh::build(&slab_geometry(), 4, 1.0).unwrap();
        let cols = m.line_vertices(1.0).len() - 1;
        let single = m.extrude_pml(Side::Top, &[0.0, 0.1]).unwrap();
        assert_eq!(single.quads.len(), cols);
        let two = single.extrude_pml(Side::Bottom, &[0.0, 0.1, 0.3]).unwrap();
        assert_eq!(two.quads.len(), 3 * cols);
        assert_eq!(two.edges.iter().filter(|e| e.has_tag(EdgeTag::PmlEnd)).count(), 2 * cols);
        assert!(m.extrude_pml(Side::Top, &[0.0, 0.2, 0.1]).is_err());
    }

    #[test]
    fn split_pieces_cover_parent() {
        let g = slab_geometry().with_inclusion(Inclusion {
            x1_lo: 0.25,
            x1_hi: 0.75,
            x2_lo: 0.1,
            x2_hi: 0.3,
            material: Material::dielectric(3.0),
        });
        let m = Mesh::build_with_lines(&g, 4, 1.0, &[0.7]).unwrap();
        let parts = m.split(&[0.5]).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].mesh.triangles.len() + parts[1].mesh.triangles.len(), m.triangles.len());
        assert_eq!(parts[0].mesh.ambient_bottom, Material::from_index(1.5));
        assert_eq!(parts[1].mesh.ambient_top, Material::vacuum());
        assert!(m.split(&[0.45]).is_err() || m.line_edges(0.45).len() > 0);
    }
}
