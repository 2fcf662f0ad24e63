//! Lowest-order element basis: Whitney / rectangular Nédélec edge functions for
//! (E1, E2) and P1 / Q1 nodal functions for E3.

use super::quadrature::{gauss_legendre, triangle_rule};

/// Edge function w with the two partial derivatives entering curl₃.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeEval {
    pub w: [f64; 2],
    pub d1w2: f64,
    pub d2w1: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NodeEval {
    pub lam: f64,
    pub grad: [f64; 2],
}

/// Basis values at one quadrature point of an element.
#[derive(Debug, Clone)]
pub struct PointEval<const NE: usize> {
    pub x: [f64; 2],
    pub weight: f64,
    pub edges: [EdgeEval; NE],
    pub nodes: [NodeEval; NE],
}

pub type TriPoint = PointEval<3>;
pub type QuadPoint = PointEval<4>;

/// Barycentric gradients and area of a counter-clockwise triangle.
pub fn barycentric(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let g = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)]
    };
    ([g(0), g(1), g(2)], area)
}

/// Triangle basis at barycentric point `l`; `edge_dirs[k]` = (a, b) local vertex
/// indices of edge k in its global orientation.
pub fn triangle_eval(grads: &[[f64; 2]; 3], edge_dirs: &[(usize, usize); 3], l: [f64; 3]) -> ([EdgeEval; 3], [NodeEval; 3]) {
    let mut edges = [EdgeEval::default(); 3];
    for (k, &(a, b)) in edge_dirs.iter().enumerate() {
        let (ga, gb) = (grads[a], grads[b]);
        edges[k] = EdgeEval {
            w: [l[a] * gb[0] - l[b] * ga[0], l[a] * gb[1] - l[b] * ga[1]],
            d1w2: ga[0] * gb[1] - gb[0] * ga[1],
            d2w1: ga[1] * gb[0] - gb[1] * ga[0],
        };
    }
    let nodes = [0, 1, 2].map(|i| NodeEval { lam: l[i], grad: grads[i] });
    (edges, nodes)
}

/// Quadrature points of a triangle with the degree-5 rule.
pub fn triangle_points(p: [[f64; 2]; 3], edge_dirs: &[(usize, usize); 3]) -> Vec<TriPoint> {
    let (grads, area) = barycentric(p);
    triangle_rule()
        .iter()
        .map(|&(l, w)| {
            let (edges, nodes) = triangle_eval(&grads, edge_dirs, l);
            let x = [0, 1].map(|c| l[0] * p[0][c] + l[1] * p[1][c] + l[2] * p[2][c]);
            PointEval { x, weight: w * area, edges, nodes }
        })
        .collect()
}

/// Rectangle [x0,x1]×[y0,y1] basis at (x, y); edges bottom, right, top, left and
/// nodes bottom-left, bottom-right, top-right, top-left.
pub fn quad_eval(lo: [f64; 2], hi: [f64; 2], x: [f64; 2]) -> ([EdgeEval; 4], [NodeEval; 4]) {
    let (hx, hy) = (hi[0] - lo[0], hi[1] - lo[1]);
    let a = 1.0 / (hx * hy);
    let (s, t) = ((x[0] - lo[0]) / hx, (x[1] - lo[1]) / hy);
    let edges = [
        EdgeEval { w: [(1.0 - t) / hx, 0.0], d1w2: 0.0, d2w1: -a },
        EdgeEval { w: [0.0, s / hy], d1w2: a, d2w1: 0.0 },
        EdgeEval { w: [t / hx, 0.0], d1w2: 0.0, d2w1: a },
        EdgeEval { w: [0.0, (1.0 - s) / hy], d1w2: -a, d2w1: 0.0 },
    ];
    let nodes = [
        NodeEval { lam: (1.0 - s) * (1.0 - t), grad: [-(1.0 - t) / hx, -(1.0 - s) / hy] },
        NodeEval { lam: s * (1.0 - t), grad: [(1.0 - t) / hx, -s / hy] },
        NodeEval { lam: s * t, grad: [t / hx, s / hy] },
        NodeEval { lam: (1.0 - s) * t, grad: [-t / hx, (1.0 - s) / hy] },
    ];
    (edges, nodes)
}

/// Tensor Gauss points (n per direction) of a rectangle.
pub fn quad_points(lo: [f64; 2], hi: [f64; 2], n: usize) -> Vec<QuadPoint> {
    let g = gauss_legendre(n);
    let (hx, hy) = (hi[0] - lo[0], hi[1] - lo[1]);
    let mut out = Vec::with_capacity(n * n);
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            let x = [lo[0] + u * hx, lo[1] + v * hy];
            let (edges, nodes) = quad_eval(lo, hi, x);
            out.push(PointEval { x, weight: wu * wv * hx * hy, edges, nodes });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whitney_tangential_moments() {
        let p = [[0.0, 0.0], [2.0, 0.5], [0.3, 1.0]];
        let dirs = [(0, 1), (1, 2), (2, 0)];
        let (g, _) = barycentric(p);
        for (k, &(a, b)) in dirs.iter().enumerate() {
            for (m, &(c, d)) in dirs.iter().enumerate() {
                // ∫_edge w_k · t, midpoint rule is exact (w·t is constant on an edge)
                let mut l = [0.0; 3];
                l[c] = 0.5;
                l[d] = 0.5;
                let (e, _) = triangle_eval(&g, &dirs, l);
                let t = [p[d][0] - p[c][0], p[d][1] - p[c][1]];
                let moment = e[k].w[0] * t[0] + e[k].w[1] * t[1];
                let expect = if k == m { 1.0 } else { 0.0 };
                assert!((moment - expect).abs() < 1e-14, "{k} {m} {a}{b}");
            }
        }
    }

    #[test]
    fn quad_tangential_moments() {
        let (lo, hi) = ([0.5, 1.0], [0.8, 1.4]);
        let mids = [[0.65, 1.0], [0.8, 1.2], [0.65, 1.4], [0.5, 1.2]];
        let tangents = [[0.3, 0.0], [0.0, 0.4], [0.3, 0.0], [0.0, 0.4]];
        for k in 0..4 {
            for m in 0..4 {
                let (e, _) = quad_eval(lo, hi, mids[m]);
                let moment = e[k].w[0] * tangents[m][0] + e[k].w[1] * tangents[m][1];
                let expect = if k == m { 1.0 } else { 0.0 };
                assert!((moment - expect).abs() < 1e-14);
            }
        }
    }
}
