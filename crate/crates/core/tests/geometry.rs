use conical_dd::geometry::{Inclusion, Material, Mesh, PeriodicGeometry, Side};
use conical_dd::C64;
use proptest::prelude::*;

fn geometry(period: f64, t: [f64; 3], eps: [f64; 3], inc: Option<(f64, f64, f64, f64)>) -> PeriodicGeometry {
    let d = Material::dielectric;
    let g = PeriodicGeometry::layered(period, -t[0], &[(t[0], d(eps[0])), (t[1], d(eps[1])), (t[2], Material::vacuum())], d(eps[0]), Material::vacuum());
    match inc {
        Some((x0, w, y0, h)) => g.with_inclusion(Inclusion {
            x1_lo: x0 * period,
            x1_hi: (x0 + w) * period,
            x2_lo: -t[0] + y0 * (t[0] + t[1]),
            x2_hi: -t[0] + (y0 + h) * (t[0] + t[1]),
            material: d(eps[2]),
        }),
        None => g,
    }
}

fn check_mesh(g: &PeriodicGeometry, m: &Mesh) -> Result<(), TestCaseError> {
    let area: f64 = (0..m.triangles.len()).map(|t| m.triangle_area(t)).sum();
    let height = g.x2_plus - g.x2_minus;
    prop_assert!((area - g.period * height).abs() <= 1e-12 * g.period * height);
    let (a, b) = (m.integrate_eps(), g.integrate_eps());
    prop_assert!((a - b).norm() <= 1e-11 * b.norm(), "{a} vs {b}");
    for (t, tri) in m.triangles.iter().enumerate() {
        prop_assert!(m.triangle_area(t) > 0.0);
        let p = tri.v.map(|v| m.vertices[v]);
        let cx = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
        let cy = (p[0][1] + p[1][1] + p[2][1]) / 3.0;
        prop_assert_eq!(m.materials[tri.material], g.material_at(cx, cy));
    }
    // periodic: left and right boundary vertices pair up in x2
    let mut left: Vec<f64> = m.vertices.iter().filter(|v| v[0].abs() < 1e-12).map(|v| v[1]).collect();
    let mut right: Vec<f64> = m.vertices.iter().filter(|v| (v[0] - g.period).abs() < 1e-12).map(|v| v[1]).collect();
    left.sort_by(f64::total_cmp);
    right.sort_by(f64::total_cmp);
    prop_assert_eq!(left, right);
    // conformity: every edge is used by one or two elements, and two unless on the boundary
    let mut uses = vec![0usize; m.edges.len()];
    for es in &m.triangle_edges {
        for &e in es {
            uses[e] += 1;
        }
    }
    for (e, &u) in uses.iter().enumerate() {
        let [p, q] = m.edges[e].v.map(|v| m.vertices[v]);
        let vertical_boundary = (p[0] - q[0]).abs() < 1e-12 && (p[0].abs() < 1e-12 || (p[0] - g.period).abs() < 1e-12);
        let horizontal_boundary = (p[1] - q[1]).abs() < 1e-12 && ((p[1] - g.x2_minus).abs() < 1e-12 || (p[1] - g.x2_plus).abs() < 1e-12);
        prop_assert_eq!(u, if vertical_boundary || horizontal_boundary { 1 } else { 2 });
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn meshes_conform_to_the_geometry(
        period in 0.5f64..2.0,
        t in (0.1f64..0.6, 0.1f64..0.6, 0.1f64..0.6),
        eps in (1.0f64..4.0, 1.0f64..4.0, 1.0f64..4.0),
        inc in proptest::option::of((0.05f64..0.45, 0.1f64..0.5, 0.05f64..0.4, 0.1f64..0.5)),
        ppw in 3usize..7,
    ) {
        let g = geometry(period, [t.0, t.1, t.2], [eps.0, eps.1, eps.2], inc);
        g.validate().unwrap();
        let m = Mesh::build(&g, ppw, 1.0).unwrap();
        check_mesh(&g, &m)?;
        let r = m.refine_uniform();
        prop_assert_eq!(r.triangles.len(), 4 * m.triangles.len());
        check_mesh(&g, &r)?;
        prop_assert!(r.h_max_boundary <= 0.5 * m.h_max_boundary + 1e-12);
    }

    #[test]
    fn splitting_partitions_the_triangles(cut in 0.05f64..0.95, ppw in 3usize..6) {
        let g = geometry(1.0, [0.4, 0.4, 0.4], [2.0, 1.5, 3.0], None);
        let y = -0.4 + cut * 1.2;
        let m = Mesh::build_with_lines(&g, ppw, 1.0, &[y]).unwrap();
        let parts = m.split(&[y]).unwrap();
        prop_assert_eq!(parts.len(), 2);
        let mut seen = vec![false; m.triangles.len()];
        for p in &parts {
            for &t in &p.parent_triangle {
                prop_assert!(!seen[t]);
                seen[t] = true;
            }
            let eps: C64 = p.mesh.integrate_eps();
            prop_assert!(eps.norm() > 0.0);
        }
        prop_assert!(seen.iter().all(|&s| s));
        prop_assert!((parts[0].mesh.coupling_line(Side::Bottom) - y).abs() < 1e-12);
        prop_assert!((parts[1].mesh.coupling_line(Side::Top) - y).abs() < 1e-12);
    }
}

#[test]
fn invalid_geometries() {
    let vac = Material::vacuum();
    assert!(PeriodicGeometry::layered(0.0, 0.0, &[(1.0, vac)], vac, vac).validate().is_err());
    assert!(PeriodicGeometry::layered(1.0, 0.0, &[], vac, vac).validate().is_err());
    let g = PeriodicGeometry::layered(1.0, 0.0, &[(1.0, vac)], vac, vac)
        .with_inclusion(Inclusion { x1_lo: 0.2, x1_hi: 0.5, x2_lo: 0.5, x2_hi: 1.5, material: vac });
    assert!(g.validate().is_err());
}
