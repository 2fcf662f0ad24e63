mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::c;
use conical_dd::fem::adaptive::{assemble, attach_pml, solve_problem, solve_with_grid, Phase};
use conical_dd::fem::basis::quad_points;
use conical_dd::fem::boundary::{BoundaryData, FieldSum, NoField};
use conical_dd::fem::field::interpolate;
use conical_dd::fem::{Entity, FeSpace, FemProblem, FemSolution};
use conical_dd::geometry::{Inclusion, Material, Mesh, PeriodicGeometry, Side};
use conical_dd::modes::IncidentWave;
use conical_dd::pml::{generate_grid, PmlConfig};
use conical_dd::C64;

fn vacuum_strip(ppw: usize) -> Mesh {
    let vac = Material::vacuum();
    Mesh::build(&PeriodicGeometry::layered(1.0, 0.0, &[(1.0, vac)], vac, vac), ppw, 1.0).unwrap()
}

fn incident() -> IncidentWave {
    IncidentWave::from_angles(1.0, 35.0, 40.0, false, Material::vacuum(), c(1.0, 0.0), c(0.3, 0.5)).unwrap()
}

fn phase(inc: &IncidentWave) -> Phase {
    Phase { k1: inc.k[0], k3: inc.k[2], omega: inc.omega }
}

fn count(space: &FeSpace) -> (usize, usize) {
    let edges = space.dofs.iter().filter(|d| matches!(d, Entity::Edge(_))).count();
    (edges, space.dofs.len() - edges)
}

#[test]
fn half_period_bloch_factor_keeps_symmetry() {
    let mesh = attach_pml(&vacuum_strip(6), &[0.0, 0.2, 0.5]).unwrap();
    let p = assemble(mesh, Phase { k1: PI, k3: 0.7, omega: 2.0 * PI }, c(1.0, 1.0)).unwrap();
    assert!((p.space.bloch - c(-1.0, 0.0)).norm() < 1e-15);
    assert!(p.system.symmetry_defect() <= 1e-12 * p.system.norm_inf());
}

#[test]
fn general_bloch_factor_is_hermitian_in_the_identification() {
    // entries coupling left and right boundary are multiplied by c̄·c', so the
    // matrix is symmetric up to the Bloch phase and not in general
    let mesh = attach_pml(&vacuum_strip(6), &[0.0, 0.2]).unwrap();
    let p = assemble(mesh, Phase { k1: 1.1, k3: 0.0, omega: 2.0 * PI }, c(1.0, 1.0)).unwrap();
    assert!((p.space.bloch.norm() - 1.0).abs() < 1e-15);
    assert!(p.system.symmetry_defect() > 1e-6 * p.system.norm_inf());
}

#[test]
fn euler_count_of_dofs() {
    // periodic strip is a cylinder: V − E + F = 0 before the outer Dirichlet lines
    // remove equally many vertices and edges
    for xi in [vec![0.0, 0.3], vec![0.0, 0.3, 0.7, 1.4]] {
        let mesh = attach_pml(&vacuum_strip(5), &xi).unwrap();
        let f = mesh.n_elements();
        let space = FeSpace::new(Arc::new(mesh), 1, 0.4).unwrap();
        let (e, v) = count(&space);
        assert_eq!(e - v, f);
    }
}

#[test]
fn pml_row_dof_increments() {
    let interior = vacuum_strip(5);
    let nx = interior.line_edges(interior.x2_top).len();
    let n = |xi: &[f64]| FeSpace::new(Arc::new(attach_pml(&interior, xi).unwrap()), 1, 0.0).unwrap().n_dofs();
    let one = n(&[0.0, 0.2]);
    let two = n(&[0.0, 0.2, 0.5]);
    let three = n(&[0.0, 0.2, 0.5, 0.9]);
    // each row adds vertical edges; rows beyond the first also free a line
    assert_eq!(two - one, 2 * 3 * nx);
    assert_eq!(three - two, 2 * 3 * nx);
    let (e, v) = count(&FeSpace::new(Arc::new(attach_pml(&interior, &[0.0, 0.2]).unwrap()), 1, 0.0).unwrap());
    assert_eq!(e + v, one);
}

#[test]
fn real_stretch_is_a_coordinate_change() {
    // γ = 2 on ξ-grid equals γ = 1 on the doubled grid, up to the scaling of
    // the vertical edge moments in the strips; interior fields coincide
    let inc = incident();
    let interior = vacuum_strip(5);
    let xi = [0.0, 0.1, 0.25, 0.4];
    let a = assemble(attach_pml(&interior, &xi).unwrap(), phase(&inc), c(2.0, 0.0)).unwrap();
    let b = assemble(attach_pml(&interior, &xi.map(|x| 2.0 * x)).unwrap(), phase(&inc), c(1.0, 0.0)).unwrap();
    assert_eq!(a.n_dofs(), b.n_dofs());
    assert_eq!(a.a_int, b.a_int);
    for side in [Side::Top, Side::Bottom] {
        assert_eq!(a.a_pml(side).nnz(), b.a_pml(side).nnz());
    }
    let sa = solve_problem(a, &inc, &NoField).unwrap();
    let sb = solve_problem(b, &inc, &NoField).unwrap();
    let ea = sa.solution.l2_error(&NoField);
    let d: Vec<C64> = sa.solution.u.iter().zip(&sb.solution.u).map(|(x, y)| x - y).collect();
    let ed = FemSolution::new(Arc::clone(&sa.solution.problem), d).l2_error(&NoField);
    assert!(ed.e12.hypot(ed.e3) <= 1e-10 * ea.e12.hypot(ea.e3), "{ed:?}");
}

#[test]
fn quadrature_doubling_is_exact_for_bilinear_products() {
    let (lo, hi) = ([0.2, -0.3], [0.45, 0.1]);
    let integrate = |n: usize| {
        let mut m = [[0.0; 8]; 8];
        for p in quad_points(lo, hi, n) {
            let mut v = [[0.0; 2]; 8];
            for (i, e) in p.edges.iter().enumerate() {
                v[i] = e.w;
            }
            for (i, nd) in p.nodes.iter().enumerate() {
                v[4 + i] = [nd.lam, nd.grad[0] * nd.grad[1]];
            }
            for i in 0..8 {
                for j in 0..8 {
                    m[i][j] += p.weight * (v[i][0] * v[j][0] + v[i][1] * v[j][1]);
                }
            }
        }
        m
    };
    let (a, b) = (integrate(3), integrate(6));
    for i in 0..8 {
        for j in 0..8 {
            assert!((a[i][j] - b[i][j]).abs() < 1e-13 * a[i][j].abs().max(1e-3), "{i},{j}: {} {}", a[i][j], b[i][j]);
        }
    }
}

#[test]
fn zero_area_triangle_is_rejected() {
    let mut mesh = vacuum_strip(4);
    let t = mesh.triangles[0].v;
    mesh.triangles[0].v = [t[0], t[1], t[0]];
    assert!(mesh.finalize().is_err());
}

#[test]
fn zero_stretch_is_rejected() {
    let mesh = attach_pml(&vacuum_strip(4), &[0.0, 0.2]).unwrap();
    assert!(assemble(mesh, Phase { k1: 0.0, k3: 0.0, omega: 1.0 }, c(0.0, 0.0)).is_err());
}

#[test]
fn boundary_data_needs_a_pml() {
    let space = FeSpace::new(Arc::new(vacuum_strip(4)), 1, 0.0).unwrap();
    assert!(BoundaryData::from_field(&space, Side::Top, &incident()).is_err());
    assert!(FeSpace::new(Arc::new(vacuum_strip(4)), 2, 0.0).is_err());
}

fn problem_for(inc: &IncidentWave, ppw: usize) -> Arc<FemProblem> {
    let mesh = vacuum_strip(ppw);
    let grid = generate_grid(&PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1));
    assemble(attach_pml(&mesh, &grid.xi).unwrap(), phase(inc), grid.gamma).unwrap()
}

#[test]
fn right_hand_side_is_linear_and_vanishes_without_excitation() {
    let inc = incident();
    let other = IncidentWave::from_angles(1.0, 35.0, 40.0, false, Material::vacuum(), c(0.0, 1.0), c(-1.0, 0.0)).unwrap();
    let p = problem_for(&inc, 5);
    let rhs = |f: &dyn conical_dd::fem::ExteriorField| BoundaryData::from_field(&p.space, Side::Top, f).unwrap().rhs(&p).unwrap();
    let (ra, rb) = (rhs(&inc), rhs(&other));
    let scaled = inc.scaled(c(2.0, -1.0));
    let rs = rhs(&FieldSum(vec![&scaled, &other]));
    for i in 0..ra.len() {
        assert!((rs[i] - (ra[i] * c(2.0, -1.0) + rb[i])).norm() <= 1e-12 * (1.0 + rs[i].norm()));
    }
    assert!(rhs(&NoField).iter().all(|z| *z == c(0.0, 0.0)));
    let s = solve_problem(Arc::clone(&p), &NoField, &NoField).unwrap();
    assert!(s.solution.u.iter().all(|z| *z == c(0.0, 0.0)));
}

#[test]
fn neumann_data_of_the_neighbour_is_consistent() {
    // ν from the exterior field against ν = (A_int Iu)_Γ from a strip below
    // carrying the interpolant of the same plane wave
    let inc = incident();
    let vac = Material::vacuum();
    let mut diffs = vec![];
    for ppw in [6, 12, 24] {
        let upper = problem_for(&inc, ppw);
        let lower_mesh = Mesh::build(&PeriodicGeometry::layered(1.0, -1.0, &[(1.0, vac)], vac, vac), ppw, 1.0).unwrap();
        let lower = assemble(attach_pml(&lower_mesh, &[0.0, 0.1]).unwrap(), phase(&inc), c(1.0, 1.0)).unwrap();
        let iu = interpolate(&lower.space, &inc);
        let from_nb = BoundaryData::from_neighbour(&lower, &iu, Side::Top).unwrap();
        let exact = BoundaryData::from_field(&upper.space, Side::Bottom, &inc).unwrap();
        let pi_d: f64 = exact.pi.iter().zip(&from_nb.pi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(pi_d < 1e-12, "{pi_d}");
        let n = exact.nu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let d = exact.nu.iter().zip(&from_nb.nu).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        diffs.push(d / n);
    }
    assert!(diffs[2] < 0.05, "{diffs:?}");
    assert!(diffs[0] / diffs[1] > 1.8 && diffs[1] / diffs[2] > 1.8, "{diffs:?}");
}

#[test]
fn plane_wave_convergence() {
    let inc = incident();
    let mut mesh = vacuum_strip(4);
    let grid = generate_grid(&PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1));
    let mut disc = vec![];
    let mut l2 = vec![];
    for _ in 0..3 {
        let s = solve_with_grid(&mesh, &grid, phase(&inc), &inc, &inc).unwrap();
        let sol = &s.solution;
        let pi = interpolate(&sol.problem.space, &inc);
        let d: Vec<C64> = sol.u.iter().zip(&pi).map(|(a, b)| a - b).collect();
        let e = FemSolution::new(Arc::clone(&sol.problem), d).l2_error(&NoField);
        let pml = sol.pml_norm(&s.top).max(sol.pml_norm(&s.bottom));
        assert!(pml <= e.e12.hypot(e.e3), "pml {pml}");
        disc.push(e.e12.hypot(e.e3));
        l2.push(sol.l2_error(&inc).relative());
        mesh = mesh.refine_uniform();
    }
    for w in disc.windows(2) {
        assert!(w[0] / w[1] > 3.0, "{disc:?}");
    }
    for w in l2.windows(2) {
        assert!(w[0] / w[1] > 1.8, "{l2:?}");
    }
}

#[test]
fn discrete_field_is_quasi_periodic() {
    let inc = incident();
    let p = problem_for(&inc, 6);
    let s = solve_problem(p, &inc, &NoField).unwrap();
    let f = C64::new(0.0, inc.k[0]).exp();
    for (x1, x2) in [(0.13, 0.2), (0.77, 0.9), (0.5, 0.5)] {
        let (a, ca) = s.solution.eval(x1, x2).unwrap();
        let (b, cb) = s.solution.eval(x1 + 1.0, x2).unwrap();
        for i in 0..3 {
            assert!((b[i] - a[i] * f).norm() < 1e-12 * (1.0 + a[i].norm()));
            assert!((cb[i] - ca[i] * f).norm() < 1e-10 * (1.0 + ca[i].norm()));
        }
    }
    assert!(s.solution.eval(0.5, 1.5).is_none());
}

#[test]
fn mirrored_grating_mirrors_the_orders() {
    use conical_dd::postproc::outgoing_amplitudes;
    use conical_dd::modes::ModeRange;
    let vac = Material::vacuum();
    let glass = Material::dielectric(2.25);
    let geom = PeriodicGeometry::layered(1.5, 0.0, &[(1.0, vac)], vac, vac)
        .with_inclusion(Inclusion { x1_lo: 0.45, x1_hi: 1.05, x2_lo: 0.25, x2_hi: 0.75, material: glass });
    let power = |phi: f64| {
        let inc = IncidentWave::from_angles(1.0, 30.0, phi, false, vac, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let mesh = Mesh::build(&geom, 12, 1.0).unwrap();
        let grid = generate_grid(&PmlConfig::defaults(inc.omega, mesh.h_max_boundary, 1));
        let s = solve_with_grid(&mesh, &grid, phase(&inc), &inc, &NoField).unwrap();
        let (amps, _) = outgoing_amplitudes(&s.solution, Side::Top, &inc, vac, ModeRange::new(-1, 1)).unwrap();
        [-1, 0, 1].map(|n| amps.up(n).iter().map(|z| z.norm_sqr()).sum::<f64>())
    };
    // φ → 180° − φ flips k1; the structure is symmetric about x1 = 0.75
    let (a, b) = (power(20.0), power(160.0));
    let scale = a.iter().sum::<f64>();
    assert!(scale > 1e-3);
    for (i, j) in [(0, 2), (1, 1), (2, 0)] {
        assert!((a[i] - b[j]).abs() < 0.03 * scale, "{a:?} {b:?}");
    }
}

// Discrete gradients lie in the kernel of the curl part: with ω = 0 the
// system annihilates E = ∇φ + i k3 φ e3 for any nodal φ.
fn gradient_residual(k3: f64, k1: f64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mesh = attach_pml(&vacuum_strip(5), &[0.0, 0.2, 0.5]).unwrap();
    let p = assemble(mesh, Phase { k1, k3, omega: 0.0 }, c(1.0, 0.0)).unwrap();
    let space = &p.space;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let phi: Vec<C64> = (0..p.n_dofs()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let node = |v: usize| space.node_map[v].map_or(c(0.0, 0.0), |(d, cf)| cf * phi[d]);
    let x: Vec<C64> = space
        .dofs
        .iter()
        .enumerate()
        .map(|(d, e)| match *e {
            Entity::Edge(e) => {
                let [a, b] = space.mesh.edges[e].v;
                node(b) - node(a)
            }
            Entity::Node(_) => k3 * phi[d],
        })
        .collect();
    let r = p.system.mul_vec(&x).unwrap();
    let rn: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let xn: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    rn / (p.system.norm_inf() * xn)
}

#[test]
fn gradients_are_in_the_kernel() {
    for (k3, k1) in [(0.0, 0.0), (1.7, 0.0), (0.9, 2.3)] {
        let r = gradient_residual(k3, k1);
        assert!(r < 1e-14, "k3 {k3} k1 {k1}: {r:e}");
    }
}
