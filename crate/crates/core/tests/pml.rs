mod common;

use std::f64::consts::PI;

use common::grids::{GRID_A, GRID_B, GRID_C};
use conical_dd::pml::{adapt, cutoff_kappa, generate_grid, step, PmlConfig, PmlTrial};
use proptest::prelude::*;

fn cfg(epsilon: f64, sigma: f64, h_int: f64, n_pw: usize, kappa_min: f64) -> PmlConfig {
    PmlConfig { sigma, epsilon, h_int, kappa_min, n_pw, xi_max: 1e300 }
}

#[test]
fn hand_executed_grids() {
    for (c, expected) in [
        (cfg(1e-6, 1.0, 0.1, 5, 1.0), &GRID_A[..]),
        (cfg(1e-3, 2.0, 0.25, 8, 0.5), &GRID_B[..]),
        (cfg(1e-6, 1.0, 0.5, 4, 2.0), &GRID_C[..]),
    ] {
        let g = generate_grid(&c);
        assert_eq!(g.xi.len(), expected.len());
        assert_eq!(g.xi, expected);
    }
}

#[test]
fn cutoff_examples() {
    assert!((cutoff_kappa(1e-6, 2.0).unwrap() - 6.0 * 10f64.ln() / 2.0).abs() < 1e-12);
    let a = cutoff_kappa(1e-4, 1.3).unwrap();
    let b = cutoff_kappa(1e-4, 2.6).unwrap();
    assert!((a - 2.0 * b).abs() < 1e-14);
}

#[test]
fn anomaly_scaling_law() {
    let base = cfg(1e-6, 1.0, 0.05, 8, 1.0);
    let lne = -base.epsilon.ln();
    let n_ref = generate_grid(&PmlConfig { kappa_min: 1e-1, ..base }).rows() as f64;
    let mut c_max: f64 = 0.0;
    for e in 0..=16 {
        let kappa = 1e-1 * 10f64.powf(-e as f64 / 4.0);
        let g = generate_grid(&PmlConfig { kappa_min: kappa, ..base });
        let scaled = g.thickness() * kappa * base.sigma / lne;
        assert!((0.5..=2.0).contains(&scaled), "kappa {kappa}: {scaled}");
        if e > 0 {
            c_max = c_max.max((g.rows() as f64 - n_ref) / (1e-1 / kappa).log2());
        }
    }
    // rows grow by a bounded amount per halving of kappa_min
    assert!(c_max < 15.0, "{c_max}");
}

#[test]
fn adapt_halves_once_for_exponential_tail() {
    // field e^{-κξ} with κ just below the initial κ_min: the first grid ends at
    // ξ_N ≈ −ln ε/κ_min where the tail is above ε
    let c = cfg(1e-6, 1.0, 0.1, 8, 1.0);
    let kappa = 0.9;
    let out = adapt(&c, |g| {
        let xi = g.thickness();
        Ok(PmlTrial { field: (), tail_norm: (-kappa * xi).exp(), total_norm: 1.0 })
    })
    .unwrap();
    assert!(out.converged);
    assert_eq!(out.history.len(), 2);
    assert!((out.history[1].kappa_min - 0.5).abs() < 1e-15);
}

#[test]
fn undamped_mode_hits_the_cap() {
    let c = PmlConfig { xi_max: 1e4, ..cfg(1e-6, 1.0, 0.1, 8, 1.0) };
    let out = adapt(&c, |_| Ok(PmlTrial { field: (), tail_norm: 1.0, total_norm: 1.0 })).unwrap();
    assert!(!out.converged);
    assert!(out.diagnostic.is_some());
    assert!(out.grid.thickness() > 1e4);
}

#[test]
fn damping_bound_for_stretched_mode() {
    // mode e^{i k ξ γ}, γ = 1 + iσ: |.| = e^{-σ k ξ}; κ = σ k ≥ σ κ_min
    for kmin in [0.3, 1.0, 4.0] {
        let c = cfg(1e-6, 1.0, 0.05, 8, kmin);
        let g = generate_grid(&c);
        let decay = (-c.sigma * kmin * g.thickness()).exp();
        assert!(decay <= c.epsilon * (1.0 + 1e-12));
    }
}

proptest! {
    #[test]
    fn grid_recurrence(
        eps_exp in 2.0f64..10.0,
        sigma in 0.2f64..4.0,
        h_int in 0.01f64..1.0,
        n_pw in 2usize..16,
        kappa_min in 1e-3f64..10.0,
    ) {
        let c = cfg(10f64.powf(-eps_exp), sigma, h_int, n_pw, kappa_min);
        let g = generate_grid(&c);
        prop_assert_eq!(g.xi[0], 0.0);
        prop_assert_eq!(g.xi[1], h_int);
        let lne = -c.epsilon.ln();
        for w in g.xi.windows(2).skip(1) {
            let expect = h_int.max(2.0 * PI * sigma * w[0] / lne / n_pw as f64);
            prop_assert_eq!(w[1] - w[0], (w[0] + expect) - w[0]);
            prop_assert_eq!(w[1], w[0] + step(&c, w[0]));
        }
        // stopping rule: the last node satisfies the cut-off, the one before not
        let last = *g.xi.last().unwrap();
        prop_assert!(lne / (last * sigma) < kappa_min || last + step(&c, last) > 1.0 / c.epsilon);
        if g.xi.len() > 2 {
            let prev = g.xi[g.xi.len() - 2];
            prop_assert!(lne / (prev * sigma) >= kappa_min);
        }
    }
}
