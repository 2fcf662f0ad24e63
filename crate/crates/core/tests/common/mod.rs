//! Test-side oracles, independent of the library's solvers.
#![allow(dead_code)]

pub mod grids;

use conical_dd::geometry::Material;
use conical_dd::multilayer::{LayerStack, StackSolution};
use conical_dd::modes::IncidentWave;
use conical_dd::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pol {
    /// Scalar E·S with S = (−k3, 0, k1)/kt.
    S,
    /// Scalar H·S.
    P,
}

fn k2_of(m: Material, kt2: f64, omega: f64) -> C64 {
    let r = omega * omega * m.eps * m.mu - kt2;
    let mut k = r.sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        k = -k;
    }
    k
}

/// Scalar 2×2 transfer recursion for one polarization: medium amplitudes
/// (up, down) referenced at `refs[j]`, no wave entering from below and a
/// down-going wave `b_top` in the top medium.
pub fn scalar_tmm(stack: &LayerStack, k1: f64, k3: f64, omega: f64, pol: Pol, b_top: C64, refs: &[f64]) -> Vec<(C64, C64)> {
    let kt2 = k1 * k1 + k3 * k3;
    let media = stack.m() + 2;
    let i = c(0.0, 1.0);
    let zeta = |j: usize| {
        let m = stack.medium(j);
        match pol {
            Pol::S => m.mu,
            Pol::P => m.eps,
        }
    };
    let state = |j: usize, a: C64, b: C64, x: f64| {
        let k = k2_of(stack.medium(j), kt2, omega);
        let ea = (i * k * (x - refs[j])).exp();
        let eb = (-i * k * (x - refs[j])).exp();
        (a * ea + b * eb, i * k / zeta(j) * (a * ea - b * eb))
    };
    let amps = |j: usize, psi: C64, phi: C64, x: f64| {
        let k = k2_of(stack.medium(j), kt2, omega);
        let t = phi * zeta(j) / (i * k);
        let a = (psi + t) / 2.0 * (-i * k * (x - refs[j])).exp();
        let b = (psi - t) / 2.0 * (i * k * (x - refs[j])).exp();
        (a, b)
    };
    let mut out = vec![(c(0.0, 0.0), c(0.0, 0.0)); media];
    out[0] = (c(0.0, 0.0), c(1.0, 0.0));
    let mut s = state(0, out[0].0, out[0].1, stack.interfaces[0]);
    for j in 1..media {
        let x_lo = stack.interfaces[j - 1];
        out[j] = amps(j, s.0, s.1, x_lo);
        if j < media - 1 {
            s = state(j, out[j].0, out[j].1, stack.interfaces[j]);
        }
    }
    let scale = b_top / out[media - 1].1;
    out.iter().map(|&(a, b)| (a * scale, b * scale)).collect()
}

fn cross(a: [C64; 3], b: [C64; 3]) -> [C64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn s_vector(k1: f64, k3: f64) -> [f64; 3] {
    let kt = (k1 * k1 + k3 * k3).sqrt();
    if kt == 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        [-k3 / kt, 0.0, k1 / kt]
    }
}

/// (E·S, H·S) of a plane-wave amplitude with wave vector (k1, dir·k2, k3).
pub fn sp_scalars(e: [C64; 3], k1: f64, k2: C64, k3: f64, dir: f64, omega: f64, mu: C64) -> (C64, C64) {
    let s = s_vector(k1, k3);
    let k = [c(k1, 0.0), dir * k2, c(k3, 0.0)];
    let h = cross(k, e).map(|z| z / (omega * mu));
    let dot = |v: [C64; 3]| v[0] * s[0] + v[1] * s[1] + v[2] * s[2];
    (dot(e), dot(h))
}

/// Largest deviation between the full-system solution and the scalar oracle,
/// relative to the incident amplitude.
pub fn oracle_deviation(stack: &LayerStack, sol: &StackSolution) -> f64 {
    let m = stack.m();
    let top = m + 1;
    let (omega, k1, k3) = (sol.omega, sol.k1, sol.k3);
    let (bs, bp) = sp_scalars(sol.b[top], k1, sol.k2[top], k3, -1.0, omega, sol.mu[top]);
    let os = scalar_tmm(stack, k1, k3, omega, Pol::S, bs, &sol.refs);
    let op = scalar_tmm(stack, k1, k3, omega, Pol::P, bp, &sol.refs);
    let scale = bs.norm().max(bp.norm());
    let mut dev: f64 = 0.0;
    for j in 0..m + 2 {
        let (as_, ap) = sp_scalars(sol.a[j], k1, sol.k2[j], k3, 1.0, omega, sol.mu[j]);
        let (bs_, bp_) = sp_scalars(sol.b[j], k1, sol.k2[j], k3, -1.0, omega, sol.mu[j]);
        for (x, y) in [(as_, os[j].0), (bs_, os[j].1), (ap, op[j].0), (bp_, op[j].1)] {
            dev = dev.max((x - y).norm() / scale);
        }
    }
    dev
}

/// Closed-form Fresnel amplitude coefficient for S polarization, normal incidence.
pub fn fresnel_r(n1: f64, n2: f64) -> f64 {
    (n1 - n2) / (n1 + n2)
}

/// Random stack with up to five layers; `lossy` adds absorption.
pub fn random_stack(rng: &mut ChaCha8Rng, lossy: bool) -> LayerStack {
    let m = rng.gen_range(0..=5);
    let mat = |rng: &mut ChaCha8Rng| {
        let re = rng.gen_range(1.0..4.0);
        let im = if lossy { rng.gen_range(0.0..0.3) } else { 0.0 };
        Material::lossy(c(re, im))
    };
    let mut y = 0.0;
    let mut interfaces = vec![0.0];
    let mut layers = vec![];
    for _ in 0..m {
        y += rng.gen_range(0.05..0.5);
        interfaces.push(y);
        layers.push(mat(rng));
    }
    let below = mat(rng);
    let above = Material::dielectric(rng.gen_range(1.0..2.5));
    LayerStack::new(interfaces, layers, below, above).unwrap()
}

pub fn random_incidence(rng: &mut ChaCha8Rng, stack: &LayerStack) -> IncidentWave {
    let theta = rng.gen_range(0.0..70.0);
    let phi = rng.gen_range(0.0..360.0);
    let a_s = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let a_p = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    IncidentWave::from_angles(1.0, theta, phi, false, stack.above, a_s, a_p).unwrap()
}
