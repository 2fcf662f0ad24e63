//! Plane-wave scattering off a stack of homogeneous isotropic layers, solved as a
//! single linear system in the full 3-vector amplitudes of every layer.

use std::collections::HashMap;
use std::io::Write;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Material;
use crate::modes::{cross, dot, norm3, radicand_sqrt, tangential_basis, zero3, FourierMode, ModeClass, Vec3, ANOMALY_TOL};
use crate::numerics::{dense_solve, DenseComplexSystem};
use crate::C64;

/// Interfaces x2_0 < … < x2_m, finite layers 1…m between them, half-spaces 0
/// (below x2_0) and m+1 (above x2_m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub interfaces: Vec<f64>,
    pub layers: Vec<Material>,
    pub below: Material,
    pub above: Material,
}

impl LayerStack {
    pub fn new(interfaces: Vec<f64>, layers: Vec<Material>, below: Material, above: Material) -> Result<Self> {
        if interfaces.is_empty() || layers.len() + 1 != interfaces.len() {
            return Err(Error::Dimension(format!(
                "{} interfaces for {} layers",
                interfaces.len(),
                layers.len()
            )));
        }
        if interfaces.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("layer thicknesses must be positive".into()));
        }
        Ok(Self { interfaces, layers, below, above })
    }

    /// Single interface at x2 = `at`.
    pub fn interface(at: f64, below: Material, above: Material) -> Self {
        Self { interfaces: vec![at], layers: vec![], below, above }
    }

    /// Layers given top-down as (thickness, material) below the interface `top`.
    pub fn from_top(top: f64, layers_top_down: &[(f64, Material)], below: Material, above: Material) -> Result<Self> {
        let mut interfaces = vec![top];
        let mut y = top;
        for &(t, _) in layers_top_down {
            y -= t;
            interfaces.push(y);
        }
        interfaces.reverse();
        let layers = layers_top_down.iter().rev().map(|&(_, m)| m).collect();
        Self::new(interfaces, layers, below, above)
    }

    pub fn m(&self) -> usize {
        self.layers.len()
    }

    /// Material of medium j ∈ 0…m+1.
    pub fn medium(&self, j: usize) -> Material {
        if j == 0 {
            self.below
        } else if j <= self.m() {
            self.layers[j - 1]
        } else {
            self.above
        }
    }

    pub fn top(&self) -> f64 {
        *self.interfaces.last().expect("at least one interface")
    }

    /// Stack reflected through x2 = 0.
    pub fn mirrored(&self) -> LayerStack {
        LayerStack {
            interfaces: self.interfaces.iter().rev().map(|x| -x).collect(),
            layers: self.layers.iter().rev().cloned().collect(),
            below: self.above,
            above: self.below,
        }
    }

    pub fn k2(&self, j: usize, k1: f64, k3: f64, omega: f64) -> C64 {
        let m = self.medium(j);
        let k0sq = omega * omega * m.eps * m.mu;
        radicand_sqrt(k0sq - k1 * k1 - k3 * k3, k0sq.norm() + k1 * k1 + k3 * k3)
    }
}

/// Amplitudes A_j (up-going) and B_j (down-going) per medium, each referenced at
/// `refs[j]`: E_j = A_j e^{i k2j (x2−r_j)} + B_j e^{−i k2j (x2−r_j)} (times e^{i k1 x1}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackSolution {
    pub k1: f64,
    pub k3: f64,
    pub omega: f64,
    pub k2: Vec<C64>,
    pub mu: Vec<C64>,
    pub refs: Vec<f64>,
    pub interfaces: Vec<f64>,
    pub a: Vec<Vec3>,
    pub b: Vec<Vec3>,
    pub a_inc: Vec3,
    pub b_inc: Vec3,
    pub a_sc: Vec3,
    /// True when the direct-amplitude formulation replaced the full system
    /// because the top medium's order is anomalous.
    pub direct_formulation: bool,
}

impl StackSolution {
    pub fn medium_index(&self, x2: f64) -> usize {
        self.interfaces.iter().take_while(|&&x| x2 >= x).count()
    }

    /// Field at (x1 = 0, x2) and its curl₃.
    pub fn eval(&self, x2: f64) -> (Vec3, Vec3) {
        let j = self.medium_index(x2);
        let mut e = zero3();
        let mut c = zero3();
        let i = C64::new(0.0, 1.0);
        for (amp, dir) in [(self.a[j], 1.0), (self.b[j], -1.0)] {
            let k = [C64::new(self.k1, 0.0), dir * self.k2[j], C64::new(self.k3, 0.0)];
            let ph = (i * k[1] * (x2 - self.refs[j])).exp();
            let v = amp.map(|z| z * ph);
            let cv = cross(k.map(|z| i * z), v);
            for n in 0..3 {
                e[n] += v[n];
                c[n] += cv[n];
            }
        }
        (e, c)
    }

    pub fn field(&self, x1: f64, x2: f64) -> Vec3 {
        let ph = C64::new(0.0, self.k1 * x1).exp();
        self.eval(x2).0.map(|z| z * ph)
    }

    /// Plane-wave components (medium, wave vector, amplitude at x = (0, refs[j])).
    pub fn plane_waves(&self) -> Vec<(usize, Vec3, Vec3)> {
        let mut out = vec![];
        for j in 0..self.k2.len() {
            for (amp, dir) in [(self.a[j], 1.0), (self.b[j], -1.0)] {
                if norm3(&amp) > 0.0 {
                    out.push((j, [C64::new(self.k1, 0.0), dir * self.k2[j], C64::new(self.k3, 0.0)], amp));
                }
            }
        }
        out
    }

    fn flux(&self, j: usize, amp: Vec3, dir: f64) -> f64 {
        let k = [C64::new(self.k1, 0.0), dir * self.k2[j], C64::new(self.k3, 0.0)];
        plane_wave_flux(k, amp, self.omega, self.mu[j])
    }

    /// Poynting-normalized reflectance flux(A_sc)/|flux(B_inc)|.
    pub fn reflectance(&self) -> f64 {
        let top = self.k2.len() - 1;
        self.flux(top, self.a_sc, 1.0) / self.flux(top, self.b_inc, -1.0).abs()
    }

    /// Poynting-normalized transmittance |flux(B_0)|/|flux(B_inc)| at the lowest interface.
    pub fn transmittance(&self) -> f64 {
        let top = self.k2.len() - 1;
        let ph = (C64::new(0.0, -1.0) * self.k2[0] * (self.interfaces[0] - self.refs[0])).exp();
        self.flux(0, self.b[0].map(|z| z * ph), -1.0).abs() / self.flux(top, self.b_inc, -1.0).abs()
    }
}

/// Stack illuminated from below: solved on the mirrored stack and mapped back
/// (E2 and the in-plane curl components change sign under x2 → −x2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirroredSolution {
    pub inner: StackSolution,
}

impl MirroredSolution {
    pub fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        let ph = C64::new(0.0, self.inner.k1 * x1).exp();
        let (e, c) = self.inner.eval(-x2);
        ([e[0] * ph, -e[1] * ph, e[2] * ph], [-c[0] * ph, c[1] * ph, -c[2] * ph])
    }

    /// Reflectance back into the lower half-space.
    pub fn reflectance(&self) -> f64 {
        self.inner.reflectance()
    }

    pub fn transmittance(&self) -> f64 {
        self.inner.transmittance()
    }
}

/// Solve for an up-going wave of amplitude `a_inc` incident from the lower
/// half-space of `stack`.
pub fn solve_stack_upward(stack: &LayerStack, k1: f64, k3: f64, omega: f64, a_inc: Vec3) -> Result<MirroredSolution> {
    let m = stack.mirrored();
    let b = [a_inc[0], -a_inc[1], a_inc[2]];
    Ok(MirroredSolution { inner: solve_stack(&m, k1, k3, omega, zero3(), b)? })
}

/// x2-component of ½Re(E × H*) for E = e·e^{ik·x}, H = k×E/(ωμ), at the reference point.
pub fn plane_wave_flux(k: Vec3, e: Vec3, omega: f64, mu: C64) -> f64 {
    let h = cross(k, e).map(|z| z / (omega * mu));
    let s = cross(e, h.map(|z| z.conj()));
    0.5 * s[1].re
}

#[derive(Clone, Copy)]
enum Slot {
    Unknown(usize),
    Known(Vec3),
}

struct Block {
    medium: usize,
    dir: f64,
    slot: Slot,
}

struct Assembly {
    n: usize,
    matrix: Vec<C64>,
    rhs: Vec<C64>,
    row: usize,
    blocks: Vec<Block>,
    refs: Vec<f64>,
    direct: bool,
}

fn wavevector(k1: f64, k2: C64, k3: f64, dir: f64) -> Vec3 {
    [C64::new(k1, 0.0), dir * k2, C64::new(k3, 0.0)]
}

// rows: coefficient vectors of E1, E3, (k×E)_1, (k×E)_3 in terms of the amplitude
fn tangential_rows(k: Vec3) -> [[C64; 3]; 4] {
    let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    [[o, z, z], [z, z, o], [z, -k[2], k[1]], [-k[1], k[0], z]]
}

struct Problem<'a> {
    stack: &'a LayerStack,
    k1: f64,
    k3: f64,
    k2: Vec<C64>,
    mu: Vec<C64>,
}

impl Problem<'_> {
    fn assemble(&self, a_inc: Vec3, b_inc: Vec3, top_ref: f64, normalized: bool, direct: bool) -> Assembly {
        let m = self.stack.m();
        let x = &self.stack.interfaces;
        let mut refs = vec![x[0]];
        for j in 1..=m {
            refs.push(if normalized { 0.5 * (x[j - 1] + x[j]) } else { 0.0 });
        }
        refs.push(top_ref);
        let mut blocks = vec![Block { medium: 0, dir: -1.0, slot: Slot::Unknown(0) }];
        for j in 1..=m {
            let c = 3 + 6 * (j - 1);
            blocks.push(Block { medium: j, dir: 1.0, slot: Slot::Unknown(c) });
            blocks.push(Block { medium: j, dir: -1.0, slot: Slot::Unknown(c + 3) });
        }
        let base = 6 * m + 3;
        let n;
        if direct {
            blocks.push(Block { medium: m + 1, dir: 1.0, slot: Slot::Known(a_inc) });
            blocks.push(Block { medium: m + 1, dir: -1.0, slot: Slot::Known(b_inc) });
            blocks.push(Block { medium: m + 1, dir: 1.0, slot: Slot::Unknown(base) });
            n = base + 3;
        } else {
            blocks.push(Block { medium: m + 1, dir: 1.0, slot: Slot::Unknown(base) });
            blocks.push(Block { medium: m + 1, dir: -1.0, slot: Slot::Unknown(base + 3) });
            blocks.push(Block { medium: m + 1, dir: 1.0, slot: Slot::Unknown(base + 6) });
            n = base + 9;
        }
        let mut asm = Assembly { n, matrix: vec![C64::new(0.0, 0.0); n * n], rhs: vec![C64::new(0.0, 0.0); n], row: 0, blocks, refs, direct };
        // divergence conditions: B_0, A_inc, B_inc, layers, A_sc
        let order: Vec<usize> = {
            let nb = asm.blocks.len();
            let mut o = vec![0];
            o.extend([nb - 3, nb - 2]);
            o.extend(1..nb - 3);
            o.push(nb - 1);
            o
        };
        for bi in order {
            let b = &asm.blocks[bi];
            if let Slot::Unknown(c) = b.slot {
                let k = wavevector(self.k1, self.k2[b.medium], self.k3, b.dir);
                let r = asm.row;
                for i in 0..3 {
                    asm.matrix[r * n + c + i] = k[i];
                }
                asm.row += 1;
            }
        }
        // tangential E and μ⁻¹ k×E continuity at every interface
        for (j, &xj) in x.iter().enumerate() {
            let r0 = asm.row;
            for bi in 0..asm.blocks.len() {
                let (medium, dir, slot) = (asm.blocks[bi].medium, asm.blocks[bi].dir, asm.blocks[bi].slot);
                let sign = if medium == j + 1 {
                    1.0
                } else if medium == j {
                    -1.0
                } else {
                    continue;
                };
                let k = wavevector(self.k1, self.k2[medium], self.k3, dir);
                let ph = (C64::new(0.0, 1.0) * k[1] * (xj - asm.refs[medium])).exp() * sign;
                let rows = tangential_rows(k);
                for (q, coeffs) in rows.iter().enumerate() {
                    let scale = if q < 2 { ph } else { ph / self.mu[medium] };
                    match slot {
                        Slot::Unknown(c) => {
                            for i in 0..3 {
                                asm.matrix[(r0 + q) * n + c + i] += scale * coeffs[i];
                            }
                        }
                        Slot::Known(v) => {
                            let val: C64 = (0..3).map(|i| coeffs[i] * v[i]).sum();
                            asm.rhs[r0 + q] -= scale * val;
                        }
                    }
                }
            }
            asm.row += 4;
        }
        if !direct {
            // incident data: tangential E and μ⁻¹k×E of A_inc + B_inc at the top reference plane
            let r0 = asm.row;
            let top = m + 1;
            for (dir, c, v) in [(1.0, base, a_inc), (-1.0, base + 3, b_inc)] {
                let k = wavevector(self.k1, self.k2[top], self.k3, dir);
                for (q, coeffs) in tangential_rows(k).iter().enumerate() {
                    let scale = if q < 2 { C64::new(1.0, 0.0) } else { 1.0 / self.mu[top] };
                    for i in 0..3 {
                        asm.matrix[(r0 + q) * n + c + i] += scale * coeffs[i];
                        asm.rhs[r0 + q] += scale * coeffs[i] * v[i];
                    }
                }
            }
            asm.row += 4;
        }
        debug_assert_eq!(asm.row, n);
        asm
    }
}

fn problem(stack: &LayerStack, k1: f64, k3: f64, omega: f64) -> Problem<'_> {
    let media = stack.m() + 2;
    Problem {
        stack,
        k1,
        k3,
        k2: (0..media).map(|j| stack.k2(j, k1, k3, omega)).collect(),
        mu: (0..media).map(|j| stack.medium(j).mu).collect(),
    }
}

/// Solve with incident amplitudes referenced at the top interface.
pub fn solve_stack(stack: &LayerStack, k1: f64, k3: f64, omega: f64, a_inc: Vec3, b_inc: Vec3) -> Result<StackSolution> {
    solve_stack_at(stack, k1, k3, omega, a_inc, b_inc, stack.top())
}

/// Solve with the top-medium amplitudes referenced at x2 = `top_ref`.
pub fn solve_stack_at(
    stack: &LayerStack,
    k1: f64,
    k3: f64,
    omega: f64,
    a_inc: Vec3,
    b_inc: Vec3,
    top_ref: f64,
) -> Result<StackSolution> {
    let p = problem(stack, k1, k3, omega);
    let m = stack.m();
    for j in 1..=m {
        let k0 = stack.medium(j).wavenumber(omega);
        if p.k2[j].norm() <= ANOMALY_TOL * k0.norm() {
            return Err(Error::SingularStack(format!("grazing mode (k2 = 0) inside layer {j}")));
        }
    }
    let k0_top = stack.above.wavenumber(omega);
    let direct = p.k2[m + 1].norm() <= ANOMALY_TOL * k0_top.norm();
    if !direct {
        for (v, dir) in [(a_inc, 1.0), (b_inc, -1.0)] {
            let k = wavevector(k1, p.k2[m + 1], k3, dir);
            let scale = norm3(&v) * norm3(&k);
            if dot(v, k).norm() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Invalid("incident amplitude violates the divergence condition".into()));
            }
        }
    }
    let asm = p.assemble(a_inc, b_inc, top_ref, true, direct);
    let sys = DenseComplexSystem::new(asm.n, asm.matrix, vec![asm.rhs])?;
    let x = dense_solve(&sys).map_err(|e| match e {
        Error::RankDeficient { rank, n } => {
            Error::SingularStack(format!("stack system rank {rank} of {n}"))
        }
        other => other,
    })?;
    let x = &x[0];
    let get = |c: usize| [x[c], x[c + 1], x[c + 2]];
    let mut a = vec![zero3(); m + 2];
    let mut b = vec![zero3(); m + 2];
    b[0] = get(0);
    for j in 1..=m {
        a[j] = get(3 + 6 * (j - 1));
        b[j] = get(6 + 6 * (j - 1));
    }
    let base = 6 * m + 3;
    let (a_in, b_in, a_sc) = if asm.direct {
        (a_inc, b_inc, get(base))
    } else {
        (get(base), get(base + 3), get(base + 6))
    };
    a[m + 1] = [0, 1, 2].map(|i| a_in[i] + a_sc[i]);
    b[m + 1] = b_in;
    Ok(StackSolution {
        k1,
        k3,
        omega,
        k2: p.k2,
        mu: p.mu,
        refs: asm.refs,
        interfaces: stack.interfaces.clone(),
        a,
        b,
        a_inc: a_in,
        b_inc: b_in,
        a_sc,
        direct_formulation: asm.direct,
    })
}

/// Condition numbers of the assembled system with and without midpoint normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub normalized: f64,
    pub unnormalized: f64,
}

impl ConditionReport {
    pub fn ratio(&self) -> f64 {
        self.unnormalized / self.normalized
    }
}

pub fn condition_report(stack: &LayerStack, mode: &FourierMode, omega: f64) -> ConditionReport {
    let p = problem(stack, mode.k1n, mode.k3, omega);
    let direct = mode.class == ModeClass::Anomalous;
    let cond = |normalized| {
        let asm = p.assemble(zero3(), zero3(), stack.top(), normalized, direct);
        DenseComplexSystem::new(asm.n, asm.matrix, vec![])
            .map(|s| s.condition_number())
            .unwrap_or(f64::INFINITY)
    };
    ConditionReport { normalized: cond(true), unnormalized: cond(false) }
}

/// 2×2 reflection matrix of one order in the tangential S/P basis: column 0 is
/// the reflected (S, P) content for a unit down-going S_t excitation, column 1 for P_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionOperator {
    pub n: i64,
    pub matrix: [[C64; 2]; 2],
    pub s_t: [f64; 3],
    pub p_t: [f64; 3],
    pub anomalous: bool,
}

impl ReflectionOperator {
    /// Reflected tangential (e1, e3) for a down-going tangential (e1, e3).
    pub fn apply(&self, e1: C64, e3: C64) -> (C64, C64) {
        let s = e1 * self.s_t[0] + e3 * self.s_t[2];
        let p = e1 * self.p_t[0] + e3 * self.p_t[2];
        let rs = self.matrix[0][0] * s + self.matrix[0][1] * p;
        let rp = self.matrix[1][0] * s + self.matrix[1][1] * p;
        (rs * self.s_t[0] + rp * self.p_t[0], rs * self.s_t[2] + rp * self.p_t[2])
    }

    pub fn max_singular_value(&self) -> f64 {
        let m = self.matrix;
        let a = m[0][0].norm_sqr() + m[0][1].norm_sqr() + m[1][0].norm_sqr() + m[1][1].norm_sqr();
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
        (0.5 * (a + (a * a - 4.0 * det * det).max(0.0).sqrt())).sqrt()
    }
}

/// Reflection operator for a mode of the medium above the stack, with the
/// amplitudes referenced at x2 = `reference`.
pub fn reflection_operator(stack: &LayerStack, mode: &FourierMode, omega: f64, reference: f64) -> Result<ReflectionOperator> {
    let (s_t, p_t) = tangential_basis(mode.k1n, mode.k3);
    let anomalous = mode.class == ModeClass::Anomalous;
    let mut matrix = [[C64::new(0.0, 0.0); 2]; 2];
    for (col, t) in [s_t, p_t].iter().enumerate() {
        let b_inc = mode.complete(C64::new(t[0], 0.0), C64::new(t[2], 0.0), -1.0);
        let sol = solve_stack_at(stack, mode.k1n, mode.k3, omega, zero3(), b_inc, reference)?;
        let r = sol.a_sc;
        matrix[0][col] = r[0] * s_t[0] + r[2] * s_t[2];
        matrix[1][col] = r[0] * p_t[0] + r[2] * p_t[2];
    }
    Ok(ReflectionOperator { n: mode.n, matrix, s_t, p_t, anomalous })
}

/// Read-mostly cache of reflection operators keyed by diffraction order, for a
/// fixed stack, incidence and reference plane.
#[derive(Debug)]
pub struct ReflectionCache {
    pub stack: LayerStack,
    pub k1: f64,
    pub k3: f64,
    pub omega: f64,
    pub period: f64,
    pub reference: f64,
    map: RwLock<HashMap<i64, ReflectionOperator>>,
}

impl ReflectionCache {
    pub fn new(stack: LayerStack, k1: f64, k3: f64, omega: f64, period: f64, reference: f64) -> Self {
        Self { stack, k1, k3, omega, period, reference, map: RwLock::new(HashMap::new()) }
    }

    pub fn mode(&self, n: i64) -> FourierMode {
        FourierMode::new(n, self.k1, self.k3, self.stack.above.wavenumber(self.omega), self.period)
    }

    pub fn get(&self, n: i64) -> Result<ReflectionOperator> {
        if let Some(op) = self.map.read().expect("cache lock").get(&n) {
            return Ok(*op);
        }
        let op = reflection_operator(&self.stack, &self.mode(n), self.omega, self.reference)?;
        self.map.write().expect("cache lock").insert(n, op);
        Ok(op)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let map = self.map.read().expect("cache lock");
        let mut keys: Vec<_> = map.keys().copied().collect();
        keys.sort_unstable();
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "re_rss", "im_rss", "re_rsp", "im_rsp", "re_rps", "im_rps", "re_rpp", "im_rpp", "anomalous"])?;
        for n in keys {
            let op = map[&n];
            let mut rec = vec![n.to_string()];
            for z in [op.matrix[0][0], op.matrix[0][1], op.matrix[1][0], op.matrix[1][1]] {
                rec.push(format!("{:.17e}", z.re));
                rec.push(format!("{:.17e}", z.im));
            }
            rec.push(op.anomalous.to_string());
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Unit-amplitude down-going S or P wave in the top medium for a given order.
pub fn downgoing(mode: &FourierMode, s: C64, p: C64) -> Vec3 {
    let (s_t, p_t) = tangential_basis(mode.k1n, mode.k3);
    let t = [0, 1, 2].map(|i| s * s_t[i] + p * p_t[i]);
    mode.complete(t[0], t[2], -1.0)
}
