//! Fourier (Rayleigh) modes of the exterior field: transverse wavenumbers,
//! classification, Fourier analysis of boundary traces and synthesis.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Material;
use crate::C64;

/// |k2n| ≤ ANOMALY_TOL·|k0| classifies a mode as anomalous.
pub const ANOMALY_TOL: f64 = 1e-9;
/// Default threshold for near-anomaly warnings, relative to |k0|.
pub const NEAR_ANOMALY_TOL: f64 = 1e-3;

pub type Vec3 = [C64; 3];

pub fn zero3() -> Vec3 {
    [C64::new(0.0, 0.0); 3]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> C64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &Vec3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn real3(a: [f64; 3]) -> Vec3 {
    a.map(|x| C64::new(x, 0.0))
}

/// Plane wave s·e^{i k·x} in a homogeneous medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentWave {
    pub k: [f64; 3],
    pub amplitude: Vec3,
    pub omega: f64,
    pub medium: Material,
}

impl IncidentWave {
    pub fn new(k: [f64; 3], amplitude: Vec3, omega: f64, medium: Material) -> Result<Self> {
        let k0sq = omega * omega * medium.eps * medium.mu;
        let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (C64::new(ksq, 0.0) - k0sq).norm() > 1e-12 * k0sq.norm() {
            return Err(Error::Invalid(format!(
                "|k|^2 = {ksq} does not match omega^2 eps mu = {k0sq}"
            )));
        }
        let div = dot(amplitude, real3(k)).norm();
        if div > 1e-12 * norm3(&amplitude) * ksq.sqrt() {
            return Err(Error::Invalid(format!("amplitude not transverse: s.k = {div:e}")));
        }
        Ok(Self { k, amplitude, omega, medium })
    }

    /// Direction (cos φ sin θ, ±cos θ, sin φ sin θ), θ from the x2 axis and φ the
    /// rotation about x2 out of the x1-x2 plane. `upward` selects the sign of k2.
    /// The amplitude is a_s·S + a_p·P in the S/P basis of [`polarization_vectors`].
    pub fn from_angles(
        wavelength: f64,
        theta_deg: f64,
        phi_deg: f64,
        upward: bool,
        medium: Material,
        a_s: C64,
        a_p: C64,
    ) -> Result<Self> {
        let omega = 2.0 * PI / wavelength;
        let k = Self::wavevector(omega, theta_deg, phi_deg, upward, medium)?;
        let (s, p) = polarization_vectors(k);
        let amplitude = [0, 1, 2].map(|i| a_s * s[i] + a_p * p[i]);
        Self::new(k, amplitude, omega, medium)
    }

    /// Amplitude normalize(reference × k), as for a fixed reference direction.
    pub fn with_reference(k: [f64; 3], reference: [f64; 3], omega: f64, medium: Material) -> Result<Self> {
        let c = [
            reference[1] * k[2] - reference[2] * k[1],
            reference[2] * k[0] - reference[0] * k[2],
            reference[0] * k[1] - reference[1] * k[0],
        ];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if n == 0.0 {
            return Err(Error::Invalid("reference direction parallel to k".into()));
        }
        Self::new(k, real3(c.map(|x| x / n)), omega, medium)
    }

    pub fn wavevector(omega: f64, theta_deg: f64, phi_deg: f64, upward: bool, medium: Material) -> Result<[f64; 3]> {
        let n = medium.refractive_index();
        if n.im != 0.0 {
            return Err(Error::Invalid("incident medium must be lossless".into()));
        }
        let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
        let k0 = omega * n.re;
        let s2 = if upward { 1.0 } else { -1.0 };
        Ok([k0 * p.cos() * t.sin(), s2 * k0 * t.cos(), k0 * p.sin() * t.sin()])
    }

    pub fn k0(&self) -> C64 {
        self.medium.wavenumber(self.omega)
    }

    pub fn field(&self, x1: f64, x2: f64) -> Vec3 {
        let ph = C64::new(0.0, self.k[0] * x1 + self.k[1] * x2).exp();
        self.amplitude.map(|s| s * ph)
    }

    /// curl₃ of the plane wave, i k × E.
    pub fn curl(&self, x1: f64, x2: f64) -> Vec3 {
        let ik = self.k.map(|x| C64::new(0.0, x));
        cross(ik, self.field(x1, x2))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { amplitude: self.amplitude.map(|s| s * factor), ..*self }
    }
}

/// S = normalize((k1,0,k3)×e2) and P = k̂ × S; S=(1,0,0), P=k̂×S at k1=k3=0.
pub fn polarization_vectors(k: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let kt = (k[0] * k[0] + k[2] * k[2]).sqrt();
    let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    let s = if kt == 0.0 { [1.0, 0.0, 0.0] } else { [-k[2] / kt, 0.0, k[0] / kt] };
    let kh = k.map(|x| x / kn);
    let p = [
        kh[1] * s[2] - kh[2] * s[1],
        kh[2] * s[0] - kh[0] * s[2],
        kh[0] * s[1] - kh[1] * s[0],
    ];
    (s, p)
}

/// Orthonormal tangential (x1,x3) basis for order with wavenumbers (k1n, k3):
/// S_t = (−k3, 0, k1n)/kt and P_t = (k1n, 0, k3)/kt; (1,0,0), (0,0,1) when kt = 0.
pub fn tangential_basis(k1n: f64, k3: f64) -> ([f64; 3], [f64; 3]) {
    let kt = (k1n * k1n + k3 * k3).sqrt();
    if kt == 0.0 {
        ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    } else {
        ([-k3 / kt, 0.0, k1n / kt], [k1n / kt, 0.0, k3 / kt])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeClass {
    Propagating,
    Evanescent,
    Anomalous,
}

/// Principal square root of k0² − (k1 + n2π/a)² − k3². A radicand within a few
/// ulps of the magnitudes it is formed from is treated as exactly zero.
pub fn transverse_wavenumber(n: i64, k1: f64, k3: f64, k0: C64, a: f64) -> C64 {
    let k1n = k1 + n as f64 * 2.0 * PI / a;
    radicand_sqrt(k0 * k0 - k1n * k1n - k3 * k3, k0.norm_sqr() + k1n * k1n + k3 * k3)
}

pub(crate) fn radicand_sqrt(mut r: C64, scale: f64) -> C64 {
    if r.norm() <= 16.0 * f64::EPSILON * scale {
        return C64::new(0.0, 0.0);
    }
    if r.im == 0.0 {
        r.im = 0.0; // −0 would select the lower branch
    }
    r.sqrt()
}

/// |k2n| ≤ tol ⇒ Anomalous; otherwise Propagating when Re k2n ≥ Im k2n.
pub fn classify_mode(k2n: C64, tol: f64) -> ModeClass {
    if k2n.norm() <= tol {
        ModeClass::Anomalous
    } else if k2n.re >= k2n.im {
        ModeClass::Propagating
    } else {
        ModeClass::Evanescent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub n: i64,
    pub k1n: f64,
    pub k2n: C64,
    pub k3: f64,
    pub k0: C64,
    pub class: ModeClass,
}

impl FourierMode {
    pub fn new(n: i64, k1: f64, k3: f64, k0: C64, a: f64) -> Self {
        let k1n = k1 + n as f64 * 2.0 * PI / a;
        let k2n = transverse_wavenumber(n, k1, k3, k0, a);
        Self { n, k1n, k2n, k3, k0, class: classify_mode(k2n, ANOMALY_TOL * k0.norm()) }
    }

    /// Wave vector (k1n, ±k2n, k3) of the mode travelling in direction `dir` = ±1 along x2.
    pub fn wavevector(&self, dir: f64) -> Vec3 {
        [C64::new(self.k1n, 0.0), self.k2n * dir, C64::new(self.k3, 0.0)]
    }

    /// Complete a tangential amplitude (e1, e3) to a divergence-free vector for the
    /// mode travelling in direction `dir`. Anomalous modes get e2 = 0.
    pub fn complete(&self, e1: C64, e3: C64, dir: f64) -> Vec3 {
        let e2 = if self.class == ModeClass::Anomalous {
            C64::new(0.0, 0.0)
        } else {
            -(self.k1n * e1 + self.k3 * e3) / (dir * self.k2n)
        };
        [e1, e2, e3]
    }
}

/// Inclusive range of diffraction orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRange {
    pub lo: i64,
    pub hi: i64,
}

impl ModeRange {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn len(&self) -> usize {
        if self.hi < self.lo { 0 } else { (self.hi - self.lo + 1) as usize }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn modes(&self, k1: f64, k3: f64, k0: C64, a: f64) -> Vec<FourierMode> {
        self.iter().map(|n| FourierMode::new(n, k1, k3, k0, a)).collect()
    }
}

/// Orders with |k1 + n2π/a| below k_max = factor·2π/h_max (factor 0.1 by default).
pub fn mode_range(h_max: f64, k1: f64, a: f64) -> ModeRange {
    mode_range_with(h_max, k1, a, 0.1)
}

pub fn mode_range_with(h_max: f64, k1: f64, a: f64, factor: f64) -> ModeRange {
    let k_max = factor * 2.0 * PI / h_max;
    let g = 2.0 * PI / a;
    // largest n with strict inequality, starting from a floating estimate
    let largest = |f: &dyn Fn(i64) -> bool, guess: f64| {
        let mut n = guess.floor() as i64;
        while f(n + 1) {
            n += 1;
        }
        while !f(n) {
            n -= 1;
        }
        n
    };
    let n_max = largest(&|n| k1 + n as f64 * g < k_max, (k_max - k1) / g);
    let n_min = largest(&|n| k1 - n as f64 * g > -k_max, (k1 + k_max) / g);
    ModeRange { lo: -n_min, hi: n_max }
}

/// Orders with |k2n| ≤ threshold·|k0|, sorted by |k2n|.
pub fn detect_anomalous(k1: f64, k3: f64, k0: C64, a: f64, range: ModeRange, threshold: f64) -> Vec<(i64, f64)> {
    let mut out: Vec<(i64, f64)> = range
        .iter()
        .map(|n| (n, transverse_wavenumber(n, k1, k3, k0, a).norm() / k0.norm()))
        .filter(|&(_, r)| r <= threshold)
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModePair {
    pub up: Vec3,
    pub down: Vec3,
}

/// Amplitudes per diffraction order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeAmplitudes {
    pub orders: BTreeMap<i64, ModePair>,
}

impl ModeAmplitudes {
    pub fn up(&self, n: i64) -> Vec3 {
        self.orders.get(&n).map(|p| p.up).unwrap_or_else(zero3)
    }

    pub fn set_up(&mut self, n: i64, v: Vec3) {
        self.orders.entry(n).or_default().up = v;
    }

    /// Sum of |e_up|² over all orders.
    pub fn power(&self) -> f64 {
        self.orders.values().map(|p| norm3(&p.up).powi(2)).sum()
    }

    /// CSV with columns n and Re/Im of the up-going components.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "re_e1", "im_e1", "re_e2", "im_e2", "re_e3", "im_e3"])?;
        for (n, p) in &self.orders {
            let mut rec = vec![n.to_string()];
            for z in p.up {
                rec.push(format!("{:.17e}", z.re));
                rec.push(format!("{:.17e}", z.im));
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// One linear piece of a boundary trace on [x0, x1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSegment {
    pub x0: f64,
    pub x1: f64,
    pub v0: Vec3,
    pub v1: Vec3,
}

/// Piecewise-linear complex vector field on a horizontal line over one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub period: f64,
    pub k1: f64,
    pub segments: Vec<TraceSegment>,
}

impl BoundaryTrace {
    pub fn new(period: f64, k1: f64, segments: Vec<TraceSegment>) -> Result<Self> {
        let tol = 1e-12 * period;
        let mut x = 0.0;
        for s in &segments {
            if (s.x0 - x).abs() > tol || !(s.x1 > s.x0) {
                return Err(Error::Invalid(format!("trace segments do not tile [0, a] at x1 = {x}")));
            }
            x = s.x1;
        }
        if (x - period).abs() > tol {
            return Err(Error::Invalid("trace does not cover the full period".into()));
        }
        Ok(Self { period, k1, segments })
    }

    /// Sample a smooth field at `n` uniform segments.
    pub fn sample(period: f64, k1: f64, n: usize, f: impl Fn(f64) -> Vec3) -> Self {
        let xs: Vec<f64> = (0..=n).map(|i| period * i as f64 / n as f64).collect();
        let segments = xs
            .windows(2)
            .map(|w| TraceSegment { x0: w[0], x1: w[1], v0: f(w[0]), v1: f(w[1]) })
            .collect();
        Self { period, k1, segments }
    }

    pub fn zero(period: f64, k1: f64) -> Self {
        Self::sample(period, k1, 1, |_| zero3())
    }

    pub fn eval(&self, x: f64) -> Vec3 {
        let s = self
            .segments
            .iter()
            .find(|s| x <= s.x1)
            .unwrap_or_else(|| self.segments.last().expect("non-empty trace"));
        let t = ((x - s.x0) / (s.x1 - s.x0)).clamp(0.0, 1.0);
        [0, 1, 2].map(|i| s.v0[i] * (1.0 - t) + s.v1[i] * t)
    }

    /// |trace(a) − trace(0)·e^{ik1a}| relative to |trace(0)|.
    pub fn bloch_defect(&self) -> f64 {
        let first = self.segments[0].v0;
        let last = self.segments.last().expect("non-empty trace").v1;
        let f = C64::new(0.0, self.k1 * self.period).exp();
        let d: Vec3 = [0, 1, 2].map(|i| last[i] - first[i] * f);
        norm3(&d) / norm3(&first).max(f64::MIN_POSITIVE)
    }

    /// (1/a)∫|trace|² over the period (exact for linear pieces).
    pub fn mean_square(&self) -> f64 {
        let mut s = 0.0;
        for seg in &self.segments {
            let h = seg.x1 - seg.x0;
            for i in 0..3 {
                let (a, b) = (seg.v0[i], seg.v1[i]);
                s += h / 3.0 * (a.norm_sqr() + (a.conj() * b).re + b.norm_sqr());
            }
        }
        s / self.period
    }

    pub fn sub(&self, other: &BoundaryTrace) -> Result<BoundaryTrace> {
        if self.segments.len() != other.segments.len() {
            return Err(Error::Dimension("traces on different segmentations".into()));
        }
        let segments = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| TraceSegment {
                x0: a.x0,
                x1: a.x1,
                v0: [0, 1, 2].map(|i| a.v0[i] - b.v0[i]),
                v1: [0, 1, 2].map(|i| a.v1[i] - b.v1[i]),
            })
            .collect();
        Ok(BoundaryTrace { period: self.period, k1: self.k1, segments })
    }
}

// ∫₀¹ e^{zs} ds and ∫₀¹ s e^{zs} ds, with series in the cancellation regime.
fn phi_psi(z: C64) -> (C64, C64) {
    if z.norm() < 0.5 {
        let mut phi = C64::new(0.0, 0.0);
        let mut psi = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0); // z^k / k!
        for k in 0..30 {
            phi += term / (k as f64 + 1.0);
            psi += term / (k as f64 + 2.0);
            term *= z / (k as f64 + 1.0);
        }
        (phi, psi)
    } else {
        let ez = z.exp();
        ((ez - 1.0) / z, (ez * (z - 1.0) + 1.0) / (z * z))
    }
}

/// e_n = (1/a)∫₀ᵃ trace(ξ) e^{−i(k1 + n2π/a)ξ} dξ, integrated exactly per linear piece.
pub fn fourier_coefficients(trace: &BoundaryTrace, range: ModeRange) -> ModeAmplitudes {
    let mut out = ModeAmplitudes::default();
    for n in range.iter() {
        let q = trace.k1 + n as f64 * 2.0 * PI / trace.period;
        let mut e = zero3();
        for s in &trace.segments {
            let h = s.x1 - s.x0;
            let (phi, psi) = phi_psi(C64::new(0.0, -q * h));
            let w = C64::new(0.0, -q * s.x0).exp() * h / trace.period;
            for i in 0..3 {
                e[i] += w * ((phi - psi) * s.v0[i] + psi * s.v1[i]);
            }
        }
        out.set_up(n, e);
    }
    out
}

/// Σ_n e_n e^{i k1n x1 + i k2n x2} over the up-going amplitudes.
pub fn synthesize_field(amps: &ModeAmplitudes, modes: &[FourierMode], x1: f64, x2: f64) -> Result<Vec3> {
    let mut v = zero3();
    for (n, pair) in &amps.orders {
        let m = modes
            .iter()
            .find(|m| m.n == *n)
            .ok_or_else(|| Error::Invalid(format!("no mode for order {n}")))?;
        let ph = (C64::new(0.0, m.k1n * x1) + C64::new(0.0, 1.0) * m.k2n * x2).exp();
        for i in 0..3 {
            v[i] += pair.up[i] * ph;
        }
    }
    Ok(v)
}

/// Outgoing modal field referenced at the line x2 = x2_ref, travelling in
/// direction `dir` (+1 up, −1 down): Σ e_n e^{i k1n x1 + i dir k2n (x2 − x2_ref)}.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalField {
    pub modes: Vec<FourierMode>,
    pub amplitudes: Vec<Vec3>,
    pub x2_ref: f64,
    pub dir: f64,
}

impl ModalField {
    pub fn field(&self, x1: f64, x2: f64) -> Vec3 {
        self.eval(x1, x2).0
    }

    /// Field and curl₃ at a point.
    pub fn eval(&self, x1: f64, x2: f64) -> (Vec3, Vec3) {
        let mut e = zero3();
        let mut c = zero3();
        let i = C64::new(0.0, 1.0);
        for (m, a) in self.modes.iter().zip(&self.amplitudes) {
            let k = m.wavevector(self.dir);
            let ph = (i * m.k1n * x1 + i * k[1] * (x2 - self.x2_ref)).exp();
            let v = a.map(|z| z * ph);
            let cv = cross(k.map(|z| i * z), v);
            for j in 0..3 {
                e[j] += v[j];
                c[j] += cv[j];
            }
        }
        (e, c)
    }
}
