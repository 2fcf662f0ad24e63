//! Complex coordinate stretching x2 → γx2 and the adaptive radial PML grid.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlConfig {
    /// γ = 1 + iσ.
    pub sigma: f64,
    /// Damping target ε: fields must decay to ε at the PML end.
    pub epsilon: f64,
    /// Smallest interior mesh width along the coupling boundary.
    pub h_int: f64,
    pub kappa_min: f64,
    /// Points per generalized wavelength.
    pub n_pw: usize,
    /// Cap on the PML thickness; exceeded grids end the adaptive loop.
    pub xi_max: f64,
}

impl PmlConfig {
    /// σ = 1, ε = 1e-6, N_pw = 4·(order+1), κ_min = k0, ξ_max = π/(k0 ε).
    pub fn defaults(k0: f64, h_int: f64, order: usize) -> Self {
        let epsilon = 1e-6;
        Self { sigma: 1.0, epsilon, h_int, kappa_min: k0, n_pw: 4 * (order + 1), xi_max: PI / (k0 * epsilon) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.h_int > 0.0 && self.kappa_min > 0.0 && self.xi_max > 0.0 && self.n_pw > 0) {
            return Err(Error::Config("PML parameters must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config("PML epsilon must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn gamma(&self) -> C64 {
        C64::new(1.0, self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmlGrid {
    pub xi: Vec<f64>,
    pub gamma: C64,
}

impl PmlGrid {
    pub fn thickness(&self) -> f64 {
        *self.xi.last().expect("grid has nodes")
    }

    /// Number of element rows.
    pub fn rows(&self) -> usize {
        self.xi.len() - 1
    }
}

/// κ_co(ξ) = −ln(ε)/ξ.
pub fn cutoff_kappa(epsilon: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::Invalid(format!("cut-off evaluated at xi = {xi}")));
    }
    Ok(-epsilon.ln() / xi)
}

/// Step h(ξ) = max{h_int, 2πσξ/(−ln ε)/N_pw}.
pub fn step(cfg: &PmlConfig, xi: f64) -> f64 {
    cfg.h_int.max(2.0 * PI * cfg.sigma * xi / (-cfg.epsilon.ln()) / cfg.n_pw as f64)
}

/// Grid ξ0 = 0, ξ1 = h_int, extended by h(ξ) while −ln(ε)/(ξ_N σ) ≥ κ_min; a node
/// beyond 1/ε is never added.
pub fn generate_grid(cfg: &PmlConfig) -> PmlGrid {
    let mut xi = vec![0.0, cfg.h_int];
    let lne = -cfg.epsilon.ln();
    loop {
        let last = *xi.last().expect("non-empty");
        if lne / (last * cfg.sigma) < cfg.kappa_min {
            break;
        }
        let next = last + step(cfg, last);
        if next > 1.0 / cfg.epsilon {
            break;
        }
        xi.push(next);
    }
    PmlGrid { xi, gamma: cfg.gamma() }
}

/// What the coupled solve reports back for one trial grid.
#[derive(Debug, Clone)]
pub struct PmlTrial<T> {
    pub field: T,
    /// ‖u(·, ξ_N)‖ on the terminal line.
    pub tail_norm: f64,
    /// ‖u‖ used as reference.
    pub total_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmlIteration {
    pub kappa_min: f64,
    pub rows: usize,
    pub thickness: f64,
    pub tail_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptOutcome<T> {
    pub grid: PmlGrid,
    pub field: T,
    pub converged: bool,
    pub history: Vec<PmlIteration>,
    pub diagnostic: Option<String>,
}

/// Adaptive loop: solve, accept when tail ≤ ε·total, else halve κ_min; give up
/// once the grid is thicker than ξ_max.
pub fn adapt<T, F>(cfg: &PmlConfig, mut solve: F) -> Result<AdaptOutcome<T>>
where
    F: FnMut(&PmlGrid) -> Result<PmlTrial<T>>,
{
    cfg.validate()?;
    let mut cfg = *cfg;
    let mut history = vec![];
    loop {
        let grid = generate_grid(&cfg);
        let trial = solve(&grid)?;
        let ratio = if trial.total_norm > 0.0 { trial.tail_norm / trial.total_norm } else { 0.0 };
        history.push(PmlIteration { kappa_min: cfg.kappa_min, rows: grid.rows(), thickness: grid.thickness(), tail_ratio: ratio });
        log::debug!("pml: kappa_min {:.3e} rows {} thickness {:.3e} tail {:.3e}", cfg.kappa_min, grid.rows(), grid.thickness(), ratio);
        if trial.tail_norm <= cfg.epsilon * trial.total_norm {
            return Ok(AdaptOutcome { grid, field: trial.field, converged: true, history, diagnostic: None });
        }
        if grid.thickness() > cfg.xi_max {
            let msg = format!(
                "PML tail ratio {ratio:.3e} above {:.1e} at thickness {:.3e} > xi_max {:.3e}: field not damped (anomalous mode?)",
                cfg.epsilon,
                grid.thickness(),
                cfg.xi_max
            );
            log::warn!("{msg}");
            return Ok(AdaptOutcome { grid, field: trial.field, converged: false, history, diagnostic: Some(msg) });
        }
        cfg.kappa_min *= 0.5;
    }
}

/// Jacobian diag(1, γ, 1) of the stretch.
pub fn stretch_jacobian(gamma: C64) -> Result<[C64; 3]> {
    if gamma.norm() == 0.0 {
        return Err(Error::Invalid("gamma must be nonzero".into()));
    }
    Ok([C64::new(1.0, 0.0), gamma, C64::new(1.0, 0.0)])
}

pub fn write_history_csv<W: Write>(history: &[PmlIteration], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["iteration", "kappa_min", "rows", "thickness", "tail_ratio"])?;
    for (i, h) in history.iter().enumerate() {
        wr.write_record([
            i.to_string(),
            format!("{:.17e}", h.kappa_min),
            h.rows.to_string(),
            format!("{:.17e}", h.thickness),
            format!("{:.17e}", h.tail_ratio),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
