use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expm::expm;
use super::system::{HeomSystem, HierarchyState};
use crate::error::{Error, Result};
use crate::model::{BathSpec, DensityMatrix, SystemHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    /// Classic fixed-step fourth-order Runge–Kutta.
    Rk4,
    /// Repeated application of the precomputed propagator exp(G·dt).
    Expm,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::Rk4 => "rk4",
            Integrator::Expm => "expm",
        })
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Integrator::Rk4),
            "expm" => Ok(Integrator::Expm),
            other => Err(Error::invalid(format!("unknown integrator {other:?} (expected rk4 or expm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeomConfig {
    pub truncation_depth: u32,
    /// Step length, ps.
    pub dt: f64,
    pub n_steps: usize,
    pub integrator: Integrator,
    /// Zero-based site that starts fully populated.
    pub initial_site: usize,
}

impl Default for HeomConfig {
    /// Depth 3, 1 ps in 5000 steps (0.2 fs), exponential propagator, site 1 excited.
    fn default() -> Self {
        Self {
            truncation_depth: 3,
            dt: 1.0 / 5000.0,
            n_steps: 5000,
            integrator: Integrator::Expm,
            initial_site: 0,
        }
    }
}

impl HeomConfig {
    /// Splits a horizon (ps) into `n_steps` equal steps.
    pub fn with_horizon(horizon_ps: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("number of steps must be positive"));
        }
        if !(horizon_ps.is_finite() && horizon_ps >= 0.0) {
            return Err(Error::invalid(format!("horizon must be non-negative, got {horizon_ps} ps")));
        }
        Ok(Self {
            dt: horizon_ps / n_steps as f64,
            n_steps,
            ..Self::default()
        })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation_depth == 0 {
            return Err(Error::invalid("truncation depth must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("number of steps must be positive"));
        }
        if !(self.dt.is_finite() && self.dt >= 0.0) {
            return Err(Error::invalid(format!("time step must be non-negative, got {} ps", self.dt)));
        }
        Ok(())
    }
}

/// Reduced density matrices sampled at t_k = k·dt, k = 0…n_steps.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub rhos: Vec<DensityMatrix>,
    /// Full hierarchy at the final time.
    pub final_state: HierarchyState,
}

impl Evolution {
    pub fn len(&self) -> usize {
        self.rhos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhos.is_empty()
    }

    /// Population of a zero-based site over time.
    pub fn population(&self, site: usize) -> Vec<f64> {
        self.rhos.iter().map(|r| r[(site, site)].re).collect()
    }
}

fn setup(initial: &DensityMatrix, h: &SystemHamiltonian, bath: &BathSpec, config: &HeomConfig) -> Result<(HeomSystem, HierarchyState)> {
    config.validate()?;
    let tr = initial.trace();
    if (tr - 1.0).norm() > DensityMatrix::TRACE_TOL {
        return Err(Error::invalid(format!("initial density matrix has trace {tr}, expected 1")));
    }
    let sys = HeomSystem::new(h, bath, config.truncation_depth)?;
    let state = sys.initial_state(initial)?;
    Ok((sys, state))
}

fn snapshot(data: &[Complex64], n: usize) -> DensityMatrix {
    let block = ndarray::Array2::from_shape_vec((n, n), data[..n * n].to_vec()).expect("n×n block");
    DensityMatrix::from_array(block).expect("square block")
}

fn finite(data: &[Complex64]) -> bool {
    data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Dense complex matrix stored as separate column-major real and imaginary
/// planes; the product is a sequence of column axpys, which vectorizes.
struct SplitMatrix {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl SplitMatrix {
    fn new(m: &Array2<Complex64>) -> Self {
        let (re, im) = m.t().iter().map(|z| (z.re, z.im)).unzip();
        Self { dim: m.nrows(), re, im }
    }

    fn apply(&self, x_re: &[f64], x_im: &[f64], y_re: &mut [f64], y_im: &mut [f64]) {
        let d = self.dim;
        y_re.fill(0.0);
        y_im.fill(0.0);
        for c in 0..d {
            let (xr, xi) = (x_re[c], x_im[c]);
            if xr == 0.0 && xi == 0.0 {
                continue;
            }
            let a_re = &self.re[c * d..(c + 1) * d];
            let a_im = &self.im[c * d..(c + 1) * d];
            for (((yr, yi), &ar), &ai) in y_re.iter_mut().zip(y_im.iter_mut()).zip(a_re).zip(a_im) {
                *yr += ar * xr - ai * xi;
                *yi += ar * xi + ai * xr;
            }
        }
    }
}

/// Fixed-step RK4 over `config.n_steps` steps, ignoring `config.integrator`.
pub fn propagate_rk4(initial: &DensityMatrix, h: &SystemHamiltonian, bath: &BathSpec, config: &HeomConfig) -> Result<Evolution> {
    let (sys, mut state) = setup(initial, h, bath, config)?;
    let n = sys.n_sites();
    let dim = state.as_slice().len();
    let dt = config.dt;
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim]);
    let mut tmp = vec![zero; dim];

    let mut times = Vec::with_capacity(config.n_steps + 1);
    let mut rhos = Vec::with_capacity(config.n_steps + 1);
    times.push(0.0);
    rhos.push(snapshot(state.as_slice(), n));

    for step in 1..=config.n_steps {
        let y = state.as_mut_slice();
        sys.rhs_into(y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + k1[i] * (0.5 * dt);
        }
        sys.rhs_into(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + k2[i] * (0.5 * dt);
        }
        sys.rhs_into(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + k3[i] * dt;
        }
        sys.rhs_into(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        if !finite(y) {
            return Err(Error::Divergence {
                step,
                reason: "non-finite hierarchy element after RK4 step".into(),
            });
        }
        times.push(step as f64 * dt);
        rhos.push(snapshot(y, n));
    }
    state.time = config.horizon();
    Ok(Evolution {
        times,
        rhos,
        final_state: state,
    })
}

/// Steps the flattened hierarchy with the precomputed exp(G·dt), ignoring
/// `config.integrator`.
pub fn propagate_expm(initial: &DensityMatrix, h: &SystemHamiltonian, bath: &BathSpec, config: &HeomConfig) -> Result<Evolution> {
    let (sys, state) = setup(initial, h, bath, config)?;
    let n = sys.n_sites();
    let g = sys.generator()?;
    if g.dim() != state.as_slice().len() {
        return Err(Error::Internal(format!(
            "generator dimension {} does not match state length {}",
            g.dim(),
            state.as_slice().len()
        )));
    }
    let propagator = SplitMatrix::new(&expm(&g.to_dense().mapv(|z| z * config.dt))?);

    let dim = propagator.dim;
    let (mut y_re, mut y_im): (Vec<f64>, Vec<f64>) = state.as_slice().iter().map(|z| (z.re, z.im)).unzip();
    let (mut next_re, mut next_im) = (vec![0.0; dim], vec![0.0; dim]);
    let mut head = vec![Complex64::new(0.0, 0.0); n * n];

    let mut times = Vec::with_capacity(config.n_steps + 1);
    let mut rhos = Vec::with_capacity(config.n_steps + 1);
    times.push(0.0);
    rhos.push(snapshot(state.as_slice(), n));
    for step in 1..=config.n_steps {
        propagator.apply(&y_re, &y_im, &mut next_re, &mut next_im);
        std::mem::swap(&mut y_re, &mut next_re);
        std::mem::swap(&mut y_im, &mut next_im);
        if !y_re.iter().chain(&y_im).all(|v| v.is_finite()) {
            return Err(Error::Divergence {
                step,
                reason: "non-finite hierarchy element after exponential step".into(),
            });
        }
        for (k, z) in head.iter_mut().enumerate() {
            *z = Complex64::new(y_re[k], y_im[k]);
        }
        times.push(step as f64 * config.dt);
        rhos.push(snapshot(&head, n));
    }
    let y: Vec<Complex64> = y_re.iter().zip(&y_im).map(|(&re, &im)| Complex64::new(re, im)).collect();
    let mut final_state = HierarchyState::from_vec(n, sys.hierarchy().len(), y)?;
    final_state.time = config.horizon();
    Ok(Evolution {
        times,
        rhos,
        final_state,
    })
}

/// Dispatches on `config.integrator`.
pub fn propagate(initial: &DensityMatrix, h: &SystemHamiltonian, bath: &BathSpec, config: &HeomConfig) -> Result<Evolution> {
    match config.integrator {
        Integrator::Rk4 => propagate_rk4(initial, h, bath, config),
        Integrator::Expm => propagate_expm(initial, h, bath, config),
    }
}

/// exp(G·t)·state for a single time, with no sampling. Used as a
/// reference solution in convergence checks.
pub fn evolve_exact(sys: &HeomSystem, state: &HierarchyState, t: f64) -> Result<HierarchyState> {
    let p = expm(&sys.generator()?.to_dense().mapv(|z| z * t))?;
    let y = p.dot(&ArrayView1::from(state.as_slice()));
    let mut out = HierarchyState::from_vec(state.n_sites(), state.n_ados(), y.to_vec())?;
    out.time = state.time + t;
    Ok(out)
}
