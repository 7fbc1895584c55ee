//! Excitonic system description: site Hamiltonian, per-site Drude–Lorentz
//! baths and the reduced density matrix.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{cm1_to_angular, thermal_energy};

/// Linear-chain excitonic Hamiltonian in cm⁻¹.
///
/// Site energies are relative to site 1, so `energies[0]` is always zero.
/// Only nearest-neighbour couplings are stored; `couplings[j]` couples
/// site `j` to site `j + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemHamiltonian {
    energies: Vec<f64>,
    couplings: Vec<f64>,
}

impl SystemHamiltonian {
    pub fn new(energies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 sites, got {n}")));
        }
        if couplings.len() != n - 1 {
            return Err(Error::invalid(format!(
                "{n} site energies need {} nearest-neighbour couplings, got {}",
                n - 1,
                couplings.len()
            )));
        }
        if energies.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::invalid("Hamiltonian parameters must be finite"));
        }
        if energies[0] != 0.0 {
            return Err(Error::invalid(format!(
                "site energies are relative to site 1, so the first energy must be 0 (got {})",
                energies[0]
            )));
        }
        Ok(Self {
            energies,
            couplings,
        })
    }

    /// Rebuilds a Hamiltonian from its 2(N−1) labels: ε_2…ε_N then J_12…J_{N−1,N}.
    pub fn from_labels(n_sites: usize, labels: &[f64]) -> Result<Self> {
        if n_sites < 2 || labels.len() != 2 * (n_sites - 1) {
            return Err(Error::invalid(format!(
                "{n_sites} sites need {} labels, got {}",
                2 * n_sites.saturating_sub(1),
                labels.len()
            )));
        }
        let (eps, js) = labels.split_at(n_sites - 1);
        let mut energies = Vec::with_capacity(n_sites);
        energies.push(0.0);
        energies.extend_from_slice(eps);
        Self::new(energies, js.to_vec())
    }

    pub fn n_sites(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// ε_2…ε_N followed by J_12…J_{N−1,N}.
    pub fn labels(&self) -> Vec<f64> {
        self.energies[1..]
            .iter()
            .chain(&self.couplings)
            .copied()
            .collect()
    }

    /// Dense tridiagonal matrix in cm⁻¹.
    pub fn matrix(&self) -> Array2<f64> {
        let n = self.n_sites();
        let mut m = Array2::zeros((n, n));
        for (j, &e) in self.energies.iter().enumerate() {
            m[[j, j]] = e;
        }
        for (j, &c) in self.couplings.iter().enumerate() {
            m[[j, j + 1]] = c;
            m[[j + 1, j]] = c;
        }
        m
    }

    /// The same matrix in rad/ps (hbar = 1), as used by the propagators.
    pub fn angular_matrix(&self) -> Array2<f64> {
        self.matrix().mapv(cm1_to_angular)
    }
}

/// Free-function form of [`SystemHamiltonian::new`] followed by [`SystemHamiltonian::matrix`].
pub fn build_hamiltonian_matrix(energies: &[f64], couplings: &[f64]) -> Result<Array2<f64>> {
    Ok(SystemHamiltonian::new(energies.to_vec(), couplings.to_vec())?.matrix())
}

/// Ohmic spectral density with Drude–Lorentz cutoff, 2λγω/(ω²+γ²).
pub fn spectral_density(omega: f64, lambda: f64, gamma: f64) -> f64 {
    2.0 * lambda * gamma * omega / (omega * omega + gamma * gamma)
}

/// Per-site Drude–Lorentz baths at a common temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Reorganization energies λ_j, cm⁻¹.
    pub lambdas: Vec<f64>,
    /// Drude cutoffs γ_j, cm⁻¹.
    pub gammas: Vec<f64>,
    /// Kelvin.
    pub temperature: f64,
}

impl BathSpec {
    pub fn new(lambdas: Vec<f64>, gammas: Vec<f64>, temperature: f64) -> Result<Self> {
        let bath = Self {
            lambdas,
            gammas,
            temperature,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// Identical bath on every site.
    pub fn uniform(n_sites: usize, lambda: f64, gamma: f64, temperature: f64) -> Result<Self> {
        Self::new(vec![lambda; n_sites], vec![gamma; n_sites], temperature)
    }

    pub fn n_sites(&self) -> usize {
        self.lambdas.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.len() != self.gammas.len() || self.lambdas.is_empty() {
            return Err(Error::invalid(format!(
                "bath needs one λ and one γ per site (got {} and {})",
                self.lambdas.len(),
                self.gammas.len()
            )));
        }
        // λ = 0 is an uncoupled site, which is still a well-posed bath.
        if self.lambdas.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(Error::invalid("reorganization energies must be non-negative"));
        }
        if self.gammas.iter().any(|&g| !(g.is_finite() && g > 0.0)) {
            return Err(Error::invalid("Drude cutoffs must be positive"));
        }
        thermal_energy(self.temperature)?;
        Ok(())
    }

    /// ħγ_j / k_BT per site. The high-temperature hierarchy assumes these are well below 1.
    pub fn high_temperature_ratios(&self) -> Vec<f64> {
        let kt = thermal_energy(self.temperature).unwrap_or(f64::NAN);
        self.gammas.iter().map(|g| g / kt).collect()
    }
}

/// Reduced density matrix (or any N×N operator on the site basis).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Array2<Complex64>);

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-8;

    pub fn from_array(entries: Array2<Complex64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::invalid(format!(
                "density matrix must be square and non-empty, got {:?}",
                entries.shape()
            )));
        }
        Ok(Self(entries))
    }

    /// |site⟩⟨site| with a zero-based site index.
    pub fn site_projector(n_sites: usize, site: usize) -> Result<Self> {
        if site >= n_sites {
            return Err(Error::invalid(format!(
                "initial site {site} out of range for {n_sites} sites"
            )));
        }
        let mut m = Array2::zeros((n_sites, n_sites));
        m[[site, site]] = Complex64::new(1.0, 0.0);
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, Complex64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<Complex64> {
        self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.diag().sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    /// Largest |ρ_ab − conj(ρ_ba)|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.0[[a, b]] - self.0[[b, a]].conj()).norm());
            }
        }
        worst
    }

    /// Hermiticity and unit trace at the fixed tolerances.
    pub fn check_physical(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > Self::HERMITICITY_TOL {
            return Err(Error::invalid(format!("density matrix not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > Self::TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} differs from 1")));
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;

    fn index(&self, (a, b): (usize, usize)) -> &Complex64 {
        &self.0[[a, b]]
    }
}
