use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemHamiltonian;

/// Uniform box from which linear-chain Hamiltonians are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub n_sites: usize,
    /// cm⁻¹, for ε_2…ε_N.
    pub energy_range: [f64; 2],
    /// cm⁻¹, for nearest-neighbour couplings.
    pub coupling_range: [f64; 2],
    pub n_samples: usize,
    pub seed: u64,
}

impl SamplingSpec {
    pub fn new(n_sites: usize, n_samples: usize, seed: u64) -> Self {
        Self {
            n_sites,
            energy_range: [-100.0, 100.0],
            coupling_range: [-100.0, 100.0],
            n_samples,
            seed,
        }
    }

    pub fn n_labels(&self) -> usize {
        2 * (self.n_sites - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::invalid(format!("need at least 2 sites, got {}", self.n_sites)));
        }
        if self.n_samples == 0 {
            return Err(Error::invalid("number of samples must be positive"));
        }
        for (name, [lo, hi]) in [("energy", self.energy_range), ("coupling", self.coupling_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("{name} range [{lo}, {hi}] must satisfy lo < hi")));
            }
        }
        Ok(())
    }

    /// Whether every label of `h` lies inside the configured ranges.
    pub fn contains(&self, h: &SystemHamiltonian) -> bool {
        let inside = |v: f64, [lo, hi]: [f64; 2]| v >= lo && v <= hi;
        h.energies()[1..].iter().all(|&e| inside(e, self.energy_range))
            && h.couplings().iter().all(|&j| inside(j, self.coupling_range))
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-sample RNG seed; depends only on the dataset seed and the sample index.
pub fn sub_seed(seed: u64, sample_index: u64) -> u64 {
    mix64(seed ^ mix64(sample_index))
}

/// Draws ε_2…ε_N then J_12…J_{N−1,N} i.i.d. uniform from the spec's ranges.
pub fn sample_hamiltonian(spec: &SamplingSpec, sample_index: u64) -> Result<SystemHamiltonian> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(spec.seed, sample_index));
    let n = spec.n_sites;
    let [elo, ehi] = spec.energy_range;
    let [clo, chi] = spec.coupling_range;
    let mut energies = Vec::with_capacity(n);
    energies.push(0.0);
    energies.extend((1..n).map(|_| rng.random_range(elo..ehi)));
    let couplings = (1..n).map(|_| rng.random_range(clo..chi)).collect();
    SystemHamiltonian::new(energies, couplings)
}
