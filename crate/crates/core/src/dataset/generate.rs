use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use super::features::{CoherenceChannel, Trajectory};
use super::format::{
    content_checksum, f64s_to_le_bytes, Manifest, Reject, FEATURES_FILE, FORMAT_VERSION, LABELS_FILE, MANIFEST_FILE,
    REJECTS_FILE,
};
use super::sampling::{sample_hamiltonian, sub_seed, SamplingSpec};
use crate::error::{Error, Result};
use crate::heom::{propagate, HeomConfig};
use crate::model::{BathSpec, DensityMatrix};
use crate::units::SITE_ENERGY_OFFSET_CM1;

/// Population/coherence bound tolerance applied before a sample is stored.
pub const STORE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
    pub coherence: CoherenceChannel,
}

#[derive(Debug, Clone)]
pub struct GenerationSummary {
    pub manifest: Manifest,
    pub rejects: Vec<Reject>,
}

struct Simulated {
    labels: Vec<f64>,
    features: Vec<f64>,
}

/// Simulates one sample from its index alone.
pub fn simulate_sample(
    spec: &SamplingSpec,
    bath: &BathSpec,
    config: &HeomConfig,
    coherence: CoherenceChannel,
    sample_id: u64,
) -> Result<(Vec<f64>, Trajectory)> {
    let h = sample_hamiltonian(spec, sample_id)?;
    let rho0 = DensityMatrix::site_projector(spec.n_sites, config.initial_site)?;
    let ev = propagate(&rho0, &h, bath, config)?;
    let traj = Trajectory::from_evolution(&ev, coherence)?;
    Ok((h.labels(), traj))
}

fn run_sample(
    spec: &SamplingSpec,
    bath: &BathSpec,
    config: &HeomConfig,
    coherence: CoherenceChannel,
    sample_id: u64,
) -> std::result::Result<Simulated, Reject> {
    let reject = |step, error: String| Reject {
        sample_id,
        sub_seed: sub_seed(spec.seed, sample_id),
        step,
        error,
    };
    match simulate_sample(spec, bath, config, coherence, sample_id) {
        Ok((labels, traj)) => {
            if let Some(problem) = traj.check_invariants(STORE_TOLERANCE).into_iter().next() {
                return Err(reject(None, format!("trajectory invariant violated: {problem}")));
            }
            Ok(Simulated {
                labels,
                features: traj.features.iter().copied().collect(),
            })
        }
        Err(Error::Divergence { step, reason }) => Err(reject(Some(step), reason)),
        Err(e) => Err(reject(None, e.to_string())),
    }
}

fn uniform_value(values: &[f64], what: &str) -> Result<f64> {
    let first = values[0];
    if values.iter().any(|&v| v != first) {
        return Err(Error::invalid(format!("dataset format stores a single {what}; bath must be identical on all sites")));
    }
    Ok(first)
}

/// Simulates `spec.n_samples` random Hamiltonians and writes the dataset
/// directory. Output bytes depend only on the inputs, never on `workers`.
/// `progress` receives (samples done, total).
pub fn generate_dataset(
    spec: &SamplingSpec,
    bath: &BathSpec,
    config: &HeomConfig,
    out: &Path,
    options: &GenerateOptions,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<GenerationSummary> {
    spec.validate()?;
    bath.validate()?;
    config.validate()?;
    if bath.n_sites() != spec.n_sites {
        return Err(Error::invalid(format!(
            "bath has {} sites, sampling spec has {}",
            bath.n_sites(),
            spec.n_sites
        )));
    }
    if config.initial_site >= spec.n_sites {
        return Err(Error::invalid(format!("initial site {} out of range", config.initial_site + 1)));
    }
    let lambda = uniform_value(&bath.lambdas, "reorganization energy")?;
    let gamma = uniform_value(&bath.gammas, "Drude cutoff")?;

    fs::create_dir_all(out)?;
    // an interrupted run must not leave a readable manifest behind
    match fs::remove_file(out.join(MANIFEST_FILE)) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
        _ => {}
    }
    let labels_path = out.join(LABELS_FILE);
    let features_path = out.join(FEATURES_FILE);
    let mut labels_out = BufWriter::new(File::create(&labels_path)?);
    let mut features_out = BufWriter::new(File::create(&features_path)?);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))?;
    let chunk = (pool.current_num_threads() * 4).max(16);

    let mut rejects = Vec::new();
    let mut n_records = 0usize;
    let mut bytes = Vec::new();
    let total = spec.n_samples;
    let mut start = 0usize;
    while start < total {
        let end = (start + chunk).min(total);
        let results: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_sample(spec, bath, config, options.coherence, i as u64))
                .collect()
        });
        for r in results {
            match r {
                Ok(sim) => {
                    bytes.clear();
                    f64s_to_le_bytes(sim.labels, &mut bytes);
                    labels_out.write_all(&bytes)?;
                    bytes.clear();
                    f64s_to_le_bytes(sim.features, &mut bytes);
                    features_out.write_all(&bytes)?;
                    n_records += 1;
                }
                Err(rej) => {
                    log::warn!("sample {} rejected: {}", rej.sample_id, rej.error);
                    rejects.push(rej);
                }
            }
        }
        if let Some(cb) = progress {
            cb(end, total);
        }
        start = end;
    }
    labels_out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    features_out.into_inner().map_err(|e| e.into_error())?.sync_all()?;

    let checksum = content_checksum(&[&labels_path, &features_path])?;
    fs::write(out.join(REJECTS_FILE), serde_json::to_string_pretty(&rejects)? + "\n")?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        n_sites: spec.n_sites,
        n_samples: spec.n_samples,
        n_steps: config.n_steps,
        dt_fs: config.dt * 1000.0,
        seed: spec.seed,
        energy_range: spec.energy_range,
        coupling_range: spec.coupling_range,
        lambda_cm1: lambda,
        gamma_cm1: gamma,
        temperature_k: bath.temperature,
        depth: config.truncation_depth,
        integrator: config.integrator,
        checksum_sha256: checksum,
        n_records,
        coherence: options.coherence,
        initial_site: config.initial_site + 1,
        energy_offset_cm1: SITE_ENERGY_OFFSET_CM1,
    };
    fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(GenerationSummary { manifest, rejects })
}
