//! On-disk dataset layout.
//!
//! A dataset is a directory holding:
//!
//! * `manifest.json`: metadata and the SHA-256 content checksum,
//! * `labels.f64`: little-endian f64, row-major `[n_records × 2(N−1)]`,
//! * `features.f64`: little-endian f64, row-major `[n_records × n_steps × (2N−1)]`,
//! * `rejects.json`: samples whose simulation failed; they have no rows.
//!
//! The checksum covers the bytes of `labels.f64` followed by those of
//! `features.f64`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::features::{n_features, CoherenceChannel, Trajectory};
use super::sampling::SamplingSpec;
use crate::error::{Error, Result};
use crate::heom::{HeomConfig, Integrator};
use crate::model::BathSpec;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LABELS_FILE: &str = "labels.f64";
pub const FEATURES_FILE: &str = "features.f64";
pub const REJECTS_FILE: &str = "rejects.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub n_sites: usize,
    /// Requested sample count, including rejects.
    pub n_samples: usize,
    pub n_steps: usize,
    pub dt_fs: f64,
    pub seed: u64,
    pub energy_range: [f64; 2],
    pub coupling_range: [f64; 2],
    pub lambda_cm1: f64,
    pub gamma_cm1: f64,
    #[serde(rename = "temperature_K")]
    pub temperature_k: f64,
    pub depth: u32,
    pub integrator: Integrator,
    pub checksum_sha256: String,
    /// Rows actually stored, n_samples minus rejects.
    pub n_records: usize,
    pub coherence: CoherenceChannel,
    /// One-based.
    pub initial_site: usize,
    pub energy_offset_cm1: f64,
}

impl Manifest {
    pub fn n_labels(&self) -> usize {
        2 * (self.n_sites - 1)
    }

    pub fn n_features(&self) -> usize {
        n_features(self.n_sites)
    }

    pub fn labels_len(&self) -> u64 {
        (self.n_records * self.n_labels() * 8) as u64
    }

    pub fn features_len(&self) -> u64 {
        (self.n_records * self.n_steps * self.n_features() * 8) as u64
    }

    pub fn sampling_spec(&self) -> SamplingSpec {
        SamplingSpec {
            n_sites: self.n_sites,
            energy_range: self.energy_range,
            coupling_range: self.coupling_range,
            n_samples: self.n_samples,
            seed: self.seed,
        }
    }

    pub fn bath(&self) -> Result<BathSpec> {
        BathSpec::uniform(self.n_sites, self.lambda_cm1, self.gamma_cm1, self.temperature_k)
    }

    pub fn config(&self) -> HeomConfig {
        HeomConfig {
            truncation_depth: self.depth,
            dt: self.dt_fs / 1000.0,
            n_steps: self.n_steps,
            integrator: self.integrator,
            initial_site: self.initial_site.saturating_sub(1),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedFormat(format!(
                "format version {} (this build reads version {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.n_sites < 2 || self.n_steps == 0 || self.n_records > self.n_samples {
            return Err(Error::UnsupportedFormat(format!(
                "inconsistent manifest: {} sites, {} steps, {} records of {} samples",
                self.n_sites, self.n_steps, self.n_records, self.n_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub sample_id: u64,
    pub sub_seed: u64,
    pub step: Option<usize>,
    pub error: String,
}

/// One stored sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub sample_id: u64,
    /// ε_2…ε_N then J_12…J_{N−1,N}, cm⁻¹.
    pub labels: Vec<f64>,
    pub trajectory: Trajectory,
}

pub(crate) fn f64s_to_le_bytes(values: impl IntoIterator<Item = f64>, out: &mut Vec<u8>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn le_bytes_to_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect()
}

/// SHA-256 of the given files' bytes, concatenated in order, hex-encoded.
pub fn content_checksum(files: &[&Path]) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    for path in files {
        let mut f = File::open(path)?;
        loop {
            let n = f.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

fn check_len(path: &Path, expected: u64) -> Result<()> {
    let actual = std::fs::metadata(path)
        .map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => Error::Corruption {
                file: path.to_path_buf(),
                detail: "file missing".into(),
            },
            _ => Error::Io(e),
        })?
        .len();
    if actual < expected {
        return Err(Error::Truncated {
            file: path.to_path_buf(),
            offset: actual,
            expected,
        });
    }
    if actual > expected {
        return Err(Error::Corruption {
            file: path.to_path_buf(),
            detail: format!("{} unexpected trailing bytes after byte offset {expected}", actual - expected),
        });
    }
    Ok(())
}

/// Streaming reader over a dataset directory.
#[derive(Debug)]
pub struct DatasetReader {
    dir: PathBuf,
    manifest: Manifest,
    rejects: Vec<Reject>,
}

impl DatasetReader {
    /// Reads the manifest and verifies file sizes and the content checksum.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let reader = Self::open_unverified(dir)?;
        reader.verify()?;
        Ok(reader)
    }

    /// Reads the manifest and rejects without touching the bulk files.
    pub fn open_unverified(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let manifest_path = dir.join(MANIFEST_FILE);
        let text = match std::fs::read_to_string(&manifest_path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(Error::UnsupportedFormat(format!("no {MANIFEST_FILE} in {}", dir.display())))
            }
            Err(e) => return Err(e.into()),
        };
        let raw: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::UnsupportedFormat(format!("unreadable manifest: {e}")))?;
        match raw.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::UnsupportedFormat(format!(
                    "format version {v} (this build reads version {FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::UnsupportedFormat("manifest lacks format_version".into())),
        }
        let manifest: Manifest = serde_json::from_value(raw)?;
        manifest.validate()?;
        let rejects_path = dir.join(REJECTS_FILE);
        let rejects: Vec<Reject> = match std::fs::read_to_string(&rejects_path) {
            Ok(t) => serde_json::from_str(&t)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        if manifest.n_records + rejects.len() != manifest.n_samples {
            return Err(Error::Corruption {
                file: rejects_path,
                detail: format!(
                    "{} records plus {} rejects do not add up to {} samples",
                    manifest.n_records,
                    rejects.len(),
                    manifest.n_samples
                ),
            });
        }
        Ok(Self { dir, manifest, rejects })
    }

    /// File sizes, then checksum.
    pub fn verify(&self) -> Result<()> {
        let labels = self.dir.join(LABELS_FILE);
        let features = self.dir.join(FEATURES_FILE);
        check_len(&labels, self.manifest.labels_len())?;
        check_len(&features, self.manifest.features_len())?;
        let sum = content_checksum(&[&labels, &features])?;
        if sum != self.manifest.checksum_sha256 {
            return Err(Error::Corruption {
                file: self.dir.clone(),
                detail: format!(
                    "checksum mismatch: manifest records {}, content hashes to {sum}",
                    self.manifest.checksum_sha256
                ),
            });
        }
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn rejects(&self) -> &[Reject] {
        &self.rejects
    }

    /// Sample ids of the stored rows, ascending.
    pub fn sample_ids(&self) -> Vec<u64> {
        let rejected: BTreeSet<u64> = self.rejects.iter().map(|r| r.sample_id).collect();
        (0..self.manifest.n_samples as u64).filter(|id| !rejected.contains(id)).collect()
    }

    /// Lazily yields records in sample-id order. `window_steps` keeps only
    /// the first that many time steps of every trajectory.
    pub fn records(&self, window_steps: Option<usize>) -> Result<Records> {
        let m = &self.manifest;
        let window = window_steps.unwrap_or(m.n_steps);
        if window == 0 || window > m.n_steps {
            return Err(Error::invalid(format!(
                "window of {window} steps outside the stored 1..={} steps",
                m.n_steps
            )));
        }
        Ok(Records {
            labels: BufReader::new(File::open(self.dir.join(LABELS_FILE))?),
            features: BufReader::new(File::open(self.dir.join(FEATURES_FILE))?),
            features_path: self.dir.join(FEATURES_FILE),
            labels_path: self.dir.join(LABELS_FILE),
            ids: self.sample_ids().into_iter(),
            n_labels: m.n_labels(),
            n_features: m.n_features(),
            n_steps: m.n_steps,
            window,
            dt_ps: m.dt_fs / 1000.0,
            offset: 0,
        })
    }
}

/// Iterator returned by [`DatasetReader::records`].
#[derive(Debug)]
pub struct Records {
    labels: BufReader<File>,
    features: BufReader<File>,
    labels_path: PathBuf,
    features_path: PathBuf,
    ids: std::vec::IntoIter<u64>,
    n_labels: usize,
    n_features: usize,
    n_steps: usize,
    window: usize,
    dt_ps: f64,
    /// Byte offset into the features file.
    offset: u64,
}

fn read_block(r: &mut impl Read, len: usize, path: &Path, offset: u64) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Corruption {
            file: path.to_path_buf(),
            detail: format!("unexpected end of file while reading {len} bytes at byte offset {offset}"),
        },
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

impl Records {
    fn next_record(&mut self, sample_id: u64, index: u64) -> Result<DatasetRecord> {
        let lbytes = self.n_labels * 8;
        let labels = le_bytes_to_f64s(&read_block(&mut self.labels, lbytes, &self.labels_path, index * lbytes as u64)?);

        let row = self.n_features * 8;
        let kept = read_block(&mut self.features, self.window * row, &self.features_path, self.offset)?;
        let skipped = ((self.n_steps - self.window) * row) as i64;
        if skipped > 0 {
            self.features.seek(SeekFrom::Current(skipped))?;
        }
        self.offset += (self.n_steps * row) as u64;

        let features = Array2::from_shape_vec((self.window, self.n_features), le_bytes_to_f64s(&kept))
            .expect("window × features block");
        let times = (1..=self.window).map(|k| k as f64 * self.dt_ps).collect();
        Ok(DatasetRecord {
            sample_id,
            labels,
            trajectory: Trajectory { times, features },
        })
    }
}

impl Iterator for Records {
    type Item = Result<DatasetRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let position = self.offset / (self.n_steps * self.n_features * 8) as u64;
        let id = self.ids.next()?;
        Some(self.next_record(id, position))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.ids.size_hint()
    }
}
