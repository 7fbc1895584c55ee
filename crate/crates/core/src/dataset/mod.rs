//! Random linear-chain datasets: Hamiltonian sampling, feature extraction,
//! parallel generation and the binary on-disk format.

mod features;
mod format;
mod generate;
mod sampling;

pub use features::{extract_features, n_features, CoherenceChannel, Trajectory};
pub use format::{
    content_checksum, DatasetReader, DatasetRecord, Manifest, Records, Reject, FEATURES_FILE, FORMAT_VERSION,
    LABELS_FILE, MANIFEST_FILE, REJECTS_FILE,
};
pub use generate::{generate_dataset, simulate_sample, GenerateOptions, GenerationSummary, STORE_TOLERANCE};
pub use sampling::{mix64, sample_hamiltonian, sub_seed, SamplingSpec};
