use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heom::Evolution;
use crate::model::DensityMatrix;

/// Scalar kept from each nearest-neighbour coherence ρ_{j,j+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceChannel {
    #[default]
    Real,
    Imag,
    Abs,
}

impl CoherenceChannel {
    fn project(self, z: Complex64) -> f64 {
        match self {
            CoherenceChannel::Real => z.re,
            CoherenceChannel::Imag => z.im,
            CoherenceChannel::Abs => z.norm(),
        }
    }
}

impl fmt::Display for CoherenceChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoherenceChannel::Real => "real",
            CoherenceChannel::Imag => "imag",
            CoherenceChannel::Abs => "abs",
        })
    }
}

impl FromStr for CoherenceChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "re" => Ok(Self::Real),
            "imag" | "im" => Ok(Self::Imag),
            "abs" => Ok(Self::Abs),
            other => Err(Error::invalid(format!("unknown coherence channel {other:?}"))),
        }
    }
}

/// Number of feature columns for an N-site chain: N populations plus N−1 coherences.
pub fn n_features(n_sites: usize) -> usize {
    2 * n_sites - 1
}

/// Columns p_1…p_N (Re ρ_jj) then c_1…c_{N−1} (projected ρ_{j,j+1}), one row per matrix.
pub fn extract_features(rhos: &[DensityMatrix], channel: CoherenceChannel) -> Result<Array2<f64>> {
    let first = rhos.first().ok_or_else(|| Error::invalid("cannot extract features from an empty series"))?;
    let n = first.dim();
    if let Some(bad) = rhos.iter().find(|r| r.dim() != n) {
        return Err(Error::invalid(format!("mixed dimensions {n} and {} in series", bad.dim())));
    }
    let mut out = Array2::zeros((rhos.len(), n_features(n)));
    for (mut row, rho) in out.rows_mut().into_iter().zip(rhos) {
        for j in 0..n {
            row[j] = rho[(j, j)].re;
        }
        for j in 0..n - 1 {
            row[n + j] = channel.project(rho[(j, j + 1)]);
        }
    }
    Ok(out)
}

/// Feature time series of one simulated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// ps
    pub times: Vec<f64>,
    /// times.len() × (2N−1)
    pub features: Array2<f64>,
}

impl Trajectory {
    /// Keeps the n_steps samples after t = 0; the initial state is the same for every sample.
    pub fn from_evolution(ev: &Evolution, channel: CoherenceChannel) -> Result<Self> {
        if ev.len() < 2 {
            return Err(Error::invalid("evolution has no steps after the initial state"));
        }
        Ok(Self {
            times: ev.times[1..].to_vec(),
            features: extract_features(&ev.rhos[1..], channel)?,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.features.ncols().div_ceil(2)
    }

    /// Failures of the population/coherence bounds, as human-readable strings.
    pub fn check_invariants(&self, tol: f64) -> Vec<String> {
        let n = self.n_sites();
        let mut problems = Vec::new();
        for (k, row) in self.features.rows().into_iter().enumerate() {
            let pops = row.slice(ndarray::s![..n]);
            let sum: f64 = pops.sum();
            if (sum - 1.0).abs() > tol {
                problems.push(format!("row {k}: populations sum to {sum}"));
            }
            if let Some(p) = pops.iter().find(|&&p| p < -tol || p > 1.0 + tol || !p.is_finite()) {
                problems.push(format!("row {k}: population {p} out of [0, 1]"));
            }
            if let Some(c) = row.slice(ndarray::s![n..]).iter().find(|&&c| c.abs() > 1.0 + tol || !c.is_finite()) {
                problems.push(format!("row {k}: coherence {c} out of [-1, 1]"));
            }
        }
        problems
    }
}

#[cfg(test)]
mod tests {
    use ndarray::array;

    use super::*;

    #[test]
    fn stationary_state() {
        let rho = DensityMatrix::site_projector(2, 0).unwrap();
        let f = extract_features(&vec![rho; 4], CoherenceChannel::Real).unwrap();
        assert_eq!(f.shape(), &[4, 3]);
        for row in f.rows() {
            assert_eq!(row.to_vec(), vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn channels_and_order() {
        let c = |re, im| Complex64::new(re, im);
        let m = array![
            [c(0.5, 0.0), c(0.1, 0.2), c(9.0, 9.0)],
            [c(0.1, -0.2), c(0.3, 0.0), c(-0.05, 0.12)],
            [c(9.0, -9.0), c(-0.05, -0.12), c(0.2, 0.0)]
        ];
        let rho = DensityMatrix::from_array(m).unwrap();
        let re = extract_features(std::slice::from_ref(&rho), CoherenceChannel::Real).unwrap();
        assert_eq!(re.row(0).to_vec(), vec![0.5, 0.3, 0.2, 0.1, -0.05]);
        let im = extract_features(std::slice::from_ref(&rho), CoherenceChannel::Imag).unwrap();
        assert_eq!(im.row(0).to_vec(), vec![0.5, 0.3, 0.2, 0.2, 0.12]);
        let ab = extract_features(std::slice::from_ref(&rho), "abs".parse().unwrap()).unwrap();
        assert!((ab[[0, 4]] - 0.13).abs() < 1e-15);
    }

    #[test]
    fn empty_series() {
        assert!(matches!(extract_features(&[], CoherenceChannel::Real), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn invariant_checker() {
        let t = Trajectory {
            times: vec![0.1, 0.2],
            features: array![[0.6, 0.4, 0.1], [0.7, 0.4, 1.5]],
        };
        let p = t.check_invariants(1e-8);
        assert_eq!(p.len(), 2);
        assert!(p[0].starts_with("row 1: populations"));
    }
}
