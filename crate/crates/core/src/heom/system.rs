use ndarray::linalg::kron;
use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use super::operators::{add_commutator, add_projector_anticommutator, add_projector_commutator, SiteBath};
use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, HierarchyIndex};
use crate::model::{BathSpec, DensityMatrix, SystemHamiltonian};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// All auxiliary density operators at one instant, stored contiguously in
/// hierarchy order; operator k occupies `data[k·N² .. (k+1)·N²]` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    n_sites: usize,
    n_ados: usize,
    pub time: f64,
    data: Vec<Complex64>,
}

impl HierarchyState {
    pub fn zeros(n_sites: usize, n_ados: usize) -> Self {
        Self {
            n_sites,
            n_ados,
            time: 0.0,
            data: vec![ZERO; n_sites * n_sites * n_ados],
        }
    }

    /// ρ in slot 0 and every auxiliary operator zero.
    pub fn from_density(rho: &DensityMatrix, n_ados: usize) -> Self {
        let mut s = Self::zeros(rho.dim(), n_ados);
        s.data[..rho.dim() * rho.dim()].copy_from_slice(rho.view().as_standard_layout().as_slice().expect("contiguous"));
        s
    }

    pub fn from_vec(n_sites: usize, n_ados: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_sites * n_sites * n_ados {
            return Err(Error::Internal(format!(
                "state buffer of length {} does not hold {n_ados} operators of size {n_sites}×{n_sites}",
                data.len()
            )));
        }
        Ok(Self {
            n_sites,
            n_ados,
            time: 0.0,
            data,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_ados(&self) -> usize {
        self.n_ados
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn ado(&self, k: usize) -> ArrayView2<'_, Complex64> {
        let nn = self.n_sites * self.n_sites;
        ArrayView2::from_shape((self.n_sites, self.n_sites), &self.data[k * nn..(k + 1) * nn]).expect("n×n block")
    }

    /// σ(0, t), the reduced density matrix.
    pub fn rho(&self) -> DensityMatrix {
        DensityMatrix::from_array(self.ado(0).to_owned()).expect("square block")
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// A Hamiltonian, bath and truncated hierarchy, preprocessed into internal
/// units for repeated right-hand-side evaluation.
#[derive(Debug, Clone)]
pub struct HeomSystem {
    hierarchy: Hierarchy,
    /// Row-major N×N, rad/ps.
    hamiltonian: Vec<f64>,
    baths: Vec<SiteBath>,
    /// Σ_j n_j γ_j per hierarchy position.
    damping: Vec<f64>,
    /// Depth-K tier evolves under the bare Liouvillian.
    terminal: Vec<bool>,
}

impl HeomSystem {
    pub fn new(h: &SystemHamiltonian, bath: &BathSpec, depth: u32) -> Result<Self> {
        bath.validate()?;
        let n = h.n_sites();
        if bath.n_sites() != n {
            return Err(Error::invalid(format!(
                "bath describes {} sites but the Hamiltonian has {n}",
                bath.n_sites()
            )));
        }
        if depth == 0 {
            return Err(Error::invalid("truncation depth must be at least 1"));
        }
        for (j, r) in bath.high_temperature_ratios().iter().enumerate() {
            if *r >= 1.0 {
                log::warn!("site {}: ħγ/k_BT = {r:.3} ≥ 1, high-temperature hierarchy is unreliable", j + 1);
            }
        }
        let hierarchy = Hierarchy::new(n, depth);
        let baths = (0..n).map(|j| SiteBath::from_spec(bath, j)).collect::<Result<Vec<_>>>()?;
        let damping = hierarchy
            .indices()
            .iter()
            .map(|idx| idx.components().iter().zip(&baths).map(|(&nj, b)| nj as f64 * b.gamma).sum())
            .collect();
        let terminal = hierarchy.indices().iter().map(|idx| idx.depth() == depth).collect();
        Ok(Self {
            hamiltonian: h.angular_matrix().iter().copied().collect(),
            hierarchy,
            baths,
            damping,
            terminal,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.hierarchy.n_sites()
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    /// Length of the flattened state vector.
    pub fn state_dim(&self) -> usize {
        self.hierarchy.len() * self.n_sites() * self.n_sites()
    }

    pub fn initial_state(&self, rho: &DensityMatrix) -> Result<HierarchyState> {
        if rho.dim() != self.n_sites() {
            return Err(Error::invalid(format!(
                "initial density matrix is {}×{} but the system has {} sites",
                rho.dim(),
                rho.dim(),
                self.n_sites()
            )));
        }
        Ok(HierarchyState::from_density(rho, self.hierarchy.len()))
    }

    /// dσ/dt for the whole hierarchy, written into `out`.
    pub(crate) fn rhs_into(&self, state: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_sites();
        let nn = n * n;
        let minus_i = -I;
        out.fill(ZERO);
        for pos in 0..self.hierarchy.len() {
            let sigma = &state[pos * nn..(pos + 1) * nn];
            let dst = &mut out[pos * nn..(pos + 1) * nn];
            add_commutator(&self.hamiltonian, sigma, minus_i, n, dst);
            if self.terminal[pos] {
                continue;
            }
            let damp = self.damping[pos];
            if damp != 0.0 {
                for (d, s) in dst.iter_mut().zip(sigma) {
                    *d -= s * damp;
                }
            }
            let index = self.hierarchy.indices()[pos].components();
            for (j, bath) in self.baths.iter().enumerate() {
                if let Some(up) = self.hierarchy.raised(pos, j) {
                    add_projector_commutator(j, &state[up * nn..(up + 1) * nn], I, n, dst);
                }
                if let Some(down) = self.hierarchy.lowered(pos, j) {
                    let nj = index[j] as f64;
                    let lower = &state[down * nn..(down + 1) * nn];
                    add_projector_commutator(j, lower, I * (nj * bath.commutator_weight()), n, dst);
                    add_projector_anticommutator(j, lower, Complex64::new(nj * bath.anticommutator_weight(), 0.0), n, dst);
                }
            }
        }
    }

    /// Time derivative of a full hierarchy state.
    pub fn rhs(&self, state: &HierarchyState) -> Result<HierarchyState> {
        if state.n_sites() != self.n_sites() || state.n_ados() != self.hierarchy.len() {
            return Err(Error::Internal(format!(
                "state holds {} operators of dimension {}, hierarchy expects {} of dimension {}",
                state.n_ados(),
                state.n_sites(),
                self.hierarchy.len(),
                self.n_sites()
            )));
        }
        let mut out = HierarchyState::zeros(self.n_sites(), self.hierarchy.len());
        out.time = state.time;
        self.rhs_into(state.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// Assembles the generator G with dσ/dt = G·vec(σ) from Kronecker
    /// superoperators, independently of [`HeomSystem::rhs`].
    pub fn generator(&self) -> Result<SparseGenerator> {
        let n = self.n_sites();
        let nn = n * n;
        let eye = Array2::<Complex64>::eye(n);
        let to_complex = |m: &Array2<f64>| m.mapv(|v| Complex64::new(v, 0.0));
        let h = to_complex(&Array2::from_shape_vec((n, n), self.hamiltonian.clone()).expect("n×n"));
        // row-major vec: vec(Aσ) = (A ⊗ 1) vec σ, vec(σB) = (1 ⊗ Bᵀ) vec σ
        let comm = |a: &Array2<Complex64>| kron(a, &eye) - kron(&eye, &a.t().to_owned());
        let anti = |a: &Array2<Complex64>| kron(a, &eye) + kron(&eye, &a.t().to_owned());

        let liouville = comm(&h).mapv(|z| -I * z);
        let mut v_comm = Vec::with_capacity(n);
        let mut v_anti = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = Array2::zeros((n, n));
            v[[j, j]] = Complex64::new(1.0, 0.0);
            v_comm.push(comm(&v));
            v_anti.push(anti(&v));
        }

        let dim = self.state_dim();
        let mut g = SparseGenerator::new(dim);
        let indices = self.hierarchy.indices();
        for (pos, idx) in indices.iter().enumerate() {
            let mut diag = liouville.clone();
            if !self.terminal[pos] {
                let damp: f64 = idx.components().iter().zip(&self.baths).map(|(&k, b)| k as f64 * b.gamma).sum();
                diag -= &Array2::<Complex64>::eye(nn).mapv(|z| z * damp);
            }
            g.add_block(pos, pos, &diag, nn);
            if self.terminal[pos] {
                continue;
            }
            for j in 0..n {
                let up = idx.raised(j);
                if let Some(q) = indices.iter().position(|m| *m == up) {
                    g.add_block(pos, q, &v_comm[j].mapv(|z| I * z), nn);
                }
                if let Some(down) = idx.lowered(j) {
                    let q = indices
                        .iter()
                        .position(|m| *m == down)
                        .ok_or_else(|| Error::Internal(format!("lowered index {down} missing from hierarchy")))?;
                    let nj = idx.components()[j] as f64;
                    let b = &self.baths[j];
                    let block = v_comm[j].mapv(|z| I * z * (nj * 2.0 * b.lambda * b.kt))
                        + v_anti[j].mapv(|z| z * (nj * b.lambda * b.gamma));
                    g.add_block(pos, q, &block, nn);
                }
            }
        }
        Ok(g)
    }

    pub fn index_of(&self, index: &HierarchyIndex) -> Option<usize> {
        self.hierarchy.position(index)
    }
}

/// Coordinate-format sparse generator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGenerator {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseGenerator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    fn add_block(&mut self, row_block: usize, col_block: usize, block: &Array2<Complex64>, size: usize) {
        for ((r, c), &v) in block.indexed_iter() {
            if v != ZERO {
                self.entries.push((row_block * size + r, col_block * size + c, v));
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.entries {
            m[[r, c]] += v;
        }
        m
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.dim {
            return Err(Error::Internal(format!(
                "vector of length {} applied to a generator of dimension {}",
                x.len(),
                self.dim
            )));
        }
        let mut y = vec![ZERO; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }
}
