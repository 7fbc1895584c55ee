//! Superoperators acting on N×N site-basis matrices.
//!
//! The site coupling operator V_j is the projector |j⟩⟨j|, so V_j^× and
//! V_j^∘ only touch row j and column j of their argument. The slice kernels
//! below exploit that and accumulate into an output buffer; the ndarray
//! wrappers are the public per-operator surface.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::BathSpec;
use crate::units::{cm1_to_angular, thermal_energy};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Bath constants of one site in internal rad/ps units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteBath {
    pub lambda: f64,
    pub gamma: f64,
    pub kt: f64,
}

impl SiteBath {
    pub fn from_spec(bath: &BathSpec, site: usize) -> Result<Self> {
        if site >= bath.n_sites() {
            return Err(Error::invalid(format!(
                "site {site} out of range for a {}-site bath",
                bath.n_sites()
            )));
        }
        Ok(Self {
            lambda: cm1_to_angular(bath.lambdas[site]),
            gamma: cm1_to_angular(bath.gammas[site]),
            kt: cm1_to_angular(thermal_energy(bath.temperature)?),
        })
    }

    /// Coefficient of i·V^× in Θ: 2λ k_BT.
    #[inline]
    pub fn commutator_weight(&self) -> f64 {
        2.0 * self.lambda * self.kt
    }

    /// Coefficient of V^∘ in Θ: λγ.
    #[inline]
    pub fn anticommutator_weight(&self) -> f64 {
        self.lambda * self.gamma
    }
}

/// out += c · [H, σ] for real H, all matrices row-major n×n.
#[inline]
pub(crate) fn add_commutator(h: &[f64], sigma: &[Complex64], c: Complex64, n: usize, out: &mut [Complex64]) {
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += sigma[k * n + b] * h[a * n + k] - sigma[a * n + k] * h[k * n + b];
            }
            out[a * n + b] += c * acc;
        }
    }
}

/// out += c · [|j⟩⟨j|, σ].
#[inline]
pub(crate) fn add_projector_commutator(j: usize, sigma: &[Complex64], c: Complex64, n: usize, out: &mut [Complex64]) {
    for k in 0..n {
        if k != j {
            out[j * n + k] += c * sigma[j * n + k];
            out[k * n + j] -= c * sigma[k * n + j];
        }
    }
}

/// out += c · {|j⟩⟨j|, σ}.
#[inline]
pub(crate) fn add_projector_anticommutator(
    j: usize,
    sigma: &[Complex64],
    c: Complex64,
    n: usize,
    out: &mut [Complex64],
) {
    for k in 0..n {
        out[j * n + k] += c * sigma[j * n + k];
        out[k * n + j] += c * sigma[k * n + j];
    }
}

fn square_dim(m: &ArrayView2<'_, Complex64>) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::invalid(format!("expected a square matrix, got {:?}", m.shape())));
    }
    Ok(m.nrows())
}

fn check_site(site: usize, n: usize) -> Result<()> {
    if site >= n {
        return Err(Error::invalid(format!("site {site} out of range for dimension {n}")));
    }
    Ok(())
}

/// [H, σ]; the Liouvillian L_e σ with hbar = 1.
pub fn liouvillian_apply(h: ArrayView2<'_, f64>, sigma: ArrayView2<'_, Complex64>) -> Result<Array2<Complex64>> {
    let n = square_dim(&sigma)?;
    if h.shape() != [n, n] {
        return Err(Error::invalid(format!(
            "Hamiltonian shape {:?} does not match σ shape {:?}",
            h.shape(),
            sigma.shape()
        )));
    }
    let h: Vec<f64> = h.iter().copied().collect();
    let s: Vec<Complex64> = sigma.iter().copied().collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    add_commutator(&h, &s, Complex64::new(1.0, 0.0), n, &mut out);
    Ok(Array2::from_shape_vec((n, n), out).expect("n×n buffer"))
}

/// Φ_j σ = i[V_j, σ]. `site` is zero-based.
pub fn phi_apply(site: usize, sigma: ArrayView2<'_, Complex64>) -> Result<Array2<Complex64>> {
    let n = square_dim(&sigma)?;
    check_site(site, n)?;
    let s: Vec<Complex64> = sigma.iter().copied().collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    add_projector_commutator(site, &s, I, n, &mut out);
    Ok(Array2::from_shape_vec((n, n), out).expect("n×n buffer"))
}

/// Θ_j σ = i·2λ_j k_BT [V_j, σ] + λ_j γ_j {V_j, σ}, in rad/ps units.
pub fn theta_apply(site: usize, sigma: ArrayView2<'_, Complex64>, bath: &BathSpec) -> Result<Array2<Complex64>> {
    let n = square_dim(&sigma)?;
    check_site(site, n)?;
    let sb = SiteBath::from_spec(bath, site)?;
    let s: Vec<Complex64> = sigma.iter().copied().collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    add_projector_commutator(site, &s, I * sb.commutator_weight(), n, &mut out);
    add_projector_anticommutator(site, &s, Complex64::new(sb.anticommutator_weight(), 0.0), n, &mut out);
    Ok(Array2::from_shape_vec((n, n), out).expect("n×n buffer"))
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, hermitian: bool) -> Array2<Complex64> {
        let mut m = Array2::from_shape_fn((n, n), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        if hermitian {
            m = (&m + &m.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        }
        m
    }

    fn projector(n: usize, j: usize) -> Array2<Complex64> {
        let mut v = Array2::zeros((n, n));
        v[[j, j]] = c(1.0, 0.0);
        v
    }

    fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn commuting_diagonals() {
        let h = array![[1.0, 0.0], [0.0, 3.0]];
        let s = array![[c(0.3, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.7, 0.0)]];
        assert!(liouvillian_apply(h.view(), s.view()).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_level_commutator() {
        let j = 2.5;
        let h = array![[0.0, j], [j, 0.0]];
        let s = projector(2, 0);
        let got = liouvillian_apply(h.view(), s.view()).unwrap();
        assert_eq!(got, array![[c(0.0, 0.0), c(-j, 0.0)], [c(j, 0.0), c(0.0, 0.0)]]);
    }

    #[test]
    fn dense_commutator_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let hc = random_matrix(&mut rng, 3, true).mapv(|z| c(z.re, 0.0));
        let h = hc.mapv(|z| z.re);
        let s = random_matrix(&mut rng, 3, true);
        let want = hc.dot(&s) - s.dot(&hc);
        assert!(max_diff(&liouvillian_apply(h.view(), s.view()).unwrap(), &want) < 1e-14);
        assert!(liouvillian_apply(array![[1.0]].view(), s.view()).is_err());
    }

    #[test]
    fn phi_cases() {
        let d = array![[c(0.4, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.6, 0.0)]];
        assert!(phi_apply(1, d.view()).unwrap().iter().all(|z| z.norm() == 0.0));

        let s = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]];
        let got = phi_apply(0, s.view()).unwrap();
        assert_eq!(got, array![[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]]);
        assert!(phi_apply(2, s.view()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_matrix(&mut rng, 4, false);
        for j in 0..4 {
            let v = projector(4, j);
            let want = (v.dot(&s) - s.dot(&v)).mapv(|z| z * I);
            assert!(max_diff(&phi_apply(j, s.view()).unwrap(), &want) < 1e-15);
        }
    }

    #[test]
    fn theta_cases() {
        let bath0 = BathSpec::uniform(3, 0.0, 106.1767, 300.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_matrix(&mut rng, 3, false);
        assert!(theta_apply(1, s.view(), &bath0).unwrap().iter().all(|z| z.norm() == 0.0));

        let bath = BathSpec::uniform(3, 35.0, 106.1767, 300.0).unwrap();
        let sb = SiteBath::from_spec(&bath, 2).unwrap();
        let id = Array2::from_diag(&ndarray::arr1(&[c(1.0, 0.0); 3]));
        let got = theta_apply(2, id.view(), &bath).unwrap();
        let want = projector(3, 2).mapv(|z| z * 2.0 * sb.lambda * sb.gamma);
        assert!(max_diff(&got, &want) < 1e-12);

        // term-by-term oracle in cm⁻¹ converted once
        let w = crate::units::CM1_TO_ANGULAR;
        let lam = 35.0 * w;
        let gam = 106.1767 * w;
        let kt = 300.0 * crate::units::KB_CM1_PER_K * w;
        for j in 0..3 {
            let v = projector(3, j);
            let comm = v.dot(&s) - s.dot(&v);
            let anti = v.dot(&s) + s.dot(&v);
            let want = comm.mapv(|z| z * I * 2.0 * lam * kt) + anti.mapv(|z| z * lam * gam);
            let got = theta_apply(j, s.view(), &bath).unwrap();
            assert!(max_diff(&got, &want) < 1e-10 * want.iter().map(|z| z.norm()).fold(1.0, f64::max));
        }
        assert!(theta_apply(3, s.view(), &bath).is_err());
    }
}
