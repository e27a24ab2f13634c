//! Thermal states over stabilizer (or small generic) Hamiltonians and
//! the Glauber transition-rate profile.

use crate::eigen::dense_symmetric_eig;
use crate::model::{EigenBasis, StabilizerModel};
use crate::sparse::SparseOperator;
use crate::{Error, Result};
use num_complex::Complex64;

/// Gibbs state data: `sigma_beta = e^{-beta H} / Z` held diagonally in the
/// model's eigenbasis; weights are computed in log space.
#[derive(Clone, Debug)]
pub struct GibbsModel {
    pub beta: f64,
    pub coupling_j: f64,
    pub log_partition: f64,
    pub hamiltonian: SparseOperator,
    pub basis: EigenBasis,
    pub model: Option<StabilizerModel>,
}

/// Glauber rate `gamma(omega) = 2 / (e^{beta omega} + 1)`.
///
/// Well-defined for `beta = +inf` (rates 0 / 1 / 2 by the sign of omega).
pub fn glauber_rate(omega: f64, beta: f64) -> f64 {
    if omega == 0.0 {
        return 1.0;
    }
    2.0 / ((beta * omega).exp() + 1.0)
}

/// Thermal state of an explicitly given hermitian matrix (dense
/// eigendecomposition route; used as the generic oracle).
pub fn gibbs_state(h: &SparseOperator, beta: f64) -> Result<GibbsModel> {
    if beta < 0.0 || !beta.is_finite() {
        return Err(Error::InvalidArgument("beta must be finite and >= 0".into()));
    }
    let scale = h.max_abs().max(1.0);
    let herm = h.hermiticity_deviation();
    if herm > 1e-10 * scale {
        return Err(Error::NotHermitian(herm));
    }
    if h.dim > 4096 {
        return Err(Error::TooLarge("generic gibbs_state is a dense route (dim <= 4096)".into()));
    }
    let hd = h.to_dense_real(1e-12)?;
    let sym = (&hd + &hd.t()) / 2.0;
    let (energies, vectors) = dense_symmetric_eig(&sym)?;
    let transform = SparseOperator::from_dense(&vectors.mapv(|x| Complex64::new(x, 0.0)), 1e-14);
    let basis = EigenBasis { dim: h.dim, energies, transform: Some(transform) };
    GibbsModel::from_basis(h.clone(), basis, beta, 1.0, None)
}

impl GibbsModel {
    /// Thermal state of a stabilizer model in its exact eigenbasis.
    pub fn from_model(model: StabilizerModel, beta: f64) -> Result<GibbsModel> {
        if beta < 0.0 || !beta.is_finite() {
            return Err(Error::InvalidArgument("beta must be finite and >= 0".into()));
        }
        let basis = model.eigenbasis()?;
        let h = model.hamiltonian_sparse()?;
        let j = model.coupling_strength();
        GibbsModel::from_basis(h, basis, beta, j, Some(model))
    }

    fn from_basis(
        hamiltonian: SparseOperator,
        basis: EigenBasis,
        beta: f64,
        coupling_j: f64,
        model: Option<StabilizerModel>,
    ) -> Result<GibbsModel> {
        let log_partition = log_sum_exp(basis.energies.iter().map(|&e| -beta * e));
        Ok(GibbsModel { beta, coupling_j, log_partition, hamiltonian, basis, model })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    /// Diagonal weights of sigma_beta in the eigenbasis; sums to one.
    pub fn sigma_weights(&self) -> Vec<f64> {
        self.basis
            .energies
            .iter()
            .map(|&e| (-self.beta * e - self.log_partition).exp())
            .collect()
    }

    /// sigma_beta as a computational-basis operator.
    pub fn sigma_computational(&self) -> Result<SparseOperator> {
        let diag = SparseOperator::diagonal(&self.sigma_weights());
        self.basis.conjugate_back(&diag)
    }

    /// Row-major vectorization of sqrt(sigma_beta) in the eigenbasis; this
    /// is the exact kernel vector of the master Hamiltonian and is already
    /// unit-norm.
    pub fn sqrt_sigma_vec(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut v = vec![Complex64::default(); d * d];
        for (i, &e) in self.basis.energies.iter().enumerate() {
            v[i * d + i] = Complex64::new(((-self.beta * e - self.log_partition) / 2.0).exp(), 0.0);
        }
        v
    }

    /// Per-entry master-gauge weight `exp(-beta (E_j - E_l) / 2)` for the
    /// vectorized entry ((i,j),(k,l)).
    pub fn master_weight(&self, j: usize, l: usize) -> f64 {
        (-self.beta * (self.basis.energies[j] - self.basis.energies[l]) / 2.0).exp()
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}
