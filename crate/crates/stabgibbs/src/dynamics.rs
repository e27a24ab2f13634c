//! Lindblad time evolution, divergence functionals, and mixing traces.
//!
//! Density matrices live in the model eigen frame (where σ_β is
//! diagonal). Evolution runs in the master gauge: with `p = ·σ^{1/2}`,
//! `e^{t L†} ρ = p e^{t L~} p^{-1} ρ`, and `L~` is hermitian, so the
//! propagation is a Lanczos exponential of a hermitian matrix.

use crate::davies::{Gauge, Superoperator};
use crate::eigen::{dense_hermitian_eigvals, expm_hermitian_apply, LinOp};
use crate::gibbs::GibbsModel;
use crate::sparse::SparseOperator;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

/// Hermitian, PSD, trace-one matrix in the model eigen frame.
#[derive(Clone, Debug)]
pub struct DensityState {
    pub dim: usize,
    pub matrix: Array2<Complex64>,
}

impl DensityState {
    pub fn new(matrix: Array2<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: matrix.ncols() });
        }
        let state = DensityState { dim, matrix };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self
            .matrix
            .indexed_iter()
            .map(|((i, j), v)| (v - self.matrix[[j, i]].conj()).norm())
            .fold(0.0, f64::max);
        if herm > 1e-10 {
            return Err(Error::NotHermitian(herm));
        }
        let tr: Complex64 = self.matrix.diag().sum();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("trace {} is not one", tr.re)));
        }
        let evals = dense_hermitian_eigvals(&self.matrix)?;
        if evals.iter().any(|&e| e < -1e-9) {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {:.3e}",
                evals.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        Ok(())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut m = Array2::zeros((dim, dim));
        for i in 0..dim {
            m[[i, i]] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityState { dim, matrix: m }
    }

    pub fn pure(vector: &[Complex64]) -> Result<Self> {
        let dim = vector.len();
        let n: f64 = vector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-12 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        let mut m = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                m[[i, j]] = vector[i] * vector[j].conj() / (n * n);
            }
        }
        Ok(DensityState { dim, matrix: m })
    }

    /// Haar-random pure state (Gaussian vector, normalized).
    pub fn random_pure(rng: &mut impl Rng, dim: usize) -> Self {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| {
                // Box-Muller pairs
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (-2.0 * u1.ln()).sqrt();
                Complex64::new(r * u2.cos(), r * u2.sin())
            })
            .collect();
        Self::pure(&v).expect("gaussian vector is nonzero")
    }

    /// The thermal state itself.
    pub fn thermal(gm: &GibbsModel) -> Self {
        let w = gm.sigma_weights();
        let mut m = Array2::zeros((gm.dim(), gm.dim()));
        for (i, &wi) in w.iter().enumerate() {
            m[[i, i]] = Complex64::new(wi, 0.0);
        }
        DensityState { dim: gm.dim(), matrix: m }
    }

    fn to_vec(&self) -> Vec<Complex64> {
        let d = self.dim;
        let mut v = vec![Complex64::default(); d * d];
        for ((i, j), val) in self.matrix.indexed_iter() {
            v[i * d + j] = *val;
        }
        v
    }

    fn from_vec(d: usize, v: &[Complex64]) -> Self {
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = v[i * d + j];
            }
        }
        // enforce exact hermiticity of the numerical propagation
        let mh = m.mapv(|c: Complex64| c.conj()).reversed_axes();
        DensityState { dim: d, matrix: (&m + &mh) / Complex64::new(2.0, 0.0) }
    }
}

/// Convert a Lindblad-gauge superoperator (eigen frame) to the master
/// gauge by the entrywise weight transform.
pub fn to_master_gauge(l: &Superoperator, gm: &GibbsModel) -> Result<Superoperator> {
    match l.gauge {
        Gauge::MasterHamiltonian => Ok(l.clone()),
        Gauge::LindbladHeisenberg => crate::davies::master_hamiltonian(l, gm),
        Gauge::LindbladSchrodinger => {
            let d = l.op_dim;
            let triplets = l
                .matrix
                .iter_triplets()
                .map(|(r, c, v)| {
                    let (j, lcol) = (r % d, c % d);
                    // P^{-1} M_S P: entry x sqrt(w_l / w_j)
                    (r, c, v * gm.master_weight(lcol, j))
                })
                .collect();
            let matrix = SparseOperator::from_triplets(d * d, triplets)?;
            let dev = matrix.hermiticity_deviation();
            if dev > 1e-10 * matrix.max_abs().max(1e-300) {
                return Err(Error::DetailedBalance(dev));
            }
            Ok(Superoperator {
                op_dim: d,
                matrix,
                gauge: Gauge::MasterHamiltonian,
                frame: l.frame,
            })
        }
    }
}

/// `e^{t L†} ρ0` for a detailed-balanced generator given in the
/// Schrödinger (or master) gauge, eigen frame.
pub fn evolve(l: &Superoperator, gm: &GibbsModel, rho0: &DensityState, t: f64) -> Result<DensityState> {
    if t < 0.0 {
        return Err(Error::InvalidArgument("negative evolution time".into()));
    }
    if rho0.dim != l.op_dim {
        return Err(Error::Dimension { expected: l.op_dim, got: rho0.dim });
    }
    let master = to_master_gauge(l, gm)?;
    let d = l.op_dim;
    let w = gm.sigma_weights();
    // w0 = P^{-1} vec(rho)
    let mut v = rho0.to_vec();
    for i in 0..d {
        for j in 0..d {
            v[i * d + j] /= Complex64::new(w[j].sqrt(), 0.0);
        }
    }
    let out = expm_hermitian_apply(&master.matrix as &dyn LinOp, &v, t, 1e-9)?;
    let mut res = out;
    for i in 0..d {
        for j in 0..d {
            res[i * d + j] *= Complex64::new(w[j].sqrt(), 0.0);
        }
    }
    let state = DensityState::from_vec(d, &res);
    let tr: Complex64 = state.matrix.diag().sum();
    if (tr.re - 1.0).abs() > 1e-9 {
        return Err(Error::Solver(format!("trace drifted to {}", tr.re)));
    }
    Ok(state)
}

/// χ²(ρ, σ_β) = Tr[(ρ-σ) σ^{-1/2} (ρ-σ) σ^{-1/2}].
pub fn chi2_divergence(rho: &DensityState, gm: &GibbsModel) -> Result<f64> {
    if rho.dim != gm.dim() {
        return Err(Error::Dimension { expected: gm.dim(), got: rho.dim });
    }
    let w = gm.sigma_weights();
    if w.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidArgument("sigma is singular".into()));
    }
    let mut acc = 0.0;
    for ((i, j), v) in rho.matrix.indexed_iter() {
        let delta = if i == j { v - Complex64::new(w[i], 0.0) } else { *v };
        acc += delta.norm_sqr() / (w[i].sqrt() * w[j].sqrt());
    }
    Ok(acc)
}

/// Trace distance `||rho - sigma||_tr / 2` of two density states.
pub fn trace_distance(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    if rho.dim != sigma.dim {
        return Err(Error::Dimension { expected: rho.dim, got: sigma.dim });
    }
    let delta = &rho.matrix - &sigma.matrix;
    let evals = dense_hermitian_eigvals(&delta)?;
    Ok(evals.iter().map(|e| e.abs()).sum::<f64>() / 2.0)
}

/// Time series of divergences along the evolution.
#[derive(Clone, Debug, serde::Serialize)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub chi2: Vec<f64>,
    pub trace_dist: Vec<f64>,
    pub fitted_rate: f64,
}

impl EvolutionTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,chi2,trace_dist\n");
        for ((t, c), d) in self.times.iter().zip(&self.chi2).zip(&self.trace_dist) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", t, c, d));
        }
        out
    }
}

/// Evolve on a time grid and check the decay bound
/// `χ²(t) <= χ²(0) e^{-2 α t} (1 + 1e-6)` pointwise; a violation is an
/// error (it falsifies either the gap or the evolution).
pub fn mixing_trace(
    l: &Superoperator,
    gm: &GibbsModel,
    rho0: &DensityState,
    times: &[f64],
    alpha: f64,
) -> Result<EvolutionTrace> {
    let sigma = DensityState::thermal(gm);
    let mut chi2 = Vec::with_capacity(times.len());
    let mut tdist = Vec::with_capacity(times.len());
    let mut current = rho0.clone();
    let mut prev_t = 0.0;
    let chi0 = chi2_divergence(rho0, gm)?;
    for &t in times {
        if t < prev_t {
            return Err(Error::InvalidArgument("time grid must be nondecreasing".into()));
        }
        current = evolve(l, gm, &current, t - prev_t)?;
        prev_t = t;
        let c = chi2_divergence(&current, gm)?;
        let d = trace_distance(&current, &sigma)?;
        let bound = chi0 * (-2.0 * alpha * t).exp() * (1.0 + 1e-6) + 1e-12;
        if c > bound {
            return Err(Error::Solver(format!(
                "chi2 decay bound violated at t={t}: {c:.6e} > {bound:.6e}"
            )));
        }
        chi2.push(c);
        tdist.push(d);
    }
    // least-squares slope of ln chi2 vs t over the usable range
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&chi2)
        .filter(|(_, &c)| c > 1e-13 * chi0.max(1e-300))
        .map(|(&t, &c)| (t, c.ln()))
        .collect();
    let fitted_rate = if pts.len() >= 2 { -linear_slope(&pts) } else { f64::NAN };
    Ok(EvolutionTrace { times: times.to_vec(), chi2, trace_dist: tdist, fitted_rate })
}

fn linear_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
