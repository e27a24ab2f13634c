//! Davies Lindbladians on the vectorized operator space, the GNS inner
//! product, and the master-Hamiltonian gauge.
//!
//! Vectorization is row-major: `X[i,j] -> vec[i*d + j]`, so
//! `vec(A X B) = (A ⊗ B^T) vec(X)`. In the Heisenberg picture
//!
//! `L(X) = Σ_ω γ(ω) [ S(ω)† X S(ω) - ½{S(ω)†S(ω), X} ]`,
//!
//! and the master Hamiltonian is the similarity transform by
//! `X -> X σ^{1/2}`, which on entries is a per-entry factor
//! `exp(-β (E_j - E_l)/2)` — computed in log space so large β stays exact.

use crate::bohr::{bohr_decompose_generic, bohr_decompose_stabilizer, BohrComponent};
use crate::gibbs::{glauber_rate, GibbsModel};
use crate::pauli::PauliString;
use crate::sparse::SparseOperator;
use crate::{Error, Result};
use num_complex::Complex64;

/// Which picture / gauge a superoperator matrix is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    LindbladHeisenberg,
    LindbladSchrodinger,
    MasterHamiltonian,
}

/// Operator basis the matrix refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Matrix units of the computational basis.
    Computational,
    /// Matrix units of the model eigenbasis (σ_β diagonal).
    Eigen,
}

/// Sparse matrix on the vectorized `d^2`-dimensional operator space.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub op_dim: usize,
    pub matrix: SparseOperator,
    pub gauge: Gauge,
    pub frame: Frame,
}

/// Route used to obtain the Bohr components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BohrRoute {
    /// Exact stabilizer bond projections (production path).
    Stabilizer,
    /// Dense eigendecomposition oracle.
    Generic,
}

impl Superoperator {
    /// Schrödinger-picture adjoint (conjugate transpose in the matrix-unit
    /// basis); flips between the two Lindblad gauges.
    pub fn schrodinger_adjoint(&self) -> Result<Superoperator> {
        let gauge = match self.gauge {
            Gauge::LindbladHeisenberg => Gauge::LindbladSchrodinger,
            Gauge::LindbladSchrodinger => Gauge::LindbladHeisenberg,
            Gauge::MasterHamiltonian => {
                return Err(Error::InvalidArgument(
                    "master gauge is self-adjoint; adjoint is only defined for Lindblad gauges".into(),
                ))
            }
        };
        Ok(Superoperator { op_dim: self.op_dim, matrix: self.matrix.dagger(), gauge, frame: self.frame })
    }

    /// Coordinate export: (row, col, re, im) per line.
    pub fn to_coordinate_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (r, c, v) in self.matrix.iter_triplets() {
            out.push_str(&format!("{r},{c},{:.16e},{:.16e}\n", v.re, v.im));
        }
        out
    }
}

fn components_for(
    gm: &GibbsModel,
    coupling: &PauliString,
    route: BohrRoute,
) -> Result<Vec<BohrComponent>> {
    match route {
        BohrRoute::Stabilizer => {
            let model = gm.model.as_ref().ok_or_else(|| {
                Error::InvalidArgument("stabilizer Bohr route needs a stabilizer model".into())
            })?;
            bohr_decompose_stabilizer(model, coupling)
        }
        BohrRoute::Generic => bohr_decompose_generic(&gm.hamiltonian, &coupling.to_sparse()?),
    }
}

/// Heisenberg-picture Davies generator for a set of hermitian Pauli
/// couplings (the set is then trivially closed under adjoints).
pub fn davies_lindbladian(
    gm: &GibbsModel,
    couplings: &[PauliString],
    route: BohrRoute,
    frame: Frame,
) -> Result<Superoperator> {
    let d = gm.dim();
    for c in couplings {
        if 1usize << c.n_qubits != d {
            return Err(Error::Dimension { expected: d, got: 1usize << c.n_qubits });
        }
        if !c.is_hermitian() {
            return Err(Error::InvalidArgument(format!("coupling {c:?} is not hermitian")));
        }
    }
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    for coupling in couplings {
        for comp in components_for(gm, coupling, route)? {
            let rate = glauber_rate(comp.omega, gm.beta);
            if rate == 0.0 {
                continue;
            }
            let jump = match frame {
                Frame::Computational => comp.jump,
                Frame::Eigen => gm.basis.conjugate(&comp.jump)?,
            };
            let jd = jump.dagger();
            let jdj = jd.matmul(&jump)?;
            // rate * S(w)^dag (x) S(w)^T
            for (r1, c1, v1) in jd.iter_triplets() {
                for (c2, r2, v2) in jump.iter_triplets() {
                    triplets.push((r1 * d + r2, c1 * d + c2, v1 * v2 * rate));
                }
            }
            // -rate/2 * (S^dag S (x) I  +  I (x) (S^dag S)^T)
            for (r1, c1, v1) in jdj.iter_triplets() {
                let v = v1 * (-0.5 * rate);
                for k in 0..d {
                    triplets.push((r1 * d + k, c1 * d + k, v));
                    triplets.push((k * d + c1, k * d + r1, v));
                }
            }
        }
    }
    let matrix = SparseOperator::from_triplets(d * d, triplets)?;
    Ok(Superoperator { op_dim: d, matrix, gauge: Gauge::LindbladHeisenberg, frame })
}

/// Pure dephasing `L(X) = -½ [O, [O, X]]` for a hermitian Pauli `O`
/// commuting with the model Hamiltonian (a Bohr-frequency-zero jump).
pub fn dephasing_lindbladian(gm: &GibbsModel, o: &PauliString, frame: Frame) -> Result<Superoperator> {
    if !o.is_hermitian() {
        return Err(Error::InvalidArgument("dephasing coupling must be hermitian".into()));
    }
    if let Some(model) = &gm.model {
        if model.terms.iter().any(|(_, q)| !q.commutes_with(o)) {
            return Err(Error::InvalidArgument(
                "dephasing coupling must commute with the Hamiltonian".into(),
            ));
        }
    }
    let d = gm.dim();
    let os = match frame {
        Frame::Computational => o.to_sparse()?,
        Frame::Eigen => gm.basis.conjugate(&o.to_sparse()?)?,
    };
    // O X O - X  (O^2 = 1 for a hermitian Pauli string)
    let matrix = os
        .dagger()
        .kron(&os.transpose())
        .add_scaled(&SparseOperator::identity(d * d), Complex64::new(-1.0, 0.0))?;
    Ok(Superoperator { op_dim: d, matrix, gauge: Gauge::LindbladHeisenberg, frame })
}

/// GNS inner product `<Y, X>_σ = Tr(Y† X σ_β)` of computational-basis
/// operators.
pub fn gns_inner(y: &SparseOperator, x: &SparseOperator, gm: &GibbsModel) -> Result<Complex64> {
    if y.dim != x.dim || x.dim != gm.dim() {
        return Err(Error::Dimension { expected: gm.dim(), got: y.dim.max(x.dim) });
    }
    let xe = gm.basis.conjugate(x)?;
    let ye = gm.basis.conjugate(y)?;
    let w = gm.sigma_weights();
    let mut acc = Complex64::default();
    for (i, j, v) in xe.iter_triplets() {
        acc += ye.get(i, j).conj() * v * w[j];
    }
    Ok(acc)
}

/// Master Hamiltonian `p ∘ L ∘ p^{-1}` of a Heisenberg-gauge generator in
/// the eigen frame. Hermitian and negative semidefinite for a GNS
/// detailed-balanced input; a violation above tolerance is rejected.
pub fn master_hamiltonian(lh: &Superoperator, gm: &GibbsModel) -> Result<Superoperator> {
    if lh.gauge != Gauge::LindbladHeisenberg {
        return Err(Error::InvalidArgument("master transform expects the Heisenberg gauge".into()));
    }
    if lh.frame != Frame::Eigen {
        return Err(Error::InvalidArgument("master transform expects the eigen frame".into()));
    }
    let d = lh.op_dim;
    let triplets = lh
        .matrix
        .iter_triplets()
        .map(|(r, c, v)| {
            let (j, l) = (r % d, c % d);
            (r, c, v * gm.master_weight(j, l))
        })
        .collect();
    let matrix = SparseOperator::from_triplets(d * d, triplets)?;
    let dev = matrix.hermiticity_deviation();
    let scale = matrix.max_abs().max(1e-300);
    if dev > 1e-10 * scale {
        return Err(Error::DetailedBalance(dev / scale));
    }
    Ok(Superoperator { op_dim: d, matrix, gauge: Gauge::MasterHamiltonian, frame: Frame::Eigen })
}
