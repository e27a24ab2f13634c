//! Bohr-frequency decomposition of coupling operators.
//!
//! Two independent routes: a generic one through a dense
//! eigendecomposition of H (the oracle), and the production route that
//! expands eigenprojections of the anticommuting stabilizer terms and
//! never diagonalizes anything.

use crate::eigen::dense_symmetric_eig;
use crate::model::StabilizerModel;
use crate::pauli::PauliString;
use crate::sparse::SparseOperator;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// One Fourier component `S(omega)` of a coupling operator.
#[derive(Clone, Debug)]
pub struct BohrComponent {
    pub omega: f64,
    pub jump: SparseOperator,
}

/// Decompose `S` against `H` by clustering eigenvalue differences.
///
/// Dense oracle route, `dim <= 256`. Two distinct Bohr frequencies closer
/// than ten times the merge width are reported as a clustering failure
/// instead of being silently merged.
pub fn bohr_decompose_generic(h: &SparseOperator, s: &SparseOperator) -> Result<Vec<BohrComponent>> {
    if h.dim > 256 {
        return Err(Error::TooLarge("generic Bohr route is dense (dim <= 256)".into()));
    }
    if h.dim != s.dim {
        return Err(Error::Dimension { expected: h.dim, got: s.dim });
    }
    let hd = h.to_dense_real(1e-12)?;
    let scale = h.max_abs().max(1.0);
    if h.hermiticity_deviation() > 1e-10 * scale {
        return Err(Error::NotHermitian(h.hermiticity_deviation()));
    }
    let (evals, vecs) = dense_symmetric_eig(&(&hd + &hd.t()).mapv(|x| x / 2.0))?;
    let merge = 1e-9 * scale.max(1.0);

    // cluster sorted eigenvalues into eigenspaces
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &e) in evals.iter().enumerate() {
        match clusters.last_mut() {
            Some((mean, members)) if (e - *mean).abs() < merge => {
                let k = members.len() as f64;
                *mean = (*mean * k + e) / (k + 1.0);
                members.push(i);
            }
            _ => clusters.push((e, vec![i])),
        }
    }

    // distinct Bohr frequencies from cluster means
    let mut freqs: Vec<f64> = Vec::new();
    for (ei, _) in &clusters {
        for (ej, _) in &clusters {
            let w = ei - ej;
            if !freqs.iter().any(|&f| (f - w).abs() < merge) {
                freqs.push(w);
            }
        }
    }
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for pair in freqs.windows(2) {
        let gap = pair[1] - pair[0];
        if gap < 10.0 * merge {
            return Err(Error::Clustering(format!(
                "frequencies {:.12e} and {:.12e} are separated by {gap:.3e} < 10x merge width",
                pair[0], pair[1]
            )));
        }
    }

    // S in the eigenbasis, entries binned by cluster-mean differences
    let d = h.dim;
    let mut cluster_of = vec![0usize; d];
    for (k, (_, members)) in clusters.iter().enumerate() {
        for &i in members {
            cluster_of[i] = k;
        }
    }
    let vc = vecs.mapv(|x| Complex64::new(x, 0.0));
    let st = vc.t().dot(&s.to_dense()).dot(&vc);
    let mut comps: Vec<(f64, Array2<Complex64>)> = Vec::new();
    for r in 0..d {
        for c in 0..d {
            if st[[r, c]].norm() < 1e-13 {
                continue;
            }
            let w = clusters[cluster_of[r]].0 - clusters[cluster_of[c]].0;
            let m = match comps.iter_mut().find(|(f, _)| (*f - w).abs() < merge) {
                Some((_, m)) => m,
                None => {
                    comps.push((w, Array2::zeros((d, d))));
                    &mut comps.last_mut().expect("just pushed").1
                }
            };
            m[[r, c]] = st[[r, c]];
        }
    }
    let mut out: Vec<BohrComponent> = comps
        .into_iter()
        .map(|(omega, m)| {
            let back = vc.dot(&m).dot(&vc.t());
            BohrComponent { omega, jump: SparseOperator::from_dense(&back, 1e-13) }
        })
        .filter(|c| c.jump.nnz() > 0)
        .collect();
    out.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    Ok(out)
}

/// Decompose a Pauli coupling against a commuting-stabilizer model using
/// bond projections only; exact integer frequencies, no eigensolve.
pub fn bohr_decompose_stabilizer(
    model: &StabilizerModel,
    coupling: &PauliString,
) -> Result<Vec<BohrComponent>> {
    if coupling.n_qubits != model.n_qubits {
        return Err(Error::Dimension { expected: model.n_qubits, got: coupling.n_qubits });
    }
    let anti: Vec<&(f64, PauliString)> =
        model.terms.iter().filter(|(_, q)| !q.commutes_with(coupling)).collect();
    if anti.len() > 8 {
        return Err(Error::InvalidArgument(format!(
            "coupling anticommutes with {} stabilizer terms; unsupported shape",
            anti.len()
        )));
    }
    let dim = model.dim();
    let s = coupling.to_sparse()?;
    let half = Complex64::new(0.5, 0.0);
    let mut comps: Vec<(f64, SparseOperator)> = Vec::new();
    for pattern in 0..(1usize << anti.len()) {
        let mut proj_s = s.clone();
        let mut omega = 0.0;
        for (t, (j, q)) in anti.iter().enumerate() {
            let sign = if (pattern >> t) & 1 == 0 { 1.0 } else { -1.0 };
            omega -= 2.0 * sign * j;
            let p = SparseOperator::identity(dim)
                .add_scaled(&q.to_sparse()?, Complex64::new(sign, 0.0))?
                .scale(half);
            proj_s = p.matmul(&proj_s)?;
        }
        if proj_s.nnz() == 0 {
            continue;
        }
        match comps.iter_mut().find(|(f, _)| (*f - omega).abs() < 1e-9) {
            Some((_, m)) => *m = m.add(&proj_s)?,
            None => comps.push((omega, proj_s)),
        }
    }
    let mut out: Vec<BohrComponent> =
        comps.into_iter().map(|(omega, jump)| BohrComponent { omega, jump }).collect();
    out.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{RingLattice, TorusLattice};

    fn max_dev(a: &SparseOperator, b: &SparseOperator) -> f64 {
        a.max_abs_diff(b)
    }

    #[test]
    fn two_level_splitting() {
        // H = -sigma^z, S = sigma^x: frequencies {-2, +2}
        let h = PauliString::z(1, 0).to_sparse().unwrap().scale((-1.0).into());
        let s = PauliString::x(1, 0).to_sparse().unwrap();
        let comps = bohr_decompose_generic(&h, &s).unwrap();
        let freqs: Vec<f64> = comps.iter().map(|c| c.omega).collect();
        assert_eq!(freqs.len(), 2);
        assert!((freqs[0] + 2.0).abs() < 1e-9);
        assert!((freqs[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn commuting_coupling_is_a_single_zero_component() {
        let r = RingLattice::new(3, 1.0).unwrap();
        let model = StabilizerModel::ising(r);
        let s = PauliString::z(3, 1);
        let comps = bohr_decompose_stabilizer(&model, &s).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].omega, 0.0);
        assert!(max_dev(&comps[0].jump, &s.to_sparse().unwrap()) < 1e-14);
    }

    #[test]
    fn completeness_and_adjoint_pairing() {
        let r = RingLattice::new(4, 1.0).unwrap();
        let model = StabilizerModel::ising(r);
        for coupling in model.couplings(crate::model::CouplingSet::WithGlobal) {
            let comps = bohr_decompose_stabilizer(&model, &coupling).unwrap();
            let mut sum = SparseOperator::zeros(16);
            for c in &comps {
                sum = sum.add(&c.jump).unwrap();
            }
            assert!(max_dev(&sum, &coupling.to_sparse().unwrap()) < 1e-12);
            for c in &comps {
                let partner = comps.iter().find(|c2| (c2.omega + c.omega).abs() < 1e-9).unwrap();
                assert!(max_dev(&c.jump.dagger(), &partner.jump) < 1e-12);
            }
        }
    }

    #[test]
    fn stabilizer_route_matches_generic_on_ising() {
        let r = RingLattice::new(4, 1.0).unwrap();
        let model = StabilizerModel::ising(r);
        let h = model.hamiltonian_sparse().unwrap();
        for q in 0..4 {
            for p in [PauliString::x(4, q), PauliString::y(4, q)] {
                let a = bohr_decompose_stabilizer(&model, &p).unwrap();
                let b = bohr_decompose_generic(&h, &p.to_sparse().unwrap()).unwrap();
                assert_eq!(a.len(), b.len());
                for (ca, cb) in a.iter().zip(&b) {
                    assert!((ca.omega - cb.omega).abs() < 1e-9);
                    assert!(max_dev(&ca.jump, &cb.jump) < 1e-11);
                }
            }
        }
    }

    #[test]
    fn toric_snake_coupling_frequencies() {
        let t = TorusLattice::new(2).unwrap();
        let model = StabilizerModel::toric(t.clone()).unwrap();
        let j = t.snake_order[0].edge;
        let comps = bohr_decompose_stabilizer(&model, &PauliString::x(8, j)).unwrap();
        let freqs: Vec<f64> = comps.iter().map(|c| c.omega).collect();
        assert_eq!(freqs, vec![-4.0, 0.0, 4.0]);
        // a_j at omega = -4 equals P^- sigma^x P^+ built from plaquette pair
        let (p1, p2) = t.snake_order[0].plaquettes;
        let dim = 256;
        let zp1 = t.plaquette_operator(p1).to_sparse().unwrap();
        let zp2 = t.plaquette_operator(p2).to_sparse().unwrap();
        let id = SparseOperator::identity(dim);
        let quarter = Complex64::new(0.25, 0.0);
        let pminus =
            id.add(&zp1).unwrap().matmul(&id.add(&zp2).unwrap()).unwrap().scale(quarter);
        let pplus =
            id.sub(&zp1).unwrap().matmul(&id.sub(&zp2).unwrap()).unwrap().scale(quarter);
        let aj = pminus
            .matmul(&PauliString::x(8, j).to_sparse().unwrap())
            .unwrap()
            .matmul(&pplus)
            .unwrap();
        assert!(max_dev(&comps[0].jump, &aj) < 1e-12);
    }

    #[test]
    fn logical_coupling_is_pure_zero_frequency() {
        let t = TorusLattice::new(2).unwrap();
        let model = StabilizerModel::toric(t.clone()).unwrap();
        let [x1, _, _, _] = t.logical_operators();
        let comps = bohr_decompose_stabilizer(&model, &x1).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].omega, 0.0);
    }
}
