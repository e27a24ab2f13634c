//! Stabilizer Hamiltonians, ground states, and the shared eigenbasis.
//!
//! Both models are sums of commuting ±1 Pauli terms, `H = -Σ_t J_t Q_t`.
//! The Ising ring is diagonal in the computational basis. For the torus
//! an explicit orthonormal eigenbasis `|g, m, e>` is built from the four
//! ground states and snake/comb string operators; in that basis every
//! coupling of interest is a signed permutation and the Gibbs weight is
//! diagonal, which is what the master-Hamiltonian gauge needs.

use crate::lattice::{RingLattice, TorusLattice};
use crate::pauli::PauliString;
use crate::sparse::SparseOperator;
use crate::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;

/// `H = -Σ_t J_t Q_t` with commuting Pauli terms `Q_t`, `J_t > 0`.
#[derive(Clone, Debug)]
pub struct StabilizerModel {
    pub kind: ModelKind,
    pub n_qubits: usize,
    /// (J_t, Q_t) pairs.
    pub terms: Vec<(f64, PauliString)>,
}

#[derive(Clone, Debug)]
pub enum ModelKind {
    Ising(RingLattice),
    Toric(TorusLattice),
}

/// Named coupling sets used by the samplers and the CLI.
///
/// `LocalFull` and `LocalOnly` both mean every single-site Pauli (the
/// local Davies generator of prior art); `Gapped` is the snake-X/comb-Z
/// subset plus the logical jumps; `WithGlobal` is the full sampler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSet {
    LocalFull,
    LocalOnly,
    Gapped,
    WithGlobal,
}

/// Ground-state labels for the torus (o, |, -, +).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundLabel {
    O,
    Bar,
    Minus,
    Plus,
}

impl GroundLabel {
    pub fn all() -> [GroundLabel; 4] {
        [GroundLabel::O, GroundLabel::Bar, GroundLabel::Minus, GroundLabel::Plus]
    }

    fn index(self) -> usize {
        match self {
            GroundLabel::O => 0,
            GroundLabel::Bar => 1,
            GroundLabel::Minus => 2,
            GroundLabel::Plus => 3,
        }
    }
}

/// Change of basis from the computational basis to the stabilizer
/// eigenbasis, together with the eigenbasis energies.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub dim: usize,
    pub energies: Vec<f64>,
    /// Columns are eigenvectors; `None` means the computational basis is
    /// already the eigenbasis (diagonal H).
    pub transform: Option<SparseOperator>,
}

impl EigenBasis {
    /// Conjugate a computational-basis operator into the eigenbasis.
    pub fn conjugate(&self, op: &SparseOperator) -> Result<SparseOperator> {
        match &self.transform {
            None => Ok(op.clone()),
            Some(u) => u.dagger().matmul(op)?.matmul(u),
        }
    }

    /// Inverse transform of `conjugate`.
    pub fn conjugate_back(&self, op: &SparseOperator) -> Result<SparseOperator> {
        match &self.transform {
            None => Ok(op.clone()),
            Some(u) => u.matmul(op)?.matmul(&u.dagger()),
        }
    }
}

pub fn build_ising_hamiltonian(lattice: &RingLattice) -> Result<SparseOperator> {
    let model = StabilizerModel::ising(lattice.clone());
    model.hamiltonian_sparse()
}

pub fn build_toric_hamiltonian(lattice: &TorusLattice) -> Result<SparseOperator> {
    let model = StabilizerModel::toric(lattice.clone())?;
    model.hamiltonian_sparse()
}

impl StabilizerModel {
    pub fn ising(lattice: RingLattice) -> Self {
        let n = lattice.n_sites;
        let j = lattice.coupling;
        let terms = (0..n).map(|b| (j, lattice.bond_operator(b))).collect();
        StabilizerModel { n_qubits: n, kind: ModelKind::Ising(lattice), terms }
    }

    pub fn toric(lattice: TorusLattice) -> Result<Self> {
        let l = lattice.side;
        let mut terms = Vec::with_capacity(2 * l * l);
        for s in 0..l * l {
            terms.push((1.0, lattice.star_operator(s)));
        }
        for p in 0..l * l {
            terms.push((1.0, lattice.plaquette_operator(p)));
        }
        for (i, (_, a)) in terms.iter().enumerate() {
            for (_, b) in terms.iter().skip(i + 1) {
                if !a.commutes_with(b) {
                    return Err(Error::InvalidArgument("stabilizer terms must commute".into()));
                }
            }
        }
        Ok(StabilizerModel { n_qubits: lattice.n_qubits, kind: ModelKind::Toric(lattice), terms })
    }

    pub fn hamiltonian_sparse(&self) -> Result<SparseOperator> {
        let dim = 1usize
            .checked_shl(self.n_qubits as u32)
            .filter(|_| self.n_qubits <= 24)
            .ok_or_else(|| Error::TooLarge(format!("2^{} Hilbert space", self.n_qubits)))?;
        let mut h = SparseOperator::zeros(dim);
        for (j, q) in &self.terms {
            h = h.add_scaled(&q.to_sparse()?, Complex64::new(-j, 0.0))?;
        }
        Ok(h)
    }

    /// Dimension of the full Hilbert space.
    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn coupling_strength(&self) -> f64 {
        match &self.kind {
            ModelKind::Ising(r) => r.coupling,
            ModelKind::Toric(_) => 1.0,
        }
    }

    /// Couplings for a named set, closed under adjoints (all hermitian).
    pub fn couplings(&self, set: CouplingSet) -> Vec<PauliString> {
        let n = self.n_qubits;
        let all_local = || -> Vec<PauliString> {
            (0..n)
                .flat_map(|q| [PauliString::x(n, q), PauliString::y(n, q), PauliString::z(n, q)])
                .collect()
        };
        match (&self.kind, set) {
            (_, CouplingSet::LocalFull) | (_, CouplingSet::LocalOnly) => all_local(),
            (ModelKind::Ising(_), CouplingSet::Gapped) => {
                let mut c: Vec<PauliString> = (1..n).map(|q| PauliString::x(n, q)).collect();
                c.push(self.ising_global_x());
                c.push(PauliString::z(n, 0));
                c
            }
            (ModelKind::Ising(_), CouplingSet::WithGlobal) => {
                let mut c = all_local();
                c.push(self.ising_global_x());
                c
            }
            (ModelKind::Toric(t), CouplingSet::Gapped) => {
                let mut c: Vec<PauliString> =
                    t.snake_edges().iter().map(|&e| PauliString::x(n, e)).collect();
                c.extend(t.comb_edges().iter().map(|&e| PauliString::z(n, e)));
                c.extend(t.logical_operators());
                c
            }
            (ModelKind::Toric(t), CouplingSet::WithGlobal) => {
                let mut c = all_local();
                c.extend(t.logical_operators());
                c
            }
        }
    }

    fn ising_global_x(&self) -> PauliString {
        let sites: Vec<usize> = (0..self.n_qubits).collect();
        PauliString::x_string(self.n_qubits, &sites)
    }

    /// Energy of an eigenbasis element (see `eigenbasis` for the order).
    pub fn eigenbasis(&self) -> Result<EigenBasis> {
        match &self.kind {
            ModelKind::Ising(r) => {
                let dim = self.dim();
                let j = r.coupling;
                let n = self.n_qubits;
                let energies = (0..dim)
                    .map(|x| {
                        let mut e = 0.0;
                        for b in 0..n {
                            let s1 = (x >> b) & 1;
                            let s2 = (x >> ((b + 1) % n)) & 1;
                            e -= j * if s1 == s2 { 1.0 } else { -1.0 };
                        }
                        e
                    })
                    .collect();
                Ok(EigenBasis { dim, energies, transform: None })
            }
            ModelKind::Toric(t) => self.toric_eigenbasis(t),
        }
    }

    /// Eigenbasis column index for the torus: `((g << nm) | Sm) << nm | Te`
    /// where `nm = L^2 - 1`, `Sm` is the snake-flip set and `Te` the
    /// comb-flip set.
    fn toric_eigenbasis(&self, t: &TorusLattice) -> Result<EigenBasis> {
        let l = t.side;
        if l > 2 {
            return Err(Error::TooLarge(
                "full toric eigenbasis is only constructed for L = 2; larger sizes are sector-restricted".into(),
            ));
        }
        let n = self.n_qubits;
        let dim = self.dim();
        let nm = l * l - 1;
        let grounds: Vec<HashMap<u128, Complex64>> =
            GroundLabel::all().iter().map(|&g| toric_ground_sparse(t, g)).collect::<Result<_>>()?;

        let mut triplets = Vec::with_capacity(dim * (1 << (l * l - 1)));
        let mut energies = vec![0.0; dim];
        for g in 0..4usize {
            for sm in 0..(1usize << nm) {
                let mut wx = PauliString::identity(n);
                for b in 0..nm {
                    if (sm >> b) & 1 == 1 {
                        wx = wx.mul(&PauliString::x(n, t.snake_order[b].edge));
                    }
                }
                for te in 0..(1usize << nm) {
                    let mut w = wx;
                    for b in 0..nm {
                        if (te >> b) & 1 == 1 {
                            w = w.mul(&PauliString::z(n, t.comb_order[b].edge));
                        }
                    }
                    let col = ((g << nm) | sm) << nm | te;
                    for (&basis, &amp) in &grounds[g] {
                        let (b2, c) = w.apply_basis_state(basis);
                        triplets.push((b2 as usize, col, amp * c));
                    }
                    energies[col] = toric_energy(t, sm, te);
                }
            }
        }
        let u = SparseOperator::from_triplets(dim, triplets)?;
        Ok(EigenBasis { dim, energies, transform: Some(u) })
    }
}

/// Bond patterns induced by flip sets, and the resulting eigenenergy.
fn toric_energy(t: &TorusLattice, sm: usize, te: usize) -> f64 {
    let l = t.side;
    let nb = l * l;
    let nm = nb - 1;
    let mut mu = vec![0u8; nb];
    for b in 0..nm {
        if (sm >> b) & 1 == 1 {
            let (p1, p2) = t.snake_order[b].plaquettes;
            mu[p1] ^= 1;
            mu[p2] ^= 1;
        }
    }
    let mut es = vec![0u8; nb];
    for b in 0..nm {
        if (te >> b) & 1 == 1 {
            let (s1, s2) = t.comb_order[b].stars;
            es[s1] ^= 1;
            es[s2] ^= 1;
        }
    }
    let sum = |v: &[u8]| -> f64 { v.iter().map(|&m| if m == 0 { 1.0 } else { -1.0 }).sum() };
    -sum(&mu) - sum(&es)
}

/// Ground state as a sparse amplitude map over computational states.
fn toric_ground_sparse(t: &TorusLattice, label: GroundLabel) -> Result<HashMap<u128, Complex64>> {
    let n = t.n_qubits;
    let mut phi = PauliString::identity(n);
    let [x1, _, x2, _] = t.logical_operators();
    match label {
        GroundLabel::O => {}
        GroundLabel::Bar => phi = x1,
        GroundLabel::Minus => phi = x2,
        GroundLabel::Plus => phi = x1.mul(&x2),
    }
    let (start, c0) = phi.apply_basis_state(0);
    let mut state: HashMap<u128, Complex64> = HashMap::from([(start, c0)]);
    // sequential application of (I + X_s); the last star is dependent so
    // the loop over L^2 - 1 stars already reaches the full orbit, but
    // applying all of them only doubles amplitudes uniformly.
    for s in 0..t.star_supports.len() {
        let xs = t.star_operator(s);
        let mut next = state.clone();
        for (&b, &a) in &state {
            let (b2, c) = xs.apply_basis_state(b);
            *next.entry(b2).or_insert(Complex64::default()) += a * c;
        }
        state = next;
    }
    let norm: f64 = state.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("ground-state projection vanished".into()));
    }
    for a in state.values_mut() {
        *a /= norm;
    }
    Ok(state)
}

/// Toric ground state as a dense vector (L = 2 or 3).
pub fn ground_state(t: &TorusLattice, label: GroundLabel) -> Result<Vec<Complex64>> {
    if t.side > 3 {
        return Err(Error::TooLarge("dense ground states are built for L <= 3".into()));
    }
    let map = toric_ground_sparse(t, label)?;
    let mut v = vec![Complex64::default(); 1usize << t.n_qubits];
    for (&b, &a) in &map {
        v[b as usize] = a;
    }
    Ok(v)
}

/// Index of a ground label in the eigenbasis ordering.
pub fn ground_label_index(label: GroundLabel) -> usize {
    label.index()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ExcitationKind;

    fn apply_dense(op: &SparseOperator, v: &[Complex64]) -> Vec<Complex64> {
        op.apply_vec(v)
    }

    #[test]
    fn ising_ground_energy_and_degeneracy() {
        // N=3, J=1: spectrum {-3 x2, +1 x6}
        let r = RingLattice::new(3, 1.0).unwrap();
        let h = build_ising_hamiltonian(&r).unwrap();
        let mut diag: Vec<f64> = (0..8).map(|i| h.get(i, i).re).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(diag[0], -3.0);
        assert_eq!(diag[1], -3.0);
        assert!(diag[2..].iter().all(|&e| e == 1.0));
        // all-zeros diagonal entry is -N J
        assert_eq!(h.get(0, 0).re, -3.0);
    }

    #[test]
    fn ising_n2_spectrum() {
        let r = RingLattice::new(2, 1.0).unwrap();
        let h = build_ising_hamiltonian(&r).unwrap();
        let mut diag: Vec<f64> = (0..4).map(|i| h.get(i, i).re).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(diag, vec![-2.0, -2.0, 2.0, 2.0]);
    }

    #[test]
    fn toric_l2_ground_space() {
        let t = TorusLattice::new(2).unwrap();
        let h = build_toric_hamiltonian(&t).unwrap();
        let model = StabilizerModel::toric(t.clone()).unwrap();
        for &g in &GroundLabel::all() {
            let psi = ground_state(&t, g).unwrap();
            let hpsi = apply_dense(&h, &psi);
            let e: Complex64 = psi.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
            assert!((e.re + 8.0).abs() < 1e-12, "label {:?}: <H> = {}", g, e.re);
            for (_, q) in &model.terms {
                let qpsi = apply_dense(&q.to_sparse().unwrap(), &psi);
                let dev: f64 =
                    psi.iter().zip(&qpsi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
                assert!(dev < 1e-12, "stabilizer eigenvector residual {dev}");
            }
        }
        // orthogonality
        let states: Vec<Vec<Complex64>> =
            GroundLabel::all().iter().map(|&g| ground_state(&t, g).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let ov: Complex64 = states[i].iter().zip(&states[j]).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ov.norm() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn logical_x1_maps_o_to_bar() {
        let t = TorusLattice::new(2).unwrap();
        let [x1, _, _, _] = t.logical_operators();
        let psi_o = ground_state(&t, GroundLabel::O).unwrap();
        let psi_bar = ground_state(&t, GroundLabel::Bar).unwrap();
        let mapped = apply_dense(&x1.to_sparse().unwrap(), &psi_o);
        let ov: Complex64 = mapped.iter().zip(&psi_bar).map(|(a, b)| a.conj() * b).sum();
        assert!((ov.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logical_x1_commutes_with_toric_hamiltonian() {
        let t = TorusLattice::new(2).unwrap();
        let h = build_toric_hamiltonian(&t).unwrap();
        let [x1, _, _, _] = t.logical_operators();
        let xs = x1.to_sparse().unwrap();
        let comm = h.matmul(&xs).unwrap().sub(&xs.matmul(&h).unwrap()).unwrap();
        assert!(comm.max_abs() < 1e-12);
    }

    #[test]
    fn single_snake_flip_raises_energy_by_four() {
        let t = TorusLattice::new(2).unwrap();
        let h = build_toric_hamiltonian(&t).unwrap();
        let w = t
            .excitation_path_operator(ExcitationKind::Magnetic, &[t.snake_order[0].edge])
            .unwrap();
        let psi = ground_state(&t, GroundLabel::O).unwrap();
        let excited = apply_dense(&w.to_sparse().unwrap(), &psi);
        let hpsi = apply_dense(&h, &excited);
        let e: Complex64 = excited.iter().zip(&hpsi).map(|(a, b)| a.conj() * b).sum();
        assert!((e.re + 4.0).abs() < 1e-12, "<H> = {}", e.re);
    }

    #[test]
    fn magnetic_path_commutes_with_logicals() {
        let t = TorusLattice::new(2).unwrap();
        let w = t
            .excitation_path_operator(ExcitationKind::Magnetic, &t.snake_edges()[..2].to_vec())
            .unwrap();
        let [x1, z1, _, _] = t.logical_operators();
        assert!(w.commutes_with(&x1));
        assert!(w.commutes_with(&z1));
    }

    #[test]
    fn toric_eigenbasis_is_orthonormal_and_diagonalizes_h() {
        let t = TorusLattice::new(2).unwrap();
        let model = StabilizerModel::toric(t).unwrap();
        let basis = model.eigenbasis().unwrap();
        let u = basis.transform.as_ref().unwrap();
        let gram = u.dagger().matmul(u).unwrap();
        assert!(gram.max_abs_diff(&SparseOperator::identity(256)) < 1e-12);
        let h = model.hamiltonian_sparse().unwrap();
        let hd = basis.conjugate(&h).unwrap();
        let diag = SparseOperator::diagonal(&basis.energies);
        assert!(hd.max_abs_diff(&diag) < 1e-12);
    }

    #[test]
    fn ising_eigenbasis_energies_match_diagonal() {
        let r = RingLattice::new(4, 1.3).unwrap();
        let model = StabilizerModel::ising(r);
        let basis = model.eigenbasis().unwrap();
        let h = model.hamiltonian_sparse().unwrap();
        for i in 0..16 {
            assert!((h.get(i, i).re - basis.energies[i]).abs() < 1e-12);
        }
    }
}
