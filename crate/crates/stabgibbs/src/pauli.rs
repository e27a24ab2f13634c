//! Bit-mask Pauli strings with exact phase tracking.
//!
//! A string is stored as `i^phase · X^x Z^z` where `x` and `z` are bit
//! masks over at most 128 qubits (qubit 0 is the least-significant bit
//! of a computational-basis index). Sites with both bits set carry an
//! implicit `XZ = -iY`, so hermiticity is decided after Y-counting.

use crate::sparse::SparseOperator;
use crate::{Error, Result};
use num_complex::Complex64;

const MAX_QUBITS: usize = 128;

/// An N-qubit Pauli operator `i^phase · X^{x_mask} Z^{z_mask}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub n_qubits: usize,
    pub x_mask: u128,
    pub z_mask: u128,
    /// Power of `i` in 0..4.
    pub phase: u8,
}

impl std::fmt::Debug for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let coef = match self.coefficient_power() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{coef}")?;
        for q in 0..self.n_qubits {
            let x = (self.x_mask >> q) & 1 == 1;
            let z = (self.z_mask >> q) & 1 == 1;
            write!(
                f,
                "{}",
                match (x, z) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (false, true) => 'Z',
                    (true, true) => 'Y',
                }
            )?;
        }
        Ok(())
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        PauliString { n_qubits, x_mask: 0, z_mask: 0, phase: 0 }
    }

    /// Single-site X.
    pub fn x(n_qubits: usize, site: usize) -> Self {
        let mut p = Self::identity(n_qubits);
        p.x_mask = 1u128 << site;
        p
    }

    /// Single-site Z.
    pub fn z(n_qubits: usize, site: usize) -> Self {
        let mut p = Self::identity(n_qubits);
        p.z_mask = 1u128 << site;
        p
    }

    /// Single-site Y = i·XZ.
    pub fn y(n_qubits: usize, site: usize) -> Self {
        let mut p = Self::identity(n_qubits);
        p.x_mask = 1u128 << site;
        p.z_mask = 1u128 << site;
        p.phase = 1;
        p
    }

    /// Product of X over `sites`.
    pub fn x_string(n_qubits: usize, sites: &[usize]) -> Self {
        let mut p = Self::identity(n_qubits);
        for &s in sites {
            assert!(s < n_qubits);
            assert!(p.x_mask >> s & 1 == 0, "repeated site {s}");
            p.x_mask |= 1u128 << s;
        }
        p
    }

    /// Product of Z over `sites`.
    pub fn z_string(n_qubits: usize, sites: &[usize]) -> Self {
        let mut p = Self::identity(n_qubits);
        for &s in sites {
            assert!(s < n_qubits);
            assert!(p.z_mask >> s & 1 == 0, "repeated site {s}");
            p.z_mask |= 1u128 << s;
        }
        p
    }

    /// Exact product; the phase is tracked through the `Z X = -X Z`
    /// reordering so the algebra is closed.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n_qubits, other.n_qubits);
        let swaps = (self.z_mask & other.x_mask).count_ones() as u8;
        PauliString {
            n_qubits: self.n_qubits,
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
            phase: (self.phase + other.phase + 2 * (swaps & 1)) % 4,
        }
    }

    pub fn dagger(&self) -> PauliString {
        // (i^p X^x Z^z)^† = i^{-p} Z^z X^x = i^{-p} (-1)^{|x∧z|} X^x Z^z
        let swaps = (self.x_mask & self.z_mask).count_ones() as u8;
        PauliString {
            phase: ((4 - self.phase) + 2 * (swaps & 1)) % 4,
            ..*self
        }
    }

    /// True iff the two strings commute (they otherwise anticommute).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.z_mask & other.x_mask).count_ones();
        let b = (other.z_mask & self.x_mask).count_ones();
        (a + b) % 2 == 0
    }

    /// Power of `i` in the coefficient after rewriting every overlapping
    /// XZ site as a Y.
    pub fn coefficient_power(&self) -> u8 {
        let ys = ((self.x_mask & self.z_mask).count_ones() % 4) as u8;
        (self.phase + 4 - ys) % 4
    }

    pub fn coefficient(&self) -> Complex64 {
        match self.coefficient_power() {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Hermitian iff the Y-normalized coefficient is ±1.
    pub fn is_hermitian(&self) -> bool {
        self.coefficient_power() % 2 == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0 && self.phase == 0
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        (self.x_mask | self.z_mask).count_ones() as usize
    }

    /// Action on a computational basis state:
    /// `P|b> = i^phase (-1)^{|z∧b|} |b⊕x>`.
    pub fn apply_basis_state(&self, b: u128) -> (u128, Complex64) {
        let sign = if (self.z_mask & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let mut c = Complex64::new(sign, 0.0);
        c *= match self.phase {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        (b ^ self.x_mask, c)
    }

    /// Sparse matrix on the 2^n computational basis. One entry per column.
    pub fn to_sparse(&self) -> Result<SparseOperator> {
        if self.n_qubits > 24 {
            return Err(Error::TooLarge(format!(
                "dense Hilbert space for {} qubits",
                self.n_qubits
            )));
        }
        let dim = 1usize << self.n_qubits;
        let mut triplets = Vec::with_capacity(dim);
        for col in 0..dim {
            let (row, val) = self.apply_basis_state(col as u128);
            triplets.push((row as usize, col, val));
        }
        SparseOperator::from_triplets(dim, triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::{prop_assert_eq, proptest};
    use rand::prelude::*;

    fn dense(p: &PauliString) -> Array2<Complex64> {
        p.to_sparse().unwrap().to_dense()
    }

    #[test]
    fn single_site_matrices() {
        let x = dense(&PauliString::x(1, 0));
        let y = dense(&PauliString::y(1, 0));
        let z = dense(&PauliString::z(1, 0));
        let i = Complex64::i();
        assert_eq!(x[[0, 1]], 1.0.into());
        assert_eq!(x[[1, 0]], 1.0.into());
        assert_eq!(y[[0, 1]], -i);
        assert_eq!(y[[1, 0]], i);
        assert_eq!(z[[0, 0]], 1.0.into());
        assert_eq!(z[[1, 1]], (-1.0).into());
    }

    #[test]
    fn y_is_hermitian_with_unit_coefficient() {
        let y = PauliString::y(3, 1);
        assert!(y.is_hermitian());
        assert_eq!(y.coefficient(), Complex64::new(1.0, 0.0));
        assert_eq!(y.mul(&y), PauliString::identity(3));
    }

    fn random_pauli(rng: &mut impl Rng, n: usize) -> PauliString {
        PauliString {
            n_qubits: n,
            x_mask: rng.gen_range(0..(1u128 << n)),
            z_mask: rng.gen_range(0..(1u128 << n)),
            phase: rng.gen_range(0..4),
        }
    }

    #[test]
    fn multiplication_is_a_dense_homomorphism() {
        let mut rng = StdRng::seed_from_u64(7);
        for n in 1..=6usize {
            for _ in 0..20 {
                let p = random_pauli(&mut rng, n);
                let q = random_pauli(&mut rng, n);
                let lhs = dense(&p.mul(&q));
                let rhs = dense(&p).dot(&dense(&q));
                let dev = (&lhs - &rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(dev < 1e-14, "n={n} dev={dev}");
            }
        }
    }

    #[test]
    fn dagger_matches_dense_conjugate_transpose() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..40 {
            let p = random_pauli(&mut rng, 4);
            let lhs = dense(&p.dagger());
            let rhs = dense(&p).t().mapv(|c| c.conj());
            let dev = (&lhs - &rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn associativity_is_exact(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(1..=8usize);
            let a = random_pauli(&mut rng, n);
            let b = random_pauli(&mut rng, n);
            let c = random_pauli(&mut rng, n);
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn commutation_matches_product_order(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let n = rng.gen_range(1..=8usize);
            let a = random_pauli(&mut rng, n);
            let b = random_pauli(&mut rng, n);
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            prop_assert_eq!(ab.x_mask, ba.x_mask);
            prop_assert_eq!(ab.z_mask, ba.z_mask);
            let same_phase = ab.phase == ba.phase;
            prop_assert_eq!(a.commutes_with(&b), same_phase);
        }
    }
}
