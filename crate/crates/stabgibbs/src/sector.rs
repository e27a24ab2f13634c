//! Logical/syndrome decomposition machinery: flip-sector (Lambda) bases,
//! the exact 4x4 local blocks of the master Hamiltonian, effective
//! chain/comb matrices K^beta, spin-number sectors, and restriction of
//! superoperators to invariant blocks.
//!
//! The reduced syndrome space of a chain of `n` bonds (or the comb's
//! star set) is coordinatized by flip sets `S` over its spins; `S` maps
//! to the admissible bond pattern with an even number of `-` signs, and
//! matrix units |S'><S| are GNS-orthogonal with single-coordinate
//! p-transforms, so Lambda sectors are coordinate subsets.

use crate::davies::Superoperator;
use crate::gibbs::GibbsModel;
use crate::lattice::TorusLattice;
use crate::pauli::PauliString;
use crate::sparse::SparseOperator;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64;

/// One logical tensor factor (1, X, Y or Z) of a block label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogicalFactor {
    One,
    X,
    Y,
    Z,
}

/// Block label (B1, B2) of the logical algebra decomposition; (1, 1) is
/// the syndrome sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorLabel {
    pub b1: LogicalFactor,
    pub b2: LogicalFactor,
}

impl SectorLabel {
    pub fn all() -> Vec<SectorLabel> {
        use LogicalFactor::*;
        let fs = [One, X, Y, Z];
        fs.iter().flat_map(|&b1| fs.iter().map(move |&b2| SectorLabel { b1, b2 })).collect()
    }

    pub fn is_syndrome(&self) -> bool {
        self.b1 == LogicalFactor::One && self.b2 == LogicalFactor::One
    }
}

/// Which local 4x4 block a spin contributes for a given Lambda.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaCase {
    Ab,
    Flip,
    Int,
}

/// A flip-sector label: the subset Lambda of bonds on which ket and bra
/// agree (the complement is flipped). |Lambda^c| must be even.
#[derive(Clone, Debug)]
pub struct LambdaSector {
    pub n_bonds: usize,
    pub in_lambda: Vec<bool>,
}

impl LambdaSector {
    pub fn new(n_bonds: usize, lambda: &[usize]) -> Result<Self> {
        let mut in_lambda = vec![false; n_bonds];
        for &b in lambda {
            if b >= n_bonds {
                return Err(Error::InvalidArgument(format!("bond {b} out of range")));
            }
            in_lambda[b] = true;
        }
        let comp = in_lambda.iter().filter(|&&x| !x).count();
        if comp % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "|Lambda^c| = {comp} must be even for an admissible sector"
            )));
        }
        Ok(LambdaSector { n_bonds, in_lambda })
    }

    pub fn full(n_bonds: usize) -> Self {
        LambdaSector { n_bonds, in_lambda: vec![true; n_bonds] }
    }

    pub fn empty(n_bonds: usize) -> Result<Self> {
        if n_bonds % 2 != 0 {
            return Err(Error::InvalidArgument("empty Lambda needs an even bond count".into()));
        }
        Ok(LambdaSector { n_bonds, in_lambda: vec![false; n_bonds] })
    }

    /// Gamma classification of a spin touching bonds (a, b).
    pub fn gamma_case(&self, a: usize, b: usize) -> GammaCase {
        match (self.in_lambda[a], self.in_lambda[b]) {
            (true, true) => GammaCase::Ab,
            (false, false) => GammaCase::Flip,
            _ => GammaCase::Int,
        }
    }

    /// Partition of the spins of `space` into (flip, ab, int) sets.
    pub fn gamma_split(&self, space: &ReducedSpace) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut flip = Vec::new();
        let mut ab = Vec::new();
        let mut int = Vec::new();
        for (j, &(a, b)) in space.spin_bonds.iter().enumerate() {
            match self.gamma_case(a, b) {
                GammaCase::Flip => flip.push(j),
                GammaCase::Ab => ab.push(j),
                GammaCase::Int => int.push(j),
            }
        }
        (flip, ab, int)
    }
}

/// Jump geometry of a reduced syndrome space: `n_bonds` two-valued bonds
/// and one spin per entry of `spin_bonds`, flipping that bond pair.
#[derive(Clone, Debug)]
pub struct ReducedSpace {
    pub n_bonds: usize,
    pub spin_bonds: Vec<(usize, usize)>,
}

impl ReducedSpace {
    /// Open chain over `n` bonds: spins 2..n of the paper, spin j
    /// flipping bonds (j-1, j); 0-based entry k flips (k, k+1).
    pub fn chain(n_bonds: usize) -> Result<Self> {
        if n_bonds < 2 {
            return Err(Error::InvalidArgument("chain needs n >= 2 bonds".into()));
        }
        Ok(ReducedSpace { n_bonds, spin_bonds: (0..n_bonds - 1).map(|k| (k, k + 1)).collect() })
    }

    /// Comb geometry of a torus: bonds are stars (row-major), spins are
    /// the comb edges.
    pub fn comb(lattice: &TorusLattice) -> Self {
        ReducedSpace {
            n_bonds: lattice.side * lattice.side,
            spin_bonds: lattice.comb_order.iter().map(|c| c.stars).collect(),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.spin_bonds.len()
    }

    /// Hilbert dimension of the reduced syndrome space (2^{n_spins}).
    pub fn dim(&self) -> usize {
        1usize << self.n_spins()
    }

    /// Bond pattern of a flip set; true = "-".
    pub fn bond_pattern(&self, flips: usize) -> Vec<bool> {
        let mut mu = vec![false; self.n_bonds];
        for (j, &(a, b)) in self.spin_bonds.iter().enumerate() {
            if (flips >> j) & 1 == 1 {
                mu[a] = !mu[a];
                mu[b] = !mu[b];
            }
        }
        mu
    }

    /// Inverse of `bond_pattern` (GF(2) solve); admissible patterns have
    /// an even number of "-" signs.
    pub fn flips_for_pattern(&self, pattern: &[bool]) -> Result<usize> {
        if pattern.len() != self.n_bonds {
            return Err(Error::Dimension { expected: self.n_bonds, got: pattern.len() });
        }
        let ns = self.n_spins();
        // rows: one u64 of spin-incidence bits per bond, augmented
        let mut rows: Vec<(u64, bool)> = vec![(0, false); self.n_bonds];
        for (j, &(a, b)) in self.spin_bonds.iter().enumerate() {
            rows[a].0 ^= 1 << j;
            rows[b].0 ^= 1 << j;
        }
        for (b, r) in rows.iter_mut().enumerate() {
            r.1 = pattern[b];
        }
        let mut solution = 0usize;
        let mut pivot_rows: Vec<usize> = Vec::new();
        let mut used = vec![false; self.n_bonds];
        for j in 0..ns {
            let Some(pr) = (0..self.n_bonds).find(|&r| !used[r] && rows[r].0 >> j & 1 == 1) else {
                continue;
            };
            used[pr] = true;
            pivot_rows.push(pr);
            let (prow, pval) = rows[pr];
            for r in 0..self.n_bonds {
                if r != pr && rows[r].0 >> j & 1 == 1 {
                    rows[r].0 ^= prow;
                    rows[r].1 ^= pval;
                }
            }
        }
        // back-substitute: after full elimination each pivot row has a
        // single leading bit
        for &pr in &pivot_rows {
            let j = rows[pr].0.trailing_zeros() as usize;
            if rows[pr].1 {
                solution |= 1 << j;
            }
        }
        // consistency: zero rows must have zero rhs
        for r in 0..self.n_bonds {
            if !used[r] && rows[r].0 == 0 && rows[r].1 {
                return Err(Error::InvalidArgument(
                    "bond pattern has odd parity; not reachable by spin flips".into(),
                ));
            }
        }
        // the eliminated pivot rows may still couple several spins when the
        // geometry has cycles; verify by round trip
        if self.bond_pattern(solution) != pattern {
            return Err(Error::InvalidArgument("pattern solve failed the round trip".into()));
        }
        Ok(solution)
    }

    /// Energy of a flip set under `-sum_bonds (bond sign)`, J = 1.
    pub fn energy(&self, flips: usize) -> f64 {
        self.bond_pattern(flips).iter().map(|&m| if m { 1.0 } else { -1.0 }).sum()
    }
}

/// `h_± = 2 / (e^{∓4β} + 1)`; beta may be `f64::INFINITY`.
pub fn h_plus_minus(beta: f64) -> (f64, f64) {
    (crate::gibbs::glauber_rate(-4.0, beta), crate::gibbs::glauber_rate(4.0, beta))
}

/// Exact 4x4 local master-Hamiltonian block (negative semidefinite), in
/// the ket-labelled basis (++, +-, -+, --). For `Int` the fixed bond is
/// the second of the pair; `oriented_local_block` gives the mirrored
/// variant.
pub fn local_block_matrix(case: GammaCase, beta: f64) -> Array2<f64> {
    let (hp, hm) = h_plus_minus(beta);
    let eta = (-2.0 * beta).exp();
    let c = 2.0 * eta / (eta * eta + 1.0);
    match case {
        GammaCase::Ab => {
            let mut m = Array2::zeros((4, 4));
            m[[0, 0]] = -hm;
            m[[0, 3]] = c;
            m[[3, 0]] = c;
            m[[3, 3]] = -hp;
            m[[1, 1]] = -1.0;
            m[[1, 2]] = 1.0;
            m[[2, 1]] = 1.0;
            m[[2, 2]] = -1.0;
            m
        }
        GammaCase::Flip => {
            let mut m = Array2::zeros((4, 4));
            m[[0, 0]] = -(hp + hm) / 2.0;
            m[[3, 3]] = -(hp + hm) / 2.0;
            m[[1, 1]] = -1.0;
            m[[1, 2]] = 1.0;
            m[[2, 1]] = 1.0;
            m[[2, 2]] = -1.0;
            m
        }
        GammaCase::Int => Array2::from_diag(&ndarray::arr1(&[
            -(hm + 1.0) / 2.0,
            -(hp + 1.0) / 2.0,
            -(hm + 1.0) / 2.0,
            -(hp + 1.0) / 2.0,
        ])),
    }
}

/// Local block with the int-case orientation resolved: `in_a`/`in_b` say
/// whether the first/second bond of the pair lies in Lambda.
pub fn oriented_local_block(in_a: bool, in_b: bool, beta: f64) -> Array2<f64> {
    let (hp, hm) = h_plus_minus(beta);
    match (in_a, in_b) {
        (true, true) => local_block_matrix(GammaCase::Ab, beta),
        (false, false) => local_block_matrix(GammaCase::Flip, beta),
        (false, true) => local_block_matrix(GammaCase::Int, beta),
        (true, false) => Array2::from_diag(&ndarray::arr1(&[
            -(hm + 1.0) / 2.0,
            -(hm + 1.0) / 2.0,
            -(hp + 1.0) / 2.0,
            -(hp + 1.0) / 2.0,
        ])),
    }
}

/// The zero-temperature constants of the chain representation.
pub fn k_t_matrix() -> Array2<f64> {
    let mut m = Array2::zeros((4, 4));
    m[[1, 1]] = 1.0;
    m[[1, 2]] = -1.0;
    m[[2, 1]] = -1.0;
    m[[2, 2]] = 1.0;
    m
}

pub fn k_d_matrix() -> Array2<f64> {
    let mut m = Array2::zeros((4, 4));
    m[[3, 3]] = 2.0;
    m
}

/// Effective classical matrices on a reduced space.
#[derive(Clone, Debug)]
pub struct ChainMatrices {
    pub n_bonds: usize,
    /// `f64::INFINITY` encodes the zero-temperature limit.
    pub beta: f64,
    pub k_t: Array2<f64>,
    pub k_d: Array2<f64>,
    /// `K^beta` on the 2^{n_bonds} bond-pattern space (positive
    /// semidefinite master of the negated abelian-sector generator).
    pub k: SparseOperator,
}

fn tensor_block_assembly(
    n_bonds: usize,
    spin_blocks: &[((usize, usize), Array2<f64>)],
) -> Result<SparseOperator> {
    if n_bonds > 24 {
        return Err(Error::TooLarge(format!("2^{n_bonds} bond space")));
    }
    let dim = 1usize << n_bonds;
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    for &((a, b), ref block) in spin_blocks {
        for s in 0..dim {
            let bit_a = (s >> a) & 1;
            let bit_b = (s >> b) & 1;
            let col = 2 * bit_a + bit_b;
            for row in 0..4 {
                let v = block[[row, col]];
                if v == 0.0 {
                    continue;
                }
                let (ra, rb) = (row >> 1, row & 1);
                let mut s2 = s & !((1 << a) | (1 << b));
                s2 |= ra << a;
                s2 |= rb << b;
                triplets.push((s2, s, Complex64::new(v, 0.0)));
            }
        }
    }
    SparseOperator::from_triplets(dim, triplets)
}

/// `K^beta` for the open chain: the negated ab-blocks tensored along the
/// bond pairs (k, k+1). At `beta = inf` this is exactly `K_T + K_D`.
pub fn build_chain_k(n_bonds: usize, beta: f64) -> Result<ChainMatrices> {
    let space = ReducedSpace::chain(n_bonds)?;
    build_k(&space, beta)
}

/// Same local blocks placed on the comb's star adjacency.
pub fn build_comb_k(lattice: &TorusLattice, beta: f64) -> Result<ChainMatrices> {
    let space = ReducedSpace::comb(lattice);
    build_k(&space, beta)
}

pub fn build_k(space: &ReducedSpace, beta: f64) -> Result<ChainMatrices> {
    let neg_ab = local_block_matrix(GammaCase::Ab, beta).mapv(|x| -x);
    let blocks: Vec<((usize, usize), Array2<f64>)> =
        space.spin_bonds.iter().map(|&p| (p, neg_ab.clone())).collect();
    let k = tensor_block_assembly(space.n_bonds, &blocks)?;
    Ok(ChainMatrices { n_bonds: space.n_bonds, beta, k_t: k_t_matrix(), k_d: k_d_matrix(), k })
}

/// Full Lambda-sector block of the master Hamiltonian of `-L` as a
/// tensor assembly of oriented local blocks over all 2^{n_bonds} ket
/// patterns (the paper's parity relaxation; restrict to even kets with
/// [`SpinSectorBasis`]-style index lists when needed).
pub fn lambda_block_assembly(
    space: &ReducedSpace,
    sector: &LambdaSector,
    beta: f64,
) -> Result<SparseOperator> {
    if sector.n_bonds != space.n_bonds {
        return Err(Error::Dimension { expected: space.n_bonds, got: sector.n_bonds });
    }
    let blocks: Vec<((usize, usize), Array2<f64>)> = space
        .spin_bonds
        .iter()
        .map(|&(a, b)| {
            ((a, b), oriented_local_block(sector.in_lambda[a], sector.in_lambda[b], beta).mapv(|x| -x))
        })
        .collect();
    tensor_block_assembly(space.n_bonds, &blocks)
}

/// Spin-number sector `S_{n,k}`: bond patterns with k "-" signs.
#[derive(Clone, Debug)]
pub struct SpinSectorBasis {
    pub n: usize,
    pub k: usize,
    pub members: Vec<usize>,
}

pub fn spin_sector_basis(n: usize, k: usize) -> SpinSectorBasis {
    let members = (0..(1usize << n)).filter(|s| s.count_ones() as usize == k).collect();
    SpinSectorBasis { n, k, members }
}

/// Restrict a bond-space matrix to a spin-number sector (dense).
pub fn restrict_to_spin_sector(m: &SparseOperator, basis: &SpinSectorBasis) -> Result<Array2<f64>> {
    let mut pos = vec![usize::MAX; m.dim];
    for (i, &s) in basis.members.iter().enumerate() {
        pos[s] = i;
    }
    let k = basis.members.len();
    let mut out = Array2::zeros((k, k));
    for (r, c, v) in m.iter_triplets() {
        if pos[r] != usize::MAX && pos[c] != usize::MAX {
            out[[pos[r], pos[c]]] += v.re;
        }
    }
    Ok(out)
}

/// Off-sector leakage of a bond-space matrix w.r.t. a spin-number sector.
pub fn spin_sector_leakage(m: &SparseOperator, basis: &SpinSectorBasis) -> f64 {
    let mut inside = vec![false; m.dim];
    for &s in &basis.members {
        inside[s] = true;
    }
    let mut leak: f64 = 0.0;
    for (r, c, v) in m.iter_triplets() {
        if inside[c] && !inside[r] {
            leak = leak.max(v.norm());
        }
    }
    leak
}

/// Sparse vector in a vectorized operator space.
pub type SparseVec = Vec<(usize, Complex64)>;

/// GNS-orthonormal basis of the Lambda sector of a reduced operator
/// space: one (single-coordinate) p-transformed unit per admissible ket
/// flip set. Coordinates index |S_ket><S_bra| as `S_ket * dim + S_bra`.
pub fn lambda_sector_basis(space: &ReducedSpace, sector: &LambdaSector) -> Result<Vec<SparseVec>> {
    if sector.n_bonds != space.n_bonds {
        return Err(Error::Dimension { expected: space.n_bonds, got: sector.n_bonds });
    }
    let dim = space.dim();
    let mut out = Vec::with_capacity(dim);
    for ket in 0..dim {
        let mut pattern = space.bond_pattern(ket);
        for (b, p) in pattern.iter_mut().enumerate() {
            if !sector.in_lambda[b] {
                *p = !*p;
            }
        }
        let bra = space.flips_for_pattern(&pattern)?;
        out.push(vec![(ket * dim + bra, Complex64::new(1.0, 0.0))]);
    }
    Ok(out)
}

/// Master Hamiltonian (positive semidefinite, i.e. of `-L`) of the
/// reduced Davies generator `sum_j L_{spin j}` on the full operator
/// space of a reduced syndrome space. Returns the matrix and the
/// unit-norm kernel vector `vec sqrt(sigma~)`.
pub fn reduced_master_psd(space: &ReducedSpace, beta: f64) -> Result<(SparseOperator, Vec<Complex64>)> {
    let ns = space.n_spins();
    if ns > 13 {
        return Err(Error::TooLarge(format!("4^{ns} reduced operator space")));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidArgument(
            "reduced master needs finite beta >= 0; use the K matrices for the zero-temperature limit".into(),
        ));
    }
    let d = space.dim();
    let (hp, hm) = h_plus_minus(beta);
    // per-state log-weights (unnormalized): ln w(S) = -beta E(S)
    let logw: Vec<f64> = (0..d).map(|s| -beta * space.energy(s)).collect();
    // bond-pair classification per spin and state
    let pair_of = |s: usize, j: usize| -> (bool, bool) {
        let (a, b) = space.spin_bonds[j];
        let mu = space.bond_pattern(s);
        (mu[a], mu[b])
    };
    let diag_rate = |pair: (bool, bool)| -> f64 {
        match pair {
            (true, true) => hp,
            (false, false) => hm,
            _ => 1.0,
        }
    };
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    for j in 0..ns {
        // precompute pair classes for all states
        let pairs: Vec<(bool, bool)> = (0..d).map(|s| pair_of(s, j)).collect();
        for r in 0..d {
            for c in 0..d {
                let idx = r * d + c;
                // -1/2 {S^dag S, X} diagonal part of the Heisenberg action
                let diag = 0.5 * (diag_rate(pairs[r]) + diag_rate(pairs[c]));
                triplets.push((idx, idx, Complex64::new(diag, 0.0)));
                // conjugation parts: target (r^j, c^j)
                let r2 = r ^ (1 << j);
                let c2 = c ^ (1 << j);
                let coeff = match (pairs[r2], pairs[c2]) {
                    ((true, true), (true, true)) => hp,
                    ((false, false), (false, false)) => hm,
                    (pr, pc) if pr.0 != pr.1 && pc.0 != pc.1 => 1.0,
                    _ => 0.0,
                };
                if coeff != 0.0 {
                    // master gauge: entry ((r2,c2),(r,c)) x exp((lnw_c2 - lnw_c)/ ... )
                    let w = ((logw[c2] - logw[c]) / 2.0).exp();
                    triplets.push((r2 * d + c2, idx, Complex64::new(-(coeff * w), 0.0)));
                }
            }
        }
    }
    // the loop assembled -(master of L); diagonal entries were pushed
    // positive already, conjugation parts negative
    let m = SparseOperator::from_triplets(d * d, triplets)?;
    // kernel: vec sqrt(sigma~) with log-space normalization
    let maxw = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logw.iter().map(|l| (l - maxw).exp()).sum();
    let mut kernel = vec![Complex64::default(); d * d];
    for s in 0..d {
        kernel[s * d + s] = Complex64::new((((logw[s] - maxw) - z.ln()) / 2.0).exp(), 0.0);
    }
    Ok((m, kernel))
}

/// Restriction of a superoperator to the span of GNS-orthonormal basis
/// vectors (already p-transformed). Returns the block and the measured
/// off-block leakage; errors if `claim_invariant` and the leakage
/// exceeds 1e-10 relative to the block scale.
pub fn restrict_superoperator(
    sup: &Superoperator,
    basis: &[SparseVec],
    claim_invariant: bool,
) -> Result<(Array2<Complex64>, f64)> {
    let dim = sup.matrix.dim;
    let k = basis.len();
    // coordinate -> (basis index, conj coefficient); the bases used here
    // touch each coordinate at most once
    let mut owner: Vec<(u32, Complex64)> = vec![(u32::MAX, Complex64::default()); dim];
    for (i, v) in basis.iter().enumerate() {
        for &(coord, coeff) in v {
            if owner[coord].0 != u32::MAX {
                return Err(Error::InvalidArgument(
                    "sector basis vectors must have disjoint coordinate support".into(),
                ));
            }
            owner[coord] = (i as u32, coeff.conj());
        }
    }
    let mut block = Array2::<Complex64>::zeros((k, k));
    let mut leak: f64 = 0.0;
    let mut x = vec![Complex64::default(); dim];
    let mut y = vec![Complex64::default(); dim];
    for (i, v) in basis.iter().enumerate() {
        for &(coord, coeff) in v {
            x[coord] = coeff;
        }
        sup.matrix.apply(&x, &mut y);
        for (coord, val) in y.iter().enumerate() {
            if val.norm() == 0.0 {
                continue;
            }
            let (j, cconj) = owner[coord];
            if j == u32::MAX {
                leak = leak.max(val.norm());
            } else {
                block[[j as usize, i]] += cconj * val;
            }
        }
        for &(coord, _) in v {
            x[coord] = Complex64::default();
        }
        for val in y.iter_mut() {
            *val = Complex64::default();
        }
    }
    let scale = block.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    if claim_invariant && leak > 1e-10 * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "claimed-invariant basis leaks {leak:.3e} (block scale {scale:.3e})"
        )));
    }
    Ok((block, leak))
}

/// Generator sets of the four commuting subalgebras of the toric
/// observable algebra.
#[derive(Clone, Debug)]
pub struct LogicSyndromeSplit {
    pub q1: Vec<PauliString>,
    pub q2: Vec<PauliString>,
    pub magnetic: Vec<PauliString>,
    pub electric: Vec<PauliString>,
    pub syndrome_dim: usize,
}

pub fn logic_syndrome_split(lattice: &TorusLattice) -> Result<LogicSyndromeSplit> {
    if lattice.side < 2 {
        return Err(Error::InvalidArgument("torus needs L >= 2".into()));
    }
    let n = lattice.n_qubits;
    let [x1, z1, x2, z2] = lattice.logical_operators();
    let l2 = lattice.side * lattice.side;
    let mut magnetic: Vec<PauliString> = (0..l2).map(|p| lattice.plaquette_operator(p)).collect();
    magnetic.extend(lattice.snake_edges().iter().map(|&e| PauliString::x(n, e)));
    let mut electric: Vec<PauliString> = (0..l2).map(|s| lattice.star_operator(s)).collect();
    electric.extend(lattice.comb_edges().iter().map(|&e| PauliString::z(n, e)));
    Ok(LogicSyndromeSplit {
        q1: vec![x1, z1],
        q2: vec![x2, z2],
        magnetic,
        electric,
        syndrome_dim: 1usize << (n - 2),
    })
}

impl LogicSyndromeSplit {
    /// All generators of distinct subalgebras commute; returns the number
    /// of pairs checked.
    pub fn verify_commutation(&self) -> Result<usize> {
        let groups = [&self.q1, &self.q2, &self.magnetic, &self.electric];
        let mut checked = 0;
        for gi in 0..4 {
            for gj in gi + 1..4 {
                for a in groups[gi] {
                    for b in groups[gj] {
                        if !a.commutes_with(b) {
                            return Err(Error::InvalidArgument(format!(
                                "generators of subalgebras {gi} and {gj} fail to commute: {a:?} vs {b:?}"
                            )));
                        }
                        checked += 1;
                    }
                }
            }
        }
        Ok(checked)
    }
}

/// Matrix of a logical factor product B1 B2 on the 4-dimensional ground
/// label space, in the eigenbasis label order (o, |, -, +) = (00, 10,
/// 01, 11) with the first bit flipped by X1.
pub fn logical_factor_matrix(sector: SectorLabel) -> [[Complex64; 4]; 4] {
    let zero = Complex64::default();
    let mut m = [[zero; 4]; 4];
    let i = Complex64::i();
    for g in 0..4usize {
        let (b1, b2) = ((g >> 1) & 1, g & 1);
        // factor on qubit 1
        let (g1, c1) = match sector.b1 {
            LogicalFactor::One => (g, Complex64::new(1.0, 0.0)),
            LogicalFactor::X => (g ^ 2, Complex64::new(1.0, 0.0)),
            LogicalFactor::Z => (g, Complex64::new(if b1 == 0 { 1.0 } else { -1.0 }, 0.0)),
            // Y = -i Z X
            LogicalFactor::Y => (g ^ 2, -i * Complex64::new(if b1 == 1 { 1.0 } else { -1.0 }, 0.0)),
        };
        let (g2, c2) = match sector.b2 {
            LogicalFactor::One => (g1, Complex64::new(1.0, 0.0)),
            LogicalFactor::X => (g1 ^ 1, Complex64::new(1.0, 0.0)),
            LogicalFactor::Z => (g1, Complex64::new(if b2 == 0 { 1.0 } else { -1.0 }, 0.0)),
            LogicalFactor::Y => (g1 ^ 1, -i * Complex64::new(if b2 == 1 { 1.0 } else { -1.0 }, 0.0)),
        };
        m[g2][g] = c1 * c2;
    }
    m
}

/// GNS-orthonormal basis of the toric block `B_{B1,B2}` in the L = 2
/// eigen frame: one element per (u_m, u_e) pair of syndrome matrix
/// units; each has four coordinates (one per ground label).
pub fn toric_sector_basis(
    gm: &GibbsModel,
    lattice: &TorusLattice,
    sector: SectorLabel,
) -> Result<Vec<SparseVec>> {
    if lattice.side != 2 {
        return Err(Error::TooLarge("full toric sector bases are built at L = 2".into()));
    }
    let nm = lattice.side * lattice.side - 1; // 3
    let d = gm.dim();
    let w = gm.sigma_weights();
    let q = logical_factor_matrix(sector);
    let eigen_index = |g: usize, sm: usize, te: usize| ((g << nm) | sm) << nm | te;
    let mut out = Vec::new();
    for m_ket in 0..(1usize << nm) {
        for m_bra in 0..(1usize << nm) {
            for e_ket in 0..(1usize << nm) {
                for e_bra in 0..(1usize << nm) {
                    let mut v: SparseVec = Vec::with_capacity(4);
                    let mut norm2 = 0.0;
                    for g in 0..4usize {
                        let (g2, c) = (0..4)
                            .find_map(|r| if q[r][g].norm() > 0.0 { Some((r, q[r][g])) } else { None })
                            .expect("logical factor matrices are signed permutations");
                        let row = eigen_index(g2, m_ket, e_ket);
                        let col = eigen_index(g, m_bra, e_bra);
                        // p-transform: multiply by sqrt(w_col)
                        let coeff = c * Complex64::new(w[col].sqrt(), 0.0);
                        norm2 += coeff.norm_sqr();
                        v.push((row * d + col, coeff));
                    }
                    let nrm = norm2.sqrt();
                    for (_, c) in v.iter_mut() {
                        *c /= nrm;
                    }
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}
