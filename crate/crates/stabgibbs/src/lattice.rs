//! Ring and torus geometry: edge indexing, stabilizer supports, the snake
//! and comb layouts, logical-operator supports, and comb leaf paths.
//!
//! Torus conventions (documented because the layout is fixed only up to
//! topology):
//! - cells and vertices live on an L x L grid with periodic wrap;
//! - the horizontal edge of cell (r, c) gets index `2(rL + c)`, the
//!   vertical edge `2(rL + c) + 1` (horizontal before vertical per cell,
//!   row-major over cells);
//! - `h(r, c)` joins vertices (r, c)-(r, c+1) and separates cells
//!   (r-1, c)/(r, c); `v(r, c)` joins vertices (r, c)-(r+1, c) and
//!   separates cells (r, c-1)/(r, c);
//! - the snake is the boustrophedon walk over cells (row 0 left to
//!   right, row 1 right to left, ...); plaquettes are indexed along it;
//! - the comb has its spine on vertex column 0 and one horizontal tooth
//!   per vertex row, teeth on even rows >= 2 running through the wrap
//!   edge so they dodge the snake's turn edges;
//! - logical supports: Z1 = vertical edges of column 0, Z2 = horizontal
//!   edges of row 0, X1 = vertical edges of row L-1, X2 = a dual
//!   non-contractible loop threaded through the snake's turn edges.

use crate::pauli::PauliString;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// 1D ferromagnetic Ising ring: bond `j` couples sites `j` and `j+1 mod N`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RingLattice {
    pub n_sites: usize,
    pub coupling: f64,
}

impl RingLattice {
    pub fn new(n_sites: usize, coupling: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidArgument(format!("ring needs N >= 2, got {n_sites}")));
        }
        if coupling <= 0.0 {
            return Err(Error::InvalidArgument("ferromagnetic coupling requires J > 0".into()));
        }
        Ok(RingLattice { n_sites, coupling })
    }

    pub fn n_bonds(&self) -> usize {
        self.n_sites
    }

    /// Bond observable Z_j = sigma^z_j sigma^z_{j+1}.
    pub fn bond_operator(&self, j: usize) -> PauliString {
        PauliString::z_string(self.n_sites, &[j % self.n_sites, (j + 1) % self.n_sites])
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "type": "ring",
            "N": self.n_sites,
            "J": self.coupling,
            "bonds": (0..self.n_sites).map(|j| [j, (j + 1) % self.n_sites]).collect::<Vec<_>>(),
        })
    }
}

/// Which excitation family a path operator creates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcitationKind {
    Magnetic,
    Electric,
}

/// L x L toric-code lattice with snake/comb layout and logical supports.
#[derive(Clone, Debug)]
pub struct TorusLattice {
    pub side: usize,
    pub n_qubits: usize,
    /// Star supports indexed row-major over vertices.
    pub star_supports: Vec<[usize; 4]>,
    /// Plaquette supports indexed along the snake.
    pub plaquette_supports: Vec<[usize; 4]>,
    /// Snake entry j (j = 2..L^2, index j-2 here): the spin between
    /// consecutive snake plaquettes j-1 and j (1-based plaquette labels).
    pub snake_order: Vec<SnakeSpin>,
    /// Comb entry: spin together with the pair of stars it couples.
    pub comb_order: Vec<CombSpin>,
    /// Shortest comb paths between degree-one stars, as edge sequences.
    pub leaf_paths: Vec<Vec<usize>>,
    /// Same paths as sequences of star indices (one longer than edges).
    pub leaf_paths_stars: Vec<Vec<usize>>,
    pub logical_x1: Vec<usize>,
    pub logical_z1: Vec<usize>,
    pub logical_x2: Vec<usize>,
    pub logical_z2: Vec<usize>,
    /// Cells in snake order (row-major boustrophedon), as row-major indices.
    pub snake_plaquettes: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SnakeSpin {
    pub edge: usize,
    /// 0-based positions along the snake of the two plaquettes flipped by
    /// sigma^x on this edge; always consecutive: (k, k+1).
    pub plaquettes: (usize, usize),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CombSpin {
    pub edge: usize,
    /// Row-major star indices flipped by sigma^z on this edge.
    pub stars: (usize, usize),
}

impl TorusLattice {
    pub fn new(side: usize) -> Result<Self> {
        if side < 2 {
            return Err(Error::InvalidArgument(format!("torus needs L >= 2, got {side}")));
        }
        let l = side;
        let n_qubits = 2 * l * l;
        let h = |r: usize, c: usize| 2 * ((r % l) * l + (c % l));
        let v = |r: usize, c: usize| 2 * ((r % l) * l + (c % l)) + 1;

        let star_supports: Vec<[usize; 4]> = (0..l * l)
            .map(|i| {
                let (r, c) = (i / l, i % l);
                [h(r, c), h(r, (c + l - 1) % l), v(r, c), v((r + l - 1) % l, c)]
            })
            .collect();

        // cells in boustrophedon order
        let mut cells = Vec::with_capacity(l * l);
        for r in 0..l {
            if r % 2 == 0 {
                for c in 0..l {
                    cells.push((r, c));
                }
            } else {
                for c in (0..l).rev() {
                    cells.push((r, c));
                }
            }
        }
        let plaq_support = |r: usize, c: usize| [h(r, c), h((r + 1) % l, c), v(r, c), v(r, (c + 1) % l)];
        let plaquette_supports: Vec<[usize; 4]> = cells.iter().map(|&(r, c)| plaq_support(r, c)).collect();
        let snake_plaquettes: Vec<usize> = cells.iter().map(|&(r, c)| r * l + c).collect();

        let mut snake_order = Vec::with_capacity(l * l - 1);
        for (k, w) in cells.windows(2).enumerate() {
            let ((r1, c1), (r2, c2)) = (w[0], w[1]);
            let edge = if r1 == r2 { v(r1, c1.max(c2)) } else { h(r1.max(r2), c1) };
            snake_order.push(SnakeSpin { edge, plaquettes: (k, k + 1) });
        }

        // comb: spine down vertex column 0, one tooth per vertex row
        let star_index = |r: usize, c: usize| r * l + c;
        let mut comb_order = Vec::with_capacity(l * l - 1);
        for r in 0..l - 1 {
            comb_order.push(CombSpin { edge: v(r, 0), stars: (star_index(r, 0), star_index(r + 1, 0)) });
        }
        for r in 0..l {
            if r % 2 == 1 || r == 0 {
                for c in 0..l - 1 {
                    comb_order.push(CombSpin { edge: h(r, c), stars: (star_index(r, c), star_index(r, c + 1)) });
                }
            } else {
                // tooth runs (r,0)-(r,L-1)-(r,L-2)-...-(r,1) through the wrap edge
                comb_order.push(CombSpin { edge: h(r, l - 1), stars: (star_index(r, 0), star_index(r, l - 1)) });
                for c in (2..l).rev() {
                    comb_order.push(CombSpin { edge: h(r, c - 1), stars: (star_index(r, c - 1), star_index(r, c)) });
                }
            }
        }

        // logical supports
        let logical_z1: Vec<usize> = (0..l).map(|r| v(r, 0)).collect();
        let logical_z2: Vec<usize> = (0..l).map(|c| h(0, c)).collect();
        let logical_x1: Vec<usize> = (0..l).map(|c| v(l - 1, c)).collect();
        let mut logical_x2 = vec![h(0, l - 1)];
        for r in 1..l {
            logical_x2.push(if r % 2 == 1 { h(r, l - 1) } else { h(r, 0) });
        }
        for r in 1..l - 1 {
            for c in 1..l {
                logical_x2.push(v(r, c));
            }
        }
        if l % 2 == 1 {
            for c in 1..l {
                logical_x2.push(v(l - 1, c));
            }
        }

        let (leaf_paths, leaf_paths_stars) = comb_leaf_paths_impl(l, &comb_order);

        Ok(TorusLattice {
            side,
            n_qubits,
            star_supports,
            plaquette_supports,
            snake_order,
            comb_order,
            leaf_paths,
            leaf_paths_stars,
            logical_x1,
            logical_z1,
            logical_x2,
            logical_z2,
            snake_plaquettes,
        })
    }

    pub fn star_operator(&self, s: usize) -> PauliString {
        PauliString::x_string(self.n_qubits, &self.star_supports[s])
    }

    pub fn plaquette_operator(&self, p: usize) -> PauliString {
        PauliString::z_string(self.n_qubits, &self.plaquette_supports[p])
    }

    /// The four logical strings (X1, Z1, X2, Z2).
    pub fn logical_operators(&self) -> [PauliString; 4] {
        let n = self.n_qubits;
        [
            PauliString::x_string(n, &self.logical_x1),
            PauliString::z_string(n, &self.logical_z1),
            PauliString::x_string(n, &self.logical_x2),
            PauliString::z_string(n, &self.logical_z2),
        ]
    }

    pub fn snake_edges(&self) -> Vec<usize> {
        self.snake_order.iter().map(|s| s.edge).collect()
    }

    pub fn comb_edges(&self) -> Vec<usize> {
        self.comb_order.iter().map(|s| s.edge).collect()
    }

    /// W_l^m (product of X) or W_l^e (product of Z) along `path`; edges
    /// must lie on the snake (magnetic) or comb (electric).
    pub fn excitation_path_operator(&self, kind: ExcitationKind, path: &[usize]) -> Result<PauliString> {
        let allowed: Vec<usize> = match kind {
            ExcitationKind::Magnetic => self.snake_edges(),
            ExcitationKind::Electric => self.comb_edges(),
        };
        for &e in path {
            if !allowed.contains(&e) {
                return Err(Error::InvalidArgument(format!(
                    "edge {e} is not on the {}",
                    match kind {
                        ExcitationKind::Magnetic => "snake",
                        ExcitationKind::Electric => "comb",
                    }
                )));
            }
        }
        Ok(match kind {
            ExcitationKind::Magnetic => PauliString::x_string(self.n_qubits, path),
            ExcitationKind::Electric => PauliString::z_string(self.n_qubits, path),
        })
    }

    /// All shortest comb paths between pairs of degree-one stars.
    pub fn comb_leaf_paths(&self) -> &[Vec<usize>] {
        &self.leaf_paths
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "type": "torus",
            "L": self.side,
            "n_qubits": self.n_qubits,
            "stars": self.star_supports,
            "plaquettes": self.plaquette_supports,
            "snake": self.snake_edges(),
            "comb": self.comb_edges(),
            "snake_plaquette_order": self.snake_plaquettes,
            "comb_star_pairs": self.comb_order.iter().map(|c| [c.stars.0, c.stars.1]).collect::<Vec<_>>(),
            "logical_x1": self.logical_x1,
            "logical_z1": self.logical_z1,
            "logical_x2": self.logical_x2,
            "logical_z2": self.logical_z2,
            "leaf_paths": self.leaf_paths,
        })
    }
}

fn comb_leaf_paths_impl(l: usize, comb: &[CombSpin]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n_stars = l * l;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_stars]; // (neighbor, edge)
    for spin in comb {
        adj[spin.stars.0].push((spin.stars.1, spin.edge));
        adj[spin.stars.1].push((spin.stars.0, spin.edge));
    }
    let leaves: Vec<usize> = (0..n_stars).filter(|&s| adj[s].len() == 1).collect();
    let mut paths = Vec::new();
    let mut star_paths = Vec::new();
    for (i, &u) in leaves.iter().enumerate() {
        // BFS from u; the comb is a tree so paths are unique and shortest
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n_stars];
        let mut seen = vec![false; n_stars];
        let mut queue = std::collections::VecDeque::from([u]);
        seen[u] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, e) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        for &v in leaves.iter().skip(i + 1) {
            let mut edges = Vec::new();
            let mut stars = vec![v];
            let mut cur = v;
            while let Some((p, e)) = parent[cur] {
                edges.push(e);
                stars.push(p);
                cur = p;
            }
            edges.reverse();
            stars.reverse();
            paths.push(edges);
            star_paths.push(stars);
        }
    }
    (paths, star_paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ring_rejects_small_n() {
        assert!(RingLattice::new(1, 1.0).is_err());
        assert!(RingLattice::new(2, 1.0).is_ok());
    }

    #[test]
    fn torus_rejects_small_l() {
        assert!(TorusLattice::new(1).is_err());
    }

    #[test]
    fn edge_memberships_are_two_by_two() {
        for l in 2..=4 {
            let t = TorusLattice::new(l).unwrap();
            let mut star_count = vec![0usize; t.n_qubits];
            let mut plaq_count = vec![0usize; t.n_qubits];
            for s in &t.star_supports {
                for &e in s {
                    star_count[e] += 1;
                }
            }
            for p in &t.plaquette_supports {
                for &e in p {
                    plaq_count[e] += 1;
                }
            }
            assert!(star_count.iter().all(|&c| c == 2), "L={l}");
            assert!(plaq_count.iter().all(|&c| c == 2), "L={l}");
        }
    }

    #[test]
    fn parity_products_are_identity() {
        for l in 2..=6 {
            let t = TorusLattice::new(l).unwrap();
            let mut prod_x = PauliString::identity(t.n_qubits);
            for s in 0..l * l {
                prod_x = prod_x.mul(&t.star_operator(s));
            }
            assert!(prod_x.is_identity(), "L={l} star parity");
            let mut prod_z = PauliString::identity(t.n_qubits);
            for p in 0..l * l {
                prod_z = prod_z.mul(&t.plaquette_operator(p));
            }
            assert!(prod_z.is_identity(), "L={l} plaquette parity");
        }
    }

    #[test]
    fn snake_and_comb_partition_all_but_two_spins() {
        for l in 2..=5 {
            let t = TorusLattice::new(l).unwrap();
            let snake: HashSet<_> = t.snake_edges().into_iter().collect();
            let comb: HashSet<_> = t.comb_edges().into_iter().collect();
            assert_eq!(snake.len(), l * l - 1);
            assert_eq!(comb.len(), l * l - 1);
            assert!(snake.is_disjoint(&comb), "L={l}");
            assert_eq!(snake.union(&comb).count(), t.n_qubits - 2, "L={l}");
        }
    }

    #[test]
    fn snake_avoids_z_logicals_comb_avoids_x_logicals() {
        for l in 2..=5 {
            let t = TorusLattice::new(l).unwrap();
            let snake: HashSet<_> = t.snake_edges().into_iter().collect();
            let comb: HashSet<_> = t.comb_edges().into_iter().collect();
            assert!(t.logical_z1.iter().all(|e| !snake.contains(e)), "L={l}");
            assert!(t.logical_z2.iter().all(|e| !snake.contains(e)), "L={l}");
            assert!(t.logical_x1.iter().all(|e| !comb.contains(e)), "L={l}");
            assert!(t.logical_x2.iter().all(|e| !comb.contains(e)), "L={l}");
        }
    }

    #[test]
    fn logical_commutation_pattern() {
        for l in 2..=5 {
            let t = TorusLattice::new(l).unwrap();
            let [x1, z1, x2, z2] = t.logical_operators();
            for s in 0..l * l {
                let star = t.star_operator(s);
                let plaq = t.plaquette_operator(s);
                for g in [&x1, &z1, &x2, &z2] {
                    assert!(g.commutes_with(&star), "L={l}");
                    assert!(g.commutes_with(&plaq), "L={l}");
                }
            }
            assert!(!x1.commutes_with(&z1));
            assert!(!x2.commutes_with(&z2));
            assert!(x1.commutes_with(&z2));
            assert!(x2.commutes_with(&z1));
            assert!(x1.commutes_with(&x2));
            assert!(z1.commutes_with(&z2));
        }
    }

    #[test]
    fn snake_spins_flip_consecutive_plaquettes() {
        for l in 2..=4 {
            let t = TorusLattice::new(l).unwrap();
            for (k, spin) in t.snake_order.iter().enumerate() {
                assert_eq!(spin.plaquettes, (k, k + 1));
                let sx = PauliString::x(t.n_qubits, spin.edge);
                for p in 0..l * l {
                    let anti = !sx.commutes_with(&t.plaquette_operator(p));
                    assert_eq!(anti, p == k || p == k + 1, "L={l} spin {k} plaq {p}");
                }
            }
        }
    }

    #[test]
    fn comb_spins_flip_their_star_pair() {
        for l in 2..=4 {
            let t = TorusLattice::new(l).unwrap();
            for spin in &t.comb_order {
                let sz = PauliString::z(t.n_qubits, spin.edge);
                for s in 0..l * l {
                    let anti = !sz.commutes_with(&t.star_operator(s));
                    assert_eq!(anti, s == spin.stars.0 || s == spin.stars.1, "L={l}");
                }
            }
        }
    }

    #[test]
    fn leaf_path_counts_and_lengths() {
        for l in 2..=8 {
            let t = TorusLattice::new(l).unwrap();
            assert_eq!(t.leaf_paths.len(), l * (l - 1) / 2, "L={l}");
            let max_stars = t.leaf_paths_stars.iter().map(|p| p.len()).max().unwrap();
            assert!(max_stars <= 3 * l - 2, "L={l}: {max_stars} > {}", 3 * l - 2);
        }
    }

    #[test]
    fn every_leaf_is_an_endpoint() {
        let t = TorusLattice::new(3).unwrap();
        let mut deg = vec![0usize; 9];
        for c in &t.comb_order {
            deg[c.stars.0] += 1;
            deg[c.stars.1] += 1;
        }
        let leaves: Vec<usize> = (0..9).filter(|&s| deg[s] == 1).collect();
        for &leaf in &leaves {
            let appears = t
                .leaf_paths_stars
                .iter()
                .any(|p| p.first() == Some(&leaf) || p.last() == Some(&leaf));
            assert!(appears);
        }
    }

    #[test]
    fn off_snake_path_operator_rejected() {
        let t = TorusLattice::new(2).unwrap();
        let comb_edge = t.comb_edges()[0];
        assert!(t.excitation_path_operator(ExcitationKind::Magnetic, &[comb_edge]).is_err());
        let empty = t.excitation_path_operator(ExcitationKind::Magnetic, &[]).unwrap();
        assert!(empty.is_identity());
    }
}
