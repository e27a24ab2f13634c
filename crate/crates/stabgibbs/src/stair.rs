//! The stair graph (an n-by-n grid folded along the diagonal) and its
//! diagonally weighted Laplacian `H_n = L_n + D_n`.
//!
//! Vertices are (i, j) with `1 <= i <= n`, `i+1 <= j <= n+1`; edges join
//! nearest neighbours (i, j±1), (i±1, j) with open boundary, and `D_n`
//! puts weight 2 on the diagonal vertices (i, i+1). The two-excitation
//! sector of the zero-temperature chain matrix is exactly `H_{n-1}`.

use crate::sparse::SparseOperator;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct StairGraph {
    pub n: usize,
    /// Vertex labels (i, j), in the fixed enumeration used by the matrix.
    pub vertices: Vec<(usize, usize)>,
    pub edges: Vec<(usize, usize)>,
    /// `L_n + D_n`.
    pub laplacian: SparseOperator,
    /// Diagonal weight positions (indices of the (i, i+1) vertices).
    pub diagonal_vertices: Vec<usize>,
}

/// Vertex enumeration: i ascending, then j.
pub fn stair_vertex_index(n: usize, i: usize, j: usize) -> Option<usize> {
    if !(1..=n).contains(&i) || !(i + 1..=n + 1).contains(&j) {
        return None;
    }
    // row i holds n + 1 - i vertices
    let before: usize = (1..i).map(|r| n + 1 - r).sum();
    Some(before + (j - i - 1))
}

pub fn stair_graph(n: usize) -> Result<StairGraph> {
    build(n, 1.0)
}

/// `H_n(a) = L_n + a D_n`.
pub fn perturbed_laplacian(n: usize, a: f64) -> Result<SparseOperator> {
    if a < 0.0 {
        return Err(Error::InvalidArgument("diagonal weight must be >= 0".into()));
    }
    Ok(build(n, a)?.laplacian)
}

fn build(n: usize, a: f64) -> Result<StairGraph> {
    if n < 1 {
        return Err(Error::InvalidArgument("stair graph needs n >= 1".into()));
    }
    let mut vertices = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n + 1 {
            vertices.push((i, j));
        }
    }
    let m = vertices.len();
    let idx = |i: usize, j: usize| stair_vertex_index(n, i, j);
    let mut edges = Vec::new();
    let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
    let one = Complex64::new(1.0, 0.0);
    for (k, &(i, j)) in vertices.iter().enumerate() {
        for (i2, j2) in [(i, j + 1), (i + 1, j)] {
            if let Some(k2) = idx(i2, j2) {
                edges.push((k, k2));
                triplets.push((k, k2, -one));
                triplets.push((k2, k, -one));
                triplets.push((k, k, one));
                triplets.push((k2, k2, one));
            }
        }
    }
    let mut diagonal_vertices = Vec::new();
    for i in 1..=n {
        let k = idx(i, i + 1).expect("diagonal vertex exists");
        diagonal_vertices.push(k);
        if a != 0.0 {
            triplets.push((k, k, Complex64::new(2.0 * a, 0.0)));
        }
    }
    let laplacian = SparseOperator::from_triplets(m, triplets)?;
    Ok(StairGraph { n, vertices, edges, laplacian, diagonal_vertices })
}

/// The explicit test vector `g(i, j) = j - i - 1` and its Rayleigh
/// quotient; the quotient evaluates to `12 / (n (n + 1))`.
pub fn stair_test_vector(n: usize) -> Result<(Vec<f64>, f64)> {
    if n < 2 {
        return Err(Error::InvalidArgument("test vector needs n >= 2".into()));
    }
    let g = stair_graph(n)?;
    let v: Vec<f64> = g.vertices.iter().map(|&(i, j)| (j as f64) - (i as f64) - 1.0).collect();
    let vc: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let hv = g.laplacian.apply_vec(&vc);
    let num: f64 = vc.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
    let den: f64 = v.iter().map(|x| x * x).sum();
    Ok((v, num / den))
}
