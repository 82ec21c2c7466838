//! Deterministic fixture generators: weighted grids, the parallel-edge
//! counting gadget, and the matrix-encoding grid.
//!
//! All randomness comes from splitmix64, so a seed reproduces the same
//! graph on every platform.

use num_bigint::BigUint;
use num_traits::Zero;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::graph::{EdgeRecord, Graph, GraphError};

/// The seeded generator used for every fixture.
pub fn fixture_rng(seed: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(seed)
}

/// `rows × cols` grid with both directions on every grid edge. Weights are
/// `1 + next_u64() % maxw`, drawn in edge order: for each vertex in
/// row-major order, its right pair then its down pair.
pub fn gen_grid(rows: usize, cols: usize, weight_seed: u64, maxw: u64) -> Result<Graph, GraphError> {
    assert!(rows >= 1 && cols >= 1 && maxw >= 1, "grid needs positive dimensions and weight");
    let mut rng = fixture_rng(weight_seed);
    let mut edges = Vec::with_capacity(4 * rows * cols);
    let pair = |edges: &mut Vec<EdgeRecord>, a: usize, b: usize, rng: &mut SplitMix64| {
        edges.push(EdgeRecord { tail: a, head: b, weight: 1 + rng.next_u64() % maxw });
        edges.push(EdgeRecord { tail: b, head: a, weight: 1 + rng.next_u64() % maxw });
    };
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                pair(&mut edges, v, v + 1, &mut rng);
            }
            if r + 1 < rows {
                pair(&mut edges, v, v + cols, &mut rng);
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// Square grid whose side is `√n`; `n` must be a perfect square.
pub fn gen_square_grid(n: usize, seed: u64, maxw: u64) -> Result<Graph, GraphError> {
    let side = (n as f64).sqrt().round() as usize;
    assert_eq!(side * side, n, "grid size must be a perfect square");
    gen_grid(side, side, seed, maxw)
}

#[derive(Clone, Debug)]
pub struct Gadget {
    pub graph: Graph,
    pub s: usize,
    pub t: usize,
    pub expected_count: BigUint,
}

/// Counting gadget for bit string `b[0..L-1)`, so `L = bits.len() + 1`.
///
/// `u_i = i` for `0 ≤ i < L`, `v_i = L + i - 1` for `1 ≤ i ≤ L`. Every
/// `v_i → v_{i+1}` edge is doubled and `u_i → v_{i+1}` exists iff `b_i`.
/// Each cross edge opens `2^{L-1-i}` paths, all of length `L · unit`.
pub fn gen_gadget(bits: &[bool], unit: u64) -> Result<Gadget, GraphError> {
    assert!(unit >= 1, "gadget unit weight must be positive");
    let l = bits.len() + 1;
    let u = |i: usize| i;
    let v = |i: usize| l + i - 1;
    let mut edges = Vec::new();
    for i in 0..l - 1 {
        edges.push(EdgeRecord { tail: u(i), head: u(i + 1), weight: unit });
    }
    for i in 1..l {
        for _ in 0..2 {
            edges.push(EdgeRecord { tail: v(i), head: v(i + 1), weight: unit });
        }
    }
    let mut expected_count = BigUint::zero();
    for (i, &b) in bits.iter().enumerate() {
        if b {
            edges.push(EdgeRecord { tail: u(i), head: v(i + 1), weight: unit });
            expected_count += BigUint::from(1u8) << (l - 1 - i);
        }
    }
    let graph = Graph::new(2 * l, edges)?;
    Ok(Gadget { graph, s: u(0), t: v(l), expected_count })
}

#[derive(Clone, Debug)]
pub struct OmvGrid {
    pub graph: Graph,
    pub n_side: usize,
    /// `sources[j] = (0, j)`.
    pub sources: Vec<usize>,
    /// `sinks[i] = (i, N)`.
    pub sinks: Vec<usize>,
}

impl OmvGrid {
    /// Closed-form `(distance, count)` for `s_j → t_i`, `1 ≤ i ≤ N`, `0 ≤ j < N`.
    pub fn expected(&self, matrix: &[Vec<bool>], i: usize, j: usize) -> (u64, u64) {
        let n = self.n_side as u64;
        let dist = n * (n - j as u64) + i as u64 * (j as u64 + 1);
        let count = 1 + matrix[i - 1][j] as u64;
        (dist, count)
    }
}

/// Grid encoding of an `N × N` boolean matrix. `matrix[i-1][j-1]` is
/// `M_{i,j}`. Vertex `(i, j)` has id `i(N+1) + j`; every undirected edge is
/// an antiparallel pair.
pub fn gen_omv_grid(matrix: &[Vec<bool>]) -> Result<OmvGrid, GraphError> {
    let n = matrix.len();
    assert!(n >= 1 && matrix.iter().all(|row| row.len() == n), "matrix must be square");
    let side = n + 1;
    let id = |i: usize, j: usize| i * side + j;
    let nw = n as u64;
    let mut edges = Vec::new();
    let mut pair = |a: usize, b: usize, w: u64| {
        edges.push(EdgeRecord { tail: a, head: b, weight: w });
        edges.push(EdgeRecord { tail: b, head: a, weight: w });
    };
    for i in 1..=n {
        for j in 0..n {
            pair(id(i, j), id(i, j + 1), nw);
        }
    }
    for i in 0..n {
        for j in 0..n {
            pair(id(i, j), id(i + 1, j), j as u64 + 1);
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if matrix[i - 1][j - 1] {
                pair(id(i - 1, j - 1), id(i, j), nw + j as u64);
            }
        }
    }
    let graph = Graph::new(side * side, edges)?;
    Ok(OmvGrid {
        graph,
        n_side: n,
        sources: (0..=n).map(|j| id(0, j)).collect(),
        sinks: (0..=n).map(|i| id(i, n)).collect(),
    })
}

/// Random `N × N` boolean matrix from the fixture generator.
pub fn random_matrix(n: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut rng = fixture_rng(seed);
    (0..n).map(|_| (0..n).map(|_| rng.next_u64() & 1 == 1).collect()).collect()
}

/// Parses `"10;01"` style matrices.
pub fn parse_matrix(text: &str) -> Option<Vec<Vec<bool>>> {
    let rows: Vec<Vec<bool>> = text
        .split(';')
        .map(|row| row.trim().chars().map(|c| matches!(c, '1')).collect::<Vec<_>>())
        .collect();
    let ok = text
        .split(';')
        .all(|row| row.trim().chars().all(|c| c == '0' || c == '1'));
    let n = rows.len();
    (ok && n >= 1 && rows.iter().all(|r| r.len() == n)).then_some(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_grid() {
        let g = gen_grid(1, 2, 5, 1).unwrap();
        assert_eq!(g.n(), 2);
        let e: Vec<_> = g.edges().iter().map(|e| (e.tail, e.head, e.weight)).collect();
        assert_eq!(e, vec![(0, 1, 1), (1, 0, 1)]);
    }

    #[test]
    fn grid_is_seed_deterministic() {
        assert_eq!(gen_grid(5, 5, 7, 100).unwrap(), gen_grid(5, 5, 7, 100).unwrap());
        assert_ne!(gen_grid(5, 5, 7, 100).unwrap(), gen_grid(5, 5, 8, 100).unwrap());
        let g = gen_grid(5, 5, 7, 100).unwrap();
        assert_eq!(g.m(), 2 * (2 * 5 * 4));
        assert!(g.edges().iter().all(|e| (1..=100).contains(&e.weight)));
    }

    #[test]
    fn grid_overflow_rejected() {
        assert!(matches!(gen_grid(2, 2, 0, u64::MAX), Err(GraphError::WeightOutOfRange { .. })));
    }

    #[test]
    fn gadget_shape() {
        let g = gen_gadget(&[true, false, true], 1).unwrap();
        assert_eq!(g.expected_count, BigUint::from(10u32));
        assert_eq!(g.graph.n(), 8);
        assert_eq!((g.s, g.t), (0, 7));
        // 3 u-path + 2*3 v-path + 2 cross
        assert_eq!(g.graph.m(), 11);
        let zero = gen_gadget(&[false, false], 3).unwrap();
        assert!(zero.expected_count.is_zero());
    }

    #[test]
    fn omv_layout() {
        let m = vec![vec![true, false], vec![false, true]];
        let g = gen_omv_grid(&m).unwrap();
        assert_eq!(g.graph.n(), 9);
        assert_eq!(g.sources, vec![0, 1, 2]);
        assert_eq!(g.sinks, vec![2, 5, 8]);
        assert_eq!(g.expected(&m, 1, 0), (5, 2));
        assert_eq!(g.expected(&m, 1, 1), (4, 1));
    }

    #[test]
    fn matrix_parsing() {
        assert_eq!(parse_matrix("10;01"), Some(vec![vec![true, false], vec![false, true]]));
        assert_eq!(parse_matrix("10;0"), None);
        assert_eq!(parse_matrix("1x;01"), None);
    }
}
