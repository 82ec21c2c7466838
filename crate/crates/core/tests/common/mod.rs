//! Reference algorithms for the integration tests, written independently
//! of the library's search engine: Bellman-Ford on a vertex-split graph,
//! Floyd-Warshall, and depth-first path enumeration.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_core::RngCore;
use sepalabel::gen::fixture_rng;
use sepalabel::{EdgeRecord, Graph};

/// Bellman-Ford distances from `s` in the graph where every vertex `v`
/// becomes `v_in → v_out`. `removed` vertices lose both copies; for
/// `endpoint_only` vertices the `v_in → v_out` arc is dropped, so paths may
/// end there but not pass through. `None` means unreachable.
pub fn bellman_ford_split(g: &Graph, s: usize, removed: &[usize], endpoint_only: &[usize]) -> Vec<Option<u64>> {
    let n = g.n();
    let vin = |v: usize| 2 * v;
    let vout = |v: usize| 2 * v + 1;
    let mut arcs: Vec<(usize, usize, u64)> = Vec::new();
    for v in 0..n {
        if !removed.contains(&v) && !endpoint_only.contains(&v) {
            arcs.push((vin(v), vout(v), 0));
        }
    }
    for e in g.edges() {
        if !removed.contains(&e.tail) && !removed.contains(&e.head) {
            arcs.push((vout(e.tail), vin(e.head), e.weight));
        }
    }
    let mut d: Vec<Option<u64>> = vec![None; 2 * n];
    if removed.contains(&s) {
        return vec![None; n];
    }
    d[vin(s)] = Some(0);
    d[vout(s)] = Some(0);
    for _ in 0..2 * n {
        let mut changed = false;
        for &(a, b, w) in &arcs {
            if let Some(da) = d[a] {
                if d[b].is_none_or(|db| da + w < db) {
                    d[b] = Some(da + w);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).map(|v| d[vin(v)]).collect()
}

/// All-pairs distances in `G ∖ removed`.
pub fn floyd_warshall(g: &Graph, removed: &[usize]) -> Vec<Vec<Option<u64>>> {
    let n = g.n();
    let mut d = vec![vec![None; n]; n];
    for v in 0..n {
        if !removed.contains(&v) {
            d[v][v] = Some(0);
        }
    }
    for e in g.edges() {
        if removed.contains(&e.tail) || removed.contains(&e.head) {
            continue;
        }
        let cur: &mut Option<u64> = &mut d[e.tail][e.head];
        if cur.is_none_or(|c| e.weight < c) {
            *cur = Some(e.weight);
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(dkj) = d[k][j] {
                    if d[i][j].is_none_or(|x| dik + dkj < x) {
                        d[i][j] = Some(dik + dkj);
                    }
                }
            }
        }
    }
    d
}

/// Number of `s → t` walks of total weight exactly `len` avoiding
/// `removed`, each parallel edge counted separately. `to_t` holds
/// distances to `t` (for pruning) in the same masked graph. With positive
/// weights and `len` the masked distance these walks are the shortest paths.
pub fn dfs_count(g: &Graph, s: usize, t: usize, removed: &[usize], len: u64, to_t: &[Option<u64>]) -> BigUint {
    fn go(g: &Graph, v: usize, t: usize, removed: &[usize], left: u64, to_t: &[Option<u64>]) -> BigUint {
        let mut total = if v == t && left == 0 { BigUint::one() } else { BigUint::zero() };
        for &(w, wt) in g.out_arcs(v) {
            if removed.contains(&w) || wt > left {
                continue;
            }
            if to_t[w].is_some_and(|d| d <= left - wt) {
                total += go(g, w, t, removed, left - wt, to_t);
            }
        }
        total
    }
    if removed.contains(&s) || removed.contains(&t) {
        return BigUint::zero();
    }
    go(g, s, t, removed, len, to_t)
}

/// Distances to `t` (column of the Floyd-Warshall matrix).
pub fn column(d: &[Vec<Option<u64>>], t: usize) -> Vec<Option<u64>> {
    d.iter().map(|row| row[t]).collect()
}

/// Random simple-ish digraph with weights in `1..=maxw` (parallel edges allowed).
pub fn random_graph(seed: u64, n: usize, m: usize, maxw: u64) -> Graph {
    let mut rng = fixture_rng(seed);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = (rng.next_u64() % n as u64) as usize;
        let b = (rng.next_u64() % n as u64) as usize;
        if a != b {
            edges.push(EdgeRecord { tail: a, head: b, weight: 1 + rng.next_u64() % maxw });
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Random graph with bounded-width structure: a `rows × cols` grid skeleton
/// with some edges dropped, some made one-way, and a few short diagonals.
pub fn random_sparse_graph(seed: u64, rows: usize, cols: usize) -> Graph {
    let mut rng = fixture_rng(seed);
    let n = rows * cols;
    let mut edges = Vec::new();
    let mut add = |a: usize, b: usize, rng: &mut rand_xoshiro::SplitMix64| match rng.next_u64() % 6 {
        0 => {}
        1 => edges.push(EdgeRecord { tail: a, head: b, weight: 1 + rng.next_u64() % 4 }),
        2 => edges.push(EdgeRecord { tail: b, head: a, weight: 1 + rng.next_u64() % 4 }),
        _ => {
            edges.push(EdgeRecord { tail: a, head: b, weight: 1 + rng.next_u64() % 4 });
            edges.push(EdgeRecord { tail: b, head: a, weight: 1 + rng.next_u64() % 4 });
        }
    };
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                add(v, v + 1, &mut rng);
            }
            if r + 1 < rows {
                add(v, v + cols, &mut rng);
            }
            if r + 1 < rows && c + 1 < cols && rng.next_u64() % 4 == 0 {
                add(v, v + cols + 1, &mut rng);
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

