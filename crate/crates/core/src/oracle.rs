//! Reference shortest paths: masked Dijkstra with optional path counting.
//!
//! A mask assigns each vertex one of three states. `Removed` vertices are
//! never touched. `EndpointOnly` vertices may start or end a path but are
//! never passed through, which is the same as splitting them into an
//! in-copy and an out-copy. Everything else is `Allowed`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::count::{CountMode, CountValue};
use crate::graph::{Distance, Graph};

pub const DEFAULT_ALL_PAIRS_CAP: usize = 400;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("source {0} is removed by the mask")]
    SourceRemoved(usize),
    #[error("counting requires strictly positive edge weights")]
    ZeroWeight,
    #[error("endpoint {0} is in the fault set")]
    EndpointFaulty(usize),
    #[error("all-pairs reference capped at {cap} vertices, graph has {n}")]
    CapExceeded { n: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexState {
    Allowed,
    Removed,
    EndpointOnly,
}

/// Vertex sets excluded from paths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Mask {
    /// Never on a path.
    pub removed: Vec<usize>,
    /// Only as the first or last vertex of a path.
    pub internal_forbidden: Vec<usize>,
}

impl Mask {
    pub fn none() -> Mask {
        Mask::default()
    }

    pub fn removing(removed: &[usize]) -> Mask {
        Mask { removed: removed.to_vec(), internal_forbidden: Vec::new() }
    }

    /// Per-vertex states; a vertex listed in both sets counts as removed.
    pub fn states(&self, n: usize) -> Vec<VertexState> {
        let mut st = vec![VertexState::Allowed; n];
        for &v in &self.internal_forbidden {
            if v < n {
                st[v] = VertexState::EndpointOnly;
            }
        }
        for &v in &self.removed {
            if v < n {
                st[v] = VertexState::Removed;
            }
        }
        st
    }

    fn describe(&self) -> String {
        format!("removed={:?} internal_forbidden={:?}", self.removed, self.internal_forbidden)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    /// Follow edges backwards, so `dist[v]` is the `v → source` distance.
    pub reverse: bool,
    /// Count shortest paths in this arithmetic.
    pub counting: Option<CountMode>,
    /// Stop once all of these are settled. Only their entries are final.
    pub targets: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct SsspResult {
    pub source: usize,
    pub dist: Vec<Distance>,
    pub count: Option<Vec<CountValue>>,
    pub mask: String,
}

impl SsspResult {
    pub fn distance(&self, v: usize) -> Distance {
        self.dist[v]
    }

    /// Count at `v`; panics if the search did not count.
    pub fn count(&self, v: usize) -> &CountValue {
        &self.count.as_ref().expect("search ran without counting")[v]
    }
}

/// Dijkstra from `source` where `state(v)` decides how `v` may be used.
///
/// Counts are final when a vertex is popped, which needs strictly positive
/// weights; counting on a graph with a zero-weight edge is rejected.
pub fn search<F>(g: &Graph, source: usize, state: F, opts: &SearchOptions) -> Result<SsspResult, OracleError>
where
    F: Fn(usize) -> VertexState,
{
    let n = g.n();
    if source >= n {
        return Err(OracleError::VertexOutOfRange(source));
    }
    if state(source) == VertexState::Removed {
        return Err(OracleError::SourceRemoved(source));
    }
    if opts.counting.is_some() && !g.is_counting_ready() {
        return Err(OracleError::ZeroWeight);
    }
    let mut dist = vec![Distance::INFINITY; n];
    let mut count = opts.counting.map(|m| vec![m.zero(); n]);
    let mut done = vec![false; n];
    let mut pending = match &opts.targets {
        Some(t) => {
            let mut pending = 0usize;
            let mut is_target = vec![false; n];
            for &v in t {
                if v < n && !is_target[v] {
                    is_target[v] = true;
                    pending += 1;
                }
            }
            Some((is_target, pending))
        }
        None => None,
    };

    dist[source] = Distance::ZERO;
    if let (Some(c), Some(m)) = (count.as_mut(), opts.counting) {
        c[source] = m.one();
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] || d != dist[v].get() {
            continue;
        }
        done[v] = true;
        if let Some((is_target, left)) = pending.as_mut() {
            if is_target[v] {
                *left -= 1;
                if *left == 0 {
                    break;
                }
            }
        }
        if v != source && state(v) == VertexState::EndpointOnly {
            continue;
        }
        let arcs = if opts.reverse { g.in_arcs(v) } else { g.out_arcs(v) };
        for &(w, weight) in arcs {
            if done[w] || state(w) == VertexState::Removed {
                continue;
            }
            let nd = dist[v] + weight;
            if nd < dist[w] {
                dist[w] = nd;
                if let Some(c) = count.as_mut() {
                    c[w] = c[v].clone();
                }
                heap.push(Reverse((nd.get(), w)));
            } else if nd == dist[w] {
                if let Some(c) = count.as_mut() {
                    let add = c[v].clone();
                    c[w].try_add_assign(&add).expect("single count mode per search");
                }
            }
        }
    }
    Ok(SsspResult { source, dist, count, mask: String::new() })
}

fn search_masked(g: &Graph, s: usize, mask: &Mask, counting: Option<CountMode>) -> Result<SsspResult, OracleError> {
    let st = mask.states(g.n());
    let opts = SearchOptions { counting, ..SearchOptions::default() };
    let mut res = search(g, s, |v| st[v], &opts)?;
    res.mask = mask.describe();
    Ok(res)
}

/// Distances from `s` under `mask`.
pub fn sssp(g: &Graph, s: usize, mask: &Mask) -> Result<SsspResult, OracleError> {
    search_masked(g, s, mask, None)
}

/// Distances and shortest-path counts from `s` under `mask`.
pub fn count_sssp(g: &Graph, s: usize, mask: &Mask, mode: CountMode) -> Result<SsspResult, OracleError> {
    search_masked(g, s, mask, Some(mode))
}

/// Number of `s → t` paths avoiding `faults` whose length is exactly `l0`.
///
/// With `l0 = d_G(s,t)` every such path is shortest in `G ∖ F`, so this is
/// the count of the masked search when its distance equals `l0`.
pub fn count_exact_length_avoiding(
    g: &Graph,
    s: usize,
    t: usize,
    faults: &[usize],
    l0: Distance,
    mode: CountMode,
) -> Result<CountValue, OracleError> {
    for x in [s, t] {
        if x >= g.n() {
            return Err(OracleError::VertexOutOfRange(x));
        }
        if faults.contains(&x) {
            return Err(OracleError::EndpointFaulty(x));
        }
    }
    let opts = SearchOptions { counting: Some(mode), targets: Some(vec![t]), ..SearchOptions::default() };
    let mut removed = vec![false; g.n()];
    for &f in faults {
        if f < g.n() {
            removed[f] = true;
        }
    }
    let st = |v: usize| if removed[v] { VertexState::Removed } else { VertexState::Allowed };
    let res = search(g, s, st, &opts)?;
    if res.dist[t] == l0 && l0.is_finite() {
        Ok(res.count(t).clone())
    } else {
        Ok(mode.zero())
    }
}

#[derive(Clone, Debug)]
pub struct AllPairs {
    pub dist: Vec<Vec<Distance>>,
    pub count: Vec<Vec<CountValue>>,
}

/// Distance and count matrices by one counting search per source.
pub fn all_pairs_reference(g: &Graph, mode: CountMode, cap: usize) -> Result<AllPairs, OracleError> {
    if g.n() > cap {
        return Err(OracleError::CapExceeded { n: g.n(), cap });
    }
    let mut dist = Vec::with_capacity(g.n());
    let mut count = Vec::with_capacity(g.n());
    for s in 0..g.n() {
        let r = count_sssp(g, s, &Mask::none(), mode)?;
        dist.push(r.dist);
        count.push(r.count.unwrap_or_default());
    }
    Ok(AllPairs { dist, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRecord;

    fn g(n: usize, e: &[(usize, usize, u64)]) -> Graph {
        Graph::new(n, e.iter().map(|&(tail, head, weight)| EdgeRecord { tail, head, weight }).collect()).unwrap()
    }

    #[test]
    fn path_and_endpoint_exemption() {
        let p = g(3, &[(0, 1, 2), (1, 2, 3)]);
        assert_eq!(sssp(&p, 0, &Mask::none()).unwrap().dist[2], Distance::new(5));
        let m = Mask { removed: vec![], internal_forbidden: vec![1] };
        let r = sssp(&p, 0, &m).unwrap();
        assert_eq!(r.dist[1], Distance::new(2));
        assert_eq!(r.dist[2], Distance::INFINITY);
        // the source itself is exempt
        let r = sssp(&p, 1, &m).unwrap();
        assert_eq!(r.dist[2], Distance::new(3));
    }

    #[test]
    fn diamond_and_parallel_counts() {
        let d = g(4, &[(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)]);
        let r = count_sssp(&d, 0, &Mask::none(), CountMode::Exact).unwrap();
        assert_eq!(r.count(3), &CountMode::Exact.from_u64(2));
        let par = g(2, &[(0, 1, 4), (0, 1, 4), (0, 1, 5)]);
        let r = count_sssp(&par, 0, &Mask::none(), CountMode::Exact).unwrap();
        assert_eq!(r.count(1), &CountMode::Exact.from_u64(2));
    }

    #[test]
    fn zero_weight_counting_rejected() {
        let z = g(2, &[(0, 1, 0)]);
        assert!(sssp(&z, 0, &Mask::none()).is_ok());
        assert_eq!(count_sssp(&z, 0, &Mask::none(), CountMode::Exact).unwrap_err(), OracleError::ZeroWeight);
    }

    #[test]
    fn removed_source_rejected() {
        let p = g(2, &[(0, 1, 1)]);
        assert_eq!(sssp(&p, 0, &Mask::removing(&[0])).unwrap_err(), OracleError::SourceRemoved(0));
    }

    #[test]
    fn exact_length_avoiding_diamond() {
        let d = g(4, &[(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)]);
        let m = CountMode::Exact;
        assert_eq!(count_exact_length_avoiding(&d, 0, 3, &[1], Distance::new(2), m).unwrap(), m.one());
        assert_eq!(count_exact_length_avoiding(&d, 0, 3, &[1, 2], Distance::new(2), m).unwrap(), m.zero());
        assert!(count_exact_length_avoiding(&d, 0, 3, &[3], Distance::new(2), m).is_err());
    }

    #[test]
    fn reverse_search_gives_distances_to_source() {
        let p = g(3, &[(0, 1, 2), (1, 2, 3)]);
        let opts = SearchOptions { reverse: true, ..Default::default() };
        let r = search(&p, 2, |_| VertexState::Allowed, &opts).unwrap();
        assert_eq!(r.dist[0], Distance::new(5));
    }

    #[test]
    fn all_pairs_cap() {
        let p = g(3, &[(0, 1, 1)]);
        assert!(matches!(
            all_pairs_reference(&p, CountMode::Exact, 2),
            Err(OracleError::CapExceeded { n: 3, cap: 2 })
        ));
        let ap = all_pairs_reference(&p, CountMode::Exact, 3).unwrap();
        assert_eq!(ap.dist[0][1], Distance::new(1));
        assert!(ap.count[1][0].is_zero());
    }
}
