//! Directed weighted multigraph and its line-oriented text format.
//!
//! Vertex ids are dense `0..n`. Parallel edges are kept in input order;
//! self-loops are rejected. Adjacency is stored in CSR form in both
//! directions so the shortest-path engines can walk forward and backward
//! searches without extra allocation.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Add;

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Largest edge weight accepted anywhere in the crate.
pub const MAX_WEIGHT: u64 = 1 << 40;

/// A path length. `Distance::INFINITY` marks "unreachable" and absorbs
/// addition.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Distance(u64);

impl Distance {
    pub const ZERO: Distance = Distance(0);
    pub const INFINITY: Distance = Distance(i64::MAX as u64);

    pub fn new(value: u64) -> Distance {
        Distance(value.min(Self::INFINITY.0))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0 < Self::INFINITY.0
    }
}

impl Add for Distance {
    type Output = Distance;

    fn add(self, rhs: Distance) -> Distance {
        if !self.is_finite() || !rhs.is_finite() {
            return Distance::INFINITY;
        }
        Distance::new(self.0.saturating_add(rhs.0))
    }
}

impl Add<u64> for Distance {
    type Output = Distance;

    fn add(self, rhs: u64) -> Distance {
        self + Distance::new(rhs)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            f.write_str("inf")
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct EdgeRecord {
    pub tail: usize,
    pub head: usize,
    pub weight: u64,
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: vertex id {id} out of range for n = {n}")]
    VertexOutOfRange { line: usize, id: u64, n: usize },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: weight {weight} outside 0..={max}", max = MAX_WEIGHT)]
    WeightOutOfRange { line: usize, weight: u64 },
    #[error("header announced {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("n * max_weight = {n} * {max_weight} does not fit below the infinity sentinel")]
    Overflow { n: usize, max_weight: u64 },
    #[error("missing `p dgraph <n> <m>` header")]
    MissingHeader,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraphError {
    fn from(e: std::io::Error) -> Self {
        GraphError::Io(e.to_string())
    }
}

/// Compressed adjacency in one direction.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    // (neighbor, weight)
    arcs: Vec<(usize, u64)>,
}

impl Csr {
    fn build(n: usize, edges: &[EdgeRecord], forward: bool) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for e in edges {
            let from = if forward { e.tail } else { e.head };
            offsets[from + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut arcs = vec![(0usize, 0u64); edges.len()];
        for e in edges {
            let (from, to) = if forward { (e.tail, e.head) } else { (e.head, e.tail) };
            arcs[fill[from]] = (to, e.weight);
            fill[from] += 1;
        }
        Csr { offsets, arcs }
    }

    fn of(&self, v: usize) -> &[(usize, u64)] {
        &self.arcs[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Immutable directed weighted multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<EdgeRecord>,
    out: Csr,
    inc: Csr,
    counting_ready: bool,
}

impl Graph {
    /// Builds a graph, validating ids, self-loops, weight range and the
    /// `n * max_weight` headroom.
    pub fn new(n: usize, edges: Vec<EdgeRecord>) -> Result<Graph, GraphError> {
        for (i, e) in edges.iter().enumerate() {
            let line = i + 1;
            for id in [e.tail, e.head] {
                if id >= n {
                    return Err(GraphError::VertexOutOfRange { line, id: id as u64, n });
                }
            }
            if e.tail == e.head {
                return Err(GraphError::SelfLoop { line, vertex: e.tail });
            }
            if e.weight > MAX_WEIGHT {
                return Err(GraphError::WeightOutOfRange { line, weight: e.weight });
            }
        }
        Self::check_headroom(n, &edges)?;
        Ok(Self::assemble(n, edges))
    }

    fn check_headroom(n: usize, edges: &[EdgeRecord]) -> Result<(), GraphError> {
        let max_weight = edges.iter().map(|e| e.weight).max().unwrap_or(0);
        if (n as u128) * (max_weight as u128) >= Distance::INFINITY.0 as u128 {
            return Err(GraphError::Overflow { n, max_weight });
        }
        Ok(())
    }

    fn assemble(n: usize, edges: Vec<EdgeRecord>) -> Graph {
        let out = Csr::build(n, &edges, true);
        let inc = Csr::build(n, &edges, false);
        let counting_ready = edges.iter().all(|e| e.weight >= 1);
        Graph { n, edges, out, inc, counting_ready }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    /// True iff every weight is at least 1, which is what path counting needs.
    pub fn is_counting_ready(&self) -> bool {
        self.counting_ready
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).max().unwrap_or(0)
    }

    /// Outgoing `(head, weight)` pairs of `v`, parallel edges included.
    pub fn out_arcs(&self, v: usize) -> &[(usize, u64)] {
        self.out.of(v)
    }

    /// Incoming `(tail, weight)` pairs of `v`.
    pub fn in_arcs(&self, v: usize) -> &[(usize, u64)] {
        self.inc.of(v)
    }

    /// Undirected neighbourhood (both directions, duplicates possible).
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.out.of(v).iter().chain(self.inc.of(v)).map(|&(w, _)| w)
    }

    /// Every edge `(u, v, w)` becomes `(v, u, w)`; edge order is kept.
    pub fn reverse(&self) -> Graph {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeRecord { tail: e.head, head: e.tail, weight: e.weight })
            .collect();
        Self::assemble(self.n, edges)
    }

    /// Subgraph induced by `keep`, with vertices renumbered densely in
    /// increasing original id. Returns the graph and the new→old id table.
    pub fn induced_subgraph(&self, keep: &[usize]) -> (Graph, Vec<usize>) {
        let mut old_ids: Vec<usize> = keep.iter().copied().filter(|&v| v < self.n).collect();
        old_ids.sort_unstable();
        old_ids.dedup();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &v) in old_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| new_id[e.tail] != usize::MAX && new_id[e.head] != usize::MAX)
            .map(|e| EdgeRecord { tail: new_id[e.tail], head: new_id[e.head], weight: e.weight })
            .collect();
        (Self::assemble(old_ids.len(), edges), old_ids)
    }

    /// Reads the `p dgraph` text format.
    pub fn load<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        let mut edge_lines = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('c') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            let malformed = |msg: &str| GraphError::Malformed { line: line_no, msg: msg.to_string() };
            match fields[0] {
                "p" => {
                    if header.is_some() {
                        return Err(malformed("duplicate header"));
                    }
                    if fields.len() != 4 || fields[1] != "dgraph" {
                        return Err(malformed("expected `p dgraph <n> <m>`"));
                    }
                    let n = fields[2].parse::<usize>().map_err(|_| malformed("bad vertex count"))?;
                    let m = fields[3].parse::<usize>().map_err(|_| malformed("bad edge count"))?;
                    header = Some((n, m));
                    edges.reserve(m);
                }
                "e" => {
                    let (n, m) = header.ok_or(GraphError::MissingHeader)?;
                    if fields.len() != 4 {
                        return Err(malformed("expected `e <tail> <head> <weight>`"));
                    }
                    let mut nums = [0u64; 3];
                    for (slot, text) in nums.iter_mut().zip(&fields[1..]) {
                        *slot = text.parse::<u64>().map_err(|_| malformed("bad integer"))?;
                    }
                    let [tail, head, weight] = nums;
                    for id in [tail, head] {
                        if id >= n as u64 {
                            return Err(GraphError::VertexOutOfRange { line: line_no, id, n });
                        }
                    }
                    if tail == head {
                        return Err(GraphError::SelfLoop { line: line_no, vertex: tail as usize });
                    }
                    if weight > MAX_WEIGHT {
                        return Err(GraphError::WeightOutOfRange { line: line_no, weight });
                    }
                    if edges.len() == m {
                        return Err(GraphError::EdgeCount { expected: m, found: m + 1 });
                    }
                    edges.push(EdgeRecord { tail: tail as usize, head: head as usize, weight });
                    edge_lines.push(line_no);
                }
                _ => return Err(malformed("unknown line type")),
            }
        }
        let (n, m) = header.ok_or(GraphError::MissingHeader)?;
        if edges.len() != m {
            return Err(GraphError::EdgeCount { expected: m, found: edges.len() });
        }
        Self::check_headroom(n, &edges)?;
        Ok(Self::assemble(n, edges))
    }

    pub fn load_str(text: &str) -> Result<Graph, GraphError> {
        Self::load(text.as_bytes())
    }

    pub fn save<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p dgraph {} {}", self.n, self.edges.len())?;
        for e in &self.edges {
            writeln!(out, "e {} {} {}", e.tail, e.head, e.weight)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("graph text is ASCII")
    }

    /// First eight bytes of the SHA-256 of the text form.
    pub fn content_hash(&self) -> u64 {
        let digest = Sha256::digest(self.to_text().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(parts: &[&str]) -> String {
        parts.join("\n")
    }

    #[test]
    fn loads_single_edge() {
        let g = Graph::load_str(&lines(&["p dgraph 2 1", "e 0 1 5"])).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[EdgeRecord { tail: 0, head: 1, weight: 5 }]);
        assert!(g.is_counting_ready());
    }

    #[test]
    fn keeps_parallel_edges() {
        let g = Graph::load_str(&lines(&["p dgraph 2 2", "e 0 1 3", "e 0 1 3"])).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.out_arcs(0), &[(1, 3), (1, 3)]);
    }

    #[test]
    fn rejects_self_loop_with_line_number() {
        let err = Graph::load_str(&lines(&["p dgraph 2 1", "e 0 0 1"])).unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { line: 2, vertex: 0 });
    }

    #[test]
    fn reports_bad_lines() {
        let err = Graph::load_str(&lines(&["c comment", "p dgraph 2 1", "e 0 2 1"])).unwrap_err();
        assert_eq!(err, GraphError::VertexOutOfRange { line: 3, id: 2, n: 2 });
        let err = Graph::load_str(&lines(&["p dgraph 2 1", "e 0 x 1"])).unwrap_err();
        assert!(matches!(err, GraphError::Malformed { line: 2, .. }));
        let err = Graph::load_str(&lines(&["p dgraph 2 1", "e 0 1 1099511627777"])).unwrap_err();
        assert!(matches!(err, GraphError::WeightOutOfRange { line: 2, .. }));
        let err = Graph::load_str("p dgraph 2 2\ne 0 1 1\n").unwrap_err();
        assert_eq!(err, GraphError::EdgeCount { expected: 2, found: 1 });
        assert_eq!(Graph::load_str("e 0 1 1").unwrap_err(), GraphError::MissingHeader);
    }

    #[test]
    fn zero_weight_is_distance_only() {
        let g = Graph::load_str("p dgraph 2 1\ne 0 1 0\n").unwrap();
        assert!(!g.is_counting_ready());
    }

    #[test]
    fn saves_header_and_edges() {
        let g = Graph::new(2, vec![EdgeRecord { tail: 0, head: 1, weight: 5 }]).unwrap();
        assert_eq!(g.to_text(), "p dgraph 2 1\ne 0 1 5\n");
        let empty = Graph::new(3, vec![]).unwrap();
        assert_eq!(empty.to_text(), "p dgraph 3 0\n");
    }

    #[test]
    fn reverse_flips_edges() {
        let g = Graph::new(2, vec![EdgeRecord { tail: 0, head: 1, weight: 4 }]).unwrap();
        let r = g.reverse();
        assert_eq!(r.edges(), &[EdgeRecord { tail: 1, head: 0, weight: 4 }]);
        assert_eq!(r.reverse(), g);
    }

    #[test]
    fn induced_subgraph_drops_outside_edges() {
        // diamond s=0, a=1, b=2, t=3
        let e = |t, h| EdgeRecord { tail: t, head: h, weight: 1 };
        let g = Graph::new(4, vec![e(0, 1), e(0, 2), e(1, 3), e(2, 3)]).unwrap();
        let (sub, ids) = g.induced_subgraph(&[0, 1, 3]);
        assert_eq!(ids, vec![0, 1, 3]);
        assert_eq!(sub.edges(), &[e(0, 1), e(1, 2)]);
        let (all, ids) = g.induced_subgraph(&[3, 2, 1, 0]);
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(all, g);
        let (none, _) = g.induced_subgraph(&[]);
        assert_eq!(none.n(), 0);
    }

    #[test]
    fn overflow_is_rejected() {
        let n = 1 << 23;
        let err = Graph::new(n, vec![EdgeRecord { tail: 0, head: 1, weight: MAX_WEIGHT }]).unwrap_err();
        assert!(matches!(err, GraphError::Overflow { .. }));
    }

    #[test]
    fn distance_saturates() {
        assert_eq!(Distance::INFINITY + 5, Distance::INFINITY);
        assert_eq!(Distance::new(3) + Distance::new(4), Distance::new(7));
        assert_eq!(Distance::INFINITY.to_string(), "inf");
    }
}
