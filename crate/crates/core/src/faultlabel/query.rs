//! Queries from three labels. Nothing here touches the graph or the tree.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use thiserror::Error;

use super::{Entry, FaultLabel, RegionData, TopoPiece};
use crate::count::{CountError, CountMode, CountValue};
use crate::graph::Distance;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("fault equals endpoint {0}")]
    FaultIsEndpoint(usize),
    #[error("labels were built with different count modes")]
    ModeMismatch,
    #[error("label is inconsistent: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Count(#[from] CountError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryAnswer {
    pub distance: Distance,
    pub count: CountValue,
    /// Best `(distance, count)` found by each of the three cases.
    pub cases: [(Distance, CountValue); 3],
}

/// Running minimum with the summed count of every candidate attaining it.
struct Best {
    dist: Distance,
    count: CountValue,
}

impl Best {
    fn new(mode: CountMode) -> Best {
        Best { dist: Distance::INFINITY, count: mode.zero() }
    }

    fn offer(&mut self, dist: Distance, count: &CountValue) -> Result<(), CountError> {
        if !dist.is_finite() || count.is_zero() {
            return Ok(());
        }
        if dist < self.dist {
            self.dist = dist;
            self.count = count.clone();
        } else if dist == self.dist {
            self.count.try_add_assign(count)?;
        }
        Ok(())
    }

    fn offer_pair(&mut self, x: &Entry, y: &Entry) -> Result<(), CountError> {
        if x.is_finite() && y.is_finite() {
            self.offer(x.dist + y.dist, &x.count.try_mul(&y.count)?)?;
        }
        Ok(())
    }

    fn pair(self) -> (Distance, CountValue) {
        (self.dist, self.count)
    }
}

struct Topology {
    pieces: BTreeMap<usize, TopoPiece>,
    children: BTreeMap<usize, Vec<usize>>,
}

impl Topology {
    fn new(rows: &[TopoPiece]) -> Topology {
        let pieces: BTreeMap<usize, TopoPiece> = rows.iter().map(|p| (p.id, *p)).collect();
        let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in rows {
            if let Some(parent) = p.parent {
                children.entry(parent).or_default().push(p.id);
            }
        }
        Topology { pieces, children }
    }

    fn get(&self, id: usize) -> Result<&TopoPiece, QueryError> {
        self.pieces.get(&id).ok_or_else(|| QueryError::Corrupt(format!("piece {id} missing from topology")))
    }

    fn parent(&self, id: usize) -> Result<usize, QueryError> {
        self.get(id)?.parent.ok_or_else(|| QueryError::Corrupt(format!("piece {id} has no parent")))
    }

    fn depth(&self, id: usize) -> Result<usize, QueryError> {
        Ok(self.get(id)?.depth)
    }

    fn lca(&self, a: usize, b: usize) -> Result<usize, QueryError> {
        let (mut a, mut b) = (a, b);
        while self.depth(a)? > self.depth(b)? {
            a = self.parent(a)?;
        }
        while self.depth(b)? > self.depth(a)? {
            b = self.parent(b)?;
        }
        while a != b {
            a = self.parent(a)?;
            b = self.parent(b)?;
        }
        Ok(a)
    }

    fn is_ancestor(&self, a: usize, b: usize) -> Result<bool, QueryError> {
        let mut cur = b;
        while self.depth(cur)? > self.depth(a)? {
            cur = self.parent(cur)?;
        }
        Ok(cur == a)
    }

    /// Pieces strictly below `top` on the path up from `bottom`, deepest first.
    fn strictly_between(&self, top: usize, bottom: usize) -> Result<Vec<usize>, QueryError> {
        let mut out = Vec::new();
        let mut cur = bottom;
        while cur != top {
            out.push(cur);
            cur = self.parent(cur)?;
        }
        Ok(out)
    }

    fn sibling(&self, id: usize) -> Result<usize, QueryError> {
        let parent = self.parent(id)?;
        self.children
            .get(&parent)
            .and_then(|c| c.iter().copied().find(|&c| c != id))
            .ok_or_else(|| QueryError::Corrupt(format!("piece {id} has no sibling")))
    }
}

/// Counting Dijkstra over a region's induced graph, in original ids.
/// `removed` vertices are skipped, `endpoint_only` ones are reached but not
/// expanded.
fn region_search(
    region: &RegionData,
    src: usize,
    reverse: bool,
    mode: CountMode,
    removed: impl Fn(usize) -> bool,
    endpoint_only: impl Fn(usize) -> bool,
) -> Result<BTreeMap<usize, Entry>, QueryError> {
    let k = region.vertices.len();
    let local = |v: usize| region.vertices.binary_search(&v).ok();
    let src_local = local(src).ok_or_else(|| QueryError::Corrupt(format!("{src} not in its region")))?;
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); k];
    for &(t, h, w) in &region.edges {
        let (a, b) = if reverse { (h, t) } else { (t, h) };
        match (local(a), local(b)) {
            (Some(a), Some(b)) => adj[a].push((b, w)),
            _ => return Err(QueryError::Corrupt("region edge leaves the region".into())),
        }
    }
    let mut dist = vec![Distance::INFINITY; k];
    let mut count = vec![mode.zero(); k];
    let mut done = vec![false; k];
    dist[src_local] = Distance::ZERO;
    count[src_local] = mode.one();
    let mut heap = BinaryHeap::from([Reverse((0u64, src_local))]);
    while let Some(Reverse((d, x))) = heap.pop() {
        if done[x] || d != dist[x].get() {
            continue;
        }
        done[x] = true;
        if x != src_local && endpoint_only(region.vertices[x]) {
            continue;
        }
        for &(y, w) in &adj[x] {
            if done[y] || removed(region.vertices[y]) {
                continue;
            }
            let nd = dist[x] + w;
            if nd < dist[y] {
                dist[y] = nd;
                count[y] = count[x].clone();
                heap.push(Reverse((nd.get(), y)));
            } else if nd == dist[y] {
                let c = count[x].clone();
                count[y].try_add_assign(&c)?;
            }
        }
    }
    Ok((0..k)
        .filter(|&i| dist[i].is_finite())
        .map(|i| (region.vertices[i], Entry { dist: dist[i], count: count[i].clone() }))
        .collect())
}

/// Paths through `∂R_f`: prefix to the first boundary vertex, a shortest
/// `G ∖ {f}` infix to the last one, and the suffix.
fn case1(lu: &FaultLabel, lv: &FaultLabel, lf: &FaultLabel) -> Result<Best, QueryError> {
    let mode = lf.mode;
    let rf = &lf.item3;
    let f = lf.owner;
    let k = rf.boundary.len();
    let on_bnd = |x: usize| rf.boundary_index(x).is_some();

    let first: Vec<Option<Entry>> = if let Some(i) = rf.boundary_index(lu.owner) {
        (0..k).map(|j| (j == i).then(|| Entry::trivial(mode))).collect()
    } else if lu.region == lf.region {
        let reach = region_search(&lu.item3, lu.owner, false, mode, |x| x == f, on_bnd)?;
        rf.boundary.iter().map(|a| reach.get(a).cloned()).collect()
    } else {
        rf.boundary.iter().map(|&a| lu.item2.get(&(lf.region, a)).map(|p| p.to.clone())).collect()
    };
    let last: Vec<Option<Entry>> = if let Some(i) = rf.boundary_index(lv.owner) {
        (0..k).map(|j| (j == i).then(|| Entry::trivial(mode))).collect()
    } else if lv.region == lf.region {
        let reach = region_search(&lv.item3, lv.owner, true, mode, |x| x == f, on_bnd)?;
        rf.boundary.iter().map(|b| reach.get(b).cloned()).collect()
    } else {
        rf.boundary.iter().map(|&b| lv.item2.get(&(lf.region, b)).map(|p| p.from.clone())).collect()
    };

    let mut best = Best::new(mode);
    for j in 0..k {
        if rf.boundary[j] == f {
            continue;
        }
        let Some(tail) = last[j].as_ref().filter(|e| e.is_finite()) else { continue };
        let mut mid = Best::new(mode);
        for i in 0..k {
            if rf.boundary[i] == f {
                continue;
            }
            if let Some(head) = first[i].as_ref() {
                mid.offer_pair(head, rf.matrix_at(i, j))?;
            }
        }
        best.offer_pair(&Entry { dist: mid.dist, count: mid.count }, tail)?;
    }
    Ok(best)
}

/// Paths that avoid some ancestor `Q` of `R_f` below `X` but enter its
/// sibling `P`, split at the first `∂P` vertex.
fn case2(lu: &FaultLabel, lv: &FaultLabel, lf: &FaultLabel, topo: &Topology, x: usize, side_u: bool) -> Result<Best, QueryError> {
    let mut best = Best::new(lf.mode);
    for q in topo.strictly_between(x, lf.region)? {
        let p_piece = topo.sibling(q)?;
        let (head_label, tail_label) = if side_u { (lu, lv) } else { (lv, lu) };
        for (&(_, p), quad) in head_label.item4.range((p_piece, 0)..(p_piece + 1, 0)) {
            let Some(other) = tail_label.item4.get(&(p_piece, p)) else { continue };
            if side_u {
                best.offer_pair(&quad.a, &other.b)?;
            } else {
                best.offer_pair(&other.b_rev, &quad.a_rev)?;
            }
        }
    }
    Ok(best)
}

/// Paths confined to the interior of a common ancestor `C` strictly
/// between `X` and the side's region, split at the first (or last)
/// separator vertex of the rootmost such `C`; plus paths confined to a
/// shared region's interior.
fn case3(lu: &FaultLabel, lv: &FaultLabel, lf: &FaultLabel, topo: &Topology, x: usize, side_u: bool) -> Result<Best, QueryError> {
    let mode = lf.mode;
    let mut best = Best::new(mode);
    let (side_region, other_region) = if side_u { (lu.region, lv.region) } else { (lv.region, lu.region) };
    if side_region != x {
        for c in topo.strictly_between(x, side_region)?.into_iter().skip(1) {
            if !topo.is_ancestor(c, other_region)? || c == other_region {
                continue;
            }
            for (&(_, p), qu) in lu.item5.range((c, 0)..(c + 1, 0)) {
                let Some(qv) = lv.item5.get(&(c, p)) else { continue };
                if side_u {
                    best.offer_pair(&qu.out_first, &qv.in_any)?;
                } else {
                    best.offer_pair(&qu.out_any, &qv.in_last)?;
                }
            }
        }
    }
    if lu.region == lv.region {
        let r = &lu.item3;
        let on_bnd = |y: usize| r.boundary_index(y).is_some();
        if !on_bnd(lu.owner) && !on_bnd(lv.owner) {
            let f = lf.owner;
            let reach = region_search(r, lu.owner, false, mode, |y| y == f || on_bnd(y), |_| false)?;
            if let Some(e) = reach.get(&lv.owner) {
                best.offer(e.dist, &e.count)?;
            }
        }
    }
    Ok(best)
}

/// Distance and number of shortest `u → v` paths in `G ∖ {f}`.
pub fn query_count(lu: &FaultLabel, lv: &FaultLabel, lf: &FaultLabel) -> Result<QueryAnswer, QueryError> {
    let f = lf.owner;
    if f == lu.owner || f == lv.owner {
        return Err(QueryError::FaultIsEndpoint(f));
    }
    let mode = lf.mode;
    if lu.mode != mode || lv.mode != mode {
        return Err(QueryError::ModeMismatch);
    }
    let none = (Distance::INFINITY, mode.zero());
    if lu.owner == lv.owner {
        let zero = (Distance::ZERO, mode.one());
        return Ok(QueryAnswer { distance: Distance::ZERO, count: mode.one(), cases: [zero, none.clone(), none] });
    }

    let topo = Topology::new(&lf.item1);
    let xu = topo.lca(lf.region, lu.region)?;
    let xv = topo.lca(lf.region, lv.region)?;
    let side_u = topo.depth(xu)? >= topo.depth(xv)?;
    let x = if side_u { xu } else { xv };

    let cases = [
        case1(lu, lv, lf)?.pair(),
        case2(lu, lv, lf, &topo, x, side_u)?.pair(),
        case3(lu, lv, lf, &topo, x, side_u)?.pair(),
    ];
    let mut best = Best::new(mode);
    for (d, c) in &cases {
        best.offer(*d, c)?;
    }
    Ok(QueryAnswer { distance: best.dist, count: best.count, cases })
}

/// Distance from `u` to `v` in `G ∖ {f}`.
pub fn query_dist(lu: &FaultLabel, lv: &FaultLabel, lf: &FaultLabel) -> Result<Distance, QueryError> {
    Ok(query_count(lu, lv, lf)?.distance)
}
