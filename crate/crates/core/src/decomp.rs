//! Recursive balanced-separator decomposition and r-division.
//!
//! Every piece is a vertex-induced subgraph with a boundary (vertices that
//! lie on separators of strict ancestors) and an interior. Separators are
//! drawn from the interior only, so the separators of all pieces partition
//! the vertex set; a leaf's separator is its whole interior.
//!
//! Child construction: a separator `S` splits `int(P) ∖ S` into two groups
//! with no interior edge between them. Child `i` gets group `i`, all of
//! `S`, and the boundary vertices adjacent to group `i`. Boundary vertices
//! adjacent to neither group go to child 0 so that no vertex is lost.

use std::collections::VecDeque;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::graph::Graph;

pub const DEFAULT_LEAF_THRESHOLD: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub id: usize,
    pub parent: Option<usize>,
    /// Empty for leaves, otherwise exactly two.
    pub children: Vec<usize>,
    pub depth: usize,
    pub vertices: Vec<usize>,
    pub boundary: Vec<usize>,
    pub separator: Vec<usize>,
}

impl Piece {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn on_boundary(&self, v: usize) -> bool {
        self.boundary.binary_search(&v).is_ok()
    }

    pub fn in_separator(&self, v: usize) -> bool {
        self.separator.binary_search(&v).is_ok()
    }

    /// `V(P) ∖ ∂P`, sorted.
    pub fn interior(&self) -> Vec<usize> {
        self.vertices.iter().copied().filter(|&v| !self.on_boundary(v)).collect()
    }
}

/// Result of splitting an interior: separator plus the two sides, all in
/// the caller's local ids.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Split {
    pub separator: Vec<usize>,
    pub sides: [Vec<usize>; 2],
}

fn components(adj: &[Vec<usize>], alive: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    let mut comps = Vec::new();
    for s in 0..adj.len() {
        if seen[s] || !alive[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let v = comp[i];
            i += 1;
            for &w in &adj[v] {
                if alive[w] && !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn bfs_levels(adj: &[Vec<usize>], root: usize) -> Vec<Vec<usize>> {
    let mut level = vec![usize::MAX; adj.len()];
    level[root] = 0;
    let mut levels = vec![vec![root]];
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                if levels.len() <= level[w] {
                    levels.push(Vec::new());
                }
                levels[level[w]].push(w);
                queue.push_back(w);
            }
        }
    }
    for l in &mut levels {
        l.sort_unstable();
    }
    levels
}

/// Places groups largest first onto the lighter side (ties to side 0),
/// starting from the given side sizes. Returns side per group.
fn distribute(groups: &[Vec<usize>], start: [usize; 2]) -> (Vec<usize>, [usize; 2]) {
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(groups[i].len()), groups[i][0]));
    let mut size = start;
    let mut side = vec![0; groups.len()];
    for i in order {
        let s = usize::from(size[1] < size[0]);
        side[i] = s;
        size[s] += groups[i].len();
    }
    (side, size)
}

/// Balanced split of the undirected graph `adj` on local ids `0..I`.
///
/// Each side ends up with at most `⌈2I/3⌉` vertices. If the components are
/// already balanced the separator is empty; otherwise it is the smallest
/// BFS level of the largest component that balances, trying two roots.
pub fn split_interior(adj: &[Vec<usize>]) -> Split {
    let total = adj.len();
    if total == 0 {
        return Split::default();
    }
    let limit = (2 * total).div_ceil(3);
    let alive = vec![true; total];
    let comps = components(adj, &alive);
    let (big, _) = comps
        .iter()
        .enumerate()
        .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
        .expect("non-empty graph has a component");

    if comps.len() >= 2 && comps[big].len() <= limit {
        let (side, _) = distribute(&comps, [0, 0]);
        let mut sides = [Vec::new(), Vec::new()];
        for (c, s) in comps.iter().zip(side) {
            sides[s].extend_from_slice(c);
        }
        sides.iter_mut().for_each(|s| s.sort_unstable());
        return Split { separator: Vec::new(), sides };
    }

    let comp = &comps[big];
    let others: Vec<Vec<usize>> = comps.iter().enumerate().filter(|&(i, _)| i != big).map(|(_, c)| c.clone()).collect();
    let first = comp[0];
    let far_levels = bfs_levels(adj, first);
    let far = *far_levels.last().unwrap().iter().min().unwrap();

    // (sep size, max side, root index, level) ranks candidates
    let mut best: Option<((usize, usize, usize, usize), Vec<Vec<usize>>, usize, Vec<usize>)> = None;
    for (ri, root) in [first, far].into_iter().enumerate() {
        if ri == 1 && far == first {
            break;
        }
        let levels = bfs_levels(adj, root);
        let mut before = 0;
        for k in 0..levels.len() {
            let after = comp.len() - before - levels[k].len();
            let (side, size) = distribute(&others, [before, after]);
            let worst = size[0].max(size[1]);
            if worst <= limit {
                let key = (levels[k].len(), worst, ri, k);
                if best.as_ref().is_none_or(|b| key < b.0) {
                    best = Some((key, levels.clone(), k, side));
                }
            }
            before += levels[k].len();
        }
    }
    let (_, levels, k, side) = best.expect("the median BFS level always balances");
    let mut sides = [Vec::new(), Vec::new()];
    for (i, l) in levels.iter().enumerate() {
        if i < k {
            sides[0].extend_from_slice(l);
        } else if i > k {
            sides[1].extend_from_slice(l);
        }
    }
    for (c, s) in others.iter().zip(side) {
        sides[s].extend_from_slice(c);
    }
    sides.iter_mut().for_each(|s| s.sort_unstable());
    Split { separator: levels[k].clone(), sides }
}

/// Separator of a whole graph treated as one undirected interior; returns
/// vertex ids of `sub`.
pub fn find_separator(sub: &Graph) -> Split {
    let adj: Vec<Vec<usize>> = (0..sub.n())
        .map(|v| {
            let mut a: Vec<usize> = sub.neighbors(v).collect();
            a.sort_unstable();
            a.dedup();
            a
        })
        .collect();
    split_interior(&adj)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionTree {
    pub pieces: Vec<Piece>,
    pub root: usize,
    pub leaf_threshold: usize,
    home: Vec<usize>,
}

impl DecompositionTree {
    /// Recursively separates `g` until interiors have at most
    /// `leaf_threshold` vertices. Piece ids are assigned breadth first.
    pub fn build(g: &Graph, leaf_threshold: usize) -> DecompositionTree {
        assert!(leaf_threshold >= 1, "leaf threshold must be at least 1");
        let n = g.n();
        let mut pieces = vec![Piece {
            id: 0,
            parent: None,
            children: Vec::new(),
            depth: 0,
            vertices: (0..n).collect(),
            boundary: Vec::new(),
            separator: Vec::new(),
        }];
        let mut home = vec![usize::MAX; n];
        let mut local = vec![usize::MAX; n];
        let mut mark = vec![0u8; n];
        let mut queue = VecDeque::from([0usize]);
        while let Some(pid) = queue.pop_front() {
            let interior = pieces[pid].interior();
            if interior.len() <= leaf_threshold {
                for &v in &interior {
                    home[v] = pid;
                }
                pieces[pid].separator = interior;
                continue;
            }
            for (i, &v) in interior.iter().enumerate() {
                local[v] = i;
            }
            let adj: Vec<Vec<usize>> = interior
                .iter()
                .map(|&v| {
                    let mut a: Vec<usize> = g.neighbors(v).filter(|&w| local[w] != usize::MAX).map(|w| local[w]).collect();
                    a.sort_unstable();
                    a.dedup();
                    a
                })
                .collect();
            for &v in &interior {
                local[v] = usize::MAX;
            }
            let split = split_interior(&adj);
            let sep: Vec<usize> = split.separator.iter().map(|&i| interior[i]).collect();
            for &v in &sep {
                home[v] = pid;
            }
            let sides: Vec<Vec<usize>> = split.sides.iter().map(|s| s.iter().map(|&i| interior[i]).collect()).collect();

            // 1, 2 = adjacent to side 0, 1
            let boundary = pieces[pid].boundary.clone();
            for (s, side) in sides.iter().enumerate() {
                for &v in side {
                    for w in g.neighbors(v) {
                        mark[w] |= 1 << s;
                    }
                }
            }
            let mut child_bnd = [Vec::new(), Vec::new()];
            for &b in &boundary {
                let m = mark[b] & 3;
                if m & 1 != 0 || m == 0 {
                    child_bnd[0].push(b);
                }
                if m & 2 != 0 {
                    child_bnd[1].push(b);
                }
            }
            for side in &sides {
                for &v in side {
                    for w in g.neighbors(v) {
                        mark[w] = 0;
                    }
                }
            }
            let depth = pieces[pid].depth + 1;
            for s in 0..2 {
                let mut bnd: Vec<usize> = child_bnd[s].iter().copied().chain(sep.iter().copied()).collect();
                bnd.sort_unstable();
                let mut vertices: Vec<usize> = bnd.iter().copied().chain(sides[s].iter().copied()).collect();
                vertices.sort_unstable();
                let id = pieces.len();
                pieces.push(Piece { id, parent: Some(pid), children: Vec::new(), depth, vertices, boundary: bnd, separator: Vec::new() });
                pieces[pid].children.push(id);
                queue.push_back(id);
            }
            pieces[pid].separator = sep;
        }
        DecompositionTree { pieces, root: 0, leaf_threshold, home }
    }

    pub fn piece(&self, id: usize) -> &Piece {
        &self.pieces[id]
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// The unique piece whose separator contains `v`.
    pub fn home_of(&self, v: usize) -> usize {
        self.home[v]
    }

    /// `p`, its parent, ..., the root.
    pub fn ancestors(&self, p: usize) -> Vec<usize> {
        let mut out = vec![p];
        let mut cur = p;
        while let Some(q) = self.pieces[cur].parent {
            out.push(q);
            cur = q;
        }
        out
    }

    /// Root, ..., `p`.
    pub fn path_from_root(&self, p: usize) -> Vec<usize> {
        let mut a = self.ancestors(p);
        a.reverse();
        a
    }

    /// True if `a` is an ancestor of `b` or equal to it.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = b;
        while self.pieces[cur].depth > self.pieces[a].depth {
            cur = self.pieces[cur].parent.expect("non-root has a parent");
        }
        cur == a
    }

    pub fn lca(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        while self.pieces[a].depth > self.pieces[b].depth {
            a = self.pieces[a].parent.unwrap();
        }
        while self.pieces[b].depth > self.pieces[a].depth {
            b = self.pieces[b].parent.unwrap();
        }
        while a != b {
            a = self.pieces[a].parent.unwrap();
            b = self.pieces[b].parent.unwrap();
        }
        a
    }

    /// The sibling of a non-root piece.
    pub fn sibling(&self, p: usize) -> Option<usize> {
        let parent = self.pieces[p].parent?;
        self.pieces[parent].children.iter().copied().find(|&c| c != p)
    }

    /// Root-first `(piece, Sep(piece))` for every ancestor of `v`'s home.
    pub fn sep_ancestry(&self, v: usize) -> Vec<(usize, &[usize])> {
        self.path_from_root(self.home_of(v))
            .into_iter()
            .map(|p| (p, self.pieces[p].separator.as_slice()))
            .collect()
    }

    /// Indices into `g.edges()` owned by piece `p`: the root owns every
    /// edge, and a child owns the parent's edges whose endpoints it
    /// contains, with edges seen by both children going to the lower id.
    pub fn piece_edges(&self, g: &Graph, p: usize) -> Vec<usize> {
        let path = self.path_from_root(p);
        let mut owned: Vec<usize> = (0..g.m()).collect();
        for w in path.windows(2) {
            let (parent, child) = (&self.pieces[w[0]], &self.pieces[w[1]]);
            let lower = parent.children.iter().copied().min().unwrap();
            let other = self.sibling(child.id).map(|s| &self.pieces[s]);
            owned.retain(|&i| {
                let e = g.edges()[i];
                let here = child.contains(e.tail) && child.contains(e.head);
                let there = other.is_some_and(|o| o.contains(e.tail) && o.contains(e.head));
                here && (!there || child.id == lower)
            });
        }
        owned
    }

    /// One line per piece: `piece <id> <parent|-1> <depth> | sep: ids | bnd: ids`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        for p in &self.pieces {
            let parent = p.parent.map_or("-1".to_string(), |x| x.to_string());
            writeln!(out, "piece {} {} {} | sep: {} | bnd: {}", p.id, parent, p.depth, join(&p.separator), join(&p.boundary)).unwrap();
        }
        out
    }

    /// Hash of the dump, used to reject labels from a different build.
    pub fn fingerprint(&self) -> u64 {
        let digest = Sha256::digest(self.dump().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }
}

/// The tree truncated at its highest pieces with at most `r` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RDivision {
    pub r: usize,
    /// Region piece ids, ascending.
    pub regions: Vec<usize>,
    pub is_region: Vec<bool>,
    /// Regions and their ancestors.
    pub in_truncated: Vec<bool>,
    region_of: Vec<usize>,
}

impl RDivision {
    pub fn new(tree: &DecompositionTree, r: usize) -> RDivision {
        let k = tree.len();
        let mut is_region = vec![false; k];
        let mut in_truncated = vec![false; k];
        let mut stack = vec![tree.root];
        while let Some(p) = stack.pop() {
            in_truncated[p] = true;
            let piece = tree.piece(p);
            if piece.vertices.len() <= r || piece.is_leaf() {
                is_region[p] = true;
            } else {
                stack.extend(piece.children.iter().copied());
            }
        }
        let regions: Vec<usize> = (0..k).filter(|&p| is_region[p]).collect();
        let n = tree.piece(tree.root).vertices.len();
        let mut region_of = vec![usize::MAX; n];
        for &rid in &regions {
            for &v in &tree.piece(rid).vertices {
                if region_of[v] == usize::MAX {
                    region_of[v] = rid;
                }
            }
        }
        RDivision { r, regions, is_region, in_truncated, region_of }
    }

    /// Default region size `⌈n^{2/3}⌉`.
    pub fn default_r(n: usize) -> usize {
        let r = (n as f64).powf(2.0 / 3.0).ceil() as usize;
        // guard against float drift just above an exact cube
        if r > 1 && (r - 1).pow(3) >= n * n {
            r - 1
        } else {
            r.max(1)
        }
    }

    pub fn region_of(&self, v: usize) -> usize {
        self.region_of[v]
    }
}

/// Deepest piece that is an ancestor-or-self of `rf` and of `ru` or `rv`,
/// plus whether it came from `ru` (`Side::U`, preferred on ties).
pub fn lowest_common_with_either(tree: &DecompositionTree, rf: usize, ru: usize, rv: usize) -> (usize, Side) {
    let a = tree.lca(rf, ru);
    let b = tree.lca(rf, rv);
    if tree.piece(b).depth > tree.piece(a).depth {
        (b, Side::V)
    } else {
        (a, Side::U)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    U,
    V,
}
