//! Label construction, one shortest-path search per source key.
//!
//! Rather than running searches per owner, every stored quantity is
//! produced by a search rooted at the boundary or separator vertex of its
//! key, forward or backward. Each key's results for all owners are handed
//! to a sink as soon as they are known, so callers can either assemble
//! labels or just tally their sizes without holding them in memory.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use super::{
    region_words, BoundaryPair, Entry, EscapeQuad, FaultLabel, LabelWords, RegionData, SeparatorQuad, TopoPiece,
    HEADER_WORDS, ITEM2_KEY_WORDS, QUAD_KEY_WORDS, TOPO_WORDS,
};
use crate::count::CountMode;
use crate::decomp::{DecompositionTree, RDivision};
use crate::graph::Graph;
use crate::oracle::{search, OracleError, SearchOptions, SsspResult, VertexState};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("labels need strictly positive edge weights")]
    ZeroWeight,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One key's worth of data for one owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelPart {
    Item2 { region: usize, b: usize, pair: BoundaryPair },
    Item4 { piece: usize, p: usize, quad: EscapeQuad },
    Item5 { piece: usize, p: usize, quad: SeparatorQuad },
}

struct Runner<'g> {
    g: &'g Graph,
    mode: CountMode,
    counting: bool,
}

impl Runner<'_> {
    fn run(&self, src: usize, reverse: bool, state: impl Fn(usize) -> VertexState) -> Result<SsspResult, OracleError> {
        let opts = SearchOptions { reverse, counting: self.counting.then_some(self.mode), targets: None };
        search(self.g, src, state, &opts)
    }

    fn entry(&self, res: &SsspResult, x: usize) -> Entry {
        let dist = res.dist[x];
        if !dist.is_finite() {
            return Entry::none(self.mode);
        }
        let count = if self.counting { res.count(x).clone() } else { self.mode.zero() };
        Entry { dist, count }
    }
}

fn allowed(keep: bool) -> VertexState {
    if keep {
        VertexState::Allowed
    } else {
        VertexState::Removed
    }
}

fn membership(n: usize, vs: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in vs {
        m[v] = true;
    }
    m
}

pub(crate) fn topology(tree: &DecompositionTree, rdiv: &RDivision) -> Vec<TopoPiece> {
    tree.pieces
        .iter()
        .filter(|p| rdiv.in_truncated[p.id])
        .map(|p| TopoPiece { id: p.id, parent: p.parent, depth: p.depth, is_region: rdiv.is_region[p.id] })
        .collect()
}

/// Streams every item 2, 4 and 5 entry to `sink(owner, part)`. Without
/// `with_counts` the searches skip counting and counts are left at zero.
pub fn for_each_label_part<S>(
    g: &Graph,
    tree: &DecompositionTree,
    rdiv: &RDivision,
    mode: CountMode,
    with_counts: bool,
    sink: &mut S,
) -> Result<(), BuildError>
where
    S: FnMut(usize, LabelPart),
{
    if with_counts && !g.is_counting_ready() {
        return Err(BuildError::ZeroWeight);
    }
    let n = g.n();
    let runner = Runner { g, mode, counting: with_counts };

    // item 2
    for &rid in &rdiv.regions {
        let region = tree.piece(rid);
        let in_r = membership(n, &region.vertices);
        for &b in &region.boundary {
            let st = |x: usize| allowed(x == b || !in_r[x]);
            let to = runner.run(b, true, st)?;
            let from = runner.run(b, false, st)?;
            for x in 0..n {
                if rdiv.region_of(x) == rid {
                    continue;
                }
                let pair = BoundaryPair { to: runner.entry(&to, x), from: runner.entry(&from, x) };
                if pair.to.is_finite() || pair.from.is_finite() {
                    sink(x, LabelPart::Item2 { region: rid, b, pair });
                }
            }
        }
    }

    // item 4
    for piece in tree.pieces.iter().filter(|p| rdiv.in_truncated[p.id] && p.parent.is_some()) {
        let q = tree.piece(tree.sibling(piece.id).expect("non-root piece has a sibling"));
        let in_p = membership(n, &piece.vertices);
        let in_q = membership(n, &q.vertices);
        let bnd_p = membership(n, &piece.boundary);
        for &p in piece.boundary.iter().filter(|&&p| !in_q[p]) {
            let outside = |x: usize| allowed(x == p || (!in_p[x] && !in_q[x]));
            let inside = |x: usize| allowed(x == p || (in_p[x] && !bnd_p[x]));
            let avoid_q = |x: usize| allowed(!in_q[x]);
            let out_rev = runner.run(p, true, outside)?;
            let out_fwd = runner.run(p, false, outside)?;
            let in_rev = runner.run(p, true, inside)?;
            let in_fwd = runner.run(p, false, inside)?;
            let q_fwd = runner.run(p, false, avoid_q)?;
            let q_rev = runner.run(p, true, avoid_q)?;
            for x in 0..n {
                let (a, a_rev) = if x == p {
                    (Entry::trivial(mode), Entry::trivial(mode))
                } else if !in_p[x] && !in_q[x] {
                    (runner.entry(&out_rev, x), runner.entry(&out_fwd, x))
                } else if in_p[x] && !bnd_p[x] {
                    (runner.entry(&in_rev, x), runner.entry(&in_fwd, x))
                } else {
                    (Entry::none(mode), Entry::none(mode))
                };
                let quad = EscapeQuad { a, b: runner.entry(&q_fwd, x), a_rev, b_rev: runner.entry(&q_rev, x) };
                if quad.a.is_finite() || quad.b.is_finite() || quad.a_rev.is_finite() || quad.b_rev.is_finite() {
                    sink(x, LabelPart::Item4 { piece: piece.id, p, quad });
                }
            }
        }
    }

    // item 5
    for piece in tree.pieces.iter().filter(|p| rdiv.in_truncated[p.id] && !rdiv.is_region[p.id]) {
        let interior = piece.interior();
        let in_int = membership(n, &interior);
        let in_sep = membership(n, &piece.separator);
        for &p in &piece.separator {
            let avoid_sep = |x: usize| allowed(in_int[x] && (x == p || !in_sep[x]));
            let any = |x: usize| allowed(in_int[x]);
            let first = runner.run(p, true, avoid_sep)?;
            let last = runner.run(p, false, avoid_sep)?;
            let fwd = runner.run(p, false, any)?;
            let rev = runner.run(p, true, any)?;
            for &x in &interior {
                let quad = SeparatorQuad {
                    out_first: runner.entry(&first, x),
                    in_any: runner.entry(&fwd, x),
                    out_any: runner.entry(&rev, x),
                    in_last: runner.entry(&last, x),
                };
                if quad.out_first.is_finite() || quad.in_any.is_finite() || quad.out_any.is_finite() || quad.in_last.is_finite()
                {
                    sink(x, LabelPart::Item5 { piece: piece.id, p, quad });
                }
            }
        }
    }
    Ok(())
}

fn region_base(g: &Graph, tree: &DecompositionTree, rid: usize) -> RegionData {
    let piece = tree.piece(rid);
    let edges = g
        .edges()
        .iter()
        .filter(|e| piece.contains(e.tail) && piece.contains(e.head))
        .map(|e| (e.tail, e.head, e.weight))
        .collect();
    RegionData { vertices: piece.vertices.clone(), boundary: piece.boundary.clone(), edges, matrix: Vec::new() }
}

/// Boundary-to-boundary distances and counts in `G ∖ {owner}`.
fn boundary_matrix(g: &Graph, boundary: &[usize], owner: usize, mode: CountMode) -> Result<Vec<super::Entry>, OracleError> {
    let k = boundary.len();
    let mut matrix = Vec::with_capacity(k * k);
    for &a in boundary {
        if a == owner {
            matrix.extend((0..k).map(|_| Entry::none(mode)));
            continue;
        }
        let targets: Vec<usize> = boundary.iter().copied().filter(|&b| b != owner).collect();
        let opts = SearchOptions { reverse: false, counting: Some(mode), targets: Some(targets) };
        let res = search(g, a, |x| allowed(x != owner), &opts)?;
        for &b in boundary {
            if b == owner || !res.dist[b].is_finite() {
                matrix.push(Entry::none(mode));
            } else {
                matrix.push(Entry { dist: res.dist[b], count: res.count(b).clone() });
            }
        }
    }
    Ok(matrix)
}

/// Builds every vertex's label.
pub fn build_fault_labels(
    g: &Graph,
    tree: &DecompositionTree,
    rdiv: &RDivision,
    mode: CountMode,
) -> Result<Vec<FaultLabel>, BuildError> {
    if !g.is_counting_ready() {
        return Err(BuildError::ZeroWeight);
    }
    let topo = topology(tree, rdiv);
    let bases: BTreeMap<usize, RegionData> = rdiv.regions.iter().map(|&r| (r, region_base(g, tree, r))).collect();
    let mut labels: Vec<FaultLabel> = (0..g.n())
        .into_par_iter()
        .map(|x| {
            let region = rdiv.region_of(x);
            let mut item3 = bases[&region].clone();
            item3.matrix = boundary_matrix(g, &item3.boundary, x, mode)?;
            Ok(FaultLabel {
                owner: x,
                region,
                mode,
                item1: topo.clone(),
                item2: BTreeMap::new(),
                item3,
                item4: BTreeMap::new(),
                item5: BTreeMap::new(),
            })
        })
        .collect::<Result<_, BuildError>>()?;
    for_each_label_part(g, tree, rdiv, mode, true, &mut |x, part| match part {
        LabelPart::Item2 { region, b, pair } => {
            labels[x].item2.insert((region, b), pair);
        }
        LabelPart::Item4 { piece, p, quad } => {
            labels[x].item4.insert((piece, p), quad);
        }
        LabelPart::Item5 { piece, p, quad } => {
            labels[x].item5.insert((piece, p), quad);
        }
    })?;
    Ok(labels)
}

/// Per-vertex label sizes without materializing any label. Only
/// reachability matters for sizes, so the searches skip counting.
pub fn fault_label_words(g: &Graph, tree: &DecompositionTree, rdiv: &RDivision) -> Result<Vec<LabelWords>, BuildError> {
    let topo_words = TOPO_WORDS * topology(tree, rdiv).len();
    let item3: BTreeMap<usize, usize> = rdiv
        .regions
        .iter()
        .map(|&r| {
            let base = region_base(g, tree, r);
            (r, region_words(base.vertices.len(), base.boundary.len(), base.edges.len()))
        })
        .collect();
    let mut words: Vec<LabelWords> = (0..g.n())
        .map(|x| LabelWords {
            header: HEADER_WORDS,
            item1: topo_words,
            item3: item3[&rdiv.region_of(x)],
            ..LabelWords::default()
        })
        .collect();
    for_each_label_part(g, tree, rdiv, CountMode::Exact, false, &mut |x, part| match part {
        LabelPart::Item2 { .. } => words[x].item2 += ITEM2_KEY_WORDS,
        LabelPart::Item4 { .. } => words[x].item4 += QUAD_KEY_WORDS,
        LabelPart::Item5 { .. } => words[x].item5 += QUAD_KEY_WORDS,
    })?;
    Ok(words)
}
