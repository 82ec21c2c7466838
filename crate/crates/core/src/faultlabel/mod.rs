//! Single-fault labels.
//!
//! The label of `x` lets a query `(u, v, f)` recover the shortest `u → v`
//! distance in `G ∖ {f}`, and the number of such shortest paths, from the
//! labels of `u`, `v` and `f` alone. It holds five items:
//!
//! 1. the topology of the truncated decomposition tree;
//! 2. per foreign region `R`, distances and counts between `x` and `∂R`
//!    over paths whose only `V(R)` vertex is the boundary endpoint;
//! 3. `x`'s own region (vertices, boundary, induced edges) and the dense
//!    `∂R × ∂R` matrix of distances and counts in `G ∖ {x}`;
//! 4. per non-root piece `P` with sibling `Q` and `p ∈ ∂P ∖ V(Q)`, four
//!    quantities used when a path escapes around `Q`;
//! 5. per proper ancestor `C` of `x`'s region and `p ∈ Sep(C)`, four
//!    quantities for paths confined to `int(C)`.
//!
//! Only keys with at least one finite quantity are stored.

mod build;
mod codec;
mod query;

use std::collections::BTreeMap;

pub use build::{build_fault_labels, fault_label_words, for_each_label_part, BuildError, LabelPart};
pub use codec::{decode_label, encode_label};
pub use query::{query_count, query_dist, QueryAnswer, QueryError};

use crate::count::{CountMode, CountValue};
use crate::graph::Distance;

/// A distance with the number of shortest paths realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub dist: Distance,
    pub count: CountValue,
}

impl Entry {
    pub fn none(mode: CountMode) -> Entry {
        Entry { dist: Distance::INFINITY, count: mode.zero() }
    }

    pub fn trivial(mode: CountMode) -> Entry {
        Entry { dist: Distance::ZERO, count: mode.one() }
    }

    pub fn is_finite(&self) -> bool {
        self.dist.is_finite()
    }
}

/// Item 1 row: one truncated-tree piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TopoPiece {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub is_region: bool,
}

/// Item 2 value for one `(region, boundary vertex)` key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPair {
    /// owner → b
    pub to: Entry,
    /// b → owner
    pub from: Entry,
}

/// Item 3: the owner's region and its boundary matrix in `G ∖ {owner}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionData {
    pub vertices: Vec<usize>,
    pub boundary: Vec<usize>,
    /// `(tail, head, weight)` in original ids.
    pub edges: Vec<(usize, usize, u64)>,
    /// Row-major `|∂R| × |∂R|`.
    pub matrix: Vec<Entry>,
}

impl RegionData {
    pub fn matrix_at(&self, i: usize, j: usize) -> &Entry {
        &self.matrix[i * self.boundary.len() + j]
    }

    pub fn boundary_index(&self, v: usize) -> Option<usize> {
        self.boundary.binary_search(&v).ok()
    }
}

/// Item 4 value for one `(P, p)` key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeQuad {
    /// owner → p, outside `V(P) ∪ V(Q)` (or inside `int(P)` when the owner is there).
    pub a: Entry,
    /// p → owner in `G ∖ V(Q)`.
    pub b: Entry,
    /// p → owner, same subgraph as `a`.
    pub a_rev: Entry,
    /// owner → p in `G ∖ V(Q)`.
    pub b_rev: Entry,
}

/// Item 5 value for one `(C, p)` key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorQuad {
    /// owner → p in `int(C)`, first `Sep(C)` vertex is `p`.
    pub out_first: Entry,
    /// p → owner in `int(C)`.
    pub in_any: Entry,
    /// owner → p in `int(C)`.
    pub out_any: Entry,
    /// p → owner in `int(C)`, last `Sep(C)` vertex is `p`.
    pub in_last: Entry,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaultLabel {
    pub owner: usize,
    pub region: usize,
    pub mode: CountMode,
    pub item1: Vec<TopoPiece>,
    pub item2: BTreeMap<(usize, usize), BoundaryPair>,
    pub item3: RegionData,
    pub item4: BTreeMap<(usize, usize), EscapeQuad>,
    pub item5: BTreeMap<(usize, usize), SeparatorQuad>,
}

/// Word counts per item; one word per stored id, distance or count.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LabelWords {
    pub header: usize,
    pub item1: usize,
    pub item2: usize,
    pub item3: usize,
    pub item4: usize,
    pub item5: usize,
}

pub(crate) const HEADER_WORDS: usize = 2;
pub(crate) const TOPO_WORDS: usize = 3;
pub(crate) const ITEM2_KEY_WORDS: usize = 6;
pub(crate) const QUAD_KEY_WORDS: usize = 10;

pub(crate) fn region_words(vertices: usize, boundary: usize, edges: usize) -> usize {
    vertices + boundary + 3 * edges + 2 * boundary * boundary
}

impl LabelWords {
    pub fn total(&self) -> usize {
        self.header + self.item1 + self.item2 + self.item3 + self.item4 + self.item5
    }
}

impl FaultLabel {
    pub fn size_words(&self) -> LabelWords {
        LabelWords {
            header: HEADER_WORDS,
            item1: TOPO_WORDS * self.item1.len(),
            item2: ITEM2_KEY_WORDS * self.item2.len(),
            item3: region_words(self.item3.vertices.len(), self.item3.boundary.len(), self.item3.edges.len()),
            item4: QUAD_KEY_WORDS * self.item4.len(),
            item5: QUAD_KEY_WORDS * self.item5.len(),
        }
    }
}
