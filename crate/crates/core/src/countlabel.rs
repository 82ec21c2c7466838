//! Shortest-path counting labels.
//!
//! For every ancestor `P` of `v`'s home piece and every `u ∈ Sep(P)` the
//! label of `v` keeps
//!
//! * `d1, p1`: distance and count of shortest `v → u` paths inside `int(P)`
//!   whose only `Sep(P)` vertex is `u`;
//! * `d2, p2`: the same for `u → v` paths inside `int(P)`, unrestricted.
//!
//! Separators partition the vertex set, so each `u` occurs at exactly one
//! piece and the label is a plain map keyed by `u`. Any shortest `s → t`
//! path splits uniquely at the first separator vertex of the rootmost
//! piece it touches, which gives the distance and count queries. Queries
//! avoiding faulty vertices use inclusion-exclusion over the faults in
//! order of their distance from `s`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{CodecError, Reader, Writer};
use crate::count::{CountError, CountMode, CountValue};
use crate::decomp::{DecompositionTree, Piece};
use crate::graph::{Distance, Graph};
use crate::oracle::{search, OracleError, SearchOptions, VertexState};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CountLabelError {
    #[error("counting labels need strictly positive edge weights")]
    ZeroWeight,
    #[error("endpoint {0} is in the faulty set")]
    EndpointFaulty(usize),
    #[error("labels were built with different count modes")]
    ModeMismatch,
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountEntry {
    /// The piece whose separator holds the key vertex.
    pub piece: usize,
    pub d1: Distance,
    pub p1: CountValue,
    pub d2: Distance,
    pub p2: CountValue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountLabel {
    pub owner: usize,
    pub mode: CountMode,
    /// Keyed by separator vertex; only entries with a finite side are kept.
    pub entries: BTreeMap<usize, CountEntry>,
}

pub const HEADER_WORDS: usize = 2;
pub const ENTRY_WORDS: usize = 6;

impl CountLabel {
    pub fn size_words(&self) -> usize {
        HEADER_WORDS + ENTRY_WORDS * self.entries.len()
    }
}

/// Labels for every vertex. Two searches per separator vertex: backwards
/// with the rest of its separator removed, and forwards, both confined to
/// the piece interior. Pieces are processed in parallel.
pub fn build_count_labels(g: &Graph, tree: &DecompositionTree, mode: CountMode) -> Result<Vec<CountLabel>, CountLabelError> {
    if !g.is_counting_ready() {
        return Err(CountLabelError::ZeroWeight);
    }
    let n = g.n();
    let per_piece: Vec<Vec<(usize, usize, CountEntry)>> = tree
        .pieces
        .par_iter()
        .map(|piece| piece_entries(g, piece, mode))
        .collect::<Result<_, _>>()?;
    let mut labels: Vec<CountLabel> =
        (0..n).map(|owner| CountLabel { owner, mode, entries: BTreeMap::new() }).collect();
    for (v, u, entry) in per_piece.into_iter().flatten() {
        labels[v].entries.insert(u, entry);
    }
    Ok(labels)
}

fn piece_entries(g: &Graph, piece: &Piece, mode: CountMode) -> Result<Vec<(usize, usize, CountEntry)>, CountLabelError> {
    let interior = piece.interior();
    let mut in_int = vec![false; g.n()];
    let mut in_sep = vec![false; g.n()];
    interior.iter().for_each(|&x| in_int[x] = true);
    piece.separator.iter().for_each(|&x| in_sep[x] = true);
    let mut out = Vec::new();
    for &u in &piece.separator {
        let back_opts = SearchOptions { reverse: true, counting: Some(mode), targets: None };
        let first = |x: usize| {
            if in_int[x] && (x == u || !in_sep[x]) {
                VertexState::Allowed
            } else {
                VertexState::Removed
            }
        };
        let back = search(g, u, first, &back_opts)?;
        let fwd_opts = SearchOptions { reverse: false, counting: Some(mode), targets: None };
        let inside = |x: usize| if in_int[x] { VertexState::Allowed } else { VertexState::Removed };
        let fwd = search(g, u, inside, &fwd_opts)?;
        for &v in &interior {
            let (d1, d2) = (back.dist[v], fwd.dist[v]);
            if d1.is_finite() || d2.is_finite() {
                let entry = CountEntry { piece: piece.id, d1, p1: back.count(v).clone(), d2, p2: fwd.count(v).clone() };
                out.push((v, u, entry));
            }
        }
    }
    Ok(out)
}

fn same_mode(labels: &[&CountLabel]) -> Result<CountMode, CountLabelError> {
    let mode = labels[0].mode;
    if labels.iter().any(|l| l.mode != mode) {
        return Err(CountLabelError::ModeMismatch);
    }
    Ok(mode)
}

/// `(d(s,t), number of shortest s → t paths)` from two labels.
pub fn distance_and_count(ls: &CountLabel, lt: &CountLabel) -> Result<(Distance, CountValue), CountLabelError> {
    let mode = same_mode(&[ls, lt])?;
    let mut best = Distance::INFINITY;
    let mut count = mode.zero();
    let (small, large, s_is_small) =
        if ls.entries.len() <= lt.entries.len() { (ls, lt, true) } else { (lt, ls, false) };
    for (u, a) in &small.entries {
        let Some(b) = large.entries.get(u) else { continue };
        let (es, et) = if s_is_small { (a, b) } else { (b, a) };
        let d = es.d1 + et.d2;
        if !d.is_finite() || d > best {
            continue;
        }
        let c = es.p1.try_mul(&et.p2)?;
        if d < best {
            best = d;
            count = c;
        } else {
            count.try_add_assign(&c)?;
        }
    }
    Ok((best, count))
}

pub fn query_distance(ls: &CountLabel, lt: &CountLabel) -> Result<Distance, CountLabelError> {
    Ok(distance_and_count(ls, lt)?.0)
}

pub fn query_count(ls: &CountLabel, lt: &CountLabel) -> Result<CountValue, CountLabelError> {
    Ok(distance_and_count(ls, lt)?.1)
}

/// Faults that can lie on a shortest `s → t` path, sorted by `(d(s,·), id)`,
/// with their distances from `s`. Returns `None` when `t` is unreachable.
#[allow(clippy::type_complexity)]
fn ordered_faults<'a>(
    ls: &CountLabel,
    lt: &CountLabel,
    faults: &[&'a CountLabel],
) -> Result<Option<(Distance, Vec<(&'a CountLabel, Distance)>)>, CountLabelError> {
    let mut all = vec![ls, lt];
    all.extend_from_slice(faults);
    same_mode(&all)?;
    for f in faults {
        if f.owner == ls.owner || f.owner == lt.owner {
            return Err(CountLabelError::EndpointFaulty(f.owner));
        }
    }
    let dst = query_distance(ls, lt)?;
    if !dst.is_finite() {
        return Ok(None);
    }
    let mut kept = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for &f in faults {
        if !seen.insert(f.owner) {
            continue;
        }
        let d = query_distance(ls, f)?;
        if d.is_finite() && d < dst {
            kept.push((f, d));
        }
    }
    kept.sort_by_key(|(f, d)| (*d, f.owner));
    Ok(Some((dst, kept)))
}

/// Number of `s → t` paths of length `d(s,t)` avoiding every faulty
/// vertex, by the quadratic recurrence over pairs of faults.
pub fn query_count_avoiding_naive(ls: &CountLabel, lt: &CountLabel, faults: &[&CountLabel]) -> Result<CountValue, CountLabelError> {
    let mode = ls.mode;
    let Some((dst, kept)) = ordered_faults(ls, lt, faults)? else {
        return Ok(mode.zero());
    };
    // v_1..v_k then t
    let mut seq: Vec<(&CountLabel, Distance)> = kept;
    seq.push((lt, dst));
    let mut r: Vec<CountValue> = Vec::with_capacity(seq.len());
    for j in 0..seq.len() {
        let (vj, dj) = seq[j];
        let mut rj = distance_and_count(ls, vj)?.1;
        for i in 0..j {
            let (vi, di) = seq[i];
            let (dij, pij) = distance_and_count(vi, vj)?;
            if di + dij == dj {
                rj = rj.try_sub(&r[i].try_mul(&pij)?)?;
            }
        }
        r.push(rj);
    }
    Ok(r.pop().expect("sequence ends with t"))
}

/// Same value as the naive query in one pass over the faults, using
/// `D(s,u) = min_i d(s,v_i) + d1(v_i,u)` and running per-vertex sums.
pub fn query_count_avoiding_fast(ls: &CountLabel, lt: &CountLabel, faults: &[&CountLabel]) -> Result<CountValue, CountLabelError> {
    let mode = ls.mode;
    let Some((dst, kept)) = ordered_faults(ls, lt, faults)? else {
        return Ok(mode.zero());
    };
    let mut reach: BTreeMap<usize, Distance> = BTreeMap::new();
    for (vi, di) in &kept {
        for (&u, e) in &vi.entries {
            let d = *di + e.d1;
            if d.is_finite() {
                let slot = reach.entry(u).or_insert(Distance::INFINITY);
                if d < *slot {
                    *slot = d;
                }
            }
        }
    }
    let mut acc: BTreeMap<usize, CountValue> = BTreeMap::new();
    let mut seq = kept;
    seq.push((lt, dst));
    let last = seq.len() - 1;
    let mut result = mode.zero();
    for (j, (vj, dj)) in seq.into_iter().enumerate() {
        let mut rj = distance_and_count(ls, vj)?.1;
        for (u, e) in &vj.entries {
            let (Some(du), Some(fu)) = (reach.get(u), acc.get(u)) else { continue };
            if *du + e.d2 == dj {
                rj = rj.try_sub(&e.p2.try_mul(fu)?)?;
            }
        }
        if j == last {
            result = rj;
            break;
        }
        for (&u, e) in &vj.entries {
            if reach.get(&u).is_some_and(|&du| dj + e.d1 == du) {
                let add = rj.try_mul(&e.p1)?;
                acc.entry(u).or_insert_with(|| mode.zero()).try_add_assign(&add)?;
            }
        }
    }
    Ok(result)
}

/// True iff failing the faulty vertices leaves `d(s,t)` unchanged, that
/// is iff the avoiding count is nonzero. In modular mode a "false" may be
/// wrong with small probability; unreachable pairs report false.
pub fn query_length_preserved(ls: &CountLabel, lt: &CountLabel, faults: &[&CountLabel]) -> Result<bool, CountLabelError> {
    Ok(!query_count_avoiding_fast(ls, lt, faults)?.is_zero())
}

pub fn encode_label(l: &CountLabel) -> Vec<u8> {
    let mut w = Writer::default();
    w.mode_header(l.mode);
    w.id(l.owner);
    w.id(l.entries.len());
    for (&u, e) in &l.entries {
        w.id(u);
        w.id(e.piece);
        w.dist(e.d1);
        w.count(&e.p1);
        w.dist(e.d2);
        w.count(&e.p2);
    }
    w.buf
}

pub fn decode_label(data: &[u8]) -> Result<CountLabel, CodecError> {
    let mut r = Reader::new(data);
    let mode = r.mode_header()?;
    let owner = r.id()?;
    let k = r.len(26)?;
    let mut entries = BTreeMap::new();
    for _ in 0..k {
        let u = r.id()?;
        let piece = r.id()?;
        let d1 = r.dist()?;
        let p1 = r.count(mode)?;
        let d2 = r.dist()?;
        let p2 = r.count(mode)?;
        if d1.is_finite() == p1.is_zero() || d2.is_finite() == p2.is_zero() {
            return Err(CodecError::Invalid("count must be zero exactly when unreachable".into()));
        }
        if entries.insert(u, CountEntry { piece, d1, p1, d2, p2 }).is_some() {
            return Err(CodecError::Invalid(format!("duplicate entry for {u}")));
        }
    }
    if !r.finished() {
        return Err(CodecError::Invalid("trailing bytes after label".into()));
    }
    Ok(CountLabel { owner, mode, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeRecord;

    fn diamond() -> Graph {
        let e = [(0, 1), (0, 2), (1, 3), (2, 3)];
        Graph::new(4, e.iter().map(|&(tail, head)| EdgeRecord { tail, head, weight: 1 }).collect()).unwrap()
    }

    fn labels(g: &Graph) -> Vec<CountLabel> {
        build_count_labels(g, &DecompositionTree::build(g, 2), CountMode::Exact).unwrap()
    }

    #[test]
    fn self_entry_present() {
        let l = labels(&diamond());
        for x in &l {
            let e = &x.entries[&x.owner];
            assert_eq!((e.d1, e.d2), (Distance::ZERO, Distance::ZERO));
            assert!(e.p1.is_one() && e.p2.is_one());
        }
    }

    #[test]
    fn diamond_queries() {
        let l = labels(&diamond());
        let m = CountMode::Exact;
        assert_eq!(query_distance(&l[0], &l[3]).unwrap(), Distance::new(2));
        assert_eq!(query_count(&l[0], &l[3]).unwrap(), m.from_u64(2));
        assert_eq!(query_count(&l[0], &l[0]).unwrap(), m.one());
        assert_eq!(query_count_avoiding_naive(&l[0], &l[3], &[&l[1]]).unwrap(), m.one());
        assert_eq!(query_count_avoiding_fast(&l[0], &l[3], &[&l[1]]).unwrap(), m.one());
        assert_eq!(query_count_avoiding_naive(&l[0], &l[3], &[&l[1], &l[2]]).unwrap(), m.zero());
        assert_eq!(query_count_avoiding_fast(&l[0], &l[3], &[&l[1], &l[2]]).unwrap(), m.zero());
        assert!(query_length_preserved(&l[0], &l[3], &[&l[1]]).unwrap());
        assert_eq!(query_count_avoiding_fast(&l[0], &l[3], &[]).unwrap(), m.from_u64(2));
    }

    #[test]
    fn endpoint_fault_rejected() {
        let l = labels(&diamond());
        assert_eq!(query_count_avoiding_naive(&l[0], &l[3], &[&l[3]]), Err(CountLabelError::EndpointFaulty(3)));
    }

    #[test]
    fn path_fault_breaks_length() {
        let p = Graph::new(3, vec![EdgeRecord { tail: 0, head: 1, weight: 1 }, EdgeRecord { tail: 1, head: 2, weight: 1 }]).unwrap();
        let l = labels(&p);
        assert!(!query_length_preserved(&l[0], &l[2], &[&l[1]]).unwrap());
    }

    #[test]
    fn codec_round_trip() {
        for l in labels(&diamond()) {
            assert_eq!(decode_label(&encode_label(&l)).unwrap(), l);
        }
    }
}
