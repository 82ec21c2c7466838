use std::collections::BTreeMap;

use super::{BoundaryPair, Entry, EscapeQuad, FaultLabel, RegionData, SeparatorQuad, TopoPiece};
use crate::codec::{CodecError, Reader, Writer};
use crate::count::CountMode;

fn put_entry(w: &mut Writer, e: &Entry) {
    w.dist(e.dist);
    w.count(&e.count);
}

fn get_entry(r: &mut Reader, mode: CountMode) -> Result<Entry, CodecError> {
    let dist = r.dist()?;
    let count = r.count(mode)?;
    if dist.is_finite() == count.is_zero() {
        return Err(CodecError::Invalid("count must be zero exactly when unreachable".into()));
    }
    Ok(Entry { dist, count })
}

/// Self-contained byte form of one label.
pub fn encode_label(l: &FaultLabel) -> Vec<u8> {
    let mut w = Writer::default();
    w.mode_header(l.mode);
    w.id(l.owner);
    w.id(l.region);

    w.id(l.item1.len());
    for p in &l.item1 {
        w.id(p.id);
        w.u32(p.parent.map_or(u32::MAX, |x| x as u32));
        w.id(p.depth);
        w.u8(p.is_region as u8);
    }

    w.id(l.item2.len());
    for (&(region, b), pair) in &l.item2 {
        w.id(region);
        w.id(b);
        put_entry(&mut w, &pair.to);
        put_entry(&mut w, &pair.from);
    }

    let r = &l.item3;
    w.id(r.vertices.len());
    r.vertices.iter().for_each(|&v| w.id(v));
    w.id(r.boundary.len());
    r.boundary.iter().for_each(|&v| w.id(v));
    w.id(r.edges.len());
    for &(t, h, wt) in &r.edges {
        w.id(t);
        w.id(h);
        w.u64(wt);
    }
    r.matrix.iter().for_each(|e| put_entry(&mut w, e));

    w.id(l.item4.len());
    for (&(piece, p), q) in &l.item4 {
        w.id(piece);
        w.id(p);
        for e in [&q.a, &q.b, &q.a_rev, &q.b_rev] {
            put_entry(&mut w, e);
        }
    }

    w.id(l.item5.len());
    for (&(piece, p), q) in &l.item5 {
        w.id(piece);
        w.id(p);
        for e in [&q.out_first, &q.in_any, &q.out_any, &q.in_last] {
            put_entry(&mut w, e);
        }
    }
    w.buf
}

fn sorted(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

pub fn decode_label(data: &[u8]) -> Result<FaultLabel, CodecError> {
    let mut r = Reader::new(data);
    let mode = r.mode_header()?;
    let owner = r.id()?;
    let region = r.id()?;

    let n1 = r.len(13)?;
    let mut item1 = Vec::with_capacity(n1);
    for _ in 0..n1 {
        let id = r.id()?;
        let parent = match r.u32()? {
            u32::MAX => None,
            x => Some(x as usize),
        };
        let depth = r.id()?;
        let is_region = match r.u8()? {
            0 => false,
            1 => true,
            x => return Err(CodecError::Invalid(format!("region flag {x}"))),
        };
        item1.push(TopoPiece { id, parent, depth, is_region });
    }

    let n2 = r.len(26)?;
    let mut item2 = BTreeMap::new();
    for _ in 0..n2 {
        let key = (r.id()?, r.id()?);
        let to = get_entry(&mut r, mode)?;
        let from = get_entry(&mut r, mode)?;
        item2.insert(key, BoundaryPair { to, from });
    }

    let nv = r.len(4)?;
    let vertices = (0..nv).map(|_| r.id()).collect::<Result<Vec<_>, _>>()?;
    let nb = r.len(4)?;
    let boundary = (0..nb).map(|_| r.id()).collect::<Result<Vec<_>, _>>()?;
    if !sorted(&vertices) || !sorted(&boundary) {
        return Err(CodecError::Invalid("region lists must be sorted".into()));
    }
    let ne = r.len(16)?;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        edges.push((r.id()?, r.id()?, r.u64()?));
    }
    if nb.saturating_mul(nb).saturating_mul(9) > data.len() {
        return Err(CodecError::Truncated);
    }
    let matrix = (0..nb * nb).map(|_| get_entry(&mut r, mode)).collect::<Result<Vec<_>, _>>()?;
    let item3 = RegionData { vertices, boundary, edges, matrix };

    let n4 = r.len(44)?;
    let mut item4 = BTreeMap::new();
    for _ in 0..n4 {
        let key = (r.id()?, r.id()?);
        let a = get_entry(&mut r, mode)?;
        let b = get_entry(&mut r, mode)?;
        let a_rev = get_entry(&mut r, mode)?;
        let b_rev = get_entry(&mut r, mode)?;
        item4.insert(key, EscapeQuad { a, b, a_rev, b_rev });
    }

    let n5 = r.len(44)?;
    let mut item5 = BTreeMap::new();
    for _ in 0..n5 {
        let key = (r.id()?, r.id()?);
        let out_first = get_entry(&mut r, mode)?;
        let in_any = get_entry(&mut r, mode)?;
        let out_any = get_entry(&mut r, mode)?;
        let in_last = get_entry(&mut r, mode)?;
        item5.insert(key, SeparatorQuad { out_first, in_any, out_any, in_last });
    }
    if !r.finished() {
        return Err(CodecError::Invalid("trailing bytes after label".into()));
    }
    Ok(FaultLabel { owner, region, mode, item1, item2, item3, item4, item5 })
}
