mod common;

use common::*;
use num_bigint::BigUint;
use rand_core::RngCore;
use sepalabel::count::CountMode;
use sepalabel::decomp::{DecompositionTree, RDivision};
use sepalabel::faultlabel::{
    build_fault_labels, decode_label, encode_label, fault_label_words, query_count, query_dist, FaultLabel, QueryError,
};
use sepalabel::gen::{fixture_rng, gen_grid};
use sepalabel::oracle::{count_sssp, Mask};
use sepalabel::{Distance, Graph};

fn labels_for(g: &Graph, thr: usize, r: usize, mode: CountMode) -> (DecompositionTree, RDivision, Vec<FaultLabel>) {
    let t = DecompositionTree::build(g, thr);
    let rd = RDivision::new(&t, r);
    let l = build_fault_labels(g, &t, &rd, mode).unwrap();
    (t, rd, l)
}

/// Every ordered triple against a masked counting search; returns mismatches.
fn sweep(g: &Graph, labels: &[FaultLabel], mode: CountMode) -> usize {
    let n = g.n();
    let mut bad = 0;
    for f in 0..n {
        let fw = floyd_warshall(g, &[f]);
        for u in (0..n).filter(|&u| u != f) {
            let o = count_sssp(g, u, &Mask::removing(&[f]), mode).unwrap();
            for v in (0..n).filter(|&v| v != f) {
                let a = query_count(&labels[u], &labels[v], &labels[f]).unwrap();
                let fw_d = fw[u][v].map_or(Distance::INFINITY, Distance::new);
                if a.distance != o.dist[v] || a.distance != fw_d || &a.count != o.count(v) {
                    bad += 1;
                }
            }
        }
    }
    bad
}

#[test]
fn exhaustive_on_small_grids() {
    for (side, seed) in [(3, 1), (4, 2), (4, 5)] {
        let g = gen_grid(side, side, seed, 100).unwrap();
        let n = side * side;
        for r in [RDivision::default_r(n), 2, n] {
            let (_, _, l) = labels_for(&g, 2, r, CountMode::Exact);
            assert_eq!(sweep(&g, &l, CountMode::Exact), 0, "side={side} r={r}");
        }
    }
}

#[test]
fn exhaustive_on_unit_grid_with_many_ties() {
    let g = gen_grid(4, 5, 0, 1).unwrap();
    for (thr, r) in [(1, 4), (2, 8), (3, 20)] {
        let (_, _, l) = labels_for(&g, thr, r, CountMode::Exact);
        assert_eq!(sweep(&g, &l, CountMode::Exact), 0);
    }
}

#[test]
fn exhaustive_on_random_graphs() {
    for seed in 0..25u64 {
        let mut rng = fixture_rng(seed + 100);
        let n = 8 + (rng.next_u64() % 18) as usize;
        let m = n + (rng.next_u64() % (2 * n as u64)) as usize;
        let g = random_graph(seed, n, m, 3);
        for (thr, r) in [(1, 1), (1, 4), (2, 6), (3, 10), (1, n)] {
            let (_, _, l) = labels_for(&g, thr, r, CountMode::Exact);
            assert_eq!(sweep(&g, &l, CountMode::Exact), 0, "seed={seed} thr={thr} r={r}");
        }
    }
    for seed in 0..6u64 {
        let g = random_sparse_graph(seed, 4, 6);
        let (_, _, l) = labels_for(&g, 2, 6, CountMode::Exact);
        assert_eq!(sweep(&g, &l, CountMode::Exact), 0, "sparse seed={seed}");
    }
}

#[test]
fn modular_mode_on_grid() {
    let g = gen_grid(5, 5, 3, 2).unwrap();
    let (_, _, l) = labels_for(&g, 2, 9, CountMode::Mod(1_000_003));
    assert_eq!(sweep(&g, &l, CountMode::Mod(1_000_003)), 0);
}

#[test]
fn case_candidates_are_realisable() {
    // every finite candidate is the length of some walk avoiding the fault, never below the true distance
    let g = gen_grid(4, 4, 8, 3).unwrap();
    let (_, _, l) = labels_for(&g, 2, 6, CountMode::Exact);
    for f in 0..16 {
        let fw = floyd_warshall(&g, &[f]);
        for u in (0..16).filter(|&u| u != f) {
            for v in (0..16).filter(|&v| v != f && v != u) {
                let a = query_count(&l[u], &l[v], &l[f]).unwrap();
                for (d, _) in a.cases.iter().filter(|(d, _)| d.is_finite()) {
                    assert!(fw[u][v].is_some_and(|best| d.get() >= best), "u={u} v={v} f={f} case {d}");
                    let walks = dfs_count(&g, u, v, &[f], d.get(), &column(&fw, v));
                    assert!(walks > BigUint::from(0u8), "u={u} v={v} f={f} case {d} has no walk");
                }
            }
        }
    }
}

#[test]
fn endpoint_fault_is_rejected() {
    let g = gen_grid(3, 3, 1, 4).unwrap();
    let (_, _, l) = labels_for(&g, 2, 4, CountMode::Exact);
    assert_eq!(query_count(&l[0], &l[8], &l[8]), Err(QueryError::FaultIsEndpoint(8)));
    assert_eq!(query_dist(&l[0], &l[8], &l[0]), Err(QueryError::FaultIsEndpoint(0)));
    let same = query_count(&l[4], &l[4], &l[0]).unwrap();
    assert_eq!((same.distance, same.count), (Distance::ZERO, CountMode::Exact.one()));
}

#[test]
fn stored_entries_replay_against_split_bellman_ford() {
    let g = gen_grid(5, 5, 4, 7).unwrap();
    let (t, rd, l) = labels_for(&g, 2, 7, CountMode::Exact);
    let n = g.n();
    let all: Vec<usize> = (0..n).collect();
    for lab in &l {
        let x = lab.owner;
        for (&(rid, b), pair) in &lab.item2 {
            let region = t.piece(rid);
            let removed: Vec<usize> = region.vertices.iter().copied().filter(|&y| y != b).collect();
            let d = bellman_ford_split(&g, x, &removed, &[]);
            assert_eq!(pair.to.dist.is_finite().then(|| pair.to.dist.get()), d[b], "item2 to x={x} b={b}");
        }
        for (&(cid, p), quad) in &lab.item5 {
            let c = t.piece(cid);
            let interior = c.interior();
            let mut removed: Vec<usize> = all.iter().copied().filter(|y| !interior.contains(y)).collect();
            let any = bellman_ford_split(&g, x, &removed, &[]);
            assert_eq!(quad.out_any.dist.is_finite().then(|| quad.out_any.dist.get()), any[p]);
            removed.extend(c.separator.iter().copied().filter(|&y| y != p && y != x));
            let first = bellman_ford_split(&g, x, &removed, &[]);
            let want = if c.in_separator(x) && x != p { None } else { first[p] };
            assert_eq!(quad.out_first.dist.is_finite().then(|| quad.out_first.dist.get()), want, "item5 x={x} p={p}");
        }
        assert_eq!(lab.region, rd.region_of(x));
    }
}

#[test]
fn encoding_round_trips_byte_for_byte() {
    let g = gen_grid(4, 4, 1, 100).unwrap();
    for mode in [CountMode::Exact, CountMode::Mod(1_000_000_007)] {
        let (_, _, l) = labels_for(&g, 2, RDivision::default_r(16), mode);
        for lab in &l {
            let bytes = encode_label(lab);
            let back = decode_label(&bytes).unwrap();
            assert_eq!(&back, lab);
            assert_eq!(encode_label(&back), bytes);
        }
    }
}

#[test]
fn corrupt_bytes_are_rejected() {
    let g = gen_grid(3, 3, 1, 10).unwrap();
    let (_, _, l) = labels_for(&g, 2, 4, CountMode::Exact);
    let bytes = encode_label(&l[4]);
    for cut in [0, 5, bytes.len() / 2, bytes.len() - 1] {
        assert!(decode_label(&bytes[..cut]).is_err());
    }
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(decode_label(&extra).is_err());
    let mut bad_version = bytes;
    bad_version[0] ^= 0xff;
    assert!(decode_label(&bad_version).is_err());
}

#[test]
fn streamed_word_counts_match_built_labels() {
    for seed in 0..3 {
        let g = gen_grid(6, 6, seed, 50).unwrap();
        let t = DecompositionTree::build(&g, 2);
        let rd = RDivision::new(&t, RDivision::default_r(36));
        let built = build_fault_labels(&g, &t, &rd, CountMode::Exact).unwrap();
        let words = fault_label_words(&g, &t, &rd).unwrap();
        for (lab, w) in built.iter().zip(&words) {
            assert_eq!(&lab.size_words(), w);
        }
    }
}

#[test]
fn zero_weights_are_refused() {
    let g = Graph::load_str("p dgraph 2 1\ne 0 1 0\n").unwrap();
    let t = DecompositionTree::build(&g, 2);
    let rd = RDivision::new(&t, 2);
    assert!(build_fault_labels(&g, &t, &rd, CountMode::Exact).is_err());
}

/// Builds labels and hands back nothing but their bytes.
fn serialized_labels(seed: u64) -> (Vec<Vec<u8>>, Vec<(usize, usize, usize, Distance, BigUint)>) {
    let g = gen_grid(4, 4, seed, 20).unwrap();
    let (_, _, l) = labels_for(&g, 2, 6, CountMode::Exact);
    let mut expected = Vec::new();
    for (u, v, f) in [(0, 15, 5), (3, 12, 6), (1, 14, 9), (15, 0, 10)] {
        let o = count_sssp(&g, u, &Mask::removing(&[f]), CountMode::Exact).unwrap();
        expected.push((u, v, f, o.dist[v], o.count(v).as_exact().unwrap().clone()));
    }
    (l.iter().map(encode_label).collect(), expected)
}

#[test]
fn queries_need_only_label_bytes() {
    let (blobs, expected) = serialized_labels(6);
    // no graph or tree exists past this point
    for (u, v, f, d, c) in expected {
        let lu = decode_label(&blobs[u]).unwrap();
        let lv = decode_label(&blobs[v]).unwrap();
        let lf = decode_label(&blobs[f]).unwrap();
        let a = query_count(&lu, &lv, &lf).unwrap();
        assert_eq!(a.distance, d);
        assert_eq!(a.count.as_exact().unwrap(), &c);
    }
}
