use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;

use rand_core::RngCore;
use rayon::prelude::*;

use super::commands::load_graph;
use super::manifest::{hex64, HashedCsv, RunManifest};
use super::query::archive_error;
use super::{CliError, Ctx, VerifyArgs};
use crate::archive::{ArchiveReader, Scheme};
use crate::count::{CountMode, CountValue};
use crate::countlabel::{self, CountLabel};
use crate::decomp::DecompositionTree;
use crate::faultlabel::{self, FaultLabel};
use crate::gen::fixture_rng;
use crate::graph::{Distance, Graph};
use crate::oracle::{count_sssp, Mask, DEFAULT_ALL_PAIRS_CAP};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Mismatch {
    class: &'static str,
    u: usize,
    v: usize,
    faults: Vec<usize>,
    want: String,
    got: String,
}

/// Per-class tallies and the mismatches found.
#[derive(Default)]
struct Tally {
    checked: BTreeMap<&'static str, usize>,
    bad: Vec<Mismatch>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (k, c) in other.checked {
            *self.checked.entry(k).or_default() += c;
        }
        self.bad.extend(other.bad);
        self
    }

    fn check(&mut self, class: &'static str, u: usize, v: usize, faults: &[usize], want: String, got: String) {
        *self.checked.entry(class).or_default() += 1;
        if want != got {
            self.bad.push(Mismatch { class, u, v, faults: faults.to_vec(), want, got });
        }
    }
}

fn pair(d: Distance, c: &CountValue) -> String {
    format!("{d}/{c}")
}

fn fault_sweep(g: &Graph, labels: &[FaultLabel], mode: CountMode, triples: Option<Vec<(usize, usize, usize)>>) -> Tally {
    let n = g.n();
    // group by (f, u) so one masked search serves every v
    let groups: Vec<((usize, usize), Vec<usize>)> = match triples {
        None => (0..n).flat_map(|f| (0..n).filter(move |&u| u != f).map(move |u| ((f, u), (0..n).filter(|&v| v != f && v != u).collect()))).collect(),
        Some(t) => {
            let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for (u, v, f) in t {
                m.entry((f, u)).or_default().push(v);
            }
            m.into_iter().collect()
        }
    };
    groups
        .par_iter()
        .map(|&((f, u), ref vs)| {
            let mut t = Tally::default();
            let o = count_sssp(g, u, &Mask::removing(&[f]), mode).expect("vertices in range");
            for &v in vs {
                let got = faultlabel::query_count(&labels[u], &labels[v], &labels[f]);
                let (gd, gc) = match got {
                    Ok(a) => (a.distance.to_string(), pair(a.distance, &a.count)),
                    Err(e) => (format!("error: {e}"), format!("error: {e}")),
                };
                t.check("fault-dist", u, v, &[f], o.dist[v].to_string(), gd);
                t.check("fault-count", u, v, &[f], pair(o.dist[v], o.count(v)), gc);
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn avoiding_answers(ls: &CountLabel, lt: &CountLabel, fl: &[&CountLabel]) -> (String, String) {
    let show = |r: Result<CountValue, countlabel::CountLabelError>| match r {
        Ok(c) => c.to_string(),
        Err(e) => format!("error: {e}"),
    };
    (
        show(countlabel::query_count_avoiding_naive(ls, lt, fl)),
        show(countlabel::query_count_avoiding_fast(ls, lt, fl)),
    )
}

fn count_sweep_exhaustive(g: &Graph, labels: &[CountLabel], mode: CountMode) -> Tally {
    let n = g.n();
    (0..n)
        .into_par_iter()
        .map(|s| {
            let mut t = Tally::default();
            let base = count_sssp(g, s, &Mask::none(), mode).expect("source in range");
            for v in 0..n {
                let got = countlabel::distance_and_count(&labels[s], &labels[v]);
                let (gd, gc) = match got {
                    Ok((d, c)) => (d.to_string(), pair(d, &c)),
                    Err(e) => (format!("error: {e}"), format!("error: {e}")),
                };
                t.check("count-dist", s, v, &[], base.dist[v].to_string(), gd);
                t.check("count-count", s, v, &[], pair(base.dist[v], base.count(v)), gc);
            }
            for f in (0..n).filter(|&f| f != s) {
                let masked = count_sssp(g, s, &Mask::removing(&[f]), mode).expect("source in range");
                for v in (0..n).filter(|&v| v != s && v != f) {
                    let want = if base.dist[v].is_finite() && masked.dist[v] == base.dist[v] {
                        masked.count(v).clone()
                    } else {
                        mode.zero()
                    };
                    let (naive, fast) = avoiding_answers(&labels[s], &labels[v], &[&labels[f]]);
                    t.check("count-avoiding-naive", s, v, &[f], want.to_string(), naive);
                    t.check("count-avoiding-fast", s, v, &[f], want.to_string(), fast);
                }
            }
            t
        })
        .reduce(Tally::default, Tally::merge)
}

fn count_sweep_samples(g: &Graph, labels: &[CountLabel], mode: CountMode, queries: &[(usize, usize, Vec<usize>)]) -> Tally {
    queries
        .par_iter()
        .map(|(s, v, faults)| {
            let mut t = Tally::default();
            let base = count_sssp(g, *s, &Mask::none(), mode).expect("source in range");
            let masked = count_sssp(g, *s, &Mask::removing(faults), mode).expect("source in range");
            let want = if base.dist[*v].is_finite() && masked.dist[*v] == base.dist[*v] {
                masked.count(*v).clone()
            } else {
                mode.zero()
            };
            let fl: Vec<&CountLabel> = faults.iter().map(|&f| &labels[f]).collect();
            let (naive, fast) = avoiding_answers(&labels[*s], &labels[*v], &fl);
            t.check("count-avoiding-naive", *s, *v, faults, want.to_string(), naive);
            t.check("count-avoiding-fast", *s, *v, faults, want.to_string(), fast);
            t
        })
        .reduce(Tally::default, Tally::merge)
}

/// Distinct vertices drawn without replacement from those not in `avoid`.
fn draw_distinct(rng: &mut impl RngCore, n: usize, k: usize, avoid: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(k);
    let available = n - avoid.len();
    while out.len() < k.min(available) {
        let x = (rng.next_u64() % n as u64) as usize;
        if !avoid.contains(&x) && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn load_all<T>(n: usize, mut get: impl FnMut(usize) -> Result<T, crate::archive::ArchiveError>) -> Result<Vec<T>, (usize, String)> {
    (0..n).map(|i| get(i).map_err(|e| (i, e.to_string()))).collect()
}

pub(super) fn cmd_verify(ctx: &mut Ctx, a: VerifyArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    let n = g.n();
    let file = File::open(&a.labels).map_err(|e| CliError::io(&a.labels, e))?;
    let mut archive = ArchiveReader::open(BufReader::new(file)).map_err(archive_error)?;
    let h = archive.header.clone();
    if h.n != n || h.graph_hash != g.content_hash() {
        ctx.say("FAIL archive was built from a different graph")?;
        return Err(CliError::failure("archive and graph do not match"));
    }
    let tree = DecompositionTree::build(&g, h.leaf_threshold.max(1));
    if tree.fingerprint() != h.fingerprint {
        ctx.say(format!("FAIL decomposition fingerprint {} does not match the archive's {}", hex64(tree.fingerprint()), hex64(h.fingerprint)))?;
        return Err(CliError::failure("archive and decomposition do not match"));
    }
    if a.exhaustive && n > DEFAULT_ALL_PAIRS_CAP {
        return Err(CliError::usage(format!("exhaustive verification is capped at {DEFAULT_ALL_PAIRS_CAP} vertices")));
    }
    let mut rng = fixture_rng(ctx.seed);
    let samples = a.samples.unwrap_or(0);
    let decoded = match h.scheme {
        Scheme::Fault => load_all(n, |i| archive.fault_label(i)).map(|l| {
            let triples = (!a.exhaustive && n >= 3).then(|| {
                (0..samples)
                    .map(|_| {
                        let d = draw_distinct(&mut rng, n, 3, &[]);
                        (d[0], d[1], d[2])
                    })
                    .collect()
            });
            if !a.exhaustive && n < 3 {
                Tally::default()
            } else {
                fault_sweep(&g, &l, h.mode, triples)
            }
        }),
        Scheme::Count => load_all(n, |i| archive.count_label(i)).map(|l| {
            if a.exhaustive {
                count_sweep_exhaustive(&g, &l, h.mode)
            } else if n < 2 {
                Tally::default()
            } else {
                let queries: Vec<(usize, usize, Vec<usize>)> = (0..samples)
                    .map(|_| {
                        let st = draw_distinct(&mut rng, n, 2, &[]);
                        let k = (rng.next_u64() % (a.max_faults as u64 + 1)) as usize;
                        let f = draw_distinct(&mut rng, n, k, &st);
                        (st[0], st[1], f)
                    })
                    .collect();
                count_sweep_samples(&g, &l, h.mode, &queries)
            }
        }),
    };
    let mut tally = match decoded {
        Ok(t) => t,
        Err((i, e)) => {
            let mut t = Tally::default();
            t.checked.insert("decode", n);
            t.bad.push(Mismatch { class: "decode", u: i, v: i, faults: Vec::new(), want: "valid label".into(), got: e });
            t
        }
    };
    tally.bad.sort();

    for (class, &checked) in &tally.checked {
        let bad: Vec<&Mismatch> = tally.bad.iter().filter(|m| m.class == *class).collect();
        match bad.first() {
            None => ctx.say(format!("PASS {class} {checked}"))?,
            Some(m) => {
                let faults = m.faults.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",");
                ctx.say(format!(
                    "FAIL {class} {}/{checked} first: u={} v={} faults={faults} want={} got={}",
                    bad.len(),
                    m.u,
                    m.v,
                    m.want,
                    m.got
                ))?;
            }
        }
    }
    if let Some(path) = &a.mismatches {
        let mut manifest = RunManifest::new("verify", ctx.seed);
        manifest.graph_hash = Some(hex64(h.graph_hash));
        manifest.fingerprint = Some(hex64(h.fingerprint));
        manifest.r = (h.r > 0).then_some(h.r);
        if let CountMode::Mod(p) = h.mode {
            manifest.mode = "mod".into();
            manifest.prime = Some(p);
        }
        let mut csv = HashedCsv::create(path, &manifest.hash(), &["class", "u", "v", "faults", "expected", "got"])?;
        for m in &tally.bad {
            let faults = m.faults.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" ");
            csv.row(&[m.class.to_string(), m.u.to_string(), m.v.to_string(), faults, m.want.clone(), m.got.clone()])?;
        }
        csv.finish()?;
        manifest.write_next_to(path)?;
    }
    if tally.bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::failure(format!("{} mismatches", tally.bad.len())))
    }
}
