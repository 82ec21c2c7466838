use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand_core::RngCore;
use sepalabel::archive::{ArchiveReader, AuditReader};
use sepalabel::cli::{run_query, QueryRequest, What};
use sepalabel::gen::fixture_rng;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sepalabel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// A grid file plus a fault archive and a count archive for it.
struct Fixture {
    _dir: TempDir,
    graph: PathBuf,
    fault: PathBuf,
    count: PathBuf,
    dir: PathBuf,
}

fn fixture(rows: &str, mode: &str) -> Fixture {
    let dir = TempDir::new().unwrap();
    let base = dir.path().to_path_buf();
    let graph = base.join("g.txt");
    let (fault, count) = (base.join("f.lab"), base.join("c.lab"));
    assert!(run(&["--seed", "4", "--quiet", "gen", "grid", rows, rows, "--out", p(&graph)]).status.success());
    let o = run(&["--quiet", "build", "--graph", p(&graph), "--scheme", "fault", "--out", p(&fault)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["--quiet", "--mode", mode, "build", "--graph", p(&graph), "--scheme", "count", "--out", p(&count)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    Fixture { _dir: dir, graph, fault, count, dir: base }
}

#[test]
fn verify_passes_on_fresh_archives() {
    let fx = fixture("4", "mod:61");
    let o = run(&["verify", "--graph", p(&fx.graph), "--labels", p(&fx.fault), "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("PASS fault-dist 3360") && out.contains("PASS fault-count 3360"), "{out}");
    let o = run(&["verify", "--graph", p(&fx.graph), "--labels", p(&fx.count), "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["--seed", "2", "verify", "--graph", p(&fx.graph), "--labels", p(&fx.count), "--samples", "300", "--max-faults", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS count-avoiding-fast 300"));
}

#[test]
fn exit_codes() {
    let fx = fixture("3", "exact");
    let q = |extra: &[&str]| {
        let mut args = vec!["query", "--labels", p(&fx.count)];
        args.extend_from_slice(extra);
        run(&args).status.code()
    };
    assert_eq!(q(&["--u", "0", "--v", "8"]), Some(0));
    assert_eq!(q(&["--u", "0", "--v", "8", "--faults", "8"]), Some(4));
    assert_eq!(q(&["--u", "0", "--v", "9"]), Some(5));
    assert_eq!(q(&["--u", "0", "--v", "8", "--faults", "1,42"]), Some(5));
    assert_eq!(q(&["--u", "0"]), Some(2));
    assert_eq!(run(&["--mode", "mod:2", "gen", "grid", "2", "2"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let fq = run(&["query", "--labels", p(&fx.fault), "--u", "0", "--v", "2", "--fault", "1"]);
    assert_eq!(fq.status.code(), Some(0));
    assert!(stdout(&fq).starts_with("dist="));

    let zero = fx.dir.join("z.txt");
    fs::write(&zero, "p dgraph 2 1\ne 0 1 0\n").unwrap();
    let o = run(&["build", "--graph", p(&zero), "--scheme", "count", "--out", p(&fx.dir.join("z.lab"))]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["build", "--graph", p(&fx.dir.join("missing.txt")), "--scheme", "count", "--out", p(&fx.dir.join("m.lab"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gadget_query_counts_paths() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("gd.txt");
    let lab = dir.path().join("gd.lab");
    assert!(run(&["--quiet", "gen", "gadget", "1,0,1", "--out", p(&g)]).status.success());
    let expect = fs::read_to_string(dir.path().join("gd.txt.expect.csv")).unwrap();
    assert!(expect.lines().nth(1).unwrap().ends_with(",10"), "{expect}");
    assert!(run(&["--quiet", "build", "--graph", p(&g), "--scheme", "count", "--out", p(&lab)]).status.success());
    let o = run(&["query", "--labels", p(&lab), "--u", "0", "--v", "7"]);
    assert_eq!(stdout(&o).trim(), "dist=4 count=10");
}

#[test]
fn runs_are_byte_identical() {
    let a = fixture("5", "mod:40");
    let b = fixture("5", "mod:40");
    for (x, y) in [(&a.graph, &b.graph), (&a.fault, &b.fault), (&a.count, &b.count)] {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
    for suffix in ["f.lab.sizes.csv", "c.lab.sizes.csv"] {
        assert_eq!(fs::read(a.dir.join(suffix)).unwrap(), fs::read(b.dir.join(suffix)).unwrap());
    }
    let stats = |d: &Path| {
        let out = d.join("s.csv");
        let o = run(&["--quiet", "stats", "--scheme", "count", "--sizes", "16,36,64", "--out", p(&out)]);
        (stdout(&o), fs::read(out).unwrap())
    };
    assert_eq!(stats(&a.dir), stats(&b.dir));
}

#[test]
fn corrupted_archive_fails_verification() {
    let fx = fixture("4", "exact");
    let mut bytes = fs::read(&fx.count).unwrap();
    let reader = ArchiveReader::open(Cursor::new(bytes.clone())).unwrap();
    let first = reader.byte_range(5).unwrap().start as usize;
    bytes[first] ^= 1;
    let bad = fx.dir.join("bad.lab");
    fs::write(&bad, &bytes).unwrap();
    let o = run(&["verify", "--graph", p(&fx.graph), "--labels", p(&bad), "--exhaustive"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

}

#[test]
fn mismatched_graph_is_rejected() {
    let fx = fixture("4", "exact");
    let other = fx.dir.join("other.txt");
    assert!(run(&["--seed", "5", "--quiet", "gen", "grid", "4", "4", "--out", p(&other)]).status.success());
    let o = run(&["verify", "--graph", p(&other), "--labels", p(&fx.fault), "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn queries_touch_only_the_named_labels() {
    let fx = fixture("6", "exact");
    let mut rng = fixture_rng(77);
    for (path, scheme_faults) in [(&fx.count, 4usize), (&fx.fault, 1)] {
        let (audit, log) = AuditReader::new(fs::File::open(path).unwrap());
        let mut archive = ArchiveReader::open(audit).unwrap();
        for _ in 0..100 {
            log.lock().unwrap().clear();
            let mut ids: Vec<usize> = Vec::new();
            while ids.len() < 2 + scheme_faults {
                let x = (rng.next_u64() % 36) as usize;
                if !ids.contains(&x) {
                    ids.push(x);
                }
            }
            let k = if scheme_faults == 1 { 1 } else { (rng.next_u64() % 5) as usize };
            let req = QueryRequest { u: ids[0], v: ids[1], faults: ids[2..2 + k].to_vec(), what: What::Count };
            run_query(&mut archive, &req).unwrap();
            let allowed: Vec<_> = ids[..2 + k].iter().map(|&i| archive.byte_range(i).unwrap()).collect();
            let reads = log.lock().unwrap().clone();
            assert!(!reads.is_empty());
            for r in reads {
                assert!(allowed.iter().any(|a| a.start <= r.start && r.end <= a.end), "read {r:?} outside {allowed:?}");
            }
        }
    }
}

#[test]
fn manifests_prefix_csv_rows() {
    let fx = fixture("3", "exact");
    let sizes = fs::read_to_string(fx.dir.join("c.lab.sizes.csv")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(fx.dir.join("c.lab.manifest.json")).unwrap()).unwrap();
    let hash = manifest["manifest_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 16);
    assert!(sizes.lines().skip(1).all(|l| l.starts_with(hash)), "{sizes}");
    assert_eq!(sizes.lines().count(), 10);
}
