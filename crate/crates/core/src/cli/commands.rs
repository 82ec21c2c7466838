use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use super::manifest::{hex64, sidecar, HashedCsv, RunManifest};
use super::{loglog_slope, CliError, Ctx, GenKind, SchemeArg, EXIT_WEIGHTS};
use crate::archive::{count_archive_bytes, fault_archive_bytes, ArchiveHeader, Scheme};
use crate::countlabel::build_count_labels;
use crate::decomp::{DecompositionTree, RDivision};
use crate::faultlabel::{build_fault_labels, fault_label_words};
use crate::gen::{gen_gadget, gen_grid, gen_omv_grid, gen_square_grid, parse_matrix, random_matrix};
use crate::graph::{Graph, MAX_WEIGHT};

pub(super) fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Graph::load(BufReader::new(file)).map_err(|e| CliError::failure(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn mode_fields(m: &mut RunManifest, mode: crate::CountMode) {
    m.mode = match mode {
        crate::CountMode::Exact => "exact".into(),
        crate::CountMode::Mod(_) => "mod".into(),
    };
    m.prime = match mode {
        crate::CountMode::Exact => None,
        crate::CountMode::Mod(p) => Some(p),
    };
}

fn parse_bits(text: &str) -> Result<Vec<bool>, CliError> {
    let bits: Vec<bool> = text
        .split(',')
        .map(|b| match b.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(CliError::usage(format!("gadget bits must be 0 or 1, got {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    if bits.is_empty() {
        return Err(CliError::usage("gadget needs at least one bit"));
    }
    Ok(bits)
}

pub(super) fn gen(ctx: &mut Ctx, kind: GenKind) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("gen", ctx.seed);
    // (graph, out, expectation header, expectation rows)
    let (graph, out, header, rows): (Graph, _, Vec<&str>, Vec<Vec<String>>) = match kind {
        GenKind::Grid { rows, cols, max_weight, out } => {
            if rows == 0 || cols == 0 || !(1..=MAX_WEIGHT).contains(&max_weight) {
                return Err(CliError::usage("grid needs positive dimensions and 1 ≤ max-weight ≤ 2^40"));
            }
            let g = gen_grid(rows, cols, ctx.seed, max_weight).map_err(|e| CliError::usage(e.to_string()))?;
            (g, out, Vec::new(), Vec::new())
        }
        GenKind::Gadget { bits, unit, out } => {
            let bits = parse_bits(&bits)?;
            if !(1..=MAX_WEIGHT).contains(&unit) {
                return Err(CliError::usage("gadget unit weight must be in 1..=2^40"));
            }
            let gd = gen_gadget(&bits, unit).map_err(|e| CliError::usage(e.to_string()))?;
            let length = (bits.len() as u64 + 1) * unit;
            let row = vec![gd.s.to_string(), gd.t.to_string(), length.to_string(), gd.expected_count.to_string()];
            (gd.graph, out, vec!["s", "t", "length", "count"], vec![row])
        }
        GenKind::Omv { matrix, size, out } => {
            let m = match (matrix, size) {
                (Some(text), _) => parse_matrix(&text).ok_or_else(|| CliError::usage("matrix must be square rows of 0/1 separated by ';'"))?,
                (None, Some(n)) if n >= 1 => random_matrix(n, ctx.seed),
                _ => return Err(CliError::usage("omv needs --matrix or a positive --size")),
            };
            let grid = gen_omv_grid(&m).map_err(|e| CliError::usage(e.to_string()))?;
            let mut rows = Vec::new();
            for i in 1..=grid.n_side {
                for j in 0..grid.n_side {
                    let (d, c) = grid.expected(&m, i, j);
                    rows.push(vec![
                        i.to_string(),
                        j.to_string(),
                        grid.sources[j].to_string(),
                        grid.sinks[i].to_string(),
                        d.to_string(),
                        c.to_string(),
                    ]);
                }
            }
            (grid.graph, out, vec!["i", "j", "source", "sink", "distance", "count"], rows)
        }
    };
    manifest.graph_hash = Some(hex64(graph.content_hash()));
    let Some(out) = out else {
        ctx.say(graph.to_text().trim_end())?;
        for r in &rows {
            let line: Vec<String> = header.iter().zip(r).map(|(h, v)| format!("{h}={v}")).collect();
            ctx.info(format!("expected {}", line.join(" ")));
        }
        return Ok(());
    };
    write_file(&out, graph.to_text().as_bytes())?;
    if !header.is_empty() {
        let mut csv = HashedCsv::create(&sidecar(&out, "expect.csv"), &manifest.hash(), &header)?;
        for r in &rows {
            csv.row(r)?;
        }
        csv.finish()?;
    }
    manifest.write_next_to(&out)?;
    ctx.info(format!("wrote {} ({} vertices, {} edges)", out.display(), graph.n(), graph.m()));
    Ok(())
}

pub(super) fn decompose(ctx: &mut Ctx, a: super::DecomposeArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    if a.leaf_threshold == 0 {
        return Err(CliError::usage("leaf threshold must be positive"));
    }
    let tree = DecompositionTree::build(&g, a.leaf_threshold);
    let r = a.r.unwrap_or_else(|| RDivision::default_r(g.n()));
    let rdiv = RDivision::new(&tree, r);
    let depth = tree.pieces.iter().map(|p| p.depth).max().unwrap_or(0);
    let widest = tree.pieces.iter().map(|p| p.separator.len()).max().unwrap_or(0);
    let summary = format!(
        "n={} pieces={} depth={} max_separator={} fingerprint={} r={} regions={}",
        g.n(),
        tree.len(),
        depth,
        widest,
        hex64(tree.fingerprint()),
        r,
        rdiv.regions.len()
    );
    if a.dump {
        match &a.out {
            Some(path) => write_file(path, tree.dump().as_bytes())?,
            None => ctx.say(tree.dump().trim_end())?,
        }
        ctx.info(summary);
    } else {
        ctx.say(summary)?;
    }
    Ok(())
}

pub(super) fn build(ctx: &mut Ctx, a: super::BuildArgs) -> Result<(), CliError> {
    let g = load_graph(&a.graph)?;
    if !g.is_counting_ready() {
        return Err(CliError::new(EXIT_WEIGHTS, "labels need every edge weight to be at least 1"));
    }
    if a.leaf_threshold == 0 {
        return Err(CliError::usage("leaf threshold must be positive"));
    }
    let n = g.n();
    let mut warnings = Vec::new();
    let mode = ctx.mode.resolve(n, ctx.seed, &mut |w| warnings.push(w));
    warnings.iter().for_each(|w| ctx.warn(w));
    let tree = DecompositionTree::build(&g, a.leaf_threshold);
    let scheme: Scheme = a.scheme.into();
    let mut manifest = RunManifest::new("build", ctx.seed);
    manifest.graph_hash = Some(hex64(g.content_hash()));
    manifest.fingerprint = Some(hex64(tree.fingerprint()));
    mode_fields(&mut manifest, mode);
    let mut header = ArchiveHeader {
        scheme,
        mode,
        fingerprint: tree.fingerprint(),
        graph_hash: g.content_hash(),
        leaf_threshold: a.leaf_threshold,
        r: 0,
        n,
    };
    let sizes_path = a.sizes.clone().unwrap_or_else(|| sidecar(&a.out, "sizes.csv"));
    let (bytes, size_header, size_rows): (Vec<u8>, Vec<&str>, Vec<Vec<usize>>) = match scheme {
        Scheme::Fault => {
            let r = a.r.unwrap_or_else(|| RDivision::default_r(n));
            if r == 0 {
                return Err(CliError::usage("r must be positive"));
            }
            header.r = r;
            manifest.r = Some(r);
            let rdiv = RDivision::new(&tree, r);
            let labels = build_fault_labels(&g, &tree, &rdiv, mode).map_err(|e| CliError::new(EXIT_WEIGHTS, e.to_string()))?;
            let rows = labels
                .iter()
                .map(|l| {
                    let w = l.size_words();
                    vec![l.owner, w.header, w.item1, w.item2, w.item3, w.item4, w.item5, w.total()]
                })
                .collect();
            let cols = vec!["vertex", "header", "item1", "item2", "item3", "item4", "item5", "total"];
            (fault_archive_bytes(&header, &labels), cols, rows)
        }
        Scheme::Count => {
            if a.r.is_some() {
                ctx.warn("--r only applies to fault labels; ignored");
            }
            let labels = build_count_labels(&g, &tree, mode).map_err(|e| CliError::new(EXIT_WEIGHTS, e.to_string()))?;
            let rows = labels
                .iter()
                .map(|l| vec![l.owner, crate::countlabel::HEADER_WORDS, l.entries.len(), l.size_words()])
                .collect();
            (count_archive_bytes(&header, &labels), vec!["vertex", "header", "entries", "total"], rows)
        }
    };
    write_file(&a.out, &bytes)?;
    let mut csv = HashedCsv::create(&sizes_path, &manifest.hash(), &size_header)?;
    for r in &size_rows {
        csv.row(&r.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
    }
    csv.finish()?;
    manifest.write_next_to(&a.out)?;
    let max = size_rows.iter().map(|r| *r.last().unwrap()).max().unwrap_or(0);
    ctx.info(format!("wrote {n} {} labels to {} ({} bytes, max {max} words, mode {mode})", scheme.name(), a.out.display(), bytes.len()));
    Ok(())
}

fn mean(xs: &[usize]) -> String {
    if xs.is_empty() {
        return "0.000".into();
    }
    format!("{:.3}", xs.iter().sum::<usize>() as f64 / xs.len() as f64)
}

pub(super) fn stats(ctx: &mut Ctx, a: super::StatsArgs) -> Result<(), CliError> {
    let sizes: Vec<usize> = a
        .sizes
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::usage(format!("bad size {s:?}"))))
        .collect::<Result<_, _>>()?;
    for &n in &sizes {
        let side = (n as f64).sqrt().round() as usize;
        if n == 0 || side * side != n {
            return Err(CliError::usage(format!("size {n} is not a positive perfect square")));
        }
    }
    if !(1..=MAX_WEIGHT).contains(&a.max_weight) || a.leaf_threshold == 0 {
        return Err(CliError::usage("max-weight must be in 1..=2^40 and the leaf threshold positive"));
    }
    let manifest = RunManifest::new(&format!("stats {}", Scheme::from(a.scheme).name()), ctx.seed);
    let cols: Vec<&str> = match a.scheme {
        SchemeArg::Fault => {
            vec!["n", "r", "max_words", "mean_words", "mean_header", "mean_item1", "mean_item2", "mean_item3", "mean_item4", "mean_item5"]
        }
        SchemeArg::Count => vec!["n", "max_words", "mean_words", "mean_header", "mean_entries"],
    };
    let mut buf = Vec::new();
    let mut csv = HashedCsv::new(&mut buf, &manifest.hash(), &cols)?;
    let mut points = Vec::new();
    for &n in &sizes {
        let g = gen_square_grid(n, ctx.seed, a.max_weight).map_err(|e| CliError::failure(e.to_string()))?;
        let tree = DecompositionTree::build(&g, a.leaf_threshold);
        let (max, row) = match a.scheme {
            SchemeArg::Fault => {
                let r = RDivision::default_r(n);
                let words = fault_label_words(&g, &tree, &RDivision::new(&tree, r)).map_err(|e| CliError::failure(e.to_string()))?;
                let col = |f: fn(&crate::faultlabel::LabelWords) -> usize| words.iter().map(f).collect::<Vec<_>>();
                let totals = col(|w| w.total());
                let max = totals.iter().copied().max().unwrap_or(0);
                let row = vec![
                    n.to_string(),
                    r.to_string(),
                    max.to_string(),
                    mean(&totals),
                    mean(&col(|w| w.header)),
                    mean(&col(|w| w.item1)),
                    mean(&col(|w| w.item2)),
                    mean(&col(|w| w.item3)),
                    mean(&col(|w| w.item4)),
                    mean(&col(|w| w.item5)),
                ];
                (max, row)
            }
            SchemeArg::Count => {
                let labels = build_count_labels(&g, &tree, crate::CountMode::Exact).map_err(|e| CliError::failure(e.to_string()))?;
                let totals: Vec<usize> = labels.iter().map(|l| l.size_words()).collect();
                let entries: Vec<usize> = labels.iter().map(|l| l.entries.len()).collect();
                let max = totals.iter().copied().max().unwrap_or(0);
                let headers = vec![crate::countlabel::HEADER_WORDS; labels.len()];
                (max, vec![n.to_string(), max.to_string(), mean(&totals), mean(&headers), mean(&entries)])
            }
        };
        ctx.info(format!("n={n} max_words={max}"));
        points.push((n as f64, max as f64));
        csv.row(&row)?;
    }
    csv.finish()?;
    let slope = match loglog_slope(&points) {
        Some(s) => format!("slope={s:.4}"),
        None => "slope=n/a".to_string(),
    };
    match &a.out {
        Some(path) => {
            write_file(path, &buf)?;
            let mut manifest = manifest;
            manifest.write_next_to(path)?;
            ctx.say(slope)
        }
        None => {
            ctx.out.write_all(&buf).map_err(|e| CliError::failure(e.to_string()))?;
            let _ = writeln!(ctx.err, "{slope}");
            Ok(())
        }
    }
}
