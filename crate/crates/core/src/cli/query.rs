use std::fs::File;
use std::io::{Read, Seek};

use clap::ValueEnum;

use super::{CliError, Ctx, QueryArgs, EXIT_FAULT_ENDPOINT, EXIT_MISSING_ID};
use crate::archive::{ArchiveError, ArchiveReader, Scheme};
use crate::count::{suggested_prime_bits, CountMode};
use crate::countlabel::{self, CountLabel, CountLabelError};
use crate::faultlabel::{self, QueryError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    Dist,
    Count,
    Preserved,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryRequest {
    pub u: usize,
    pub v: usize,
    pub faults: Vec<usize>,
    pub what: What,
}

pub(super) fn archive_error(e: ArchiveError) -> CliError {
    match e {
        ArchiveError::MissingId { .. } => CliError::new(EXIT_MISSING_ID, e.to_string()),
        other => CliError::failure(format!("reading archive: {other}")),
    }
}

fn endpoint(f: usize) -> CliError {
    CliError::new(EXIT_FAULT_ENDPOINT, format!("fault {f} is a query endpoint"))
}

/// Answers one query, reading only the labels of `u`, `v` and the faults.
/// Returns the output line and any warnings.
pub fn run_query<R: Read + Seek>(
    archive: &mut ArchiveReader<R>,
    req: &QueryRequest,
) -> Result<(String, Vec<String>), CliError> {
    let n = archive.len();
    for &x in [req.u, req.v].iter().chain(&req.faults) {
        if x >= n {
            return Err(archive_error(ArchiveError::MissingId { id: x, n }));
        }
    }
    if let Some(&f) = req.faults.iter().find(|&&f| f == req.u || f == req.v) {
        return Err(endpoint(f));
    }
    match archive.header.scheme {
        Scheme::Fault => fault_query(archive, req),
        Scheme::Count => count_query(archive, req),
    }
}

fn fault_query<R: Read + Seek>(archive: &mut ArchiveReader<R>, req: &QueryRequest) -> Result<(String, Vec<String>), CliError> {
    let [f] = req.faults[..] else {
        return Err(CliError::usage("fault-label archives answer queries with exactly one fault"));
    };
    if req.what == What::Preserved {
        return Err(CliError::usage("length preservation needs a counting-label archive"));
    }
    let lu = archive.fault_label(req.u).map_err(archive_error)?;
    let lv = archive.fault_label(req.v).map_err(archive_error)?;
    let lf = archive.fault_label(f).map_err(archive_error)?;
    let ans = faultlabel::query_count(&lu, &lv, &lf).map_err(|e| match e {
        QueryError::FaultIsEndpoint(f) => endpoint(f),
        other => CliError::failure(other.to_string()),
    })?;
    let line = match req.what {
        What::Dist => format!("dist={}", ans.distance),
        _ => format!("dist={} count={}", ans.distance, ans.count),
    };
    Ok((line, Vec::new()))
}

fn count_query<R: Read + Seek>(archive: &mut ArchiveReader<R>, req: &QueryRequest) -> Result<(String, Vec<String>), CliError> {
    if req.what == What::Dist && !req.faults.is_empty() {
        return Err(CliError::usage("counting-label archives give distances in the fault-free graph only"));
    }
    let ls = archive.count_label(req.u).map_err(archive_error)?;
    let lt = archive.count_label(req.v).map_err(archive_error)?;
    let mut faults: Vec<CountLabel> = Vec::with_capacity(req.faults.len());
    for &f in &req.faults {
        faults.push(archive.count_label(f).map_err(archive_error)?);
    }
    let refs: Vec<&CountLabel> = faults.iter().collect();
    let fail = |e: CountLabelError| match e {
        CountLabelError::EndpointFaulty(f) => endpoint(f),
        other => CliError::failure(other.to_string()),
    };
    let dist = countlabel::query_distance(&ls, &lt).map_err(fail)?;
    let mut warnings = Vec::new();
    let line = match req.what {
        What::Dist => format!("dist={dist}"),
        What::Count => {
            let c = countlabel::query_count_avoiding_fast(&ls, &lt, &refs).map_err(fail)?;
            format!("dist={dist} count={c}")
        }
        What::Preserved => {
            if let CountMode::Mod(p) = archive.header.mode {
                let need = suggested_prime_bits(req.faults.len(), archive.len());
                let have = 64 - p.leading_zeros();
                if have < need {
                    warnings.push(format!("{have}-bit prime is below the suggested {need} bits for {} faults", req.faults.len()));
                }
            }
            let keep = countlabel::query_length_preserved(&ls, &lt, &refs).map_err(fail)?;
            format!("preserved={keep}")
        }
    };
    Ok((line, warnings))
}

fn parse_faults(a: &QueryArgs) -> Result<Vec<usize>, CliError> {
    if let Some(f) = a.fault {
        return Ok(vec![f]);
    }
    let Some(list) = &a.faults else { return Ok(Vec::new()) };
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| CliError::usage(format!("bad fault id {s:?}"))))
        .collect()
}

pub(super) fn cmd_query(ctx: &mut Ctx, a: QueryArgs) -> Result<(), CliError> {
    let req = QueryRequest { u: a.u, v: a.v, faults: parse_faults(&a)?, what: a.what };
    let file = File::open(&a.labels).map_err(|e| CliError::io(&a.labels, e))?;
    // unbuffered, so only the index and the named labels are read
    let mut archive = ArchiveReader::open(file).map_err(archive_error)?;
    let (line, warnings) = run_query(&mut archive, &req)?;
    warnings.iter().for_each(|w| ctx.warn(w));
    ctx.say(line)
}
