//! Run manifests and CSV plumbing shared by the commands.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub graph_hash: Option<String>,
    pub fingerprint: Option<String>,
    pub r: Option<usize>,
    pub mode: String,
    pub prime: Option<u64>,
    /// Seconds since the epoch; excluded from the hash.
    pub started_at: u64,
    pub finished_at: Option<u64>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn hex64(x: u64) -> String {
    format!("{x:016x}")
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            seed,
            graph_hash: None,
            fingerprint: None,
            r: None,
            mode: "exact".to_string(),
            prime: None,
            started_at: now(),
            finished_at: None,
        }
    }

    /// Hash of everything except the timestamps, so reruns agree.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        let obj = v.as_object_mut().expect("manifest is an object");
        obj.remove("started_at");
        obj.remove("finished_at");
        let digest = Sha256::digest(v.to_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn write_next_to(&mut self, path: &Path) -> Result<(), CliError> {
        self.finished_at = Some(now());
        let mut v = serde_json::to_value(&*self).expect("manifest serializes");
        v.as_object_mut().unwrap().insert("manifest_hash".into(), self.hash().into());
        let text = serde_json::to_string_pretty(&v).expect("manifest serializes");
        std::fs::write(sidecar(path, "manifest.json"), text + "\n").map_err(|e| CliError::io(path, e))
    }
}

/// `foo.bin` → `foo.bin.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// CSV writer that prefixes every row with the manifest hash.
pub struct HashedCsv<W: Write> {
    inner: csv::Writer<W>,
    hash: String,
}

impl HashedCsv<File> {
    pub fn create(path: &Path, hash: &str, header: &[&str]) -> Result<HashedCsv<File>, CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        HashedCsv::new(file, hash, header)
    }
}

impl<W: Write> HashedCsv<W> {
    pub fn new(w: W, hash: &str, header: &[&str]) -> Result<HashedCsv<W>, CliError> {
        let mut inner = csv::Writer::from_writer(w);
        let mut row = vec!["manifest_hash"];
        row.extend_from_slice(header);
        inner.write_record(&row).map_err(CliError::csv)?;
        Ok(HashedCsv { inner, hash: hash.to_string() })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<(), CliError> {
        let mut row = vec![self.hash.as_str()];
        row.extend(fields.iter().map(|f| f.as_ref()));
        self.inner.write_record(&row).map_err(CliError::csv)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| CliError::failure(format!("writing CSV: {e}")))
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` below two distinct sizes.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_timestamps() {
        let mut a = RunManifest::new("gen", 7);
        let mut b = a.clone();
        a.started_at = 1;
        b.started_at = 2;
        b.finished_at = Some(5);
        assert_eq!(a.hash(), b.hash());
        b.seed = 8;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn slope_fit() {
        let s = loglog_slope(&[(4.0, 2.0), (16.0, 4.0), (64.0, 8.0)]).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(4.0, 2.0)]), None);
        assert_eq!(loglog_slope(&[(4.0, 2.0), (4.0, 3.0)]), None);
    }
}
