//! Files written by the CLI: JSON reports, CSV tables, gnuplot data and the
//! plain-text summary.

use opuc::report::VerificationReport;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Write through a sibling temp file and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

pub fn to_json<T: Serialize>(v: &T) -> io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(io::Error::other)?;
    out.push(b'\n');
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the reports with the runtime field cleared.
pub fn determinism_hash(reports: &[VerificationReport]) -> io::Result<String> {
    let stripped: Vec<VerificationReport> = reports
        .iter()
        .cloned()
        .map(|mut r| {
            r.runtime_ms = 0;
            r
        })
        .collect();
    Ok(sha256_hex(&serde_json::to_vec(&stripped).map_err(io::Error::other)?))
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub suites: usize,
    pub reports: usize,
    pub checks: usize,
    pub failed_checks: usize,
    pub failed_reports: usize,
}

impl Summary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let mut names: Vec<&str> = reports.iter().map(|r| r.suite.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        Summary {
            suites: names.len(),
            reports: reports.len(),
            checks: reports.iter().map(|r| r.checks.len()).sum(),
            failed_checks: reports.iter().flat_map(|r| &r.checks).filter(|c| !c.pass).count(),
            failed_reports: reports.iter().filter(|r| !r.passed()).count(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Aggregate<'a> {
    pub schema: u32,
    pub config_hash: String,
    pub determinism_hash: String,
    pub summary: Summary,
    pub reports: &'a [VerificationReport],
}

pub fn format_params(p: &BTreeMap<String, f64>) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

pub fn summary_table(reports: &[VerificationReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:<12} {:<28} {:>6} {:>6}  {:>10} {:>10}  worst check",
        "suite", "family", "params", "checks", "failed", "residual", "tolerance"
    );
    for r in reports {
        let failed = r.checks.iter().filter(|c| !c.pass).count();
        let (res, tol, name) = match r.worst() {
            Some(c) => (format!("{:.2e}", c.residual), format!("{:.0e}", c.tolerance), c.name.as_str()),
            None => ("-".into(), "-".into(), ""),
        };
        let _ = writeln!(
            s,
            "{:<20} {:<12} {:<28} {:>6} {:>6}  {:>10} {:>10}  {}",
            r.suite,
            r.family,
            format_params(&r.params),
            r.checks.len(),
            failed,
            res,
            tol,
            name
        );
    }
    let sm = Summary::of(reports);
    let _ = writeln!(
        s,
        "{} suites, {} reports, {} checks, {} failed",
        sm.suites, sm.reports, sm.checks, sm.failed_checks
    );
    s
}

pub fn checks_csv(reports: &[VerificationReport]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["suite", "anchor", "family", "params", "check", "residual", "scale", "tolerance", "pass"])?;
    for r in reports {
        let params = format_params(&r.params);
        for c in &r.checks {
            w.write_record([
                r.suite.as_str(),
                r.anchor.as_str(),
                r.family.as_str(),
                params.as_str(),
                c.name.as_str(),
                &c.residual.to_string(),
                &c.scale.to_string(),
                &c.tolerance.to_string(),
                &c.pass.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

/// One `<suite>.dat` per suite: a block per (family, check) with rows `n residual tolerance`,
/// blocks separated by two blank lines for gnuplot's `index`.
pub fn gnuplot_files(reports: &[VerificationReport]) -> Vec<(PathBuf, String)> {
    let mut by_suite: BTreeMap<&str, BTreeMap<(String, String), Vec<(f64, f64, f64)>>> = BTreeMap::new();
    for r in reports {
        let n = r.params.get("n").copied().unwrap_or(f64::NAN);
        let others: BTreeMap<_, _> = r.params.iter().filter(|(k, _)| *k != "n").map(|(k, v)| (k.clone(), *v)).collect();
        let series = format!("{} {}", r.family, format_params(&others));
        for c in &r.checks {
            by_suite
                .entry(r.suite.as_str())
                .or_default()
                .entry((series.clone(), c.name.clone()))
                .or_default()
                .push((n, c.residual, c.tolerance));
        }
    }
    by_suite
        .into_iter()
        .map(|(suite, blocks)| {
            let mut s = format!("# {suite}: n residual tolerance\n");
            for ((series, check), mut rows) in blocks {
                rows.sort_by(|a, b| a.0.total_cmp(&b.0));
                let _ = writeln!(s, "# {series} | {check}");
                for (n, res, tol) in rows {
                    let _ = writeln!(s, "{n} {res:e} {tol:e}");
                }
                s.push_str("\n\n");
            }
            (PathBuf::from(format!("{suite}.dat")), s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use opuc::report::Check;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn determinism_hash_ignores_runtime() {
        let mut r = VerificationReport::new("cd", "christoffel-darboux", "cj");
        r.push(Check::new("x", 1e-12, 1e-11));
        let mut s = r.clone();
        s.runtime_ms = 99;
        assert_eq!(determinism_hash(&[r.clone()]).unwrap(), determinism_hash(&[s]).unwrap());
        let mut t = r.clone();
        t.checks[0].residual = 2e-12;
        assert_ne!(determinism_hash(&[r]).unwrap(), determinism_hash(&[t]).unwrap());
    }

    #[test]
    fn gnuplot_blocks_sorted_by_n() {
        let mk = |n: f64, res: f64| {
            let mut r = VerificationReport::new("delta", "a", "cj").param("n", n).param("a", 1.0);
            r.push(Check::new("c", res, 1.0));
            r
        };
        let files = gnuplot_files(&[mk(8.0, 2e-3), mk(4.0, 1e-3)]);
        assert_eq!(files.len(), 1);
        let body = &files[0].1;
        assert!(body.find("4 1e-3").unwrap() < body.find("8 2e-3").unwrap());
    }
}
