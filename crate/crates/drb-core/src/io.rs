//! File formats: circuit suites and datasets as JSON-lines with a header
//! record, reports as single JSON documents, and plot-ready CSV tables.
//! Every file carries the schema version and the hash of the generating
//! configuration so downstream steps can detect mismatched inputs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::DepthPoint;
use crate::engine::RunResult;
use crate::error::{Error, Result};
use crate::protocol::RbCircuit;
use crate::scramble::{ScramblingReport, TRACKED_WEIGHTS};
use crate::SCHEMA_VERSION;

/// First record of every file this module writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHeader {
    pub schema_version: u32,
    /// File kind tag, e.g. "suite", "dataset", "fit-report".
    pub kind: String,
    /// Hex SHA-256 of the generating configuration text.
    pub config_hash: String,
}

impl FileHeader {
    pub fn new(kind: &str, config_hash: &str) -> FileHeader {
        FileHeader {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            config_hash: config_hash.to_string(),
        }
    }

    fn check(&self, kind: &str) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.kind != kind {
            return Err(Error::invalid(format!(
                "file kind {:?} (expected {kind:?})",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Hex SHA-256 of a configuration's text.
pub fn config_hash(config_text: &str) -> String {
    let mut h = Sha256::new();
    h.update(config_text.as_bytes());
    format!("{:x}", h.finalize())
}

fn json_err(e: serde_json::Error) -> Error {
    Error::invalid(format!("malformed JSON: {e}"))
}

/// Write a circuit suite: header line, then one JSON line per circuit.
pub fn write_suite(path: &Path, config_hash: &str, circuits: &[RbCircuit]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &FileHeader::new("suite", config_hash)).map_err(json_err)?;
    w.write_all(b"\n")?;
    for c in circuits {
        serde_json::to_writer(&mut w, c).map_err(json_err)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a circuit suite and validate its header.
pub fn read_suite(path: &Path) -> Result<(FileHeader, Vec<RbCircuit>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::invalid("empty suite file"))??;
    let header: FileHeader = serde_json::from_str(&first).map_err(json_err)?;
    header.check("suite")?;
    let mut circuits = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        circuits.push(serde_json::from_str(&line).map_err(json_err)?);
    }
    Ok((header, circuits))
}

/// Write an execution dataset (header + the run result) as one JSON document.
pub fn write_dataset(path: &Path, config_hash: &str, result: &RunResult) -> Result<()> {
    write_report(path, "dataset", config_hash, result)
}

pub fn read_dataset(path: &Path) -> Result<(FileHeader, RunResult)> {
    read_report(path, "dataset")
}

#[derive(Serialize, Deserialize)]
struct Document<T> {
    header: FileHeader,
    report: T,
}

/// Write any serializable report wrapped with a header, pretty-printed.
pub fn write_report<T: Serialize>(
    path: &Path,
    kind: &str,
    config_hash: &str,
    report: &T,
) -> Result<()> {
    let doc = Document {
        header: FileHeader::new(kind, config_hash),
        report,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(json_err)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Read a report of the given kind, validating the header.
pub fn read_report<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<(FileHeader, T)> {
    let doc: Document<T> =
        serde_json::from_reader(BufReader::new(File::open(path)?)).map_err(json_err)?;
    doc.header.check(kind)?;
    Ok((doc.header, doc.report))
}

/// Plot table for the decay curve: one row per depth, (d, Ŝ_d, σ, …).
pub fn write_depth_csv(path: &Path, points: &BTreeMap<usize, DepthPoint>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "d,s_mean,sigma,circuits,shots_per_circuit")?;
    for p in points.values() {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.d, p.mean, p.sigma, p.circuits, p.shots_per_circuit
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Plot table for operator spreading: k, E[W], then K(w, k) with Wilson
/// bounds for each tracked weight.
pub fn write_scramble_csv(path: &Path, report: &ScramblingReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut cols = vec!["k".to_string(), "e_w".to_string()];
    for wt in TRACKED_WEIGHTS {
        cols.push(format!("k{wt}"));
        cols.push(format!("k{wt}_lo"));
        cols.push(format!("k{wt}_hi"));
    }
    writeln!(w, "{}", cols.join(","))?;
    for row in &report.rows {
        let mut vals = vec![row.k.to_string(), report.expected_weight[row.k].to_string()];
        for est in &row.k_cap {
            vals.push(est.estimate.to_string());
            vals.push(est.lo.to_string());
            vals.push(est.hi.to_string());
        }
        writeln!(w, "{}", vals.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::RbDataset;
    use crate::connectivity::Connectivity;
    use crate::engine::run_exact;
    use crate::noise::{ErrorModel, ErrorModelKind};
    use crate::protocol::{generate_direct_rb, ExperimentDesign};
    use crate::sampling::{OneQubitPool, SamplingDistribution};
    use crate::scramble::{propagate_weight_stats, ScrambleOptions};

    fn small_suite() -> Vec<RbCircuit> {
        let design = ExperimentDesign {
            n: 2,
            depths: vec![0, 2, 4],
            k_d: 2,
            n_shots: 10,
            omega: SamplingDistribution::EdgeGrab {
                xi_bar: 0.5,
                pool: OneQubitPool::Clifford24,
            },
            randomize_target: true,
            rng_seed: 5,
        };
        generate_direct_rb(&design, &Connectivity::all_to_all(2)).unwrap()
    }

    #[test]
    fn suite_roundtrip_and_determinism() {
        let circuits = small_suite();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.jsonl");
        let p2 = dir.path().join("b.jsonl");
        let hash = config_hash("config text");
        write_suite(&p1, &hash, &circuits).unwrap();
        write_suite(&p2, &hash, &circuits).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        let (header, back) = read_suite(&p1).unwrap();
        assert_eq!(header.schema_version, SCHEMA_VERSION);
        assert_eq!(header.config_hash, hash);
        assert_eq!(back, circuits);
    }

    #[test]
    fn dataset_roundtrip() {
        let circuits = small_suite();
        let model = ErrorModel::new(2, ErrorModelKind::GlobalDepolarizing { lambda: 0.98 }).unwrap();
        let result = run_exact(&circuits, &model).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data.json");
        write_dataset(&p, "h", &result).unwrap();
        let (_, back) = read_dataset(&p).unwrap();
        assert_eq!(back, result);
    }

    #[test]
    fn report_kind_and_schema_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_report(&p, "fit-report", "h", &vec![1.0, 2.0]).unwrap();
        let (_, back): (_, Vec<f64>) = read_report(&p, "fit-report").unwrap();
        assert_eq!(back, vec![1.0, 2.0]);
        assert!(matches!(
            read_report::<Vec<f64>>(&p, "dataset"),
            Err(Error::InvalidArgument(_))
        ));

        // Tamper with the schema version.
        let text = std::fs::read_to_string(&p)
            .unwrap()
            .replace(&format!("\"schema_version\": {SCHEMA_VERSION}"), "\"schema_version\": 999");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(
            read_report::<Vec<f64>>(&p, "fit-report"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn config_hash_is_sha256() {
        // Freeze against the well-known SHA-256 of the empty string and of
        // "abc".
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            config_hash("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn depth_csv_contents() {
        let circuits = small_suite();
        let model = ErrorModel::new(2, ErrorModelKind::GlobalDepolarizing { lambda: 0.98 }).unwrap();
        let result = run_exact(&circuits, &model).unwrap();
        let ds = RbDataset::from_run(2, &result);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("depths.csv");
        write_depth_csv(&p, &ds.depth_summary()).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "d,s_mean,sigma,circuits,shots_per_circuit");
        assert_eq!(lines.len(), 4); // header + 3 depths
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn scramble_csv_contents() {
        let conn = Connectivity::all_to_all(3);
        let opts = ScrambleOptions {
            k_max: 4,
            trials: 200,
            ..ScrambleOptions::default()
        };
        let report = propagate_weight_stats(&conn, &opts, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scramble.csv");
        write_scramble_csv(&p, &report).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,e_w,k1,k1_lo,k1_hi,k2,k2_lo,k2_hi,k3,k3_lo,k3_hi");
        assert_eq!(lines.len(), 1 + report.rows.len());
    }
}
