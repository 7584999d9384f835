//! CSV tables, binary trajectory snapshots and JSON input files.

use crate::error::{KdvError, Result};
use crate::sim::{StateField, TimeSeries, Trajectory};
use crate::spectral::SweepReport;
use serde::de::DeserializeOwned;
use std::path::Path;

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(KdvError::numerical(format!("csv row has {} fields, header {}", r.len(), header.len())));
        }
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| KdvError::Io(e.into_error()))
}

fn csv_err(e: csv::Error) -> KdvError {
    KdvError::Io(std::io::Error::other(e.to_string()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    std::fs::write(path, csv_bytes(header, rows)?)?;
    Ok(())
}

/// Header and rows of a CSV file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

pub const TRAJECTORY_CSV_HEADER: [&str; 4] = ["t", "x", "eta", "v"];

/// Long format, one row per saved time and interior grid point.
pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    let xs = traj.grid.points();
    let mut rows = Vec::with_capacity(traj.snapshots.len() * xs.len());
    for (t, y) in &traj.snapshots {
        for (i, &x) in xs.iter().enumerate() {
            rows.push(vec![num(*t), num(x), num(y.eta[i]), num(y.v[i])]);
        }
    }
    rows
}

pub const SWEEP_CSV_HEADER: [&str; 2] = ["p", "sigma_min"];

pub fn sweep_rows(report: &SweepReport) -> Vec<Vec<String>> {
    report.points.iter().map(|&(p, s)| vec![num(p), num(s)]).collect()
}

pub const CONTROL_CSV_HEADER: [&str; 2] = ["t", "g2"];

pub fn control_rows(signal: &TimeSeries) -> Vec<Vec<String>> {
    signal.values.iter().enumerate().map(|(i, &g)| vec![num(i as f64 * signal.dt), num(g)]).collect()
}

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"KDVKDV01";
pub const SNAPSHOT_HEADER_BYTES: usize = 80;

/// Decoded snapshot file. Header: magic, n (u64), L, dt, T (f64), frame count (u64), zero
/// padding to 80 bytes, all little-endian; then row-major frames [t, η₁..ηₙ, v₁..vₙ].
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub n: usize,
    pub l: f64,
    pub dt: f64,
    pub t_end: f64,
    pub frames: Vec<(f64, StateField)>,
}

pub fn encode_snapshots(traj: &Trajectory) -> Vec<u8> {
    let n = traj.grid.n;
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_BYTES + traj.snapshots.len() * (2 * n + 1) * 8);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for x in [traj.grid.l, traj.dt, traj.t_end] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&(traj.snapshots.len() as u64).to_le_bytes());
    out.resize(SNAPSHOT_HEADER_BYTES, 0);
    for (t, y) in &traj.snapshots {
        for x in std::iter::once(t).chain(&y.eta).chain(&y.v) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_snapshots(bytes: &[u8]) -> Result<SnapshotFile> {
    let bad = |m: &str| KdvError::validation(format!("snapshot file: {m}"));
    if bytes.len() < SNAPSHOT_HEADER_BYTES || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("missing KDVKDV01 header"));
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(1)) as usize;
    let (l, dt, t_end) = (f64::from_le_bytes(word(2)), f64::from_le_bytes(word(3)), f64::from_le_bytes(word(4)));
    let count = u64::from_le_bytes(word(5)) as usize;
    let frame = (2 * n + 1) * 8;
    if bytes.len() != SNAPSHOT_HEADER_BYTES + count * frame {
        return Err(bad("length does not match header"));
    }
    let frames = bytes[SNAPSHOT_HEADER_BYTES..]
        .chunks_exact(frame)
        .map(|c| {
            let v: Vec<f64> = c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
            (v[0], StateField { eta: v[1..=n].to_vec(), v: v[n + 1..].to_vec() })
        })
        .collect();
    Ok(SnapshotFile { n, l, dt, t_end, frames })
}

pub fn write_snapshots(path: &Path, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, encode_snapshots(traj))?;
    Ok(())
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotFile> {
    decode_snapshots(&read_input(path, "snapshot file")?)
}

fn read_input(path: &Path, what: &str) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => KdvError::validation(format!("{what}: file not found: {}", path.display())),
        _ => KdvError::validation(format!("{what}: cannot read {}: {e}", path.display())),
    })
}

/// Deserialize JSON text, reporting the offending field path.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            KdvError::validation(format!("{what}: {inner}"))
        } else {
            KdvError::validation(format!("{what}: at `{path}`: {inner}"))
        }
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let bytes = read_input(path, what)?;
    let text = String::from_utf8(bytes).map_err(|_| KdvError::validation(format!("{what}: not UTF-8")))?;
    parse_json(&text, what)
}

/// A JSON array of numbers.
pub fn read_vector(path: &Path, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = read_json(path, what)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(KdvError::validation(format!("{what}: non-finite entry")));
    }
    Ok(v)
}
