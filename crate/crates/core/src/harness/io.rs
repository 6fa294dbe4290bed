//! Snapshots (JSON header plus raw little-endian `f64` payload), budget
//! time series and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::EnergyBudgetRow;
use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::models::State;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub n: usize,
    pub period: f64,
    pub kind: FieldKind,
    pub time: f64,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl FieldData {
    pub fn grid(&self) -> &Grid {
        match self {
            FieldData::Scalar(f) => f.grid(),
            FieldData::Vector(f) => f.grid(),
        }
    }

    pub fn kind(&self) -> FieldKind {
        match self {
            FieldData::Scalar(_) => FieldKind::Scalar,
            FieldData::Vector(_) => FieldKind::Vector,
        }
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn strip_suffix(path: &Path, suffix: &str) -> Option<PathBuf> {
    path.to_str().and_then(|s| s.strip_suffix(suffix)).map(PathBuf::from)
}

fn snapshot_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Snapshot { path: path.to_path_buf(), reason: reason.into() }
}

/// Writes `<stem>.json` and `<stem>.bin`; returns both paths.
pub fn write_field(stem: &Path, name: &str, time: f64, data: &FieldData) -> Result<Vec<PathBuf>> {
    let grid = data.grid();
    let header = SnapshotHeader { n: grid.n(), period: grid.period(), kind: data.kind(), time, name: name.to_string() };
    let header_path = with_suffix(stem, ".json");
    let payload_path = with_suffix(stem, ".bin");
    fs::write(&header_path, serde_json::to_string_pretty(&header)?)?;

    let blocks: Vec<&[f64]> = match data {
        FieldData::Scalar(f) => vec![f.values()],
        FieldData::Vector(v) => vec![v.x(), v.y()],
    };
    let mut bytes = Vec::with_capacity(blocks.len() * grid.len() * 8);
    for block in blocks {
        for value in block {
            bytes.extend_from_slice(&value.to_le_bytes());
        }
    }
    fs::write(&payload_path, bytes)?;
    Ok(vec![header_path, payload_path])
}

/// Reads a field from its header path (`<stem>.json`) or its stem.
pub fn read_field(path: &Path) -> Result<(SnapshotHeader, FieldData)> {
    let stem = strip_suffix(path, ".json").unwrap_or_else(|| path.to_path_buf());
    let header_path = with_suffix(&stem, ".json");
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(&header_path)?)
        .map_err(|e| snapshot_error(&header_path, e.to_string()))?;
    let grid = Grid::new(header.n, header.period).map_err(|e| snapshot_error(&header_path, e.to_string()))?;

    let payload_path = with_suffix(&stem, ".bin");
    let bytes = fs::read(&payload_path)?;
    let blocks = match header.kind {
        FieldKind::Scalar => 1,
        FieldKind::Vector => 2,
    };
    let expected = blocks * grid.len() * 8;
    if bytes.len() != expected {
        return Err(snapshot_error(&payload_path, format!("payload has {} bytes, header implies {expected}", bytes.len())));
    }
    let mut values: Vec<f64> =
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let data = match header.kind {
        FieldKind::Scalar => FieldData::Scalar(ScalarField::from_values(grid, values)?),
        FieldKind::Vector => {
            let y = values.split_off(grid.len());
            FieldData::Vector(VectorField::from_values(grid, values, y)?)
        }
    };
    Ok((header, data))
}

/// Writes the velocity as `<stem>.v.{json,bin}` and the pressure as
/// `<stem>.p.{json,bin}`.
pub fn write_snapshot(state: &State, stem: &Path) -> Result<Vec<PathBuf>> {
    let mut files = write_field(&with_suffix(stem, ".v"), "v", state.time, &FieldData::Vector(state.v.clone()))?;
    files.extend(write_field(&with_suffix(stem, ".p"), "p", state.time, &FieldData::Scalar(state.p.clone()))?);
    Ok(files)
}

/// Reads a state from its stem or from either of its header paths.
pub fn read_snapshot(path: &Path) -> Result<State> {
    let stem = [".v.json", ".p.json", ".v", ".p"]
        .iter()
        .find_map(|s| strip_suffix(path, s))
        .unwrap_or_else(|| path.to_path_buf());
    let (vh, v) = read_field(&with_suffix(&stem, ".v"))?;
    let (ph, p) = read_field(&with_suffix(&stem, ".p"))?;
    let (FieldData::Vector(v), FieldData::Scalar(p)) = (v, p) else {
        return Err(snapshot_error(&stem, "expected a vector `v` and a scalar `p`"));
    };
    if vh.time.to_bits() != ph.time.to_bits() || v.grid() != p.grid() {
        return Err(snapshot_error(&stem, "velocity and pressure headers disagree"));
    }
    State::new(v, p, vh.time)
}

/// Writes budget rows as CSV with 17 significant digits.
pub fn write_timeseries(rows: &[EnergyBudgetRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(EnergyBudgetRow::CSV_HEADER)?;
    for row in rows {
        w.write_record(row.values().iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Generic numeric table with the same rendering as the budget series.
pub(crate) fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn file_checksum(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: serde_json::Value,
    pub code_version: String,
    pub wall_time_seconds: f64,
    /// SHA-256 of every output, keyed by path relative to the run directory.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_NAME))?)?)
    }
}

/// Checksums `files` and writes `manifest.json` into `dir`. Call last, once
/// every output exists.
pub fn write_manifest(
    dir: &Path,
    config: serde_json::Value,
    wall_time_seconds: f64,
    files: &[PathBuf],
) -> Result<RunManifest> {
    let mut sums = BTreeMap::new();
    for file in files {
        let key = file.strip_prefix(dir).unwrap_or(file).to_string_lossy().replace('\\', "/");
        sums.insert(key, file_checksum(file)?);
    }
    let manifest = RunManifest {
        config,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds,
        files: sums,
    };
    write_json(&dir.join(MANIFEST_NAME), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(g: Grid, seed: f64) -> State {
        let v = VectorField::from_fn(g, |x, y| [(x * seed).sin() / 3.0, (y + seed).cos() * 1e-7]);
        let p = ScalarField::from_fn(g, |x, y| (x - y * seed).exp());
        State::new(v, p, seed * 0.1).unwrap()
    }

    #[test]
    fn header_layout() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::periodic_2pi(4).unwrap();
        let files = write_field(&dir.path().join("f"), "v", 0.5, &FieldData::Vector(state(g, 1.0).v)).unwrap();
        assert_eq!(fs::metadata(&files[1]).unwrap().len(), 2 * 16 * 8);
        let header: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(header["kind"], "vector");
        assert_eq!(header["n"], 4);
        assert_eq!(header["name"], "v");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn snapshot_roundtrip_is_bitwise(seed in -5.0f64..5.0, n in 4usize..12) {
            let dir = tempfile::tempdir().unwrap();
            let s = state(Grid::new(n, 1.7).unwrap(), seed);
            let stem = dir.path().join("snap.000");
            write_snapshot(&s, &stem).unwrap();
            let back = read_snapshot(&stem).unwrap();
            prop_assert_eq!(back.time.to_bits(), s.time.to_bits());
            prop_assert!(back.v.x().iter().chain(back.v.y()).zip(s.v.x().iter().chain(s.v.y()))
                .all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert!(back.p.values().iter().zip(s.p.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
            let via_header = read_snapshot(&with_suffix(&stem, ".p.json")).unwrap();
            prop_assert_eq!(via_header, back);
        }
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("s");
        let files = write_snapshot(&state(Grid::periodic_2pi(8).unwrap(), 1.0), &stem).unwrap();
        let bytes = fs::read(&files[1]).unwrap();
        fs::write(&files[1], &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_snapshot(&stem), Err(Error::Snapshot { .. })));
    }

    #[test]
    fn csv_rows_and_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let row = EnergyBudgetRow {
            time: 0.1,
            e_kin: 1.0 / 3.0,
            e_press: 0.0,
            dissipation: 2.0,
            injection: 0.0,
            defect_predicted: -1e-300,
            residual: 5e-17,
        };
        write_timeseries(&[row, row], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "time,e_kin,e_press,dissipation,injection,defect_predicted,residual");
        assert_eq!(lines.len(), 3);
        let fields: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields, row.values().to_vec());
    }

    #[test]
    fn manifest_checksums_match_files() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.txt");
        fs::write(&a, "abc").unwrap();
        let m = write_manifest(dir.path(), serde_json::json!({"n": 4}), 0.25, std::slice::from_ref(&a)).unwrap();
        assert_eq!(m.files["a.txt"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(RunManifest::load(dir.path()).unwrap(), m);
    }
}
