//! Snapshot and diagnostics serialization.
//!
//! A snapshot is a flat little-endian binary array of 64-bit floats in
//! component order `e_x, e_y, e_z, b_x, b_y, b_z` (each component x-fastest)
//! plus a JSON sidecar describing the grid and layout.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde_json::json;

use crate::{Error, Result};

use super::evolve::StepDiagnostics;
use super::grid::{GridSpec, VectorField};
use super::state::FieldState;

const COMPONENTS: [&str; 6] = ["e_x", "e_y", "e_z", "b_x", "b_y", "b_z"];

/// Write `<stem>.bin` and `<stem>.json` under `dir`.
pub fn write_snapshot(dir: &Path, stem: &str, state: &FieldState) -> Result<()> {
    let grid = state.grid();
    let mut w = BufWriter::new(File::create(dir.join(format!("{stem}.bin")))?);
    for field in [&state.e, &state.b] {
        for c in 0..3 {
            for v in field.comp(c) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;

    let sidecar = json!({
        "grid": { "n": grid.n(), "l": grid.l() },
        "components": COMPONENTS,
        "dtype": "f64",
        "endianness": "little",
        "layout": "x-fastest",
    });
    let mut meta = BufWriter::new(File::create(dir.join(format!("{stem}.json")))?);
    serde_json::to_writer_pretty(&mut meta, &sidecar)?;
    meta.write_all(b"\n")?;
    meta.flush()?;
    Ok(())
}

pub fn read_snapshot(dir: &Path, stem: &str) -> Result<FieldState> {
    let meta: serde_json::Value =
        serde_json::from_reader(BufReader::new(File::open(dir.join(format!("{stem}.json")))?))?;
    let n = meta["grid"]["n"]
        .as_u64()
        .ok_or_else(|| Error::Config("snapshot sidecar missing grid.n".into()))? as usize;
    let l = meta["grid"]["l"]
        .as_f64()
        .ok_or_else(|| Error::Config("snapshot sidecar missing grid.l".into()))?;
    let grid = GridSpec::new(n, l)?;

    let mut r = BufReader::new(File::open(dir.join(format!("{stem}.bin")))?);
    let read_component = |r: &mut BufReader<File>| -> Result<Vec<f64>> {
        let mut buf = vec![0u8; grid.points() * 8];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect())
    };
    let e = VectorField::from_components(
        grid,
        [
            read_component(&mut r)?,
            read_component(&mut r)?,
            read_component(&mut r)?,
        ],
    )?;
    let b = VectorField::from_components(
        grid,
        [
            read_component(&mut r)?,
            read_component(&mut r)?,
            read_component(&mut r)?,
        ],
    )?;
    Ok(FieldState { e, b })
}

/// Columns: `t,energy,helicity,div_e,div_b`.
pub fn write_diagnostics_csv<W: Write>(mut w: W, rows: &[StepDiagnostics]) -> std::io::Result<()> {
    writeln!(w, "t,energy,helicity,div_e,div_b")?;
    for row in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            row.t, row.energy, row.helicity, row.div_e, row.div_b
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_roundtrip_is_exact() {
        let grid = GridSpec::new(8, 1.0).unwrap();
        let state = FieldState::plane_wave(grid);
        let dir = tempfile::tempdir().unwrap();
        write_snapshot(dir.path(), "state", &state).unwrap();
        let back = read_snapshot(dir.path(), "state").unwrap();
        assert_eq!(state, back);
    }

    #[test]
    fn diagnostics_csv_header() {
        let rows = vec![StepDiagnostics {
            t: 0.0,
            energy: 1.0,
            helicity: 0.5,
            div_e: 0.0,
            div_b: 0.0,
        }];
        let mut buf = Vec::new();
        write_diagnostics_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,energy,helicity,div_e,div_b\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
