//! File formats. Floats in CSV are written with `{:.16e}` (17 significant
//! digits) so every value reads back bit-exact; JSON uses serde_json's
//! shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rdsir_core::pattern::CosineBasis;
use rdsir_core::pde::{FieldState, Grid1D};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `{:.16e}` of one value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV with `header` and rows of floats.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `t,x,S,I`, time-major.
pub fn write_spacetime_csv(path: &Path, grid: &Grid1D, snaps: &[FieldState]) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,x,S,I")?;
    let xs = grid.xs();
    let mut line = String::new();
    for snap in snaps {
        for (j, x) in xs.iter().enumerate() {
            line.clear();
            let _ = write!(
                line,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                snap.t, x, snap.s[j], snap.i[j]
            );
            writeln!(w, "{line}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sidecar of `spacetime.bin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobHeader {
    /// Always `f64-le`.
    pub dtype: String,
    /// Record layout per snapshot.
    pub layout: String,
    pub ell: f64,
    pub n: usize,
    pub snapshots: usize,
}

pub const BLOB_LAYOUT: &str = "per snapshot: t, S[0..n], I[0..n]";

/// Little-endian doubles, one record of `1 + 2n` values per snapshot.
pub fn write_spacetime_blob(dir: &Path, grid: &Grid1D, snaps: &[FieldState]) -> Result<(), CliError> {
    let mut w = BufWriter::new(fs::File::create(dir.join("spacetime.bin"))?);
    for snap in snaps {
        w.write_all(&snap.t.to_le_bytes())?;
        for v in snap.s.iter().chain(&snap.i) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    write_json(
        &dir.join("spacetime.json"),
        &BlobHeader {
            dtype: "f64-le".into(),
            layout: BLOB_LAYOUT.into(),
            ell: grid.ell,
            n: grid.n,
            snapshots: snaps.len(),
        },
    )
}

/// Reads `spacetime.bin` (with its sidecar) or `spacetime.csv` from `dir`.
pub fn read_spacetime(dir: &Path) -> Result<(Grid1D, Vec<FieldState>), CliError> {
    let bin = dir.join("spacetime.bin");
    if bin.exists() {
        let header: BlobHeader = serde_json::from_str(&fs::read_to_string(dir.join("spacetime.json"))?)?;
        if header.dtype != "f64-le" || header.layout != BLOB_LAYOUT {
            return Err(CliError::Input(format!(
                "unsupported blob layout `{}` / `{}`",
                header.dtype, header.layout
            )));
        }
        let bytes = fs::read(bin)?;
        let rec = 1 + 2 * header.n;
        if bytes.len() != 8 * rec * header.snapshots {
            return Err(CliError::Input(format!(
                "spacetime.bin has {} bytes, sidecar implies {}",
                bytes.len(),
                8 * rec * header.snapshots
            )));
        }
        let vals: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let snaps = vals
            .chunks_exact(rec)
            .map(|r| FieldState {
                t: r[0],
                s: r[1..=header.n].to_vec(),
                i: r[header.n + 1..].to_vec(),
            })
            .collect();
        return Ok((Grid1D::new(header.ell, header.n)?, snaps));
    }
    read_spacetime_csv(&dir.join("spacetime.csv"))
}

fn read_spacetime_csv(path: &Path) -> Result<(Grid1D, Vec<FieldState>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("t,x,S,I") {
        return Err(CliError::Input(format!("{} lacks the t,x,S,I header", path.display())));
    }
    let mut snaps: Vec<FieldState> = Vec::new();
    let mut x_last = 0.0f64;
    for (no, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Input(format!("row {}: {e}", no + 2)))?;
        let [t, x, s, i] = row[..] else {
            return Err(CliError::Input(format!("row {} has {} columns", no + 2, row.len())));
        };
        match snaps.last_mut() {
            Some(cur) if cur.t == t => {
                cur.s.push(s);
                cur.i.push(i);
            }
            _ => snaps.push(FieldState {
                t,
                s: vec![s],
                i: vec![i],
            }),
        }
        x_last = x_last.max(x);
    }
    let n = snaps
        .first()
        .map(|s| s.s.len())
        .ok_or_else(|| CliError::Input("empty space-time file".into()))?;
    if snaps.iter().any(|s| s.s.len() != n) {
        return Err(CliError::Input("snapshots have differing point counts".into()));
    }
    Ok((Grid1D::new(x_last / std::f64::consts::PI, n)?, snaps))
}

/// `t,k,a_k` rows of the infected-field cosine amplitudes.
pub fn write_modes_csv(path: &Path, grid: &Grid1D, snaps: &[FieldState], k_max: usize) -> Result<(), CliError> {
    use rayon::prelude::*;
    let basis = CosineBasis::new(grid, k_max);
    let spectra: Vec<_> = snaps.par_iter().map(|s| (s.t, basis.project(&s.i))).collect();
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,k,a_k")?;
    for (t, sp) in &spectra {
        for (k, a) in sp.amplitudes.iter().enumerate() {
            writeln!(w, "{t:.16e},{k},{a:.16e}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Name embedded in every raster.
pub const COLORMAP_ID: &str = "rdsir-heat-1";

/// Anchor colours of the map, evenly spaced on [0, 1]: dark blue, teal,
/// green, yellow, dark red.
const ANCHORS: [[f64; 3]; 5] = [
    [20.0, 20.0, 90.0],
    [30.0, 130.0, 150.0],
    [90.0, 190.0, 80.0],
    [250.0, 220.0, 40.0],
    [160.0, 20.0, 20.0],
];

/// Colour of `u` in [0, 1] under the fixed map.
pub fn colormap(u: f64) -> [u8; 3] {
    let u = if u.is_finite() { u.clamp(0.0, 1.0) } else { 0.0 };
    let pos = u * (ANCHORS.len() - 1) as f64;
    let lo = (pos.floor() as usize).min(ANCHORS.len() - 2);
    let frac = pos - lo as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let v = ANCHORS[lo][c] + frac * (ANCHORS[lo + 1][c] - ANCHORS[lo][c]);
        out[c] = v.round() as u8;
    }
    out
}

/// Binary PPM of one field: one column per grid point, one row per snapshot,
/// latest time on top. Values are scaled by the field's own min and max,
/// which are recorded in the header comment.
pub fn heatmap_ppm(snaps: &[FieldState], field: impl Fn(&FieldState) -> &[f64]) -> Vec<u8> {
    let width = snaps.first().map_or(0, |s| field(s).len());
    let height = snaps.len();
    let (lo, hi) = snaps
        .iter()
        .flat_map(|s| field(s).iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = hi - lo;
    let mut out = format!(
        "P6\n# colormap {COLORMAP_ID} min {} max {}\n{width} {height}\n255\n",
        fmt_f64(lo),
        fmt_f64(hi)
    )
    .into_bytes();
    out.reserve(3 * width * height);
    for snap in snaps.iter().rev() {
        for v in field(snap) {
            let u = if span > 0.0 { (v - lo) / span } else { 0.0 };
            out.extend_from_slice(&colormap(u));
        }
    }
    out
}
