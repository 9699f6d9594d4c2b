//! CSV and JSON export helpers plus the output manifest.
//!
//! All writers format floats with Rust's shortest round-trip notation, so
//! identical data produces identical bytes.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ensemble::RealMatrix;
use crate::error::Result;
use crate::potential::{DensityField, PotentialGrid};
use crate::spectra::{ComplexSpectrum, SymmetrizedSpectrum};
use crate::stieltjes::DensityGrid;

/// SHA-256 hex digest of a serializable value's canonical JSON bytes.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn open_csv(path: &Path, header: &str) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{header}")?;
    Ok(out)
}

/// Row-major `i,j,value` dump of a matrix.
pub fn write_matrix_csv(path: &Path, matrix: &RealMatrix) -> Result<()> {
    let mut out = open_csv(path, "i,j,value")?;
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            writeln!(out, "{i},{j},{}", matrix.data[(i, j)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_complex_spectrum_csv(path: &Path, spectrum: &ComplexSpectrum) -> Result<()> {
    let mut out = open_csv(path, "re,im")?;
    for v in &spectrum.values {
        writeln!(out, "{},{}", v.re, v.im)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_symmetrized_csv(path: &Path, spectrum: &SymmetrizedSpectrum) -> Result<()> {
    let mut out = open_csv(path, "value")?;
    for v in &spectrum.values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Generic `x,y,value` grid dump (limit-law fields).
pub fn write_xy_grid_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut out = open_csv(path, "x,y,value")?;
    for (x, y, v) in rows {
        writeln!(out, "{x},{y},{v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_potential_csv(path: &Path, grid: &PotentialGrid) -> Result<()> {
    let mut out = open_csv(path, "z_re,z_im,U,variance,masked")?;
    let nx = grid.spec.nx();
    for iy in 0..grid.spec.ny() {
        for ix in 0..nx {
            let z = grid.spec.point(ix, iy);
            let k = iy * nx + ix;
            writeln!(
                out,
                "{},{},{},{},{}",
                z.re, z.im, grid.mean[k], grid.variance[k], grid.masked[k]
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_density_field_csv(path: &Path, field: &DensityField) -> Result<()> {
    let mut out = open_csv(path, "z_re,z_im,density")?;
    let nx = field.spec.nx();
    for iy in 0..field.spec.ny() {
        for ix in 0..nx {
            let z = field.spec.point(ix, iy);
            writeln!(out, "{},{},{}", z.re, z.im, field.values[iy * nx + ix])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_stieltjes_csv(path: &Path, grid: &DensityGrid) -> Result<()> {
    let mut out = open_csv(path, "x,eps,density,s_re,s_im,w_re,w_im,iters,residual")?;
    for (i, x) in grid.x.iter().enumerate() {
        match &grid.solutions[i] {
            Some(sol) => writeln!(
                out,
                "{x},{},{},{},{},{},{},{},{}",
                grid.eps,
                grid.density[i],
                sol.s.re,
                sol.s.im,
                sol.w.re,
                sol.w.im,
                sol.iterations,
                sol.residuals[0].max(sol.residuals[1]),
            )?,
            None => writeln!(out, "{x},{},{},,,,,,", grid.eps, grid.density[i])?,
        }
    }
    out.flush()?;
    Ok(())
}

/// Inventory of produced files with content hashes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl Manifest {
    /// Record a produced file (path stored relative to `root`).
    pub fn record(&mut self, root: &Path, path: &Path) -> Result<()> {
        let data = fs::read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&data);
        let rel = path.strip_prefix(root).unwrap_or(path);
        self.files.push(ManifestEntry {
            path: rel.to_string_lossy().into_owned(),
            sha256: hex_string(&hasher.finalize()),
            bytes: data.len() as u64,
        });
        Ok(())
    }

    pub fn write(&mut self, root: &Path) -> Result<PathBuf> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let path = root.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use nalgebra::dmatrix;

    #[test]
    fn matrix_csv_round_trip_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = RealMatrix::raw(dmatrix![1.0, 2.0; 3.0, 4.5]);
        write_matrix_csv(&path, &m).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "i,j,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4.5\n");
    }

    #[test]
    fn manifest_hashes_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let spectrum = ComplexSpectrum {
            values: vec![C64::new(1.0, -2.0)],
            n: 1,
        };
        write_complex_spectrum_csv(&path, &spectrum).unwrap();
        let mut manifest = Manifest::default();
        manifest.record(dir.path(), &path).unwrap();
        let mpath = manifest.write(dir.path()).unwrap();
        let loaded: Manifest =
            serde_json::from_str(&std::fs::read_to_string(mpath).unwrap()).unwrap();
        assert_eq!(loaded.files.len(), 1);
        assert_eq!(loaded.files[0].path, "s.csv");
        assert_eq!(loaded.files[0].sha256.len(), 64);
    }

    #[test]
    fn config_hash_is_stable() {
        let a = config_hash(&serde_json::json!({"n": 8, "rho": 0.5})).unwrap();
        let b = config_hash(&serde_json::json!({"n": 8, "rho": 0.5})).unwrap();
        assert_eq!(a, b);
        let c = config_hash(&serde_json::json!({"n": 9, "rho": 0.5})).unwrap();
        assert_ne!(a, c);
    }
}
