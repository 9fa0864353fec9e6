//! CSV tables and JSON run metadata.
//!
//! Every table has a header row; floats are written in shortest round-trip
//! form so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::burgers::{ResidualTable, SemigroupReport};
use crate::cauchy::DensityTable;
use crate::correction::{CorrectionTable, PointFlag};
use crate::error::Result;
use crate::sim::{EnsembleSample, ShiftTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlagField {
    Ok,
    Singular,
}

impl From<PointFlag> for FlagField {
    fn from(f: PointFlag) -> Self {
        match f {
            PointFlag::Ok => FlagField::Ok,
            PointFlag::Singular => FlagField::Singular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRow {
    pub s: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "dF")]
    pub df: f64,
    pub flag: FlagField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub s: f64,
    pub density: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRow {
    pub replicate_id: u64,
    pub index: usize,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub s: f64,
    pub shift_mean: f64,
    pub shift_stderr: f64,
    #[serde(rename = "F_theory")]
    pub f_theory: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub s: f64,
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupCsvRow {
    pub s: f64,
    pub solver_density: f64,
    pub closed_form: f64,
    pub abs_error: f64,
}

pub fn correction_rows(t: &CorrectionTable) -> Vec<CorrectionRow> {
    t.rows()
        .map(|(s, f, df, flag)| CorrectionRow {
            s,
            f,
            df,
            flag: flag.into(),
        })
        .collect()
}

pub fn density_rows(t: &DensityTable) -> Vec<DensityRow> {
    t.grid
        .iter()
        .zip(&t.density)
        .zip(&t.cdf)
        .map(|((s, &density), &cdf)| DensityRow { s, density, cdf })
        .collect()
}

pub fn eigenvalue_rows(samples: &[EnsembleSample]) -> Vec<EigenvalueRow> {
    samples
        .iter()
        .flat_map(|smp| {
            smp.eigenvalues.iter().enumerate().map(|(index, &lambda)| EigenvalueRow {
                replicate_id: smp.replicate_id,
                index,
                lambda,
            })
        })
        .collect()
}

/// Shift table next to the theoretical correction `f_theory` on the same grid.
pub fn shift_rows(t: &ShiftTable, f_theory: &[f64]) -> Vec<ShiftRow> {
    t.s.iter()
        .zip(&t.mean)
        .zip(&t.stderr)
        .zip(f_theory)
        .map(|(((&s, &m), &e), &f)| ShiftRow {
            s,
            shift_mean: m,
            shift_stderr: e,
            f_theory: f,
        })
        .collect()
}

pub fn residual_rows(t: &ResidualTable) -> Vec<ResidualRow> {
    t.rows
        .iter()
        .map(|r| ResidualRow {
            s: r.s,
            t: r.t,
            residual: r.residual,
        })
        .collect()
}

pub fn semigroup_rows(r: &SemigroupReport) -> Vec<SemigroupCsvRow> {
    r.rows
        .iter()
        .map(|r| SemigroupCsvRow {
            s: r.s,
            solver_density: r.solver_density,
            closed_form: r.closed_form,
            abs_error: r.abs_error,
        })
        .collect()
}

pub fn write_csv<T: Serialize>(writer: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(reader: impl Read) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Into::into))
        .collect()
}

pub fn write_csv_file<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), rows)
}

pub fn read_csv_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    read_csv(File::open(path)?)
}

/// Sidecar describing a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub command: String,
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    pub replicates: usize,
    /// Hash of the canonical model configuration.
    pub model_hash: String,
    pub version: String,
}

impl RunMetadata {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        f.flush()?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}
