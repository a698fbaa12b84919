//! Profile files: `rho,value` CSV per component plus a JSON sidecar
//! `{d, rho_lo, rho_hi, n, kind}` that rebuilds the grid.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial_transform::{CauchyData, DimensionParams, FrequencyGrid, GridKind, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub d: u32,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub n: usize,
    pub kind: GridKind,
}

pub fn write_profile_csv<W: Write>(w: W, profile: &RadialProfile) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["rho", "value"])?;
    for (r, v) in profile.grid().nodes().iter().zip(profile.values()) {
        wtr.write_record(&[r.to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a profile, requiring its `rho` column to match `grid` node for node.
pub fn read_profile_csv<R: Read>(r: R, grid: Arc<FrequencyGrid>) -> Result<RadialProfile> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut values = Vec::with_capacity(grid.n());
    for (i, rec) in rdr.deserialize::<(f64, f64)>().enumerate() {
        let (rho, v) = rec?;
        match grid.nodes().get(i) {
            Some(&x) if (x - rho).abs() <= 1e-12 * x.abs() => values.push(v),
            _ => return Err(Error::MismatchedGrids),
        }
    }
    RadialProfile::new(grid, values)
}

fn paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf, PathBuf) {
    (dir.join(format!("{stem}_f.csv")), dir.join(format!("{stem}_g.csv")), dir.join(format!("{stem}.json")))
}

/// Writes `STEM_f.csv`, `STEM_g.csv` and `STEM.json` into `dir`.
pub fn save_cauchy(dir: &Path, stem: &str, data: &CauchyData) -> Result<()> {
    let (pf, pg, ps) = paths(dir, stem);
    let grid = data.grid();
    let side = Sidecar { d: data.dim.d, rho_lo: grid.rho_lo(), rho_hi: grid.rho_hi(), n: grid.n(), kind: grid.kind() };
    write_profile_csv(BufWriter::new(File::create(pf)?), &data.fhat)?;
    write_profile_csv(BufWriter::new(File::create(pg)?), &data.ghat)?;
    let mut out = BufWriter::new(File::create(ps)?);
    serde_json::to_writer_pretty(&mut out, &side)?;
    out.flush()?;
    Ok(())
}

pub fn load_cauchy(dir: &Path, stem: &str) -> Result<CauchyData> {
    let (pf, pg, ps) = paths(dir, stem);
    let side: Sidecar = serde_json::from_reader(BufReader::new(File::open(ps)?))?;
    let grid = Arc::new(match side.kind {
        GridKind::Uniform => FrequencyGrid::uniform(side.rho_lo, side.rho_hi, side.n)?,
        GridKind::Geometric => FrequencyGrid::geometric(side.rho_lo, side.rho_hi, side.n)?,
    });
    let f = read_profile_csv(BufReader::new(File::open(pf)?), grid.clone())?;
    let g = read_profile_csv(BufReader::new(File::open(pg)?), grid)?;
    CauchyData::new(DimensionParams::new(side.d)?, f, g)
}
