//! On-disk formats.
//!
//! Binary grid format: little-endian header {magic "MLCS", version u32,
//! n_azimuth u32, n_range u32, dtype u32} followed by 32-bit float
//! payload, azimuth-major. dtype 0 is interleaved (re, im) complex, dtype
//! 1 is real. Look stacks persist as consecutive grid files plus a JSON
//! manifest; compressed data as an index file and a value file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, LookStack};
use crate::mask::SamplingMask;
use crate::mlrda::LookPlan;
use crate::sim::{CompressedData, PointTarget};
use crate::solver::MultilookImage;

const GRID_MAGIC: &[u8; 4] = b"MLCS";
const GRID_VERSION: u32 = 1;
const DTYPE_COMPLEX_F32: u32 = 0;
const DTYPE_REAL_F32: u32 = 1;

const MASK_MAGIC: &[u8; 4] = b"MLCM";
const VALUES_MAGIC: &[u8; 4] = b"MLCV";

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f32(w: &mut impl Write, v: f32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f32(r: &mut impl Read) -> Result<f32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(f32::from_le_bytes(buf))
}

fn write_grid_header(w: &mut impl Write, shape: (usize, usize), dtype: u32) -> Result<()> {
    w.write_all(GRID_MAGIC)?;
    write_u32(w, GRID_VERSION)?;
    write_u32(w, shape.0 as u32)?;
    write_u32(w, shape.1 as u32)?;
    write_u32(w, dtype)?;
    Ok(())
}

fn read_grid_header(r: &mut impl Read) -> Result<((usize, usize), u32)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != GRID_MAGIC {
        return Err(Error::BadFormat(format!("bad grid magic {magic:?}")));
    }
    let version = read_u32(r)?;
    if version != GRID_VERSION {
        return Err(Error::BadFormat(format!("unsupported grid version {version}")));
    }
    let n_az = read_u32(r)? as usize;
    let n_rg = read_u32(r)? as usize;
    let dtype = read_u32(r)?;
    Ok(((n_az, n_rg), dtype))
}

pub fn write_complex_grid(path: &Path, grid: &ComplexGrid) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid_header(&mut w, grid.shape(), DTYPE_COMPLEX_F32)?;
    for v in grid.data() {
        write_f32(&mut w, v.re as f32)?;
        write_f32(&mut w, v.im as f32)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_complex_grid(path: &Path) -> Result<ComplexGrid> {
    let mut r = BufReader::new(File::open(path)?);
    let ((n_az, n_rg), dtype) = read_grid_header(&mut r)?;
    if dtype != DTYPE_COMPLEX_F32 {
        return Err(Error::BadFormat(format!("expected complex dtype, got {dtype}")));
    }
    let mut data = Vec::with_capacity(n_az * n_rg);
    for _ in 0..n_az * n_rg {
        let re = read_f32(&mut r)? as f64;
        let im = read_f32(&mut r)? as f64;
        data.push(Complex64::new(re, im));
    }
    ComplexGrid::from_data(n_az, n_rg, data)
}

pub fn write_real_image(path: &Path, image: &MultilookImage) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_grid_header(&mut w, image.shape(), DTYPE_REAL_F32)?;
    for v in image.values() {
        write_f32(&mut w, *v as f32)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_real_image(path: &Path) -> Result<MultilookImage> {
    let mut r = BufReader::new(File::open(path)?);
    let ((n_az, n_rg), dtype) = read_grid_header(&mut r)?;
    if dtype != DTYPE_REAL_F32 {
        return Err(Error::BadFormat(format!("expected real dtype, got {dtype}")));
    }
    let mut values = Vec::with_capacity(n_az * n_rg);
    for _ in 0..n_az * n_rg {
        values.push(read_f32(&mut r)? as f64);
    }
    MultilookImage::from_values(n_az, n_rg, values)
}

/// Manifest accompanying a persisted look stack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LookStackManifest {
    pub look_count: usize,
    pub n_azimuth_sub: usize,
    pub n_range: usize,
    pub band_assignments: Vec<Vec<usize>>,
    pub params_hash: u64,
    pub files: Vec<String>,
}

/// Write the stack as consecutive binary grids plus a manifest. Returns
/// every file path written (manifest last).
pub fn write_look_stack(
    dir: &Path,
    stem: &str,
    stack: &LookStack,
    plan: &LookPlan,
    params_hash: u64,
) -> Result<Vec<PathBuf>> {
    let (n_az_sub, n_rg) = stack.look_shape();
    let mut files = Vec::new();
    let mut names = Vec::new();
    for (i, look) in stack.looks().iter().enumerate() {
        let name = format!("{stem}_look_{i:03}.mlcs");
        let path = dir.join(&name);
        write_complex_grid(&path, look)?;
        files.push(path);
        names.push(name);
    }
    let manifest = LookStackManifest {
        look_count: stack.look_count(),
        n_azimuth_sub: n_az_sub,
        n_range: n_rg,
        band_assignments: plan.band_assignments().to_vec(),
        params_hash,
        files: names,
    };
    let manifest_path = dir.join(format!("{stem}_stack.json"));
    let mut w = BufWriter::new(File::create(&manifest_path)?);
    serde_json::to_writer_pretty(&mut w, &manifest)
        .map_err(|e| Error::BadFormat(e.to_string()))?;
    w.flush()?;
    files.push(manifest_path);
    Ok(files)
}

pub fn read_look_stack(dir: &Path, stem: &str) -> Result<(LookStack, LookStackManifest)> {
    let manifest_path = dir.join(format!("{stem}_stack.json"));
    let manifest: LookStackManifest =
        serde_json::from_reader(BufReader::new(File::open(&manifest_path)?))
            .map_err(|e| Error::BadFormat(e.to_string()))?;
    let looks = manifest
        .files
        .iter()
        .map(|name| read_complex_grid(&dir.join(name)))
        .collect::<Result<Vec<_>>>()?;
    Ok((LookStack::new(looks)?, manifest))
}

/// Persist compressed data as {mask index file, value file}.
pub fn write_compressed_data(
    index_path: &Path,
    values_path: &Path,
    data: &CompressedData,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(index_path)?);
    w.write_all(MASK_MAGIC)?;
    write_u64(&mut w, data.mask.total_samples())?;
    write_u32(&mut w, data.full_shape.0 as u32)?;
    write_u32(&mut w, data.full_shape.1 as u32)?;
    write_u64(&mut w, data.mask.retained_count() as u64)?;
    for &idx in data.mask.retained() {
        write_u64(&mut w, idx)?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(values_path)?);
    w.write_all(VALUES_MAGIC)?;
    write_u64(&mut w, data.values.len() as u64)?;
    for v in &data.values {
        write_f32(&mut w, v.re as f32)?;
        write_f32(&mut w, v.im as f32)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_compressed_data(index_path: &Path, values_path: &Path) -> Result<CompressedData> {
    let mut r = BufReader::new(File::open(index_path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MASK_MAGIC {
        return Err(Error::BadFormat(format!("bad mask magic {magic:?}")));
    }
    let total = read_u64(&mut r)?;
    let n_az = read_u32(&mut r)? as usize;
    let n_rg = read_u32(&mut r)? as usize;
    let count = read_u64(&mut r)? as usize;
    let mut retained = Vec::with_capacity(count);
    for _ in 0..count {
        retained.push(read_u64(&mut r)?);
    }
    let mask = SamplingMask::new(retained, total)?;

    let mut r = BufReader::new(File::open(values_path)?);
    r.read_exact(&mut magic)?;
    if &magic != VALUES_MAGIC {
        return Err(Error::BadFormat(format!("bad values magic {magic:?}")));
    }
    let n_values = read_u64(&mut r)? as usize;
    if n_values != count {
        return Err(Error::BadFormat(format!(
            "value count {n_values} != index count {count}"
        )));
    }
    let mut values = Vec::with_capacity(n_values);
    for _ in 0..n_values {
        let re = read_f32(&mut r)? as f64;
        let im = read_f32(&mut r)? as f64;
        values.push(Complex64::new(re, im));
    }
    Ok(CompressedData {
        values,
        mask,
        full_shape: (n_az, n_rg),
    })
}

/// Plain-text target list: one line per target
/// `azimuth_m range_m amp_re amp_im`.
pub fn write_target_list(path: &Path, targets: &[PointTarget]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for t in targets {
        writeln!(w, "{} {} {} {}", t.azimuth_m, t.range_m, t.amplitude_re, t.amplitude_im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_target_list(path: &Path) -> Result<Vec<PointTarget>> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let mut targets = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::BadFormat(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if fields.len() != 4 {
            return Err(Error::BadFormat(format!(
                "line {}: expected 4 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        targets.push(PointTarget {
            azimuth_m: fields[0],
            range_m: fields[1],
            amplitude_re: fields[2],
            amplitude_im: fields[3],
        });
    }
    Ok(targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ComplexGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complex_grid_round_trip_is_f32_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = ComplexGrid::random(5, 7, &mut rng);
        let path = dir.path().join("g.mlcs");
        write_complex_grid(&path, &g).unwrap();
        let back = read_complex_grid(&path).unwrap();
        assert_eq!(back.shape(), g.shape());
        for (a, b) in g.data().iter().zip(back.data()) {
            assert_eq!(a.re as f32, b.re as f32);
            assert_eq!(a.im as f32, b.im as f32);
        }
    }

    #[test]
    fn look_stack_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plan = LookPlan::new(8, 2).unwrap();
        let stack = LookStack::new(
            (0..2).map(|_| ComplexGrid::random(4, 3, &mut rng)).collect(),
        )
        .unwrap();
        write_look_stack(dir.path(), "test", &stack, &plan, 0xabcd).unwrap();
        let (back, manifest) = read_look_stack(dir.path(), "test").unwrap();
        assert_eq!(back.look_count(), 2);
        assert_eq!(manifest.params_hash, 0xabcd);
        assert_eq!(manifest.band_assignments, plan.band_assignments());
    }

    #[test]
    fn compressed_data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = ComplexGrid::random(6, 6, &mut rng);
        let mask =
            crate::sim::generate_mask((6, 6), 0.5, crate::seed::Seed(4), Default::default())
                .unwrap();
        let data = crate::sim::subsample(&y, &mask).unwrap();
        let ip = dir.path().join("mask.idx");
        let vp = dir.path().join("values.bin");
        write_compressed_data(&ip, &vp, &data).unwrap();
        let back = read_compressed_data(&ip, &vp).unwrap();
        assert_eq!(back.mask, data.mask);
        assert_eq!(back.full_shape, data.full_shape);
        for (a, b) in data.values.iter().zip(&back.values) {
            assert_eq!(a.re as f32, b.re as f32);
        }
    }

    #[test]
    fn target_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let targets = vec![
            PointTarget {
                azimuth_m: 1.5,
                range_m: -2.0,
                amplitude_re: 0.5,
                amplitude_im: -0.25,
            },
            PointTarget {
                azimuth_m: 0.0,
                range_m: 0.0,
                amplitude_re: 1.0,
                amplitude_im: 0.0,
            },
        ];
        let path = dir.path().join("targets.txt");
        write_target_list(&path, &targets).unwrap();
        assert_eq!(read_target_list(&path).unwrap(), targets);
    }
}
