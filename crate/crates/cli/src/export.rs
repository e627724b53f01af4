//! Grayscale export of grids and images as 8-bit binary PGM.

use std::io::Write;
use std::path::Path;

use mlcs_core::io::{read_complex_grid, read_real_image};
use mlcs_core::MultilookImage;

use crate::error::{CliError, CliResult};

/// Log-magnitude mapping: peak maps to 255, values at or below
/// `peak - dynamic_range_db` map to 0, linear in dB between.
pub fn to_gray(values: &[f64], dynamic_range_db: f64) -> Vec<u8> {
    let peak = values.iter().cloned().fold(0.0_f64, f64::max);
    if peak <= 0.0 {
        return vec![0; values.len()];
    }
    values
        .iter()
        .map(|&v| {
            if v <= 0.0 {
                return 0;
            }
            let db = 20.0 * (v / peak).log10();
            if db <= -dynamic_range_db {
                0
            } else {
                (255.0 * (1.0 + db / dynamic_range_db)).round().clamp(0.0, 255.0) as u8
            }
        })
        .collect()
}

/// Write an image as binary PGM (P5, maxval 255), rows in azimuth order.
pub fn write_pgm(path: &Path, image: &MultilookImage, dynamic_range_db: f64) -> CliResult<()> {
    let gray = to_gray(image.values(), dynamic_range_db);
    let mut out = Vec::with_capacity(gray.len() + 32);
    write!(out, "P5\n{} {}\n255\n", image.n_range(), image.n_azimuth())
        .expect("in-memory write");
    out.extend_from_slice(&gray);
    std::fs::write(path, out)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

/// Export a stored grid (complex or real) to PGM.
pub fn export_file(input: &Path, output: &Path, dynamic_range_db: f64) -> CliResult<()> {
    let image = match read_real_image(input) {
        Ok(image) => image,
        Err(_) => {
            let grid = read_complex_grid(input)
                .map_err(|e| CliError::Runtime(format!("read {}: {e}", input.display())))?;
            let (n_az, n_rg) = grid.shape();
            let mags: Vec<f64> = grid.data().iter().map(|v| v.norm()).collect();
            MultilookImage::from_values(n_az, n_rg, mags)
                .map_err(|e| CliError::Runtime(e.to_string()))?
        }
    };
    write_pgm(output, &image, dynamic_range_db)
}
