use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Binary PGM (P5) bytes: one pixel per entry, `[min, max]` mapped linearly
/// onto `[0, 255]` and rounded; a constant matrix is uniformly 128.
pub fn heatmap_pgm(m: &Matrix) -> Result<Vec<u8>> {
    if let Some(index) = m.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(index));
    }
    let (lo, hi) = (m.min(), m.max());
    let mut out = format!("P5\n{} {}\n255\n", m.cols(), m.rows()).into_bytes();
    out.extend(m.as_slice().iter().map(|&v| if hi > lo { ((v - lo) / (hi - lo) * 255.0).round() as u8 } else { 128 }));
    Ok(out)
}

pub fn render_heatmap(m: &Matrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = heatmap_pgm(m)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
