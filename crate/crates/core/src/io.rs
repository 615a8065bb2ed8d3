//! File formats.
//!
//! Binary tensor: little-endian, three `u64` dimensions followed by the
//! `f64` entries in linearization order (see [`crate::tensor`]).
//!
//! CSV matrices: one row per line, comma separated, no header; values use
//! Rust's shortest round-trip formatting so reading back is exact.
//!
//! CSV tensor directory: `slice_<k>.csv` for every mode-3 index `k`, each an
//! `n1 x n2` matrix, plus `shape.txt` holding `n1,n2,n3`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tensor::{slice_mode, stack_slices, Mode, Tensor3};

const HEADER_LEN: usize = 24;

pub fn tensor_to_bytes(t: &Tensor3) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.len());
    for n in t.shape() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn tensor_from_bytes(bytes: &[u8]) -> Result<Tensor3> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("tensor file too short: {} bytes", bytes.len())));
    }
    let mut shape = [0usize; 3];
    for (d, chunk) in shape.iter_mut().zip(bytes[..HEADER_LEN].chunks_exact(8)) {
        let n = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        *d = usize::try_from(n).map_err(|_| Error::Format(format!("dimension {n} too large")))?;
    }
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::Format(format!("shape {shape:?} overflows")))?;
    let body = &bytes[HEADER_LEN..];
    if len.checked_mul(8) != Some(body.len()) {
        return Err(Error::Format(format!(
            "shape {shape:?} needs {len} values but the file holds {} bytes of data",
            body.len()
        )));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    Tensor3::new(shape, data)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, tensor_to_bytes(t)).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    tensor_from_bytes(&bytes)
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Format(format!("line {}: {f:?}: {e}", n + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Matrix::from_rows(&rows)
}

pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Matrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix_to_csv(m)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_csv(&text)
}

/// `iteration,error` with one-based iteration numbers.
pub fn write_error_history(path: impl AsRef<Path>, history: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut s = String::from("iteration,error\n");
    for (t, e) in history.iter().enumerate() {
        s.push_str(&format!("{},{}\n", t + 1, e));
    }
    f.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_tensor_csv_dir(dir: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let [n1, n2, n3] = t.shape();
    let shape_path = dir.join("shape.txt");
    fs::write(&shape_path, format!("{n1},{n2},{n3}\n")).map_err(|e| Error::io(&shape_path, e))?;
    for k in 0..n3 {
        write_matrix_csv(dir.join(format!("slice_{k}.csv")), &slice_mode(t, Mode::Three, k)?)?;
    }
    Ok(())
}

pub fn read_tensor_csv_dir(dir: impl AsRef<Path>) -> Result<Tensor3> {
    let dir = dir.as_ref();
    let shape_path = dir.join("shape.txt");
    let text = fs::read_to_string(&shape_path).map_err(|e| Error::io(&shape_path, e))?;
    let dims: Vec<usize> = text
        .trim()
        .split(',')
        .map(|s| s.trim().parse().map_err(|e| Error::Format(format!("shape.txt: {e}"))))
        .collect::<Result<_>>()?;
    let [n1, n2, n3]: [usize; 3] =
        dims.try_into().map_err(|_| Error::Format("shape.txt must hold three dimensions".into()))?;
    let slices = (0..n3).map(|k| read_matrix_csv(dir.join(format!("slice_{k}.csv")))).collect::<Result<Vec<_>>>()?;
    let t = stack_slices(&slices, Mode::Three)?;
    if t.shape() != [n1, n2, n3] {
        return Err(Error::Format(format!("slices give shape {:?}, shape.txt says {:?}", t.shape(), [n1, n2, n3])));
    }
    Ok(t)
}
