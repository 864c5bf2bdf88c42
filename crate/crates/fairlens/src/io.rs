//! Matrix and attribute file formats.
//!
//! Matrices come in two forms, auto-detected on read:
//! - text: comma-separated, one header line, one row per sample;
//! - binary: 8-byte magic `FLENSMAT`, then version / n / d as little-endian
//!   u64, then n·d little-endian f64 values, row-major.
//!
//! Attribute files are text: one integer label per line, preceded by optional
//! `# <label>=<name>` comment lines naming the labels.
//!
//! Text floats are written with the shortest representation that parses back
//! to the same value, so both formats round-trip exactly.

use crate::{Error, Result};
use ndarray::Array2;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MATRIX_MAGIC: &[u8; 8] = b"FLENSMAT";
pub const MATRIX_FORMAT_VERSION: u64 = 1;

fn data_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Data(format!("{}:{line}: {msg}", path.display()))
}

/// Write the text form.
pub fn write_matrix_text(path: &Path, matrix: &Array2<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = matrix.ncols();
    let header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in matrix.rows() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                write!(w, ",")?;
            }
            write!(w, "{v}")?;
            first = false;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Write the binary form.
pub fn write_matrix_binary(path: &Path, matrix: &Array2<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MATRIX_MAGIC)?;
    w.write_all(&MATRIX_FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(matrix.nrows() as u64).to_le_bytes())?;
    w.write_all(&(matrix.ncols() as u64).to_le_bytes())?;
    for v in matrix.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Read either form, sniffing the magic bytes.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let mut file = File::open(path)?;
    let mut head = [0u8; 8];
    let got = read_up_to(&mut file, &mut head)?;
    if got == 8 && &head == MATRIX_MAGIC {
        read_matrix_binary_body(path, file)
    } else {
        drop(file);
        read_matrix_text(path)
    }
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

fn read_matrix_binary_body(path: &Path, mut file: File) -> Result<Array2<f64>> {
    let mut header = [0u8; 24];
    if read_up_to(&mut file, &mut header)? != 24 {
        return Err(data_err(path, 1, "binary matrix header is truncated"));
    }
    let version = u64::from_le_bytes(header[0..8].try_into().unwrap());
    if version != MATRIX_FORMAT_VERSION {
        return Err(data_err(
            path,
            1,
            format!("unsupported binary matrix version {version}"),
        ));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| data_err(path, 1, "declared matrix size overflows"))?;

    let mut payload = Vec::new();
    file.read_to_end(&mut payload)?;
    if payload.len() != expected {
        return Err(data_err(
            path,
            1,
            format!(
                "payload is {} bytes but header declares {n}×{d} ({expected} bytes)",
                payload.len()
            ),
        ));
    }
    let mut values = Vec::with_capacity(n * d);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(data_err(
                path,
                1,
                format!("non-finite value at element {i}"),
            ));
        }
        values.push(v);
    }
    Array2::from_shape_vec((n, d), values)
        .map_err(|e| data_err(path, 1, format!("shape error: {e}")))
}

fn read_matrix_text(path: &Path) -> Result<Array2<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| data_err(path, 1, "file is empty; expected a header line"))?;
    let header = header?;
    let d = header.split(',').count();

    let mut values = Vec::new();
    let mut n = 0;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d {
            return Err(data_err(
                path,
                line_no,
                format!("expected {d} fields, found {}", fields.len()),
            ));
        }
        for f in fields {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| data_err(path, line_no, format!("cannot parse {f:?} as a number")))?;
            if !v.is_finite() {
                return Err(data_err(path, line_no, "non-finite value"));
            }
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(data_err(path, 1, "matrix has a header but no rows"));
    }
    Array2::from_shape_vec((n, d), values)
        .map_err(|e| data_err(path, 1, format!("shape error: {e}")))
}

/// Write attribute labels with their name mapping.
pub fn write_attributes(path: &Path, attributes: &[u32], names: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, name) in names.iter().enumerate() {
        writeln!(w, "# {i}={name}")?;
    }
    for a in attributes {
        writeln!(w, "{a}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read attribute labels. Returns the labels and the names declared in
/// leading comments; labels without a declared name get their index as name.
pub fn read_attributes(path: &Path) -> Result<(Vec<u32>, Vec<String>)> {
    let reader = BufReader::new(File::open(path)?);
    let mut labels = Vec::new();
    let mut declared: Vec<(usize, String)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((k, name)) = comment.split_once('=') {
                let k: usize = k.trim().parse().map_err(|_| {
                    data_err(path, line_no, format!("bad name mapping {comment:?}"))
                })?;
                declared.push((k, name.trim().to_string()));
            }
            continue;
        }
        let v: i64 = trimmed
            .parse()
            .map_err(|_| data_err(path, line_no, format!("cannot parse label {trimmed:?}")))?;
        if v < 0 {
            return Err(data_err(path, line_no, format!("label {v} is negative")));
        }
        labels.push(v as u32);
    }
    if labels.is_empty() {
        return Err(data_err(path, 1, "attribute file contains no labels"));
    }

    let max_label = *labels.iter().max().unwrap() as usize;
    let max_declared = declared.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let m = (max_label + 1).max(max_declared + 1);
    let mut names: Vec<String> = (0..m).map(|i| i.to_string()).collect();
    for (k, name) in declared {
        names[k] = name;
    }
    Ok((labels, names))
}
