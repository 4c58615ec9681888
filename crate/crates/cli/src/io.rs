//! Tensor files: the `.t3b` binary format and 8-bit PGM image stacks.
//!
//! A `.t3b` file is the magic `T3B1`, the dims `n1 n2 n3` as little-endian
//! `u64`, then `n1 n2 n3` little-endian `f64` values in slice-major order
//! (entry `(i, j, k)` at position `i + n1 (j + n2 k)`).

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;
use tubal_core::{Dims, Mask, Tensor3};

pub const MAGIC: &[u8; 4] = b"T3B1";
const HEADER_LEN: usize = 4 + 3 * 8;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: malformed at byte {offset}: {reason}")]
    Format { path: PathBuf, offset: usize, reason: String },

    #[error("{path}: image is {found_rows}x{found_cols}, expected {rows}x{cols} like the first image")]
    InconsistentStack { path: PathBuf, rows: usize, cols: usize, found_rows: usize, found_cols: usize },

    #[error("{0}: no .pgm files found")]
    EmptyStack(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, offset: usize, reason: impl Into<String>) -> IoError {
    IoError::Format { path: path.to_path_buf(), offset, reason: reason.into() }
}

/// Encodes a tensor as `.t3b` bytes.
pub fn encode_t3b(t: &Tensor3) -> Vec<u8> {
    let d = t.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * d.len());
    out.extend_from_slice(MAGIC);
    for n in [d.n1, d.n2, d.n3] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes `.t3b` bytes; `path` only labels errors.
pub fn decode_t3b(bytes: &[u8], path: &Path) -> Result<Tensor3, IoError> {
    if bytes.len() < 4 {
        return Err(format_err(path, bytes.len(), "file ends inside the magic"));
    }
    if &bytes[..4] != MAGIC {
        return Err(format_err(path, 0, "bad magic, expected T3B1"));
    }
    let mut dims = [0usize; 3];
    for (m, d) in dims.iter_mut().enumerate() {
        let at = 4 + 8 * m;
        let raw = bytes.get(at..at + 8).ok_or_else(|| format_err(path, bytes.len(), "file ends inside the header"))?;
        let v = u64::from_le_bytes(raw.try_into().expect("8 bytes"));
        *d = usize::try_from(v).ok().filter(|&n| n > 0).ok_or_else(|| format_err(path, at, format!("invalid dimension {v}")))?;
    }
    let dims = Dims::new(dims[0], dims[1], dims[2]);
    let expected = dims
        .n1
        .checked_mul(dims.n2)
        .and_then(|n| n.checked_mul(dims.n3))
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| format_err(path, 4, format!("dims {dims} overflow")))?;
    if bytes.len() < expected {
        let whole = HEADER_LEN + (bytes.len() - HEADER_LEN) / 8 * 8;
        return Err(format_err(path, whole, format!("truncated: {} bytes, expected {expected}", bytes.len())));
    }
    if bytes.len() > expected {
        return Err(format_err(path, expected, "trailing bytes after the last value"));
    }
    let data = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(Tensor3::from_vec(dims, data).expect("length checked"))
}

pub fn load_tensor(path: &Path) -> Result<Tensor3, IoError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_t3b(&bytes, path)
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn save_tensor(t: &Tensor3, path: &Path) -> Result<(), IoError> {
    write_atomic(path, &encode_t3b(t))
}

/// Mask stored as a `.t3b` tensor: nonzero entries are observed.
pub fn load_mask(path: &Path) -> Result<Mask, IoError> {
    Ok(Mask::from_tensor(&load_tensor(path)?))
}

pub fn save_mask(m: &Mask, path: &Path) -> Result<(), IoError> {
    save_tensor(&m.to_tensor(), path)
}

struct Pgm {
    rows: usize,
    cols: usize,
    maxval: usize,
    pixels: Vec<u8>,
}

// header tokens separated by whitespace, `#` comments to end of line
fn pgm_token<'a>(bytes: &'a [u8], pos: &mut usize, path: &Path) -> Result<&'a [u8], IoError> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(format_err(path, *pos, "file ends inside the header")),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn pgm_number(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<usize, IoError> {
    let start = *pos;
    let tok = pgm_token(bytes, pos, path)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format_err(path, start, "expected a decimal number"))
}

fn parse_pgm(bytes: &[u8], path: &Path) -> Result<Pgm, IoError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(format_err(path, 0, "not a binary PGM (P5)"));
    }
    let mut pos = 2;
    let cols = pgm_number(bytes, &mut pos, path)?;
    let rows = pgm_number(bytes, &mut pos, path)?;
    let maxval_at = pos;
    let maxval = pgm_number(bytes, &mut pos, path)?;
    if !(1..=255).contains(&maxval) {
        return Err(format_err(path, maxval_at, format!("maxval {maxval} is not 8-bit")));
    }
    if rows == 0 || cols == 0 {
        return Err(format_err(path, 2, "empty image"));
    }
    // exactly one whitespace byte before the raster
    pos += 1;
    let end = pos + rows * cols;
    if bytes.len() < end {
        return Err(format_err(path, bytes.len(), format!("truncated raster, expected {} pixels", rows * cols)));
    }
    Ok(Pgm { rows, cols, maxval, pixels: bytes[pos..end].to_vec() })
}

/// Loads every `.pgm` file in `dir`, in lexicographic file-name order, as
/// the frontal slices of a tensor. Pixel `(row i, column j)` of image `k`
/// becomes entry `(i, j, k)`, scaled to `[0, 1]` by the image's maxval.
pub fn load_image_stack(dir: &Path) -> Result<Tensor3, IoError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(IoError::EmptyStack(dir.to_path_buf()));
    }
    let mut slices = Vec::with_capacity(files.len());
    let mut shape = None;
    for f in &files {
        let img = parse_pgm(&fs::read(f).map_err(io_err(f))?, f)?;
        let (rows, cols) = *shape.get_or_insert((img.rows, img.cols));
        if (img.rows, img.cols) != (rows, cols) {
            return Err(IoError::InconsistentStack { path: f.clone(), rows, cols, found_rows: img.rows, found_cols: img.cols });
        }
        slices.push(img);
    }
    let (rows, cols) = shape.expect("at least one image");
    let t = Tensor3::from_fn((rows, cols, slices.len()), |i, j, k| {
        let img = &slices[k];
        img.pixels[i * cols + j] as f64 / img.maxval as f64
    });
    Ok(t.expect("non-empty dims"))
}

/// Writes each frontal slice as `slice_0000.pgm`, ... in `dir` (created if
/// missing), clamping to `[0, 1]` and rounding to 8 bits.
pub fn save_image_stack(t: &Tensor3, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let d = t.dims();
    let mut written = Vec::with_capacity(d.n3);
    for k in 0..d.n3 {
        let mut bytes = format!("P5\n{} {}\n255\n", d.n2, d.n1).into_bytes();
        for i in 0..d.n1 {
            for j in 0..d.n2 {
                bytes.push((t.get(i, j, k).clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        let path = dir.join(format!("slice_{k:04}.pgm"));
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

/// Loads a `.t3b` file, or a PGM stack when `path` is a directory.
pub fn load_any(path: &Path) -> Result<Tensor3, IoError> {
    if path.is_dir() {
        load_image_stack(path)
    } else {
        load_tensor(path)
    }
}
