//! Row-major embedding matrices and the `EMB1` file format.
//!
//! Layout: `b"EMB1"`, `u32` LE row count, `u32` LE column count, then
//! `rows * cols` little-endian IEEE-754 `f32` values. Row ids live next to
//! the matrix in `<path>.ids`, one UTF-8 id per line.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::{dot, norm, Scalar};

pub const MAGIC: &[u8; 4] = b"EMB1";
const HEADER_LEN: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    n_rows: usize,
    n_dims: usize,
    data: Vec<T>,
    ids: Vec<String>,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn new(n_rows: usize, n_dims: usize, data: Vec<T>, ids: Vec<String>) -> Result<Self> {
        if n_rows == 0 || n_dims == 0 {
            return Err(Error::invalid(format!(
                "embedding matrix must be non-empty, got {n_rows}x{n_dims}"
            )));
        }
        if data.len() != n_rows * n_dims {
            return Err(Error::invalid(format!(
                "expected {} values for {n_rows}x{n_dims}, got {}",
                n_rows * n_dims,
                data.len()
            )));
        }
        if ids.len() != n_rows {
            return Err(Error::invalid(format!(
                "{} ids for {n_rows} rows",
                ids.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "row {} contains a non-finite value",
                pos / n_dims
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate row id {id:?}")));
            }
        }
        Ok(Self {
            n_rows,
            n_dims,
            data,
            ids,
        })
    }

    /// Builds a matrix from rows, naming them `0..n`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n_dims = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != n_dims) {
            return Err(Error::invalid(format!(
                "row {r} has {} values, expected {n_dims}",
                rows[r].len()
            )));
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::new(rows.len(), n_dims, rows.concat(), ids)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_dims..(i + 1) * self.n_dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.n_dims)
    }

    pub fn with_ids(self, ids: Vec<String>) -> Result<Self> {
        Self::new(self.n_rows, self.n_dims, self.data, ids)
    }

    pub fn cast<U: Scalar>(&self) -> EmbeddingMatrix<U> {
        EmbeddingMatrix {
            n_rows: self.n_rows,
            n_dims: self.n_dims,
            data: self.data.iter().map(|v| U::of(v.to_f64_lossy())).collect(),
            ids: self.ids.clone(),
        }
    }

    /// Rows in the given order, keeping their ids.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.n_dims);
        let mut ids = Vec::with_capacity(rows.len());
        for &r in rows {
            data.extend_from_slice(self.row(r));
            ids.push(self.ids[r].clone());
        }
        Self::new(rows.len(), self.n_dims, data, ids)
    }
}

pub fn ids_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".ids");
    PathBuf::from(s)
}

/// Serializes the matrix body (no ids) in `EMB1` layout.
pub fn encode<T: Scalar>(m: &EmbeddingMatrix<T>) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.n_rows).map_err(|_| Error::invalid("too many rows for EMB1"))?;
    let dims = u32::try_from(m.n_dims).map_err(|_| Error::invalid("too many columns for EMB1"))?;
    let mut buf = Vec::with_capacity(HEADER_LEN + m.data.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&dims.to_le_bytes());
    for v in &m.data {
        buf.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
    }
    Ok(buf)
}

/// Parses an `EMB1` body; `ids` must match the declared row count.
pub fn decode<T: Scalar>(bytes: &[u8], ids: Vec<String>) -> Result<EmbeddingMatrix<T>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::invalid("EMB1 header truncated"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::invalid(format!(
            "bad magic {:?}, expected \"EMB1\"",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let n_rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n_dims = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let payload = &bytes[HEADER_LEN..];
    let expected = n_rows
        .checked_mul(n_dims)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::invalid("EMB1 dimensions overflow"))?;
    if payload.len() < expected {
        return Err(Error::invalid(format!(
            "truncated payload: {n_rows}x{n_dims} declared needs {expected} bytes, found {}",
            payload.len()
        )));
    }
    if payload.len() > expected {
        return Err(Error::invalid(format!(
            "{} trailing bytes after {n_rows}x{n_dims} payload",
            payload.len() - expected
        )));
    }
    if ids.len() != n_rows {
        return Err(Error::invalid(format!(
            "id count mismatch: {} ids for {n_rows} rows",
            ids.len()
        )));
    }
    let data: Vec<T> = payload
        .chunks_exact(4)
        .map(|c| T::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
        .collect();
    EmbeddingMatrix::new(n_rows, n_dims, data, ids)
}

pub fn write_embeddings<T: Scalar>(m: &EmbeddingMatrix<T>, path: &Path) -> Result<()> {
    crate::io::write_bytes(path, &encode(m)?)?;
    let mut ids = m.ids.join("\n");
    ids.push('\n');
    crate::io::write_bytes(&ids_path(path), ids.as_bytes())
}

pub fn read_embeddings<T: Scalar>(path: &Path) -> Result<EmbeddingMatrix<T>> {
    let bytes = crate::io::read_bytes(path)?;
    let ids_file = ids_path(path);
    let ids: Vec<String> = crate::io::read_to_string(&ids_file)?
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    decode(&bytes, ids).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Cosine similarity clamped to [-1, 1]; zero vectors are an error.
pub fn cosine_similarity<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::invalid("cosine similarity of a zero-norm vector"));
    }
    Ok((dot(u, v) / (nu * nv)).max(-T::one()).min(T::one()))
}

/// Cosine that maps zero vectors to similarity 0 instead of failing.
pub fn cosine_or_zero<T: Scalar>(u: &[T], v: &[T]) -> T {
    cosine_similarity(u, v).unwrap_or_else(|_| T::zero())
}

/// Mean of the selected rows.
pub fn centroid<T: Scalar>(m: &EmbeddingMatrix<T>, rows: &[usize]) -> Result<Vec<T>> {
    if rows.is_empty() {
        return Err(Error::invalid("centroid of an empty row set"));
    }
    let mut acc = vec![T::zero(); m.n_dims];
    for &r in rows {
        for (a, &x) in acc.iter_mut().zip(m.row(r)) {
            *a += x;
        }
    }
    let n = T::of_usize(rows.len());
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

pub fn l2_normalized<T: Scalar>(v: &[T]) -> Vec<T> {
    let n = norm(v);
    if n == T::zero() {
        return v.to_vec();
    }
    v.iter().map(|&x| x / n).collect()
}
