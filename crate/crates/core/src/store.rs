//! On-disk formats for embeddings, factor annotations and dataset manifests.
//!
//! Embedding file layout:
//!
//! ```text
//! bytes 0..8        magic "DISBENCH"
//! bytes 8..12       u32 little-endian header length H
//! bytes 12..12+H    UTF-8 JSON header {version, rows, cols, dtype, layout, ids}
//! rest              rows*cols little-endian f32, row-major
//! ```
//!
//! Factor annotations are a TSV (`id` column then one column per factor,
//! cells are level labels) plus a vocab JSON mapping each factor name to its
//! ordered list of level labels. Levels are integer-coded in vocab order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DISBENCH";
pub const FORMAT_VERSION: u32 = 1;

/// N×D matrix of encoder outputs with one identifier per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
    ids: Vec<String>,
}

impl EmbeddingTable {
    /// Builds a table, checking shape, finiteness and id uniqueness.
    pub fn new(ids: Vec<String>, cols: usize, data: Vec<f32>) -> Result<Self> {
        let rows = ids.len();
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid(format!(
                "table must have rows >= 1 and cols >= 1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "data length {} != {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        check_unique(&ids)?;
        Ok(Self {
            rows,
            cols,
            data,
            ids,
        })
    }

    /// Builds a table from f64 rows, downcasting to f32.
    pub fn from_f64(ids: Vec<String>, matrix: &Array2<f64>) -> Result<Self> {
        if matrix.nrows() != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for {} rows",
                ids.len(),
                matrix.nrows()
            )));
        }
        let data = matrix.iter().map(|&v| v as f32).collect();
        Self::new(ids, matrix.ncols(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|&v| f64::from(v)).collect()
    }

    /// Row index of `id`, if present.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(i, j)| {
            f64::from(self.data[i * self.cols + j])
        })
    }

    /// New table holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        let mut ids = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
            ids.push(self.ids[i].clone());
        }
        Self::new(ids, self.cols, data)
    }

    /// Bitwise equality, treating floats by bit pattern.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.ids == other.ids
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_unique(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    rows: usize,
    cols: usize,
    dtype: String,
    layout: String,
    ids: Vec<String>,
}

/// Serializes `table` into the container format.
pub fn encode_embeddings(table: &EmbeddingTable) -> Result<Vec<u8>> {
    let header = Header {
        version: FORMAT_VERSION,
        rows: table.rows,
        cols: table.cols,
        dtype: "f32le".into(),
        layout: "row-major".into(),
        ids: table.ids.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    let header_len = u32::try_from(json.len())
        .map_err(|_| Error::Header("header longer than 4 GiB".into()))?;
    let mut out = Vec::with_capacity(12 + json.len() + table.data.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&json);
    for v in &table.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Parses the container format, validating every invariant.
pub fn decode_embeddings(bytes: &[u8]) -> Result<EmbeddingTable> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        let found = &bytes[..bytes.len().min(8)];
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(MAGIC).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let header_end = 12usize
        .checked_add(header_len)
        .filter(|&end| end <= bytes.len())
        .ok_or_else(|| Error::Header(format!("header length {header_len} exceeds file")))?;
    let header: Header = serde_json::from_slice(&bytes[12..header_end])
        .map_err(|e| Error::Header(e.to_string()))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Header(format!("unsupported version {}", header.version)));
    }
    if header.dtype != "f32le" {
        return Err(Error::Header(format!("unsupported dtype {:?}", header.dtype)));
    }
    if header.layout != "row-major" {
        return Err(Error::Header(format!("unsupported layout {:?}", header.layout)));
    }
    if header.ids.len() != header.rows {
        return Err(Error::Header(format!(
            "{} ids for {} rows",
            header.ids.len(),
            header.rows
        )));
    }
    let expected = header
        .rows
        .checked_mul(header.cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Header("shape overflows".into()))?;
    let payload = &bytes[header_end..];
    if payload.len() != expected {
        return Err(Error::PayloadLength {
            expected,
            found: payload.len(),
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    EmbeddingTable::new(header.ids, header.cols, data)
}

pub fn write_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_embeddings(table)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes)
}

/// Per-sample integer-coded factor values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorTable {
    ids: Vec<String>,
    factor_names: Vec<String>,
    /// Row-major N×M level indices.
    values: Vec<usize>,
    vocab: Vec<Vec<String>>,
}

impl FactorTable {
    pub fn new(
        ids: Vec<String>,
        factor_names: Vec<String>,
        values: Vec<usize>,
        vocab: Vec<Vec<String>>,
    ) -> Result<Self> {
        let m = factor_names.len();
        if ids.is_empty() {
            return Err(Error::Invalid("factor table needs at least one row".into()));
        }
        if m == 0 {
            return Err(Error::Invalid("factor table needs at least one factor".into()));
        }
        if factor_names.iter().any(|n| n.is_empty()) {
            return Err(Error::Invalid("empty factor name".into()));
        }
        check_unique(&factor_names)
            .map_err(|_| Error::Invalid("factor names must be unique".into()))?;
        check_unique(&ids)?;
        if vocab.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} vocab entries for {m} factors",
                vocab.len()
            )));
        }
        if values.len() != ids.len() * m {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {}x{m} table",
                values.len(),
                ids.len()
            )));
        }
        for (j, levels) in vocab.iter().enumerate() {
            if levels.len() < 2 {
                return Err(Error::Invalid(format!(
                    "factor {:?} needs at least 2 levels",
                    factor_names[j]
                )));
            }
        }
        for (n, row) in values.chunks_exact(m).enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v >= vocab[j].len() {
                    return Err(Error::Invalid(format!(
                        "row {:?}: level {v} out of range for factor {:?}",
                        ids[n], factor_names[j]
                    )));
                }
            }
        }
        Ok(Self {
            ids,
            factor_names,
            values,
            vocab,
        })
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factor_names.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn factor_names(&self) -> &[String] {
        &self.factor_names
    }

    pub fn vocab(&self) -> &[Vec<String>] {
        &self.vocab
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.vocab.iter().map(Vec::len).collect()
    }

    pub fn value(&self, row: usize, factor: usize) -> usize {
        self.values[row * self.num_factors() + factor]
    }

    pub fn row(&self, row: usize) -> &[usize] {
        let m = self.num_factors();
        &self.values[row * m..(row + 1) * m]
    }

    /// Level indices of one factor, in row order.
    pub fn column(&self, factor: usize) -> Vec<usize> {
        (0..self.rows()).map(|n| self.value(n, factor)).collect()
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factor_names.iter().position(|n| n == name)
    }

    pub fn label(&self, row: usize, factor: usize) -> &str {
        &self.vocab[factor][self.value(row, factor)]
    }

    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let m = self.num_factors();
        let mut values = Vec::with_capacity(indices.len() * m);
        let mut ids = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            ids.push(self.ids[i].clone());
        }
        Self::new(ids, self.factor_names.clone(), values, self.vocab.clone())
    }

    /// Same table with factor values replaced, keeping ids and vocab.
    pub fn with_values(&self, values: Vec<usize>) -> Result<Self> {
        Self::new(
            self.ids.clone(),
            self.factor_names.clone(),
            values,
            self.vocab.clone(),
        )
    }
}

/// Parses the TSV annotation text against a factor → levels vocabulary.
pub fn parse_factors(tsv: &str, vocab: &BTreeMap<String, Vec<String>>) -> Result<FactorTable> {
    let mut lines = tsv
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Invalid("factor file is empty".into()))?;
    let columns: Vec<&str> = header.split('\t').collect();
    if columns.first() != Some(&"id") {
        return Err(Error::Header("first factor column must be `id`".into()));
    }
    let factor_names: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();
    let mut levels_by_factor = Vec::with_capacity(factor_names.len());
    let mut lookup: Vec<HashMap<&str, usize>> = Vec::with_capacity(factor_names.len());
    for name in &factor_names {
        let levels = vocab
            .get(name)
            .ok_or_else(|| Error::MissingKey(format!("vocab entry for factor {name}")))?;
        check_unique(levels)
            .map_err(|e| Error::Invalid(format!("vocab for {name}: {e}")))?;
        lookup.push(
            levels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i))
                .collect(),
        );
        levels_by_factor.push(levels.clone());
    }

    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != columns.len() {
            return Err(Error::RaggedRow {
                row: line_no + 1,
                expected: columns.len(),
                found: cells.len(),
            });
        }
        let id = cells[0];
        for (j, cell) in cells[1..].iter().enumerate() {
            let level = lookup[j].get(cell).ok_or_else(|| Error::UnknownLevel {
                row: id.to_string(),
                factor: factor_names[j].clone(),
                label: cell.to_string(),
            })?;
            values.push(*level);
        }
        ids.push(id.to_string());
    }
    if ids.is_empty() {
        return Err(Error::Invalid("factor file has no rows (rows >= 1 required)".into()));
    }
    FactorTable::new(ids, factor_names, values, levels_by_factor)
}

pub fn load_factors(tsv_path: impl AsRef<Path>, vocab_path: impl AsRef<Path>) -> Result<FactorTable> {
    let tsv_path = tsv_path.as_ref();
    let vocab_path = vocab_path.as_ref();
    let tsv = fs::read_to_string(tsv_path).map_err(|e| Error::io(tsv_path, e))?;
    let vocab_text = fs::read_to_string(vocab_path).map_err(|e| Error::io(vocab_path, e))?;
    let vocab: BTreeMap<String, Vec<String>> = serde_json::from_str(&vocab_text)?;
    parse_factors(&tsv, &vocab)
}

/// Writes the TSV and vocab JSON pair for `table`.
pub fn write_factors(
    table: &FactorTable,
    tsv_path: impl AsRef<Path>,
    vocab_path: impl AsRef<Path>,
) -> Result<()> {
    let mut tsv = String::from("id");
    for name in &table.factor_names {
        tsv.push('\t');
        tsv.push_str(name);
    }
    tsv.push('\n');
    for n in 0..table.rows() {
        tsv.push_str(&table.ids[n]);
        for j in 0..table.num_factors() {
            tsv.push('\t');
            tsv.push_str(table.label(n, j));
        }
        tsv.push('\n');
    }
    let vocab: BTreeMap<&str, &Vec<String>> = table
        .factor_names
        .iter()
        .map(String::as_str)
        .zip(&table.vocab)
        .collect();
    let tsv_path = tsv_path.as_ref();
    let vocab_path = vocab_path.as_ref();
    fs::write(tsv_path, tsv).map_err(|e| Error::io(tsv_path, e))?;
    let mut json = serde_json::to_string_pretty(&vocab)?;
    json.push('\n');
    fs::write(vocab_path, json).map_err(|e| Error::io(vocab_path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Image,
    Text,
}

/// Embeddings joined with their factor annotations, rows aligned by id.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub embeddings: EmbeddingTable,
    pub factors: FactorTable,
    pub modality: Modality,
    pub source: String,
}

impl DatasetBundle {
    pub fn rows(&self) -> usize {
        self.embeddings.rows()
    }

    /// Bundle restricted to `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        Ok(Self {
            embeddings: self.embeddings.select_rows(indices)?,
            factors: self.factors.select_rows(indices)?,
            modality: self.modality,
            source: self.source.clone(),
        })
    }

    /// Rows sorted by id bytes. Metrics run on this order so that results
    /// do not depend on how the input file happened to be ordered.
    pub fn canonical(&self) -> Result<Self> {
        let mut order: Vec<usize> = (0..self.rows()).collect();
        order.sort_by(|&a, &b| self.embeddings.ids()[a].cmp(&self.embeddings.ids()[b]));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return Ok(self.clone());
        }
        self.select_rows(&order)
    }
}

/// Joins embeddings and factors; reorders factors to embedding order when
/// the id sets match but the order does not.
pub fn bind_dataset(
    embeddings: EmbeddingTable,
    factors: FactorTable,
    modality: Modality,
    source: impl Into<String>,
) -> Result<DatasetBundle> {
    let source = source.into();
    if embeddings.ids() == factors.ids() {
        return Ok(DatasetBundle {
            embeddings,
            factors,
            modality,
            source,
        });
    }
    let position: HashMap<&str, usize> = factors
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(embeddings.rows());
    for id in embeddings.ids() {
        match position.get(id.as_str()) {
            Some(&i) => order.push(i),
            None => return Err(Error::IdMismatch(id.clone())),
        }
    }
    if factors.rows() != embeddings.rows() {
        let emb: HashSet<&str> = embeddings.ids().iter().map(String::as_str).collect();
        let extra = factors
            .ids()
            .iter()
            .find(|id| !emb.contains(id.as_str()))
            .cloned()
            .unwrap_or_default();
        return Err(Error::IdMismatch(extra));
    }
    let factors = factors.select_rows(&order)?;
    Ok(DatasetBundle {
        embeddings,
        factors,
        modality,
        source,
    })
}

/// Scales every row to unit Euclidean norm.
pub fn l2_normalize(table: &EmbeddingTable) -> Result<EmbeddingTable> {
    let cols = table.cols();
    let mut data = Vec::with_capacity(table.data().len());
    for i in 0..table.rows() {
        let row = table.row(i);
        let norm = row
            .iter()
            .map(|&v| f64::from(v) * f64::from(v))
            .sum::<f64>()
            .sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateRow(table.ids()[i].clone()));
        }
        data.extend(row.iter().map(|&v| (f64::from(v) / norm) as f32));
    }
    EmbeddingTable::new(table.ids().to_vec(), cols, data)
}

/// Dataset manifest: file locations plus provenance strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub embeddings: PathBuf,
    pub factors: PathBuf,
    pub vocab: PathBuf,
    pub modality: Modality,
    pub source: String,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: Manifest = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for p in [
            &mut manifest.embeddings,
            &mut manifest.factors,
            &mut manifest.vocab,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    /// Every file the manifest points at.
    pub fn inputs(&self) -> [&Path; 3] {
        [&self.embeddings, &self.factors, &self.vocab]
    }

    pub fn load_bundle(&self) -> Result<DatasetBundle> {
        let embeddings = load_embeddings(&self.embeddings)?;
        let factors = load_factors(&self.factors, &self.vocab)?;
        bind_dataset(embeddings, factors, self.modality, self.source.clone())
    }
}
