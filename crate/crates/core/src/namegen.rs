//! Table-name suggestion: sum the column vectors, then find the nearest known
//! table names by cosine similarity.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::{cosine, read_f32s, read_header, write_f32s, EmbedError, EmbeddingModel, Matrix};
use crate::fsutil;

pub const INDEX_MAGIC: &[u8; 4] = b"C2I1";

#[derive(Debug, thiserror::Error)]
pub enum NameGenError {
    #[error("no columns")]
    NoColumns,
    #[error("empty index")]
    EmptyIndex,
    #[error("query vector is zero")]
    ZeroQuery,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("query has dimension {query}, index has {index}")]
    DimensionMismatch { query: usize, index: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that maps tokens to fixed-length vectors.
pub trait TokenVectors {
    fn dim(&self) -> usize;
    fn token_vector(&self, token: &str) -> Result<Vec<f32>, EmbedError>;
}

impl TokenVectors for EmbeddingModel {
    fn dim(&self) -> usize {
        EmbeddingModel::dim(self)
    }

    fn token_vector(&self, token: &str) -> Result<Vec<f32>, EmbedError> {
        self.vector(token)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableVector {
    pub values: Vec<f32>,
    pub column_count: usize,
}

/// Sums the column vectors in sorted token order, so the result does not
/// depend on column order, bit for bit.
pub fn compose_table_vector<M: TokenVectors + ?Sized>(
    model: &M,
    columns: &[impl AsRef<str>],
) -> Result<TableVector, NameGenError> {
    if columns.is_empty() {
        return Err(NameGenError::NoColumns);
    }
    let mut sorted: Vec<&str> = columns.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    let mut values = vec![0.0f32; model.dim()];
    for c in sorted {
        let v = model.token_vector(c)?;
        if v.len() != values.len() {
            return Err(NameGenError::DimensionMismatch {
                query: v.len(),
                index: values.len(),
            });
        }
        for (acc, x) in values.iter_mut().zip(v) {
            *acc += x;
        }
    }
    Ok(TableVector {
        values,
        column_count: columns.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    pub name: String,
    pub score: f64,
}

/// Known table names with unit-length vectors, searched exhaustively.
#[derive(Clone, Debug, PartialEq)]
pub struct NameIndex {
    names: Vec<String>,
    vectors: Matrix,
}

#[derive(Serialize, Deserialize)]
struct IndexHeader {
    dim: usize,
    count: usize,
    names: Vec<String>,
}

impl NameIndex {
    /// Builds an index from already-normalized rows.
    pub fn from_parts(names: Vec<String>, vectors: Matrix) -> Result<Self, NameGenError> {
        if names.is_empty() {
            return Err(NameGenError::EmptyIndex);
        }
        assert_eq!(names.len(), vectors.rows(), "one vector per name");
        Ok(NameIndex { names, vectors })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn vector(&self, i: usize) -> &[f32] {
        self.vectors.row(i)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), NameGenError> {
        let header = IndexHeader {
            dim: self.dim(),
            count: self.len(),
            names: self.names.clone(),
        };
        w.write_all(INDEX_MAGIC)?;
        serde_json::to_writer(&mut w, &header).map_err(|e| EmbedError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        write_f32s(&mut w, self.vectors.as_slice())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, NameGenError> {
        let mut r = BufReader::new(r);
        let header: IndexHeader = read_header(&mut r, INDEX_MAGIC)?;
        if header.names.len() != header.count || header.dim == 0 {
            return Err(EmbedError::Format("index header is inconsistent".into()).into());
        }
        let data = read_f32s(&mut r, header.count * header.dim)?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Format("index contains non-finite values".into()).into());
        }
        NameIndex::from_parts(header.names, Matrix::from_vec(header.count, header.dim, data))
    }

    pub fn save(&self, path: &Path) -> Result<(), NameGenError> {
        fsutil::write_atomic(path, |w| self.write_to(w))
    }

    pub fn load(path: &Path) -> Result<Self, NameGenError> {
        let file = std::fs::File::open(path).map_err(|e| EmbedError::io_at(path, e))?;
        Self::read_from(file).map_err(|e| match e {
            NameGenError::Embed(inner) => NameGenError::Embed(inner.at(path)),
            NameGenError::Io(io) => NameGenError::Embed(EmbedError::io_at(path, io)),
            other => other,
        })
    }
}

/// Index of each unique name, sorted; names whose vector is zero are skipped.
pub fn build_name_index<M: TokenVectors + ?Sized>(
    model: &M,
    names: &[impl AsRef<str>],
) -> Result<NameIndex, NameGenError> {
    let unique: BTreeSet<&str> = names.iter().map(AsRef::as_ref).collect();
    let mut kept = Vec::with_capacity(unique.len());
    let mut data = Vec::with_capacity(unique.len() * model.dim());
    for name in unique {
        let v = match model.token_vector(name) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("skipping table name `{name}`: {e}");
                continue;
            }
        };
        let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            log::warn!("skipping table name `{name}`: zero vector");
            continue;
        }
        data.extend(v.iter().map(|&x| (f64::from(x) / norm) as f32));
        kept.push(name.to_string());
    }
    let rows = kept.len();
    NameIndex::from_parts(kept, Matrix::from_vec(rows, model.dim(), data))
}

/// The `k` nearest names, best first; ties go to the lexicographically smaller name.
pub fn suggest(index: &NameIndex, query: &TableVector, k: usize) -> Result<Vec<Suggestion>, NameGenError> {
    if k == 0 {
        return Err(NameGenError::InvalidK);
    }
    if query.values.len() != index.dim() {
        return Err(NameGenError::DimensionMismatch {
            query: query.values.len(),
            index: index.dim(),
        });
    }
    if query.values.iter().all(|&x| x == 0.0) {
        return Err(NameGenError::ZeroQuery);
    }
    let mut scored: Vec<Suggestion> = Vec::with_capacity(index.len());
    for (i, name) in index.names.iter().enumerate() {
        scored.push(Suggestion {
            name: name.clone(),
            score: cosine(&query.values, index.vector(i))?,
        });
    }
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.name.cmp(&b.name))
    });
    scored.truncate(k);
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Fixed vectors per token.
    struct Stub(HashMap<&'static str, Vec<f32>>);

    impl TokenVectors for Stub {
        fn dim(&self) -> usize {
            2
        }

        fn token_vector(&self, token: &str) -> Result<Vec<f32>, EmbedError> {
            self.0
                .get(token)
                .cloned()
                .ok_or_else(|| EmbedError::NoSubwords(token.to_string()))
        }
    }

    fn stub() -> Stub {
        Stub(HashMap::from([
            ("x", vec![1.0, 0.0]),
            ("y", vec![0.0, 1.0]),
            ("a", vec![3.0, 4.0]),
            ("b", vec![-1.0, 0.5]),
            ("zero", vec![0.0, 0.0]),
        ]))
    }

    #[test]
    fn sum_of_columns() {
        let m = stub();
        let t = compose_table_vector(&m, &["x", "y"]).unwrap();
        assert_eq!(t.values, [1.0, 1.0]);
        assert_eq!(t.column_count, 2);
        assert_eq!(compose_table_vector(&m, &["a"]).unwrap().values, [3.0, 4.0]);
        assert_eq!(
            compose_table_vector(&m, &["a", "b", "x"]).unwrap(),
            compose_table_vector(&m, &["x", "a", "b"]).unwrap()
        );
        let none: [&str; 0] = [];
        assert!(matches!(compose_table_vector(&m, &none), Err(NameGenError::NoColumns)));
    }

    #[test]
    fn index_dedups_and_normalizes() {
        let m = stub();
        let idx = build_name_index(&m, &["a", "a", "b"]).unwrap();
        assert_eq!(idx.names(), ["a", "b"]);
        for i in 0..idx.len() {
            let n: f64 = idx.vector(i).iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
        assert!(matches!(build_name_index(&m, &["zero"]), Err(NameGenError::EmptyIndex)));
        assert_eq!(build_name_index(&m, &["zero", "x"]).unwrap().len(), 1);
    }

    #[test]
    fn suggestions_sorted_and_truncated() {
        let m = stub();
        let idx = build_name_index(&m, &["x", "y", "a", "b"]).unwrap();
        let q = TableVector {
            values: vec![1.0, 0.1],
            column_count: 1,
        };
        let all = suggest(&idx, &q, 10).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].name, "x");
        assert!(all.windows(2).all(|w| w[0].score >= w[1].score));
        assert_eq!(suggest(&idx, &q, 2).unwrap(), all[..2].to_vec());
        assert!(matches!(suggest(&idx, &q, 0), Err(NameGenError::InvalidK)));
        let zero = TableVector {
            values: vec![0.0, 0.0],
            column_count: 1,
        };
        assert!(matches!(suggest(&idx, &zero, 1), Err(NameGenError::ZeroQuery)));
    }

    #[test]
    fn singleton_index() {
        let idx = build_name_index(&stub(), &["a"]).unwrap();
        let q = TableVector {
            values: vec![1.0, 0.0],
            column_count: 1,
        };
        let s = suggest(&idx, &q, 3).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].score - 0.6).abs() < 1e-7);
    }

    #[test]
    fn ties_break_by_name() {
        let m = Stub(HashMap::from([("m", vec![1.0, 0.0]), ("c", vec![2.0, 0.0])]));
        let idx = build_name_index(&m, &["m", "c"]).unwrap();
        let q = TableVector {
            values: vec![1.0, 0.0],
            column_count: 1,
        };
        let s = suggest(&idx, &q, 2).unwrap();
        assert_eq!(s[0].name, "c");
        assert_eq!(s[0].score, s[1].score);
    }

    #[test]
    fn index_file_round_trip() {
        let idx = build_name_index(&stub(), &["x", "y", "a", "b"]).unwrap();
        let mut bytes = Vec::new();
        idx.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"C2I1");
        assert_eq!(NameIndex::read_from(&bytes[..]).unwrap(), idx);
        assert!(NameIndex::read_from(&bytes[..bytes.len() - 1]).is_err());
        let mut wrong = bytes.clone();
        wrong[..4].copy_from_slice(b"C2V1");
        assert!(NameIndex::read_from(&wrong[..]).is_err());
    }
}
