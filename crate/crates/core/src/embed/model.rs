use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embed::subword::{ngram_bucket, subword_ngrams};
use crate::embed::vocab::Vocabulary;
use crate::embed::EmbedError;
use crate::fsutil;

pub const MODEL_MAGIC: &[u8; 4] = b"C2V1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    /// Use the whole document as the context window.
    pub window_full: bool,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives: usize,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub bucket: u32,
    pub min_count: u64,
    pub seed: u64,
    /// 1 trains deterministically; more workers share the matrices without locks.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            window_full: false,
            epochs: 5,
            learning_rate: 0.05,
            negatives: 5,
            ngram_min: 3,
            ngram_max: 6,
            bucket: 2_000_000,
            min_count: 1,
            seed: 42,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |msg: &str| Err(EmbedError::InvalidConfig(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.bucket == 0 {
            return bad("bucket must be at least 1");
        }
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return bad("need 1 <= ngram_min <= ngram_max");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be at least 1");
        }
        Ok(())
    }
}

/// Dense row-major `f32` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }
}

/// Trained subword skip-gram embeddings.
///
/// `input` holds `V + bucket` rows: whole-word rows first, then one row per
/// hash bucket. `output` holds the `V` context vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub(crate) vocab: Vocabulary,
    pub(crate) config: TrainConfig,
    pub(crate) input: Matrix,
    pub(crate) output: Matrix,
}

impl EmbeddingModel {
    pub fn from_parts(
        vocab: Vocabulary,
        config: TrainConfig,
        input: Matrix,
        output: Matrix,
    ) -> Result<Self, EmbedError> {
        config.validate()?;
        let v = vocab.len();
        let expect_in = (v + config.bucket as usize, config.dim);
        let expect_out = (v, config.dim);
        if (input.rows(), input.cols()) != expect_in || (output.rows(), output.cols()) != expect_out {
            return Err(EmbedError::Format(format!(
                "matrix shapes {}x{} / {}x{} do not match vocabulary {v}, bucket {}, dim {}",
                input.rows(),
                input.cols(),
                output.rows(),
                output.cols(),
                config.bucket,
                config.dim
            )));
        }
        Ok(EmbeddingModel {
            vocab,
            config,
            input,
            output,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn input_matrix(&self) -> &Matrix {
        &self.input
    }

    pub fn output_matrix(&self) -> &Matrix {
        &self.output
    }

    /// Input-matrix rows that make up `token`: the word row (if known)
    /// followed by one bucket row per subword n-gram.
    pub fn input_rows(&self, token: &str) -> Vec<usize> {
        token_rows(&self.vocab, &self.config, token)
    }

    /// Mean of the token's input rows. Works for tokens never seen in training.
    pub fn vector(&self, token: &str) -> Result<Vec<f32>, EmbedError> {
        if token.is_empty() {
            return Err(EmbedError::EmptyToken);
        }
        let rows = self.input_rows(token);
        if rows.is_empty() {
            return Err(EmbedError::NoSubwords(token.to_string()));
        }
        let mut out = vec![0.0f32; self.dim()];
        for &r in &rows {
            for (o, &x) in out.iter_mut().zip(self.input.row(r)) {
                *o += x;
            }
        }
        let n = rows.len() as f32;
        out.iter_mut().for_each(|x| *x /= n);
        Ok(out)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), EmbedError> {
        let header = ModelHeader {
            dim: self.config.dim,
            bucket: self.config.bucket,
            ngram_min: self.config.ngram_min,
            ngram_max: self.config.ngram_max,
            vocab_size: self.vocab.len(),
            tokens: self.vocab.tokens().to_vec(),
            counts: self.vocab.counts().to_vec(),
            config: self.config.clone(),
        };
        w.write_all(MODEL_MAGIC)?;
        serde_json::to_writer(&mut w, &header).map_err(|e| EmbedError::Format(e.to_string()))?;
        w.write_all(b"\n")?;
        write_f32s(&mut w, self.input.as_slice())?;
        write_f32s(&mut w, self.output.as_slice())?;
        w.flush()?;
        Ok(())
    }

    /// Reads a model, checking the magic bytes and that the data section has
    /// exactly the size the header declares.
    pub fn read_from<R: Read>(r: R) -> Result<Self, EmbedError> {
        let mut r = BufReader::new(r);
        let header: ModelHeader = read_header(&mut r, MODEL_MAGIC)?;
        if header.tokens.len() != header.vocab_size
            || header.config.dim != header.dim
            || header.config.bucket != header.bucket
            || header.config.ngram_min != header.ngram_min
            || header.config.ngram_max != header.ngram_max
        {
            return Err(EmbedError::Format("header fields are inconsistent".into()));
        }
        let in_len = (header.vocab_size + header.bucket as usize) * header.dim;
        let out_len = header.vocab_size * header.dim;
        let data = read_f32s(&mut r, in_len + out_len)?;
        if data.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Format("matrix contains non-finite values".into()));
        }
        let (input, output) = data.split_at(in_len);
        let vocab = Vocabulary::from_parts(header.tokens, header.counts, header.config.min_count)?;
        EmbeddingModel::from_parts(
            vocab,
            header.config,
            Matrix::from_vec(header.vocab_size + header.bucket as usize, header.dim, input.to_vec()),
            Matrix::from_vec(header.vocab_size, header.dim, output.to_vec()),
        )
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        fsutil::write_atomic(path, |w| self.write_to(w))
    }

    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        let file = std::fs::File::open(path).map_err(|e| EmbedError::io_at(path, e))?;
        Self::read_from(file).map_err(|e| e.at(path))
    }
}

pub(crate) fn token_rows(vocab: &Vocabulary, config: &TrainConfig, token: &str) -> Vec<usize> {
    let v = vocab.len();
    let mut rows = Vec::new();
    if let Some(id) = vocab.id(token) {
        rows.push(id as usize);
    }
    for g in subword_ngrams(token, config.ngram_min, config.ngram_max) {
        rows.push(v + ngram_bucket(&g, config.bucket) as usize);
    }
    rows
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    dim: usize,
    bucket: u32,
    ngram_min: usize,
    ngram_max: usize,
    vocab_size: usize,
    tokens: Vec<String>,
    counts: Vec<u64>,
    config: TrainConfig,
}

const MAX_HEADER_BYTES: u64 = 1 << 30;

pub(crate) fn read_header<R: BufRead, H: serde::de::DeserializeOwned>(
    r: &mut R,
    magic: &[u8; 4],
) -> Result<H, EmbedError> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)
        .map_err(|_| EmbedError::Format("file too short for magic bytes".into()))?;
    if &got != magic {
        return Err(EmbedError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&got),
            String::from_utf8_lossy(magic)
        )));
    }
    let mut line = Vec::new();
    r.by_ref().take(MAX_HEADER_BYTES).read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(EmbedError::Format("missing header line".into()));
    }
    serde_json::from_slice(&line[..line.len() - 1]).map_err(|e| EmbedError::Format(format!("bad header: {e}")))
}

pub(crate) fn write_f32s<W: Write>(w: &mut W, values: &[f32]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(values.len().min(1 << 16) * 4);
    for chunk in values.chunks(1 << 16) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads exactly `n` floats and requires end of input afterwards.
pub(crate) fn read_f32s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f32>, EmbedError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 4 {
        return Err(EmbedError::Format(format!(
            "data section is {} bytes, header declares {}",
            bytes.len(),
            n * 4
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
