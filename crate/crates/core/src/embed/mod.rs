//! Subword skip-gram embeddings for schema tokens.

mod model;
pub mod sgns;
mod subword;
mod train;
mod vocab;

use std::path::{Path, PathBuf};

pub use model::{EmbeddingModel, Matrix, TrainConfig, MODEL_MAGIC};
pub use subword::{fnv1a, ngram_bucket, subword_ngrams};
pub use train::{train, train_with_report, TrainReport};
pub use vocab::{build_vocabulary, Vocabulary};

pub(crate) use model::{read_f32s, read_header, write_f32s};

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("no trainable tokens")]
    NoTrainableTokens,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss in epoch {epoch}, document {document} (learning rate {learning_rate})")]
    NonFiniteLoss {
        epoch: usize,
        document: usize,
        learning_rate: f64,
    },
    #[error("empty token")]
    EmptyToken,
    #[error("token `{0}` has no word row and no subword n-grams")]
    NoSubwords(String),
    #[error("undefined cosine: zero vector")]
    UndefinedCosine,
    #[error("vector lengths differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("malformed model data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{}: {source}", path.display())]
    At {
        path: PathBuf,
        #[source]
        source: Box<EmbedError>,
    },
}

impl EmbedError {
    pub(crate) fn io_at(path: &Path, e: std::io::Error) -> Self {
        EmbedError::Io(e).at(path)
    }

    pub(crate) fn at(self, path: &Path) -> Self {
        match self {
            e @ EmbedError::At { .. } => e,
            e => EmbedError::At {
                path: path.to_path_buf(),
                source: Box::new(e),
            },
        }
    }
}

/// Cosine similarity, accumulated in `f64`.
pub fn cosine<T: Copy + Into<f64>>(u: &[T], v: &[T]) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a.into(), b.into());
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbedError::UndefinedCosine);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        let u = [0.3f64, -1.2, 2.0];
        assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0f64, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(matches!(
            cosine(&[0.0f32, 0.0], &[1.0, 0.0]),
            Err(EmbedError::UndefinedCosine)
        ));
        assert!(matches!(
            cosine(&[1.0f32], &[1.0, 0.0]),
            Err(EmbedError::DimensionMismatch(1, 2))
        ));
    }

    fn nonzero_vec() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..16).prop_flat_map(|n| {
            (
                proptest::collection::vec(-10.0f64..10.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant((u, v) in nonzero_vec(), alpha in 1e-3f64..1e3) {
            prop_assume!(u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0));
            let c = cosine(&u, &v).unwrap();
            prop_assert_eq!(c, cosine(&v, &u).unwrap());
            prop_assert!((-1.0..=1.0).contains(&c));
            let scaled: Vec<f64> = u.iter().map(|x| x * alpha).collect();
            prop_assert!((cosine(&scaled, &v).unwrap() - c).abs() < 1e-12);
        }
    }
}
