use std::collections::HashMap;

use crate::ddl::SchemaDocument;
use crate::embed::EmbedError;

/// Token ids in descending frequency order, ties broken lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from tokens already in id order.
    pub fn from_parts(tokens: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Self, EmbedError> {
        if tokens.len() != counts.len() {
            return Err(EmbedError::Format(format!(
                "{} tokens but {} counts",
                tokens.len(),
                counts.len()
            )));
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), i as u32).is_some() {
                return Err(EmbedError::Format(format!("duplicate token `{t}`")));
            }
        }
        Ok(Vocabulary {
            tokens,
            counts,
            ids,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

pub fn build_vocabulary(documents: &[SchemaDocument], min_count: u64) -> Result<Vocabulary, EmbedError> {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for doc in documents {
        for t in &doc.tokens {
            *freq.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(EmbedError::NoTrainableTokens);
    }
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let (tokens, counts) = kept.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
    Vocabulary::from_parts(tokens, counts, min_count)
}
