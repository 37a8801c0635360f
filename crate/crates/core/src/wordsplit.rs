//! Splitting concatenated names into words with a Zipf-cost dynamic program.
//!
//! A word of frequency rank `r` in a lexicon of `N` words costs
//! `ln(r · ln N)`; a piece that is not in the lexicon costs
//! `len · ln(N · ln N) + 9`. The segmentation with the lowest total cost wins.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::BufRead;

const UNKNOWN_PENALTY: f64 = 9.0;

static BUNDLED_WORDS: &str = include_str!("../../../data/lexicon/words.txt");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("lexicon is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Words ranked by descending corpus frequency.
#[derive(Clone, Debug)]
pub struct FrequencyLexicon {
    ranks: HashMap<String, u32>,
    max_len: usize,
    log_n: f64,
    unknown_per_char: f64,
}

impl FrequencyLexicon {
    pub fn from_words<I, S>(words: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ranks = HashMap::new();
        let mut max_len = 0;
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if w.is_empty() || ranks.contains_key(&w) {
                continue;
            }
            max_len = max_len.max(w.chars().count());
            let rank = ranks.len() as u32 + 1;
            ranks.insert(w, rank);
        }
        if ranks.is_empty() {
            return Err(LexiconError::Empty);
        }
        let n = ranks.len() as f64;
        Ok(FrequencyLexicon {
            ranks,
            max_len,
            log_n: n.ln(),
            unknown_per_char: (n * n.ln()).ln(),
        })
    }

    /// The English word list shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_words(BUNDLED_WORDS.lines()).expect("bundled lexicon is not empty")
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, word: &str) -> Option<u32> {
        self.ranks.get(word).copied()
    }

    /// Cost of a single piece, known or not.
    pub fn piece_cost(&self, piece: &str) -> f64 {
        match self.rank(piece) {
            Some(r) => (f64::from(r) * self.log_n).ln(),
            None => piece.chars().count() as f64 * self.unknown_per_char + UNKNOWN_PENALTY,
        }
    }
}

pub fn load_lexicon<R: BufRead>(source: R) -> Result<FrequencyLexicon, LexiconError> {
    let lines = source.lines().collect::<Result<Vec<_>, _>>()?;
    FrequencyLexicon::from_words(lines)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub words: Vec<String>,
    pub cost: f64,
}

#[derive(Clone)]
struct Best {
    cost: f64,
    splits: Vec<usize>,
}

impl Best {
    // lower cost, then fewer words, then earlier split positions
    fn better_than(&self, other: &Best) -> bool {
        match self.cost.partial_cmp(&other.cost) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) | None => false,
            Some(Ordering::Equal) => (self.splits.len(), &self.splits) < (other.splits.len(), &other.splits),
        }
    }
}

/// Minimal-cost segmentation of one alphabetic chunk.
pub fn segment_chunk(chunk: &str, lexicon: &FrequencyLexicon) -> Segmentation {
    let chars: Vec<char> = chunk.chars().collect();
    let n = chars.len();
    if n == 0 {
        return Segmentation {
            words: Vec::new(),
            cost: 0.0,
        };
    }
    // byte offset of each char boundary
    let mut bounds: Vec<usize> = chunk.char_indices().map(|(i, _)| i).collect();
    bounds.push(chunk.len());

    let mut best: Vec<Option<Best>> = vec![None; n + 1];
    best[0] = Some(Best {
        cost: 0.0,
        splits: Vec::new(),
    });
    for end in 1..=n {
        let mut winner: Option<Best> = None;
        for start in 0..end {
            let prev = best[start].as_ref().expect("prefixes are always reachable");
            let piece = &chunk[bounds[start]..bounds[end]];
            let piece_cost = if end - start <= lexicon.max_len {
                lexicon.piece_cost(piece)
            } else {
                (end - start) as f64 * lexicon.unknown_per_char + UNKNOWN_PENALTY
            };
            let mut splits = prev.splits.clone();
            if start > 0 {
                splits.push(start);
            }
            let cand = Best {
                cost: prev.cost + piece_cost,
                splits,
            };
            if winner.as_ref().is_none_or(|w| cand.better_than(w)) {
                winner = Some(cand);
            }
        }
        best[end] = winner;
    }

    let Best { cost, splits } = best[n].take().expect("end is reachable");
    let mut words = Vec::with_capacity(splits.len() + 1);
    let mut from = 0;
    for &s in splits.iter().chain(std::iter::once(&n)) {
        words.push(chunk[bounds[from]..bounds[s]].to_string());
        from = s;
    }
    Segmentation { words, cost }
}

/// Lowercases `name`, splits it on every non-letter (underscores, digits,
/// punctuation are dropped) and segments each letter run.
pub fn split_name(name: &str, lexicon: &FrequencyLexicon) -> Segmentation {
    let lowered = name.to_lowercase();
    let mut words = Vec::new();
    let mut cost = 0.0;
    for chunk in lowered.split(|c: char| !c.is_alphabetic()).filter(|c| !c.is_empty()) {
        let seg = segment_chunk(chunk, lexicon);
        cost += seg.cost;
        words.extend(seg.words);
    }
    Segmentation { words, cost }
}
