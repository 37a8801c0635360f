//! Dataset splitting, fuzzy-F1 scoring and distribution reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ddl::{SourceLocation, TableSchema};
use crate::namegen::{compose_table_vector, suggest, NameIndex, TokenVectors};
use crate::wordnet::WordNetGraph;
use crate::wordsplit::{split_name, FrequencyLexicon};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("need at least 2 schemas to split, got {0}")]
    TooFewSchemas(usize),
    #[error("train fraction must be in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("split of {total} schemas at fraction {fraction} leaves one side empty")]
    EmptySide { total: usize, fraction: f64 },
    #[error("test set is empty")]
    EmptyTest,
    #[error("{}:{line}: {message}", path.display())]
    Corpus {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// Similarity between two words in `[0, 1]`.
pub trait WordSimilarity: Sync {
    fn similarity(&self, a: &str, b: &str) -> f64;
}

impl WordSimilarity for WordNetGraph {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        self.path_similarity(a, b).value()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FuzzyScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FuzzyScore {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        FuzzyScore { precision, recall, f1 }
    }
}

/// Largest total weight of a one-to-one matching between rows and columns
/// (Hungarian algorithm with potentials). Unmatched items contribute nothing.
pub fn max_weight_matching(weights: &[Vec<f64>]) -> f64 {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    if rows > cols {
        let transposed: Vec<Vec<f64>> = (0..cols).map(|j| weights.iter().map(|r| r[j]).collect()).collect();
        return max_weight_matching(&transposed);
    }
    // minimize -weight; 1-based with column 0 as the sentinel
    let (n, m) = (rows, cols);
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| weights[owner[j] - 1][j - 1])
        .sum()
}

/// Fuzzy precision/recall over already-split word lists.
///
/// Words are paired one-to-one so that the summed similarity `M` is as large
/// as possible; then `P = M / |predicted|` and `R = M / |original|`.
pub fn fuzzy_f1_words<S: WordSimilarity + ?Sized>(original: &[String], predicted: &[String], sim: &S) -> FuzzyScore {
    if original.is_empty() || predicted.is_empty() {
        return FuzzyScore::default();
    }
    let weights: Vec<Vec<f64>> = original
        .iter()
        .map(|o| predicted.iter().map(|q| sim.similarity(o, q)).collect())
        .collect();
    let matched = max_weight_matching(&weights);
    FuzzyScore::from_pr(matched / predicted.len() as f64, matched / original.len() as f64)
}

pub fn fuzzy_f1<S: WordSimilarity + ?Sized>(
    original: &str,
    predicted: &str,
    lexicon: &FrequencyLexicon,
    sim: &S,
) -> FuzzyScore {
    let o = split_name(original, lexicon).words;
    let q = split_name(predicted, lexicon).words;
    if o.is_empty() || q.is_empty() {
        let which = if o.is_empty() { original } else { predicted };
        log::warn!("`{which}` has no words after splitting; scoring 0");
        return FuzzyScore::default();
    }
    fuzzy_f1_words(&o, &q, sim)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.9,
            seed: 42,
        }
    }
}

/// Shuffles deterministically and cuts at `floor(fraction * n)`.
pub fn split_dataset(
    corpus: &[TableSchema],
    config: &SplitConfig,
) -> Result<(Vec<TableSchema>, Vec<TableSchema>), EvalError> {
    let f = config.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(EvalError::InvalidFraction(f));
    }
    let n = corpus.len();
    if n < 2 {
        return Err(EvalError::TooFewSchemas(n));
    }
    let cut = (f * n as f64).floor() as usize;
    if cut == 0 || cut == n {
        return Err(EvalError::EmptySide { total: n, fraction: f });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    let train = order[..cut].iter().map(|&i| corpus[i].clone()).collect();
    let test = order[cut..].iter().map(|&i| corpus[i].clone()).collect();
    Ok((train, test))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    pub original: String,
    /// Top-ranked suggestion; empty when prediction failed.
    pub predicted: String,
    pub score: FuzzyScore,
    /// Whether the original name was among the top-k suggestions.
    pub hit: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSummary {
    pub count: usize,
    pub k: usize,
    pub mean: f64,
    pub zero_fraction: f64,
    pub one_fraction: f64,
    pub top_k_hit_rate: f64,
    /// Nearest-rank quantiles at 0%, 10%, ..., 100%.
    pub deciles: [f64; 11],
    /// `(x, fraction of scores <= x)` for x = 0.00, 0.01, ..., 1.00.
    pub cdf: Vec<(f64, f64)>,
}

impl DistributionSummary {
    pub fn from_records(records: &[EvalRecord], k: usize) -> Self {
        let mut f1: Vec<f64> = records.iter().map(|r| r.score.f1).collect();
        f1.sort_by(f64::total_cmp);
        let n = f1.len();
        let frac = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        let mut deciles = [0.0; 11];
        if n > 0 {
            for (i, d) in deciles.iter_mut().enumerate() {
                let rank = ((i * n) as f64 / 10.0).ceil() as usize;
                *d = f1[rank.max(1) - 1];
            }
        }
        let cdf = (0..=100)
            .map(|i| {
                let x = i as f64 / 100.0;
                (x, frac(f1.partition_point(|&v| v <= x)))
            })
            .collect();
        DistributionSummary {
            count: n,
            k,
            mean: if n == 0 { 0.0 } else { f1.iter().sum::<f64>() / n as f64 },
            zero_fraction: frac(f1.iter().filter(|&&v| v == 0.0).count()),
            one_fraction: frac(f1.iter().filter(|&&v| v == 1.0).count()),
            top_k_hit_rate: frac(records.iter().filter(|r| r.hit).count()),
            deciles,
            cdf,
        }
    }

    pub fn median(&self) -> f64 {
        self.deciles[5]
    }
}

/// Everything `evaluate` needs besides the test set.
pub struct Evaluator<'a, M: ?Sized, S: ?Sized> {
    pub model: &'a M,
    pub index: &'a NameIndex,
    pub lexicon: &'a FrequencyLexicon,
    pub similarity: &'a S,
    pub k: usize,
}

impl<M, S> Evaluator<'_, M, S>
where
    M: TokenVectors + Sync + ?Sized,
    S: WordSimilarity + ?Sized,
{
    fn score_one(&self, schema: &TableSchema) -> EvalRecord {
        let prediction =
            compose_table_vector(self.model, &schema.columns).and_then(|q| suggest(self.index, &q, self.k.max(1)));
        match prediction {
            Ok(top) => {
                let predicted = top.first().map(|s| s.name.clone()).unwrap_or_default();
                let hit = top.iter().any(|s| s.name == schema.table_name);
                EvalRecord {
                    score: fuzzy_f1(&schema.table_name, &predicted, self.lexicon, self.similarity),
                    original: schema.table_name.clone(),
                    predicted,
                    hit,
                    error: None,
                }
            }
            Err(e) => {
                log::warn!("prediction failed for `{}`: {e}", schema.table_name);
                EvalRecord {
                    original: schema.table_name.clone(),
                    predicted: String::new(),
                    score: FuzzyScore::default(),
                    hit: false,
                    error: Some(e.to_string()),
                }
            }
        }
    }

    /// Predicts and scores every test schema. Failed predictions score 0;
    /// output order follows `test` for any thread count.
    pub fn evaluate(
        &self,
        test: &[TableSchema],
        threads: usize,
    ) -> Result<(Vec<EvalRecord>, DistributionSummary), EvalError> {
        if test.is_empty() {
            return Err(EvalError::EmptyTest);
        }
        let records: Vec<EvalRecord> = if threads <= 1 {
            test.iter().map(|s| self.score_one(s)).collect()
        } else {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| EvalError::Pool(e.to_string()))?
                .install(|| test.par_iter().map(|s| self.score_one(s)).collect())
        };
        let summary = DistributionSummary::from_records(&records, self.k.max(1));
        Ok((records, summary))
    }
}

/// Parses a corpus file: one schema per line, table name then columns.
pub fn parse_corpus(text: &str, path: &Path) -> Result<Vec<TableSchema>, EvalError> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for (i, line) in text.split('\n').enumerate() {
        let start = offset;
        offset += line.len() + 1;
        let mut tokens = line.split_whitespace().map(str::to_string);
        let Some(name) = tokens.next() else {
            continue;
        };
        let source = SourceLocation {
            path: path.to_path_buf(),
            offset: start,
        };
        let schema = TableSchema::new(name, tokens.collect(), source).map_err(|e| EvalError::Corpus {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(schema);
    }
    Ok(out)
}

/// One line per schema in the training-document format.
pub fn format_corpus(schemas: &[TableSchema]) -> String {
    let mut s = String::new();
    for schema in schemas {
        s.push_str(&schema.to_document().to_line());
        s.push('\n');
    }
    s
}

/// `original<TAB>predicted<TAB>P<TAB>R<TAB>f1`, six decimals.
pub fn results_tsv(records: &[EvalRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(
            s,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            r.original, r.predicted, r.score.precision, r.score.recall, r.score.f1
        );
    }
    s
}

pub fn cdf_tsv(summary: &DistributionSummary) -> String {
    let mut s = String::new();
    for (x, fx) in &summary.cdf {
        let _ = writeln!(s, "{x:.2}\t{fx:.6}");
    }
    s
}

pub fn summary_text(summary: &DistributionSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "records          {}", summary.count);
    let _ = writeln!(s, "mean f1          {:.4}", summary.mean);
    let _ = writeln!(s, "median f1        {:.4}", summary.median());
    let _ = writeln!(s, "f1 = 0           {:.4}", summary.zero_fraction);
    let _ = writeln!(s, "f1 = 1           {:.4}", summary.one_fraction);
    let _ = writeln!(s, "top-{:<2} hit rate  {:.4}", summary.k, summary.top_k_hit_rate);
    let _ = writeln!(s, "deciles");
    for (i, d) in summary.deciles.iter().enumerate() {
        let _ = writeln!(s, "  {:>3}%  {:.4}", i * 10, d);
    }
    s
}
