use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ddl::SchemaDocument;
use crate::embed::model::{token_rows, EmbeddingModel, Matrix, TrainConfig};
use crate::embed::sgns::sgns_coefficient;
use crate::embed::vocab::{build_vocabulary, Vocabulary};
use crate::embed::EmbedError;

const NEGATIVE_TABLE_SIZE: usize = 10_000_000;

/// Per-epoch statistics from a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    /// Mean loss per (target, context) pair, one entry per epoch.
    pub epoch_loss: Vec<f64>,
    pub pairs: u64,
}

/// Unigram^0.75 table; sized down for small vocabularies.
fn negative_table(vocab: &Vocabulary) -> Vec<u32> {
    let size = if vocab.len() < 1000 {
        (NEGATIVE_TABLE_SIZE / 1000 * vocab.len()).max(vocab.len())
    } else {
        NEGATIVE_TABLE_SIZE
    };
    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).collect();
    let z: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(size);
    for (id, w) in weights.iter().enumerate() {
        let n = (w * size as f64 / z).ceil() as usize;
        table.extend(std::iter::repeat_n(id as u32, n));
    }
    table
}

/// Row access shared by the single-threaded and lock-free trainers.
trait ParamStore {
    fn read_row(&self, row: usize, out: &mut [f32]);
    /// `row += alpha * x`
    fn axpy_row(&mut self, row: usize, alpha: f32, x: &[f32]);
}

struct DenseStore<'a>(&'a mut Matrix);

impl ParamStore for DenseStore<'_> {
    fn read_row(&self, row: usize, out: &mut [f32]) {
        out.copy_from_slice(self.0.row(row));
    }

    fn axpy_row(&mut self, row: usize, alpha: f32, x: &[f32]) {
        for (r, &v) in self.0.row_mut(row).iter_mut().zip(x) {
            *r += alpha * v;
        }
    }
}

/// Shared matrix for hogwild updates. Concurrent writers may lose updates;
/// every individual load and store is still a whole `f32`.
struct AtomicStore<'a> {
    data: &'a [AtomicU32],
    cols: usize,
}

impl ParamStore for AtomicStore<'_> {
    fn read_row(&self, row: usize, out: &mut [f32]) {
        let src = &self.data[row * self.cols..(row + 1) * self.cols];
        for (o, a) in out.iter_mut().zip(src) {
            *o = f32::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn axpy_row(&mut self, row: usize, alpha: f32, x: &[f32]) {
        let dst = &self.data[row * self.cols..(row + 1) * self.cols];
        for (a, &v) in dst.iter().zip(x) {
            let cur = f32::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + alpha * v).to_bits(), Ordering::Relaxed);
        }
    }
}

struct Scratch {
    hidden: Vec<f32>,
    grad: Vec<f32>,
    row: Vec<f32>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch {
            hidden: vec![0.0; dim],
            grad: vec![0.0; dim],
            row: vec![0.0; dim],
        }
    }
}

/// One SGD step for a (target rows, context, negatives) triple. Returns the loss.
fn train_pair<S: ParamStore>(
    input: &mut S,
    output: &mut S,
    rows: &[usize],
    targets: &[(usize, bool)],
    lr: f32,
    s: &mut Scratch,
) -> f32 {
    s.hidden.iter_mut().for_each(|x| *x = 0.0);
    for &r in rows {
        input.read_row(r, &mut s.row);
        for (h, &x) in s.hidden.iter_mut().zip(&s.row) {
            *h += x;
        }
    }
    let n = rows.len() as f32;
    s.hidden.iter_mut().for_each(|x| *x /= n);
    s.grad.iter_mut().for_each(|x| *x = 0.0);

    let mut loss = 0.0;
    for &(id, positive) in targets {
        output.read_row(id, &mut s.row);
        let (g, l) = sgns_coefficient(&s.hidden, &s.row, positive);
        loss += l;
        for (gh, &o) in s.grad.iter_mut().zip(&s.row) {
            *gh += g * o;
        }
        output.axpy_row(id, -lr * g, &s.hidden);
    }
    let step = -lr / n;
    for &r in rows {
        input.axpy_row(r, step, &s.grad);
    }
    loss
}

struct Corpus {
    docs: Vec<Vec<u32>>,
    rows: Vec<Vec<usize>>,
    negatives: Vec<u32>,
    total_tokens: u64,
}

struct Progress<'a> {
    processed: &'a AtomicU64,
    budget: u64,
    base_lr: f64,
}

impl Progress<'_> {
    fn lr(&self) -> f32 {
        let done = self.processed.load(Ordering::Relaxed) as f64 / self.budget as f64;
        (self.base_lr * (1.0 - done).max(0.0)) as f32
    }
}

/// Runs one worker's share of one epoch; returns (loss sum, pair count).
#[allow(clippy::too_many_arguments)]
fn run_epoch<S: ParamStore>(
    corpus: &Corpus,
    config: &TrainConfig,
    input: &mut S,
    output: &mut S,
    rng: &mut ChaCha8Rng,
    progress: &Progress<'_>,
    worker: usize,
    epoch: usize,
) -> Result<(f64, u64), EmbedError> {
    let mut scratch = Scratch::new(config.dim);
    let mut targets: Vec<(usize, bool)> = Vec::with_capacity(config.negatives + 1);
    let can_sample = corpus.rows.len() > 1;
    let (mut loss_sum, mut pairs) = (0.0f64, 0u64);

    for (d, doc) in corpus.docs.iter().enumerate() {
        if d % config.threads != worker {
            continue;
        }
        let lr = progress.lr();
        let mut doc_loss = 0.0f64;
        for t in 0..doc.len() {
            let reach = if config.window_full {
                doc.len()
            } else {
                rng.gen_range(1..=config.window)
            };
            let lo = t.saturating_sub(reach);
            let hi = (t + reach).min(doc.len() - 1);
            for c in lo..=hi {
                if c == t {
                    continue;
                }
                let ctx = doc[c];
                targets.clear();
                targets.push((ctx as usize, true));
                if can_sample {
                    for _ in 0..config.negatives {
                        let neg = loop {
                            let n = corpus.negatives[rng.gen_range(0..corpus.negatives.len())];
                            if n != ctx {
                                break n;
                            }
                        };
                        targets.push((neg as usize, false));
                    }
                }
                let l = train_pair(input, output, &corpus.rows[doc[t] as usize], &targets, lr, &mut scratch);
                doc_loss += f64::from(l);
                pairs += 1;
            }
        }
        if !doc_loss.is_finite() {
            return Err(EmbedError::NonFiniteLoss {
                epoch,
                document: d,
                learning_rate: f64::from(lr),
            });
        }
        loss_sum += doc_loss;
        progress.processed.fetch_add(doc.len() as u64, Ordering::Relaxed);
    }
    Ok((loss_sum, pairs))
}

/// Trains subword skip-gram embeddings with negative sampling.
pub fn train(documents: &[SchemaDocument], config: &TrainConfig) -> Result<EmbeddingModel, EmbedError> {
    train_with_report(documents, config).map(|(m, _)| m)
}

pub fn train_with_report(
    documents: &[SchemaDocument],
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainReport), EmbedError> {
    config.validate()?;
    if documents.is_empty() {
        return Err(EmbedError::NoTrainableTokens);
    }
    let vocab = build_vocabulary(documents, config.min_count)?;
    let v = vocab.len();

    let docs: Vec<Vec<u32>> = documents
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| vocab.id(t)).collect())
        .collect();
    let corpus = Corpus {
        total_tokens: docs.iter().map(|d| d.len() as u64).sum(),
        rows: vocab.tokens().iter().map(|t| token_rows(&vocab, config, t)).collect(),
        negatives: negative_table(&vocab),
        docs,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 1.0 / (2.0 * config.dim as f32);
    let init = Uniform::new_inclusive(-bound, bound);
    let in_rows = v + config.bucket as usize;
    let mut input = Matrix::from_vec(
        in_rows,
        config.dim,
        (0..in_rows * config.dim).map(|_| init.sample(&mut rng)).collect(),
    );
    let mut output = Matrix::zeros(v, config.dim);

    let processed = AtomicU64::new(0);
    let progress = Progress {
        processed: &processed,
        budget: (corpus.total_tokens * config.epochs as u64).max(1),
        base_lr: config.learning_rate,
    };
    let mut report = TrainReport::default();

    if config.threads == 1 {
        let mut worker_rng = ChaCha8Rng::seed_from_u64(config.seed);
        worker_rng.set_stream(1);
        let (mut inp, mut out) = (DenseStore(&mut input), DenseStore(&mut output));
        for epoch in 0..config.epochs {
            let (loss, pairs) = run_epoch(
                &corpus,
                config,
                &mut inp,
                &mut out,
                &mut worker_rng,
                &progress,
                0,
                epoch,
            )?;
            report.pairs += pairs;
            report
                .epoch_loss
                .push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        }
    } else {
        let to_atomic =
            |m: Matrix| -> Vec<AtomicU32> { m.into_vec().into_iter().map(|x| AtomicU32::new(x.to_bits())).collect() };
        let shared_in = to_atomic(input);
        let shared_out = to_atomic(output);
        let mut rngs: Vec<ChaCha8Rng> = (0..config.threads)
            .map(|w| {
                let mut r = ChaCha8Rng::seed_from_u64(config.seed);
                r.set_stream(w as u64 + 1);
                r
            })
            .collect();
        for epoch in 0..config.epochs {
            let results: Vec<Result<(f64, u64), EmbedError>> = std::thread::scope(|scope| {
                let handles: Vec<_> = rngs
                    .iter_mut()
                    .enumerate()
                    .map(|(w, rng)| {
                        let (corpus, progress) = (&corpus, &progress);
                        let (si, so) = (&shared_in, &shared_out);
                        scope.spawn(move || {
                            let mut inp = AtomicStore {
                                data: si,
                                cols: config.dim,
                            };
                            let mut out = AtomicStore {
                                data: so,
                                cols: config.dim,
                            };
                            run_epoch(corpus, config, &mut inp, &mut out, rng, progress, w, epoch)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            let (mut loss, mut pairs) = (0.0, 0);
            for r in results {
                let (l, p) = r?;
                loss += l;
                pairs += p;
            }
            report.pairs += pairs;
            report
                .epoch_loss
                .push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        }
        let from_atomic =
            |a: Vec<AtomicU32>| -> Vec<f32> { a.into_iter().map(|x| f32::from_bits(x.into_inner())).collect() };
        input = Matrix::from_vec(in_rows, config.dim, from_atomic(shared_in));
        output = Matrix::from_vec(v, config.dim, from_atomic(shared_out));
    }

    let model = EmbeddingModel::from_parts(vocab, config.clone(), input, output)?;
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(tokens: &[&str]) -> SchemaDocument {
        SchemaDocument {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 8,
            bucket: 1000,
            epochs: 2,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn negative_table_follows_smoothed_unigram() {
        let vocab = Vocabulary::from_parts(vec!["a".into(), "b".into()], vec![16, 1], 1).unwrap();
        let table = negative_table(&vocab);
        let a = table.iter().filter(|&&i| i == 0).count() as f64;
        let b = table.iter().filter(|&&i| i == 1).count() as f64;
        // 16^0.75 = 8
        assert!((a / b - 8.0).abs() < 1e-2, "{a} {b}");
        assert!(table.len() >= 2 * 10_000 && table.len() <= 2 * 10_000 + 2);
    }

    #[test]
    fn shapes_and_finiteness() {
        let docs = [doc(&["users", "id", "email"]), doc(&["orders", "id", "total"])];
        let m = train(&docs, &small_config()).unwrap();
        assert_eq!(m.input_matrix().rows(), m.vocabulary().len() + 1000);
        assert_eq!(m.input_matrix().cols(), 8);
        assert_eq!(m.output_matrix().rows(), m.vocabulary().len());
        assert!(m.input_matrix().as_slice().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn single_token_vocabulary_trains() {
        let m = train(&[doc(&["t", "t"])], &small_config()).unwrap();
        assert_eq!(m.vocabulary().len(), 1);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            train(&[], &small_config()),
            Err(EmbedError::NoTrainableTokens)
        ));
    }

    #[test]
    fn non_finite_loss_aborts() {
        let cfg = TrainConfig {
            learning_rate: 1e38,
            ..small_config()
        };
        let docs: Vec<_> = (0..20).map(|_| doc(&["users", "id", "email", "name"])).collect();
        match train(&docs, &cfg) {
            Err(EmbedError::NonFiniteLoss { .. }) => {}
            other => panic!("expected a non-finite loss error, got {other:?}"),
        }
    }

    #[test]
    fn hogwild_mode_produces_a_model() {
        let docs: Vec<_> = (0..50)
            .map(|i| doc(&["users", "id", if i % 2 == 0 { "email" } else { "name" }]))
            .collect();
        let cfg = TrainConfig {
            threads: 3,
            ..small_config()
        };
        let (m, report) = train_with_report(&docs, &cfg).unwrap();
        assert_eq!(report.epoch_loss.len(), 2);
        assert!(m.input_matrix().as_slice().iter().all(|x| x.is_finite()));
    }
}
