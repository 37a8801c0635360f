use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use c2v_core::clean::{clean_corpus, CleanConfig};
use c2v_core::ddl::{extract_schemas, TableSchema};
use c2v_core::embed::{train as train_model, EmbeddingModel, TrainConfig};
use c2v_core::eval::{
    cdf_tsv, format_corpus, parse_corpus, results_tsv, split_dataset as split_corpus, summary_text, Evaluator,
    SplitConfig,
};
use c2v_core::fsutil::write_string_atomic;
use c2v_core::namegen::{build_name_index, compose_table_vector, suggest as suggest_names, NameIndex};
use c2v_core::wordnet::WordNetGraph;
use c2v_core::wordsplit::{load_lexicon, split_name, FrequencyLexicon};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::PipelineConfig;
use crate::{
    CleanArgs, EvalArgs, HyperParams, SplitArgs, SplitDatasetArgs, SuggestArgs, TrainArgs, WnsimArgs, WordNetArg,
};

/// Bad flag values or combinations that clap cannot catch; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            anyhow::bail!("output directory {} does not exist", dir.display())
        }
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    write_string_atomic(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_corpus(path: &Path) -> Result<Vec<TableSchema>> {
    Ok(parse_corpus(&read_text(path)?, path)?)
}

fn index_path(model: &Path, index: Option<&Path>) -> PathBuf {
    index.map_or_else(|| model.with_extension("c2i"), Path::to_path_buf)
}

pub fn default_wordnet_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/wordnet-3.0"))
}

fn load_wordnet(dir: Option<&Path>) -> Result<WordNetGraph> {
    let dir = dir.map_or_else(default_wordnet_dir, Path::to_path_buf);
    let graph = WordNetGraph::load(&dir).with_context(|| format!("cannot load WordNet from {}", dir.display()))?;
    log::info!(
        "WordNet: {} synsets, {} lemmas",
        graph.synset_count(),
        graph.lemma_count()
    );
    Ok(graph)
}

fn lexicon(path: Option<&Path>) -> Result<FrequencyLexicon> {
    match path {
        None => Ok(FrequencyLexicon::bundled()),
        Some(p) => {
            let file = File::open(p).with_context(|| format!("cannot read {}", p.display()))?;
            load_lexicon(BufReader::new(file)).with_context(|| format!("bad lexicon {}", p.display()))
        }
    }
}

/// Independent seed for one pipeline stage.
fn derive_seed(seed: u64, stage: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng.next_u64()
}

fn extract_all(inputs: &[PathBuf]) -> Result<Vec<TableSchema>> {
    let mut schemas = Vec::new();
    for path in inputs {
        let text = read_text(path)?;
        let (found, warnings) = extract_schemas(&text, path);
        for w in &warnings {
            log::warn!("{w}");
        }
        log::info!(
            "{}: {} tables, {} warnings",
            path.display(),
            found.len(),
            warnings.len()
        );
        schemas.extend(found);
    }
    Ok(schemas)
}

pub fn extract(inputs: &[PathBuf], output: Option<&Path>) -> Result<()> {
    let schemas = if inputs.is_empty() {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .context("cannot read standard input")?;
        let (found, warnings) = extract_schemas(&text, Path::new("<stdin>"));
        for w in &warnings {
            log::warn!("{w}");
        }
        found
    } else {
        extract_all(inputs)?
    };
    let corpus = format_corpus(&schemas);
    match output {
        Some(p) => write_text(p, &corpus),
        None => io::stdout()
            .write_all(corpus.as_bytes())
            .context("cannot write standard output"),
    }
}

pub fn clean(a: &CleanArgs) -> Result<()> {
    let cfg = CleanConfig {
        rare_trigram_fraction: a.rare_trigram_fraction,
        digit_fraction: a.digit_fraction,
        ..CleanConfig::default()
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let corpus = load_corpus(&a.input)?;
    let (kept, report) = clean_corpus(&corpus, &cfg);
    write_text(&a.output, &format_corpus(&kept))?;
    if let Some(p) = &a.rejections {
        write_text(p, &report.log_lines())?;
    }
    print!("{}", report.summary(corpus.len()));
    Ok(())
}

fn train_config(p: &HyperParams, seed: u64, threads: usize) -> TrainConfig {
    TrainConfig {
        dim: p.dim,
        window: p.window,
        window_full: p.window_full,
        epochs: p.epochs,
        learning_rate: p.learning_rate,
        negatives: p.negatives,
        ngram_min: p.ngram_min,
        ngram_max: p.ngram_max,
        bucket: p.bucket,
        min_count: p.min_count,
        seed,
        threads,
    }
}

/// Trains on `corpus`, writes the model and the index of its table names.
fn train_and_index(corpus: &[TableSchema], source: &Path, cfg: &TrainConfig, model: &Path, index: &Path) -> Result<()> {
    ensure_parent(model)?;
    ensure_parent(index)?;
    let docs: Vec<_> = corpus.iter().map(TableSchema::to_document).collect();
    let m = train_model(&docs, cfg).with_context(|| format!("training on {} failed", source.display()))?;
    m.save(model)
        .with_context(|| format!("cannot write {}", model.display()))?;
    let names: Vec<&str> = corpus.iter().map(|s| s.table_name.as_str()).collect();
    let idx = build_name_index(&m, &names).context("cannot build the name index")?;
    idx.save(index)
        .with_context(|| format!("cannot write {}", index.display()))?;
    println!(
        "trained on {} schemas: {} tokens, {} indexed names",
        corpus.len(),
        m.vocabulary().len(),
        idx.len()
    );
    Ok(())
}

pub fn train(a: &TrainArgs) -> Result<()> {
    let cfg = train_config(&a.params, a.seed, a.threads);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let corpus = load_corpus(&a.corpus)?;
    train_and_index(
        &corpus,
        &a.corpus,
        &cfg,
        &a.model,
        &index_path(&a.model, a.index.as_deref()),
    )
}

fn load_model_and_index(model: &Path, index: Option<&Path>) -> Result<(EmbeddingModel, NameIndex)> {
    let m = EmbeddingModel::load(model)?;
    let ip = index_path(model, index);
    let idx = NameIndex::load(&ip)?;
    if idx.dim() != m.dim() {
        anyhow::bail!(
            "index {} has dimension {}, model {} has {}",
            ip.display(),
            idx.dim(),
            model.display(),
            m.dim()
        );
    }
    Ok((m, idx))
}

pub fn suggest(a: &SuggestArgs) -> Result<()> {
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let columns: Vec<String> = a.columns.iter().map(|c| c.trim().to_lowercase()).collect();
    if columns.iter().any(String::is_empty) {
        return Err(usage("--columns contains an empty name"));
    }
    let (model, index) = load_model_and_index(&a.model, a.index.as_deref())?;
    let query = compose_table_vector(&model, &columns)?;
    for s in suggest_names(&index, &query, a.k)? {
        println!("{}\t{:.6}", s.name, s.score);
    }
    Ok(())
}

pub fn split(a: &SplitArgs) -> Result<()> {
    let lex = lexicon(a.lexicon.as_deref())?;
    println!("{}", split_name(&a.name, &lex).words.join(" "));
    Ok(())
}

pub fn split_dataset(a: &SplitDatasetArgs) -> Result<()> {
    if !(a.fraction > 0.0 && a.fraction < 1.0) {
        return Err(usage(format!("--fraction must be in (0, 1), got {}", a.fraction)));
    }
    let corpus = load_corpus(&a.input)?;
    let cfg = SplitConfig {
        train_fraction: a.fraction,
        seed: a.seed,
    };
    let (train, test) = split_corpus(&corpus, &cfg).with_context(|| format!("cannot split {}", a.input.display()))?;
    write_text(&a.train, &format_corpus(&train))?;
    write_text(&a.test, &format_corpus(&test))?;
    println!("train {}\ttest {}", train.len(), test.len());
    Ok(())
}

fn wordnet_dir(arg: &WordNetArg) -> Option<&Path> {
    arg.wordnet_dir.as_deref()
}

pub fn wnsim(a: &WnsimArgs) -> Result<()> {
    let (w1, w2) = (a.word1.trim().to_lowercase(), a.word2.trim().to_lowercase());
    if w1.is_empty() || w2.is_empty() {
        return Err(usage("words must be non-empty"));
    }
    let graph = load_wordnet(wordnet_dir(&a.wordnet))?;
    println!("{:.6}", graph.path_similarity(&w1, &w2).value());
    Ok(())
}

struct EvalInputs<'a> {
    model: &'a EmbeddingModel,
    index: &'a NameIndex,
    test: &'a [TableSchema],
    lexicon: &'a FrequencyLexicon,
    wordnet: &'a WordNetGraph,
    k: usize,
    threads: usize,
}

fn run_eval(inp: &EvalInputs<'_>, out: Option<&Path>) -> Result<()> {
    let evaluator = Evaluator {
        model: inp.model,
        index: inp.index,
        lexicon: inp.lexicon,
        similarity: inp.wordnet,
        k: inp.k,
    };
    let (records, summary) = evaluator.evaluate(inp.test, inp.threads)?;
    let text = summary_text(&summary);
    print!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        write_text(&dir.join("results.tsv"), &results_tsv(&records))?;
        write_text(&dir.join("cdf.tsv"), &cdf_tsv(&summary))?;
        write_text(&dir.join("summary.txt"), &text)?;
    }
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if a.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    let (model, index) = load_model_and_index(&a.model, a.index.as_deref())?;
    let test = load_corpus(&a.test)?;
    if test.is_empty() {
        anyhow::bail!("test corpus {} is empty", a.test.display());
    }
    let lex = lexicon(a.lexicon.as_deref())?;
    let wordnet = load_wordnet(wordnet_dir(&a.wordnet))?;
    let inputs = EvalInputs {
        model: &model,
        index: &index,
        test: &test,
        lexicon: &lex,
        wordnet: &wordnet,
        k: a.k,
        threads: a.threads,
    };
    run_eval(&inputs, a.out.as_deref())
}

pub fn pipeline(config: &Path) -> Result<()> {
    let mut cfg = PipelineConfig::load(config)?;
    for p in &cfg.sql {
        if !p.is_file() {
            anyhow::bail!("input file {} does not exist", p.display());
        }
    }
    cfg.train.seed = derive_seed(cfg.seed, 1);
    cfg.split.seed = derive_seed(cfg.seed, 2);
    cfg.train.validate().map_err(|e| usage(e.to_string()))?;
    cfg.clean.validate().map_err(|e| usage(e.to_string()))?;
    if cfg.k == 0 || cfg.threads == 0 {
        return Err(usage("k and threads must be at least 1"));
    }
    // fail on missing resources before the expensive steps
    let lex = lexicon(cfg.lexicon.as_deref())?;
    let wordnet = load_wordnet(cfg.wordnet_dir.as_deref())?;

    let out = &cfg.out_dir;
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let schemas = extract_all(&cfg.sql)?;
    write_text(&out.join("corpus.txt"), &format_corpus(&schemas))?;

    let (kept, report) = clean_corpus(&schemas, &cfg.clean);
    write_text(&out.join("clean.txt"), &format_corpus(&kept))?;
    write_text(&out.join("rejections.tsv"), &report.log_lines())?;
    print!("{}", report.summary(schemas.len()));

    let (train, test) = split_corpus(&kept, &cfg.split).context("cannot split the cleaned corpus")?;
    write_text(&out.join("train.txt"), &format_corpus(&train))?;
    write_text(&out.join("test.txt"), &format_corpus(&test))?;

    let model_path = out.join("model.c2v");
    let index_file = out.join("model.c2i");
    train_and_index(&train, &out.join("train.txt"), &cfg.train, &model_path, &index_file)?;
    let (model, index) = load_model_and_index(&model_path, Some(&index_file))?;
    let inputs = EvalInputs {
        model: &model,
        index: &index,
        test: &test,
        lexicon: &lex,
        wordnet: &wordnet,
        k: cfg.k,
        threads: cfg.threads,
    };
    run_eval(&inputs, Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seeds_differ_and_repeat() {
        assert_eq!(derive_seed(42, 1), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 1), derive_seed(42, 2));
        assert_ne!(derive_seed(42, 1), derive_seed(43, 1));
    }

    #[test]
    fn index_defaults_next_to_model() {
        assert_eq!(index_path(Path::new("out/m.c2v"), None), PathBuf::from("out/m.c2i"));
        assert_eq!(
            index_path(Path::new("m.c2v"), Some(Path::new("x.idx"))),
            PathBuf::from("x.idx")
        );
    }

    #[test]
    fn missing_output_directory_is_reported() {
        let err = write_text(Path::new("/definitely/not/here/out.txt"), "x").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here"));
    }
}
