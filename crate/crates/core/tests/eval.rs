mod common;

use std::sync::OnceLock;

use c2v_core::embed::TrainConfig;
use c2v_core::eval::{fuzzy_f1, fuzzy_f1_words, Evaluator, WordSimilarity};
use c2v_core::namegen::build_name_index;
use c2v_core::wordnet::WordNetGraph;
use c2v_core::wordsplit::FrequencyLexicon;
use c2v_core::{train, TableSchema};
use proptest::prelude::*;

fn wordnet() -> &'static WordNetGraph {
    static G: OnceLock<WordNetGraph> = OnceLock::new();
    G.get_or_init(|| WordNetGraph::load(&common::repo_data("wordnet-3.0")).unwrap())
}

fn lexicon() -> &'static FrequencyLexicon {
    static L: OnceLock<FrequencyLexicon> = OnceLock::new();
    L.get_or_init(FrequencyLexicon::bundled)
}

#[test]
fn worked_example() {
    let s = fuzzy_f1("holidaydates", "eventdates", lexicon(), wordnet());
    let want = (1.0 / 7.0 + 1.0) / 2.0;
    assert!((s.precision - want).abs() < 1e-12);
    assert!((s.recall - want).abs() < 1e-12);
    assert!((s.f1 - 0.57).abs() <= 0.01, "{s:?}");
}

#[test]
fn pluralization_and_punctuation_score_one() {
    assert_eq!(fuzzy_f1("position", "positions", lexicon(), wordnet()).f1, 1.0);
    assert_eq!(
        fuzzy_f1("recipe_ingredients", "recipeingredient", lexicon(), wordnet()).f1,
        1.0
    );
    assert_eq!(fuzzy_f1("blog_posts", "blog_posts", lexicon(), wordnet()).f1, 1.0);
    assert_eq!(fuzzy_f1("vtp", "vtp", lexicon(), wordnet()).f1, 1.0);
    let w = |x: &str| vec![x.to_string()];
    assert_eq!(fuzzy_f1_words(&w("xqzw"), &w("users"), wordnet()).f1, 0.0);
}

#[test]
fn reference_table_rows() {
    for (want, original, predicted) in [
        (0.20, "portfolio", "projects"),
        (0.33, "comments", "content"),
        (0.50, "item", "symbol"),
        (0.56, "useridentity", "usercredentials"),
        (0.67, "initializedmodules", "module"),
        (0.71, "artist_tag_raw", "release_tag_raw"),
        (0.75, "sales_order_item", "sales_order_line"),
        (0.80, "arena_team", "arena_team_member"),
        (0.86, "inserttesttablefilter", "inserttesttable"),
        (1.00, "position", "positions"),
    ] {
        let f1 = fuzzy_f1(original, predicted, lexicon(), wordnet()).f1;
        assert!((f1 - want).abs() <= 0.005, "{original} / {predicted}: {f1}");
    }
}

fn word_list() -> impl Strategy<Value = Vec<String>> {
    let pool = [
        "event", "date", "holiday", "user", "account", "order", "item", "city", "person", "dog", "xqzw",
    ];
    prop::collection::vec(prop::sample::select(pool.to_vec()).prop_map(str::to_string), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_hold(o in word_list(), q in word_list()) {
        let s = fuzzy_f1_words(&o, &q, wordnet());
        prop_assert!((0.0..=1.0).contains(&s.precision) && (0.0..=1.0).contains(&s.recall));
        prop_assert!(s.f1 >= 0.0);
        prop_assert!(s.f1 <= 1.0f64.min(2.0 * s.precision.max(s.recall)) + 1e-12);
    }

    #[test]
    fn same_multiset_scores_one(mut o in word_list()) {
        let q: Vec<String> = o.iter().rev().cloned().collect();
        let s = fuzzy_f1_words(&o, &q, wordnet());
        prop_assert_eq!((s.precision, s.recall), (1.0, 1.0));
        o.sort();
        prop_assert_eq!(fuzzy_f1_words(&o, &o, wordnet()).f1, 1.0);
    }

    #[test]
    fn dominating_word_never_lowers_precision(o in word_list(), q in word_list(), slot in 0usize..5, repl in word_list()) {
        let sim = wordnet();
        let slot = slot % q.len();
        let candidate = &repl[0];
        // the replacement is at least as similar to every original word, and
        // strictly more similar to its best match
        let best = |w: &str| o.iter().map(|x| sim.similarity(w, x)).fold(0.0, f64::max);
        prop_assume!(o.iter().all(|x| sim.similarity(candidate, x) >= sim.similarity(&q[slot], x)));
        prop_assume!(best(candidate) > best(&q[slot]));
        let mut q2 = q.clone();
        q2[slot] = candidate.clone();
        prop_assert!(fuzzy_f1_words(&o, &q2, sim).precision >= fuzzy_f1_words(&o, &q, sim).precision);
    }

    #[test]
    fn arbitrary_names_never_panic(a in "\\PC{0,16}", b in "\\PC{0,16}") {
        let s = fuzzy_f1(&a, &b, lexicon(), wordnet());
        prop_assert!((0.0..=1.0).contains(&s.f1));
    }
}

#[test]
fn evaluate_survives_adversarial_schemas_and_keeps_order() {
    let corpus = common::bundled_clean_corpus();
    let docs: Vec<_> = corpus.iter().map(|s| s.to_document()).collect();
    let cfg = TrainConfig {
        dim: 16,
        bucket: 10_000,
        epochs: 1,
        ..TrainConfig::default()
    };
    let model = train(&docs, &cfg).unwrap();
    let names: Vec<&str> = corpus.iter().map(|s| s.table_name.as_str()).collect();
    let index = build_name_index(&model, &names).unwrap();

    let mut test: Vec<TableSchema> = corpus[..10].to_vec();
    for (t, cols) in [
        ("1234", vec!["99", "0"]),
        ("___", vec!["_"]),
        ("$#", vec!["#"]),
        ("a", vec!["b"]),
    ] {
        test.push(TableSchema::unlocated(t, &cols).unwrap());
    }
    let ev = Evaluator {
        model: &model,
        index: &index,
        lexicon: lexicon(),
        similarity: wordnet(),
        k: 3,
    };
    let (seq, summary) = ev.evaluate(&test, 1).unwrap();
    let (par, _) = ev.evaluate(&test, 4).unwrap();
    assert_eq!(seq, par);
    assert_eq!(seq.len(), test.len());
    for (r, s) in seq.iter().zip(&test) {
        assert_eq!(r.original, s.table_name);
        assert!((0.0..=1.0).contains(&r.score.f1));
    }
    assert_eq!(seq[10].score.f1, 0.0);
    assert_eq!(summary.count, 14);
    assert_eq!(summary.cdf.len(), 101);
    assert!(summary.cdf.windows(2).all(|w| w[0].1 <= w[1].1));
    assert_eq!(summary.cdf[100].1, 1.0);
}

#[test]
fn identity_predictions_give_perfect_distribution() {
    struct Exact;
    impl WordSimilarity for Exact {
        fn similarity(&self, a: &str, b: &str) -> f64 {
            f64::from(u8::from(a == b))
        }
    }
    // an index containing exactly the test names, with columns equal to the name
    let corpus: Vec<TableSchema> = ["users", "orders", "products"]
        .iter()
        .map(|n| TableSchema::unlocated(*n, &[n]).unwrap())
        .collect();
    let docs: Vec<_> = corpus.iter().map(|s| s.to_document()).collect();
    let cfg = TrainConfig {
        dim: 8,
        bucket: 1000,
        epochs: 1,
        ..TrainConfig::default()
    };
    let model = train(&docs, &cfg).unwrap();
    let index = build_name_index(&model, &["users", "orders", "products"]).unwrap();
    let ev = Evaluator {
        model: &model,
        index: &index,
        lexicon: lexicon(),
        similarity: &Exact,
        k: 1,
    };
    let (records, summary) = ev.evaluate(&corpus, 1).unwrap();
    assert!(records.iter().all(|r| r.predicted == r.original && r.score.f1 == 1.0));
    assert_eq!(summary.one_fraction, 1.0);
    assert!(summary.cdf[..100].iter().all(|&(_, f)| f == 0.0));
}
