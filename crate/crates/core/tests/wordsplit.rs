use c2v_core::wordsplit::{segment_chunk, split_name, FrequencyLexicon};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum cost over all 2^(n-1) ways to cut `s`, summing pieces left to right.
fn brute_force(s: &str, lex: &FrequencyLexicon) -> f64 {
    let n = s.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << (n - 1)) {
        let mut cost = 0.0;
        let mut start = 0;
        for i in 1..=n {
            if i == n || mask & (1 << (i - 1)) != 0 {
                cost += lex.piece_cost(&s[start..i]);
                start = i;
            }
        }
        best = best.min(cost);
    }
    best
}

fn random_inputs(rng: &mut ChaCha8Rng, count: usize) -> Vec<String> {
    let words = [
        "event", "date", "user", "name", "id", "order", "item", "recipe", "post", "blog", "time", "a", "the",
    ];
    (0..count)
        .map(|i| {
            let mut s = String::new();
            if i % 2 == 0 {
                let len = rng.gen_range(1..=12);
                while s.len() < len {
                    s.push(rng.gen_range(b'a'..=b'z') as char);
                }
            } else {
                while s.len() < 12 {
                    s.push_str(words.choose(rng).unwrap());
                }
                s.truncate(rng.gen_range(1..=12));
            }
            s
        })
        .collect()
}

#[test]
fn dp_cost_equals_brute_force_minimum() {
    let lex = FrequencyLexicon::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for s in random_inputs(&mut rng, 200) {
        let seg = segment_chunk(&s, &lex);
        assert_eq!(seg.cost, brute_force(&s, &lex), "{s}");
        assert_eq!(seg.words.concat(), s);
    }
}

#[test]
fn small_lexicon_oracle() {
    let lex = FrequencyLexicon::from_words(["ab", "a", "b", "ba", "abc", "c"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let len = rng.gen_range(1..=10);
        let s: String = (0..len).map(|_| *b"abcd".choose(&mut rng).unwrap() as char).collect();
        let seg = segment_chunk(&s, &lex);
        assert_eq!(seg.cost, brute_force(&s, &lex), "{s}");
    }
}

#[test]
fn name_splitting_examples() {
    let lex = FrequencyLexicon::bundled();
    let words = |n| split_name(n, &lex).words;
    assert_eq!(words("holidaydates"), ["holiday", "dates"]);
    assert_eq!(words("eventdates"), ["event", "dates"]);
    assert_eq!(words("recipe_ingredients"), ["recipe", "ingredients"]);
    assert_eq!(words("RecipeIngredient"), ["recipe", "ingredient"]);
    assert_eq!(words("position"), ["position"]);
    assert_eq!(words("positions"), ["positions"]);
    assert!(words("__42__").is_empty());
}
