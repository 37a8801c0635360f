//! Filtering of test and dummy schemas from an extracted corpus.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::ddl::TableSchema;

/// Counts of every character trigram over all table and column names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrigramCounts {
    counts: HashMap<String, u64>,
}

impl TrigramCounts {
    pub fn get(&self, trigram: &str) -> u64 {
        self.counts.get(trigram).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    fn add_name(&mut self, name: &str) {
        for t in trigrams(name) {
            *self.counts.entry(t).or_insert(0) += 1;
        }
    }

    /// Merges counts from another shard.
    pub fn merge(&mut self, other: TrigramCounts) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
    }
}

fn trigrams(name: &str) -> impl Iterator<Item = String> + '_ {
    let chars: Vec<char> = name.chars().collect();
    let n = chars.len().saturating_sub(2);
    (0..n).map(move |i| chars[i..i + 3].iter().collect())
}

pub fn build_trigram_counts(corpus: &[TableSchema]) -> TrigramCounts {
    let mut counts = TrigramCounts::default();
    for schema in corpus {
        for name in schema.names() {
            counts.add_name(name);
        }
    }
    counts
}

/// Characters treated as "special" by the second rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecialChars {
    /// Anything outside `[a-z0-9_]`.
    OutsideWordChars,
    Explicit(BTreeSet<char>),
}

impl SpecialChars {
    pub fn contains(&self, c: char) -> bool {
        match self {
            SpecialChars::OutsideWordChars => !(c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'),
            SpecialChars::Explicit(set) => set.contains(&c),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CleanConfig {
    pub rare_trigram_fraction: f64,
    pub digit_fraction: f64,
    pub special_chars: SpecialChars,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            rare_trigram_fraction: 0.5,
            digit_fraction: 0.3,
            special_chars: SpecialChars::OutsideWordChars,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field} must lie in [0, 1], got {value}")]
pub struct InvalidCleanConfig {
    pub field: &'static str,
    pub value: f64,
}

impl CleanConfig {
    pub fn validate(&self) -> Result<(), InvalidCleanConfig> {
        for (field, value) in [
            ("rare_trigram_fraction", self.rare_trigram_fraction),
            ("digit_fraction", self.digit_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(InvalidCleanConfig { field, value });
            }
        }
        Ok(())
    }
}

/// The four filter rules, numbered as usually cited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    RareTrigrams = 1,
    SpecialChars = 2,
    TooManyDigits = 3,
    RepeatedChar = 4,
}

impl Rule {
    pub const ALL: [Rule; 4] = [
        Rule::RareTrigrams,
        Rule::SpecialChars,
        Rule::TooManyDigits,
        Rule::RepeatedChar,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn description(self) -> &'static str {
        match self {
            Rule::RareTrigrams => "mostly unique trigrams",
            Rule::SpecialChars => "special characters",
            Rule::TooManyDigits => "too many digits",
            Rule::RepeatedChar => "single repeated character",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Checks one name; cheap rules run first (4, 2, 3, then 1).
pub fn check_name(name: &str, counts: &TrigramCounts, config: &CleanConfig) -> Result<(), Rule> {
    let chars: Vec<char> = name.chars().collect();

    if chars.len() >= 2 && chars.iter().all(|&c| c == chars[0]) {
        return Err(Rule::RepeatedChar);
    }
    if chars.iter().any(|&c| config.special_chars.contains(c)) {
        return Err(Rule::SpecialChars);
    }
    let digits = chars.iter().filter(|c| c.is_ascii_digit()).count();
    if !chars.is_empty() && digits as f64 > config.digit_fraction * chars.len() as f64 {
        return Err(Rule::TooManyDigits);
    }
    if chars.len() >= 3 {
        let total = chars.len() - 2;
        let rare = trigrams(name).filter(|t| counts.get(t) <= 1).count();
        if rare as f64 >= config.rare_trigram_fraction * total as f64 {
            return Err(Rule::RareTrigrams);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub table_name: String,
    /// The offending name (the table name or one of its columns).
    pub name: String,
    pub rule: Rule,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RejectionReport {
    pub per_rule: [usize; 4],
    pub rejections: Vec<Rejection>,
}

impl RejectionReport {
    pub fn total(&self) -> usize {
        self.rejections.len()
    }

    pub fn count(&self, rule: Rule) -> usize {
        self.per_rule[rule.id() as usize - 1]
    }

    fn record(&mut self, rejection: Rejection) {
        self.per_rule[rejection.rule.id() as usize - 1] += 1;
        self.rejections.push(rejection);
    }

    /// Plain-text summary for humans.
    pub fn summary(&self, input_size: usize) -> String {
        let mut out = format!(
            "schemas in: {input_size}, kept: {}, rejected: {}\n",
            input_size - self.total(),
            self.total()
        );
        for rule in Rule::ALL {
            out.push_str(&format!(
                "  rule {} ({}): {}\n",
                rule,
                rule.description(),
                self.count(rule)
            ));
        }
        out
    }

    /// One `name<TAB>rule` line per rejection.
    pub fn log_lines(&self) -> String {
        self.rejections
            .iter()
            .map(|r| format!("{}\t{}\n", r.name, r.rule))
            .collect()
    }
}

/// Drops every schema whose table name or any column fails a rule.
pub fn clean_corpus(corpus: &[TableSchema], config: &CleanConfig) -> (Vec<TableSchema>, RejectionReport) {
    let counts = build_trigram_counts(corpus);
    let mut report = RejectionReport::default();
    let mut kept = Vec::with_capacity(corpus.len());
    for schema in corpus {
        let failure = schema
            .names()
            .find_map(|name| check_name(name, &counts, config).err().map(|rule| (name, rule)));
        match failure {
            Some((name, rule)) => report.record(Rejection {
                table_name: schema.table_name.clone(),
                name: name.to_string(),
                rule,
            }),
            None => kept.push(schema.clone()),
        }
    }
    (kept, report)
}
