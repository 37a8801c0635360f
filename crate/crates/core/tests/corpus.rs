mod common;

use std::collections::BTreeSet;

use c2v_core::clean::{clean_corpus, CleanConfig, Rule};
use c2v_core::ddl::extract_schemas;

#[test]
fn bundled_corpus_extracts_every_table() {
    let (sql, path) = common::bundled_sql();
    let (schemas, warnings) = extract_schemas(&sql, &path);
    assert!(warnings.is_empty(), "{warnings:?}");
    assert_eq!(schemas.len(), sql.matches("CREATE TABLE").count());
    assert_eq!(schemas.len(), 204);
    assert!(schemas.iter().all(|s| s.source.path == path));
    assert!(schemas
        .iter()
        .all(|s| sql[s.source.offset..].starts_with("CREATE TABLE")));
}

#[test]
fn bundled_corpus_cleaning_removes_only_the_junk() {
    let (sql, path) = common::bundled_sql();
    let (schemas, _) = extract_schemas(&sql, &path);
    let (kept, report) = clean_corpus(&schemas, &CleanConfig::default());
    assert_eq!(kept.len(), 200);
    assert_eq!(report.total(), 4);
    let dropped: BTreeSet<(&str, Rule)> = report
        .rejections
        .iter()
        .map(|r| (r.table_name.as_str(), r.rule))
        .collect();
    let want: BTreeSet<(&str, Rule)> = [
        ("bb", Rule::RepeatedChar),
        ("t20190101", Rule::TooManyDigits),
        ("tmp$data", Rule::SpecialChars),
        ("zxqvkj", Rule::RareTrigrams),
    ]
    .into_iter()
    .collect();
    assert_eq!(dropped, want);
    let names: BTreeSet<&str> = kept.iter().map(|s| s.table_name.as_str()).collect();
    assert_eq!(names.len(), 40);
}

#[test]
fn cleaning_the_cleaned_corpus_is_a_no_op() {
    let kept = common::bundled_clean_corpus();
    let (again, report) = clean_corpus(&kept, &CleanConfig::default());
    assert_eq!(again, kept);
    assert_eq!(report.total(), 0);
}
