#![allow(dead_code)]

use std::path::{Path, PathBuf};

use c2v_core::clean::{clean_corpus, CleanConfig};
use c2v_core::ddl::{extract_schemas, TableSchema};

pub fn repo_data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub fn bundled_sql() -> (String, PathBuf) {
    let path = repo_data("synthetic/schemas.sql");
    (std::fs::read_to_string(&path).unwrap(), path)
}

pub fn bundled_clean_corpus() -> Vec<TableSchema> {
    let (sql, path) = bundled_sql();
    let (schemas, _) = extract_schemas(&sql, &path);
    clean_corpus(&schemas, &CleanConfig::default()).0
}
