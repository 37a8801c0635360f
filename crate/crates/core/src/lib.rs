//! Learning embeddings of database column and table names from SQL schemas,
//! and suggesting table names from a set of columns.
//!
//! The pipeline: [`ddl`] pulls `CREATE TABLE` statements out of SQL text,
//! [`clean`] drops noisy schemas, [`embed`] trains subword skip-gram vectors,
//! [`namegen`] ranks known table names against a column set, and [`eval`]
//! scores predictions with WordNet-weighted fuzzy F1 ([`wordsplit`],
//! [`wordnet`]).

pub mod clean;
pub mod ddl;
pub mod embed;
pub mod eval;
pub mod fsutil;
pub mod namegen;
pub mod wordnet;
pub mod wordsplit;

pub use clean::{clean_corpus, CleanConfig, RejectionReport, Rule};
pub use ddl::{extract_schemas, ParseWarning, SchemaDocument, TableSchema};
pub use embed::{train, EmbedError, EmbeddingModel, TrainConfig};
pub use eval::{fuzzy_f1, split_dataset, DistributionSummary, EvalRecord, FuzzyScore, SplitConfig};
pub use namegen::{build_name_index, compose_table_vector, suggest, NameIndex, Suggestion};
pub use wordnet::{SimilarityScore, WordNetGraph};
pub use wordsplit::{split_name, FrequencyLexicon};
