//! Forum retrieval and action recommendation.
//!
//! A failing action's terminal output is used as a query against an inverted
//! TF-IDF index of question/answer posts. The accepted answers of the best
//! hits are then matched against every action's documentation and the best
//! matching action is recommended.

mod corpus;
mod index;
mod recommend;
mod tokenize;

use thiserror::Error;

pub use corpus::{convert_dump_rows, load_corpus, DumpRow, Post, BUNDLED_CORPUS};
pub use index::{CorpusIndex, Hit, DEFAULT_TOP_K};
pub use recommend::{recommend_action, ActionMatcher, DataDrivenRecommender, Recommendation, Recommender};
pub use tokenize::{stopwords, tokenize};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("line {line}: malformed post: {message}")]
    MalformedPost { line: usize, message: String },
    #[error("duplicate post id `{0}`")]
    DuplicateId(String),
    #[error("query has no searchable terms")]
    EmptyQuery,
    #[error("no accepted answers to match against")]
    NoAnswers,
    #[error("no action documentation matches the answers")]
    NoRecommendation,
    #[error("recommended schema `{0}` cannot be grounded")]
    Ungroundable(String),
}
