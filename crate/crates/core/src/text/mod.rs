//! Corpus ingestion: message cleanup, tokenization, TF-IDF and
//! documents x terms x time tensor assembly.
//!
//! Corpora are JSON lines, one `{"id", "label", "time_slot"?, "text"}` object
//! per line. Schedules are JSON, see [`ScheduleSpec`].

mod corpus;
mod keywords;
mod newsgroups;
mod preprocess;
mod schedule;
mod vocab;

pub use corpus::{Corpus, Document};
pub use keywords::top_keywords;
pub use newsgroups::{load_newsgroups, newsgroups_for_schedule, NEWSGROUP_DIRS};
pub use preprocess::{preprocess_document, tokenize};
pub use schedule::{
    assemble_tensor, assign_documents, Assignment, BlockMember, ScheduleBlock, ScheduleSpec, NEWSGROUP_LABELS,
};
pub use vocab::{build_vocabulary, english_stopwords, tfidf_weights, TfIdfMatrix, VocabConfig, Vocabulary};
