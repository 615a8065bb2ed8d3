use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub label: String,
    /// Zero-based time slice this document is pinned to, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_slot: Option<usize>,
    pub text: String,
}

/// Documents with unique ids, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateDocument(d.id.clone()));
            }
        }
        Ok(Corpus { documents })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Copy with every text passed through [`super::preprocess_document`].
    pub fn preprocessed(&self) -> Corpus {
        use rayon::prelude::*;
        let documents = self
            .documents
            .par_iter()
            .map(|d| Document { text: super::preprocess_document(&d.text), ..d.clone() })
            .collect();
        Corpus { documents }
    }

    /// One JSON object per line; blank lines are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut docs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let doc: Document =
                serde_json::from_str(line).map_err(|e| Error::Format(format!("corpus line {}: {e}", n + 1)))?;
            docs.push(doc);
        }
        Corpus::new(docs)
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for d in &self.documents {
            s.push_str(&serde_json::to_string(d).expect("documents serialize"));
            s.push('\n');
        }
        s
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Corpus::from_jsonl(&text)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let text = "{\"id\":\"1\",\"label\":\"a\",\"text\":\"hello\"}\n\n{\"id\":\"2\",\"label\":\"b\",\"time_slot\":3,\"text\":\"x\"}\n";
        let c = Corpus::from_jsonl(text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.documents()[1].time_slot, Some(3));
        assert_eq!(Corpus::from_jsonl(&c.to_jsonl()).unwrap(), c);
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        let dup = "{\"id\":\"1\",\"label\":\"a\",\"text\":\"\"}\n{\"id\":\"1\",\"label\":\"b\",\"text\":\"\"}";
        assert!(matches!(Corpus::from_jsonl(dup), Err(Error::DuplicateDocument(id)) if id == "1"));
        assert!(matches!(Corpus::from_jsonl("{not json"), Err(Error::Format(_))));
    }
}
