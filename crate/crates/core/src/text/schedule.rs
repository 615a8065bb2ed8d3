use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use super::vocab::{tfidf_weights, Vocabulary};
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// A label feeding one block on a subset of slices (zero-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMember {
    pub label: String,
    pub slices: Vec<usize>,
}

/// A band of `slots` consecutive document rows present in every slice. On each
/// slice at most one member fills the band; otherwise those rows stay zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleBlock {
    pub slots: usize,
    pub members: Vec<BlockMember>,
}

/// Assignment of labeled documents to time slices. Rows of the assembled
/// tensor are the blocks in order, so every slice has the same row count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub num_slices: usize,
    pub blocks: Vec<ScheduleBlock>,
}

/// Label names used by the four-group newsgroup schedule.
pub const NEWSGROUP_LABELS: [&str; 4] = ["for-sale", "space", "atheism", "baseball"];

impl ScheduleSpec {
    /// Two steady topics on all ten slices and a third band that switches
    /// from `atheism` (slices 0..5) to `baseball` (slices 5..10), 78 documents each.
    pub fn newsgroups() -> ScheduleSpec {
        let all: Vec<usize> = (0..10).collect();
        let member = |label: &str, slices: &[usize]| BlockMember { label: label.into(), slices: slices.to_vec() };
        ScheduleSpec {
            num_slices: 10,
            blocks: vec![
                ScheduleBlock { slots: 78, members: vec![member("for-sale", &all)] },
                ScheduleBlock { slots: 78, members: vec![member("space", &all)] },
                ScheduleBlock { slots: 78, members: vec![member("atheism", &all[..5]), member("baseball", &all[5..])] },
            ],
        }
    }

    pub fn rows_per_slice(&self) -> usize {
        self.blocks.iter().map(|b| b.slots).sum()
    }

    /// Number of documents each label must supply.
    pub fn demand(&self) -> BTreeMap<&str, usize> {
        self.blocks
            .iter()
            .flat_map(|b| b.members.iter().map(move |m| (m.label.as_str(), b.slots * m.slices.len())))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("schedule: {msg}")));
        if self.num_slices == 0 {
            return bad("num_slices must be at least 1".into());
        }
        if self.blocks.is_empty() || self.rows_per_slice() == 0 {
            return bad("at least one block with a positive slot count is required".into());
        }
        let mut labels = HashSet::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            let mut used = HashSet::new();
            for m in &b.members {
                if !labels.insert(m.label.as_str()) {
                    return bad(format!("label {:?} appears more than once", m.label));
                }
                for &s in &m.slices {
                    if s >= self.num_slices {
                        return bad(format!("label {:?} uses slice {s} of {}", m.label, self.num_slices));
                    }
                    if !used.insert(s) {
                        return bad(format!("block {bi} has two members on slice {s}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: ScheduleSpec = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScheduleSpec::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }
}

/// `rows[k][p]` is the corpus index of the document at row `p` of slice `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub rows: Vec<Vec<Option<usize>>>,
}

impl Assignment {
    pub fn documents_per_slice(&self) -> Vec<usize> {
        self.rows.iter().map(|s| s.iter().flatten().count()).collect()
    }
}

/// Distributes each label's documents over its slices.
///
/// Documents are taken in id order. A document with `time_slot` goes to that
/// slice when the label feeds it and it has room; the others fill the
/// label's slices round-robin. Surplus documents are left out.
pub fn assign_documents(corpus: &Corpus, schedule: &ScheduleSpec) -> Result<Assignment> {
    schedule.validate()?;
    let mut by_label: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in corpus.documents().iter().enumerate() {
        by_label.entry(d.label.as_str()).or_default().push(i);
    }
    for docs in by_label.values_mut() {
        docs.sort_by(|&a, &b| corpus.documents()[a].id.cmp(&corpus.documents()[b].id));
    }

    let width = schedule.rows_per_slice();
    let mut rows = vec![vec![None; width]; schedule.num_slices];
    let mut offset = 0;
    for block in &schedule.blocks {
        for m in &block.members {
            let available = by_label.get(m.label.as_str()).map_or(&[][..], Vec::as_slice);
            let needed = block.slots * m.slices.len();
            if available.len() < needed {
                return Err(Error::LabelShortage { label: m.label.clone(), needed, available: available.len() });
            }
            let mut per_slice: Vec<Vec<usize>> = vec![Vec::with_capacity(block.slots); m.slices.len()];
            let mut rest = Vec::new();
            for &doc in available {
                let pinned = corpus.documents()[doc]
                    .time_slot
                    .and_then(|t| m.slices.iter().position(|&s| s == t))
                    .filter(|&p| per_slice[p].len() < block.slots);
                match pinned {
                    Some(p) => per_slice[p].push(doc),
                    None => rest.push(doc),
                }
            }
            let mut cursor = 0;
            for doc in rest {
                let Some(p) = (0..m.slices.len())
                    .map(|o| (cursor + o) % m.slices.len())
                    .find(|&p| per_slice[p].len() < block.slots)
                else {
                    break;
                };
                per_slice[p].push(doc);
                cursor = (p + 1) % m.slices.len();
            }
            for (docs, &slice) in per_slice.iter_mut().zip(&m.slices) {
                docs.sort_by(|&a, &b| corpus.documents()[a].id.cmp(&corpus.documents()[b].id));
                for (p, &doc) in docs.iter().enumerate() {
                    rows[slice][offset + p] = Some(doc);
                }
            }
        }
        offset += block.slots;
    }
    Ok(Assignment { rows })
}

/// Documents x terms x slices tensor of TF-IDF rows laid out by `schedule`.
/// TF-IDF is computed over the whole corpus.
pub fn assemble_tensor(corpus: &Corpus, vocab: &Vocabulary, schedule: &ScheduleSpec) -> Result<Tensor3> {
    let assignment = assign_documents(corpus, schedule)?;
    let weights = tfidf_weights(corpus, vocab)?.weights;
    let counts = assignment.documents_per_slice();
    let filled: Vec<usize> =
        schedule.blocks.iter().map(|b| b.slots * b.members.iter().map(|m| m.slices.len()).sum::<usize>()).collect();
    assert_eq!(counts.iter().sum::<usize>(), filled.iter().sum::<usize>());
    let [n1, n2, n3] = [schedule.rows_per_slice(), vocab.len(), schedule.num_slices];
    Tensor3::from_fn([n1, n2, n3], |i, j, k| assignment.rows[k][i].map_or(0.0, |doc| weights.get(doc, j)))
}
