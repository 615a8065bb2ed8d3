use std::fs;
use std::path::Path;

use super::corpus::{Corpus, Document};
use super::schedule::ScheduleSpec;
use crate::error::{Error, Result};
use crate::rng::{hash_str, hash_words, SeededRng};

/// Directory name of each label in the standard 20 Newsgroups layout.
pub const NEWSGROUP_DIRS: [(&str, &str); 4] = [
    ("for-sale", "misc.forsale"),
    ("space", "sci.space"),
    ("atheism", "alt.atheism"),
    ("baseball", "rec.sport.baseball"),
];

/// Locates the group directories under `root`, descending into a single
/// `20news-bydate-train`, `20news-bydate-test` or `20_newsgroups` level if present.
fn group_dir(root: &Path, group: &str) -> Option<std::path::PathBuf> {
    ["", "20_newsgroups", "20news-bydate-train", "20news-18828", "20news-19997"]
        .iter()
        .map(|sub| root.join(sub).join(group))
        .find(|p| p.is_dir())
}

/// Samples `per_label[i]` messages from each `(label, group directory)` pair.
///
/// Files are listed in name order and shuffled with a generator seeded from
/// `seed` and the label, so the sample depends only on the directory contents.
/// Document ids are `group/file`; bytes that are not UTF-8 are replaced.
pub fn load_newsgroups(root: &Path, groups: &[(&str, &str)], per_label: &[usize], seed: u64) -> Result<Corpus> {
    if groups.len() != per_label.len() {
        return Err(Error::InvalidArgument("one sample size per group is required".into()));
    }
    let mut docs = Vec::new();
    for (&(label, group), &n) in groups.iter().zip(per_label) {
        let dir = group_dir(root, group)
            .ok_or_else(|| Error::InvalidArgument(format!("no directory {group} under {}", root.display())))?;
        let mut files: Vec<_> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_file())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        files.sort();
        if files.len() < n {
            return Err(Error::LabelShortage { label: label.into(), needed: n, available: files.len() });
        }
        SeededRng::new(hash_words(&[seed, hash_str(label)])).shuffle(&mut files);
        for name in &files[..n] {
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            docs.push(Document {
                id: format!("{group}/{name}"),
                label: label.into(),
                time_slot: None,
                text: String::from_utf8_lossy(&bytes).into_owned(),
            });
        }
    }
    Corpus::new(docs)
}

/// Samples exactly the number of messages each label of `schedule` needs,
/// using the standard directory name of every known label.
pub fn newsgroups_for_schedule(root: &Path, schedule: &ScheduleSpec, seed: u64) -> Result<Corpus> {
    let demand = schedule.demand();
    let mut groups = Vec::new();
    let mut sizes = Vec::new();
    for (&label, &n) in &demand {
        let (_, dir) = NEWSGROUP_DIRS
            .iter()
            .find(|(l, _)| *l == label)
            .ok_or_else(|| Error::InvalidArgument(format!("no newsgroup directory known for label {label:?}")))?;
        groups.push((label, *dir));
        sizes.push(n);
    }
    load_newsgroups(root, &groups, &sizes, seed)
}
