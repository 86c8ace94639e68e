//! JSON file formats: card-sort data, distance matrices and dendrograms.

use std::fs;
use std::io::Read;
use std::path::Path;

use dendrotest_core::{CondensedMatrix, Dendrogram, GroupedSample, LabelSet, Participant, Partition};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{DataError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// A block member given either by label name or by 0-based index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub id: String,
    pub group: String,
    pub blocks: Vec<Vec<LabelRef>>,
}

/// Card-sort data: a word list and each participant's grouping of it.
///
/// ```json
/// {"version": 1, "labels": ["cat", "dog", "oak"],
///  "participants": [{"id": "p1", "group": "A", "blocks": [["cat", "dog"], ["oak"]]}]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardSortFile {
    pub version: u32,
    pub labels: Vec<String>,
    pub participants: Vec<ParticipantRecord>,
}

impl CardSortFile {
    /// Resolves label references and validates every partition.
    pub fn to_sample(&self) -> Result<GroupedSample> {
        check_version(self.version)?;
        let labels = LabelSet::new(self.labels.clone())?;
        let m = labels.len();
        let mut participants = Vec::with_capacity(self.participants.len());
        for record in &self.participants {
            let who = &record.id;
            if record.group.is_empty() {
                return Err(DataError::invalid(format!("participant {who:?}: empty group name")));
            }
            let mut owner: Vec<Option<usize>> = vec![None; m];
            let mut blocks = Vec::with_capacity(record.blocks.len());
            for (b, block) in record.blocks.iter().enumerate() {
                if block.is_empty() {
                    return Err(DataError::invalid(format!("participant {who:?}: block {b} is empty")));
                }
                let mut members = Vec::with_capacity(block.len());
                for item in block {
                    let i = match item {
                        LabelRef::Index(i) if *i < m => *i,
                        LabelRef::Index(i) => {
                            return Err(DataError::invalid(format!(
                                "participant {who:?}: label index {i} is out of range (only {m} labels)"
                            )))
                        }
                        LabelRef::Name(name) => labels.index_of(name).ok_or_else(|| {
                            DataError::invalid(format!("participant {who:?}: unknown label {name:?}"))
                        })?,
                    };
                    if owner[i].is_some() {
                        return Err(DataError::invalid(format!(
                            "participant {who:?}: label {:?} appears in more than one place",
                            labels.names()[i]
                        )));
                    }
                    owner[i] = Some(b);
                    members.push(i);
                }
                blocks.push(members);
            }
            if let Some(i) = owner.iter().position(Option::is_none) {
                return Err(DataError::invalid(format!(
                    "participant {who:?}: label {:?} is not in any block",
                    labels.names()[i]
                )));
            }
            participants.push(Participant {
                id: record.id.clone(),
                group: record.group.clone(),
                partition: Partition::new(m, blocks)?,
            });
        }
        Ok(GroupedSample::new(labels, participants)?)
    }

    /// The file form of a sample; blocks are written by label name.
    pub fn from_sample(sample: &GroupedSample) -> Self {
        let names = sample.labels().names();
        CardSortFile {
            version: FORMAT_VERSION,
            labels: names.to_vec(),
            participants: sample
                .participants()
                .iter()
                .map(|p| ParticipantRecord {
                    id: p.id.clone(),
                    group: p.group.clone(),
                    blocks: p
                        .partition
                        .blocks()
                        .iter()
                        .map(|b| b.iter().map(|&i| LabelRef::Name(names[i].clone())).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

/// A dissimilarity matrix in condensed upper-triangle order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub version: u32,
    pub labels: Vec<String>,
    pub condensed: Vec<f64>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<(LabelSet, CondensedMatrix)> {
        check_version(self.version)?;
        let labels = LabelSet::new(self.labels.clone())?;
        let d = CondensedMatrix::new(labels.len(), self.condensed.clone())?;
        Ok((labels, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// A dendrogram as a merge list. Leaves are `0..leaves`; the merge at
/// position `k` creates node `leaves + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub leaves: usize,
    pub merges: Vec<MergeRecord>,
}

impl DendrogramFile {
    pub fn from_dendrogram(d: &Dendrogram, labels: Option<&LabelSet>) -> Self {
        DendrogramFile {
            version: FORMAT_VERSION,
            labels: labels.map(|l| l.names().to_vec()),
            leaves: d.leaf_count(),
            merges: d
                .merges()
                .iter()
                .zip(d.heights())
                .map(|(s, &height)| MergeRecord { left: s.left, right: s.right, height })
                .collect(),
        }
    }

    pub fn to_dendrogram(&self) -> Result<Dendrogram> {
        check_version(self.version)?;
        if let Some(labels) = &self.labels {
            if labels.len() != self.leaves {
                return Err(DataError::invalid(format!("{} labels given for {} leaves", labels.len(), self.leaves)));
            }
        }
        let merges: Vec<_> = self.merges.iter().map(|r| (r.left, r.right, r.height)).collect();
        Ok(Dendrogram::from_merges(self.leaves, &merges)?)
    }
}

fn check_version(version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(DataError::invalid(format!("unsupported format version {version} (expected {FORMAT_VERSION})")));
    }
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|source| DataError::Io { path: path.into(), source })?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|source| DataError::Io { path: path.into(), source })
}

pub fn parse_json<T: DeserializeOwned>(text: &str, context: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| DataError::Json { context: context.into(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?, &path.display().to_string())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("file records always serialize");
    text.push('\n');
    text
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| DataError::Io { path: path.into(), source })
}

/// Parses card-sort JSON text.
pub fn parse_cardsort(text: &str) -> Result<GroupedSample> {
    parse_json::<CardSortFile>(text, "card-sort file")?.to_sample()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_text(blocks: &str) -> String {
        format!(
            r#"{{"version": 1, "labels": ["a", "b", "c"],
                "participants": [{{"id": "p1", "group": "g", "blocks": {blocks}}}]}}"#
        )
    }

    #[test]
    fn names_and_indices_resolve() {
        let s = parse_cardsort(&sample_text(r#"[["a", "b"], ["c"]]"#)).unwrap();
        assert_eq!(s.participants()[0].partition.blocks(), &[vec![0, 1], vec![2]]);
        let t = parse_cardsort(&sample_text(r#"[[2], [1, "a"]]"#)).unwrap();
        assert_eq!(t.participants()[0].partition.blocks(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn errors_name_participant_and_label() {
        let cases = [
            (r#"[["a", "b"]]"#, "\"c\" is not in any block"),
            (r#"[["a", "b"], ["c", "zz"]]"#, "unknown label \"zz\""),
            (r#"[["a", "b"], ["b", "c"]]"#, "\"b\" appears in more than one place"),
            (r#"[["a", "b"], [7]]"#, "index 7"),
            (r#"[["a", "b", "c"], []]"#, "block 1 is empty"),
        ];
        for (blocks, needle) in cases {
            let msg = parse_cardsort(&sample_text(blocks)).unwrap_err().to_string();
            assert!(msg.contains("\"p1\"") && msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn duplicate_labels_and_versions_rejected() {
        let dup = r#"{"version": 1, "labels": ["a", "a"], "participants": []}"#;
        assert!(parse_cardsort(dup).is_err());
        let v2 = r#"{"version": 2, "labels": ["a", "b"], "participants": []}"#;
        assert!(parse_cardsort(v2).unwrap_err().to_string().contains("version 2"));
    }

    #[test]
    fn dendrogram_file_round_trip() {
        let d = Dendrogram::from_merges(3, &[(0, 1, 0.4), (3, 2, 1.0)]).unwrap();
        let file = DendrogramFile::from_dendrogram(&d, None);
        let text = to_json(&file);
        let back: DendrogramFile = parse_json(&text, "test").unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_dendrogram().unwrap(), d);
    }
}
