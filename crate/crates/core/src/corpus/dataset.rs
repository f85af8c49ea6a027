use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParams(format!("unknown split `{other}`"))),
        }
    }
}

/// One image and its raw ground-truth captions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub split: Split,
    pub captions: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl fmt::Display for SplitCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "train={} val={} test={}", self.train, self.val, self.test)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    images: Vec<ImageRecord>,
}

/// A validated caption dataset: unique ids, every image captioned.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    images: Vec<ImageRecord>,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(images: Vec<ImageRecord>) -> Result<Self> {
        let mut index = HashMap::with_capacity(images.len());
        for (i, img) in images.iter().enumerate() {
            if img.captions.is_empty() {
                return Err(Error::EmptyCaptions(img.id.clone()));
            }
            if index.insert(img.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(img.id.clone()));
            }
        }
        Ok(Dataset { images, index })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: DatasetFile =
            serde_json::from_str(text).map_err(|e| Error::parse(Some(e.line()), format!("column {}: {e}", e.column())))?;
        Dataset::new(file.images)
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFile { images: self.images.clone() };
        serde_json::to_string_pretty(&file).expect("dataset serializes")
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn get(&self, id: &str) -> Option<&ImageRecord> {
        self.index.get(id).map(|&i| &self.images[i])
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Images of one split, in file order.
    pub fn split(&self, split: Split) -> Vec<&ImageRecord> {
        self.images.iter().filter(|r| r.split == split).collect()
    }

    pub fn split_counts(&self) -> SplitCounts {
        let mut counts = SplitCounts::default();
        for img in &self.images {
            match img.split {
                Split::Train => counts.train += 1,
                Split::Val => counts.val += 1,
                Split::Test => counts.test += 1,
            }
        }
        counts
    }
}

/// Reads a dataset document `{"images": [{"id", "split", "captions"}]}`.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(Error::unreadable(path.as_ref()))?;
    Dataset::parse(&text)
}
