use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;
use thiserror::Error;

pub const DATASET: u32 = 0;
pub const READ_CSV: u32 = 1;
pub const STOP: u32 = 2;
pub const RESERVED_LABELS: [&str; 3] = ["DATASET", "read_csv", "STOP"];

/// Shipped default whitelist (scikit-learn, XGBoost, LightGBM operators).
pub const DEFAULT_WHITELIST: &str = include_str!("../../../../data/vocabulary.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Preprocessor,
    Estimator,
    Other,
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("duplicate operator label {0:?}")]
    DuplicateLabel(String),
    #[error("whitelist has no Estimator entry")]
    MissingEstimatorCategory,
    #[error("whitelist parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read whitelist: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorEntry {
    pub label: String,
    pub category: Category,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct WhitelistFile {
    operators: Vec<OperatorEntry>,
}

/// Bijection between operator labels and node-type ids. Ids 0..3 are the
/// reserved DATASET, READ_CSV and STOP types; whitelist entries follow in
/// file order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVocabulary {
    labels: Vec<String>,
    categories: Vec<Option<Category>>,
    index: HashMap<String, u32>,
}

impl NodeVocabulary {
    pub fn from_entries(entries: &[OperatorEntry]) -> Result<Self, VocabError> {
        let mut v = NodeVocabulary {
            labels: Vec::new(),
            categories: Vec::new(),
            index: HashMap::new(),
        };
        for label in RESERVED_LABELS {
            v.push(label.to_string(), None)?;
        }
        for e in entries {
            v.push(e.label.clone(), Some(e.category))?;
        }
        if !v.categories.contains(&Some(Category::Estimator)) {
            return Err(VocabError::MissingEstimatorCategory);
        }
        Ok(v)
    }

    fn push(&mut self, label: String, category: Option<Category>) -> Result<(), VocabError> {
        if self.index.contains_key(&label) {
            return Err(VocabError::DuplicateLabel(label));
        }
        self.index.insert(label.clone(), self.labels.len() as u32);
        self.labels.push(label);
        self.categories.push(category);
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, VocabError> {
        let file: WhitelistFile = serde_json::from_str(text)?;
        Self::from_entries(&file.operators)
    }

    pub fn default_whitelist() -> Self {
        Self::from_json(DEFAULT_WHITELIST).expect("shipped whitelist is valid")
    }

    pub fn to_json(&self) -> String {
        let operators = self.labels[RESERVED_LABELS.len()..]
            .iter()
            .zip(&self.categories[RESERVED_LABELS.len()..])
            .map(|(l, c)| OperatorEntry {
                label: l.clone(),
                category: c.expect("non-reserved entries are categorized"),
            })
            .collect();
        serde_json::to_string_pretty(&WhitelistFile { operators }).expect("serializable")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn id(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: u32) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }

    /// `None` for reserved ids and out-of-range ids.
    pub fn category(&self, id: u32) -> Option<Category> {
        self.categories.get(id as usize).copied().flatten()
    }

    pub fn is_operator(&self, label: &str) -> bool {
        self.id(label).is_some_and(|id| id as usize >= RESERVED_LABELS.len())
    }
}

/// Reads a whitelist file `{"operators":[{"label","category"}]}`.
pub fn build_vocabulary(path: &Path) -> Result<NodeVocabulary, VocabError> {
    NodeVocabulary::from_json(&std::fs::read_to_string(path)?)
}
