//! Stage-indexed enumerations of string-set families `E_n`.

use serde::{Deserialize, Serialize};

use crate::strings::{BinString, PrefixFreeStringSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumerated {
    pub stage: u32,
    pub level: u32,
    pub string: BinString,
}

/// A uniformly c.e. sequence of string sets, given by its enumeration log:
/// each event says `string` entered `E_level` at `stage`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StagedFamily {
    pub events: Vec<Enumerated>,
}

impl StagedFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, stage: u32, level: u32, string: BinString) -> Self {
        self.push(stage, level, string);
        self
    }

    pub fn push(&mut self, stage: u32, level: u32, string: BinString) {
        self.events.push(Enumerated {
            stage,
            level,
            string,
        });
    }

    /// Everything enumerated into `E_level` by `stage`, without normalization.
    pub fn set_at(&self, level: u32, stage: u32) -> Vec<BinString> {
        let mut out: Vec<BinString> = self
            .events
            .iter()
            .filter(|e| e.level == level && e.stage <= stage)
            .map(|e| e.string.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn normalized_at(&self, level: u32, stage: u32) -> PrefixFreeStringSet {
        PrefixFreeStringSet::normalize(self.set_at(level, stage))
    }

    /// The first string to enter `E_level` by `stage`; ties within a stage go
    /// to the smallest string in (length, lexicographic) order.
    pub fn first_entry(&self, level: u32, stage: u32) -> Option<&BinString> {
        self.events
            .iter()
            .filter(|e| e.level == level && e.stage <= stage)
            .min_by(|a, b| a.stage.cmp(&b.stage).then_with(|| a.string.cmp(&b.string)))
            .map(|e| &e.string)
    }

    pub fn max_level(&self) -> Option<u32> {
        self.events.iter().map(|e| e.level).max()
    }
}
