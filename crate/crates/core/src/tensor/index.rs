use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One axis of the rank-3 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Target,
    Indication,
    Layer,
}

impl Mode {
    /// Fixed update order used by the sampler.
    pub const ALL: [Mode; 3] = [Mode::Target, Mode::Indication, Mode::Layer];

    pub fn axis(self) -> usize {
        match self {
            Mode::Target => 0,
            Mode::Indication => 1,
            Mode::Layer => 2,
        }
    }

    /// The two remaining modes, in axis order.
    pub fn others(self) -> (Mode, Mode) {
        match self {
            Mode::Target => (Mode::Indication, Mode::Layer),
            Mode::Indication => (Mode::Target, Mode::Layer),
            Mode::Layer => (Mode::Target, Mode::Indication),
        }
    }
}

/// Bijection between domain identifiers and contiguous indices of a mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeIndex {
    mode: Mode,
    forward: HashMap<String, usize>,
    reverse: Vec<String>,
}

impl ModeIndex {
    /// Deduplicate and sort `identifiers` lexicographically, then number
    /// them from zero.
    pub fn build<I, S>(mode: Mode, identifiers: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = identifiers.into_iter().map(Into::into).collect();
        ids.sort();
        ids.dedup();
        Self::from_ordered(mode, ids)
    }

    /// Keep the given order. Duplicates are rejected.
    pub fn from_ordered(mode: Mode, reverse: Vec<String>) -> Result<Self> {
        if reverse.is_empty() {
            return Err(Error::EmptyMode);
        }
        let mut forward = HashMap::with_capacity(reverse.len());
        for (idx, id) in reverse.iter().enumerate() {
            if forward.insert(id.clone(), idx).is_some() {
                return Err(Error::Data(format!(
                    "duplicate identifier {id:?} in {mode:?} mode"
                )));
            }
        }
        Ok(Self {
            mode,
            forward,
            reverse,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.forward.get(id).copied()
    }

    pub fn id(&self, idx: usize) -> Option<&str> {
        self.reverse.get(idx).map(String::as_str)
    }

    pub fn ids(&self) -> &[String] {
        &self.reverse
    }
}

/// Build a sorted, deduplicated index.
pub fn build_index<I, S>(mode: Mode, identifiers: I) -> Result<ModeIndex>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    ModeIndex::build(mode, identifiers)
}

/// The three mode indices of a tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorIndex {
    pub targets: ModeIndex,
    pub indications: ModeIndex,
    pub layers: ModeIndex,
}

impl TensorIndex {
    pub fn dims(&self) -> [usize; 3] {
        [
            self.targets.len(),
            self.indications.len(),
            self.layers.len(),
        ]
    }

    pub fn mode(&self, mode: Mode) -> &ModeIndex {
        match mode {
            Mode::Target => &self.targets,
            Mode::Indication => &self.indications,
            Mode::Layer => &self.layers,
        }
    }

    /// Keep only the listed layers, in the given order.
    pub fn select_layers(&self, layers: &[usize]) -> Result<Self> {
        let names = layers
            .iter()
            .map(|&k| {
                self.layers
                    .id(k)
                    .map(str::to_owned)
                    .ok_or_else(|| Error::invalid(format!("layer {k} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            targets: self.targets.clone(),
            indications: self.indications.clone(),
            layers: ModeIndex::from_ordered(Mode::Layer, names)?,
        })
    }
}
