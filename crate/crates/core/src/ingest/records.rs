use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Human genetics evidence type. Tensor layer `k = 1 + position` in the
/// selection, after the clinical outcome layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceLayer {
    RareDisease,
    GeneBurden,
    Gwas,
}

impl EvidenceLayer {
    pub const ALL: [EvidenceLayer; 3] = [
        EvidenceLayer::RareDisease,
        EvidenceLayer::GeneBurden,
        EvidenceLayer::Gwas,
    ];

    /// Layer name used in tensor metadata and prediction tables.
    pub fn name(self) -> &'static str {
        match self {
            EvidenceLayer::RareDisease => "rare_disease",
            EvidenceLayer::GeneBurden => "gene_burden",
            EvidenceLayer::Gwas => "gwas",
        }
    }
}

impl fmt::Display for EvidenceLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvidenceLayer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rare" | "rare_disease" => Ok(EvidenceLayer::RareDisease),
            "burden" | "gene_burden" => Ok(EvidenceLayer::GeneBurden),
            "gwas" | "l2g" => Ok(EvidenceLayer::Gwas),
            other => Err(Error::invalid(format!("unknown evidence layer {other:?}"))),
        }
    }
}

/// Parse a comma separated layer list; `all` or `combined` selects every
/// layer. The result is deduplicated and in canonical order.
pub fn parse_layer_selection(s: &str) -> Result<Vec<EvidenceLayer>> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.to_ascii_lowercase().as_str() {
            "all" | "combined" => out.extend(EvidenceLayer::ALL),
            _ => {
                out.insert(part.parse()?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty layer selection"));
    }
    Ok(out.into_iter().collect())
}

/// One (gene, disease, layer, value) observation from a curation source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub gene_id: String,
    pub disease_id: String,
    pub layer: EvidenceLayer,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Approved,
    Terminated,
    Suspended,
    Completed,
    Active,
    Withdrawn,
    Unknown(String),
}

impl TrialStatus {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_lowercase().as_str() {
            "approved" => TrialStatus::Approved,
            "terminated" => TrialStatus::Terminated,
            "suspended" => TrialStatus::Suspended,
            "completed" => TrialStatus::Completed,
            "active" => TrialStatus::Active,
            "withdrawn" => TrialStatus::Withdrawn,
            _ => TrialStatus::Unknown(s.trim().to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            TrialStatus::Approved => "approved",
            TrialStatus::Terminated => "terminated",
            TrialStatus::Suspended => "suspended",
            TrialStatus::Completed => "completed",
            TrialStatus::Active => "active",
            TrialStatus::Withdrawn => "withdrawn",
            TrialStatus::Unknown(s) => s,
        }
    }
}

/// Pre-classified reason a trial stopped. Variants are ordered from least
/// to most severe so that `max` picks the reason to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReasonClass {
    None,
    Other,
    Business,
    Efficacy,
    Safety,
}

impl StopReasonClass {
    pub fn is_unfavorable(self) -> bool {
        matches!(self, StopReasonClass::Safety | StopReasonClass::Efficacy)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StopReasonClass::None => "none",
            StopReasonClass::Other => "other",
            StopReasonClass::Business => "business",
            StopReasonClass::Efficacy => "efficacy",
            StopReasonClass::Safety => "safety",
        }
    }
}

impl FromStr for StopReasonClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "" => Ok(StopReasonClass::None),
            "other" => Ok(StopReasonClass::Other),
            "business" => Ok(StopReasonClass::Business),
            "efficacy" => Ok(StopReasonClass::Efficacy),
            "safety" => Ok(StopReasonClass::Safety),
            other => Err(format!("unknown stop reason class {other:?}")),
        }
    }
}

/// One trial row of the outcome source.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub gene_id: String,
    pub efo_id: String,
    pub phase: u8,
    pub status: TrialStatus,
    pub stop_reason_class: StopReasonClass,
}

/// All trials of one (gene, disease) pair, with its label once assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomePair {
    pub gene_id: String,
    pub disease_id: String,
    pub status_set: BTreeSet<TrialStatus>,
    /// 0 = preclinical, 4 = approved.
    pub max_phase: u8,
    pub stop_reason_class: StopReasonClass,
    /// `Some(true)` success, `Some(false)` failure, `None` unknown.
    pub label: Option<bool>,
}

pub const MAX_PHASE: u8 = 4;
