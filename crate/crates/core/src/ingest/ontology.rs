//! Flat EFO → MeSH cross-reference lookup with merge-on-collision.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parse::for_each_row;
use super::records::{EvidenceLayer, EvidenceRecord, OutcomePair};
use crate::error::{Error, Result};

/// `EFO_0000270` and `EFO:0000270` name the same term.
pub fn normalize_curie(id: &str) -> String {
    let id = id.trim();
    if id.contains(':') {
        id.to_string()
    } else {
        id.replacen('_', ":", 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OntologyXref {
    forward: HashMap<String, String>,
    targets: BTreeSet<String>,
}

impl OntologyXref {
    /// Identical duplicate rows collapse; an EFO id with two MeSH ids is
    /// an error.
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut xref = OntologyXref::default();
        for (efo, mesh) in pairs {
            let efo = normalize_curie(efo.as_ref());
            let mesh = normalize_curie(mesh.as_ref());
            if efo.is_empty() || mesh.is_empty() {
                return Err(Error::Data("empty identifier in cross-reference".into()));
            }
            match xref.forward.get(&efo) {
                Some(prev) if *prev != mesh => {
                    return Err(Error::AmbiguousMapping {
                        efo,
                        first: prev.clone(),
                        second: mesh,
                    })
                }
                Some(_) => {}
                None => {
                    xref.targets.insert(mesh.clone());
                    xref.forward.insert(efo, mesh);
                }
            }
        }
        Ok(xref)
    }

    /// Read `efo_id\tmesh_id` rows.
    pub fn load(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            efo_id: String,
            mesh_id: String,
        }
        let mut pairs = Vec::new();
        for_each_row(path, |_, row: Row| {
            pairs.push((row.efo_id, row.mesh_id));
            Ok(())
        })?;
        Self::from_pairs(pairs)
    }

    /// MeSH id for `id`. Ids that already are mapping targets map to
    /// themselves.
    pub fn lookup(&self, id: &str) -> Option<&str> {
        let id = normalize_curie(id);
        if let Some(m) = self.forward.get(&id) {
            return Some(m);
        }
        self.targets.get(&id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// An item that carries a disease id and can absorb a colliding item.
pub trait DiseaseKeyed: Sized {
    type Key: Ord + Clone;

    fn disease_id(&self) -> &str;
    fn set_disease_id(&mut self, id: String);
    /// Identity after mapping. Items with equal keys merge.
    fn merge_key(&self) -> Self::Key;
    /// Fold `other` into `self`; returns true when the two disagreed.
    fn absorb(&mut self, other: Self) -> bool;
}

impl DiseaseKeyed for EvidenceRecord {
    type Key = (EvidenceLayer, String, String);

    fn disease_id(&self) -> &str {
        &self.disease_id
    }

    fn set_disease_id(&mut self, id: String) {
        self.disease_id = id;
    }

    fn merge_key(&self) -> Self::Key {
        (self.layer, self.gene_id.clone(), self.disease_id.clone())
    }

    fn absorb(&mut self, other: Self) -> bool {
        let conflict = self.value != other.value;
        self.value = self.value.max(other.value);
        conflict
    }
}

impl DiseaseKeyed for OutcomePair {
    type Key = (String, String);

    fn disease_id(&self) -> &str {
        &self.disease_id
    }

    fn set_disease_id(&mut self, id: String) {
        self.disease_id = id;
    }

    fn merge_key(&self) -> Self::Key {
        (self.gene_id.clone(), self.disease_id.clone())
    }

    fn absorb(&mut self, other: Self) -> bool {
        let conflict = matches!((self.label, other.label), (Some(a), Some(b)) if a != b);
        self.status_set.extend(other.status_set);
        self.max_phase = self.max_phase.max(other.max_phase);
        self.stop_reason_class = self.stop_reason_class.max(other.stop_reason_class);
        self.label = self.label.max(other.label);
        conflict
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingReport {
    pub input: usize,
    pub output: usize,
    pub unmapped: usize,
    pub unmapped_ids: BTreeSet<String>,
    /// Items folded into an earlier item with the same key.
    pub merged: usize,
    /// Merges whose values disagreed; the larger value was kept.
    pub conflicts: usize,
}

/// Replace disease ids by their MeSH ids, dropping unmapped items and
/// merging collisions. Output is sorted by merge key.
pub fn map_ontology<T: DiseaseKeyed>(
    items: Vec<T>,
    xref: &OntologyXref,
) -> (Vec<T>, MappingReport) {
    let mut report = MappingReport {
        input: items.len(),
        ..Default::default()
    };
    let mut out: BTreeMap<T::Key, T> = BTreeMap::new();
    for mut item in items {
        let Some(mesh) = xref.lookup(item.disease_id()) else {
            report.unmapped += 1;
            report.unmapped_ids.insert(item.disease_id().to_string());
            continue;
        };
        item.set_disease_id(mesh.to_string());
        let key = item.merge_key();
        match out.get_mut(&key) {
            Some(existing) => {
                report.merged += 1;
                if existing.absorb(item) {
                    report.conflicts += 1;
                    log::warn!("conflicting values merged under {}", existing.disease_id());
                }
            }
            None => {
                out.insert(key, item);
            }
        }
    }
    report.output = out.len();
    (out.into_values().collect(), report)
}
