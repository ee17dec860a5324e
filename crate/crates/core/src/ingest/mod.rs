//! Evidence ingestion: parse the curated sources, label trial outcomes,
//! map disease ids to MeSH and assemble the observation tensor.
//!
//! Labels are assigned per (gene, EFO) pair before mapping; pairs that
//! collide under mapping merge afterwards.

mod assemble;
mod labels;
mod ontology;
mod parse;
mod records;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use assemble::{build_tensor, layer_names, OUTCOME_LAYER};
pub use labels::{
    label_outcomes, pair_label, read_outcome_pairs, write_outcome_pairs, OutcomeStats,
    OUTCOME_PAIRS_FILE,
};
pub use ontology::{map_ontology, normalize_curie, DiseaseKeyed, MappingReport, OntologyXref};
pub use parse::{
    default_accepted_confidence, parse_gene_burden, parse_gwas_l2g, parse_outcomes,
    parse_rare_disease, BurdenStats, GwasStats, RareDiseaseStats, SigColumnPolicy,
    DEFAULT_L2G_THRESHOLD, KNOWN_CONFIDENCE_TIERS,
};
pub use records::{
    parse_layer_selection, EvidenceLayer, EvidenceRecord, OutcomePair, StopReasonClass, TrialRow,
    TrialStatus, MAX_PHASE,
};

use crate::error::{Error, Result};
use crate::fsutil;
use crate::tensor::io::save_tensor;
use crate::tensor::{SparseTensor, TensorIndex};

pub const INGEST_REPORT_FILE: &str = "ingest_report.json";

#[derive(Debug, Clone)]
pub struct IngestConfig {
    pub outcomes: PathBuf,
    pub xref: PathBuf,
    pub rare_disease: Option<PathBuf>,
    pub gene_burden: Option<PathBuf>,
    pub gwas: Option<PathBuf>,
    pub layers: Vec<EvidenceLayer>,
    pub accepted_confidence: BTreeSet<String>,
    pub l2g_threshold: f64,
    pub sig_policy: SigColumnPolicy,
}

impl IngestConfig {
    /// All three evidence layers with default curation settings.
    pub fn new(outcomes: impl Into<PathBuf>, xref: impl Into<PathBuf>) -> Self {
        Self {
            outcomes: outcomes.into(),
            xref: xref.into(),
            rare_disease: None,
            gene_burden: None,
            gwas: None,
            layers: EvidenceLayer::ALL.to_vec(),
            accepted_confidence: default_accepted_confidence(),
            l2g_threshold: DEFAULT_L2G_THRESHOLD,
            sig_policy: SigColumnPolicy::default(),
        }
    }

    fn source(&self, layer: EvidenceLayer) -> Option<&Path> {
        match layer {
            EvidenceLayer::RareDisease => self.rare_disease.as_deref(),
            EvidenceLayer::GeneBurden => self.gene_burden.as_deref(),
            EvidenceLayer::Gwas => self.gwas.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub name: String,
    pub cells: usize,
    pub positives: usize,
    /// Fraction of cells with value ≥ 0.5.
    pub imbalance: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rare_disease: Option<RareDiseaseStats>,
    pub gene_burden: Option<BurdenStats>,
    pub gwas: Option<GwasStats>,
    pub outcomes: OutcomeStats,
    /// Keyed by source: `outcomes` or an evidence layer name.
    pub mapping: BTreeMap<String, MappingReport>,
    pub dims: [usize; 3],
    pub layers: Vec<LayerSummary>,
}

#[derive(Debug, Clone)]
pub struct IngestOutput {
    pub tensor: SparseTensor<f64>,
    pub index: TensorIndex,
    /// Mapped pairs, including unlabeled ones.
    pub pairs: Vec<OutcomePair>,
    pub report: IngestReport,
}

pub fn run_ingest(config: &IngestConfig) -> Result<IngestOutput> {
    let xref = OntologyXref::load(&config.xref)?;
    let mut report = IngestReport::default();

    let (pairs, stats) = label_outcomes(&parse_outcomes(&config.outcomes)?);
    report.outcomes = stats;
    let (pairs, m) = map_ontology(pairs, &xref);
    report.mapping.insert("outcomes".into(), m);

    let mut evidence = Vec::new();
    for &layer in &config.layers {
        let path = config.source(layer).ok_or_else(|| {
            Error::invalid(format!("layer {layer} selected but no input file given"))
        })?;
        let records = match layer {
            EvidenceLayer::RareDisease => {
                let (r, s) = parse_rare_disease(path, &config.accepted_confidence)?;
                report.rare_disease = Some(s);
                r
            }
            EvidenceLayer::GeneBurden => {
                let (r, s) = parse_gene_burden(path, config.sig_policy)?;
                report.gene_burden = Some(s);
                r
            }
            EvidenceLayer::Gwas => {
                let (r, s) = parse_gwas_l2g(path, config.l2g_threshold)?;
                report.gwas = Some(s);
                r
            }
        };
        let (records, m) = map_ontology(records, &xref);
        report.mapping.insert(layer.name().into(), m);
        evidence.extend(records);
    }

    let (tensor, index) = build_tensor(&evidence, &pairs, &config.layers)?;
    report.dims = tensor.dims();
    report.layers = index
        .layers
        .ids()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values: Vec<f64> = tensor.layer_entries(k).map(|e| e.value).collect();
            let positives = values.iter().filter(|&&v| v >= 0.5).count();
            LayerSummary {
                name: name.clone(),
                cells: values.len(),
                positives,
                imbalance: if values.is_empty() {
                    0.0
                } else {
                    positives as f64 / values.len() as f64
                },
            }
        })
        .collect();
    Ok(IngestOutput {
        tensor,
        index,
        pairs,
        report,
    })
}

/// Tensor files, `outcome_pairs.tsv` and `ingest_report.json` in `dir`.
pub fn write_ingest(dir: &Path, output: &IngestOutput) -> Result<()> {
    save_tensor(dir, &output.tensor, &output.index)?;
    write_outcome_pairs(&dir.join(OUTCOME_PAIRS_FILE), &output.pairs)?;
    fsutil::write_json_atomic(&dir.join(INGEST_REPORT_FILE), &output.report)
}
