//! Readers for the curated evidence and trial outcome tables.
//!
//! Every input is a UTF-8, tab-delimited file with a header row. Extra
//! columns are ignored; missing ones are a parse error.

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::records::{
    EvidenceLayer, EvidenceRecord, StopReasonClass, TrialRow, TrialStatus, MAX_PHASE,
};
use crate::error::{Error, Result};
use crate::fsutil::{csv_error, tsv_reader};

/// Visit every data row with its 1-based file line number.
pub(crate) fn for_each_row<R, F>(path: &Path, mut visit: F) -> Result<()>
where
    R: DeserializeOwned,
    F: FnMut(u64, R) -> Result<()>,
{
    let mut rdr = tsv_reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: R = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        visit(line, row)?;
    }
    Ok(())
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn require_id(path: &Path, line: u64, column: &str, value: &str) -> Result<String> {
    let v = value.trim();
    if v.is_empty() {
        return Err(parse_error(path, line, format!("empty {column}")));
    }
    Ok(v.to_string())
}

/// Confidence tiers used by the gene-disease curation panels.
pub const KNOWN_CONFIDENCE_TIERS: [&str; 8] = [
    "definitive",
    "strong",
    "moderate",
    "limited",
    "supportive",
    "disputed",
    "refuted",
    "no known disease relationship",
];

pub fn default_accepted_confidence() -> BTreeSet<String> {
    ["definitive", "strong"]
        .into_iter()
        .map(String::from)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RareDiseaseStats {
    pub rows: usize,
    pub accepted: usize,
    pub below_accepted: usize,
    pub unknown_confidence: usize,
}

#[derive(Deserialize)]
struct RareDiseaseRow {
    gene_id: String,
    efo_id: String,
    confidence: String,
}

/// Curated gene-disease links. Rows whose confidence is in `accepted`
/// become records with value 1.0.
pub fn parse_rare_disease(
    path: &Path,
    accepted: &BTreeSet<String>,
) -> Result<(Vec<EvidenceRecord>, RareDiseaseStats)> {
    let accepted: BTreeSet<String> = accepted
        .iter()
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    let mut stats = RareDiseaseStats::default();
    let mut out = Vec::new();
    for_each_row(path, |line, row: RareDiseaseRow| {
        stats.rows += 1;
        let gene_id = require_id(path, line, "gene_id", &row.gene_id)?;
        let disease_id = require_id(path, line, "efo_id", &row.efo_id)?;
        let tier = row.confidence.trim().to_ascii_lowercase();
        if accepted.contains(&tier) {
            stats.accepted += 1;
            out.push(EvidenceRecord {
                gene_id,
                disease_id,
                layer: EvidenceLayer::RareDisease,
                value: 1.0,
            });
        } else if KNOWN_CONFIDENCE_TIERS.contains(&tier.as_str()) {
            stats.below_accepted += 1;
        } else {
            log::warn!(
                "{}:{line}: unknown confidence {:?}, row dropped",
                path.display(),
                row.confidence
            );
            stats.unknown_confidence += 1;
        }
        Ok(())
    })?;
    Ok((out, stats))
}

/// How the burden `significant` column is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SigColumnPolicy {
    /// Only `0` and `1`.
    #[default]
    Binary,
    /// Also `true`/`false` and `yes`/`no`, case-insensitive.
    Boolean,
}

impl SigColumnPolicy {
    fn read(self, raw: &str) -> Option<bool> {
        let v = raw.trim().to_ascii_lowercase();
        match (self, v.as_str()) {
            (_, "1") => Some(true),
            (_, "0") => Some(false),
            (SigColumnPolicy::Boolean, "true" | "yes") => Some(true),
            (SigColumnPolicy::Boolean, "false" | "no") => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurdenStats {
    pub rows: usize,
    pub significant: usize,
    pub not_significant: usize,
}

#[derive(Deserialize)]
struct BurdenRow {
    gene_id: String,
    efo_id: String,
    significant: String,
}

/// Gene burden tests. A test that did not reach significance is an
/// explicit 0.0 observation, not a missing cell.
pub fn parse_gene_burden(
    path: &Path,
    policy: SigColumnPolicy,
) -> Result<(Vec<EvidenceRecord>, BurdenStats)> {
    let mut stats = BurdenStats::default();
    let mut out = Vec::new();
    for_each_row(path, |line, row: BurdenRow| {
        let gene_id = require_id(path, line, "gene_id", &row.gene_id)?;
        let disease_id = require_id(path, line, "efo_id", &row.efo_id)?;
        let sig = policy.read(&row.significant).ok_or_else(|| {
            parse_error(
                path,
                line,
                format!("significant must be 0 or 1, got {:?}", row.significant),
            )
        })?;
        stats.rows += 1;
        if sig {
            stats.significant += 1;
        } else {
            stats.not_significant += 1;
        }
        out.push(EvidenceRecord {
            gene_id,
            disease_id,
            layer: EvidenceLayer::GeneBurden,
            value: if sig { 1.0 } else { 0.0 },
        });
        Ok(())
    })?;
    Ok((out, stats))
}

pub const DEFAULT_L2G_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GwasStats {
    pub rows: usize,
    pub kept: usize,
    pub below_threshold: usize,
    pub threshold: f64,
}

#[derive(Deserialize)]
struct GwasRow {
    gene_id: String,
    efo_id: String,
    l2g_score: f64,
}

/// Locus-to-gene scores. Scores at or above `threshold` are kept as they
/// are; lower scores are left missing.
pub fn parse_gwas_l2g(path: &Path, threshold: f64) -> Result<(Vec<EvidenceRecord>, GwasStats)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!(
            "L2G threshold must be within [0, 1], got {threshold}"
        )));
    }
    let mut stats = GwasStats {
        threshold,
        ..Default::default()
    };
    let mut out = Vec::new();
    for_each_row(path, |line, row: GwasRow| {
        let gene_id = require_id(path, line, "gene_id", &row.gene_id)?;
        let disease_id = require_id(path, line, "efo_id", &row.efo_id)?;
        if !(0.0..=1.0).contains(&row.l2g_score) {
            return Err(parse_error(
                path,
                line,
                format!("l2g_score {} outside [0, 1]", row.l2g_score),
            ));
        }
        stats.rows += 1;
        if row.l2g_score >= threshold {
            stats.kept += 1;
            out.push(EvidenceRecord {
                gene_id,
                disease_id,
                layer: EvidenceLayer::Gwas,
                value: row.l2g_score,
            });
        } else {
            stats.below_threshold += 1;
        }
        Ok(())
    })?;
    Ok((out, stats))
}

#[derive(Deserialize)]
struct OutcomeRow {
    gene_id: String,
    efo_id: String,
    phase: String,
    status: String,
    stop_reason_class: String,
}

/// Trial rows: gene, disease, phase 0–4, status and stop reason class.
pub fn parse_outcomes(path: &Path) -> Result<Vec<TrialRow>> {
    let mut out = Vec::new();
    for_each_row(path, |line, row: OutcomeRow| {
        let phase: u8 = row
            .phase
            .trim()
            .parse()
            .ok()
            .filter(|p| *p <= MAX_PHASE)
            .ok_or_else(|| {
                parse_error(
                    path,
                    line,
                    format!("phase must be an integer 0-4, got {:?}", row.phase),
                )
            })?;
        let stop_reason_class = row
            .stop_reason_class
            .parse::<StopReasonClass>()
            .map_err(|m| parse_error(path, line, m))?;
        out.push(TrialRow {
            gene_id: require_id(path, line, "gene_id", &row.gene_id)?,
            efo_id: require_id(path, line, "efo_id", &row.efo_id)?,
            phase,
            status: TrialStatus::parse(&row.status),
            stop_reason_class,
        });
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn rare_disease_rules() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "rare.tsv",
            "gene_id\tefo_id\tconfidence\n\
             ENSG0001\tEFO:0000270\tdefinitive\n\
             ENSG0002\tEFO:0000270\tlimited\n\
             ENSG0003\tEFO:0000270\tStrong\n\
             ENSG0004\tEFO:0000270\tgreat\n",
        );
        let (recs, stats) = parse_rare_disease(&p, &default_accepted_confidence()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].gene_id, "ENSG0001");
        assert_eq!(recs[0].disease_id, "EFO:0000270");
        assert_eq!(recs[0].value, 1.0);
        assert_eq!(stats.below_accepted, 1);
        assert_eq!(stats.unknown_confidence, 1);
    }

    #[test]
    fn rare_disease_malformed_row_has_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "rare.tsv",
            "gene_id\tefo_id\tconfidence\nA\tB\tstrong\nA\tB\n",
        );
        match parse_rare_disease(&p, &default_accepted_confidence()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let p = write(
            &dir,
            "rare2.tsv",
            "gene_id\tefo_id\tconfidence\n\tB\tstrong\n",
        );
        assert!(matches!(
            parse_rare_disease(&p, &default_accepted_confidence()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn burden_negatives_are_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "b.tsv",
            "gene_id\tefo_id\tsignificant\nG1\tD1\t0\nG2\tD1\t1\n",
        );
        let (recs, stats) = parse_gene_burden(&p, SigColumnPolicy::Binary).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].value, 0.0);
        assert_eq!(recs[1].value, 1.0);
        assert_eq!((stats.significant, stats.not_significant), (1, 1));
    }

    #[test]
    fn burden_policy() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "b.tsv",
            "gene_id\tefo_id\tsignificant\nG1\tD1\ttrue\n",
        );
        assert!(matches!(
            parse_gene_burden(&p, SigColumnPolicy::Binary),
            Err(Error::Parse { line: 2, .. })
        ));
        let (recs, _) = parse_gene_burden(&p, SigColumnPolicy::Boolean).unwrap();
        assert_eq!(recs[0].value, 1.0);
    }

    #[test]
    fn gwas_threshold_and_range() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "g.tsv",
            "gene_id\tefo_id\tl2g_score\nG1\tD1\t0.83\nG2\tD1\t0.12\nG3\tD1\t0.5\n",
        );
        let (recs, stats) = parse_gwas_l2g(&p, 0.5).unwrap();
        assert_eq!(
            recs.iter().map(|r| r.value).collect::<Vec<_>>(),
            vec![0.83, 0.5]
        );
        assert_eq!(stats.below_threshold, 1);

        let bad = write(&dir, "bad.tsv", "gene_id\tefo_id\tl2g_score\nG1\tD1\t1.7\n");
        let err = parse_gwas_l2g(&bad, 0.5).unwrap_err();
        assert!(err.to_string().contains("outside [0, 1]"), "{err}");
        assert!(parse_gwas_l2g(&p, 1.5).is_err());
    }

    #[test]
    fn outcomes_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "o.tsv",
            "gene_id\tefo_id\tphase\tstatus\tstop_reason_class\n\
             G1\tD1\t4\tapproved\tnone\n\
             G1\tD1\t2\tpaused\tsafety\n",
        );
        let rows = parse_outcomes(&p).unwrap();
        assert_eq!(rows[0].status, TrialStatus::Approved);
        assert_eq!(rows[1].status, TrialStatus::Unknown("paused".into()));
        assert_eq!(rows[1].stop_reason_class, StopReasonClass::Safety);

        let bad = write(
            &dir,
            "bad.tsv",
            "gene_id\tefo_id\tphase\tstatus\tstop_reason_class\nG1\tD1\t5\tactive\tnone\n",
        );
        assert!(matches!(
            parse_outcomes(&bad),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = write(
            &dir,
            "bad2.tsv",
            "gene_id\tefo_id\tphase\tstatus\tstop_reason_class\nG1\tD1\t1\tactive\tbudget\n",
        );
        assert!(matches!(
            parse_outcomes(&bad),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
