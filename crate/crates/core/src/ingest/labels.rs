use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parse::for_each_row;
use super::records::{OutcomePair, StopReasonClass, TrialRow, TrialStatus, MAX_PHASE};
use crate::error::{Error, Result};
use crate::fsutil;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeStats {
    pub rows: usize,
    pub pairs: usize,
    pub positives: usize,
    pub negatives: usize,
    pub unlabeled: usize,
    pub unknown_status: usize,
}

/// Success if any approval; otherwise failure if any trial was terminated
/// or suspended, or stopped for safety or efficacy; otherwise unknown.
pub fn pair_label(pair: &OutcomePair) -> Option<bool> {
    if pair.status_set.contains(&TrialStatus::Approved) {
        Some(true)
    } else if pair.status_set.contains(&TrialStatus::Terminated)
        || pair.status_set.contains(&TrialStatus::Suspended)
        || pair.stop_reason_class.is_unfavorable()
    {
        Some(false)
    } else {
        None
    }
}

/// Group trial rows by (gene, disease) and label each pair. Output is
/// sorted by (gene, disease).
pub fn label_outcomes(rows: &[TrialRow]) -> (Vec<OutcomePair>, OutcomeStats) {
    let mut stats = OutcomeStats {
        rows: rows.len(),
        ..Default::default()
    };
    let mut pairs: BTreeMap<(&str, &str), OutcomePair> = BTreeMap::new();
    for row in rows {
        if let TrialStatus::Unknown(s) = &row.status {
            log::warn!(
                "unknown trial status {s:?} for {}/{}; not treated as a failure",
                row.gene_id,
                row.efo_id
            );
            stats.unknown_status += 1;
        }
        let pair = pairs
            .entry((&row.gene_id, &row.efo_id))
            .or_insert_with(|| OutcomePair {
                gene_id: row.gene_id.clone(),
                disease_id: row.efo_id.clone(),
                status_set: Default::default(),
                max_phase: 0,
                stop_reason_class: StopReasonClass::None,
                label: None,
            });
        pair.status_set.insert(row.status.clone());
        pair.max_phase = pair.max_phase.max(row.phase.min(MAX_PHASE));
        pair.stop_reason_class = pair.stop_reason_class.max(row.stop_reason_class);
    }
    let out: Vec<OutcomePair> = pairs
        .into_values()
        .map(|mut p| {
            p.label = pair_label(&p);
            p
        })
        .collect();
    stats.pairs = out.len();
    for p in &out {
        match p.label {
            Some(true) => stats.positives += 1,
            Some(false) => stats.negatives += 1,
            None => stats.unlabeled += 1,
        }
    }
    (out, stats)
}

pub const OUTCOME_PAIRS_FILE: &str = "outcome_pairs.tsv";

fn label_str(label: Option<bool>) -> &'static str {
    match label {
        Some(true) => "1",
        Some(false) => "0",
        None => "NA",
    }
}

/// `gene_id\tdisease_id\tmax_phase\tlabel\tstop_reason_class\tstatuses`;
/// labels are `1`, `0` or `NA`, statuses comma separated.
pub fn write_outcome_pairs(path: &Path, pairs: &[OutcomePair]) -> Result<()> {
    fsutil::write_atomic(path, |w| {
        writeln!(
            w,
            "gene_id\tdisease_id\tmax_phase\tlabel\tstop_reason_class\tstatuses"
        )?;
        for p in pairs {
            let statuses: Vec<&str> = p.status_set.iter().map(TrialStatus::as_str).collect();
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                p.gene_id,
                p.disease_id,
                p.max_phase,
                label_str(p.label),
                p.stop_reason_class.as_str(),
                statuses.join(",")
            )?;
        }
        Ok(())
    })
}

pub fn read_outcome_pairs(path: &Path) -> Result<Vec<OutcomePair>> {
    #[derive(Deserialize)]
    struct Row {
        gene_id: String,
        disease_id: String,
        max_phase: u8,
        label: String,
        stop_reason_class: String,
        statuses: String,
    }
    let bad = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    for_each_row(path, |line, row: Row| {
        if row.max_phase > MAX_PHASE {
            return Err(bad(
                line,
                format!("max_phase {} outside 0-4", row.max_phase),
            ));
        }
        let label = match row.label.trim() {
            "1" => Some(true),
            "0" => Some(false),
            "NA" | "" => None,
            other => {
                return Err(bad(
                    line,
                    format!("label must be 1, 0 or NA, got {other:?}"),
                ))
            }
        };
        out.push(OutcomePair {
            gene_id: row.gene_id,
            disease_id: row.disease_id,
            status_set: row
                .statuses
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(TrialStatus::parse)
                .collect(),
            max_phase: row.max_phase,
            stop_reason_class: row.stop_reason_class.parse().map_err(|m| bad(line, m))?,
            label,
        });
        Ok(())
    })?;
    Ok(out)
}
