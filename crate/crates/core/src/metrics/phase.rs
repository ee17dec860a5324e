use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classify::bonferroni;
use super::mww::mann_whitney_u;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::ingest::{OutcomePair, MAX_PHASE, OUTCOME_LAYER};
use crate::sampler::checkpoint::PredictionRow;

/// Groups with fewer members are left out of the comparisons.
pub const MIN_GROUP_SIZE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseComparison {
    pub phase_a: u8,
    pub phase_b: u8,
    pub n_a: usize,
    pub n_b: usize,
    pub u: f64,
    pub p_raw: f64,
    pub p_corrected: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAnalysis {
    /// Scores of every group that was tested.
    pub groups: BTreeMap<u8, Vec<f64>>,
    /// Phase → member count for groups below [`MIN_GROUP_SIZE`].
    pub excluded: BTreeMap<u8, usize>,
    pub pairwise: Vec<PhaseComparison>,
    /// Bonferroni factor: the number of comparisons.
    pub m: usize,
}

/// Compare the score distributions of every pair of phases 0–4.
pub fn phase_analysis(scored: &[(f64, u8)]) -> Result<PhaseAnalysis> {
    let mut all: BTreeMap<u8, Vec<f64>> = (0..=MAX_PHASE).map(|p| (p, Vec::new())).collect();
    for &(score, phase) in scored {
        all.get_mut(&phase)
            .ok_or_else(|| Error::invalid(format!("phase {phase} outside 0-{MAX_PHASE}")))?
            .push(score);
    }
    let mut groups = BTreeMap::new();
    let mut excluded = BTreeMap::new();
    for (phase, scores) in all {
        if scores.len() < MIN_GROUP_SIZE {
            log::warn!("phase {phase} has {} member(s); excluded", scores.len());
            excluded.insert(phase, scores.len());
        } else {
            groups.insert(phase, scores);
        }
    }
    let phases: Vec<u8> = groups.keys().copied().collect();
    let mut pairwise = Vec::new();
    for (x, &a) in phases.iter().enumerate() {
        for &b in &phases[x + 1..] {
            let r = mann_whitney_u(&groups[&a], &groups[&b])?;
            pairwise.push(PhaseComparison {
                phase_a: a,
                phase_b: b,
                n_a: groups[&a].len(),
                n_b: groups[&b].len(),
                u: r.u,
                p_raw: r.p,
                p_corrected: f64::NAN,
                exact: r.exact,
            });
        }
    }
    let m = pairwise.len();
    let raw: Vec<f64> = pairwise.iter().map(|c| c.p_raw).collect();
    for (c, p) in pairwise.iter_mut().zip(bonferroni(&raw, m)?) {
        c.p_corrected = p;
    }
    Ok(PhaseAnalysis {
        groups,
        excluded,
        pairwise,
        m,
    })
}

/// Pair each outcome-layer prediction with the max phase of its
/// (gene, disease) pair. Predictions on other layers are ignored.
pub fn join_phases(predictions: &[PredictionRow], pairs: &[OutcomePair]) -> Result<Vec<(f64, u8)>> {
    let phase: HashMap<(&str, &str), u8> = pairs
        .iter()
        .map(|p| ((p.gene_id.as_str(), p.disease_id.as_str()), p.max_phase))
        .collect();
    predictions
        .iter()
        .filter(|r| r.layer == OUTCOME_LAYER)
        .map(|r| {
            phase
                .get(&(r.target_id.as_str(), r.indication_id.as_str()))
                .map(|&ph| (r.score, ph))
                .ok_or_else(|| {
                    Error::Data(format!(
                        "prediction {}/{} has no outcome pair",
                        r.target_id, r.indication_id
                    ))
                })
        })
        .collect()
}

/// `phase_a\tphase_b\tU\tp_raw\tp_corrected`, then one `#` comment row per
/// excluded phase.
pub fn write_phase_tsv(path: &Path, analysis: &PhaseAnalysis) -> Result<()> {
    fsutil::write_atomic(path, |w| {
        writeln!(w, "phase_a\tphase_b\tU\tp_raw\tp_corrected")?;
        for c in &analysis.pairwise {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                c.phase_a, c.phase_b, c.u, c.p_raw, c.p_corrected
            )?;
        }
        for (phase, n) in &analysis.excluded {
            writeln!(w, "# excluded phase {phase}: {n} member(s)")?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_phases_give_ten_tests() {
        let scored: Vec<(f64, u8)> = (0..=4u8)
            .flat_map(|p| (0..5).map(move |x| (x as f64 * 0.1, p)))
            .collect();
        let a = phase_analysis(&scored).unwrap();
        assert_eq!(a.m, 10);
        assert_eq!(a.pairwise.len(), 10);
        assert!(a.pairwise.iter().all(|c| c.p_corrected == 1.0));
        assert!(a.excluded.is_empty());
    }

    #[test]
    fn small_groups_excluded() {
        let scored = vec![(0.1, 1), (0.2, 1), (0.3, 3), (0.4, 3), (0.5, 4)];
        let a = phase_analysis(&scored).unwrap();
        assert_eq!(a.m, 1);
        assert_eq!(a.excluded, BTreeMap::from([(0, 0), (2, 0), (4, 1)]));
        assert!(phase_analysis(&[(0.1, 7)]).is_err());
    }

    #[test]
    fn tsv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("phase.tsv");
        let a = phase_analysis(&[(0.1, 1), (0.2, 1), (0.8, 3), (0.9, 3)]).unwrap();
        write_phase_tsv(&p, &a).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "phase_a\tphase_b\tU\tp_raw\tp_corrected");
        assert!(lines[1].starts_with("1\t3\t0\t"), "{}", lines[1]);
        assert_eq!(
            lines.iter().filter(|l| l.starts_with("# excluded")).count(),
            3
        );
    }

    #[test]
    fn join_requires_pair() {
        let pair = OutcomePair {
            gene_id: "G".into(),
            disease_id: "M".into(),
            status_set: Default::default(),
            max_phase: 3,
            stop_reason_class: crate::ingest::StopReasonClass::None,
            label: None,
        };
        let row = |t: &str, layer: &str| PredictionRow {
            target_id: t.into(),
            indication_id: "M".into(),
            layer: layer.into(),
            score: 0.4,
        };
        let joined = join_phases(
            &[row("G", "outcome"), row("H", "gwas")],
            std::slice::from_ref(&pair),
        )
        .unwrap();
        assert_eq!(joined, vec![(0.4, 3)]);
        assert!(join_phases(&[row("H", "outcome")], &[pair]).is_err());
    }
}
