use std::collections::BTreeMap;

use super::records::{EvidenceLayer, EvidenceRecord, OutcomePair};
use crate::error::{Error, Result};
use crate::tensor::{Mode, ModeIndex, SparseTensor, TensorIndex};

/// Name of layer 0.
pub const OUTCOME_LAYER: &str = "outcome";

/// Layer names in tensor order for an evidence selection.
pub fn layer_names(selection: &[EvidenceLayer]) -> Vec<String> {
    std::iter::once(OUTCOME_LAYER.to_string())
        .chain(selection.iter().map(|l| l.name().to_string()))
        .collect()
}

/// Assemble the tensor: labeled outcome pairs at `k = 0`, then one layer
/// per selected evidence type in selection order.
///
/// Targets and indications are the union of ids over every outcome pair
/// (labeled or not) and every selected evidence record, sorted. Repeated
/// evidence coordinates keep the larger value.
pub fn build_tensor(
    evidence: &[EvidenceRecord],
    outcomes: &[OutcomePair],
    selection: &[EvidenceLayer],
) -> Result<(SparseTensor<f64>, TensorIndex)> {
    let mut layer_of = BTreeMap::new();
    for (pos, &layer) in selection.iter().enumerate() {
        if layer_of.insert(layer, pos + 1).is_some() {
            return Err(Error::invalid(format!("layer {layer} selected twice")));
        }
    }
    if !outcomes.iter().any(|p| p.label.is_some()) {
        return Err(Error::EmptyOutcomeLayer);
    }
    let selected: Vec<&EvidenceRecord> = evidence
        .iter()
        .filter(|r| layer_of.contains_key(&r.layer))
        .collect();

    let targets = ModeIndex::build(
        Mode::Target,
        outcomes
            .iter()
            .map(|p| p.gene_id.as_str())
            .chain(selected.iter().map(|r| r.gene_id.as_str())),
    )?;
    let indications = ModeIndex::build(
        Mode::Indication,
        outcomes
            .iter()
            .map(|p| p.disease_id.as_str())
            .chain(selected.iter().map(|r| r.disease_id.as_str())),
    )?;
    let layers = ModeIndex::from_ordered(Mode::Layer, layer_names(selection))?;
    let index = TensorIndex {
        targets,
        indications,
        layers,
    };

    let locate = |gene: &str, disease: &str| {
        (
            index.targets.get(gene).expect("gene indexed above"),
            index
                .indications
                .get(disease)
                .expect("disease indexed above"),
        )
    };
    let mut cells: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for p in outcomes {
        let (i, j) = locate(&p.gene_id, &p.disease_id);
        if let Some(label) = p.label {
            let v = if label { 1.0 } else { 0.0 };
            let slot = cells.entry((i, j, 0)).or_insert(v);
            *slot = slot.max(v);
        }
    }
    for r in selected {
        let (i, j) = locate(&r.gene_id, &r.disease_id);
        let slot = cells.entry((i, j, layer_of[&r.layer])).or_insert(r.value);
        *slot = slot.max(r.value);
    }
    let mut tensor = SparseTensor::new(index.dims())?;
    for ((i, j, k), v) in cells {
        tensor.insert(i, j, k, v)?;
    }
    Ok((tensor, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::records::StopReasonClass;
    use crate::tensor::Coord;

    fn pair(g: &str, d: &str, label: Option<bool>) -> OutcomePair {
        OutcomePair {
            gene_id: g.into(),
            disease_id: d.into(),
            status_set: Default::default(),
            max_phase: 1,
            stop_reason_class: StopReasonClass::None,
            label,
        }
    }

    fn rec(g: &str, d: &str, layer: EvidenceLayer, value: f64) -> EvidenceRecord {
        EvidenceRecord {
            gene_id: g.into(),
            disease_id: d.into(),
            layer,
            value,
        }
    }

    #[test]
    fn layers_and_union() {
        let outcomes = vec![pair("G1", "M1", Some(true)), pair("G2", "M2", None)];
        let evidence = vec![
            rec("G3", "M1", EvidenceLayer::RareDisease, 1.0),
            rec("G1", "M1", EvidenceLayer::GeneBurden, 0.0),
            rec("G1", "M2", EvidenceLayer::Gwas, 0.7),
        ];
        let (t, ix) = build_tensor(&evidence, &outcomes, &[EvidenceLayer::RareDisease]).unwrap();
        assert_eq!(t.dims(), [3, 2, 2]);
        assert_eq!(ix.layers.ids(), ["outcome", "rare_disease"]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(Coord::new(0, 0, 0)), Some(1.0));
        assert_eq!(t.get(Coord::new(2, 0, 1)), Some(1.0));

        let (t, ix) = build_tensor(&evidence, &outcomes, &EvidenceLayer::ALL).unwrap();
        assert_eq!(t.dims(), [3, 2, 4]);
        assert_eq!(
            ix.layers.ids(),
            ["outcome", "rare_disease", "gene_burden", "gwas"]
        );
        assert_eq!(t.get(Coord::new(0, 0, 2)), Some(0.0));
        assert_eq!(t.get(Coord::new(0, 1, 3)), Some(0.7));
    }

    #[test]
    fn empty_outcome_layer_rejected() {
        let err = build_tensor(&[], &[pair("G1", "M1", None)], &[EvidenceLayer::Gwas]).unwrap_err();
        assert!(matches!(err, Error::EmptyOutcomeLayer));
        assert!(build_tensor(
            &[],
            &[pair("G1", "M1", Some(false))],
            &[EvidenceLayer::Gwas, EvidenceLayer::Gwas]
        )
        .is_err());
    }
}
