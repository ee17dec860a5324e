use std::collections::BTreeSet;

use rand::Rng;

use super::{Coord, SparseTensor};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::scalar::Real;

/// Train / held-out partition of one layer's observed cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSplit {
    pub train: BTreeSet<Coord>,
    pub heldout: BTreeSet<Coord>,
    pub seed: u64,
}

/// Number of class members to hold out: `fraction·n` rounded half up.
pub(crate) fn heldout_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 0.5).floor() as usize
}

/// Stratified split of the cells in `layer`.
///
/// Cells with value ≥ 0.5 count as positives. Each class is sorted by
/// coordinate and shuffled by forward Fisher–Yates (`swap(i, uniform(i..n))`)
/// on its own stream, `(seed, Split, 2·layer)` for positives and
/// `(seed, Split, 2·layer + 1)` for negatives; the first
/// `round_half_up(fraction·n)` members are held out. Only the swaps that
/// reach the held-out prefix are performed.
pub fn split_cells<T: Real>(
    tensor: &SparseTensor<T>,
    layer: usize,
    heldout_fraction: f64,
    seed: u64,
) -> Result<CellSplit> {
    if !(heldout_fraction > 0.0 && heldout_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "heldout fraction must be in (0, 1), got {heldout_fraction}"
        )));
    }
    if layer >= tensor.dims()[2] {
        return Err(Error::invalid(format!("layer {layer} out of range")));
    }
    let half = T::lit(0.5);
    let (mut pos, mut neg): (Vec<Coord>, Vec<Coord>) = (Vec::new(), Vec::new());
    for e in tensor.layer_entries(layer) {
        if e.value >= half {
            pos.push(e.coord);
        } else {
            neg.push(e.coord);
        }
    }
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InsufficientClassMembers {
            layer,
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    pos.sort_unstable();
    neg.sort_unstable();

    let mut split = CellSplit {
        train: BTreeSet::new(),
        heldout: BTreeSet::new(),
        seed,
    };
    for (c, class) in [&mut pos, &mut neg].into_iter().enumerate() {
        let mut rng = rng::stream(seed, 0, Purpose::Split, 2 * layer as u64 + c as u64);
        let n = class.len();
        let take = heldout_count(n, heldout_fraction);
        for i in 0..take.min(n.saturating_sub(1)) {
            let j = rng.random_range(i..n);
            class.swap(i, j);
        }
        split.heldout.extend(class[..take].iter().copied());
        split.train.extend(class[take..].iter().copied());
    }
    Ok(split)
}
