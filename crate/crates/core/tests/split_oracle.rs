use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use targetfact::rng::{stream, Purpose};
use targetfact::tensor::{split_cells, Coord, SparseTensor};

/// Full shuffle of each class, then the rounded prefix.
fn reference_split(
    t: &SparseTensor<f64>,
    layer: usize,
    fraction: f64,
    seed: u64,
) -> BTreeSet<Coord> {
    let mut classes: [Vec<Coord>; 2] = [Vec::new(), Vec::new()];
    for e in t.entries().iter().filter(|e| e.coord.k == layer) {
        classes[usize::from(e.value < 0.5)].push(e.coord);
    }
    let mut held = BTreeSet::new();
    for (c, mut class) in classes.into_iter().enumerate() {
        class.sort();
        let mut rng = stream(seed, 0, Purpose::Split, 2 * layer as u64 + c as u64);
        let n = class.len();
        for i in 0..n.saturating_sub(1) {
            let j = rng.random_range(i..n);
            class.swap(i, j);
        }
        let take = (fraction * n as f64 + 0.5).floor() as usize;
        held.extend(&class[..take]);
    }
    held
}

fn fixture_slice() -> SparseTensor<f64> {
    // 7 × 6 outcome slice, every third cell positive, plus an evidence layer
    let mut cells = Vec::new();
    for i in 0..7 {
        for j in 0..6 {
            let n = i * 6 + j;
            cells.push((Coord::new(i, j, 0), if n % 3 == 0 { 1.0 } else { 0.0 }));
            if n % 2 == 0 {
                cells.push((Coord::new(i, j, 1), 0.7));
            }
        }
    }
    SparseTensor::from_entries([7, 6, 2], cells).unwrap()
}

#[test]
fn fixture_slice_matches_reference() {
    let t = fixture_slice();
    let s = split_cells(&t, 0, 0.2, 2024).unwrap();
    assert_eq!(s.heldout, reference_split(&t, 0, 0.2, 2024));
    // 14 positives → 3 held out, 28 negatives → 6 held out
    assert_eq!(s.heldout.len(), 9);
    assert_eq!(s.heldout.len() + s.train.len(), 42);
}

proptest! {
    #[test]
    fn matches_reference_on_random_slices(
        labels in proptest::collection::vec(any::<bool>(), 4..60),
        fraction in 0.05f64..0.95,
        seed in any::<u64>(),
    ) {
        let pos = labels.iter().filter(|&&l| l).count();
        prop_assume!(pos >= 2 && labels.len() - pos >= 2);
        let t = SparseTensor::from_entries(
            [labels.len(), 1, 1],
            labels.iter().enumerate().map(|(i, &l)| (Coord::new(i, 0, 0), if l { 1.0 } else { 0.0 })),
        ).unwrap();
        let s = split_cells(&t, 0, fraction, seed).unwrap();
        prop_assert_eq!(&s.heldout, &reference_split(&t, 0, fraction, seed));
        prop_assert!(s.train.is_disjoint(&s.heldout));
        prop_assert_eq!(s.train.len() + s.heldout.len(), labels.len());
    }
}
