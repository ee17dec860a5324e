//! Coordinate-format rank-3 tensor of observations.
//!
//! Mode 0 holds drug targets, mode 1 indications and mode 2 the layers
//! (clinical outcome at layer 0, evidence layers after it). Values are
//! binary labels or scores in `[0, 1]`.

mod index;
pub mod io;
mod split;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use index::{build_index, Mode, ModeIndex, TensorIndex};
pub use split::{split_cells, CellSplit};

/// Position of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Coord {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        Self { i, j, k }
    }

    pub fn along(&self, mode: Mode) -> usize {
        match mode {
            Mode::Target => self.i,
            Mode::Indication => self.j,
            Mode::Layer => self.k,
        }
    }

    pub fn within(&self, dims: [usize; 3]) -> bool {
        self.i < dims[0] && self.j < dims[1] && self.k < dims[2]
    }
}

impl From<(usize, usize, usize)> for Coord {
    fn from((i, j, k): (usize, usize, usize)) -> Self {
        Self { i, j, k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry<T> {
    pub coord: Coord,
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct SparseTensor<T> {
    dims: [usize; 3],
    entries: Vec<Entry<T>>,
    lookup: HashMap<Coord, usize>,
}

impl<T: Real> SparseTensor<T> {
    pub fn new(dims: [usize; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::invalid(format!(
                "tensor dims must be positive, got {dims:?}"
            )));
        }
        Ok(Self {
            dims,
            entries: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn from_entries<I>(dims: [usize; 3], entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Coord, T)>,
    {
        let mut t = Self::new(dims)?;
        for (c, v) in entries {
            t.insert(c.i, c.j, c.k, v)?;
        }
        Ok(t)
    }

    /// Add one observation. Duplicate coordinates are rejected rather than
    /// overwritten.
    pub fn insert(&mut self, i: usize, j: usize, k: usize, value: T) -> Result<()> {
        let coord = Coord { i, j, k };
        if !coord.within(self.dims) {
            return Err(Error::OutOfRange {
                i,
                j,
                k,
                dims: self.dims,
            });
        }
        if !value.is_finite() || value < T::zero() || value > T::one() {
            return Err(Error::InvalidValue {
                i,
                j,
                k,
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
        if self.lookup.contains_key(&coord) {
            return Err(Error::DuplicateCoordinate { i, j, k });
        }
        self.lookup.insert(coord, self.entries.len());
        self.entries.push(Entry { coord, value });
        Ok(())
    }

    pub fn get(&self, coord: Coord) -> Option<T> {
        self.lookup.get(&coord).map(|&p| self.entries[p].value)
    }

    pub fn contains(&self, coord: Coord) -> bool {
        self.lookup.contains_key(&coord)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn dim(&self, mode: Mode) -> usize {
        self.dims[mode.axis()]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Observed fraction of all cells.
    pub fn density(&self) -> f64 {
        self.entries.len() as f64 / self.dims.iter().product::<usize>() as f64
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }

    /// Entries sorted by coordinate.
    pub fn sorted_entries(&self) -> Vec<Entry<T>> {
        let mut out = self.entries.clone();
        out.sort_by_key(|e| e.coord);
        out
    }

    pub fn layer_entries(&self, k: usize) -> impl Iterator<Item = &Entry<T>> + '_ {
        self.entries.iter().filter(move |e| e.coord.k == k)
    }

    /// Copy of the tensor with the given cells removed.
    pub fn without(&self, drop: &BTreeSet<Coord>) -> Self {
        let mut out = Self::new(self.dims).expect("dims already validated");
        for e in &self.entries {
            if !drop.contains(&e.coord) {
                out.lookup.insert(e.coord, out.entries.len());
                out.entries.push(*e);
            }
        }
        out
    }

    /// Keep only the listed layers; `layers[n]` becomes layer `n`.
    pub fn select_layers(&self, layers: &[usize]) -> Result<Self> {
        let mut remap = vec![None; self.dims[2]];
        for (new, &old) in layers.iter().enumerate() {
            let slot = remap
                .get_mut(old)
                .ok_or_else(|| Error::invalid(format!("layer {old} out of range")))?;
            if slot.is_some() {
                return Err(Error::invalid(format!("layer {old} selected twice")));
            }
            *slot = Some(new);
        }
        let mut out = Self::new([self.dims[0], self.dims[1], layers.len()])?;
        for e in &self.entries {
            if let Some(k) = remap[e.coord.k] {
                out.insert(e.coord.i, e.coord.j, k, e.value)?;
            }
        }
        Ok(out)
    }

    /// Per-entity grouping of entries along `mode`.
    pub fn fibers(&self, mode: Mode) -> FiberIndex {
        FiberIndex::build(self, mode)
    }
}

/// Entries grouped by their coordinate along one mode, CSR style.
///
/// Within an entity, entries are ordered by coordinate so that sums over
/// them are computed in the same order regardless of insertion history.
#[derive(Debug, Clone)]
pub struct FiberIndex {
    mode: Mode,
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl FiberIndex {
    fn build<T: Real>(tensor: &SparseTensor<T>, mode: Mode) -> Self {
        let n = tensor.dim(mode);
        let mut order: Vec<usize> = (0..tensor.len()).collect();
        order.sort_by_key(|&p| {
            let c = tensor.entries[p].coord;
            (c.along(mode), c)
        });
        let mut offsets = vec![0usize; n + 1];
        for &p in &order {
            offsets[tensor.entries[p].coord.along(mode) + 1] += 1;
        }
        for e in 0..n {
            offsets[e + 1] += offsets[e];
        }
        Self {
            mode,
            offsets,
            members: order,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn num_entities(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Entry positions (into [`SparseTensor::entries`]) for one entity.
    pub fn entity(&self, e: usize) -> &[usize] {
        &self.members[self.offsets[e]..self.offsets[e + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_into_empty() {
        let mut t = SparseTensor::<f64>::new([2, 2, 2]).unwrap();
        t.insert(0, 0, 0, 1.0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(Coord::new(0, 0, 0)), Some(1.0));
    }

    #[test]
    fn duplicate_is_rejected() {
        let mut t = SparseTensor::<f64>::new([2, 2, 2]).unwrap();
        t.insert(1, 0, 1, 1.0).unwrap();
        let err = t.insert(1, 0, 1, 0.0).unwrap_err();
        assert!(matches!(
            err,
            Error::DuplicateCoordinate { i: 1, j: 0, k: 1 }
        ));
        assert_eq!(t.get(Coord::new(1, 0, 1)), Some(1.0));
    }

    #[test]
    fn range_and_value_checks() {
        let mut t = SparseTensor::<f64>::new([2, 2, 2]).unwrap();
        assert!(matches!(
            t.insert(2, 0, 0, 1.0),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            t.insert(0, 0, 0, f64::NAN),
            Err(Error::InvalidValue { .. })
        ));
        assert!(matches!(
            t.insert(0, 0, 0, 1.5),
            Err(Error::InvalidValue { .. })
        ));
        assert!(matches!(
            t.insert(0, 0, 0, -0.1),
            Err(Error::InvalidValue { .. })
        ));
        assert!(t.is_empty());
        assert!(SparseTensor::<f64>::new([0, 1, 1]).is_err());
    }

    #[test]
    fn fibers_group_entries() {
        let t = SparseTensor::<f64>::from_entries(
            [3, 2, 2],
            [
                (Coord::new(2, 1, 0), 1.0),
                (Coord::new(0, 0, 0), 0.0),
                (Coord::new(2, 0, 1), 0.5),
            ],
        )
        .unwrap();
        let f = t.fibers(Mode::Target);
        assert_eq!(f.num_entities(), 3);
        assert_eq!(f.entity(0), &[1]);
        assert!(f.entity(1).is_empty());
        // (2,0,1) sorts before (2,1,0)
        assert_eq!(f.entity(2), &[2, 0]);
        let f = t.fibers(Mode::Layer);
        assert_eq!(f.entity(0).len(), 2);
        assert_eq!(f.entity(1), &[2]);
    }

    #[test]
    fn select_layers_remaps() {
        let t = SparseTensor::<f64>::from_entries(
            [1, 1, 4],
            (0..4).map(|k| (Coord::new(0, 0, k), k as f64 / 4.0)),
        )
        .unwrap();
        let s = t.select_layers(&[0, 3]).unwrap();
        assert_eq!(s.dims(), [1, 1, 2]);
        assert_eq!(s.get(Coord::new(0, 0, 1)), Some(0.75));
        assert!(t.select_layers(&[0, 0]).is_err());
        assert!(t.select_layers(&[4]).is_err());
    }

    proptest! {
        #[test]
        fn lookup_returns_inserted_value(
            cells in proptest::collection::btree_map((0usize..5, 0usize..4, 0usize..3), 0.0f64..=1.0, 0..40)
        ) {
            let mut t = SparseTensor::<f64>::new([5, 4, 3]).unwrap();
            for (&(i, j, k), &v) in &cells {
                t.insert(i, j, k, v).unwrap();
            }
            prop_assert_eq!(t.len(), cells.len());
            prop_assert!(t.len() <= 5 * 4 * 3);
            for (&(i, j, k), &v) in &cells {
                prop_assert_eq!(t.get(Coord::new(i, j, k)), Some(v));
            }
            for mode in Mode::ALL {
                let f = t.fibers(mode);
                let total: usize = (0..f.num_entities()).map(|e| f.entity(e).len()).sum();
                prop_assert_eq!(total, t.len());
            }
        }
    }
}
