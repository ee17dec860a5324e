//! Text serialization: `i\tj\tk\tvalue` rows plus a JSON sidecar carrying
//! dims and the identifier sequence of each mode.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Coord, Mode, ModeIndex, SparseTensor, TensorIndex};
use crate::error::{Error, Result};
use crate::fsutil::{self, csv_error, tsv_reader};
use crate::scalar::Real;

pub const TENSOR_FILE: &str = "tensor.tsv";
pub const META_FILE: &str = "tensor.meta.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorMeta {
    pub dims: [usize; 3],
    pub targets: Vec<String>,
    pub indications: Vec<String>,
    pub layers: Vec<String>,
}

impl TensorMeta {
    pub fn from_index(index: &TensorIndex) -> Self {
        Self {
            dims: index.dims(),
            targets: index.targets.ids().to_vec(),
            indications: index.indications.ids().to_vec(),
            layers: index.layers.ids().to_vec(),
        }
    }

    pub fn to_index(&self) -> Result<TensorIndex> {
        let index = TensorIndex {
            targets: ModeIndex::from_ordered(Mode::Target, self.targets.clone())?,
            indications: ModeIndex::from_ordered(Mode::Indication, self.indications.clone())?,
            layers: ModeIndex::from_ordered(Mode::Layer, self.layers.clone())?,
        };
        if index.dims() != self.dims {
            return Err(Error::Data(format!(
                "metadata dims {:?} disagree with identifier counts {:?}",
                self.dims,
                index.dims()
            )));
        }
        Ok(index)
    }
}

#[derive(Deserialize)]
struct Row {
    i: usize,
    j: usize,
    k: usize,
    value: f64,
}

pub fn write_tensor_tsv<T: Real>(path: &Path, tensor: &SparseTensor<T>) -> Result<()> {
    let entries = tensor.sorted_entries();
    fsutil::write_atomic(path, |w| {
        writeln!(w, "i\tj\tk\tvalue")?;
        for e in &entries {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                e.coord.i, e.coord.j, e.coord.k, e.value
            )?;
        }
        Ok(())
    })
}

pub fn read_tensor_tsv<T: Real>(path: &Path, dims: [usize; 3]) -> Result<SparseTensor<T>> {
    let mut rdr = tsv_reader(path)?;
    let mut tensor = SparseTensor::new(dims)?;
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let value = T::from_f64(row.value).ok_or_else(|| {
            Error::Data(format!(
                "{}: unrepresentable value {}",
                path.display(),
                row.value
            ))
        })?;
        tensor.insert(row.i, row.j, row.k, value)?;
    }
    Ok(tensor)
}

/// Write `tensor.tsv` and `tensor.meta.json` into `dir`.
pub fn save_tensor<T: Real>(
    dir: &Path,
    tensor: &SparseTensor<T>,
    index: &TensorIndex,
) -> Result<()> {
    if tensor.dims() != index.dims() {
        return Err(Error::invalid("tensor dims do not match its index"));
    }
    write_tensor_tsv(&dir.join(TENSOR_FILE), tensor)?;
    fsutil::write_json_atomic(&dir.join(META_FILE), &TensorMeta::from_index(index))
}

pub fn load_tensor<T: Real>(dir: &Path) -> Result<(SparseTensor<T>, TensorIndex)> {
    let meta: TensorMeta = fsutil::read_json(&dir.join(META_FILE))?;
    let index = meta.to_index()?;
    let tensor = read_tensor_tsv(&dir.join(TENSOR_FILE), meta.dims)?;
    Ok((tensor, index))
}

/// Generic-index metadata for tensors without domain identifiers.
pub fn numbered_index(dims: [usize; 3], layer_names: Option<Vec<String>>) -> Result<TensorIndex> {
    let ids = |prefix: &str, n: usize| {
        let width = n.saturating_sub(1).to_string().len();
        (0..n)
            .map(|x| format!("{prefix}{x:0width$}"))
            .collect::<Vec<_>>()
    };
    let layers = match layer_names {
        Some(names) => names,
        None => ids("L", dims[2]),
    };
    let index = TensorIndex {
        targets: ModeIndex::from_ordered(Mode::Target, ids("T", dims[0]))?,
        indications: ModeIndex::from_ordered(Mode::Indication, ids("I", dims[1]))?,
        layers: ModeIndex::from_ordered(Mode::Layer, layers)?,
    };
    if index.dims() != dims {
        return Err(Error::invalid("layer names do not match layer count"));
    }
    Ok(index)
}

/// Value lookup keyed by coordinate, for oracle comparisons.
pub fn write_dense_tsv<T: Real>(path: &Path, dims: [usize; 3], values: &[T]) -> Result<()> {
    fsutil::write_atomic(path, |w| {
        writeln!(w, "i\tj\tk\tvalue")?;
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let c = Coord::new(i, j, k);
                    writeln!(w, "{i}\t{j}\t{k}\t{}", values[dense_offset(dims, c)])?;
                }
            }
        }
        Ok(())
    })
}

/// Row-major offset of `c` in a dense `dims` buffer.
pub fn dense_offset(dims: [usize; 3], c: Coord) -> usize {
    (c.i * dims[1] + c.j) * dims[2] + c.k
}
