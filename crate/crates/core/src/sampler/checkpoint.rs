//! Model checkpoints and prediction tables on disk.
//!
//! A checkpoint directory holds `latents_{target,indication,layer}.tsv` and
//! `manifest.json`.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::hyper::ModeParams;
use super::model::ModelState;
use super::run::SamplerSchedule;
use crate::error::{Error, Result};
use crate::fsutil::{self, csv_error, tsv_reader};
use crate::scalar::Real;
use crate::tensor::{Coord, Mode, TensorIndex};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredParams {
    pub mu: Vec<f64>,
    pub lambda: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub latent_dim: usize,
    pub alpha: f64,
    pub schedule: SamplerSchedule,
    pub seed: u64,
    pub retained: usize,
    pub sweeps: u64,
    pub dims: [usize; 3],
    pub latent_files: BTreeMap<Mode, String>,
    pub mode_params: BTreeMap<Mode, StoredParams>,
}

fn latent_file(mode: Mode) -> String {
    match mode {
        Mode::Target => "latents_target.tsv",
        Mode::Indication => "latents_indication.tsv",
        Mode::Layer => "latents_layer.tsv",
    }
    .to_string()
}

pub fn save_checkpoint<T: Real>(
    dir: &Path,
    state: &ModelState<T>,
    schedule: &SamplerSchedule,
    retained: usize,
    index: Option<&TensorIndex>,
) -> Result<CheckpointManifest> {
    let d = state.latent_dim();
    let mut latent_files = BTreeMap::new();
    let mut mode_params = BTreeMap::new();
    for mode in Mode::ALL {
        let name = latent_file(mode);
        let latents = state.latents(mode);
        fsutil::write_atomic(&dir.join(&name), |w| {
            write!(w, "id")?;
            for c in 0..d {
                write!(w, "\td{c}")?;
            }
            writeln!(w)?;
            for (e, row) in latents.rows().into_iter().enumerate() {
                match index.and_then(|ix| ix.mode(mode).id(e)) {
                    Some(id) => write!(w, "{id}")?,
                    None => write!(w, "{e}")?,
                }
                for x in row {
                    write!(w, "\t{x}")?;
                }
                writeln!(w)?;
            }
            Ok(())
        })?;
        latent_files.insert(mode, name);
        let p = state.params(mode);
        mode_params.insert(
            mode,
            StoredParams {
                mu: p.mu.iter().map(|x| x.as_f64()).collect(),
                lambda: p
                    .lambda
                    .rows()
                    .into_iter()
                    .map(|r| r.iter().map(|x| x.as_f64()).collect())
                    .collect(),
            },
        );
    }
    let manifest = CheckpointManifest {
        latent_dim: d,
        alpha: state.alpha().as_f64(),
        schedule: *schedule,
        seed: state.seed(),
        retained,
        sweeps: state.sweeps(),
        dims: state.dims(),
        latent_files,
        mode_params,
    };
    fsutil::write_json_atomic(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn load_checkpoint<T: Real>(dir: &Path) -> Result<(ModelState<T>, CheckpointManifest)> {
    let manifest: CheckpointManifest = fsutil::read_json(&dir.join(MANIFEST_FILE))?;
    let d = manifest.latent_dim;
    let mut latents = Vec::with_capacity(3);
    let mut params = Vec::with_capacity(3);
    for mode in Mode::ALL {
        let name = manifest
            .latent_files
            .get(&mode)
            .ok_or_else(|| Error::Data(format!("manifest lacks latent file for {mode:?}")))?;
        let path = dir.join(name);
        let mut rdr = tsv_reader(&path)?;
        let mut data = Vec::new();
        let mut rows = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(&path, e))?;
            if rec.len() != d + 1 {
                return Err(Error::Data(format!(
                    "{}: expected {} columns",
                    path.display(),
                    d + 1
                )));
            }
            for field in rec.iter().skip(1) {
                let x: f64 = field.parse().map_err(|_| {
                    Error::Data(format!("{}: bad number {field:?}", path.display()))
                })?;
                data.push(T::lit(x));
            }
            rows += 1;
        }
        if rows != manifest.dims[mode.axis()] {
            return Err(Error::Data(format!(
                "{}: expected {} rows, found {rows}",
                path.display(),
                manifest.dims[mode.axis()]
            )));
        }
        latents.push(Array2::from_shape_vec((rows, d), data).expect("row width checked"));

        let stored = manifest
            .mode_params
            .get(&mode)
            .ok_or_else(|| Error::Data(format!("manifest lacks parameters for {mode:?}")))?;
        if stored.mu.len() != d
            || stored.lambda.len() != d
            || stored.lambda.iter().any(|r| r.len() != d)
        {
            return Err(Error::Data(format!(
                "parameters for {mode:?} have the wrong shape"
            )));
        }
        params.push(ModeParams {
            mu: Array1::from_iter(stored.mu.iter().map(|&x| T::lit(x))),
            lambda: Array2::from_shape_fn((d, d), |(r, c)| T::lit(stored.lambda[r][c])),
        });
    }
    let latents: [Array2<T>; 3] = latents.try_into().expect("three modes");
    let params: [ModeParams<T>; 3] = params.try_into().expect("three modes");
    let state = ModelState::from_parts(
        latents,
        params,
        T::lit(manifest.alpha),
        manifest.seed,
        manifest.sweeps,
    )?;
    Ok((state, manifest))
}

/// One row of a prediction table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub target_id: String,
    pub indication_id: String,
    pub layer: String,
    pub score: f64,
}

/// `target_id\tindication_id\tlayer\tscore`, one row per prediction.
pub fn write_predictions<T: Real>(
    path: &Path,
    predictions: &[(Coord, T)],
    index: &TensorIndex,
) -> Result<()> {
    let mut rows = Vec::with_capacity(predictions.len());
    for &(c, score) in predictions {
        let lookup = |mode: Mode, x: usize| {
            index.mode(mode).id(x).ok_or_else(|| {
                Error::invalid(format!("prediction index {x} outside {mode:?} mode"))
            })
        };
        rows.push((
            lookup(Mode::Target, c.i)?,
            lookup(Mode::Indication, c.j)?,
            lookup(Mode::Layer, c.k)?,
            score,
        ));
    }
    fsutil::write_atomic(path, |w| {
        writeln!(w, "target_id\tindication_id\tlayer\tscore")?;
        for (t, i, l, s) in &rows {
            writeln!(w, "{t}\t{i}\t{l}\t{s}")?;
        }
        Ok(())
    })
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>> {
    let mut rdr = tsv_reader(path)?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| csv_error(path, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{init_model, Hyperprior};
    use crate::tensor::io::numbered_index;

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let prior = Hyperprior::<f64>::standard(3).unwrap();
        let state = init_model([4, 3, 2], 3, &prior, 5.0, 77).unwrap();
        let index = numbered_index([4, 3, 2], None).unwrap();
        let schedule = SamplerSchedule::new(1, 4, 2).unwrap();
        let manifest = save_checkpoint(dir.path(), &state, &schedule, 2, Some(&index)).unwrap();
        assert_eq!(manifest.retained, 2);
        let (back, m2) = load_checkpoint::<f64>(dir.path()).unwrap();
        assert_eq!(m2, manifest);
        assert_eq!(back, state);
        let first = std::fs::read_to_string(dir.path().join("latents_target.tsv")).unwrap();
        assert!(first.starts_with("id\td0\td1\td2\nT0\t"));
    }

    #[test]
    fn predictions_table() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pred.tsv");
        let index = numbered_index([2, 2, 1], Some(vec!["outcome".into()])).unwrap();
        write_predictions(&p, &[(Coord::new(1, 0, 0), 0.75f64)], &index).unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            "target_id\tindication_id\tlayer\tscore\nT1\tI0\toutcome\t0.75\n"
        );
        let rows = read_predictions(&p).unwrap();
        assert_eq!(rows[0].score, 0.75);
        assert!(write_predictions(&p, &[(Coord::new(2, 0, 0), 0.5f64)], &index).is_err());
    }
}
