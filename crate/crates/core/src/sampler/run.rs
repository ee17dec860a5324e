use serde::{Deserialize, Serialize};

use super::gibbs::GibbsSampler;
use super::model::ModelState;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::Coord;

/// Burn-in, post-burn-in sweep count, and thinning interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerSchedule {
    pub burnin: usize,
    pub samples: usize,
    pub thin: usize,
}

impl SamplerSchedule {
    /// 500 burn-in sweeps, 3500 sweeps collected, every 350th kept.
    pub const PUBLISHED: SamplerSchedule = SamplerSchedule {
        burnin: 500,
        samples: 3500,
        thin: 350,
    };

    pub fn new(burnin: usize, samples: usize, thin: usize) -> Result<Self> {
        let s = Self {
            burnin,
            samples,
            thin,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::invalid("thin must be at least 1"));
        }
        if self.samples < self.thin {
            return Err(Error::invalid(format!(
                "schedule retains no samples: samples {} < thin {}",
                self.samples, self.thin
            )));
        }
        Ok(())
    }

    /// `floor(samples / thin)`.
    pub fn retained(&self) -> usize {
        self.samples / self.thin
    }

    /// Whether post-burn-in sweep `s` (1-based) is kept.
    pub fn keeps(&self, s: usize) -> bool {
        s.is_multiple_of(self.thin)
    }
}

impl Default for SamplerSchedule {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

/// Running sums of per-sample predictions for a fixed set of cells.
#[derive(Debug, Clone)]
pub struct PredictionAccumulator<T> {
    cells: Vec<Coord>,
    sums: Vec<T>,
    count: usize,
}

impl<T: Real> PredictionAccumulator<T> {
    pub fn new(cells: Vec<Coord>) -> Self {
        let sums = vec![T::zero(); cells.len()];
        Self {
            cells,
            sums,
            count: 0,
        }
    }

    pub fn consume(&mut self, state: &ModelState<T>) {
        for (s, c) in self.sums.iter_mut().zip(&self.cells) {
            *s += super::model::clamp_unit(state.raw_score(*c));
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn cells(&self) -> &[Coord] {
        &self.cells
    }

    /// Arithmetic mean per cell. Empty when nothing was consumed.
    pub fn means(&self) -> Vec<(Coord, T)> {
        if self.count == 0 {
            return Vec::new();
        }
        let n = T::from_usize_lossy(self.count);
        self.cells
            .iter()
            .zip(&self.sums)
            .map(|(&c, &s)| (c, s / n))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<T> {
    /// Averaged prediction per query cell, in query order.
    pub predictions: Vec<(Coord, T)>,
    pub retained: usize,
}

impl<T: Real> GibbsSampler<'_, T> {
    /// Burn in, then sweep `samples` more times keeping every `thin`-th
    /// state, and average the clamped predictions of the kept states.
    pub fn run(
        &self,
        state: &mut ModelState<T>,
        schedule: &SamplerSchedule,
        query: &[Coord],
    ) -> Result<RunOutput<T>> {
        schedule.validate()?;
        let dims = self.tensor().dims();
        if let Some(c) = query.iter().find(|c| !c.within(dims)) {
            return Err(Error::OutOfRange {
                i: c.i,
                j: c.j,
                k: c.k,
                dims,
            });
        }
        for _ in 0..schedule.burnin {
            self.step(state)?;
        }
        let mut acc = PredictionAccumulator::new(query.to_vec());
        for s in 1..=schedule.samples {
            self.step(state)?;
            if schedule.keeps(s) {
                acc.consume(state);
            }
        }
        debug_assert_eq!(acc.count(), schedule.retained());
        log::debug!(
            "sampler finished {} sweeps, kept {}, train rmse {}",
            state.sweeps(),
            acc.count(),
            self.train_rmse(state)
        );
        Ok(RunOutput {
            retained: acc.count(),
            predictions: acc.means(),
        })
    }
}
