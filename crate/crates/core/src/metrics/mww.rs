use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::classify::midranks;
use crate::error::{Error, Result};

/// Pooled size at or below which p is computed by enumeration.
pub const EXACT_MAX_POOLED: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwwResult {
    /// U of the first group: pairs where it is larger, ties counting half.
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

struct Pooled {
    ranks: Vec<f64>,
    n_a: usize,
    n_b: usize,
    u: f64,
}

fn pool(a: &[f64], b: &[f64]) -> Result<Pooled> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyGroup);
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::invalid("NaN in Mann-Whitney input"));
    }
    let values: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&values);
    let n_a = a.len();
    let rank_sum: f64 = ranks[..n_a].iter().sum();
    let u = rank_sum - (n_a * (n_a + 1)) as f64 / 2.0;
    Ok(Pooled {
        ranks,
        n_a,
        n_b: b.len(),
        u,
    })
}

/// Two-sided p by enumerating every assignment of the pooled midranks to
/// group A: `2·min(P(U ≤ u), P(U ≥ u))`, capped at 1.
pub fn mww_exact_p(a: &[f64], b: &[f64]) -> Result<f64> {
    let pooled = pool(a, b)?;
    let n = pooled.ranks.len();
    if n > 30 {
        return Err(Error::invalid(format!(
            "exact enumeration over {n} values is too large"
        )));
    }
    let offset = (pooled.n_a * (pooled.n_a + 1)) as f64 / 2.0;
    let eps = 1e-9;
    let (mut total, mut le, mut ge) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != pooled.n_a {
            continue;
        }
        let rank_sum: f64 = (0..n)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| pooled.ranks[b])
            .sum();
        let u = rank_sum - offset;
        total += 1;
        if u <= pooled.u + eps {
            le += 1;
        }
        if u >= pooled.u - eps {
            ge += 1;
        }
    }
    let tail = le.min(ge) as f64 / total as f64;
    Ok((2.0 * tail).min(1.0))
}

/// Two-sided p from the normal approximation with tie-corrected variance
/// and a 0.5 continuity correction.
pub fn mww_normal_p(a: &[f64], b: &[f64]) -> Result<f64> {
    let pooled = pool(a, b)?;
    let (na, nb) = (pooled.n_a as f64, pooled.n_b as f64);
    let n = na + nb;
    let mut sorted = pooled.ranks.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let end = start
            + sorted[start..]
                .iter()
                .take_while(|&&r| r == sorted[start])
                .count();
        let t = (end - start) as f64;
        tie_term += t * t * t - t;
        start = end;
    }
    let var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(1.0);
    }
    let mean = na * nb / 2.0;
    let z = ((pooled.u - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((2.0 * std.sf(z)).min(1.0))
}

/// Two-sided Mann-Whitney-Wilcoxon test; exact when the pooled size is at
/// most [`EXACT_MAX_POOLED`].
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MwwResult> {
    let pooled = pool(a, b)?;
    let exact = pooled.ranks.len() <= EXACT_MAX_POOLED;
    let p = if exact {
        mww_exact_p(a, b)?
    } else {
        mww_normal_p(a, b)?
    };
    Ok(MwwResult {
        u: pooled.u,
        p,
        exact,
    })
}
