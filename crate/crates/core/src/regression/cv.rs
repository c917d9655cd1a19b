use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{cp_als_fit, AlsOptions, FeatureBasis, SampleSet};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvEntry {
    pub rank: usize,
    pub ridge: f64,
    pub mean_rmse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: usize,
    pub seed: u64,
    pub entries: Vec<CvEntry>,
    /// Mean RMSEs within this distance of the minimum count as tied.
    pub tie_tolerance: f64,
    pub best: CvEntry,
}

/// k-fold cross-validation over a rank × ridge grid.
///
/// Samples are shuffled with `opts.seed` and dealt round-robin into folds.
/// The selection minimizes the mean validation RMSE, ties going to the
/// smaller rank and then the smaller ridge weight. RMSEs closer than
/// `1e-10 · rms(y)` to the minimum are ties, since fits that are exact up to
/// roundoff never agree bit for bit.
pub fn cross_validate(
    samples: &SampleSet,
    basis: &FeatureBasis,
    ranks: &[usize],
    ridges: &[f64],
    folds: usize,
    opts: &AlsOptions,
) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least two folds"));
    }
    if folds > samples.len() {
        return Err(Error::invalid(format!("{folds} folds for {} samples", samples.len())));
    }
    if ranks.is_empty() || ridges.is_empty() {
        return Err(Error::invalid("rank and ridge grids must be nonempty"));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    let splits: Vec<(SampleSet, SampleSet)> = (0..folds)
        .map(|f| {
            let mut train = Vec::new();
            let mut val = Vec::new();
            for (pos, &i) in order.iter().enumerate() {
                if pos % folds == f {
                    val.push(i)
                } else {
                    train.push(i)
                }
            }
            Ok((samples.subset(&train)?, samples.subset(&val)?))
        })
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    for &rank in ranks {
        for &ridge in ridges {
            let o = AlsOptions { rank, ridge, ..opts.clone() };
            let mut total = 0.0;
            for (train, val) in &splits {
                let (model, _) = cp_als_fit(train, basis, &o, None)?;
                total += model.rmse(val);
            }
            entries.push(CvEntry { rank, ridge, mean_rmse: total / folds as f64 });
        }
    }
    let rms_y = (samples.values().iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt();
    let tie_tolerance = 1e-10 * rms_y;
    let lowest = entries.iter().map(|e| e.mean_rmse).fold(f64::INFINITY, f64::min);
    let best = entries
        .iter()
        .filter(|e| e.mean_rmse <= lowest + tie_tolerance)
        .min_by(|a, b| a.rank.cmp(&b.rank).then(a.ridge.total_cmp(&b.ridge)))
        .cloned()
        .ok_or_else(|| Error::invalid("cross-validation produced no finite error"))?;
    Ok(CvReport { folds, seed: opts.seed, entries, tie_tolerance, best })
}
