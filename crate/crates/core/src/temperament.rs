//! Deviation of a scale estimate from the 100-cent equal-tempered grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scale_model::ScaleEstimate;

pub const SEMITONE_CENTS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEpsilon {
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperamentError {
    pub song_id: String,
    /// Mean pairwise deviation, in `[0, 50]` cents.
    pub epsilon_s: f64,
    pub n_pairs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_pair: Option<Vec<PairEpsilon>>,
}

/// Distance of the interval `|a − b|` from the nearest multiple of 100 cents.
pub fn pair_epsilon(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(SEMITONE_CENTS);
    d.min(SEMITONE_CENTS - d)
}

/// Mean of [`pair_epsilon`] over all unordered pairs of `means`.
pub fn mean_pair_epsilon(means: &[f64]) -> Result<(f64, Vec<PairEpsilon>)> {
    if means.len() < 2 {
        return Err(Error::InsufficientComponents(means.len()));
    }
    let pairs: Vec<PairEpsilon> = (0..means.len())
        .flat_map(|i| (i + 1..means.len()).map(move |j| (i, j)))
        .map(|(i, j)| PairEpsilon {
            i,
            j,
            epsilon: pair_epsilon(means[i], means[j]),
        })
        .collect();
    let mean = pairs.iter().map(|p| p.epsilon).sum::<f64>() / pairs.len() as f64;
    Ok((mean, pairs))
}

pub fn song_epsilon(estimate: &ScaleEstimate) -> Result<TemperamentError> {
    let (epsilon_s, pairs) = mean_pair_epsilon(&estimate.gmm.means_cents)?;
    Ok(TemperamentError {
        song_id: estimate.song_id.clone(),
        epsilon_s,
        n_pairs: pairs.len(),
        per_pair: Some(pairs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pair_cases() {
        assert_eq!(pair_epsilon(0.0, 700.0), 0.0);
        assert_eq!(pair_epsilon(0.0, 350.0), 50.0);
        assert_eq!(pair_epsilon(1234.0, 2470.0), 36.0);
    }

    #[test]
    fn song_cases() {
        assert_eq!(
            mean_pair_epsilon(&[0.0, 200.0, 400.0, 700.0, 900.0])
                .unwrap()
                .0,
            0.0
        );
        let (e, pairs) = mean_pair_epsilon(&[0.0, 50.0, 100.0]).unwrap();
        assert!((e - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(pairs.len(), 3);
        assert_eq!(mean_pair_epsilon(&[0.0, 25.0]).unwrap().0, 25.0);
        assert!(matches!(
            mean_pair_epsilon(&[1.0]),
            Err(Error::InsufficientComponents(1))
        ));
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in -1e4f64..1e4, b in -1e4f64..1e4) {
            let e = pair_epsilon(a, b);
            prop_assert!((0.0..=50.0).contains(&e));
            prop_assert_eq!(e, pair_epsilon(b, a));
        }

        #[test]
        fn semitone_translation(a in -1e4f64..1e4, b in -1e4f64..1e4, k in -50i32..50) {
            let shifted = pair_epsilon(a + 100.0 * k as f64, b);
            prop_assert!((shifted - pair_epsilon(a, b)).abs() < 1e-9);
        }

        #[test]
        fn grid_means_are_tempered(steps in prop::collection::vec(-60i32..60, 2..15), off in -500f64..500.0) {
            let means: Vec<f64> = steps.iter().map(|s| off + 100.0 * *s as f64).collect();
            prop_assert!(mean_pair_epsilon(&means).unwrap().0 < 1e-9);
        }

        #[test]
        fn common_shift_invariant(means in prop::collection::vec(0f64..1200.0, 2..15), k in -3000f64..3000.0) {
            let shifted: Vec<f64> = means.iter().map(|m| m + k).collect();
            let a = mean_pair_epsilon(&means).unwrap().0;
            let b = mean_pair_epsilon(&shifted).unwrap().0;
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
