use std::collections::BTreeMap;

use super::EntropyGrid;
use crate::error::{Error, Result};
use crate::trajectory::StateVec;

fn check_uniform_dim(states: &[StateVec]) -> Result<usize> {
    let dim = states[0].dim();
    if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    Ok(dim)
}

/// Mean over dimensions of the population standard deviation of each
/// coordinate. Deviations are taken from the first state before averaging, so
/// a constant sequence yields exactly zero.
pub fn std_dispersion(states: &[StateVec]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Empty("std_dispersion"));
    }
    let dim = check_uniform_dim(states)?;
    let n = states.len() as f64;
    let mut total = 0.0;
    for d in 0..dim {
        let origin = states[0].values()[d];
        let mean = states.iter().map(|s| s.values()[d] - origin).sum::<f64>() / n;
        let var = states
            .iter()
            .map(|s| {
                let dev = (s.values()[d] - origin) - mean;
                dev * dev
            })
            .sum::<f64>()
            / n;
        total += var.sqrt();
    }
    Ok(total / dim as f64)
}

fn cell_of(state: &StateVec, grid: &EntropyGrid) -> u64 {
    let bins = grid.bins_per_dim;
    let mut id = 0u64;
    for (d, &x) in state.values().iter().enumerate() {
        let [lo, hi] = grid.bounds[d];
        let frac = (x - lo) / (hi - lo);
        let idx = (frac * bins as f64).floor().clamp(0.0, (bins - 1) as f64) as u64;
        id = id * bins as u64 + idx;
    }
    id
}

/// Shannon entropy (nats) of the empirical occupancy of an equal-width grid.
pub fn entropy_dispersion(states: &[StateVec], grid: &EntropyGrid) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::Empty("entropy_dispersion"));
    }
    let dim = check_uniform_dim(states)?;
    grid.validate()?;
    if grid.bounds.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: grid.bounds.len(),
            got: dim,
        });
    }
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for s in states {
        *counts.entry(cell_of(s, grid)).or_default() += 1;
    }
    let n = states.len() as f64;
    let h = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>();
    // A single occupied cell gives -1*ln(1) = -0.0.
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[[f64; 2]]) -> Vec<StateVec> {
        v.iter().map(|&p| StateVec::from(p)).collect()
    }

    #[test]
    fn constant_sequence_has_zero_std() {
        let s = pts(&[[0.3, 0.7]; 5]);
        assert_eq!(std_dispersion(&s).unwrap(), 0.0);
    }

    #[test]
    fn two_point_std() {
        let s = pts(&[[0.0, 0.0], [1.0, 1.0]]);
        assert_eq!(std_dispersion(&s).unwrap(), 0.5);
    }

    #[test]
    fn uniform_samples_std_near_inverse_sqrt12() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s: Vec<StateVec> = (0..600)
            .map(|_| StateVec::from([rng.random::<f64>(), rng.random::<f64>()]))
            .collect();
        let v = std_dispersion(&s).unwrap();
        assert!((v - 1.0 / 12f64.sqrt()).abs() < 0.02, "{v}");
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(std_dispersion(&[]).is_err());
        assert!(entropy_dispersion(&[], &EntropyGrid::default()).is_err());
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let s = vec![
            StateVec::from([0.0, 0.0]),
            StateVec::new(vec![1.0]).unwrap(),
        ];
        assert!(std_dispersion(&s).is_err());
    }

    #[test]
    fn single_cell_entropy_is_zero() {
        let s = pts(&[[0.51, 0.52], [0.52, 0.51], [0.515, 0.515]]);
        assert_eq!(entropy_dispersion(&s, &EntropyGrid::unit_square(16)).unwrap(), 0.0);
    }

    #[test]
    fn four_equal_cells_give_ln4() {
        let s = pts(&[[0.1, 0.1], [0.9, 0.1], [0.1, 0.9], [0.9, 0.9]]);
        let h = entropy_dispersion(&s, &EntropyGrid::unit_square(2)).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn three_one_split_matches_histogram() {
        // -(3/4 ln 3/4 + 1/4 ln 1/4)
        let oracle = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let s = pts(&[[0.1, 0.1], [0.1, 0.2], [0.2, 0.1], [0.9, 0.9]]);
        let h = entropy_dispersion(&s, &EntropyGrid::unit_square(2)).unwrap();
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 0.5623).abs() < 1e-4);
    }

    #[test]
    fn out_of_bounds_states_clamp_to_edge_cells() {
        let grid = EntropyGrid::unit_square(4);
        let s = pts(&[[-0.5, 0.1], [0.01, 0.1]]);
        assert_eq!(entropy_dispersion(&s, &grid).unwrap(), 0.0);
        let s = pts(&[[1.7, 0.9], [0.99, 0.99]]);
        assert_eq!(entropy_dispersion(&s, &grid).unwrap(), 0.0);
    }

    proptest! {
        #[test]
        fn dispersion_is_permutation_invariant(
            raw in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..50),
            seed in any::<u64>(),
        ) {
            let s: Vec<StateVec> = raw.iter().map(|&(x, y)| StateVec::from([x, y])).collect();
            let mut shuffled = s.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut rng);
            let grid = EntropyGrid::unit_square(8);
            prop_assert_eq!(
                entropy_dispersion(&s, &grid).unwrap(),
                entropy_dispersion(&shuffled, &grid).unwrap()
            );
            let a = std_dispersion(&s).unwrap();
            let b = std_dispersion(&shuffled).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!(a >= 0.0);
        }
    }
}
