use super::{entropy_dispersion, std_dispersion, DispersionMetric, PartitionCountConfig};
use crate::error::{Error, Result};
use crate::trajectory::StateVec;

pub fn block_diversity(metric: &DispersionMetric, block: &[StateVec]) -> Result<f64> {
    match metric {
        DispersionMetric::Std => std_dispersion(block),
        DispersionMetric::Ent(grid) => entropy_dispersion(block, grid),
    }
}

/// Maximum, over all partitions of `trajectory` into contiguous blocks, of the
/// number of blocks at least `block_width` long whose diversity is below
/// `alpha`.
///
/// Any set of disjoint qualifying intervals extends to a partition by filling
/// the gaps, so the maximum equals the interval-scheduling optimum. The scan
/// takes the qualifying interval with the earliest right end, then repeats
/// after it; this is optimal for any diversity function, monotone or not.
pub fn phi_count(trajectory: &[StateVec], cfg: &PartitionCountConfig) -> Result<usize> {
    if trajectory.is_empty() {
        return Err(Error::Empty("phi_count"));
    }
    cfg.validate()?;
    let n = trajectory.len();
    let w = cfg.block_width;
    let mut count = 0;
    let mut free_from = 0;
    let mut end = free_from + w;
    while end <= n {
        let mut closed = false;
        // Shortest candidate first: short blocks are the likeliest to be
        // homogeneous, and any start works equally for the count.
        for start in (free_from..=end - w).rev() {
            if block_diversity(&cfg.metric, &trajectory[start..end])? < cfg.alpha {
                closed = true;
                break;
            }
        }
        if closed {
            count += 1;
            free_from = end;
            end = free_from + w;
        } else {
            end += 1;
        }
    }
    Ok(count)
}

/// True iff [`phi_count`] reaches `cfg.count_threshold`.
pub fn phi_decision(trajectory: &[StateVec], cfg: &PartitionCountConfig) -> Result<bool> {
    Ok(phi_count(trajectory, cfg)? >= cfg.count_threshold)
}
