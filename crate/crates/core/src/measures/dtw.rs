use crate::error::{Error, Result};
use crate::trajectory::StateVec;

/// Dynamic time warping distance with Euclidean local cost.
///
/// The alignment starts at `(a[0], b[0])`, ends at `(a[n-1], b[m-1])`, and
/// advances `a`, `b`, or both at every step. Returns the minimum total cost.
pub fn dtw_distance(a: &[StateVec], b: &[StateVec]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("dtw_distance"));
    }
    let dim = a[0].dim();
    if let Some(bad) = a.iter().chain(b).find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }

    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut curr = vec![f64::INFINITY; m];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            let cost = ai.euclidean(bj);
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => curr[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(curr[j - 1]).min(prev[j - 1]),
            };
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m - 1])
}
