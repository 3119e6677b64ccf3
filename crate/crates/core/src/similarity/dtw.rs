use super::SimilarityError;

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Exact dynamic time warping with Euclidean step cost and match, insert and
/// delete moves. Returns the accumulated cost of the optimal warping path.
pub fn dtw_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64, SimilarityError> {
    if a.is_empty() || b.is_empty() {
        return Err(SimilarityError::EmptySeries);
    }
    let dim = a[0].len();
    if let Some(bad) = a.iter().chain(b).map(Vec::len).find(|&d| d != dim) {
        return Err(SimilarityError::DimensionMismatch {
            left: dim,
            right: bad,
        });
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for ai in a {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = euclidean(ai, &b[j - 1]) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn identical_series_have_zero_distance() {
        let a = vec![vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 0.5]];
        assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn two_point_example() {
        assert_eq!(
            dtw_distance(&series(&[0.0, 1.0]), &series(&[0.0, 2.0])).unwrap(),
            1.0
        );
    }

    #[test]
    fn repeated_samples_warp_for_free() {
        let a = series(&[0.0, 1.0, 2.0]);
        let b = series(&[0.0, 0.0, 1.0, 1.0, 2.0]);
        assert_eq!(dtw_distance(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_and_empty_are_errors() {
        let a = vec![vec![1.0, 2.0]];
        let b = vec![vec![1.0]];
        assert_eq!(
            dtw_distance(&a, &b),
            Err(SimilarityError::DimensionMismatch { left: 2, right: 1 })
        );
        assert_eq!(dtw_distance(&a, &[]), Err(SimilarityError::EmptySeries));
    }
}
