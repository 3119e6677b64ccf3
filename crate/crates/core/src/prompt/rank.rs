use serde::{Deserialize, Serialize};

use super::PromptError;

/// How a metric maps to prompting priority.
///
/// `Ascending`: a larger metric value gives a larger rank score.
/// `Descending`: a larger metric value gives a smaller rank score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ascending,
    Descending,
}

/// Directions for coverage, familiarity, similarity, pair disagreement,
/// cluster disagreement and label skewness, in that order.
pub const METRIC_DIRECTIONS: [Direction; 6] = [
    Direction::Descending,
    Direction::Descending,
    Direction::Ascending,
    Direction::Ascending,
    Direction::Ascending,
    Direction::Descending,
];

/// Rank-based scores in [0, 1]; tied values share their average rank.
pub fn rank_scores(values: &[f64], direction: Direction) -> Result<Vec<f64>, PromptError> {
    let n = values.len();
    if n == 0 {
        return Err(PromptError::EmptyInput);
    }
    if n == 1 {
        return Ok(vec![0.5]);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end share their mean
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    Ok(ranks
        .into_iter()
        .map(|r| {
            let s = (r - 1.0) / (n - 1) as f64;
            match direction {
                Direction::Ascending => s,
                Direction::Descending => 1.0 - s,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascending_and_descending_examples() {
        assert_eq!(
            rank_scores(&[3.0, 1.0, 2.0], Direction::Ascending).unwrap(),
            vec![1.0, 0.0, 0.5]
        );
        assert_eq!(
            rank_scores(&[3.0, 1.0, 2.0], Direction::Descending).unwrap(),
            vec![0.0, 1.0, 0.5]
        );
    }

    #[test]
    fn ties_share_average_rank() {
        assert_eq!(
            rank_scores(&[7.0; 4], Direction::Ascending).unwrap(),
            vec![0.5; 4]
        );
        assert_eq!(
            rank_scores(&[1.0, 2.0, 2.0, 3.0], Direction::Ascending).unwrap(),
            vec![0.0, 0.5, 0.5, 1.0]
        );
        assert_eq!(
            rank_scores(&[4.0], Direction::Descending).unwrap(),
            vec![0.5]
        );
    }

    #[test]
    fn empty_input_is_rejected() {
        assert_eq!(
            rank_scores(&[], Direction::Ascending),
            Err(PromptError::EmptyInput)
        );
    }
}
