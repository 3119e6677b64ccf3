use super::Score;

pub const CONSISTENT_MESSAGE: &str = "According to our record so far, you have been rather careful and thorough in the past labeling sessions! Good job! Take a break if needed and keep on the good work.";

pub const INCONSISTENT_MESSAGE: &str =
    "Feeling tired? Take a break if necessary and please stay attentive in the following sessions.";

/// Compares a re-check answer, given on possibly swapped sides, with the
/// original canonical score.
pub fn consistency_feedback(
    original: Score,
    recheck: Score,
    side_swap: bool,
) -> (bool, &'static str) {
    if recheck.unswap(side_swap) == original {
        (true, CONSISTENT_MESSAGE)
    } else {
        (false, INCONSISTENT_MESSAGE)
    }
}
