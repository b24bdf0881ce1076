use serde::{Deserialize, Serialize};

/// Feedback batches of a session.
///
/// `sets[i - 1]` holds the (1-based) segments whose realizations became
/// known between the decisions for segments `i - 1` and `i`, for
/// `i = 1..=I+1`; the decision for the virtual segment `I + 1` happens at
/// `+inf`. `revealed_at[j - 1]` is the `i` whose batch holds segment `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSets {
    pub sets: Vec<Vec<usize>>,
    pub revealed_at: Vec<usize>,
}

impl AuxSets {
    /// Batch revealed at the decision for segment `i` (1-based, up to `I + 1`).
    pub fn batch(&self, i: usize) -> &[usize] {
        &self.sets[i - 1]
    }

    pub fn segments(&self) -> usize {
        self.revealed_at.len()
    }
}

/// Partitions segments into feedback batches.
///
/// Segment `j` belongs to batch `i` when its reveal time (end of playback,
/// or end of download under reveal-at-download) falls in
/// `(decision_times[i-2], decision_times[i-1]]`, with the decision for
/// segment `I + 1` at `+inf`.
pub fn auxiliary_sets(decision_times: &[f64], reveal_times: &[f64]) -> AuxSets {
    let n = decision_times.len();
    let mut sets = vec![Vec::new(); n + 1];
    let mut revealed_at = vec![0; reveal_times.len()];
    for (j, &t) in reveal_times.iter().enumerate() {
        // first decision index whose time is >= t
        let i = decision_times.partition_point(|&d| d < t);
        sets[i].push(j + 1);
        revealed_at[j] = i + 1;
    }
    AuxSets { sets, revealed_at }
}
