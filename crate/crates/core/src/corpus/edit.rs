use serde::{Deserialize, Serialize};

use crate::tokenize::tokenize;

/// Token-level difference between two translation variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditDiff {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    /// `(token in a, token in b)`; `None` marks an insertion or deletion.
    pub changed_tokens: Vec<(Option<String>, Option<String>)>,
    /// Changed token positions over the longer token count.
    pub diff_ratio: f64,
}

impl EditDiff {
    pub fn edits(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

#[derive(Clone, Copy)]
enum Step {
    Keep,
    Substitute,
    Delete,
    Insert,
}

/// Aligns the token sequences of `a` and `b` with unit-cost edits.
///
/// Among all minimum-cost alignments the one with the fewest insertions plus deletions
/// is chosen. That fixes every count uniquely, so swapping `a` and `b` swaps insertions
/// with deletions and leaves substitutions unchanged.
pub fn validate_minimal_edit(a: &str, b: &str) -> EditDiff {
    let ta = tokenize(a);
    let tb = tokenize(b);
    let (n, m) = (ta.len(), tb.len());

    // cost[i][j] = (edits, indels) for ta[..i] vs tb[..j], compared lexicographically.
    let mut cost = vec![vec![(0usize, 0usize); m + 1]; n + 1];
    for i in 1..=n {
        cost[i][0] = (i, i);
    }
    for j in 1..=m {
        cost[0][j] = (j, j);
    }
    for i in 1..=n {
        for j in 1..=m {
            let (e, d) = cost[i - 1][j - 1];
            let diag = if ta[i - 1] == tb[j - 1] { (e, d) } else { (e + 1, d) };
            let up = (cost[i - 1][j].0 + 1, cost[i - 1][j].1 + 1);
            let left = (cost[i][j - 1].0 + 1, cost[i][j - 1].1 + 1);
            cost[i][j] = diag.min(up).min(left);
        }
    }

    let mut steps = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let (e, d) = cost[i - 1][j - 1];
            let same = ta[i - 1] == tb[j - 1];
            let diag = if same { (e, d) } else { (e + 1, d) };
            if diag == cost[i][j] {
                steps.push(if same { Step::Keep } else { Step::Substitute });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && (cost[i - 1][j].0 + 1, cost[i - 1][j].1 + 1) == cost[i][j] {
            steps.push(Step::Delete);
            i -= 1;
        } else {
            steps.push(Step::Insert);
            j -= 1;
        }
    }
    steps.reverse();

    let mut diff = EditDiff {
        substitutions: 0,
        insertions: 0,
        deletions: 0,
        changed_tokens: Vec::new(),
        diff_ratio: 0.0,
    };
    let (mut i, mut j) = (0, 0);
    for step in steps {
        match step {
            Step::Keep => {
                i += 1;
                j += 1;
            }
            Step::Substitute => {
                diff.substitutions += 1;
                diff.changed_tokens.push((Some(ta[i].to_string()), Some(tb[j].to_string())));
                i += 1;
                j += 1;
            }
            Step::Delete => {
                diff.deletions += 1;
                diff.changed_tokens.push((Some(ta[i].to_string()), None));
                i += 1;
            }
            Step::Insert => {
                diff.insertions += 1;
                diff.changed_tokens.push((None, Some(tb[j].to_string())));
                j += 1;
            }
        }
    }
    let longest = n.max(m);
    if longest > 0 {
        diff.diff_ratio = diff.edits() as f64 / longest as f64;
    }
    diff
}
