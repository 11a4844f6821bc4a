//! Brute-force reference implementations for the test suite.
//!
//! These share no code with the modules they check: scoring loops, win
//! counting and the decision rule are all restated from scratch, so an
//! agreement test actually compares two derivations instead of one function
//! with itself.

use crate::ensemble::{BitMatrix, Decision, Outcome};
use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use std::collections::BTreeSet;

/// A reference decision plus the raw quantities it was derived from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub decision: Decision,
    /// Nearest-template scores (metric oracle) or win counts (tournament
    /// oracle), per unit.
    pub scores: Vec<i64>,
}

/// Direct nearest-template classification: score every sample by a fresh
/// double loop over input cells and sample cells, then pick the unique
/// strict minimum, or abstain when the minimum is shared.
///
/// Vote counts are derived straight from the scores: unit k gets one vote
/// for every sample it strictly beats.
pub fn metric_oracle(samples: &[ImageGrid], input: &ImageGrid) -> Result<OracleVerdict> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "no samples to compare against".into(),
        ));
    }
    let mut scores = Vec::with_capacity(samples.len());
    for sample in samples {
        if sample.dims() != input.dims() {
            return Err(Error::DimensionMismatch {
                expected: input.dims(),
                actual: sample.dims(),
            });
        }
        if sample.count_active() == 0 {
            return Err(Error::DegenerateSample);
        }
        let mut score: i64 = 0;
        for r in 0..input.rows() {
            for c in 0..input.cols() {
                if !input.get(c, r) {
                    continue;
                }
                let mut nearest = i64::MAX;
                for ar in 0..sample.rows() {
                    for ac in 0..sample.cols() {
                        if !sample.get(ac, ar) {
                            continue;
                        }
                        let dc = ac as i64 - c as i64;
                        let dr = ar as i64 - r as i64;
                        let d = dc * dc + dr * dr;
                        if d < nearest {
                            nearest = d;
                        }
                    }
                }
                score += nearest;
            }
        }
        scores.push(score);
    }

    let min = *scores.iter().min().unwrap();
    let winners: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == min)
        .map(|(k, _)| k)
        .collect();
    let votes: Vec<usize> = scores
        .iter()
        .map(|&s| scores.iter().filter(|&&o| s < o).count())
        .collect();
    let (outcome, fired_units) = if winners.len() == 1 {
        (Outcome::Class(winners[0]), BTreeSet::from([winners[0]]))
    } else {
        (Outcome::NoDecision, BTreeSet::new())
    };
    Ok(OracleVerdict {
        decision: Decision {
            outcome,
            votes,
            fired_units,
        },
        scores,
    })
}

/// Literal tournament reading of a complete win-bit matrix: count every
/// unit's wins, keep those with at least n-1, and classify by how many
/// survive.
pub fn tournament_oracle(b: &BitMatrix) -> Result<OracleVerdict> {
    let n = b.n();
    let mut wins = vec![0usize; n];
    for (k, win) in wins.iter_mut().enumerate() {
        for j in 0..n {
            if k == j {
                continue;
            }
            match b.get(k, j) {
                Some(true) => *win += 1,
                Some(false) => {}
                None => {
                    return Err(Error::Wiring(format!(
                        "bit matrix is missing entry ({k}, {j})"
                    )))
                }
            }
        }
    }
    let all_winners: Vec<usize> = (0..n).filter(|&k| wins[k] + 1 >= n).collect();
    let outcome = match all_winners.len() {
        0 => Outcome::NoDecision,
        1 => Outcome::Class(all_winners[0]),
        _ => Outcome::Ambiguous(all_winners.clone()),
    };
    Ok(OracleVerdict {
        decision: Decision {
            outcome,
            votes: wins.clone(),
            fired_units: all_winners.into_iter().collect(),
        },
        scores: wins.into_iter().map(|w| w as i64).collect(),
    })
}
