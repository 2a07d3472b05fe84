//! Period detection on finite traces.
//!
//! A border of a string is a proper prefix that is also a suffix; the
//! smallest period equals the length minus the longest border. Running the
//! prefix function on the reversed sequence gives the smallest period of
//! every suffix in one pass, which is what the preperiod search needs.

use serde::Serialize;

use super::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    /// At least three full periods observed after the preperiod.
    Exact,
    Insufficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PeriodReport {
    pub minimal_period: Option<usize>,
    pub preperiod: usize,
    pub confidence: Confidence,
}

pub fn minimal_period(tr: &Trace) -> PeriodReport {
    period_of(&tr.values)
}

/// Smallest preperiod whose tail shows at least three repetitions of its own
/// smallest period. Without such a tail the whole-sequence period (if any)
/// is reported as `Insufficient`.
pub fn period_of<T: Eq>(values: &[T]) -> PeriodReport {
    let n = values.len();
    if n == 0 {
        return PeriodReport {
            minimal_period: None,
            preperiod: 0,
            confidence: Confidence::Insufficient,
        };
    }
    let border = reversed_prefix_function(values);
    // suffix values[k..] is the reversed prefix of length n - k
    let period_of_suffix = |k: usize| {
        let len = n - k;
        len - border[len - 1]
    };
    for k in 0..n {
        let p = period_of_suffix(k);
        if n - k >= 3 * p {
            return PeriodReport {
                minimal_period: Some(p),
                preperiod: k,
                confidence: Confidence::Exact,
            };
        }
    }
    let p = period_of_suffix(0);
    PeriodReport {
        minimal_period: (p < n).then_some(p),
        preperiod: 0,
        confidence: Confidence::Insufficient,
    }
}

fn reversed_prefix_function<T: Eq>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    let at = |i: usize| &values[n - 1 - i];
    let mut pi = vec![0usize; n];
    for i in 1..n {
        let mut k = pi[i - 1];
        while k > 0 && at(i) != at(k) {
            k = pi[k - 1];
        }
        if at(i) == at(k) {
            k += 1;
        }
        pi[i] = k;
    }
    pi
}
