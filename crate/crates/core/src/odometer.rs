//! The three-state odometer on ℕ and the candidate variant built from `h`.
//!
//! Cell 0 runs the three-cycle `g`; every other cell runs `f`, which keeps
//! its state while the left neighbor is 0 and otherwise swaps `0 ↔ left`.
//! From the all-0 configuration the trace at cell `x` has period `3^(x+1)`,
//! and each period splits into a leading 0, a block over `{0,1}` and a block
//! over `{0,2}` of equal length, each holding `3^x` nonzero symbols.

use std::collections::HashSet;

use serde::Serialize;

use crate::engine::{evolve_exact, period_of, trace, EngineError, PeriodReport};
use crate::lattice::{Cell, State, Window, WindowConfiguration};
use crate::rules::{
    candidate_h, cycle_g, odometer_f, shift_right, DistributionKind, DistributionSpec, Domain,
    Exception, RuleDistribution, RuleSet,
};

/// `g f f f …` on ℕ.
pub fn build_three_state_odometer() -> RuleDistribution {
    with_origin_rule(vec![cycle_g(), odometer_f()], "f", "g")
}

fn with_origin_rule(
    rules: Vec<crate::rules::LocalRule>,
    default: &str,
    origin: &str,
) -> RuleDistribution {
    RuleDistribution::new(
        DistributionSpec {
            d: 1,
            domain: Domain::Halfline,
            kind: DistributionKind::FiniteExceptions {
                default: default.into(),
                exceptions: vec![Exception {
                    cell: Cell::line(0),
                    rule: origin.into(),
                }],
            },
        },
        RuleSet::new(3, rules).expect("distinct names"),
    )
    .expect("odometer distribution is closed on ℕ")
}

/// The odometer extended to ℤ with right-shift cells on the negative half.
pub fn extend_to_z() -> RuleDistribution {
    RuleDistribution::new(
        DistributionSpec {
            d: 1,
            domain: Domain::Full,
            kind: DistributionKind::Rays1d {
                left: "shift_right".into(),
                start: 0,
                explicit: vec!["g".into()],
                right: "f".into(),
            },
        },
        RuleSet::new(3, vec![shift_right(3), cycle_g(), odometer_f()]).expect("distinct names"),
    )
    .expect("valid on ℤ")
}

/// `3^k`.
pub fn pow3(k: u32) -> usize {
    3usize.pow(k)
}

fn all_zero() -> WindowConfiguration {
    WindowConfiguration::uniform(1, 0, 3).expect("valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TracePeriodCheck {
    pub x: usize,
    pub expected: usize,
    pub measured: PeriodReport,
    pub pass: bool,
    /// First `t` with `T_x(t) ≠ T_x(t + expected)`.
    pub first_divergence: Option<usize>,
}

/// Minimal periods of the all-0 traces at cells `0..=x_max`, each observed
/// over three full periods of the largest expected period.
pub fn verify_trace_period(x_max: usize) -> Result<Vec<TracePeriodCheck>, EngineError> {
    let theta = build_three_state_odometer();
    let steps = 3 * pow3(x_max as u32 + 1) - 1;
    let ev = evolve_exact(
        &theta,
        &all_zero(),
        &Window::interval(0, x_max as i64)?,
        steps,
    )?;
    Ok((0..=x_max)
        .map(|x| {
            let values = ev.column(x);
            let expected = pow3(x as u32 + 1);
            let measured = period_of(&values);
            let first_divergence =
                (0..values.len() - expected).find(|&t| values[t] != values[t + expected]);
            TracePeriodCheck {
                x,
                expected,
                measured,
                pass: measured.minimal_period == Some(expected)
                    && measured.preperiod == 0
                    && measured.confidence == crate::engine::Confidence::Exact,
                first_divergence,
            }
        })
        .collect())
}

/// One period of `T_x` split into its leading zero and two blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub x: usize,
    pub p: usize,
    pub n: usize,
    pub period_index: usize,
    pub leading_zero_time: usize,
    pub leading_symbol: State,
    pub a_block: (usize, usize),
    pub b_block: (usize, usize),
    pub ones_in_a: usize,
    pub twos_in_a: usize,
    pub ones_in_b: usize,
    pub twos_in_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub x: usize,
    pub blocks: Vec<BlockDecomposition>,
    pub violations: Vec<String>,
}

impl BlockReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Decompose `periods` consecutive periods of the all-0 trace at `x` and
/// check the block counts.
pub fn verify_block_structure(x: usize, periods: usize) -> Result<BlockReport, EngineError> {
    assert!(periods >= 1);
    let p = pow3(x as u32 + 1);
    let n = (p - 1) / 2;
    let tr = trace(
        &build_three_state_odometer(),
        &all_zero(),
        &Cell::line(x as i64),
        periods * p,
    )?;
    let count =
        |lo: usize, hi: usize, sym: State| tr.values[lo..=hi].iter().filter(|&&s| s == sym).count();
    let expected = pow3(x as u32);
    let mut blocks = Vec::with_capacity(periods);
    let mut violations = Vec::new();
    for i in 0..periods {
        let start = p * i;
        let a = (start + 1, start + n);
        let b = (start + n + 1, start + 2 * n);
        let block = BlockDecomposition {
            x,
            p,
            n,
            period_index: i,
            leading_zero_time: start,
            leading_symbol: tr.values[start],
            a_block: a,
            b_block: b,
            ones_in_a: count(a.0, a.1, 1),
            twos_in_a: count(a.0, a.1, 2),
            ones_in_b: count(b.0, b.1, 1),
            twos_in_b: count(b.0, b.1, 2),
        };
        let mut fail = |what: String| violations.push(format!("x={x} period {i}: {what}"));
        if block.leading_symbol != 0 {
            fail(format!("T({start}) = {}", block.leading_symbol));
        }
        if block.ones_in_a != expected || block.twos_in_b != expected {
            fail(format!(
                "#1(A) = {}, #2(B) = {}, expected {expected}",
                block.ones_in_a, block.twos_in_b
            ));
        }
        if block.ones_in_a.is_multiple_of(2) || block.twos_in_b.is_multiple_of(2) {
            fail("nonzero block count is even".into());
        }
        if block.twos_in_a != 0 || block.ones_in_b != 0 {
            fail(format!(
                "#2(A) = {}, #1(B) = {}",
                block.twos_in_a, block.ones_in_b
            ));
        }
        blocks.push(block);
    }
    Ok(BlockReport {
        x,
        blocks,
        violations,
    })
}

/// Words on cells `0..n` at times `0..len`, encoded base 3 with cell 0 as
/// the most significant digit.
pub fn window_sequence(
    n: usize,
    init: &WindowConfiguration,
    len: usize,
) -> Result<Vec<u32>, EngineError> {
    assert!(len >= 1);
    let ev = evolve_exact(
        &build_three_state_odometer(),
        init,
        &Window::interval(0, n as i64 - 1)?,
        len - 1,
    )?;
    Ok((0..len)
        .map(|t| ev.frame(t).iter().fold(0u32, |acc, &s| acc * 3 + s as u32))
        .collect())
}

fn word_string(code: u32, n: usize) -> String {
    let mut digits = vec![b'0'; n];
    let mut c = code;
    for d in digits.iter_mut().rev() {
        *d = b'0' + (c % 3) as u8;
        c /= 3;
    }
    String::from_utf8(digits).expect("ascii digits")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurjectivityReport {
    pub n: usize,
    pub expected_words: usize,
    pub distinct_words: usize,
    /// Up to 16 words never visited within `3^n` steps.
    pub missing: Vec<String>,
    pub period: PeriodReport,
    pub pass: bool,
}

/// Whether the first `n` cells visit all `3^n` words within `3^n` steps and
/// then repeat with period exactly `3^n`.
pub fn verify_window_surjectivity(
    n: usize,
    init: &WindowConfiguration,
) -> Result<SurjectivityReport, EngineError> {
    assert!((1..=16).contains(&n));
    let words = pow3(n as u32);
    let seq = window_sequence(n, init, 3 * words)?;
    let seen: HashSet<u32> = seq[..words].iter().copied().collect();
    let missing: Vec<String> = (0..words as u32)
        .filter(|w| !seen.contains(w))
        .take(16)
        .map(|w| word_string(w, n))
        .collect();
    let period = period_of(&seq);
    let pass = seen.len() == words && period.minimal_period == Some(words) && period.preperiod == 0;
    Ok(SurjectivityReport {
        n,
        expected_words: words,
        distinct_words: seen.len(),
        missing,
        period,
        pass,
    })
}

/// One step of cell `x + 1` given the state of cell `x`: a nonzero left
/// state `a` exchanges 0 and `a`; anything else is left alone.
///
/// Written independently of the rule tables so the lemma oracles can also
/// serve as a cross-check of them.
pub fn transducer(left: State, own: State) -> State {
    if left != 0 && (own == 0 || own == left) {
        left - own
    } else {
        own
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub lemma: &'static str,
    pub l_max: usize,
    pub cases: u64,
    pub pass: bool,
    pub counterexample: Option<String>,
}

fn segment(mask: u32, len: usize, a: State) -> impl Iterator<Item = State> {
    (0..len).map(move |t| if mask >> t & 1 == 1 { a } else { 0 })
}

/// Two copies of the same `{0,a}` segment driving cell `x + 1` from
/// complementary starts stay complementary through the step after the
/// segment ends. Exhaustive over all segments of length `1..=l_max`.
pub fn lemma1_oracle(l_max: usize) -> LemmaReport {
    assert!(l_max < 32);
    let mut cases = 0;
    for a in [1, 2] {
        for len in 1..=l_max {
            for mask in 0..(1u32 << len) {
                for (mut s, mut s2) in [(0, a), (a, 0)] {
                    cases += 1;
                    for (t, left) in segment(mask, len, a).enumerate() {
                        s = transducer(left, s);
                        s2 = transducer(left, s2);
                        if !((s == 0 && s2 == a) || (s == a && s2 == 0)) {
                            return LemmaReport {
                                lemma: "lemma1",
                                l_max,
                                cases,
                                pass: false,
                                counterexample: Some(format!(
                                    "a={a} segment={:?} diverged after step {t}",
                                    segment(mask, len, a).collect::<Vec<_>>()
                                )),
                            };
                        }
                    }
                }
            }
        }
    }
    LemmaReport {
        lemma: "lemma1",
        l_max,
        cases,
        pass: true,
        counterexample: None,
    }
}

/// Starting from 0, a `{0,a}` segment with an odd number of `a` leaves cell
/// `x + 1` in `a`; an even number leaves it in 0.
pub fn lemma2_oracle(l_max: usize) -> LemmaReport {
    assert!(l_max < 32);
    let mut cases = 0;
    for a in [1, 2] {
        for len in 1..=l_max {
            for mask in 0..(1u32 << len) {
                cases += 1;
                let end = segment(mask, len, a).fold(0, |s, left| transducer(left, s));
                let expected = if mask.count_ones() % 2 == 1 { a } else { 0 };
                if end != expected {
                    return LemmaReport {
                        lemma: "lemma2",
                        l_max,
                        cases,
                        pass: false,
                        counterexample: Some(format!(
                            "a={a} segment={:?} ended in {end}, expected {expected}",
                            segment(mask, len, a).collect::<Vec<_>>()
                        )),
                    };
                }
            }
        }
    }
    LemmaReport {
        lemma: "lemma2",
        l_max,
        cases,
        pass: true,
        counterexample: None,
    }
}

/// The candidate odometer in its two presentations.
#[derive(Debug, Clone)]
pub struct CandidateOdometer {
    /// `g h h h …` on ℕ.
    pub origin_g: RuleDistribution,
    /// Uniform `h` with the missing left neighbor of cell 0 held at 0.
    pub fixed_boundary: RuleDistribution,
}

pub fn build_candidate_odometer() -> CandidateOdometer {
    let h = candidate_h();
    let boundary = h
        .pinned("h_boundary", &Cell::line(-1), 0)
        .expect("h reads its left neighbor");
    CandidateOdometer {
        origin_g: with_origin_rule(vec![cycle_g(), h.clone()], "h", "g"),
        fixed_boundary: with_origin_rule(vec![h, boundary], "h", "h_boundary"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivergenceReport {
    pub cells: usize,
    pub steps: usize,
    pub pass: bool,
    /// First `(cell, time)` where the two evolutions differ.
    pub first_divergence: Option<(usize, usize)>,
}

/// Compare the two candidate presentations on cells `0..cells`.
pub fn verify_candidate_equivalence(
    cells: usize,
    steps: usize,
    init: &WindowConfiguration,
) -> Result<DivergenceReport, EngineError> {
    let cand = build_candidate_odometer();
    let targets = Window::interval(0, cells as i64 - 1)?;
    let a = evolve_exact(&cand.origin_g, init, &targets, steps)?;
    let b = evolve_exact(&cand.fixed_boundary, init, &targets, steps)?;
    let first_divergence = a
        .frames()
        .iter()
        .zip(b.frames())
        .position(|(u, v)| u != v)
        .map(|i| (i % cells, i / cells));
    Ok(DivergenceReport {
        cells,
        steps,
        pass: first_divergence.is_none(),
        first_divergence,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidatePeriod {
    pub x: usize,
    pub measured: PeriodReport,
}

/// Measured periods of the candidate's all-0 traces. These are observations
/// only; no expected value exists to compare them with.
pub fn candidate_period_report(
    x_max: usize,
    steps: usize,
) -> Result<Vec<CandidatePeriod>, EngineError> {
    let cand = build_candidate_odometer();
    let ev = evolve_exact(
        &cand.origin_g,
        &all_zero(),
        &Window::interval(0, x_max as i64)?,
        steps,
    )?;
    Ok((0..=x_max)
        .map(|x| CandidatePeriod {
            x,
            measured: period_of(&ev.column(x)),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Confidence;

    #[test]
    fn odometer_rules() {
        let theta = build_three_state_odometer();
        assert_eq!(theta.rule_at(&Cell::line(0)).unwrap().name(), "g");
        assert_eq!(theta.rule_at(&Cell::line(7)).unwrap().name(), "f");
        assert_eq!(
            theta.rule_at(&Cell::line(0)).unwrap().apply(&[1]).unwrap(),
            2
        );
        let f = theta.rule_at(&Cell::line(3)).unwrap();
        assert_eq!(f.apply(&[2, 0]).unwrap(), 2);
        assert_eq!(f.apply(&[1, 2]).unwrap(), 2);
        assert!(theta.closure_violations().is_empty());
    }

    #[test]
    fn z_extension() {
        let z = extend_to_z();
        assert_eq!(z.rule_at(&Cell::line(-1)).unwrap().name(), "shift_right");
        assert_eq!(z.rule_at(&Cell::line(-40)).unwrap().name(), "shift_right");
        assert_eq!(z.rule_at(&Cell::line(0)).unwrap().name(), "g");
        assert_eq!(z.rule_at(&Cell::line(4)).unwrap().name(), "f");
        let n = build_three_state_odometer();
        for x in 0..20 {
            assert!(z
                .rule_at(&Cell::line(x))
                .unwrap()
                .same_function(n.rule_at(&Cell::line(x)).unwrap()));
        }
    }

    #[test]
    fn z_extension_agrees_on_nonnegative_cells() {
        let targets = Window::interval(0, 6).unwrap();
        let z = evolve_exact(&extend_to_z(), &all_zero(), &targets, 200).unwrap();
        let n = evolve_exact(&build_three_state_odometer(), &all_zero(), &targets, 200).unwrap();
        assert_eq!(z.frames(), n.frames());
        assert!(z.cone().required.iter().all(|c| c.x() >= 0));
    }

    #[test]
    fn small_periods() {
        let checks = verify_trace_period(4).unwrap();
        let got: Vec<_> = checks.iter().map(|c| c.measured.minimal_period).collect();
        assert_eq!(got, vec![Some(3), Some(9), Some(27), Some(81), Some(243)]);
        assert!(checks
            .iter()
            .all(|c| c.pass && c.first_divergence.is_none()));
        assert!(checks
            .iter()
            .all(|c| c.measured.confidence == Confidence::Exact));
    }

    #[test]
    fn block_counts() {
        let r0 = verify_block_structure(0, 3).unwrap();
        assert!(r0.pass(), "{:?}", r0.violations);
        assert_eq!(
            (r0.blocks[0].a_block, r0.blocks[0].b_block),
            ((1, 1), (2, 2))
        );
        assert_eq!((r0.blocks[0].ones_in_a, r0.blocks[0].twos_in_b), (1, 1));

        let r1 = verify_block_structure(1, 2).unwrap();
        assert!(r1.pass());
        assert_eq!(r1.blocks[0].a_block, (1, 4));
        assert_eq!((r1.blocks[0].ones_in_a, r1.blocks[0].twos_in_a), (3, 0));

        let r2 = verify_block_structure(2, 2).unwrap();
        assert!(r2.pass());
        assert_eq!(r2.blocks[1].ones_in_a, 9);
    }

    #[test]
    fn surjectivity_small() {
        let r2 = verify_window_surjectivity(2, &all_zero()).unwrap();
        assert!(r2.pass && r2.missing.is_empty());
        assert_eq!(r2.distinct_words, 9);
        for seed in 0..5 {
            let init = WindowConfiguration::seeded(1, seed, 3).unwrap();
            let r = verify_window_surjectivity(1, &init).unwrap();
            assert!(r.pass);
            let r = verify_window_surjectivity(5, &init).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.distinct_words, 243);
        }
    }

    #[test]
    fn random_starts_are_rotations_of_the_zero_orbit() {
        let n = 4;
        let words = pow3(n as u32);
        let zero = window_sequence(n, &all_zero(), words).unwrap();
        for seed in 0..10 {
            let init = WindowConfiguration::seeded(1, seed, 3).unwrap();
            let seq = window_sequence(n, &init, words).unwrap();
            let shift = zero.iter().position(|&w| w == seq[0]).unwrap();
            for t in 0..words {
                assert_eq!(seq[t], zero[(t + shift) % words], "seed {seed} t {t}");
            }
        }
    }

    #[test]
    fn transducer_agrees_with_rule_table() {
        let f = odometer_f();
        for left in 0..3 {
            for own in 0..3 {
                assert_eq!(transducer(left, own), f.apply(&[left, own]).unwrap());
            }
        }
    }

    #[test]
    fn lemma_examples() {
        // single a swaps complementary starts
        assert_eq!((transducer(1, 0), transducer(1, 1)), (1, 0));
        assert_eq!((transducer(0, 0), transducer(0, 2)), (0, 2));
        assert_eq!(transducer(2, 0), 2);
        assert_eq!(transducer(2, transducer(2, 0)), 0);
        assert!(lemma1_oracle(6).pass);
        let r = lemma2_oracle(6);
        assert!(r.pass);
        assert_eq!(r.cases, 2 * (2 + 4 + 8 + 16 + 32 + 64));
    }

    #[test]
    fn lemma_conclusions_hold_on_real_traces() {
        // Lemma-2 style parity check against the engine: whenever T_x is a
        // {0,a} block from time i to j, T_{x+1}(j+1) follows the parity rule.
        let ev = evolve_exact(
            &build_three_state_odometer(),
            &all_zero(),
            &Window::interval(0, 4).unwrap(),
            400,
        )
        .unwrap();
        for x in 0..4 {
            let lower = ev.column(x);
            let upper = ev.column(x + 1);
            for i in 0..100 {
                for j in i..(i + 30).min(lower.len() - 1) {
                    let seg = &lower[i..=j];
                    for a in [1, 2] {
                        if seg.iter().all(|&s| s == 0 || s == a) && upper[i] == 0 {
                            let odd = seg.iter().filter(|&&s| s == a).count() % 2 == 1;
                            assert_eq!(upper[j + 1], if odd { a } else { 0 });
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn candidate_presentations() {
        let cand = build_candidate_odometer();
        let h = cand.fixed_boundary.rule_at(&Cell::line(3)).unwrap();
        assert_eq!(h.apply(&[0, 2]).unwrap(), 0);
        let b0 = cand.fixed_boundary.rule_at(&Cell::line(0)).unwrap();
        assert!(b0.same_function(&cycle_g()));
        for s in 0..3 {
            assert_eq!(b0.apply(&[s]).unwrap(), (s + 1) % 3);
        }
        for seed in 0..3 {
            let init = WindowConfiguration::seeded(1, seed, 3).unwrap();
            assert!(verify_candidate_equivalence(6, 300, &init).unwrap().pass);
        }
    }

    #[test]
    fn candidate_cell_zero_cycles() {
        let rep = candidate_period_report(1, 80).unwrap();
        assert_eq!(rep[0].measured.minimal_period, Some(3));
    }
}
