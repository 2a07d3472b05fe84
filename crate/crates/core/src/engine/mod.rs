//! Exact evolution of rule distributions on finite windows.
//!
//! Every result is backed by a [`ConeReport`]: the set of time-0 cells whose
//! states determine the targets over the requested horizon. Evolution only
//! ever reads cells inside that cone, so the output does not depend on
//! anything a finite window cannot represent.
//!
//! Cells of the cone are stored in breadth-first order of their backward
//! distance from the targets. A cell at distance `d` is needed up to time
//! `t − d`, so the set updated at each step is a prefix of that order and
//! shrinks by one distance shell per step.

mod export;
mod period;

pub use export::{pgm, trace_csv};
pub use period::{minimal_period, period_of, Confidence, PeriodReport};

use std::collections::hash_map::Entry;
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{Cell, FillPolicy, LatticeError, Pattern, State, Window, WindowConfiguration};
use crate::rules::{LocalRule, RuleDistribution, RuleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("dependency cone escapes the known region; uncovered cells: {}", list_cells(.uncovered))]
    ConeEscape { uncovered: Vec<Cell> },
    #[error("initial configuration does not match the distribution: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn list_cells(cells: &[Cell]) -> String {
    const SHOWN: usize = 12;
    let mut s = cells
        .iter()
        .take(SHOWN)
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ");
    if cells.len() > SHOWN {
        s.push_str(&format!(" ... ({} total)", cells.len()));
    }
    s
}

/// Backward dependency set of `targets` over `steps` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeReport {
    pub targets: Window,
    pub steps: usize,
    pub required: Window,
}

/// Breadth-first backward expansion: cells in order of distance from the
/// seeds, each paired with its distance. Seeds keep their given order.
struct Ball {
    cells: Vec<Cell>,
    dist: Vec<usize>,
    index: FxHashMap<Cell, usize>,
}

fn backward_ball<'a>(
    seeds: &[Cell],
    radius: usize,
    mut offsets_at: impl FnMut(&Cell) -> Result<&'a [Cell], EngineError>,
) -> Result<Ball, EngineError> {
    let mut ball = Ball {
        cells: Vec::new(),
        dist: Vec::new(),
        index: FxHashMap::default(),
    };
    for c in seeds {
        if !ball.index.contains_key(c) {
            ball.index.insert(c.clone(), ball.cells.len());
            ball.cells.push(c.clone());
            ball.dist.push(0);
        }
    }
    let mut head = 0;
    while head < ball.cells.len() {
        let d = ball.dist[head];
        if d >= radius {
            break;
        }
        let cell = ball.cells[head].clone();
        for off in offsets_at(&cell)? {
            let n = cell.checked_add(off)?;
            if let Entry::Vacant(slot) = ball.index.entry(n) {
                ball.cells.push(slot.key().clone());
                ball.dist.push(d + 1);
                slot.insert(ball.cells.len() - 1);
            }
        }
        head += 1;
    }
    Ok(ball)
}

fn check_targets(theta: &RuleDistribution, targets: &Window) -> Result<(), EngineError> {
    if targets.dim() != theta.dim() {
        return Err(EngineError::Mismatch(format!(
            "targets have dimension {}, distribution has {}",
            targets.dim(),
            theta.dim()
        )));
    }
    if let Some(out) = targets.iter().find(|c| !theta.in_domain(c)) {
        return Err(RuleError::OutsideDomain(out).into());
    }
    Ok(())
}

/// The cells whose time-0 states determine `targets` at all times `0..=t`,
/// following the declared neighborhoods.
pub fn dependency_cone(
    theta: &RuleDistribution,
    targets: &Window,
    t: usize,
) -> Result<ConeReport, EngineError> {
    check_targets(theta, targets)?;
    let ball = backward_ball(&targets.cells(), t, |c| {
        Ok(theta.rule_at(c)?.neighborhood())
    })?;
    Ok(ConeReport {
        targets: targets.clone(),
        steps: t,
        required: Window::from_cells(ball.cells)?,
    })
}

/// How [`evolve_exact_with`] spreads a time step across threads. Results are
/// bitwise identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Serial,
    /// Split the active cells into chunks of at least `min_chunk` on the
    /// current rayon pool.
    Chunked {
        min_chunk: usize,
    },
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::Chunked { min_chunk: 1 << 14 }
    }
}

/// Target states at every time `0..=steps`, with the cone that certifies them.
///
/// When the initial configuration defines every cell, the cone cannot fail
/// the check, so it is only built if asked for.
#[derive(Debug, Clone)]
pub struct Evolution {
    theta: RuleDistribution,
    targets: Window,
    steps: usize,
    cone: OnceLock<ConeReport>,
    width: usize,
    frames: Vec<State>,
}

impl PartialEq for Evolution {
    fn eq(&self, other: &Self) -> bool {
        self.targets == other.targets && self.steps == other.steps && self.frames == other.frames
    }
}

impl Eq for Evolution {}

impl Evolution {
    pub fn cone(&self) -> &ConeReport {
        self.cone.get_or_init(|| {
            dependency_cone(&self.theta, &self.targets, self.steps)
                .expect("targets were validated by the evolution")
        })
    }

    pub fn targets(&self) -> &Window {
        &self.targets
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major `(steps + 1) × width` states.
    pub fn frames(&self) -> &[State] {
        &self.frames
    }

    /// Target states at time `s`, in window order.
    pub fn frame(&self, s: usize) -> &[State] {
        &self.frames[s * self.width..(s + 1) * self.width]
    }

    pub fn pattern(&self, s: usize) -> Pattern {
        Pattern::new(self.targets.clone(), self.frame(s).to_vec())
            .expect("frame width matches targets")
    }

    pub fn final_pattern(&self) -> Pattern {
        self.pattern(self.steps())
    }

    /// Time series of the `i`-th target cell.
    pub fn column(&self, i: usize) -> Vec<State> {
        self.frames
            .iter()
            .skip(i)
            .step_by(self.width)
            .copied()
            .collect()
    }
}

/// Exact evolution of `init` under `theta` for `t` steps, observed on `targets`.
pub fn evolve_exact(
    theta: &RuleDistribution,
    init: &WindowConfiguration,
    targets: &Window,
    t: usize,
) -> Result<Evolution, EngineError> {
    evolve_exact_with(theta, init, targets, t, Parallelism::default())
}

pub fn evolve_exact_with(
    theta: &RuleDistribution,
    init: &WindowConfiguration,
    targets: &Window,
    t: usize,
    parallelism: Parallelism,
) -> Result<Evolution, EngineError> {
    if init.dim() != theta.dim() {
        return Err(EngineError::Mismatch(format!(
            "configuration has dimension {}, distribution has {}",
            init.dim(),
            theta.dim()
        )));
    }
    if init.q() != theta.q() {
        return Err(EngineError::Mismatch(format!(
            "configuration has q = {}, distribution has q = {}",
            init.q(),
            theta.q()
        )));
    }
    check_targets(theta, targets)?;
    let cone = OnceLock::new();
    if init.fill() == FillPolicy::Undefined {
        // the certificate: every cell of the declared cone must be determined
        let report = dependency_cone(theta, targets, t)?;
        let uncovered: Vec<Cell> = report
            .required
            .iter()
            .filter(|c| init.state_at(c).is_err())
            .collect();
        if !uncovered.is_empty() {
            return Err(EngineError::ConeEscape { uncovered });
        }
        cone.set(report).expect("fresh cell");
    }

    let compiled = Compiled::new(theta, targets, t)?;
    let mut cur: Vec<State> = compiled
        .ball
        .cells
        .iter()
        .map(|c| init.state_at(c))
        .collect::<Result<_, _>>()?;
    let mut next = cur.clone();
    let width = targets.len();
    let mut frames = Vec::with_capacity((t + 1) * width);
    frames.extend_from_slice(&cur[..width]);

    for s in 0..t {
        let active = compiled.active_after(s);
        compiled.step(&cur, &mut next[..active], parallelism);
        std::mem::swap(&mut cur, &mut next);
        frames.extend_from_slice(&cur[..width]);
    }

    Ok(Evolution {
        theta: theta.clone(),
        targets: targets.clone(),
        steps: t,
        cone,
        width,
        frames,
    })
}

/// The dependency graph actually used for stepping. Rules are reduced to the
/// neighbor positions their tables depend on, so this ball is a subset of the
/// declared cone.
struct Compiled {
    ball: Ball,
    horizon: usize,
    /// `shell_end[k]` = number of cells at distance ≤ k.
    shell_end: Vec<usize>,
    rules: Vec<LocalRule>,
    rule_of: Vec<u32>,
    nbr_start: Vec<u32>,
    nbr: Vec<u32>,
}

impl Compiled {
    fn new(theta: &RuleDistribution, targets: &Window, t: usize) -> Result<Self, EngineError> {
        let rules: Vec<LocalRule> = theta
            .rules()
            .rules()
            .iter()
            .map(LocalRule::reduced)
            .collect();
        let ball = backward_ball(&targets.cells(), t, |c| {
            Ok(rules[theta.rule_index(c)?].neighborhood())
        })?;
        let mut shell_end = vec![0; t + 1];
        for &d in &ball.dist {
            shell_end[d] += 1;
        }
        for k in 1..=t {
            shell_end[k] += shell_end[k - 1];
        }
        let updated = if t == 0 { 0 } else { shell_end[t - 1] };
        let mut rule_of = Vec::with_capacity(updated);
        let mut nbr_start = Vec::with_capacity(updated + 1);
        let mut nbr = Vec::new();
        nbr_start.push(0);
        for cell in &ball.cells[..updated] {
            let r = theta.rule_index(cell)?;
            rule_of.push(r as u32);
            for off in rules[r].neighborhood() {
                let n = cell.checked_add(off)?;
                nbr.push(ball.index[&n] as u32);
            }
            nbr_start.push(nbr.len() as u32);
        }
        Ok(Compiled {
            ball,
            horizon: t,
            shell_end,
            rules,
            rule_of,
            nbr_start,
            nbr,
        })
    }

    /// Number of cells whose state is still needed after step `s`.
    fn active_after(&self, s: usize) -> usize {
        self.shell_end[self.horizon - s - 1]
    }

    fn update(&self, cur: &[State], i: usize) -> State {
        let rule = &self.rules[self.rule_of[i] as usize];
        let q = rule.q() as usize;
        let (a, b) = (self.nbr_start[i] as usize, self.nbr_start[i + 1] as usize);
        let idx = self.nbr[a..b]
            .iter()
            .fold(0usize, |acc, &j| acc * q + cur[j as usize] as usize);
        rule.table()[idx]
    }

    fn step(&self, cur: &[State], next: &mut [State], parallelism: Parallelism) {
        match parallelism {
            Parallelism::Chunked { min_chunk } if next.len() >= 2 * min_chunk.max(1) => {
                let chunk = min_chunk.max(1);
                next.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(ci, out)| {
                        let base = ci * chunk;
                        for (k, slot) in out.iter_mut().enumerate() {
                            *slot = self.update(cur, base + k);
                        }
                    });
            }
            _ => {
                for (i, slot) in next.iter_mut().enumerate() {
                    *slot = self.update(cur, i);
                }
            }
        }
    }
}

/// Time series of states at one cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub cell: Cell,
    pub values: Vec<State>,
    pub source: String,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `T_x(t)` for `t = 0..=steps`.
pub fn trace(
    theta: &RuleDistribution,
    init: &WindowConfiguration,
    x: &Cell,
    steps: usize,
) -> Result<Trace, EngineError> {
    let ev = evolve_exact(theta, init, &Window::single(x.clone()), steps)?;
    Ok(Trace {
        cell: x.clone(),
        values: ev.frames,
        source: describe(init),
    })
}

/// Short human description of an initial configuration.
pub fn describe(init: &WindowConfiguration) -> String {
    let fill = match init.fill() {
        FillPolicy::Uniform(s) => format!("uniform:{s}"),
        FillPolicy::SeededRandom(seed) => format!("seed:{seed}"),
        FillPolicy::Undefined => "undefined".to_string(),
    };
    let known = init.known();
    let trivial = known.domain().len() == 1
        && known.domain().iter().all(|c| c.is_origin())
        && init.state_at(&Cell::origin(init.dim())).ok() == known.states().first().copied()
        && !matches!(init.fill(), FillPolicy::Undefined);
    if trivial {
        fill
    } else {
        format!("pattern({} cells)+{fill}", known.domain().len())
    }
}

/// Outcome of iterating the backward expansion of one cell to a fixed point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Influence {
    /// Every dependency cone of the cell, for every horizon, lies inside.
    Finite(Window),
    /// Still growing after `cap` expansions; sizes after each expansion.
    CapReached { growth: Vec<usize> },
}

impl fmt::Display for Influence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Influence::Finite(w) => write!(f, "finite ({} cells)", w.len()),
            Influence::CapReached { growth } => {
                write!(
                    f,
                    "cap reached ({} cells)",
                    growth.last().copied().unwrap_or(1)
                )
            }
        }
    }
}

/// Cells that can ever influence `x`, following only the neighbors each
/// rule actually reads, so an ignored declared neighbor adds nothing.
pub fn influence_closure(
    theta: &RuleDistribution,
    x: &Cell,
    cap: usize,
) -> Result<Influence, EngineError> {
    check_targets(theta, &Window::single(x.clone()))?;
    let mut ball = vec![x.clone()];
    let mut seen: std::collections::HashSet<Cell> = ball.iter().cloned().collect();
    let mut frontier = ball.clone();
    let mut growth = Vec::new();
    for _ in 0..cap {
        let mut fresh = Vec::new();
        for c in &frontier {
            let rule = theta.rule_at(c)?;
            for pos in rule.effective_positions() {
                let n = c.checked_add(&rule.neighborhood()[pos])?;
                if seen.insert(n.clone()) {
                    fresh.push(n);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(Influence::Finite(Window::from_cells(ball)?));
        }
        ball.extend(fresh.iter().cloned());
        growth.push(ball.len());
        frontier = fresh;
    }
    Ok(Influence::CapReached { growth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_example1;
    use crate::odometer::build_three_state_odometer;

    fn zeros(dim: usize, q: State) -> WindowConfiguration {
        WindowConfiguration::uniform(dim, 0, q).unwrap()
    }

    #[test]
    fn odometer_cone_is_prefix() {
        let theta = build_three_state_odometer();
        for x in 0..8i64 {
            for t in 0..12usize {
                let cone = dependency_cone(&theta, &Window::single(Cell::line(x)), t).unwrap();
                let lo = (x - t as i64).max(0);
                assert_eq!(
                    cone.required.cells(),
                    Window::interval(lo, x).unwrap().cells(),
                    "x={x} t={t}"
                );
            }
        }
    }

    #[test]
    fn example1_cone_grows_both_ways() {
        let theta = build_example1();
        for t in 0..20usize {
            let cone = dependency_cone(&theta, &Window::single(Cell::line(0)), t).unwrap();
            assert_eq!(
                cone.required.cells(),
                Window::interval(-(t as i64), t as i64).unwrap().cells()
            );
        }
    }

    #[test]
    fn zero_steps_returns_targets() {
        let theta = build_example1();
        let targets = Window::interval(-2, 3).unwrap();
        assert_eq!(
            dependency_cone(&theta, &targets, 0)
                .unwrap()
                .required
                .cells(),
            targets.cells()
        );
        let init = WindowConfiguration::seeded(1, 9, 2).unwrap();
        let ev = evolve_exact(&theta, &init, &targets, 0).unwrap();
        assert_eq!(ev.final_pattern(), init.restrict(&targets).unwrap());
    }

    #[test]
    fn odometer_window_sequence_from_zero() {
        let theta = build_three_state_odometer();
        let ev = evolve_exact(&theta, &zeros(1, 3), &Window::interval(0, 1).unwrap(), 9).unwrap();
        let expect: [[State; 2]; 10] = [
            [0, 0],
            [1, 0],
            [2, 1],
            [0, 1],
            [1, 1],
            [2, 0],
            [0, 2],
            [1, 2],
            [2, 2],
            [0, 0],
        ];
        for (s, row) in expect.iter().enumerate() {
            assert_eq!(ev.frame(s), row, "t={s}");
        }
    }

    #[test]
    fn odometer_traces() {
        let theta = build_three_state_odometer();
        let t0 = trace(&theta, &zeros(1, 3), &Cell::line(0), 6).unwrap();
        assert_eq!(t0.values, vec![0, 1, 2, 0, 1, 2, 0]);
        let t1 = trace(&theta, &zeros(1, 3), &Cell::line(1), 9).unwrap();
        assert_eq!(t1.values, vec![0, 0, 1, 1, 1, 0, 2, 2, 2, 0]);
        assert_eq!(t1.source, "uniform:0");
        let t2 = trace(&theta, &zeros(1, 3), &Cell::line(2), 27 * 3 - 1).unwrap();
        let rep = minimal_period(&t2);
        assert_eq!(rep.minimal_period, Some(27));
        assert_eq!(rep.confidence, Confidence::Exact);
    }

    #[test]
    fn example1_hole_fills_in_one_step() {
        let theta = build_example1();
        let known =
            Pattern::new(Window::interval(-3, 3).unwrap(), vec![1, 1, 0, 0, 0, 1, 1]).unwrap();
        let init = WindowConfiguration::new(known, FillPolicy::Undefined, 2).unwrap();
        let ev = evolve_exact(&theta, &init, &Window::interval(-2, 2).unwrap(), 1).unwrap();
        assert_eq!(ev.final_pattern().states(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn cone_escape_lists_uncovered_cells() {
        let theta = build_example1();
        let known = Pattern::uniform(Window::interval(-1, 1).unwrap(), 0);
        let init = WindowConfiguration::new(known, FillPolicy::Undefined, 2).unwrap();
        let err = evolve_exact(&theta, &init, &Window::single(Cell::line(0)), 2).unwrap_err();
        assert_eq!(
            err,
            EngineError::ConeEscape {
                uncovered: vec![Cell::line(-2), Cell::line(2)]
            }
        );
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let theta = build_three_state_odometer();
        let bad_q = WindowConfiguration::uniform(1, 0, 2).unwrap();
        assert!(matches!(
            evolve_exact(&theta, &bad_q, &Window::single(Cell::line(0)), 3),
            Err(EngineError::Mismatch(_))
        ));
        assert!(matches!(
            evolve_exact(&theta, &zeros(1, 3), &Window::single(Cell::line(-1)), 3),
            Err(EngineError::Rule(RuleError::OutsideDomain(_)))
        ));
    }

    #[test]
    fn influence_closures() {
        let odo = build_three_state_odometer();
        assert_eq!(
            influence_closure(&odo, &Cell::line(5), 100).unwrap(),
            Influence::Finite(Window::from_cells(Window::interval(0, 5).unwrap().cells()).unwrap())
        );
        let ex = build_example1();
        assert_eq!(
            influence_closure(&ex, &Cell::line(0), 100).unwrap(),
            Influence::Finite(Window::from_cells([Cell::line(0)]).unwrap())
        );
        match influence_closure(&ex, &Cell::line(3), 100).unwrap() {
            Influence::CapReached { growth } => {
                assert_eq!(growth.len(), 100);
                assert_eq!(growth[99], 101);
            }
            other => panic!("{other:?}"),
        }
    }
}
