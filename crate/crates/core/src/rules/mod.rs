//! Local rules, rule sets and finitely described rule distributions.

mod builtin;
mod json;

pub use builtin::*;
pub use json::{
    load_distribution, load_distribution_spec, load_rules, save_distribution, save_rules,
};

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Cell, LatticeError, State};
use crate::spiral;

/// Upper bound on `q^m` for a single lookup table.
pub const MAX_TABLE_LEN: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("rule `{rule}`: table has {found} entries, expected {expected} (q^m = {q}^{m})")]
    TableLength {
        rule: String,
        expected: usize,
        found: usize,
        q: State,
        m: usize,
    },
    #[error("rule `{rule}`: q^m exceeds the table size limit")]
    TableTooLarge { rule: String },
    #[error("rule `{rule}`: output state {state} out of range for q = {q}")]
    OutputOutOfRange {
        rule: String,
        state: State,
        q: State,
    },
    #[error("rule `{rule}`: offset {offset} listed twice")]
    DuplicateOffset { rule: String, offset: Cell },
    #[error("rule `{rule}`: offsets must all have dimension {dim}")]
    OffsetDimension { rule: String, dim: usize },
    #[error("rule `{rule}`: expected {expected} neighbor states, got {found}")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
    },
    #[error("rule `{rule}`: input state {state} out of range for q = {q}")]
    InputOutOfRange {
        rule: String,
        state: State,
        q: State,
    },
    #[error("rule name `{0}` used twice")]
    DuplicateRule(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule `{rule}` has q = {q}, rule set has q = {expected}")]
    StateCountMismatch {
        rule: String,
        q: State,
        expected: State,
    },
    #[error("state count q must be at least 1")]
    ZeroStates,
    #[error("cell {0} is outside the distribution's domain")]
    OutsideDomain(Cell),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("closure violated: {}", format_violations(.0))]
    ClosureViolated(Vec<ClosureViolation>),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

fn format_violations(v: &[ClosureViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// A lookup-table local rule.
///
/// The table is indexed lexicographically by the neighbor states in the
/// declared neighborhood order: the first offset is the most significant digit
/// in base `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalRule {
    name: String,
    q: State,
    neighborhood: Vec<Cell>,
    table: Vec<State>,
}

impl LocalRule {
    pub fn new(
        name: impl Into<String>,
        q: State,
        neighborhood: Vec<Cell>,
        table: Vec<State>,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        if q == 0 {
            return Err(RuleError::ZeroStates);
        }
        if let Some(first) = neighborhood.first() {
            let dim = first.dim();
            if neighborhood.iter().any(|c| c.dim() != dim) {
                return Err(RuleError::OffsetDimension { rule: name, dim });
            }
        }
        let mut seen = HashSet::new();
        for off in &neighborhood {
            if !seen.insert(off) {
                return Err(RuleError::DuplicateOffset {
                    rule: name,
                    offset: off.clone(),
                });
            }
        }
        let m = neighborhood.len();
        let expected =
            table_len(q, m).ok_or_else(|| RuleError::TableTooLarge { rule: name.clone() })?;
        if table.len() != expected {
            return Err(RuleError::TableLength {
                rule: name,
                expected,
                found: table.len(),
                q,
                m,
            });
        }
        if let Some(&state) = table.iter().find(|&&s| s >= q) {
            return Err(RuleError::OutputOutOfRange {
                rule: name,
                state,
                q,
            });
        }
        Ok(LocalRule {
            name,
            q,
            neighborhood,
            table,
        })
    }

    /// Tabulate `f` over every neighbor-state tuple.
    pub fn from_fn(
        name: impl Into<String>,
        q: State,
        neighborhood: Vec<Cell>,
        mut f: impl FnMut(&[State]) -> State,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        let m = neighborhood.len();
        let len = table_len(q.max(1), m)
            .ok_or_else(|| RuleError::TableTooLarge { rule: name.clone() })?;
        let mut tuple = vec![0; m];
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            decode_index(idx, q, &mut tuple);
            table.push(f(&tuple));
        }
        Self::new(name, q, neighborhood, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self) -> State {
        self.q
    }

    pub fn neighborhood(&self) -> &[Cell] {
        &self.neighborhood
    }

    pub fn table(&self) -> &[State] {
        &self.table
    }

    pub fn arity(&self) -> usize {
        self.neighborhood.len()
    }

    /// Largest Chebyshev norm among the offsets.
    pub fn radius(&self) -> i64 {
        self.neighborhood
            .iter()
            .map(Cell::max_norm)
            .max()
            .unwrap_or(0)
    }

    pub fn apply(&self, states: &[State]) -> Result<State, RuleError> {
        if states.len() != self.arity() {
            return Err(RuleError::Arity {
                rule: self.name.clone(),
                expected: self.arity(),
                found: states.len(),
            });
        }
        if let Some(&state) = states.iter().find(|&&s| s >= self.q) {
            return Err(RuleError::InputOutOfRange {
                rule: self.name.clone(),
                state,
                q: self.q,
            });
        }
        Ok(self.table[self.index_of(states)])
    }

    /// Table index of an in-range tuple.
    pub fn index_of(&self, states: &[State]) -> usize {
        states
            .iter()
            .fold(0usize, |acc, &s| acc * self.q as usize + s as usize)
    }

    /// Same lookup table on the same neighborhood, names aside.
    pub fn same_function(&self, other: &LocalRule) -> bool {
        self.q == other.q && self.neighborhood == other.neighborhood && self.table == other.table
    }

    /// Neighborhood positions whose state can change the output.
    pub fn effective_positions(&self) -> Vec<usize> {
        let m = self.arity();
        let q = self.q as usize;
        (0..m)
            .filter(|&pos| {
                let weight = q.pow((m - 1 - pos) as u32);
                (0..self.table.len()).any(|idx| {
                    let digit = (idx / weight) % q;
                    let base = idx - digit * weight;
                    (0..q).any(|d| self.table[base + d * weight] != self.table[idx])
                })
            })
            .collect()
    }

    /// The same function over only the effective positions.
    pub fn reduced(&self) -> LocalRule {
        let keep = self.effective_positions();
        if keep.len() == self.arity() {
            return self.clone();
        }
        let mut full = vec![0; self.arity()];
        let neighborhood = keep.iter().map(|&i| self.neighborhood[i].clone()).collect();
        LocalRule::from_fn(self.name.clone(), self.q, neighborhood, |sub| {
            full.iter_mut().for_each(|s| *s = 0);
            for (&pos, &s) in keep.iter().zip(sub) {
                full[pos] = s;
            }
            self.table[self.index_of(&full)]
        })
        .expect("sub-table of a valid rule is valid")
    }

    /// The rule obtained by holding the neighbor at `offset` in `state`; that
    /// offset is dropped from the neighborhood.
    pub fn pinned(
        &self,
        name: impl Into<String>,
        offset: &Cell,
        state: State,
    ) -> Result<LocalRule, RuleError> {
        let pos = self
            .neighborhood
            .iter()
            .position(|o| o == offset)
            .ok_or_else(|| {
                RuleError::InvalidDistribution(format!(
                    "rule `{}` has no offset {offset}",
                    self.name
                ))
            })?;
        if state >= self.q {
            return Err(RuleError::InputOutOfRange {
                rule: self.name.clone(),
                state,
                q: self.q,
            });
        }
        let mut neighborhood = self.neighborhood.clone();
        neighborhood.remove(pos);
        let mut full = vec![0; self.arity()];
        LocalRule::from_fn(name, self.q, neighborhood, |sub| {
            full[..pos].copy_from_slice(&sub[..pos]);
            full[pos] = state;
            full[pos + 1..].copy_from_slice(&sub[pos..]);
            self.table[self.index_of(&full)]
        })
    }
}

fn table_len(q: State, m: usize) -> Option<usize> {
    let mut len = 1usize;
    for _ in 0..m {
        len = len.checked_mul(q as usize)?;
        if len > MAX_TABLE_LEN {
            return None;
        }
    }
    Some(len)
}

fn decode_index(mut idx: usize, q: State, out: &mut [State]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % q as usize) as State;
        idx /= q as usize;
    }
}

/// A finite set of named rules sharing one state count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    q: State,
    rules: Vec<LocalRule>,
}

impl RuleSet {
    pub fn new(q: State, rules: Vec<LocalRule>) -> Result<Self, RuleError> {
        if q == 0 {
            return Err(RuleError::ZeroStates);
        }
        let mut names = HashSet::new();
        for r in &rules {
            if r.q != q {
                return Err(RuleError::StateCountMismatch {
                    rule: r.name.clone(),
                    q: r.q,
                    expected: q,
                });
            }
            if !names.insert(r.name.as_str()) {
                return Err(RuleError::DuplicateRule(r.name.clone()));
            }
        }
        Ok(RuleSet { q, rules })
    }

    pub fn q(&self) -> State {
        self.q
    }

    pub fn rules(&self) -> &[LocalRule] {
        &self.rules
    }

    pub fn get(&self, name: &str) -> Option<&LocalRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize, RuleError> {
        self.rules
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| RuleError::UnknownRule(name.to_string()))
    }

    pub fn max_radius(&self) -> i64 {
        self.rules.iter().map(LocalRule::radius).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// All of ℤ^d.
    Full,
    /// ℕ ⊂ ℤ; only for d = 1.
    Halfline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exception {
    pub cell: Cell,
    pub rule: String,
}

/// Which rule sits where, by rule name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionKind {
    Uniform {
        rule: String,
    },
    FiniteExceptions {
        default: String,
        exceptions: Vec<Exception>,
    },
    /// `left` on x < start, `explicit[i]` at start + i, `right` past the end.
    Rays1d {
        left: String,
        start: i64,
        explicit: Vec<String>,
        right: String,
    },
    /// Axis-aligned periods; `tile` lists the rules on `[0, period)` in
    /// lexicographic cell order.
    Periodic {
        period: Vec<i64>,
        tile: Vec<String>,
    },
    /// `origin` at s(0); at s(k), k > 0, the rule named after the direction
    /// of s(k − 1) as seen from s(k).
    Spiral {
        origin: String,
        east: String,
        north: String,
        west: String,
        south: String,
    },
}

/// The serializable description of a rule distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub d: usize,
    pub domain: Domain,
    pub kind: DistributionKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureViolation {
    pub cell: Cell,
    pub rule: String,
    pub neighbor: Cell,
}

impl fmt::Display for ClosureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cell {} (rule `{}`) reads {} outside the domain",
            self.cell, self.rule, self.neighbor
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Resolved {
    Uniform(usize),
    Exceptions {
        default: usize,
        map: BTreeMap<Cell, usize>,
    },
    Rays {
        left: usize,
        start: i64,
        explicit: Vec<usize>,
        right: usize,
    },
    Periodic {
        period: Vec<i64>,
        tile: Vec<usize>,
    },
    Spiral {
        origin: usize,
        by_direction: [usize; 4],
    },
}

/// A validated rule distribution together with the rules it references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleDistribution {
    spec: DistributionSpec,
    rules: RuleSet,
    resolved: Resolved,
}

impl DistributionKind {
    pub fn is_spiral(&self) -> bool {
        matches!(self, DistributionKind::Spiral { .. })
    }
}

impl RuleDistribution {
    /// Validates names, dimensions and neighborhood closure.
    pub fn new(spec: DistributionSpec, rules: RuleSet) -> Result<Self, RuleError> {
        let dist = Self::unchecked(spec, rules)?;
        let violations = dist.closure_violations();
        if !violations.is_empty() {
            return Err(RuleError::ClosureViolated(violations));
        }
        Ok(dist)
    }

    fn unchecked(spec: DistributionSpec, rules: RuleSet) -> Result<Self, RuleError> {
        let invalid = |m: &str| Err(RuleError::InvalidDistribution(m.to_string()));
        if spec.d == 0 {
            return invalid("dimension must be at least 1");
        }
        if spec.domain == Domain::Halfline && spec.d != 1 {
            return invalid("the half-line domain is one-dimensional");
        }
        for r in rules.rules() {
            if r.neighborhood().iter().any(|o| o.dim() != spec.d) {
                return Err(RuleError::OffsetDimension {
                    rule: r.name().to_string(),
                    dim: spec.d,
                });
            }
        }
        let idx = |name: &str| rules.index_of(name);
        let resolved = match &spec.kind {
            DistributionKind::Uniform { rule } => Resolved::Uniform(idx(rule)?),
            DistributionKind::FiniteExceptions {
                default,
                exceptions,
            } => {
                let mut map = BTreeMap::new();
                for e in exceptions {
                    if e.cell.dim() != spec.d {
                        return invalid("exception cell has the wrong dimension");
                    }
                    if spec.domain == Domain::Halfline && e.cell.x() < 0 {
                        return invalid("exception cell outside the half-line");
                    }
                    if map.insert(e.cell.clone(), idx(&e.rule)?).is_some() {
                        return invalid("exception cell listed twice");
                    }
                }
                Resolved::Exceptions {
                    default: idx(default)?,
                    map,
                }
            }
            DistributionKind::Rays1d {
                left,
                start,
                explicit,
                right,
            } => {
                if spec.d != 1 {
                    return invalid("rays1d needs d = 1");
                }
                Cell::new(&[*start])?;
                Cell::new(&[start.saturating_add(explicit.len() as i64)])?;
                Resolved::Rays {
                    left: idx(left)?,
                    start: *start,
                    explicit: explicit.iter().map(|n| idx(n)).collect::<Result<_, _>>()?,
                    right: idx(right)?,
                }
            }
            DistributionKind::Periodic { period, tile } => {
                if period.len() != spec.d || period.iter().any(|&p| p <= 0) {
                    return invalid("periodic needs one positive period per axis");
                }
                let cells: i64 = period.iter().product();
                if tile.len() as i64 != cells {
                    return Err(RuleError::InvalidDistribution(format!(
                        "periodic tile has {} rules, expected {cells}",
                        tile.len()
                    )));
                }
                Resolved::Periodic {
                    period: period.clone(),
                    tile: tile.iter().map(|n| idx(n)).collect::<Result<_, _>>()?,
                }
            }
            DistributionKind::Spiral {
                origin,
                east,
                north,
                west,
                south,
            } => {
                if spec.d != 2 || spec.domain != Domain::Full {
                    return invalid("spiral needs the full plane");
                }
                Resolved::Spiral {
                    origin: idx(origin)?,
                    by_direction: [idx(east)?, idx(north)?, idx(west)?, idx(south)?],
                }
            }
        };
        Ok(RuleDistribution {
            spec,
            rules,
            resolved,
        })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn dim(&self) -> usize {
        self.spec.d
    }

    pub fn q(&self) -> State {
        self.rules.q()
    }

    pub fn domain(&self) -> Domain {
        self.spec.domain
    }

    pub fn in_domain(&self, x: &Cell) -> bool {
        x.dim() == self.spec.d && (self.spec.domain == Domain::Full || x.x() >= 0)
    }

    /// Index into [`RuleSet::rules`] of the rule at `x`.
    pub fn rule_index(&self, x: &Cell) -> Result<usize, RuleError> {
        if !self.in_domain(x) {
            return Err(RuleError::OutsideDomain(x.clone()));
        }
        Ok(match &self.resolved {
            Resolved::Uniform(r) => *r,
            Resolved::Exceptions { default, map } => *map.get(x).unwrap_or(default),
            Resolved::Rays {
                left,
                start,
                explicit,
                right,
            } => {
                let pos = x.x() - start;
                if pos < 0 {
                    *left
                } else if (pos as usize) < explicit.len() {
                    explicit[pos as usize]
                } else {
                    *right
                }
            }
            Resolved::Periodic { period, tile } => {
                let idx = x
                    .coords()
                    .iter()
                    .zip(period)
                    .fold(0i64, |acc, (&c, &p)| acc * p + c.rem_euclid(p));
                tile[idx as usize]
            }
            Resolved::Spiral {
                origin,
                by_direction,
            } => {
                let k = spiral::spiral_index(x).map_err(|_| RuleError::OutsideDomain(x.clone()))?;
                if k == 0 {
                    *origin
                } else {
                    let toward = spiral::spiral(k - 1).checked_sub(x)?;
                    let dir = spiral::Direction::from_offset(&toward)
                        .expect("consecutive spiral cells are adjacent");
                    by_direction[dir as usize]
                }
            }
        })
    }

    pub fn rule_at(&self, x: &Cell) -> Result<&LocalRule, RuleError> {
        Ok(&self.rules.rules()[self.rule_index(x)?])
    }

    /// Neighbors read by the rule at `x`, in neighborhood order.
    pub fn neighbors(&self, x: &Cell) -> Result<Vec<Cell>, RuleError> {
        self.rule_at(x)?
            .neighborhood()
            .iter()
            .map(|o| x.checked_add(o).map_err(RuleError::from))
            .collect()
    }

    /// Every cell whose rule reads a neighbor outside the domain.
    pub fn closure_violations(&self) -> Vec<ClosureViolation> {
        if self.spec.domain == Domain::Full {
            return Vec::new();
        }
        // on ℕ only cells below the largest offset can reach past 0
        let reach = self.rules.max_radius();
        let mut out = Vec::new();
        for x in 0..reach {
            let cell = Cell::line(x);
            let rule = self.rule_at(&cell).expect("cell in domain");
            for off in rule.neighborhood() {
                let neighbor = Cell::line(x + off.x());
                if !self.in_domain(&neighbor) {
                    out.push(ClosureViolation {
                        cell: cell.clone(),
                        rule: rule.name().to_string(),
                        neighbor,
                    });
                }
            }
        }
        out
    }
}

/// Closure report for a distribution that has not been validated yet.
pub fn validate_closure(
    spec: &DistributionSpec,
    rules: &RuleSet,
) -> Result<Vec<ClosureViolation>, RuleError> {
    Ok(RuleDistribution::unchecked(spec.clone(), rules.clone())?.closure_violations())
}
