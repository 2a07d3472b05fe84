//! Cells, windows, patterns and finite stand-ins for configurations.
//!
//! Nothing here represents an infinite configuration directly. Every
//! observable configuration is a [`WindowConfiguration`]: exact states on a
//! finite window plus a [`FillPolicy`] answering for every other cell.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Largest coordinate magnitude accepted anywhere in the crate.
pub const COORD_BOUND: i64 = 1 << 40;

/// A state index in `0..q`.
pub type State = u8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("cells need at least one coordinate")]
    ZeroDimension,
    #[error("coordinate {0} exceeds the safe bound 2^40")]
    CoordinateOutOfBounds(i128),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("window is empty")]
    EmptyWindow,
    #[error("box corner {lo} is not below {hi} componentwise")]
    InvertedBox { lo: Cell, hi: Cell },
    #[error("pattern has {found} states for {expected} cells")]
    StateCount { expected: usize, found: usize },
    #[error("state {state} out of range for q = {q}")]
    StateOutOfRange { state: State, q: State },
    #[error("state count q must be at least 1")]
    ZeroStates,
    #[error("cell {0} lies outside the known region")]
    OutsideKnown(Cell),
}

/// A lattice cell in ℤ^d.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Cell(SmallVec<[i64; 2]>);

impl Cell {
    pub fn new(coords: &[i64]) -> Result<Self, LatticeError> {
        if coords.is_empty() {
            return Err(LatticeError::ZeroDimension);
        }
        for &c in coords {
            check_coord(c as i128)?;
        }
        Ok(Cell(SmallVec::from_slice(coords)))
    }

    /// One-dimensional cell. Panics if `x` exceeds [`COORD_BOUND`].
    pub fn line(x: i64) -> Self {
        Self::new(&[x]).expect("coordinate within bound")
    }

    /// Two-dimensional cell. Panics if a coordinate exceeds [`COORD_BOUND`].
    pub fn plane(x: i64, y: i64) -> Self {
        Self::new(&[x, y]).expect("coordinates within bound")
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1);
        Cell(SmallVec::from_elem(0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// First coordinate.
    pub fn x(&self) -> i64 {
        self.0[0]
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &Cell) -> Result<Cell, LatticeError> {
        self.combine(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Cell) -> Result<Cell, LatticeError> {
        self.combine(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Cell {
        Cell(self.0.iter().map(|c| -c).collect())
    }

    /// Chebyshev norm.
    pub fn max_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    fn combine(&self, other: &Cell, op: impl Fn(i128, i128) -> i128) -> Result<Cell, LatticeError> {
        if self.dim() != other.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let mut out = SmallVec::with_capacity(self.dim());
        for (&a, &b) in self.0.iter().zip(other.0.iter()) {
            let v = op(a as i128, b as i128);
            check_coord(v)?;
            out.push(v as i64);
        }
        Ok(Cell(out))
    }
}

fn check_coord(c: i128) -> Result<(), LatticeError> {
    if c.abs() > COORD_BOUND as i128 {
        Err(LatticeError::CoordinateOutOfBounds(c))
    } else {
        Ok(())
    }
}

impl TryFrom<Vec<i64>> for Cell {
    type Error = LatticeError;

    fn try_from(v: Vec<i64>) -> Result<Self, Self::Error> {
        Cell::new(&v)
    }
}

impl From<Cell> for Vec<i64> {
    fn from(c: Cell) -> Self {
        c.0.into_vec()
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cell{self}")
    }
}

/// A finite, non-empty set of cells.
///
/// Both forms enumerate their cells in lexicographic order, so a box and the
/// explicit list of its cells index states identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Window {
    Box { lo: Cell, hi: Cell },
    List(Vec<Cell>),
}

impl Window {
    pub fn new_box(lo: Cell, hi: Cell) -> Result<Self, LatticeError> {
        if lo.dim() != hi.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: lo.dim(),
                found: hi.dim(),
            });
        }
        if lo.coords().iter().zip(hi.coords()).any(|(a, b)| a > b) {
            return Err(LatticeError::InvertedBox { lo, hi });
        }
        Ok(Window::Box { lo, hi })
    }

    /// The 1D interval `[a, b]`.
    pub fn interval(a: i64, b: i64) -> Result<Self, LatticeError> {
        Self::new_box(Cell::new(&[a])?, Cell::new(&[b])?)
    }

    pub fn single(cell: Cell) -> Self {
        Window::List(vec![cell])
    }

    /// Explicit cell list; duplicates are merged.
    pub fn from_cells(cells: impl IntoIterator<Item = Cell>) -> Result<Self, LatticeError> {
        let mut cells: Vec<Cell> = cells.into_iter().collect();
        let first = cells.first().ok_or(LatticeError::EmptyWindow)?;
        let dim = first.dim();
        if let Some(bad) = cells.iter().find(|c| c.dim() != dim) {
            return Err(LatticeError::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        cells.sort();
        cells.dedup();
        Ok(Window::List(cells))
    }

    pub fn dim(&self) -> usize {
        match self {
            Window::Box { lo, .. } => lo.dim(),
            Window::List(cells) => cells[0].dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Window::Box { lo, hi } => lo
                .coords()
                .iter()
                .zip(hi.coords())
                .map(|(a, b)| (b - a + 1) as usize)
                .product(),
            Window::List(cells) => cells.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.index_of(cell).is_some()
    }

    /// Position of `cell` in the window's enumeration order.
    pub fn index_of(&self, cell: &Cell) -> Option<usize> {
        if cell.dim() != self.dim() {
            return None;
        }
        match self {
            Window::Box { lo, hi } => {
                let mut idx = 0usize;
                for ((&c, &l), &h) in cell.coords().iter().zip(lo.coords()).zip(hi.coords()) {
                    if c < l || c > h {
                        return None;
                    }
                    idx = idx * (h - l + 1) as usize + (c - l) as usize;
                }
                Some(idx)
            }
            Window::List(cells) => cells.binary_search(cell).ok(),
        }
    }

    pub fn iter(&self) -> WindowIter<'_> {
        match self {
            Window::Box { lo, .. } => WindowIter::Box {
                window: self,
                next: Some(lo.clone()),
            },
            Window::List(cells) => WindowIter::List(cells.iter()),
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.iter().collect()
    }

    /// `self − x`, elementwise.
    pub fn translated_by_neg(&self, x: &Cell) -> Result<Window, LatticeError> {
        match self {
            Window::Box { lo, hi } => Ok(Window::Box {
                lo: lo.checked_sub(x)?,
                hi: hi.checked_sub(x)?,
            }),
            Window::List(cells) => Ok(Window::List(
                cells
                    .iter()
                    .map(|c| c.checked_sub(x))
                    .collect::<Result<_, _>>()?,
            )),
        }
    }

    /// Whether every cell of `self` is in `other`.
    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.iter().all(|c| other.contains(&c))
    }
}

pub enum WindowIter<'a> {
    Box {
        window: &'a Window,
        next: Option<Cell>,
    },
    List(std::slice::Iter<'a, Cell>),
}

impl Iterator for WindowIter<'_> {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        match self {
            WindowIter::List(it) => it.next().cloned(),
            WindowIter::Box { window, next } => {
                let current = next.take()?;
                let Window::Box { lo, hi } = window else {
                    unreachable!()
                };
                let mut succ = current.clone();
                for axis in (0..succ.dim()).rev() {
                    if succ.0[axis] < hi.0[axis] {
                        succ.0[axis] += 1;
                        *next = Some(succ);
                        break;
                    }
                    succ.0[axis] = lo.0[axis];
                }
                Some(current)
            }
        }
    }
}

/// Exact states on a finite domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    domain: Window,
    states: Vec<State>,
}

impl Pattern {
    /// `states` follows the domain's enumeration order.
    pub fn new(domain: Window, states: Vec<State>) -> Result<Self, LatticeError> {
        if states.len() != domain.len() {
            return Err(LatticeError::StateCount {
                expected: domain.len(),
                found: states.len(),
            });
        }
        Ok(Pattern { domain, states })
    }

    pub fn uniform(domain: Window, state: State) -> Self {
        let states = vec![state; domain.len()];
        Pattern { domain, states }
    }

    pub fn from_fn(domain: Window, mut f: impl FnMut(&Cell) -> State) -> Self {
        let states = domain.iter().map(|c| f(&c)).collect();
        Pattern { domain, states }
    }

    pub fn domain(&self) -> &Window {
        &self.domain
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn get(&self, cell: &Cell) -> Option<State> {
        self.domain.index_of(cell).map(|i| self.states[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, State)> + '_ {
        self.domain.iter().zip(self.states.iter().copied())
    }

    pub fn max_state(&self) -> State {
        self.states.iter().copied().max().unwrap_or(0)
    }
}

/// The x-shift of a pattern: the result lives on `domain − x` and takes the
/// value `p(y + x)` at `y`.
pub fn shift_pattern(p: &Pattern, x: &Cell) -> Result<Pattern, LatticeError> {
    // translation preserves lexicographic order, so states carry over as-is
    Ok(Pattern {
        domain: p.domain.translated_by_neg(x)?,
        states: p.states.clone(),
    })
}

/// How a [`WindowConfiguration`] answers for cells outside its known pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FillPolicy {
    Uniform(State),
    Undefined,
    SeededRandom(u64),
}

/// A finite pattern plus a fill policy: the stand-in for a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowConfiguration {
    known: Pattern,
    fill: FillPolicy,
    q: State,
}

impl WindowConfiguration {
    pub fn new(known: Pattern, fill: FillPolicy, q: State) -> Result<Self, LatticeError> {
        if q == 0 {
            return Err(LatticeError::ZeroStates);
        }
        if let Some(&state) = known.states.iter().find(|&&s| s >= q) {
            return Err(LatticeError::StateOutOfRange { state, q });
        }
        if let FillPolicy::Uniform(state) = fill {
            if state >= q {
                return Err(LatticeError::StateOutOfRange { state, q });
            }
        }
        Ok(WindowConfiguration { known, fill, q })
    }

    /// The configuration with `state` everywhere.
    pub fn uniform(dim: usize, state: State, q: State) -> Result<Self, LatticeError> {
        let known = Pattern::uniform(Window::single(Cell::origin(dim)), state);
        Self::new(known, FillPolicy::Uniform(state), q)
    }

    /// Hash-seeded random states everywhere.
    pub fn seeded(dim: usize, seed: u64, q: State) -> Result<Self, LatticeError> {
        let origin = Cell::origin(dim);
        let s = seeded_state(seed, &origin, q);
        let known = Pattern::uniform(Window::single(origin), s);
        Self::new(known, FillPolicy::SeededRandom(seed), q)
    }

    pub fn known(&self) -> &Pattern {
        &self.known
    }

    pub fn fill(&self) -> FillPolicy {
        self.fill
    }

    pub fn q(&self) -> State {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.known.domain.dim()
    }

    pub fn state_at(&self, cell: &Cell) -> Result<State, LatticeError> {
        if let Some(s) = self.known.get(cell) {
            return Ok(s);
        }
        match self.fill {
            FillPolicy::Uniform(s) => Ok(s),
            FillPolicy::SeededRandom(seed) => Ok(seeded_state(seed, cell, self.q)),
            FillPolicy::Undefined => Err(LatticeError::OutsideKnown(cell.clone())),
        }
    }

    /// Same fill, with `pattern` overriding the known states on its domain.
    pub fn with_overrides(&self, pattern: &Pattern) -> Result<Self, LatticeError> {
        let mut cells: Vec<Cell> = self.known.domain.cells();
        cells.extend(pattern.domain.iter());
        let domain = Window::from_cells(cells)?;
        let mut states = Vec::with_capacity(domain.len());
        for c in domain.iter() {
            let s = match pattern.get(&c) {
                Some(s) => s,
                None => self.state_at(&c)?,
            };
            states.push(s);
        }
        Self::new(Pattern::new(domain, states)?, self.fill, self.q)
    }

    /// Materialise the configuration on `window`.
    pub fn restrict(&self, window: &Window) -> Result<Pattern, LatticeError> {
        let states = window
            .iter()
            .map(|c| self.state_at(&c))
            .collect::<Result<_, _>>()?;
        Pattern::new(window.clone(), states)
    }
}

/// Whether `c` lies in the cylinder of `base`, i.e. agrees with it on every
/// cell of `base`'s domain.
pub fn cylinder_member(c: &WindowConfiguration, base: &Pattern) -> Result<bool, LatticeError> {
    let mut agree = true;
    for (cell, s) in base.iter() {
        agree &= c.state_at(&cell)? == s;
    }
    Ok(agree)
}

/// Pure function of `(seed, cell)`; query order never matters.
pub fn seeded_state(seed: u64, cell: &Cell, q: State) -> State {
    let mut h = splitmix64(seed ^ 0x6a09_e667_f3bc_c909);
    for &c in cell.coords() {
        h = splitmix64(h ^ c as u64);
    }
    (h % q as u64) as State
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
