//! The square spiral `s: ℕ → ℤ²` and the odometer laid along it.
//!
//! The spiral starts at the origin, steps east, and winds counterclockwise.
//! Ring `r ≥ 1` (Chebyshev norm `r`) holds the indices
//! `(2r−1)² .. (2r+1)²` and is walked in four sides of `2r` cells each:
//! north along `x = r`, west along `y = r`, south along `x = −r`, east along
//! `y = −r`.

use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{evolve_exact, EngineError};
use crate::lattice::{Cell, FillPolicy, Pattern, Window, WindowConfiguration};
use crate::rules::{
    cycle_g_planar, oriented_f, DistributionKind, DistributionSpec, Domain, RuleDistribution,
    RuleSet,
};

/// Largest ring radius whose indices fit in `u64`.
pub const MAX_RING: i64 = (1 << 31) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpiralError {
    #[error("spiral lives in the plane, got a {0}-dimensional cell")]
    NotPlanar(usize),
    #[error("cell {0} is beyond the indexable spiral")]
    TooFar(Cell),
}

/// Unit steps in the plane, in the order used by the spiral distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::North,
        Direction::West,
        Direction::South,
    ];

    pub fn offset(self) -> Cell {
        match self {
            Direction::East => Cell::plane(1, 0),
            Direction::North => Cell::plane(0, 1),
            Direction::West => Cell::plane(-1, 0),
            Direction::South => Cell::plane(0, -1),
        }
    }

    pub fn from_offset(c: &Cell) -> Option<Direction> {
        match c.coords() {
            [1, 0] => Some(Direction::East),
            [0, 1] => Some(Direction::North),
            [-1, 0] => Some(Direction::West),
            [0, -1] => Some(Direction::South),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::East => "east",
            Direction::North => "north",
            Direction::West => "west",
            Direction::South => "south",
        }
    }
}

/// The `k`-th cell of the spiral.
pub fn spiral(k: u64) -> Cell {
    if k == 0 {
        return Cell::plane(0, 0);
    }
    let r = k.isqrt().div_ceil(2);
    let j = k - (2 * r - 1) * (2 * r - 1);
    let (r, j) = (r as i64, j as i64);
    let side = 2 * r;
    let (x, y) = match j / side {
        0 => (r, -r + 1 + j),
        1 => (r - 1 - (j - side), r),
        2 => (-r, r - 1 - (j - 2 * side)),
        _ => (-r + 1 + (j - 3 * side), -r),
    };
    Cell::plane(x, y)
}

/// Inverse of [`spiral`], computed from the ring of `c`.
pub fn spiral_index(c: &Cell) -> Result<u64, SpiralError> {
    let [x, y] = *c.coords() else {
        return Err(SpiralError::NotPlanar(c.dim()));
    };
    let r = x.abs().max(y.abs());
    if r > MAX_RING {
        return Err(SpiralError::TooFar(c.clone()));
    }
    if r == 0 {
        return Ok(0);
    }
    let side = 2 * r;
    let j = if x == r && y > -r {
        y + r - 1
    } else if y == r {
        side + (r - 1 - x)
    } else if x == -r {
        2 * side + (r - 1 - y)
    } else {
        3 * side + (x + r - 1)
    };
    let base = (2 * r as u64 - 1) * (2 * r as u64 - 1);
    Ok(base + j as u64)
}

/// Odometer along the spiral: `g` at the origin; at `s(k)`, `k > 0`, the
/// odometer rule reading `s(k − 1)` as its left neighbor.
pub fn build_spiral_odometer() -> RuleDistribution {
    let mut rules = vec![cycle_g_planar()];
    rules.extend(Direction::ALL.map(oriented_f));
    let name = |d: Direction| format!("f_{}", d.name());
    RuleDistribution::new(
        DistributionSpec {
            d: 2,
            domain: Domain::Full,
            kind: DistributionKind::Spiral {
                origin: "g".into(),
                east: name(Direction::East),
                north: name(Direction::North),
                west: name(Direction::West),
                south: name(Direction::South),
            },
        },
        RuleSet::new(3, rules).expect("distinct rule names"),
    )
    .expect("spiral odometer is well formed")
}

/// The first `n` spiral cells, `s(0..n)`.
pub fn spiral_prefix(n: u64) -> Vec<Cell> {
    (0..n).map(spiral).collect()
}

/// Direction from `s(k)` toward `s(k − 1)`; `None` at the origin.
pub fn orientation(k: u64) -> Option<Direction> {
    (k > 0).then(|| {
        Direction::from_offset(
            &spiral(k - 1)
                .checked_sub(&spiral(k))
                .expect("small coordinates"),
        )
        .expect("consecutive spiral cells are adjacent")
    })
}

/// Copy a 1D configuration onto the spiral: cell `i` of `init` goes to
/// `s(i)` for `i < n`. Nothing else is known.
pub fn lift_to_spiral(
    init: &WindowConfiguration,
    n: u64,
) -> Result<WindowConfiguration, EngineError> {
    let states = (0..n)
        .map(|i| init.state_at(&Cell::line(i as i64)))
        .collect::<Result<Vec<_>, _>>()?;
    let cells = spiral_prefix(n);
    let domain = Window::from_cells(cells.iter().cloned())?;
    let known = Pattern::from_fn(domain, |c| {
        let k = spiral_index(c).expect("prefix cell") as usize;
        states[k]
    });
    Ok(WindowConfiguration::new(
        known,
        FillPolicy::Undefined,
        init.q(),
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub n: u64,
    pub steps: usize,
    pub pass: bool,
    /// First `(spiral index, time)` where the two systems disagree.
    pub first_divergence: Option<(u64, usize)>,
}

/// Evolve the 1D odometer on cells `0..n` and the spiral odometer on
/// `s(0..n)` from matching initial states, and compare them cell by cell.
pub fn verify_embedding_equivalence(
    n: u64,
    steps: usize,
    init: &WindowConfiguration,
) -> Result<EquivalenceReport, EngineError> {
    assert!(n >= 1);
    let line = crate::odometer::build_three_state_odometer();
    let plane = build_spiral_odometer();
    let line_ev = evolve_exact(&line, init, &Window::interval(0, n as i64 - 1)?, steps)?;
    let plane_targets = Window::from_cells(spiral_prefix(n))?;
    let plane_ev = evolve_exact(&plane, &lift_to_spiral(init, n)?, &plane_targets, steps)?;
    // plane targets are sorted lexicographically; map each back to its index
    let column_of: Vec<usize> = (0..n)
        .map(|k| plane_targets.index_of(&spiral(k)).expect("prefix cell"))
        .collect();
    let mut first_divergence = None;
    'outer: for t in 0..=steps {
        let (a, b) = (line_ev.frame(t), plane_ev.frame(t));
        for k in 0..n as usize {
            if a[k] != b[column_of[k]] {
                first_divergence = Some((k as u64, t));
                break 'outer;
            }
        }
    }
    Ok(EquivalenceReport {
        n,
        steps,
        pass: first_divergence.is_none(),
        first_divergence,
    })
}

/// `k,x,y,rule,orientation` for `k = 0..n`.
pub fn spiral_csv(n: u64) -> String {
    let theta = build_spiral_odometer();
    let mut out = String::from("k,x,y,rule,orientation\n");
    for k in 0..n {
        let c = spiral(k);
        let rule = theta.rule_at(&c).expect("plane is the domain");
        let orient = orientation(k).map_or("none", Direction::name);
        writeln!(
            out,
            "{k},{},{},{},{orient}",
            c.coords()[0],
            c.coords()[1],
            rule.name()
        )
        .unwrap();
    }
    out
}
