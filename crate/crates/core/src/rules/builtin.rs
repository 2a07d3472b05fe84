//! Constructors for every named rule used by the built-in automata.
//!
//! Each rule is tabulated from its behavioural description; the unit tests
//! pin the resulting tables against the literal transition tables row by row.

use crate::lattice::{Cell, State};
use crate::spiral::Direction;

use super::LocalRule;

fn line(offsets: &[i64]) -> Vec<Cell> {
    offsets.iter().map(|&x| Cell::line(x)).collect()
}

/// Odometer carry step for a cell with left neighbor `left`: keep when the
/// left neighbor is 0, otherwise swap `0 ↔ left`.
pub(crate) fn carry(left: State, own: State) -> State {
    match (left, own) {
        (0, s) => s,
        (a, 0) => a,
        (a, s) if s == a => 0,
        (_, s) => s,
    }
}

/// The odometer rule `f` on neighborhood `{-1, 0}`.
pub fn odometer_f() -> LocalRule {
    LocalRule::from_fn("f", 3, line(&[-1, 0]), |p| carry(p[0], p[1])).expect("valid table")
}

/// The three-cycle `g` on neighborhood `{0}`: 0 → 1 → 2 → 0.
pub fn cycle_g() -> LocalRule {
    LocalRule::from_fn("g", 3, line(&[0]), |p| (p[0] + 1) % 3).expect("valid table")
}

/// The candidate rule `h` on `{-1, 0}`: cycles when the left neighbor is 0,
/// otherwise behaves like `f`.
pub fn candidate_h() -> LocalRule {
    LocalRule::from_fn("h", 3, line(&[-1, 0]), |p| match p[0] {
        0 => (p[1] + 1) % 3,
        left => carry(left, p[1]),
    })
    .expect("valid table")
}

/// Copies the left neighbor, on `{-1, 0, 1}`.
pub fn shift_right(q: State) -> LocalRule {
    LocalRule::from_fn("shift_right", q, line(&[-1, 0, 1]), |p| p[0]).expect("valid table")
}

/// Copies the right neighbor, on `{-1, 0, 1}`.
pub fn shift_left(q: State) -> LocalRule {
    LocalRule::from_fn("shift_left", q, line(&[-1, 0, 1]), |p| p[2]).expect("valid table")
}

/// Binary toggle of the own state, on `{-1, 0, 1}`.
pub fn toggle() -> LocalRule {
    LocalRule::from_fn("toggle", 2, line(&[-1, 0, 1]), |p| p[1] ^ 1).expect("valid table")
}

/// Planar `f` whose "left" neighbor sits in direction `dir`; neighborhood
/// order is `[dir, (0,0)]`.
pub fn oriented_f(dir: Direction) -> LocalRule {
    let toward = dir.offset();
    LocalRule::from_fn(
        format!("f_{}", dir.name()),
        3,
        vec![toward, Cell::plane(0, 0)],
        |p| carry(p[0], p[1]),
    )
    .expect("valid table")
}

/// Planar `g` on `{(0,0)}`.
pub fn cycle_g_planar() -> LocalRule {
    LocalRule::from_fn("g", 3, vec![Cell::plane(0, 0)], |p| (p[0] + 1) % 3).expect("valid table")
}

#[cfg(test)]
mod tests {
    use super::*;

    // (left, self, next) rows of the odometer's non-origin rule
    const F_ROWS: [(State, State, State); 9] = [
        (0, 0, 0),
        (0, 1, 1),
        (0, 2, 2),
        (1, 0, 1),
        (1, 1, 0),
        (1, 2, 2),
        (2, 0, 2),
        (2, 1, 1),
        (2, 2, 0),
    ];

    const H_ROWS: [(State, State, State); 9] = [
        (0, 0, 1),
        (0, 1, 2),
        (0, 2, 0),
        (1, 0, 1),
        (1, 1, 0),
        (1, 2, 2),
        (2, 0, 2),
        (2, 1, 1),
        (2, 2, 0),
    ];

    #[test]
    fn f_matches_literal_table() {
        let f = odometer_f();
        for (left, own, next) in F_ROWS {
            assert_eq!(f.apply(&[left, own]).unwrap(), next, "row {left} {own}");
        }
        assert_eq!(f.table(), &[0, 1, 2, 1, 0, 2, 2, 1, 0]);
    }

    #[test]
    fn g_matches_literal_table() {
        let g = cycle_g();
        assert_eq!(g.table(), &[1, 2, 0]);
        assert_eq!(g.apply(&[2]).unwrap(), 0);
        assert_eq!(g.apply(&[1]).unwrap(), 2);
    }

    #[test]
    fn h_matches_literal_table() {
        let h = candidate_h();
        for (left, own, next) in H_ROWS {
            assert_eq!(h.apply(&[left, own]).unwrap(), next, "row {left} {own}");
        }
        assert_eq!(h.apply(&[0, 1]).unwrap(), 2);
        assert_eq!(h.apply(&[0, 2]).unwrap(), 0);
    }

    #[test]
    fn binary_rules() {
        for idx in 0..8u8 {
            let p = [idx >> 2 & 1, idx >> 1 & 1, idx & 1];
            assert_eq!(shift_right(2).apply(&p).unwrap(), p[0]);
            assert_eq!(shift_left(2).apply(&p).unwrap(), p[2]);
            assert_eq!(toggle().apply(&p).unwrap(), p[1] ^ 1);
        }
    }

    #[test]
    fn oriented_variants_share_the_table() {
        for dir in Direction::ALL {
            let r = oriented_f(dir);
            assert_eq!(r.table(), odometer_f().table());
            assert_eq!(r.neighborhood()[0], dir.offset());
        }
    }
}
