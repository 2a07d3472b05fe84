//! Text exports: trace CSV and ASCII PGM space-time diagrams.

use std::fmt::Write;

use super::Trace;
use crate::lattice::State;

/// `t,state` header followed by one line per time step.
pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("t,state\n");
    for (t, s) in trace.values.iter().enumerate() {
        writeln!(out, "{t},{s}").unwrap();
    }
    out
}

/// Plain (P2) PGM with one row per time step and one column per cell. Gray
/// level of state `s` is `⌊255·s/(q−1)⌋`.
pub fn pgm(frames: &[State], width: usize, q: State) -> String {
    assert!(width > 0 && frames.len().is_multiple_of(width));
    let height = frames.len() / width;
    let mut out = format!("P2\n{width} {height}\n255\n");
    let denom = q.saturating_sub(1) as u32;
    for row in frames.chunks(width) {
        let line: Vec<String> = row
            .iter()
            .map(|&s| (255 * s as u32).checked_div(denom).unwrap_or(0).to_string())
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Cell;

    #[test]
    fn csv_layout() {
        let tr = Trace {
            cell: Cell::line(0),
            values: vec![0, 1, 2],
            source: String::new(),
        };
        assert_eq!(trace_csv(&tr), "t,state\n0,0\n1,1\n2,2\n");
    }

    #[test]
    fn pgm_layout() {
        assert_eq!(
            pgm(&[0, 1, 2, 2, 1, 0], 3, 3),
            "P2\n3 2\n255\n0 127 255\n255 127 0\n"
        );
        assert_eq!(pgm(&[0, 0], 2, 3), "P2\n2 1\n255\n0 0\n");
        assert_eq!(pgm(&[0, 1], 2, 2), "P2\n2 1\n255\n0 255\n");
    }
}
