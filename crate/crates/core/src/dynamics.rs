//! Finite probes for transitivity, recurrence and stability.
//!
//! Statements about the infinite systems are never decided here. Each probe
//! checks a finite fact that is exactly true (or exactly false) at the scale
//! it runs on: a witness re-verified by evolution, a cell-0 invariant, a
//! shift search within a radius, a bounded or unbounded dependency closure.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{
    evolve_exact, influence_closure, period_of, trace, EngineError, Influence, PeriodReport,
};
use crate::lattice::{
    cylinder_member, seeded_state, Cell, FillPolicy, LatticeError, Pattern, Window,
    WindowConfiguration,
};
use crate::rules::{
    shift_left, shift_right, toggle, DistributionKind, DistributionSpec, Domain, RuleDistribution,
    RuleSet,
};

pub const DEFAULT_CONE_CAP: usize = 1_000;
pub const DEFAULT_RECURRENCE_RADIUS: i64 = 100_000;
pub const DEFAULT_TRACE_BUDGET: usize = 100_000;

/// Right shift on the negative cells, the toggle at 0, left shift on the
/// positive cells, over two states.
pub fn build_example1() -> RuleDistribution {
    RuleDistribution::new(
        DistributionSpec {
            d: 1,
            domain: Domain::Full,
            kind: DistributionKind::Rays1d {
                left: "shift_right".into(),
                start: 0,
                explicit: vec!["toggle".into()],
                right: "shift_left".into(),
            },
        },
        RuleSet::new(2, vec![shift_right(2), toggle(), shift_left(2)]).expect("distinct names"),
    )
    .expect("valid on ℤ")
}

/// A configuration in the cylinder of `c` on `d` whose `r`-th image agrees
/// with `e` on `e`'s window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitivityWitness {
    pub r: usize,
    pub e_prime: Pattern,
    pub c: WindowConfiguration,
    pub d: Window,
    pub e: Pattern,
}

impl TransitivityWitness {
    /// Re-run the evolution from `e_prime` and check both membership
    /// conditions.
    pub fn verify(&self, theta: &RuleDistribution) -> Result<bool, EngineError> {
        let start =
            WindowConfiguration::new(self.e_prime.clone(), FillPolicy::Undefined, theta.q())?;
        let in_source = cylinder_member(&start, &self.c.restrict(&self.d)?)?;
        let ev = evolve_exact(theta, &start, self.e.domain(), self.r)?;
        Ok(in_source && ev.final_pattern() == self.e)
    }
}

/// Build the witness for the shift/toggle system with the smallest admissible `r`.
///
/// `c` must be known on `[-r, r]`; `e` must live on a box `[-m, m]`.
pub fn strong_transitivity_witness(
    c: &WindowConfiguration,
    e: &Pattern,
    d: &Window,
) -> Result<TransitivityWitness, EngineError> {
    let m = match e.domain() {
        Window::Box { lo, hi } if lo.dim() == 1 && lo.x() == -hi.x() => hi.x(),
        _ => {
            return Err(EngineError::Mismatch(
                "target pattern must live on a box [-m, m]".into(),
            ))
        }
    };
    if d.dim() != 1 || c.dim() != 1 {
        return Err(LatticeError::DimensionMismatch {
            expected: 1,
            found: d.dim().max(c.dim()),
        }
        .into());
    }
    let reach = d.iter().map(|x| x.x().abs()).max().unwrap_or(0);
    let origin = Cell::line(0);
    let want_odd = c.state_at(&origin)? != e.get(&origin).expect("0 ∈ [-m, m]");
    let mut r = reach.max(1);
    if (r % 2 == 1) != want_odd {
        r += 1;
    }
    if let Some(x) = (-r..=r).find(|&x| c.state_at(&Cell::line(x)).is_err()) {
        return Err(LatticeError::OutsideKnown(Cell::line(x)).into());
    }
    let span = Window::interval(-(m + r), m + r)?;
    let e_prime = Pattern::from_fn(span.clone(), |x| {
        let x = x.x();
        if x < -r {
            e.get(&Cell::line(x + r)).expect("inside [-m, m]")
        } else if x > r {
            e.get(&Cell::line(x - r)).expect("inside [-m, m]")
        } else {
            c.state_at(&Cell::line(x)).expect("checked above")
        }
    });
    Ok(TransitivityWitness {
        r: r as usize,
        e_prime,
        c: c.clone(),
        d: d.clone(),
        e: e.clone(),
    })
}

/// Witness for hash-random `c` and `e` on `[-m, m]` with `D = [-k, k]`.
pub fn random_witness(seed: u64, m: i64, k: i64) -> Result<TransitivityWitness, EngineError> {
    let window = Window::interval(-m, m)?;
    let c = Pattern::from_fn(window.clone(), |x| seeded_state(seed.wrapping_mul(2), x, 2));
    let e = Pattern::from_fn(window, |x| seeded_state(seed.wrapping_mul(2) + 1, x, 2));
    let c = WindowConfiguration::new(c, FillPolicy::Undefined, 2)?;
    strong_transitivity_witness(&c, &e, &Window::interval(-k, k)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub samples: usize,
    pub pass: bool,
    /// Seeds of the samples that broke the invariant.
    pub failures: Vec<u64>,
}

/// Two steps of the shift/toggle system leave cell 0 unchanged, for hash-random inits.
pub fn check_origin_invariant_h2(
    samples: usize,
    seed: u64,
) -> Result<InvariantReport, EngineError> {
    let theta = build_example1();
    let origin = Window::single(Cell::line(0));
    let outcomes: Vec<Result<Option<u64>, EngineError>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let ev = evolve_exact(&theta, &WindowConfiguration::seeded(1, s, 2)?, &origin, 2)?;
            Ok((ev.frame(2) != ev.frame(0)).then_some(s))
        })
        .collect();
    report(samples, outcomes)
}

fn report(
    samples: usize,
    outcomes: Vec<Result<Option<u64>, EngineError>>,
) -> Result<InvariantReport, EngineError> {
    let mut failures = Vec::new();
    for o in outcomes {
        failures.extend(o?);
    }
    Ok(InvariantReport {
        samples,
        pass: failures.is_empty(),
        failures,
    })
}

/// For hash-random pairs that agree at cell 0, the cell-0 traces of
/// the shift/toggle system coincide for `budget` steps; pairs that disagree at 0 have
/// complementary traces.
pub fn check_weak_mixing_obstruction(
    samples: usize,
    budget: usize,
    seed: u64,
) -> Result<InvariantReport, EngineError> {
    let theta = build_example1();
    let origin = Cell::line(0);
    let outcomes: Vec<Result<Option<u64>, EngineError>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let c = WindowConfiguration::seeded(1, 2 * s, 2)?;
            let other = WindowConfiguration::seeded(1, 2 * s + 1, 2)?;
            let c0 = c.state_at(&origin)?;
            let agree =
                other.with_overrides(&Pattern::uniform(Window::single(origin.clone()), c0))?;
            let differ =
                other.with_overrides(&Pattern::uniform(Window::single(origin.clone()), c0 ^ 1))?;
            let tc = trace(&theta, &c, &origin, budget)?.values;
            let ta = trace(&theta, &agree, &origin, budget)?.values;
            let td = trace(&theta, &differ, &origin, budget)?.values;
            let ok = tc == ta && tc.iter().zip(&td).all(|(a, b)| a ^ b == 1);
            Ok((!ok).then_some(s))
        })
        .collect();
    report(samples, outcomes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceOffsets {
    pub window: Window,
    pub offsets: Vec<Cell>,
    pub search_radius: i64,
}

/// Every nonzero `x` with max-norm at most `radius` such that `θ(y + x)`
/// and `θ(y)` compute the same function for all `y` in `d`. Offsets are
/// listed in lexicographic order.
pub fn recurrence_offsets(
    theta: &RuleDistribution,
    d: &Window,
    radius: i64,
) -> Result<RecurrenceOffsets, EngineError> {
    if d.dim() != theta.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: theta.dim(),
            found: d.dim(),
        }
        .into());
    }
    // rules are compared as functions, so identical tables share a class
    let rules = theta.rules().rules();
    let class: Vec<usize> = (0..rules.len())
        .map(|i| {
            (0..=i)
                .find(|&j| rules[j].same_function(&rules[i]))
                .expect("i matches itself")
        })
        .collect();
    let cells = d.cells();
    let base: Vec<usize> = cells
        .iter()
        .map(|y| theta.rule_index(y).map(|i| class[i]))
        .collect::<Result<_, _>>()?;
    let dim = theta.dim();
    let lo = Cell::new(&vec![-radius; dim])?;
    let hi = Cell::new(&vec![radius; dim])?;
    let offsets = Window::new_box(lo, hi)?
        .iter()
        .filter(|x| !x.is_origin())
        .filter_map(|x| {
            let matches = cells.iter().zip(&base).all(|(y, &b)| {
                y.checked_add(&x)
                    .ok()
                    .filter(|z| theta.in_domain(z))
                    .and_then(|z| theta.rule_index(&z).ok())
                    .is_some_and(|i| class[i] == b)
            });
            matches.then_some(x)
        })
        .collect();
    Ok(RecurrenceOffsets {
        window: d.clone(),
        offsets,
        search_radius: radius,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellPeriods {
    pub cell: Cell,
    /// One report per init, in input order.
    pub reports: Vec<PeriodReport>,
    /// The period shared by every init, if they agree.
    pub common_period: Option<usize>,
    /// Whether `common_period` equals that of the first probed cell.
    pub matches_first: bool,
}

/// Minimal periods of the traces at `cells` over `t_max` steps, per init.
pub fn trace_period_probe(
    theta: &RuleDistribution,
    cells: &[Cell],
    inits: &[WindowConfiguration],
    t_max: usize,
) -> Result<Vec<CellPeriods>, EngineError> {
    let targets = Window::from_cells(cells.iter().cloned())?;
    let per_init: Vec<Vec<PeriodReport>> = inits
        .par_iter()
        .map(|init| {
            let ev = evolve_exact(theta, init, &targets, t_max)?;
            Ok(cells
                .iter()
                .map(|c| period_of(&ev.column(targets.index_of(c).expect("target"))))
                .collect())
        })
        .collect::<Result<_, EngineError>>()?;
    let mut out: Vec<CellPeriods> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let reports: Vec<PeriodReport> = per_init.iter().map(|r| r[i]).collect();
            let first = reports.first().and_then(|r| r.minimal_period);
            let common_period = reports
                .iter()
                .all(|r| r.minimal_period == first)
                .then_some(first)
                .flatten();
            CellPeriods {
                cell: c.clone(),
                reports,
                common_period,
                matches_first: false,
            }
        })
        .collect();
    let reference = out.first().and_then(|c| c.common_period);
    for c in &mut out {
        c.matches_first = c.common_period.is_some() && c.common_period == reference;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeClass {
    pub cell: Cell,
    /// `Finite` certifies equicontinuity at the cell; `CapReached` decides
    /// nothing.
    pub influence: Influence,
}

impl ConeClass {
    pub fn verdict(&self) -> &'static str {
        match self.influence {
            Influence::Finite(_) => "finite",
            Influence::CapReached { .. } => "inconclusive",
        }
    }
}

pub fn cone_boundedness_probe(
    theta: &RuleDistribution,
    cells: &[Cell],
    cap: usize,
) -> Result<Vec<ConeClass>, EngineError> {
    cells
        .iter()
        .map(|c| {
            Ok(ConeClass {
                cell: c.clone(),
                influence: influence_closure(theta, c, cap)?,
            })
        })
        .collect()
}
