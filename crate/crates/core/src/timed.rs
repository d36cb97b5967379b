//! One-clock weighted timed Büchi automata and their corner-point
//! abstraction.
//!
//! Locations carry integer weight-rates, edges carry clock guards and
//! optional integer resets.  The corner-point abstraction turns the dense
//! semantics into a finite weighted Büchi automaton over (location,
//! region) pairs; crossing a full interval region costs `rate * width`
//! and is marked with a fresh color, so that requiring this color
//! infinitely often excludes Zeno runs.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{ColorSet, EnergyConfig, WeightedBuchiAutomaton, MAX_COLORS, MAX_WEIGHT};
use crate::decide::{buchi_energy, Decision};

/// Comparison operator of a clock constraint atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
}

impl CmpOp {
    pub fn is_strict(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Gt)
    }

    fn holds(self, value: u32, bound: u32) -> bool {
        match self {
            CmpOp::Le => value <= bound,
            CmpOp::Lt => value < bound,
            CmpOp::Ge => value >= bound,
            CmpOp::Gt => value > bound,
            CmpOp::Eq => value == bound,
        }
    }
}

/// One atom `x op k` over the automaton's single clock.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockAtom {
    pub op: CmpOp,
    pub k: u32,
}

/// Conjunction of atoms; empty means true.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClockConstraint {
    pub atoms: Vec<ClockAtom>,
}

impl ClockConstraint {
    pub fn always() -> Self {
        ClockConstraint { atoms: Vec::new() }
    }

    pub fn atom(op: CmpOp, k: u32) -> Self {
        ClockConstraint {
            atoms: vec![ClockAtom { op, k }],
        }
    }

    pub fn and(mut self, op: CmpOp, k: u32) -> Self {
        self.atoms.push(ClockAtom { op, k });
        self
    }

    /// Some atom gives an upper bound on the clock.
    pub fn bounds_clock(&self) -> bool {
        self.atoms
            .iter()
            .any(|a| matches!(a.op, CmpOp::Le | CmpOp::Lt | CmpOp::Eq))
    }

    pub fn has_strict_atom(&self) -> bool {
        self.atoms.iter().any(|a| a.op.is_strict())
    }
}

/// A location with its invariant and energy rate per time unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub name: String,
    pub invariant: ClockConstraint,
    pub rate: i64,
}

/// A guarded edge; `reset: None` leaves the clock unchanged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedEdge {
    pub src: usize,
    pub dst: usize,
    pub letter: Option<usize>,
    pub colors: ColorSet,
    pub guard: ClockConstraint,
    pub reset: Option<u32>,
}

/// A weighted timed Büchi automaton with a single clock.
#[derive(Clone, Debug)]
pub struct TimedAutomaton {
    pub alphabet_len: usize,
    pub color_count: usize,
    pub clock: String,
    pub locations: Vec<Location>,
    pub initial: usize,
    pub edges: Vec<TimedEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimedValidationIssue {
    #[error("initial location {initial} out of range ({location_count} locations)")]
    InitialOutOfRange {
        initial: usize,
        location_count: usize,
    },
    #[error("automaton declares {color_count} colors; the abstraction adds one and supports at most {MAX_COLORS}")]
    TooManyColors { color_count: usize },
    #[error("edge {edge}: location out of range ({src} -> {dst})")]
    LocationOutOfRange { edge: usize, src: usize, dst: usize },
    #[error("edge {edge}: letter id {letter} out of range (alphabet size {alphabet_len})")]
    LetterOutOfRange {
        edge: usize,
        letter: usize,
        alphabet_len: usize,
    },
    #[error("edge {edge}: color index out of range ({color_count} colors)")]
    ColorOutOfRange { edge: usize, color_count: usize },
    #[error(
        "location {location}: |rate| = |{rate}| too large for clock constants up to {horizon}"
    )]
    RateTooLarge {
        location: String,
        rate: i64,
        horizon: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedValidationReport {
    pub issues: Vec<TimedValidationIssue>,
}

impl fmt::Display for TimedValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid timed automaton:")?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for TimedValidationReport {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimedError {
    #[error(transparent)]
    Validation(#[from] TimedValidationReport),
    #[error("location {location} has no upper-bounded invariant; bound the clock first")]
    UnboundedClock { location: String },
}

impl TimedAutomaton {
    /// Largest constant in any invariant or guard; 0 if there are none.
    pub fn max_constant(&self) -> u32 {
        let invariants = self.locations.iter().flat_map(|l| l.invariant.atoms.iter());
        let guards = self.edges.iter().flat_map(|e| e.guard.atoms.iter());
        invariants.chain(guards).map(|a| a.k).max().unwrap_or(0)
    }

    fn max_reset(&self) -> u32 {
        self.edges.iter().filter_map(|e| e.reset).max().unwrap_or(0)
    }

    /// Largest clock value the abstraction may have to represent.
    fn horizon(&self) -> u32 {
        self.max_constant().max(self.max_reset()).saturating_add(2)
    }

    pub fn has_strict_constraint(&self) -> bool {
        self.locations.iter().any(|l| l.invariant.has_strict_atom())
            || self.edges.iter().any(|e| e.guard.has_strict_atom())
    }

    pub fn validate(&self) -> Result<(), TimedValidationReport> {
        let mut issues = Vec::new();
        if self.initial >= self.locations.len() {
            issues.push(TimedValidationIssue::InitialOutOfRange {
                initial: self.initial,
                location_count: self.locations.len(),
            });
        }
        if self.color_count + 1 > MAX_COLORS {
            issues.push(TimedValidationIssue::TooManyColors {
                color_count: self.color_count,
            });
        }
        let horizon = self.horizon();
        for location in &self.locations {
            if location.rate.abs().saturating_mul(i64::from(horizon)) > MAX_WEIGHT {
                issues.push(TimedValidationIssue::RateTooLarge {
                    location: location.name.clone(),
                    rate: location.rate,
                    horizon,
                });
            }
        }
        for (edge, e) in self.edges.iter().enumerate() {
            if e.src >= self.locations.len() || e.dst >= self.locations.len() {
                issues.push(TimedValidationIssue::LocationOutOfRange {
                    edge,
                    src: e.src,
                    dst: e.dst,
                });
            }
            if let Some(letter) = e.letter {
                if letter >= self.alphabet_len {
                    issues.push(TimedValidationIssue::LetterOutOfRange {
                        edge,
                        letter,
                        alphabet_len: self.alphabet_len,
                    });
                }
            }
            if e.colors.truncated(self.color_count.min(MAX_COLORS)) != e.colors {
                issues.push(TimedValidationIssue::ColorOutOfRange {
                    edge,
                    color_count: self.color_count,
                });
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(TimedValidationReport { issues })
        }
    }
}

/// Bound the clock from above: every location gains an unlettered,
/// uncolored self-loop resetting `x` from `N + 2` back to `N + 1`, and
/// every invariant is conjoined with `x <= N + 2`.
///
/// `N` is the largest constant in invariants and guards, widened to cover
/// reset targets so that resetting stays admissible.
pub fn bound_clocks(t: &TimedAutomaton) -> TimedAutomaton {
    let cap = t.max_constant().max(t.max_reset()).saturating_add(2);
    let mut out = t.clone();
    for location in &mut out.locations {
        location.invariant.atoms.push(ClockAtom {
            op: CmpOp::Le,
            k: cap,
        });
    }
    for q in 0..out.locations.len() {
        out.edges.push(TimedEdge {
            src: q,
            dst: q,
            letter: None,
            colors: ColorSet::EMPTY,
            guard: ClockConstraint::atom(CmpOp::Eq, cap),
            reset: Some(cap - 1),
        });
    }
    out
}

/// A corner-point region: a constant, or an interval between adjacent
/// constants that is open on exactly one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CornerPointRegion {
    /// `{a}`
    Point(u32),
    /// `[a, a')`
    RightOpen(u32, u32),
    /// `(a, a']`
    LeftOpen(u32, u32),
}

impl fmt::Display for CornerPointRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CornerPointRegion::Point(a) => write!(f, "{{{a}}}"),
            CornerPointRegion::RightOpen(a, b) => write!(f, "[{a},{b})"),
            CornerPointRegion::LeftOpen(a, b) => write!(f, "({a},{b}]"),
        }
    }
}

/// The ordered region list of `t`: for consecutive constants `a < a'`,
/// the point `{a}`, then `[a, a')`, then `(a, a']`, ending in the last
/// point.  Constants are all values in invariants, guards and resets,
/// together with 0 and the maximum constant.
pub fn corner_point_regions(t: &TimedAutomaton) -> Vec<CornerPointRegion> {
    let mut constants: BTreeSet<u32> = BTreeSet::new();
    constants.insert(0);
    constants.insert(t.max_constant());
    for location in &t.locations {
        constants.extend(location.invariant.atoms.iter().map(|a| a.k));
    }
    for edge in &t.edges {
        constants.extend(edge.guard.atoms.iter().map(|a| a.k));
        constants.extend(edge.reset);
    }
    let constants: Vec<u32> = constants.into_iter().collect();
    let mut regions = Vec::with_capacity(3 * constants.len() - 2);
    for (i, &a) in constants.iter().enumerate() {
        regions.push(CornerPointRegion::Point(a));
        if let Some(&next) = constants.get(i + 1) {
            regions.push(CornerPointRegion::RightOpen(a, next));
            regions.push(CornerPointRegion::LeftOpen(a, next));
        }
    }
    regions
}

/// Does every clock value in the region satisfy the constraint?
pub fn region_implies(region: CornerPointRegion, constraint: &ClockConstraint) -> bool {
    constraint.atoms.iter().all(|atom| match region {
        CornerPointRegion::Point(a) => atom.op.holds(a, atom.k),
        // Intervals contain non-integer values, so an equality can never
        // hold throughout; the other comparisons reduce to endpoint checks.
        CornerPointRegion::RightOpen(lo, hi) => match atom.op {
            CmpOp::Le | CmpOp::Lt => hi <= atom.k,
            CmpOp::Ge => lo >= atom.k,
            CmpOp::Gt => lo > atom.k,
            CmpOp::Eq => false,
        },
        CornerPointRegion::LeftOpen(lo, hi) => match atom.op {
            CmpOp::Le => hi <= atom.k,
            CmpOp::Lt => hi < atom.k,
            CmpOp::Ge | CmpOp::Gt => lo >= atom.k,
            CmpOp::Eq => false,
        },
    })
}

/// A state of the corner-point abstraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CpaState {
    pub location: usize,
    pub region: CornerPointRegion,
}

/// The abstraction together with the meaning of its states.
#[derive(Clone, Debug)]
pub struct CornerPointAbstraction {
    pub automaton: WeightedBuchiAutomaton,
    /// Indexed by automaton state id.
    pub states: Vec<CpaState>,
}

impl CornerPointAbstraction {
    /// Index of the fresh color marking time-elapsing transitions.
    pub fn zeno_color(&self) -> usize {
        self.automaton.color_count - 1
    }
}

/// Build the corner-point abstraction of a bounded one-clock automaton.
///
/// States are the admissible (location, region) pairs reachable from
/// `(initial, {0})`; delays walk the region list with weight
/// `rate * width` on full-interval steps, which carry the fresh Zeno
/// color; switches follow guard-implied edges with weight 0.
///
/// Errors if some location invariant puts no upper bound on the clock;
/// run [`bound_clocks`] first in that case.
pub fn corner_point_abstraction(t: &TimedAutomaton) -> Result<CornerPointAbstraction, TimedError> {
    t.validate()?;
    for location in &t.locations {
        if !location.invariant.bounds_clock() {
            return Err(TimedError::UnboundedClock {
                location: location.name.clone(),
            });
        }
    }

    let builder = CpaBuilder {
        t,
        regions: corner_point_regions(t),
        automaton: WeightedBuchiAutomaton::new(t.alphabet_len, t.color_count + 1, 0, 0),
        states: Vec::new(),
        ids: HashMap::new(),
        queue: VecDeque::new(),
    };
    Ok(builder.build())
}

struct CpaBuilder<'a> {
    t: &'a TimedAutomaton,
    regions: Vec<CornerPointRegion>,
    automaton: WeightedBuchiAutomaton,
    states: Vec<CpaState>,
    ids: HashMap<(usize, usize), usize>,
    queue: VecDeque<(usize, usize)>,
}

impl CpaBuilder<'_> {
    fn intern(&mut self, location: usize, region_index: usize) -> usize {
        if let Some(&id) = self.ids.get(&(location, region_index)) {
            return id;
        }
        let id = self.states.len();
        self.ids.insert((location, region_index), id);
        self.states.push(CpaState {
            location,
            region: self.regions[region_index],
        });
        self.automaton.state_count += 1;
        self.queue.push_back((location, region_index));
        id
    }

    fn build(mut self) -> CornerPointAbstraction {
        let t = self.t;
        let zeno_color = t.color_count;
        let point_index: HashMap<u32, usize> = self
            .regions
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r {
                CornerPointRegion::Point(a) => Some((*a, i)),
                _ => None,
            })
            .collect();

        // The initial state is materialized even if its invariant fails;
        // it then simply has no behavior.
        self.intern(t.initial, 0);
        let initial_admissible = region_implies(self.regions[0], &t.locations[t.initial].invariant);

        while let Some((location, region_index)) = self.queue.pop_front() {
            if (location, region_index) == (t.initial, 0) && !initial_admissible {
                continue;
            }
            let src_id = self.ids[&(location, region_index)];

            // Delay step along the region list.
            let delay = match self.regions[region_index] {
                CornerPointRegion::Point(_) if region_index + 1 < self.regions.len() => {
                    Some((region_index + 1, 0i64, ColorSet::EMPTY))
                }
                CornerPointRegion::RightOpen(lo, hi) => Some((
                    region_index + 1,
                    t.locations[location].rate * i64::from(hi - lo),
                    ColorSet::singleton(zeno_color),
                )),
                CornerPointRegion::LeftOpen(..) => Some((region_index + 1, 0, ColorSet::EMPTY)),
                _ => None,
            };
            if let Some((next_region, weight, colors)) = delay {
                if region_implies(self.regions[next_region], &t.locations[location].invariant) {
                    let dst_id = self.intern(location, next_region);
                    self.automaton
                        .add_transition(src_id, dst_id, weight, colors);
                }
            }

            // Switches.
            for edge in &t.edges {
                if edge.src != location || !region_implies(self.regions[region_index], &edge.guard)
                {
                    continue;
                }
                let dst_region = match edge.reset {
                    None => region_index,
                    Some(value) => point_index[&value],
                };
                if region_implies(self.regions[dst_region], &t.locations[edge.dst].invariant) {
                    let dst_id = self.intern(edge.dst, dst_region);
                    self.automaton.add_labeled_transition(
                        src_id,
                        dst_id,
                        edge.letter,
                        0,
                        edge.colors,
                    );
                }
            }
        }

        self.automaton.initial = 0;
        CornerPointAbstraction {
            automaton: self.automaton,
            states: self.states,
        }
    }
}

/// Decide the energy Büchi problem for a one-clock automaton: bound the
/// clock, abstract, and decide on the abstraction with the Zeno color
/// added to the acceptance obligation (unless `allow_zeno`).
///
/// With strict constraints in `t` the returned decision carries the
/// infimum caveat: a positive verdict is then formally about every
/// initial credit strictly above the given one.
pub fn check_timed(
    t: &TimedAutomaton,
    cfg: EnergyConfig,
    allow_zeno: bool,
) -> Result<Decision, TimedError> {
    let bounded = bound_clocks(t);
    let cpa = corner_point_abstraction(&bounded)?;
    let target = if allow_zeno {
        cpa.automaton.truncate_colors(t.color_count)
    } else {
        cpa.automaton
    };
    let mut decision =
        buchi_energy(&target, cfg).expect("corner-point abstraction is a valid automaton");
    decision.infimum_caveat = t.has_strict_constraint();
    Ok(decision)
}
