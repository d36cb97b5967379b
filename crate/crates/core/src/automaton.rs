//! Finite weighted Büchi automata and the energy semantics of their runs.
//!
//! Transitions carry an optional letter, a set of colors and an integer
//! weight.  A run accumulates weights starting from `min(bound, credit)`;
//! gains above the weak upper bound are discarded, and the run is feasible
//! as long as the accumulated energy never drops below zero.
//!
//! Overflow policy: weights are 64-bit integers and [`validate`] rejects
//! automata with `|weight| > MAX_WEIGHT` (2^32).  Credits and bounds are
//! 32-bit naturals.  Under these limits every energy computed by the
//! algorithms in this crate fits comfortably in an `i64`; the raw
//! [`accumulate`] helper additionally saturates, so it stays well defined
//! even for adversarially long unvalidated weight sequences.
//!
//! [`validate`]: WeightedBuchiAutomaton::validate

use serde::{Deserialize, Serialize};
use std::fmt;

/// Index of a state in a [`WeightedBuchiAutomaton`].
pub type StateId = usize;
/// Index of a transition in a [`WeightedBuchiAutomaton`].
pub type TransitionId = usize;

/// Largest admissible weight magnitude on a transition.
pub const MAX_WEIGHT: i64 = 1 << 32;
/// Largest supported number of colors (colors are kept in a 64-bit mask).
pub const MAX_COLORS: usize = 64;

/// A set of color indices, stored as a bitmask over `0..k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ColorSet(u64);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn singleton(color: usize) -> Self {
        debug_assert!(color < MAX_COLORS);
        ColorSet(1 << color)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut set = ColorSet::EMPTY;
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// All colors `0..k`.
    pub fn all(k: usize) -> Self {
        debug_assert!(k <= MAX_COLORS);
        if k == 0 {
            ColorSet::EMPTY
        } else if k == MAX_COLORS {
            ColorSet(u64::MAX)
        } else {
            ColorSet((1u64 << k) - 1)
        }
    }

    pub fn insert(&mut self, color: usize) {
        debug_assert!(color < MAX_COLORS);
        self.0 |= 1 << color;
    }

    pub fn contains(&self, color: usize) -> bool {
        color < MAX_COLORS && self.0 & (1 << color) != 0
    }

    pub fn union(&self, other: ColorSet) -> ColorSet {
        ColorSet(self.0 | other.0)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// True iff this set contains every color in `0..k`.
    pub fn contains_all(&self, k: usize) -> bool {
        self.0 & ColorSet::all(k).0 == ColorSet::all(k).0
    }

    /// Keep only the colors `0..k`.
    pub fn truncated(&self, k: usize) -> ColorSet {
        ColorSet(self.0 & ColorSet::all(k).0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_COLORS).filter(move |&i| self.contains(i))
    }
}

impl fmt::Debug for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A weighted, colored transition between two states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub src: StateId,
    pub dst: StateId,
    /// Optional symbol id; the decision problem ignores letters.
    pub letter: Option<usize>,
    pub colors: ColorSet,
    pub weight: i64,
}

/// A finite weighted Büchi automaton with transition-based generalized
/// acceptance: a run is accepted iff every color appears on infinitely
/// many of its transitions.
#[derive(Clone, Debug)]
pub struct WeightedBuchiAutomaton {
    pub alphabet_len: usize,
    pub color_count: usize,
    pub state_count: usize,
    pub initial: StateId,
    pub transitions: Vec<Transition>,
}

impl WeightedBuchiAutomaton {
    pub fn new(
        alphabet_len: usize,
        color_count: usize,
        state_count: usize,
        initial: StateId,
    ) -> Self {
        WeightedBuchiAutomaton {
            alphabet_len,
            color_count,
            state_count,
            initial,
            transitions: Vec::new(),
        }
    }

    /// Append a transition and return its id.
    pub fn add_transition(
        &mut self,
        src: StateId,
        dst: StateId,
        weight: i64,
        colors: ColorSet,
    ) -> TransitionId {
        self.add_labeled_transition(src, dst, None, weight, colors)
    }

    pub fn add_labeled_transition(
        &mut self,
        src: StateId,
        dst: StateId,
        letter: Option<usize>,
        weight: i64,
        colors: ColorSet,
    ) -> TransitionId {
        let id = self.transitions.len();
        self.transitions.push(Transition {
            src,
            dst,
            letter,
            colors,
            weight,
        });
        id
    }

    /// Check well-formedness: state and letter ids in range, color bits
    /// below the color count, weights within the overflow limit.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut issues = Vec::new();
        if self.initial >= self.state_count {
            issues.push(ValidationIssue::InitialOutOfRange {
                initial: self.initial,
                state_count: self.state_count,
            });
        }
        if self.color_count > MAX_COLORS {
            issues.push(ValidationIssue::TooManyColors {
                color_count: self.color_count,
            });
        }
        for (index, t) in self.transitions.iter().enumerate() {
            if t.src >= self.state_count || t.dst >= self.state_count {
                issues.push(ValidationIssue::StateOutOfRange {
                    transition: index,
                    src: t.src,
                    dst: t.dst,
                    state_count: self.state_count,
                });
            }
            if let Some(letter) = t.letter {
                if letter >= self.alphabet_len {
                    issues.push(ValidationIssue::LetterOutOfRange {
                        transition: index,
                        letter,
                        alphabet_len: self.alphabet_len,
                    });
                }
            }
            if t.colors.truncated(self.color_count.min(MAX_COLORS)) != t.colors {
                issues.push(ValidationIssue::ColorOutOfRange {
                    transition: index,
                    color_count: self.color_count,
                });
            }
            if t.weight.abs() > MAX_WEIGHT {
                issues.push(ValidationIssue::WeightTooLarge {
                    transition: index,
                    weight: t.weight,
                });
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { issues })
        }
    }

    /// Copy of the automaton keeping only the colors `0..k`.
    pub fn truncate_colors(&self, k: usize) -> WeightedBuchiAutomaton {
        let mut out = self.clone();
        out.color_count = k;
        for t in &mut out.transitions {
            t.colors = t.colors.truncated(k);
        }
        out
    }
}

/// A single well-formedness violation, annotated with the transition index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationIssue {
    #[error("initial state {initial} out of range (automaton has {state_count} states)")]
    InitialOutOfRange {
        initial: StateId,
        state_count: usize,
    },
    #[error("automaton declares {color_count} colors, more than the supported {MAX_COLORS}")]
    TooManyColors { color_count: usize },
    #[error("transition {transition}: state out of range ({src} -> {dst}, {state_count} states)")]
    StateOutOfRange {
        transition: usize,
        src: StateId,
        dst: StateId,
        state_count: usize,
    },
    #[error(
        "transition {transition}: letter id {letter} out of range (alphabet size {alphabet_len})"
    )]
    LetterOutOfRange {
        transition: usize,
        letter: usize,
        alphabet_len: usize,
    },
    #[error(
        "transition {transition}: color index out of range (automaton has {color_count} colors)"
    )]
    ColorOutOfRange {
        transition: usize,
        color_count: usize,
    },
    #[error("transition {transition}: |weight| = |{weight}| exceeds the supported maximum")]
    WeightTooLarge { transition: usize, weight: i64 },
}

/// All violations found by [`WeightedBuchiAutomaton::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid automaton:")?;
        for issue in &self.issues {
            write!(f, "\n  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Initial credit `c` and weak upper bound `b`.
///
/// Both are naturals; `c > b` is allowed, the first accumulated value is
/// `min(b, c)` either way.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub credit: u32,
    pub bound: u32,
}

impl EnergyConfig {
    pub fn new(credit: u32, bound: u32) -> Self {
        EnergyConfig { credit, bound }
    }

    /// Energy at the start of any run: `min(b, c)`.
    pub fn start_energy(&self) -> i64 {
        i64::from(self.credit.min(self.bound))
    }

    pub fn bound_i64(&self) -> i64 {
        i64::from(self.bound)
    }
}

/// Accumulated energies along a weight sequence: `e_1 = min(b, c)` and
/// `e_{i+1} = min(b, e_i + w_i)`.
///
/// Returns `m + 1` values for `m` weights.  Values may go negative;
/// feasibility is a separate check, only the upper bound clamps.
pub fn accumulate(weights: &[i64], cfg: EnergyConfig) -> Vec<i64> {
    let bound = cfg.bound_i64();
    let mut energies = Vec::with_capacity(weights.len() + 1);
    let mut e = cfg.start_energy();
    energies.push(e);
    for &w in weights {
        e = e.saturating_add(w).min(bound);
        energies.push(e);
    }
    energies
}

/// True iff every accumulated energy along `weights` is non-negative.
pub fn is_feasible(weights: &[i64], cfg: EnergyConfig) -> bool {
    let bound = cfg.bound_i64();
    let mut e = cfg.start_energy();
    if e < 0 {
        return false;
    }
    for &w in weights {
        e = e.saturating_add(w).min(bound);
        if e < 0 {
            return false;
        }
    }
    true
}

/// A finite run, stored as a sequence of transition ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Run(pub Vec<TransitionId>);

impl Run {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self, a: &WeightedBuchiAutomaton) -> Vec<i64> {
        self.0.iter().map(|&t| a.transitions[t].weight).collect()
    }

    pub fn first_state(&self, a: &WeightedBuchiAutomaton) -> Option<StateId> {
        self.0.first().map(|&t| a.transitions[t].src)
    }

    pub fn last_state(&self, a: &WeightedBuchiAutomaton) -> Option<StateId> {
        self.0.last().map(|&t| a.transitions[t].dst)
    }

    /// Consecutive transitions chain and the run starts at `start`.
    pub fn validate_chain(
        &self,
        a: &WeightedBuchiAutomaton,
        start: StateId,
    ) -> Result<(), RunError> {
        let mut at = start;
        for &id in &self.0 {
            let t = a
                .transitions
                .get(id)
                .ok_or(RunError::UnknownTransition { id })?;
            if t.src != at {
                return Err(RunError::BrokenChain {
                    id,
                    expected_src: at,
                    actual_src: t.src,
                });
            }
            at = t.dst;
        }
        Ok(())
    }

    pub fn colors(&self, a: &WeightedBuchiAutomaton) -> ColorSet {
        self.0.iter().fold(ColorSet::EMPTY, |acc, &t| {
            acc.union(a.transitions[t].colors)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("run references unknown transition {id}")]
    UnknownTransition { id: TransitionId },
    #[error("transition {id} starts at {actual_src} but the run is at {expected_src}")]
    BrokenChain {
        id: TransitionId,
        expected_src: StateId,
        actual_src: StateId,
    },
    #[error("lasso cycle is empty")]
    EmptyCycle,
    #[error("cycle starts at {cycle_start} but the prefix ends at {prefix_end}")]
    DisconnectedCycle {
        prefix_end: StateId,
        cycle_start: StateId,
    },
    #[error("cycle ends at {cycle_end} instead of closing at {cycle_start}")]
    OpenCycle {
        cycle_start: StateId,
        cycle_end: StateId,
    },
}

/// An ultimately periodic run: a finite prefix followed by a cycle that is
/// repeated forever.  This is the witness object for feasible instances.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Run,
    pub cycle: Run,
}

impl Lasso {
    /// Check chaining from the initial state, that the cycle is nonempty,
    /// starts where the prefix ends and closes on itself.
    pub fn validate(&self, a: &WeightedBuchiAutomaton) -> Result<(), RunError> {
        self.prefix.validate_chain(a, a.initial)?;
        if self.cycle.is_empty() {
            return Err(RunError::EmptyCycle);
        }
        let anchor = self.prefix.last_state(a).unwrap_or(a.initial);
        let cycle_start = self.cycle.first_state(a).unwrap();
        if cycle_start != anchor {
            return Err(RunError::DisconnectedCycle {
                prefix_end: anchor,
                cycle_start,
            });
        }
        self.cycle.validate_chain(a, anchor)?;
        let cycle_end = self.cycle.last_state(a).unwrap();
        if cycle_end != anchor {
            return Err(RunError::OpenCycle {
                cycle_start: anchor,
                cycle_end,
            });
        }
        Ok(())
    }

    /// Colors seen on the cycle.
    pub fn cycle_colors(&self, a: &WeightedBuchiAutomaton) -> ColorSet {
        self.cycle.colors(a)
    }

    /// Weights of prefix followed by `laps` repetitions of the cycle.
    pub fn weights_with_laps(&self, a: &WeightedBuchiAutomaton, laps: usize) -> Vec<i64> {
        let mut w = self.prefix.weights(a);
        let cycle = self.cycle.weights(a);
        for _ in 0..laps {
            w.extend_from_slice(&cycle);
        }
        w
    }
}
