//! Energy Büchi problems: does a weighted Büchi automaton admit an
//! accepting run whose accumulated energy always stays within `[0, b]`
//! when started with credit `c`?
//!
//! The crate decides this for finite weighted Büchi automata
//! ([`buchi_energy`]) and, through the corner-point abstraction, for
//! weighted timed Büchi automata with one clock ([`check_timed`]).
//! Feasible instances come with a verified lasso witness.

pub mod automaton;
pub mod decide;
pub mod degeneralize;
pub mod energy;
pub mod format;
pub mod oracle;
pub mod timed;

pub use automaton::{
    accumulate, is_feasible, ColorSet, EnergyConfig, Lasso, Run, Transition, WeightedBuchiAutomaton,
};
pub use decide::{buchi_energy, verify_witness, BackEdgeCheck, Decision};
pub use degeneralize::{degeneralize_full, degeneralize_scc, find_sccs, is_accepting};
pub use energy::{find_max_e, EnergyGraph, EnergyMap, MaxEnergy};
pub use format::{emit_wba, emit_wtba, parse_wba, parse_wtba};
pub use oracle::{brute_force, brute_force_max_e};
pub use timed::{
    bound_clocks, check_timed, corner_point_abstraction, corner_point_regions, region_implies,
    CornerPointRegion, TimedAutomaton,
};
