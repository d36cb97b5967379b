//! Maximal attainable energy per state under `(c, b)`-semantics.
//!
//! [`find_max_e`] computes, for every state, the supremum over all feasible
//! runs from the source of the accumulated energy, by relaxation rounds
//! interleaved with pumping of energy-positive loops.  Pumping assigns the
//! fixed point of a detected loop from above instead of iterating gains of
//! one unit at a time, which keeps the amount of work independent of the
//! weak upper bound.
//!
//! [`max_e_with_paths`] is a deliberately plain relaxation to the same
//! fixed point that records every accepted update, so that an explicit
//! feasible run realizing any reached energy can be read back.  Runs
//! realizing pumped energies repeat their loops up to `b` times, so this
//! variant (and any witness built from it) does work proportional to the
//! bound; it is only used when a witness is requested.

use crate::automaton::{EnergyConfig, WeightedBuchiAutomaton};

/// A weighted edge of a plain graph view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: i64,
}

/// Graph view consumed by the energy fixed point: states `0..state_count`
/// and a flat edge list.  Edge indices are the caller's handles (for an
/// automaton view they equal transition ids).
#[derive(Debug, Clone)]
pub struct EnergyGraph {
    pub state_count: usize,
    pub edges: Vec<EnergyEdge>,
}

impl EnergyGraph {
    /// Colors and letters dropped, transition ids preserved as edge indices.
    pub fn of_automaton(a: &WeightedBuchiAutomaton) -> Self {
        EnergyGraph {
            state_count: a.state_count,
            edges: a
                .transitions
                .iter()
                .map(|t| EnergyEdge {
                    src: t.src,
                    dst: t.dst,
                    weight: t.weight,
                })
                .collect(),
        }
    }
}

/// Per-state maximal attainable energy; `None` is unreachable (-oo).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyMap(Vec<Option<i64>>);

impl EnergyMap {
    pub fn get(&self, state: usize) -> Option<i64> {
        self.0[state]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<i64>> + '_ {
        self.0.iter().copied()
    }
}

/// Best incoming edge per state, as chosen by the relaxation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredecessorMap(Vec<Option<usize>>);

impl PredecessorMap {
    pub fn get(&self, state: usize) -> Option<usize> {
        self.0[state]
    }
}

/// Operation counters; used to check that the amount of work does not
/// depend on the weak upper bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Edge relaxation attempts, including pump traversal steps.
    pub relaxations: u64,
    /// Number of loops pumped.
    pub pump_loops: u64,
}

/// Result of [`find_max_e`].
#[derive(Debug, Clone)]
pub struct MaxEnergy {
    pub energy: EnergyMap,
    pub pred: PredecessorMap,
    pub stats: SearchStats,
}

/// Compute the maximal attainable energy of every state for runs from
/// `source` starting at `min(b, c)`, together with a predecessor map.
///
/// `energy.get(s)` is `None` iff no feasible run reaches `s`.
pub fn find_max_e(graph: &EnergyGraph, source: usize, cfg: EnergyConfig) -> MaxEnergy {
    assert!(source < graph.state_count, "source state out of range");
    let mut engine = Engine::new(graph, cfg.bound_i64());
    engine.energy[source] = Some(cfg.start_energy());
    loop {
        if !engine.mod_bf() {
            break;
        }
        engine.pump_all();
    }
    MaxEnergy {
        energy: EnergyMap(engine.energy),
        pred: PredecessorMap(engine.pred),
        stats: engine.stats,
    }
}

struct Engine<'g> {
    graph: &'g EnergyGraph,
    bound: i64,
    energy: Vec<Option<i64>>,
    pred: Vec<Option<usize>>,
    /// States whose energy changed since the last pump, in update order.
    dirty: Vec<usize>,
    in_dirty: Vec<bool>,
    /// Walk marks for pump_all; generation-stamped to avoid clearing.
    mark: Vec<u64>,
    walk_counter: u64,
    stats: SearchStats,
}

impl<'g> Engine<'g> {
    fn new(graph: &'g EnergyGraph, bound: i64) -> Self {
        let n = graph.state_count;
        Engine {
            graph,
            bound,
            energy: vec![None; n],
            pred: vec![None; n],
            dirty: Vec::new(),
            in_dirty: vec![false; n],
            mark: vec![0; n],
            walk_counter: 0,
            stats: SearchStats::default(),
        }
    }

    fn candidate(&self, edge: &EnergyEdge) -> Option<i64> {
        self.energy[edge.src].map(|e| (e + edge.weight).min(self.bound))
    }

    /// Relaxation rounds; a round with no accepted update ends the call
    /// early.  Returns whether any update was accepted.
    fn mod_bf(&mut self) -> bool {
        let rounds = (self.graph.state_count.saturating_sub(1)).max(1);
        let mut changed_any = false;
        for _ in 0..rounds {
            let mut changed_round = false;
            for (id, edge) in self.graph.edges.iter().enumerate() {
                self.stats.relaxations += 1;
                let candidate = self.candidate(edge);
                let Some(e) = candidate else { continue };
                if e < 0 {
                    continue;
                }
                if self.energy[edge.dst].is_none_or(|old| old < e) {
                    self.energy[edge.dst] = Some(e);
                    self.pred[edge.dst] = Some(id);
                    if !self.in_dirty[edge.dst] {
                        self.in_dirty[edge.dst] = true;
                        self.dirty.push(edge.dst);
                    }
                    changed_round = true;
                }
            }
            changed_any |= changed_round;
            if !changed_round {
                break;
            }
        }
        changed_any
    }

    /// Pump every energy-positive loop currently induced by the
    /// predecessor map and reachable backwards from a changed state.
    fn pump_all(&mut self) {
        let dirty = std::mem::take(&mut self.dirty);
        let session_start = self.walk_counter + 1;
        for s in dirty {
            self.in_dirty[s] = false;
            let Some(pred_edge) = self.pred[s] else {
                continue;
            };
            let edge = &self.graph.edges[pred_edge];
            // Only chains that can still improve lead to a pumpable loop.
            if self.candidate(edge) <= self.energy[s] {
                continue;
            }
            self.walk_counter += 1;
            let walk = self.walk_counter;
            let mut cur = s;
            let anchor = loop {
                if self.mark[cur] == walk {
                    break Some(cur); // closed a loop within this walk
                }
                if self.mark[cur] >= session_start {
                    break None; // joins a chain already walked this round
                }
                self.mark[cur] = walk;
                match self.pred[cur] {
                    Some(t) => cur = self.graph.edges[t].src,
                    None => break None,
                }
            };
            if let Some(anchor) = anchor {
                self.pump_loop(anchor);
            }
        }
    }

    /// Assign the maximal energies on the predecessor loop through
    /// `anchor` by propagating from the weak upper bound.
    fn pump_loop(&mut self, anchor: usize) {
        // Collect the loop backwards, then process it in forward order
        // starting at the anchor so every state's predecessor is updated
        // before the state itself.
        let mut backward = vec![anchor];
        let mut total_weight =
            self.graph.edges[self.pred[anchor].expect("loop state has a predecessor")].weight;
        let mut cur = self.graph.edges[self.pred[anchor].unwrap()].src;
        while cur != anchor {
            let t = self.pred[cur].expect("loop state has a predecessor");
            backward.push(cur);
            total_weight += self.graph.edges[t].weight;
            cur = self.graph.edges[t].src;
        }
        // Predecessor loops arise from strict improvements, so they gain
        // energy; a non-positive loop would not be safe to pump.
        debug_assert!(
            total_weight > 0,
            "predecessor loop with net weight {total_weight}"
        );
        if total_weight <= 0 {
            return;
        }
        self.stats.pump_loops += 1;

        let mut forward = backward;
        forward[1..].reverse();

        for &s in &forward {
            self.energy[s] = None; // marker: not yet assigned in this pump
        }
        let before_anchor = self.graph.edges[self.pred[anchor].unwrap()].src;
        self.energy[before_anchor] = Some(self.bound);

        let mut traversals = 0;
        'pump: loop {
            traversals += 1;
            assert!(
                traversals <= 2,
                "loop pump did not stabilize within two traversals"
            );
            for &s in &forward {
                let t = self.pred[s].unwrap();
                let edge = &self.graph.edges[t];
                self.stats.relaxations += 1;
                let e = self.candidate(edge);
                debug_assert!(e.is_some_and(|v| v >= 0));
                if e == self.energy[s] {
                    break 'pump; // fixed point reached
                }
                self.energy[s] = e;
            }
        }
    }
}

/// One accepted relaxation in the logged search.
#[derive(Debug, Clone, Copy)]
struct UpdateRecord {
    edge: usize,
    /// Record that justified the source energy; `None` means the initial
    /// credit at the source state.
    prev: Option<usize>,
}

/// Fixed point plus enough history to rebuild a realizing run per state.
#[derive(Debug, Clone)]
pub struct PathTable {
    energy: Vec<Option<i64>>,
    latest: Vec<Option<usize>>,
    records: Vec<UpdateRecord>,
}

impl PathTable {
    pub fn energy(&self, state: usize) -> Option<i64> {
        self.energy[state]
    }

    pub fn energies(&self) -> &[Option<i64>] {
        &self.energy
    }

    /// Edge sequence of a feasible run from the source to `state` whose
    /// final energy equals `self.energy(state)`.  `None` if unreached;
    /// the empty path if `state` is the source at its initial credit.
    pub fn path_to(&self, state: usize) -> Option<Vec<usize>> {
        self.energy[state]?;
        let mut edges = Vec::new();
        let mut record = self.latest[state];
        while let Some(idx) = record {
            edges.push(self.records[idx].edge);
            record = self.records[idx].prev;
        }
        edges.reverse();
        Some(edges)
    }
}

/// Plain relaxation to the same fixed point as [`find_max_e`], recording
/// every accepted update.  Work grows with the bound on graphs that gain
/// energy through loops.
pub fn max_e_with_paths(graph: &EnergyGraph, source: usize, cfg: EnergyConfig) -> PathTable {
    assert!(source < graph.state_count, "source state out of range");
    let bound = cfg.bound_i64();
    let n = graph.state_count;
    let mut table = PathTable {
        energy: vec![None; n],
        latest: vec![None; n],
        records: Vec::new(),
    };
    table.energy[source] = Some(cfg.start_energy());
    loop {
        let mut changed = false;
        for (id, edge) in graph.edges.iter().enumerate() {
            let Some(src_e) = table.energy[edge.src] else {
                continue;
            };
            let e = (src_e + edge.weight).min(bound);
            if e < 0 {
                continue;
            }
            if table.energy[edge.dst].is_none_or(|old| old < e) {
                table.energy[edge.dst] = Some(e);
                table.records.push(UpdateRecord {
                    edge: id,
                    prev: table.latest[edge.src],
                });
                table.latest[edge.dst] = Some(table.records.len() - 1);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    table
}
