//! Strongly connected components and the counting degeneralization.
//!
//! The decision procedure degeneralizes each Büchi accepting SCC on its
//! own: the SCC is copied once per color into levels `1..=k`, transitions
//! carrying the level's color advance to the next level, and the level
//! `k -> 1` transitions (the back-edges) are the only accepting ones.
//! A whole-automaton variant of the same construction is provided for
//! cross-checking.

use crate::automaton::{ColorSet, StateId, TransitionId, WeightedBuchiAutomaton};
use crate::energy::{EnergyEdge, EnergyGraph};

/// A strongly connected component of the underlying unweighted graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scc {
    /// Member states, ascending.
    pub members: Vec<StateId>,
    /// Transitions with both endpoints in the component, ascending.
    pub internal_transitions: Vec<TransitionId>,
    /// Union of the colors on the internal transitions.
    pub color_union: ColorSet,
    /// Single state without a self-loop.
    pub trivial: bool,
}

/// Partition the states into maximal SCCs, ordered by smallest member id.
pub fn find_sccs(a: &WeightedBuchiAutomaton) -> Vec<Scc> {
    let n = a.state_count;
    let mut adjacency = vec![Vec::new(); n];
    for (id, t) in a.transitions.iter().enumerate() {
        adjacency[t.src].push((id, t.dst));
    }

    // Iterative Tarjan.
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<StateId> = Vec::new();
    let mut next_index = 0usize;
    let mut components: Vec<Vec<StateId>> = Vec::new();
    // (state, next adjacency position to explore)
    let mut call_stack: Vec<(StateId, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call_stack.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call_stack.last_mut() {
            if let Some(&(_, w)) = adjacency[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }

    components.sort_by_key(|c| c[0]);

    let mut component_of = vec![usize::MAX; n];
    for (i, c) in components.iter().enumerate() {
        for &s in c {
            component_of[s] = i;
        }
    }

    let mut sccs: Vec<Scc> = components
        .into_iter()
        .map(|members| Scc {
            trivial: members.len() == 1,
            members,
            internal_transitions: Vec::new(),
            color_union: ColorSet::EMPTY,
        })
        .collect();
    for (id, t) in a.transitions.iter().enumerate() {
        if component_of[t.src] == component_of[t.dst] {
            let scc = &mut sccs[component_of[t.src]];
            scc.internal_transitions.push(id);
            scc.color_union = scc.color_union.union(t.colors);
            scc.trivial = false;
        }
    }
    sccs
}

/// A Büchi accepting SCC is nontrivial and covers all `k` colors
/// (vacuously for `k = 0`, where every infinite run is accepted).
pub fn is_accepting(scc: &Scc, color_count: usize) -> bool {
    !scc.trivial && scc.color_union.contains_all(color_count)
}

/// A state of the level graph: a copy of an original state at some level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelState {
    pub original: StateId,
    /// In `1..=k`.
    pub level: usize,
}

/// An edge of the level graph, remembering which original transition it
/// copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelEdge {
    pub src: usize,
    pub dst: usize,
    pub weight: i64,
    pub original: TransitionId,
    /// Level `k -> 1` edge carrying the single accepting color.
    pub back_edge: bool,
}

/// Level graph of one SCC.
///
/// Level-1 states are identified with their originals: prefix energies of
/// the surrounding automaton are read off at the level-1 entry points.
#[derive(Debug, Clone)]
pub struct DegeneralizedScc {
    members: Vec<StateId>,
    member_pos: Vec<usize>,
    levels: usize,
    pub edges: Vec<LevelEdge>,
    /// Indices into `edges`, ascending by original transition id.
    pub back_edges: Vec<usize>,
}

impl DegeneralizedScc {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn members(&self) -> &[StateId] {
        &self.members
    }

    pub fn level_state_count(&self) -> usize {
        self.members.len() * self.levels
    }

    /// Dense id of `(original, level)`; `None` if the state is not a member.
    pub fn level_state_id(&self, original: StateId, level: usize) -> Option<usize> {
        debug_assert!(level >= 1 && level <= self.levels);
        let pos = *self.member_pos.get(original)?;
        if pos == usize::MAX {
            return None;
        }
        Some(pos * self.levels + (level - 1))
    }

    pub fn level_state(&self, id: usize) -> LevelState {
        LevelState {
            original: self.members[id / self.levels],
            level: id % self.levels + 1,
        }
    }

    /// View of the level graph for the energy fixed point.
    pub fn energy_graph(&self) -> EnergyGraph {
        EnergyGraph {
            state_count: self.level_state_count(),
            edges: self
                .edges
                .iter()
                .map(|e| EnergyEdge {
                    src: e.src,
                    dst: e.dst,
                    weight: e.weight,
                })
                .collect(),
        }
    }
}

/// Degeneralize one accepting SCC into its level graph.
///
/// With `k = 0` the SCC is treated as having one virtual color carried by
/// every transition, so the graph has a single level and every internal
/// transition is a back-edge.
pub fn degeneralize_scc(a: &WeightedBuchiAutomaton, scc: &Scc) -> DegeneralizedScc {
    let levels = a.color_count.max(1);
    let virtual_color = a.color_count == 0;
    let mut member_pos = vec![usize::MAX; a.state_count];
    for (pos, &s) in scc.members.iter().enumerate() {
        member_pos[s] = pos;
    }
    let mut out = DegeneralizedScc {
        members: scc.members.clone(),
        member_pos,
        levels,
        edges: Vec::new(),
        back_edges: Vec::new(),
    };
    for level in 1..=levels {
        for &id in &scc.internal_transitions {
            let t = &a.transitions[id];
            let advances = virtual_color || t.colors.contains(level - 1);
            let (dst_level, back_edge) = if !advances {
                (level, false)
            } else if level == levels {
                (1, true)
            } else {
                (level + 1, false)
            };
            let edge_index = out.edges.len();
            out.edges.push(LevelEdge {
                src: out.level_state_id(t.src, level).unwrap(),
                dst: out.level_state_id(t.dst, dst_level).unwrap(),
                weight: t.weight,
                original: id,
                back_edge,
            });
            if back_edge {
                out.back_edges.push(edge_index);
            }
        }
    }
    out
}

/// Whole-automaton counting construction: `n * k` states, one color, the
/// original colors folded into level changes.  Requires `k >= 1`.
///
/// Not on the decision path; kept as an independently testable realization
/// of the same language-preserving construction.
pub fn degeneralize_full(a: &WeightedBuchiAutomaton) -> WeightedBuchiAutomaton {
    let k = a.color_count;
    assert!(k >= 1, "degeneralize_full requires at least one color");
    let id_of = |state: StateId, level: usize| state * k + (level - 1);
    let mut out =
        WeightedBuchiAutomaton::new(a.alphabet_len, 1, a.state_count * k, id_of(a.initial, 1));
    for level in 1..=k {
        for t in &a.transitions {
            let advances = t.colors.contains(level - 1);
            let (dst_level, colors) = if !advances {
                (level, ColorSet::EMPTY)
            } else if level == k {
                (1, ColorSet::singleton(0))
            } else {
                (level + 1, ColorSet::EMPTY)
            };
            out.add_labeled_transition(
                id_of(t.src, level),
                id_of(t.dst, dst_level),
                t.letter,
                t.weight,
                colors,
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn satellite() -> WeightedBuchiAutomaton {
        let mut a = WeightedBuchiAutomaton::new(0, 0, 2, 0);
        a.add_transition(0, 1, -350, ColorSet::EMPTY);
        a.add_transition(1, 0, 2200, ColorSet::EMPTY);
        a
    }

    /// Three states; colors: 0 on the -1 self-loop, 1 on the -10 edge.
    fn double_check_example() -> WeightedBuchiAutomaton {
        let mut a = WeightedBuchiAutomaton::new(0, 2, 3, 0);
        a.add_transition(0, 1, 30, ColorSet::EMPTY);
        a.add_transition(1, 2, 0, ColorSet::EMPTY);
        a.add_transition(2, 1, -10, ColorSet::singleton(1));
        a.add_transition(2, 2, 1, ColorSet::EMPTY);
        a.add_transition(2, 2, -1, ColorSet::singleton(0));
        a
    }

    #[test]
    fn satellite_is_one_cycle() {
        let sccs = find_sccs(&satellite());
        assert_eq!(sccs.len(), 1);
        assert_eq!(sccs[0].members, vec![0, 1]);
        assert!(sccs[0].color_union.is_empty());
        assert!(!sccs[0].trivial);
    }

    #[test]
    fn double_check_sccs() {
        let sccs = find_sccs(&double_check_example());
        assert_eq!(sccs.len(), 2);
        assert_eq!(sccs[0].members, vec![0]);
        assert!(sccs[0].trivial);
        assert_eq!(sccs[1].members, vec![1, 2]);
        assert_eq!(sccs[1].color_union, ColorSet::from_indices([0, 1]));
    }

    #[test]
    fn single_state_without_loop_is_trivial() {
        let a = WeightedBuchiAutomaton::new(0, 0, 1, 0);
        let sccs = find_sccs(&a);
        assert_eq!(sccs.len(), 1);
        assert!(sccs[0].trivial);
    }

    #[test]
    fn acceptance_filter() {
        let a = double_check_example();
        let sccs = find_sccs(&a);
        assert!(!is_accepting(&sccs[0], 2));
        assert!(is_accepting(&sccs[1], 2));

        let plain = find_sccs(&satellite());
        assert!(is_accepting(&plain[0], 0));
    }

    #[test]
    fn level_graph_of_double_check_scc() {
        let a = double_check_example();
        let sccs = find_sccs(&a);
        let gs = degeneralize_scc(&a, &sccs[1]);
        assert_eq!(gs.level_state_count(), 4);
        assert_eq!(gs.back_edges.len(), 1);
        let back = &gs.edges[gs.back_edges[0]];
        assert_eq!(back.weight, -10);
        let src = gs.level_state(back.src);
        let dst = gs.level_state(back.dst);
        assert_eq!((src.original, src.level), (2, 2));
        assert_eq!((dst.original, dst.level), (1, 1));
    }

    #[test]
    fn back_edges_run_from_last_to_first_level() {
        let a = double_check_example();
        let sccs = find_sccs(&a);
        let gs = degeneralize_scc(&a, &sccs[1]);
        for &idx in &gs.back_edges {
            let e = &gs.edges[idx];
            assert!(e.back_edge);
            assert_eq!(gs.level_state(e.src).level, gs.levels());
            assert_eq!(gs.level_state(e.dst).level, 1);
        }
    }

    #[test]
    fn colorless_scc_turns_every_transition_into_a_back_edge() {
        let a = satellite();
        let sccs = find_sccs(&a);
        let gs = degeneralize_scc(&a, &sccs[0]);
        assert_eq!(gs.levels(), 1);
        assert_eq!(gs.back_edges.len(), 2);
        assert_eq!(gs.level_state_count(), 2);
    }

    #[test]
    fn level_paths_project_onto_original_paths() {
        let a = double_check_example();
        let sccs = find_sccs(&a);
        let gs = degeneralize_scc(&a, &sccs[1]);
        for e in &gs.edges {
            let t = &a.transitions[e.original];
            assert_eq!(gs.level_state(e.src).original, t.src);
            assert_eq!(gs.level_state(e.dst).original, t.dst);
            assert_eq!(e.weight, t.weight);
        }
    }

    #[test]
    fn full_degeneralization_sizes() {
        let a = double_check_example();
        let d = degeneralize_full(&a);
        assert_eq!(d.state_count, 6);
        assert_eq!(d.color_count, 1);
        assert_eq!(d.initial, 0);
        assert_eq!(d.transitions.len(), a.transitions.len() * 2);
    }

    #[test]
    fn single_color_degeneralization_is_isomorphic() {
        let mut a = WeightedBuchiAutomaton::new(0, 1, 2, 0);
        a.add_transition(0, 1, 3, ColorSet::singleton(0));
        a.add_transition(1, 0, -2, ColorSet::EMPTY);
        let d = degeneralize_full(&a);
        assert_eq!(d.state_count, 2);
        for (t, original) in d.transitions.iter().zip(a.transitions.iter()) {
            assert_eq!(t.src, original.src);
            assert_eq!(t.dst, original.dst);
            assert_eq!(t.weight, original.weight);
            assert_eq!(t.colors.is_empty(), original.colors.is_empty());
        }
    }

    /// Any cycle through a back-edge projects to a cycle seeing all colors:
    /// enumerate simple cycles of the small level graph and check.
    #[test]
    fn back_edge_cycles_cover_all_colors() {
        let a = double_check_example();
        let sccs = find_sccs(&a);
        let gs = degeneralize_scc(&a, &sccs[1]);
        let n = gs.level_state_count();
        // DFS over edge paths up to length n+1 that return to their start
        // and use a back-edge.
        fn search(
            gs: &DegeneralizedScc,
            a: &WeightedBuchiAutomaton,
            start: usize,
            at: usize,
            path: &mut Vec<usize>,
            max_len: usize,
        ) {
            if !path.is_empty() && at == start {
                if path.iter().any(|&e| gs.edges[e].back_edge) {
                    let colors = path.iter().fold(ColorSet::EMPTY, |acc, &e| {
                        acc.union(a.transitions[gs.edges[e].original].colors)
                    });
                    assert!(colors.contains_all(a.color_count));
                }
                return;
            }
            if path.len() >= max_len {
                return;
            }
            for (i, e) in gs.edges.iter().enumerate() {
                if e.src == at && !path.contains(&i) {
                    path.push(i);
                    search(gs, a, start, e.dst, path, max_len);
                    path.pop();
                }
            }
        }
        for start in 0..n {
            search(&gs, &a, start, start, &mut Vec::new(), n + 1);
        }
    }
}
