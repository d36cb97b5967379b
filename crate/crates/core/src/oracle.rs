//! Brute-force reference decision procedure for small instances.
//!
//! Explores the finite product of states, integer energies `0..=b` and
//! degeneralization levels explicitly.  Deliberately shares no code with
//! the main algorithm: levels are tracked inline rather than through the
//! SCC-local construction, and cycles are found by plain reachability.
//! Only intended for tests and debugging; a strict size guard applies.

use crate::automaton::{EnergyConfig, StateId, WeightedBuchiAutomaton};

/// Maximum number of product nodes the oracle will materialize.
pub const ORACLE_NODE_LIMIT: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("product too large for the oracle: {nodes} nodes exceed the limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },
}

/// Node of the product graph: (state, energy, level).
///
/// With `k` colors the level ranges over `1..=k`; a colorless automaton is
/// treated as one virtual color carried by every transition, so every cycle
/// is accepting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ProductNode {
    state: StateId,
    energy: i64,
    level: usize,
}

struct Product<'a> {
    automaton: &'a WeightedBuchiAutomaton,
    bound: i64,
    levels: usize,
}

impl<'a> Product<'a> {
    fn new(automaton: &'a WeightedBuchiAutomaton, cfg: EnergyConfig) -> Result<Self, OracleError> {
        let levels = automaton.color_count.max(1);
        let nodes = automaton
            .state_count
            .saturating_mul(cfg.bound as usize + 1)
            .saturating_mul(levels);
        if nodes > ORACLE_NODE_LIMIT {
            return Err(OracleError::TooLarge {
                nodes,
                limit: ORACLE_NODE_LIMIT,
            });
        }
        Ok(Product {
            automaton,
            bound: cfg.bound_i64(),
            levels,
        })
    }

    fn index(&self, node: ProductNode) -> usize {
        (node.state * (self.bound as usize + 1) + node.energy as usize) * self.levels
            + (node.level - 1)
    }

    fn node_count(&self) -> usize {
        self.automaton.state_count * (self.bound as usize + 1) * self.levels
    }

    /// Successors of a node; the bool marks accepting (level k -> 1) steps.
    fn successors(&self, node: ProductNode) -> Vec<(ProductNode, bool)> {
        let mut out = Vec::new();
        for t in &self.automaton.transitions {
            if t.src != node.state {
                continue;
            }
            let energy = (node.energy + t.weight).min(self.bound);
            if energy < 0 {
                continue;
            }
            let advances = if self.automaton.color_count == 0 {
                true
            } else {
                t.colors.contains(node.level - 1)
            };
            let (level, accepting) = if !advances {
                (node.level, false)
            } else if node.level == self.levels {
                (1, true)
            } else {
                (node.level + 1, false)
            };
            out.push((
                ProductNode {
                    state: t.dst,
                    energy,
                    level,
                },
                accepting,
            ));
        }
        out
    }

    fn reachable(&self, from: ProductNode) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut queue = vec![from];
        seen[self.index(from)] = true;
        while let Some(node) = queue.pop() {
            for (next, _) in self.successors(node) {
                let idx = self.index(next);
                if !seen[idx] {
                    seen[idx] = true;
                    queue.push(next);
                }
            }
        }
        seen
    }
}

/// Decide the energy Büchi problem by exhaustive search: is there a Büchi
/// accepted run whose energy stays in `[0, b]`?
///
/// True iff some accepting product edge lies on a cycle reachable from the
/// start node.
pub fn brute_force(
    automaton: &WeightedBuchiAutomaton,
    cfg: EnergyConfig,
) -> Result<bool, OracleError> {
    if automaton.state_count == 0 {
        return Ok(false);
    }
    let product = Product::new(automaton, cfg)?;
    let start = ProductNode {
        state: automaton.initial,
        energy: cfg.start_energy(),
        level: 1,
    };
    let from_start = product.reachable(start);

    // Every accepting edge (u -> v) reachable from the start closes an
    // accepting cycle iff u is reachable again from v.
    let mut nodes = Vec::new();
    for state in 0..automaton.state_count {
        for energy in 0..=cfg.bound as i64 {
            for level in 1..=product.levels {
                let node = ProductNode {
                    state,
                    energy,
                    level,
                };
                if from_start[product.index(node)] {
                    nodes.push(node);
                }
            }
        }
    }
    for &u in &nodes {
        for (v, accepting) in product.successors(u) {
            if !accepting {
                continue;
            }
            let from_v = product.reachable(v);
            if from_v[product.index(u)] {
                // Self-consistency: the plain (state, energy) search must
                // dominate every node of the accepting cycle.
                debug_assert!(
                    brute_force_max_e(automaton, automaton.initial, cfg)?[u.state]
                        .is_some_and(|best| best >= u.energy),
                    "energy search misses a node the cycle search reaches"
                );
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Exact per-state maximum energy over all feasible runs from `source`,
/// computed by forward search over the (state, energy) product.
///
/// Returns `None` for states no feasible run reaches.
pub fn brute_force_max_e(
    automaton: &WeightedBuchiAutomaton,
    source: StateId,
    cfg: EnergyConfig,
) -> Result<Vec<Option<i64>>, OracleError> {
    let nodes = automaton.state_count.saturating_mul(cfg.bound as usize + 1);
    if nodes > ORACLE_NODE_LIMIT {
        return Err(OracleError::TooLarge {
            nodes,
            limit: ORACLE_NODE_LIMIT,
        });
    }
    let bound = cfg.bound_i64();
    let width = cfg.bound as usize + 1;
    let mut seen = vec![false; automaton.state_count * width];
    let mut queue = vec![(source, cfg.start_energy())];
    seen[source * width + cfg.start_energy() as usize] = true;
    while let Some((state, energy)) = queue.pop() {
        for t in &automaton.transitions {
            if t.src != state {
                continue;
            }
            let next = (energy + t.weight).min(bound);
            if next < 0 {
                continue;
            }
            let idx = t.dst * width + next as usize;
            if !seen[idx] {
                seen[idx] = true;
                queue.push((t.dst, next));
            }
        }
    }
    let mut best = vec![None; automaton.state_count];
    for state in 0..automaton.state_count {
        for energy in (0..=bound).rev() {
            if seen[state * width + energy as usize] {
                best[state] = Some(energy);
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::ColorSet;

    fn satellite() -> WeightedBuchiAutomaton {
        let mut a = WeightedBuchiAutomaton::new(0, 0, 2, 0);
        a.add_transition(0, 1, -350, ColorSet::EMPTY);
        a.add_transition(1, 0, 2200, ColorSet::EMPTY);
        a
    }

    #[test]
    fn satellite_thresholds() {
        let a = satellite();
        assert!(brute_force(&a, EnergyConfig::new(360, 750)).unwrap());
        assert!(!brute_force(&a, EnergyConfig::new(349, 750)).unwrap());
    }

    #[test]
    fn max_e_on_double_check_example() {
        // 0 --30--> 1 --0--> 2 with a +1 self-loop on 2 and 2 --(-10)--> 1.
        let mut a = WeightedBuchiAutomaton::new(0, 0, 3, 0);
        a.add_transition(0, 1, 30, ColorSet::EMPTY);
        a.add_transition(1, 2, 0, ColorSet::EMPTY);
        a.add_transition(2, 1, -10, ColorSet::EMPTY);
        a.add_transition(2, 2, 1, ColorSet::EMPTY);
        a.add_transition(2, 2, -1, ColorSet::EMPTY);
        let e = brute_force_max_e(&a, 0, EnergyConfig::new(0, 30)).unwrap();
        assert_eq!(e, vec![Some(0), Some(30), Some(30)]);
    }

    #[test]
    fn max_e_unreachable_state() {
        let mut a = WeightedBuchiAutomaton::new(0, 0, 2, 0);
        a.add_transition(0, 1, -7, ColorSet::EMPTY);
        let e = brute_force_max_e(&a, 0, EnergyConfig::new(5, 9)).unwrap();
        assert_eq!(e, vec![Some(5), None]);
    }

    #[test]
    fn size_guard_trips() {
        let a = WeightedBuchiAutomaton::new(0, 0, 5000, 0);
        let err = brute_force(&a, EnergyConfig::new(0, 4_000_000)).unwrap_err();
        assert!(matches!(err, OracleError::TooLarge { .. }));
    }

    #[test]
    fn verdict_independent_of_state_numbering() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let mut a = WeightedBuchiAutomaton::new(0, 2, n, rng.gen_range(0..n));
            for s in 0..n {
                for d in 0..n {
                    if rng.gen_bool(0.4) {
                        let colors = ColorSet::from_indices((0..2).filter(|_| rng.gen_bool(0.4)));
                        a.add_transition(s, d, rng.gen_range(-3..=3), colors);
                    }
                }
            }
            let cfg = EnergyConfig::new(rng.gen_range(0..=6), rng.gen_range(0..=6));
            let verdict = brute_force(&a, cfg).unwrap();

            // Relabel states by a random permutation.
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut b = WeightedBuchiAutomaton::new(0, 2, n, perm[a.initial]);
            for t in &a.transitions {
                b.add_transition(perm[t.src], perm[t.dst], t.weight, t.colors);
            }
            assert_eq!(brute_force(&b, cfg).unwrap(), verdict);
        }
    }
}
